//! Algebraic reference decoders: Berlekamp-Massey for the length-127 BCH
//! codes and Reed's majority-logic decoder for Reed-Muller codes.

use thiserror::Error as ThisError;

use crate::codes::{rm_evaluation, rm_monomials, CodeFamily, LinearCode};
use crate::error::{check_len, Error, Result};
use crate::gf128::{self, Gf128};
use crate::gf2::BitWord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ThisError)]
pub enum DecodeFailure {
    #[error("error locator degree exceeds the correction capability")]
    TooManyErrors,
    #[error("error locator does not split into distinct roots")]
    LocatorMismatch,
    #[error("corrected word is not a codeword")]
    NotCodeword,
    #[error("majority vote tie at degree {degree}")]
    MajorityTie { degree: usize },
}

/// Bounded-distance decoder interface shared by the reference decoders.
pub trait HardDecoder {
    fn block_len(&self) -> usize;

    /// Decoded codeword, or why decoding failed.
    fn decode(&self, y: &BitWord) -> Result<std::result::Result<BitWord, DecodeFailure>>;
}

/// Syndrome decoder for narrow-sense binary BCH codes of length 127.
#[derive(Debug, Clone)]
pub struct BerlekampMassey {
    code: LinearCode,
    t: usize,
}

impl BerlekampMassey {
    pub fn new(code: &LinearCode) -> Result<Self> {
        match *code.family() {
            CodeFamily::Bch { t, primitive_poly }
                if primitive_poly == gf128::PRIMITIVE_POLY && code.n() == gf128::ORDER =>
            {
                Ok(BerlekampMassey { code: code.clone(), t })
            }
            _ => Err(Error::InvalidParameter(format!(
                "Berlekamp-Massey needs a length-127 BCH code, got {}",
                code.name()
            ))),
        }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Syndromes S_1 … S_2t with S_j = y(α^j).
    pub fn syndromes(&self, y: &BitWord) -> Vec<Gf128> {
        let mut s = vec![Gf128::ZERO; 2 * self.t];
        for i in y.iter().enumerate().filter(|(_, b)| *b).map(|(i, _)| i) {
            for (j, sj) in s.iter_mut().enumerate() {
                *sj += Gf128::alpha_pow((i * (j + 1)) as i64);
            }
        }
        s
    }
}

/// Shortest LFSR generating `s`: connection polynomial and its length.
pub fn berlekamp_massey(s: &[Gf128]) -> (Vec<Gf128>, usize) {
    let mut c = vec![Gf128::ONE];
    let mut b = vec![Gf128::ONE];
    let mut len = 0usize;
    let mut shift = 1usize;
    let mut last = Gf128::ONE;
    for i in 0..s.len() {
        let mut d = s[i];
        for j in 1..=len.min(c.len() - 1) {
            d += c[j] * s[i - j];
        }
        if d.is_zero() {
            shift += 1;
            continue;
        }
        let coef = d * last.inv().expect("nonzero discrepancy base");
        let prev = c.clone();
        if c.len() < b.len() + shift {
            c.resize(b.len() + shift, Gf128::ZERO);
        }
        for (j, &bj) in b.iter().enumerate() {
            c[j + shift] += coef * bj;
        }
        if 2 * len <= i {
            len = i + 1 - len;
            b = prev;
            last = d;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    while c.len() > 1 && c.last().is_some_and(|x| x.is_zero()) {
        c.pop();
    }
    (c, len)
}

impl HardDecoder for BerlekampMassey {
    fn block_len(&self) -> usize {
        self.code.n()
    }

    fn decode(&self, y: &BitWord) -> Result<std::result::Result<BitWord, DecodeFailure>> {
        check_len(self.code.n(), y.len())?;
        let s = self.syndromes(y);
        if s.iter().all(|x| x.is_zero()) {
            return Ok(Ok(y.clone()));
        }
        let (locator, len) = berlekamp_massey(&s);
        if len > self.t {
            return Ok(Err(DecodeFailure::TooManyErrors));
        }
        if locator.len() - 1 != len {
            return Ok(Err(DecodeFailure::LocatorMismatch));
        }
        // Chien search: position i is in error iff Λ(α^-i) = 0
        let mut out = y.clone();
        let mut roots = 0;
        for i in 0..self.code.n() {
            let mut acc = Gf128::ZERO;
            for (j, &cj) in locator.iter().enumerate() {
                acc += cj * Gf128::alpha_pow(-((i * j) as i64));
            }
            if acc.is_zero() {
                out.flip(i);
                roots += 1;
            }
        }
        if roots != len {
            return Ok(Err(DecodeFailure::LocatorMismatch));
        }
        if !self.code.membership(&out)? {
            return Ok(Err(DecodeFailure::NotCodeword));
        }
        Ok(Ok(out))
    }
}

/// Reed's multi-step majority-logic decoder for RM(r, m).
#[derive(Debug, Clone)]
pub struct MajorityLogic {
    r: usize,
    m: usize,
    /// Monomials grouped by degree, with their evaluation vectors.
    layers: Vec<Vec<(u32, BitWord)>>,
}

impl MajorityLogic {
    pub fn new(code: &LinearCode) -> Result<Self> {
        match *code.family() {
            CodeFamily::ReedMuller { r, m } => Ok(Self::for_params(r, m)),
            _ => Err(Error::InvalidParameter(format!(
                "majority-logic decoding needs a Reed-Muller code, got {}",
                code.name()
            ))),
        }
    }

    pub fn for_params(r: usize, m: usize) -> Self {
        let mut layers = vec![Vec::new(); r + 1];
        for s in rm_monomials(r, m) {
            layers[s.count_ones() as usize].push((s, rm_evaluation(s, m)));
        }
        MajorityLogic { r, m, layers }
    }
}

impl HardDecoder for MajorityLogic {
    fn block_len(&self) -> usize {
        1 << self.m
    }

    fn decode(&self, y: &BitWord) -> Result<std::result::Result<BitWord, DecodeFailure>> {
        let n = 1usize << self.m;
        check_len(n, y.len())?;
        let mut residual = y.clone();
        let mut sums = vec![false; n];
        for degree in (0..=self.r).rev() {
            let mut peel = BitWord::zeros(n);
            let votes = 1usize << (self.m - degree);
            for (mask, eval) in &self.layers[degree] {
                // each check sum covers the coset where the free variables
                // outside the monomial are fixed
                sums.iter_mut().for_each(|s| *s = false);
                for x in 0..n {
                    if residual.get(x) {
                        let key = x & !(*mask as usize);
                        sums[key] = !sums[key];
                    }
                }
                let ones = (0..n).filter(|&x| x & *mask as usize == 0 && sums[x]).count();
                if 2 * ones == votes {
                    return Ok(Err(DecodeFailure::MajorityTie { degree }));
                }
                if 2 * ones > votes {
                    peel ^= eval;
                }
            }
            residual ^= &peel;
        }
        // what is left is the error estimate
        let mut out = y.clone();
        out ^= &residual;
        Ok(Ok(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{make_bch, make_bch_gf128, make_rm};
    use crate::gf2::xor_add;
    use rand::seq::index::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_codeword(code: &LinearCode, rng: &mut impl Rng) -> BitWord {
        let u = BitWord::from_bits((0..code.k()).map(|_| rng.gen::<bool>()));
        code.encode(&u).unwrap()
    }

    fn random_error(n: usize, w: usize, rng: &mut impl Rng) -> BitWord {
        let mut e = BitWord::zeros(n);
        for i in sample(rng, n, w) {
            e.set(i, true);
        }
        e
    }

    #[test]
    fn bch_corrects_up_to_three_errors() {
        let code = make_bch();
        let dec = BerlekampMassey::new(&code).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for trial in 0..10_000 {
            let c = random_codeword(&code, &mut rng);
            let e = random_error(127, trial % 4, &mut rng);
            let y = xor_add(&c, &e).unwrap();
            assert_eq!(dec.decode(&y).unwrap(), Ok(c));
        }
    }

    #[test]
    fn bch_beyond_radius_fails_or_miscorrects_to_codeword() {
        let code = make_bch();
        let dec = BerlekampMassey::new(&code).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut failures = 0;
        for _ in 0..500 {
            let c = random_codeword(&code, &mut rng);
            let y = xor_add(&c, &random_error(127, 4, &mut rng)).unwrap();
            match dec.decode(&y).unwrap() {
                Ok(w) => {
                    assert!(code.membership(&w).unwrap());
                    assert_ne!(w, c);
                    assert!(xor_add(&w, &y).unwrap().weight() <= 3);
                }
                Err(_) => failures += 1,
            }
        }
        assert!(failures > 0);
    }

    #[test]
    fn larger_t_bch() {
        let code = make_bch_gf128(5).unwrap();
        let dec = BerlekampMassey::new(&code).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let c = random_codeword(&code, &mut rng);
            let y = xor_add(&c, &random_error(127, 5, &mut rng)).unwrap();
            assert_eq!(dec.decode(&y).unwrap(), Ok(c));
        }
    }

    #[test]
    fn wrong_family_is_rejected() {
        let rm = make_rm(4, 7).unwrap();
        assert!(BerlekampMassey::new(&rm).is_err());
        assert!(MajorityLogic::new(&make_bch()).is_err());
    }

    #[test]
    fn repetition_code_majority() {
        let rep = make_rm(0, 3).unwrap();
        let dec = MajorityLogic::new(&rep).unwrap();
        let w = |s: &str| s.parse::<BitWord>().unwrap();
        assert_eq!(dec.decode(&w("00010011")).unwrap(), Ok(w("00000000")));
        assert_eq!(dec.decode(&w("01110111")).unwrap(), Ok(w("11111111")));
        // four ones out of eight is an even split
        assert_eq!(
            dec.decode(&w("00010111")).unwrap(),
            Err(DecodeFailure::MajorityTie { degree: 0 })
        );
    }

    #[test]
    fn rm_corrects_below_half_distance() {
        for (r, m) in [(4usize, 7usize), (1, 5), (2, 6)] {
            let code = make_rm(r, m).unwrap();
            let dec = MajorityLogic::new(&code).unwrap();
            let n = code.n();
            let radius = ((1 << (m - r)) - 1) / 2;
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            for trial in 0..2_000 {
                let c = random_codeword(&code, &mut rng);
                let y = xor_add(&c, &random_error(n, trial % (radius + 1), &mut rng)).unwrap();
                assert_eq!(dec.decode(&y).unwrap(), Ok(c), "RM({r},{m})");
            }
        }
    }

    #[test]
    fn rm_output_is_always_a_codeword() {
        let code = make_rm(4, 7).unwrap();
        let dec = MajorityLogic::new(&code).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut ties = 0;
        for _ in 0..500 {
            let y = BitWord::from_bits((0..128).map(|_| rng.gen_bool(0.05)));
            match dec.decode(&y).unwrap() {
                Ok(w) => assert!(code.membership(&w).unwrap()),
                Err(DecodeFailure::MajorityTie { .. }) => ties += 1,
                Err(e) => panic!("unexpected {e}"),
            }
        }
        assert!(ties < 500);
    }

    #[test]
    fn berlekamp_massey_finds_lfsr() {
        // s_i = α^i satisfies s_i = α·s_{i-1}: locator 1 + α x
        let s: Vec<Gf128> = (1..=6).map(Gf128::alpha_pow).collect();
        let (c, len) = berlekamp_massey(&s);
        assert_eq!(len, 1);
        assert_eq!(c, vec![Gf128::ONE, Gf128::alpha_pow(1)]);
    }
}
