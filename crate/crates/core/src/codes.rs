//! Binary linear codes: BCH over GF(2^7), Reed-Muller, and random linear
//! codes, all carried by one generator/parity-check representation.

use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::gf128::{self, minimal_polynomial, poly_mul};
use crate::gf2::{BitMatrix, BitWord, Run};
use crate::markov::binomial;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeFamily {
    /// Narrow-sense primitive BCH of length 127 with designed correction `t`.
    Bch {
        t: usize,
        primitive_poly: u32,
    },
    ReedMuller {
        r: usize,
        m: usize,
    },
    Random {
        seed: u64,
    },
    Custom,
}

impl CodeFamily {
    pub fn tag(&self) -> &'static str {
        match self {
            CodeFamily::Bch { .. } => "bch",
            CodeFamily::ReedMuller { .. } => "rm",
            CodeFamily::Random { .. } => "rlc",
            CodeFamily::Custom => "custom",
        }
    }
}

/// Prefix sums of parity-check columns: the syndrome of the ones in
/// `a..b` is `prefix[a] ^ prefix[b]`.
#[derive(Debug, Clone)]
struct SyndromeTable {
    words: usize,
    prefix: Vec<u64>,
}

impl SyndromeTable {
    fn new(parity: &BitMatrix) -> Self {
        let (r, n) = (parity.rows(), parity.cols());
        let words = r.div_ceil(64).max(1);
        let mut prefix = vec![0u64; (n + 1) * words];
        for j in 0..n {
            for w in 0..words {
                prefix[(j + 1) * words + w] = prefix[j * words + w];
            }
            for i in 0..r {
                if parity.get(i, j) {
                    prefix[(j + 1) * words + i / 64] ^= 1 << (i % 64);
                }
            }
        }
        SyndromeTable { words, prefix }
    }

    #[inline]
    fn accumulate(&self, acc: &mut [u64], runs: &[Run]) {
        let w = self.words;
        for r in runs {
            let (a, b) = (r.start * w, r.end() * w);
            for (i, x) in acc.iter_mut().enumerate().take(w) {
                *x ^= self.prefix[a + i] ^ self.prefix[b + i];
            }
        }
    }
}

/// An `(n, k)` binary linear code.
#[derive(Clone)]
pub struct LinearCode {
    n: usize,
    k: usize,
    generator: BitMatrix,
    parity: BitMatrix,
    min_distance: Option<usize>,
    family: CodeFamily,
    table: SyndromeTable,
}

impl LinearCode {
    /// Builds a code from a full-rank generator matrix.
    pub fn from_generator(generator: BitMatrix, family: CodeFamily, min_distance: Option<usize>) -> Result<Self> {
        let parity = generator.parity_from_generator()?;
        debug_assert!(parity.mul(&generator.transpose())?.is_zero());
        let table = SyndromeTable::new(&parity);
        Ok(LinearCode {
            n: generator.cols(),
            k: generator.rows(),
            generator,
            parity,
            min_distance,
            family,
            table,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    pub fn parity(&self) -> &BitMatrix {
        &self.parity
    }

    pub fn min_distance(&self) -> Option<usize> {
        self.min_distance
    }

    pub fn family(&self) -> &CodeFamily {
        &self.family
    }

    pub fn name(&self) -> String {
        let fam = match self.family {
            CodeFamily::Bch { .. } => "BCH",
            CodeFamily::ReedMuller { .. } => "RM",
            CodeFamily::Random { .. } => "RLC",
            CodeFamily::Custom => "Code",
        };
        format!("{fam}({},{})", self.n, self.k)
    }

    /// Message `u` (length `k`) times the generator.
    pub fn encode(&self, u: &BitWord) -> Result<BitWord> {
        self.generator.vec_mat_mul(u)
    }

    /// Packed syndrome `H · wᵀ`.
    pub fn syndrome(&self, w: &BitWord) -> Result<Vec<u64>> {
        check_len(self.n, w.len())?;
        let mut acc = vec![0u64; self.table.words];
        self.table.accumulate(&mut acc, &w.runs());
        Ok(acc)
    }

    /// Code-book membership: `H · wᵀ = 0`.
    pub fn membership(&self, w: &BitWord) -> Result<bool> {
        check_len(self.n, w.len())?;
        Ok(self.parity.mat_vec_mul(w)?.is_zero())
    }

    /// Whether `probe ⊕ syndrome(runs)` is zero, where `probe` is the
    /// syndrome of a received word.
    #[inline]
    pub fn syndrome_matches(&self, probe: &[u64], runs: &[Run]) -> bool {
        if self.table.words == 1 {
            let p = &self.table.prefix;
            let mut s = probe[0];
            for r in runs {
                s ^= p[r.start] ^ p[r.end()];
            }
            s == 0
        } else {
            let mut acc = probe.to_vec();
            self.table.accumulate(&mut acc, runs);
            acc.iter().all(|&x| x == 0)
        }
    }

    /// Metadata line for the `codegen` sidecar.
    pub fn metadata_line(&self) -> String {
        let d = self.min_distance.map_or("unknown".to_string(), |d| d.to_string());
        let (seed, poly) = match &self.family {
            CodeFamily::Bch { primitive_poly, .. } => ("none".to_string(), format!("{primitive_poly:#x}")),
            CodeFamily::Random { seed } => (seed.to_string(), "none".to_string()),
            _ => ("none".to_string(), "none".to_string()),
        };
        format!(
            "family={} n={} k={} d={} seed={} primitive_poly={}",
            self.family.tag(),
            self.n,
            self.k,
            d,
            seed,
            poly
        )
    }
}

impl fmt::Debug for LinearCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:?} d={:?}", self.name(), self.family, self.min_distance)
    }
}

/// Generator polynomial of the length-127 narrow-sense BCH code correcting
/// `t` errors: the lcm of the minimal polynomials of α, α^3, …, α^(2t-1).
pub fn bch_generator_polynomial(t: usize) -> u128 {
    let mut seen_cosets: Vec<usize> = Vec::new();
    let mut poly: u128 = 1;
    for i in (1..2 * t).step_by(2) {
        // skip roots already covered by an earlier cyclotomic coset
        let mut rep = i % gf128::ORDER;
        let mut c = rep;
        loop {
            c = (c * 2) % gf128::ORDER;
            rep = rep.min(c);
            if c == i % gf128::ORDER {
                break;
            }
        }
        if seen_cosets.contains(&rep) {
            continue;
        }
        seen_cosets.push(rep);
        let mp = minimal_polynomial(i);
        assert!(poly < 1 << 64, "generator polynomial degree too large");
        poly = poly_mul(poly as u64, mp);
    }
    poly
}

/// Binary BCH code of length 127 with designed correction capability `t`
/// over GF(2^7) defined by x^7 + x^3 + 1. Rows of G are shifts of g(x).
pub fn make_bch_gf128(t: usize) -> Result<LinearCode> {
    if t == 0 || t > 9 {
        return Err(Error::InvalidParameter(format!(
            "unsupported BCH correction capability t = {t}"
        )));
    }
    let n = gf128::ORDER;
    let gpoly = bch_generator_polynomial(t);
    let deg = 127 - gpoly.leading_zeros() as usize;
    let k = n - deg;
    let rows = (0..k)
        .map(|shift| BitWord::from_bits((0..n).map(|j| j >= shift && (gpoly >> (j - shift)) & 1 == 1)))
        .collect();
    let g = BitMatrix::from_rows(n, rows)?;
    LinearCode::from_generator(
        g,
        CodeFamily::Bch {
            t,
            primitive_poly: gf128::PRIMITIVE_POLY,
        },
        Some(2 * t + 1),
    )
}

/// BCH(127, 106), t = 3, d = 7.
pub fn make_bch() -> LinearCode {
    make_bch_gf128(3).expect("BCH(127,106) construction")
}

/// Monomials of degree `<= r` in `m` variables as bit masks, ordered by
/// degree and then by mask value.
pub fn rm_monomials(r: usize, m: usize) -> Vec<u32> {
    let mut out: Vec<u32> = (0u32..1 << m).filter(|s| s.count_ones() as usize <= r).collect();
    out.sort_by_key(|s| (s.count_ones(), *s));
    out
}

/// Evaluation vector of a monomial: bit `x` is set iff every variable in
/// the mask is 1 in `x`.
pub fn rm_evaluation(mask: u32, m: usize) -> BitWord {
    BitWord::from_bits((0u32..1 << m).map(|x| x & mask == mask))
}

/// Reed-Muller code RM(r, m): n = 2^m, k = Σ_{i≤r} C(m, i), d = 2^(m-r).
pub fn make_rm(r: usize, m: usize) -> Result<LinearCode> {
    if r > m || m == 0 || m > 16 {
        return Err(Error::InvalidParameter(format!(
            "invalid Reed-Muller parameters r = {r}, m = {m}"
        )));
    }
    let rows = rm_monomials(r, m).into_iter().map(|s| rm_evaluation(s, m)).collect();
    let g = BitMatrix::from_rows(1 << m, rows)?;
    let k: u128 = (0..=r).map(|i| binomial(m as i64, i as i64)).sum();
    debug_assert_eq!(k as usize, g.rows());
    LinearCode::from_generator(g, CodeFamily::ReedMuller { r, m }, Some(1 << (m - r)))
}

/// Systematic random linear code `G = [I_k | A]` with `A` drawn from a
/// ChaCha8 stream seeded by `seed`; bits are taken from successive
/// little-endian `u64` outputs, row by row.
pub fn make_rlc(n: usize, k: usize, seed: u64) -> Result<LinearCode> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "need 0 < k <= n, got n = {n}, k = {k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = n - k;
    let rows = (0..k)
        .map(|i| {
            let mut row = BitWord::zeros(n);
            row.set(i, true);
            let mut filled = 0;
            while filled < r {
                let bits = rng.next_u64();
                for b in 0..64.min(r - filled) {
                    if (bits >> b) & 1 == 1 {
                        row.set(k + filled + b, true);
                    }
                }
                filled += 64.min(r - filled);
            }
            row
        })
        .collect();
    let g = BitMatrix::from_rows(n, rows)?;
    LinearCode::from_generator(g, CodeFamily::Random { seed }, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn bch_generator_degree() {
        let gp = bch_generator_polynomial(3);
        assert_eq!(127 - gp.leading_zeros(), 21);
        let code = make_bch();
        assert_eq!((code.n(), code.k(), code.min_distance()), (127, 106, Some(7)));
        assert_eq!(code.name(), "BCH(127,106)");
        // t = 1 is the cyclic Hamming code
        let h = make_bch_gf128(1).unwrap();
        assert_eq!(h.k(), 120);
    }

    #[test]
    fn bch_codewords() {
        let code = make_bch();
        assert!(code.membership(&BitWord::zeros(127)).unwrap());
        let gp = bch_generator_polynomial(3);
        let gword = BitWord::from_bits((0..127).map(|j| (gp >> j) & 1 == 1));
        assert!(code.membership(&gword).unwrap());
        // cyclic shift of a codeword is a codeword
        let shifted = BitWord::from_bits((0..127).map(|j| gword.get((j + 126) % 127)));
        assert!(code.membership(&shifted).unwrap());
        // narrow-sense BCH without the x + 1 factor contains all-ones
        assert!(code.membership(&BitWord::ones(127)).unwrap());
    }

    #[test]
    fn bch_sampled_distance() {
        let code = make_bch();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..2000 {
            let u = BitWord::from_bits((0..106).map(|_| rng.gen::<bool>()));
            let v = BitWord::from_bits((0..106).map(|_| rng.gen::<bool>()));
            if u == v {
                continue;
            }
            let d = crate::gf2::xor_add(&code.encode(&u).unwrap(), &code.encode(&v).unwrap()).unwrap();
            assert!(d.weight() >= 7);
        }
    }

    #[test]
    fn rm_dimensions() {
        let rm = make_rm(4, 7).unwrap();
        assert_eq!((rm.n(), rm.k(), rm.min_distance()), (128, 99, Some(8)));
        let rep = make_rm(0, 3).unwrap();
        assert_eq!((rep.n(), rep.k(), rep.min_distance()), (8, 1, Some(8)));
        assert!(rep.membership(&BitWord::ones(8)).unwrap());
        assert!(make_rm(5, 4).is_err());
    }

    #[test]
    fn rlc_is_deterministic_and_systematic() {
        let a = make_rlc(127, 106, 7).unwrap();
        let b = make_rlc(127, 106, 7).unwrap();
        assert_eq!(a.generator(), b.generator());
        assert_ne!(a.generator(), make_rlc(127, 106, 8).unwrap().generator());
        assert_eq!(a.generator().rank(), 106);
        for i in 0..106 {
            for j in 0..106 {
                assert_eq!(a.generator().get(i, j), i == j);
            }
        }
        // pinned first row so the stream cannot drift silently
        let first = make_rlc(15, 10, 1).unwrap().generator().row(0).to_string();
        assert_eq!(&first[..10], "1000000000");
        assert_eq!(first.len(), 15);
    }

    #[test]
    fn encode_examples() {
        for code in [make_bch(), make_rm(4, 7).unwrap(), make_rlc(60, 40, 3).unwrap()] {
            let k = code.k();
            assert!(code.encode(&BitWord::zeros(k)).unwrap().is_zero());
            for i in [0, k / 2, k - 1] {
                let mut u = BitWord::zeros(k);
                u.set(i, true);
                assert_eq!(&code.encode(&u).unwrap(), code.generator().row(i));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            for _ in 0..50 {
                let u = BitWord::from_bits((0..k).map(|_| rng.gen::<bool>()));
                let c = code.encode(&u).unwrap();
                assert!(code.membership(&c).unwrap());
                assert!(code.syndrome(&c).unwrap().iter().all(|&w| w == 0));
            }
            assert!(code.encode(&BitWord::zeros(k + 1)).is_err());
            assert!(code.membership(&BitWord::zeros(code.n() + 1)).is_err());
            assert!(code.parity().mul(&code.generator().transpose()).unwrap().is_zero());
        }
    }

    #[test]
    fn syndrome_table_matches_parity_product() {
        let code = make_rlc(150, 40, 5).unwrap(); // 110 parity bits, two words
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let w = BitWord::from_bits((0..150).map(|_| rng.gen_bool(0.1)));
            let direct = code.parity().mat_vec_mul(&w).unwrap();
            assert_eq!(code.syndrome(&w).unwrap(), direct.words());
            let zero_probe = vec![0u64; direct.words().len()];
            assert_eq!(code.syndrome_matches(&zero_probe, &w.runs()), direct.is_zero());
            assert!(code.syndrome_matches(&code.syndrome(&w).unwrap(), &w.runs()));
        }
    }
}
