//! Exact probability model of the two-state (Good/Bad) Markov noise channel.
//!
//! The chain emits a 0 in the Good state and a 1 in the Bad state. It moves
//! Good→Bad with probability `b` and Bad→Good with probability `g`, and the
//! first symbol is drawn from the stationary distribution. Every noise word
//! with the same burst count, weight and boundary case has the same
//! probability, which is what makes class-wise pattern generation possible.

use std::fmt;

use crate::error::{Error, Result};
use crate::gf2::BitWord;

/// Tolerance used to snap a numerically memoryless chain onto `b = 1 - g`.
const MEMORYLESS_EPS: f64 = 1e-12;

/// Boundary behaviour of a noise word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BurstCase {
    /// Starts and ends with 0.
    Case0,
    /// Starts with 1, ends with 0.
    Case1Start,
    /// Starts with 0, ends with 1.
    Case1End,
    /// Starts and ends with 1.
    Case2,
}

impl BurstCase {
    /// Emission order within a class: most likely first.
    pub const DESCENDING: [BurstCase; 4] = [
        BurstCase::Case2,
        BurstCase::Case1Start,
        BurstCase::Case1End,
        BurstCase::Case0,
    ];

    pub fn starts_with_one(self) -> bool {
        matches!(self, BurstCase::Case1Start | BurstCase::Case2)
    }

    pub fn ends_with_one(self) -> bool {
        matches!(self, BurstCase::Case1End | BurstCase::Case2)
    }

    /// Number of boundary ones, i.e. the power of `(1-b)/g` in the pattern
    /// probability.
    pub fn edge_ones(self) -> u32 {
        self.starts_with_one() as u32 + self.ends_with_one() as u32
    }

    pub fn from_edges(starts_with_one: bool, ends_with_one: bool) -> Self {
        match (starts_with_one, ends_with_one) {
            (false, false) => BurstCase::Case0,
            (true, false) => BurstCase::Case1Start,
            (false, true) => BurstCase::Case1End,
            (true, true) => BurstCase::Case2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BurstCase::Case0 => "case0",
            BurstCase::Case1Start => "case1s",
            BurstCase::Case1End => "case1e",
            BurstCase::Case2 => "case2",
        }
    }
}

impl fmt::Display for BurstCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A family of equiprobable noise words: `m` bursts, `l` ones, one boundary
/// case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubclassId {
    pub m: usize,
    pub l: usize,
    pub case: BurstCase,
}

impl SubclassId {
    pub const ZERO: SubclassId = SubclassId {
        m: 0,
        l: 0,
        case: BurstCase::Case0,
    };

    pub fn new(m: usize, l: usize, case: BurstCase) -> Self {
        SubclassId { m, l, case }
    }

    /// Checks the structural invariants for block length `n`. A subclass can
    /// satisfy these and still be empty (see [`subclass_count`]).
    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |why: &str| Err(Error::InvalidParameter(format!("{self:?} for n = {n}: {why}")));
        if self.m == 0 {
            if self.l != 0 || self.case != BurstCase::Case0 {
                return bad("m = 0 requires the all-zero Case0 pattern");
            }
            return Ok(());
        }
        if self.l < self.m || self.l > n {
            return bad("need m <= l <= n");
        }
        if self.m > n - self.l + 1 {
            return bad("need m <= n - l + 1");
        }
        if self.case == BurstCase::Case2 && self.m == 1 && self.l != n {
            return bad("a single burst touching both ends must fill the word");
        }
        Ok(())
    }

    /// Classifies a concrete noise word.
    pub fn of_word(w: &BitWord) -> SubclassId {
        let runs = w.runs();
        if runs.is_empty() {
            return SubclassId::ZERO;
        }
        let n = w.len();
        let case = BurstCase::from_edges(w.get(0), w.get(n - 1));
        SubclassId {
            m: runs.len(),
            l: w.weight(),
            case,
        }
    }
}

impl fmt::Display for SubclassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(m={}, l={}, {})", self.m, self.l, self.case)
    }
}

/// `C(a, b)` with `C(a, b) = 0` for `b < 0` or `a < b`; saturates at `u128::MAX`.
pub fn binomial(a: i64, b: i64) -> u128 {
    if b < 0 || a < b {
        return 0;
    }
    let b = b.min(a - b) as u128;
    let a = a as u128;
    let mut acc: u128 = 1;
    for i in 0..b {
        // acc * (a - i) / (i + 1) is integral; cancel the common factor first
        let d = gcd(acc, i + 1);
        acc = match (acc / d).checked_mul((a - i) / ((i + 1) / d)) {
            Some(v) => v,
            None => return u128::MAX,
        };
    }
    acc
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Number of length-`n` words in the subclass.
pub fn subclass_count(n: usize, id: SubclassId) -> Result<u128> {
    id.validate(n)?;
    let (n, m, l) = (n as i64, id.m as i64, id.l as i64);
    if m == 0 {
        return Ok(1);
    }
    let ones = binomial(l - 1, m - 1);
    let zeros = match id.case {
        BurstCase::Case0 => binomial(n - l - 1, m),
        BurstCase::Case1Start | BurstCase::Case1End => binomial(n - l - 1, m - 1),
        BurstCase::Case2 if m == 1 => (l == n) as u128,
        BurstCase::Case2 => binomial(n - l - 1, m - 2),
    };
    Ok(ones.saturating_mul(zeros))
}

/// Rounding applied to the real-valued interlacing offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeltaRounding {
    #[default]
    Floor,
    Round,
}

/// Parameters of the two-state chain for words of length `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovParams {
    b: f64,
    g: f64,
    n: usize,
}

impl MarkovParams {
    /// Validates `0 < b < g <= 1`, `b + g <= 1` and `n >= 1`.
    pub fn new(b: f64, g: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("block length must be positive".into()));
        }
        if !(b > 0.0 && b < 1.0) || !(g > 0.0 && g <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "transition probabilities out of range: b = {b}, g = {g}"
            )));
        }
        if b >= g {
            return Err(Error::InvalidParameter(format!(
                "need b < g (stationary flip probability below 1/2): b = {b}, g = {g}"
            )));
        }
        let corr = 1.0 - b - g;
        if corr < -MEMORYLESS_EPS {
            return Err(Error::InvalidParameter(format!(
                "negatively correlated chain (1 - b - g = {corr}) is not supported"
            )));
        }
        // snap tiny negative rounding residue onto the memoryless boundary
        let b = if corr < 0.0 { 1.0 - g } else { b };
        Ok(MarkovParams { b, g, n })
    }

    /// Chain with stationary flip probability `p` and burst exit rate `g`.
    pub fn from_p_and_g(p: f64, g: f64, n: usize) -> Result<Self> {
        if !(p > 0.0 && p < 0.5) {
            return Err(Error::InvalidParameter(format!("need 0 < p < 1/2, got {p}")));
        }
        if !(g > 0.0 && g <= 1.0) {
            return Err(Error::InvalidParameter(format!("need 0 < g <= 1, got {g}")));
        }
        MarkovParams::new(p * g / (1.0 - p), g, n)
    }

    /// Memoryless channel: `b = p`, `g = 1 - p`.
    pub fn bsc(p: f64, n: usize) -> Result<Self> {
        if !(p > 0.0 && p < 0.5) {
            return Err(Error::InvalidParameter(format!("need 0 < p < 1/2, got {p}")));
        }
        MarkovParams::new(p, 1.0 - p, n)
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn with_len(self, n: usize) -> Result<Self> {
        MarkovParams::new(self.b, self.g, n)
    }

    /// Stationary flip probability `b / (b + g)`.
    pub fn p(&self) -> f64 {
        self.b / (self.b + self.g)
    }

    /// Lag-1 correlation of the noise process.
    pub fn correlation(&self) -> f64 {
        1.0 - self.b - self.g
    }

    pub fn is_memoryless(&self) -> bool {
        self.correlation().abs() <= MEMORYLESS_EPS
    }

    /// Real-valued weight offset at which an extra burst becomes as likely
    /// as one more flipped bit in the existing bursts.
    pub fn delta_l_real(&self) -> f64 {
        if self.is_memoryless() {
            return 0.0;
        }
        (self.b / self.g).ln() / ((1.0 - self.g) / (1.0 - self.b)).ln() - 1.0
    }

    /// Interlacing offset, rounded and clamped to `0..=n`.
    pub fn delta_l_with(&self, rounding: DeltaRounding) -> usize {
        let x = self.delta_l_real();
        let r = match rounding {
            DeltaRounding::Floor => x.floor(),
            DeltaRounding::Round => x.round(),
        };
        if r.is_nan() || r <= 0.0 {
            0
        } else {
            (r as usize).min(self.n)
        }
    }

    pub fn delta_l(&self) -> usize {
        self.delta_l_with(DeltaRounding::Floor)
    }

    /// Natural-log probability of any single word in the subclass.
    pub fn log_subclass_prob(&self, id: SubclassId) -> Result<f64> {
        id.validate(self.n)?;
        let (b, g) = (self.b, self.g);
        let n = self.n as f64;
        let base = (g / (1.0 - b)).ln() + n * (1.0 - b).ln() - (b + g).ln();
        if self.is_memoryless() {
            // every burst term cancels; use the direct form for accuracy
            let p = self.p();
            let l = id.l as f64;
            return Ok((n - l) * (1.0 - p).ln() + l * p.ln());
        }
        let per_burst = (b * g / ((1.0 - b) * (1.0 - g))).ln();
        let per_one = ((1.0 - g) / (1.0 - b)).ln();
        let per_edge = ((1.0 - b) / g).ln();
        Ok(base + id.m as f64 * per_burst + id.l as f64 * per_one + id.case.edge_ones() as f64 * per_edge)
    }

    /// Natural-log probability of a concrete noise word.
    pub fn log_word_prob(&self, w: &BitWord) -> Result<f64> {
        crate::error::check_len(self.n, w.len())?;
        self.log_subclass_prob(SubclassId::of_word(w))
    }

    /// Every structurally valid subclass for this block length, zero first.
    pub fn all_subclasses(n: usize) -> Vec<SubclassId> {
        let mut out = vec![SubclassId::ZERO];
        for l in 1..=n {
            for m in 1..=l.min(n - l + 1) {
                for case in BurstCase::DESCENDING {
                    let id = SubclassId::new(m, l, case);
                    if id.validate(n).is_ok() {
                        out.push(id);
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    /// Probability of a word computed by walking the chain from the
    /// stationary distribution; independent of the closed form.
    fn chain_path_prob(b: f64, g: f64, w: &BitWord) -> f64 {
        let p = b / (b + g);
        let mut prob = if w.get(0) { p } else { 1.0 - p };
        for i in 1..w.len() {
            prob *= match (w.get(i - 1), w.get(i)) {
                (false, false) => 1.0 - b,
                (false, true) => b,
                (true, false) => g,
                (true, true) => 1.0 - g,
            };
        }
        prob
    }

    fn all_words(n: usize) -> impl Iterator<Item = BitWord> {
        (0u64..1 << n).map(move |x| BitWord::from_words(n, vec![x]))
    }

    #[test]
    fn from_p_and_g_examples() {
        let bsc = MarkovParams::from_p_and_g(0.1, 0.9, 10).unwrap();
        assert!((bsc.b() - 0.1).abs() < 1e-15);
        assert!(bsc.is_memoryless());

        let bursty = MarkovParams::from_p_and_g(0.01, 0.1, 10).unwrap();
        assert!((bursty.b() - 0.1 * 0.01 / 0.99).abs() < 1e-15);
        assert!((bursty.b() - 1.0101e-3).abs() < 1e-7);

        let p4 = MarkovParams::from_p_and_g(0.4, 0.5, 10).unwrap();
        assert!((p4.b() - 1.0 / 3.0).abs() < 1e-15);
        assert!((p4.correlation() - 1.0 / 6.0).abs() < 1e-15);
        // b = 0.6, 1 - b - g = -0.5
        assert!(MarkovParams::from_p_and_g(0.4, 0.9, 10).is_err());
        assert!(MarkovParams::from_p_and_g(0.5, 0.5, 10).is_err());
        assert!(MarkovParams::from_p_and_g(0.0, 0.5, 10).is_err());
        assert!(MarkovParams::from_p_and_g(0.1, 0.0, 10).is_err());
        assert!(MarkovParams::new(0.2, 0.2, 10).is_err());
    }

    #[test]
    fn derived_quantities() {
        let m = MarkovParams::new(0.01, 0.2, 8).unwrap();
        assert!((m.p() - 0.01 / 0.21).abs() < 1e-15);
        assert!((m.correlation() - 0.79).abs() < 1e-15);
    }

    #[test]
    fn delta_l_examples() {
        let bsc = MarkovParams::bsc(0.03, 127).unwrap();
        assert_eq!(bsc.delta_l(), 0);
        assert_eq!(MarkovParams::bsc(0.3, 127).unwrap().delta_l(), 0);

        let m = MarkovParams::new(0.001, 0.1, 127).unwrap();
        let x = m.delta_l_real();
        assert!((x - 43.13).abs() < 0.01, "{x}");
        assert_eq!(m.delta_l(), 43);
        assert_eq!(m.delta_l_with(DeltaRounding::Round), 43);

        assert_eq!(MarkovParams::new(0.001, 0.1, 16).unwrap().delta_l(), 16);
    }

    #[test]
    fn subclass_count_examples() {
        let c = |m, l, case| subclass_count(6, SubclassId::new(m, l, case)).unwrap();
        assert_eq!(c(1, 6, BurstCase::Case2), 1);
        assert_eq!(c(2, 3, BurstCase::Case0), 2);
        assert_eq!(c(2, 3, BurstCase::Case1Start), 4);
        assert_eq!(c(2, 3, BurstCase::Case1End), 4);
        assert_eq!(c(2, 3, BurstCase::Case2), 2);
        assert_eq!(subclass_count(6, SubclassId::ZERO).unwrap(), 1);
        assert!(subclass_count(6, SubclassId::new(1, 3, BurstCase::Case2)).is_err());
        assert!(subclass_count(6, SubclassId::new(3, 2, BurstCase::Case0)).is_err());
    }

    #[test]
    fn subclass_counts_match_enumeration() {
        for n in 1..=14 {
            let mut seen: HashMap<SubclassId, u128> = HashMap::new();
            for w in all_words(n) {
                *seen.entry(SubclassId::of_word(&w)).or_default() += 1;
            }
            let mut total = 0;
            for id in MarkovParams::all_subclasses(n) {
                let c = subclass_count(n, id).unwrap();
                assert_eq!(c, seen.get(&id).copied().unwrap_or(0), "n={n} {id}");
                total += c;
            }
            assert_eq!(total, 1 << n);
            // sum over cases of each class
            for l in 1..=n {
                for m in 1..=l.min(n - l + 1) {
                    let sum: u128 = BurstCase::DESCENDING
                        .iter()
                        .filter_map(|&case| subclass_count(n, SubclassId::new(m, l, case)).ok())
                        .sum();
                    let expect = binomial(l as i64 - 1, m as i64 - 1) * binomial((n - l + 1) as i64, m as i64);
                    assert_eq!(sum, expect, "n={n} m={m} l={l}");
                }
            }
        }
    }

    #[test]
    fn closed_form_matches_chain_path() {
        let params = MarkovParams::new(0.01, 0.2, 8).unwrap();
        for w in all_words(8) {
            let exact = chain_path_prob(0.01, 0.2, &w).ln();
            let got = params.log_word_prob(&w).unwrap();
            assert!((exact - got).abs() < 1e-10, "{w}: {exact} vs {got}");
        }
        let m0 = params.log_subclass_prob(SubclassId::ZERO).unwrap();
        let expect = (0.2f64 / 0.21).ln() + 7.0 * 0.99f64.ln();
        assert!((m0 - expect).abs() < 1e-12);
    }

    #[test]
    fn memoryless_collapse() {
        let p = 0.07;
        let params = MarkovParams::bsc(p, 10).unwrap();
        for w in all_words(10) {
            let l = w.weight() as f64;
            let expect = (10.0 - l) * (1.0 - p).ln() + l * p.ln();
            assert!((params.log_word_prob(&w).unwrap() - expect).abs() < 1e-12);
            assert!((chain_path_prob(params.b(), params.g(), &w).ln() - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn case_ordering_and_monotonicity() {
        for &(b, g) in &[(0.01, 0.2), (0.02, 0.1), (0.001, 0.05), (0.1, 0.6)] {
            let params = MarkovParams::new(b, g, 30).unwrap();
            for id in MarkovParams::all_subclasses(30).into_iter().filter(|id| id.m >= 2) {
                let lp = |case| params.log_subclass_prob(SubclassId { case, ..id });
                let (p0, p1s, p1e, p2) = (
                    lp(BurstCase::Case0),
                    lp(BurstCase::Case1Start),
                    lp(BurstCase::Case1End),
                    lp(BurstCase::Case2),
                );
                if let (Ok(p0), Ok(p1s), Ok(p1e), Ok(p2)) = (p0, p1s, p1e, p2) {
                    assert!(p0 < p1s && p1s == p1e && p1e < p2);
                }
                let next = SubclassId { l: id.l + 1, ..id };
                if let (Ok(a), Ok(bb)) = (params.log_subclass_prob(id), params.log_subclass_prob(next)) {
                    assert!(bb < a);
                }
            }
        }
    }

    #[test]
    fn normalization() {
        for &(b, g) in &[(0.1, 0.9), (0.01, 0.2), (0.02, 0.1), (0.3, 0.5)] {
            for n in [1, 2, 6, 10, 14, 16] {
                let params = MarkovParams::new(b, g, n).unwrap();
                let total: f64 = MarkovParams::all_subclasses(n)
                    .into_iter()
                    .map(|id| subclass_count(n, id).unwrap() as f64 * params.log_subclass_prob(id).unwrap().exp())
                    .sum();
                assert!((total - 1.0).abs() < 1e-9, "b={b} g={g} n={n}: {total}");
            }
        }
    }

    #[test]
    fn binomial_edges() {
        assert_eq!(binomial(5, -1), 0);
        assert_eq!(binomial(-1, 0), 0);
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(7, 3), 35);
        // Pascal's triangle as the oracle
        let mut row = vec![1u128];
        for a in 1..=126i64 {
            let mut next = vec![1u128; a as usize + 1];
            for j in 1..a as usize {
                next[j] = row[j - 1] + row[j];
            }
            row = next;
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(binomial(a, j as i64), v, "C({a}, {j})");
            }
        }
    }
}
