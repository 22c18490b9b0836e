//! Noise pattern generation in Markov likelihood order.
//!
//! Patterns are grouped into classes `(m, l)` (burst count, weight). A class
//! is scheduled by its key `κ(m, l) = l + m·(Δl + 1)`; within a key, classes
//! with more bursts come first, so class `(m + 1, m + 1)` follows
//! `(m, Δl + m + 1)` immediately. Inside a class the boundary cases are
//! visited from most to least likely, and inside a subclass the bursts are
//! enumerated lexicographically by `(start₁, len₁, start₂, len₂, …)`.
//!
//! Nothing is materialized: a [`PatternStream`] walks the bursts like a
//! mixed-radix counter over a precomputed [`Schedule`] of subclasses.

use crate::error::{Error, Result};
use crate::gf2::{BitWord, Run};
use crate::markov::{subclass_count, BurstCase, DeltaRounding, MarkovParams, SubclassId};

/// When to stop querying.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AbandonmentRule {
    pub m_max: usize,
    pub l_last: usize,
    /// Hard limit on emitted patterns, the zero pattern included.
    pub query_cap: Option<u64>,
}

impl AbandonmentRule {
    pub const DEFAULT_QUERY_CAP: u64 = 10_000_000;

    pub fn new(m_max: usize, l_last: usize) -> Result<Self> {
        if m_max < 1 || l_last < m_max {
            return Err(Error::InvalidParameter(format!(
                "abandonment rule needs 1 <= m_max <= l_last, got ({m_max}, {l_last})"
            )));
        }
        Ok(AbandonmentRule {
            m_max,
            l_last,
            query_cap: Some(Self::DEFAULT_QUERY_CAP),
        })
    }

    /// `m_max = l_last = ⌊d/2⌋`.
    pub fn from_min_distance(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!(
                "minimum distance must be >= 2, got {d}"
            )));
        }
        AbandonmentRule::new(d / 2, d / 2)
    }

    /// A rule that admits every word of length `n` and has no cap.
    pub fn exhaustive(n: usize) -> Self {
        AbandonmentRule {
            m_max: n.div_ceil(2).max(1),
            l_last: n.max(1),
            query_cap: None,
        }
    }

    pub fn with_query_cap(mut self, cap: Option<u64>) -> Self {
        self.query_cap = cap;
        self
    }
}

/// Class scheduling key.
#[inline]
pub fn class_key(m: usize, l: usize, delta_l: usize) -> usize {
    l + m * (delta_l + 1)
}

/// How subclasses of the admitted set are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PatternOrder {
    /// Whole classes by key, boundary cases in fixed order.
    #[default]
    ClassBundled,
    /// Same admitted set, subclasses sorted by exact per-pattern probability.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduledSubclass {
    pub id: SubclassId,
    pub count: u128,
    /// Stream index of the first pattern of this subclass.
    pub first_index: u128,
    pub log_prob: Option<f64>,
}

/// Ordered list of non-empty subclasses a stream will visit.
#[derive(Debug, Clone)]
pub struct Schedule {
    n: usize,
    delta_l: usize,
    rule: AbandonmentRule,
    order: PatternOrder,
    params: Option<MarkovParams>,
    subclasses: Vec<ScheduledSubclass>,
    total: u128,
}

impl Schedule {
    /// Class-bundled schedule for an explicit interlacing offset.
    pub fn new(n: usize, delta_l: usize, rule: AbandonmentRule) -> Result<Self> {
        Schedule::build(n, delta_l, rule, None, PatternOrder::ClassBundled)
    }

    /// Class-bundled schedule matched to a channel, with floor rounding.
    pub fn for_channel(params: &MarkovParams, rule: AbandonmentRule) -> Result<Self> {
        Schedule::for_channel_with(params, rule, DeltaRounding::Floor, PatternOrder::ClassBundled)
    }

    pub fn for_channel_with(
        params: &MarkovParams,
        rule: AbandonmentRule,
        rounding: DeltaRounding,
        order: PatternOrder,
    ) -> Result<Self> {
        Schedule::build(params.n(), params.delta_l_with(rounding), rule, Some(*params), order)
    }

    fn build(
        n: usize,
        delta_l: usize,
        rule: AbandonmentRule,
        params: Option<MarkovParams>,
        order: PatternOrder,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("block length must be positive".into()));
        }
        if rule.m_max < 1 || rule.l_last < rule.m_max {
            return Err(Error::InvalidParameter(format!("invalid abandonment rule {rule:?}")));
        }
        if order == PatternOrder::Exact && params.is_none() {
            return Err(Error::InvalidParameter(
                "exact ordering needs channel parameters".into(),
            ));
        }
        let limit = class_key(rule.m_max, rule.l_last, delta_l);
        let mut ids = vec![SubclassId::ZERO];
        for key in 0..=limit {
            for m in (1..=rule.m_max).rev() {
                let Some(l) = key.checked_sub(m * (delta_l + 1)) else {
                    continue;
                };
                if l < m || l > n || m > n - l + 1 {
                    continue;
                }
                for case in BurstCase::DESCENDING {
                    let id = SubclassId::new(m, l, case);
                    if id.validate(n).is_ok() && subclass_count(n, id)? > 0 {
                        ids.push(id);
                    }
                }
            }
        }
        let mut subclasses = ids
            .into_iter()
            .map(|id| {
                Ok(ScheduledSubclass {
                    id,
                    count: subclass_count(n, id)?,
                    first_index: 0,
                    log_prob: params.map(|p| p.log_subclass_prob(id)).transpose()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if order == PatternOrder::Exact {
            // stable: equal probabilities keep the class-bundled order
            subclasses.sort_by(|a, b| b.log_prob.unwrap().total_cmp(&a.log_prob.unwrap()));
        }
        let mut total: u128 = 0;
        for s in &mut subclasses {
            s.first_index = total;
            total = total.saturating_add(s.count);
        }
        Ok(Schedule {
            n,
            delta_l,
            rule,
            order,
            params,
            subclasses,
            total,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta_l(&self) -> usize {
        self.delta_l
    }

    pub fn rule(&self) -> AbandonmentRule {
        self.rule
    }

    pub fn order(&self) -> PatternOrder {
        self.order
    }

    pub fn params(&self) -> Option<&MarkovParams> {
        self.params.as_ref()
    }

    pub fn subclasses(&self) -> &[ScheduledSubclass] {
        &self.subclasses
    }

    /// Patterns in the admitted set, ignoring the query cap.
    pub fn total_patterns(&self) -> u128 {
        self.total
    }

    /// Patterns a stream emits before it is exhausted.
    pub fn stream_len(&self) -> u128 {
        match self.rule.query_cap {
            Some(cap) => self.total.min(cap as u128),
            None => self.total,
        }
    }

    /// Whether a class is inside the abandonment threshold.
    pub fn admits(&self, m: usize, l: usize) -> bool {
        m == 0 && l == 0
            || (m >= 1
                && m <= self.rule.m_max
                && class_key(m, l, self.delta_l) <= class_key(self.rule.m_max, self.rule.l_last, self.delta_l))
    }

    /// `(m, l)` classes in emission order, without duplicates.
    pub fn class_sequence(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for s in &self.subclasses {
            let c = (s.id.m, s.id.l);
            if out.last() != Some(&c) {
                out.push(c);
            }
        }
        out
    }

    pub fn stream(&self) -> PatternStream<'_> {
        PatternStream {
            schedule: self,
            sub: 0,
            runs: Vec::with_capacity(self.rule.m_max),
            emitted: 0,
            started: false,
            pending: false,
        }
    }
}

/// One emitted pattern, borrowed from the stream.
#[derive(Debug, Clone, Copy)]
pub struct Pattern<'s> {
    pub index: u64,
    pub subclass: SubclassId,
    pub runs: &'s [Run],
}

impl Pattern<'_> {
    pub fn to_word(&self, n: usize) -> BitWord {
        BitWord::from_runs(n, self.runs).expect("stream runs lie inside the block")
    }

    pub fn weight(&self) -> usize {
        self.subclass.l
    }
}

/// Single-owner cursor over a [`Schedule`].
#[derive(Debug, Clone)]
pub struct PatternStream<'a> {
    schedule: &'a Schedule,
    sub: usize,
    runs: Vec<Run>,
    emitted: u64,
    started: bool,
    pending: bool,
}

impl<'a> PatternStream<'a> {
    pub fn schedule(&self) -> &'a Schedule {
        self.schedule
    }

    /// Patterns emitted so far.
    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    pub fn reset(&mut self) {
        self.sub = 0;
        self.runs.clear();
        self.emitted = 0;
        self.started = false;
        self.pending = false;
    }

    fn capped(&self) -> bool {
        matches!(self.schedule.rule.query_cap, Some(cap) if self.emitted >= cap)
    }

    pub fn next_pattern(&mut self) -> Option<Pattern<'_>> {
        if self.capped() || !self.step() {
            return None;
        }
        self.emitted += 1;
        Some(Pattern {
            index: self.emitted - 1,
            subclass: self.schedule.subclasses[self.sub].id,
            runs: &self.runs,
        })
    }

    /// Calls `hit` on each remaining pattern until it returns `true`;
    /// returns the index of that pattern.
    #[inline]
    pub fn find<F: FnMut(SubclassId, &[Run]) -> bool>(&mut self, mut hit: F) -> Option<u64> {
        let cap = self.schedule.rule.query_cap.unwrap_or(u64::MAX);
        while self.emitted < cap && self.step() {
            self.emitted += 1;
            if hit(self.schedule.subclasses[self.sub].id, &self.runs) {
                return Some(self.emitted - 1);
            }
        }
        None
    }

    /// Runs of the most recently emitted pattern.
    pub fn current_runs(&self) -> &[Run] {
        &self.runs
    }

    /// Positions the stream so that the next emission has stream index
    /// `index`. Returns `false` if the stream is shorter than that.
    pub fn skip_to(&mut self, index: u64) -> bool {
        self.reset();
        if index as u128 >= self.schedule.stream_len() {
            self.sub = self.schedule.subclasses.len();
            self.started = true;
            self.emitted = index;
            return false;
        }
        let subs = &self.schedule.subclasses;
        let target = index as u128;
        let sub = subs.partition_point(|s| s.first_index <= target) - 1;
        self.sub = sub;
        self.started = true;
        let id = subs[sub].id;
        let ok = first_runs(self.schedule.n, id, &mut self.runs);
        debug_assert!(ok);
        for _ in subs[sub].first_index..target {
            advance_runs(self.schedule.n, id, &mut self.runs);
        }
        self.emitted = index;
        // the next `step` must not advance past the pattern we stand on
        self.pending = true;
        true
    }

    /// Moves to the next pattern; `false` when the schedule is exhausted.
    #[inline]
    fn step(&mut self) -> bool {
        if self.pending {
            self.pending = false;
            return true;
        }
        let n = self.schedule.n;
        let subs = &self.schedule.subclasses;
        if !self.started {
            self.started = true;
            self.sub = 0;
            return match subs.first() {
                Some(s) => first_runs(n, s.id, &mut self.runs),
                None => false,
            };
        }
        if self.sub >= subs.len() {
            return false;
        }
        if advance_runs(n, subs[self.sub].id, &mut self.runs) {
            return true;
        }
        loop {
            self.sub += 1;
            let Some(s) = subs.get(self.sub) else { return false };
            if first_runs(n, s.id, &mut self.runs) {
                return true;
            }
        }
    }
}

impl Iterator for PatternStream<'_> {
    type Item = BitWord;

    fn next(&mut self) -> Option<BitWord> {
        let n = self.schedule.n;
        self.next_pattern().map(|p| p.to_word(n))
    }
}

// ---------------------------------------------------------------------------
// Burst enumeration inside one subclass.
//
// Level `i` holds burst `i`. For a fixed prefix of bursts the remaining
// weight and burst count determine how far the current burst may start;
// these bounds are exact, so every visited state is a real pattern.

#[inline]
fn remaining_weight(id: SubclassId, runs: &[Run], level: usize) -> usize {
    id.l - runs[..level].iter().map(|r| r.len).sum::<usize>()
}

#[inline]
fn start_min(id: SubclassId, runs: &[Run], level: usize) -> usize {
    if level == 0 {
        usize::from(!id.case.starts_with_one())
    } else {
        runs[level - 1].end() + 1
    }
}

/// Largest start for burst `level` given the bursts before it, or `None`
/// if even the smallest start leaves no room.
#[inline]
fn start_range(n: usize, id: SubclassId, runs: &[Run], level: usize) -> Option<(usize, usize)> {
    let m = id.m;
    let rem = remaining_weight(id, runs, level);
    let trail = usize::from(!id.case.ends_with_one());
    let lo = start_min(id, runs, level);
    let (lo, hi) = if level + 1 == m {
        if id.case.ends_with_one() {
            let s = n.checked_sub(rem)?;
            (s, s)
        } else {
            (lo, n.checked_sub(rem + 1)?)
        }
    } else {
        (lo, n.checked_sub(rem + (m - level - 1) + trail)?)
    };
    // a word that starts with a one has its first burst at position 0
    let hi = if level == 0 && id.case.starts_with_one() { 0 } else { hi };
    if lo < start_min(id, runs, level) || lo > hi {
        None
    } else {
        Some((lo, hi))
    }
}

/// Sets bursts `level..m` to their lexicographically smallest completion.
#[inline]
fn fill_from(n: usize, id: SubclassId, runs: &mut [Run], level: usize) -> bool {
    for j in level..id.m {
        let Some((lo, _)) = start_range(n, id, runs, j) else {
            return false;
        };
        let len = if j + 1 == id.m {
            remaining_weight(id, runs, j)
        } else {
            1
        };
        runs[j] = Run { start: lo, len };
    }
    true
}

fn first_runs(n: usize, id: SubclassId, runs: &mut Vec<Run>) -> bool {
    runs.clear();
    runs.resize(id.m, Run { start: 0, len: 0 });
    fill_from(n, id, runs, 0)
}

#[inline]
fn advance_runs(n: usize, id: SubclassId, runs: &mut [Run]) -> bool {
    let m = id.m;
    for level in (0..m).rev() {
        loop {
            let rem = remaining_weight(id, runs, level);
            let last = level + 1 == m;
            if !last && runs[level].len < rem - (m - level - 1) {
                runs[level].len += 1;
            } else {
                let Some((_, hi)) = start_range(n, id, runs, level) else {
                    break;
                };
                if runs[level].start >= hi {
                    break;
                }
                runs[level].start += 1;
                runs[level].len = if last { rem } else { 1 };
            }
            if fill_from(n, id, runs, level + 1) {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn subclass_members(n: usize, id: SubclassId) -> Vec<Vec<Run>> {
        let mut runs = Vec::new();
        let mut out = Vec::new();
        if first_runs(n, id, &mut runs) {
            out.push(runs.clone());
            while advance_runs(n, id, &mut runs) {
                out.push(runs.clone());
            }
        }
        out
    }

    #[test]
    fn subclass_enumeration_is_exact_and_lexicographic() {
        for n in 1..=12 {
            let words: Vec<BitWord> = (0u64..1 << n).map(|x| BitWord::from_words(n, vec![x])).collect();
            for id in MarkovParams::all_subclasses(n) {
                let members = subclass_members(n, id);
                let mut expect: Vec<Vec<Run>> = words
                    .iter()
                    .filter(|w| SubclassId::of_word(w) == id)
                    .map(|w| w.runs())
                    .collect();
                let key = |r: &Vec<Run>| r.iter().flat_map(|r| [r.start, r.len]).collect::<Vec<_>>();
                expect.sort_by_key(key);
                assert_eq!(members, expect, "n={n} {id}");
                assert_eq!(members.len() as u128, subclass_count(n, id).unwrap());
            }
        }
    }

    #[test]
    fn class_key_examples() {
        assert_eq!(class_key(2, 5, 2), 11);
        assert_eq!(class_key(3, 3, 0), 6);
        // (m + 1, m + 1) follows (m, Δl + m + 1)
        for dl in 0..5 {
            for m in 1..4 {
                assert_eq!(class_key(m, dl + m + 1, dl) + 1, class_key(m + 1, m + 1, dl));
            }
        }
    }

    #[test]
    fn class_sequence_n6_dl2() {
        let s = Schedule::new(6, 2, AbandonmentRule::new(3, 3).unwrap()).unwrap();
        assert_eq!(
            s.class_sequence(),
            vec![
                (0, 0),
                (1, 1),
                (1, 2),
                (1, 3),
                (1, 4),
                (2, 2),
                (1, 5),
                (2, 3),
                (1, 6),
                (2, 4),
                (2, 5),
                (3, 3)
            ]
        );
        assert_eq!(s.total_patterns(), 61);
    }

    #[test]
    fn first_pattern_is_zero_and_no_duplicates() {
        let s = Schedule::new(10, 1, AbandonmentRule::new(3, 3).unwrap()).unwrap();
        let words: Vec<BitWord> = s.stream().collect();
        assert!(words[0].is_zero());
        let set: HashSet<_> = words.iter().cloned().collect();
        assert_eq!(set.len(), words.len());
        assert_eq!(words.len() as u128, s.total_patterns());
    }

    #[test]
    fn rules() {
        let r = AbandonmentRule::from_min_distance(7).unwrap();
        assert_eq!((r.m_max, r.l_last), (3, 3));
        let r = AbandonmentRule::from_min_distance(8).unwrap();
        assert_eq!((r.m_max, r.l_last), (4, 4));
        let r = AbandonmentRule::from_min_distance(2).unwrap();
        assert_eq!((r.m_max, r.l_last), (1, 1));
        assert!(AbandonmentRule::from_min_distance(1).is_err());
        assert!(AbandonmentRule::new(3, 2).is_err());
        assert!(AbandonmentRule::new(0, 2).is_err());
    }

    #[test]
    fn query_cap_stops_stream() {
        let rule = AbandonmentRule::new(3, 3).unwrap().with_query_cap(Some(17));
        let s = Schedule::new(20, 2, rule).unwrap();
        assert_eq!(s.stream().count(), 17);
        assert_eq!(s.stream_len(), 17);
    }

    #[test]
    fn skip_to_matches_sequential() {
        let s = Schedule::new(9, 1, AbandonmentRule::new(3, 3).unwrap()).unwrap();
        let all: Vec<BitWord> = s.stream().collect();
        for idx in [0usize, 1, 5, 17, all.len() - 1] {
            let mut st = s.stream();
            assert!(st.skip_to(idx as u64));
            let p = st.next_pattern().unwrap();
            assert_eq!(p.index, idx as u64);
            assert_eq!(p.to_word(9), all[idx]);
            let rest: Vec<BitWord> = st.collect();
            assert_eq!(rest, all[idx + 1..]);
        }
        let mut st = s.stream();
        assert!(!st.skip_to(all.len() as u64));
        assert!(st.next_pattern().is_none());
    }

    #[test]
    fn exact_order_is_probability_sorted() {
        let params = MarkovParams::new(0.02, 0.1, 12).unwrap();
        let s = Schedule::for_channel_with(
            &params,
            AbandonmentRule::exhaustive(12),
            DeltaRounding::Floor,
            PatternOrder::Exact,
        )
        .unwrap();
        assert_eq!(s.total_patterns(), 1 << 12);
        let probs: Vec<f64> = s.stream().map(|w| params.log_word_prob(&w).unwrap()).collect();
        assert!(probs.windows(2).all(|w| w[0] >= w[1] - 1e-12));
    }
}
