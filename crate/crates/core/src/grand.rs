//! Guessing random additive noise decoding.
//!
//! The decoder subtracts noise patterns from the received word in the order
//! produced by a [`PatternStream`] and stops at the first result that lies
//! in the code-book.

use std::collections::HashSet;

use crate::codes::LinearCode;
use crate::error::{check_len, Error, Result};
use crate::gf2::{BitWord, Run};
use crate::markov::SubclassId;
use crate::pattern::{PatternStream, Schedule};

/// Code-book membership test specialized for repeated queries against one
/// received word.
pub trait Membership {
    /// Per-word state computed once before querying.
    type Probe;

    fn block_len(&self) -> usize;

    fn probe(&self, y: &BitWord) -> Self::Probe;

    /// Whether `y ⊕ noise` is a codeword, with `noise` given as runs of ones.
    fn accepts(&self, probe: &mut Self::Probe, runs: &[Run]) -> bool;
}

impl Membership for LinearCode {
    type Probe = Vec<u64>;

    fn block_len(&self) -> usize {
        self.n()
    }

    fn probe(&self, y: &BitWord) -> Vec<u64> {
        self.syndrome(y).expect("probe length checked by caller")
    }

    #[inline]
    fn accepts(&self, probe: &mut Vec<u64>, runs: &[Run]) -> bool {
        self.syndrome_matches(probe, runs)
    }
}

/// Explicit code-book for small or non-linear codes.
#[derive(Debug, Clone)]
pub struct CodebookSet {
    n: usize,
    words: HashSet<BitWord>,
}

impl CodebookSet {
    pub fn new(n: usize, words: impl IntoIterator<Item = BitWord>) -> Result<Self> {
        let words: HashSet<BitWord> = words.into_iter().collect();
        for w in &words {
            check_len(n, w.len())?;
        }
        Ok(CodebookSet { n, words })
    }

    /// All `2^k` codewords of a linear code.
    pub fn from_linear(code: &LinearCode) -> Result<Self> {
        if code.k() > 20 {
            return Err(Error::InvalidParameter(format!(
                "k = {} is too large to enumerate",
                code.k()
            )));
        }
        let words = (0u64..1 << code.k()).map(|u| {
            let msg = BitWord::from_bits((0..code.k()).map(|i| (u >> i) & 1 == 1));
            code.encode(&msg).expect("message length")
        });
        CodebookSet::new(code.n(), words)
    }

    pub fn contains(&self, w: &BitWord) -> bool {
        self.words.contains(w)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &BitWord> {
        self.words.iter()
    }
}

impl Membership for CodebookSet {
    type Probe = BitWord;

    fn block_len(&self) -> usize {
        self.n
    }

    fn probe(&self, y: &BitWord) -> BitWord {
        y.clone()
    }

    fn accepts(&self, scratch: &mut BitWord, runs: &[Run]) -> bool {
        for r in runs {
            scratch.flip_range(r.start, r.end());
        }
        let hit = self.words.contains(scratch);
        for r in runs {
            scratch.flip_range(r.start, r.end());
        }
        hit
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DecodeStatus {
    Decoded {
        codeword: BitWord,
        noise: BitWord,
        /// Stream index of the accepted pattern.
        pattern_index: u64,
        subclass: SubclassId,
    },
    /// The schedule or the query cap ran out without a hit.
    Abandoned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    pub status: DecodeStatus,
    /// Membership queries made, the zero pattern included.
    pub queries: u64,
}

impl DecodeOutcome {
    pub fn codeword(&self) -> Option<&BitWord> {
        match &self.status {
            DecodeStatus::Decoded { codeword, .. } => Some(codeword),
            DecodeStatus::Abandoned => None,
        }
    }

    pub fn is_abandoned(&self) -> bool {
        matches!(self.status, DecodeStatus::Abandoned)
    }
}

/// Decodes `y` by querying patterns from a fresh `stream`.
pub fn grand_decode<M: Membership + ?Sized>(
    y: &BitWord,
    code: &M,
    stream: &mut PatternStream<'_>,
) -> Result<DecodeOutcome> {
    check_len(code.block_len(), y.len())?;
    check_len(stream.schedule().n(), y.len())?;
    if stream.emitted() != 0 {
        return Err(Error::InvalidParameter("pattern stream must start at index 0".into()));
    }
    let mut probe = code.probe(y);
    let mut subclass = SubclassId::ZERO;
    let found = stream.find(|id, runs| {
        let hit = code.accepts(&mut probe, runs);
        if hit {
            subclass = id;
        }
        hit
    });
    let queries = stream.emitted();
    let status = match found {
        Some(index) => {
            // `find` leaves the stream standing on the accepted pattern
            let noise = BitWord::from_runs(y.len(), stream.current_runs())?;
            let mut codeword = y.clone();
            codeword ^= &noise;
            DecodeStatus::Decoded {
                codeword,
                noise,
                pattern_index: index,
                subclass,
            }
        }
        None => DecodeStatus::Abandoned,
    };
    Ok(DecodeOutcome { status, queries })
}

/// Convenience wrapper owning a schedule.
#[derive(Debug, Clone)]
pub struct GrandDecoder {
    schedule: Schedule,
}

impl GrandDecoder {
    pub fn new(schedule: Schedule) -> Self {
        GrandDecoder { schedule }
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn decode<M: Membership + ?Sized>(&self, y: &BitWord, code: &M) -> Result<DecodeOutcome> {
        grand_decode(y, code, &mut self.schedule.stream())
    }
}
