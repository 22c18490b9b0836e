//! Block interleavers spreading each codeword across a frame of packets.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::gf2::BitWord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterleaverKind {
    /// Square matrix written by columns and read by rows, zero padded.
    Matrix,
    /// Seeded uniform permutation of all packet bits.
    Random { seed: u64 },
}

impl InterleaverKind {
    pub fn label(self) -> &'static str {
        match self {
            InterleaverKind::Matrix => "matrix",
            InterleaverKind::Random { .. } => "random",
        }
    }
}

impl fmt::Display for InterleaverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Parses `matrix`, `random` or `none` (the latter as `None`).
pub fn parse_interleaver(s: &str, seed: u64) -> Result<Option<InterleaverKind>> {
    match s.trim() {
        "none" => Ok(None),
        "matrix" => Ok(Some(InterleaverKind::Matrix)),
        "random" => Ok(Some(InterleaverKind::Random { seed })),
        other => Err(Error::Parse(format!(
            "unknown interleaver {other:?} (expected matrix, random or none)"
        ))),
    }
}

impl FromStr for InterleaverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_interleaver(s, 0)?.ok_or_else(|| Error::Parse("'none' is not an interleaver kind".into()))
    }
}

/// Interleaver for `packets` codewords of length `n`.
#[derive(Debug, Clone)]
pub struct Interleaver {
    kind: InterleaverKind,
    packets: usize,
    n: usize,
    /// Frame position → packet bit index (`packet * n + bit`), or `None` for
    /// a pad bit.
    order: Vec<Option<usize>>,
}

impl Interleaver {
    pub fn new(kind: InterleaverKind, packets: usize, n: usize) -> Result<Self> {
        if packets == 0 || n == 0 {
            return Err(Error::InvalidParameter(
                "interleaver needs packets ≥ 1 and n ≥ 1".into(),
            ));
        }
        let total = packets * n;
        let order = match kind {
            InterleaverKind::Matrix => {
                let s = ceil_sqrt(total);
                // bit t sits at row t mod s, column t / s; rows are sent in turn
                (0..s * s)
                    .map(|pos| {
                        let (row, col) = (pos / s, pos % s);
                        let t = col * s + row;
                        (t < total).then_some(t)
                    })
                    .collect()
            }
            InterleaverKind::Random { seed } => {
                let mut perm: Vec<usize> = (0..total).collect();
                perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
                perm.into_iter().map(Some).collect()
            }
        };
        Ok(Interleaver {
            kind,
            packets,
            n,
            order,
        })
    }

    pub fn kind(&self) -> InterleaverKind {
        self.kind
    }

    pub fn packets(&self) -> usize {
        self.packets
    }

    pub fn block_len(&self) -> usize {
        self.n
    }

    /// Transmitted bits per frame, pad bits included.
    pub fn frame_len(&self) -> usize {
        self.order.len()
    }

    /// Side of the square matrix, for the matrix kind.
    pub fn side(&self) -> Option<usize> {
        matches!(self.kind, InterleaverKind::Matrix).then(|| ceil_sqrt(self.packets * self.n))
    }

    /// Frame position of packet bit `t`.
    pub fn position_of(&self, t: usize) -> Option<usize> {
        self.order.iter().position(|&o| o == Some(t))
    }

    pub fn interleave(&self, blocks: &[BitWord]) -> Result<BitWord> {
        check_len(self.packets, blocks.len())?;
        for b in blocks {
            check_len(self.n, b.len())?;
        }
        Ok(BitWord::from_bits(
            self.order
                .iter()
                .map(|o| o.is_some_and(|t| blocks[t / self.n].get(t % self.n))),
        ))
    }

    /// Inverse of [`interleave`](Self::interleave); pad positions are dropped.
    pub fn deinterleave(&self, frame: &BitWord) -> Result<Vec<BitWord>> {
        check_len(self.frame_len(), frame.len())?;
        let mut blocks = vec![BitWord::zeros(self.n); self.packets];
        for (pos, o) in self.order.iter().enumerate() {
            if let Some(t) = *o {
                if frame.get(pos) {
                    blocks[t / self.n].set(t % self.n, true);
                }
            }
        }
        Ok(blocks)
    }
}

fn ceil_sqrt(x: usize) -> usize {
    let mut s = (x as f64).sqrt() as usize;
    while s * s < x {
        s += 1;
    }
    while s > 0 && (s - 1) * (s - 1) >= x {
        s -= 1;
    }
    s
}
