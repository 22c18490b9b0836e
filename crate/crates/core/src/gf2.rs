//! Bit-packed vectors and matrices over GF(2).
//!
//! Bit `i` of a [`BitWord`] lives in bit `i % 64` of word `i / 64`. Unused
//! high bits of the last word are always zero, so word-wise comparisons and
//! popcounts are exact.

use std::fmt;
use std::io::{BufRead, Write};
use std::ops::BitXorAssign;
use std::str::FromStr;

use crate::error::{check_len, Error, Result};

#[inline]
fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

/// A maximal run of consecutive ones: positions `start .. start + len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Run {
    pub start: usize,
    pub len: usize,
}

impl Run {
    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

/// Fixed-length binary vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitWord {
    n: usize,
    words: Vec<u64>,
}

impl BitWord {
    pub fn zeros(n: usize) -> Self {
        BitWord {
            n,
            words: vec![0; words_for(n)],
        }
    }

    pub fn ones(n: usize) -> Self {
        let mut w = BitWord {
            n,
            words: vec![u64::MAX; words_for(n)],
        };
        w.clear_tail();
        w
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut n = 0;
        for b in bits {
            if n % 64 == 0 {
                words.push(0);
            }
            if b {
                words[n / 64] |= 1 << (n % 64);
            }
            n += 1;
        }
        BitWord { n, words }
    }

    /// Builds a word of length `n` from packed little-endian words; bits past
    /// `n` are discarded.
    pub fn from_words(n: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(n), 0);
        let mut w = BitWord { n, words };
        w.clear_tail();
        w
    }

    /// Word with ones exactly on the given runs.
    pub fn from_runs(n: usize, runs: &[Run]) -> Result<Self> {
        let mut w = BitWord::zeros(n);
        for r in runs {
            if r.end() > n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.end(),
                });
            }
            w.flip_range(r.start, r.end());
        }
        Ok(w)
    }

    /// Parses hex digits, most significant nibble first, keeping the low `n`
    /// bits; bit 0 of the word is the least significant bit of the number.
    pub fn from_hex(n: usize, s: &str) -> Result<Self> {
        let digits: Vec<u32> = s
            .trim()
            .trim_start_matches("0x")
            .chars()
            .filter(|c| *c != '_')
            .map(|c| {
                c.to_digit(16)
                    .ok_or_else(|| Error::Parse(format!("bad hex digit {c:?}")))
            })
            .collect::<Result<_>>()?;
        let mut w = BitWord::zeros(n);
        for (i, d) in digits.iter().rev().enumerate() {
            for b in 0..4 {
                let pos = 4 * i + b;
                if (d >> b) & 1 == 1 {
                    if pos >= n {
                        return Err(Error::Parse(format!("hex value exceeds {n} bits")));
                    }
                    w.set(pos, true);
                }
            }
        }
        Ok(w)
    }

    fn clear_tail(&mut self) {
        let r = self.n % 64;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.n, "bit index {i} out of range for length {}", self.n);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.n, "bit index {i} out of range for length {}", self.n);
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.n, "bit index {i} out of range for length {}", self.n);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    /// Flips every bit in `from..to`.
    pub fn flip_range(&mut self, from: usize, to: usize) {
        assert!(from <= to && to <= self.n);
        let mut i = from;
        while i < to {
            let off = i % 64;
            let take = (64 - off).min(to - i);
            let mask = if take == 64 {
                u64::MAX
            } else {
                ((1u64 << take) - 1) << off
            };
            self.words[i / 64] ^= mask;
            i += take;
        }
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.n).map(move |i| self.get(i))
    }

    /// Maximal runs of ones in position order.
    pub fn runs(&self) -> Vec<Run> {
        let mut runs = Vec::new();
        let mut i = 0;
        while i < self.n {
            if self.get(i) {
                let start = i;
                while i < self.n && self.get(i) {
                    i += 1;
                }
                runs.push(Run { start, len: i - start });
            } else {
                i += 1;
            }
        }
        runs
    }

    /// Mod-2 inner product.
    pub fn dot(&self, other: &BitWord) -> Result<bool> {
        check_len(self.n, other.n)?;
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        Ok(ones % 2 == 1)
    }

    pub fn xor_assign(&mut self, other: &BitWord) -> Result<()> {
        check_len(self.n, other.n)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    pub fn to_hex(&self) -> String {
        let nibbles = self.n.div_ceil(4).max(1);
        (0..nibbles)
            .rev()
            .map(|i| {
                let mut d = 0u32;
                for b in 0..4 {
                    let pos = 4 * i + b;
                    if pos < self.n && self.get(pos) {
                        d |= 1 << b;
                    }
                }
                char::from_digit(d, 16).unwrap()
            })
            .collect()
    }
}

/// Bitwise sum modulo 2.
pub fn xor_add(a: &BitWord, b: &BitWord) -> Result<BitWord> {
    let mut out = a.clone();
    out.xor_assign(b)?;
    Ok(out)
}

impl BitXorAssign<&BitWord> for BitWord {
    fn bitxor_assign(&mut self, rhs: &BitWord) {
        self.xor_assign(rhs).expect("length mismatch in ^=")
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}

impl FromStr for BitWord {
    type Err = Error;

    /// Parses a string of `0`/`1` characters, position 0 first.
    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("expected 0/1, found {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitWord::from_bits)
    }
}

/// Dense binary matrix stored as packed rows.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitWord>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            cols,
            rows: vec![BitWord::zeros(cols); rows],
        }
    }

    pub fn identity(k: usize) -> Self {
        let mut m = BitMatrix::zeros(k, k);
        for i in 0..k {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(cols: usize, rows: Vec<BitWord>) -> Result<Self> {
        for r in &rows {
            check_len(cols, r.len())?;
        }
        Ok(BitMatrix { cols, rows })
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitWord {
        &self.rows[i]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &BitWord> {
        self.rows.iter()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.rows[r].set(c, v)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows());
        for (r, row) in self.rows.iter().enumerate() {
            for c in 0..self.cols {
                if row.get(c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// `M · v` with `v` taken as a column vector.
    pub fn mat_vec_mul(&self, v: &BitWord) -> Result<BitWord> {
        check_len(self.cols, v.len())?;
        let mut out = BitWord::zeros(self.rows());
        for (i, row) in self.rows.iter().enumerate() {
            if row.dot(v)? {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// `v · M` with `v` taken as a row vector.
    pub fn vec_mat_mul(&self, v: &BitWord) -> Result<BitWord> {
        check_len(self.rows(), v.len())?;
        let mut out = BitWord::zeros(self.cols);
        for (i, row) in self.rows.iter().enumerate() {
            if v.get(i) {
                out.xor_assign(row)?;
            }
        }
        Ok(out)
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        check_len(self.cols, other.rows())?;
        let rows = self
            .rows
            .iter()
            .map(|r| other.vec_mat_mul(r))
            .collect::<Result<Vec<_>>>()?;
        Ok(BitMatrix { cols: other.cols, rows })
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitWord::is_zero)
    }

    /// Reduced row echelon form in place; returns the pivot column of each
    /// leading row.
    fn reduce(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows() {
                break;
            }
            let Some(p) = (r..self.rows()).find(|&i| self.rows[i].get(c)) else {
                continue;
            };
            self.rows.swap(r, p);
            let pivot = self.rows[r].clone();
            for i in 0..self.rows() {
                if i != r && self.rows[i].get(c) {
                    self.rows[i] ^= &pivot;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Row rank over GF(2).
    pub fn rank(&self) -> usize {
        self.clone().reduce().len()
    }

    /// Parity-check matrix `H` with `H · cᵀ = 0` for every codeword `c` in
    /// the row space of `self`, in the original column order.
    ///
    /// Each non-pivot column `q` of the reduced generator yields one row of
    /// `H`: a one at `q`, plus the column `q` entries of the reduced rows
    /// placed at their pivot columns.
    pub fn parity_from_generator(&self) -> Result<BitMatrix> {
        let mut reduced = self.clone();
        let pivots = reduced.reduce();
        if pivots.len() != self.rows() {
            return Err(Error::RankDeficient {
                rank: pivots.len(),
                rows: self.rows(),
            });
        }
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut h = Vec::with_capacity(self.cols - pivots.len());
        for q in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut row = BitWord::zeros(self.cols);
            row.set(q, true);
            for (i, &p) in pivots.iter().enumerate() {
                if reduced.rows[i].get(q) {
                    row.set(p, true);
                }
            }
            h.push(row);
        }
        Ok(BitMatrix {
            cols: self.cols,
            rows: h,
        })
    }

    /// Writes the plain-text matrix format: a `rows cols` header, then one
    /// line of `0`/`1` characters per row.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.rows(), self.cols)?;
        for r in &self.rows {
            writeln!(out, "{r}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("matrix text is ascii")
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = loop {
            match lines.next() {
                Some(l) => {
                    let l = l?;
                    if !l.trim().is_empty() {
                        break l;
                    }
                }
                None => return Err(Error::Parse("empty matrix file".into())),
            }
        };
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header {header:?}"))))
            .collect::<Result<_>>()?;
        let [rows, cols] = dims[..] else {
            return Err(Error::Parse(format!("header must be `rows cols`, got {header:?}")));
        };
        let mut out = Vec::with_capacity(rows);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let w: BitWord = line.parse()?;
            check_len(cols, w.len())?;
            out.push(w);
        }
        check_len(rows, out.len())?;
        Ok(BitMatrix { cols, rows: out })
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        Ok(())
    }
}
