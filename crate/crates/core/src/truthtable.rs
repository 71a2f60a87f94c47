//! Truth tables of n-input single-output Boolean functions.
//!
//! Row `k` holds the function value on the assignment whose binary expansion
//! is `k`, with input `I_1` as the least-significant bit. `I_1` therefore
//! toggles fastest and has the familiar `0xAA..` pattern, `I_2` is `0xCC..`
//! and `I_3` is `0xF0..`.
//!
//! Tables are stored as packed 64-bit words. Below six inputs only the low
//! `2^n` bits of the single word are used and the rest are kept at zero, so
//! derived equality and hashing are bitwise.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use smallvec::SmallVec;
use thiserror::Error;

/// Largest supported input count. A 16-input table occupies 8 KiB.
pub const MAX_INPUTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TruthTableError {
    #[error("input count {0} is outside 1..={MAX_INPUTS}")]
    InputCount(usize),
    #[error("input ordinal {index} is outside 1..={n}")]
    InputOrdinal { index: usize, n: usize },
    #[error("width mismatch: {left} inputs vs {right} inputs")]
    WidthMismatch { left: usize, right: usize },
    #[error("invalid hex truth table {text:?}: {reason}")]
    Hex { text: String, reason: String },
    #[error("row permutation covers {got} rows, table has {expected}")]
    PermutationSize { expected: usize, got: usize },
    #[error("row permutation is not a bijection")]
    NotBijection,
    #[error("connection type {0} is outside 1..=4")]
    ConnectionType(u8),
}

type Words = SmallVec<[u64; 4]>;

/// Bit-vector truth table of an n-input Boolean function.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TruthTable {
    n: u8,
    words: Words,
}

fn check_inputs(n: usize) -> Result<(), TruthTableError> {
    if n == 0 || n > MAX_INPUTS {
        return Err(TruthTableError::InputCount(n));
    }
    Ok(())
}

fn word_count(n: usize) -> usize {
    if n <= 6 {
        1
    } else {
        1 << (n - 6)
    }
}

/// Mask of the live bits in the last (only) word when n < 6.
fn tail_mask(n: usize) -> u64 {
    if n >= 6 {
        u64::MAX
    } else {
        (1u64 << (1 << n)) - 1
    }
}

impl TruthTable {
    /// The constant-false table.
    pub fn zero(n: usize) -> Result<Self, TruthTableError> {
        check_inputs(n)?;
        Ok(TruthTable {
            n: n as u8,
            words: smallvec::smallvec![0; word_count(n)],
        })
    }

    /// The constant-true table.
    pub fn one(n: usize) -> Result<Self, TruthTableError> {
        Ok(Self::zero(n)?.not())
    }

    /// Canonical table of primary input `I_index` (1-based).
    pub fn input(index: usize, n: usize) -> Result<Self, TruthTableError> {
        check_inputs(n)?;
        if index == 0 || index > n {
            return Err(TruthTableError::InputOrdinal { index, n });
        }
        let var = index - 1;
        let mut words: Words = smallvec::smallvec![0; word_count(n)];
        if var < 6 {
            const PATTERNS: [u64; 6] = [
                0xAAAA_AAAA_AAAA_AAAA,
                0xCCCC_CCCC_CCCC_CCCC,
                0xF0F0_F0F0_F0F0_F0F0,
                0xFF00_FF00_FF00_FF00,
                0xFFFF_0000_FFFF_0000,
                0xFFFF_FFFF_0000_0000,
            ];
            let mask = tail_mask(n);
            for w in words.iter_mut() {
                *w = PATTERNS[var] & mask;
            }
        } else {
            let stride = 1usize << (var - 6);
            for (i, w) in words.iter_mut().enumerate() {
                if (i / stride) & 1 == 1 {
                    *w = u64::MAX;
                }
            }
        }
        Ok(TruthTable { n: n as u8, words })
    }

    /// Builds a table from explicit row values; `rows.len()` must be a power
    /// of two with exponent in `1..=MAX_INPUTS`.
    pub fn from_rows(rows: &[bool]) -> Result<Self, TruthTableError> {
        let n = rows.len().trailing_zeros() as usize;
        if !rows.len().is_power_of_two() {
            return Err(TruthTableError::InputCount(n));
        }
        let mut t = Self::zero(n)?;
        for (k, &b) in rows.iter().enumerate() {
            t.set_bit(k, b);
        }
        Ok(t)
    }

    /// Builds a table by evaluating `f` on every row index.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize) -> bool) -> Result<Self, TruthTableError> {
        let mut t = Self::zero(n)?;
        for k in 0..t.num_rows() {
            if f(k) {
                t.set_bit(k, true);
            }
        }
        Ok(t)
    }

    pub fn num_inputs(&self) -> usize {
        self.n as usize
    }

    pub fn num_rows(&self) -> usize {
        1 << self.n
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn bit(&self, row: usize) -> bool {
        debug_assert!(row < self.num_rows());
        (self.words[row >> 6] >> (row & 63)) & 1 == 1
    }

    #[inline]
    pub fn set_bit(&mut self, row: usize, value: bool) {
        debug_assert!(row < self.num_rows());
        let mask = 1u64 << (row & 63);
        if value {
            self.words[row >> 6] |= mask;
        } else {
            self.words[row >> 6] &= !mask;
        }
    }

    pub fn rows(&self) -> Vec<bool> {
        (0..self.num_rows()).map(|k| self.bit(k)).collect()
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_const(&self) -> bool {
        let ones = self.count_ones();
        ones == 0 || ones == self.num_rows()
    }

    /// Bitwise complement.
    pub fn not(&self) -> Self {
        let mask = tail_mask(self.n as usize);
        let words = self.words.iter().map(|&w| !w & mask).collect();
        TruthTable { n: self.n, words }
    }

    /// Representative of `{self, !self}`: the member whose row 0 is false.
    pub fn normalized(&self) -> Self {
        if self.bit(0) {
            self.not()
        } else {
            self.clone()
        }
    }

    pub fn eq_up_to_negation(&self, other: &Self) -> bool {
        if self.n != other.n {
            return false;
        }
        let flip = self.bit(0) != other.bit(0);
        let mask = tail_mask(self.n as usize);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(&a, &b)| a == if flip { !b & mask } else { b })
    }

    fn check_width(&self, other: &Self) -> Result<(), TruthTableError> {
        if self.n != other.n {
            return Err(TruthTableError::WidthMismatch {
                left: self.n as usize,
                right: other.n as usize,
            });
        }
        Ok(())
    }

    /// AND of the two operands after applying the complements selected by `ty`.
    pub fn and(&self, other: &Self, ty: ConnectionType) -> Result<Self, TruthTableError> {
        self.check_width(other)?;
        let mut out = self.clone();
        self.and_into(other, ty, &mut out);
        Ok(out)
    }

    /// Allocation-free variant of [`TruthTable::and`]; `out` must share the width.
    pub fn and_into(&self, other: &Self, ty: ConnectionType, out: &mut Self) {
        debug_assert_eq!(self.n, other.n);
        debug_assert_eq!(self.n, out.n);
        let (inv_a, inv_b) = ty.polarity();
        let fa = if inv_a { u64::MAX } else { 0 };
        let fb = if inv_b { u64::MAX } else { 0 };
        let mask = tail_mask(self.n as usize);
        for ((o, &a), &b) in out.words.iter_mut().zip(&self.words).zip(&other.words) {
            *o = (a ^ fa) & (b ^ fb) & mask;
        }
    }

    /// Hamming distance between the two bit vectors.
    pub fn distance(&self, other: &Self) -> Result<usize, TruthTableError> {
        self.check_width(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// Hamming distance to the nearer of `other` and `!other`.
    pub fn neg_aware_distance(&self, other: &Self) -> Result<usize, TruthTableError> {
        let d = self.distance(other)?;
        Ok(d.min(self.num_rows() - d))
    }

    /// Result row `k` is row `sigma(k)` of `self`.
    pub fn permute_rows(&self, sigma: &RowPermutation) -> Result<Self, TruthTableError> {
        if sigma.len() != self.num_rows() {
            return Err(TruthTableError::PermutationSize {
                expected: self.num_rows(),
                got: sigma.len(),
            });
        }
        let mut out = TruthTable {
            n: self.n,
            words: smallvec::smallvec![0; self.words.len()],
        };
        for (k, &src) in sigma.as_slice().iter().enumerate() {
            if self.bit(src as usize) {
                out.set_bit(k, true);
            }
        }
        Ok(out)
    }

    /// Parses a most-significant-digit-first hex string.
    pub fn from_hex(text: &str, n: usize) -> Result<Self, TruthTableError> {
        check_inputs(n)?;
        let err = |reason: String| TruthTableError::Hex {
            text: text.to_string(),
            reason,
        };
        let digits = hex_len(n);
        if text.len() != digits {
            return Err(err(format!(
                "expected {digits} hex digits for {n} inputs, got {}",
                text.len()
            )));
        }
        let mut t = Self::zero(n)?;
        let rows = t.num_rows();
        for (pos, c) in text.chars().enumerate() {
            let v = c.to_digit(16).ok_or_else(|| err(format!("non-hex character {c:?}")))? as usize;
            // Leftmost digit holds the highest four rows.
            let base = (digits - 1 - pos) * 4;
            for b in 0..4 {
                if (v >> b) & 1 == 1 {
                    let row = base + b;
                    if row >= rows {
                        return Err(err(format!("digit {c:?} sets rows beyond {rows}")));
                    }
                    t.set_bit(row, true);
                }
            }
        }
        Ok(t)
    }

    /// Uppercase hex, most-significant digit first.
    pub fn to_hex(&self) -> String {
        let digits = hex_len(self.n as usize);
        let mut s = String::with_capacity(digits);
        for pos in 0..digits {
            let base = (digits - 1 - pos) * 4;
            let mut v = 0u32;
            for b in 0..4 {
                let row = base + b;
                if row < self.num_rows() && self.bit(row) {
                    v |= 1 << b;
                }
            }
            s.push(char::from_digit(v, 16).unwrap().to_ascii_uppercase());
        }
        s
    }
}

/// Number of hex digits used to serialize an `n`-input table.
pub fn hex_len(n: usize) -> usize {
    ((1usize << n) / 4).max(1)
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthTable({}:{})", self.n, self.to_hex())
    }
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Fanin polarity pattern of a new AND node.
///
/// | index | node built            |
/// |-------|-----------------------|
/// | 1     | `v_p1 & v_p2`         |
/// | 2     | `!v_p1 & v_p2`        |
/// | 3     | `v_p1 & !v_p2`        |
/// | 4     | `!v_p1 & !v_p2`       |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConnectionType {
    Direct = 1,
    NegFirst = 2,
    NegSecond = 3,
    NegBoth = 4,
}

impl ConnectionType {
    pub const ALL: [ConnectionType; 4] = [
        ConnectionType::Direct,
        ConnectionType::NegFirst,
        ConnectionType::NegSecond,
        ConnectionType::NegBoth,
    ];

    pub fn from_index(eps: u8) -> Result<Self, TruthTableError> {
        match eps {
            1 => Ok(Self::Direct),
            2 => Ok(Self::NegFirst),
            3 => Ok(Self::NegSecond),
            4 => Ok(Self::NegBoth),
            other => Err(TruthTableError::ConnectionType(other)),
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }

    /// `(first operand inverted, second operand inverted)`.
    pub fn polarity(self) -> (bool, bool) {
        match self {
            Self::Direct => (false, false),
            Self::NegFirst => (true, false),
            Self::NegSecond => (false, true),
            Self::NegBoth => (true, true),
        }
    }

    pub fn from_polarity(first_inverted: bool, second_inverted: bool) -> Self {
        match (first_inverted, second_inverted) {
            (false, false) => Self::Direct,
            (true, false) => Self::NegFirst,
            (false, true) => Self::NegSecond,
            (true, true) => Self::NegBoth,
        }
    }

    /// The type describing the same gate with its operands exchanged.
    pub fn swapped(self) -> Self {
        let (a, b) = self.polarity();
        Self::from_polarity(b, a)
    }
}

/// A bijection on the row indices `0..2^n`, stored as an index array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowPermutation(Vec<u32>);

impl RowPermutation {
    pub fn new(indices: Vec<u32>) -> Result<Self, TruthTableError> {
        let mut seen = vec![false; indices.len()];
        for &i in &indices {
            let slot = seen.get_mut(i as usize).ok_or(TruthTableError::NotBijection)?;
            if *slot {
                return Err(TruthTableError::NotBijection);
            }
            *slot = true;
        }
        Ok(RowPermutation(indices))
    }

    pub fn identity(rows: usize) -> Self {
        RowPermutation((0..rows as u32).collect())
    }

    /// `k -> rows - 1 - k`.
    pub fn reversal(rows: usize) -> Self {
        RowPermutation((0..rows as u32).rev().collect())
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, rng: &mut R) -> Self {
        let mut v: Vec<u32> = (0..rows as u32).collect();
        v.shuffle(rng);
        RowPermutation(v)
    }

    /// Row permutation induced by relabeling inputs: input `i` of the result
    /// reads input `perm[i]` of the source (both 0-based).
    pub fn from_input_permutation(perm: &[usize]) -> Result<Self, TruthTableError> {
        let n = perm.len();
        check_inputs(n)?;
        let rows = 1usize << n;
        let idx = (0..rows)
            .map(|k| {
                let mut src = 0usize;
                for (i, &p) in perm.iter().enumerate() {
                    if (k >> i) & 1 == 1 {
                        src |= 1 << p;
                    }
                }
                src as u32
            })
            .collect();
        Self::new(idx)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u32; self.0.len()];
        for (k, &s) in self.0.iter().enumerate() {
            inv[s as usize] = k as u32;
        }
        RowPermutation(inv)
    }

    /// `(self ∘ other)(k) = self(other(k))`.
    pub fn compose(&self, other: &Self) -> Self {
        RowPermutation(other.0.iter().map(|&k| self.0[k as usize]).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}
