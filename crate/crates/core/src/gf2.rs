//! Word-packed GF(2) vectors and incremental row echelon reduction.

use alloc::vec;
use alloc::vec::Vec;

const WORD_BITS: usize = u64::BITS as usize;

/// Bit vector over GF(2), packed 64 bits per word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(WORD_BITS)], len }
    }

    /// The low `len` bits of `bits`, bit `i` at index `i`.
    pub fn from_u64(bits: u64, len: usize) -> Self {
        assert!(len <= WORD_BITS);
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = if len == WORD_BITS { bits } else { bits & ((1 << len) - 1) };
        }
        v
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % WORD_BITS == 0 {
                words.push(0);
            }
            if b {
                words[len / WORD_BITS] |= 1 << (len % WORD_BITS);
            }
            len += 1;
        }
        Self { words, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "index {i} out of range {}", self.len);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "index {i} out of range {}", self.len);
        let mask = 1 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &Self) -> bool {
        assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum::<u32>() & 1 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Lowest set index at or after `from`.
    pub fn first_set_from(&self, from: usize) -> Option<usize> {
        if from >= self.len {
            return None;
        }
        let mut wi = from / WORD_BITS;
        let mut word = self.words[wi] & (u64::MAX << (from % WORD_BITS));
        loop {
            if word != 0 {
                let i = wi * WORD_BITS + word.trailing_zeros() as usize;
                return (i < self.len).then_some(i);
            }
            wi += 1;
            if wi == self.words.len() {
                return None;
            }
            word = self.words[wi];
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// First word of the vector; the whole vector when `len <= 64`.
    pub fn low_word(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }
}

/// Outcome of inserting a row into an [`Echelon`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insert {
    /// The row was independent and became the pivot of this column.
    Pivot(usize),
    /// The row reduced to `0 = 0`.
    Redundant,
    /// The row reduced to `0 = 1`.
    Conflict,
}

/// Row echelon form of an augmented system `A x = b` over GF(2), built one
/// row at a time.
///
/// Rows have `unknowns + 1` bits; the last bit is the right-hand side. The
/// stored row for pivot column `c` has its lowest coefficient bit at `c`.
#[derive(Debug, Clone)]
pub struct Echelon {
    unknowns: usize,
    pivots: Vec<Option<BitVector>>,
    rank: usize,
}

impl Echelon {
    pub fn new(unknowns: usize) -> Self {
        Self { unknowns, pivots: vec![None; unknowns], rank: 0 }
    }

    pub fn unknowns(&self) -> usize {
        self.unknowns
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Reduces an augmented row against the current pivots and stores it if
    /// it is independent.
    pub fn insert(&mut self, mut row: BitVector) -> Insert {
        assert_eq!(row.len(), self.unknowns + 1);
        let mut col = 0;
        while let Some(c) = row.first_set_from(col) {
            if c >= self.unknowns {
                return Insert::Conflict;
            }
            match &self.pivots[c] {
                Some(p) => row.xor_assign(p),
                None => {
                    self.pivots[c] = Some(row);
                    self.rank += 1;
                    return Insert::Pivot(c);
                }
            }
            col = c + 1;
        }
        Insert::Redundant
    }

    /// The unique solution, when the system has full column rank.
    pub fn solve(&self) -> Option<BitVector> {
        if self.rank < self.unknowns {
            return None;
        }
        let mut x = BitVector::zeros(self.unknowns);
        for c in (0..self.unknowns).rev() {
            let p = self.pivots[c].as_ref().expect("full rank");
            let mut v = p.get(self.unknowns);
            let mut j = c + 1;
            while let Some(k) = p.first_set_from(j) {
                if k >= self.unknowns {
                    break;
                }
                v ^= x.get(k);
                j = k + 1;
            }
            x.set(c, v);
        }
        Some(x)
    }
}
