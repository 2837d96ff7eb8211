//! Fibonacci LFSR key expansion and slicing of the running key into basis
//! indices.
//!
//! Register cells are numbered `1..=k`, cell 1 being the newest and cell `k`
//! the oldest. A state is packed into a `u64` with cell `i` at bit `i - 1`,
//! so the integer value of a seed is also its hexadecimal representation.
//! Each step outputs the XOR of the tapped cells and shifts that bit into
//! cell 1.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::{Error, Result};

/// Default register degree.
pub const DEFAULT_DEGREE: usize = 16;
/// Default tap set, maximal length for degree 16.
pub const DEFAULT_TAPS: [usize; 4] = [16, 15, 13, 4];

/// Scheme size `M`: the number of distinct transmitted angles, with `M/2`
/// polarization bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SchemeSize(u32);

impl SchemeSize {
    pub fn new(m: u64) -> Result<Self> {
        if m < 4 || !m.is_power_of_two() || m > 1 << 31 {
            return Err(Error::InvalidSchemeSize(m));
        }
        Ok(Self(m as u32))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Number of bases, `M/2`.
    pub fn bases(self) -> u32 {
        self.0 / 2
    }

    /// Key bits consumed per symbol, `log2(M/2)`.
    pub fn bits_per_symbol(self) -> u32 {
        self.bases().trailing_zeros()
    }
}

impl fmt::Display for SchemeSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Tap positions of a register of a given degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TapSet {
    degree: usize,
    mask: u64,
}

impl TapSet {
    /// Builds a tap set whose degree is the largest tap.
    pub fn new(taps: &[usize]) -> Result<Self> {
        let degree = taps.iter().copied().max().unwrap_or(0);
        Self::with_degree(degree, taps)
    }

    pub fn with_degree(degree: usize, taps: &[usize]) -> Result<Self> {
        if !(2..=64).contains(&degree) {
            return Err(Error::InvalidDegree(degree));
        }
        let mut mask = 0u64;
        for &tap in taps {
            if tap == 0 || tap > degree {
                return Err(Error::TapOutOfRange { tap, degree });
            }
            mask |= 1 << (tap - 1);
        }
        if mask & (1 << (degree - 1)) == 0 {
            return Err(Error::MissingOldestTap(degree));
        }
        Ok(Self { degree, mask })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Tapped cells as a bit mask over the packed state.
    pub fn mask(&self) -> u64 {
        self.mask
    }

    /// Mask of all `degree` cells.
    pub fn state_mask(&self) -> u64 {
        if self.degree == 64 {
            u64::MAX
        } else {
            (1u64 << self.degree) - 1
        }
    }

    /// Tap positions in ascending order.
    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.degree).filter(|i| self.mask >> i & 1 == 1).map(|i| i + 1)
    }
}

impl Default for TapSet {
    fn default() -> Self {
        Self::new(&DEFAULT_TAPS).expect("default taps are valid")
    }
}

impl fmt::Display for TapSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for tap in (1..=self.degree).rev().filter(|t| self.mask >> (t - 1) & 1 == 1) {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{tap}")?;
            first = false;
        }
        Ok(())
    }
}

/// One clock of the register. Returns the successor state and the output bit.
pub fn lfsr_step(state: u64, taps: &TapSet) -> Result<(u64, bool)> {
    if state & !taps.state_mask() != 0 {
        return Err(Error::StateTooWide { state, degree: taps.degree });
    }
    if state == 0 {
        return Err(Error::ZeroState);
    }
    Ok(step_unchecked(state, taps))
}

#[inline]
fn step_unchecked(state: u64, taps: &TapSet) -> (u64, bool) {
    let out = (state & taps.mask).count_ones() & 1 == 1;
    (((state << 1) | out as u64) & taps.state_mask(), out)
}

/// Shared seed key: the initial register contents plus the tap set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedKey {
    bits: u64,
    taps: TapSet,
}

impl SeedKey {
    pub fn new(bits: u64, taps: TapSet) -> Result<Self> {
        if bits & !taps.state_mask() != 0 {
            return Err(Error::StateTooWide { state: bits, degree: taps.degree });
        }
        if bits == 0 {
            return Err(Error::ZeroState);
        }
        Ok(Self { bits, taps })
    }

    /// Parses a hexadecimal seed (optional `0x` prefix).
    pub fn from_hex(hex: &str, taps: TapSet) -> Result<Self> {
        let digits = hex.trim();
        let digits = digits.strip_prefix("0x").or_else(|| digits.strip_prefix("0X")).unwrap_or(digits);
        if digits.is_empty() {
            return Err(Error::InvalidSeedKey("empty hex string"));
        }
        let bits = u64::from_str_radix(digits, 16)
            .map_err(|_| Error::InvalidSeedKey("not a hexadecimal number of at most 64 bits"))?;
        Self::new(bits, taps)
    }

    /// Draws a uniformly random non-zero seed.
    pub fn random<R: Rng + ?Sized>(taps: TapSet, rng: &mut R) -> Self {
        loop {
            let bits = rng.random::<u64>() & taps.state_mask();
            if bits != 0 {
                return Self { bits, taps };
            }
        }
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn taps(&self) -> &TapSet {
        &self.taps
    }

    pub fn degree(&self) -> usize {
        self.taps.degree
    }

    /// Seed cell `i` (1-based).
    pub fn cell(&self, i: usize) -> bool {
        self.bits >> (i - 1) & 1 == 1
    }

    /// Lower-case hex, zero padded to the register width.
    pub fn to_hex(&self) -> alloc::string::String {
        let width = self.taps.degree.div_ceil(4);
        alloc::format!("{:0width$x}", self.bits)
    }
}

/// Running key `K'` generated from a [`SeedKey`].
#[derive(Debug, Clone)]
pub struct Keystream {
    state: u64,
    taps: TapSet,
    consumed: u64,
}

impl Keystream {
    pub fn new(seed: &SeedKey) -> Self {
        Self { state: seed.bits, taps: seed.taps, consumed: 0 }
    }

    pub fn next_bit(&mut self) -> bool {
        let (state, out) = step_unchecked(self.state, &self.taps);
        self.state = state;
        self.consumed += 1;
        out
    }

    /// Number of bits emitted so far.
    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    /// Draws the next basis index, consuming `log2(M/2)` bits MSB-first.
    pub fn next_basis_index(&mut self, scheme: SchemeSize) -> BasisIndex {
        let width = scheme.bits_per_symbol();
        BasisIndex::from_bits(core::iter::repeat_with(|| self.next_bit()).take(width as usize))
    }
}

/// First `n` bits of the running key.
pub fn expand_key(seed: &SeedKey, n: usize) -> Vec<bool> {
    let mut stream = Keystream::new(seed);
    (0..n).map(|_| stream.next_bit()).collect()
}

/// Basis index `l` together with the key bits it was read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisIndex {
    value: u32,
    width: u32,
}

impl BasisIndex {
    /// Reads an index MSB-first from at most 31 bits.
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let (value, width) = bits.into_iter().fold((0u32, 0u32), |(v, w), b| ((v << 1) | b as u32, w + 1));
        debug_assert!(width <= 31);
        Self { value, width }
    }

    /// Index `l` for a given scheme, checking `l < M/2`.
    pub fn new(l: u32, scheme: SchemeSize) -> Result<Self> {
        if l >= scheme.bases() {
            return Err(Error::BasisOutOfRange { l: l as u64, limit: scheme.bases() as u64 });
        }
        Ok(Self { value: l, width: scheme.bits_per_symbol() })
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    /// `l mod 2`, which is also the last source bit.
    pub fn parity(&self) -> bool {
        self.value & 1 == 1
    }

    /// The key bits that produced this index, in stream order.
    pub fn source_bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.width).rev().map(move |i| self.value >> i & 1 == 1)
    }
}
