//! Known-plaintext seed recovery.
//!
//! With known data bits `D_i`, Eve's threshold bits give the parity bits of
//! the running key, `L_i = D_i xor E_i`. Each parity bit is the last bit of
//! a `log2(M/2)`-bit chunk, and every keystream bit is a fixed GF(2) linear
//! functional of the seed, so a handful of observations determines the seed.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use libm::{erfc, sqrt};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::channel::{angular_distance, dual_basis_sigma, gaussian_sigma};
use crate::encoding::ChannelModel;
use crate::gf2::{BitVector, Echelon, Insert};
use crate::keystream::{Keystream, SchemeSize, SeedKey, TapSet};
use crate::receivers::Transcript;
use crate::{Error, Result};

/// One recovered keystream bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    pub position: u64,
    pub bit: bool,
}

/// Keystream position of the parity bit of symbol `index`.
pub fn parity_position(index: usize, scheme: SchemeSize) -> u64 {
    let width = scheme.bits_per_symbol() as u64;
    index as u64 * width + width - 1
}

/// Keystream bits revealed by known plaintext `known` starting at symbol
/// `offset` of the transcript.
pub fn observed_keystream_bits(transcript: &Transcript, offset: usize, known: &[bool]) -> Result<Vec<Observation>> {
    let end = offset + known.len();
    if end > transcript.len() {
        return Err(Error::MisalignedPlaintext { offset, end, len: transcript.len() });
    }
    let scheme = transcript.params.scheme;
    Ok(known
        .iter()
        .enumerate()
        .map(|(j, &d)| {
            let i = offset + j;
            Observation { position: parity_position(i, scheme), bit: d ^ transcript.eve[i] }
        })
        .collect())
}

// Transition matrix rows as bit masks: row i gives cell i+1 of the next state.
fn transition_matrix(taps: &TapSet) -> Vec<u64> {
    let k = taps.degree();
    let mut rows = Vec::with_capacity(k);
    rows.push(taps.mask());
    for i in 1..k {
        rows.push(1 << (i - 1));
    }
    rows
}

fn mat_mul(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter()
        .map(|&row| {
            let mut acc = 0;
            let mut bits = row;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                acc ^= b[j];
                bits &= bits - 1;
            }
            acc
        })
        .collect()
}

fn vec_mat(v: u64, m: &[u64]) -> u64 {
    mat_mul(&[v], m)[0]
}

/// Linear functional `f_p` over the seed cells with output bit `p` equal to
/// `f_p . seed`. Bit `j` of the result multiplies seed cell `j + 1`.
///
/// Uses square-and-multiply on the transition matrix.
pub fn seed_functional(position: u64, taps: &TapSet) -> BitVector {
    let k = taps.degree();
    let mut result = taps.mask();
    let mut power = transition_matrix(taps);
    let mut p = position;
    while p > 0 {
        if p & 1 == 1 {
            result = vec_mat(result, &power);
        }
        power = mat_mul(&power, &power);
        p >>= 1;
    }
    BitVector::from_u64(result, k)
}

/// Functionals for many positions in one symbolic run of the register.
pub fn seed_functionals(positions: &[u64], taps: &TapSet) -> Vec<BitVector> {
    let k = taps.degree();
    let mut order: Vec<usize> = (0..positions.len()).collect();
    order.sort_by_key(|&i| positions[i]);

    // cells[i] is the functional held by cell i+1
    let mut cells: Vec<u64> = (0..k).map(|i| 1u64 << i).collect();
    let tapped: Vec<usize> = taps.positions().map(|t| t - 1).collect();
    let mut out = alloc::vec![BitVector::zeros(k); positions.len()];
    let mut step = 0u64;
    for i in order {
        let target = positions[i];
        let f = loop {
            let f = tapped.iter().fold(0, |acc, &t| acc ^ cells[t]);
            if step == target {
                break f;
            }
            cells.rotate_right(1);
            cells[0] = f;
            step += 1;
        };
        out[i] = BitVector::from_u64(f, k);
    }
    out
}

/// Observations as a linear system over the seed cells.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub taps: TapSet,
    pub rows: Vec<BitVector>,
    pub rhs: Vec<bool>,
}

impl LinearSystem {
    pub fn new(taps: TapSet) -> Self {
        Self { taps, rows: Vec::new(), rhs: Vec::new() }
    }

    pub fn from_observations(observations: &[Observation], taps: TapSet) -> Self {
        let positions: Vec<u64> = observations.iter().map(|o| o.position).collect();
        Self { taps, rows: seed_functionals(&positions, &taps), rhs: observations.iter().map(|o| o.bit).collect() }
    }

    pub fn push(&mut self, row: BitVector, rhs: bool) -> Result<()> {
        if row.len() != self.taps.degree() {
            return Err(Error::WidthMismatch { got: row.len(), expected: self.taps.degree() });
        }
        self.rows.push(row);
        self.rhs.push(rhs);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn augmented(&self, i: usize) -> BitVector {
        BitVector::from_bits(self.rows[i].iter().chain([self.rhs[i]]))
    }

    /// Number of rows satisfied by `seed`.
    pub fn support(&self, seed: &BitVector) -> usize {
        self.rows.iter().zip(&self.rhs).filter(|(r, &b)| r.dot(seed) == b).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredKey {
    /// Present exactly when the solution is unique.
    pub seed: Option<SeedKey>,
    pub rank: usize,
    pub unique: bool,
    /// Rows of the system satisfied by `seed`.
    pub support: usize,
}

/// Gaussian elimination over GF(2). Fails on the first row that contradicts
/// the earlier ones.
pub fn solve_seed(system: &LinearSystem) -> Result<RecoveredKey> {
    if system.is_empty() {
        return Err(Error::EmptySystem);
    }
    let k = system.taps.degree();
    let mut echelon = Echelon::new(k);
    for i in 0..system.len() {
        if echelon.insert(system.augmented(i)) == Insert::Conflict {
            return Err(Error::Inconsistent { row: i });
        }
    }
    finish(system, &echelon)
}

fn finish(system: &LinearSystem, echelon: &Echelon) -> Result<RecoveredKey> {
    let rank = echelon.rank();
    match echelon.solve() {
        Some(x) => {
            let seed = SeedKey::new(x.low_word(), system.taps)?;
            Ok(RecoveredKey { seed: Some(seed), rank, unique: true, support: system.support(&x) })
        }
        None => Ok(RecoveredKey { seed: None, rank, unique: false, support: 0 }),
    }
}

/// Settings for solving noisy systems by candidate voting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VotingConfig {
    /// Number of candidate seeds drawn from random full-rank row subsets.
    pub trials: usize,
    /// Fraction of all rows that must agree with the winning candidate.
    pub min_agreement: f64,
}

impl Default for VotingConfig {
    fn default() -> Self {
        Self { trials: 256, min_agreement: 0.75 }
    }
}

/// Solves a possibly inconsistent system.
///
/// A consistent system is solved exactly. Otherwise each trial shuffles the
/// rows, eliminates until full rank (skipping contradicting rows) and
/// proposes the resulting seed; every row votes for the candidates it
/// satisfies and the best-supported candidate wins if it clears
/// `min_agreement`.
pub fn solve_seed_voting<R: Rng + ?Sized>(
    system: &LinearSystem,
    config: &VotingConfig,
    rng: &mut R,
) -> Result<RecoveredKey> {
    let first_conflict = match solve_seed(system) {
        Err(Error::Inconsistent { row }) => row,
        other => return other,
    };
    let k = system.taps.degree();
    let mut order: Vec<usize> = (0..system.len()).collect();
    let mut best: Option<(usize, BitVector)> = None;
    for _ in 0..config.trials {
        order.shuffle(rng);
        let mut echelon = Echelon::new(k);
        for &i in &order {
            echelon.insert(system.augmented(i));
            if echelon.rank() == k {
                break;
            }
        }
        let Some(x) = echelon.solve() else {
            return Ok(RecoveredKey { seed: None, rank: echelon.rank(), unique: false, support: 0 });
        };
        let support = system.support(&x);
        if best.as_ref().is_none_or(|(s, _)| support > *s) {
            best = Some((support, x));
        }
    }
    let needed = libm::ceil(config.min_agreement * system.len() as f64) as usize;
    match best {
        Some((support, x)) if support >= needed && x.low_word() != 0 => {
            Ok(RecoveredKey { seed: Some(SeedKey::new(x.low_word(), system.taps)?), rank: k, unique: true, support })
        }
        _ => Err(Error::Inconsistent { row: first_conflict }),
    }
}

/// Decrypted data with a per-bit probability of being correct.
#[derive(Debug, Clone, PartialEq)]
pub struct Decryption {
    pub bits: Vec<bool>,
    pub confidence: Vec<f64>,
}

impl Decryption {
    pub fn errors_against(&self, data: &[bool]) -> usize {
        self.bits.iter().zip(data).filter(|(a, b)| a != b).count()
    }
}

/// Regenerates the running key from the recovered seed and strips the
/// parity bits from Eve's threshold bits, `D_i = E_i xor L_i`.
pub fn decrypt_with_seed(transcript: &Transcript, recovered: &RecoveredKey) -> Result<Decryption> {
    let seed = match (&recovered.seed, recovered.unique) {
        (Some(seed), true) => seed,
        _ => return Err(Error::KeyNotUnique { rank: recovered.rank, degree: transcript.taps.degree() }),
    };
    let scheme = transcript.params.scheme;
    let mut stream = Keystream::new(seed);
    let bits = transcript.eve.iter().map(|&e| e ^ stream.next_basis_index(scheme).parity()).collect();
    let confidence = (0..transcript.len()).map(|i| bit_confidence(transcript, i)).collect();
    Ok(Decryption { bits, confidence })
}

// Probability that the threshold bit is right, from the distance of the
// estimate to the nearer decision boundary under a Gaussian spread.
fn bit_confidence(t: &Transcript, i: usize) -> f64 {
    if t.uninformative[i] {
        return 0.5;
    }
    let n = t.params.mean_photons;
    let sigma = match t.params.channel {
        ChannelModel::Noiseless => return 1.0,
        ChannelModel::PhotonCounting => dual_basis_sigma(n),
        ChannelModel::GaussianAngle => gaussian_sigma(n),
    };
    let theta = t.theta_hat[i];
    let margin = angular_distance(theta, 0.0).min(angular_distance(theta, FRAC_PI_2));
    1.0 - 0.5 * erfc(margin / (sigma * sqrt(2.0)))
}

/// Result of the end-to-end known-plaintext attack.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackOutcome {
    pub recovered: RecoveredKey,
    pub observations: usize,
    pub decryption: Option<Decryption>,
}

/// Builds the system from the first `known_len` symbols of `transcript`
/// (whose data Eve is assumed to know), solves it and decrypts the whole
/// transcript when the seed is unique.
pub fn known_plaintext_attack<R: Rng + ?Sized>(
    transcript: &Transcript,
    known_len: usize,
    voting: Option<&VotingConfig>,
    rng: &mut R,
) -> Result<AttackOutcome> {
    let known = transcript.data.get(..known_len).ok_or(Error::MisalignedPlaintext {
        offset: 0,
        end: known_len,
        len: transcript.len(),
    })?;
    let observations = observed_keystream_bits(transcript, 0, known)?;
    let system = LinearSystem::from_observations(&observations, transcript.taps);
    let recovered = match voting {
        Some(config) => solve_seed_voting(&system, config, rng)?,
        None => solve_seed(&system)?,
    };
    let decryption = if recovered.unique { Some(decrypt_with_seed(transcript, &recovered)?) } else { None };
    Ok(AttackOutcome { recovered, observations: observations.len(), decryption })
}
