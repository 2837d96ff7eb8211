//! Mutual information estimates, information balance and intensity sweeps.

use alloc::vec::Vec;

use libm::{log2, sqrt};

use crate::channel::RngHandle;
use crate::encoding::{ChannelModel, ProtocolParams};
use crate::keystream::{SchemeSize, SeedKey, TapSet};
use crate::receivers::{random_data, run_protocol, Transcript};
use crate::{Error, Result};

/// Co-occurrence counts of (Alice bit, receiver bit).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct JointCounts {
    pub counts: [[u64; 2]; 2],
}

impl JointCounts {
    pub fn from_table(counts: [[u64; 2]; 2]) -> Self {
        Self { counts }
    }

    pub fn from_sequences(x: &[bool], y: &[bool]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
        }
        let mut counts = [[0; 2]; 2];
        for (&a, &b) in x.iter().zip(y) {
            counts[a as usize][b as usize] += 1;
        }
        Ok(Self { counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn transpose(&self) -> Self {
        let c = self.counts;
        Self { counts: [[c[0][0], c[1][0]], [c[0][1], c[1][1]]] }
    }
}

/// Plug-in estimate of `I(X;Y)` in bits, clamped to `[0, 1]`.
pub fn mutual_information(table: &JointCounts) -> Result<f64> {
    let total = table.total();
    if total == 0 {
        return Err(Error::EmptyCounts);
    }
    let n = total as f64;
    let c = &table.counts;
    let row = [c[0][0] + c[0][1], c[1][0] + c[1][1]];
    let col = [c[0][0] + c[1][0], c[0][1] + c[1][1]];
    let mut info = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            let nxy = c[x][y];
            if nxy == 0 {
                continue;
            }
            // p(x,y) / (p(x) p(y)) = n_xy n / (n_x n_y)
            let ratio = (nxy as f64 * n) / (row[x] as f64 * col[y] as f64);
            info += nxy as f64 / n * log2(ratio);
        }
    }
    Ok(info.clamp(0.0, 1.0))
}

/// Which receiver outputs are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    /// Bob and Eve both run the keyed measure-then-decode rule on the same
    /// angle record.
    IdenticalRecord,
    /// Bob's parity-mode bits against Eve's keyless threshold bits.
    ParityVersusThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InformationBalance {
    pub i_ab: f64,
    pub i_ae: f64,
    pub delta: f64,
}

/// `I_AB`, `I_AE` and `delta_I = I_AB - I_AE` for a transcript.
pub fn delta_i(transcript: &Transcript, pairing: Pairing) -> Result<InformationBalance> {
    if transcript.is_empty() {
        return Err(Error::EmptyTranscript);
    }
    let d = &transcript.data;
    let (bob, eve) = match pairing {
        Pairing::IdenticalRecord => (transcript.bob_mtd.clone(), transcript.eve_keyed()),
        Pairing::ParityVersusThreshold => (transcript.bob_parity.clone(), transcript.eve.clone()),
    };
    let i_ab = mutual_information(&JointCounts::from_sequences(d, &bob)?)?;
    let i_ae = mutual_information(&JointCounts::from_sequences(d, &eve)?)?;
    Ok(InformationBalance { i_ab, i_ae, delta: i_ab - i_ae })
}

/// Running-key bits needed for `data_len` symbols, `data_len log2(M/2)`.
pub fn key_consumption(data_len: u64, scheme: SchemeSize) -> u64 {
    data_len * scheme.bits_per_symbol() as u64
}

/// Binomial standard error of a rate `p` over `n` trials.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    sqrt(p * (1.0 - p) / n as f64)
}

/// Fraction of positions where `a` and `b` differ.
pub fn disagreement_rate(a: &[bool], b: &[bool]) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return 0.0;
    }
    a.iter().zip(b).filter(|(x, y)| x != y).count() as f64 / n as f64
}

/// Eve's threshold error rate: how often `E != D xor L`.
pub fn eve_error_rate(t: &Transcript) -> f64 {
    if t.is_empty() {
        return 0.0;
    }
    t.pad_mismatches() as f64 / t.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub mean_photons: f64,
    pub scheme: SchemeSize,
}

/// Mean photon numbers of the default sweep.
pub const DEFAULT_PHOTONS: [f64; 6] = [0.0, 1.0, 10.0, 100.0, 1000.0, 10000.0];
/// Scheme sizes of the default sweep.
pub const DEFAULT_SCHEMES: [u64; 3] = [4, 32, 128];
/// Smallest accepted number of pulses per sweep point.
pub const MIN_SWEEP_PULSES: usize = 1000;

/// Cartesian grid, photon numbers varying fastest within each scheme size.
pub fn grid(photons: &[f64], schemes: &[SchemeSize]) -> Vec<GridPoint> {
    schemes
        .iter()
        .flat_map(|&scheme| photons.iter().map(move |&mean_photons| GridPoint { mean_photons, scheme }))
        .collect()
}

pub fn default_grid() -> Vec<GridPoint> {
    let schemes: Vec<SchemeSize> =
        DEFAULT_SCHEMES.iter().map(|&m| SchemeSize::new(m).expect("valid default M")).collect();
    grid(&DEFAULT_PHOTONS, &schemes)
}

/// Where the seed key of each sweep point comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeedPolicy {
    Fixed(SeedKey),
    /// A fresh random seed per point, drawn from the point's random stream.
    RandomPerPoint(TapSet),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub mean_photons: f64,
    pub m: u32,
    pub pulses: usize,
    /// Bob's parity-mode bit error rate.
    pub bob_err: f64,
    pub bob_err_se: f64,
    /// Eve's threshold error rate against `D xor L`.
    pub eve_err: f64,
    pub eve_err_se: f64,
    pub i_ab: f64,
    pub i_ae: f64,
    pub delta_i: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Simulates one grid point with the random stream `handle`.
///
/// `I_AB` and `I_AE` use the identical-record pairing.
pub fn sweep_point(
    point: &GridPoint,
    pulses: usize,
    channel: ChannelModel,
    policy: &SeedPolicy,
    handle: RngHandle,
) -> Result<(SweepRow, Transcript)> {
    if pulses < MIN_SWEEP_PULSES {
        return Err(Error::TooFewPulses { min: MIN_SWEEP_PULSES, got: pulses });
    }
    let params = ProtocolParams::new(point.scheme, point.mean_photons, channel)?;
    let mut rng = handle.rng();
    let seed = match policy {
        SeedPolicy::Fixed(seed) => *seed,
        SeedPolicy::RandomPerPoint(taps) => SeedKey::random(*taps, &mut rng),
    };
    let data = random_data(pulses, &mut rng);
    let t = run_protocol(&data, &seed, &params, &mut rng);
    let bob_err = disagreement_rate(&t.data, &t.bob_parity);
    let eve_err = eve_error_rate(&t);
    let info = delta_i(&t, Pairing::IdenticalRecord)?;
    let row = SweepRow {
        mean_photons: point.mean_photons,
        m: point.scheme.get(),
        pulses,
        bob_err,
        bob_err_se: binomial_se(bob_err, pulses),
        eve_err,
        eve_err_se: binomial_se(eve_err, pulses),
        i_ab: info.i_ab,
        i_ae: info.i_ae,
        delta_i: info.delta,
    };
    Ok((row, t))
}

/// Runs every grid point; point `i` uses stream `i` of `handle.seed`, so the
/// result does not depend on evaluation order.
pub fn intensity_sweep(
    points: &[GridPoint],
    pulses: usize,
    channel: ChannelModel,
    policy: &SeedPolicy,
    handle: RngHandle,
) -> Result<SweepResult> {
    let rows = points
        .iter()
        .enumerate()
        .map(|(i, p)| sweep_point(p, pulses, channel, policy, handle.with_stream(i as u64)).map(|(row, _)| row))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}
