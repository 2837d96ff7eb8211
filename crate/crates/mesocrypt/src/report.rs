//! Plain-text reports.

use std::fmt;

use mesocrypt_core::keystream::SeedKey;

use crate::config::channel_name;
use mesocrypt_core::encoding::ChannelModel;

/// Outcome of a known-plaintext attack run.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackReport {
    pub m: u32,
    pub channel: ChannelModel,
    pub mean_photons: f64,
    pub degree: usize,
    pub known_plaintext_symbols: usize,
    pub observed_bits: usize,
    /// `None` when the solver rejected the observations.
    pub rank: Option<usize>,
    pub recovered_seed: Option<SeedKey>,
    pub true_seed: SeedKey,
    pub support: usize,
    pub failure: Option<String>,
    pub held_out_symbols: usize,
    /// Error rate of the decrypted held-out symbols.
    pub residual_error_rate: Option<f64>,
    /// Eve's raw threshold error rate on the held-out symbols.
    pub threshold_error_rate: f64,
}

impl AttackReport {
    pub fn seed_matches(&self) -> bool {
        self.recovered_seed == Some(self.true_seed)
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

impl fmt::Display for AttackReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "known-plaintext attack")?;
        writeln!(f, "M: {}", self.m)?;
        writeln!(f, "channel: {}", channel_name(self.channel))?;
        writeln!(f, "mean photons: {}", self.mean_photons)?;
        writeln!(f, "register degree: {}", self.degree)?;
        writeln!(f, "plaintext bits consumed: {}", self.known_plaintext_symbols)?;
        writeln!(f, "observed keystream bits: {}", self.observed_bits)?;
        match self.rank {
            Some(rank) => writeln!(f, "rank: {rank}/{}", self.degree)?,
            None => writeln!(f, "rank: n/a")?,
        }
        if let Some(reason) = &self.failure {
            writeln!(f, "status: failed ({reason})")?;
        }
        match &self.recovered_seed {
            Some(seed) => {
                writeln!(f, "unique: yes")?;
                writeln!(f, "recovered seed: 0x{}", seed.to_hex())?;
                writeln!(f, "observations supporting seed: {}/{}", self.support, self.observed_bits)?;
            }
            None => writeln!(f, "unique: no")?,
        }
        writeln!(f, "true seed: 0x{}", self.true_seed.to_hex())?;
        writeln!(f, "seed recovered: {}", yes_no(self.seed_matches()))?;
        writeln!(f, "held-out symbols: {}", self.held_out_symbols)?;
        match self.residual_error_rate {
            Some(r) => writeln!(f, "residual error rate: {r}")?,
            None => writeln!(f, "residual error rate: n/a")?,
        }
        writeln!(f, "threshold error rate: {}", self.threshold_error_rate)
    }
}
