//! Bob's keyed decoders, Eve's unkeyed threshold decoder, and the protocol
//! run that produces aligned transcripts.
//!
//! Eve is a passive wiretap: she receives a copy of the same angle
//! measurement record that Bob uses in measure-then-decode mode. Bob's
//! parity-mode decoder uses its own single-basis measurement.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use libm::{cos, sin};
use rand::Rng;

use crate::channel::{self, count_dual_basis, count_single_basis, estimate_angle, gaussian_angle_channel};
use crate::encoding::{basis_angle, encode_angle, encode_stream, ChannelModel, ProtocolParams};
use crate::keystream::{BasisIndex, Keystream, SchemeSize, SeedKey, TapSet};

fn fair_coin<R: Rng + ?Sized>(rng: &mut R) -> bool {
    rng.random_bool(0.5)
}

/// Measures the pulse in the keyed basis `l` and reads the bit off the arm
/// that received more photons. Ties, including vacuum, are a fair coin.
pub fn bob_parity_decode<R: Rng + ?Sized>(angle: f64, basis: BasisIndex, params: &ProtocolParams, rng: &mut R) -> bool {
    let analyzer = basis_angle(basis.value(), params.scheme);
    let n = params.mean_photons;
    let (aligned, orthogonal) = match params.channel {
        ChannelModel::Noiseless => {
            let (c, s) = (cos(angle - analyzer), sin(angle - analyzer));
            (c * c, s * s)
        }
        ChannelModel::PhotonCounting => {
            let (a, o) = count_single_basis(angle, analyzer, n, rng).expect("validated mean photons");
            (a as f64, o as f64)
        }
        ChannelModel::GaussianAngle if n > 0.0 => {
            let seen = gaussian_angle_channel(angle, n, rng).expect("positive mean photons");
            let (c, s) = (cos(seen - analyzer), sin(seen - analyzer));
            (c * c, s * s)
        }
        ChannelModel::GaussianAngle => (0.0, 0.0),
    };
    if aligned > orthogonal {
        basis.parity()
    } else if aligned < orthogonal {
        !basis.parity()
    } else {
        fair_coin(rng)
    }
}

/// Decodes a measured angle with the key: picks the bit whose encoded angle
/// is closer to `theta_hat`. `tie_coin` settles exact ties.
pub fn bob_measure_then_decode(theta_hat: f64, basis: BasisIndex, scheme: SchemeSize, tie_coin: bool) -> bool {
    let l = basis.value();
    let zero = encode_angle(false, l, scheme).expect("valid basis index");
    let one = encode_angle(true, l, scheme).expect("valid basis index");
    let d0 = channel::angular_distance(theta_hat, zero);
    let d1 = channel::angular_distance(theta_hat, one);
    if d0 < d1 {
        false
    } else if d1 < d0 {
        true
    } else {
        tie_coin
    }
}

/// Eve's keyless rule: `[0, pi/2)` is 0 and `[pi/2, pi)` is 1.
pub fn eve_threshold_decode(theta_hat: f64) -> bool {
    theta_hat >= FRAC_PI_2
}

/// The angle record shared by Bob (measure-then-decode) and Eve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharedRecord {
    pub theta_hat: f64,
    pub uninformative: bool,
    /// Coin drawn with the measurement, used by any keyed decoder on a tie.
    pub tie_coin: bool,
}

/// Produces the shared angle record for one pulse.
pub fn measure_angle<R: Rng + ?Sized>(angle: f64, params: &ProtocolParams, rng: &mut R) -> SharedRecord {
    let n = params.mean_photons;
    let estimate = match params.channel {
        ChannelModel::Noiseless => channel::AngleEstimate { angle, uninformative: false },
        ChannelModel::PhotonCounting => {
            let record = count_dual_basis(angle, n, rng).expect("validated mean photons");
            estimate_angle(&record, rng)
        }
        ChannelModel::GaussianAngle if n > 0.0 => channel::AngleEstimate {
            angle: gaussian_angle_channel(angle, n, rng).expect("positive mean photons"),
            uninformative: false,
        },
        ChannelModel::GaussianAngle => channel::uniform_angle(rng),
    };
    SharedRecord { theta_hat: estimate.angle, uninformative: estimate.uninformative, tie_coin: fair_coin(rng) }
}

/// Aligned per-symbol record of one protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub params: ProtocolParams,
    /// Register configuration of the running key; public, unlike the seed.
    pub taps: TapSet,
    /// Alice's data `D`.
    pub data: Vec<bool>,
    /// Basis indices `l`.
    pub basis: Vec<BasisIndex>,
    /// Parity bits `L = l mod 2`.
    pub parity: Vec<bool>,
    /// Transmitted angles.
    pub angle: Vec<f64>,
    /// Eve's threshold bits `E`.
    pub eve: Vec<bool>,
    /// Bob's parity-mode bits.
    pub bob_parity: Vec<bool>,
    /// Bob's measure-then-decode bits.
    pub bob_mtd: Vec<bool>,
    /// Shared angle estimates.
    pub theta_hat: Vec<f64>,
    pub uninformative: Vec<bool>,
    pub tie_coin: Vec<bool>,
    /// Running-key bits used.
    pub key_bits_consumed: u64,
}

impl Transcript {
    fn with_capacity(params: ProtocolParams, taps: TapSet, n: usize) -> Self {
        Self {
            params,
            taps,
            data: Vec::with_capacity(n),
            basis: Vec::with_capacity(n),
            parity: Vec::with_capacity(n),
            angle: Vec::with_capacity(n),
            eve: Vec::with_capacity(n),
            bob_parity: Vec::with_capacity(n),
            bob_mtd: Vec::with_capacity(n),
            theta_hat: Vec::with_capacity(n),
            uninformative: Vec::with_capacity(n),
            tie_coin: Vec::with_capacity(n),
            key_bits_consumed: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Bits Eve obtains by applying Bob's keyed decoder to her copy of the
    /// shared record, as she would if she held the running key.
    pub fn eve_keyed(&self) -> Vec<bool> {
        (0..self.len())
            .map(|i| bob_measure_then_decode(self.theta_hat[i], self.basis[i], self.params.scheme, self.tie_coin[i]))
            .collect()
    }

    /// Number of symbols with `E != D xor L`.
    pub fn pad_mismatches(&self) -> usize {
        (0..self.len()).filter(|&i| self.eve[i] != (self.data[i] ^ self.parity[i])).count()
    }
}

/// Runs the scheme over `data` with the running key expanded from `seed`.
pub fn run_protocol<R: Rng + ?Sized>(
    data: &[bool],
    seed: &SeedKey,
    params: &ProtocolParams,
    rng: &mut R,
) -> Transcript {
    let mut stream = Keystream::new(seed);
    let pulses = encode_stream(data, &mut stream, params.scheme);
    let mut t = Transcript::with_capacity(*params, *seed.taps(), data.len());
    for pulse in pulses {
        let shared = measure_angle(pulse.angle, params, rng);
        let bob_parity = bob_parity_decode(pulse.angle, pulse.basis, params, rng);
        let bob_mtd = bob_measure_then_decode(shared.theta_hat, pulse.basis, params.scheme, shared.tie_coin);
        t.data.push(pulse.bit);
        t.basis.push(pulse.basis);
        t.parity.push(pulse.parity);
        t.angle.push(pulse.angle);
        t.eve.push(eve_threshold_decode(shared.theta_hat));
        t.bob_parity.push(bob_parity);
        t.bob_mtd.push(bob_mtd);
        t.theta_hat.push(shared.theta_hat);
        t.uninformative.push(shared.uninformative);
        t.tie_coin.push(shared.tie_coin);
    }
    t.key_bits_consumed = stream.consumed();
    t
}

/// Uniform random data bits.
pub fn random_data<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<bool> {
    (0..n).map(|_| rng.random::<bool>()).collect()
}
