//! Alice's mapping from a data bit and a keyed basis index to a linear
//! polarization angle.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::keystream::{BasisIndex, Keystream, SchemeSize};
use crate::{Error, Result};

/// How a transmitted pulse reaches a receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelModel {
    /// Independent Poisson counts behind polarizing analyzers.
    PhotonCounting,
    /// Transmitted angle plus zero-mean Gaussian noise of width `1/(2 sqrt N)`.
    GaussianAngle,
    /// Receivers see the exact angle.
    Noiseless,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub scheme: SchemeSize,
    pub mean_photons: f64,
    pub channel: ChannelModel,
}

impl ProtocolParams {
    pub fn new(scheme: SchemeSize, mean_photons: f64, channel: ChannelModel) -> Result<Self> {
        if !mean_photons.is_finite() || mean_photons < 0.0 {
            return Err(Error::InvalidMeanPhotons(mean_photons));
        }
        Ok(Self { scheme, mean_photons, channel })
    }

    pub fn noiseless(scheme: SchemeSize) -> Self {
        Self { scheme, mean_photons: 0.0, channel: ChannelModel::Noiseless }
    }
}

/// One transmitted symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseRecord {
    pub bit: bool,
    pub basis: BasisIndex,
    /// `L = l mod 2`.
    pub parity: bool,
    /// Polarization angle in `[0, pi)`.
    pub angle: f64,
}

/// Angle of the basis `l`, `pi l / M`.
pub fn basis_angle(l: u32, scheme: SchemeSize) -> f64 {
    PI * l as f64 / scheme.get() as f64
}

/// `pi l / M + (bit xor (l mod 2)) pi/2`.
pub fn encode_angle(bit: bool, l: u32, scheme: SchemeSize) -> Result<f64> {
    if l >= scheme.bases() {
        return Err(Error::BasisOutOfRange { l: l as u64, limit: scheme.bases() as u64 });
    }
    let flip = bit ^ basis_parity(l);
    Ok(basis_angle(l, scheme) + if flip { FRAC_PI_2 } else { 0.0 })
}

pub fn basis_parity(l: u32) -> bool {
    l & 1 == 1
}

/// Encodes each data bit with a fresh basis index drawn from `stream`.
pub fn encode_stream(data: &[bool], stream: &mut Keystream, scheme: SchemeSize) -> Vec<PulseRecord> {
    data.iter()
        .map(|&bit| {
            let basis = stream.next_basis_index(scheme);
            let angle = encode_angle(bit, basis.value(), scheme).expect("index drawn below M/2");
            PulseRecord { bit, basis, parity: basis.parity(), angle }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keystream::{SeedKey, TapSet};

    fn m(v: u64) -> SchemeSize {
        SchemeSize::new(v).unwrap()
    }

    #[test]
    fn parity_rule_examples() {
        let m32 = m(32);
        assert_eq!(encode_angle(false, 0, m32).unwrap(), 0.0);
        assert_eq!(encode_angle(true, 0, m32).unwrap(), FRAC_PI_2);
        assert!((encode_angle(false, 1, m32).unwrap() - (PI / 32.0 + FRAC_PI_2)).abs() < 1e-15);
        assert!((encode_angle(true, 1, m32).unwrap() - PI / 32.0).abs() < 1e-15);
        assert!(matches!(encode_angle(false, 16, m32), Err(Error::BasisOutOfRange { l: 16, limit: 16 })));
    }

    #[test]
    fn basis_parity_examples() {
        assert!(!basis_parity(0));
        assert!(basis_parity(7));
        assert!(!basis_parity(2));
    }

    #[test]
    fn angles_are_distinct_uniform_grid_in_range() {
        for scheme in [m(4), m(32), m(128), m(1024)] {
            let mut angles = Vec::new();
            for l in 0..scheme.bases() {
                for bit in [false, true] {
                    let a = encode_angle(bit, l, scheme).unwrap();
                    assert!((0.0..PI).contains(&a));
                    // closed form: below pi/2 exactly when bit == parity
                    assert_eq!(a < FRAC_PI_2, bit == basis_parity(l));
                    angles.push(a);
                }
            }
            angles.sort_by(f64::total_cmp);
            let step = PI / scheme.get() as f64;
            for (i, a) in angles.iter().enumerate() {
                assert!((a - step * i as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn adjacent_bases_alternate_halves() {
        for scheme in [m(4), m(32), m(128)] {
            for l in 0..scheme.bases() - 1 {
                for bit in [false, true] {
                    let here = encode_angle(bit, l, scheme).unwrap() < FRAC_PI_2;
                    let next = encode_angle(bit, l + 1, scheme).unwrap() < FRAC_PI_2;
                    assert_ne!(here, next);
                }
            }
        }
    }

    #[test]
    fn encode_stream_consumes_key() {
        let seed = SeedKey::new(0x9c3, TapSet::default()).unwrap();
        let mut stream = Keystream::new(&seed);
        assert!(encode_stream(&[], &mut stream, m(32)).is_empty());
        assert_eq!(stream.consumed(), 0);

        let data = [true, false, false, true, true, true, false, false];
        let pulses = encode_stream(&data, &mut stream, m(32));
        assert_eq!(pulses.len(), 8);
        assert_eq!(stream.consumed(), 32);
        for (p, &bit) in pulses.iter().zip(&data) {
            assert_eq!(p.bit, bit);
            assert_eq!(p.parity, p.basis.value() % 2 == 1);
        }
    }

    #[test]
    fn zero_chunk_encodes_bit_zero_at_angle_zero() {
        // cell 5 set: no tapped cell is reached within four steps
        let seed = SeedKey::new(0x10, TapSet::default()).unwrap();
        let mut stream = Keystream::new(&seed);
        let pulses = encode_stream(&[false], &mut stream, m(32));
        assert_eq!(pulses[0].basis.value(), 0);
        assert_eq!(pulses[0].angle, 0.0);
    }

    #[test]
    fn params_reject_negative_photons() {
        assert!(ProtocolParams::new(m(4), -1.0, ChannelModel::PhotonCounting).is_err());
        assert!(ProtocolParams::new(m(4), f64::NAN, ChannelModel::PhotonCounting).is_err());
        assert!(ProtocolParams::new(m(4), 0.0, ChannelModel::PhotonCounting).is_ok());
    }
}
