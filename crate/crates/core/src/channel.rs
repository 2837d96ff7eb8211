//! Measurement of a linearly polarized coherent pulse.
//!
//! Photon numbers behind each analyzer arm are independent Poisson variables
//! with mean `N cos^2` / `N sin^2` of the angle between pulse and analyzer.
//! Losses, dark counts and detector inefficiency are not modeled.

use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use libm::{atan2, cos, log, sin, sqrt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::{Error, Result};

/// Reproducible random source: a 64-bit seed and a stream id.
///
/// Equal `(seed, stream_id)` pairs give identical draws; distinct stream ids
/// give independent streams of the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngHandle {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngHandle {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream_id: 0 }
    }

    pub fn with_stream(self, stream_id: u64) -> Self {
        Self { stream_id, ..self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Reduces an angle into `[0, pi)`.
pub fn reduce_angle(angle: f64) -> f64 {
    let r = libm::fmod(angle, PI);
    let r = if r < 0.0 { r + PI } else { r };
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// Distance between two polarization directions, in `[0, pi/2]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = reduce_angle(a - b);
    d.min(PI - d)
}

/// Signed difference `a - b` wrapped into `(-pi/2, pi/2]`.
pub fn circular_difference(a: f64, b: f64) -> f64 {
    let d = reduce_angle(a - b);
    if d > FRAC_PI_2 {
        d - PI
    } else {
        d
    }
}

fn check_photons(mean_photons: f64) -> Result<()> {
    if !mean_photons.is_finite() || mean_photons < 0.0 {
        return Err(Error::InvalidMeanPhotons(mean_photons));
    }
    Ok(())
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let draw: f64 = Poisson::new(mean).expect("finite positive mean").sample(rng);
    draw as u64
}

/// Counts behind one analyzer at angle `analyzer`: `(aligned, orthogonal)`.
pub fn count_single_basis<R: Rng + ?Sized>(
    angle: f64,
    analyzer: f64,
    mean_photons: f64,
    rng: &mut R,
) -> Result<(u64, u64)> {
    check_photons(mean_photons)?;
    let c = cos(angle - analyzer);
    let s = sin(angle - analyzer);
    let aligned = poisson(mean_photons * c * c, rng);
    let orthogonal = poisson(mean_photons * s * s, rng);
    Ok((aligned, orthogonal))
}

/// Counts of a dual-basis measurement, arms at `0, pi/2, pi/4, 3pi/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord {
    pub counts: [u64; 4],
    pub mean_photons: f64,
}

impl MeasurementRecord {
    pub fn is_vacuum(&self) -> bool {
        self.counts.iter().all(|&n| n == 0)
    }

    /// Stokes differences `(S1, S2) = (n1 - n2, n3 - n4)`.
    pub fn stokes(&self) -> (i64, i64) {
        let [n1, n2, n3, n4] = self.counts;
        (n1 as i64 - n2 as i64, n3 as i64 - n4 as i64)
    }
}

/// Splits the pulse 50/50 between a `{0, pi/2}` and a `{pi/4, 3pi/4}`
/// analyzer and counts all four arms.
pub fn count_dual_basis<R: Rng + ?Sized>(angle: f64, mean_photons: f64, rng: &mut R) -> Result<MeasurementRecord> {
    check_photons(mean_photons)?;
    let (n1, n2) = count_single_basis(angle, 0.0, mean_photons / 2.0, rng)?;
    let (n3, n4) = count_single_basis(angle, FRAC_PI_4, mean_photons / 2.0, rng)?;
    Ok(MeasurementRecord { counts: [n1, n2, n3, n4], mean_photons })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleEstimate {
    /// Estimated angle in `[0, pi)`.
    pub angle: f64,
    /// Set when the counts carry no direction; `angle` is then uniform.
    pub uninformative: bool,
}

/// Stokes-parameter estimate `atan2(S2, S1) / 2`.
///
/// When both Stokes differences vanish (always the case for a vacuum pulse)
/// the direction is undefined and a uniform angle is returned instead.
pub fn estimate_angle<R: Rng + ?Sized>(record: &MeasurementRecord, rng: &mut R) -> AngleEstimate {
    let (s1, s2) = record.stokes();
    if s1 == 0 && s2 == 0 {
        return uniform_angle(rng);
    }
    AngleEstimate { angle: reduce_angle(atan2(s2 as f64, s1 as f64) / 2.0), uninformative: false }
}

pub(crate) fn uniform_angle<R: Rng + ?Sized>(rng: &mut R) -> AngleEstimate {
    AngleEstimate { angle: reduce_angle(rng.random::<f64>() * PI), uninformative: true }
}

/// Width of the Gaussian shortcut, `1/(2 sqrt N)`.
pub fn gaussian_sigma(mean_photons: f64) -> f64 {
    0.5 / sqrt(mean_photons)
}

/// Small-noise spread of the dual-basis Stokes estimator, `1/sqrt(2N)`.
///
/// Each basis sees `N/2` photons on average, so the estimated direction of
/// `(S1, S2)` scatters by `sqrt(2/N)` in `2 theta`.
pub fn dual_basis_sigma(mean_photons: f64) -> f64 {
    1.0 / sqrt(2.0 * mean_photons)
}

/// Transmitted angle plus Gaussian noise of width [`gaussian_sigma`].
pub fn gaussian_angle_channel<R: Rng + ?Sized>(angle: f64, mean_photons: f64, rng: &mut R) -> Result<f64> {
    if !mean_photons.is_finite() || mean_photons <= 0.0 {
        return Err(Error::NonPositiveMeanPhotons(mean_photons));
    }
    let noise = Normal::new(0.0, gaussian_sigma(mean_photons)).expect("finite positive width");
    Ok(reduce_angle(angle + noise.sample(rng)))
}

/// Axial (mod pi) mean and circular standard deviation of a set of angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxialSummary {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
}

impl AxialSummary {
    pub fn from_angles<I: IntoIterator<Item = f64>>(angles: I) -> Option<Self> {
        let (mut c, mut s, mut count) = (0.0, 0.0, 0usize);
        for a in angles {
            c += cos(2.0 * a);
            s += sin(2.0 * a);
            count += 1;
        }
        if count == 0 {
            return None;
        }
        let r = sqrt(c * c + s * s) / count as f64;
        let std_dev = if r >= 1.0 { 0.0 } else { sqrt(-2.0 * log(r)) / 2.0 };
        Some(Self { count, mean: reduce_angle(atan2(s, c) / 2.0), std_dev })
    }

    pub fn standard_error(&self) -> f64 {
        self.std_dev / sqrt(self.count as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec::Vec;

    fn record(counts: [u64; 4]) -> MeasurementRecord {
        MeasurementRecord { counts, mean_photons: 1.0 }
    }

    #[test]
    fn vacuum_counts_are_zero() {
        let mut rng = RngHandle::new(1).rng();
        for _ in 0..100 {
            assert_eq!(count_single_basis(0.3, 0.0, 0.0, &mut rng).unwrap(), (0, 0));
            assert!(count_dual_basis(1.1, 0.0, &mut rng).unwrap().is_vacuum());
        }
    }

    #[test]
    fn aligned_pulse_has_empty_orthogonal_arm() {
        let mut rng = RngHandle::new(2).rng();
        for n in [0.5, 10.0, 1e4] {
            for _ in 0..200 {
                assert_eq!(count_single_basis(0.0, 0.0, n, &mut rng).unwrap().1, 0);
            }
        }
    }

    #[test]
    fn negative_photons_rejected() {
        let mut rng = RngHandle::new(3).rng();
        assert!(count_single_basis(0.0, 0.0, -1.0, &mut rng).is_err());
        assert!(count_dual_basis(0.0, f64::INFINITY, &mut rng).is_err());
        assert_eq!(gaussian_angle_channel(0.0, 0.0, &mut rng), Err(Error::NonPositiveMeanPhotons(0.0)));
    }

    #[test]
    fn diagonal_pulse_splits_evenly() {
        let mut rng = RngHandle::new(4).rng();
        let trials = 10_000;
        let (mut a, mut o) = (0u64, 0u64);
        for _ in 0..trials {
            let (x, y) = count_single_basis(FRAC_PI_4, 0.0, 1e4, &mut rng).unwrap();
            a += x;
            o += y;
        }
        // means of 10^4 draws of Poisson(5000): 3 standard errors is 3 sqrt(5000)/100
        let tol = 3.0 * sqrt(5000.0) / 100.0;
        assert!((a as f64 / trials as f64 - 5000.0).abs() < tol);
        assert!((o as f64 / trials as f64 - 5000.0).abs() < tol);
    }

    #[test]
    fn dual_basis_arm_means() {
        let mut rng = RngHandle::new(5).rng();
        let trials = 10_000usize;
        for (theta, want) in [(0.0, [5000.0, 0.0, 2500.0, 2500.0]), (FRAC_PI_2, [0.0, 5000.0, 2500.0, 2500.0])] {
            let mut sums = [0u64; 4];
            for _ in 0..trials {
                let r = count_dual_basis(theta, 1e4, &mut rng).unwrap();
                for (s, c) in sums.iter_mut().zip(r.counts) {
                    *s += c;
                }
            }
            for (s, w) in sums.iter().zip(want) {
                let mean = *s as f64 / trials as f64;
                let tol = 3.0 * sqrt(f64::max(w, 1e-3)) / sqrt(trials as f64) + 1e-9;
                assert!((mean - w).abs() <= tol, "theta {theta}: {mean} vs {w}");
            }
        }
    }

    #[test]
    fn stokes_estimates_of_exact_counts() {
        let mut rng = RngHandle::new(6).rng();
        let e = estimate_angle(&record([100, 0, 50, 50]), &mut rng);
        assert_eq!(e.angle, 0.0);
        assert!(!e.uninformative);
        assert_eq!(estimate_angle(&record([0, 100, 50, 50]), &mut rng).angle, FRAC_PI_2);
        assert_eq!(estimate_angle(&record([50, 50, 100, 0]), &mut rng).angle, FRAC_PI_4);
        assert!(estimate_angle(&record([0, 0, 0, 0]), &mut rng).uninformative);
        assert!(estimate_angle(&record([3, 3, 1, 1]), &mut rng).uninformative);
    }

    #[test]
    fn vacuum_estimates_are_uniform() {
        let mut rng = RngHandle::new(7).rng();
        let n = 100_000;
        let below = (0..n).filter(|_| estimate_angle(&record([0; 4]), &mut rng).angle < FRAC_PI_2).count();
        let se = sqrt(0.25 / n as f64);
        assert!((below as f64 / n as f64 - 0.5).abs() < 3.0 * se);
    }

    #[test]
    fn gaussian_width() {
        assert!((gaussian_sigma(25.0) - 0.1).abs() < 1e-15);
        let mut rng = RngHandle::new(8).rng();
        // sigma -> 0 as N grows
        let out = gaussian_angle_channel(1.0, 1e30, &mut rng).unwrap();
        assert!((out - 1.0).abs() < 1e-12);
        let theta = 0.7;
        let diffs: Vec<f64> = (0..100_000)
            .map(|_| circular_difference(gaussian_angle_channel(theta, 25.0, &mut rng).unwrap(), theta))
            .collect();
        let var = diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64;
        assert!((sqrt(var) - 0.1).abs() < 0.002);
    }

    #[test]
    fn angular_distance_examples() {
        assert_eq!(angular_distance(0.0, 0.0), 0.0);
        assert!((angular_distance(0.1, PI - 0.1) - 0.2).abs() < 1e-12);
        assert!((angular_distance(0.0, FRAC_PI_2) - FRAC_PI_2).abs() < 1e-15);
        assert!((circular_difference(0.05, PI - 0.05) - 0.1).abs() < 1e-12);
        assert!((circular_difference(PI - 0.05, 0.05) + 0.1).abs() < 1e-12);
    }

    #[test]
    fn reduce_angle_range() {
        for x in [-10.0, -PI, -1e-18, 0.0, 1.0, PI, 7.5, 1e6] {
            let r = reduce_angle(x);
            assert!((0.0..PI).contains(&r), "{x} -> {r}");
        }
    }

    #[test]
    fn identical_handles_reproduce_draws() {
        let h = RngHandle::new(42).with_stream(9);
        let draw = |h: RngHandle| {
            let mut rng = h.rng();
            (0..50).map(|_| count_dual_basis(0.4, 30.0, &mut rng).unwrap().counts).collect::<Vec<_>>()
        };
        assert_eq!(draw(h), draw(h));
        assert_ne!(draw(h), draw(h.with_stream(10)));
    }

    #[test]
    fn axial_summary_wraps_around_zero() {
        let s = AxialSummary::from_angles([0.01, PI - 0.01]).unwrap();
        assert!(angular_distance(s.mean, 0.0) < 1e-12);
        assert!((s.std_dev - 0.01).abs() < 1e-4);
        assert!(AxialSummary::from_angles(core::iter::empty()).is_none());
    }
}
