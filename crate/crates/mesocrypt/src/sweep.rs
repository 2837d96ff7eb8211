//! Grid sweeps with one rayon job per grid point.

use mesocrypt_core::analysis::{sweep_point, GridPoint, SeedPolicy, SweepResult};
use mesocrypt_core::channel::RngHandle;
use mesocrypt_core::encoding::ChannelModel;
use rayon::prelude::*;

/// Parallel counterpart of [`mesocrypt_core::analysis::intensity_sweep`];
/// point `i` uses stream `i`, so the rows are identical to the sequential run.
pub fn parallel_sweep(
    points: &[GridPoint],
    pulses: usize,
    channel: ChannelModel,
    policy: &SeedPolicy,
    handle: RngHandle,
) -> mesocrypt_core::Result<SweepResult> {
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| sweep_point(p, pulses, channel, policy, handle.with_stream(i as u64)).map(|(row, _)| row))
        .collect::<mesocrypt_core::Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use mesocrypt_core::analysis::{grid, intensity_sweep};
    use mesocrypt_core::keystream::{SchemeSize, TapSet};

    #[test]
    fn matches_sequential_sweep() {
        let schemes = [SchemeSize::new(4).unwrap(), SchemeSize::new(32).unwrap()];
        let points = grid(&[0.0, 1.0, 50.0], &schemes);
        let policy = SeedPolicy::RandomPerPoint(TapSet::default());
        let handle = RngHandle::new(11);
        let seq = intensity_sweep(&points, 2000, ChannelModel::PhotonCounting, &policy, handle).unwrap();
        let par = parallel_sweep(&points, 2000, ChannelModel::PhotonCounting, &policy, handle).unwrap();
        assert_eq!(seq, par);
    }
}
