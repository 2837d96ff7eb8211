//! Acceptance suite: one pass/fail line per criterion, non-zero exit if any
//! criterion fails.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mesocrypt_core::analysis::{
    delta_i, disagreement_rate, eve_error_rate, key_consumption, sweep_point, GridPoint, Pairing, SeedPolicy,
};
use mesocrypt_core::channel::{
    count_dual_basis, dual_basis_sigma, estimate_angle, gaussian_sigma, AxialSummary, RngHandle,
};
use mesocrypt_core::cryptanalysis::{known_plaintext_attack, observed_keystream_bits, solve_seed, LinearSystem};
use mesocrypt_core::encoding::{ChannelModel, ProtocolParams};
use mesocrypt_core::keystream::{expand_key, SchemeSize, SeedKey, TapSet};
use mesocrypt_core::receivers::{random_data, run_protocol, Transcript};
use rand::Rng;
use rayon::prelude::*;

const BASE_SEED: u64 = 0x5eed_acce;

thread_local! {
    /// (symbols, M, key bits consumed) for every transcript produced here.
    static CONSUMPTION: RefCell<Vec<(usize, SchemeSize, u64)>> = const { RefCell::new(Vec::new()) };
}

fn record(t: &Transcript) {
    CONSUMPTION.with(|c| c.borrow_mut().push((t.len(), t.params.scheme, t.key_bits_consumed)));
}

fn scheme(m: u64) -> SchemeSize {
    SchemeSize::new(m).unwrap()
}

fn handle(criterion: u64) -> RngHandle {
    RngHandle::new(BASE_SEED).with_stream(criterion)
}

fn simulate(m: u64, n: f64, channel: ChannelModel, pulses: usize, h: RngHandle) -> Transcript {
    let mut rng = h.rng();
    let seed = SeedKey::random(TapSet::default(), &mut rng);
    let params = ProtocolParams::new(scheme(m), n, channel).unwrap();
    let data = random_data(pulses, &mut rng);
    run_protocol(&data, &seed, &params, &mut rng)
}

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn within_time(elapsed: Duration, limit: Duration, detail: String) -> Outcome {
    if elapsed < limit {
        Ok(detail)
    } else {
        Err(format!("{detail}; runtime {elapsed:.2?} exceeds {limit:?}"))
    }
}

fn otp_identity() -> Outcome {
    let start = Instant::now();
    let mut report = Vec::new();
    for (i, m) in [4u64, 32, 128, 1024].into_iter().enumerate() {
        let t = simulate(m, 0.0, ChannelModel::Noiseless, 10_000, handle(100 + i as u64));
        record(&t);
        let bad = t.pad_mismatches();
        if bad != 0 {
            return Err(format!("M={m}: {bad} of {} symbols violate E = D xor L", t.len()));
        }
        report.push(format!("M={m} {}/{}", t.len(), t.len()));
    }
    within_time(start.elapsed(), Duration::from_secs(1), report.join(", "))
}

fn identical_information() -> Outcome {
    let start = Instant::now();
    let mut report = Vec::new();
    for (i, n) in [1.0, 100.0, 1e4].into_iter().enumerate() {
        let t = simulate(32, n, ChannelModel::PhotonCounting, 100_000, handle(200 + i as u64));
        record(&t);
        let eve = t.eve_keyed();
        if eve != t.bob_mtd {
            let diff = eve.iter().zip(&t.bob_mtd).filter(|(a, b)| a != b).count();
            return Err(format!("N={n}: decoded sequences differ in {diff} positions"));
        }
        let info = delta_i(&t, Pairing::IdenticalRecord).map_err(|e| e.to_string())?;
        if info.delta != 0.0 {
            return Err(format!("N={n}: delta_I = {:e}", info.delta));
        }
        report.push(format!("N={n} I={:.4} dI=0", info.i_ab));
    }
    within_time(start.elapsed(), Duration::from_secs(30), report.join(", "))
}

fn intensity_direction() -> Outcome {
    let start = Instant::now();
    let photons = [1.0, 10.0, 100.0, 1000.0, 1e4];
    let policy = SeedPolicy::RandomPerPoint(TapSet::default());
    let results: Vec<_> = photons
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let point = GridPoint { mean_photons: n, scheme: scheme(128) };
            sweep_point(&point, 100_000, ChannelModel::PhotonCounting, &policy, handle(300 + i as u64))
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    for (_, t) in &results {
        record(t);
    }
    for (row, _) in &results {
        rows.push(row);
    }
    for w in rows.windows(2) {
        let slack = 3.0 * (w[0].eve_err_se.powi(2) + w[1].eve_err_se.powi(2)).sqrt();
        if w[1].eve_err > w[0].eve_err + slack {
            return Err(format!(
                "error rises from {:.5} (N={}) to {:.5} (N={})",
                w[0].eve_err, w[0].mean_photons, w[1].eve_err, w[1].mean_photons
            ));
        }
    }
    let (first, last) = (rows[0], rows[rows.len() - 1]);
    let gap = first.eve_err - last.eve_err;
    let se = (first.eve_err_se.powi(2) + last.eve_err_se.powi(2)).sqrt();
    if gap <= 5.0 * se {
        return Err(format!("error(1)-error(1e4) = {gap:.5} is not beyond 5 sigma ({se:.5})"));
    }
    let listing: Vec<String> = rows.iter().map(|r| format!("N={} {:.5}", r.mean_photons, r.eve_err)).collect();
    within_time(start.elapsed(), Duration::from_secs(120), listing.join(", "))
}

fn single_photon_limit() -> Outcome {
    let start = Instant::now();
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/eve_error_n1_m128.txt");
    let expected: f64 = std::fs::read_to_string(fixture)
        .map_err(|e| format!("reading {fixture}: {e}"))?
        .trim()
        .parse()
        .map_err(|e| format!("parsing oracle value: {e}"))?;
    let pulses = 100_000;
    let t = simulate(128, 1.0, ChannelModel::PhotonCounting, pulses, handle(400));
    record(&t);
    let measured = eve_error_rate(&t);
    let sigma = (expected * (1.0 - expected) / pulses as f64).sqrt();
    let z = (measured - expected) / sigma;
    let detail = format!("measured {measured:.5}, oracle {expected:.5}, z={z:+.2}");
    if z.abs() > 3.0 {
        return Err(detail);
    }
    within_time(start.elapsed(), Duration::from_secs(60), detail)
}

fn bob_vacuum_error() -> Outcome {
    let start = Instant::now();
    let pulses = 1_000_000;
    let mut report = Vec::new();
    for (i, n) in [0.5f64, 1.0, 2.0].into_iter().enumerate() {
        let t = simulate(32, n, ChannelModel::PhotonCounting, pulses, handle(500 + i as u64));
        record(&t);
        let measured = disagreement_rate(&t.data, &t.bob_parity);
        let expected = 0.5 * (-n).exp();
        let sigma = (expected * (1.0 - expected) / pulses as f64).sqrt();
        let z = (measured - expected) / sigma;
        let line = format!("N={n} {measured:.5} vs {expected:.5} (z={z:+.2})");
        if z.abs() > 3.0 {
            return Err(line);
        }
        report.push(line);
    }
    within_time(start.elapsed(), Duration::from_secs(60), report.join(", "))
}

fn seed_recovery() -> Outcome {
    let start = Instant::now();
    let (known, held_out) = (64, 10_000);
    let params = ProtocolParams::noiseless(scheme(32));
    let mut rng = handle(600).rng();
    let mut full_rank = 0;
    for instance in 0..100 {
        let seed = SeedKey::random(TapSet::default(), &mut rng);
        let data = random_data(known + held_out, &mut rng);
        let t = run_protocol(&data, &seed, &params, &mut rng);
        record(&t);
        let outcome =
            known_plaintext_attack(&t, known, None, &mut rng).map_err(|e| format!("instance {instance}: {e}"))?;
        if outcome.recovered.rank < seed.degree() {
            continue;
        }
        full_rank += 1;
        if outcome.recovered.seed != Some(seed) {
            return Err(format!("instance {instance}: full rank but wrong seed"));
        }
        let dec = outcome.decryption.ok_or(format!("instance {instance}: no decryption"))?;
        let errors = dec.bits[known..].iter().zip(&data[known..]).filter(|(a, b)| a != b).count();
        if errors != 0 {
            return Err(format!("instance {instance}: {errors} held-out errors"));
        }
    }
    let detail = format!("full-rank rate {full_rank}/100, all recovered, held-out decryption exact");
    within_time(start.elapsed(), Duration::from_secs(10), detail)
}

const SMALL_TAPS: [&[usize]; 7] = [&[2, 1], &[3, 2], &[4, 3], &[5, 3], &[6, 5], &[7, 6], &[8, 6, 5, 4]];

fn brute_force(taps: TapSet, positions: &[u64], bits: &[bool]) -> Vec<u64> {
    let len = positions.iter().max().map_or(0, |&p| p as usize + 1);
    (1..1u64 << taps.degree())
        .filter(|&s| {
            let stream = expand_key(&SeedKey::new(s, taps).unwrap(), len);
            positions.iter().zip(bits).all(|(&p, &b)| stream[p as usize] == b)
        })
        .collect()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = handle(700).rng();
    let (mut unique, mut deficient) = (0, 0);
    for instance in 0..50 {
        let taps = TapSet::new(SMALL_TAPS[rng.random_range(0..SMALL_TAPS.len())]).unwrap();
        let k = taps.degree();
        let m = [4u64, 8, 16, 32][rng.random_range(0..4)];
        let known = rng.random_range(1..=2 * k);
        let seed = SeedKey::random(taps, &mut rng);
        let data = random_data(known, &mut rng);
        let t = run_protocol(&data, &seed, &ProtocolParams::noiseless(scheme(m)), &mut rng);
        record(&t);
        let obs = observed_keystream_bits(&t, 0, &data).map_err(|e| e.to_string())?;
        let positions: Vec<u64> = obs.iter().map(|o| o.position).collect();
        let bits: Vec<bool> = obs.iter().map(|o| o.bit).collect();
        let candidates = brute_force(taps, &positions, &bits);
        let recovered = solve_seed(&LinearSystem::from_observations(&obs, taps))
            .map_err(|e| format!("instance {instance}: {e}"))?;
        let agrees = if recovered.unique {
            unique += 1;
            candidates == [recovered.seed.unwrap().bits()]
        } else {
            deficient += 1;
            // the affine solution set has 2^(k - rank) points, one of which
            // may be the excluded all-zero state
            let size = 1usize << (k - recovered.rank);
            candidates.len() == size || candidates.len() == size - 1
        };
        if !agrees || !candidates.contains(&seed.bits()) {
            return Err(format!(
                "instance {instance} (k={k}, M={m}, {known} symbols): algebraic rank {} vs {} brute-force candidates",
                recovered.rank,
                candidates.len()
            ));
        }
    }
    let detail = format!("50/50 agree ({unique} unique, {deficient} rank-deficient)");
    within_time(start.elapsed(), Duration::from_secs(10), detail)
}

fn channel_calibration() -> Outcome {
    let start = Instant::now();
    let n = 100.0;
    let sigma = gaussian_sigma(n);
    let mut rng = handle(800).rng();
    let mut report = Vec::new();
    let mut failed = false;
    for theta in [PI / 8.0, PI / 5.0, PI / 3.0] {
        let estimates: Vec<f64> = (0..100_000)
            .map(|_| estimate_angle(&count_dual_basis(theta, n, &mut rng).unwrap(), &mut rng).angle)
            .collect();
        let summary = AxialSummary::from_angles(estimates).unwrap();
        let rel = summary.std_dev / sigma - 1.0;
        failed |= rel.abs() > 0.25;
        report.push(format!("theta={theta:.4} sd={:.5} ({:+.1}%)", summary.std_dev, 100.0 * rel));
    }
    let detail = format!(
        "{}; model sigma={sigma:.5}, dual-basis small-noise width={:.5}",
        report.join(", "),
        dual_basis_sigma(n)
    );
    if failed {
        return Err(format!("beyond 25% of 1/(2 sqrt N): {detail}"));
    }
    within_time(start.elapsed(), Duration::from_secs(30), detail)
}

fn key_accounting() -> Outcome {
    CONSUMPTION.with(|c| {
        let runs = c.borrow();
        if runs.is_empty() {
            return Err("no transcripts recorded".to_string());
        }
        for &(len, m, consumed) in runs.iter() {
            let expected = key_consumption(len as u64, m);
            if consumed != expected {
                return Err(format!("M={}: {len} symbols consumed {consumed} bits, expected {expected}", m.get()));
            }
        }
        let symbols: usize = runs.iter().map(|r| r.0).sum();
        Ok(format!("{} transcripts, {symbols} symbols, all exact", runs.len()))
    })
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 one-time-pad identity", otp_identity),
        ("2 identical-record information balance", identical_information),
        ("3 intensity lowers eavesdropper error", intensity_direction),
        ("4 single-photon oracle", single_photon_limit),
        ("5 receiver vacuum error", bob_vacuum_error),
        ("6 seed recovery", seed_recovery),
        ("7 brute-force equivalence", oracle_equivalence),
        ("8 channel cross-calibration", channel_calibration),
        ("9 key-consumption accounting", key_accounting),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS criterion {name} [{elapsed:.2?}]: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {name} [{elapsed:.2?}]: {detail}");
            }
        }
    }
    println!("{} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
