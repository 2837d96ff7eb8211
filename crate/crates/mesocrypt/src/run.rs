//! Command execution.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use mesocrypt_core::analysis::{
    default_grid, delta_i, disagreement_rate, eve_error_rate, grid, key_consumption, GridPoint, Pairing, SeedPolicy,
    DEFAULT_PHOTONS, DEFAULT_SCHEMES,
};
use mesocrypt_core::channel::RngHandle;
use mesocrypt_core::cryptanalysis::known_plaintext_attack;
use mesocrypt_core::encoding::{ChannelModel, ProtocolParams};
use mesocrypt_core::keystream::{SchemeSize, SeedKey};
use mesocrypt_core::receivers::{random_data, run_protocol, Transcript};

use crate::config::{channel_name, Command, RunConfig};
use crate::formats::{write_sweep_csv, write_transcript_csv};
use crate::report::AttackReport;
use crate::sweep::parallel_sweep;
use crate::CliError;

const DEMO_PHOTONS: f64 = 100.0;
const ATTACK_PHOTONS: f64 = 10_000.0;
const EXCERPT_LEN: usize = 16;

/// Runs `config`, writing artifacts to `--out` or to `stdout`.
pub fn execute(config: &RunConfig) -> Result<(), CliError> {
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    execute_with(config, &mut lock)
}

pub fn execute_with(config: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    match config.command {
        Command::OtpCheck => otp_check(config, stdout),
        Command::Demo => demo(config, stdout),
        Command::Sweep => sweep(config, stdout),
        Command::Attack => attack(config, stdout),
    }
}

fn with_output<F>(config: &RunConfig, stdout: &mut dyn Write, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
{
    match &config.output_path {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(stdout),
    }
}

fn params(config: &RunConfig, default_photons: f64) -> Result<ProtocolParams, CliError> {
    Ok(ProtocolParams::new(config.scheme(), config.mean_photons.unwrap_or(default_photons), config.channel)?)
}

fn otp_check(config: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut rng = RngHandle::new(config.rng_seed).rng();
    let seed = config.seed_key().unwrap_or_else(|| SeedKey::random(config.taps, &mut rng));
    let params = ProtocolParams::noiseless(config.scheme());
    let data = random_data(config.pulses, &mut rng);
    let t = run_protocol(&data, &seed, &params, &mut rng);
    let n = t.len();
    let ok = n - t.pad_mismatches();
    let expected_key = key_consumption(n as u64, params.scheme);
    with_output(config, stdout, |w| {
        writeln!(w, "{ok}/{n} symbols satisfy D\u{2295}L=E")?;
        writeln!(w, "key bits consumed: {} (expected {expected_key})", t.key_bits_consumed)?;
        Ok(())
    })?;
    if ok != n {
        return Err(CliError::Invariant(format!("{} symbols violate D xor L = E", n - ok)));
    }
    if t.key_bits_consumed != expected_key {
        return Err(CliError::Invariant("key consumption differs from data_len * log2(M/2)".into()));
    }
    Ok(())
}

fn write_summary(w: &mut dyn Write, t: &Transcript) -> Result<(), CliError> {
    writeln!(w, "symbols: {}", t.len())?;
    writeln!(w, "key bits consumed: {}", t.key_bits_consumed)?;
    writeln!(w, "Bob parity-mode error rate: {}", disagreement_rate(&t.data, &t.bob_parity))?;
    writeln!(w, "Bob measure-then-decode error rate: {}", disagreement_rate(&t.data, &t.bob_mtd))?;
    writeln!(w, "Eve threshold error rate (E vs D xor L): {}", eve_error_rate(t))?;
    writeln!(w, "Eve threshold bits vs data disagreement: {}", disagreement_rate(&t.data, &t.eve))?;
    if !t.is_empty() {
        let same = delta_i(t, Pairing::IdenticalRecord)?;
        writeln!(w, "identical record: I_AB={} I_AE={} delta_I={}", same.i_ab, same.i_ae, same.delta)?;
        let keyless = delta_i(t, Pairing::ParityVersusThreshold)?;
        writeln!(
            w,
            "parity vs keyless threshold: I_AB={} I_AE={} delta_I={}",
            keyless.i_ab, keyless.i_ae, keyless.delta
        )?;
    }
    Ok(())
}

fn demo(config: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let params = params(config, DEMO_PHOTONS)?;
    let mut rng = RngHandle::new(config.rng_seed).rng();
    let seed = config.seed_key().unwrap_or_else(|| SeedKey::random(config.taps, &mut rng));
    let data = random_data(config.pulses, &mut rng);
    let t = run_protocol(&data, &seed, &params, &mut rng);

    writeln!(
        stdout,
        "M={} N={} channel={} taps={} seed=0x{}",
        params.scheme,
        params.mean_photons,
        channel_name(params.channel),
        config.taps,
        seed.to_hex()
    )?;
    writeln!(
        stdout,
        "{:>5} {:>2} {:>4} {:>2} {:>9} {:>9} {:>2} {:>3} {:>3}  note",
        "i", "D", "l", "L", "theta", "theta_hat", "E", "Bp", "Bm"
    )?;
    for i in 0..t.len().min(EXCERPT_LEN) {
        let mut note = String::new();
        if t.uninformative[i] {
            note.push_str("vacuum ");
        }
        if t.eve[i] != (t.data[i] ^ t.parity[i]) {
            note.push_str("E!=D^L ");
        }
        let line = format!(
            "{:>5} {:>2} {:>4} {:>2} {:>9.5} {:>9.5} {:>2} {:>3} {:>3}  {}",
            i,
            t.data[i] as u8,
            t.basis[i].value(),
            t.parity[i] as u8,
            t.angle[i],
            t.theta_hat[i],
            t.eve[i] as u8,
            t.bob_parity[i] as u8,
            t.bob_mtd[i] as u8,
            note.trim_end()
        );
        writeln!(stdout, "{}", line.trim_end())?;
    }
    write_summary(stdout, &t)?;
    if let Some(path) = &config.output_path {
        let mut w = BufWriter::new(File::create(path)?);
        write_transcript_csv(&mut w, &t)?;
        w.flush()?;
    }
    Ok(())
}

fn sweep_grid(config: &RunConfig) -> Vec<GridPoint> {
    match (config.m, config.mean_photons) {
        (None, None) => default_grid(),
        (m, n) => {
            let schemes: Vec<SchemeSize> = match m {
                Some(m) => vec![m],
                None => DEFAULT_SCHEMES.iter().map(|&m| SchemeSize::new(m).expect("valid default")).collect(),
            };
            let photons: Vec<f64> = match n {
                Some(n) => vec![n],
                None => DEFAULT_PHOTONS.to_vec(),
            };
            grid(&photons, &schemes)
        }
    }
}

fn sweep(config: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let points = sweep_grid(config);
    let policy = match config.seed_key() {
        Some(seed) => SeedPolicy::Fixed(seed),
        None => SeedPolicy::RandomPerPoint(config.taps),
    };
    let result = parallel_sweep(&points, config.pulses, config.channel, &policy, RngHandle::new(config.rng_seed))?;
    with_output(config, stdout, |w| write_sweep_csv(w, &result))?;
    Ok(())
}

fn attack(config: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let params = params(config, ATTACK_PHOTONS)?;
    let mut rng = RngHandle::new(config.rng_seed).rng();
    let seed = config.seed_key().unwrap_or_else(|| SeedKey::random(config.taps, &mut rng));
    let known = config.known_plaintext_len;
    let data = random_data(known + config.pulses, &mut rng);
    let t = run_protocol(&data, &seed, &params, &mut rng);

    let held_out = known..t.len();
    let threshold_errors = held_out.clone().filter(|&i| t.eve[i] != (t.data[i] ^ t.parity[i])).count();
    let threshold_error_rate = if held_out.is_empty() { 0.0 } else { threshold_errors as f64 / held_out.len() as f64 };

    let mut report = AttackReport {
        m: params.scheme.get(),
        channel: params.channel,
        mean_photons: params.mean_photons,
        degree: config.taps.degree(),
        known_plaintext_symbols: known,
        observed_bits: known,
        rank: None,
        recovered_seed: None,
        true_seed: seed,
        support: 0,
        failure: None,
        held_out_symbols: held_out.len(),
        residual_error_rate: None,
        threshold_error_rate,
    };
    match known_plaintext_attack(&t, known, config.voting.as_ref(), &mut rng) {
        Ok(outcome) => {
            report.observed_bits = outcome.observations;
            report.rank = Some(outcome.recovered.rank);
            report.recovered_seed = outcome.recovered.seed;
            report.support = outcome.recovered.support;
            if let Some(dec) = &outcome.decryption {
                report.residual_error_rate = Some(if held_out.is_empty() {
                    0.0
                } else {
                    disagreement_rate(&dec.bits[held_out.clone()], &t.data[held_out.clone()])
                });
            }
        }
        Err(e @ (mesocrypt_core::Error::Inconsistent { .. } | mesocrypt_core::Error::EmptySystem)) => {
            report.failure = Some(e.to_string());
        }
        Err(e) => return Err(e.into()),
    }
    with_output(config, stdout, |w| Ok(write!(w, "{report}")?))?;

    if params.channel == ChannelModel::Noiseless {
        if report.failure.is_some() {
            return Err(CliError::Invariant("noiseless observations were inconsistent".into()));
        }
        if report.recovered_seed.is_some() && (!report.seed_matches() || report.residual_error_rate != Some(0.0)) {
            return Err(CliError::Invariant("noiseless attack recovered a wrong seed".into()));
        }
    }
    Ok(())
}
