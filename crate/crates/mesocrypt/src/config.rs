//! Run configuration from command-line flags and flat `key=value` files.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mesocrypt_core::cryptanalysis::VotingConfig;
use mesocrypt_core::encoding::ChannelModel;
use mesocrypt_core::keystream::{SchemeSize, SeedKey, TapSet};

use crate::CliError;

pub const DEFAULT_PULSES: usize = 10_000;
pub const DEFAULT_KNOWN_PLAINTEXT: usize = 64;
pub const DEFAULT_M: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Demo,
    Sweep,
    Attack,
    OtpCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    Counting,
    Gaussian,
    Noiseless,
}

impl From<ChannelArg> for ChannelModel {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::Counting => ChannelModel::PhotonCounting,
            ChannelArg::Gaussian => ChannelModel::GaussianAngle,
            ChannelArg::Noiseless => ChannelModel::Noiseless,
        }
    }
}

pub fn channel_name(c: ChannelModel) -> &'static str {
    match c {
        ChannelModel::PhotonCounting => "counting",
        ChannelModel::GaussianAngle => "gaussian",
        ChannelModel::Noiseless => "noiseless",
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "mesocrypt",
    version,
    about = "Simulate keyed polarization-basis encryption with coherent pulses and attack it",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Print an annotated transcript excerpt and its statistics
    Demo(Flags),
    /// Sweep mean photon number and M; write the results as CSV
    Sweep(Flags),
    /// Recover the seed key from known plaintext and decrypt the rest
    Attack(Flags),
    /// Check E = D xor L on a noiseless channel
    #[command(name = "otp-check")]
    OtpCheck(Flags),
}

#[derive(Debug, Clone, Default, Args)]
struct Flags {
    /// Scheme size M, a power of two >= 4 [default: 32; sweep: 4,32,128]
    #[arg(long = "M", value_name = "M")]
    m: Option<u64>,
    /// Mean photon number per pulse [demo: 100; attack: 10000; sweep: 0,1,10,100,1000,10000]
    #[arg(long, value_name = "N")]
    photons: Option<f64>,
    /// Symbols per run; held-out symbols for attack; pulses per point for sweep [default: 10000]
    #[arg(long)]
    pulses: Option<usize>,
    /// Seed key in hex [default: random, drawn from --rng-seed]
    #[arg(long = "seed-key", value_name = "HEX")]
    seed_key: Option<String>,
    /// Comma-separated LFSR tap positions [default: 16,15,13,4]
    #[arg(long)]
    taps: Option<String>,
    /// Channel model [default: counting; otp-check: noiseless]
    #[arg(long, value_enum)]
    channel: Option<ChannelArg>,
    /// Seed of the simulation random numbers (required)
    #[arg(long = "rng-seed")]
    rng_seed: Option<u64>,
    /// Known-plaintext symbols available to the attack [default: 64]
    #[arg(long = "known-plaintext", value_name = "SYMBOLS")]
    known_plaintext: Option<usize>,
    /// Output file [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Candidate seeds tried when observations conflict; 0 disables voting [default: 256, noiseless: 0]
    #[arg(long = "vote-trials")]
    vote_trials: Option<usize>,
    /// Fraction of observations that must agree with a voted seed [default: 0.75]
    #[arg(long = "vote-threshold")]
    vote_threshold: Option<f64>,
    /// Flat key=value file with the same keys as the flags; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Flags {
    fn or(self, file: Flags) -> Flags {
        Flags {
            m: self.m.or(file.m),
            photons: self.photons.or(file.photons),
            pulses: self.pulses.or(file.pulses),
            seed_key: self.seed_key.or(file.seed_key),
            taps: self.taps.or(file.taps),
            channel: self.channel.or(file.channel),
            rng_seed: self.rng_seed.or(file.rng_seed),
            known_plaintext: self.known_plaintext.or(file.known_plaintext),
            out: self.out.or(file.out),
            vote_trials: self.vote_trials.or(file.vote_trials),
            vote_threshold: self.vote_threshold.or(file.vote_threshold),
            config: self.config,
        }
    }
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Scheme size; `None` lets the command pick (sweep uses its default grid).
    pub m: Option<SchemeSize>,
    pub mean_photons: Option<f64>,
    pub pulses: usize,
    pub seed_key_hex: Option<String>,
    pub taps: TapSet,
    pub channel: ChannelModel,
    pub rng_seed: u64,
    pub known_plaintext_len: usize,
    pub output_path: Option<PathBuf>,
    pub voting: Option<VotingConfig>,
}

impl RunConfig {
    pub fn scheme(&self) -> SchemeSize {
        self.m.unwrap_or_else(|| SchemeSize::new(DEFAULT_M).expect("valid default"))
    }

    /// The configured seed key, if one was given.
    pub fn seed_key(&self) -> Option<SeedKey> {
        self.seed_key_hex.as_deref().map(|h| SeedKey::from_hex(h, self.taps).expect("validated at parse time"))
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.trim().parse().map_err(|_| usage(format!("invalid value {value:?} for {key}")))
}

fn read_config_file(path: &Path) -> Result<Flags, CliError> {
    let text = fs::read_to_string(path)?;
    let mut flags = Flags::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{}:{}: expected key=value", path.display(), lineno + 1)))?;
        let (key, value) = (key.trim().trim_start_matches("--"), value.trim());
        match key {
            "M" => flags.m = Some(parse_value(key, value)?),
            "photons" => flags.photons = Some(parse_value(key, value)?),
            "pulses" => flags.pulses = Some(parse_value(key, value)?),
            "seed-key" => flags.seed_key = Some(value.to_string()),
            "taps" => flags.taps = Some(value.to_string()),
            "channel" => {
                flags.channel =
                    Some(ChannelArg::from_str(value, false).map_err(|_| usage(format!("unknown channel {value:?}")))?)
            }
            "rng-seed" => flags.rng_seed = Some(parse_value(key, value)?),
            "known-plaintext" => flags.known_plaintext = Some(parse_value(key, value)?),
            "out" => flags.out = Some(PathBuf::from(value)),
            "vote-trials" => flags.vote_trials = Some(parse_value(key, value)?),
            "vote-threshold" => flags.vote_threshold = Some(parse_value(key, value)?),
            _ => return Err(usage(format!("{}:{}: unknown key {key:?}", path.display(), lineno + 1))),
        }
    }
    Ok(flags)
}

fn parse_taps(spec: &str) -> Result<TapSet, CliError> {
    let taps = spec.split(',').map(|t| parse_value::<usize>("taps", t)).collect::<Result<Vec<_>, _>>()?;
    TapSet::new(&taps).map_err(|e| usage(format!("taps: {e}")))
}

/// Parses `argv` (including the program name) into a validated [`RunConfig`].
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let (command, flags) = match cli.command {
        CliCommand::Demo(f) => (Command::Demo, f),
        CliCommand::Sweep(f) => (Command::Sweep, f),
        CliCommand::Attack(f) => (Command::Attack, f),
        CliCommand::OtpCheck(f) => (Command::OtpCheck, f),
    };
    let flags = match &flags.config {
        Some(path) => {
            let file = read_config_file(path)?;
            flags.or(file)
        }
        None => flags,
    };
    resolve(command, flags)
}

fn resolve(command: Command, flags: Flags) -> Result<RunConfig, CliError> {
    let m =
        flags.m.map(|m| SchemeSize::new(m).map_err(|_| usage("M must be a power of two \u{2265} 4"))).transpose()?;
    if let Some(n) = flags.photons {
        if !n.is_finite() || n < 0.0 {
            return Err(usage("photons must be a finite non-negative number"));
        }
    }
    let rng_seed = flags.rng_seed.ok_or_else(|| usage("--rng-seed is required"))?;
    let taps = match &flags.taps {
        Some(spec) => parse_taps(spec)?,
        None => TapSet::default(),
    };
    if let Some(hex) = &flags.seed_key {
        SeedKey::from_hex(hex, taps).map_err(|e| usage(format!("seed-key: {e}")))?;
    }
    let pulses = flags.pulses.unwrap_or(DEFAULT_PULSES);
    if command == Command::Sweep && pulses < mesocrypt_core::analysis::MIN_SWEEP_PULSES {
        return Err(usage(format!("pulses must be at least {} for sweep", mesocrypt_core::analysis::MIN_SWEEP_PULSES)));
    }
    let channel: ChannelModel = match (command, flags.channel) {
        (_, Some(c)) => c.into(),
        (Command::OtpCheck, None) => ChannelModel::Noiseless,
        (_, None) => ChannelModel::PhotonCounting,
    };
    if command == Command::OtpCheck && channel != ChannelModel::Noiseless {
        return Err(usage("otp-check runs on the noiseless channel only"));
    }
    let threshold = flags.vote_threshold.unwrap_or(VotingConfig::default().min_agreement);
    if !(0.0..=1.0).contains(&threshold) {
        return Err(usage("vote-threshold must be in [0, 1]"));
    }
    let default_trials = if channel == ChannelModel::Noiseless { 0 } else { VotingConfig::default().trials };
    let voting = match flags.vote_trials.unwrap_or(default_trials) {
        0 => None,
        trials => Some(VotingConfig { trials, min_agreement: threshold }),
    };
    Ok(RunConfig {
        command,
        m,
        mean_photons: flags.photons,
        pulses,
        seed_key_hex: flags.seed_key,
        taps,
        channel,
        rng_seed,
        known_plaintext_len: flags.known_plaintext.unwrap_or(DEFAULT_KNOWN_PLAINTEXT),
        output_path: flags.out,
        voting,
    })
}
