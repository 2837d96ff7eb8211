//! CSV layouts for sweep results and transcripts.

use std::io::{Read, Write};

use mesocrypt_core::analysis::{SweepResult, SweepRow};
use mesocrypt_core::receivers::Transcript;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SWEEP_HEADER: &str = "N,M,pulses,bob_err,bob_err_se,eve_err,eve_err_se,I_AB,I_AE,delta_I";
pub const TRANSCRIPT_HEADER: &str = "index,D,L,E,B_parity,B_mtd,theta,theta_hat,uninformative_flag";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SweepRecord {
    #[serde(rename = "N")]
    mean_photons: f64,
    #[serde(rename = "M")]
    m: u32,
    pulses: usize,
    bob_err: f64,
    bob_err_se: f64,
    eve_err: f64,
    eve_err_se: f64,
    #[serde(rename = "I_AB")]
    i_ab: f64,
    #[serde(rename = "I_AE")]
    i_ae: f64,
    #[serde(rename = "delta_I")]
    delta_i: f64,
}

impl From<&SweepRow> for SweepRecord {
    fn from(r: &SweepRow) -> Self {
        Self {
            mean_photons: r.mean_photons,
            m: r.m,
            pulses: r.pulses,
            bob_err: r.bob_err,
            bob_err_se: r.bob_err_se,
            eve_err: r.eve_err,
            eve_err_se: r.eve_err_se,
            i_ab: r.i_ab,
            i_ae: r.i_ae,
            delta_i: r.delta_i,
        }
    }
}

impl From<SweepRecord> for SweepRow {
    fn from(r: SweepRecord) -> Self {
        Self {
            mean_photons: r.mean_photons,
            m: r.m,
            pulses: r.pulses,
            bob_err: r.bob_err,
            bob_err_se: r.bob_err_se,
            eve_err: r.eve_err,
            eve_err_se: r.eve_err_se,
            i_ab: r.i_ab,
            i_ae: r.i_ae,
            delta_i: r.delta_i,
        }
    }
}

pub fn write_sweep_csv<W: Write>(writer: W, result: &SweepResult) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(writer);
    if result.rows.is_empty() {
        w.write_record(SWEEP_HEADER.split(','))?;
    }
    for row in &result.rows {
        w.serialize(SweepRecord::from(row))?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a sweep CSV, rejecting any header other than [`SWEEP_HEADER`].
pub fn read_sweep_csv<R: Read>(reader: R) -> Result<SweepResult, CliError> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<&str> = r.headers()?.iter().collect();
    if header.join(",") != SWEEP_HEADER {
        return Err(CliError::Invariant(format!("unexpected sweep header {:?}", header.join(","))));
    }
    let rows = r.deserialize::<SweepRecord>().map(|rec| rec.map(SweepRow::from)).collect::<Result<Vec<_>, _>>()?;
    Ok(SweepResult { rows })
}

#[derive(Debug, Serialize)]
struct TranscriptRecord {
    index: usize,
    #[serde(rename = "D")]
    d: u8,
    #[serde(rename = "L")]
    l: u8,
    #[serde(rename = "E")]
    e: u8,
    #[serde(rename = "B_parity")]
    b_parity: u8,
    #[serde(rename = "B_mtd")]
    b_mtd: u8,
    theta: f64,
    theta_hat: f64,
    uninformative_flag: u8,
}

pub fn write_transcript_csv<W: Write>(writer: W, t: &Transcript) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(writer);
    if t.is_empty() {
        w.write_record(TRANSCRIPT_HEADER.split(','))?;
    }
    for i in 0..t.len() {
        w.serialize(TranscriptRecord {
            index: i,
            d: t.data[i] as u8,
            l: t.parity[i] as u8,
            e: t.eve[i] as u8,
            b_parity: t.bob_parity[i] as u8,
            b_mtd: t.bob_mtd[i] as u8,
            theta: t.angle[i],
            theta_hat: t.theta_hat[i],
            uninformative_flag: t.uninformative[i] as u8,
        })?;
    }
    w.flush()?;
    Ok(())
}
