//! Simulation and cryptanalysis of keyed polarization-basis encryption with
//! coherent light pulses.
//!
//! Alice expands a short LFSR seed into a running key, uses it to pick one of
//! `M/2` linear-polarization bases per data bit and sends a coherent pulse at
//! the resulting angle. Receivers are modeled with Poisson photon counting
//! behind polarizing analyzers. The crate provides the legitimate decoders,
//! the unkeyed threshold eavesdropper, a known-plaintext GF(2) seed recovery
//! attack and plug-in mutual information estimates.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod channel;
pub mod cryptanalysis;
pub mod encoding;
mod error;
pub mod gf2;
pub mod keystream;
pub mod receivers;

pub use error::{Error, Result};
