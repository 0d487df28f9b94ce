//! Simulation and analysis of radio-frequency reflectometry readout of
//! quantum-dot devices through a SQUID amplifier chain.
//!
//! The crate is organised around the physical signal path:
//!
//! - [`circuit`]: LC tank with varactor tuning, reflection and matching.
//! - [`dot`]: Coulomb-blockade conductance and double-dot quantum capacitance.
//! - [`squid`]: flux-periodic amplifier with gain, noise and regime map.
//! - [`chain`]: the assembled measurement chain and its operating point.
//! - [`spectra`]: synthetic and measured spectra, sideband SNR, sensitivities.
//! - [`readout`]: singlet-triplet readout-time estimates.
//! - [`optimize`]: coordinate-descent sweeps over the operating point.
//! - [`config`] and [`cli`]: JSON configuration and the `rfsense` tool.

// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod circuit;
pub mod cli;
pub mod config;
pub mod constants;
pub mod dot;
pub mod error;
pub mod optimize;
pub mod quad;
pub mod readout;
pub mod seed;
pub mod special;
pub mod spectra;
pub mod squid;

pub use chain::{Chain, OperatingPoint, SignalPath};
pub use circuit::{ModulationSpec, ModulationTarget, TankCircuit, VaractorCurve};
pub use dot::{DotModel, DoubleDotModel};
pub use error::{Error, Result};
pub use spectra::{SensitivityResult, Spectrum};
pub use squid::{Regime, SquidModel};
