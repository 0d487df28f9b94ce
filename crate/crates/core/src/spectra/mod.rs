//! Power spectra: synthesis, ingestion, sideband SNR and sensitivities.

mod io;
mod sensitivity;
mod snr;
mod synth;

use std::collections::BTreeMap;

use crate::constants::dbm_to_watts;
use crate::error::{Error, Result};

pub(crate) use io::format_f64;
pub use io::{read_spectrum, read_spectrum_from, write_spectrum, write_spectrum_to};
pub use sensitivity::{
    analyze_spectrum, capacitance_sensitivity, charge_sensitivity, demodulate,
    oscillating_charge_sensitivity, v0_from_power, SensitivityResult, SNR_UNCERTAINTY_DB,
    V0_REF_P1_DBM, V0_REF_VRMS,
};
pub use snr::{measure_snr, measure_snr_with, SnrOptions, SnrResult};
pub use synth::{synthesize_spectrum, NoiseMode, SpectrumSettings};

/// Metadata keys written by the synthesizer and read by the analyzer.
pub mod keys {
    pub const RBW: &str = "rbw_hz";
    pub const F_START: &str = "f_start_hz";
    pub const F_STEP: &str = "f_step_hz";
    pub const SEED: &str = "seed";
    pub const F_C: &str = "f_c_hz";
    pub const F_M: &str = "f_m_hz";
    pub const P1: &str = "p1_dBm";
    pub const NOISE_STATS: &str = "noise_stats";
    pub const TARGET: &str = "target";
    pub const DELTA_C: &str = "delta_c_f";
    pub const DELTA_Q: &str = "delta_q_e";
}

/// A frequency-binned power trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub f_start: f64,
    pub f_step: f64,
    pub rbw: f64,
    /// Bin powers in dBm.
    pub powers: Vec<f64>,
    pub metadata: BTreeMap<String, String>,
}

impl Spectrum {
    pub fn new(f_start: f64, f_step: f64, rbw: f64, powers: Vec<f64>) -> Result<Self> {
        let s = Self {
            f_start,
            f_step,
            rbw,
            powers,
            metadata: BTreeMap::new(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_step > 0.0) {
            return Err(Error::domain("frequency step must be > 0"));
        }
        if !(self.rbw > 0.0) {
            return Err(Error::domain("resolution bandwidth must be > 0"));
        }
        if !self.f_start.is_finite() {
            return Err(Error::domain("start frequency must be finite"));
        }
        if self.powers.is_empty() {
            return Err(Error::domain("spectrum has no bins"));
        }
        if self
            .powers
            .iter()
            .any(|p| p.is_nan() || *p == f64::INFINITY)
        {
            return Err(Error::domain("bin powers must be finite or -inf"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn frequency(&self, bin: usize) -> f64 {
        self.f_start + self.f_step * bin as f64
    }

    pub fn f_stop(&self) -> f64 {
        self.frequency(self.powers.len() - 1)
    }

    /// Nearest bin to `f`, or `None` outside the span.
    pub fn bin_of(&self, f: f64) -> Option<usize> {
        let x = ((f - self.f_start) / self.f_step).round();
        (x >= 0.0 && x < self.powers.len() as f64).then_some(x as usize)
    }

    pub fn powers_watts(&self) -> impl Iterator<Item = f64> + '_ {
        self.powers.iter().map(|&p| dbm_to_watts(p))
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    /// Numeric metadata value, if present.
    pub fn meta_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.metadata.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::domain(format!("metadata `{key}` is not a number: {v:?}"))),
        }
    }

    /// Adds `offset_db` to every bin.
    pub fn offset(&self, offset_db: f64) -> Self {
        let mut s = self.clone();
        s.powers.iter_mut().for_each(|p| *p += offset_db);
        s
    }
}
