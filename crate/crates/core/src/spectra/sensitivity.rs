use serde::Serialize;

use super::{keys, measure_snr_with, SnrOptions, Spectrum};
use crate::constants::ELEMENTARY_CHARGE;
use crate::error::{Error, Result};

/// Floor-estimation uncertainty on every SNR.
pub const SNR_UNCERTAINTY_DB: f64 = 0.5;
/// Reference point of the drive-power to device-voltage map.
pub const V0_REF_P1_DBM: f64 = -29.0;
pub const V0_REF_VRMS: f64 = 192e-6;

/// `S_C = δC/√(2Δf)·10^(−SNR/20)`, F/√Hz.
pub fn capacitance_sensitivity(snr_db: f64, delta_f: f64, delta_c: f64) -> Result<f64> {
    check_positive(delta_f, "bandwidth")?;
    check_positive(delta_c, "capacitance modulation")?;
    Ok(delta_c / (2.0 * delta_f).sqrt() * 10f64.powf(-snr_db / 20.0))
}

/// `S_Q = (δQ/e)/√(2Δf)·10^(−SNR/20)`, e/√Hz. `delta_q` is in coulombs.
pub fn charge_sensitivity(snr_db: f64, delta_f: f64, delta_q: f64) -> Result<f64> {
    check_positive(delta_f, "bandwidth")?;
    check_positive(delta_q, "charge modulation")?;
    Ok(delta_q / ELEMENTARY_CHARGE / (2.0 * delta_f).sqrt() * 10f64.powf(-snr_db / 20.0))
}

/// `S_S = √2·V0·S_C`, C/√Hz.
pub fn oscillating_charge_sensitivity(s_c: f64, v0: f64) -> Result<f64> {
    check_positive(v0, "device voltage")?;
    Ok(std::f64::consts::SQRT_2 * v0 * s_c)
}

/// Low-pass output of a homodyne mixer.
pub fn demodulate(amplitude: f64, phase: f64, lo_phase: f64) -> f64 {
    amplitude * (phase - lo_phase).cos()
}

/// Rms device voltage, scaling linearly in amplitude from a reference.
pub fn v0_from_power(p1_dbm: f64, ref_p1_dbm: f64, ref_v0: f64) -> f64 {
    ref_v0 * 10f64.powf((p1_dbm - ref_p1_dbm) / 20.0)
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} must be > 0, got {x}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensitivityResult {
    #[serde(rename = "snr_dB")]
    pub snr_db: f64,
    #[serde(rename = "delta_f_Hz")]
    pub delta_f: f64,
    /// F/√Hz
    #[serde(rename = "S_C_F_per_rtHz")]
    pub s_c: Option<f64>,
    /// e/√Hz
    #[serde(rename = "S_Q_e_per_rtHz")]
    pub s_q: Option<f64>,
    /// C/√Hz
    #[serde(rename = "S_S_C_per_rtHz")]
    pub s_s: Option<f64>,
    /// Relative uncertainty of each sensitivity.
    pub uncertainty: f64,
    pub flagged: bool,
}

impl SensitivityResult {
    /// Builds the result from an SNR and whichever modulation depths are
    /// known. `delta_q` is in coulombs; `v0` enables `S_S`.
    pub fn from_snr(
        snr_db: f64,
        delta_f: f64,
        delta_c: Option<f64>,
        delta_q: Option<f64>,
        v0: Option<f64>,
    ) -> Result<Self> {
        let s_c = delta_c
            .map(|dc| capacitance_sensitivity(snr_db, delta_f, dc))
            .transpose()?;
        let s_q = delta_q
            .map(|dq| charge_sensitivity(snr_db, delta_f, dq))
            .transpose()?;
        let s_s = match (s_c, v0) {
            (Some(s), Some(v)) => Some(oscillating_charge_sensitivity(s, v)?),
            _ => None,
        };
        Ok(Self {
            snr_db,
            delta_f,
            s_c,
            s_q,
            s_s,
            uncertainty: 10f64.powf(SNR_UNCERTAINTY_DB / 20.0) - 1.0,
            flagged: !(snr_db > 0.0),
        })
    }

    /// Sensitivity used as an optimisation objective; flagged results count
    /// as infinitely bad.
    pub fn objective(&self, charge: bool) -> f64 {
        let v = if charge { self.s_q } else { self.s_c };
        match v {
            Some(x) if !self.flagged => x,
            _ => f64::INFINITY,
        }
    }
}

/// Sensitivities from a spectrum carrying `f_c_hz` and `f_m_hz` metadata.
/// The SNR is the mean of the two sidebands in dB. `delta_c_f` enables
/// `S_C`, `delta_q_e` enables `S_Q`, and `p1_dBm` with `S_C` enables `S_S`.
pub fn analyze_spectrum(s: &Spectrum, opts: &SnrOptions) -> Result<SensitivityResult> {
    let missing: Vec<String> = [keys::F_C, keys::F_M]
        .iter()
        .filter(|k| !s.metadata.contains_key(**k))
        .map(|k| k.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingMetadata(missing));
    }
    let f_c = s.meta_f64(keys::F_C)?.unwrap();
    let f_m = s.meta_f64(keys::F_M)?.unwrap();
    let lower = measure_snr_with(s, f_c - f_m, opts)?;
    let upper = measure_snr_with(s, f_c + f_m, opts)?;
    let snr_db = 0.5 * (lower.snr_db + upper.snr_db);

    let delta_q = s.meta_f64(keys::DELTA_Q)?.map(|q| q * ELEMENTARY_CHARGE);
    let v0 = s
        .meta_f64(keys::P1)?
        .map(|p1| v0_from_power(p1, V0_REF_P1_DBM, V0_REF_VRMS));
    SensitivityResult::from_snr(snr_db, s.rbw, s.meta_f64(keys::DELTA_C)?, delta_q, v0)
}
