//! Phenomenological SQUID amplifier.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{dbm_to_watts, BOLTZMANN, FLUX_QUANTUM, PLANCK};
use crate::error::{Error, Result};
use crate::special::describing_gain;

/// Port-1 drive at which the flux swing reaches a quarter period.
pub const SATURATION_P1_DBM: f64 = -21.0;
/// Attenuation from port 1 to the SQUID input.
pub const PORT1_TO_SQUID_DB: f64 = -101.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Linear,
    Compression,
    Saturation,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Linear => "linear",
            Self::Compression => "compression",
            Self::Saturation => "saturation",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SquidModel {
    /// Peak-to-peak swing of `V_OUT(Φ)`.
    pub v_pp: f64,
    pub flux_offset: f64,
    pub power_gain_db: f64,
    /// Postamplifier noise temperature.
    pub t_p: f64,
    /// Flux amplitude per √W of input power.
    pub kappa: f64,
    /// Edge of the linear range as a fraction of `Φ0`.
    pub linear_fraction: f64,
    /// System noise temperature at vanishing input power.
    pub t_n0: f64,
    pub noise_exponent: f64,
    /// Amplitudes of harmonics 2, 3, ... relative to the fundamental.
    pub harmonics: Vec<f64>,
    /// Bias currents of the operating point; carried as labels only.
    pub i_sq: f64,
    pub i_fl: f64,
}

impl Default for SquidModel {
    fn default() -> Self {
        Self {
            v_pp: 20e-6,
            flux_offset: 0.0,
            power_gain_db: 11.7,
            t_p: 3.7,
            kappa: calibrated_kappa(SATURATION_P1_DBM, PORT1_TO_SQUID_DB),
            linear_fraction: 0.25 * 10f64.powf(-0.5),
            t_n0: 0.49,
            noise_exponent: 2.0,
            harmonics: Vec::new(),
            i_sq: 13.1e-6,
            i_fl: -5.6e-6,
        }
    }
}

/// `κ` such that a port-1 drive of `p1_saturation_dbm`, attenuated by
/// `port1_offset_db`, produces a flux swing of `Φ0/4`.
pub fn calibrated_kappa(p1_saturation_dbm: f64, port1_offset_db: f64) -> f64 {
    let p_in = dbm_to_watts(p1_saturation_dbm + port1_offset_db);
    0.25 * FLUX_QUANTUM / p_in.sqrt()
}

/// Gain in dB from the transmissions measured with and without the amplifier.
pub fn gain_from_transmission(s32_present_db: f64, s32_absent_db: f64) -> f64 {
    s32_present_db - s32_absent_db
}

/// Input-referred noise power `P_N = P_IN·P2_noise/P2_signal`.
pub fn noise_power_referred(p_in: f64, p2_signal: f64, p2_noise: f64) -> Result<f64> {
    if !(p_in > 0.0 && p2_signal > 0.0 && p2_noise > 0.0) {
        return Err(Error::domain(format!(
            "noise referral needs positive powers, got P_IN={p_in}, signal={p2_signal}, noise={p2_noise}"
        )));
    }
    Ok(p_in * p2_noise / p2_signal)
}

pub fn noise_temperature(p_n: f64, delta_f: f64) -> Result<f64> {
    if !(delta_f > 0.0) {
        return Err(Error::domain(format!(
            "bandwidth must be > 0, got {delta_f}"
        )));
    }
    Ok(p_n / (BOLTZMANN * delta_f))
}

/// `h·f/(2k_B)`.
pub fn quantum_limit(f_c: f64) -> Result<f64> {
    if !(f_c > 0.0) {
        return Err(Error::domain(format!("frequency must be > 0, got {f_c}")));
    }
    Ok(PLANCK * f_c / (2.0 * BOLTZMANN))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseReport {
    pub t_n: f64,
    pub t_n2: f64,
    pub p_n: f64,
    pub quantum_limit: f64,
    pub ratio_to_ql: f64,
}

impl SquidModel {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.v_pp > 0.0, "V_pp must be > 0"),
            (
                self.linear_fraction > 0.0 && self.linear_fraction < 0.25,
                "linear_fraction must lie in (0, 0.25)",
            ),
            (self.kappa > 0.0, "kappa must be > 0"),
            (self.t_p > 0.0, "T_P must be > 0"),
            (self.t_n0 > 0.0, "T_N0 must be > 0"),
            (self.noise_exponent > 0.0, "noise exponent must be > 0"),
            (self.power_gain_db.is_finite(), "power gain must be finite"),
            (self.flux_offset.is_finite(), "flux offset must be finite"),
            (
                self.harmonics.iter().all(|h| h.is_finite()),
                "harmonic amplitudes must be finite",
            ),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::domain(*msg)),
            None => Ok(()),
        }
    }

    pub fn flux_quantum(&self) -> f64 {
        FLUX_QUANTUM
    }

    /// `V_OUT(Φ)`, where `flux` is measured from the flux bias point.
    pub fn transfer_voltage(&self, flux: f64) -> f64 {
        let phase = 2.0 * PI * (flux + self.flux_offset) / FLUX_QUANTUM;
        let harmonics: f64 = self
            .harmonics
            .iter()
            .enumerate()
            .map(|(k, a)| a * ((k + 2) as f64 * phase).sin())
            .sum();
        0.5 * self.v_pp * (phase.sin() + harmonics)
    }

    pub fn postamp_contribution(&self) -> f64 {
        self.t_p / 10f64.powf(self.power_gain_db / 10.0)
    }

    pub fn flux_amplitude(&self, p_in: f64) -> f64 {
        self.kappa * p_in.max(0.0).sqrt()
    }

    /// Input powers at the linear→compression and compression→saturation
    /// boundaries.
    pub fn regime_thresholds(&self) -> (f64, f64) {
        let power = |flux: f64| (flux / self.kappa).powi(2);
        (
            power(self.linear_fraction * FLUX_QUANTUM),
            power(0.25 * FLUX_QUANTUM),
        )
    }

    pub fn classify_regime(&self, p_in: f64) -> Regime {
        let flux = self.flux_amplitude(p_in);
        if flux < self.linear_fraction * FLUX_QUANTUM {
            Regime::Linear
        } else if flux < 0.25 * FLUX_QUANTUM {
            Regime::Compression
        } else {
            Regime::Saturation
        }
    }

    pub fn noise_vs_power(&self, p_in: f64) -> f64 {
        let x = self.flux_amplitude(p_in) / (0.25 * FLUX_QUANTUM);
        self.t_n0 * (1.0 + x.powf(self.noise_exponent))
    }

    /// Amplitude gain relative to small-signal operation. Unity in the
    /// linear regime; beyond it, the describing function of the sinusoidal
    /// transfer curve at the flux swing.
    pub fn compression_factor(&self, p_in: f64) -> f64 {
        match self.classify_regime(p_in) {
            Regime::Linear => 1.0,
            _ => describing_gain(2.0 * PI * self.flux_amplitude(p_in) / FLUX_QUANTUM),
        }
    }

    /// Noise budget from a measured input-referred noise power.
    pub fn noise_report(&self, p_n: f64, delta_f: f64, f_c: f64) -> Result<NoiseReport> {
        let t_n = noise_temperature(p_n, delta_f)?;
        let t_n2 = self.postamp_contribution();
        if t_n < t_n2 {
            return Err(Error::domain(format!(
                "system noise temperature {t_n} K is below the postamplifier contribution {t_n2} K"
            )));
        }
        let ql = quantum_limit(f_c)?;
        Ok(NoiseReport {
            t_n,
            t_n2,
            p_n,
            quantum_limit: ql,
            ratio_to_ql: t_n / ql,
        })
    }
}
