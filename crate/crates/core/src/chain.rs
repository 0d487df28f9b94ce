//! The full measurement chain: drive line, tank circuit with dot, SQUID and
//! postamplifiers, plus the operating point it is driven at.

use num_complex::Complex64;

use crate::circuit::{ModulationSpec, ModulationTarget, TankCircuit};
use crate::constants::{db_to_power_ratio, dbm_to_watts, BOLTZMANN};
use crate::dot::{DotModel, DoubleDotModel};
use crate::error::{Error, Result};
use crate::spectra::demodulate;
use crate::squid::{Regime, SquidModel, PORT1_TO_SQUID_DB};

/// Gains and losses along the RF path, all in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalPath {
    /// Port 1 to the tank circuit.
    pub input_attenuation_db: f64,
    /// Port 1 to the SQUID input, used to place the drive on the amplifier's
    /// regime map.
    pub port1_to_squid_db: f64,
    /// Tank circuit to the SQUID input.
    pub output_loss_db: f64,
    /// Everything after the SQUID up to the analyzer.
    pub post_gain_db: f64,
}

impl Default for SignalPath {
    fn default() -> Self {
        Self {
            input_attenuation_db: -51.0,
            port1_to_squid_db: PORT1_TO_SQUID_DB,
            output_loss_db: 0.0,
            post_gain_db: 60.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub p1_dbm: f64,
    pub v_s: f64,
    /// Carrier frequency; `None` tracks the best match at `v_s`.
    pub f_c: Option<f64>,
    pub v_l: f64,
    pub v_b: f64,
    pub modulation: ModulationSpec,
}

impl Default for OperatingPoint {
    fn default() -> Self {
        Self {
            p1_dbm: -31.0,
            v_s: 6.8,
            f_c: None,
            v_l: -0.3156,
            v_b: 0.0,
            modulation: ModulationSpec::varactor(3e3, 99e-6),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Chain {
    pub circuit: TankCircuit,
    pub squid: SquidModel,
    pub dot: DotModel,
    pub double_dot: DoubleDotModel,
    pub path: SignalPath,
}

/// Powers referred to the SQUID input, before amplification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineBudget {
    pub f_c: f64,
    pub gamma: Complex64,
    /// `|∂Γ/∂x|` for the modulated quantity `x` (capacitance or conductance).
    pub gamma_slope: f64,
    /// Rms modulation of `x`.
    pub delta_x: f64,
    pub carrier_w: f64,
    /// Power in each sideband.
    pub sideband_w: f64,
    /// `k_B·T_N`, W/Hz.
    pub noise_density: f64,
    pub t_n: f64,
    pub p_in_w: f64,
    pub regime: Regime,
    /// Amplitude compression applied to carrier and sidebands.
    pub compression: f64,
    /// Total power gain from the SQUID input to the analyzer.
    pub gain: f64,
}

impl LineBudget {
    /// Sideband-to-mean-noise ratio in a bin of width `rbw`.
    pub fn snr_db(&self, rbw: f64) -> f64 {
        10.0 * (self.sideband_w * self.compression.powi(2) / (self.noise_density * rbw)).log10()
    }
}

impl Chain {
    pub fn validate(&self) -> Result<()> {
        self.circuit.validate()?;
        self.squid.validate()?;
        let p = &self.path;
        for (v, name) in [
            (p.input_attenuation_db, "input attenuation"),
            (p.port1_to_squid_db, "port-1 to SQUID offset"),
            (p.output_loss_db, "output loss"),
            (p.post_gain_db, "post gain"),
        ] {
            if !v.is_finite() {
                return Err(Error::domain(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    /// Best-match frequency at `v_s`, searched within ±10 % of the bare
    /// LC resonance.
    pub fn matched_frequency(&self, v_s: f64, extra_conductance: f64) -> Result<f64> {
        let f0 = self.circuit.resonant_frequency(v_s)?;
        let m = self
            .circuit
            .find_best_match_loaded(v_s, 0.9 * f0, 1.1 * f0, extra_conductance)?;
        Ok(m.frequency)
    }

    pub fn carrier_frequency(&self, op: &OperatingPoint) -> Result<f64> {
        match op.f_c {
            Some(f) => Ok(f),
            None => self.matched_frequency(op.v_s, self.dot.conductance(op.v_l, op.v_b)),
        }
    }

    /// Incident power on the tank circuit.
    pub fn tank_power(&self, p1_dbm: f64) -> f64 {
        dbm_to_watts(p1_dbm + self.path.input_attenuation_db)
    }

    /// Drive level seen by the SQUID.
    pub fn squid_input_power(&self, p1_dbm: f64) -> f64 {
        dbm_to_watts(p1_dbm + self.path.port1_to_squid_db)
    }

    pub fn total_gain(&self) -> f64 {
        db_to_power_ratio(self.squid.power_gain_db + self.path.post_gain_db)
    }

    /// Rms modulation of the tank parameter for the operating point's
    /// modulation: `δC` for the varactor, `δG` for the gate.
    pub fn modulation_depth(&self, op: &OperatingPoint) -> Result<f64> {
        op.modulation.validate()?;
        match op.modulation.target {
            ModulationTarget::Varactor => self
                .circuit
                .capacitance_modulation(op.v_s, op.modulation.amplitude),
            ModulationTarget::Gate => {
                Ok(self
                    .dot
                    .conductance_modulation(op.v_l, op.v_b, op.modulation.amplitude))
            }
        }
    }

    pub fn budget(&self, op: &OperatingPoint) -> Result<LineBudget> {
        let f_c = self.carrier_frequency(op)?;
        let g_dot = self.dot.conductance(op.v_l, op.v_b);
        let gamma = self.circuit.reflection_loaded(op.v_s, f_c, g_dot)?;
        let (d_dc, d_dg) = self.circuit.reflection_sensitivity(op.v_s, f_c, g_dot)?;
        let gamma_slope = match op.modulation.target {
            ModulationTarget::Varactor => d_dc.norm(),
            ModulationTarget::Gate => d_dg.norm(),
        };
        let delta_x = self.modulation_depth(op)?;

        let incident = self.tank_power(op.p1_dbm) * db_to_power_ratio(self.path.output_loss_db);
        let p_in_w = self.squid_input_power(op.p1_dbm);
        let t_n = self.squid.noise_vs_power(p_in_w);
        Ok(LineBudget {
            f_c,
            gamma,
            gamma_slope,
            delta_x,
            carrier_w: incident * gamma.norm_sqr(),
            sideband_w: 0.5 * incident * (gamma_slope * delta_x).powi(2),
            noise_density: BOLTZMANN * t_n,
            t_n,
            p_in_w,
            regime: self.squid.classify_regime(p_in_w),
            compression: self.squid.compression_factor(p_in_w),
            gain: self.total_gain(),
        })
    }

    /// Capacitance sensitivity implied by the line budget, independent of
    /// the analysis bandwidth.
    pub fn expected_capacitance_sensitivity(&self, op: &OperatingPoint) -> Result<f64> {
        let mut varactor = *op;
        varactor.modulation.target = ModulationTarget::Varactor;
        let b = self.budget(&varactor)?;
        let incident = self.tank_power(op.p1_dbm) * db_to_power_ratio(self.path.output_loss_db);
        Ok((b.noise_density / incident).sqrt() / (b.gamma_slope * b.compression))
    }

    /// Phase of the local oscillator that makes the demodulated voltage fall
    /// as the dot conductance rises.
    pub fn default_lo_phase(&self, op: &OperatingPoint, f_c: f64) -> Result<f64> {
        let g_dot = self.dot.conductance(op.v_l, op.v_b);
        let (_, d_dg) = self.circuit.reflection_sensitivity(op.v_s, f_c, g_dot)?;
        Ok(d_dg.arg() + std::f64::consts::PI)
    }

    /// Homodyne output for the reflected carrier with the dot at
    /// `(v_l, v_b)`, the rest of the operating point held fixed.
    pub fn demodulated_voltage(
        &self,
        op: &OperatingPoint,
        f_c: f64,
        v_l: f64,
        v_b: f64,
        lo_phase: f64,
    ) -> Result<f64> {
        let gamma = self
            .circuit
            .reflection_loaded(op.v_s, f_c, self.dot.conductance(v_l, v_b))?;
        let p_in_w = self.squid_input_power(op.p1_dbm);
        let incident = self.tank_power(op.p1_dbm)
            * db_to_power_ratio(self.path.output_loss_db)
            * self.total_gain()
            * self.squid.compression_factor(p_in_w).powi(2);
        let amplitude = gamma.norm() * (incident * self.circuit.z0).sqrt();
        Ok(demodulate(amplitude, gamma.arg(), lo_phase))
    }
}
