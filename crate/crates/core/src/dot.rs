//! Parametric quantum-dot models.
//!
//! [`DotModel`] is a single dot in Coulomb blockade: a comb of thermally
//! broadened conductance peaks whose width opens linearly with bias,
//! tracing Coulomb diamonds in the `(V_L, V_B)` plane. [`DoubleDotModel`]
//! gives the quantum capacitance of a tunnel-coupled double dot.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use crate::constants::{BOLTZMANN, ELEMENTARY_CHARGE, PLANCK};
use crate::error::{Error, Result};

/// Thermal broadening of a peak, in units of `k_B·T_e`.
const THERMAL_WIDTH: f64 = 2.5;

#[derive(Debug, Clone, PartialEq)]
pub struct DotModel {
    peak_positions: Vec<f64>,
    g_max: f64,
    lever_arm: f64,
    /// eV
    charging_energy: f64,
    electron_temperature: f64,
    peak_spacing: f64,
}

impl Default for DotModel {
    fn default() -> Self {
        Self::new(
            vec![-0.3759, -0.3559, -0.3359, -0.3159, -0.2959],
            1.0 / 6.7e6,
            0.05,
            1e-3,
            0.1,
            None,
        )
        .expect("default dot model is valid")
    }
}

impl DotModel {
    /// `charging_energy` is in eV. When `peak_spacing` is `None` it is taken
    /// from the peak positions, or from `E_C/α` for a single peak.
    pub fn new(
        peak_positions: Vec<f64>,
        g_max: f64,
        lever_arm: f64,
        charging_energy: f64,
        electron_temperature: f64,
        peak_spacing: Option<f64>,
    ) -> Result<Self> {
        if peak_positions.is_empty() {
            return Err(Error::domain(
                "at least one Coulomb peak position is required",
            ));
        }
        if peak_positions.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("peak positions must be finite"));
        }
        if peak_positions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("peak positions must be strictly increasing"));
        }
        if !(g_max > 0.0) {
            return Err(Error::domain("G_max must be > 0"));
        }
        if !(lever_arm > 0.0 && lever_arm <= 1.0) {
            return Err(Error::domain("gate lever arm must lie in (0, 1]"));
        }
        if !(charging_energy > 0.0) {
            return Err(Error::domain("charging energy must be > 0"));
        }
        if !(electron_temperature > 0.0) {
            return Err(Error::domain("electron temperature must be > 0"));
        }

        let spacing = match peak_spacing {
            Some(s) if !(s > 0.0) => {
                return Err(Error::domain(format!("peak spacing must be > 0, got {s}")))
            }
            Some(s) => s,
            None if peak_positions.len() > 1 => {
                let n = peak_positions.len();
                (peak_positions[n - 1] - peak_positions[0]) / (n - 1) as f64
            }
            None => charging_energy / lever_arm,
        };
        for w in peak_positions.windows(2) {
            let gap = w[1] - w[0];
            if ((gap - spacing) / spacing).abs() > 1e-9 {
                return Err(Error::domain(format!(
                    "peak spacing {spacing} V disagrees with consecutive peaks {} and {}",
                    w[0], w[1]
                )));
            }
        }
        let implied = lever_arm * spacing;
        if ((implied - charging_energy) / charging_energy).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "charging energy {charging_energy} eV disagrees with lever arm x peak spacing = {implied} eV"
            )));
        }

        Ok(Self {
            peak_positions,
            g_max,
            lever_arm,
            charging_energy,
            electron_temperature,
            peak_spacing: spacing,
        })
    }

    pub fn peak_positions(&self) -> &[f64] {
        &self.peak_positions
    }

    pub fn g_max(&self) -> f64 {
        self.g_max
    }

    pub fn lever_arm(&self) -> f64 {
        self.lever_arm
    }

    pub fn charging_energy(&self) -> f64 {
        self.charging_energy
    }

    pub fn electron_temperature(&self) -> f64 {
        self.electron_temperature
    }

    /// `ΔV_CB`.
    pub fn peak_spacing(&self) -> f64 {
        self.peak_spacing
    }

    /// Thermal peak width expressed as a gate voltage.
    pub fn peak_width(&self) -> f64 {
        THERMAL_WIDTH * BOLTZMANN * self.electron_temperature / (self.lever_arm * ELEMENTARY_CHARGE)
    }

    pub fn conductance(&self, v_l: f64, v_b: f64) -> f64 {
        let width = THERMAL_WIDTH * BOLTZMANN * self.electron_temperature;
        // Bias window half-width, split evenly between source and drain.
        let half_window = 0.5 * ELEMENTARY_CHARGE * v_b / width;
        self.peak_positions
            .iter()
            .map(|&vp| {
                let x = self.lever_arm * ELEMENTARY_CHARGE * (v_l - vp) / width;
                self.g_max * window_shape(x, half_window)
            })
            .sum()
    }

    pub fn dc_current(&self, v_l: f64, v_b: f64) -> f64 {
        self.conductance(v_l, v_b) * v_b
    }

    /// `dG/dV_L` by central difference.
    pub fn conductance_slope(&self, v_l: f64, v_b: f64) -> f64 {
        let h = 1e-3 * self.peak_width();
        (self.conductance(v_l + h, v_b) - self.conductance(v_l - h, v_b)) / (2.0 * h)
    }

    /// `δQ = e·δV_L/ΔV_CB`.
    pub fn gate_charge_modulation(&self, dv_l: f64) -> Result<f64> {
        gate_charge_modulation(dv_l, self.peak_spacing)
    }

    /// Rms conductance swing at the modulation frequency when `V_L` carries
    /// a sinusoidal modulation of rms amplitude `dv_l`: the fundamental
    /// Fourier component of `G(V_L + √2·dV_L·sin θ)`.
    pub fn conductance_modulation(&self, v_l: f64, v_b: f64, dv_l: f64) -> f64 {
        const NODES: usize = 256;
        let amplitude = SQRT_2 * dv_l;
        let b1: f64 = (0..NODES)
            .map(|k| {
                let theta = 2.0 * PI * k as f64 / NODES as f64;
                self.conductance(v_l + amplitude * theta.sin(), v_b) * theta.sin()
            })
            .sum::<f64>()
            * 2.0
            / NODES as f64;
        b1.abs() / SQRT_2
    }
}

/// Normalised peak shape for a bias window of half-width `a` (in units of
/// the thermal width). Equals 1 at the centre and reduces to `sech²x` at
/// zero bias.
fn window_shape(x: f64, a: f64) -> f64 {
    if a.abs() < 1e-6 {
        let s = 1.0 / x.cosh();
        return s * s;
    }
    ((x + a).tanh() - (x - a).tanh()) / (2.0 * a.tanh())
}

/// `δQ = e·δV_L/ΔV_CB`.
pub fn gate_charge_modulation(dv_l: f64, peak_spacing: f64) -> Result<f64> {
    if !(peak_spacing > 0.0) {
        return Err(Error::domain(format!(
            "Coulomb peak spacing must be > 0, got {peak_spacing}"
        )));
    }
    Ok(ELEMENTARY_CHARGE * dv_l / peak_spacing)
}

/// One point of a stability diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityPoint {
    pub v_l: f64,
    pub v_b: f64,
    pub g: f64,
    pub i: f64,
}

/// Evaluates the model on the outer product of the two grids, `V_B` outer.
pub fn stability_grid(dot: &DotModel, v_l: &[f64], v_b: &[f64]) -> Vec<StabilityPoint> {
    v_b.iter()
        .flat_map(|&b| {
            v_l.iter().map(move |&l| StabilityPoint {
                v_l: l,
                v_b: b,
                g: dot.conductance(l, b),
                i: dot.dc_current(l, b),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleDotModel {
    /// Interdot tunnel coupling `t`, joules.
    pub tunnel_coupling: f64,
    pub lever_arm: f64,
}

impl Default for DoubleDotModel {
    fn default() -> Self {
        Self {
            tunnel_coupling: PLANCK * 500e6,
            lever_arm: 0.3,
        }
    }
}

impl DoubleDotModel {
    pub fn new(tunnel_coupling: f64, lever_arm: f64) -> Result<Self> {
        if !(tunnel_coupling > 0.0) {
            return Err(Error::domain("tunnel coupling must be > 0"));
        }
        if !(lever_arm > 0.0 && lever_arm <= 1.0) {
            return Err(Error::domain("double-dot lever arm must lie in (0, 1]"));
        }
        Ok(Self {
            tunnel_coupling,
            lever_arm,
        })
    }

    /// Width of the capacitance peak in electrode voltage, `2t/(λe)`.
    pub fn peak_width(&self) -> f64 {
        2.0 * self.tunnel_coupling / (self.lever_arm * ELEMENTARY_CHARGE)
    }

    /// Charge transferred across the full anticrossing, `λe`.
    pub fn total_charge(&self) -> f64 {
        self.lever_arm * ELEMENTARY_CHARGE
    }

    pub fn peak_capacitance(&self) -> f64 {
        let le = self.lever_arm * ELEMENTARY_CHARGE;
        le * le / (4.0 * self.tunnel_coupling)
    }

    pub fn quantum_capacitance(&self, v: f64) -> f64 {
        let u = v / self.peak_width();
        self.peak_capacitance() * (1.0 + u * u).powf(-1.5)
    }

    pub fn stored_charge(&self, v: f64) -> f64 {
        let u = v / self.peak_width();
        0.5 * self.total_charge() * u / (u * u + 1.0).sqrt()
    }
}
