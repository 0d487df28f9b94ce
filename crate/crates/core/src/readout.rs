//! Dispersive singlet-triplet readout-time estimates.
//!
//! The quantum capacitance is averaged over one RF cycle of rms amplitude
//! `V0`, compared with the capacitance sensitivity of the chain to give the
//! bandwidth at unit SNR, and converted to a readout time `τ = 0.5/Δf`.

use std::f64::consts::SQRT_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::dot::DoubleDotModel;
use crate::error::{Error, Result};
use crate::quad::{integrate_even, Tolerance};
use crate::spectra::{v0_from_power, V0_REF_P1_DBM, V0_REF_VRMS};

/// Cycle-averaged quantum capacitance,
/// `C̄ = (1/(2√2·V0))·∫ C_Q(V) dV` over `|V| ≤ √2·V0`.
pub fn average_capacitance(dd: &DoubleDotModel, v0: f64) -> Result<f64> {
    average_capacitance_with(dd, v0, Tolerance::default())
}

pub fn average_capacitance_with(dd: &DoubleDotModel, v0: f64, tol: Tolerance) -> Result<f64> {
    if !(v0 > 0.0 && v0.is_finite()) {
        return Err(Error::domain(format!("V0 must be > 0, got {v0}")));
    }
    let a = SQRT_2 * v0;
    let integral = integrate_even(|v| dd.quantum_capacitance(v), a, tol)?;
    // never above the peak, even at the last ulp
    Ok((integral.value / (2.0 * a)).min(dd.peak_capacitance()))
}

/// Large-amplitude limit `λe/(2√2·V0)`, valid once `√2·V0` is well beyond
/// the peak width.
pub fn average_capacitance_closed_form(dd: &DoubleDotModel, v0: f64) -> Result<f64> {
    if !(v0 > 0.0) {
        return Err(Error::domain(format!("V0 must be > 0, got {v0}")));
    }
    Ok(dd.total_charge() / (2.0 * SQRT_2 * v0))
}

/// Bandwidth at which `c_bar` is detected with unit SNR, `(C̄/S_C)²`.
pub fn readout_bandwidth(c_bar: f64, s_c: f64) -> Result<f64> {
    if !(s_c > 0.0) {
        return Err(Error::domain(format!("S_C must be > 0, got {s_c}")));
    }
    Ok((c_bar / s_c).powi(2))
}

pub fn readout_time(delta_f: f64) -> f64 {
    0.5 / delta_f
}

/// Capacitance sensitivity as a function of port-1 drive, interpolated
/// linearly in `(P1 [dBm], log S_C)` between anchors.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityCurve {
    anchors: Vec<(f64, f64)>,
}

impl SensitivityCurve {
    pub fn new(anchors: Vec<(f64, f64)>) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::domain("sensitivity curve needs at least one anchor"));
        }
        if anchors
            .iter()
            .any(|&(p, s)| !p.is_finite() || !(s > 0.0 && s.is_finite()))
        {
            return Err(Error::domain(
                "sensitivity anchors must be finite with S_C > 0",
            ));
        }
        if anchors.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::domain("sensitivity anchors must have increasing P1"));
        }
        Ok(Self { anchors })
    }

    /// Improves from 0.9 aF/√Hz at −60 dBm to 0.07 aF/√Hz at −31 dBm,
    /// stays flat to −21 dBm, then degrades by 2 dB per dB up to −10 dBm.
    pub fn reference() -> Self {
        let best = 0.07e-18;
        Self::new(vec![
            (-60.0, 0.9e-18),
            (-31.0, best),
            (-21.0, best),
            (-10.0, best * 10f64.powf(2.0 * 11.0 / 20.0)),
        ])
        .expect("reference curve is valid")
    }

    pub fn anchors(&self) -> &[(f64, f64)] {
        &self.anchors
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.anchors[0].0, self.anchors.last().unwrap().0)
    }

    /// `None` outside the anchor range.
    pub fn at(&self, p1_dbm: f64) -> Option<f64> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&p1_dbm) {
            return None;
        }
        let i = self.anchors.partition_point(|a| a.0 <= p1_dbm);
        if i == self.anchors.len() {
            return Some(self.anchors[i - 1].1);
        }
        let ((p0, s0), (p1, s1)) = (self.anchors[i - 1], self.anchors[i]);
        let t = (p1_dbm - p0) / (p1 - p0);
        Some((s0.ln() + t * (s1.ln() - s0.ln())).exp())
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.anchors.iter().map(|&(p, s)| (p, s * factor)).collect())
    }
}

impl Default for SensitivityCurve {
    fn default() -> Self {
        Self::reference()
    }
}

/// Device voltage as a function of drive power. `electrode_scale` is the
/// fraction of the device voltage that reaches the coupling electrode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct V0Map {
    pub ref_p1_dbm: f64,
    pub ref_v0: f64,
    pub electrode_scale: f64,
}

impl Default for V0Map {
    fn default() -> Self {
        Self {
            ref_p1_dbm: V0_REF_P1_DBM,
            ref_v0: V0_REF_VRMS,
            electrode_scale: 1.0,
        }
    }
}

impl V0Map {
    pub fn v0(&self, p1_dbm: f64) -> f64 {
        self.electrode_scale * v0_from_power(p1_dbm, self.ref_p1_dbm, self.ref_v0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReadoutEstimate {
    pub p1_dbm: f64,
    pub v0: f64,
    pub s_c: f64,
    pub c_bar: f64,
    pub delta_f: f64,
    pub tau: f64,
    pub used_closed_form: bool,
}

impl ReadoutEstimate {
    pub fn new(dd: &DoubleDotModel, p1_dbm: f64, v0: f64, s_c: f64) -> Result<Self> {
        let c_bar = average_capacitance(dd, v0)?;
        let delta_f = readout_bandwidth(c_bar, s_c)?;
        Ok(Self {
            p1_dbm,
            v0,
            s_c,
            c_bar,
            delta_f,
            tau: readout_time(delta_f),
            used_closed_form: false,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReadoutSweep {
    pub estimates: Vec<ReadoutEstimate>,
    /// Grid powers outside the sensitivity curve.
    pub excluded: Vec<f64>,
}

impl ReadoutSweep {
    /// Estimate with the shortest readout time.
    pub fn best(&self) -> Option<&ReadoutEstimate> {
        self.estimates.iter().min_by(|a, b| a.tau.total_cmp(&b.tau))
    }
}

/// −60 to −15 dBm in 0.5 dB steps.
pub fn default_p1_grid() -> Vec<f64> {
    (0..=90).map(|i| -60.0 + 0.5 * i as f64).collect()
}

/// Readout estimate at each grid power, in grid order.
pub fn readout_time_sweep(
    dd: &DoubleDotModel,
    curve: &SensitivityCurve,
    v0_map: &V0Map,
    p1_grid: &[f64],
) -> Result<ReadoutSweep> {
    if p1_grid.is_empty() {
        return Err(Error::Usage(
            "readout sweep needs at least one P1 value".into(),
        ));
    }
    let excluded: Vec<f64> = p1_grid
        .iter()
        .copied()
        .filter(|&p| curve.at(p).is_none())
        .collect();
    let estimates = p1_grid
        .par_iter()
        .filter_map(|&p| curve.at(p).map(|s_c| (p, s_c)))
        .map(|(p, s_c)| ReadoutEstimate::new(dd, p, v0_map.v0(p), s_c))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReadoutSweep {
        estimates,
        excluded,
    })
}
