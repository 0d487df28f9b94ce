//! LC tank circuit: varactor tuning, resonance, reflection and matching.
//!
//! The network is a series inductor feeding a shunt branch made of the
//! varactor (plus stray capacitance) in parallel with the device
//! resistance:
//!
//! ```text
//!  Z0 ──── L ────┬──────┬──── gnd
//!                C(V_S)  R_device
//! ```
//!
//! `Z = jωL + 1/(jωC + 1/R)`, `Γ = (Z − Z0)/(Z + Z0)`.

use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inductor of the reference tank circuit.
pub const DEFAULT_INDUCTANCE: f64 = 223e-9;
/// Varactor voltage at which the reference circuit is best matched.
pub const CALIBRATION_VS: f64 = 6.8;
/// Resonance of the reference circuit at [`CALIBRATION_VS`].
pub const CALIBRATION_F0: f64 = 196e6;
/// Reference varactor modulation and the capacitance modulation it produces.
pub const CALIBRATION_VM: f64 = 99e-6;
pub const CALIBRATION_DELTA_C: f64 = 6.7e-18;
/// Default step for the finite-difference slope `df0/dV_S`.
pub const DEFAULT_VS_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interpolation {
    Linear,
    Cubic,
}

impl Interpolation {
    pub fn from_order(order: u8) -> Result<Self> {
        match order {
            1 => Ok(Self::Linear),
            3 => Ok(Self::Cubic),
            other => Err(Error::domain(format!(
                "interpolation order must be 1 or 3, got {other}"
            ))),
        }
    }

    pub fn order(self) -> u8 {
        match self {
            Self::Linear => 1,
            Self::Cubic => 3,
        }
    }
}

/// Tabulated varactor capacitance `C(V_S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VaractorCurve {
    voltages: Vec<f64>,
    capacitances: Vec<f64>,
    interpolation: Interpolation,
    // Natural-spline second derivatives; empty for linear interpolation.
    moments: Vec<f64>,
}

impl VaractorCurve {
    pub fn new(samples: &[(f64, f64)], interpolation: Interpolation) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::domain("varactor curve needs at least two samples"));
        }
        for (i, &(v, c)) in samples.iter().enumerate() {
            if !v.is_finite() || !c.is_finite() {
                return Err(Error::domain(format!("varactor sample {i} is not finite")));
            }
            if c <= 0.0 {
                return Err(Error::domain(format!(
                    "varactor sample {i}: capacitance must be > 0, got {c}"
                )));
            }
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(Error::domain(format!(
                "varactor voltages must be strictly increasing (sample {})",
                i + 1
            )));
        }
        let voltages: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let capacitances: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let moments = match interpolation {
            Interpolation::Linear => Vec::new(),
            Interpolation::Cubic => natural_spline_moments(&voltages, &capacitances),
        };
        Ok(Self {
            voltages,
            capacitances,
            interpolation,
            moments,
        })
    }

    /// Reference curve: an abrupt-junction law `C_p + C_j/(1 + V/φ)^m`
    /// sampled every 100 mV over 0–15 V and spline-interpolated. `C_j` and
    /// `C_p` are solved so that the tank resonates at 196 MHz at 6.8 V and
    /// a 99 µV_rms modulation there gives 6.7 aF_rms.
    pub fn calibrated() -> Self {
        let model = CalibratedVaractor::solve();
        let samples: Vec<(f64, f64)> = (0..=150)
            .map(|i| {
                let v = i as f64 / 10.0;
                (v, model.capacitance(v))
            })
            .collect();
        Self::new(&samples, Interpolation::Cubic).expect("calibrated curve is valid")
    }

    /// Reads a two-column CSV (`V_S` in volts, `C` in farads) with a header.
    pub fn from_csv_path(path: &Path, interpolation: Interpolation) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file, path, interpolation)
    }

    pub fn from_csv_reader<R: Read>(
        reader: R,
        name: &Path,
        interpolation: Interpolation,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let parse_err = |line: u64, message: String| Error::Parse {
            file: name.to_path_buf(),
            line,
            message,
        };
        let headers = rdr
            .headers()
            .map_err(|e| parse_err(1, e.to_string()))?
            .clone();
        if headers.len() != 2 || headers.iter().any(|h| h.parse::<f64>().is_ok()) {
            return Err(parse_err(
                1,
                "expected a header line with two column names".into(),
            ));
        }
        let mut samples = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse_err(line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != 2 {
                return Err(parse_err(
                    line,
                    format!("expected 2 columns, got {}", record.len()),
                ));
            }
            let field = |i: usize| {
                record[i]
                    .parse::<f64>()
                    .map_err(|e| parse_err(line, format!("column {}: {e}", i + 1)))
            };
            samples.push((field(0)?, field(1)?));
        }
        Self::new(&samples, interpolation).map_err(|e| parse_err(0, e.to_string()))
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.voltages[0], *self.voltages.last().unwrap())
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.voltages
            .iter()
            .copied()
            .zip(self.capacitances.iter().copied())
    }

    pub fn capacitance(&self, v_s: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&v_s) {
            return Err(Error::domain(format!(
                "V_S = {v_s} V outside varactor curve domain [{lo}, {hi}]"
            )));
        }
        // index of the segment [x_i, x_{i+1}] containing v_s
        let i = match self.voltages.partition_point(|&x| x <= v_s) {
            0 => 0,
            n => (n - 1).min(self.voltages.len() - 2),
        };
        let (x0, x1) = (self.voltages[i], self.voltages[i + 1]);
        let (y0, y1) = (self.capacitances[i], self.capacitances[i + 1]);
        let h = x1 - x0;
        let t = (v_s - x0) / h;
        let c = match self.interpolation {
            Interpolation::Linear => y0 + t * (y1 - y0),
            Interpolation::Cubic => {
                let (m0, m1) = (self.moments[i], self.moments[i + 1]);
                let a = 1.0 - t;
                a * y0 + t * y1 + ((a * a * a - a) * m0 + (t * t * t - t) * m1) * h * h / 6.0
            }
        };
        Ok(c)
    }
}

impl Default for VaractorCurve {
    fn default() -> Self {
        Self::calibrated()
    }
}

fn natural_spline_moments(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior equations.
    let mut diag = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let lower = h0 / 6.0;
        diag[i] = (h0 + h1) / 3.0;
        upper[i] = h1 / 6.0;
        rhs[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        if i > 1 {
            let w = lower / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
    }
    for i in (1..n - 1).rev() {
        let next = if i + 1 < n - 1 { m[i + 1] } else { 0.0 };
        m[i] = (rhs[i] - upper[i] * next) / diag[i];
    }
    m
}

/// Closed-form varactor law behind [`VaractorCurve::calibrated`].
#[derive(Debug, Clone, Copy)]
pub struct CalibratedVaractor {
    pub stray: f64,
    pub junction: f64,
    pub built_in: f64,
    pub grading: f64,
}

impl CalibratedVaractor {
    pub const BUILT_IN: f64 = 0.7;
    pub const GRADING: f64 = 0.5;

    pub fn solve() -> Self {
        let (phi, m) = (Self::BUILT_IN, Self::GRADING);
        let c_target = lc_capacitance(DEFAULT_INDUCTANCE, CALIBRATION_F0);
        let slope = CALIBRATION_DELTA_C / CALIBRATION_VM;
        let x = 1.0 + CALIBRATION_VS / phi;
        let junction = slope * phi / (m * x.powf(-m - 1.0));
        let stray = c_target - junction * x.powf(-m);
        Self {
            stray,
            junction,
            built_in: phi,
            grading: m,
        }
    }

    pub fn capacitance(&self, v: f64) -> f64 {
        self.stray + self.junction * (1.0 + v / self.built_in).powf(-self.grading)
    }

    pub fn slope(&self, v: f64) -> f64 {
        -self.junction * self.grading / self.built_in
            * (1.0 + v / self.built_in).powf(-self.grading - 1.0)
    }
}

/// Capacitance resonating with `inductance` at `f0`.
pub fn lc_capacitance(inductance: f64, f0: f64) -> f64 {
    1.0 / ((2.0 * PI * f0).powi(2) * inductance)
}

/// `f0 = 1/(2π√(LC))`.
pub fn lc_resonance(inductance: f64, capacitance: f64) -> f64 {
    1.0 / (2.0 * PI * (inductance * capacitance).sqrt())
}

/// Capacitance modulation from a varactor-voltage modulation, given the
/// resonance and its tuning slope: `δC = V_M/(2π²Lf0³)·|df0/dV_S|`.
pub fn capacitance_modulation_from_slope(inductance: f64, f0: f64, df0_dvs: f64, v_m: f64) -> f64 {
    v_m / (2.0 * PI * PI * inductance * f0.powi(3)) * df0_dvs.abs()
}

/// What the low-frequency modulation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModulationTarget {
    /// Varactor voltage; the amplitude is `V_M`.
    Varactor,
    /// Dot gate voltage; the amplitude is `δV_L`.
    Gate,
}

impl std::fmt::Display for ModulationTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Varactor => "varactor",
            Self::Gate => "gate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationSpec {
    pub f_m: f64,
    /// Rms amplitude in volts.
    pub amplitude: f64,
    pub target: ModulationTarget,
}

impl ModulationSpec {
    pub fn varactor(f_m: f64, v_m: f64) -> Self {
        Self {
            f_m,
            amplitude: v_m,
            target: ModulationTarget::Varactor,
        }
    }

    pub fn gate(f_m: f64, dv_l: f64) -> Self {
        Self {
            f_m,
            amplitude: dv_l,
            target: ModulationTarget::Gate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_m > 0.0 && self.f_m.is_finite()) {
            return Err(Error::domain(format!("f_M must be > 0, got {}", self.f_m)));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::domain(format!(
                "modulation amplitude must be >= 0, got {}",
                self.amplitude
            )));
        }
        Ok(())
    }
}

/// Central (or one-sided at the curve edge) finite-difference slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slope {
    pub value: f64,
    /// Set when the point was too close to the curve boundary for a
    /// central difference.
    pub one_sided: bool,
}

/// Result of a best-match search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchPoint {
    pub v_s: f64,
    pub frequency: f64,
    /// `20·log10|Γ|` at the match frequency.
    pub depth_db: f64,
    pub gamma_mag: f64,
    /// No interior minimum on the searched interval.
    pub at_boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TankCircuit {
    pub inductance: f64,
    pub varactor: VaractorCurve,
    pub parasitic_capacitance: f64,
    pub r_device: f64,
    pub z0: f64,
}

impl Default for TankCircuit {
    /// The reference circuit. `R_device` here is the effective shunt loss of
    /// the board and device, chosen so the perfect-match condition
    /// `R = L/(C·Z0)` holds at `V_S` = 6.8 V.
    fn default() -> Self {
        let z0 = 50.0;
        let c = lc_capacitance(DEFAULT_INDUCTANCE, CALIBRATION_F0);
        Self {
            inductance: DEFAULT_INDUCTANCE,
            varactor: VaractorCurve::calibrated(),
            parasitic_capacitance: 0.0,
            r_device: DEFAULT_INDUCTANCE / (c * z0),
            z0,
        }
    }
}

impl TankCircuit {
    pub fn new(
        inductance: f64,
        varactor: VaractorCurve,
        parasitic_capacitance: f64,
        r_device: f64,
        z0: f64,
    ) -> Result<Self> {
        let circuit = Self {
            inductance,
            varactor,
            parasitic_capacitance,
            r_device,
            z0,
        };
        circuit.validate()?;
        Ok(circuit)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.inductance > 0.0) {
            return Err(Error::domain("inductance must be > 0"));
        }
        if !(self.z0 > 0.0) {
            return Err(Error::domain("line impedance must be > 0"));
        }
        if !(self.r_device > 0.0) {
            return Err(Error::domain("device resistance must be > 0"));
        }
        if !(self.parasitic_capacitance >= 0.0) {
            return Err(Error::domain("parasitic capacitance must be >= 0"));
        }
        Ok(())
    }

    pub fn total_capacitance(&self, v_s: f64) -> Result<f64> {
        Ok(self.varactor.capacitance(v_s)? + self.parasitic_capacitance)
    }

    pub fn resonant_frequency(&self, v_s: f64) -> Result<f64> {
        let c = self.total_capacitance(v_s)?;
        if c <= 0.0 {
            return Err(Error::domain(format!(
                "total capacitance {c} F at V_S = {v_s} V"
            )));
        }
        Ok(lc_resonance(self.inductance, c))
    }

    pub fn df0_dvs(&self, v_s: f64) -> Result<Slope> {
        self.df0_dvs_with_step(v_s, DEFAULT_VS_STEP)
    }

    pub fn df0_dvs_with_step(&self, v_s: f64, step: f64) -> Result<Slope> {
        if !(step > 0.0) {
            return Err(Error::domain("finite-difference step must be > 0"));
        }
        let (lo, hi) = self.varactor.domain();
        if !(lo..=hi).contains(&v_s) {
            return Err(Error::domain(format!(
                "V_S = {v_s} V outside varactor curve domain [{lo}, {hi}]"
            )));
        }
        let f = |v| self.resonant_frequency(v);
        if v_s - step >= lo && v_s + step <= hi {
            Ok(Slope {
                value: (f(v_s + step)? - f(v_s - step)?) / (2.0 * step),
                one_sided: false,
            })
        } else if v_s + step <= hi {
            Ok(Slope {
                value: (f(v_s + step)? - f(v_s)?) / step,
                one_sided: true,
            })
        } else if v_s - step >= lo {
            Ok(Slope {
                value: (f(v_s)? - f(v_s - step)?) / step,
                one_sided: true,
            })
        } else {
            Err(Error::domain(
                "varactor curve narrower than the difference step",
            ))
        }
    }

    /// Capacitance modulation (rms) produced by a varactor-voltage
    /// modulation `v_m` (rms) around `v_s`.
    pub fn capacitance_modulation(&self, v_s: f64, v_m: f64) -> Result<f64> {
        if !(v_m >= 0.0) {
            return Err(Error::domain("modulation amplitude must be >= 0"));
        }
        let f0 = self.resonant_frequency(v_s)?;
        let slope = self.df0_dvs(v_s)?;
        Ok(capacitance_modulation_from_slope(
            self.inductance,
            f0,
            slope.value,
            v_m,
        ))
    }

    fn shunt_admittance(&self, c: f64, omega: f64, extra_conductance: f64) -> Complex64 {
        Complex64::new(1.0 / self.r_device + extra_conductance, omega * c)
    }

    /// Input impedance with an additional conductance (e.g. a quantum dot)
    /// in parallel with `R_device`.
    pub fn impedance(&self, v_s: f64, f: f64, extra_conductance: f64) -> Result<Complex64> {
        if !(f > 0.0) {
            return Err(Error::domain(format!("frequency must be > 0, got {f}")));
        }
        let omega = 2.0 * PI * f;
        let c = self.total_capacitance(v_s)?;
        let y = self.shunt_admittance(c, omega, extra_conductance);
        Ok(Complex64::new(0.0, omega * self.inductance) + y.inv())
    }

    pub fn reflection_coefficient(&self, v_s: f64, f: f64) -> Result<Complex64> {
        self.reflection_loaded(v_s, f, 0.0)
    }

    pub fn reflection_loaded(&self, v_s: f64, f: f64, extra_conductance: f64) -> Result<Complex64> {
        let z = self.impedance(v_s, f, extra_conductance)?;
        Ok((z - self.z0) / (z + self.z0))
    }

    /// Partial derivatives `(∂Γ/∂C, ∂Γ/∂G)` of the complex reflection
    /// coefficient with respect to shunt capacitance and conductance.
    pub fn reflection_sensitivity(
        &self,
        v_s: f64,
        f: f64,
        extra_conductance: f64,
    ) -> Result<(Complex64, Complex64)> {
        let z = self.impedance(v_s, f, extra_conductance)?;
        let omega = 2.0 * PI * f;
        let c = self.total_capacitance(v_s)?;
        let y = self.shunt_admittance(c, omega, extra_conductance);
        let dgamma_dz = 2.0 * self.z0 / ((z + self.z0) * (z + self.z0));
        let dz_dy = -(y * y).inv();
        let d_dc = dgamma_dz * dz_dy * Complex64::new(0.0, omega);
        let d_dg = dgamma_dz * dz_dy;
        Ok((d_dc, d_dg))
    }

    pub fn find_best_match(&self, v_s: f64, f_lo: f64, f_hi: f64) -> Result<MatchPoint> {
        self.find_best_match_loaded(v_s, f_lo, f_hi, 0.0)
    }

    /// Minimises `|Γ|` over `[f_lo, f_hi]`: a coarse grid locates the
    /// basin, golden-section search refines it.
    pub fn find_best_match_loaded(
        &self,
        v_s: f64,
        f_lo: f64,
        f_hi: f64,
        extra_conductance: f64,
    ) -> Result<MatchPoint> {
        const COARSE: usize = 401;
        if !(f_lo > 0.0 && f_lo < f_hi) {
            return Err(Error::domain(format!(
                "match window must satisfy 0 < f_lo < f_hi, got [{f_lo}, {f_hi}]"
            )));
        }
        let mag = |f: f64| -> Result<f64> {
            Ok(self.reflection_loaded(v_s, f, extra_conductance)?.norm())
        };
        let step = (f_hi - f_lo) / (COARSE - 1) as f64;
        let mut best = (0, f64::INFINITY);
        for i in 0..COARSE {
            let m = mag(f_lo + i as f64 * step)?;
            if m < best.1 {
                best = (i, m);
            }
        }
        let point = |frequency: f64, gamma_mag: f64, at_boundary| MatchPoint {
            v_s,
            frequency,
            depth_db: 20.0 * gamma_mag.log10(),
            gamma_mag,
            at_boundary,
        };
        if best.0 == 0 || best.0 == COARSE - 1 {
            let f = f_lo + best.0 as f64 * step;
            return Ok(point(f, best.1, true));
        }

        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (
            f_lo + (best.0 - 1) as f64 * step,
            f_lo + (best.0 + 1) as f64 * step,
        );
        let mut x1 = b - inv_phi * (b - a);
        let mut x2 = a + inv_phi * (b - a);
        let (mut m1, mut m2) = (mag(x1)?, mag(x2)?);
        while b - a > 1e-10 * b {
            if m1 <= m2 {
                b = x2;
                x2 = x1;
                m2 = m1;
                x1 = b - inv_phi * (b - a);
                m1 = mag(x1)?;
            } else {
                a = x1;
                x1 = x2;
                m1 = m2;
                x2 = a + inv_phi * (b - a);
                m2 = mag(x2)?;
            }
        }
        let (f, m) = if m1 <= m2 { (x1, m1) } else { (x2, m2) };
        // never report worse than the coarse grid
        if m <= best.1 {
            Ok(point(f, m, false))
        } else {
            Ok(point(f_lo + best.0 as f64 * step, best.1, false))
        }
    }
}
