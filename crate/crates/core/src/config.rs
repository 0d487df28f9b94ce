//! JSON configuration of the measurement chain and the workflows.
//!
//! Every section and key is optional; `{}` is a valid configuration that
//! reproduces the reference chain. Unknown keys are rejected. Values are SI
//! except power levels, which are given in dBm under keys ending in `_dBm`,
//! and gains or losses, which end in `_dB`.
//!
//! ```json
//! {
//!   "circuit": { "inductance_h": 223e-9, "varactor_csv": "varactor.csv" },
//!   "drive": { "P1_dBm": -31, "v_s_v": 6.8,
//!              "modulation": { "target": "gate", "f_m_hz": 3000, "amplitude_vrms": 15.7e-6 } },
//!   "analysis": { "rbw_hz": 2, "span_hz": 12000, "seed": 7 }
//! }
//! ```
//!
//! The dot defaults (lever arm, electron temperature, charging energy and
//! peak positions) are placeholders for a generic GaAs dot, not measured
//! device values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chain::{Chain, OperatingPoint, SignalPath};
use crate::circuit::{Interpolation, ModulationSpec, ModulationTarget, TankCircuit, VaractorCurve};
use crate::constants::PLANCK;
use crate::dot::{DotModel, DoubleDotModel};
use crate::error::{Error, Result};
use crate::optimize::SweepPlan;
use crate::readout::{default_p1_grid, SensitivityCurve, V0Map};
use crate::spectra::{NoiseMode, SnrOptions, SpectrumSettings};
use crate::squid::{calibrated_kappa, SquidModel, PORT1_TO_SQUID_DB, SATURATION_P1_DBM};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    pub circuit: CircuitConfig,
    pub squid: SquidConfig,
    pub dot: DotConfig,
    pub drive: DriveConfig,
    pub analysis: AnalysisConfig,
    #[serde(rename = "match")]
    pub match_sweep: MatchConfig,
    pub readout: ReadoutConfig,
    pub stability: StabilityConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitConfig {
    pub inductance_h: f64,
    /// Two-column CSV, relative to the config file.
    pub varactor_csv: Option<PathBuf>,
    /// Inline `[V_S, C]` pairs; alternative to `varactor_csv`.
    pub varactor_table: Option<Vec<[f64; 2]>>,
    pub interpolation_order: u8,
    /// Defaults to the value that matches the reference curve at 6.8 V.
    pub r_device_ohm: Option<f64>,
    pub z0_ohm: f64,
    pub parasitic_c_f: f64,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        let c = TankCircuit::default();
        Self {
            inductance_h: c.inductance,
            varactor_csv: None,
            varactor_table: None,
            interpolation_order: 3,
            r_device_ohm: None,
            z0_ohm: c.z0,
            parasitic_c_f: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SquidConfig {
    pub v_pp_v: f64,
    pub flux_offset_wb: f64,
    #[serde(rename = "power_gain_dB")]
    pub power_gain_db: f64,
    pub t_p_k: f64,
    /// Flux per √W; calibrated from `saturation_P1_dBm` when absent.
    pub kappa_wb_per_rtw: Option<f64>,
    #[serde(rename = "saturation_P1_dBm")]
    pub saturation_p1_dbm: f64,
    pub linear_fraction: f64,
    pub t_n0_k: f64,
    pub noise_exponent: f64,
    pub harmonics: Vec<f64>,
    pub i_sq_a: f64,
    pub i_fl_a: f64,
    #[serde(rename = "port1_to_squid_offset_dB")]
    pub port1_to_squid_offset_db: f64,
    #[serde(rename = "input_attenuation_dB")]
    pub input_attenuation_db: f64,
    #[serde(rename = "output_loss_dB")]
    pub output_loss_db: f64,
    #[serde(rename = "post_gain_dB")]
    pub post_gain_db: f64,
}

impl Default for SquidConfig {
    fn default() -> Self {
        let s = SquidModel::default();
        let p = SignalPath::default();
        Self {
            v_pp_v: s.v_pp,
            flux_offset_wb: s.flux_offset,
            power_gain_db: s.power_gain_db,
            t_p_k: s.t_p,
            kappa_wb_per_rtw: None,
            saturation_p1_dbm: SATURATION_P1_DBM,
            linear_fraction: s.linear_fraction,
            t_n0_k: s.t_n0,
            noise_exponent: s.noise_exponent,
            harmonics: s.harmonics,
            i_sq_a: s.i_sq,
            i_fl_a: s.i_fl,
            port1_to_squid_offset_db: PORT1_TO_SQUID_DB,
            input_attenuation_db: p.input_attenuation_db,
            output_loss_db: p.output_loss_db,
            post_gain_db: p.post_gain_db,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DotConfig {
    pub peak_positions_v: Vec<f64>,
    pub g_max_s: f64,
    pub lever_arm: f64,
    pub charging_energy_ev: f64,
    pub electron_temperature_k: f64,
    pub peak_spacing_v: Option<f64>,
    /// Interdot tunnel coupling as a frequency, `t/h`.
    pub tunnel_coupling_hz: f64,
    pub double_dot_lever_arm: f64,
}

impl Default for DotConfig {
    fn default() -> Self {
        let d = DotModel::default();
        let dd = DoubleDotModel::default();
        Self {
            peak_positions_v: d.peak_positions().to_vec(),
            g_max_s: d.g_max(),
            lever_arm: d.lever_arm(),
            charging_energy_ev: d.charging_energy(),
            electron_temperature_k: d.electron_temperature(),
            peak_spacing_v: None,
            tunnel_coupling_hz: dd.tunnel_coupling / PLANCK,
            double_dot_lever_arm: dd.lever_arm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveConfig {
    #[serde(rename = "P1_dBm")]
    pub p1_dbm: f64,
    pub v_s_v: f64,
    /// Carrier frequency; the best match at `v_s_v` when absent.
    pub f_c_hz: Option<f64>,
    pub v_l_v: f64,
    pub v_b_v: f64,
    pub modulation: ModulationConfig,
}

impl Default for DriveConfig {
    fn default() -> Self {
        let op = OperatingPoint::default();
        Self {
            p1_dbm: op.p1_dbm,
            v_s_v: op.v_s,
            f_c_hz: op.f_c,
            v_l_v: op.v_l,
            v_b_v: op.v_b,
            modulation: ModulationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModulationConfig {
    pub target: ModulationTarget,
    pub f_m_hz: f64,
    /// `V_M` for the varactor, `δV_L` for the gate.
    pub amplitude_vrms: f64,
}

impl Default for ModulationConfig {
    fn default() -> Self {
        let m = OperatingPoint::default().modulation;
        Self {
            target: m.target,
            f_m_hz: m.f_m,
            amplitude_vrms: m.amplitude,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub rbw_hz: f64,
    pub span_hz: f64,
    pub seed: u64,
    pub noise: NoiseMode,
    pub guard_bins: usize,
    /// Noise-only windows `[f_lo, f_hi]` in Hz; all guarded bins otherwise.
    pub noise_windows_hz: Option<Vec<[f64; 2]>>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let s = SpectrumSettings::default();
        Self {
            rbw_hz: s.rbw,
            span_hz: s.span,
            seed: 0,
            noise: s.noise,
            guard_bins: SnrOptions::default().guard_bins,
            noise_windows_hz: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchConfig {
    pub v_s_v: Vec<f64>,
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
    pub points: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            v_s_v: (0..=16).map(|i| 6.0 + 0.1 * i as f64).collect(),
            f_lo_hz: 180e6,
            f_hi_hz: 210e6,
            points: 301,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReadoutConfig {
    /// `[P1 in dBm, S_C in F/√Hz]` anchors.
    pub sc_anchors: Vec<[f64; 2]>,
    #[serde(rename = "p1_grid_dBm")]
    pub p1_grid_dbm: Vec<f64>,
    #[serde(rename = "ref_P1_dBm")]
    pub ref_p1_dbm: f64,
    pub ref_v0_vrms: f64,
    pub electrode_scale: f64,
}

impl Default for ReadoutConfig {
    fn default() -> Self {
        let v0 = V0Map::default();
        Self {
            sc_anchors: SensitivityCurve::reference()
                .anchors()
                .iter()
                .map(|&(p, s)| [p, s])
                .collect(),
            p1_grid_dbm: default_p1_grid(),
            ref_p1_dbm: v0.ref_p1_dbm,
            ref_v0_vrms: v0.ref_v0,
            electrode_scale: v0.electrode_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConfig {
    pub v_l_min_v: f64,
    pub v_l_max_v: f64,
    pub v_l_points: usize,
    pub v_b_min_v: f64,
    pub v_b_max_v: f64,
    pub v_b_points: usize,
    /// Homodyne reference phase; chosen so that `V_D` falls as `G` rises
    /// when absent.
    pub lo_phase_rad: Option<f64>,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            v_l_min_v: -0.385,
            v_l_max_v: -0.285,
            v_l_points: 201,
            v_b_min_v: -1.5e-3,
            v_b_max_v: 1.5e-3,
            v_b_points: 61,
            lo_phase_rad: None,
        }
    }
}

/// A parsed optimisation protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolFile {
    pub passes: Vec<SweepPlan>,
    /// Warn threshold for `|dG/dV_L|` in gate passes, S/V.
    #[serde(default)]
    pub slope_floor_s_per_v: Option<f64>,
}

/// Domain objects built from a validated configuration.
#[derive(Debug, Clone)]
pub struct Setup {
    pub chain: Chain,
    pub op: OperatingPoint,
    pub settings: SpectrumSettings,
    pub snr: SnrOptions,
    pub seed: u64,
    pub sc_curve: SensitivityCurve,
    pub v0_map: V0Map,
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses JSON, reporting the key path of the first offending value.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(
            if path == "." { String::new() } else { path },
            e.inner().to_string(),
        )
    })
}

fn at(path: &'static str) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Domain(m) => Error::config(path, m),
        other => other,
    }
}

impl ChainConfig {
    pub fn load(path: &Path) -> Result<Self> {
        parse_json(&read_text(path)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        parse_json(text)
    }

    /// Validates every value and builds the models. Relative file paths
    /// resolve against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<Setup> {
        let positive = |v: f64, path: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(path, format!("must be > 0, got {v}")))
            }
        };

        let c = &self.circuit;
        positive(c.inductance_h, "circuit.inductance_h")?;
        positive(c.z0_ohm, "circuit.z0_ohm")?;
        let interpolation = Interpolation::from_order(c.interpolation_order)
            .map_err(at("circuit.interpolation_order"))?;
        let varactor = match (&c.varactor_csv, &c.varactor_table) {
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    "circuit",
                    "give either varactor_csv or varactor_table, not both",
                ))
            }
            (Some(p), None) => {
                let full = base_dir.join(p);
                if !full.is_file() {
                    return Err(Error::config(
                        "circuit.varactor_csv",
                        format!("file not found: {}", full.display()),
                    ));
                }
                VaractorCurve::from_csv_path(&full, interpolation)?
            }
            (None, Some(t)) => {
                let samples: Vec<(f64, f64)> = t.iter().map(|r| (r[0], r[1])).collect();
                VaractorCurve::new(&samples, interpolation).map_err(at("circuit.varactor_table"))?
            }
            (None, None) => {
                let reference = VaractorCurve::calibrated();
                let samples: Vec<(f64, f64)> = reference.samples().collect();
                VaractorCurve::new(&samples, interpolation)
                    .map_err(at("circuit.interpolation_order"))?
            }
        };
        let reference = TankCircuit::default();
        let r_device = c.r_device_ohm.unwrap_or(reference.r_device);
        positive(r_device, "circuit.r_device_ohm")?;
        if !(c.parasitic_c_f >= 0.0) {
            return Err(Error::config("circuit.parasitic_c_f", "must be >= 0"));
        }
        let circuit = TankCircuit::new(
            c.inductance_h,
            varactor,
            c.parasitic_c_f,
            r_device,
            c.z0_ohm,
        )
        .map_err(at("circuit"))?;

        let s = &self.squid;
        positive(s.v_pp_v, "squid.v_pp_v")?;
        positive(s.t_p_k, "squid.t_p_k")?;
        positive(s.t_n0_k, "squid.t_n0_k")?;
        positive(s.noise_exponent, "squid.noise_exponent")?;
        if !(s.linear_fraction > 0.0 && s.linear_fraction < 0.25) {
            return Err(Error::config(
                "squid.linear_fraction",
                "must lie in (0, 0.25)",
            ));
        }
        let kappa = match s.kappa_wb_per_rtw {
            Some(k) => {
                positive(k, "squid.kappa_wb_per_rtw")?;
                k
            }
            None => calibrated_kappa(s.saturation_p1_dbm, s.port1_to_squid_offset_db),
        };
        let squid = SquidModel {
            v_pp: s.v_pp_v,
            flux_offset: s.flux_offset_wb,
            power_gain_db: s.power_gain_db,
            t_p: s.t_p_k,
            kappa,
            linear_fraction: s.linear_fraction,
            t_n0: s.t_n0_k,
            noise_exponent: s.noise_exponent,
            harmonics: s.harmonics.clone(),
            i_sq: s.i_sq_a,
            i_fl: s.i_fl_a,
        };
        squid.validate().map_err(at("squid"))?;
        let path = SignalPath {
            input_attenuation_db: s.input_attenuation_db,
            port1_to_squid_db: s.port1_to_squid_offset_db,
            output_loss_db: s.output_loss_db,
            post_gain_db: s.post_gain_db,
        };

        let d = &self.dot;
        let dot = DotModel::new(
            d.peak_positions_v.clone(),
            d.g_max_s,
            d.lever_arm,
            d.charging_energy_ev,
            d.electron_temperature_k,
            d.peak_spacing_v,
        )
        .map_err(at("dot"))?;
        positive(d.tunnel_coupling_hz, "dot.tunnel_coupling_hz")?;
        let double_dot = DoubleDotModel::new(PLANCK * d.tunnel_coupling_hz, d.double_dot_lever_arm)
            .map_err(at("dot.double_dot_lever_arm"))?;

        let chain = Chain {
            circuit,
            squid,
            dot,
            double_dot,
            path,
        };
        chain.validate().map_err(at("squid"))?;

        let dr = &self.drive;
        if let Some(f) = dr.f_c_hz {
            positive(f, "drive.f_c_hz")?;
        }
        let (lo, hi) = chain.circuit.varactor.domain();
        if !(lo..=hi).contains(&dr.v_s_v) {
            return Err(Error::config(
                "drive.v_s_v",
                format!("{} V outside the varactor curve [{lo}, {hi}] V", dr.v_s_v),
            ));
        }
        let modulation = ModulationSpec {
            f_m: dr.modulation.f_m_hz,
            amplitude: dr.modulation.amplitude_vrms,
            target: dr.modulation.target,
        };
        modulation.validate().map_err(at("drive.modulation"))?;
        let op = OperatingPoint {
            p1_dbm: dr.p1_dbm,
            v_s: dr.v_s_v,
            f_c: dr.f_c_hz,
            v_l: dr.v_l_v,
            v_b: dr.v_b_v,
            modulation,
        };

        let a = &self.analysis;
        positive(a.rbw_hz, "analysis.rbw_hz")?;
        positive(a.span_hz, "analysis.span_hz")?;
        if a.rbw_hz > modulation.f_m / 10.0 {
            return Err(Error::config(
                "analysis.rbw_hz",
                format!(
                    "must be <= f_M/10 = {} Hz to resolve the sidebands",
                    modulation.f_m / 10.0
                ),
            ));
        }
        if let Some(ws) = &a.noise_windows_hz {
            if ws.iter().any(|w| !(w[0] < w[1])) {
                return Err(Error::config(
                    "analysis.noise_windows_hz",
                    "each window needs f_lo < f_hi",
                ));
            }
        }
        let settings = SpectrumSettings {
            rbw: a.rbw_hz,
            span: a.span_hz,
            noise: a.noise,
        };
        let snr = SnrOptions {
            guard_bins: a.guard_bins,
            noise_windows: a
                .noise_windows_hz
                .as_ref()
                .map(|ws| ws.iter().map(|w| (w[0], w[1])).collect()),
            ..SnrOptions::default()
        };

        let m = &self.match_sweep;
        positive(m.f_lo_hz, "match.f_lo_hz")?;
        if !(m.f_hi_hz > m.f_lo_hz) {
            return Err(Error::config("match.f_hi_hz", "must exceed match.f_lo_hz"));
        }
        if m.v_s_v.is_empty() {
            return Err(Error::config("match.v_s_v", "needs at least one voltage"));
        }
        if let Some(v) = m.v_s_v.iter().find(|v| !(lo..=hi).contains(*v)) {
            return Err(Error::config(
                "match.v_s_v",
                format!("{v} V outside the varactor curve [{lo}, {hi}] V"),
            ));
        }
        if m.points == 0 {
            return Err(Error::config("match.points", "must be >= 1"));
        }

        let r = &self.readout;
        let sc_curve = SensitivityCurve::new(r.sc_anchors.iter().map(|a| (a[0], a[1])).collect())
            .map_err(at("readout.sc_anchors"))?;
        positive(r.ref_v0_vrms, "readout.ref_v0_vrms")?;
        positive(r.electrode_scale, "readout.electrode_scale")?;
        let v0_map = V0Map {
            ref_p1_dbm: r.ref_p1_dbm,
            ref_v0: r.ref_v0_vrms,
            electrode_scale: r.electrode_scale,
        };

        let st = &self.stability;
        if !(st.v_l_max_v >= st.v_l_min_v) {
            return Err(Error::config("stability.v_l_max_v", "must be >= v_l_min_v"));
        }
        if !(st.v_b_max_v >= st.v_b_min_v) {
            return Err(Error::config("stability.v_b_max_v", "must be >= v_b_min_v"));
        }
        if st.v_l_points == 0 {
            return Err(Error::config("stability.v_l_points", "must be >= 1"));
        }
        if st.v_b_points == 0 {
            return Err(Error::config("stability.v_b_points", "must be >= 1"));
        }

        Ok(Setup {
            chain,
            op,
            settings,
            snr,
            seed: a.seed,
            sc_curve,
            v0_map,
        })
    }
}

impl ProtocolFile {
    pub fn load(path: &Path) -> Result<Self> {
        let p: Self = parse_json(&read_text(path)?)?;
        for (i, plan) in p.passes.iter().enumerate() {
            plan.validate()
                .map_err(|e| Error::config(format!("passes[{i}]"), e.to_string()))?;
        }
        if let Some(f) = p.slope_floor_s_per_v {
            if !(f >= 0.0) {
                return Err(Error::config("slope_floor_s_per_v", "must be >= 0"));
            }
        }
        Ok(p)
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
