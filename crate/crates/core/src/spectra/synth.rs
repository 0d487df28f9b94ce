use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::{format_f64, keys, Spectrum};
use crate::chain::{Chain, OperatingPoint};
use crate::circuit::ModulationTarget;
use crate::constants::watts_to_dbm;
use crate::error::{Error, Result};
use crate::seed::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    /// Exponentially distributed bin powers, as from an envelope detector.
    Exponential,
    /// Every noise bin sits exactly at the mean floor.
    Expected,
    /// No noise at all; only the lines are present.
    Off,
}

impl NoiseMode {
    pub fn label(self) -> &'static str {
        match self {
            Self::Exponential => "exponential",
            Self::Expected => "expected",
            Self::Off => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSettings {
    pub rbw: f64,
    pub span: f64,
    pub noise: NoiseMode,
}

impl Default for SpectrumSettings {
    fn default() -> Self {
        Self {
            rbw: 2.0,
            span: 12e3,
            noise: NoiseMode::Exponential,
        }
    }
}

/// Analyzer trace of the reflected carrier, its two modulation sidebands
/// and the amplifier noise floor, centred on the carrier.
pub fn synthesize_spectrum(
    chain: &Chain,
    op: &OperatingPoint,
    settings: &SpectrumSettings,
    seed: u64,
) -> Result<Spectrum> {
    let f_m = op.modulation.f_m;
    op.modulation.validate()?;
    if !(settings.rbw > 0.0) {
        return Err(Error::config("analysis.rbw_hz", "must be > 0"));
    }
    if settings.rbw > f_m / 10.0 {
        return Err(Error::config(
            "analysis.rbw_hz",
            format!(
                "resolution bandwidth {} Hz cannot resolve sidebands at f_M = {f_m} Hz (need rbw <= f_M/10)",
                settings.rbw
            ),
        ));
    }
    let half_bins = (0.5 * settings.span / settings.rbw).round() as usize;
    let sb_offset = (f_m / settings.rbw).round() as usize;
    if sb_offset >= half_bins {
        return Err(Error::config(
            "analysis.span_hz",
            format!(
                "span {} Hz does not contain the sidebands at ±{f_m} Hz",
                settings.span
            ),
        ));
    }

    let budget = chain.budget(op)?;
    let f_c = budget.f_c;
    let signal_gain = budget.gain * budget.compression.powi(2);
    let noise_mean = budget.noise_density * settings.rbw * budget.gain;
    let n = 2 * half_bins + 1;

    let mut watts = vec![0.0; n];
    match settings.noise {
        NoiseMode::Exponential => {
            let mut r = rng(seed);
            for w in watts.iter_mut() {
                let x: f64 = r.sample(Exp1);
                *w = noise_mean * x;
            }
        }
        NoiseMode::Expected => watts.fill(noise_mean),
        NoiseMode::Off => {}
    }
    watts[half_bins] += budget.carrier_w * signal_gain;
    watts[half_bins - sb_offset] += budget.sideband_w * signal_gain;
    watts[half_bins + sb_offset] += budget.sideband_w * signal_gain;

    let mut spectrum = Spectrum::new(
        f_c - half_bins as f64 * settings.rbw,
        settings.rbw,
        settings.rbw,
        watts.into_iter().map(watts_to_dbm).collect(),
    )?
    .with_meta(keys::RBW, format_f64(settings.rbw))
    .with_meta(keys::SEED, seed)
    .with_meta(keys::F_C, format_f64(f_c))
    .with_meta(keys::F_M, format_f64(f_m))
    .with_meta(keys::P1, format_f64(op.p1_dbm))
    .with_meta(keys::NOISE_STATS, settings.noise.label())
    .with_meta(keys::TARGET, op.modulation.target);
    spectrum = match op.modulation.target {
        ModulationTarget::Varactor => spectrum.with_meta(keys::DELTA_C, format_f64(budget.delta_x)),
        ModulationTarget::Gate => spectrum.with_meta(
            keys::DELTA_Q,
            format_f64(op.modulation.amplitude / chain.dot.peak_spacing()),
        ),
    };
    let f_start = spectrum.f_start;
    Ok(spectrum
        .with_meta(keys::F_START, format_f64(f_start))
        .with_meta(keys::F_STEP, format_f64(settings.rbw)))
}
