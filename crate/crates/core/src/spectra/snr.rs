use serde::Serialize;

use super::{keys, Spectrum};
use crate::constants::watts_to_dbm;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SnrOptions {
    /// Bins excluded on either side of each line when estimating the floor.
    pub guard_bins: usize,
    /// Frequency windows holding only noise. `None` uses the whole span
    /// minus the guarded lines.
    pub noise_windows: Option<Vec<(f64, f64)>>,
    pub min_noise_bins: usize,
}

impl Default for SnrOptions {
    fn default() -> Self {
        Self {
            guard_bins: 5,
            noise_windows: None,
            min_noise_bins: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnrResult {
    pub snr_db: f64,
    pub delta_f: f64,
    pub sideband_dbm: f64,
    pub floor_dbm: f64,
    pub noise_bins: usize,
    /// The sideband does not rise above the floor.
    pub flagged: bool,
}

pub fn measure_snr(s: &Spectrum, f_sideband: f64) -> Result<SnrResult> {
    measure_snr_with(s, f_sideband, &SnrOptions::default())
}

/// Sideband height above the median noise floor. When the metadata marks
/// the noise as exponentially distributed the median is rescaled by
/// `1/ln 2` to estimate the mean.
pub fn measure_snr_with(s: &Spectrum, f_sideband: f64, opts: &SnrOptions) -> Result<SnrResult> {
    let sb = s.bin_of(f_sideband).ok_or_else(|| {
        Error::domain(format!(
            "sideband at {f_sideband} Hz outside spectrum span [{}, {}]",
            s.f_start,
            s.f_stop()
        ))
    })?;

    let mut lines = vec![sb];
    if let (Some(f_c), Some(f_m)) = (s.meta_f64(keys::F_C)?, s.meta_f64(keys::F_M)?) {
        lines.extend(
            [f_c - f_m, f_c, f_c + f_m]
                .iter()
                .filter_map(|&f| s.bin_of(f)),
        );
    }
    let guarded = |i: usize| lines.iter().any(|&l| i.abs_diff(l) <= opts.guard_bins);
    let in_window = |i: usize| match &opts.noise_windows {
        None => true,
        Some(ws) => {
            let f = s.frequency(i);
            ws.iter().any(|&(lo, hi)| (lo..=hi).contains(&f))
        }
    };

    let watts: Vec<f64> = s.powers_watts().collect();
    let mut noise: Vec<f64> = (0..watts.len())
        .filter(|&i| !guarded(i) && in_window(i))
        .map(|i| watts[i])
        .collect();
    if noise.len() < opts.min_noise_bins {
        return Err(Error::domain(format!(
            "only {} noise bins available, need at least {}",
            noise.len(),
            opts.min_noise_bins
        )));
    }
    let mut floor = median(&mut noise);
    if s.metadata.get(keys::NOISE_STATS).map(String::as_str) == Some("exponential") {
        floor /= std::f64::consts::LN_2;
    }

    let lo = sb.saturating_sub(1);
    let hi = (sb + 1).min(watts.len() - 1);
    let peak = watts[lo..=hi]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let snr_db = 10.0 * (peak / floor).log10();
    Ok(SnrResult {
        snr_db,
        delta_f: s.rbw,
        sideband_dbm: watts_to_dbm(peak),
        floor_dbm: watts_to_dbm(floor),
        noise_bins: noise.len(),
        flagged: !(snr_db > 0.0),
    })
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
