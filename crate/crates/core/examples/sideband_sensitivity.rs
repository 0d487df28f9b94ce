//! Synthesises a spectrum around the carrier and recovers the capacitance
//! sensitivity from the sideband SNR.

use rfsense::chain::{Chain, OperatingPoint};
use rfsense::spectra::{analyze_spectrum, synthesize_spectrum, SnrOptions, SpectrumSettings};

fn main() -> rfsense::Result<()> {
    let chain = Chain::default();
    let op = OperatingPoint::default();
    let spectrum = synthesize_spectrum(&chain, &op, &SpectrumSettings::default(), 7)?;
    let result = analyze_spectrum(&spectrum, &SnrOptions::default())?;

    println!("{} bins, rbw {} Hz", spectrum.len(), spectrum.rbw);
    println!("SNR {:.1} dB", result.snr_db);
    if let Some(s_c) = result.s_c {
        println!("S_C = {:.3} aF/√Hz", s_c * 1e18);
    }
    println!(
        "analytic S_C = {:.3} aF/√Hz",
        chain.expected_capacitance_sensitivity(&op)? * 1e18
    );
    Ok(())
}
