//! Runs the gate-modulation tuning protocol and prints the objective after
//! each pass.

use rfsense::chain::{Chain, OperatingPoint};
use rfsense::optimize::{reference_protocol, run_protocol, SweepContext};
use rfsense::spectra::{NoiseMode, SpectrumSettings};

fn main() -> rfsense::Result<()> {
    let settings = SpectrumSettings {
        noise: NoiseMode::Expected,
        ..SpectrumSettings::default()
    };
    let ctx = SweepContext::new(Chain::default(), settings);
    let start = OperatingPoint {
        p1_dbm: -35.0,
        ..OperatingPoint::default()
    };
    let passes = reference_protocol(&start, 0);
    let result = run_protocol(&passes, &ctx, &start)?;
    for (pass, s_q) in passes.iter().zip(&result.objective_trace) {
        println!(
            "{:<5} S_Q = {:.1} µe/√Hz",
            pass.steps[0].parameter.name(),
            s_q * 1e6
        );
    }
    let end = result.final_state;
    println!(
        "final: V_L {:.5} V, V_S {:.2} V, P1 {} dBm",
        end.v_l, end.v_s, end.p1_dbm
    );
    Ok(())
}
