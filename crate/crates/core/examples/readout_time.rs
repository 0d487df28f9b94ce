//! Readout time of a double-dot charge sensor against drive power.

use rfsense::dot::DoubleDotModel;
use rfsense::readout::{default_p1_grid, readout_time_sweep, SensitivityCurve, V0Map};

fn main() -> rfsense::Result<()> {
    let dd = DoubleDotModel::default();
    println!("C_Q(0) = {:.3} fF", dd.peak_capacitance() * 1e15);
    let sweep = readout_time_sweep(
        &dd,
        &SensitivityCurve::reference(),
        &V0Map::default(),
        &default_p1_grid(),
    )?;
    for e in sweep.estimates.iter().step_by(10) {
        println!(
            "P1 {:>6.1} dBm  C̄ {:>7.2} aF  τ {:>8.1} ns",
            e.p1_dbm,
            e.c_bar * 1e18,
            e.tau * 1e9
        );
    }
    if let Some(best) = sweep.best() {
        println!("fastest: {:.1} ns at {} dBm", best.tau * 1e9, best.p1_dbm);
    }
    Ok(())
}
