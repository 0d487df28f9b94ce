//! Capacitance swing produced by a small varactor modulation, from the
//! slope of the resonance.

use rfsense::circuit::{TankCircuit, CALIBRATION_VS};

fn main() -> rfsense::Result<()> {
    let tank = TankCircuit::default();
    let slope = tank.df0_dvs(CALIBRATION_VS)?;
    println!("df0/dV_S = {:.3} MHz/V", slope.value / 1e6);
    for v_m in [10e-6, 99e-6, 1e-3] {
        let dc = tank.capacitance_modulation(CALIBRATION_VS, v_m)?;
        println!("V_M = {:>7.1} µV  ->  δC = {:.3} aF", v_m * 1e6, dc * 1e18);
    }
    Ok(())
}
