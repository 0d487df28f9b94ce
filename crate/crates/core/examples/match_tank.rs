//! Sweeps the varactor bias and reports where the tank is best matched to
//! 50 Ω.

use rfsense::circuit::{TankCircuit, CALIBRATION_VS};

fn main() -> rfsense::Result<()> {
    let tank = TankCircuit::default();
    println!(
        "f0 at {CALIBRATION_VS} V: {:.3} MHz",
        tank.resonant_frequency(CALIBRATION_VS)? / 1e6
    );
    println!("{:>6} {:>12} {:>10}", "V_S", "f_match/MHz", "|Γ|/dB");
    for i in 0..=8 {
        let v_s = 6.0 + 0.2 * i as f64;
        let m = tank.find_best_match(v_s, 180e6, 210e6)?;
        println!(
            "{v_s:>6.1} {:>12.3} {:>10.1}",
            m.frequency / 1e6,
            m.depth_db
        );
    }
    Ok(())
}
