//! Coulomb diamonds: conductance over plunger gate and bias, drawn as
//! ASCII.

use rfsense::dot::{stability_grid, DotModel};

fn main() {
    let dot = DotModel::default();
    let v_l: Vec<f64> = (0..80).map(|i| -0.385 + 0.1 * i as f64 / 79.0).collect();
    let v_b: Vec<f64> = (0..21).map(|i| -1.5e-3 + 3e-3 * i as f64 / 20.0).collect();
    let grid = stability_grid(&dot, &v_l, &v_b);
    let shades = [' ', '.', ':', '+', '#'];
    for row in grid.chunks(v_l.len()) {
        let line: String = row
            .iter()
            .map(|p| {
                let level = (p.g / dot.g_max() * (shades.len() - 1) as f64).round() as usize;
                shades[level.min(shades.len() - 1)]
            })
            .collect();
        println!("{:>+6.2} mV |{line}|", row[0].v_b * 1e3);
    }
}
