//! SQUID amplifier regimes and the noise budget against drive power.

use rfsense::chain::Chain;
use rfsense::squid::quantum_limit;

fn main() -> rfsense::Result<()> {
    let chain = Chain::default();
    let squid = &chain.squid;
    println!(
        "post-amplifier contribution: {:.3} K",
        squid.postamp_contribution()
    );
    println!(
        "quantum limit at 196 MHz: {:.2} mK",
        quantum_limit(196e6)? * 1e3
    );

    println!("{:>6} {:>12} {:>8} {:>8}", "P1", "regime", "T_N/K", "gain");
    for p1 in (-60..=-10).step_by(5) {
        let p_in = chain.squid_input_power(p1 as f64);
        println!(
            "{p1:>6} {:>12} {:>8.3} {:>8.3}",
            format!("{:?}", squid.classify_regime(p_in)),
            squid.noise_vs_power(p_in),
            squid.compression_factor(p_in)
        );
    }
    Ok(())
}
