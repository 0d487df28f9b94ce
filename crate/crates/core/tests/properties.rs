use proptest::prelude::*;

use rfsense::chain::{Chain, OperatingPoint};
use rfsense::circuit::{Interpolation, ModulationSpec, TankCircuit, VaractorCurve};
use rfsense::constants::ELEMENTARY_CHARGE;
use rfsense::dot::{gate_charge_modulation, DoubleDotModel};
use rfsense::optimize::{
    evaluate, run_pass, run_protocol, Objective, Parameter, SweepContext, SweepPlan,
};
use rfsense::quad::Tolerance;
use rfsense::readout::{average_capacitance, average_capacitance_with, ReadoutEstimate};
use rfsense::spectra::{
    analyze_spectrum, capacitance_sensitivity, charge_sensitivity, measure_snr,
    oscillating_charge_sensitivity, synthesize_spectrum, NoiseMode, SnrOptions, SpectrumSettings,
};
use rfsense::squid::{noise_power_referred, noise_temperature, SquidModel};
use rfsense::{DotModel, Regime};

/// `C(V) = c0 + c1 / (1 + V/0.7)^m`, decreasing in `V`.
fn analytic_curve(c0: f64, c1: f64, m: f64) -> (impl Fn(f64) -> f64, impl Fn(f64) -> f64) {
    let c = move |v: f64| c0 + c1 * (1.0 + v / 0.7).powf(-m);
    let dc = move |v: f64| -c1 * m / 0.7 * (1.0 + v / 0.7).powf(-m - 1.0);
    (c, dc)
}

fn tank_with(c0: f64, c1: f64, m: f64) -> TankCircuit {
    let (c, _) = analytic_curve(c0, c1, m);
    let samples: Vec<(f64, f64)> = (0..=300)
        .map(|i| (0.05 * i as f64, c(0.05 * i as f64)))
        .collect();
    let varactor = VaractorCurve::new(&samples, Interpolation::Cubic).unwrap();
    TankCircuit::new(470e-9, varactor, 0.0, 1500.0, 50.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resonance_falls_as_capacitance_rises(
        c0 in 0.5e-12..1.2e-12, c1 in 0.1e-12..1.0e-12, m in 0.3..0.8f64,
        a in 0.5..14.0f64, b in 0.5..14.0f64,
    ) {
        let tank = tank_with(c0, c1, m);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-3);
        let (c_lo, c_hi) = (tank.total_capacitance(lo).unwrap(), tank.total_capacitance(hi).unwrap());
        let (f_lo, f_hi) = (tank.resonant_frequency(lo).unwrap(), tank.resonant_frequency(hi).unwrap());
        prop_assert!(c_lo > c_hi);
        prop_assert!(f_lo < f_hi);
    }

    #[test]
    fn capacitance_modulation_matches_direct_slope(
        c0 in 0.5e-12..1.2e-12, c1 in 0.1e-12..1.0e-12, m in 0.3..0.8f64,
        v in 1.0..13.0f64, v_m in 1e-6..1e-3f64,
    ) {
        let tank = tank_with(c0, c1, m);
        let (_, dc) = analytic_curve(c0, c1, m);
        let got = tank.capacitance_modulation(v, v_m).unwrap();
        let direct = dc(v).abs() * v_m;
        prop_assert!(((got - direct) / direct).abs() < 1e-3, "{got} vs {direct}");
    }

    #[test]
    fn reflection_is_passive(
        v in 0.0..15.0f64, f in 1e3..2e9f64, r in 1.0..1e7f64, g in 0.0..1e-3f64,
    ) {
        let tank = TankCircuit { r_device: r, ..TankCircuit::default() };
        prop_assert!(tank.reflection_loaded(v, f, g).unwrap().norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn best_match_is_stable_under_refinement(v in 6.0..7.6f64) {
        let tank = TankCircuit::default();
        let coarse = tank.find_best_match(v, 180e6, 210e6).unwrap();
        let narrow = tank.find_best_match(v, coarse.frequency - 1e6, coarse.frequency + 1e6).unwrap();
        prop_assert!((coarse.frequency - narrow.frequency).abs() < 1e3);
    }

    #[test]
    fn stored_charge_is_antiderivative(t in 1e8..5e9f64, lambda in 0.05..1.0f64, k in -3.0..2.0f64, sign in prop::bool::ANY) {
        let dd = DoubleDotModel::new(t, lambda).unwrap();
        let v = if sign { 1.0 } else { -1.0 } * dd.peak_width() * 10f64.powf(k);
        let h = 1e-4 * dd.peak_width().max(v.abs());
        let numeric = (dd.stored_charge(v + h) - dd.stored_charge(v - h)) / (2.0 * h);
        let exact = dd.quantum_capacitance(v);
        prop_assert!(((numeric - exact) / exact).abs() < 1e-6, "{numeric} vs {exact}");
    }

    #[test]
    fn conductance_is_non_negative(v_l in -0.5..0.0f64, v_b in -3e-3..3e-3f64) {
        let dot = DotModel::default();
        prop_assert!(dot.conductance(v_l, v_b) >= 0.0);
    }

    #[test]
    fn gate_charge_identity(dv in 1e-7..1e-3f64, spacing in 1e-3..0.1f64) {
        let dq = gate_charge_modulation(dv, spacing).unwrap();
        prop_assert!((dq * spacing / dv / ELEMENTARY_CHARGE - 1.0).abs() < 1e-12);
    }

    #[test]
    fn squid_regimes_ordered(t_n0 in 0.3..5.0f64, p in 1.0..4.0f64, frac in 0.01..0.249f64) {
        let squid = SquidModel {
            t_n0,
            noise_exponent: p,
            linear_fraction: frac,
            ..SquidModel::default()
        };
        prop_assert!(squid.validate().is_ok());
        let (a, b) = squid.regime_thresholds();
        prop_assert!(a < b);
        prop_assert_eq!(squid.classify_regime(0.5 * a), Regime::Linear);
        prop_assert_eq!(squid.classify_regime(1.5 * b), Regime::Saturation);
        prop_assert!(squid.postamp_contribution() < squid.noise_vs_power(0.0));
    }

    #[test]
    fn noise_vs_power_is_monotone(p_a in -160.0..-80.0f64, step in 0.0..10.0f64) {
        let squid = SquidModel::default();
        let w = |dbm: f64| 1e-3 * 10f64.powf(dbm / 10.0);
        let (a, b) = (squid.noise_vs_power(w(p_a)), squid.noise_vs_power(w(p_a + step)));
        prop_assert!(b >= a);
        let near = squid.noise_vs_power(w(p_a) * (1.0 + 1e-9));
        prop_assert!((near - a).abs() <= 1e-6 * a);
    }

    #[test]
    fn noise_referral_scale_invariant(p in 1e-18..1e-9f64, s in 1e-12..1e-3f64, n in 1e-18..1e-9f64, k in 1e-6..1e6f64, df in 1.0..1e6f64) {
        let a = noise_temperature(noise_power_referred(p, s, n).unwrap(), df).unwrap();
        let b = noise_temperature(noise_power_referred(p, k * s, k * n).unwrap(), df).unwrap();
        prop_assert!((a / b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sensitivities_scale_covariantly(snr in -10.0..80.0f64, df in 0.1..1e3f64, x in 1e-21..1e-15f64, k in 0.1..10.0f64) {
        let base = capacitance_sensitivity(snr, df, x).unwrap();
        prop_assert!((capacitance_sensitivity(snr, df, k * x).unwrap() / base / k - 1.0).abs() < 1e-12);
        prop_assert!((capacitance_sensitivity(snr + 20.0 * k.log10(), df, x).unwrap() * k / base - 1.0).abs() < 1e-12);
        prop_assert!((capacitance_sensitivity(snr, k * df, x).unwrap() * k.sqrt() / base - 1.0).abs() < 1e-12);

        let q = charge_sensitivity(snr, df, x).unwrap();
        prop_assert!((charge_sensitivity(snr, df, k * x).unwrap() / q / k - 1.0).abs() < 1e-12);

        let s = oscillating_charge_sensitivity(x, df * 1e-6).unwrap();
        prop_assert!((oscillating_charge_sensitivity(k * x, df * 1e-6).unwrap() / s / k - 1.0).abs() < 1e-12);
        prop_assert!((oscillating_charge_sensitivity(x, k * df * 1e-6).unwrap() / s / k - 1.0).abs() < 1e-12);
    }

    #[test]
    fn readout_time_bandwidth_product(p1 in -60.0..-15.0f64, v0 in 1e-6..1e-3f64, s_c in 1e-20..1e-17f64) {
        let e = ReadoutEstimate::new(&DoubleDotModel::default(), p1, v0, s_c).unwrap();
        prop_assert!((e.tau * e.delta_f - 0.5).abs() < 1e-15);
    }

    #[test]
    fn average_capacitance_monotone_and_self_consistent(v0 in 1e-7..1e-3f64, ratio in 1.0..3.0f64) {
        let dd = DoubleDotModel::default();
        let a = average_capacitance(&dd, v0).unwrap();
        let b = average_capacitance(&dd, v0 * ratio).unwrap();
        prop_assert!(b <= a * (1.0 + 1e-9));
        let tight = average_capacitance_with(&dd, v0, Tolerance::relative(1e-9)).unwrap();
        prop_assert!((a / tight - 1.0).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn snr_invariant_under_gain_offset(seed in 0u64..1000, offset in -40.0..40.0f64) {
        let chain = Chain::default();
        let op = OperatingPoint::default();
        let s = synthesize_spectrum(&chain, &op, &SpectrumSettings::default(), seed).unwrap();
        let f = s.meta_f64("f_c_hz").unwrap().unwrap() + op.modulation.f_m;
        let a = measure_snr(&s, f).unwrap();
        let b = measure_snr(&s.offset(offset), f).unwrap();
        prop_assert!((a.snr_db - b.snr_db).abs() < 1e-9);
    }

    #[test]
    fn synthesis_is_deterministic(seed in any::<u64>()) {
        let chain = Chain::default();
        let op = OperatingPoint::default();
        let settings = SpectrumSettings::default();
        prop_assert_eq!(
            synthesize_spectrum(&chain, &op, &settings, seed).unwrap(),
            synthesize_spectrum(&chain, &op, &settings, seed).unwrap()
        );
    }

    #[test]
    fn round_trip_recovers_capacitance_sensitivity(
        t_n0 in 0.1..2.0f64, p1 in -55.0..-35.0f64, v_m in 3e-4..3e-3f64, base in 0u64..1000,
    ) {
        let mut chain = Chain::default();
        chain.squid.t_n0 = t_n0;
        let op = OperatingPoint {
            p1_dbm: p1,
            modulation: ModulationSpec::varactor(3e3, v_m),
            ..OperatingPoint::default()
        };
        let settings = SpectrumSettings::default();
        let budget = chain.budget(&op).unwrap();
        prop_assume!(budget.regime == Regime::Linear && budget.snr_db(settings.rbw) > 10.0);
        let expected = chain.expected_capacitance_sensitivity(&op).unwrap();
        let mut got: Vec<f64> = (0..32)
            .map(|k| {
                let s = synthesize_spectrum(&chain, &op, &settings, base * 100 + k).unwrap();
                analyze_spectrum(&s, &SnrOptions::default()).unwrap().s_c.unwrap()
            })
            .collect();
        got.sort_by(f64::total_cmp);
        let median = 0.5 * (got[15] + got[16]);
        prop_assert!((median / expected - 1.0).abs() <= 0.2, "{median} vs {expected}");
    }
}

fn noiseless_context() -> SweepContext {
    SweepContext::new(
        Chain::default(),
        SpectrumSettings {
            noise: NoiseMode::Expected,
            ..SpectrumSettings::default()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn protocol_never_worsens_noiseless_objective(
        v_l in -0.3178..-0.3142f64, p1 in -45.0..-28.0f64, seed in 0u64..100,
    ) {
        let ctx = noiseless_context();
        let start = OperatingPoint {
            v_l,
            p1_dbm: p1,
            modulation: ModulationSpec::gate(3e3, 15e-6),
            ..OperatingPoint::default()
        };
        let grid = |c: f64, h: f64| (0..7).map(|i| c - h + h * i as f64 / 3.0).collect::<Vec<_>>();
        let passes = vec![
            SweepPlan::single(Parameter::DrivePower, grid(p1, 6.0), Objective::Charge, seed),
            SweepPlan::single(Parameter::GateVoltage, grid(v_l, 5e-4), Objective::Charge, seed + 1),
            SweepPlan::single(Parameter::VaractorVoltage, grid(6.8, 0.3), Objective::Charge, seed + 2),
        ];
        let r = run_protocol(&passes, &ctx, &start).unwrap();
        prop_assert!(r.objective_trace.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(r.clone(), run_protocol(&passes, &ctx, &start).unwrap());

        // the best point is the minimum, and every record can be reproduced
        for pass in &r.history {
            let best = pass.best_sensitivity();
            prop_assert!(pass.records.iter().all(|rec| best <= rec.sensitivity));
            let plan = &passes[pass.pass_index];
            for rec in pass.records.iter().step_by(3) {
                let seed = rfsense::seed::point_seed(plan.seed, rec.parameter.name(), rec.value);
                let (_, _, value, _) = evaluate(&ctx, &rec.state, plan.objective, seed).unwrap();
                prop_assert_eq!(value, rec.sensitivity);
            }
        }
    }
}

#[test]
fn reordered_grid_keeps_point_values() {
    let ctx = SweepContext::new(Chain::default(), SpectrumSettings::default());
    let start = OperatingPoint::default();
    let forward = SweepPlan::single(
        Parameter::DrivePower,
        vec![-40.0, -35.0, -30.0],
        Objective::Capacitance,
        9,
    );
    let backward = SweepPlan::single(
        Parameter::DrivePower,
        vec![-30.0, -35.0, -40.0],
        Objective::Capacitance,
        9,
    );
    let a = run_pass(&forward, &ctx, &start, 0).unwrap();
    let b = run_pass(&backward, &ctx, &start, 0).unwrap();
    for rec in &a.records {
        let twin = b.records.iter().find(|r| r.value == rec.value).unwrap();
        assert_eq!(rec.sensitivity, twin.sensitivity);
    }
}
