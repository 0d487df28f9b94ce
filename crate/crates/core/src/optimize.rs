//! Coordinate-descent sweeps over the operating point.
//!
//! A [`SweepPlan`] scans one or more parameters in turn, each over an
//! exhaustive grid. Every grid point is evaluated by synthesising and
//! analysing a spectrum, so the objective carries the same noise as a
//! measurement would. Noise draws are keyed on the parameter name and value,
//! not on the grid index, so reordering a grid cannot change any point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{Chain, OperatingPoint};
use crate::circuit::ModulationTarget;
use crate::error::{Error, Result};
use crate::seed::point_seed;
use crate::spectra::{analyze_spectrum, synthesize_spectrum, SnrOptions, SpectrumSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parameter {
    #[serde(rename = "V_L")]
    GateVoltage,
    #[serde(rename = "V_S")]
    VaractorVoltage,
    #[serde(rename = "P1")]
    DrivePower,
    #[serde(rename = "V_M")]
    VaractorModulation,
    #[serde(rename = "dV_L")]
    GateModulation,
}

impl Parameter {
    pub fn name(self) -> &'static str {
        match self {
            Self::GateVoltage => "V_L",
            Self::VaractorVoltage => "V_S",
            Self::DrivePower => "P1",
            Self::VaractorModulation => "V_M",
            Self::GateModulation => "dV_L",
        }
    }

    pub fn get(self, op: &OperatingPoint) -> f64 {
        match self {
            Self::GateVoltage => op.v_l,
            Self::VaractorVoltage => op.v_s,
            Self::DrivePower => op.p1_dbm,
            Self::VaractorModulation | Self::GateModulation => op.modulation.amplitude,
        }
    }

    fn set(self, op: &mut OperatingPoint, value: f64) {
        match self {
            Self::GateVoltage => op.v_l = value,
            Self::VaractorVoltage => op.v_s = value,
            Self::DrivePower => op.p1_dbm = value,
            Self::VaractorModulation | Self::GateModulation => op.modulation.amplitude = value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Objective {
    #[serde(rename = "S_C")]
    Capacitance,
    #[serde(rename = "S_Q")]
    Charge,
}

impl Objective {
    fn target(self) -> ModulationTarget {
        match self {
            Self::Capacitance => ModulationTarget::Varactor,
            Self::Charge => ModulationTarget::Gate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepStep {
    pub parameter: Parameter,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub steps: Vec<SweepStep>,
    pub objective: Objective,
    #[serde(default = "default_true")]
    pub rematch_carrier: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_true() -> bool {
    true
}

impl SweepPlan {
    pub fn single(parameter: Parameter, grid: Vec<f64>, objective: Objective, seed: u64) -> Self {
        Self {
            steps: vec![SweepStep { parameter, grid }],
            objective,
            rematch_carrier: true,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::Usage("sweep plan has no steps".into()));
        }
        let mut seen = Vec::new();
        for step in &self.steps {
            if step.grid.is_empty() {
                return Err(Error::Usage(format!(
                    "empty grid for {}",
                    step.parameter.name()
                )));
            }
            if step.grid.iter().any(|v| !v.is_finite()) {
                return Err(Error::Usage(format!(
                    "non-finite value in {} grid",
                    step.parameter.name()
                )));
            }
            if seen.contains(&step.parameter) {
                return Err(Error::Usage(format!(
                    "{} appears more than once in a pass",
                    step.parameter.name()
                )));
            }
            seen.push(step.parameter);
            let wrong_amplitude = matches!(
                (step.parameter, self.objective),
                (Parameter::VaractorModulation, Objective::Charge)
                    | (Parameter::GateModulation, Objective::Capacitance)
            );
            if wrong_amplitude {
                return Err(Error::Usage(format!(
                    "{} cannot be swept when optimising {:?}",
                    step.parameter.name(),
                    self.objective
                )));
            }
        }
        Ok(())
    }
}

/// Shared, read-only inputs of every evaluation.
#[derive(Debug, Clone)]
pub struct SweepContext {
    pub chain: Chain,
    pub settings: SpectrumSettings,
    pub snr: SnrOptions,
    /// Gate passes warn when `|dG/dV_L|` is below this, S/V.
    pub slope_floor: f64,
}

impl SweepContext {
    pub fn new(chain: Chain, settings: SpectrumSettings) -> Self {
        let dot = &chain.dot;
        let slope_floor = 0.05 * dot.g_max() / dot.peak_width();
        Self {
            chain,
            settings,
            snr: SnrOptions::default(),
            slope_floor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRecord {
    pub step: usize,
    pub parameter: Parameter,
    pub value: f64,
    pub f_c: f64,
    pub snr_db: f64,
    /// Objective value; `+∞` for flagged points.
    pub sensitivity: f64,
    pub flagged: bool,
    #[serde(skip)]
    pub state: OperatingPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub pass_index: usize,
    pub objective: Objective,
    pub records: Vec<SweepRecord>,
    /// Index of the best record.
    pub best: usize,
    pub warnings: Vec<String>,
}

impl SweepResult {
    pub fn best_record(&self) -> &SweepRecord {
        &self.records[self.best]
    }

    pub fn best_sensitivity(&self) -> f64 {
        self.best_record().sensitivity
    }
}

/// Evaluates one operating point and returns `(f_c, snr_dB, objective, flagged)`.
pub fn evaluate(
    ctx: &SweepContext,
    op: &OperatingPoint,
    objective: Objective,
    seed: u64,
) -> Result<(f64, f64, f64, bool)> {
    let spectrum = synthesize_spectrum(&ctx.chain, op, &ctx.settings, seed)?;
    let result = analyze_spectrum(&spectrum, &ctx.snr)?;
    let f_c = spectrum
        .meta_f64(crate::spectra::keys::F_C)?
        .unwrap_or(f64::NAN);
    let value = result.objective(objective == Objective::Charge);
    Ok((f_c, result.snr_db, value, result.flagged))
}

fn argmin(records: &[SweepRecord]) -> usize {
    // first minimum wins; ties resolve by grid order
    records.iter().enumerate().fold(0, |best, (i, r)| {
        if r.sensitivity < records[best].sensitivity {
            i
        } else {
            best
        }
    })
}

/// Scans each step's grid in turn, moving to the step's best point before
/// the next step. The pass's best point is the best of all records.
pub fn run_pass(
    plan: &SweepPlan,
    ctx: &SweepContext,
    state: &OperatingPoint,
    pass_index: usize,
) -> Result<SweepResult> {
    plan.validate()?;
    let mut current = *state;
    current.modulation.target = plan.objective.target();
    if current.f_c.is_none() {
        current.f_c = Some(ctx.chain.carrier_frequency(&current)?);
    }

    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for (step_index, step) in plan.steps.iter().enumerate() {
        let step_records = step
            .grid
            .par_iter()
            .map(|&value| {
                let mut op = current;
                step.parameter.set(&mut op, value);
                if step.parameter == Parameter::VaractorVoltage && plan.rematch_carrier {
                    let g = ctx.chain.dot.conductance(op.v_l, op.v_b);
                    op.f_c = Some(ctx.chain.matched_frequency(op.v_s, g)?);
                }
                let seed = point_seed(plan.seed, step.parameter.name(), value);
                let (f_c, snr_db, sensitivity, flagged) = evaluate(ctx, &op, plan.objective, seed)?;
                Ok(SweepRecord {
                    step: step_index,
                    parameter: step.parameter,
                    value,
                    f_c,
                    snr_db,
                    sensitivity,
                    flagged,
                    state: op,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let best = &step_records[argmin(&step_records)];
        current = best.state;
        if plan.objective == Objective::Charge {
            let slope = ctx
                .chain
                .dot
                .conductance_slope(current.v_l, current.v_b)
                .abs();
            if slope < ctx.slope_floor {
                warnings.push(format!(
                    "pass {pass_index}, {}: |dG/dV_L| = {slope:.3e} S/V at V_L = {} V is below {:.3e} S/V; move to a Coulomb peak flank",
                    step.parameter.name(),
                    current.v_l,
                    ctx.slope_floor
                ));
            }
        }
        records.extend(step_records);
    }
    let best = argmin(&records);
    Ok(SweepResult {
        pass_index,
        objective: plan.objective,
        records,
        best,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    pub final_state: OperatingPoint,
    pub history: Vec<SweepResult>,
    /// Objective of the incumbent state after each pass.
    pub objective_trace: Vec<f64>,
}

impl ProtocolResult {
    /// Best objective recorded anywhere in the protocol.
    pub fn best_recorded(&self) -> f64 {
        self.history
            .iter()
            .map(SweepResult::best_sensitivity)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Runs the passes in order. A pass's best point replaces the current state
/// only if it is at least as good as the incumbent, so the objective never
/// gets worse from one pass to the next.
pub fn run_protocol(
    passes: &[SweepPlan],
    ctx: &SweepContext,
    state: &OperatingPoint,
) -> Result<ProtocolResult> {
    for p in passes {
        p.validate()?;
    }
    let mut current = *state;
    let mut incumbent = f64::INFINITY;
    let mut history = Vec::with_capacity(passes.len());
    let mut objective_trace = Vec::with_capacity(passes.len());
    for (i, plan) in passes.iter().enumerate() {
        let result = run_pass(plan, ctx, &current, i)?;
        let best = result.best_record();
        if best.sensitivity <= incumbent {
            incumbent = best.sensitivity;
            current = best.state;
        }
        objective_trace.push(incumbent);
        history.push(result);
    }
    Ok(ProtocolResult {
        final_state: current,
        history,
        objective_trace,
    })
}

/// The gate-modulation protocol: `V_L → V_S → P1 → dV_L → V_L`, each pass
/// a grid around the current value.
pub fn reference_protocol(start: &OperatingPoint, seed: u64) -> Vec<SweepPlan> {
    let around = |centre: f64, half: f64, n: usize| -> Vec<f64> {
        (0..n)
            .map(|i| centre - half + 2.0 * half * i as f64 / (n - 1) as f64)
            .collect()
    };
    let objective = Objective::Charge;
    vec![
        SweepPlan::single(
            Parameter::GateVoltage,
            around(start.v_l, 1e-3, 41),
            objective,
            seed,
        ),
        SweepPlan::single(
            Parameter::VaractorVoltage,
            around(start.v_s, 1.0, 21),
            objective,
            seed,
        ),
        SweepPlan::single(
            Parameter::DrivePower,
            around(start.p1_dbm, 10.0, 21),
            objective,
            seed,
        ),
        SweepPlan::single(
            Parameter::GateModulation,
            (1..=12).map(|k| 5e-6 * k as f64).collect(),
            objective,
            seed,
        ),
        SweepPlan::single(
            Parameter::GateVoltage,
            around(start.v_l, 1e-3, 41),
            objective,
            seed,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::ModulationSpec;
    use crate::spectra::NoiseMode;

    fn quiet_ctx() -> SweepContext {
        SweepContext::new(
            Chain::default(),
            SpectrumSettings {
                noise: NoiseMode::Expected,
                ..SpectrumSettings::default()
            },
        )
    }

    fn gate_op() -> OperatingPoint {
        OperatingPoint {
            modulation: ModulationSpec::gate(3e3, 15e-6),
            ..OperatingPoint::default()
        }
    }

    #[test]
    fn single_point_grid() {
        let ctx = quiet_ctx();
        let plan = SweepPlan::single(Parameter::DrivePower, vec![-30.0], Objective::Charge, 1);
        let r = run_pass(&plan, &ctx, &gate_op(), 0).unwrap();
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.best, 0);
    }

    #[test]
    fn grid_order_does_not_matter() {
        let ctx = SweepContext::new(Chain::default(), SpectrumSettings::default());
        let grid: Vec<f64> = (0..9).map(|i| -0.3162 + 1e-4 * i as f64).collect();
        let mut reversed = grid.clone();
        reversed.reverse();
        let a = run_pass(
            &SweepPlan::single(Parameter::GateVoltage, grid, Objective::Charge, 7),
            &ctx,
            &gate_op(),
            0,
        )
        .unwrap();
        let b = run_pass(
            &SweepPlan::single(Parameter::GateVoltage, reversed, Objective::Charge, 7),
            &ctx,
            &gate_op(),
            0,
        )
        .unwrap();
        assert_eq!(a.best_record().value, b.best_record().value);
        assert_eq!(a.best_sensitivity(), b.best_sensitivity());
    }

    #[test]
    fn argmin_matches_dense_brute_force() {
        let ctx = quiet_ctx();
        let coarse: Vec<f64> = (0..11).map(|i| -0.3164 + 2e-4 * i as f64 / 2.0).collect();
        let dense: Vec<f64> = (0..101).map(|i| -0.3164 + 1e-5 * i as f64).collect();
        let r = run_pass(
            &SweepPlan::single(Parameter::GateVoltage, dense.clone(), Objective::Charge, 0),
            &ctx,
            &gate_op(),
            0,
        )
        .unwrap();
        let brute = dense
            .iter()
            .map(|&v| {
                let op = OperatingPoint {
                    v_l: v,
                    f_c: r.records[0].state.f_c,
                    ..gate_op()
                };
                (v, evaluate(&ctx, &op, Objective::Charge, 0).unwrap().2)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_eq!(r.best_record().value, brute.0);
        assert!(coarse.len() < dense.len());
    }

    #[test]
    fn identical_passes_are_idempotent() {
        let ctx = quiet_ctx();
        let plan = SweepPlan::single(
            Parameter::GateVoltage,
            (0..21).map(|i| -0.3166 + 5e-5 * i as f64).collect(),
            Objective::Charge,
            3,
        );
        let out = run_protocol(&[plan.clone(), plan], &ctx, &gate_op()).unwrap();
        assert_eq!(
            out.history[0].best_record().value,
            out.history[1].best_record().value
        );
        assert_eq!(out.objective_trace[0], out.objective_trace[1]);
    }

    #[test]
    fn empty_protocol_leaves_state() {
        let ctx = quiet_ctx();
        let op = gate_op();
        let out = run_protocol(&[], &ctx, &op).unwrap();
        assert_eq!(out.final_state, op);
        assert!(out.history.is_empty());
    }

    #[test]
    fn plan_validation() {
        let bad = SweepPlan::single(
            Parameter::VaractorModulation,
            vec![1e-4],
            Objective::Charge,
            0,
        );
        assert!(bad.validate().is_err());
        let empty = SweepPlan::single(Parameter::GateVoltage, vec![], Objective::Charge, 0);
        assert!(empty.validate().is_err());
        let mut dup = SweepPlan::single(Parameter::GateVoltage, vec![0.0], Objective::Charge, 0);
        dup.steps.push(dup.steps[0].clone());
        assert!(dup.validate().is_err());
    }

    #[test]
    fn blockade_gate_pass_warns() {
        let ctx = quiet_ctx();
        let mid = -0.3259;
        let plan = SweepPlan::single(Parameter::GateVoltage, vec![mid], Objective::Charge, 0);
        let r = run_pass(&plan, &ctx, &gate_op(), 0).unwrap();
        assert_eq!(r.warnings.len(), 1);
        assert!(r.best_record().flagged);
        assert_eq!(r.best_sensitivity(), f64::INFINITY);
    }
}
