//! The `rfsense` command-line tool.
//!
//! Exit codes: 0 on success (flagged sensitivities included), 2 for
//! configuration or usage errors, 3 for I/O and input-file errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::config::{linspace, ChainConfig, ProtocolFile, Setup};
use crate::constants::ELEMENTARY_CHARGE;
use crate::dot::stability_grid;
use crate::error::{Error, Result};
use crate::optimize::{run_protocol, Objective, SweepContext};
use crate::readout::readout_time_sweep;
use crate::seed::item_seed;
use crate::spectra::{
    analyze_spectrum, read_spectrum, synthesize_spectrum, write_spectrum, SensitivityResult,
};

#[derive(Debug, Parser)]
#[command(
    name = "rfsense",
    version,
    about = "RF reflectometry chain simulation and analysis"
)]
pub struct Cli {
    /// JSON configuration; defaults apply to every missing key.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides `analysis.seed`.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Validate inputs without computing or writing anything.
    #[arg(long, global = true)]
    pub dry_run: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reflection traces over frequency and the best match.
    Match,
    /// Synthesize a sideband spectrum or analyze a measured one.
    Spectrum(SpectrumArgs),
    /// Readout time as a function of drive power.
    Readout,
    /// Conductance, current and demodulated voltage over (V_L, V_B).
    Stability,
    /// Run a sequential sensitivity optimisation protocol.
    Optimize {
        #[arg(long, value_name = "FILE")]
        protocol: PathBuf,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SpectrumArgs {
    /// Spectrum CSV to analyze.
    #[arg(long, value_name = "FILE")]
    pub analyze: Option<PathBuf>,
    /// Synthesize a spectrum from the configured chain.
    #[arg(long)]
    pub synthesize: bool,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::Parse { .. } => 3,
        _ => 2,
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let (config, base) = match &cli.config {
        Some(p) => (
            ChainConfig::load(p)?,
            p.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => (ChainConfig::default(), PathBuf::from(".")),
    };
    let mut setup = config.build(&base)?;
    if let Some(s) = cli.seed {
        setup.seed = s;
    }
    let protocol = match &cli.command {
        Command::Optimize { protocol } => Some(ProtocolFile::load(protocol)?),
        _ => None,
    };
    if let Command::Spectrum(SpectrumArgs {
        analyze: Some(file),
        ..
    }) = &cli.command
    {
        if !file.is_file() {
            return Err(Error::io(
                file,
                std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
            ));
        }
    }
    if cli.dry_run {
        match &protocol {
            Some(p) => println!(
                "configuration and protocol valid ({} passes)",
                p.passes.len()
            ),
            None => println!("configuration valid"),
        }
        return Ok(());
    }
    std::fs::create_dir_all(&cli.out).map_err(|e| Error::io(&cli.out, e))?;
    match &cli.command {
        Command::Match => cmd_match(&config, &setup, &cli.out),
        Command::Spectrum(args) => cmd_spectrum(&setup, args, &cli.out),
        Command::Readout => cmd_readout(&config, &setup, &cli.out),
        Command::Stability => cmd_stability(&config, &setup, &cli.out),
        Command::Optimize { .. } => cmd_optimize(&setup, protocol.as_ref().unwrap(), &cli.out),
    }
}

fn write_csv<R>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()>
where
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let to_io = |e: csv::Error| Error::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(to_io)?;
    w.write_record(header).map_err(to_io)?;
    for row in rows {
        w.write_record(row).map_err(to_io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn num(x: f64) -> String {
    crate::spectra::format_f64(x)
}

pub fn cmd_match(config: &ChainConfig, setup: &Setup, out: &Path) -> Result<()> {
    let m = &config.match_sweep;
    let circuit = &setup.chain.circuit;
    let freqs = linspace(m.f_lo_hz, m.f_hi_hz, m.points);
    let mut rows = Vec::with_capacity(m.v_s_v.len() * freqs.len());
    for &v_s in &m.v_s_v {
        for &f in &freqs {
            let g = circuit.reflection_coefficient(v_s, f)?;
            rows.push([
                num(v_s),
                num(f),
                num(g.norm()),
                num(20.0 * g.norm().log10()),
                num(g.arg()),
            ]);
        }
    }
    write_csv(
        &out.join("match_traces.csv"),
        &["V_S_v", "f_hz", "gamma_mag", "gamma_dB", "gamma_phase_rad"],
        rows,
    )?;

    let matches = m
        .v_s_v
        .iter()
        .map(|&v| circuit.find_best_match(v, m.f_lo_hz, m.f_hi_hz))
        .collect::<Result<Vec<_>>>()?;
    let best = matches
        .iter()
        .min_by(|a, b| a.depth_db.total_cmp(&b.depth_db))
        .unwrap();
    let entry = |p: &crate::circuit::MatchPoint| {
        json!({
            "V_S_v": p.v_s,
            "f_C_hz": p.frequency,
            "depth_dB": p.depth_db,
            "at_boundary": p.at_boundary,
        })
    };
    write_json(
        &out.join("match_summary.json"),
        &json!({
            "best": entry(best),
            "f0_at_best_hz": circuit.resonant_frequency(best.v_s)?,
            "per_v_s": matches.iter().map(entry).collect::<Vec<_>>(),
        }),
    )?;
    println!(
        "best match: V_S = {} V, f_C = {:.6} MHz, depth = {:.1} dB{}",
        best.v_s,
        best.frequency / 1e6,
        best.depth_db,
        if best.at_boundary {
            " (at window edge)"
        } else {
            ""
        }
    );
    Ok(())
}

pub fn cmd_spectrum(setup: &Setup, args: &SpectrumArgs, out: &Path) -> Result<()> {
    let spectrum = match &args.analyze {
        Some(file) => read_spectrum(file)?,
        None => {
            let s = synthesize_spectrum(&setup.chain, &setup.op, &setup.settings, setup.seed)?;
            write_spectrum(&out.join("spectrum.csv"), &s)?;
            s
        }
    };
    let result = analyze_spectrum(&spectrum, &setup.snr)?;
    write_json(&out.join("sensitivity.json"), &result)?;
    report_sensitivity(&result);
    Ok(())
}

fn report_sensitivity(r: &SensitivityResult) {
    print!("SNR = {:.2} dB in {} Hz", r.snr_db, r.delta_f);
    if let Some(s) = r.s_c {
        print!(", S_C = {:.4} aF/rtHz", s * 1e18);
    }
    if let Some(s) = r.s_q {
        print!(", S_Q = {:.2} ue/rtHz", s * 1e6);
    }
    if let Some(s) = r.s_s {
        print!(", S_S = {:.3e} e/rtHz", s / ELEMENTARY_CHARGE);
    }
    println!(" (±{:.1}%)", 100.0 * r.uncertainty);
    if r.flagged {
        println!("flagged: sideband not above the noise floor");
    }
}

pub fn cmd_readout(config: &ChainConfig, setup: &Setup, out: &Path) -> Result<()> {
    let sweep = readout_time_sweep(
        &setup.chain.double_dot,
        &setup.sc_curve,
        &setup.v0_map,
        &config.readout.p1_grid_dbm,
    )?;
    for p in &sweep.excluded {
        eprintln!("warning: P1 = {p} dBm outside the S_C curve, skipped");
    }
    write_csv(
        &out.join("readout_sweep.csv"),
        &["P1_dBm", "V0_vrms", "Cbar_F", "delta_f_Hz", "tau_s"],
        sweep.estimates.iter().map(|e| {
            [
                num(e.p1_dbm),
                num(e.v0),
                num(e.c_bar),
                num(e.delta_f),
                num(e.tau),
            ]
        }),
    )?;
    let best = sweep.best();
    write_json(
        &out.join("readout_summary.json"),
        &json!({
            "points": sweep.estimates.len(),
            "excluded_P1_dBm": sweep.excluded,
            "best": best,
            "peak_capacitance_F": setup.chain.double_dot.peak_capacitance(),
            "peak_width_v": setup.chain.double_dot.peak_width(),
        }),
    )?;
    match best {
        Some(b) => println!(
            "minimum readout time {:.2} ns at P1 = {} dBm (V0 = {:.1} uV, C_bar = {:.2} aF)",
            b.tau * 1e9,
            b.p1_dbm,
            b.v0 * 1e6,
            b.c_bar * 1e18
        ),
        None => println!("no grid point inside the S_C curve"),
    }
    Ok(())
}

pub fn cmd_stability(config: &ChainConfig, setup: &Setup, out: &Path) -> Result<()> {
    let st = &config.stability;
    let chain = &setup.chain;
    let v_l = linspace(st.v_l_min_v, st.v_l_max_v, st.v_l_points);
    let v_b = linspace(st.v_b_min_v, st.v_b_max_v, st.v_b_points);
    let f_c = chain.carrier_frequency(&setup.op)?;
    let lo_phase = match st.lo_phase_rad {
        Some(p) => p,
        None => chain.default_lo_phase(&setup.op, f_c)?,
    };
    let grid = stability_grid(&chain.dot, &v_l, &v_b);
    let mut rows = Vec::with_capacity(grid.len());
    for p in &grid {
        let v_d = chain.demodulated_voltage(&setup.op, f_c, p.v_l, p.v_b, lo_phase)?;
        rows.push([num(p.v_l), num(p.v_b), num(p.g), num(p.i), num(v_d)]);
    }
    write_csv(
        &out.join("stability.csv"),
        &["V_L", "V_B", "G", "I", "V_D"],
        rows,
    )?;
    println!(
        "stability diagram: {} x {} points at f_C = {:.6} MHz, LO phase {:.4} rad",
        v_l.len(),
        v_b.len(),
        f_c / 1e6,
        lo_phase
    );
    Ok(())
}

pub fn cmd_optimize(setup: &Setup, protocol: &ProtocolFile, out: &Path) -> Result<()> {
    let mut ctx = SweepContext::new(setup.chain.clone(), setup.settings);
    ctx.snr = setup.snr.clone();
    if let Some(f) = protocol.slope_floor_s_per_v {
        ctx.slope_floor = f;
    }
    let passes: Vec<_> = protocol
        .passes
        .iter()
        .map(|p| {
            let mut p = p.clone();
            p.seed = item_seed(setup.seed, p.seed);
            p
        })
        .collect();
    let result = run_protocol(&passes, &ctx, &setup.op)?;

    let mut summary_passes = Vec::new();
    for (i, pass) in result.history.iter().enumerate() {
        write_csv(
            &out.join(format!("pass_{i:02}.csv")),
            &[
                "step",
                "parameter",
                "value",
                "P1_dBm",
                "V_S_v",
                "V_L_v",
                "amplitude_vrms",
                "f_C_hz",
                "snr_dB",
                "sensitivity",
                "flagged",
            ],
            pass.records.iter().map(|r| {
                [
                    r.step.to_string(),
                    r.parameter.name().to_string(),
                    num(r.value),
                    num(r.state.p1_dbm),
                    num(r.state.v_s),
                    num(r.state.v_l),
                    num(r.state.modulation.amplitude),
                    num(r.f_c),
                    num(r.snr_db),
                    num(r.sensitivity),
                    r.flagged.to_string(),
                ]
            }),
        )?;
        for w in &pass.warnings {
            eprintln!("warning: {w}");
        }
        let best = pass.best_record();
        summary_passes.push(json!({
            "pass": i,
            "parameters": pass.records.iter().map(|r| r.parameter.name()).fold(Vec::<&str>::new(), |mut v, n| { if !v.contains(&n) { v.push(n) } v }),
            "points": pass.records.len(),
            "best_parameter": best.parameter.name(),
            "best_value": best.value,
            "best_sensitivity": finite_or_null(best.sensitivity),
            "incumbent_after": finite_or_null(result.objective_trace[i]),
            "warnings": pass.warnings,
        }));
        println!(
            "pass {i}: best {} = {} -> {}",
            best.parameter.name(),
            best.value,
            format_objective(pass.objective, best.sensitivity)
        );
    }
    let s = &result.final_state;
    write_json(
        &out.join("protocol_summary.json"),
        &json!({
            "passes": summary_passes,
            "best_recorded_sensitivity": finite_or_null(result.best_recorded()),
            "final_state": {
                "P1_dBm": s.p1_dbm,
                "V_S_v": s.v_s,
                "V_L_v": s.v_l,
                "V_B_v": s.v_b,
                "f_C_hz": s.f_c,
                "modulation": s.modulation,
            },
        }),
    )?;
    Ok(())
}

fn finite_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        serde_json::Value::Null
    }
}

fn format_objective(objective: Objective, value: f64) -> String {
    match objective {
        _ if !value.is_finite() => "no sideband".to_string(),
        Objective::Capacitance => format!("S_C = {:.4} aF/rtHz", value * 1e18),
        Objective::Charge => format!("S_Q = {:.2} ue/rtHz", value * 1e6),
    }
}
