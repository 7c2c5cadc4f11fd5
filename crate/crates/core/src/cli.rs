//! Command surface of the `dwell` binary.
//!
//! Exit codes: `0` success, `1` a check failed, `2` bad config or input,
//! `3` an output file could not be written. Standard output carries JSON
//! (or the trajectory CSV for `simulate` without `--out`).

use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{periodic_signal, Run, RunConfig};
use crate::neuron::{self, certify};
use crate::nonlinear::{affine_as_nonlinear, nl_dwell_time, nl_enclosing_level};
use crate::numfmt::json17;
use crate::oracle::{self, boundary_max, fd_decay_check, inclusion_check};
use crate::planar::{dwell_time, dwell_time_weak, enclosing_level, lyapunov_residual, ModeId};
use crate::sim::{read_csv, simulate, verify_trapping, write_csv, Trajectory};
use crate::svg::{Ellipse, PhasePortrait};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_OUTPUT: i32 = 3;

/// Random instances checked by `oracle` on top of the configured modes.
const ORACLE_INSTANCES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Verb {
    /// Non-spiking certificate of a neuron config.
    Certify,
    /// Exact simulation; CSV trajectory and optional SVG portrait.
    Simulate,
    /// Trapping-region checks on a trajectory CSV.
    Verify,
    /// Per-transition enclosing levels and dwell bounds.
    Dwell,
    /// Brute-force cross-checks of the closed forms.
    Oracle,
    /// Grid over `T_I = T_0` and `k`.
    Sweep,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "dwell", version, about = "Dwell-time certificates for switched affine systems")]
pub struct Cli {
    pub verb: Verb,
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output file (CSV for simulate, JSON for sweep).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// SVG phase portrait (simulate).
    #[arg(long, value_name = "PATH")]
    pub svg: Option<PathBuf>,
    /// Trajectory CSV to verify; without it the config is simulated first.
    #[arg(long, value_name = "PATH")]
    pub traj: Option<PathBuf>,
    /// Boundary samples per oracle check.
    #[arg(long, value_name = "N", default_value_t = 4096)]
    pub samples: usize,
    /// Seed for randomized checks; overrides the config seed.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

/// Failure of a verb, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn input_err(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.to_string(),
    }
}

fn output_err(path: &Path, e: io::Error) -> Failure {
    Failure {
        code: EXIT_OUTPUT,
        message: format!("cannot write {}: {e}", path.display()),
    }
}

/// Parses `args` (including the program name) and runs the verb.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, stdout, stderr),
        Err(e) => {
            let _ = write!(stderr, "{e}");
            if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_OK
            }
        }
    }
}

pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = load(&cli.config).and_then(|run| match cli.verb {
        Verb::Certify => cmd_certify(&run, stdout, stderr),
        Verb::Simulate => cmd_simulate(&run, cli, stdout),
        Verb::Verify => cmd_verify(&run, cli, stdout),
        Verb::Dwell => cmd_dwell(&run, stdout),
        Verb::Oracle => cmd_oracle(&run, cli, stdout),
        Verb::Sweep => cmd_sweep(&run, cli, stdout),
    });
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn load(path: &Path) -> Result<Run, Failure> {
    RunConfig::load(path)
        .and_then(|c| c.resolve())
        .map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn print_json(stdout: &mut dyn Write, v: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).expect("JSON values serialize");
    writeln!(stdout, "{text}").map_err(|e| output_err(Path::new("<stdout>"), e))
}

/// Writes `bytes` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let written = fs::write(&tmp, bytes).and_then(|_| fs::rename(&tmp, path));
    if written.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    written
}

fn cmd_certify(run: &Run, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let p = run
        .neuron
        .as_ref()
        .ok_or_else(|| input_err("certify needs a `neuron` block"))?;
    let cert = certify(p, run.k).map_err(input_err)?;
    print_json(stdout, &cert.to_json())?;
    if !cert.admits_initial(p, &run.x0) {
        let _ = writeln!(
            stderr,
            "x0 = ({}, {}) lies outside the OFF level set at k = {}; the certificate does not apply",
            run.x0.x, run.x0.y, run.k
        );
        return Ok(EXIT_CHECK_FAILED);
    }
    Ok(if cert.passes() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn simulate_run(run: &Run) -> Result<Trajectory, Failure> {
    simulate(&run.modes, &run.signal, &run.x0, run.dt, run.reset.as_ref()).map_err(input_err)
}

fn portrait(run: &Run, traj: &Trajectory) -> Result<PhasePortrait, Failure> {
    let mut ellipses = Vec::new();
    let mut push = |set, label: String, stroke: &str, fill: &str| {
        ellipses.push(Ellipse {
            set,
            label,
            stroke: stroke.into(),
            fill: fill.into(),
        })
    };
    if run.neuron.is_some() {
        let off = run.modes.get(&ModeId::from(neuron::OFF)).map_err(input_err)?.lyapunov();
        let on = run.modes.get(&ModeId::from(neuron::ON)).map_err(input_err)?.lyapunov();
        let k_bar = enclosing_level(&off, &on, run.k).map_err(input_err)?;
        push(on.sublevel(k_bar), format!("N_ON^{k_bar:.6}"), "#7f8c8d", "#ecf0f1");
        push(off.sublevel(run.k), format!("N_OFF^{}", run.k), "#2c3e50", "#95a5a6");
        push(on.sublevel(run.k), format!("N_ON^{}", run.k), "#2c3e50", "#95a5a6");
    } else {
        for (old, new) in transitions(run) {
            let (vo, vn) = (
                run.modes.get(&old).map_err(input_err)?.lyapunov(),
                run.modes.get(&new).map_err(input_err)?.lyapunov(),
            );
            let k_i = enclosing_level(&vo, &vn, run.k).map_err(input_err)?;
            push(vn.sublevel(k_i), format!("N_{new}^{k_i:.6} ({old}>{new})"), "#7f8c8d", "none");
        }
        for m in run.modes.iter() {
            push(m.lyapunov().sublevel(run.k), format!("N_{}^{}", m.id(), run.k), "#2c3e50", "#95a5a6");
        }
    }
    Ok(PhasePortrait {
        trajectory: traj.samples.iter().map(|s| s.x).collect(),
        ellipses,
        threshold: run.v_th,
        title: format!("phase portrait, k = {}", run.k),
    })
}

fn cmd_simulate(run: &Run, cli: &Cli, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let traj = simulate_run(run)?;
    let mut csv = Vec::new();
    write_csv(&traj, &mut csv).expect("writing to memory");
    if let Some(svg) = &cli.svg {
        let text = portrait(run, &traj)?.render();
        write_atomic(svg, text.as_bytes()).map_err(|e| output_err(svg, e))?;
    }
    match &cli.out {
        Some(out) => {
            write_atomic(out, &csv).map_err(|e| output_err(out, e))?;
            let switches = traj.events.iter().filter(|e| e.kind == crate::sim::EventKind::Switch).count();
            print_json(
                stdout,
                &json!({
                    "samples": traj.samples.len(),
                    "switches": switches,
                    "resets": traj.resets().count(),
                    "max_x1": json17(traj.max_first_coordinate()),
                    "csv": out.display().to_string(),
                    "svg": cli.svg.as_ref().map(|p| p.display().to_string()),
                }),
            )?;
        }
        None => stdout.write_all(&csv).map_err(|e| output_err(Path::new("<stdout>"), e))?,
    }
    Ok(EXIT_OK)
}

fn cmd_verify(run: &Run, cli: &Cli, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let traj = match &cli.traj {
        Some(path) => {
            let file = fs::File::open(path).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
            read_csv(BufReader::new(file)).map_err(|e| input_err(format!("{}: {e}", path.display())))?
        }
        None => simulate_run(run)?,
    };
    if traj.resets().next().is_some() {
        return Err(input_err("trajectory contains resets; trapping checks apply to reset-free runs only"));
    }
    let report = verify_trapping(&traj, &run.modes, run.k).map_err(input_err)?;
    print_json(stdout, &report.to_json())?;
    Ok(if report.overall { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// Distinct consecutive mode pairs of the signal, in order of appearance.
fn transitions(run: &Run) -> Vec<(ModeId, ModeId)> {
    let order = run.signal.mode_order();
    let mut out: Vec<(ModeId, ModeId)> = Vec::new();
    for w in order.windows(2) {
        let pair = (w[0].clone(), w[1].clone());
        if !out.contains(&pair) {
            out.push(pair);
        }
    }
    out
}

fn cmd_dwell(run: &Run, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let mut rows = Vec::new();
    for (old_id, new_id) in transitions(run) {
        let old = run.modes.get(&old_id).map_err(input_err)?;
        let new = run.modes.get(&new_id).map_err(input_err)?;
        let (vo, vn) = (old.lyapunov(), new.lyapunov());
        let k_i = enclosing_level(&vo, &vn, run.k).map_err(input_err)?;
        let tau2 = dwell_time(vn.eps, run.k, k_i).map_err(input_err)?;
        let tau5 = dwell_time_weak(new, &vo.center, &vn.center, run.k).map_err(input_err)?;
        let (nl_old, nl_new) = (affine_as_nonlinear(old), affine_as_nonlinear(new));
        let k_ball = nl_enclosing_level(&nl_old, &nl_new, run.k).map_err(input_err)?;
        let tau4 = nl_dwell_time(&nl_new, run.k, k_ball).map_err(input_err)?;
        rows.push(json!({
            "from": old_id.as_str(),
            "to": new_id.as_str(),
            "k_i": json17(k_i),
            "tau_theorem2": json17(tau2),
            "tau_remark5": json17(tau5),
            "k_ball": json17(k_ball),
            "tau_theorem4": json17(tau4),
        }));
    }
    print_json(stdout, &json!({ "k": json17(run.k), "transitions": rows }))?;
    Ok(EXIT_OK)
}

fn cmd_oracle(run: &Run, cli: &Cli, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let seed = cli.seed.or(run.seed).unwrap_or(oracle::DEFAULT_SEED);
    let samples = cli.samples;
    let mut pass = true;
    let mut modes = Vec::new();
    for m in run.modes.iter() {
        let residual = lyapunov_residual(m).amax();
        let decay = fd_decay_check(m, samples.max(100), seed).map_err(input_err)?;
        let ok = residual <= 1e-12 && decay.worst <= 1e-9 && decay.witness.abs() <= 1e-6;
        pass &= ok;
        modes.push(json!({
            "id": m.id().as_str(),
            "lyapunov_residual": json17(residual),
            "worst_decay_ratio": json17(decay.worst),
            "tightness_witness": json17(decay.witness),
            "pass": ok,
        }));
    }
    let mut rows = Vec::new();
    for (old_id, new_id) in transitions(run) {
        let vo = run.modes.get(&old_id).map_err(input_err)?.lyapunov();
        let vn = run.modes.get(&new_id).map_err(input_err)?.lyapunov();
        let k_i = enclosing_level(&vo, &vn, run.k).map_err(input_err)?;
        let sampled = boundary_max(&vo, run.k, &vn, samples).map_err(input_err)?;
        let rel = (k_i - sampled).abs() / k_i;
        let inc = inclusion_check(&vo.sublevel(run.k), &vn.sublevel(k_i), samples).map_err(input_err)?;
        let ok = rel <= 1e-5 && inc.holds;
        pass &= ok;
        rows.push(json!({
            "from": old_id.as_str(),
            "to": new_id.as_str(),
            "k_i": json17(k_i),
            "boundary_max": json17(sampled),
            "rel_err": json17(rel),
            "inclusion_holds": inc.holds,
            "worst_violation": json17(inc.worst_violation),
            "pass": ok,
        }));
    }
    let suite = oracle::run_suite(ORACLE_INSTANCES, samples, seed).map_err(input_err)?;
    pass &= suite.passes();
    print_json(
        stdout,
        &json!({ "modes": modes, "transitions": rows, "random": suite.to_json(), "pass": pass }),
    )?;
    Ok(if pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[derive(Debug, Clone)]
struct SweepRow {
    period: f64,
    k: f64,
    tau_d: f64,
    dwell_ok: bool,
    trap_ok: bool,
    switch_failures: usize,
    max_x1: f64,
}

fn sweep_point(run: &Run, first: &ModeId, second: &ModeId, period: f64, k: f64, periods: usize) -> Result<SweepRow, Failure> {
    let signal = periodic_signal(first, second, period, period, periods).map_err(input_err)?;
    let order = [first.clone(), second.clone(), first.clone()];
    let tau_d = crate::planar::min_dwell_schedule(&run.modes, &order, k)
        .map_err(input_err)?
        .iter()
        .map(|s| s.tau)
        .fold(0.0, f64::max);
    let traj = simulate(&run.modes, &signal, &run.x0, period / 1000.0, None).map_err(input_err)?;
    let report = verify_trapping(&traj, &run.modes, k).map_err(input_err)?;
    Ok(SweepRow {
        period,
        k,
        tau_d,
        dwell_ok: period >= tau_d,
        trap_ok: report.overall,
        switch_failures: report.switch_failures(),
        max_x1: traj.max_first_coordinate(),
    })
}

fn cmd_sweep(run: &Run, cli: &Cli, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let spec = run.sweep.as_ref().ok_or_else(|| input_err("sweep needs a `sweep` block"))?;
    let (first, second) = run
        .periodic_pair
        .as_ref()
        .ok_or_else(|| input_err("sweep needs a neuron or exactly two modes"))?;
    let grid: Vec<(f64, f64)> = spec
        .periods_grid
        .iter()
        .flat_map(|&t| spec.k.iter().map(move |&k| (t, k)))
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(t, k)| sweep_point(run, first, second, t, k, spec.periods))
        .collect::<Result<Vec<_>, _>>()?;
    // A dwell-compliant point that escapes would contradict the bound.
    let sound = rows.iter().all(|r| !r.dwell_ok || r.trap_ok);
    let table = json!({
        "periods": spec.periods,
        "rows": rows.iter().map(|r| json!({
            "T": json17(r.period),
            "k": json17(r.k),
            "tau_d": json17(r.tau_d),
            "dwell_ok": r.dwell_ok,
            "trap_ok": r.trap_ok,
            "switch_failures": r.switch_failures,
            "max_v": json17(r.max_x1),
        })).collect::<Vec<_>>(),
        "sound": sound,
    });
    match &cli.out {
        Some(out) => {
            let text = serde_json::to_string_pretty(&table).expect("JSON values serialize") + "\n";
            write_atomic(out, text.as_bytes()).map_err(|e| output_err(out, e))?;
        }
        None => print_json(stdout, &table)?,
    }
    Ok(if sound { EXIT_OK } else { EXIT_CHECK_FAILED })
}
