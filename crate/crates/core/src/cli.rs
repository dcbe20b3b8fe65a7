//! Subcommands behind the `pcflab` binary.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime error,
//! 3 verification failure.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{parse_config, ExperimentConfig, Horizon};
use crate::curve::{construct_curve, CurveGeometry};
use crate::error::{Error, Result};
use crate::flow::{estimated_extinction_time, run_flow, FlowConfig, FlowCurve, FlowState, Snapshot, TerminalReason};
use crate::identities::{
    first_block_spot_check, first_order_condition_check, kappa_evolution_residual, max_trig_residual, mu0_sweep,
    rewrite_equivalence_suite, KappaStudy, KappaVariant, Resolution, ResidualReport, TheoremRunConfig,
};
use crate::noncollapse::{mu_report, oracle_radii, NonCollapseReport};
use crate::par::{self, Exec};
use crate::report::{fmt_f64, write_csv, write_json, write_snapshot_svg, NonCollapseFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Verify,
    Noncollapse,
    SweepMu0,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub command: Command,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Reads, overrides and validates the config, and prepares the output
/// directory. Every failure here is a config error.
pub fn load(inv: &Invocation) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(&inv.config)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", inv.config.display())))?;
    let mut cfg = parse_config(&text)?;
    if let Some(out) = &inv.out {
        cfg.outputs = out.clone();
    }
    if let Some(seed) = inv.seed {
        cfg.seed = seed;
    }
    prepare_output_dir(&cfg.outputs)?;
    Ok(cfg)
}

fn prepare_output_dir(dir: &Path) -> Result<()> {
    let fail = |e: std::io::Error| Error::config(format!("output directory {} is not writable: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(fail)?;
    let probe = dir.join(".pcflab-write-probe");
    std::fs::write(&probe, b"").map_err(fail)?;
    std::fs::remove_file(&probe).map_err(fail)?;
    Ok(())
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::ConfigInvalid(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

/// Runs one invocation and returns its exit code, reporting errors on
/// stderr.
pub fn run(inv: &Invocation) -> i32 {
    let cfg = match load(inv) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
    };
    let result = match inv.command {
        Command::Simulate => cmd_simulate(&cfg).map(|_| true),
        Command::Verify => cmd_verify(&cfg),
        Command::Noncollapse => cmd_noncollapse(&cfg).map(|_| true),
        Command::SweepMu0 => cmd_sweep_mu0(&cfg).map(|_| true),
    };
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("verification failed; see {}", cfg.outputs.join("verify.json").display());
            EXIT_VERIFY
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn hash_comment(hash: &str) -> String {
    format!("config_hash={hash}")
}

fn write_curve_csv(path: &Path, hash: &str, state: &FlowState, g: &CurveGeometry) -> Result<()> {
    let FlowCurve::Support(c) = &state.curve else {
        return Err(Error::config("curve files need a support-form state"));
    };
    let h = c.values();
    let rows = (0..g.len()).map(|i| {
        vec![fmt_f64(c.theta(i)), fmt_f64(g.position[i].x), fmt_f64(g.position[i].y), fmt_f64(g.kappa[i]), fmt_f64(h[i])]
    });
    write_csv(path, &[hash_comment(hash)], &["theta", "x", "y", "kappa", "h"], rows)
}

fn write_noncollapse(path: &Path, hash: &str, state: &FlowState, g: &CurveGeometry, r: &NonCollapseReport) -> Result<()> {
    let radii = oracle_radii(g, Exec::default())?;
    write_json(path, &NonCollapseFile::new(hash, state.t, state.steps, g, r, &radii))
}

#[derive(Debug, Clone, Serialize)]
struct SnapshotIndex {
    k: usize,
    step: u64,
    t: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub config_hash: String,
    pub terminal_reason: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub t_final: f64,
    pub steps: u64,
    pub t_hat: f64,
    pub t_end: f64,
    pub mu_initial: f64,
    pub mu_final: f64,
    pub mu_max: f64,
    pub isoperimetric_initial: f64,
    pub isoperimetric_final: f64,
    snapshots: Vec<SnapshotIndex>,
}

struct SimulateMonitor<'a> {
    cfg: &'a ExperimentConfig,
    hash: &'a str,
    rows: Vec<Vec<String>>,
    mus: Vec<f64>,
    isos: Vec<f64>,
    snapshots: Vec<SnapshotIndex>,
    last_step: Option<u64>,
    failure: Option<Error>,
}

impl SimulateMonitor<'_> {
    fn snapshot(&mut self, snap: &Snapshot, g: &CurveGeometry, r: &NonCollapseReport) -> Result<()> {
        let k = self.snapshots.len();
        let dir = &self.cfg.outputs;
        write_curve_csv(&dir.join(format!("curve_{k}.csv")), self.hash, &snap.state, g)?;
        write_snapshot_svg(g, Some(r), self.hash, &dir.join(format!("curve_{k}.svg")))?;
        write_noncollapse(&dir.join(format!("noncollapse_{k}.json")), self.hash, &snap.state, g, r)?;
        self.snapshots.push(SnapshotIndex { k, step: snap.state.steps, t: snap.state.t });
        Ok(())
    }

    fn record(&mut self, snap: &Snapshot, g: &CurveGeometry, force_files: bool) -> Result<()> {
        let r = mu_report(g)?;
        let st = &snap.stats;
        self.rows.push(
            [snap.state.t, snap.state.last_dt, st.area, st.length, st.isoperimetric, st.kappa_min, st.kappa_max, r.mu]
                .into_iter()
                .map(fmt_f64)
                .collect(),
        );
        self.mus.push(r.mu);
        self.isos.push(st.isoperimetric);
        self.last_step = Some(snap.state.steps);
        if force_files || snap.state.steps.is_multiple_of(self.cfg.snapshot_every) {
            self.snapshot(snap, g, &r)?;
        }
        Ok(())
    }
}

impl crate::flow::Monitor for SimulateMonitor<'_> {
    fn observe(&mut self, snap: &Snapshot, geometry: &CurveGeometry) {
        if self.failure.is_none() {
            if let Err(e) = self.record(snap, geometry, false) {
                self.failure = Some(e);
            }
        }
    }
}

/// Runs the support-form flow with the non-collapse monitor attached and
/// writes the time series, snapshot files and a summary.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<SimulateSummary> {
    let hash = cfg.hash();
    let curve = construct_curve(&cfg.initial_curve, cfg.n)?;
    let t_hat = estimated_extinction_time(curve.area()?, cfg.p)?;
    let t_end = match cfg.horizon {
        Horizon::TEnd(t) => t,
        Horizon::Until(f) => f * t_hat,
    };
    let flow = FlowConfig { sigma: cfg.sigma, t_end: Some(t_end), monitor_every: cfg.monitor_every, ..FlowConfig::new(cfg.p) };
    let mut mon = SimulateMonitor {
        cfg,
        hash: &hash,
        rows: Vec::new(),
        mus: Vec::new(),
        isos: Vec::new(),
        snapshots: Vec::new(),
        last_step: None,
        failure: None,
    };
    let traj = run_flow(FlowState::support(curve), &flow, &mut [&mut mon])?;
    if let Some(e) = mon.failure.take() {
        return Err(e);
    }
    // The terminal snapshot always gets files, even off the snapshot cadence.
    if let Some(last) = traj.snapshots.last() {
        if mon.snapshots.last().map(|s| s.step) != Some(last.state.steps) {
            let g = last.state.geometry()?;
            let r = mu_report(&g)?;
            mon.snapshot(last, &g, &r)?;
        }
    }
    write_csv(
        &cfg.outputs.join("timeseries.csv"),
        &[hash_comment(&hash)],
        &["t", "dt", "area", "length", "isoperimetric", "kappa_min", "kappa_max", "mu"],
        std::mem::take(&mut mon.rows),
    )?;
    let (error, aborted) = match &traj.terminal {
        TerminalReason::Aborted(e) => (Some(e.to_string()), Some(e.clone())),
        _ => (None, None),
    };
    let summary = SimulateSummary {
        config_hash: hash.clone(),
        terminal_reason: traj.terminal.label().to_string(),
        error,
        t_final: traj.final_state.t,
        steps: traj.final_state.steps,
        t_hat,
        t_end,
        mu_initial: mon.mus[0],
        mu_final: *mon.mus.last().expect("initial sample"),
        mu_max: mon.mus.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        isoperimetric_initial: mon.isos[0],
        isoperimetric_final: *mon.isos.last().expect("initial sample"),
        snapshots: std::mem::take(&mut mon.snapshots),
    };
    write_json(&cfg.outputs.join("summary.json"), &summary)?;
    match aborted {
        Some(e) => Err(e),
        None => Ok(summary),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VerifyJob {
    Kappa(KappaVariant),
    Trig,
    FirstOrder,
    FirstBlock,
    Rewrite,
}

fn curve_levels<F>(cfg: &ExperimentConfig, f: F) -> Result<(Vec<Resolution>, Vec<f64>)>
where
    F: Fn(&CurveGeometry, &NonCollapseReport) -> Result<f64>,
{
    let mut res = Vec::new();
    let mut vals = Vec::new();
    for n in [cfg.n, 2 * cfg.n] {
        let g = construct_curve(&cfg.initial_curve, n)?.geometry()?;
        let r = mu_report(&g)?;
        res.push(Resolution { n, dt: None });
        vals.push(f(&g, &r)?);
    }
    Ok((res, vals))
}

fn verify_job(cfg: &ExperimentConfig, job: VerifyJob) -> ResidualReport {
    let tol = &cfg.tolerances;
    let (name, ceiling) = match job {
        VerifyJob::Kappa(v) => (format!("kappa_evolution[{}]", v.label()), tol.kappa_ceiling),
        VerifyJob::Trig => ("trig_identity".to_string(), tol.trig_ceiling),
        VerifyJob::FirstOrder => ("first_order_condition".to_string(), tol.first_order_ceiling),
        VerifyJob::FirstBlock => ("first_block".to_string(), tol.first_block_ceiling),
        VerifyJob::Rewrite => ("rewrite_equivalence".to_string(), tol.rewrite_ceiling),
    };
    let report = match job {
        VerifyJob::Kappa(v) => {
            let study = KappaStudy {
                n0: cfg.verify.kappa_n0,
                levels: cfg.verify.kappa_levels,
                steps: cfg.verify.kappa_steps,
                sigma: cfg.sigma,
                reverse_speed: cfg.inject_sign_error,
                ..KappaStudy::new(cfg.initial_curve.clone(), cfg.p)
            };
            kappa_evolution_residual(&study, v, tol)
        }
        VerifyJob::Trig => curve_levels(cfg, |g, r| Ok(max_trig_residual(g, r)?.map_or(0.0, |c| c.residual))).map(
            |(res, vals)| ResidualReport::new(&name, res, vals, Some(tol.trig_reduction.log2()), ceiling, tol.roundoff_floor),
        ),
        VerifyJob::FirstOrder => curve_levels(cfg, |g, r| {
            Ok(first_order_condition_check(g, r.mu, r.argmax.i, r.argmax.j)?.normalized)
        })
        .map(|(res, vals)| ResidualReport::new(&name, res, vals, None, ceiling, tol.roundoff_floor)),
        VerifyJob::FirstBlock => curve_levels(cfg, |g, r| first_block_spot_check(g, r, cfg.p))
            .map(|(res, vals)| ResidualReport::new(&name, res, vals, None, ceiling, tol.roundoff_floor)),
        VerifyJob::Rewrite => rewrite_equivalence_suite(cfg.verify.rewrite_samples, cfg.seed, tol),
    };
    report.unwrap_or_else(|e| ResidualReport::failed(name, ceiling, &e))
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyFile {
    pub config_hash: String,
    pub pass: bool,
    pub reports: Vec<ResidualReport>,
}

/// Runs the identity suite as independent jobs and writes `verify.json`.
/// Returns whether every identity passed.
pub fn cmd_verify(cfg: &ExperimentConfig) -> Result<bool> {
    let jobs = [
        VerifyJob::Kappa(KappaVariant::Kappa),
        VerifyJob::Kappa(KappaVariant::KappaPow),
        VerifyJob::Trig,
        VerifyJob::FirstOrder,
        VerifyJob::FirstBlock,
        VerifyJob::Rewrite,
    ];
    let mut reports = par::map_slice(Exec::default(), &jobs, |&job| verify_job(cfg, job));
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    let pass = reports.iter().all(|r| r.pass);
    let file = VerifyFile { config_hash: cfg.hash(), pass, reports };
    write_json(&cfg.outputs.join("verify.json"), &file)?;
    Ok(pass)
}

/// Single-curve report on the initial data.
pub fn cmd_noncollapse(cfg: &ExperimentConfig) -> Result<NonCollapseReport> {
    let hash = cfg.hash();
    let state = FlowState::support(construct_curve(&cfg.initial_curve, cfg.n)?);
    let g = state.geometry()?;
    let r = mu_report(&g)?;
    write_noncollapse(&cfg.outputs.join("noncollapse.json"), &hash, &state, &g, &r)?;
    write_curve_csv(&cfg.outputs.join("curve.csv"), &hash, &state, &g)?;
    write_snapshot_svg(&g, Some(&r), &hash, &cfg.outputs.join("curve.svg"))?;
    Ok(r)
}

/// Writes `mu0_sweep.csv`, one row per `(p, family)`.
pub fn cmd_sweep_mu0(cfg: &ExperimentConfig) -> Result<()> {
    let s = &cfg.sweep;
    let ps = if s.p_values.is_empty() { vec![cfg.p] } else { s.p_values.clone() };
    let base = TheoremRunConfig {
        n: cfg.n,
        sigma: cfg.sigma,
        horizon_fraction: s.horizon_fraction,
        monitor_every: cfg.monitor_every,
        tolerances: cfg.tolerances,
        ..TheoremRunConfig::new(cfg.initial_curve.clone(), cfg.p)
    };
    let rows = mu0_sweep(&ps, &s.families, &s.grid, &base, s.bisect_steps, Exec::default())?;
    write_csv(
        &cfg.outputs.join("mu0_sweep.csv"),
        &[
            "EMPIRICAL: largest initial mu observed to be preserved on this family and grid; not a proven constant".into(),
            hash_comment(&cfg.hash()),
        ],
        &["p", "family", "param", "mu0_empirical", "pass"],
        rows.iter().map(|r| {
            vec![fmt_f64(r.p), r.family.clone(), fmt_f64(r.param), fmt_f64(r.mu0_empirical), r.pass.label().to_string()]
        }),
    )
}
