use std::fmt;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use nesim_core::presets::{
    cournot_instance, graph_preset, random_init, rate_control_instance, ring15_graph,
    ring20_graph,
};
use nesim_core::{
    baseline_run, centralized_ne, estimate_constants_in_lower_box, ne_residual,
    run_with_reference, theory_constants, AdmmParams, AugmentedState, CommGraph, CournotGame,
    GameModel, IterationTrace, QuadraticGame, RateControlGame, ReferencePoint, StepSchedule,
    StopReason, StoppingRule, TheoryConstants,
};

use crate::config::{
    BaselineSpec, BetaSpec, ExperimentConfig, GameKind, GraphSpec, Mode, OracleSpec, PenaltySpec,
};
use crate::csv_io;
use crate::error::CliError;

/// Fraction of each action interval (from the lower end) used when
/// constants must be estimated by sampling, and the number of samples.
const SAMPLING_FRACTION: f64 = 0.4;
const SAMPLING_POINTS: usize = 200;

const AUTO_PENALTY_MARGIN: f64 = 1.001;

/// Command-line overrides applied on top of a config or a preset experiment.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub max_iter: Option<u64>,
    pub record_every: Option<u64>,
}

/// One `key sep value` line of the human-readable summary.
#[derive(Debug, Clone)]
pub struct SummaryLine {
    pub key: String,
    pub sep: &'static str,
    pub value: String,
}

fn kv(lines: &mut Vec<SummaryLine>, key: &str, value: impl fmt::Display) {
    lines.push(SummaryLine { key: key.to_string(), sep: "=", value: value.to_string() });
}

pub fn summary_text(lines: &[SummaryLine]) -> String {
    let mut out = String::new();
    for line in lines {
        out.push_str(&format!("{} {} {}\n", line.key, line.sep, line.value));
    }
    out
}

/// Value of `lines` entry with the given key, if present.
pub fn summary_value<'a>(lines: &'a [SummaryLine], key: &str) -> Option<&'a str> {
    lines.iter().find(|l| l.key == key).map(|l| l.value.as_str())
}

/// Rounds to 6 significant digits and prints the shortest decimal form.
fn compact(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let magnitude = v.abs().log10().floor();
    let scale = 10f64.powf(5.0 - magnitude);
    let rounded = (v * scale).round() / scale;
    let s = format!("{}", rounded);
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

fn join_mapped(values: &DVector<f64>, f: impl Fn(f64) -> String) -> String {
    values.iter().map(|&v| f(v)).collect::<Vec<_>>().join(" ")
}

fn stop_reason_str(reason: StopReason) -> &'static str {
    match reason {
        StopReason::ResidualTolerance => "residual-tolerance",
        StopReason::ReferenceTolerance => "reference-tolerance",
        StopReason::IterationLimit => "iteration-limit",
    }
}

fn config_err(message: impl Into<String>) -> CliError {
    CliError::Config(message.into())
}

/// A concrete game instance plus the name it was configured under.
pub enum BuiltGame {
    Cournot(CournotGame),
    Rate(RateControlGame),
    Quadratic(QuadraticGame),
}

impl BuiltGame {
    pub fn model(&self) -> &dyn GameModel {
        match self {
            BuiltGame::Cournot(g) => g,
            BuiltGame::Rate(g) => g,
            BuiltGame::Quadratic(g) => g,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            BuiltGame::Cournot(_) => "cournot-preset",
            BuiltGame::Rate(_) => "rate-control-preset",
            BuiltGame::Quadratic(_) => "quadratic",
        }
    }
}

/// `(mu, theta0, theta)` plus how they were obtained.
#[derive(Debug, Clone, Copy)]
pub struct ResolvedConstants {
    pub mu: f64,
    pub theta0: f64,
    pub theta: f64,
    pub source: &'static str,
    pub samples_used: usize,
    pub samples_skipped: usize,
}

/// Everything the parameter theory has to say about a configured run.
#[derive(Debug, Clone)]
pub struct TheoryReport {
    pub n: usize,
    pub game_kind: &'static str,
    pub constants: ResolvedConstants,
    pub c: f64,
    pub c0: f64,
    pub c0_auto: bool,
    pub theory: TheoryConstants,
}

fn push_theory(lines: &mut Vec<SummaryLine>, report: &TheoryReport) {
    let t = &report.theory;
    kv(lines, "game", report.game_kind);
    kv(lines, "n", report.n);
    kv(lines, "lambda2", t.lambda2);
    kv(lines, "d_star", t.d_star);
    kv(lines, "constants_source", report.constants.source);
    if report.constants.source == "sampled" {
        kv(lines, "samples_used", report.constants.samples_used);
        kv(lines, "samples_skipped", report.constants.samples_skipped);
    }
    kv(lines, "mu", t.mu);
    kv(lines, "theta0", t.theta0);
    kv(lines, "theta", t.theta);
    kv(lines, "c", report.c);
    kv(lines, "c0", report.c0);
    kv(lines, "c0_auto", report.c0_auto);
    kv(lines, "c_min", t.c_min);
    kv(lines, "mu_bar", t.mu_bar);
    kv(lines, "theta_bar", t.theta_bar);
    kv(lines, "condition_lhs", t.beta_condition.lhs);
    kv(lines, "condition_rhs", t.beta_condition.rhs);
    kv(lines, "condition_satisfied", t.beta_condition.satisfied);
}

pub fn build_game(spec: &crate::config::GameSpec) -> Result<BuiltGame, CliError> {
    match spec.kind {
        GameKind::CournotPreset => {
            let seed = spec.seed.unwrap_or(0);
            Ok(BuiltGame::Cournot(cournot_instance(seed)?))
        }
        GameKind::RateControlPreset => Ok(BuiltGame::Rate(rate_control_instance())),
        GameKind::Quadratic => {
            let rows = spec.q.as_ref().expect("validated");
            let r = spec.r.as_ref().expect("validated");
            let lower = spec.lower.as_ref().expect("validated");
            let upper = spec.upper.as_ref().expect("validated");
            let n = rows.len();
            if rows.iter().any(|row| row.len() != n) {
                return Err(config_err("game.q rows must all have the same length"));
            }
            let q = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
            if r.len() != n || lower.len() != n || upper.len() != n {
                return Err(config_err("game.r/lower/upper must match the size of game.q"));
            }
            let intervals: Vec<(f64, f64)> =
                lower.iter().zip(upper).map(|(&lo, &hi)| (lo, hi)).collect();
            let game = QuadraticGame::new(q, DVector::from_vec(r.clone()), intervals)?;
            Ok(BuiltGame::Quadratic(game))
        }
    }
}

pub fn build_graph(spec: &GraphSpec) -> Result<CommGraph, CliError> {
    if let Some(name) = &spec.preset {
        return graph_preset(name).ok_or_else(|| {
            config_err(format!(
                "unknown graph preset \"{}\" (known: fig2-ring20, example2-ring15)",
                name
            ))
        });
    }
    let path = spec.edges.as_ref().expect("validated");
    let n = spec.n.expect("validated");
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.clone(), source: e })?;
    Ok(CommGraph::from_edge_list_text(n, &text)?)
}

fn resolve_constants(game: &BuiltGame, seed: u64) -> Result<ResolvedConstants, CliError> {
    match game {
        BuiltGame::Cournot(g) => {
            let c = g.cournot_constants()?;
            Ok(ResolvedConstants {
                mu: c.mu,
                theta0: c.theta0,
                theta: c.theta,
                source: "exact",
                samples_used: 0,
                samples_skipped: 0,
            })
        }
        BuiltGame::Quadratic(g) => {
            let c = g.constants().ok_or_else(|| {
                config_err("game.q is not strongly monotone; no equilibrium theory applies")
            })?;
            Ok(ResolvedConstants {
                mu: c.mu,
                theta0: c.theta0,
                theta: c.theta,
                source: "exact",
                samples_used: 0,
                samples_skipped: 0,
            })
        }
        BuiltGame::Rate(g) => {
            let s = estimate_constants_in_lower_box(g, SAMPLING_FRACTION, SAMPLING_POINTS, seed)?;
            Ok(ResolvedConstants {
                mu: s.mu,
                theta0: s.theta0,
                theta: s.theta,
                source: "sampled",
                samples_used: s.used,
                samples_skipped: s.skipped,
            })
        }
    }
}

struct Workbench {
    game: BuiltGame,
    graph: CommGraph,
    params: AdmmParams,
    theory: TheoryReport,
    oracle_spec: OracleSpec,
    oracle_tau: f64,
}

fn prepare(cfg: &ExperimentConfig) -> Result<Workbench, CliError> {
    let game = build_game(&cfg.game)?;
    let graph = build_graph(&cfg.graph)?;
    let n = graph.n();
    if game.model().n_players() != n {
        return Err(config_err(format!(
            "graph has {} vertices but the game has {} players",
            n,
            game.model().n_players()
        )));
    }
    let constants = resolve_constants(&game, cfg.init.seed)?;
    let floor = nesim_core::c_min(
        constants.theta,
        constants.theta0,
        constants.mu,
        graph.algebraic_connectivity(),
    )?;
    let (c0, c0_auto) = match &cfg.solver.c0 {
        PenaltySpec::Fixed(v) => (*v, false),
        PenaltySpec::Named(_) => (AUTO_PENALTY_MARGIN * floor, true),
    };
    let beta = match &cfg.solver.beta {
        BetaSpec::Scalar(b) => DVector::from_element(n, *b),
        BetaSpec::PerPlayer(v) => {
            if v.len() != n {
                return Err(config_err(format!(
                    "solver.beta has {} entries for {} players",
                    v.len(),
                    n
                )));
            }
            DVector::from_vec(v.clone())
        }
    };
    let params = AdmmParams::new(cfg.solver.c, c0, beta)?;
    let theory =
        theory_constants(constants.mu, constants.theta0, constants.theta, &graph, &params)?;
    let oracle_spec = cfg.oracle.clone().unwrap_or_default();
    let oracle_tau = oracle_spec
        .tau
        .unwrap_or(constants.mu / (constants.theta0 * constants.theta0));
    Ok(Workbench {
        theory: TheoryReport {
            n,
            game_kind: game.kind_name(),
            constants,
            c: cfg.solver.c,
            c0,
            c0_auto,
            theory,
        },
        game,
        graph,
        params,
        oracle_spec,
        oracle_tau,
    })
}

fn write_csv_if(
    path: &Option<PathBuf>,
    trace: &[IterationTrace],
) -> Result<Option<PathBuf>, CliError> {
    match path {
        Some(p) => {
            csv_io::write_trace(p, trace)?;
            Ok(Some(p.clone()))
        }
        None => Ok(None),
    }
}

fn sibling_with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    let name = match path.extension().and_then(|s| s.to_str()) {
        Some(ext) => format!("{}{}.{}", stem, suffix, ext),
        None => format!("{}{}", stem, suffix),
    };
    path.with_file_name(name)
}

/// Result of an `admm` or `baseline` mode run.
#[derive(Debug)]
pub struct SolverReport {
    pub theory: TheoryReport,
    pub iterations: u64,
    pub stop_reason: StopReason,
    pub final_rel_error: f64,
    pub final_consensus: f64,
    pub final_dual_sum: f64,
    pub final_gap_to_oracle: f64,
    pub x_star: DVector<f64>,
    pub profile: DVector<f64>,
    pub trace: Vec<IterationTrace>,
    pub csv_path: Option<PathBuf>,
    pub summary: Vec<SummaryLine>,
}

#[derive(Debug)]
pub struct OracleReport {
    pub theory: TheoryReport,
    pub tau: f64,
    pub x_star: DVector<f64>,
    pub residual: f64,
    pub csv_path: Option<PathBuf>,
    pub summary: Vec<SummaryLine>,
}

#[derive(Debug)]
pub struct CompareReport {
    pub theory: TheoryReport,
    pub tol: f64,
    pub admm_iterations: u64,
    pub admm_converged: bool,
    pub baseline_iterations: u64,
    pub baseline_converged: bool,
    pub baseline_budget: u64,
    pub speedup: f64,
    pub speedup_is_lower_bound: bool,
    pub csv_path: Option<PathBuf>,
    pub baseline_csv_path: Option<PathBuf>,
    pub summary: Vec<SummaryLine>,
}

#[derive(Debug)]
pub struct CheckParamsReport {
    pub theory: TheoryReport,
    pub summary: Vec<SummaryLine>,
}

#[derive(Debug)]
pub struct Example1Report {
    pub theory: TheoryReport,
    pub seed: u64,
    pub iterations: u64,
    pub final_rel_error: f64,
    pub rel_error_target: f64,
    pub hit_iteration: Option<u64>,
    pub max_dual_sum: f64,
    pub final_consensus: f64,
    pub x_star: DVector<f64>,
    pub trace: Vec<IterationTrace>,
    pub csv_path: Option<PathBuf>,
    pub summary: Vec<SummaryLine>,
}

#[derive(Debug)]
pub struct Example2Report {
    pub theory: TheoryReport,
    pub seed: u64,
    pub tol: f64,
    pub admm_iterations: u64,
    pub admm_converged: bool,
    pub baseline_iterations: u64,
    pub baseline_converged: bool,
    pub baseline_budget: u64,
    pub speedup: f64,
    pub speedup_is_lower_bound: bool,
    pub min_flow: f64,
    pub max_flow: f64,
    pub final_consensus: f64,
    pub final_dual_sum: f64,
    pub trace: Vec<IterationTrace>,
    pub baseline_trace: Vec<IterationTrace>,
    pub csv_path: Option<PathBuf>,
    pub baseline_csv_path: Option<PathBuf>,
    pub summary: Vec<SummaryLine>,
}

#[derive(Debug)]
pub enum Report {
    Admm(SolverReport),
    Baseline(SolverReport),
    Oracle(OracleReport),
    Compare(CompareReport),
    CheckParams(CheckParamsReport),
    Example1(Example1Report),
    Example2(Example2Report),
}

impl Report {
    pub fn summary(&self) -> &[SummaryLine] {
        match self {
            Report::Admm(r) | Report::Baseline(r) => &r.summary,
            Report::Oracle(r) => &r.summary,
            Report::Compare(r) => &r.summary,
            Report::CheckParams(r) => &r.summary,
            Report::Example1(r) => &r.summary,
            Report::Example2(r) => &r.summary,
        }
    }
}

fn apply_overrides(cfg: &mut ExperimentConfig, o: &Overrides) {
    if let Some(seed) = o.seed {
        if cfg.game.kind == GameKind::CournotPreset {
            cfg.game.seed = Some(seed);
        }
        cfg.init.seed = seed;
    }
    if let Some(out) = &o.out {
        cfg.output.csv = Some(out.clone());
    }
    if let Some(tol) = o.tol {
        cfg.stopping.tol = tol;
    }
    if let Some(max_iter) = o.max_iter {
        cfg.stopping.max_iter = max_iter;
    }
    if let Some(record_every) = o.record_every {
        cfg.output.record_every = record_every;
    }
}

/// Runs the mode selected in the config, with command-line overrides applied.
pub fn run_experiment(
    config: &ExperimentConfig,
    overrides: &Overrides,
) -> Result<Report, CliError> {
    let mut cfg = config.clone();
    apply_overrides(&mut cfg, overrides);
    match cfg.mode {
        Mode::Admm => mode_admm(&cfg).map(Report::Admm),
        Mode::Baseline => mode_baseline(&cfg).map(Report::Baseline),
        Mode::Oracle => mode_oracle(&cfg).map(Report::Oracle),
        Mode::Compare => mode_compare(&cfg).map(Report::Compare),
    }
}

/// Prints the parameter theory for a config without running anything.
pub fn check_params(
    config: &ExperimentConfig,
    overrides: &Overrides,
) -> Result<CheckParamsReport, CliError> {
    let mut cfg = config.clone();
    apply_overrides(&mut cfg, overrides);
    let bench = prepare(&cfg)?;
    let mut summary = Vec::new();
    kv(&mut summary, "mode", "check-params");
    push_theory(&mut summary, &bench.theory);
    Ok(CheckParamsReport { theory: bench.theory, summary })
}

fn oracle_point(bench: &Workbench) -> Result<DVector<f64>, CliError> {
    Ok(centralized_ne(
        bench.game.model(),
        Some(bench.oracle_tau),
        bench.oracle_spec.tol,
        bench.oracle_spec.max_iter,
    )?)
}

fn mode_admm(cfg: &ExperimentConfig) -> Result<SolverReport, CliError> {
    let bench = prepare(cfg)?;
    let x_star = oracle_point(&bench)?;
    let blocks =
        random_init(bench.game.model(), cfg.init.own_range, cfg.init.others_range, cfg.init.seed)?;
    let init = AugmentedState::new(blocks)?;
    let stop = StoppingRule {
        tol: cfg.stopping.tol,
        max_iterations: cfg.stopping.max_iter,
        record_every: cfg.output.record_every,
    };
    let reference = ReferencePoint { x_star: x_star.clone(), stop_tol: None };
    let out = run_with_reference(
        bench.game.model(),
        &bench.graph,
        &bench.params,
        init,
        stop,
        Some(&reference),
    )?;
    let csv_path = write_csv_if(&cfg.output.csv, &out.trace)?;
    let last = *out.trace.last().expect("k=0 is always recorded");
    let profile = out.state.action_profile();
    let gap = (&profile - &x_star).amax();

    let mut summary = Vec::new();
    kv(&mut summary, "mode", "admm");
    push_theory(&mut summary, &bench.theory);
    kv(&mut summary, "iterations", out.state.iteration());
    kv(&mut summary, "stop_reason", stop_reason_str(out.stop_reason));
    kv(&mut summary, "final_rel_error", last.rel_error);
    kv(&mut summary, "final_consensus_residual", last.consensus_residual);
    kv(&mut summary, "final_dual_sum_norm", last.dual_sum_norm);
    kv(&mut summary, "final_gap_to_oracle", gap);
    if let Some(p) = &csv_path {
        kv(&mut summary, "csv", p.display());
    }

    Ok(SolverReport {
        theory: bench.theory,
        iterations: out.state.iteration(),
        stop_reason: out.stop_reason,
        final_rel_error: last.rel_error,
        final_consensus: last.consensus_residual,
        final_dual_sum: last.dual_sum_norm,
        final_gap_to_oracle: gap,
        x_star,
        profile,
        trace: out.trace,
        csv_path,
        summary,
    })
}

fn baseline_settings(
    cfg: &ExperimentConfig,
    graph: &CommGraph,
) -> Result<(f64, StepSchedule), CliError> {
    let spec = cfg
        .baseline
        .clone()
        .unwrap_or(BaselineSpec { gamma: None, tau: None, a: None, b: None });
    let cap = 1.0 / (graph.max_degree() as f64 + 1.0);
    let gamma = spec.gamma.unwrap_or(0.5 * cap);
    let schedule = match (spec.tau, spec.a, spec.b) {
        (Some(tau), _, _) => StepSchedule::constant(tau)?,
        (None, Some(a), Some(b)) => StepSchedule::diminishing(a, b)?,
        _ => StepSchedule::diminishing(1.0, 1.0)?,
    };
    Ok((gamma, schedule))
}

fn mode_baseline(cfg: &ExperimentConfig) -> Result<SolverReport, CliError> {
    let bench = prepare(cfg)?;
    let x_star = oracle_point(&bench)?;
    let (gamma, schedule) = baseline_settings(cfg, &bench.graph)?;
    let blocks =
        random_init(bench.game.model(), cfg.init.own_range, cfg.init.others_range, cfg.init.seed)?;
    let stop = StoppingRule {
        tol: cfg.stopping.tol,
        max_iterations: cfg.stopping.max_iter,
        record_every: cfg.output.record_every,
    };
    let reference = ReferencePoint { x_star: x_star.clone(), stop_tol: None };
    let out = baseline_run(
        bench.game.model(),
        &bench.graph,
        schedule,
        gamma,
        blocks,
        stop,
        Some(&reference),
    )?;
    let csv_path = write_csv_if(&cfg.output.csv, &out.trace)?;
    let last = *out.trace.last().expect("k=0 is always recorded");
    let profile = out.action_profile();
    let gap = (&profile - &x_star).amax();

    let mut summary = Vec::new();
    kv(&mut summary, "mode", "baseline");
    push_theory(&mut summary, &bench.theory);
    kv(&mut summary, "gamma", gamma);
    kv(&mut summary, "iterations", out.iterations);
    kv(&mut summary, "stop_reason", stop_reason_str(out.stop_reason));
    kv(&mut summary, "final_rel_error", last.rel_error);
    kv(&mut summary, "final_consensus_residual", last.consensus_residual);
    kv(&mut summary, "final_gap_to_oracle", gap);
    if let Some(p) = &csv_path {
        kv(&mut summary, "csv", p.display());
    }

    Ok(SolverReport {
        theory: bench.theory,
        iterations: out.iterations,
        stop_reason: out.stop_reason,
        final_rel_error: last.rel_error,
        final_consensus: last.consensus_residual,
        final_dual_sum: last.dual_sum_norm,
        final_gap_to_oracle: gap,
        x_star,
        profile,
        trace: out.trace,
        csv_path,
        summary,
    })
}

fn mode_oracle(cfg: &ExperimentConfig) -> Result<OracleReport, CliError> {
    let bench = prepare(cfg)?;
    let x_star = oracle_point(&bench)?;
    let residual = ne_residual(&x_star, bench.game.model(), bench.oracle_tau)?;
    let csv_path = write_csv_if(&cfg.output.csv, &[])?;

    let mut summary = Vec::new();
    kv(&mut summary, "mode", "oracle");
    push_theory(&mut summary, &bench.theory);
    kv(&mut summary, "oracle_tau", bench.oracle_tau);
    kv(&mut summary, "oracle_tol", bench.oracle_spec.tol);
    kv(&mut summary, "x_star", join_mapped(&x_star, compact));
    kv(&mut summary, "x_star_full", join_mapped(&x_star, |v| format!("{:.16e}", v)));
    kv(&mut summary, "ne_residual", residual);

    Ok(OracleReport {
        theory: bench.theory,
        tau: bench.oracle_tau,
        x_star,
        residual,
        csv_path,
        summary,
    })
}

fn speedup_lines(
    summary: &mut Vec<SummaryLine>,
    admm_iterations: u64,
    baseline_iterations: u64,
    baseline_converged: bool,
    budget: u64,
) -> (f64, bool) {
    let denom = admm_iterations.max(1) as f64;
    if baseline_converged {
        let ratio = baseline_iterations as f64 / denom;
        kv(summary, "speedup_iterations", ratio);
        (ratio, false)
    } else {
        let bound = budget as f64 / denom;
        summary.push(SummaryLine {
            key: "speedup_iterations".to_string(),
            sep: ">=",
            value: bound.to_string(),
        });
        (bound, true)
    }
}

fn mode_compare(cfg: &ExperimentConfig) -> Result<CompareReport, CliError> {
    if !(cfg.stopping.tol > 0.0) {
        return Err(config_err("compare requires stopping.tol > 0"));
    }
    let bench = prepare(cfg)?;
    let x_star = oracle_point(&bench)?;
    let tol = cfg.stopping.tol;
    let reference = ReferencePoint { x_star: x_star.clone(), stop_tol: Some(tol) };

    let blocks =
        random_init(bench.game.model(), cfg.init.own_range, cfg.init.others_range, cfg.init.seed)?;
    let init = AugmentedState::new(blocks.clone())?;
    let stop = StoppingRule {
        tol: 0.0,
        max_iterations: cfg.stopping.max_iter,
        record_every: cfg.output.record_every,
    };
    let admm = run_with_reference(
        bench.game.model(),
        &bench.graph,
        &bench.params,
        init,
        stop,
        Some(&reference),
    )?;
    let admm_iterations = admm.state.iteration();
    let admm_converged = admm.stop_reason == StopReason::ReferenceTolerance;

    let budget = 10 * admm_iterations.max(1);
    let (gamma, schedule) = baseline_settings(cfg, &bench.graph)?;
    let baseline = baseline_run(
        bench.game.model(),
        &bench.graph,
        schedule,
        gamma,
        blocks,
        StoppingRule {
            tol: 0.0,
            max_iterations: budget,
            record_every: cfg.output.record_every,
        },
        Some(&reference),
    )?;
    let baseline_converged = baseline.stop_reason == StopReason::ReferenceTolerance;

    let csv_path = write_csv_if(&cfg.output.csv, &admm.trace)?;
    let baseline_csv = cfg.output.csv.as_ref().map(|p| sibling_with_suffix(p, "-baseline"));
    let baseline_csv_path = write_csv_if(&baseline_csv, &baseline.trace)?;

    let mut summary = Vec::new();
    kv(&mut summary, "mode", "compare");
    push_theory(&mut summary, &bench.theory);
    kv(&mut summary, "tol", tol);
    kv(&mut summary, "admm_iterations", admm_iterations);
    kv(&mut summary, "admm_stop_reason", stop_reason_str(admm.stop_reason));
    kv(&mut summary, "baseline_iterations", baseline.iterations);
    kv(&mut summary, "baseline_stop_reason", stop_reason_str(baseline.stop_reason));
    kv(&mut summary, "baseline_budget", budget);
    let (speedup, lower_bound) = speedup_lines(
        &mut summary,
        admm_iterations,
        baseline.iterations,
        baseline_converged,
        budget,
    );
    if let Some(p) = &csv_path {
        kv(&mut summary, "csv", p.display());
    }
    if let Some(p) = &baseline_csv_path {
        kv(&mut summary, "baseline_csv", p.display());
    }

    Ok(CompareReport {
        theory: bench.theory,
        tol,
        admm_iterations,
        admm_converged,
        baseline_iterations: baseline.iterations,
        baseline_converged,
        baseline_budget: budget,
        speedup,
        speedup_is_lower_bound: lower_bound,
        csv_path,
        baseline_csv_path,
        summary,
    })
}

const EXAMPLE1_PENALTY: f64 = 22.6;
const EXAMPLE1_BETA: f64 = 10.0;
const EXAMPLE1_MAX_ITER: u64 = 20_000;
const EXAMPLE1_RECORD_EVERY: u64 = 10;
const EXAMPLE1_REL_TARGET: f64 = 1e-6;

/// Seeded 20-firm reproduction: generates the competition instance, runs the
/// distributed solver against the centralized oracle, and reports when the
/// relative error crosses the target.
pub fn reproduce_example1(overrides: &Overrides) -> Result<Example1Report, CliError> {
    let seed = overrides.seed.unwrap_or(0);
    let game = cournot_instance(seed)?;
    let graph = ring20_graph();
    let n = graph.n();
    let params = AdmmParams::uniform(1.0, EXAMPLE1_PENALTY, EXAMPLE1_BETA, n)?;
    let constants = game.cournot_constants()?;
    let theory = theory_constants(constants.mu, constants.theta0, constants.theta, &graph, &params)?;
    let tau = constants.mu / (constants.theta0 * constants.theta0);
    let x_star = centralized_ne(&game, Some(tau), 1e-12, 10_000_000)?;

    let blocks = random_init(&game, (0.0, 0.5), (0.0, 1.0), seed)?;
    let init = AugmentedState::new(blocks)?;
    let stop = StoppingRule {
        tol: 0.0,
        max_iterations: overrides.max_iter.unwrap_or(EXAMPLE1_MAX_ITER),
        record_every: overrides.record_every.unwrap_or(EXAMPLE1_RECORD_EVERY),
    };
    let reference = ReferencePoint { x_star: x_star.clone(), stop_tol: None };
    let out = run_with_reference(&game, &graph, &params, init, stop, Some(&reference))?;

    let target = overrides.tol.unwrap_or(EXAMPLE1_REL_TARGET);
    let hit_iteration =
        out.trace.iter().find(|row| row.k > 0 && row.rel_error < target).map(|row| row.k);
    let max_dual_sum = out.trace.iter().map(|r| r.dual_sum_norm).fold(0.0, f64::max);
    let last = *out.trace.last().expect("k=0 is always recorded");
    let csv_path = write_csv_if(&overrides.out, &out.trace)?;

    let theory_report = TheoryReport {
        n,
        game_kind: "cournot-preset",
        constants: ResolvedConstants {
            mu: constants.mu,
            theta0: constants.theta0,
            theta: constants.theta,
            source: "exact",
            samples_used: 0,
            samples_skipped: 0,
        },
        c: 1.0,
        c0: EXAMPLE1_PENALTY,
        c0_auto: false,
        theory,
    };

    let mut summary = Vec::new();
    kv(&mut summary, "mode", "example1");
    kv(&mut summary, "seed", seed);
    push_theory(&mut summary, &theory_report);
    kv(&mut summary, "iterations", out.state.iteration());
    kv(&mut summary, "final_rel_error", last.rel_error);
    kv(&mut summary, "rel_error_target", target);
    match hit_iteration {
        Some(k) => kv(&mut summary, "rel_error_hit_at", k),
        None => kv(&mut summary, "rel_error_hit_at", "none"),
    }
    kv(&mut summary, "max_dual_sum_norm", max_dual_sum);
    kv(&mut summary, "final_consensus_residual", last.consensus_residual);
    if let Some(p) = &csv_path {
        kv(&mut summary, "csv", p.display());
    }

    Ok(Example1Report {
        theory: theory_report,
        seed,
        iterations: out.state.iteration(),
        final_rel_error: last.rel_error,
        rel_error_target: target,
        hit_iteration,
        max_dual_sum,
        final_consensus: last.consensus_residual,
        x_star,
        trace: out.trace,
        csv_path,
        summary,
    })
}

const EXAMPLE2_PENALTY: f64 = 31.0;
const EXAMPLE2_BETA: f64 = 14.0;
const EXAMPLE2_MAX_ITER: u64 = 150_000;
const EXAMPLE2_RECORD_EVERY: u64 = 25;
const EXAMPLE2_TOL: f64 = 1e-4;
const EXAMPLE2_ORACLE_TAU: f64 = 0.02;
const EXAMPLE2_GAMMA: f64 = 0.18;
const EXAMPLE2_BASELINE_A: f64 = 10.0;
const EXAMPLE2_BASELINE_B: f64 = 10.0;

/// Congestion-pricing reproduction: fixed 16-link / 15-user instance, sampled
/// constants, distributed solver vs. the diminishing-step baseline at the
/// same tolerance.
pub fn reproduce_example2(overrides: &Overrides) -> Result<Example2Report, CliError> {
    let seed = overrides.seed.unwrap_or(0);
    let game = rate_control_instance();
    let graph = ring15_graph();
    let n = graph.n();
    let params = AdmmParams::uniform(1.0, EXAMPLE2_PENALTY, EXAMPLE2_BETA, n)?;
    let sampled = estimate_constants_in_lower_box(&game, SAMPLING_FRACTION, SAMPLING_POINTS, seed)?;
    let theory = theory_constants(sampled.mu, sampled.theta0, sampled.theta, &graph, &params)?;
    let x_star = centralized_ne(&game, Some(EXAMPLE2_ORACLE_TAU), 1e-10, 2_000_000)?;

    let tol = overrides.tol.unwrap_or(EXAMPLE2_TOL);
    let reference = ReferencePoint { x_star: x_star.clone(), stop_tol: Some(tol) };
    let blocks = random_init(&game, (0.0, 1.0), (0.0, 1.0), seed)?;
    let init = AugmentedState::new(blocks.clone())?;
    let stop = StoppingRule {
        tol: 0.0,
        max_iterations: overrides.max_iter.unwrap_or(EXAMPLE2_MAX_ITER),
        record_every: overrides.record_every.unwrap_or(EXAMPLE2_RECORD_EVERY),
    };
    let admm = run_with_reference(&game, &graph, &params, init, stop, Some(&reference))?;
    let admm_iterations = admm.state.iteration();
    let admm_converged = admm.stop_reason == StopReason::ReferenceTolerance;

    let budget = 10 * admm_iterations.max(1);
    let baseline = baseline_run(
        &game,
        &graph,
        StepSchedule::diminishing(EXAMPLE2_BASELINE_A, EXAMPLE2_BASELINE_B)?,
        EXAMPLE2_GAMMA,
        blocks,
        StoppingRule {
            tol: 0.0,
            max_iterations: budget,
            record_every: overrides.record_every.unwrap_or(EXAMPLE2_RECORD_EVERY) * 10,
        },
        Some(&reference),
    )?;
    let baseline_converged = baseline.stop_reason == StopReason::ReferenceTolerance;

    let flows = admm.state.action_profile();
    let min_flow = flows.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_flow = flows.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let last = *admm.trace.last().expect("k=0 is always recorded");
    let csv_path = write_csv_if(&overrides.out, &admm.trace)?;
    let baseline_csv = overrides.out.as_ref().map(|p| sibling_with_suffix(p, "-baseline"));
    let baseline_csv_path = write_csv_if(&baseline_csv, &baseline.trace)?;

    let theory_report = TheoryReport {
        n,
        game_kind: "rate-control-preset",
        constants: ResolvedConstants {
            mu: sampled.mu,
            theta0: sampled.theta0,
            theta: sampled.theta,
            source: "sampled",
            samples_used: sampled.used,
            samples_skipped: sampled.skipped,
        },
        c: 1.0,
        c0: EXAMPLE2_PENALTY,
        c0_auto: false,
        theory,
    };

    let mut summary = Vec::new();
    kv(&mut summary, "mode", "example2");
    kv(&mut summary, "seed", seed);
    push_theory(&mut summary, &theory_report);
    kv(&mut summary, "tol", tol);
    kv(&mut summary, "admm_iterations", admm_iterations);
    kv(&mut summary, "admm_stop_reason", stop_reason_str(admm.stop_reason));
    kv(&mut summary, "baseline_iterations", baseline.iterations);
    kv(&mut summary, "baseline_stop_reason", stop_reason_str(baseline.stop_reason));
    kv(&mut summary, "baseline_budget", budget);
    let (speedup, lower_bound) = speedup_lines(
        &mut summary,
        admm_iterations,
        baseline.iterations,
        baseline_converged,
        budget,
    );
    kv(&mut summary, "min_flow", min_flow);
    kv(&mut summary, "max_flow", max_flow);
    kv(&mut summary, "final_consensus_residual", last.consensus_residual);
    kv(&mut summary, "final_dual_sum_norm", last.dual_sum_norm);
    if let Some(p) = &csv_path {
        kv(&mut summary, "csv", p.display());
    }
    if let Some(p) = &baseline_csv_path {
        kv(&mut summary, "baseline_csv", p.display());
    }

    Ok(Example2Report {
        theory: theory_report,
        seed,
        tol,
        admm_iterations,
        admm_converged,
        baseline_iterations: baseline.iterations,
        baseline_converged,
        baseline_budget: budget,
        speedup,
        speedup_is_lower_bound: lower_bound,
        min_flow,
        max_flow,
        final_consensus: last.consensus_residual,
        final_dual_sum: last.dual_sum_norm,
        trace: admm.trace,
        baseline_trace: baseline.trace,
        csv_path,
        baseline_csv_path,
        summary,
    })
}
