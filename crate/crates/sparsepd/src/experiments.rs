//! Experiment runners producing CSV tables.
//!
//! Trials run in parallel on a rayon pool; each trial draws from its own
//! random streams and results are assembled in trial order, so the output
//! does not depend on the number of threads.

use std::time::Instant;

use rayon::prelude::*;
use sparsepd_core::apps::covsel::{normalized_entropy_loss, pattern_match, solve_covsel, CovselConfig, CovselInstance};
use sparsepd_core::apps::cs::{solve_cs_noiseless, solve_cs_noisy, CsNoiselessConfig, CsNoisyConfig};
use sparsepd_core::apps::iht::{default_iht_step, iht_baseline};
use sparsepd_core::apps::logistic::{error_rate, solve_sparse_logistic, LogisticConfig, LogisticDataset};
use sparsepd_core::linalg::vector;
use sparsepd_core::pd::{PdConfig, PdStart, SolveReport};
use sparsepd_core::SUPPORT_TOL;

use crate::csv_io::Table;
use crate::error::{Error, Result};
use crate::gen::{
    gen_covsel_instance, gen_cs_instance, gen_cs_noisy_instance, gen_logistic_instance, off_diagonal_pairs,
    random_sparse_start, CovselPattern, CovselSpec, Source,
};
use crate::metrics::{mean, mse, recovered, MetricsRow};
use crate::rng::{trial_index, Experiment};

/// Stopping tolerance of the IHT baseline.
pub const IHT_TOL: f64 = 1e-6;
pub const IHT_MAX_ITERS: usize = 20_000;

/// Solver parameters that replace the application defaults when set.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolverOverrides {
    pub nu: Option<f64>,
    pub rho0: Option<f64>,
    pub sigma: Option<f64>,
    /// Tolerance of the active change-based inner test.
    pub tol_inner: Option<f64>,
    pub tol_outer: Option<f64>,
}

impl SolverOverrides {
    pub fn apply(&self, pd: &mut PdConfig) {
        if let Some(v) = self.rho0 {
            pd.rho0 = v;
        }
        if let Some(v) = self.sigma {
            pd.sigma = v;
        }
        if let Some(v) = self.tol_inner {
            pd.bcd.relative_change_tol = v;
            pd.bcd.objective_change_tol = v;
        }
        if let Some(v) = self.tol_outer {
            pd.outer_tol = v;
        }
    }
}

/// How covariance selection instances are generated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovselMode {
    Dense { density: f64 },
    /// `+-1` pattern with the given number of pairs; the budget defaults to
    /// the true number of pairs.
    Pm1 { pairs: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub p: usize,
    /// Budgets. For covariance selection these count unordered pairs.
    pub cardinalities: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub orthonormal: bool,
    pub overrides: SolverOverrides,
    pub covsel: CovselMode,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 64,
            p: 256,
            cardinalities: vec![8],
            trials: 1,
            seed: 1,
            orthonormal: false,
            overrides: SolverOverrides::default(),
            covsel: CovselMode::Dense { density: 0.1 },
            threads: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trial count must be at least 1"));
        }
        if self.n == 0 || self.p == 0 {
            return Err(Error::invalid("dimensions must be positive"));
        }
        Ok(())
    }
}

/// Diagnostics of one PD solve.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunDiagnostics {
    pub converged: bool,
    pub outer_test_met: bool,
    pub final_eps: f64,
    pub stationarity: f64,
    pub complementarity: f64,
    /// Largest relative penalty increase between BCD sweeps.
    pub max_increase: f64,
}

impl RunDiagnostics {
    pub fn from_report(r: &SolveReport) -> Self {
        Self {
            converged: r.converged,
            outer_test_met: r.outer_test_met,
            final_eps: r.final_eps,
            stationarity: r.kkt.stationarity_residual,
            complementarity: r.kkt.complementarity_residual,
            max_increase: r.history.iter().fold(0.0, |m, h| m.max(h.max_increase)),
        }
    }
}

/// One solve: trial number, metrics and PD diagnostics (absent for the
/// baseline).
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub metrics: MetricsRow,
    pub diagnostics: Option<RunDiagnostics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub table: Table,
    /// Baseline (IHT) table of the trade-off experiment.
    pub baseline: Option<Table>,
    /// Every PD solve, trial-major.
    pub runs: Vec<TrialRecord>,
    pub baseline_runs: Vec<TrialRecord>,
}

/// Experiments selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    CsNoiseless,
    CsNoisy,
    CsTable,
    Tradeoff,
    Logistic,
    Covsel,
    CovselTable,
}

pub fn run_experiment(kind: ExperimentKind, config: &ExperimentConfig) -> Result<ExperimentOutput> {
    match kind {
        ExperimentKind::CsNoiseless => run_cs_noiseless(config),
        ExperimentKind::CsNoisy => run_cs_noisy(config),
        ExperimentKind::CsTable => run_cs_recovery_table(config),
        ExperimentKind::Tradeoff => run_tradeoff_curve(config),
        ExperimentKind::Logistic => run_logistic(config),
        ExperimentKind::Covsel => run_covsel(config),
        ExperimentKind::CovselTable => run_covsel_table(config),
    }
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(k) => Ok(rayon::ThreadPoolBuilder::new().num_threads(k).build()?.install(f)),
        None => Ok(f()),
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn check_cardinalities(config: &ExperimentConfig) -> Result<()> {
    if config.cardinalities.is_empty() {
        return Err(Error::invalid("at least one cardinality is required"));
    }
    Ok(())
}

fn noiseless_config(o: &SolverOverrides) -> CsNoiselessConfig {
    let mut c = CsNoiselessConfig::default();
    o.apply(&mut c.pd);
    if let Some(nu) = o.nu {
        c.nu = nu;
    }
    c
}

fn noisy_config(o: &SolverOverrides) -> CsNoisyConfig {
    let mut c = CsNoisyConfig::default();
    o.apply(&mut c.pd);
    c
}

fn cs_recovery_trials(config: &ExperimentConfig, experiment: Experiment) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    check_cardinalities(config)?;
    let solver = noiseless_config(&config.overrides);
    let jobs: Vec<(usize, usize)> =
        config.cardinalities.iter().flat_map(|&r| (0..config.trials).map(move |t| (r, t))).collect();
    in_pool(config.threads, || {
        jobs.par_iter()
            .map(|&(r, t)| {
                let src = Source::new(config.seed, experiment, trial_index(r as u64, t as u64));
                let inst = gen_cs_instance(config.n, config.p, r, &src, config.orthonormal)?;
                let start = Instant::now();
                let sol = solve_cs_noiseless(&inst, &solver)?;
                let time_ms = elapsed_ms(start);
                let u = inst.truth.as_ref().expect("planted instance");
                let metrics = MetricsRow {
                    cardinality: vector::count_nonzero(&sol.y, 0.0),
                    residual: sol.residual,
                    mse: mse(&sol.y, u),
                    recovered: recovered(&sol.y, u),
                    time_ms,
                    iterations: sol.report.inner_iterations,
                    ..MetricsRow::default()
                };
                Ok(TrialRecord { trial: t, metrics, diagnostics: Some(RunDiagnostics::from_report(&sol.report)) })
            })
            .collect::<Result<Vec<_>>>()
    })?
}

/// One row per trial: `r,ns,mse_mean,residual,time_ms,iters`, with `ns`
/// the 0/1 recovery flag.
pub fn run_cs_noiseless(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let runs = cs_recovery_trials(config, Experiment::CsNoiseless)?;
    let mut table = Table::new(&["r", "ns", "mse_mean", "residual", "time_ms", "iters"]);
    let per_r = runs.chunks(config.trials).zip(&config.cardinalities);
    for (chunk, &r) in per_r {
        for run in chunk {
            let m = &run.metrics;
            table.push(vec![
                r as f64,
                if m.recovered { 1.0 } else { 0.0 },
                m.mse,
                m.residual,
                m.time_ms,
                m.iterations as f64,
            ]);
        }
    }
    Ok(ExperimentOutput { table, baseline: None, runs, baseline_runs: Vec::new() })
}

/// Recovery table: `r,ns,mse_mean,time_ms,iters`, one row per
/// cardinality, independent trials.
pub fn run_cs_recovery_table(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let runs = cs_recovery_trials(config, Experiment::CsTable)?;
    let mut table = Table::new(&["r", "ns", "mse_mean", "time_ms", "iters"]);
    for (chunk, &r) in runs.chunks(config.trials).zip(&config.cardinalities) {
        table.push(vec![
            r as f64,
            chunk.iter().filter(|t| t.metrics.recovered).count() as f64,
            mean(chunk.iter().map(|t| t.metrics.mse)),
            mean(chunk.iter().map(|t| t.metrics.time_ms)),
            mean(chunk.iter().map(|t| t.metrics.iterations as f64)),
        ]);
    }
    Ok(ExperimentOutput { table, baseline: None, runs, baseline_runs: Vec::new() })
}

/// Noisy recovery at each budget from a random sparse start, one row per
/// trial and budget: `r,residual,time_ms,iters`.
pub fn run_cs_noisy(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    check_cardinalities(config)?;
    let solver = noisy_config(&config.overrides);
    let jobs: Vec<(usize, usize)> =
        config.cardinalities.iter().flat_map(|&r| (0..config.trials).map(move |t| (r, t))).collect();
    let runs = in_pool(config.threads, || {
        jobs.par_iter()
            .map(|&(r, t)| {
                let src = Source::new(config.seed, Experiment::CsNoisy, trial_index(0, t as u64));
                let inst = gen_cs_noisy_instance(config.n, config.p, &src, config.orthonormal)?;
                let start_src = Source::new(config.seed, Experiment::CsNoisy, trial_index(r as u64, t as u64));
                let y0 = random_sparse_start(config.p, r, &start_src);
                let start = Instant::now();
                let sol = solve_cs_noisy(&inst, r, &solver, &PdStart { x0: None, y0: Some(y0) })?;
                let metrics = MetricsRow {
                    cardinality: vector::count_nonzero(&sol.y, 0.0),
                    residual: sol.residual,
                    time_ms: elapsed_ms(start),
                    iterations: sol.report.inner_iterations,
                    ..MetricsRow::default()
                };
                Ok(TrialRecord { trial: t, metrics, diagnostics: Some(RunDiagnostics::from_report(&sol.report)) })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let mut table = Table::new(&["r", "residual", "time_ms", "iters"]);
    for (&(r, _), run) in jobs.iter().zip(&runs) {
        let m = &run.metrics;
        table.push(vec![r as f64, m.residual, m.time_ms, m.iterations as f64]);
    }
    Ok(ExperimentOutput { table, baseline: None, runs, baseline_runs: Vec::new() })
}

type Sweep = (Vec<TrialRecord>, Vec<TrialRecord>);

fn tradeoff_sweep(config: &ExperimentConfig, rmax: usize, t: usize) -> Result<Sweep> {
    let solver = noisy_config(&config.overrides);
    let src = Source::new(config.seed, Experiment::Tradeoff, trial_index(0, t as u64));
    let inst = gen_cs_noisy_instance(config.n, config.p, &src, config.orthonormal)?;
    let mut pd_runs = Vec::with_capacity(rmax);
    let mut iht_runs = Vec::with_capacity(rmax);

    let mut start = PdStart { x0: None, y0: Some(random_sparse_start(config.p, 1, &src)) };
    let mut acc = 0.0;
    for r in 1..=rmax {
        let clock = Instant::now();
        let sol = solve_cs_noisy(&inst, r, &solver, &start)?;
        acc += elapsed_ms(clock);
        let metrics = MetricsRow {
            cardinality: vector::count_nonzero(&sol.y, 0.0),
            residual: sol.residual,
            time_ms: acc,
            iterations: sol.report.inner_iterations,
            ..MetricsRow::default()
        };
        pd_runs.push(TrialRecord { trial: t, metrics, diagnostics: Some(RunDiagnostics::from_report(&sol.report)) });
        start = PdStart { x0: Some(sol.x), y0: Some(sol.y) };
    }

    let step = default_iht_step(&inst.a);
    let mut x = vec![0.0; config.p];
    let mut acc = 0.0;
    for r in 1..=rmax {
        let clock = Instant::now();
        let out = iht_baseline(&inst, r, step, IHT_MAX_ITERS, IHT_TOL, Some(&x))?;
        acc += elapsed_ms(clock);
        let metrics = MetricsRow {
            cardinality: vector::count_nonzero(&out.x, 0.0),
            residual: inst.residual(&out.x),
            time_ms: acc,
            iterations: out.iterations,
            ..MetricsRow::default()
        };
        iht_runs.push(TrialRecord { trial: t, metrics, diagnostics: None });
        x = out.x;
    }
    Ok((pd_runs, iht_runs))
}

fn curve_table(runs: &[TrialRecord], rmax: usize, trials: usize) -> Table {
    let mut table = Table::new(&["r", "residual", "time_ms", "iters"]);
    for r in 1..=rmax {
        let at = |t: usize| &runs[t * rmax + r - 1].metrics;
        table.push(vec![
            r as f64,
            mean((0..trials).map(|t| at(t).residual)),
            mean((0..trials).map(|t| at(t).time_ms)),
            mean((0..trials).map(|t| at(t).iterations as f64)),
        ]);
    }
    table
}

/// Warm-started sweeps `r = 1..=rmax` (`rmax` is the largest listed
/// cardinality, `p` when none is listed) for PD and IHT. Tables hold the
/// mean residual, mean accumulated time and mean iterations per `r`.
pub fn run_tradeoff_curve(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let rmax = config.cardinalities.iter().copied().max().unwrap_or(config.p);
    if rmax == 0 || rmax > config.p {
        return Err(Error::invalid(format!("largest cardinality {rmax} outside [1, {}]", config.p)));
    }
    let sweeps = in_pool(config.threads, || {
        (0..config.trials).into_par_iter().map(|t| tradeoff_sweep(config, rmax, t)).collect::<Result<Vec<_>>>()
    })??;
    let (mut runs, mut baseline_runs) = (Vec::new(), Vec::new());
    for (pd, iht) in sweeps {
        runs.extend(pd);
        baseline_runs.extend(iht);
    }
    Ok(ExperimentOutput {
        table: curve_table(&runs, rmax, config.trials),
        baseline: Some(curve_table(&baseline_runs, rmax, config.trials)),
        runs,
        baseline_runs,
    })
}

fn logistic_config(o: &SolverOverrides) -> LogisticConfig {
    let mut c = LogisticConfig::default();
    o.apply(&mut c.pd);
    c
}

/// Solves one dataset at one budget from a random start.
pub fn logistic_trial(data: &LogisticDataset, r: usize, config: &LogisticConfig, src: &Source) -> Result<TrialRecord> {
    let y0 = random_sparse_start(data.p(), r, src);
    let start = Instant::now();
    let sol = solve_sparse_logistic(data, r, config, Some(y0))?;
    let metrics = MetricsRow {
        cardinality: vector::count_nonzero(&sol.model.weights, 0.0),
        error_rate: error_rate(&sol.model, data.features(), data.outcomes()),
        entropy_loss: sol.loss,
        time_ms: elapsed_ms(start),
        iterations: sol.report.inner_iterations,
        ..MetricsRow::default()
    };
    Ok(TrialRecord { trial: 0, metrics, diagnostics: Some(RunDiagnostics::from_report(&sol.report)) })
}

fn logistic_table(runs: &[TrialRecord], budgets: &[usize]) -> Table {
    let mut table = Table::new(&["r", "loss", "time_ms", "iters"]);
    for (run, &r) in runs.iter().zip(budgets) {
        let m = &run.metrics;
        table.push(vec![r as f64, m.entropy_loss, m.time_ms, m.iterations as f64]);
    }
    table
}

/// Generated datasets (`n` samples, `p` features), one row per trial and
/// budget: `r,loss,time_ms,iters` with `loss` the average logistic loss.
/// Error rates are in [`TrialRecord::metrics`].
pub fn run_logistic(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    check_cardinalities(config)?;
    let solver = logistic_config(&config.overrides);
    let jobs: Vec<(usize, usize)> =
        config.cardinalities.iter().flat_map(|&r| (0..config.trials).map(move |t| (r, t))).collect();
    let runs = in_pool(config.threads, || {
        jobs.par_iter()
            .map(|&(r, t)| {
                let src = Source::new(config.seed, Experiment::Logistic, trial_index(0, t as u64));
                let data = gen_logistic_instance(config.n, config.p, &src)?;
                let start_src = Source::new(config.seed, Experiment::Logistic, trial_index(r as u64, t as u64));
                let mut rec = logistic_trial(&data, r, &solver, &start_src)?;
                rec.trial = t;
                Ok(rec)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let budgets: Vec<usize> = jobs.iter().map(|j| j.0).collect();
    Ok(ExperimentOutput { table: logistic_table(&runs, &budgets), baseline: None, runs, baseline_runs: Vec::new() })
}

/// Logistic regression on a given dataset, one row per budget.
pub fn run_logistic_on(data: &LogisticDataset, config: &ExperimentConfig) -> Result<ExperimentOutput> {
    check_cardinalities(config)?;
    let solver = logistic_config(&config.overrides);
    let runs = in_pool(config.threads, || {
        config
            .cardinalities
            .par_iter()
            .map(|&r| logistic_trial(data, r, &solver, &Source::new(config.seed, Experiment::Logistic, r as u64)))
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(ExperimentOutput {
        table: logistic_table(&runs, &config.cardinalities),
        baseline: None,
        runs,
        baseline_runs: Vec::new(),
    })
}

fn covsel_config(o: &SolverOverrides) -> CovselConfig {
    let mut c = CovselConfig::default();
    o.apply(&mut c.pd);
    c
}

fn covsel_spec(config: &ExperimentConfig) -> CovselSpec {
    let pattern = match config.covsel {
        CovselMode::Dense { density } => CovselPattern::DenseRandom { density },
        CovselMode::Pm1 { pairs } => CovselPattern::Pm1Sparse { pairs },
    };
    CovselSpec::new(config.p, pattern)
}

/// Solves one instance with budget `r` (unordered pairs).
pub fn covsel_trial(inst: &CovselInstance, r: usize, config: &CovselConfig) -> Result<TrialRecord> {
    let start = Instant::now();
    let sol = solve_covsel(inst, r, config)?;
    let time_ms = elapsed_ms(start);
    let (entropy_loss, pattern) = match (inst.sigma_true(), inst.truth_inverse()) {
        (Some(s), Some(t)) => (normalized_entropy_loss(s, &sol.x)?, pattern_match(&sol.x, t, SUPPORT_TOL)),
        _ => (f64::NAN, f64::NAN),
    };
    let metrics = MetricsRow {
        cardinality: sol.pairs,
        log_likelihood: sol.log_likelihood,
        entropy_loss,
        mse: pattern,
        time_ms,
        iterations: sol.report.inner_iterations,
        ..MetricsRow::default()
    };
    Ok(TrialRecord { trial: 0, metrics, diagnostics: Some(RunDiagnostics::from_report(&sol.report)) })
}

/// Budgets to run on `inst`: the configured list, or the true number of
/// pairs in `+-1` mode when the list is empty.
fn covsel_budgets(config: &ExperimentConfig, inst: &CovselInstance) -> Result<Vec<usize>> {
    if !config.cardinalities.is_empty() {
        return Ok(config.cardinalities.clone());
    }
    match (config.covsel, inst.truth_inverse()) {
        (CovselMode::Pm1 { .. }, Some(t)) => Ok(vec![off_diagonal_pairs(t)]),
        _ => Err(Error::invalid("at least one cardinality is required")),
    }
}

fn covsel_trials(config: &ExperimentConfig, experiment: Experiment) -> Result<Vec<(usize, TrialRecord)>> {
    config.validate()?;
    let solver = covsel_config(&config.overrides);
    let spec = covsel_spec(config);
    let per_trial = in_pool(config.threads, || {
        (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let src = Source::new(config.seed, experiment, trial_index(0, t as u64));
                let inst = gen_covsel_instance(&spec, &src)?;
                covsel_budgets(config, &inst)?
                    .into_iter()
                    .map(|r| {
                        let mut rec = covsel_trial(&inst, r, &solver)?;
                        rec.trial = t;
                        Ok((r, rec))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(per_trial.into_iter().flatten().collect())
}

/// One row per trial and budget: `r,likelihood,loss,time_ms,iters`. The
/// `r` column counts ordered off-diagonal entries (twice the pairs).
/// [`MetricsRow::mse`] carries the off-diagonal pattern match.
pub fn run_covsel(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let runs = covsel_trials(config, Experiment::Covsel)?;
    let mut table = Table::new(&["r", "likelihood", "loss", "time_ms", "iters"]);
    for (r, run) in &runs {
        let m = &run.metrics;
        table.push(vec![(2 * r) as f64, m.log_likelihood, m.entropy_loss, m.time_ms, m.iterations as f64]);
    }
    Ok(ExperimentOutput { table, baseline: None, runs: runs.into_iter().map(|(_, t)| t).collect(), baseline_runs: Vec::new() })
}

/// Means over trials per budget: `r,likelihood,loss,time_ms,iters`, with
/// `r` in ordered entries.
pub fn run_covsel_table(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let runs = covsel_trials(config, Experiment::CovselTable)?;
    let mut budgets: Vec<usize> = Vec::new();
    for (r, _) in &runs {
        if !budgets.contains(r) {
            budgets.push(*r);
        }
    }
    let mut table = Table::new(&["r", "likelihood", "loss", "time_ms", "iters"]);
    for &r in &budgets {
        let rows: Vec<&MetricsRow> = runs.iter().filter(|(b, _)| *b == r).map(|(_, t)| &t.metrics).collect();
        table.push(vec![
            (2 * r) as f64,
            mean(rows.iter().map(|m| m.log_likelihood)),
            mean(rows.iter().map(|m| m.entropy_loss)),
            mean(rows.iter().map(|m| m.time_ms)),
            mean(rows.iter().map(|m| m.iterations as f64)),
        ]);
    }
    Ok(ExperimentOutput { table, baseline: None, runs: runs.into_iter().map(|(_, t)| t).collect(), baseline_runs: Vec::new() })
}
