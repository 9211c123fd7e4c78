use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sparsepd::csv_io::{read_logistic, Table};
use sparsepd::experiments::{
    run_experiment, run_logistic_on, CovselMode, ExperimentConfig, ExperimentKind, ExperimentOutput, SolverOverrides,
};
use sparsepd::{Error, Result};
use sparsepd_core::apps::counterexample::lp_counterexample;

#[derive(Parser, Debug)]
#[command(name = "sparsepd", version, about = "Penalty decomposition solvers for sparse optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Noiseless compressed sensing, one row per trial.
    CsNoiseless(Common),
    /// Noisy compressed sensing with a cardinality budget, one row per trial.
    CsNoisy(Common),
    /// Recovery counts per cardinality.
    CsTable(Common),
    /// Warm-started residual/time curves for PD and IHT.
    Tradeoff(Common),
    /// Cardinality-constrained logistic regression.
    Logistic(Common),
    /// Sparse inverse covariance selection, one row per trial.
    Covsel(Common),
    /// Covariance selection means per budget.
    CovselTable(Common),
    /// l_p relaxation counterexample.
    Counterexample(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Rows of A or number of samples.
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Columns of A, features, or matrix order.
    #[arg(long, default_value_t = 256)]
    p: usize,
    /// Cardinalities, comma separated. Covariance selection counts ordered
    /// off-diagonal entries (even numbers).
    #[arg(long, value_delimiter = ',')]
    r: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sensing matrices with orthonormal rows.
    #[arg(long)]
    orthonormal: bool,
    /// l0 weight (noiseless sensing) or l_p weight (counterexample).
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    rho0: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    tol_inner: Option<f64>,
    #[arg(long)]
    tol_outer: Option<f64>,
    /// Off-diagonal density of the true inverse covariance.
    #[arg(long, default_value_t = 0.1)]
    density: f64,
    /// Use a +-1 inverse covariance pattern with this many pairs.
    #[arg(long)]
    pm1_pairs: Option<usize>,
    /// Logistic dataset CSV (outcome first); replaces the generator.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Skip standardizing features read with --input.
    #[arg(long)]
    raw: bool,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Exponents for the counterexample, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.75, 0.5, 0.25])]
    exponents: Vec<f64>,
}

impl Common {
    fn config(&self, covsel: bool) -> Result<ExperimentConfig> {
        let cardinalities = if covsel {
            self.r
                .iter()
                .map(|&r| {
                    if r % 2 == 0 {
                        Ok(r / 2)
                    } else {
                        Err(Error::InvalidArgument(format!("covariance budget {r} must be even (ordered entries)")))
                    }
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            self.r.clone()
        };
        Ok(ExperimentConfig {
            n: self.n,
            p: self.p,
            cardinalities,
            trials: self.trials,
            seed: self.seed,
            orthonormal: self.orthonormal,
            overrides: SolverOverrides {
                nu: self.nu,
                rho0: self.rho0,
                sigma: self.sigma,
                tol_inner: self.tol_inner,
                tol_outer: self.tol_outer,
            },
            covsel: match self.pm1_pairs {
                Some(pairs) => CovselMode::Pm1 { pairs },
                None => CovselMode::Dense { density: self.density },
            },
            threads: self.threads,
        })
    }
}

fn emit(table: &Table, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => table.write(path),
        None => {
            print!("{}", table.to_csv_string());
            Ok(())
        }
    }
}

fn baseline_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    out.with_file_name(format!("{stem}_iht.csv"))
}

fn summarize(kind: ExperimentKind, output: &ExperimentOutput) {
    let converged = output.runs.iter().filter(|r| r.diagnostics.is_some_and(|d| d.converged)).count();
    eprintln!("{} PD runs, {converged} converged", output.runs.len());
    if kind == ExperimentKind::Logistic {
        for run in &output.runs {
            eprintln!("trial {}: ||w||_0 = {}, error {:.2}%", run.trial, run.metrics.cardinality, run.metrics.error_rate);
        }
    }
    if matches!(kind, ExperimentKind::Covsel | ExperimentKind::CovselTable) {
        for run in &output.runs {
            eprintln!(
                "trial {}: {} pairs ({} ordered entries), pattern match {:.4}",
                run.trial,
                run.metrics.cardinality,
                2 * run.metrics.cardinality,
                run.metrics.mse
            );
        }
    }
}

fn counterexample(c: &Common) -> Result<()> {
    let nu = c.nu.unwrap_or(1.0);
    let b1 = [1.0, -2.0, 0.5];
    let b2 = [0.5, 3.0, -1.0];
    let mut table = Table::new(&["p", "f_sparse", "f_bar", "ratio", "ratio_bound"]);
    for &p in &c.exponents {
        let rep = lp_counterexample(p, nu, &b1, &b2)?;
        table.push(vec![p, rep.f_sparse, rep.f_bar, rep.ratio, rep.ratio_bound]);
    }
    emit(&table, c.out.as_deref())
}

fn run(cli: Cli) -> Result<()> {
    let (kind, common) = match &cli.command {
        Command::CsNoiseless(c) => (ExperimentKind::CsNoiseless, c),
        Command::CsNoisy(c) => (ExperimentKind::CsNoisy, c),
        Command::CsTable(c) => (ExperimentKind::CsTable, c),
        Command::Tradeoff(c) => (ExperimentKind::Tradeoff, c),
        Command::Logistic(c) => (ExperimentKind::Logistic, c),
        Command::Covsel(c) => (ExperimentKind::Covsel, c),
        Command::CovselTable(c) => (ExperimentKind::CovselTable, c),
        Command::Counterexample(c) => return counterexample(c),
    };
    let covsel = matches!(kind, ExperimentKind::Covsel | ExperimentKind::CovselTable);
    let config = common.config(covsel)?;
    let output = match (&common.input, kind) {
        (Some(path), ExperimentKind::Logistic) => {
            let data = read_logistic(path)?;
            let data = if common.raw { data } else { data.standardized() };
            run_logistic_on(&data, &config)?
        }
        (Some(_), _) => return Err(Error::InvalidArgument("--input is only supported by `logistic`".into())),
        _ => run_experiment(kind, &config)?,
    };
    summarize(kind, &output);
    emit(&output.table, common.out.as_deref())?;
    if let Some(base) = &output.baseline {
        match &common.out {
            Some(out) => base.write(&baseline_path(out))?,
            None => {
                println!();
                print!("{}", base.to_csv_string());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
