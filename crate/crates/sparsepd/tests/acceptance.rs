//! Acceptance criteria. A single test runs every criterion in order, prints
//! one PASS/FAIL line per criterion, and fails if any criterion fails.
//!
//! `ACCEPTANCE_ONLY=5,7` restricts the run to the listed criteria
//! (criteria 2 and 11 then cover only the runs that took place).

use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsepd::csv_io::Table;
use sparsepd::experiments::{
    covsel_trial, logistic_trial, run_cs_recovery_table, run_experiment, run_tradeoff_curve, CovselMode,
    ExperimentConfig, ExperimentKind, ExperimentOutput, RunDiagnostics,
};
use sparsepd::gen::{gen_covsel_instance, gen_logistic_instance, off_diagonal_pairs, CovselPattern, CovselSpec, Source};
use sparsepd::rng::{trial_index, Experiment};
use sparsepd_core::apps::counterexample::lp_counterexample;
use sparsepd_core::apps::covsel::CovselConfig;
use sparsepd_core::apps::logistic::{logistic_loss_vec, LogisticConfig, LogisticDataset};
use sparsepd_core::linalg::{vector, Cholesky, DenseMatrix};
use sparsepd_core::model::{eval_penalty, grad_x_penalty, ProblemOracle, SparsityMode, SparsityProblem};
use sparsepd_core::subsolvers::{logdet_prox, AffineProjector};
use sparsepd_core::threshold::{solve_cardinality_separable, solve_l0_regularized_separable, Piece, SeparablePieces};

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

/// Diagnostics gathered across criteria for the suite-wide checks.
#[derive(Default)]
struct Ledger {
    /// `(source criterion, diagnostics)` of every PD run.
    runs: Vec<(u32, RunDiagnostics)>,
}

impl Ledger {
    fn record(&mut self, criterion: u32, out: &ExperimentOutput) {
        self.runs.extend(out.runs.iter().filter_map(|r| r.diagnostics.map(|d| (criterion, d))));
    }
}

fn report(criterion: u32, title: &str, v: &Verdict, elapsed: Duration) {
    let status = if v.pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {criterion:>2} [{status}] {title}: {} ({:.1} s)\n", v.detail, elapsed.as_secs_f64());
    // bypass the test harness capture so the lines always show
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

// 1. Separable l0 solvers against enumeration.

/// `a (t - c)^2 + d` on `[lo, hi]`, `lo <= 0 <= hi`.
struct BoxQuadratic {
    a: f64,
    c: f64,
    d: f64,
    lo: f64,
    hi: f64,
}

impl BoxQuadratic {
    fn eval(&self, t: f64) -> f64 {
        self.a * (t - self.c) * (t - self.c) + self.d
    }
}

fn enumerate_min(q: &[BoxQuadratic], forced: &[bool], admissible: impl Fn(usize) -> bool, nu: f64) -> f64 {
    let n = q.len();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        let k = mask.count_ones() as usize;
        if !admissible(k) || (0..n).any(|i| mask & (1 << i) != 0 && forced[i]) {
            continue;
        }
        let mut v = nu * k as f64;
        for (i, qi) in q.iter().enumerate() {
            v += if mask & (1 << i) != 0 { qi.eval(qi.c.clamp(qi.lo, qi.hi)) } else { qi.eval(0.0) };
        }
        best = best.min(v);
    }
    best
}

fn criterion_1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let n = rng.random_range(1..=12);
        let q: Vec<BoxQuadratic> = (0..n)
            .map(|_| BoxQuadratic {
                a: rng.random_range(0.05..5.0),
                c: rng.random_range(-3.0..3.0),
                d: rng.random_range(-2.0..2.0),
                lo: -rng.random_range(0.0..2.5),
                hi: rng.random_range(0.0..2.5),
            })
            .collect();
        let forced: Vec<bool> = (0..n).map(|_| rng.random_bool(0.15)).collect();
        let pieces = SeparablePieces::new(
            q.iter()
                .zip(&forced)
                .map(|(qi, &f)| {
                    let m = qi.c.clamp(qi.lo, qi.hi);
                    Piece { value_at_zero: qi.eval(0.0), minimizer: m, value_at_minimizer: qi.eval(m), forced_zero: f }
                })
                .collect(),
        )
        .unwrap();
        let value = |x: &[f64]| q.iter().zip(x).map(|(qi, &xi)| qi.eval(xi)).sum::<f64>();

        let r = rng.random_range(0..=n);
        let got = solve_cardinality_separable(&pieces, r);
        let ok_support = vector::count_nonzero(&got.x, 0.0) <= r && got.x.iter().zip(&forced).all(|(x, f)| !*f || *x == 0.0);
        let best = enumerate_min(&q, &forced, |k| k <= r, 0.0);
        worst = worst.max((value(&got.x) - best).abs());
        if !ok_support {
            worst = f64::INFINITY;
        }

        let nu = rng.random_range(0.0..3.0);
        let got = solve_l0_regularized_separable(&pieces, nu).unwrap();
        let best = enumerate_min(&q, &forced, |_| true, nu);
        let v = value(&got.x) + nu * vector::count_nonzero(&got.x, 0.0) as f64;
        worst = worst.max((v - best).abs());
    }
    Verdict::new(worst <= 1e-10, format!("largest gap to enumeration {worst:.2e} over 500 instances (tol 1e-10)"))
}

// 3. Log-det prox stationarity.

fn criterion_3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(1..=50);
        let mut c = DenseMatrix::from_fn(n, n, |_, _| rng.random_range(-2.0..2.0));
        c.symmetrize();
        for rho in [0.1, 1.0, 10.0] {
            let x = logdet_prox(&c, rho).unwrap();
            let inv = Cholesky::factor(&x).unwrap().inverse();
            let mut res = x.sub(&c).scaled(rho);
            res.add_scaled(-1.0, &inv);
            worst = worst.max(res.frobenius_norm() / (1.0 + rho * c.frobenius_norm()));
        }
    }
    Verdict::new(worst <= 1e-8, format!("largest scaled residual {worst:.2e} (tol 1e-8)"))
}

// 4. Affine projection.

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (mut feas, mut idem): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let n = rng.random_range(1..=64);
        let p = rng.random_range(n..=256);
        let a = DenseMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0));
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let c: Vec<f64> = (0..p).map(|_| rng.random_range(-5.0..5.0)).collect();
        let proj = AffineProjector::new(a.clone(), b.clone()).unwrap();
        let x = proj.project(&c);
        let ax = a.mul_vec(&x);
        feas = feas.max(vector::dist_inf(&ax, &b));
        idem = idem.max(vector::dist_inf(&proj.project(&x), &x));
    }
    Verdict::new(
        feas <= 1e-8 && idem <= 1e-8,
        format!("max |Ax - b| {feas:.2e}, max |P(P(c)) - P(c)| {idem:.2e} (tol 1e-8)"),
    )
}

// 5, 6. Noiseless recovery bands.

fn recovery_criterion(orthonormal: bool, ledger: &mut Ledger, criterion: u32) -> Verdict {
    let config = ExperimentConfig {
        n: 256,
        p: 1024,
        cardinalities: vec![8, 16, 32, 74],
        trials: 20,
        seed: if orthonormal { 6 } else { 5 },
        orthonormal,
        ..ExperimentConfig::default()
    };
    let out = run_cs_recovery_table(&config).unwrap();
    ledger.record(criterion, &out);
    let ns = out.table.column("ns").unwrap();
    let pass = ns[0] >= 18.0 && ns[1] >= 18.0 && ns[2] >= 18.0 && ns[3] <= 2.0;
    Verdict::new(pass, format!("NS at r = 8, 16, 32, 74: {:?} (need >= 18, >= 18, >= 18, <= 2 of 20)", ns))
}

// 7. Noisy sensing against IHT.

fn criterion_7(ledger: &mut Ledger) -> Verdict {
    let config = ExperimentConfig { n: 128, p: 512, cardinalities: vec![64], trials: 5, seed: 7, ..ExperimentConfig::default() };
    let out = run_tradeoff_curve(&config).unwrap();
    ledger.record(7, &out);
    let rmax = 64;
    let mut fractions = Vec::new();
    let mut not_worse = Vec::new();
    let mut monotone = true;
    for t in 0..config.trials {
        let pd: Vec<f64> = (0..rmax).map(|k| out.runs[t * rmax + k].metrics.residual).collect();
        let iht: Vec<f64> = (0..rmax).map(|k| out.baseline_runs[t * rmax + k].metrics.residual).collect();
        let close = pd.iter().zip(&iht).filter(|(a, b)| (*a - *b).abs() <= 0.1 * *b).count();
        let below = pd.iter().zip(&iht).filter(|(a, b)| **a <= 1.1 * **b).count();
        fractions.push(close as f64 / rmax as f64);
        not_worse.push(below as f64 / rmax as f64);
        monotone &= pd.windows(2).all(|w| w[1] <= w[0]);
    }
    let round = |v: &[f64]| v.iter().map(|f| (f * 100.0).round() / 100.0).collect::<Vec<_>>();
    let pass = monotone && fractions.iter().all(|f| *f >= 0.8);
    Verdict::new(
        pass,
        format!(
            "share of r with |PD - IHT| <= 10% IHT per instance {:?} (need >= 0.8); share with PD <= 1.1 IHT {:?}; \
             PD residual non-increasing: {monotone}",
            round(&fractions),
            round(&not_worse)
        ),
    )
}

// 8. Covariance pattern recovery.

fn criterion_8(ledger: &mut Ledger) -> Verdict {
    let spec = CovselSpec::new(30, CovselPattern::Pm1Sparse { pairs: 12 });
    let solver = CovselConfig::default();
    let mut matches = Vec::new();
    let mut losses = Vec::new();
    for seed in 0..10 {
        let inst = gen_covsel_instance(&spec, &Source::new(800 + seed, Experiment::Covsel, 0)).unwrap();
        let r = off_diagonal_pairs(inst.truth_inverse().unwrap());
        let rec = covsel_trial(&inst, r, &solver).unwrap();
        ledger.runs.extend(rec.diagnostics.map(|d| (8, d)));
        matches.push(rec.metrics.mse);
        losses.push(rec.metrics.entropy_loss);
    }
    let mean_match = matches.iter().sum::<f64>() / matches.len() as f64;
    let good_loss = losses.iter().filter(|l| **l <= 0.05).count();
    Verdict::new(
        mean_match >= 0.9 && good_loss >= 8,
        format!(
            "mean pattern match {mean_match:.4} (need >= 0.9), loss <= 0.05 on {good_loss}/10 (need >= 8), losses {:?}",
            losses.iter().map(|l| (l * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    )
}

// 9. Logistic regression.

fn criterion_9(ledger: &mut Ledger) -> Verdict {
    let solver = LogisticConfig::default();
    let mut errors = Vec::new();
    let mut losses = Vec::new();
    for seed in 0..10 {
        let src = Source::new(900 + seed, Experiment::Logistic, trial_index(0, 0));
        let data = gen_logistic_instance(200, 50, &src).unwrap();
        let start = Source::new(900 + seed, Experiment::Logistic, trial_index(10, 0));
        let rec = logistic_trial(&data, 10, &solver, &start).unwrap();
        ledger.runs.extend(rec.diagnostics.map(|d| (9, d)));
        errors.push(rec.metrics.error_rate);
        losses.push(rec.metrics.entropy_loss);
    }
    let pass = errors.iter().all(|e| *e <= 5.0) && losses.iter().all(|l| *l <= 2f64.ln());
    Verdict::new(
        pass,
        format!(
            "error rates {:?} % (need <= 5), max loss {:.4} (need <= log 2)",
            errors,
            losses.iter().cloned().fold(0.0, f64::max)
        ),
    )
}

// 10. Counterexample.

fn criterion_10() -> Verdict {
    let nu = 0.7;
    let mut worst: f64 = 0.0;
    let mut ratios_ok = true;
    for p in [1.0, 0.75, 0.5, 0.25] {
        let rep = lp_counterexample(p, nu, &[1.0, -2.0, 0.5, 3.0], &[0.25, 1.5, -1.0, 2.0]).unwrap();
        let expect = 2f64.powf(1.0 / p);
        worst = worst.max((rep.f_sparse - expect * nu).abs() / (expect * nu));
        worst = worst.max((rep.f_bar - nu).abs() / nu);
        worst = worst.max((rep.ratio - (expect - 1.0)).abs() / (expect - 1.0));
        ratios_ok &= rep.ratio >= 1.0 - 1e-12 && rep.residual_sparse <= 1e-10 && rep.residual_bar <= 1e-10;
    }
    Verdict::new(worst <= 1e-12 && ratios_ok, format!("largest relative error {worst:.2e} (tol 1e-12), ratios >= 1: {ratios_ok}"))
}

// 2, 11. Suite-wide checks over the recorded runs, plus dedicated runs.

fn criterion_2(ledger: &Ledger) -> Verdict {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut record = |d: RunDiagnostics| {
        worst = worst.max(d.max_increase);
        count += 1;
    };
    for (_, d) in &ledger.runs {
        record(*d);
    }
    let small = ExperimentConfig { n: 24, p: 60, cardinalities: vec![3, 6], trials: 3, seed: 2, ..ExperimentConfig::default() };
    let runs = [
        run_experiment(ExperimentKind::CsNoiseless, &small),
        run_experiment(ExperimentKind::CsNoisy, &small),
        run_experiment(ExperimentKind::Logistic, &ExperimentConfig { n: 40, p: 12, ..small.clone() }),
        run_experiment(ExperimentKind::Covsel, &ExperimentConfig { p: 10, ..small.clone() }),
    ];
    let mut failed = 0;
    for out in runs {
        match out {
            Ok(out) => out.runs.iter().filter_map(|r| r.diagnostics).for_each(&mut record),
            Err(_) => failed += 1,
        }
    }
    Verdict::new(
        worst <= 1e-8 && failed == 0,
        format!("largest relative sweep increase {worst:.2e} over {count} PD runs (slack 1e-8), failed runs {failed}"),
    )
}

fn criterion_11(ledger: &Ledger) -> Verdict {
    let mut considered = 0;
    let mut capped = 0;
    let mut bad = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    let mut worst_comp: f64 = 0.0;
    for (c, d) in &ledger.runs {
        if d.outer_test_met && !d.converged {
            capped += 1;
        }
        if !d.converged {
            continue;
        }
        considered += 1;
        worst_ratio = worst_ratio.max(d.stationarity / d.final_eps);
        worst_comp = worst_comp.max(d.complementarity);
        if d.stationarity > 10.0 * d.final_eps || d.complementarity > 1e-6 {
            bad.push(*c);
        }
    }
    bad.dedup();
    Verdict::new(
        bad.is_empty() && considered > 0,
        format!(
            "{considered} convergent runs, worst stationarity / eps {worst_ratio:.3} (need <= 10), \
             worst complementarity {worst_comp:.1e} (need <= 1e-6), violations from criteria {bad:?}; \
             {capped} runs met the outer test with the final inner solve at its sweep cap"
        ),
    )
}

// 12. Gradient checks.

struct Ball {
    a: DenseMatrix,
    b: Vec<f64>,
}

impl ProblemOracle for Ball {
    fn dim(&self) -> usize {
        self.a.cols()
    }

    fn objective(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let mut r = self.a.mul_vec(x);
        for (ri, bi) in r.iter_mut().zip(&self.b) {
            *ri = ri.sin() - bi;
        }
        let ax = self.a.mul_vec(x);
        let w: Vec<f64> = r.iter().zip(&ax).map(|(ri, t)| ri * t.cos()).collect();
        self.a.t_mul_vec_into(&w, grad);
        0.5 * vector::norm_sq(&r)
    }

    fn num_inequalities(&self) -> usize {
        1
    }

    fn inequalities(&self, x: &[f64], out: &mut [f64]) {
        out[0] = vector::norm_sq(x) - 0.5;
    }

    fn inequality_jacobian_t(&self, x: &[f64], w: &[f64], out: &mut [f64]) {
        for (o, xi) in out.iter_mut().zip(x) {
            *o += 2.0 * xi * w[0];
        }
    }

    fn num_equalities(&self) -> usize {
        1
    }

    fn equalities(&self, x: &[f64], out: &mut [f64]) {
        out[0] = x.iter().sum::<f64>() - 0.3;
    }

    fn equality_jacobian_t(&self, _x: &[f64], w: &[f64], out: &mut [f64]) {
        for o in out.iter_mut() {
            *o += w[0];
        }
    }
}

fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize) -> f64 {
    let h = 1e-6 * (1.0 + x[i].abs());
    let mut xp = x.to_vec();
    xp[i] += h;
    let mut xm = x.to_vec();
    xm[i] -= h;
    (f(&xp) - f(&xm)) / (2.0 * h)
}

fn criterion_12() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1212);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (n, p) = (rng.random_range(3..12), rng.random_range(2..9));
        let z = DenseMatrix::from_fn(n, p, |_, _| rng.random_range(-2.0..2.0));
        let b: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let data = LogisticDataset::new(z, b).unwrap();
        let x: Vec<f64> = (0..=p).map(|_| rng.random_range(-1.5..1.5)).collect();
        let mut g = vec![0.0; p + 1];
        logistic_loss_vec(&data, &x, &mut g);
        let f = |v: &[f64]| logistic_loss_vec(&data, v, &mut vec![0.0; p + 1]);
        for i in 0..=p {
            worst = worst.max((central_difference(f, &x, i) - g[i]).abs() / g[i].abs().max(1.0));
        }
    }
    for _ in 0..20 {
        let (m, n) = (rng.random_range(2..6), rng.random_range(3..8));
        let a = DenseMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        let b: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let j: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.6)).collect();
        let mode = if rng.random_bool(0.5) { SparsityMode::Regularized(0.4) } else { SparsityMode::Cardinality(j.len()) };
        let problem = SparsityProblem::new(Ball { a, b }, j.clone(), mode, vec![0.3 / n as f64; n]).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = j.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        let rho = rng.random_range(0.1..20.0);
        let g = grad_x_penalty(&problem, &x, &y, rho).unwrap();
        let f = |v: &[f64]| eval_penalty(&problem, v, &y, rho).unwrap().total;
        for i in 0..n {
            worst = worst.max((central_difference(f, &x, i) - g[i]).abs() / g[i].abs().max(1.0));
        }
    }
    Verdict::new(worst <= 1e-5, format!("largest relative gradient error {worst:.2e} over 40 draws (tol 1e-5)"))
}

// 13. Determinism.

fn csv_without_time(t: &Table) -> String {
    t.without(&["time_ms"]).to_csv_string()
}

fn criterion_13() -> Verdict {
    let base = ExperimentConfig { n: 20, p: 48, cardinalities: vec![2, 4], trials: 3, seed: 13, ..ExperimentConfig::default() };
    let cases = [
        (ExperimentKind::CsTable, base.clone()),
        (ExperimentKind::CsNoisy, base.clone()),
        (ExperimentKind::Tradeoff, ExperimentConfig { cardinalities: vec![5], ..base.clone() }),
        (ExperimentKind::Logistic, ExperimentConfig { n: 30, p: 10, ..base.clone() }),
        (ExperimentKind::CovselTable, ExperimentConfig { p: 12, covsel: CovselMode::Pm1 { pairs: 6 }, cardinalities: vec![], ..base.clone() }),
    ];
    let mut mismatched = Vec::new();
    for (kind, cfg) in &cases {
        let one = run_experiment(*kind, &ExperimentConfig { threads: Some(1), ..cfg.clone() }).unwrap();
        let four = run_experiment(*kind, &ExperimentConfig { threads: Some(4), ..cfg.clone() }).unwrap();
        let again = run_experiment(*kind, &ExperimentConfig { threads: Some(1), ..cfg.clone() }).unwrap();
        let same = |a: &ExperimentOutput, b: &ExperimentOutput| {
            csv_without_time(&a.table) == csv_without_time(&b.table)
                && a.baseline.as_ref().map(csv_without_time) == b.baseline.as_ref().map(csv_without_time)
        };
        if !same(&one, &four) || !same(&one, &again) {
            mismatched.push(format!("{kind:?}"));
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let run_cli = |name: &str, threads: &str| {
        let path = dir.path().join(name);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_sparsepd"))
            .args(["cs-table", "--n", "16", "--p", "40", "--r", "2,3", "--trials", "2", "--seed", "5", "--threads", threads])
            .arg("--out")
            .arg(&path)
            .stderr(std::process::Stdio::null())
            .status()
            .unwrap();
        assert!(status.success());
        csv_without_time(&Table::read(&path).unwrap())
    };
    let cli_same = run_cli("a.csv", "1") == run_cli("b.csv", "2");
    if !cli_same {
        mismatched.push("cli cs-table".into());
    }
    Verdict::new(
        mismatched.is_empty(),
        format!("{} experiments at 1 and 4 threads plus a CLI rerun, mismatches {mismatched:?}", cases.len()),
    )
}

#[test]
fn acceptance() {
    let only: Option<Vec<u32>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let wanted = |c: u32| only.as_ref().is_none_or(|o| o.contains(&c));
    let mut ledger = Ledger::default();
    let mut failures = Vec::new();

    let mut check = |c: u32, title: &str, limit_s: Option<f64>, f: &mut dyn FnMut() -> Verdict| {
        if !wanted(c) {
            return;
        }
        let start = Instant::now();
        let mut v = f();
        let elapsed = start.elapsed();
        if let Some(limit) = limit_s {
            if !within(elapsed, limit) {
                v.pass = false;
                v.detail.push_str(&format!("; exceeded {limit} s"));
            }
        }
        report(c, title, &v, elapsed);
        if !v.pass {
            failures.push(c);
        }
    };

    check(1, "thresholding vs enumeration", Some(5.0), &mut criterion_1);
    check(3, "log-det prox stationarity", Some(30.0), &mut criterion_3);
    check(4, "affine projection", None, &mut criterion_4);
    check(5, "noiseless recovery, Gaussian rows", Some(180.0), &mut || recovery_criterion(false, &mut ledger, 5));
    check(6, "noiseless recovery, orthonormal rows", Some(180.0), &mut || recovery_criterion(true, &mut ledger, 6));
    check(7, "noisy sensing vs IHT", Some(180.0), &mut || criterion_7(&mut ledger));
    check(8, "covariance pattern recovery", Some(120.0), &mut || criterion_8(&mut ledger));
    check(9, "sparse logistic regression", Some(120.0), &mut || criterion_9(&mut ledger));
    check(10, "l_p counterexample", Some(1.0), &mut criterion_10);
    check(11, "KKT residuals at convergence", None, &mut || criterion_11(&ledger));
    check(2, "monotone BCD descent", None, &mut || criterion_2(&ledger));
    check(12, "gradient checks", None, &mut criterion_12);
    check(13, "determinism", None, &mut criterion_13);

    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
