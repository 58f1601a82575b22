//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p ffopt-cli --test acceptance -- --nocapture`.
//! Set `FFOPT_ACCEPT_TWOSTEP150=1` to also solve the sparse model at full
//! scale (informational only).

use std::time::{Duration, Instant};

use ffopt::dense::DenseMatrix;
use ffopt::lp_solver::{solve, verify_mask_solution, SolveStatus, SolverConfig};
use ffopt::mask_lp::{build_model, Formulation, MaskProblem};
use ffopt::transforms::*;
use ffopt_cli::commands::stats_report;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TARGET_OBJECTIVE: f64 = 0.05374227;

#[derive(Default)]
struct Tally {
    failed: Vec<String>,
}

impl Tally {
    fn check(&mut self, id: &str, pass: bool, detail: String) {
        println!("[{}] {id}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id.to_string());
        }
    }

    fn info(&self, id: &str, detail: String) {
        println!("[INFO] {id}: {detail}");
    }
}

fn table_sizes(t: &mut Tally) -> f64 {
    let start = Instant::now();
    let expect = [
        (150, Some((976, 17672, 17247872)), (7672, 24368, 839240)),
        (500, None, (20272, 215660, 7738352)),
        (1000, None, (38272, 822715, 29610332)),
    ];
    let mut ok = true;
    let mut ratio = 0.0;
    let mut got = Vec::new();
    for (n, one, two) in expect {
        let r = stats_report(&MaskProblem::new(n, 35), 30_000_000).expect("stats");
        let triple = |s: &ffopt_cli::commands::FormulationStats| {
            (s.n_constraints, s.n_variables, s.n_nonzeros)
        };
        if let Some(one) = one {
            ok &= triple(&r.onestep) == one && r.onestep.built;
            got.push(format!("onestep {n}: {:?}", triple(&r.onestep)));
            ratio = r.nnz_ratio;
        }
        ok &= triple(&r.twostep) == two && r.twostep.built;
        got.push(format!("twostep {n}: {:?}", triple(&r.twostep)));
    }
    let elapsed = start.elapsed();
    t.check(
        "C1 model sizes",
        ok && elapsed < Duration::from_secs(60),
        format!(
            "{} in {:.1}s (built models)",
            got.join(", "),
            elapsed.as_secs_f64()
        ),
    );
    ratio
}

fn random_signal(rng: &mut ChaCha8Rng, n: usize) -> ComplexSignal {
    let g = SampleGrid::odd_with_len(n, 1.0).unwrap();
    let v = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    ComplexSignal::new(g, v).unwrap()
}

fn transform_suite(t: &mut Tally) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst, mut accurate, mut counts_ok, mut runs) = (0.0f64, true, true, 0usize);
    for n in [1usize, 3, 9, 27, 81, 105, 243] {
        let x = SampleGrid::odd_with_len(n, 1.0).unwrap();
        let sg = SpectrumGrid::odd_with_len(n, 1.0 / n as f64).unwrap();
        let sizes = Sizes::new(n, n);
        let plans = FactorPlan::enumerate_valid(&x, &sg);
        for _ in 0..20 {
            let f = random_signal(&mut rng, n);
            let tol = 1e-12 * f.l1_norm() * f.grid().dx();
            let (d, ops) = dft_1d_direct(&f, &sg).unwrap();
            counts_ok &= ops == predict_ops(Scheme::Direct1d, sizes, None).unwrap();
            for plan in &plans {
                let (s, ops) = dft_1d_twostep(&f, &sg, plan).unwrap();
                let err = s.max_abs_diff(&d);
                worst = worst.max(err / tol);
                accurate &= err <= tol;
                counts_ok &= ops == predict_ops(Scheme::Twostep1d, sizes, Some(plan)).unwrap();
                runs += 1;
            }
            if log3_exact(n).is_some() {
                let (s, ops) = fft_radix3(&f, &sg).unwrap();
                let err = s.max_abs_diff(&d);
                worst = worst.max(err / tol);
                accurate &= err <= tol;
                counts_ok &= ops == predict_ops(Scheme::Radix3, sizes, None).unwrap();
                runs += 1;
            }
        }
    }
    let mut worst2d = 0.0f64;
    for n in 1..=16 {
        for m in 1..=16 {
            let xg = SampleGrid::even_offset(n, 0.5 / n as f64).unwrap();
            let img = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let img = RealImage::new(img, xg, xg).unwrap();
            let xi = SpectrumGrid::zero_anchored(m - 1, 20.0 / m as f64).unwrap();
            let (d, dops) = dft_2d_direct(&img, &(xi, xi)).unwrap();
            let (s, sops) = dft_2d_twostep(&img, &(xi, xi)).unwrap();
            let rel = s.values.max_abs_diff(&d.values) / d.values.max_abs().max(f64::MIN_POSITIVE);
            worst2d = worst2d.max(rel);
            let sizes = Sizes::new(n, m);
            counts_ok &= dops == predict_ops(Scheme::Direct2d, sizes, None).unwrap();
            counts_ok &= sops == predict_ops(Scheme::Twostep2d, sizes, None).unwrap();
        }
    }
    let elapsed = start.elapsed();
    t.check(
        "C2 transform oracle",
        accurate && worst2d <= 1e-12 && elapsed < Duration::from_secs(30),
        format!(
            "{runs} 1D runs, worst error {worst:.3} of tolerance; 2D worst relative {worst2d:.2e}; {:.1}s",
            elapsed.as_secs_f64()
        ),
    );

    let zeros = |n| ComplexSignal::zeros(SampleGrid::odd_with_len(n, 1.0).unwrap());
    let grid = |n: usize| SpectrumGrid::odd_with_len(n, 1.0 / n as f64).unwrap();
    let plan = FactorPlan::from_factors(3, 3, 3, 3).unwrap();
    let two9 = dft_1d_twostep(&zeros(9), &grid(9), &plan).unwrap().1.get();
    let dir9 = dft_1d_direct(&zeros(9), &grid(9)).unwrap().1.get();
    let r27 = fft_radix3(&zeros(27), &grid(27)).unwrap().1.get();
    let x4 = SampleGrid::even_offset(4, 0.125).unwrap();
    let xi4 = SpectrumGrid::zero_anchored(3, 1.0).unwrap();
    let img = RealImage::new(DenseMatrix::zeros(4, 4), x4, x4).unwrap();
    let d4 = dft_2d_direct(&img, &(xi4, xi4)).unwrap().1.get();
    let t4 = dft_2d_twostep(&img, &(xi4, xi4)).unwrap().1.get();
    t.check(
        "C3 operation counts",
        counts_ok && two9 == 54 && dir9 == 81 && r27 == 270 && t4 == 128 && d4 == 256,
        format!("all measured == predicted: {counts_ok}; N=9 {dir9} vs {two9}, radix-3 N=27 {r27}, 2D n=m=4 {d4} vs {t4}"),
    );
}

fn desk_scale(t: &mut Tally) {
    let start = Instant::now();
    let p = MaskProblem::new(40, 12)
        .with_radii(4.0, 12.0)
        .with_contrast(1e-5);
    let cfg = SolverConfig::default();
    let mut objs = Vec::new();
    let mut ok = true;
    let mut notes = Vec::new();
    for f in [Formulation::OneStep, Formulation::TwoStep] {
        let sol = solve(&build_model(&p, f).unwrap(), &cfg).unwrap();
        let rep = verify_mask_solution(&p, &sol).unwrap();
        ok &= sol.status == SolveStatus::Optimal && rep.max_contrast_violation <= 1e-6 * rep.peak;
        notes.push(format!(
            "{f} {} obj={:.10} it={} viol={:.1e}",
            sol.status, sol.primal_objective, sol.iterations, rep.max_contrast_violation
        ));
        objs.push(sol.primal_objective);
    }
    let rel = (objs[0] - objs[1]).abs() / objs[0].abs();
    t.check(
        "C4 desk-scale equivalence",
        ok && rel <= 1e-6,
        format!(
            "{}; rel diff {rel:.2e}; {:.1}s",
            notes.join("; "),
            start.elapsed().as_secs_f64()
        ),
    );
}

fn full_scale(t: &mut Tally, f: Formulation, graded: bool) {
    let start = Instant::now();
    let p = MaskProblem::new(150, 35);
    let sol = solve(&build_model(&p, f).unwrap(), &SolverConfig::default()).unwrap();
    let rep = verify_mask_solution(&p, &sol).unwrap();
    let detail = format!(
        "{f} {} obj={:.10} (target {TARGET_OBJECTIVE} +/- 2e-5) it={} viol/peak={:.1e}; {:.0}s",
        sol.status,
        sol.primal_objective,
        sol.iterations,
        rep.max_contrast_violation / rep.peak,
        start.elapsed().as_secs_f64()
    );
    let pass = sol.status == SolveStatus::Optimal
        && (sol.primal_objective - TARGET_OBJECTIVE).abs() <= 2e-5;
    if graded {
        t.check("C5 full-scale objective", pass, detail);
        t.info(
            "C7 binary fraction",
            format!(
                "{:.4} of pupil values within 1e-3 of 0 or 1",
                rep.binary_fraction
            ),
        );
    } else {
        t.info(
            "full-scale two-step",
            format!("{detail}; within target: {pass}"),
        );
    }
}

#[test]
fn acceptance() {
    let mut t = Tally::default();
    let ratio = table_sizes(&mut t);
    transform_suite(&mut t);
    desk_scale(&mut t);
    t.check(
        "C6 sparsity ratio",
        ratio > 20.0,
        format!("onestep/twostep nonzeros = {ratio:.4}"),
    );
    full_scale(&mut t, Formulation::OneStep, true);
    if std::env::var_os("FFOPT_ACCEPT_TWOSTEP150").is_some() {
        full_scale(&mut t, Formulation::TwoStep, false);
    }
    assert!(t.failed.is_empty(), "failed: {:?}", t.failed);
}
