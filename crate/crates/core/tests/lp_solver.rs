use std::f64::consts::TAU;
use std::process::Command;

use ffopt::lp_solver::*;
use ffopt::mask_lp::*;
use ffopt::sparse_model::{LinearModel, Sense, Term};
use proptest::prelude::*;

fn small_mask() -> MaskProblem {
    MaskProblem::new(12, 6)
        .with_radii(2.0, 6.0)
        .with_contrast(1e-3)
}

fn solved(model: &LinearModel) -> Solution {
    let sol = solve(model, &SolverConfig::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    sol
}

#[test]
fn formulations_agree_and_verify() {
    let p = small_mask();
    let one = solved(&build_onestep_model(&p).unwrap());
    let two = solved(&build_twostep_model(&p).unwrap());
    let rel = (one.primal_objective - two.primal_objective).abs() / one.primal_objective.abs();
    assert!(
        rel <= 1e-6,
        "{} vs {}",
        one.primal_objective,
        two.primal_objective
    );
    assert!(one.dense_normal);
    assert!(!two.dense_normal);
    for sol in [&one, &two] {
        let rep = verify_mask_solution(&p, sol).unwrap();
        assert!(rep.max_contrast_violation <= 1e-6 * rep.peak, "{rep:?}");
        assert!(rep.max_bound_violation <= 1e-8);
        assert!(sol.relative_gap() <= 1e-8);
    }
}

#[test]
fn final_iterate_satisfies_weak_duality() {
    let p = small_mask();
    for f in [Formulation::OneStep, Formulation::TwoStep] {
        let sol = solved(&build_model(&p, f).unwrap());
        let last = sol.trace.last().unwrap();
        let tol = 1e-8 * (1.0 + last.primal_objective.abs());
        assert!(
            last.primal_objective <= last.dual_objective + tol,
            "{last:?}"
        );
    }
}

#[test]
fn traces_are_deterministic() {
    let p = small_mask();
    for f in [Formulation::OneStep, Formulation::TwoStep] {
        let model = build_model(&p, f).unwrap();
        let a = solved(&model);
        let b = solved(&model);
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.values, b.values);
    }
}

#[test]
fn export_parse_solve_matches_direct() {
    let p = small_mask();
    for f in [Formulation::OneStep, Formulation::TwoStep] {
        let model = build_model(&p, f).unwrap();
        let direct = solved(&model);
        for fmt in [MpsFormat::Fixed, MpsFormat::Free] {
            let parsed = parse_mps(&export_mps(&model, fmt).unwrap()).unwrap();
            let again = solved(&parsed);
            let bracket = (direct.primal_objective - direct.dual_objective).abs()
                + (again.primal_objective - again.dual_objective).abs()
                + 1e-10;
            assert!(
                (again.primal_objective - direct.primal_objective).abs() <= bracket,
                "{f} {fmt:?}: {} vs {}",
                again.primal_objective,
                direct.primal_objective
            );
        }
    }
}

#[test]
fn unreachable_gap_keeps_best_feasible_iterate() {
    let p = small_mask();
    let model = build_onestep_model(&p).unwrap();
    let reference = solved(&model);
    let cfg = SolverConfig {
        rel_gap_tol: 1e-300,
        max_iterations: 150,
        ..SolverConfig::default()
    };
    let sol = solve(&model, &cfg).unwrap();
    assert!(matches!(
        sol.status,
        SolveStatus::NumericalFailure | SolveStatus::IterationLimit
    ));
    assert!(sol.primal_infeasibility <= cfg.feas_tol * 10.0);
    assert!((sol.primal_objective - reference.primal_objective).abs() <= 1e-8);
    let rep = verify_mask_solution(&p, &sol).unwrap();
    assert!(rep.max_contrast_violation <= 1e-6 * rep.peak);
}

fn random_model(nv: usize, coefs: &[f64], bounds: &[(f64, f64)], maximize: bool) -> LinearModel {
    let sense = if maximize {
        Sense::Maximize
    } else {
        Sense::Minimize
    };
    let mut m = LinearModel::new("random", sense);
    let vars: Vec<_> = (0..nv)
        .map(|i| {
            let (lo, hi) = bounds[i];
            let name = if i % 2 == 0 {
                format!("v{i}")
            } else {
                format!("long_variable_{i}")
            };
            m.add_variable(name, lo, hi).unwrap()
        })
        .collect();
    for r in 0..3 {
        let terms = vars
            .iter()
            .enumerate()
            .map(|(i, &v)| Term::new(v, coefs[r * 6 + i]))
            .collect();
        let (lo, hi) = match r {
            0 => (f64::NEG_INFINITY, 3.5),
            1 => (-2.0, 7.25e-3),
            _ => (1.0 / 3.0, 1.0 / 3.0),
        };
        m.add_row(format!("row_{r}"), terms, lo, hi).unwrap();
    }
    m.set_objective(vars.iter().map(|&v| Term::new(v, 1.5)).collect(), 0.25)
        .unwrap();
    m
}

fn bound() -> impl Strategy<Value = (f64, f64)> {
    prop_oneof![
        Just((0.0, 1.0)),
        Just((f64::NEG_INFINITY, f64::INFINITY)),
        Just((0.0, f64::INFINITY)),
        Just((-1.0, 2.5)),
        Just((f64::NEG_INFINITY, 4.0)),
        Just((1.25, 1.25)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mps_export_is_idempotent(
        nv in 1usize..6,
        coefs in proptest::collection::vec(prop_oneof![-1e6f64..1e6, Just(0.0), 1e-9f64..1e-3], 18),
        bounds in proptest::collection::vec(bound(), 6),
        maximize in any::<bool>(),
        free in any::<bool>(),
    ) {
        let fmt = if free { MpsFormat::Free } else { MpsFormat::Fixed };
        let m = random_model(nv, &coefs, &bounds, maximize);
        let first = export_mps(&m, fmt).unwrap();
        let parsed = parse_mps(&first).unwrap();
        let second = export_mps(&parsed, fmt).unwrap();
        prop_assert_eq!(&first, &second);
        prop_assert_eq!(parsed.num_variables(), m.num_variables());
        prop_assert_eq!(parsed.num_rows(), m.num_rows());
        prop_assert_eq!(parsed.sense(), m.sense());
    }
}

fn all_values(p: &MaskProblem, value: f64) -> Solution {
    let names: Vec<String> = enumerate_pupil(p)
        .iter()
        .map(|pt| pupil_var_name(pt.k, pt.l))
        .collect();
    Solution {
        status: SolveStatus::Optimal,
        values: vec![value; names.len()],
        variable_names: names,
        row_names: Vec::new(),
        row_duals: Vec::new(),
        primal_objective: 0.0,
        dual_objective: 0.0,
        primal_infeasibility: 0.0,
        dual_infeasibility: 0.0,
        iterations: 0,
        trace: Vec::new(),
        dense_normal: true,
    }
}

/// Full-plane sum over the disk of `exp(2 pi i (x xi + y eta)) dx dy`.
fn disk_transform(n: usize, xi: f64, eta: f64) -> f64 {
    let dx = 1.0 / (2 * n) as f64;
    let mut acc = 0.0;
    for a in 0..2 * n {
        for b in 0..2 * n {
            let x = (a as f64 + 0.5) * dx - 0.5;
            let y = (b as f64 + 0.5) * dx - 0.5;
            if x * x + y * y < 0.25 {
                acc += (TAU * (x * xi + y * eta)).cos() * dx * dx;
            }
        }
    }
    acc
}

#[test]
fn verify_open_and_closed_pupils() {
    let p = MaskProblem::new(4, 4).with_radii(1.0, 3.0);

    let rep = verify_mask_solution(&p, &all_values(&p, 0.0)).unwrap();
    assert_eq!(rep.peak, 0.0);
    assert_eq!(rep.max_contrast_violation, 0.0);
    assert_eq!(rep.throughput, 0.0);
    assert_eq!(rep.binary_fraction, 1.0);

    let rep = verify_mask_solution(&p, &all_values(&p, 1.0)).unwrap();
    let peak = disk_transform(4, 0.0, 0.0);
    assert!((rep.peak - peak).abs() < 1e-13, "{} vs {peak}", rep.peak);
    let worst = enumerate_darkhole(&p)
        .iter()
        .map(|d| disk_transform(4, d.xi, d.eta).abs() - p.contrast * peak)
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((rep.max_contrast_violation - worst).abs() < 1e-13);
    assert_eq!(rep.binary_fraction, 1.0);
    assert_eq!(rep.max_bound_violation, 0.0);
}

fn highspy_available() -> bool {
    Command::new("python3")
        .args(["-c", "import highspy"])
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

#[test]
fn external_solver_agrees_when_present() {
    if !highspy_available() {
        eprintln!("highspy not available; skipping");
        return;
    }
    let p = small_mask();
    let model = build_twostep_model(&p).unwrap();
    let ours = solved(&model);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.mps");
    std::fs::write(&path, export_mps(&model, MpsFormat::Free).unwrap()).unwrap();
    let script = "import sys, highspy\n\
h = highspy.Highs()\n\
h.setOptionValue('output_flag', False)\n\
h.readModel(sys.argv[1])\n\
h.run()\n\
print(repr(h.getInfo().objective_function_value))\n";
    let out = Command::new("python3")
        .args(["-c", script, path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let theirs: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!(
        (theirs - ours.primal_objective).abs() <= 1e-7 * (1.0 + theirs.abs()),
        "{theirs} vs {}",
        ours.primal_objective
    );
}
