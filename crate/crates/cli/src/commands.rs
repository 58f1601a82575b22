use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use ffopt::dense::DenseMatrix;
use ffopt::lp_solver::{
    export_mps, parse_mps, read_solution, solve, verify_mask_solution, write_solution,
    write_solution_csv, FeasibilityReport, IterationRecord, MpsFormat, SolveStatus, SolverConfig,
};
use ffopt::mask_lp::{build_model, predicted_stats, Formulation, MaskProblem};
use ffopt::sparse_model::{model_stats, ModelStats};
use ffopt::transforms::{
    dft_1d_direct, dft_1d_twostep, dft_2d_direct, dft_2d_twostep, fft_radix3, predict_ops,
    ComplexSignal, FactorPlan, OpCount, RealImage, SampleGrid, Scheme, Sizes, SpectrumGrid,
    COMPLEX_TO_REAL_COST,
};

use crate::args::{ProblemArgs, SolverArgs};
use crate::config::resolve_problem;
use crate::error::{CliError, CliResult};
use crate::io::{read_input, write_atomic, write_json};
use crate::render::{
    encode_pgm, linear_stretch, log_stretch, mirror_quarter, psf_field, pupil_image,
};

#[derive(Debug, Clone, Serialize)]
pub struct FormulationStats {
    pub n_constraints: usize,
    pub n_variables: usize,
    pub n_nonzeros: usize,
    /// `true` when counted on a built model, `false` for the closed form.
    pub built: bool,
}

impl FormulationStats {
    fn new(s: ModelStats, built: bool) -> Self {
        Self {
            n_constraints: s.n_constraints,
            n_variables: s.n_variables,
            n_nonzeros: s.n_nonzeros,
            built,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StatsReport {
    pub n: usize,
    pub m: usize,
    pub rho0: f64,
    pub rho1: f64,
    pub contrast: f64,
    pub onestep: FormulationStats,
    pub twostep: FormulationStats,
    /// One-step over two-step nonzeros.
    pub nnz_ratio: f64,
    pub ops_direct2d: OpCount,
    pub ops_twostep2d: OpCount,
    pub complex_to_real_cost: u64,
}

fn formulation_stats(
    p: &MaskProblem,
    f: Formulation,
    build_limit: usize,
) -> CliResult<FormulationStats> {
    let predicted = predicted_stats(p, f);
    if predicted.n_nonzeros > build_limit {
        return Ok(FormulationStats::new(predicted, false));
    }
    let model = build_model(p, f)?;
    Ok(FormulationStats::new(model_stats(&model), true))
}

pub fn stats_report(p: &MaskProblem, build_limit: usize) -> CliResult<StatsReport> {
    let onestep = formulation_stats(p, Formulation::OneStep, build_limit)?;
    let twostep = formulation_stats(p, Formulation::TwoStep, build_limit)?;
    let sizes = Sizes::new(p.n, p.m + 1);
    Ok(StatsReport {
        n: p.n,
        m: p.m,
        rho0: p.rho0,
        rho1: p.rho1,
        contrast: p.contrast,
        nnz_ratio: onestep.n_nonzeros as f64 / twostep.n_nonzeros as f64,
        onestep,
        twostep,
        ops_direct2d: predict_ops(Scheme::Direct2d, sizes, None)?,
        ops_twostep2d: predict_ops(Scheme::Twostep2d, sizes, None)?,
        complex_to_real_cost: COMPLEX_TO_REAL_COST,
    })
}

pub fn cmd_stats(problem: &ProblemArgs, out: &Path, build_limit: usize) -> CliResult<()> {
    let p = resolve_problem(problem)?;
    let r = stats_report(&p, build_limit)?;
    println!("formulation constraints variables nonzeros source");
    for (name, s) in [("onestep", &r.onestep), ("twostep", &r.twostep)] {
        let source = if s.built { "built" } else { "formula" };
        println!(
            "{name} {} {} {} {source}",
            s.n_constraints, s.n_variables, s.n_nonzeros
        );
    }
    println!("nnz_ratio {:.4}", r.nnz_ratio);
    println!(
        "ops direct2d {} twostep2d {}",
        r.ops_direct2d, r.ops_twostep2d
    );
    write_json(&out.join("stats.json"), &r)
}

fn solver_config(a: &SolverArgs) -> CliResult<SolverConfig> {
    let cfg = SolverConfig {
        max_iterations: a.max_iterations,
        rel_gap_tol: a.gap_tol,
        feas_tol: a.feas_tol,
        step_fraction: a.step_fraction,
        diag_regularization: a.diag_reg,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub source: String,
    pub status: SolveStatus,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub relative_gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub iterations: usize,
    pub dense_normal: bool,
    pub model: ModelStats,
    pub feasibility: Option<FeasibilityReport>,
    pub trace: Vec<IterationRecord>,
}

pub fn cmd_solve(
    problem: &ProblemArgs,
    formulation: Formulation,
    mps: Option<&Path>,
    solver: &SolverArgs,
    out: &Path,
) -> CliResult<()> {
    let cfg = solver_config(solver)?;
    let (model, mask, source) = match mps {
        Some(path) => (
            parse_mps(&read_input(path)?)?,
            None,
            path.display().to_string(),
        ),
        None => {
            let p = resolve_problem(problem)?;
            (
                build_model(&p, formulation)?,
                Some(p),
                formulation.to_string(),
            )
        }
    };
    let sol = solve(&model, &cfg)?;
    let feasibility = match (&mask, sol.status) {
        (Some(p), SolveStatus::Optimal) => Some(verify_mask_solution(p, &sol)?),
        _ => None,
    };
    println!(
        "status={} objective={:.10} dual={:.10} iterations={}",
        sol.status, sol.primal_objective, sol.dual_objective, sol.iterations
    );
    if let Some(f) = &feasibility {
        println!(
            "max_contrast_violation={:.3e} binary_fraction={:.4}",
            f.max_contrast_violation, f.binary_fraction
        );
    }
    write_atomic(&out.join("solution.txt"), write_solution(&sol).as_bytes())?;
    write_atomic(
        &out.join("solution.csv"),
        write_solution_csv(&sol)?.as_bytes(),
    )?;
    let report = SolveReport {
        source,
        status: sol.status,
        primal_objective: sol.primal_objective,
        dual_objective: sol.dual_objective,
        relative_gap: sol.relative_gap(),
        primal_infeasibility: sol.primal_infeasibility,
        dual_infeasibility: sol.dual_infeasibility,
        iterations: sol.iterations,
        dense_normal: sol.dense_normal,
        model: model_stats(&model),
        feasibility,
        trace: sol.trace.clone(),
    };
    write_json(&out.join("report.json"), &report)?;
    match CliError::from_status(sol.status) {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

pub fn cmd_export(
    problem: &ProblemArgs,
    formulation: Formulation,
    free: bool,
    mps: Option<&Path>,
    out: &Path,
) -> CliResult<()> {
    let p = resolve_problem(problem)?;
    let model = build_model(&p, formulation)?;
    let format = if free {
        MpsFormat::Free
    } else {
        MpsFormat::Fixed
    };
    let text = export_mps(&model, format)?;
    let path = match mps {
        Some(path) => path.to_path_buf(),
        None => out.join(format!("{formulation}.mps")),
    };
    write_atomic(&path, text.as_bytes())?;
    println!(
        "{formulation} {} -> {}",
        model_stats(&model),
        path.display()
    );
    Ok(())
}

pub fn cmd_render(
    problem: &ProblemArgs,
    solution: &Path,
    size: usize,
    floor: f64,
    out: &Path,
) -> CliResult<()> {
    let p = resolve_problem(problem)?;
    let sol = read_solution(&read_input(solution)?)?;
    let quarter = pupil_image(&p, &sol)?;
    let mask = mirror_quarter(&quarter);
    let field = psf_field(&p, &quarter, size)?;
    let log_pixels = log_stretch(&field, floor)?;
    write_atomic(
        &out.join("mask.pgm"),
        &encode_pgm(mask.ncols(), mask.nrows(), &linear_stretch(&mask)),
    )?;
    write_atomic(
        &out.join("psf_log.pgm"),
        &encode_pgm(size, size, &log_pixels),
    )?;
    write_atomic(
        &out.join("psf_linear.pgm"),
        &encode_pgm(size, size, &linear_stretch(&field)),
    )?;
    println!(
        "mask {0}x{0}, psf {size}x{size} -> {1}",
        mask.nrows(),
        out.display()
    );
    Ok(())
}

pub fn cmd_verify(problem: &ProblemArgs, solution: &Path, out: &Path) -> CliResult<()> {
    let p = resolve_problem(problem)?;
    let sol = read_solution(&read_input(solution)?)?;
    let report = verify_mask_solution(&p, &sol)?;
    println!(
        "max_contrast_violation={:.6e} max_bound_violation={:.6e} throughput={:.10} binary_fraction={:.6} peak={:.10}",
        report.max_contrast_violation,
        report.max_bound_violation,
        report.throughput,
        report.binary_fraction,
        report.peak
    );
    write_json(&out.join("report.json"), &report)
}

/// Rows of `re[,im]` numbers; a non-numeric first row is treated as a header.
pub fn parse_rows(text: &str) -> CliResult<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (idx, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Usage(format!("input row {}: {e}", idx + 1)))?;
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if idx == 0 => continue,
            Err(_) => {
                return Err(CliError::Usage(format!(
                    "input row {}: not a number",
                    idx + 1
                )))
            }
        }
    }
    Ok(rows)
}

fn parse_plan(s: &str) -> CliResult<FactorPlan> {
    let v: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("factors must be N0,N1,M0,M1, got `{s}`")))?;
    match v.as_slice() {
        &[a, b, c, d] => Ok(FactorPlan::from_factors(a, b, c, d)?),
        _ => Err(CliError::Usage(format!(
            "factors must be N0,N1,M0,M1, got `{s}`"
        ))),
    }
}

/// The valid plan with the fewest predicted operations.
pub fn auto_plan(x: &SampleGrid, xi: &SpectrumGrid) -> CliResult<FactorPlan> {
    let sizes = Sizes::new(x.len(), xi.len());
    FactorPlan::enumerate_valid(x, xi)
        .into_iter()
        .filter_map(|plan| {
            predict_ops(Scheme::Twostep1d, sizes, Some(&plan))
                .ok()
                .map(|c| (c, plan))
        })
        .min_by_key(|(c, _)| *c)
        .map(|(_, plan)| plan)
        .ok_or_else(|| CliError::Usage("no valid two-step factor plan for these grids".into()))
}

pub struct TransformArgs<'a> {
    pub scheme: &'a str,
    pub input: &'a Path,
    pub factors: Option<&'a str>,
    pub dx: Option<f64>,
    pub dxi: Option<f64>,
    pub spectrum_len: Option<usize>,
    pub out: &'a Path,
}

/// Measured and predicted counts of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransformCounts {
    pub measured: OpCount,
    pub predicted: OpCount,
}

pub fn cmd_transform(a: &TransformArgs<'_>) -> CliResult<TransformCounts> {
    let scheme: Scheme = a.scheme.parse()?;
    let rows = parse_rows(&read_input(a.input)?)?;
    if rows.is_empty() {
        return Err(CliError::Usage("input signal is empty".into()));
    }
    let (csv_text, counts) = match scheme {
        Scheme::Direct1d | Scheme::Twostep1d | Scheme::Radix3 => transform_1d(scheme, &rows, a)?,
        Scheme::Direct2d | Scheme::Twostep2d => transform_2d(scheme, &rows, a)?,
    };
    write_atomic(&a.out.join("spectrum.csv"), csv_text.as_bytes())?;
    println!(
        "scheme={} measured_ops={} predicted_ops={}",
        a.scheme, counts.measured, counts.predicted
    );
    Ok(counts)
}

fn transform_1d(
    scheme: Scheme,
    rows: &[Vec<f64>],
    a: &TransformArgs<'_>,
) -> CliResult<(String, TransformCounts)> {
    let values = rows
        .iter()
        .enumerate()
        .map(|(i, r)| match r.as_slice() {
            [re] => Ok(Complex64::new(*re, 0.0)),
            [re, im] => Ok(Complex64::new(*re, *im)),
            _ => Err(CliError::Usage(format!(
                "input row {}: expected re or re,im",
                i + 1
            ))),
        })
        .collect::<CliResult<Vec<_>>>()?;
    let big_n = values.len();
    let big_m = a.spectrum_len.unwrap_or(big_n);
    let dx = a.dx.unwrap_or(1.0);
    let dxi = a.dxi.unwrap_or(1.0 / (big_n as f64 * dx));
    let x = SampleGrid::odd_with_len(big_n, dx)?;
    let xi = SpectrumGrid::odd_with_len(big_m, dxi)?;
    let signal = ComplexSignal::new(x, values)?;
    let sizes = Sizes::new(big_n, big_m);
    let (spectrum, measured, predicted) = match scheme {
        Scheme::Direct1d => {
            let (s, c) = dft_1d_direct(&signal, &xi)?;
            (s, c, predict_ops(scheme, sizes, None)?)
        }
        Scheme::Radix3 => {
            let (s, c) = fft_radix3(&signal, &xi)?;
            (s, c, predict_ops(scheme, sizes, None)?)
        }
        _ => {
            let plan = match a.factors {
                Some(s) => parse_plan(s)?,
                None => auto_plan(&x, &xi)?,
            };
            let (s, c) = dft_1d_twostep(&signal, &xi, &plan)?;
            (s, c, predict_ops(scheme, sizes, Some(&plan))?)
        }
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(["j", "xi", "re", "im"]).map_err(io)?;
    let half = xi.half_count() as i64;
    for (pos, v) in spectrum.values().iter().enumerate() {
        w.write_record([
            (pos as i64 - half).to_string(),
            xi.coord(pos).to_string(),
            v.re.to_string(),
            v.im.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Output(e.to_string()))?;
    let text = String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))?;
    Ok((
        text,
        TransformCounts {
            measured,
            predicted,
        },
    ))
}

fn transform_2d(
    scheme: Scheme,
    rows: &[Vec<f64>],
    a: &TransformArgs<'_>,
) -> CliResult<(String, TransformCounts)> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Usage(format!(
            "2D input must be a square {n}x{n} quarter-plane image"
        )));
    }
    let m = a.spectrum_len.unwrap_or(n);
    if m == 0 {
        return Err(CliError::Usage("spectrum length must be positive".into()));
    }
    let dx = a.dx.unwrap_or(1.0 / (2 * n) as f64);
    let dxi = a.dxi.unwrap_or(1.0);
    let x = SampleGrid::even_offset(n, dx)?;
    let xi = SpectrumGrid::zero_anchored(m - 1, dxi)?;
    let values = DenseMatrix::from_row_major(n, n, rows.concat())?;
    let image = RealImage::new(values, x, x)?;
    let (spectrum, measured) = match scheme {
        Scheme::Direct2d => dft_2d_direct(&image, &(xi, xi))?,
        _ => dft_2d_twostep(&image, &(xi, xi))?,
    };
    let predicted = predict_ops(scheme, Sizes::new(n, m), None)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for i in 0..spectrum.values.nrows() {
        w.write_record(spectrum.values.row(i).iter().map(|v| v.to_string()))
            .map_err(|e| CliError::Output(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Output(e.to_string()))?;
    let text = String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))?;
    Ok((
        text,
        TransformCounts {
            measured,
            predicted,
        },
    ))
}
