use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ffopt::dense::DenseMatrix;
use ffopt::lp_solver::{parse_mps, write_solution, Solution, SolveStatus};
use ffopt::mask_lp::{enumerate_pupil, predicted_stats, pupil_var_name, Formulation, MaskProblem};
use ffopt::sparse_model::model_stats;
use ffopt_cli::render::{linear_stretch, log_stretch, psf_field};
use tempfile::TempDir;

fn ffopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffopt"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_signal(dir: &Path, name: &str, values: &[f64]) -> String {
    let path = dir.join(name);
    let text: String = values.iter().map(|v| format!("{v},0\n")).collect();
    fs::write(&path, text).unwrap();
    p(&path).to_string()
}

fn read_spectrum(path: &Path) -> Vec<(f64, f64)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            (f[2], f[3])
        })
        .collect()
}

#[test]
fn radix3_reports_270() {
    let dir = TempDir::new().unwrap();
    let vals: Vec<f64> = (0..27).map(|i| (i as f64 * 0.37).sin()).collect();
    let input = write_signal(dir.path(), "s.csv", &vals);
    let out = ffopt(&[
        "transform",
        "--scheme",
        "radix3",
        "--input",
        &input,
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(
        stdout(&out).contains("measured_ops=270 predicted_ops=270"),
        "{}",
        stdout(&out)
    );
    assert_eq!(read_spectrum(&dir.path().join("spectrum.csv")).len(), 27);
}

#[test]
fn twostep_beats_direct_at_nine() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let vals: Vec<f64> = (0..9).map(|i| 1.0 / (1.0 + i as f64)).collect();
    let input = write_signal(a.path(), "s.csv", &vals);
    let d = ffopt(&[
        "transform",
        "--scheme",
        "direct1d",
        "--input",
        &input,
        "--out",
        p(a.path()),
    ]);
    let t = ffopt(&[
        "transform",
        "--scheme",
        "twostep1d",
        "--factors",
        "3,3,3,3",
        "--input",
        &input,
        "--out",
        p(b.path()),
    ]);
    assert!(stdout(&d).contains("measured_ops=81 predicted_ops=81"));
    assert!(stdout(&t).contains("measured_ops=54 predicted_ops=54"));
    let sd = read_spectrum(&a.path().join("spectrum.csv"));
    let st = read_spectrum(&b.path().join("spectrum.csv"));
    for (x, y) in sd.iter().zip(&st) {
        assert!((x.0 - y.0).abs() <= 1e-12 && (x.1 - y.1).abs() <= 1e-12);
    }
}

#[test]
fn zero_signal_zero_spectrum() {
    let dir = TempDir::new().unwrap();
    let input = write_signal(dir.path(), "z.csv", &[0.0; 9]);
    let out = ffopt(&[
        "transform",
        "--scheme",
        "twostep1d",
        "--input",
        &input,
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&out), 0);
    for (re, im) in read_spectrum(&dir.path().join("spectrum.csv")) {
        assert_eq!((re, im), (0.0, 0.0));
    }
}

#[test]
fn stats_match_library() {
    let dir = TempDir::new().unwrap();
    let out = ffopt(&["stats", "--n", "150", "--m", "35", "--out", p(dir.path())]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("onestep 976 17672 17247872 built"), "{text}");
    assert!(text.contains("twostep 7672 24368 839240 built"), "{text}");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("stats.json")).unwrap()).unwrap();
    assert_eq!(json["twostep"]["n_nonzeros"], 839240);
    assert!(json["nnz_ratio"].as_f64().unwrap() > 20.0);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("p.cfg");
    fs::write(&cfg, "# small\nn = 8\nm = 4\nrho1 = 9\n").unwrap();
    let out = ffopt(&[
        "stats",
        "--config",
        p(&cfg),
        "--m",
        "5",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("stats.json")).unwrap()).unwrap();
    assert_eq!(json["n"], 8);
    assert_eq!(json["m"], 5);
    assert_eq!(json["rho1"], 9.0);

    fs::write(&cfg, "n = 8\nwidth = 3\n").unwrap();
    assert_eq!(
        code(&ffopt(&[
            "stats",
            "--config",
            p(&cfg),
            "--out",
            p(dir.path())
        ])),
        2
    );
}

#[test]
fn export_is_deterministic_and_reparses() {
    let dir = TempDir::new().unwrap();
    let args = ["--n", "10", "--m", "6", "--rho0", "2", "--rho1", "6"];
    let mut read = Vec::new();
    for name in ["a.mps", "b.mps"] {
        let path = dir.path().join(name);
        let mut full = vec!["export", "--formulation", "twostep", "--mps", p(&path)];
        full.extend(args);
        assert_eq!(code(&ffopt(&full)), 0);
        read.push(fs::read(&path).unwrap());
    }
    assert_eq!(read[0], read[1]);
    let model = parse_mps(std::str::from_utf8(&read[0]).unwrap()).unwrap();
    let prob = MaskProblem::new(10, 6).with_radii(2.0, 6.0);
    assert_eq!(
        model_stats(&model),
        predicted_stats(&prob, Formulation::TwoStep)
    );
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let d = p(dir.path());
    assert_eq!(code(&ffopt(&["stats", "--n", "0", "--out", d])), 2);
    assert_eq!(code(&ffopt(&["bogus"])), 2);
    assert_eq!(
        code(&ffopt(&["stats", "--rho0", "5", "--rho1", "4", "--out", d])),
        2
    );

    let infeasible = dir.path().join("inf.mps");
    fs::write(
        &infeasible,
        "NAME inf\nROWS\n N obj\n G lo\n L hi\nCOLUMNS\n x obj 1 lo 1\n x hi 1\nRHS\n RHS lo 2 hi 1\nBOUNDS\n UP BND x 10\nENDATA\n",
    )
    .unwrap();
    assert_eq!(
        code(&ffopt(&["solve", "--mps", p(&infeasible), "--out", d])),
        3
    );

    let args = [
        "solve",
        "--n",
        "8",
        "--m",
        "4",
        "--max-iterations",
        "1",
        "--out",
        d,
    ];
    assert_eq!(code(&ffopt(&args)), 5);

    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let nested = blocker.join("sub");
    assert_eq!(
        code(&ffopt(&[
            "stats",
            "--n",
            "8",
            "--m",
            "4",
            "--out",
            p(&nested)
        ])),
        4
    );
}

#[test]
fn trivial_mps_solve() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("one.mps");
    fs::write(
        &path,
        "NAME one\nOBJSENSE\n    MAX\nROWS\n N obj\n L c1\nCOLUMNS\n x obj 1 c1 1\nRHS\n RHS c1 1\nBOUNDS\n UP BND x 2\nENDATA\n",
    )
    .unwrap();
    let out = ffopt(&["solve", "--mps", p(&path), "--out", p(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let obj: f64 = stdout(&out)
        .split_whitespace()
        .find_map(|w| w.strip_prefix("objective="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((obj - 1.0).abs() < 1e-7, "{obj}");
    assert!(dir.path().join("solution.txt").exists());
    assert!(dir.path().join("solution.csv").exists());
}

fn constant_solution(prob: &MaskProblem, value: f64) -> String {
    let names: Vec<String> = enumerate_pupil(prob)
        .iter()
        .map(|pt| pupil_var_name(pt.k, pt.l))
        .collect();
    write_solution(&Solution {
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
        dense_normal: false,
    })
}

fn pgm_pixels(bytes: &[u8]) -> &[u8] {
    let mut newlines = 0;
    for (i, b) in bytes.iter().enumerate() {
        if *b == b'\n' {
            newlines += 1;
            if newlines == 3 {
                return &bytes[i + 1..];
            }
        }
    }
    panic!("short PGM header");
}

#[test]
fn render_outputs() {
    let dir = TempDir::new().unwrap();
    let prob = MaskProblem::new(8, 4).with_radii(2.0, 6.0);
    let args = [
        "--n", "8", "--m", "4", "--rho0", "2", "--rho1", "6", "--size", "31",
    ];

    let missing = dir.path().join("missing.txt");
    let mut full = vec!["render", "--solution", p(&missing), "--out", p(dir.path())];
    full.extend(args);
    assert_eq!(code(&ffopt(&full)), 2);

    let zero = dir.path().join("zero.txt");
    fs::write(&zero, constant_solution(&prob, 0.0)).unwrap();
    let zdir = dir.path().join("z");
    fs::create_dir(&zdir).unwrap();
    let mut full = vec!["render", "--solution", p(&zero), "--out", p(&zdir)];
    full.extend(args);
    assert_eq!(code(&ffopt(&full)), 0);
    assert!(pgm_pixels(&fs::read(zdir.join("mask.pgm")).unwrap())
        .iter()
        .all(|&b| b == 0));

    let one = dir.path().join("one.txt");
    fs::write(&one, constant_solution(&prob, 1.0)).unwrap();
    let mut images = Vec::new();
    for run in ["r1", "r2"] {
        let out = dir.path().join(run);
        fs::create_dir(&out).unwrap();
        let mut full = vec!["render", "--solution", p(&one), "--out", p(&out)];
        full.extend(args);
        assert_eq!(code(&ffopt(&full)), 0);
        images.push(
            ["mask.pgm", "psf_log.pgm", "psf_linear.pgm"].map(|f| fs::read(out.join(f)).unwrap()),
        );
    }
    assert_eq!(images[0], images[1]);

    let quarter = DenseMatrix::from_fn(8, 8, |k, l| {
        let pts = enumerate_pupil(&prob);
        if pts.iter().any(|pt| pt.k == k + 1 && pt.l == l + 1) {
            1.0
        } else {
            0.0
        }
    });
    let field = psf_field(&prob, &quarter, 31).unwrap();
    assert_eq!(field[(15, 15)], 1.0);
    assert_eq!(
        pgm_pixels(&images[0][1]),
        log_stretch(&field, -10.0).unwrap().as_slice()
    );
    assert_eq!(pgm_pixels(&images[0][2]), linear_stretch(&field).as_slice());
}
