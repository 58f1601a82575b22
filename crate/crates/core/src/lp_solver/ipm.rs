//! Mehrotra predictor-corrector on the scaled bounded standard form.
//!
//! Upper bounds carry their own slack `t` with `z + t = u` kept as a
//! residual, so the starting point need not lie inside the box.

#![allow(clippy::needless_range_loop)]

use super::kkt::KktSolver;
use super::standard::StandardForm;
use super::{IterationRecord, SolveStatus, SolverConfig};
use crate::error::Result;

const FREE_DIAG: f64 = 1e-8;
const FREE_START_DIAG: f64 = 1e-6;
const DIVERGENCE: f64 = 1e12;
const STALL_STEP: f64 = 1e-10;
const STALL_LIMIT: usize = 5;
/// Iterations without a better feasible iterate before giving up.
const BEST_PATIENCE: usize = 10;
const REFINE_STEPS: usize = 20;
const SOLVE_ACCURACY: f64 = 1e-6;
const ACCURACY_FLOOR: f64 = 1e-9;
const MAX_CORRECTORS: usize = 3;
const BETA_MIN: f64 = 0.1;
const BETA_MAX: f64 = 10.0;

pub(crate) struct Outcome {
    pub status: SolveStatus,
    pub z: Vec<f64>,
    pub y: Vec<f64>,
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub dense_normal: bool,
}

#[derive(Clone)]
struct Point {
    z: Vec<f64>,
    t: Vec<f64>,
    y: Vec<f64>,
    zl: Vec<f64>,
    zu: Vec<f64>,
}

struct Direction {
    dz: Vec<f64>,
    dt: Vec<f64>,
    dy: Vec<f64>,
    dzl: Vec<f64>,
    dzu: Vec<f64>,
}

struct Residual {
    /// Dual part weighted by `1/sqrt(max(d, 1))`, combined with the primal.
    weighted: f64,
    primal: f64,
}

/// Best primal and dual feasible iterate seen, by objective gap.
struct Best {
    point: Point,
    gap: f64,
    pinf: f64,
    dinf: f64,
    pobj: f64,
    dobj: f64,
}

/// Right-hand sides of one Newton solve.
struct Rhs<'a> {
    rp: &'a [f64],
    rd: &'a [f64],
    rb: &'a [f64],
    rl: &'a [f64],
    ru: &'a [f64],
}

struct Workspace<'a> {
    sf: &'a StandardForm,
    has_l: Vec<bool>,
    has_u: Vec<bool>,
    solver: KktSolver,
    d: Vec<f64>,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Workspace<'_> {
    /// Solves `[-D A'; A 0] [x; y] = [rt; rp]`. A solve whose residuals
    /// exceed `bounds` (dual, primal) is retried with stronger
    /// regularization.
    fn kkt_solve(&mut self, rt: &[f64], rp: &[f64], bounds: (f64, f64)) -> (Vec<f64>, Vec<f64>) {
        loop {
            let (x, y, res) = self.refined_solve(rt, rp);
            let accurate = res.weighted <= bounds.0 && res.primal <= bounds.1;
            if accurate
                || !self.solver.escalate()
                || self.solver.factor(&self.sf.a, &self.d).is_err()
            {
                return (x, y);
            }
        }
    }

    /// Residual of `(x, y)`, written into `r1` and `r2`.
    fn residual(
        &self,
        rt: &[f64],
        rp: &[f64],
        x: &[f64],
        y: &[f64],
        r1: &mut [f64],
        r2: &mut [f64],
    ) -> Residual {
        let a = &self.sf.a;
        a.mul_t(y, r1);
        for j in 0..r1.len() {
            r1[j] = rt[j] + self.d[j] * x[j] - r1[j];
        }
        a.mul(x, r2);
        for i in 0..r2.len() {
            r2[i] = rp[i] - r2[i];
        }
        let weighted = r1
            .iter()
            .zip(&self.d)
            .fold(0.0f64, |m, (r, d)| m.max(r.abs() / d.max(1.0).sqrt()));
        let finite = |v: f64| if v.is_nan() { f64::INFINITY } else { v };
        let primal = finite(max_abs(r2));
        Residual {
            weighted: finite(weighted).max(primal),
            primal,
        }
    }

    fn refined_solve(&mut self, rt: &[f64], rp: &[f64]) -> (Vec<f64>, Vec<f64>, Residual) {
        let (m, n) = (self.sf.nrows(), self.sf.ncols());
        let scale = 1.0 + max_abs(rt).max(max_abs(rp));
        let (mut x, mut y) = self.solver.solve(&self.sf.a, rt, rp);
        let mut r1 = vec![0.0; n];
        let mut r2 = vec![0.0; m];
        let mut best = self.residual(rt, rp, &x, &y, &mut r1, &mut r2);
        for _ in 0..REFINE_STEPS {
            if best.weighted <= 1e-14 * scale {
                break;
            }
            let (cx, cy) = self.solver.solve(&self.sf.a, &r1, &r2);
            let xn: Vec<f64> = x.iter().zip(&cx).map(|(v, c)| v + c).collect();
            let yn: Vec<f64> = y.iter().zip(&cy).map(|(v, c)| v + c).collect();
            let res = self.residual(rt, rp, &xn, &yn, &mut r1, &mut r2);
            let improved = res.weighted < 0.5 * best.weighted;
            if res.weighted < best.weighted {
                x = xn;
                y = yn;
                best = res;
            }
            if !improved {
                break;
            }
        }
        (x, y, best)
    }

    fn direction(&mut self, p: &Point, sl: &[f64], r: &Rhs<'_>) -> Direction {
        let n = self.sf.ncols();
        let mut ru_eff = vec![0.0; n];
        let mut rt = r.rd.to_vec();
        for j in 0..n {
            if self.has_l[j] {
                rt[j] -= r.rl[j] / sl[j];
            }
            if self.has_u[j] {
                ru_eff[j] = r.ru[j] - p.zu[j] * r.rb[j];
                rt[j] += ru_eff[j] / p.t[j];
            }
        }
        let bounds = (
            SOLVE_ACCURACY * (1.0 + max_abs(&rt)),
            max_abs(r.rp).max(ACCURACY_FLOOR),
        );
        let (dz, dy) = self.kkt_solve(&rt, r.rp, bounds);
        let mut dt = vec![0.0; n];
        let mut dzl = vec![0.0; n];
        let mut dzu = vec![0.0; n];
        for j in 0..n {
            if self.has_l[j] {
                dzl[j] = (r.rl[j] - p.zl[j] * dz[j]) / sl[j];
            }
            if self.has_u[j] {
                dt[j] = r.rb[j] - dz[j];
                dzu[j] = (ru_eff[j] + p.zu[j] * dz[j]) / p.t[j];
            }
        }
        // The dual equation error of the solve goes to the active bound's
        // multiplier, so full steps stay dual feasible.
        let mut aty = vec![0.0; n];
        self.sf.a.mul_t(&dy, &mut aty);
        for j in 0..n {
            let e = r.rd[j] - aty[j] - dzl[j] + dzu[j];
            if self.has_l[j] && (!self.has_u[j] || p.zl[j] >= p.zu[j]) {
                dzl[j] += e;
            } else if self.has_u[j] {
                dzu[j] -= e;
            }
        }
        Direction {
            dz,
            dt,
            dy,
            dzl,
            dzu,
        }
    }

    fn primal_step(&self, p: &Point, sl: &[f64], d: &Direction) -> f64 {
        let mut alpha = f64::INFINITY;
        for j in 0..sl.len() {
            if self.has_l[j] && d.dz[j] < 0.0 {
                alpha = alpha.min(-sl[j] / d.dz[j]);
            }
            if self.has_u[j] && d.dt[j] < 0.0 {
                alpha = alpha.min(-p.t[j] / d.dt[j]);
            }
        }
        alpha
    }

    fn dual_step(&self, p: &Point, d: &Direction) -> f64 {
        let mut alpha = f64::INFINITY;
        for j in 0..p.zl.len() {
            if self.has_l[j] && d.dzl[j] < 0.0 {
                alpha = alpha.min(-p.zl[j] / d.dzl[j]);
            }
            if self.has_u[j] && d.dzu[j] < 0.0 {
                alpha = alpha.min(-p.zu[j] / d.dzu[j]);
            }
        }
        alpha
    }

    fn set_diagonal(&mut self, p: &Point, sl: &[f64], reg: f64) {
        for j in 0..self.d.len() {
            let mut d = reg;
            if self.has_l[j] {
                d += p.zl[j] / sl[j];
            }
            if self.has_u[j] {
                d += p.zu[j] / p.t[j];
            }
            if !self.has_l[j] && !self.has_u[j] {
                d += FREE_DIAG;
            }
            self.d[j] = d;
        }
    }

    /// Weighted least-squares primal and dual estimates, shifted into the
    /// interior. Free columns are weighted so that they absorb the primal
    /// correction and carry almost no reduced cost.
    fn starting_point(&mut self) -> Result<Point> {
        let sf = self.sf;
        let (m, n) = (sf.nrows(), sf.ncols());
        for j in 0..n {
            self.d[j] = if self.has_l[j] || self.has_u[j] {
                1.0
            } else {
                FREE_START_DIAG
            };
        }
        self.solver.factor(&sf.a, &self.d)?;

        let mut z: Vec<f64> = (0..n).map(|j| sf.start[j].unwrap_or(0.0)).collect();
        let mut r = vec![0.0; m];
        sf.a.mul(&z, &mut r);
        for i in 0..m {
            r[i] = sf.b[i] - r[i];
        }
        let (corr, _) = self.kkt_solve(&vec![0.0; n], &r, (f64::INFINITY, f64::INFINITY));
        for j in 0..n {
            z[j] += corr[j];
        }

        let (neg_red, y) = self.kkt_solve(&sf.c, &vec![0.0; m], (f64::INFINITY, f64::INFINITY));
        let red: Vec<f64> = neg_red.iter().map(|v| -v).collect();

        let mut sl = vec![0.0; n];
        let mut t = vec![0.0; n];
        let mut zl = vec![0.0; n];
        let mut zu = vec![0.0; n];
        let mut primal = Vec::new();
        let mut dual = Vec::new();
        for j in 0..n {
            if self.has_l[j] {
                sl[j] = z[j] - sf.lower[j];
                zl[j] = red[j].max(0.0);
                primal.push(sl[j]);
                dual.push(zl[j]);
            }
            if self.has_u[j] {
                t[j] = sf.upper[j] - z[j];
                zu[j] = (-red[j]).max(0.0);
                primal.push(t[j]);
                dual.push(zu[j]);
            }
        }
        if !primal.is_empty() {
            let min_p = primal.iter().copied().fold(f64::INFINITY, f64::min);
            let min_d = dual.iter().copied().fold(f64::INFINITY, f64::min);
            let mut dp = (-1.5 * min_p).max(0.0);
            let mut dd = (-1.5 * min_d).max(0.0);
            let prod: f64 = primal
                .iter()
                .zip(&dual)
                .map(|(a, b)| (a + dp) * (b + dd))
                .sum();
            let sum_p: f64 = primal.iter().map(|a| a + dp).sum();
            let sum_d: f64 = dual.iter().map(|b| b + dd).sum();
            if sum_d > 0.0 {
                dp += 0.5 * prod / sum_d;
            }
            if sum_p > 0.0 {
                dd += 0.5 * prod / sum_p;
            }
            if !(dp > 0.0 && dp.is_finite()) {
                dp = 1.0;
            }
            if !(dd > 0.0 && dd.is_finite()) {
                dd = 1.0;
            }
            for j in 0..n {
                if self.has_l[j] {
                    z[j] = sf.lower[j] + sl[j] + dp;
                    zl[j] += dd;
                }
                if self.has_u[j] {
                    t[j] += dp;
                    zu[j] += dd;
                }
            }
        }
        Ok(Point { z, t, y, zl, zu })
    }
}

pub(crate) fn run(sf: &StandardForm, cfg: &SolverConfig) -> Result<Outcome> {
    let (m, n) = (sf.nrows(), sf.ncols());
    let has_l: Vec<bool> = sf.lower.iter().map(|v| v.is_finite()).collect();
    let has_u: Vec<bool> = sf.upper.iter().map(|v| v.is_finite()).collect();
    let n_compl = has_l.iter().chain(&has_u).filter(|b| **b).count();
    let solver = KktSolver::new(&sf.a)?;
    let dense_normal = solver.is_dense();
    let mut ws = Workspace {
        sf,
        has_l: has_l.clone(),
        has_u: has_u.clone(),
        solver,
        d: vec![1.0; n],
    };

    let mut p = ws.starting_point()?;
    let mut trace = Vec::new();
    let mut rp = vec![0.0; m];
    let mut rd = vec![0.0; n];
    let mut rb = vec![0.0; n];
    let mut sl = vec![1.0; n];
    let mut stalled = 0;
    let mut iter = 0;
    let mut best: Option<Best> = None;
    let mut since_best = 0;

    loop {
        for j in 0..n {
            if has_l[j] {
                sl[j] = p.z[j] - sf.lower[j];
            }
            if has_u[j] {
                rb[j] = sf.upper[j] - p.z[j] - p.t[j];
            }
        }
        sf.a.mul(&p.z, &mut rp);
        for i in 0..m {
            rp[i] = sf.b[i] - rp[i];
        }
        sf.a.mul_t(&p.y, &mut rd);
        for j in 0..n {
            rd[j] = sf.c[j] - rd[j] - p.zl[j] + p.zu[j];
        }
        let mut compl = 0.0;
        for j in 0..n {
            if has_l[j] {
                compl += sl[j] * p.zl[j];
            }
            if has_u[j] {
                compl += p.t[j] * p.zu[j];
            }
        }
        let mu = if n_compl > 0 {
            compl / n_compl as f64
        } else {
            0.0
        };

        let row_inf = (0..m).fold(0.0f64, |acc, i| acc.max(rp[i].abs() / sf.row_scale[i]));
        let bound_inf = (0..n).fold(0.0f64, |acc, j| acc.max(rb[j].abs() * sf.col_scale[j]));
        let pinf = row_inf.max(bound_inf);
        let dinf = (0..n).fold(0.0f64, |acc, j| {
            acc.max(rd[j].abs() * sf.obj_scale / sf.col_scale[j])
        });
        let pobj = sf.obj_scale * dot(&sf.c, &p.z) + sf.obj_offset;
        let mut dsum = dot(&sf.b, &p.y);
        for j in 0..n {
            if has_l[j] {
                dsum += sf.lower[j] * p.zl[j];
            }
            if has_u[j] {
                dsum -= sf.upper[j] * p.zu[j];
            }
        }
        let dobj = sf.obj_scale * dsum + sf.obj_offset;
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs());
        trace.push(IterationRecord {
            iteration: iter,
            primal_objective: sf.flip * pobj,
            dual_objective: sf.flip * dobj,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
            mu,
            step_primal: 0.0,
            step_dual: 0.0,
        });

        let primal_big = max_abs(&p.z).max(max_abs(&p.t)) > DIVERGENCE;
        let dual_big = max_abs(&p.y).max(max_abs(&p.zl)).max(max_abs(&p.zu)) > DIVERGENCE;
        let feasible = pinf <= cfg.feas_tol * (1.0 + sf.rhs_norm)
            && dinf <= cfg.feas_tol * (1.0 + sf.cost_norm);
        if feasible && best.as_ref().is_none_or(|b| gap < b.gap) {
            best = Some(Best {
                point: p.clone(),
                gap,
                pinf,
                dinf,
                pobj,
                dobj,
            });
            since_best = 0;
        } else if best.is_some() {
            since_best += 1;
        }
        let verdict = if !(pinf.is_finite() && dinf.is_finite() && mu.is_finite()) {
            Some(SolveStatus::NumericalFailure)
        } else if feasible && gap <= cfg.rel_gap_tol {
            Some(SolveStatus::Optimal)
        } else if primal_big && dinf <= cfg.feas_tol.sqrt() * (1.0 + sf.cost_norm) {
            Some(SolveStatus::Unbounded)
        } else if dual_big {
            Some(SolveStatus::Infeasible)
        } else if primal_big {
            Some(SolveStatus::Unbounded)
        } else if stalled >= STALL_LIMIT || since_best >= BEST_PATIENCE {
            Some(SolveStatus::NumericalFailure)
        } else if iter >= cfg.max_iterations {
            Some(SolveStatus::IterationLimit)
        } else {
            None
        };
        if let Some(status) = verdict {
            let fallback = matches!(
                status,
                SolveStatus::NumericalFailure | SolveStatus::IterationLimit
            );
            if let (true, Some(b)) = (fallback, best.take()) {
                return Ok(Outcome {
                    status,
                    z: b.point.z,
                    y: b.point.y,
                    iterations: iter,
                    trace,
                    primal_infeasibility: b.pinf,
                    dual_infeasibility: b.dinf,
                    primal_objective: sf.flip * b.pobj,
                    dual_objective: sf.flip * b.dobj,
                    dense_normal,
                });
            }
            return Ok(Outcome {
                status,
                z: p.z,
                y: p.y,
                iterations: iter,
                trace,
                primal_infeasibility: pinf,
                dual_infeasibility: dinf,
                primal_objective: sf.flip * pobj,
                dual_objective: sf.flip * dobj,
                dense_normal,
            });
        }

        ws.set_diagonal(&p, &sl, cfg.diag_regularization);
        if ws.solver.factor(&sf.a, &ws.d).is_err() {
            stalled = STALL_LIMIT;
            iter += 1;
            continue;
        }

        // Predictor.
        let rl: Vec<f64> = (0..n)
            .map(|j| if has_l[j] { -sl[j] * p.zl[j] } else { 0.0 })
            .collect();
        let ru: Vec<f64> = (0..n)
            .map(|j| if has_u[j] { -p.t[j] * p.zu[j] } else { 0.0 })
            .collect();
        let aff = ws.direction(
            &p,
            &sl,
            &Rhs {
                rp: &rp,
                rd: &rd,
                rb: &rb,
                rl: &rl,
                ru: &ru,
            },
        );
        let ap = ws.primal_step(&p, &sl, &aff).min(1.0);
        let ad = ws.dual_step(&p, &aff).min(1.0);
        let mut compl_aff = 0.0;
        for j in 0..n {
            if has_l[j] {
                compl_aff += (sl[j] + ap * aff.dz[j]) * (p.zl[j] + ad * aff.dzl[j]);
            }
            if has_u[j] {
                compl_aff += (p.t[j] + ap * aff.dt[j]) * (p.zu[j] + ad * aff.dzu[j]);
            }
        }
        let mu_aff = if n_compl > 0 {
            compl_aff / n_compl as f64
        } else {
            0.0
        };
        let sigma = if mu > 0.0 {
            (mu_aff / mu).clamp(0.0, 1.0).powi(3)
        } else {
            0.0
        };

        // Corrector.
        let target = sigma * mu;
        let mut rl: Vec<f64> = (0..n)
            .map(|j| {
                if has_l[j] {
                    target - sl[j] * p.zl[j] - aff.dz[j] * aff.dzl[j]
                } else {
                    0.0
                }
            })
            .collect();
        let mut ru: Vec<f64> = (0..n)
            .map(|j| {
                if has_u[j] {
                    target - p.t[j] * p.zu[j] - aff.dt[j] * aff.dzu[j]
                } else {
                    0.0
                }
            })
            .collect();
        let dir = ws.direction(
            &p,
            &sl,
            &Rhs {
                rp: &rp,
                rd: &rd,
                rb: &rb,
                rl: &rl,
                ru: &ru,
            },
        );
        let mut dir = dir;
        let mut ap = ws.primal_step(&p, &sl, &dir).min(1.0);
        let mut ad = ws.dual_step(&p, &dir).min(1.0);
        for _ in 0..MAX_CORRECTORS {
            if ap >= 1.0 && ad >= 1.0 {
                break;
            }
            let tp = (1.5 * ap + 0.1).min(1.0);
            let td = (1.5 * ad + 0.1).min(1.0);
            let push = |v: f64| {
                if v < BETA_MIN * target {
                    BETA_MIN * target - v
                } else if v > BETA_MAX * target {
                    (BETA_MAX * target - v).max(-BETA_MAX * target)
                } else {
                    0.0
                }
            };
            let cl: Vec<f64> = (0..n)
                .map(|j| {
                    if has_l[j] {
                        rl[j] + push((sl[j] + tp * dir.dz[j]) * (p.zl[j] + td * dir.dzl[j]))
                    } else {
                        0.0
                    }
                })
                .collect();
            let cu: Vec<f64> = (0..n)
                .map(|j| {
                    if has_u[j] {
                        ru[j] + push((p.t[j] + tp * dir.dt[j]) * (p.zu[j] + td * dir.dzu[j]))
                    } else {
                        0.0
                    }
                })
                .collect();
            let trial = ws.direction(
                &p,
                &sl,
                &Rhs {
                    rp: &rp,
                    rd: &rd,
                    rb: &rb,
                    rl: &cl,
                    ru: &cu,
                },
            );
            let np = ws.primal_step(&p, &sl, &trial).min(1.0);
            let nd = ws.dual_step(&p, &trial).min(1.0);
            if np.min(nd) < ap.min(ad) + 0.1 * (tp.min(td) - ap.min(ad)) {
                break;
            }
            dir = trial;
            ap = np;
            ad = nd;
            rl = cl;
            ru = cu;
        }
        let ap = (cfg.step_fraction * ap).min(1.0);
        let ad = (cfg.step_fraction * ad).min(1.0);
        if !(ap.is_finite() && ad.is_finite()) {
            stalled = STALL_LIMIT;
        } else {
            if ap < STALL_STEP && ad < STALL_STEP {
                stalled += 1;
            } else {
                stalled = 0;
            }
            for j in 0..n {
                p.z[j] += ap * dir.dz[j];
                p.t[j] += ap * dir.dt[j];
                p.zl[j] += ad * dir.dzl[j];
                p.zu[j] += ad * dir.dzu[j];
            }
            for i in 0..m {
                p.y[i] += ad * dir.dy[i];
            }
        }
        if let Some(r) = trace.last_mut() {
            r.step_primal = ap;
            r.step_dual = ad;
        }
        iter += 1;
    }
}
