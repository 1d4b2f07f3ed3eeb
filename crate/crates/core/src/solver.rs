//! Radial Navier biharmonic solves on annuli and on the unit ball.
//!
//! The Navier problem splits into two Dirichlet problems for the
//! conservative Laplacian of [`RadialLaplacian`], whose negative is an
//! M-matrix. The nonlinear problem `Δ²u = (u₊)^p` is solved by damped Newton
//! on the split system `Lv = w`, `Lw = f(v)`, with the unknowns interleaved
//! into a pentadiagonal band.

use serde::Serialize;

use crate::analytic::bubble_radial;
use crate::band::BandMatrix;
use crate::dimension::Dimension;
use crate::error::{invalid, Error, Result};
use crate::green::AnnulusDomain;
use crate::grid::{fornberg_weights, RadialField, RadialGrid, RadialLaplacian};

/// `max u` below this marks the trivial solution.
pub const TRIVIAL_THRESHOLD: f64 = 1e-6;

fn check_grid(dom: &AnnulusDomain, grid: &RadialGrid) -> Result<()> {
    let tol = 1e-12;
    if (grid.inner() - dom.inner).abs() > tol * dom.inner.max(1.0) || (grid.outer() - dom.outer).abs() > tol {
        return Err(Error::GridMismatch(format!(
            "grid [{}, {}] does not cover domain [{}, {}]",
            grid.inner(),
            grid.outer(),
            dom.inner,
            dom.outer
        )));
    }
    Ok(())
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Normwise backward error of `L x = b` on the unknown rows.
fn backward_error(op: &RadialLaplacian, x: &[f64], b: &[f64]) -> f64 {
    let lx = op.apply(x);
    let rows = op.first..op.last;
    let r = rows.clone().map(|i| (lx[i] - b[i]).abs()).fold(0.0, f64::max);
    let a_norm = rows.clone().map(|i| op.lo[i].abs() + op.di[i].abs() + op.up[i].abs()).fold(0.0, f64::max);
    let b_norm = rows.map(|i| b[i].abs()).fold(0.0, f64::max);
    let denom = a_norm * sup(x) + b_norm;
    if denom == 0.0 {
        0.0
    } else {
        r / denom
    }
}

/// Relative residual accepted from the two Dirichlet solves.
pub const LINEAR_RESIDUAL_TOL: f64 = 1e-10;

/// Solves `Δ²φ = rhs`, `φ = Δφ = 0` on both boundary spheres (or at `r = 1`
/// with regularity at the origin on the ball). The returned field carries
/// `Δφ` as its Laplacian.
pub fn solve_linear_navier(dim: Dimension, dom: &AnnulusDomain, rhs: &RadialField) -> Result<RadialField> {
    check_grid(dom, &rhs.grid)?;
    let op = RadialLaplacian::new(dim, &rhs.grid);
    // Δψ = rhs with ψ = Δφ, then Δφ = ψ
    let psi = op.solve_dirichlet(&rhs.values)?;
    let phi = op.solve_dirichlet(&psi)?;
    let e1 = backward_error(&op, &psi, &rhs.values);
    let e2 = backward_error(&op, &phi, &psi);
    if e1.max(e2) > LINEAR_RESIDUAL_TOL {
        return Err(Error::LinearSolve(format!("residual {:.3e} above tolerance", e1.max(e2))));
    }
    RadialField::new(rhs.grid.clone(), phi)?.with_laplacian(psi)
}

/// Projection `PU_{μ,0}` of the centred bubble onto the grid's domain.
pub fn projected_bubble(dim: Dimension, grid: &RadialGrid, mu: f64) -> Result<RadialField> {
    let dom = if grid.has_origin() { AnnulusDomain::ball(dim) } else { AnnulusDomain::new(dim, grid.inner())? };
    let p = dim.p();
    let rhs = RadialField::from_fn(grid.clone(), |r| bubble_radial(dim, mu, r).powf(p))?;
    solve_linear_navier(dim, &dom, &rhs)
}

/// Newton settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct NewtonConfig {
    /// Relative sup-norm residual target.
    pub tol: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self { tol: 1e-9, max_iterations: 60, max_halvings: 8 }
    }
}

/// Outcome of a nonlinear solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub eps: f64,
    pub converged: bool,
    pub newton_iterations: usize,
    pub final_residual: f64,
    #[serde(skip)]
    pub u: RadialField,
    #[serde(skip)]
    pub w: RadialField,
    /// `(α_N / max u)^(2/(N-4))`.
    pub mu_estimate: f64,
    pub positivity_violated: bool,
    pub trivial: bool,
}

impl SolveReport {
    pub fn max_u(&self) -> f64 {
        self.u.max()
    }
}

/// `μ` of the centred bubble whose peak equals `peak`.
pub fn mu_from_peak(dim: Dimension, peak: f64) -> f64 {
    (dim.alpha() / peak).powf(2.0 / (dim.nf() - 4.0))
}

struct Residual {
    f1: Vec<f64>,
    f2: Vec<f64>,
    r1: f64,
    r2: f64,
    s1: f64,
    s2: f64,
}

impl Residual {
    fn backward_error(&self) -> f64 {
        if self.s1 > 1e-300 && self.s2 > 1e-300 {
            (self.r1 / self.s1).max(self.r2 / self.s2)
        } else {
            self.r1.max(self.r2)
        }
    }

    /// Line-search merit with scales frozen at `base`.
    fn merit(&self, base: &Residual) -> f64 {
        if base.s1 > 1e-300 && base.s2 > 1e-300 {
            self.r1 / base.s1 + self.r2 / base.s2
        } else {
            self.r1 + self.r2
        }
    }
}

struct System<'a> {
    op: &'a RadialLaplacian,
    p: f64,
}

impl System<'_> {
    /// Split residuals `Lv - w`, `Lw - λ v₊^p` and their normwise backward
    /// error: for each block, `sup|F|` over the sup of the magnitudes of the
    /// terms entering a row.
    fn residual(&self, v: &[f64], w: &[f64], lam: f64) -> Residual {
        let op = self.op;
        let lv = op.apply(v);
        let lw = op.apply(w);
        let mut f1 = vec![0.0; v.len()];
        let mut f2 = vec![0.0; v.len()];
        let (mut s1, mut s2) = (0.0f64, 0.0f64);
        for i in op.first..op.last {
            let fv = lam * v[i].max(0.0).powf(self.p);
            f1[i] = lv[i] - w[i];
            f2[i] = lw[i] - fv;
            s1 = s1.max(op.abs_apply_row(v, i) + w[i].abs());
            s2 = s2.max(fv.abs());
        }
        let (r1, r2) = (sup(&f1), sup(&f2));
        Residual { f1, f2, r1, r2, s1, s2 }
    }

    /// Jacobian of `(Lv - w, Lw - λ v₊^p)` with unknowns interleaved as
    /// `(v_j, w_j)`, which keeps it pentadiagonal.
    fn jacobian(&self, v: &[f64], lam: f64) -> BandMatrix {
        let op = self.op;
        let (a, b) = (op.first, op.last);
        let k = b - a;
        let mut j = BandMatrix::zeros(2 * k, 2, 2);
        for jj in 0..k {
            let i = a + jj;
            let (rv, rw) = (2 * jj, 2 * jj + 1);
            if jj > 0 {
                j.add(rv, 2 * (jj - 1), op.lo[i]);
                j.add(rw, 2 * (jj - 1) + 1, op.lo[i]);
            }
            if jj + 1 < k {
                j.add(rv, 2 * (jj + 1), op.up[i]);
                j.add(rw, 2 * (jj + 1) + 1, op.up[i]);
            }
            j.add(rv, rv, op.di[i]);
            j.add(rv, rw, -1.0);
            j.add(rw, rw, op.di[i]);
            let d = if v[i] > 0.0 { lam * self.p * v[i].powf(self.p - 1.0) } else { 0.0 };
            j.add(rw, rv, -d);
        }
        j
    }
}

/// Damped Newton for `Δu = w`, `Δw = (u₊)^p`, `u = w = 0` on the boundary.
///
/// The iteration runs on the normalised problem `Δ²v = λ v₊^p` with the
/// linear constraint `∫v = ∫u₀`, which removes the attraction of the trivial
/// solution; `u = λ^(1/(p-1)) v` at the end. The relative residual is
/// invariant under this rescaling. An initial guess with `max u₀` below
/// [`TRIVIAL_THRESHOLD`] is iterated without normalisation.
pub fn solve_nonlinear(dim: Dimension, dom: &AnnulusDomain, init: &RadialField, cfg: &NewtonConfig) -> Result<SolveReport> {
    check_grid(dom, &init.grid)?;
    if init.values.iter().any(|v| !v.is_finite()) {
        return Err(invalid("init", "non-finite initial guess"));
    }
    let op = RadialLaplacian::new(dim, &init.grid);
    let p = dim.p();
    let sys = System { op: &op, p };
    let mut v = init.values.clone();
    if !init.grid.has_origin() {
        v[0] = 0.0;
    }
    let last = v.len() - 1;
    v[last] = 0.0;
    let normalised = v.iter().copied().fold(f64::NEG_INFINITY, f64::max) >= TRIVIAL_THRESHOLD;
    let vol = init.grid.volumes(dim);
    let weights: Vec<f64> = (op.first..op.last).map(|i| vol[i]).collect();

    let mut lam = 1.0;
    if normalised {
        // least-squares λ for the initial guess
        let llv = op.apply(&op.apply(&v));
        let (mut num, mut den) = (0.0, 0.0);
        for i in op.first..op.last {
            let fv = v[i].max(0.0).powf(p);
            num += llv[i] * fv;
            den += fv * fv;
        }
        if den > 0.0 && num > 0.0 {
            lam = num / den;
        }
    }

    let mut w = op.apply(&v);
    let mut cur = sys.residual(&v, &w, lam);
    let mut res = cur.backward_error();
    let mut iterations = 0;
    // past the tolerance, keep stepping until a full step stops reducing the
    // residual quickly, which brings the iterate down to the rounding floor
    let mut improving = true;
    while iterations < cfg.max_iterations && (res > cfg.tol || improving) {
        let jac = sys.jacobian(&v, lam);
        let k = op.last - op.first;
        let mut rhs = vec![0.0; 2 * k];
        for jj in 0..k {
            rhs[2 * jj] = -cur.f1[op.first + jj];
            rhs[2 * jj + 1] = -cur.f2[op.first + jj];
        }
        let Ok(x0) = jac.solve(&rhs) else { break };
        let (x, dlam) = if normalised {
            // d/dλ of the second block is -v₊^p
            let mut fp = vec![0.0; 2 * k];
            for jj in 0..k {
                fp[2 * jj + 1] = v[op.first + jj].max(0.0).powf(p);
            }
            let Ok(b) = jac.solve(&fp) else { break };
            let ca: f64 = (0..k).map(|jj| weights[jj] * x0[2 * jj]).sum();
            let cb: f64 = (0..k).map(|jj| weights[jj] * b[2 * jj]).sum();
            if cb == 0.0 {
                break;
            }
            let dlam = -ca / cb;
            (x0.iter().zip(&b).map(|(a, b)| a + dlam * b).collect::<Vec<_>>(), dlam)
        } else {
            (x0, 0.0)
        };
        let mut dv_full = vec![0.0; v.len()];
        let mut dw = vec![0.0; v.len()];
        for jj in 0..k {
            dv_full[op.first + jj] = x[2 * jj];
            dw[op.first + jj] = x[2 * jj + 1];
        }
        let base = cur.merit(&cur);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let tv: Vec<f64> = v.iter().zip(&dv_full).map(|(a, d)| a + t * d).collect();
            let tw: Vec<f64> = w.iter().zip(&dw).map(|(a, d)| a + t * d).collect();
            let tlam = lam + t * dlam;
            if tlam > 0.0 {
                let trial = sys.residual(&tv, &tw, tlam);
                if trial.merit(&cur) < base {
                    accepted = Some((tv, tw, tlam, trial, t));
                    break;
                }
            }
            t *= 0.5;
        }
        iterations += 1;
        let Some((tv, tw, tlam, trial, t)) = accepted else { break };
        improving = t < 1.0 || trial.merit(&cur) < 0.25 * base;
        v = tv;
        w = tw;
        lam = tlam;
        cur = trial;
        res = cur.backward_error();
    }
    let factor = lam.powf(1.0 / (p - 1.0));
    let u: Vec<f64> = v.iter().map(|x| factor * x).collect();
    let w: Vec<f64> = w.iter().map(|x| factor * x).collect();
    let max_u = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let trivial = max_u < TRIVIAL_THRESHOLD;
    let positivity_violated = (op.first..op.last).any(|i| !(u[i] > 0.0));
    let converged = res <= cfg.tol && !positivity_violated && !trivial;
    let grid = init.grid.clone();
    let mu_estimate = if max_u > 0.0 { mu_from_peak(dim, max_u) } else { f64::INFINITY };
    Ok(SolveReport {
        eps: dom.inner,
        converged,
        newton_iterations: iterations,
        final_residual: res,
        u: RadialField::new(grid.clone(), u)?,
        w: RadialField::new(grid, w)?,
        mu_estimate,
        positivity_violated,
        trivial,
    })
}

/// Independent residual check with 7-point Fornberg stencils applied to
/// `u'' + (N-1)u'/r` (non-conservative form). Returns the larger of
/// `sup|Δu - w|/sup|w|` and `sup|Δw - u₊^p|/sup|u₊^p|` over interior nodes.
pub fn residual_certificate(dim: Dimension, report: &SolveReport) -> f64 {
    let x = report.u.grid.nodes();
    let m = x.len();
    let n = dim.nf();
    let p = dim.p();
    let lap = |v: &[f64], i: usize| -> f64 {
        let lo = i.saturating_sub(3).min(m - 7);
        let wts = fornberg_weights(x[i], &x[lo..lo + 7], 2);
        let d1: f64 = (0..7).map(|j| wts[1][j] * v[lo + j]).sum();
        let d2: f64 = (0..7).map(|j| wts[2][j] * v[lo + j]).sum();
        d2 + (n - 1.0) * d1 / x[i]
    };
    let u = &report.u.values;
    let w = &report.w.values;
    let fu: Vec<f64> = u.iter().map(|v| v.max(0.0).powf(p)).collect();
    let sw = sup(w).max(1e-300);
    let sf = sup(&fu).max(1e-300);
    let mut r1 = 0.0f64;
    let mut r2 = 0.0f64;
    for i in 1..m - 1 {
        r1 = r1.max((lap(u, i) - w[i]).abs() / sw);
        r2 = r2.max((lap(w, i) - fu[i]).abs() / sf);
    }
    r1.max(r2)
}

/// Settings of an ε-continuation study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct ContinuationConfig {
    pub nodes: usize,
    pub newton: NewtonConfig,
    /// Predicted rescaled weight `d` used for `μ = d ε^σ`.
    pub d_predict: f64,
    /// The grid is geometric up to `core_factor · μ`.
    pub core_factor: f64,
}

impl ContinuationConfig {
    pub const DEFAULT_NODES: usize = 2000;
    pub const DEFAULT_CORE_FACTOR: f64 = 1.0;

    pub fn new(d_predict: f64) -> Self {
        Self {
            nodes: Self::DEFAULT_NODES,
            newton: NewtonConfig::default(),
            d_predict,
            core_factor: Self::DEFAULT_CORE_FACTOR,
        }
    }
}

/// Reports of a continuation run; `failure` holds the first breakdown.
#[derive(Debug, Clone)]
pub struct ContinuationResult {
    pub reports: Vec<SolveReport>,
    pub failure: Option<Error>,
}

/// Grid for the annulus `ε < r < 1`, geometric up to `core` and coarser
/// beyond (see [`RadialGrid::clustered`]).
pub fn annulus_grid(eps: f64, nodes: usize, core: f64) -> Result<RadialGrid> {
    let grid = RadialGrid::clustered(eps, 1.0, nodes, core.max(2.0 * eps))?;
    grid.check_resolution(core)?;
    Ok(grid)
}

/// Solves along a strictly decreasing ε schedule. The first solve starts from
/// the projected bubble `PU_{dε^σ}`; each later one from the previous
/// solution interpolated onto the new grid. Grids are clustered around the
/// predicted scale `dε^σ`.
pub fn continuation_in_eps(dim: Dimension, schedule: &[f64], cfg: &ContinuationConfig) -> Result<ContinuationResult> {
    if schedule.is_empty() {
        return Err(invalid("eps_schedule", "empty schedule"));
    }
    if schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("eps_schedule", "must be strictly decreasing"));
    }
    if !(schedule[0] <= 0.2 && *schedule.last().expect("non-empty") > 0.0) {
        return Err(invalid("eps_schedule", "entries must lie in (0, 0.2]"));
    }
    let sigma = dim.sigma();
    let mut reports: Vec<SolveReport> = Vec::with_capacity(schedule.len());
    let d = cfg.d_predict;
    for (index, &eps) in schedule.iter().enumerate() {
        let dom = AnnulusDomain::new(dim, eps)?;
        let mu = d * eps.powf(sigma);
        let grid = annulus_grid(eps, cfg.nodes, cfg.core_factor * mu)?;
        let init = match reports.last() {
            Some(prev) => {
                // zero on the strip uncovered by the shrinking hole
                let old = &prev.u.grid;
                let vals = grid
                    .nodes()
                    .iter()
                    .map(|&r| if r <= old.inner() { 0.0 } else { old.interpolate(&prev.u.values, r) })
                    .collect();
                RadialField::new(grid.clone(), vals)?
            }
            _ => projected_bubble(dim, &grid, mu).map_err(|e| Error::Continuation {
                index,
                eps,
                reason: e.to_string(),
            })?,
        };
        let rep = match solve_nonlinear(dim, &dom, &init, &cfg.newton) {
            Ok(r) => r,
            Err(e) => {
                return Ok(ContinuationResult {
                    reports,
                    failure: Some(Error::Continuation { index, eps, reason: e.to_string() }),
                })
            }
        };
        if !rep.converged {
            let reason = format!(
                "residual {:.3e} after {} iterations (trivial: {}, positivity violated: {})",
                rep.final_residual, rep.newton_iterations, rep.trivial, rep.positivity_violated
            );
            reports.push(rep);
            return Ok(ContinuationResult { reports, failure: Some(Error::Continuation { index, eps, reason }) });
        }
        reports.push(rep);
    }
    Ok(ContinuationResult { reports, failure: None })
}
