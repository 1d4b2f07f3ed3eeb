//! Graded radial meshes, sampled radial fields and the conservative
//! finite-volume Laplacian `r^(1-N)(r^(N-1)u')'` on them.

use crate::dimension::Dimension;
use crate::error::{invalid, Error, Result};

/// Strictly increasing radii from `inner` to `outer`.
///
/// Nodes are images of a uniform parameter `s ∈ [0, 1]` under
/// `r(s) = inner + (outer - inner)(e^{γs} - 1)/(e^γ - 1)`; `γ = 0` is uniform.
/// On an annulus, `γ = ln(outer/inner)` makes the mesh geometric.
/// Width in `ln r` of the coarsening tail of [`RadialGrid::clustered`].
pub const TAIL_WIDTH: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    grading: f64,
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
    }
}

impl RadialGrid {
    pub fn graded(inner: f64, outer: f64, n: usize, grading: f64) -> Result<Self> {
        if n < 5 {
            return Err(invalid("nodes", format!("need at least 5 nodes, got {n}")));
        }
        if !(inner >= 0.0 && outer > inner) {
            return Err(invalid("grid", format!("need 0 <= inner < outer, got [{inner}, {outer}]")));
        }
        if !(grading >= 0.0 && grading.is_finite()) {
            return Err(invalid("grading", "must be finite and non-negative"));
        }
        let len = outer - inner;
        let last = n - 1;
        let nodes = (0..n)
            .map(|i| {
                if i == 0 {
                    return inner;
                }
                if i == last {
                    return outer;
                }
                let s = i as f64 / last as f64;
                if grading < 1e-12 {
                    inner + len * s
                } else {
                    inner + len * (grading * s).exp_m1() / grading.exp_m1()
                }
            })
            .collect();
        Ok(Self { nodes, grading })
    }

    /// Geometric mesh on `inner < r < outer` (requires `inner > 0`).
    pub fn geometric(inner: f64, outer: f64, n: usize) -> Result<Self> {
        if !(inner > 0.0) {
            return Err(invalid("inner", "geometric mesh needs a positive inner radius"));
        }
        Self::graded(inner, outer, n, (outer / inner).ln())
    }

    /// Annulus mesh that is geometric on `inner < r < core` and coarsens
    /// smoothly beyond: the node density per unit of `ln r` is 1 up to
    /// `ln core` and `1/(1 + ((ln r - ln core)/ℓ)²)` after, with `ℓ` = [`TAIL_WIDTH`].
    /// Falls back to [`RadialGrid::geometric`] when `core >= outer`.
    pub fn clustered(inner: f64, outer: f64, n: usize, core: f64) -> Result<Self> {
        if !(core > inner) {
            return Err(invalid("core", format!("must exceed the inner radius {inner}, got {core}")));
        }
        if core >= outer {
            return Self::geometric(inner, outer, n);
        }
        let mut grid = Self::geometric(inner, outer, n)?;
        let (t0, tc, t1) = (inner.ln(), core.ln(), outer.ln());
        let l = TAIL_WIDTH;
        let fc = tc - t0;
        let total = fc + l * ((t1 - tc) / l).atan();
        let last = n - 1;
        for i in 1..last {
            let f = total * i as f64 / last as f64;
            let t = if f <= fc { t0 + f } else { tc + l * ((f - fc) / l).tan() };
            grid.nodes[i] = t.exp();
        }
        grid.grading = f64::NAN;
        Ok(grid)
    }

    /// Mesh on the solid unit ball, uniform for `r ≲ core` and geometric beyond.
    pub fn ball(n: usize, core: f64) -> Result<Self> {
        if !(core > 0.0) {
            return Err(invalid("core", "must be positive"));
        }
        Self::graded(0.0, 1.0, n, (1.0 + 1.0 / core).ln())
    }

    /// Arbitrary strictly increasing nodes.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 5 || nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes[0] < 0.0 {
            return Err(invalid("nodes", "need >= 5 strictly increasing non-negative radii"));
        }
        Ok(Self { nodes, grading: f64::NAN })
    }

    #[inline]
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `γ` of [`RadialGrid::graded`]; NaN for other constructions.
    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn inner(&self) -> f64 {
        self.nodes[0]
    }

    pub fn outer(&self) -> f64 {
        *self.nodes.last().expect("non-empty grid")
    }

    /// Includes the origin (solid ball); the first node carries a symmetry
    /// condition instead of a Dirichlet one.
    pub fn has_origin(&self) -> bool {
        self.nodes[0] == 0.0
    }

    pub fn count_below(&self, r: f64) -> usize {
        self.nodes.iter().take_while(|&&x| x < r).count()
    }

    /// At least 8 nodes below `mu` and, on an annulus, at least 8 below `2ε`.
    pub fn check_resolution(&self, mu: f64) -> Result<()> {
        if self.count_below(mu) < 8 {
            return Err(invalid("grid", format!("fewer than 8 nodes below mu = {mu}")));
        }
        if !self.has_origin() && self.count_below(2.0 * self.inner()) < 8 {
            return Err(invalid("grid", "fewer than 8 nodes below 2*eps"));
        }
        Ok(())
    }

    /// Cell volumes `∫ r^(N-1) dr` over the dual cells (half cells at the ends),
    /// without the sphere factor.
    pub fn volumes(&self, dim: Dimension) -> Vec<f64> {
        let n = dim.nf();
        let r = &self.nodes;
        let m = r.len();
        let faces: Vec<f64> = (0..=m)
            .map(|k| match k {
                0 => r[0],
                k if k == m => r[m - 1],
                k => 0.5 * (r[k - 1] + r[k]),
            })
            .collect();
        (0..m).map(|i| (faces[i + 1].powf(n) - faces[i].powf(n)) / n).collect()
    }

    /// Cubic Lagrange interpolation of nodal `values` at `r` (clamped).
    pub fn interpolate(&self, values: &[f64], r: f64) -> f64 {
        let x = &self.nodes;
        let m = x.len();
        if r <= x[0] {
            return values[0];
        }
        if r >= x[m - 1] {
            return values[m - 1];
        }
        let k = x.partition_point(|&v| v <= r).clamp(1, m - 1);
        let lo = k.saturating_sub(2).min(m - 4);
        let idx = lo..lo + 4;
        let mut acc = 0.0;
        for i in idx.clone() {
            let mut w = 1.0;
            for j in idx.clone() {
                if i != j {
                    w *= (r - x[j]) / (x[i] - x[j]);
                }
            }
            acc += w * values[i];
        }
        acc
    }
}

/// Fornberg's finite-difference weights for derivatives `0..=m` at `z` on
/// nodes `x`. Returns `w[k][j]`, the weight of node `j` in the `k`-th derivative.
pub fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// A radial scalar sampled on a grid, optionally with its Laplacian and with
/// radial derivatives up to order three.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
    pub laplacian: Option<Vec<f64>>,
    /// `derivatives[k][i]` is the `(k+1)`-th radial derivative at node `i`.
    pub derivatives: Option<[Vec<f64>; 3]>,
}

impl RadialField {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values on {} nodes", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("values", "non-finite sample"));
        }
        Ok(Self { grid, values, laplacian: None, derivatives: None })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: RadialGrid, f: F) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn with_laplacian(mut self, lap: Vec<f64>) -> Result<Self> {
        if lap.len() != self.values.len() {
            return Err(Error::GridMismatch("laplacian length".into()));
        }
        self.laplacian = Some(lap);
        Ok(self)
    }

    /// Attach radial derivatives computed with 5-point Fornberg stencils.
    pub fn with_fd_derivatives(mut self) -> Self {
        let x = self.grid.nodes();
        let m = x.len();
        let mut d = [vec![0.0; m], vec![0.0; m], vec![0.0; m]];
        for i in 0..m {
            let lo = i.saturating_sub(2).min(m - 5);
            let w = fornberg_weights(x[i], &x[lo..lo + 5], 3);
            for k in 0..3 {
                d[k][i] = (0..5).map(|j| w[k + 1][j] * self.values[lo + j]).sum();
            }
        }
        self.derivatives = Some(d);
        self
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn argmax(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
            .0
    }

    pub fn same_grid(&self, other: &RadialField) -> bool {
        self.grid == other.grid
    }
}

/// Tridiagonal conservative Laplacian on a grid. Row `i` reads
/// `(Lu)_i = lo[i] u_{i-1} + di[i] u_i + up[i] u_{i+1}`.
#[derive(Debug, Clone)]
pub struct RadialLaplacian {
    pub lo: Vec<f64>,
    pub di: Vec<f64>,
    pub up: Vec<f64>,
    /// First and one-past-last unknown node.
    pub first: usize,
    pub last: usize,
}

impl RadialLaplacian {
    pub fn new(dim: Dimension, grid: &RadialGrid) -> Self {
        let n = dim.nf();
        let r = grid.nodes();
        let m = r.len();
        let vol = grid.volumes(dim);
        let mut lo = vec![0.0; m];
        let mut di = vec![0.0; m];
        let mut up = vec![0.0; m];
        for i in 0..m {
            let cp = if i + 1 < m {
                (0.5 * (r[i] + r[i + 1])).powf(n - 1.0) / (r[i + 1] - r[i])
            } else {
                0.0
            };
            let cm = if i > 0 { (0.5 * (r[i - 1] + r[i])).powf(n - 1.0) / (r[i] - r[i - 1]) } else { 0.0 };
            lo[i] = cm / vol[i];
            up[i] = cp / vol[i];
            di[i] = -(cm + cp) / vol[i];
        }
        let first = if grid.has_origin() { 0 } else { 1 };
        Self { lo, di, up, first, last: m - 1 }
    }

    pub fn size(&self) -> usize {
        self.last - self.first
    }

    /// `L u` at every unknown node; boundary rows are zero.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let m = u.len();
        let mut out = vec![0.0; m];
        for i in self.first..self.last {
            let mut v = self.di[i] * u[i];
            if i > 0 {
                v += self.lo[i] * u[i - 1];
            }
            if i + 1 < m {
                v += self.up[i] * u[i + 1];
            }
            out[i] = v;
        }
        out
    }

    /// `Σ_j |L_ij| |u_j|` for row `i`.
    pub fn abs_apply_row(&self, u: &[f64], i: usize) -> f64 {
        let mut v = (self.di[i] * u[i]).abs();
        if i > 0 {
            v += (self.lo[i] * u[i - 1]).abs();
        }
        if i + 1 < u.len() {
            v += (self.up[i] * u[i + 1]).abs();
        }
        v
    }

    /// Solves `L u = f` with `u = 0` on Dirichlet nodes (Thomas algorithm).
    pub fn solve_dirichlet(&self, f: &[f64]) -> Result<Vec<f64>> {
        let m = f.len();
        let (a, b) = (self.first, self.last);
        let k = b - a;
        let mut c = vec![0.0; k];
        let mut d = vec![0.0; k];
        for j in 0..k {
            let i = a + j;
            let lo = if j > 0 { self.lo[i] } else { 0.0 };
            let denom = self.di[i] - lo * if j > 0 { c[j - 1] } else { 0.0 };
            if denom == 0.0 || !denom.is_finite() {
                return Err(Error::LinearSolve(format!("zero pivot at node {i}")));
            }
            c[j] = if j + 1 < k { self.up[i] / denom } else { 0.0 };
            d[j] = (f[i] - lo * if j > 0 { d[j - 1] } else { 0.0 }) / denom;
        }
        let mut u = vec![0.0; m];
        for j in (0..k).rev() {
            let next = if j + 1 < k { u[a + j + 1] } else { 0.0 };
            u[a + j] = d[j] - c[j] * next;
        }
        Ok(u)
    }
}

/// `|S^(N-1)| Σ V_i f_i`: the integral of a radial function over the grid's shell.
pub fn integrate_nodal(dim: Dimension, grid: &RadialGrid, f: &[f64]) -> f64 {
    let vol = grid.volumes(dim);
    dim.sphere_measure() * vol.iter().zip(f).map(|(v, x)| v * x).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn geometric_grid_endpoints() {
        let g = RadialGrid::geometric(1e-3, 1.0, 101).unwrap();
        assert_eq!(g.inner(), 1e-3);
        assert_eq!(g.outer(), 1.0);
        let r = g.nodes();
        // constant ratio
        let q = r[1] / r[0];
        for w in r.windows(2) {
            assert!((w[1] / w[0] / q - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(RadialGrid::graded(0.5, 0.2, 10, 1.0).is_err());
        assert!(RadialGrid::graded(0.1, 1.0, 3, 1.0).is_err());
        assert!(RadialGrid::from_nodes(vec![0.0, 0.1, 0.1, 0.2, 0.3]).is_err());
    }

    #[test]
    fn resolution_invariant() {
        let g = RadialGrid::geometric(1e-3, 1.0, 400).unwrap();
        assert!(g.check_resolution(0.01).is_ok());
        let coarse = RadialGrid::geometric(1e-3, 1.0, 20).unwrap();
        assert!(coarse.check_resolution(0.01).is_err());
    }

    #[test]
    fn volumes_sum_to_shell() {
        let d = dim(5);
        let g = RadialGrid::geometric(0.1, 1.0, 50).unwrap();
        let s: f64 = g.volumes(d).iter().sum();
        assert!((s - (1.0 - 1e-5) / 5.0).abs() < 1e-14);
    }

    #[test]
    fn fornberg_exact_on_cubics() {
        let x = [0.0, 0.1, 0.25, 0.45, 0.7];
        let w = fornberg_weights(0.3, &x, 3);
        let f: Vec<f64> = x.iter().map(|t| t * t * t - 2.0 * t).collect();
        let d1: f64 = (0..5).map(|j| w[1][j] * f[j]).sum();
        let d2: f64 = (0..5).map(|j| w[2][j] * f[j]).sum();
        let d3: f64 = (0..5).map(|j| w[3][j] * f[j]).sum();
        assert!((d1 - (3.0 * 0.09 - 2.0)).abs() < 1e-12);
        assert!((d2 - 1.8).abs() < 1e-10);
        assert!((d3 - 6.0).abs() < 1e-8);
    }

    #[test]
    fn laplacian_of_quadratic_on_uniform_ball() {
        let d = dim(6);
        let g = RadialGrid::graded(0.0, 1.0, 41, 0.0).unwrap();
        let lap = RadialLaplacian::new(d, &g);
        let u: Vec<f64> = g.nodes().iter().map(|r| r * r).collect();
        let lu = lap.apply(&u);
        // Δ r² = 2N; the first row at the origin is exact too
        for i in 0..40 {
            assert!((lu[i] - 12.0).abs() < 1e-9, "{i}: {}", lu[i]);
        }
    }

    #[test]
    fn thomas_solves_dirichlet() {
        let d = dim(5);
        let g = RadialGrid::geometric(0.05, 1.0, 200).unwrap();
        let lap = RadialLaplacian::new(d, &g);
        let f: Vec<f64> = g.nodes().iter().map(|r| (3.0 * r).sin()).collect();
        let u = lap.solve_dirichlet(&f).unwrap();
        let lu = lap.apply(&u);
        for i in 1..199 {
            assert!((lu[i] - f[i]).abs() < 1e-10 * (1.0 + f[i].abs()));
        }
        assert_eq!(u[0], 0.0);
        assert_eq!(u[199], 0.0);
    }

    #[test]
    fn interpolation_reproduces_cubics() {
        let g = RadialGrid::geometric(0.01, 1.0, 30).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|r| 1.0 + r - r.powi(3)).collect();
        for &r in &[0.011, 0.2, 0.73, 0.999] {
            assert!((g.interpolate(&v, r) - (1.0 + r - r.powi(3))).abs() < 1e-12);
        }
    }
}
