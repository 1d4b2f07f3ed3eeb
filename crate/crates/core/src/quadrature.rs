//! Gauss–Legendre panels on finite intervals and on `[R, ∞)` through the
//! algebraic map `r = R + s/(1-s)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::par;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_a^b f`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Mapping used for the unbounded tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMap {
    /// `r = R + s/(1-s)`, `s ∈ [0, 1)`.
    Algebraic,
    /// `r = R - ln(1-s)`, `s ∈ [0, 1)`.
    Exponential,
}

/// Composite rule on `[0, ∞)`: Gauss panels between breakpoints and a mapped
/// tail beyond the last breakpoint.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes_per_panel: usize,
    pub breakpoints: Vec<f64>,
    pub tail: TailMap,
    pub tail_panels: usize,
    gl: GaussLegendre,
}

impl QuadratureRule {
    pub fn new(nodes_per_panel: usize, breakpoints: Vec<f64>, tail: TailMap) -> Result<Self> {
        if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParam {
                name: "breakpoints",
                reason: "need at least two strictly increasing radii".into(),
            });
        }
        Ok(Self {
            nodes_per_panel,
            breakpoints,
            tail,
            tail_panels: 8,
            gl: GaussLegendre::new(nodes_per_panel),
        })
    }

    /// Panels `[0, 1/8, 1/4, ..., 2^k]` with `k` chosen from `outer`.
    pub fn radial_default(nodes_per_panel: usize) -> Self {
        let mut bp = vec![0.0];
        let mut r = 0.125;
        while r <= 64.0 {
            bp.push(r);
            r *= 2.0;
        }
        Self::new(nodes_per_panel, bp, TailMap::Algebraic).expect("static breakpoints")
    }

    /// Same panel layout with twice the nodes per panel.
    pub fn refined(&self) -> Self {
        let mut r = Self::new(2 * self.nodes_per_panel, self.breakpoints.clone(), self.tail)
            .expect("breakpoints already validated");
        r.tail_panels = self.tail_panels;
        r
    }

    pub fn gauss(&self) -> &GaussLegendre {
        &self.gl
    }

    /// `∫_{b₀}^∞ f(r) dr`. Panels are evaluated in parallel and summed in
    /// panel order.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(f64) -> f64 + Sync + Send,
    {
        let finite = self.breakpoints.len() - 1;
        let total = finite + self.tail_panels;
        let r_tail = *self.breakpoints.last().expect("validated");
        let tp = self.tail_panels as f64;
        let parts = par::map_range(total, |k| {
            if k < finite {
                self.gl.integrate(self.breakpoints[k], self.breakpoints[k + 1], &f)
            } else {
                // tail panels in s, graded towards s = 1
                let j = (k - finite) as f64;
                let s0 = 1.0 - 0.5f64.powf(j * 8.0 / tp);
                let s1 = if k + 1 == total { 1.0 } else { 1.0 - 0.5f64.powf((j + 1.0) * 8.0 / tp) };
                match self.tail {
                    TailMap::Algebraic => self.gl.integrate(s0, s1, |s| {
                        let om = 1.0 - s;
                        f(r_tail + s / om) / (om * om)
                    }),
                    TailMap::Exponential => self.gl.integrate(s0, s1, |s| {
                        let om = 1.0 - s;
                        f(r_tail - om.ln()) / om
                    }),
                }
            }
        });
        parts.iter().sum()
    }

    /// Integral with a self-convergence estimate from the refined rule.
    pub fn integrate_estimated<F>(&self, f: F) -> Estimate
    where
        F: Fn(f64) -> f64 + Sync + Send,
    {
        let coarse = self.integrate(&f);
        let fine = self.refined().integrate(&f);
        Estimate { value: fine, error: (fine - coarse).abs() }
    }
}

/// A quadrature value with its self-convergence estimate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn relative_error(&self) -> f64 {
        self.error / self.value.abs().max(f64::MIN_POSITIVE)
    }

    pub fn require(self, tolerance: f64) -> Result<Self> {
        if self.relative_error() > tolerance {
            Err(Error::Quadrature { estimate: self.relative_error(), tolerance })
        } else {
            Ok(self)
        }
    }
}

/// Composite Gauss rule on `[a, b]` split at `breaks` (which must lie inside).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    gl: &GaussLegendre,
    a: f64,
    b: f64,
    breaks: &[f64],
    f: F,
) -> f64 {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    pts.windows(2).map(|w| gl.integrate(w[0], w[1], &f)).sum()
}
