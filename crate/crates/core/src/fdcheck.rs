//! N-dimensional central-difference stencils used to check closed forms:
//! second-order `Δ_h`, the iterated `Δ_h Δ_h`, and Richardson extrapolation.

/// Second-order central-difference Laplacian of `f` at `x`.
pub fn laplacian<F>(f: &F, x: &[f64], h: f64) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let mut y = x.to_vec();
    let f0 = f(x);
    let mut acc = 0.0;
    for i in 0..x.len() {
        y[i] = x[i] + h;
        let fp = f(&y);
        y[i] = x[i] - h;
        let fm = f(&y);
        y[i] = x[i];
        acc += fp - 2.0 * f0 + fm;
    }
    acc / (h * h)
}

/// Iterated stencil `Δ_h(Δ_h f)` at `x`.
pub fn bilaplacian<F>(f: &F, x: &[f64], h: f64) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let lap = |y: &[f64]| laplacian(f, y, h);
    laplacian(&lap, x, h)
}

/// Richardson extrapolation of a method of order `order` from step sizes
/// `h` and `h/2`.
#[inline]
pub fn richardson(coarse: f64, fine: f64, order: i32) -> f64 {
    let k = 2f64.powi(order);
    (k * fine - coarse) / (k - 1.0)
}

/// Richardson-extrapolated stencil value together with both raw values.
#[derive(Debug, Clone, Copy)]
pub struct Extrapolated {
    pub coarse: f64,
    pub fine: f64,
    pub value: f64,
}

impl Extrapolated {
    /// The fine value is closer to the extrapolant than the coarse one.
    pub fn converging(&self) -> bool {
        (self.fine - self.value).abs() <= (self.coarse - self.value).abs()
    }
}

pub fn bilaplacian_extrapolated<F>(f: &F, x: &[f64], h: f64) -> Extrapolated
where
    F: Fn(&[f64]) -> f64,
{
    let coarse = bilaplacian(f, x, h);
    let fine = bilaplacian(f, x, h / 2.0);
    Extrapolated { coarse, fine, value: richardson(coarse, fine, 2) }
}

pub fn laplacian_extrapolated<F>(f: &F, x: &[f64], h: f64) -> Extrapolated
where
    F: Fn(&[f64]) -> f64,
{
    let coarse = laplacian(f, x, h);
    let fine = laplacian(f, x, h / 2.0);
    Extrapolated { coarse, fine, value: richardson(coarse, fine, 2) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_laplacian_exact() {
        // Δ(|x|^2) = 2N, Δ²(|x|^4) = 8N(N+2)... check the quadratic exactly
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let l = laplacian(&f, &[0.3, -0.2, 0.1, 0.0, 0.7], 0.1);
        assert!((l - 10.0).abs() < 1e-10);
    }

    #[test]
    fn quartic_bilaplacian() {
        // Δ²|x|^4 = 8N(N+2); the iterated stencil is exact up to rounding
        let f = |x: &[f64]| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            r2 * r2
        };
        let b = bilaplacian(&f, &[0.1, 0.2, 0.3], 0.05);
        assert!((b - 8.0 * 3.0 * 5.0).abs() < 1e-6, "{b}");
    }
}
