//! Banded LU factorisation with partial pivoting.

use crate::error::{Error, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals. Storage keeps
/// room for the `kl` extra super-diagonals created by row interchanges.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        // column offset j - i + kl in [0, width)
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize, upper: usize) -> bool {
        j + self.kl >= i && j <= i + upper
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j, self.ku + self.kl) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Adds `v` to entry `(i, j)`; panics outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j, self.ku), "entry ({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku + self.kl + 1).min(self.n);
                (lo..hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Solves `A x = b` in place of a copy of `A`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut a = self.clone();
        let mut x = b.to_vec();
        let n = self.n;
        let kl = self.kl;
        let umax = self.ku + self.kl;
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let rows = (k + 1..(k + kl + 1).min(n)).collect::<Vec<_>>();
            let mut piv = k;
            let mut best = a.get(k, k).abs();
            for &i in &rows {
                let v = a.get(i, k).abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best <= scale * 1e-300 || !best.is_finite() {
                return Err(Error::LinearSolve(format!("singular band matrix at column {k}")));
            }
            let jmax = (k + umax + 1).min(n);
            if piv != k {
                for j in k..jmax {
                    let (ik, ip) = (a.idx(k, j), a.idx(piv, j));
                    let in_k = a.in_band(k, j, umax);
                    let in_p = a.in_band(piv, j, umax);
                    let vk = if in_k { a.data[ik] } else { 0.0 };
                    let vp = if in_p { a.data[ip] } else { 0.0 };
                    if in_k {
                        a.data[ik] = vp;
                    }
                    if in_p {
                        a.data[ip] = vk;
                    }
                }
                x.swap(k, piv);
            }
            let pivot = a.get(k, k);
            for &i in &rows {
                let ii = a.idx(i, k);
                let f = a.data[ii] / pivot;
                if f == 0.0 {
                    continue;
                }
                a.data[ii] = 0.0;
                for j in k + 1..jmax {
                    if a.in_band(i, j, umax) {
                        let ij = a.idx(i, j);
                        let kj = a.idx(k, j);
                        a.data[ij] -= f * a.data[kj];
                    }
                }
                x[i] -= f * x[k];
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + umax + 1).min(n);
            let mut s = x[k];
            for j in k + 1..jmax {
                s -= a.get(k, j) * x[j];
            }
            x[k] = s / a.get(k, k);
        }
        Ok(x)
    }
}
