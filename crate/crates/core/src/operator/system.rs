use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Constant coefficients `a^{hk}_{ij}` of `∂_h(A^{hk} ∂_k u)` in `N` dimensions
/// for `m`-vector `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralSystem<T> {
    pub n: usize,
    pub m: usize,
    a: Vec<Complex<T>>,
}

impl<T: Real> GeneralSystem<T> {
    pub fn zeros(n: usize, m: usize) -> Self {
        GeneralSystem { n, m, a: vec![Complex::new(T::zero(), T::zero()); n * n * m * m] }
    }

    #[inline]
    fn idx(&self, h: usize, k: usize, i: usize, j: usize) -> usize {
        ((h * self.n + k) * self.m + i) * self.m + j
    }

    pub fn get(&self, h: usize, k: usize, i: usize, j: usize) -> Complex<T> {
        self.a[self.idx(h, k, i, j)]
    }

    pub fn set(&mut self, h: usize, k: usize, i: usize, j: usize, v: Complex<T>) -> Result<()> {
        if h >= self.n || k >= self.n || i >= self.m || j >= self.m {
            return Err(Error::Shape(format!("index ({h},{k},{i},{j}) out of range")));
        }
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        let at = self.idx(h, k, i, j);
        self.a[at] = v;
        Ok(())
    }

    /// Lamé tensor `λ δ_ih δ_jk + μ (δ_ij δ_hk + δ_ik δ_hj)` with `m = N`.
    pub fn lame(n: usize, lambda: T, mu: T) -> Self {
        let mut s = Self::zeros(n, n);
        let d = |a: usize, b: usize| if a == b { T::one() } else { T::zero() };
        for h in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let v = lambda * d(i, h) * d(j, k) + mu * (d(i, j) * d(h, k) + d(i, k) * d(h, j));
                        let at = s.idx(h, k, i, j);
                        s.a[at] = Complex::new(v, T::zero());
                    }
                }
            }
        }
        s
    }

    /// `Σ_{hk} A^{hk} ξ_h ξ_k`, row-major `m × m`.
    pub fn symbol(&self, xi: &[T]) -> Vec<Complex<T>> {
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.m * self.m];
        for h in 0..self.n {
            for k in 0..self.n {
                let w = xi[h] * xi[k];
                for i in 0..self.m {
                    for j in 0..self.m {
                        out[i * self.m + j] += self.get(h, k, i, j) * w;
                    }
                }
            }
        }
        out
    }

    /// `A^{hk} = (A^{kh})*` for all `h, k`, which removes the Λ cross term.
    pub fn is_formally_self_adjoint(&self, tol: T) -> bool {
        (0..self.n).all(|h| {
            (0..self.n).all(|k| {
                (0..self.m).all(|i| (0..self.m).all(|j| (self.get(h, k, i, j) - self.get(k, h, j, i).conj()).norm() <= tol))
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lame_symbol_is_mu_plus_rank_one() {
        let s = GeneralSystem::<f64>::lame(2, 1.5, 0.7);
        let xi = [0.6, 0.8];
        let m = s.symbol(&xi);
        for i in 0..2 {
            for j in 0..2 {
                let want = 0.7 * if i == j { 1.0 } else { 0.0 } + (1.5 + 0.7) * xi[i] * xi[j];
                assert!((m[i * 2 + j].re - want).abs() < 1e-15);
            }
        }
        assert!(s.is_formally_self_adjoint(0.0));
    }

    #[test]
    fn set_checks_range() {
        let mut s = GeneralSystem::<f64>::zeros(2, 2);
        assert!(s.set(2, 0, 0, 0, Complex::new(1.0, 0.0)).is_err());
        s.set(0, 1, 1, 0, Complex::new(0.0, 2.0)).unwrap();
        assert!(!s.is_formally_self_adjoint(1e-12));
    }
}
