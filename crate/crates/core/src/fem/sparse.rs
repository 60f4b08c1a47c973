use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone)]
pub struct Csr<T> {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<T>,
}

impl<T: Real> Csr<T> {
    pub fn from_pattern(rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        for r in rows {
            cols.extend(r);
            row_ptr.push(cols.len());
        }
        let vals = vec![T::zero(); cols.len()];
        Csr { n, row_ptr, cols, vals }
    }

    /// Adds `v` at `(i, j)`; the entry must be in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        let k = self.cols[a..b].binary_search(&j).expect("entry outside the sparsity pattern");
        self.vals[a + k] += v;
    }

    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let mut s = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        });
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
                self.cols[a..b].binary_search(&i).map(|k| self.vals[a + k]).unwrap_or(T::zero())
            })
            .collect()
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        (0..self.n).all(|i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).all(|k| {
                let j = self.cols[k];
                let (a, b) = (self.row_ptr[j], self.row_ptr[j + 1]);
                match self.cols[a..b].binary_search(&i) {
                    Ok(m) => (self.vals[a + m] - self.vals[k]).abs() <= tol * self.vals[k].abs().max(T::one()),
                    Err(_) => false,
                }
            })
        })
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients from `x = 0`, stopping at
/// `‖b − Ax‖ ≤ tol ‖b‖`.
pub fn pcg<T: Real>(a: &Csr<T>, b: &[T], tol: T, max_iter: usize) -> Result<(Vec<T>, CgStats)> {
    let n = a.n;
    let mut x = vec![T::zero(); n];
    let bnorm = dot(b, b).sqrt();
    if bnorm == T::zero() {
        return Ok((x, CgStats { iterations: 0, relative_residual: 0.0 }));
    }
    let inv_diag: Vec<T> = a.diagonal().into_iter().map(|d| if d > T::zero() { T::one() / d } else { T::one() }).collect();
    let mut r = b.to_vec();
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(r, d)| *r * *d).collect();
    let mut p = z.clone();
    let mut ap = vec![T::zero(); n];
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::SolverDiverged { iterations: it, residual: (dot(&r, &r).sqrt() / bnorm).as_f64() });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = dot(&r, &r).sqrt() / bnorm;
        if res <= tol {
            return Ok((x, CgStats { iterations: it, relative_residual: res.as_f64() }));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverDiverged { iterations: max_iter, residual: (dot(&r, &r).sqrt() / bnorm).as_f64() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal() {
        let n = 50;
        let rows = (0..n).map(|i: usize| (i.saturating_sub(1)..(i + 2).min(n)).collect()).collect();
        let mut a = Csr::<f64>::from_pattern(rows);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                a.add(i, i + 1, -1.0);
            }
        }
        assert!(a.is_symmetric(0.0));
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = vec![0.0; n];
        a.matvec(&xs, &mut b);
        let (x, st) = pcg(&a, &b, 1e-12, 500).unwrap();
        assert!(st.iterations <= n + 1);
        for (u, v) in x.iter().zip(&xs) {
            assert!((u - v).abs() < 1e-9);
        }
        let (z, st) = pcg(&a, &vec![0.0; n], 1e-12, 10).unwrap();
        assert_eq!(st.iterations, 0);
        assert!(z.iter().all(|v| *v == 0.0));
    }
}
