//! Derivative-free local minimisation.

use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct NelderMeadResult<T> {
    pub x: Vec<T>,
    pub value: T,
    pub evaluations: usize,
}

/// Nelder–Mead with the standard coefficients (1, 2, 1/2, 1/2). Stops when the
/// simplex values agree to `ftol` (absolute) or after `max_evals` calls.
pub fn nelder_mead<T: Real, F: FnMut(&[T]) -> T>(mut f: F, x0: &[T], step: T, ftol: T, max_evals: usize) -> NelderMeadResult<T> {
    let n = x0.len();
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let mut simplex: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut vals: Vec<T> = simplex.iter().map(|x| f(x)).collect();
    let mut evals = n + 1;
    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        if (vals[n] - vals[0]).abs() <= ftol {
            break;
        }
        let mut c = vec![T::zero(); n];
        for x in &simplex[..n] {
            for (ci, xi) in c.iter_mut().zip(x) {
                *ci += *xi;
            }
        }
        let nf = T::from_usize_lossy(n);
        c.iter_mut().for_each(|ci| *ci /= nf);
        let along = |t: T, worst: &[T]| -> Vec<T> { c.iter().zip(worst).map(|(ci, wi)| *ci + t * (*wi - *ci)).collect() };
        let xr = along(-T::one(), &simplex[n]);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = along(-two, &simplex[n]);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                simplex[n] = xe;
                vals[n] = fe;
            } else {
                simplex[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            simplex[n] = xr;
            vals[n] = fr;
        } else {
            let (xc, fc) = if fr < vals[n] {
                let xc = along(-half, &simplex[n]);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(half, &simplex[n]);
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < vals[n].min(fr) {
                simplex[n] = xc;
                vals[n] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    simplex[i] = best.iter().zip(&simplex[i]).map(|(b, x)| *b + half * (*x - *b)).collect();
                    vals[i] = f(&simplex[i]);
                }
                evals += n;
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal)).unwrap();
    NelderMeadResult { x: simplex[best].clone(), value: vals[best], evaluations: evals }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let r = nelder_mead(
            |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            0.1,
            1e-20,
            20_000,
        );
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5, "{r:?}");
    }
}
