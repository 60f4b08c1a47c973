//! Gauss–Legendre rules and adaptive Gauss–Kronrod (7/15) integration.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Nodes by Newton iteration on `P_n`, started from the Chebyshev-like guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0f64; n];
        let mut weights = vec![0.0f64; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0f64, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { x } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = nf * (x * pn - pm) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre {
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, w * half))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Tolerances for [`adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        QuadOptions {
            abs_tol: T::lit(1e-12),
            rel_tol: T::lit(1e-12),
            max_intervals: 2000,
        }
    }
}

fn gk15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    let fc = f(mid);
    let mut k = fc * T::lit(WGK[7]);
    let mut g = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let s = f(mid - dx) + f(mid + dx);
        k += s * T::lit(WGK[j]);
        if j % 2 == 1 {
            g += s * T::lit(WG[j / 2]);
        }
    }
    (k * half, ((k - g) * half).abs())
}

/// Adaptive G7K15 with worst-interval bisection. Returns `(integral, error estimate)`.
pub fn adaptive<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, opts: &QuadOptions<T>) -> Result<(T, T)> {
    if a == b {
        return Ok((T::zero(), T::zero()));
    }
    let mut parts = vec![(a, b, gk15(&mut f, a, b))];
    loop {
        let total: T = parts.iter().map(|p| p.2 .0).sum();
        let err: T = parts.iter().map(|p| p.2 .1).sum();
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::QuadratureFailure {
                a: a.as_f64(),
                b: b.as_f64(),
                error: err.as_f64(),
            });
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            return Ok((total, err));
        }
        if parts.len() >= opts.max_intervals {
            return Err(Error::QuadratureFailure {
                a: a.as_f64(),
                b: b.as_f64(),
                error: err.as_f64(),
            });
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.partial_cmp(&y.1 .2 .1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _) = parts.swap_remove(worst);
        let m = (lo + hi) / T::lit(2.0);
        if !(m > lo && m < hi) {
            return Err(Error::QuadratureFailure {
                a: a.as_f64(),
                b: b.as_f64(),
                error: err.as_f64(),
            });
        }
        parts.push((lo, m, gk15(&mut f, lo, m)));
        parts.push((m, hi, gk15(&mut f, m, hi)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_degree_2n_minus_1() {
        for n in 1..=10 {
            let rule = GaussLegendre::<f64>::new(n);
            let wsum: f64 = rule.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-14);
            let deg = 2 * n - 1;
            let got = rule.integrate(0.0, 1.0, |x| x.powi(deg as i32));
            assert!((got - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let (v, _) = adaptive(|x: f64| x.powf(-0.5), 0.0, 1.0, &QuadOptions::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
        let (v, _) = adaptive(|x: f64| x.sin(), 0.0, std::f64::consts::PI, &QuadOptions::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_reports_failure_on_nonintegrable() {
        let opts = QuadOptions { max_intervals: 50, ..QuadOptions::default() };
        assert!(adaptive(|x: f64| 1.0 / x, 0.0, 1.0, &opts).is_err());
    }
}
