use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::GeneralSystem;
use crate::optimize::nelder_mead;
use crate::scalar::Real;

/// A point `(ξ, η, ω)` with `|ω| = 1` at which the algebraic condition is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgebraicProbe<T> {
    pub xi: [T; 2],
    pub eta: Vec<Complex<T>>,
    pub omega: Vec<Complex<T>>,
}

fn cnorm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// `⟨a, b⟩ = Σ a_i conj(b_i)`
fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).map(|(x, y)| *x * y.conj()).fold(Complex::new(T::zero(), T::zero()), |s, z| s + z)
}

fn matvec<T: Real>(m: &[Complex<T>], v: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = v.len();
    (0..n).map(|i| (0..n).fold(Complex::new(T::zero(), T::zero()), |s, j| s + m[i * n + j] * v[j])).collect()
}

impl<T: Real> AlgebraicProbe<T> {
    pub fn new(xi: [T; 2], eta: Vec<Complex<T>>, omega: Vec<Complex<T>>) -> Result<Self> {
        if eta.len() != omega.len() {
            return Err(Error::Shape("eta and omega must have the same length".into()));
        }
        if (cnorm(&omega) - T::one()).abs() > T::lit(1e-12) {
            return Err(Error::InvalidParameter("|omega| must be 1".into()));
        }
        Ok(AlgebraicProbe { xi, eta, omega })
    }

    /// Real-valued probe.
    pub fn real(xi: [T; 2], eta: &[T], omega: &[T]) -> Result<Self> {
        let c = |v: &[T]| v.iter().map(|x| Complex::new(*x, T::zero())).collect();
        Self::new(xi, c(eta), c(omega))
    }

    /// Real parts of η and ω.
    pub fn eta_re(&self) -> Vec<T> {
        self.eta.iter().map(|z| z.re).collect()
    }

    pub fn omega_re(&self) -> Vec<T> {
        self.omega.iter().map(|z| z.re).collect()
    }

}

/// Left side of the algebraic condition
/// `Re(⟨Mη,η⟩ − Λ²⟨Mω,ω⟩(Re⟨η,ω⟩)² + Λ(⟨Mω,η⟩ − ⟨Mη,ω⟩) Re⟨η,ω⟩)`, `M = A^{hk}ξ_hξ_k`.
pub fn algebraic_value<T: Real>(sys: &GeneralSystem<T>, lambda: T, probe: &AlgebraicProbe<T>) -> T {
    let m = sys.symbol(&probe.xi);
    let me = matvec(&m, &probe.eta);
    let mw = matvec(&m, &probe.omega);
    let a = inner(&probe.eta, &probe.omega).re;
    let v = inner(&me, &probe.eta) - inner(&mw, &probe.omega) * (lambda * lambda * a * a)
        + (inner(&mw, &probe.eta) - inner(&me, &probe.omega)) * (lambda * a);
    v.re
}

/// Search budget for [`algebraic_margin`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AlgebraicSearch {
    /// Points per angle in the coarse real grid (`grid³` probes, `m = 2` only).
    pub grid: usize,
    /// Additional quasi-random probes over the full complex sphere.
    pub random_probes: usize,
    pub polish_starts: usize,
    pub rounds: usize,
    pub tol: f64,
    pub seed: u64,
    /// Restrict `η` and `ω` to real unit vectors.
    pub real_only: bool,
}

impl Default for AlgebraicSearch {
    fn default() -> Self {
        AlgebraicSearch { grid: 32, random_probes: 4096, polish_starts: 8, rounds: 20, tol: 1e-8, seed: 0x5eed, real_only: false }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgebraicMargin<T> {
    pub min_value: T,
    pub argmin: AlgebraicProbe<T>,
    pub evaluations: usize,
    pub rounds: usize,
}

/// Unit vector in `R^d` from `d − 1` hyperspherical angles.
fn sphere<T: Real>(angles: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(angles.len() + 1);
    let mut s = T::one();
    for a in angles {
        out.push(s * a.cos());
        s *= a.sin();
    }
    out.push(s);
    out
}

/// Parameter layout: `[θ_ξ, angles(η) (2m−1), angles(ω) (2m−1)]`, with the
/// real parts of a complex vector first.
fn decode<T: Real>(x: &[T], m: usize) -> AlgebraicProbe<T> {
    let d = 2 * m - 1;
    let to_c = |v: Vec<T>| (0..m).map(|i| Complex::new(v[i], v[m + i])).collect::<Vec<_>>();
    let eta = to_c(sphere(&x[1..1 + d]));
    let omega = to_c(sphere(&x[1 + d..1 + 2 * d]));
    AlgebraicProbe { xi: [x[0].cos(), x[0].sin()], eta, omega }
}

fn better<T: Real>(a: (T, &[T]), b: (T, &[T])) -> bool {
    if a.0 != b.0 {
        return a.0 < b.0;
    }
    for (x, y) in a.1.iter().zip(b.1) {
        if x != y {
            return x < y;
        }
    }
    false
}

/// Minimises the algebraic condition over `|ξ| = |η| = |ω| = 1` (N = 2).
/// A negative minimum refutes dissipativity; a positive one is the candidate
/// strictness constant.
pub fn algebraic_margin<T: Real>(sys: &GeneralSystem<T>, lambda_inf: T, search: &AlgebraicSearch) -> Result<AlgebraicMargin<T>> {
    if sys.n != 2 {
        return Err(Error::InvalidParameter("the algebraic condition is implemented for N = 2".into()));
    }
    if !(lambda_inf.abs() < T::one()) {
        return Err(Error::InvalidParameter("Lambda_inf must lie in (-1, 1)".into()));
    }
    let m = sys.m;
    let full = 1 + 2 * (2 * m - 1);
    // real vectors: only the first m − 1 angles of η and ω move
    let free: Vec<usize> = if search.real_only {
        let d = 2 * m - 1;
        std::iter::once(0).chain(1..m).chain(1 + d..d + m).collect()
    } else {
        (0..full).collect()
    };
    let dim = free.len();
    let expand = |y: &[T]| {
        let mut x = vec![T::zero(); full];
        for (&i, &v) in free.iter().zip(y) {
            x[i] = v;
        }
        x
    };
    let mut evals = 0usize;
    let mut eval = |y: &[T]| {
        evals += 1;
        algebraic_value(sys, lambda_inf, &decode(&expand(y), m))
    };

    let mut cands: Vec<(T, Vec<T>)> = Vec::new();
    let pi = T::PI();
    if m == 2 && search.grid > 0 {
        let g = search.grid;
        let step = pi / T::from_usize_lossy(g);
        for a in 0..g {
            for b in 0..g {
                for c in 0..g {
                    let mut x = vec![T::zero(); full];
                    x[0] = step * T::from_usize_lossy(a);
                    x[1] = step * T::from_usize_lossy(b);
                    x[4] = step * T::from_usize_lossy(c);
                    let x: Vec<T> = free.iter().map(|&i| x[i]).collect();
                    let v = eval(&x);
                    cands.push((v, x));
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
    for _ in 0..search.random_probes {
        let x: Vec<T> = (0..dim).map(|_| T::lit(rng.gen::<f64>() * 2.0 * std::f64::consts::PI)).collect();
        let v = eval(&x);
        cands.push((v, x));
    }
    cands.sort_by(|a, b| {
        if better((a.0, &a.1), (b.0, &b.1)) {
            std::cmp::Ordering::Less
        } else if better((b.0, &b.1), (a.0, &a.1)) {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    });
    let mut starts: Vec<Vec<T>> = cands.into_iter().take(search.polish_starts.max(1)).map(|c| c.1).collect();

    let tol = T::lit(search.tol);
    let mut best: Option<(T, Vec<T>)> = None;
    let mut prev = T::infinity();
    let mut step = T::lit(0.1);
    for round in 1..=search.rounds.max(1) {
        let mut next = Vec::with_capacity(starts.len());
        for s in &starts {
            let r = nelder_mead(&mut eval, s, step, T::lit(1e-15), 4000);
            if best.as_ref().map_or(true, |b| better((r.value, &r.x), (b.0, &b.1))) {
                best = Some((r.value, r.x.clone()));
            }
            next.push(r.x);
        }
        starts = next;
        let cur = best.as_ref().unwrap().0;
        if (cur - prev).abs() <= tol {
            let (v, x) = best.unwrap();
            return Ok(AlgebraicMargin { min_value: v, argmin: decode(&expand(&x), m), evaluations: evals, rounds: round });
        }
        prev = cur;
        step = step / T::lit(2.0);
    }
    Err(Error::BudgetExhausted { spread: (best.unwrap().0 - prev).abs().as_f64() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lame_real_min(l: f64, mu: f64, lam: f64, n: usize) -> f64 {
        // Brute force over real unit vectors using the scalar Lamé form.
        let mut best = f64::INFINITY;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let t = |k: usize| std::f64::consts::PI * k as f64 / n as f64;
                    let (xi, eta, om) = ([t(a).cos(), t(a).sin()], [t(b).cos(), t(b).sin()], [t(c).cos(), t(c).sin()]);
                    let dot = |u: [f64; 2], v: [f64; 2]| u[0] * v[0] + u[1] * v[1];
                    let v = mu + (l + mu) * dot(xi, eta).powi(2)
                        - lam * lam * (mu + (l + mu) * dot(xi, om).powi(2)) * dot(eta, om).powi(2);
                    best = best.min(v);
                }
            }
        }
        best
    }

    #[test]
    fn lame_one_one_quarter_is_positive() {
        let sys = GeneralSystem::lame(2, 1.0, 1.0);
        let r = algebraic_margin(&sys, -0.5, &AlgebraicSearch::default()).unwrap();
        let brute = lame_real_min(1.0, 1.0, -0.5, 120);
        assert!(r.min_value > 0.0);
        assert!(r.min_value <= brute + 1e-9, "{} vs {}", r.min_value, brute);
        assert!((r.min_value - brute).abs() < 1e-3);
    }

    #[test]
    fn zero_lambda_gives_legendre_hadamard_bound() {
        for (l, mu) in [(1.0, 1.0), (-1.5, 1.0), (3.0, 0.5)] {
            let sys = GeneralSystem::lame(2, l, mu);
            let r = algebraic_margin(&sys, 0.0, &AlgebraicSearch::default()).unwrap();
            let want = f64::min(mu, l + 2.0 * mu);
            assert!((r.min_value - want).abs() < 1e-8, "{l},{mu}: {}", r.min_value);
        }
    }

    #[test]
    fn sign_flips_across_the_threshold() {
        let (l, mu) = (1.0f64, 1.0f64);
        let thr: f64 = 1.0 - ((l + mu) / (l + 3.0 * mu)).powi(2);
        let sys = GeneralSystem::lame(2, l, mu);
        let below = algebraic_margin(&sys, -(thr - 1e-3).sqrt(), &AlgebraicSearch::default()).unwrap();
        let above = algebraic_margin(&sys, -(thr + 1e-3).sqrt(), &AlgebraicSearch::default()).unwrap();
        assert!(below.min_value > 0.0);
        assert!(above.min_value < 0.0);
        let p = &above.argmin;
        assert!((algebraic_value(&sys, -(thr + 1e-3).sqrt(), p) - above.min_value).abs() < 1e-15);
    }

    #[test]
    fn probe_requires_unit_omega() {
        assert!(AlgebraicProbe::real([1.0, 0.0], &[1.0, 0.0], &[2.0, 0.0]).is_err());
    }
}
