//! ζ, Θ and Λ derived from φ, and the limit Λ∞.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::phi::{PhiFamily, PhiSpec};
use crate::scalar::{log_space, Real};

/// Horizon and tolerances for [`LambdaProfile::lambda_infinity`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LambdaOptions<T> {
    pub t_min: T,
    pub horizon: T,
    pub nodes_per_decade: usize,
    /// Relative variation over the last three nodes accepted as converged.
    pub tail_rtol: T,
    /// Agreement required between successive extrapolated estimates.
    pub extrapolation_tol: T,
}

impl<T: Real> Default for LambdaOptions<T> {
    fn default() -> Self {
        LambdaOptions {
            t_min: T::lit(1e-8),
            horizon: T::lit(1e8),
            nodes_per_decade: 20,
            tail_rtol: T::lit(1e-6),
            extrapolation_tol: T::lit(1e-2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaSummary<T> {
    pub lambda_inf: T,
    pub lambda_inf_sq: T,
    /// Largest Λ² seen on the grid.
    pub sup_lambda_sq: T,
    pub sup_at: T,
    /// `max(sup_lambda_sq, lambda_inf_sq)`; the quantity entering the criteria.
    pub effective_sq: T,
    /// `sup Λ² < 1`.
    pub supl_holds: bool,
    /// Λ² nondecreasing on the grid, so that `Λ∞² = sup Λ²`.
    pub monotone: bool,
    /// The tail needed extrapolation in `1/ln t`.
    pub extrapolated: bool,
    pub tail_variation: T,
    pub horizon: T,
}

/// Evaluator for ζ (inverse of `s √φ(s)`), `Θ = ζ/t` and `Λ = tΘ'/Θ`.
#[derive(Debug)]
pub struct LambdaProfile<T> {
    phi: PhiSpec<T>,
    opts: LambdaOptions<T>,
    cache: OnceLock<Result<LambdaSummary<T>>>,
}

impl<T: Real> Clone for LambdaProfile<T> {
    fn clone(&self) -> Self {
        let cache = OnceLock::new();
        if let Some(v) = self.cache.get() {
            let _ = cache.set(v.clone());
        }
        LambdaProfile { phi: self.phi.clone(), opts: self.opts, cache }
    }
}

impl<T: Real> LambdaProfile<T> {
    pub fn new(phi: PhiSpec<T>) -> Self {
        Self::with_options(phi, LambdaOptions::default())
    }

    pub fn with_options(phi: PhiSpec<T>, opts: LambdaOptions<T>) -> Self {
        LambdaProfile { phi, opts, cache: OnceLock::new() }
    }

    pub fn phi(&self) -> &PhiSpec<T> {
        &self.phi
    }

    pub fn options(&self) -> &LambdaOptions<T> {
        &self.opts
    }

    pub fn zeta(&self, t: T) -> Result<T> {
        self.phi.inverse_s_sqrt_phi(t)
    }

    pub fn theta(&self, t: T) -> Result<T> {
        Ok(self.zeta(t)? / t)
    }

    /// Λ(t) via `Λ(s√φ(s)) = -sφ'/(sφ' + 2φ)`.
    pub fn lambda(&self, t: T) -> Result<T> {
        if let Some(p) = self.phi.power_exponent() {
            return Ok(-(p - T::lit(2.0)) / p);
        }
        let s = self.zeta(t)?;
        Ok(self.phi.lambda_at_s(s))
    }

    /// Λ from the definition `tΘ'/Θ`, with a central difference for Θ'.
    pub fn lambda_by_difference(&self, t: T) -> Result<T> {
        let h = t * T::lit(1e-5);
        let d = (self.theta(t + h)? - self.theta(t - h)?) / (h + h);
        Ok(t * d / self.theta(t)?)
    }

    /// Λ∞ with the grid supremum of Λ². Computed once and cached.
    pub fn lambda_infinity(&self) -> Result<LambdaSummary<T>> {
        self.cache.get_or_init(|| self.compute_summary()).clone()
    }

    /// Geometric grid used for the supremum, clipped to the inversion range.
    pub fn grid(&self) -> Vec<T> {
        let b = self.phi.bracket;
        let lo = self.opts.t_min.max(self.phi.s_sqrt_phi(b.lo * T::lit(10.0)));
        let top = self.phi.s_sqrt_phi(b.hi / T::lit(10.0));
        let hi = if top.is_finite() { self.opts.horizon.min(top) } else { self.opts.horizon };
        let decades = (hi / lo).log10().max(T::one());
        let n = (decades * T::from_usize_lossy(self.opts.nodes_per_decade)).ceil().to_usize().unwrap_or(2).max(3);
        log_space(lo, hi, n + 1)
    }

    fn compute_summary(&self) -> Result<LambdaSummary<T>> {
        let grid = self.grid();
        let horizon = *grid.last().unwrap();
        let vals: Vec<T> = grid.iter().map(|&t| self.lambda(t)).collect::<Result<_>>()?;
        let mut sup = T::zero();
        let mut sup_at = grid[0];
        for (&t, &l) in grid.iter().zip(&vals) {
            if l * l > sup {
                sup = l * l;
                sup_at = t;
            }
        }
        let tol = T::lit(1e-12);
        let monotone = vals.windows(2).all(|w| w[1] * w[1] >= w[0] * w[0] - tol);

        let tail = &vals[vals.len() - 3..];
        let tmax = tail.iter().cloned().fold(-T::infinity(), T::max);
        let tmin = tail.iter().cloned().fold(T::infinity(), T::min);
        let variation = tmax - tmin;
        let scale = tail[2].abs().max(T::lit(1e-300));
        let (lambda_inf, extrapolated, tail_variation) = if variation <= self.opts.tail_rtol * scale || variation <= tol {
            (tail[2], false, variation)
        } else {
            // Richardson extrapolation in h = 1/ln t from t = H^{1/4}, H^{1/2}, H.
            let ts = [horizon.powf(T::lit(0.25)), horizon.sqrt(), horizon];
            let l: Vec<T> = ts.iter().map(|&t| self.lambda(t)).collect::<Result<_>>()?;
            let two = T::lit(2.0);
            let r1a = two * l[1] - l[0];
            let r1b = two * l[2] - l[1];
            let r2 = (T::lit(4.0) * r1b - r1a) / T::lit(3.0);
            let spread = (r1b - r1a).abs().max((r2 - r1b).abs());
            if spread > self.opts.extrapolation_tol {
                return Err(Error::NonConvergent {
                    variation: spread.as_f64(),
                    tolerance: self.opts.extrapolation_tol.as_f64(),
                });
            }
            (r2.max(-T::one()).min(T::one()), true, spread)
        };
        let lsq = lambda_inf * lambda_inf;
        let effective = sup.max(lsq);
        Ok(LambdaSummary {
            lambda_inf,
            lambda_inf_sq: lsq,
            sup_lambda_sq: sup,
            sup_at,
            effective_sq: effective,
            supl_holds: effective < T::one() - T::lit(1e-12),
            monotone,
            extrapolated,
            tail_variation,
            horizon,
        })
    }

    /// Whether the family is known to violate (vi) while keeping Λ² bounded.
    pub fn is_truncated(&self) -> bool {
        matches!(self.phi.family, PhiFamily::TruncatedPower { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_lambda_is_constant() {
        for p in [2.0f64, 3.0, 4.0, 8.0, 16.0] {
            let prof = LambdaProfile::new(PhiSpec::power(p).unwrap());
            for t in log_space(1e-6, 1e6, 50) {
                assert!((prof.lambda(t).unwrap() + (p - 2.0) / p).abs() <= 1e-14);
            }
            let s = prof.lambda_infinity().unwrap();
            assert!((s.lambda_inf_sq - (1.0 - 2.0 / p).powi(2)).abs() < 1e-14);
            assert!(s.supl_holds && !s.extrapolated);
        }
    }

    #[test]
    fn exp_square_half_at_s_one() {
        let prof = LambdaProfile::new(PhiSpec::<f64>::exp_square());
        let t = 1.0 * (0.5f64).exp();
        assert!((prof.lambda(t).unwrap() + 0.5).abs() < 1e-13);
    }

    #[test]
    fn exp_square_limit_is_minus_one() {
        let prof = LambdaProfile::new(PhiSpec::<f64>::exp_square());
        let s = prof.lambda_infinity().unwrap();
        assert!(s.extrapolated);
        assert!((s.lambda_inf_sq - 1.0).abs() < 1e-2, "{s:?}");
        assert!(!s.supl_holds);
        assert!(s.monotone);
    }

    #[test]
    fn truncated_limit_is_zero_and_sup_is_power_value() {
        let p = 4.0f64;
        let prof = LambdaProfile::new(PhiSpec::truncated_power(p, 3.0).unwrap());
        let s = prof.lambda_infinity().unwrap();
        assert_eq!(s.lambda_inf, 0.0);
        assert!((s.sup_lambda_sq - (1.0 - 2.0 / p).powi(2)).abs() < 1e-14);
        assert!(s.sup_at < 1.0);
        assert!(!s.monotone);
    }

    #[test]
    fn difference_quotient_matches_closed_form() {
        let prof = LambdaProfile::new(PhiSpec::<f64>::exp_square());
        for t in log_space(1e-3, 1e3, 25) {
            let a = prof.lambda(t).unwrap();
            let b = prof.lambda_by_difference(t).unwrap();
            assert!((a - b).abs() < 1e-7, "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn f32_profile() {
        let prof = LambdaProfile::new(PhiSpec::<f32>::power(4.0).unwrap());
        assert_eq!(prof.lambda(3.0).unwrap(), -0.5);
    }
}
