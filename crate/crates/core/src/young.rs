//! The conjugate pair Φ(s) = ∫₀ˢ σφ(σ)dσ and Ψ(t) = ∫₀ᵗ σψ(σ)dσ.

use crate::error::Result;
use crate::phi::PhiSpec;
use crate::quad::{adaptive, QuadOptions};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct YoungPair<T> {
    spec: PhiSpec<T>,
    quad: QuadOptions<T>,
}

pub fn young_pair<T: Real>(spec: &PhiSpec<T>) -> YoungPair<T> {
    YoungPair { spec: spec.clone(), quad: QuadOptions::default() }
}

impl<T: Real> YoungPair<T> {
    pub fn with_quadrature(mut self, quad: QuadOptions<T>) -> Self {
        self.quad = quad;
        self
    }

    pub fn spec(&self) -> &PhiSpec<T> {
        &self.spec
    }

    /// Φ(s).
    pub fn big_phi(&self, s: T) -> Result<T> {
        if s <= T::zero() {
            return Ok(T::zero());
        }
        let (v, _) = adaptive(|x| x * self.spec.phi(x), T::zero(), s, &self.quad)?;
        Ok(v)
    }

    /// ψ(t) = s/t where sφ(s) = t.
    pub fn psi(&self, t: T) -> Result<T> {
        self.spec.psi(t)
    }

    /// Ψ(t). The integrand `σψ(σ)` is the inverse of `sφ(s)`.
    pub fn big_psi(&self, t: T) -> Result<T> {
        if t <= T::zero() {
            return Ok(T::zero());
        }
        let (v, _) = adaptive(
            |x| if x > T::zero() { self.spec.inverse_s_phi(x).unwrap_or(T::nan()) } else { T::zero() },
            T::zero(),
            t,
            &self.quad,
        )?;
        Ok(v)
    }

    /// `Φ(s) + Ψ(t) - st`, nonnegative by Young's inequality.
    pub fn young_gap(&self, s: T, t: T) -> Result<T> {
        Ok(self.big_phi(s)? + self.big_psi(t)? - s * t)
    }

    /// Convexity, monotonicity and `Φ(0) = Ψ(0) = 0` on a grid of the same
    /// spacing for both functions. Returns the worst second difference seen
    /// (negative means a violation beyond rounding).
    pub fn check_shape(&self, grid: &[T]) -> Result<T> {
        let phi: Vec<T> = grid.iter().map(|&x| self.big_phi(x)).collect::<Result<_>>()?;
        let psi: Vec<T> = grid.iter().map(|&x| self.big_psi(x)).collect::<Result<_>>()?;
        let mut worst = T::infinity();
        for vals in [&phi, &psi] {
            for w in vals.windows(2) {
                worst = worst.min(w[1] - w[0]);
            }
            for (i, w) in vals.windows(3).enumerate() {
                let (h0, h1) = (grid[i + 1] - grid[i], grid[i + 2] - grid[i + 1]);
                let d = (w[2] - w[1]) / h1 - (w[1] - w[0]) / h0;
                let tol = T::lit(1e-9) * (w[2].abs() + T::one());
                worst = worst.min(d + tol);
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::lin_space;

    #[test]
    fn power_pair_antiderivatives() {
        let p = 3.0f64;
        let q = p / (p - 1.0);
        let y = young_pair(&PhiSpec::power(p).unwrap());
        for x in [0.1, 0.5, 1.0, 2.0, 7.0] {
            assert!((y.big_phi(x).unwrap() - x.powf(p) / p).abs() < 1e-8 * x.powf(p).max(1.0));
            assert!((y.big_psi(x).unwrap() - x.powf(q) / q).abs() < 1e-8 * x.powf(q).max(1.0));
        }
        assert_eq!(y.big_phi(0.0).unwrap(), 0.0);
        assert_eq!(y.big_psi(0.0).unwrap(), 0.0);
    }

    #[test]
    fn young_inequality_at_one_one() {
        for spec in [PhiSpec::power(4.0).unwrap(), PhiSpec::exp_square(), PhiSpec::truncated_power(3.0, 2.0).unwrap()] {
            let y = young_pair(&spec);
            assert!(y.young_gap(1.0, 1.0).unwrap() >= 0.0);
        }
    }

    #[test]
    fn shapes_are_convex() {
        let y = young_pair(&PhiSpec::<f64>::exp_square());
        assert!(y.check_shape(&lin_space(0.0, 2.0, 21)).unwrap() >= 0.0);
    }
}
