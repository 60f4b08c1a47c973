//! Pointwise residuals of the identities linking φ, ψ, ζ, Θ and Λ.

use serde::Serialize;

use crate::error::Result;
use crate::lambda::LambdaProfile;
use crate::phi::dual_phi;
use crate::scalar::Real;

/// Largest residual of each identity over a set of nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResiduals<T> {
    /// `|Θ²(t) φ(ζ(t)) − 1|`.
    pub h2psi: T,
    /// `Θφ'(ζ)(tΘ' + Θ) + Θ'φ(ζ) + Θ'/Θ²`, scaled by `Θ²|φ'(ζ)| + 1/(tΘ)`.
    pub th_prime: T,
    /// Relative error of `√ψ(w) w = √φ(s) s` with `w = φ(s) s`.
    pub phipsi: T,
    /// Relative error of `Θ̃ Θ = 1` for the dual weight.
    pub theta_dual: T,
    /// `|Λ̃(t) + Λ(t)|`.
    pub lambda_dual: T,
    pub nodes: usize,
}

/// Θ' by a fourth-order central difference with step `1e-4 t`.
pub fn theta_derivative<T: Real>(profile: &LambdaProfile<T>, t: T) -> Result<T> {
    let h = t * T::lit(1e-4);
    let two = T::lit(2.0);
    let f = |x: T| profile.theta(x);
    Ok((f(t - two * h)? - T::lit(8.0) * f(t - h)? + T::lit(8.0) * f(t + h)? - f(t + two * h)?) / (T::lit(12.0) * h))
}

/// Evaluates every identity at each node of `ts`; the ψ round trip uses the
/// magnitudes `s = ζ(t)`.
pub fn identity_residuals<T: Real>(profile: &LambdaProfile<T>, ts: &[T]) -> Result<IdentityResiduals<T>> {
    let phi = profile.phi();
    let dual = LambdaProfile::new(dual_phi(phi));
    let z0 = T::zero();
    let mut r = IdentityResiduals { h2psi: z0, th_prime: z0, phipsi: z0, theta_dual: z0, lambda_dual: z0, nodes: ts.len() };
    for &t in ts {
        let z = profile.zeta(t)?;
        let th = z / t;
        let (f, df) = (phi.phi(z), phi.dphi(z));
        r.h2psi = r.h2psi.max((th * th * f - T::one()).abs());

        let d = theta_derivative(profile, t)?;
        let lhs = th * df * (t * d + th) + d * f + d / (th * th);
        let scale = th * th * df.abs() + T::one() / (t * th);
        r.th_prime = r.th_prime.max(lhs.abs() / scale);

        let s = z;
        let w = phi.s_phi(s);
        let lhs = phi.psi(w)?.sqrt() * w;
        let rhs = phi.phi(s).sqrt() * s;
        r.phipsi = r.phipsi.max(((lhs - rhs) / rhs).abs());

        let thd = dual.theta(t)?;
        r.theta_dual = r.theta_dual.max((thd * th - T::one()).abs());
        r.lambda_dual = r.lambda_dual.max((dual.lambda(t)? + profile.lambda(t)?).abs());
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::PhiSpec;
    use crate::scalar::log_space;

    #[test]
    fn power_residuals_are_tiny() {
        let prof = LambdaProfile::new(PhiSpec::power(3.0).unwrap());
        let r = identity_residuals(&prof, &log_space(1e-3, 1e3, 40)).unwrap();
        assert!(r.h2psi < 1e-13 && r.phipsi < 1e-13, "{r:?}");
        assert!(r.th_prime < 1e-8 && r.lambda_dual < 1e-10, "{r:?}");
    }

    #[test]
    fn theta_derivative_matches_lambda() {
        let prof = LambdaProfile::new(PhiSpec::<f64>::exp_square());
        for t in [0.1, 1.0, 30.0] {
            let d = theta_derivative(&prof, t).unwrap();
            let exact = prof.lambda(t).unwrap() * prof.theta(t).unwrap() / t;
            assert!((d - exact).abs() <= 1e-9 * exact.abs(), "t={t}");
        }
    }
}
