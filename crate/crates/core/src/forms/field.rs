use num_complex::Complex;
use serde::Serialize;

use crate::scalar::Real;

/// Value and Jacobian of a vector field at a point; `grad[j][k] = ∂_k v_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample<T> {
    pub v: [Complex<T>; 2],
    pub grad: [[Complex<T>; 2]; 2],
}

impl<T: Real> FieldSample<T> {
    pub fn real(v: [T; 2], grad: [[T; 2]; 2]) -> Self {
        let c = |x: T| Complex::new(x, T::zero());
        FieldSample { v: [c(v[0]), c(v[1])], grad: [[c(grad[0][0]), c(grad[0][1])], [c(grad[1][0]), c(grad[1][1])]] }
    }

    pub fn norm(&self) -> T {
        (self.v[0].norm_sqr() + self.v[1].norm_sqr()).sqrt()
    }

    pub fn grad_sq(&self) -> T {
        self.grad.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    pub fn re_v(&self) -> [T; 2] {
        [self.v[0].re, self.v[1].re]
    }

    pub fn re_grad(&self) -> [[T; 2]; 2] {
        [[self.grad[0][0].re, self.grad[0][1].re], [self.grad[1][0].re, self.grad[1][1].re]]
    }

    pub fn is_real(&self) -> bool {
        self.v.iter().chain(self.grad.iter().flatten()).all(|z| z.im == T::zero())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    /// `sin(ρ⟨ξ, x − c⟩)`, a real field.
    Sine,
    /// `exp(iρ⟨ξ, x − c⟩)`.
    Exp,
}

/// Analytic test fields with exact derivatives and box-shaped support.
#[derive(Debug, Clone, PartialEq)]
pub enum TestField<T> {
    /// `v_j = (c_j0 + c_j1 (x−c)_1 + c_j2 (x−c)_2) χ(x)`, with `χ` the
    /// tensor bump `(1 − u²)²` of half-width `radius`.
    PolyBump { center: [T; 2], radius: T, coef: [[Complex<T>; 3]; 2] },
    /// `base · χ_o(x) + (amp/ρ) χ(x) e(ρ⟨ξ, x − c⟩)`: `χ_o` equals one on the
    /// box of half-width `inner` and vanishes outside `outer`, `χ` is the
    /// bump of half-width `inner`.
    Oscillatory {
        center: [T; 2],
        inner: T,
        outer: T,
        base: [Complex<T>; 2],
        amp: [Complex<T>; 2],
        xi: [T; 2],
        rho: T,
        phase: Phase,
    },
    /// Radially weighted field `w(r) R_τ (x − c)` with `w = (1 − r²/R²)²` on the
    /// disc and `R_τ` the rotation by `twist`.
    Radial { center: [T; 2], radius: T, amp: T, twist: T },
}

/// `(1 − u²)²` on `|u| < 1` and its derivative in `u`.
fn bump<T: Real>(u: T) -> (T, T) {
    if u.abs() >= T::one() {
        return (T::zero(), T::zero());
    }
    let w = T::one() - u * u;
    (w * w, -T::lit(4.0) * u * w)
}

/// One on `|t| ≤ a`, cubic smoothstep down to zero at `b`.
fn plateau<T: Real>(t: T, a: T, b: T) -> (T, T) {
    let d = t.abs();
    if d <= a {
        return (T::one(), T::zero());
    }
    if d >= b {
        return (T::zero(), T::zero());
    }
    let w = b - a;
    let u = (d - a) / w;
    let three = T::lit(3.0);
    let two = T::lit(2.0);
    let val = T::one() - three * u * u + two * u * u * u;
    let du = (-T::lit(6.0) * u + T::lit(6.0) * u * u) / w;
    (val, if t < T::zero() { -du } else { du })
}

impl<T: Real> TestField<T> {
    pub fn tag(&self) -> &'static str {
        match self {
            TestField::PolyBump { .. } => "polynomial-bump",
            TestField::Oscillatory { .. } => "oscillatory",
            TestField::Radial { .. } => "radial",
        }
    }

    /// Closed support box `[x0, x1, y0, y1]`.
    pub fn support(&self) -> [T; 4] {
        let (c, r) = match self {
            TestField::PolyBump { center, radius, .. } => (*center, *radius),
            TestField::Oscillatory { center, outer, base, inner, .. } => {
                let zero = base.iter().all(|z| z.norm_sqr() == T::zero());
                (*center, if zero { *inner } else { *outer })
            }
            TestField::Radial { center, radius, .. } => (*center, *radius),
        };
        [c[0] - r, c[0] + r, c[1] - r, c[1] + r]
    }

    /// Breakpoints per axis where the field is only C¹; quadrature panels align with them.
    pub fn breakpoints(&self) -> [Vec<T>; 2] {
        match self {
            TestField::Oscillatory { center, inner, outer, base, .. } => {
                let zero = base.iter().all(|z| z.norm_sqr() == T::zero());
                let mk = |c: T| {
                    if zero {
                        vec![c - *inner, c + *inner]
                    } else {
                        vec![c - *outer, c - *inner, c + *inner, c + *outer]
                    }
                };
                [mk(center[0]), mk(center[1])]
            }
            _ => {
                let s = self.support();
                [vec![s[0], s[1]], vec![s[2], s[3]]]
            }
        }
    }

    /// Region carrying the oscillation and its wavenumber `ρ|ξ|`.
    pub fn oscillation(&self) -> Option<([T; 4], T)> {
        match self {
            TestField::Oscillatory { center, inner, xi, rho, .. } => {
                let k = *rho * (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
                Some(([center[0] - *inner, center[0] + *inner, center[1] - *inner, center[1] + *inner], k))
            }
            _ => None,
        }
    }

    /// Size of the field, used for the zero-set threshold.
    pub fn scale(&self) -> T {
        let cn = |v: &[Complex<T>]| v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        match self {
            TestField::PolyBump { coef, radius, .. } => {
                coef.iter().map(|row| cn(row)).fold(T::zero(), T::max) * T::one().max(*radius)
            }
            TestField::Oscillatory { base, amp, rho, .. } => cn(base).max(cn(amp) / *rho),
            TestField::Radial { amp, radius, .. } => amp.abs() * *radius,
        }
    }

    pub fn is_real(&self) -> bool {
        let re = |v: &[Complex<T>]| v.iter().all(|z| z.im == T::zero());
        match self {
            TestField::PolyBump { coef, .. } => coef.iter().all(|r| re(r)),
            TestField::Oscillatory { base, amp, phase, .. } => *phase == Phase::Sine && re(base) && re(amp),
            TestField::Radial { .. } => true,
        }
    }

    pub fn sample(&self, x: [T; 2]) -> FieldSample<T> {
        let zero = Complex::new(T::zero(), T::zero());
        let cr = |t: T| Complex::new(t, T::zero());
        match self {
            TestField::PolyBump { center, radius, coef } => {
                let d = [x[0] - center[0], x[1] - center[1]];
                let (b0, db0) = bump(d[0] / *radius);
                let (b1, db1) = bump(d[1] / *radius);
                let chi = b0 * b1;
                let dchi = [db0 * b1 / *radius, b0 * db1 / *radius];
                let mut s = FieldSample { v: [zero; 2], grad: [[zero; 2]; 2] };
                for j in 0..2 {
                    let c = &coef[j];
                    let poly = c[0] + c[1] * d[0] + c[2] * d[1];
                    s.v[j] = poly * chi;
                    for k in 0..2 {
                        s.grad[j][k] = c[1 + k] * chi + poly * dchi[k];
                    }
                }
                s
            }
            TestField::Oscillatory { center, inner, outer, base, amp, xi, rho, phase } => {
                let d = [x[0] - center[0], x[1] - center[1]];
                let (p0, dp0) = plateau(d[0], *inner, *outer);
                let (p1, dp1) = plateau(d[1], *inner, *outer);
                let chio = p0 * p1;
                let dchio = [dp0 * p1, p0 * dp1];
                let (b0, db0) = bump(d[0] / *inner);
                let (b1, db1) = bump(d[1] / *inner);
                let chi = b0 * b1;
                let dchi = [db0 * b1 / *inner, b0 * db1 / *inner];
                let arg = *rho * (xi[0] * d[0] + xi[1] * d[1]);
                let (e, de_darg) = match phase {
                    Phase::Sine => (cr(arg.sin()), cr(arg.cos())),
                    Phase::Exp => {
                        let e = Complex::new(arg.cos(), arg.sin());
                        (e, e * Complex::new(T::zero(), T::one()))
                    }
                };
                let mut s = FieldSample { v: [zero; 2], grad: [[zero; 2]; 2] };
                for j in 0..2 {
                    let a = amp[j] / *rho;
                    s.v[j] = base[j] * chio + a * chi * e;
                    for k in 0..2 {
                        s.grad[j][k] = base[j] * dchio[k] + a * (e * dchi[k] + de_darg * (chi * *rho * xi[k]));
                    }
                }
                s
            }
            TestField::Radial { center, radius, amp, twist } => {
                let d = [x[0] - center[0], x[1] - center[1]];
                let r2 = (d[0] * d[0] + d[1] * d[1]) / (*radius * *radius);
                if r2 >= T::one() {
                    return FieldSample { v: [zero; 2], grad: [[zero; 2]; 2] };
                }
                let w = (T::one() - r2) * (T::one() - r2) * *amp;
                // ∂_k w = −4(1 − r²/R²) d_k / R²
                let dw = [
                    -T::lit(4.0) * (T::one() - r2) * d[0] / (*radius * *radius) * *amp,
                    -T::lit(4.0) * (T::one() - r2) * d[1] / (*radius * *radius) * *amp,
                ];
                let (c, sn) = (twist.cos(), twist.sin());
                let rot = [[c, -sn], [sn, c]];
                let rd = [rot[0][0] * d[0] + rot[0][1] * d[1], rot[1][0] * d[0] + rot[1][1] * d[1]];
                let v = [w * rd[0], w * rd[1]];
                let grad = [
                    [dw[0] * rd[0] + w * rot[0][0], dw[1] * rd[0] + w * rot[0][1]],
                    [dw[0] * rd[1] + w * rot[1][0], dw[1] * rd[1] + w * rot[1][1]],
                ];
                FieldSample::real(v, grad)
            }
        }
    }

    /// The same field multiplied by `c`.
    pub fn scaled(&self, c: T) -> Self {
        let cc = Complex::new(c, T::zero());
        match self.clone() {
            TestField::PolyBump { center, radius, mut coef } => {
                coef.iter_mut().flatten().for_each(|z| *z = *z * cc);
                TestField::PolyBump { center, radius, coef }
            }
            TestField::Oscillatory { center, inner, outer, base, amp, xi, rho, phase } => TestField::Oscillatory {
                center,
                inner,
                outer,
                base: [base[0] * cc, base[1] * cc],
                amp: [amp[0] * cc, amp[1] * cc],
                xi,
                rho,
                phase,
            },
            TestField::Radial { center, radius, amp, twist } => TestField::Radial { center, radius, amp: amp * c, twist },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: &TestField<f64>, x: [f64; 2]) {
        let s = f.sample(x);
        let h = 1e-6;
        for k in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let (sp, sm) = (f.sample(xp), f.sample(xm));
            for j in 0..2 {
                let fd = (sp.v[j] - sm.v[j]) / (2.0 * h);
                assert!((fd - s.grad[j][k]).norm() < 1e-6 * (1.0 + s.grad[j][k].norm()), "{} at {x:?}", f.tag());
            }
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let c = |a: f64| Complex::new(a, 0.0);
        let fields = [
            TestField::PolyBump { center: [0.5, 0.5], radius: 0.3, coef: [[c(1.0), c(0.5), c(-2.0)], [c(0.2), c(1.0), c(3.0)]] },
            TestField::Oscillatory {
                center: [0.5, 0.5],
                inner: 0.2,
                outer: 0.4,
                base: [c(0.6), c(0.8)],
                amp: [c(2.0), Complex::new(-1.0, 0.5)],
                xi: [0.8, -0.6],
                rho: 7.0,
                phase: Phase::Exp,
            },
            TestField::Radial { center: [0.4, 0.6], radius: 0.3, amp: 2.0, twist: 0.7 },
        ];
        for f in &fields {
            for x in [[0.45, 0.52], [0.31, 0.69], [0.6, 0.41], [0.82, 0.55]] {
                fd_check(f, x);
            }
        }
        assert!(!fields[1].is_real());
        assert!(fields[0].is_real());
    }

    #[test]
    fn support_is_respected() {
        let f = TestField::Radial { center: [0.0, 0.0], radius: 1.0, amp: 1.0, twist: 0.0 };
        assert_eq!(f.sample([0.9, 0.9]).norm(), 0.0);
        assert_eq!(f.support(), [-1.0, 1.0, -1.0, 1.0]);
    }
}
