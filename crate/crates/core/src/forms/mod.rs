//! Quadrature of the dissipativity forms on analytic test fields.
//!
//! Results over finite ensembles are evidence: a negative value refutes
//! dissipativity, nonnegative values only support it.

mod ensemble;
mod field;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

pub use ensemble::{
    oscillatory_counterexample, standard_ensemble, strict_margin, CounterexampleOptions, CounterexampleReport,
    CounterexampleRow, EnsembleSpec, FieldResult, StrictMarginReport,
};
pub use field::{FieldSample, Phase, TestField};

use crate::error::{Error, Result};
use crate::lambda::LambdaProfile;
use crate::operator::{ess_bounds, CoefficientField, GeneralSystem};
use crate::phi::PhiSpec;
use crate::quad::GaussLegendre;
use crate::scalar::Real;

/// Coefficients `a^{hk}_{ij}` of a 2×2 system, indexed `[h][k][i][j]`.
pub type Tensor2<T> = [[[[Complex<T>; 2]; 2]; 2]; 2];

/// Pointwise coefficients of an operator in the plane.
pub trait FormCoefficients<T: Real>: Sync {
    fn tensor(&self, x: [T; 2]) -> Tensor2<T>;

    /// `(λ, μ)` when the operator is Lamé at `x`.
    fn lame(&self, _x: [T; 2]) -> Option<(T, T)> {
        None
    }

    /// Box `[x0, x1, y0, y1]` on which the coefficients are defined.
    fn domain(&self) -> Option<[T; 4]> {
        None
    }
}

pub fn lame_tensor<T: Real>(lambda: T, mu: T) -> Tensor2<T> {
    let d = |a: usize, b: usize| if a == b { T::one() } else { T::zero() };
    let mut t = [[[[Complex::new(T::zero(), T::zero()); 2]; 2]; 2]; 2];
    for h in 0..2 {
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let v = lambda * d(i, h) * d(j, k) + mu * (d(i, j) * d(h, k) + d(i, k) * d(h, j));
                    t[h][k][i][j] = Complex::new(v, T::zero());
                }
            }
        }
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantLame<T> {
    pub lambda: T,
    pub mu: T,
}

impl<T: Real> FormCoefficients<T> for ConstantLame<T> {
    fn tensor(&self, _x: [T; 2]) -> Tensor2<T> {
        lame_tensor(self.lambda, self.mu)
    }

    fn lame(&self, _x: [T; 2]) -> Option<(T, T)> {
        Some((self.lambda, self.mu))
    }
}

impl<T: Real> FormCoefficients<T> for CoefficientField<T> {
    fn tensor(&self, x: [T; 2]) -> Tensor2<T> {
        let (l, m) = self.at(x);
        lame_tensor(l, m)
    }

    fn lame(&self, x: [T; 2]) -> Option<(T, T)> {
        Some(self.at(x))
    }

    fn domain(&self) -> Option<[T; 4]> {
        let g = &self.grid;
        Some([g.x0, g.x1, g.y0, g.y1])
    }
}

impl<T: Real> FormCoefficients<T> for GeneralSystem<T> {
    /// Panics unless `n = m = 2`; [`dissipativity_form`] checks this first.
    fn tensor(&self, _x: [T; 2]) -> Tensor2<T> {
        assert!(self.n == 2 && self.m == 2, "form evaluation needs n = m = 2");
        let mut t = [[[[Complex::new(T::zero(), T::zero()); 2]; 2]; 2]; 2];
        for (h, th) in t.iter_mut().enumerate() {
            for (k, tk) in th.iter_mut().enumerate() {
                for (i, ti) in tk.iter_mut().enumerate() {
                    for (j, z) in ti.iter_mut().enumerate() {
                        *z = self.get(h, k, i, j);
                    }
                }
            }
        }
        t
    }
}

/// The operator `A − κΔ`.
pub struct Shifted<'a, T, C: ?Sized> {
    pub inner: &'a C,
    pub kappa: T,
}

impl<T: Real, C: FormCoefficients<T> + ?Sized> FormCoefficients<T> for Shifted<'_, T, C> {
    fn tensor(&self, x: [T; 2]) -> Tensor2<T> {
        let mut t = self.inner.tensor(x);
        for h in 0..2 {
            for i in 0..2 {
                t[h][h][i][i] -= Complex::new(self.kappa, T::zero());
            }
        }
        t
    }

    fn domain(&self) -> Option<[T; 4]> {
        self.inner.domain()
    }
}

/// Tensor Gauss rule for the forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FormQuadrature {
    pub order: usize,
    /// Cells per panel away from oscillations.
    pub base_cells: usize,
    pub cells_per_wavelength: usize,
    /// The integrand is zero where `|v| < zero_rtol · scale`.
    pub zero_rtol: f64,
}

impl Default for FormQuadrature {
    fn default() -> Self {
        FormQuadrature { order: 8, base_cells: 4, cells_per_wavelength: 10, zero_rtol: 1e-14 }
    }
}

fn axis_nodes<T: Real>(
    breaks: &[T],
    osc: Option<(T, T, T)>,
    rule: &GaussLegendre<T>,
    q: &FormQuadrature,
) -> Vec<(T, T)> {
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut cells = q.base_cells.max(1);
        if let Some((lo, hi, k)) = osc {
            if a >= lo - (hi - lo) * T::lit(1e-12) && b <= hi + (hi - lo) * T::lit(1e-12) {
                let waves = (b - a) * k / T::TAU();
                let need = (waves * T::from_usize_lossy(q.cells_per_wavelength)).ceil().as_f64() as usize;
                cells = cells.max(need);
            }
        }
        let h = (b - a) / T::from_usize_lossy(cells);
        for c in 0..cells {
            let x0 = a + h * T::from_usize_lossy(c);
            out.extend(rule.on(x0, x0 + h));
        }
    }
    out
}

/// Integrates `K` quantities over the support of `field`. The callback gets
/// the point, the sample and whether the point lies in the zero set.
pub fn integrate_field<T: Real, const K: usize>(
    field: &TestField<T>,
    q: &FormQuadrature,
    f: impl Fn([T; 2], &FieldSample<T>, bool) -> Result<[T; K]> + Sync,
) -> Result<[T; K]> {
    let rule = GaussLegendre::<T>::new(q.order);
    let [bx, by] = field.breakpoints();
    let osc = field.oscillation();
    let xs = axis_nodes(&bx, osc.map(|(b, k)| (b[0], b[1], k)), &rule, q);
    let ys = axis_nodes(&by, osc.map(|(b, k)| (b[2], b[3], k)), &rule, q);
    let threshold = field.scale() * T::lit(q.zero_rtol);
    let rows: Vec<[T; K]> = xs
        .par_iter()
        .map(|&(x, wx)| {
            let mut acc = [T::zero(); K];
            for &(y, wy) in &ys {
                let p = [x, y];
                let s = field.sample(p);
                let vals = f(p, &s, s.norm() < threshold)?;
                for (a, v) in acc.iter_mut().zip(vals) {
                    *a += wx * wy * v;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = [T::zero(); K];
    for r in rows {
        for (t, v) in total.iter_mut().zip(r) {
            *t += v;
        }
    }
    Ok(total)
}

fn dot<T: Real>(a: [Complex<T>; 2], b: [Complex<T>; 2]) -> Complex<T> {
    a[0] * b[0].conj() + a[1] * b[1].conj()
}

/// The three terms of the pointwise integrand (real parts): the principal
/// term, the Λ cross term and the Λ² term.
pub fn cond1_terms<T: Real>(a: &Tensor2<T>, lam: T, s: &FieldSample<T>) -> [T; 3] {
    let zero = Complex::new(T::zero(), T::zero());
    let n2 = s.v[0].norm_sqr() + s.v[1].norm_sqr();
    // column k of the Jacobian
    let col = |k: usize| [s.grad[0][k], s.grad[1][k]];
    let r = [dot(s.v, col(0)).re, dot(s.v, col(1)).re];
    let (mut t1, mut t2, mut t3) = (zero, zero, zero);
    for h in 0..2 {
        for k in 0..2 {
            let mut av = [zero; 2];
            let mut adv = [zero; 2];
            let mut bv = [zero; 2];
            for i in 0..2 {
                for j in 0..2 {
                    let c = a[h][k][i][j];
                    adv[i] += c * s.grad[j][k];
                    av[i] += c * s.v[j];
                    bv[i] += (c - a[k][h][j][i].conj()) * s.v[j];
                }
            }
            t1 += dot(adv, col(h));
            t2 += dot(bv, col(h)) * r[k];
            t3 += dot(av, s.v) * (r[k] * r[h]);
        }
    }
    [t1.re, (t2 * lam / n2).re, -(t3 * (lam * lam / (n2 * n2))).re]
}

/// `(X₁, X₂, Y₁, Y₂)` of a real sample; zeros on the zero set.
pub fn xy_from_sample<T: Real>(s: &FieldSample<T>, zero_threshold: T) -> [T; 4] {
    let v = s.re_v();
    let g = s.re_grad();
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    if n <= zero_threshold || n == T::zero() {
        return [T::zero(); 4];
    }
    let dn = [(v[0] * g[0][0] + v[1] * g[1][0]) / n, (v[0] * g[0][1] + v[1] * g[1][1]) / n];
    let x1 = (v[0] * dn[0] + v[1] * dn[1]) / n;
    let x2 = (v[1] * dn[0] - v[0] * dn[1]) / n;
    let div = g[0][0] + g[1][1];
    let curl = g[1][0] - g[0][1];
    [x1, x2, div - x1, curl - x2]
}

/// `(X₁, X₂, Y₁, Y₂)` of a real field at `x`. Imaginary parts are ignored.
pub fn xy_decompose<T: Real>(v: &TestField<T>, x: [T; 2]) -> [T; 4] {
    xy_from_sample(&v.sample(x), v.scale() * T::lit(FormQuadrature::default().zero_rtol))
}

/// Pointwise Lamé quantities of a real sample.
#[derive(Debug, Clone, Copy)]
struct LameLocal<T> {
    grad_sq: T,
    div_sq: T,
    sigma: T,
    grad_abs_sq: T,
    x1_sq: T,
}

fn lame_local<T: Real>(s: &FieldSample<T>) -> LameLocal<T> {
    let v = s.re_v();
    let g = s.re_grad();
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    let grad_sq = g[0][0] * g[0][0] + g[0][1] * g[0][1] + g[1][0] * g[1][0] + g[1][1] * g[1][1];
    let div = g[0][0] + g[1][1];
    let sigma = g[0][0] * g[0][0] + g[1][1] * g[1][1] + T::lit(2.0) * g[0][1] * g[1][0];
    let (grad_abs_sq, x1_sq) = if n > T::zero() {
        let dn = [(v[0] * g[0][0] + v[1] * g[1][0]) / n, (v[0] * g[0][1] + v[1] * g[1][1]) / n];
        let vd = (v[0] * dn[0] + v[1] * dn[1]) / n;
        (dn[0] * dn[0] + dn[1] * dn[1], vd * vd)
    } else {
        (T::zero(), T::zero())
    };
    LameLocal { grad_sq, div_sq: div * div, sigma, grad_abs_sq, x1_sq }
}

/// The real Lamé integrand with shift `κ` and `Λ²(|v|) = l2`.
pub fn tesielas_density<T: Real>(lambda: T, mu: T, kappa: T, l2: T, s: &FieldSample<T>) -> T {
    let q = lame_local(s);
    (mu - kappa) * q.grad_sq + lambda * q.div_sq + mu * q.sigma
        - l2 * ((mu - kappa) * q.grad_abs_sq + (lambda + mu) * q.x1_sq)
}

/// Integrals produced in one pass over a test field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FormIntegrals<T> {
    /// The dissipativity form.
    pub total: T,
    /// Contribution of the term with `A^{hk} − (A^{kh})*`.
    pub cross_term: T,
    /// `∫ |∇v|²`.
    pub grad_sq: T,
    /// `∫ Λ²(|v|) |∇|v||²`.
    pub lambda_grad_abs_sq: T,
}

fn check_support<T: Real>(coeffs: &(impl FormCoefficients<T> + ?Sized), v: &TestField<T>) -> Result<()> {
    if let Some(d) = coeffs.domain() {
        let s = v.support();
        if !(s[0] > d[0] && s[1] < d[1] && s[2] > d[2] && s[3] < d[3]) {
            return Err(Error::InvalidParameter(format!(
                "test field support [{}, {}]x[{}, {}] is not interior to the domain",
                s[0], s[1], s[2], s[3]
            )));
        }
    }
    Ok(())
}

pub fn form_integrals<T: Real>(
    coeffs: &(impl FormCoefficients<T> + ?Sized),
    profile: &LambdaProfile<T>,
    v: &TestField<T>,
    q: &FormQuadrature,
) -> Result<FormIntegrals<T>> {
    check_support(coeffs, v)?;
    let [total, cross, g2, lg] = integrate_field(v, q, |x, s, zero| {
        let g2 = s.grad_sq();
        if zero {
            return Ok([T::zero(), T::zero(), g2, T::zero()]);
        }
        let lam = profile.lambda(s.norm())?;
        let [t1, t2, t3] = cond1_terms(&coeffs.tensor(x), lam, s);
        let n = s.norm();
        let col = |k: usize| [s.grad[0][k], s.grad[1][k]];
        let dn = [dot(s.v, col(0)).re / n, dot(s.v, col(1)).re / n];
        Ok([t1 + t2 + t3, t2, g2, lam * lam * (dn[0] * dn[0] + dn[1] * dn[1])])
    })?;
    Ok(FormIntegrals { total, cross_term: cross, grad_sq: g2, lambda_grad_abs_sq: lg })
}

/// The dissipativity form of `coeffs` evaluated on `v`.
pub fn dissipativity_form<T: Real>(
    coeffs: &(impl FormCoefficients<T> + ?Sized),
    profile: &LambdaProfile<T>,
    v: &TestField<T>,
) -> Result<T> {
    Ok(form_integrals(coeffs, profile, v, &FormQuadrature::default())?.total)
}

/// Direct quadrature of the real Lamé integrand with shift `κ`.
pub fn lame_form<T: Real>(
    coeffs: &(impl FormCoefficients<T> + ?Sized),
    profile: &LambdaProfile<T>,
    v: &TestField<T>,
    kappa: T,
) -> Result<T> {
    check_support(coeffs, v)?;
    let q = FormQuadrature::default();
    let [val] = integrate_field(v, &q, |x, s, zero| {
        let (l, m) = coeffs
            .lame(x)
            .ok_or_else(|| Error::InvalidParameter("coefficients are not of Lamé type".into()))?;
        if zero {
            let q = lame_local(s);
            return Ok([(m - kappa) * q.grad_sq + l * q.div_sq + m * q.sigma]);
        }
        let lam = profile.lambda(s.norm())?;
        Ok([tesielas_density(l, m, kappa, lam * lam, s)])
    })?;
    Ok(val)
}

/// Term-wise decomposition of the Lamé form in the variables `X₁, X₂, Y₁, Y₂`.
/// Each part is the weighted integral as it enters the sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FormBreakdown<T> {
    pub total: T,
    /// `∫ (λ+2μ−κ)(1−Λ²) X₁²`
    pub x1_sq: T,
    /// `∫ (μ−κ)(1−Λ²) X₂²`
    pub x2_sq: T,
    /// `∫ (λ+2μ−κ) Y₁²`
    pub y1_sq: T,
    /// `∫ (μ−κ) Y₂²`
    pub y2_sq: T,
    /// `∫ 2λ X₁Y₁`
    pub cross_x1y1: T,
    /// `∫ −2μ X₂Y₂`
    pub cross_x2y2: T,
    /// `2 ∫ μ²/(λ+3μ) (Σ ∂_k v_j ∂_j v_k − (div v)²)`
    pub commutator_term: T,
    /// The commutator term after integration by parts, `∫ (v·∇f) div v − ∂_k f (v·∇)v_k` with `f = 2μ²/(λ+3μ)`.
    pub commutator_by_parts: T,
    /// The `(X₁, Y₁)` form with cross weight `2(λ+μ−γ)`.
    pub gamma_x1y1_form: T,
    /// The `(X₂, Y₂)` form with cross weight `−2γ`.
    pub gamma_x2y2_form: T,
    /// `min over nodes of (μ−κ)²(1−Λ∞²) − γ²`.
    pub disgamma_margin: T,
    /// `min over nodes of (λ+2μ−κ)²(1−Λ∞²) − (λ+μ−γ)²`.
    pub disgamma2_margin: T,
    pub discriminants_hold: bool,
    pub kappa: T,
    pub lambda_inf_sq: T,
}

impl<T: Real> FormBreakdown<T> {
    pub fn parts_sum(&self) -> T {
        self.x1_sq + self.x2_sq + self.y1_sq + self.y2_sq + self.cross_x1y1 + self.cross_x2y2
    }

    pub fn gamma_sum(&self) -> T {
        self.gamma_x1y1_form + self.gamma_x2y2_form + self.commutator_term
    }
}

/// Node-wise discriminants for the γ-shifted quadratic forms.
pub fn discriminant_margins<T: Real>(field: &CoefficientField<T>, kappa: T, lambda_inf_sq: T) -> (T, T) {
    let three = T::lit(3.0);
    let two = T::lit(2.0);
    let mut d1 = T::infinity();
    let mut d2 = T::infinity();
    for (&l, &m) in field.lambda.iter().zip(&field.mu) {
        let g = m * (l + m) / (l + three * m);
        let a = m - kappa;
        let b = l + two * m - kappa;
        let c = l + m - g;
        d1 = d1.min(a * a * (T::one() - lambda_inf_sq) - g * g);
        d2 = d2.min(b * b * (T::one() - lambda_inf_sq) - c * c);
    }
    (d1, d2)
}

pub fn elasticity_breakdown<T: Real>(
    field: &CoefficientField<T>,
    profile: &LambdaProfile<T>,
    v: &TestField<T>,
    kappa: T,
) -> Result<FormBreakdown<T>> {
    let b = ess_bounds(field)?;
    if b.inf_mu - kappa <= T::zero() || b.inf_lam2mu - kappa <= T::zero() {
        return Err(Error::EllipticityViolation { inf_mu: (b.inf_mu - kappa).as_f64(), inf_lam2mu: (b.inf_lam2mu - kappa).as_f64() });
    }
    check_support(field, v)?;
    let summary = profile.lambda_infinity()?;
    let (d1, d2) = discriminant_margins(field, kappa, summary.effective_sq);
    let q = FormQuadrature::default();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let weight = |x: [T; 2]| {
        let (l, m) = field.at(x);
        two * m * m / (l + three * m)
    };
    let h = T::lit(1e-7) * (field.grid.x1 - field.grid.x0).abs().max(field.grid.y1 - field.grid.y0);
    let vals = integrate_field(v, &q, |x, s, zero| {
        let (l, m) = field.at(x);
        let g = m * (l + m) / (l + three * m);
        let loc = lame_local(s);
        let f = two * m * m / (l + three * m);
        let comm = f * (loc.sigma - loc.div_sq);
        let df = [
            (weight([x[0] + h, x[1]]) - weight([x[0] - h, x[1]])) / (h + h),
            (weight([x[0], x[1] + h]) - weight([x[0], x[1] - h])) / (h + h),
        ];
        let vr = s.re_v();
        let gr = s.re_grad();
        let div = gr[0][0] + gr[1][1];
        let mut by_parts = (vr[0] * df[0] + vr[1] * df[1]) * div;
        for k in 0..2 {
            by_parts -= df[k] * (vr[0] * gr[k][0] + vr[1] * gr[k][1]);
        }
        if zero {
            let mut out = [T::zero(); 11];
            out[0] = (m - kappa) * loc.grad_sq + l * loc.div_sq + m * loc.sigma;
            out[7] = comm;
            out[8] = by_parts;
            return Ok(out);
        }
        let lam = profile.lambda(s.norm())?;
        let l2 = lam * lam;
        let [x1, x2, y1, y2] = xy_from_sample(s, T::zero());
        let a1 = l + two * m - kappa;
        let a2 = m - kappa;
        let one = T::one();
        Ok([
            tesielas_density(l, m, kappa, l2, s),
            a1 * (one - l2) * x1 * x1,
            a2 * (one - l2) * x2 * x2,
            a1 * y1 * y1,
            a2 * y2 * y2,
            two * l * x1 * y1,
            -two * m * x2 * y2,
            comm,
            by_parts,
            a1 * (one - l2) * x1 * x1 + two * (l + m - g) * x1 * y1 + a1 * y1 * y1,
            a2 * (one - l2) * x2 * x2 - two * g * x2 * y2 + a2 * y2 * y2,
        ])
    })?;
    Ok(FormBreakdown {
        total: vals[0],
        x1_sq: vals[1],
        x2_sq: vals[2],
        y1_sq: vals[3],
        y2_sq: vals[4],
        cross_x1y1: vals[5],
        cross_x2y2: vals[6],
        commutator_term: vals[7],
        commutator_by_parts: vals[8],
        gamma_x1y1_form: vals[9],
        gamma_x2y2_form: vals[10],
        disgamma_margin: d1,
        disgamma2_margin: d2,
        discriminants_hold: d1 > T::zero() && d2 > T::zero(),
        kappa,
        lambda_inf_sq: summary.effective_sq,
    })
}

/// `|∇(√φ(|u|)u)|²` and `φ(|u|)|∇u|²` for a real field `u` at one point.
pub fn substitution_gradient<T: Real>(phi: &PhiSpec<T>, u: [T; 2], grad_u: [[T; 2]; 2]) -> (T, T) {
    let n = (u[0] * u[0] + u[1] * u[1]).sqrt();
    let gu2: T = grad_u.iter().flatten().map(|x| *x * *x).sum();
    if n == T::zero() {
        return (T::zero(), T::zero());
    }
    let p = phi.phi(n);
    let sp = p.sqrt();
    let c = phi.dphi(n) / (T::lit(2.0) * sp);
    let dn = [(u[0] * grad_u[0][0] + u[1] * grad_u[1][0]) / n, (u[0] * grad_u[0][1] + u[1] * grad_u[1][1]) / n];
    let mut gv2 = T::zero();
    for j in 0..2 {
        for k in 0..2 {
            let d = sp * grad_u[j][k] + c * dn[k] * u[j];
            gv2 += d * d;
        }
    }
    (gv2, p * gu2)
}

/// `sup |sφ'(s)/φ(s)|` over a logarithmic grid on `[lo, hi]`.
pub fn log_derivative_bound<T: Real>(phi: &PhiSpec<T>, lo: T, hi: T, nodes: usize) -> T {
    crate::scalar::log_space(lo, hi, nodes)
        .into_iter()
        .map(|s| phi.log_derivative(s).abs())
        .fold(T::zero(), T::max)
}
