use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{form_integrals, FormCoefficients, FormQuadrature, Phase, TestField};
use crate::criteria::AlgebraicProbe;
use crate::error::Result;
use crate::lambda::LambdaProfile;
use crate::scalar::Real;

/// Composition of the default ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EnsembleSpec {
    pub poly: usize,
    pub affine: usize,
    pub oscillatory: usize,
    pub seed: u64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec { poly: 20, affine: 20, oscillatory: 20, seed: 0x5eed }
    }
}

fn unit2<T: Real>(rng: &mut ChaCha8Rng) -> [T; 2] {
    let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    [T::lit(a.cos()), T::lit(a.sin())]
}

fn creal<T: Real>(a: T) -> Complex<T> {
    Complex::new(a, T::zero())
}

/// Real test fields supported inside `domain = [x0, x1, y0, y1]`, followed by
/// an oscillatory field built from `probe` when given.
pub fn standard_ensemble<T: Real>(
    domain: [T; 4],
    spec: &EnsembleSpec,
    probe: Option<&AlgebraicProbe<T>>,
) -> Vec<TestField<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let w = (domain[1] - domain[0]).min(domain[3] - domain[2]).as_f64();
    let (x0, x1, y0, y1) = (domain[0].as_f64(), domain[1].as_f64(), domain[2].as_f64(), domain[3].as_f64());
    let place = |rng: &mut ChaCha8Rng| {
        let r = w * rng.gen_range(0.15..0.3);
        let m = r * 1.02;
        let c = [rng.gen_range(x0 + m..x1 - m), rng.gen_range(y0 + m..y1 - m)];
        ([T::lit(c[0]), T::lit(c[1])], T::lit(r))
    };
    let mut out = Vec::with_capacity(spec.poly + spec.affine + spec.oscillatory + 1);
    for _ in 0..spec.poly {
        let (center, radius) = place(&mut rng);
        let mut coef = [[creal(T::zero()); 3]; 2];
        for z in coef.iter_mut().flatten() {
            *z = creal(T::lit(rng.gen_range(-1.0..1.0)));
        }
        // keep the linear part comparable to the constant part
        for row in coef.iter_mut() {
            row[1] = row[1] / radius;
            row[2] = row[2] / radius;
        }
        out.push(TestField::PolyBump { center, radius, coef });
    }
    for i in 0..spec.affine {
        let (center, radius) = place(&mut rng);
        let twist = match i {
            0 => 0.0,
            1 => std::f64::consts::FRAC_PI_2,
            _ => rng.gen_range(0.0..std::f64::consts::TAU),
        };
        let amp = rng.gen_range(0.5..2.0);
        out.push(TestField::Radial { center, radius, amp: T::lit(amp), twist: T::lit(twist) });
    }
    for _ in 0..spec.oscillatory {
        let (center, radius) = place(&mut rng);
        let xi = unit2::<T>(&mut rng);
        let eta = unit2::<T>(&mut rng);
        let omega = unit2::<T>(&mut rng);
        let a = T::lit(rng.gen_range(0.5..3.0));
        let rho = T::lit(2f64.powf(rng.gen_range(0.0..3.0)));
        out.push(TestField::Oscillatory {
            center,
            inner: radius / T::lit(2.0),
            outer: radius,
            base: [creal(omega[0]), creal(omega[1])],
            amp: [creal(a * eta[0]), creal(a * eta[1])],
            xi,
            rho,
            phase: Phase::Sine,
        });
    }
    if let Some(p) = probe {
        let half = T::lit(0.5);
        let center = [(domain[0] + domain[1]) * half, (domain[2] + domain[3]) * half];
        let r = T::lit(w * 0.3);
        out.push(probe_field(p, center, r / T::lit(2.0), r, T::one(), T::lit(4.0), T::lit(8.0)));
    }
    out
}

fn probe_field<T: Real>(
    p: &AlgebraicProbe<T>,
    center: [T; 2],
    inner: T,
    outer: T,
    base: T,
    amp: T,
    rho: T,
) -> TestField<T> {
    let real = p.eta.iter().chain(&p.omega).all(|z| z.im.abs() <= T::lit(1e-12));
    let cut = |z: Complex<T>| if real { creal(z.re) } else { z };
    TestField::Oscillatory {
        center,
        inner,
        outer,
        base: [cut(p.omega[0]) * base, cut(p.omega[1]) * base],
        amp: [cut(p.eta[0]) * amp, cut(p.eta[1]) * amp],
        xi: p.xi,
        rho,
        phase: if real { Phase::Sine } else { Phase::Exp },
    }
}

/// Per-field result of [`strict_margin`].
#[derive(Debug, Clone, Serialize)]
pub struct FieldResult<T> {
    pub index: usize,
    pub family: &'static str,
    pub form: T,
    pub grad_sq: T,
    /// `form − κ ∫|∇v|²`
    pub residual: T,
    /// The form of `A − κΔ`, i.e. `form − κ ∫(|∇v|² − Λ²|∇|v||²)`.
    pub shifted_form: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrictMarginReport<T> {
    pub kappa: T,
    pub min_residual: T,
    pub argmin: usize,
    pub fields: Vec<FieldResult<T>>,
}

impl<T: Real> StrictMarginReport<T> {
    pub fn min_shifted_form(&self) -> T {
        self.fields.iter().map(|f| f.shifted_form).fold(T::infinity(), T::min)
    }

    pub const CSV_HEADER: &'static str = "index,family,form,grad_sq,residual,shifted_form";

    pub fn csv_rows(&self) -> Vec<String> {
        self.fields
            .iter()
            .map(|f| format!("{},{},{:e},{:e},{:e},{:e}", f.index, f.family, f.form.as_f64(), f.grad_sq.as_f64(), f.residual.as_f64(), f.shifted_form.as_f64()))
            .collect()
    }
}

/// Worst `form − κ‖∇v‖²` over the ensemble. Nonnegative values are
/// consistent with, not proof of, strict dissipativity with constant `κ`.
pub fn strict_margin<T: Real>(
    coeffs: &(impl FormCoefficients<T> + ?Sized),
    profile: &LambdaProfile<T>,
    ensemble: &[TestField<T>],
    kappa: T,
) -> Result<StrictMarginReport<T>> {
    let q = FormQuadrature::default();
    let mut fields = Vec::with_capacity(ensemble.len());
    for (index, v) in ensemble.iter().enumerate() {
        let fi = form_integrals(coeffs, profile, v, &q)?;
        fields.push(FieldResult {
            index,
            family: v.tag(),
            form: fi.total,
            grad_sq: fi.grad_sq,
            residual: fi.total - kappa * fi.grad_sq,
            shifted_form: fi.total - kappa * (fi.grad_sq - fi.lambda_grad_abs_sq),
        });
    }
    let (argmin, min_residual) = fields
        .iter()
        .map(|f| f.residual)
        .enumerate()
        .fold((0, T::infinity()), |acc, (i, r)| if r < acc.1 { (i, r) } else { acc });
    Ok(StrictMarginReport { kappa, min_residual, argmin, fields })
}

/// Shape of the oscillatory counterexample
/// `M ω χ_o(x) + (A/ρ) η χ(x) sin(ρ⟨ξ, x − c⟩)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CounterexampleOptions<T> {
    pub center: [T; 2],
    pub inner: T,
    pub outer: T,
    /// `M`
    pub base: T,
    /// `A`
    pub amplitude: T,
    /// Frequencies `ρ = 2^j` for `j = 0..=max_octave`.
    pub max_octave: u32,
    pub stop_at_first_negative: bool,
}

impl<T: Real> CounterexampleOptions<T> {
    pub fn centered(domain: [T; 4]) -> Self {
        let half = T::lit(0.5);
        let w = (domain[1] - domain[0]).min(domain[3] - domain[2]);
        CounterexampleOptions {
            center: [(domain[0] + domain[1]) * half, (domain[2] + domain[3]) * half],
            inner: w * T::lit(0.25),
            outer: w * T::lit(0.45),
            base: T::one(),
            amplitude: T::lit(40.0),
            max_octave: 10,
            stop_at_first_negative: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CounterexampleRow<T> {
    pub rho: T,
    pub form: T,
    pub grad_sq: T,
    pub residual: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport<T> {
    pub kappa: T,
    pub rows: Vec<CounterexampleRow<T>>,
    /// Smallest swept `ρ` with a negative residual.
    pub first_negative: Option<T>,
}

/// Sweeps the frequency of an oscillatory field built from an algebraic
/// minimiser `(ξ, η, ω)` and records the residual `form − κ‖∇v‖²`.
pub fn oscillatory_counterexample<T: Real>(
    coeffs: &(impl FormCoefficients<T> + ?Sized),
    profile: &LambdaProfile<T>,
    probe: &AlgebraicProbe<T>,
    kappa: T,
    opts: &CounterexampleOptions<T>,
) -> Result<CounterexampleReport<T>> {
    let q = FormQuadrature::default();
    let mut rows = Vec::new();
    let mut first_negative = None;
    for j in 0..=opts.max_octave {
        let rho = T::lit(2f64.powi(j as i32));
        let v = probe_field(probe, opts.center, opts.inner, opts.outer, opts.base, opts.amplitude, rho);
        let fi = form_integrals(coeffs, profile, &v, &q)?;
        let residual = fi.total - kappa * fi.grad_sq;
        rows.push(CounterexampleRow { rho, form: fi.total, grad_sq: fi.grad_sq, residual });
        if residual < T::zero() && first_negative.is_none() {
            first_negative = Some(rho);
            if opts.stop_at_first_negative {
                break;
            }
        }
    }
    Ok(CounterexampleReport { kappa, rows, first_negative })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::{algebraic_margin, AlgebraicSearch};
    use crate::forms::ConstantLame;
    use crate::operator::GeneralSystem;
    use crate::phi::PhiSpec;

    const UNIT: [f64; 4] = [0.0, 1.0, 0.0, 1.0];

    #[test]
    fn ensemble_is_deterministic_and_interior() {
        let a = standard_ensemble(UNIT, &EnsembleSpec::default(), None);
        let b = standard_ensemble(UNIT, &EnsembleSpec::default(), None);
        assert_eq!(a, b);
        assert_eq!(a.len(), 60);
        for f in &a {
            let s = f.support();
            assert!(s[0] > 0.0 && s[1] < 1.0 && s[2] > 0.0 && s[3] < 1.0, "{s:?}");
            assert!(f.is_real());
        }
    }

    #[test]
    fn strict_margin_for_p2_lame() {
        let prof = LambdaProfile::new(PhiSpec::power(2.0).unwrap());
        let lame = ConstantLame { lambda: 1.0, mu: 1.0 };
        let ens = standard_ensemble(UNIT, &EnsembleSpec { poly: 4, affine: 4, oscillatory: 4, seed: 7 }, None);
        let rep = strict_margin(&lame, &prof, &ens, 0.5).unwrap();
        assert!(rep.min_residual >= 0.0, "{}", rep.min_residual);
        let zero = strict_margin(&lame, &prof, &ens, 0.0).unwrap();
        for f in &zero.fields {
            assert_eq!(f.form, f.residual);
        }
    }

    #[test]
    fn counterexample_turns_negative_beyond_threshold() {
        let phi = PhiSpec::power(100.0).unwrap();
        let prof = LambdaProfile::new(phi);
        let sys = GeneralSystem::lame(2, 1.0, 1.0);
        let lam = prof.lambda(1.0).unwrap();
        let search = AlgebraicSearch { random_probes: 0, real_only: true, ..Default::default() };
        let m = algebraic_margin(&sys, lam, &search).unwrap();
        assert!(m.min_value < 0.0);
        let lame = ConstantLame { lambda: 1.0, mu: 1.0 };
        let rep = oscillatory_counterexample(&lame, &prof, &m.argmin, 0.0, &CounterexampleOptions::centered(UNIT)).unwrap();
        assert!(rep.first_negative.is_some());
    }
}
