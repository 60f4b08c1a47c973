//! The weight function φ, its regularity metadata and grid certification of
//! the structural conditions (i)–(vi).

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::roots::{invert_increasing, Bracket};
use crate::scalar::{log_space, Real};

/// Shared scalar evaluator on `(0, inf)`.
pub type Eval<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// User-supplied φ. Missing derivatives fall back to finite differences.
#[derive(Clone)]
pub struct CustomPhi<T> {
    pub name: String,
    value: Eval<T>,
    derivative: Option<Eval<T>>,
    /// `s φ'(s) / φ(s)`, when a more accurate form than the quotient is known.
    log_derivative: Option<Eval<T>>,
}

impl<T: Real> CustomPhi<T> {
    pub fn new(name: impl Into<String>, value: Eval<T>, derivative: Option<Eval<T>>) -> Self {
        CustomPhi { name: name.into(), value, derivative, log_derivative: None }
    }

    pub fn with_log_derivative(mut self, g: Eval<T>) -> Self {
        self.log_derivative = Some(g);
        self
    }
}

#[derive(Clone)]
pub enum PhiFamily<T> {
    /// φ(s) = s^{p-2}
    Power { p: T },
    /// φ(s) = exp(s²)
    ExpSquare,
    /// The C¹ truncation φ_k of s^{p-2} that is constant above `k`.
    TruncatedPower { p: T, k: T },
    Custom(CustomPhi<T>),
}

impl<T: fmt::Debug> fmt::Debug for PhiFamily<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiFamily::Power { p } => write!(f, "Power(p={p:?})"),
            PhiFamily::ExpSquare => write!(f, "ExpSquare"),
            PhiFamily::TruncatedPower { p, k } => write!(f, "TruncatedPower(p={p:?}, k={k:?})"),
            PhiFamily::Custom(c) => write!(f, "Custom({})", c.name),
        }
    }
}

/// Regularity metadata of φ: growth `s^r` near zero below `s0` with bounds
/// `c1`, `c2`, and eventual monotonicity above `s1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiMeta<T> {
    pub r: T,
    pub s0: T,
    pub s1: T,
    pub c1: T,
    pub c2: T,
}

#[derive(Clone, Debug)]
pub struct PhiSpec<T> {
    pub family: PhiFamily<T>,
    pub meta: PhiMeta<T>,
    pub bracket: Bracket<T>,
}

fn check_meta<T: Real>(m: &PhiMeta<T>) -> Result<()> {
    let ok = m.r > -T::one() && m.s0 > T::zero() && m.s1 > m.s0 && m.c1 > T::zero() && m.c2 >= m.c1;
    if ok && m.r.is_finite() && m.s1.is_finite() && m.c2.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("inconsistent phi metadata {m:?}")))
    }
}

impl<T: Real> PhiSpec<T> {
    pub fn power(p: T) -> Result<Self> {
        if !(p > T::one()) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!("power exponent must exceed 1, got {p}")));
        }
        let two = T::lit(2.0);
        Ok(PhiSpec {
            family: PhiFamily::Power { p },
            meta: PhiMeta { r: p - two, s0: T::one(), s1: two, c1: p - T::one(), c2: p - T::one() },
            bracket: Bracket::default(),
        })
    }

    pub fn exp_square() -> Self {
        // (s e^{s²})' = (1 + 2s²) e^{s²} lies in [1, 3e] on (0, 1).
        PhiSpec {
            family: PhiFamily::ExpSquare,
            meta: PhiMeta {
                r: T::zero(),
                s0: T::one(),
                s1: T::lit(2.0),
                c1: T::one(),
                c2: T::lit(3.0) * T::E(),
            },
            bracket: Bracket::default(),
        }
    }

    /// φ_k: `s^{p-2}` below `k-1`, `ϱ(s)^{p-2}` on `[k-1, k]` with
    /// `ϱ(s) = s - (s-k+1)²/2`, and `(k-1/2)^{p-2}` above `k`.
    pub fn truncated_power(p: T, k: T) -> Result<Self> {
        if !(k > T::one()) || !k.is_finite() {
            return Err(Error::BadTruncation { k: k.as_f64() });
        }
        if !(p >= T::lit(2.0)) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!("truncated power needs p >= 2, got {p}")));
        }
        let two = T::lit(2.0);
        Ok(PhiSpec {
            family: PhiFamily::TruncatedPower { p, k },
            meta: PhiMeta {
                r: p - two,
                s0: (k - T::one()) / two,
                s1: k + T::one(),
                c1: p - T::one(),
                c2: p - T::one(),
            },
            bracket: Bracket::default(),
        })
    }

    pub fn custom(phi: CustomPhi<T>, meta: PhiMeta<T>) -> Result<Self> {
        check_meta(&meta)?;
        Ok(PhiSpec { family: PhiFamily::Custom(phi), meta, bracket: Bracket::default() })
    }

    pub fn with_bracket(mut self, bracket: Bracket<T>) -> Self {
        self.bracket = bracket;
        self
    }

    pub fn name(&self) -> String {
        format!("{:?}", self.family)
    }

    /// `true` when φ is a pure power, in which case Λ is constant.
    pub fn power_exponent(&self) -> Option<T> {
        match &self.family {
            PhiFamily::Power { p } => Some(*p),
            PhiFamily::TruncatedPower { p, .. } if *p == T::lit(2.0) => Some(*p),
            _ => None,
        }
    }

    pub fn phi(&self, s: T) -> T {
        let two = T::lit(2.0);
        match &self.family {
            PhiFamily::Power { p } => s.powf(*p - two),
            PhiFamily::ExpSquare => (s * s).exp(),
            PhiFamily::TruncatedPower { p, k } => {
                let e = *p - two;
                if e == T::zero() {
                    T::one()
                } else {
                    trunc_rho(s, *k).powf(e)
                }
            }
            PhiFamily::Custom(c) => (c.value)(s),
        }
    }

    pub fn dphi(&self, s: T) -> T {
        let two = T::lit(2.0);
        match &self.family {
            PhiFamily::Power { p } => {
                let e = *p - two;
                if e == T::zero() {
                    T::zero()
                } else {
                    e * s.powf(e - T::one())
                }
            }
            PhiFamily::ExpSquare => two * s * (s * s).exp(),
            PhiFamily::TruncatedPower { p, k } => {
                let e = *p - two;
                if e == T::zero() || s >= *k {
                    T::zero()
                } else if s <= *k - T::one() {
                    e * s.powf(e - T::one())
                } else {
                    e * trunc_rho(s, *k).powf(e - T::one()) * (*k - s)
                }
            }
            PhiFamily::Custom(c) => match &c.derivative {
                Some(d) => d(s),
                None => fd4(&*c.value, s),
            },
        }
    }

    /// `s φ'(s) / φ(s)`.
    pub fn log_derivative(&self, s: T) -> T {
        let two = T::lit(2.0);
        match &self.family {
            PhiFamily::Power { p } => *p - two,
            PhiFamily::ExpSquare => two * s * s,
            PhiFamily::TruncatedPower { p, k } => {
                let e = *p - two;
                if e == T::zero() || s >= *k {
                    T::zero()
                } else if s <= *k - T::one() {
                    e
                } else {
                    e * s * (*k - s) / trunc_rho(s, *k)
                }
            }
            PhiFamily::Custom(c) => match &c.log_derivative {
                Some(g) => g(s),
                None => s * self.dphi(s) / self.phi(s),
            },
        }
    }

    pub fn s_phi(&self, s: T) -> T {
        match &self.family {
            PhiFamily::Power { p } => s.powf(*p - T::one()),
            _ => s * self.phi(s),
        }
    }

    /// `(s φ(s))' = φ(s)(1 + s φ'/φ)`.
    pub fn d_s_phi(&self, s: T) -> T {
        self.phi(s) * (T::one() + self.log_derivative(s))
    }

    /// `s √φ(s)`, evaluated without forming φ where that would overflow.
    pub fn s_sqrt_phi(&self, s: T) -> T {
        let two = T::lit(2.0);
        match &self.family {
            PhiFamily::Power { p } => s.powf(*p / two),
            PhiFamily::ExpSquare => s * (s * s / two).exp(),
            _ => s * self.phi(s).sqrt(),
        }
    }

    /// The `s` solving `s φ(s) = t`.
    pub fn inverse_s_phi(&self, t: T) -> Result<T> {
        match &self.family {
            PhiFamily::Power { p } if t > T::zero() && t.is_finite() => Ok(t.powf((*p - T::one()).recip())),
            _ => invert_increasing(|s| self.s_phi(s), t, &self.bracket),
        }
    }

    /// `ψ(t) = s/t` where `s φ(s) = t`.
    pub fn psi(&self, t: T) -> Result<T> {
        Ok(self.inverse_s_phi(t)? / t)
    }

    /// The `s` solving `s √φ(s) = t`.
    pub fn inverse_s_sqrt_phi(&self, t: T) -> Result<T> {
        match &self.family {
            PhiFamily::Power { p } if t > T::zero() && t.is_finite() => Ok(t.powf(T::lit(2.0) / *p)),
            _ => invert_increasing(|s| self.s_sqrt_phi(s), t, &self.bracket),
        }
    }

    /// Λ at the point `t = s √φ(s)`, i.e. `-sφ'/(sφ' + 2φ)`.
    pub fn lambda_at_s(&self, s: T) -> T {
        let g = self.log_derivative(s);
        -g / (g + T::lit(2.0))
    }
}

pub(crate) fn trunc_rho<T: Real>(s: T, k: T) -> T {
    let km1 = k - T::one();
    if s <= km1 {
        s
    } else if s >= k {
        k - T::lit(0.5)
    } else {
        let d = s - km1;
        s - d * d / T::lit(2.0)
    }
}

/// Fourth-order central difference with `h = max(1e-6, 1e-6 s)`, clamped to
/// `s/4` so every stencil point stays in `(0, inf)`.
fn fd4<T: Real>(f: &(dyn Fn(T) -> T + Send + Sync), s: T) -> T {
    let eps = T::lit(1e-6);
    let h = eps.max(eps * s).min(s / T::lit(4.0));
    let two = T::lit(2.0);
    (f(s - two * h) - T::lit(8.0) * f(s - h) + T::lit(8.0) * f(s + h) - f(s + two * h)) / (T::lit(12.0) * h)
}

/// The ψ side of the pair: `ψ(t) = s/t` with `s φ(s) = t`, as a custom spec.
/// Its exponent is `-r/(r+1)` and `Λ̃ = -Λ` holds at matching points.
pub fn dual_phi<T: Real>(spec: &PhiSpec<T>) -> PhiSpec<T> {
    let base = Arc::new(spec.clone());
    let b1 = base.clone();
    let value: Eval<T> = Arc::new(move |t: T| match b1.inverse_s_phi(t) {
        Ok(s) => s / t,
        Err(_) => T::nan(),
    });
    let b2 = base.clone();
    let derivative: Eval<T> = Arc::new(move |t: T| match b2.inverse_s_phi(t) {
        Ok(s) => {
            let ds = T::one() / b2.d_s_phi(s);
            (t * ds - s) / (t * t)
        }
        Err(_) => T::nan(),
    });
    let b3 = base.clone();
    let logd: Eval<T> = Arc::new(move |t: T| match b3.inverse_s_phi(t) {
        Ok(s) => {
            let g = b3.log_derivative(s);
            -g / (T::one() + g)
        }
        Err(_) => T::nan(),
    });
    let m = spec.meta;
    let r1 = m.r + T::one();
    let a = m.r / r1;
    let ca = (m.c1 / r1).powf(a);
    let cb = (m.c2 / r1).powf(a);
    let meta = PhiMeta {
        r: -m.r / r1,
        s0: spec.s_phi(m.s0),
        s1: spec.s_phi(m.s1),
        c1: ca.min(cb) / m.c2,
        c2: ca.max(cb) / m.c1,
    };
    let name = format!("dual of {}", spec.name());
    PhiSpec {
        family: PhiFamily::Custom(CustomPhi::new(name, value, Some(derivative)).with_log_derivative(logd)),
        meta,
        bracket: image_bracket(spec),
    }
}

/// The range of `s φ(s)` over the bracket of `spec`, kept finite and positive.
fn image_bracket<T: Real>(spec: &PhiSpec<T>) -> Bracket<T> {
    let b = spec.bracket;
    let lo = spec.s_phi(b.lo);
    let hi = spec.s_phi(b.hi);
    Bracket {
        lo: if lo > T::zero() { lo } else { T::min_positive_value() },
        hi: if hi.is_finite() { hi } else { T::max_value() / T::lit(16.0) },
        rtol: b.rtol,
    }
}

/// Log-spaced validation nodes.
#[derive(Debug, Clone, Copy)]
pub struct ValidationGrid<T> {
    pub lo: T,
    pub hi: T,
    pub nodes: usize,
}

impl<T: Real> ValidationGrid<T> {
    /// `[s0/10, 10 s1]` with 1000 nodes.
    pub fn for_spec(spec: &PhiSpec<T>) -> Self {
        let ten = T::lit(10.0);
        ValidationGrid { lo: spec.meta.s0 / ten, hi: spec.meta.s1 * ten, nodes: 1000 }
    }

    pub fn points(&self) -> Vec<T> {
        log_space(self.lo, self.hi, self.nodes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckStatus {
    Pass,
    Fail,
    NotRequired,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck<T> {
    pub id: &'static str,
    pub status: CheckStatus,
    /// Smallest margin over the nodes; negative means violated.
    pub worst_margin: T,
    pub worst_node: T,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport<T> {
    pub family: String,
    pub meta: PhiMeta<T>,
    pub nodes: usize,
    pub checks: Vec<ConditionCheck<T>>,
}

impl<T: Real> ValidationReport<T> {
    pub fn check(&self, id: &str) -> Option<&ConditionCheck<T>> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// Conditions (i)–(v) all pass.
    pub fn basic_conditions_hold(&self) -> bool {
        self.checks.iter().filter(|c| c.id != "vi").all(|c| c.status == CheckStatus::Pass)
    }

    pub fn vi_status(&self) -> CheckStatus {
        self.check("vi").map(|c| c.status).unwrap_or(CheckStatus::Fail)
    }

    pub fn all_required_hold(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }
}

fn worst<T: Real>(vals: impl Iterator<Item = (T, T)>) -> (T, T) {
    let mut best = (T::infinity(), T::nan());
    for (s, m) in vals {
        if m < best.0 || m.is_nan() {
            best = (m, s);
            if m.is_nan() {
                break;
            }
        }
    }
    best
}

/// Certifies conditions (i)–(vi) on the grid.
pub fn validate_phi<T: Real>(spec: &PhiSpec<T>, grid: &ValidationGrid<T>) -> Result<ValidationReport<T>> {
    let ten = T::lit(10.0);
    let tiny = T::lit(1e-9);
    if grid.nodes < 1000 || grid.lo > spec.meta.s0 / ten * (T::one() + tiny) || grid.hi < spec.meta.s1 * ten * (T::one() - tiny)
    {
        return Err(Error::InvalidParameter(
            "validation grid must cover [s0/10, 10 s1] with at least 1000 nodes".into(),
        ));
    }
    let nodes = grid.points();
    let mut checks = Vec::with_capacity(6);
    let pass = |ok: bool| if ok { CheckStatus::Pass } else { CheckStatus::Fail };

    // (i) positivity and C¹ consistency of the derivative with a difference quotient.
    for &s in &nodes {
        let v = spec.phi(s);
        if !(v > T::zero()) {
            return Err(Error::NonPositivePhi { s: s.as_f64(), value: v.as_f64() });
        }
    }
    let (m, at) = worst(nodes.iter().map(|&s| {
        let fd = fd4(&|x: T| spec.phi(x), s);
        let d = spec.dphi(s);
        let scale = d.abs() + spec.phi(s) / s;
        (s, T::lit(1e-4) - (fd - d).abs() / scale)
    }));
    checks.push(ConditionCheck {
        id: "i",
        status: pass(m >= T::zero()),
        worst_margin: m,
        worst_node: at,
        note: "phi > 0 and phi' matches a 4th-order difference quotient to 1e-4 (relative)".into(),
    });

    // (ii) (s phi)' > 0.
    for &s in &nodes {
        let d = spec.d_s_phi(s);
        if !(d > T::zero()) {
            return Err(Error::NotIncreasing { s: s.as_f64(), value: d.as_f64() });
        }
    }
    let (m, at) = worst(nodes.iter().map(|&s| (s, T::one() + spec.log_derivative(s))));
    checks.push(ConditionCheck {
        id: "ii",
        status: pass(m > T::zero()),
        worst_margin: m,
        worst_node: at,
        note: "margin is 1 + s phi'/phi".into(),
    });

    // (iii) s phi(s) spans (0, inf): at least one decade of decrease / growth
    // between s = 1 and the inversion bracket ends.
    let mid = spec.s_phi(T::one());
    let lo_ratio = (mid / spec.s_phi(spec.bracket.lo)).log10();
    let hi_v = spec.s_phi(spec.bracket.hi);
    let hi_ratio = if hi_v.is_infinite() { T::infinity() } else { (hi_v / mid).log10() };
    let m = lo_ratio.min(hi_ratio) - T::one();
    checks.push(ConditionCheck {
        id: "iii",
        status: pass(m >= T::zero()),
        worst_margin: m,
        worst_node: if lo_ratio <= hi_ratio { spec.bracket.lo } else { spec.bracket.hi },
        note: "decades of change of s phi(s) at the bracket ends, minus one".into(),
    });

    // (iv) c1 s^r <= (s phi)' <= c2 s^r below s0.
    let meta = spec.meta;
    let (mut m, mut at) = worst(nodes.iter().filter(|&&s| s < meta.s0).map(|&s| {
        let q = spec.d_s_phi(s) / s.powf(meta.r);
        (s, ((q - meta.c1) / meta.c1).min((meta.c2 - q) / meta.c2))
    }));
    let mut note = String::from("relative slack in c1 s^r <= (s phi)' <= c2 s^r on (0, s0)");
    if meta.r == T::zero() {
        // phi(0+) finite and s phi'(s) -> 0, sampled at the grid end only.
        let s_end = spec.bracket.lo.max(meta.s0 * T::lit(1e-8));
        let v = spec.phi(s_end);
        let sd = (s_end * spec.dphi(s_end)).abs();
        let m0 = T::lit(1e-6) - sd / v.max(T::one());
        if !v.is_finite() || m0 < m {
            m = if v.is_finite() { m0 } else { -T::infinity() };
            at = s_end;
        }
        note.push_str("; r = 0 endpoint: phi(0+) finite and s phi' -> 0 checked at the smallest node only");
    }
    checks.push(ConditionCheck {
        id: "iv",
        status: pass(m >= -T::lit(1e-9)),
        worst_margin: m,
        worst_node: at,
        note,
    });

    // (v) constant sign of phi' above s1.
    let mut pos = T::zero();
    let mut neg = T::zero();
    let (mut pos_at, mut neg_at) = (meta.s1, meta.s1);
    for &s in nodes.iter().filter(|&&s| s >= meta.s1) {
        let d = spec.dphi(s) * s / spec.phi(s);
        if d > pos {
            pos = d;
            pos_at = s;
        }
        if -d > neg {
            neg = -d;
            neg_at = s;
        }
    }
    let m = -pos.min(neg);
    checks.push(ConditionCheck {
        id: "v",
        status: pass(m >= T::zero()),
        worst_margin: m,
        worst_node: if pos < neg { pos_at } else { neg_at },
        note: "smaller of the positive and negative parts of s phi'/phi on [s1, 10 s1]".into(),
    });

    // (vi) |s phi'/phi| nondecreasing.
    let g: Vec<T> = nodes.iter().map(|&s| spec.log_derivative(s).abs()).collect();
    let (m, at) = worst(g.windows(2).zip(&nodes[1..]).map(|(w, &s)| {
        let tol = T::lit(1e-9) * w[0].max(T::one());
        (s, w[1] - w[0] + tol)
    }));
    let truncated = matches!(spec.family, PhiFamily::TruncatedPower { .. });
    let (status, note) = if truncated {
        (
            CheckStatus::NotRequired,
            format!(
                "truncated family: |s phi'/phi| is nonincreasing (literal check {}); Lambda^2 stays bounded by its value at 0",
                if m >= T::zero() { "passes" } else { "fails" }
            ),
        )
    } else {
        (pass(m >= T::zero()), "largest drop of |s phi'/phi| between consecutive nodes".to_string())
    };
    checks.push(ConditionCheck { id: "vi", status, worst_margin: m, worst_node: at, note });

    Ok(ValidationReport { family: spec.name(), meta, nodes: grid.nodes, checks })
}

impl<T: Real> PhiSpec<T> {
    /// [`validate_phi`] on the default grid.
    pub fn validate(&self) -> Result<ValidationReport<T>> {
        validate_phi(self, &ValidationGrid::for_spec(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_four_passes_everything() {
        let spec = PhiSpec::power(4.0).unwrap();
        assert_eq!(spec.meta.r, 2.0);
        let rep = spec.validate().unwrap();
        assert!(rep.all_required_hold(), "{rep:?}");
        assert_eq!(rep.vi_status(), CheckStatus::Pass);
    }

    #[test]
    fn exp_square_passes_i_to_vi() {
        let rep = PhiSpec::<f64>::exp_square().validate().unwrap();
        assert!(rep.all_required_hold(), "{rep:#?}");
        assert_eq!(rep.vi_status(), CheckStatus::Pass);
    }

    #[test]
    fn truncated_flags_vi_specially() {
        let rep = PhiSpec::truncated_power(4.0, 3.0).unwrap().validate().unwrap();
        assert!(rep.basic_conditions_hold(), "{rep:#?}");
        let vi = rep.check("vi").unwrap();
        assert_eq!(vi.status, CheckStatus::NotRequired);
        assert!(vi.worst_margin < 0.0);
    }

    #[test]
    fn truncated_values() {
        let spec = PhiSpec::<f64>::truncated_power(4.0, 2.0).unwrap();
        assert!((spec.phi(0.5) - 0.25).abs() < 1e-15);
        assert!((spec.phi(2.0) - 2.25).abs() < 1e-15);
        assert!((spec.phi(3.0) - 2.25).abs() < 1e-15);
        let flat = PhiSpec::truncated_power(2.0, 5.0).unwrap();
        for s in [0.1, 4.5, 7.0] {
            assert_eq!(flat.phi(s), 1.0);
        }
        // C¹ junctions
        assert_eq!(trunc_rho(1.0, 2.0), 1.0);
        let h = 1e-7;
        let left = (spec.phi(2.0) - spec.phi(2.0 - h)) / h;
        assert!(left.abs() < 1e-5);
        assert!(matches!(PhiSpec::truncated_power(4.0, 1.0), Err(Error::BadTruncation { .. })));
    }

    #[test]
    fn truncated_log_derivative_decreases_from_p_minus_2_to_zero() {
        let spec = PhiSpec::truncated_power(5.0, 3.0).unwrap();
        let g: Vec<f64> = log_space(1e-3, 10.0, 400).into_iter().map(|s| spec.log_derivative(s)).collect();
        assert_eq!(g[0], 3.0);
        assert_eq!(*g.last().unwrap(), 0.0);
        assert!(g.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn inverse_s_phi_examples() {
        let p3 = PhiSpec::power(3.0).unwrap();
        assert!((p3.inverse_s_phi(8.0).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        let p2 = PhiSpec::<f64>::power(2.0).unwrap();
        assert!((p2.inverse_s_phi(5.0).unwrap() - 5.0).abs() < 1e-14);
        let e = PhiSpec::<f64>::exp_square();
        let s = e.inverse_s_phi(1e-9).unwrap();
        assert!((s * e.phi(s) / 1e-9 - 1.0).abs() < 1e-12);
        assert!(s < 1e-8);
    }

    #[test]
    fn custom_without_derivative_uses_differences() {
        let v: Eval<f64> = Arc::new(|s: f64| s * s);
        let spec = PhiSpec::custom(
            CustomPhi::new("square", v, None),
            PhiMeta { r: 2.0, s0: 1.0, s1: 2.0, c1: 3.0, c2: 3.0 },
        )
        .unwrap();
        assert!((spec.dphi(1.5) - 3.0).abs() < 1e-9);
        // near zero the stencil must stay inside the domain
        assert!((spec.dphi(1e-9) - 2e-9).abs() < 1e-15);
        assert!(spec.validate().unwrap().all_required_hold());
    }

    #[test]
    fn non_positive_phi_is_rejected() {
        let v: Eval<f64> = Arc::new(|s: f64| s - 1.0);
        let spec = PhiSpec::custom(
            CustomPhi::new("bad", v, None),
            PhiMeta { r: 0.0, s0: 1.0, s1: 2.0, c1: 1.0, c2: 1.0 },
        )
        .unwrap();
        assert!(matches!(spec.validate(), Err(Error::NonPositivePhi { .. })));
    }

    #[test]
    fn dual_of_power_is_conjugate_power() {
        let p = 3.0f64;
        let q = p / (p - 1.0);
        let d = dual_phi(&PhiSpec::power(p).unwrap());
        for t in log_space(1e-3, 1e3, 20) {
            assert!((d.phi(t) / t.powf(q - 2.0) - 1.0).abs() < 1e-12);
            assert!((d.dphi(t) / ((q - 2.0) * t.powf(q - 3.0)) - 1.0).abs() < 1e-10);
        }
        assert!((d.meta.r - (-(p - 2.0) / (p - 1.0))).abs() < 1e-15);
        let r0 = dual_phi(&PhiSpec::<f64>::exp_square());
        assert_eq!(r0.meta.r, 0.0);
    }

    #[test]
    fn dual_metadata_bounds_hold() {
        for spec in [PhiSpec::power(3.0).unwrap(), PhiSpec::power(1.5).unwrap(), PhiSpec::exp_square()] {
            let d = dual_phi(&spec);
            let rep = d.validate().unwrap();
            assert_eq!(rep.check("iv").unwrap().status, CheckStatus::Pass, "{rep:#?}");
        }
    }
}
