//! Bracketed inversion of increasing maps and one-dimensional minimisation.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Search range and tolerance for [`invert_increasing`].
#[derive(Debug, Clone, Copy)]
pub struct Bracket<T> {
    pub lo: T,
    pub hi: T,
    pub rtol: T,
}

impl<T: Real> Default for Bracket<T> {
    fn default() -> Self {
        Bracket {
            lo: T::lit(1e-12),
            hi: T::lit(1e12),
            rtol: T::epsilon() * T::lit(4.0),
        }
    }
}

/// Solves `g(s) = target` for a strictly increasing `g` on `(0, inf)`.
///
/// The bracket grows by decades from `s = 1` and stays inside `[lo, hi]`;
/// bisection then runs in `log s`.
pub fn invert_increasing<T: Real, G: Fn(T) -> T>(g: G, target: T, br: &Bracket<T>) -> Result<T> {
    let fail = || Error::BracketFailure { target: target.as_f64() };
    if !(target > T::zero()) || !target.is_finite() {
        return Err(fail());
    }
    let ten = T::lit(10.0);
    let (mut lo, mut hi);
    let one = T::one().max(br.lo).min(br.hi);
    let g1 = g(one);
    if g1 == target {
        return Ok(one);
    }
    if g1 < target {
        hi = one;
        loop {
            if hi >= br.hi {
                return Err(fail());
            }
            lo = hi;
            hi = (hi * ten).min(br.hi);
            let v = g(hi);
            if v >= target {
                break;
            }
        }
    } else {
        lo = one;
        loop {
            if lo <= br.lo {
                return Err(fail());
            }
            hi = lo;
            lo = (lo / ten).max(br.lo);
            let v = g(lo);
            if v <= target {
                break;
            }
        }
    }
    for _ in 0..400 {
        if hi - lo <= br.rtol * hi {
            break;
        }
        let mid = (lo * hi).sqrt();
        let mid = if mid > lo && mid < hi { mid } else { lo + (hi - lo) / T::lit(2.0) };
        if mid <= lo || mid >= hi {
            break;
        }
        let v = g(mid);
        if v == target {
            return Ok(mid);
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Secant step inside the final bracket.
    let (glo, ghi) = (g(lo), g(hi));
    if ghi > glo && glo.is_finite() && ghi.is_finite() {
        let s = lo + (target - glo) * (hi - lo) / (ghi - glo);
        if s >= lo && s <= hi {
            return Ok(s);
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}

/// Golden-section minimisation of a unimodal `f` on `[a, b]`.
/// Returns `(x_min, f(x_min))`.
pub fn golden_section<T: Real, F: FnMut(T) -> T>(mut f: F, mut a: T, mut b: T, xtol: T) -> (T, T) {
    let invphi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..500 {
        if (b - a).abs() <= xtol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Plain bisection for a sign change of `f` on `[a, b]`.
pub fn bisect_sign<T: Real, F: FnMut(T) -> T>(mut f: F, mut a: T, mut b: T, xtol: T) -> Option<T> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == T::zero() {
        return Some(a);
    }
    if fb == T::zero() {
        return Some(b);
    }
    if (fa > T::zero()) == (fb > T::zero()) {
        return None;
    }
    for _ in 0..300 {
        if (b - a).abs() <= xtol {
            break;
        }
        let m = (a + b) / T::lit(2.0);
        let fm = f(m);
        if fm == T::zero() {
            return Some(m);
        }
        if (fm > T::zero()) == (fa > T::zero()) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some((a + b) / T::lit(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverts_cube() {
        let s = invert_increasing(|s: f64| s * s * s, 27.0, &Bracket::default()).unwrap();
        assert!((s - 3.0).abs() < 1e-13);
        let s = invert_increasing(|s: f64| s * s * s, 1e-24, &Bracket::default()).unwrap();
        assert!((s / 1e-8 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_is_bracket_failure() {
        let r = invert_increasing(|s: f64| s, 1e20, &Bracket::default());
        assert!(matches!(r, Err(Error::BracketFailure { .. })));
        let r = invert_increasing(|s: f64| s, -1.0, &Bracket::default());
        assert!(r.is_err());
    }

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, fx) = golden_section(|x: f64| (x - 0.3) * (x - 0.3) + 1.0, -2.0, 5.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bisect_finds_root() {
        let r = bisect_sign(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect_sign(|x: f64| x * x + 1.0, 0.0, 2.0, 1e-14).is_none());
    }
}
