//! Scalar hyperbolic-geometry kernel on the unit disk.
//!
//! Everything here works on single complex numbers: the Poincaré distance
//! `ω(z, w) = atanh |(z − w) / (1 − w̄ z)|`, a numerically careful `atanh`
//! restricted to `[0, 1)`, and the convexity inequality
//! `atanh(r · tanh x) ≤ r · x` that drives the nested-domain contraction
//! estimate.

use crate::error::{Error, Result};
use crate::holomaps::HoloMap;

pub use num_complex::Complex64 as Complex;

/// Inputs at or beyond `1 - ATANH_GUARD` are rejected by [`atanh_stable`].
pub const ATANH_GUARD: f64 = 1e-15;

fn check_finite(what: &'static str, z: Complex) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(what, z, "non-finite coordinate"))
    }
}

/// `atanh` on `[0, 1)`, evaluated as `½ (ln1p(x) − ln1p(−x))`.
///
/// Negative arguments and arguments within [`ATANH_GUARD`] of 1 are
/// rejected instead of extended by oddness or saturated to `+∞`.
pub fn atanh_stable(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain("x", x, "atanh argument must lie in [0, 1)"));
    }
    if x >= 1.0 - ATANH_GUARD {
        return Err(Error::domain(
            "x",
            x,
            "atanh argument too close to the boundary 1",
        ));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(0.5 * (x.ln_1p() - (-x).ln_1p()))
}

/// Rejects points on or outside the unit circle.
pub(crate) fn check_in_disk(what: &'static str, z: Complex) -> Result<()> {
    check_finite(what, z)?;
    if z.norm() < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(what, z, "point not in the open unit disk"))
    }
}

/// `1 − |z|²` computed as `(1 − |z|)(1 + |z|)`.
#[inline]
fn one_minus_sq(z: Complex) -> f64 {
    let m = z.norm();
    (1.0 - m) * (1.0 + m)
}

/// Poincaré distance `ω(z, w)` on the unit disk.
///
/// Identical arguments short-circuit to exactly `0`. For pseudo-hyperbolic
/// quotients `q ≤ ½` the value is `atanh_stable(q)`; beyond that the
/// identity `1 − q² = (1 − |z|²)(1 − |w|²) / |1 − w̄z|²` is used so that
/// pairs close to the boundary keep full relative accuracy. Both branches
/// are symmetric in `(z, w)` bit for bit.
pub fn poincare_distance(z: Complex, w: Complex) -> Result<f64> {
    check_in_disk("z", z)?;
    check_in_disk("w", w)?;
    Ok(poincare_unchecked(z, w))
}

pub(crate) fn poincare_unchecked(z: Complex, w: Complex) -> f64 {
    if z == w {
        return 0.0;
    }
    let num = (z - w).norm();
    let den = (Complex::new(1.0, 0.0) - w.conj() * z).norm();
    let q = num / den;
    if q <= 0.5 {
        return 0.5 * (q.ln_1p() - (-q).ln_1p());
    }
    // 1 - q^2, evaluated without cancellation
    let gap = one_minus_sq(z) * one_minus_sq(w) / (den * den);
    (1.0 + q).ln() - 0.5 * gap.ln()
}

/// Disk automorphism `z ↦ (z − a) / (1 − ā z)` sending `a` to `0`.
pub fn mobius_centering(a: Complex) -> Result<HoloMap> {
    HoloMap::mobius(a)
}

/// Direct evaluation of `(z − a) / (1 − ā z)`.
#[inline]
pub fn mobius_apply(a: Complex, z: Complex) -> Complex {
    (z - a) / (Complex::new(1.0, 0.0) - a.conj() * z)
}

/// Inverse of [`mobius_apply`]: `z ↦ (z + a) / (1 + ā z)`.
#[inline]
pub fn mobius_inverse_apply(a: Complex, z: Complex) -> Complex {
    (z + a) / (Complex::new(1.0, 0.0) + a.conj() * z)
}

/// `r·x − atanh(r·tanh x)`, which is nonnegative for `r ∈ [0, 1)` and
/// `x ≥ 0`.
pub fn convexity_margin(r: f64, x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::domain("r", r, "must lie in [0, 1)"));
    }
    if x.is_nan() || x < 0.0 || x.is_infinite() {
        return Err(Error::domain("x", x, "must be finite and >= 0"));
    }
    if r == 0.0 || x == 0.0 {
        return Ok(0.0);
    }
    Ok(r * x - atanh_stable(r * x.tanh())?)
}

fn check_open_unit_interval(x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("x", x, "must lie in (0, 1)"))
    }
}

/// First derivative of `atanh`: `1 / (1 − x²)`.
pub fn atanh_derivative(x: f64) -> Result<f64> {
    check_open_unit_interval(x)?;
    Ok(1.0 / ((1.0 - x) * (1.0 + x)))
}

/// Second derivative of `atanh`: `2x / (1 − x²)²`. Strictly positive on
/// `(0, 1)`, hence `atanh` is convex there.
pub fn atanh_second_derivative_check(x: f64) -> Result<f64> {
    check_open_unit_interval(x)?;
    let d = (1.0 - x) * (1.0 + x);
    Ok(2.0 * x / (d * d))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    // Reference values below come from 50-digit mpmath evaluations.
    const ATANH_HALF: f64 = 0.549_306_144_334_054_845_697_622_618_461;
    const LN3: f64 = 1.098_612_288_668_109_691_395_245_236_922;

    #[test]
    fn atanh_values() {
        assert_eq!(atanh_stable(0.0).unwrap(), 0.0);
        assert!((atanh_stable(0.5).unwrap() - ATANH_HALF).abs() < 2e-16);
        // double-angle: tanh(2a) = 2 tanh a / (1 + tanh^2 a)
        let r = 0.5_f64;
        let lhs = atanh_stable(2.0 * r / (1.0 + r * r)).unwrap();
        assert!((lhs - LN3).abs() < 4e-16);
        assert!((lhs - 2.0 * atanh_stable(r).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn atanh_rejects_out_of_range() {
        assert!(atanh_stable(-1e-300).is_err());
        assert!(atanh_stable(1.0).is_err());
        assert!(atanh_stable(1.0 - 1e-16).is_err());
        assert!(atanh_stable(f64::NAN).is_err());
        assert!(atanh_stable(1.0 - 1e-14).is_ok());
        match atanh_stable(1.5) {
            Err(Error::Domain { value, .. }) => assert_eq!(value, "1.5"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn poincare_examples() {
        assert_eq!(poincare_distance(c(0.0, 0.0), c(0.0, 0.0)).unwrap(), 0.0);
        let d = poincare_distance(c(0.0, 0.0), c(0.5, 0.0)).unwrap();
        assert!((d - ATANH_HALF).abs() < 2e-16);
        let d = poincare_distance(c(0.3, 0.0), c(0.6, 0.0)).unwrap();
        assert!((d - 0.383_627_576_356_833_593_943).abs() < 1e-15);
    }

    #[test]
    fn poincare_near_boundary_branch() {
        // antipodal pair: ω(-t, t) = 2 atanh t
        let t = 0.999_999;
        let d = poincare_distance(c(-t, 0.0), c(t, 0.0)).unwrap();
        // 2 atanh(0.999999) from mpmath
        assert!((d - 14.508_657_238_495_338_734).abs() < 1e-12);
    }

    #[test]
    fn poincare_rejects_boundary() {
        assert!(poincare_distance(c(1.0, 0.0), c(0.0, 0.0)).is_err());
        assert!(poincare_distance(c(0.0, 0.0), c(0.6, 0.8)).is_err());
        assert!(poincare_distance(c(f64::NAN, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn mobius_examples() {
        let id = mobius_centering(c(0.0, 0.0)).unwrap();
        let z = c(0.3, -0.2);
        assert_eq!(id.eval1(z).unwrap(), z);

        let m = mobius_centering(c(0.5, 0.0)).unwrap();
        assert_eq!(m.eval1(c(0.5, 0.0)).unwrap(), c(0.0, 0.0));
        let image = m.eval1(c(0.0, 0.0)).unwrap();
        assert_eq!(image, c(-0.5, 0.0));
        let a = poincare_distance(c(0.0, 0.0), c(0.5, 0.0)).unwrap();
        let b = poincare_distance(image, c(0.0, 0.0)).unwrap();
        assert!((a - b).abs() < 1e-15);

        assert!(mobius_centering(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn mobius_inverse_roundtrip() {
        let a = c(0.3, 0.4);
        let z = c(-0.1, 0.7);
        let back = mobius_inverse_apply(a, mobius_apply(a, z));
        assert!((back - z).norm() < 1e-15);
    }

    #[test]
    fn convexity_margin_examples() {
        assert_eq!(convexity_margin(0.0, 5.0).unwrap(), 0.0);
        assert_eq!(convexity_margin(0.7, 0.0).unwrap(), 0.0);
        let m = convexity_margin(0.5, 1.0).unwrap();
        assert!((m - 0.099_008_418_572_993_124_369).abs() < 1e-15);
        assert!(convexity_margin(1.0, 1.0).is_err());
        assert!(convexity_margin(-0.1, 1.0).is_err());
        assert!(convexity_margin(0.5, -1.0).is_err());
    }

    #[test]
    fn derivative_examples() {
        let v = atanh_second_derivative_check(0.5).unwrap();
        assert!((v - 16.0 / 9.0).abs() < 1e-15);
        assert!(atanh_second_derivative_check(1e-12).unwrap() < 1e-11);
        assert!(atanh_second_derivative_check(0.0).is_err());
        assert!(atanh_second_derivative_check(1.0).is_err());
        assert_eq!(atanh_derivative(0.5).unwrap(), 1.0 / 0.75);
    }
}
