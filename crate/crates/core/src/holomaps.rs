//! Holomorphic maps as a closed expression tree.
//!
//! Every node kind is holomorphic, so any [`HoloMap`] built from them is
//! holomorphic by construction. There is no escape hatch for arbitrary
//! closures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domains::{CPoint, Domain, SampleStream};
use crate::error::{Error, Result};
use crate::metric::{check_in_disk, mobius_apply, poincare_unchecked, Complex};

/// Highest polynomial degree accepted by [`HoloMap::polynomial`].
pub const MAX_POLY_DEGREE: usize = 16;

/// Structural representation of a holomorphic map `ℂⁿ ⊃ X → ℂᵐ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum HoloMap {
    Identity {
        dim: usize,
    },
    /// `z ↦ (z − a) / (1 − ā z)` on one coordinate, `|a| < 1`.
    Mobius {
        a: Complex,
    },
    /// Coordinatewise polynomials: output `j` is `Σₖ coeffs[j][k] · zⱼᵏ`.
    Polynomial {
        coeffs: Vec<Vec<Complex>>,
    },
    /// `p ↦ linear · p + offset`; `linear` is row-major, one row per output.
    Affine {
        linear: Vec<Vec<Complex>>,
        offset: Vec<Complex>,
    },
    /// One 1-dimensional map per coordinate.
    DiagonalProduct {
        factors: Vec<HoloMap>,
    },
    /// `outer ∘ inner`.
    Compose {
        outer: Box<HoloMap>,
        inner: Box<HoloMap>,
    },
    /// `p ↦ c · p` with real `c > 0`.
    ScalarScale {
        c: f64,
        dim: usize,
    },
}

fn finite(z: Complex) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

impl HoloMap {
    pub fn identity(dim: usize) -> Result<Self> {
        let m = HoloMap::Identity { dim };
        m.validate()?;
        Ok(m)
    }

    pub fn mobius(a: Complex) -> Result<Self> {
        let m = HoloMap::Mobius { a };
        m.validate()?;
        Ok(m)
    }

    pub fn polynomial(coeffs: Vec<Vec<Complex>>) -> Result<Self> {
        let m = HoloMap::Polynomial { coeffs };
        m.validate()?;
        Ok(m)
    }

    /// One-variable polynomial `Σ coeffs[k] zᵏ`.
    pub fn polynomial1(coeffs: Vec<Complex>) -> Result<Self> {
        Self::polynomial(vec![coeffs])
    }

    pub fn affine(linear: Vec<Vec<Complex>>, offset: Vec<Complex>) -> Result<Self> {
        let m = HoloMap::Affine { linear, offset };
        m.validate()?;
        Ok(m)
    }

    pub fn diagonal(factors: Vec<HoloMap>) -> Result<Self> {
        let m = HoloMap::DiagonalProduct { factors };
        m.validate()?;
        Ok(m)
    }

    pub fn compose(outer: HoloMap, inner: HoloMap) -> Result<Self> {
        let m = HoloMap::Compose {
            outer: Box::new(outer),
            inner: Box::new(inner),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn scale(c: f64, dim: usize) -> Result<Self> {
        let m = HoloMap::ScalarScale { c, dim };
        m.validate()?;
        Ok(m)
    }

    /// Constant map `z ↦ value` in one variable.
    pub fn constant1(value: Complex) -> Result<Self> {
        Self::polynomial1(vec![value])
    }

    /// Checks every structural invariant of the tree.
    pub fn validate(&self) -> Result<()> {
        match self {
            HoloMap::Identity { dim } | HoloMap::ScalarScale { dim, .. } if *dim == 0 => {
                Err(Error::Structural(format!("{}: dimension must be >= 1", self.name())))
            }
            HoloMap::Identity { .. } => Ok(()),
            HoloMap::ScalarScale { c, .. } => {
                if c.is_finite() && *c > 0.0 {
                    Ok(())
                } else {
                    Err(Error::domain("scalar_scale.c", c, "must be finite and > 0"))
                }
            }
            HoloMap::Mobius { a } => check_in_disk("mobius.a", *a),
            HoloMap::Polynomial { coeffs } => {
                if coeffs.is_empty() {
                    return Err(Error::Structural("polynomial: no output coordinates".into()));
                }
                for (j, c) in coeffs.iter().enumerate() {
                    if c.is_empty() {
                        return Err(Error::Structural(format!(
                            "polynomial: coordinate {j} has no coefficients"
                        )));
                    }
                    if c.len() > MAX_POLY_DEGREE + 1 {
                        return Err(Error::Structural(format!(
                            "polynomial: coordinate {j} has degree {} > {MAX_POLY_DEGREE}",
                            c.len() - 1
                        )));
                    }
                    if !c.iter().copied().all(finite) {
                        return Err(Error::Structural(format!(
                            "polynomial: coordinate {j} has a non-finite coefficient"
                        )));
                    }
                }
                Ok(())
            }
            HoloMap::Affine { linear, offset } => {
                if linear.is_empty() || linear[0].is_empty() {
                    return Err(Error::Structural("affine: empty linear part".into()));
                }
                let cols = linear[0].len();
                if linear.iter().any(|row| row.len() != cols) {
                    return Err(Error::Structural("affine: ragged linear part".into()));
                }
                if offset.len() != linear.len() {
                    return Err(Error::Structural(format!(
                        "affine: offset has length {} but linear part has {} rows",
                        offset.len(),
                        linear.len()
                    )));
                }
                let all_finite = linear.iter().flatten().chain(offset.iter()).copied().all(finite);
                if !all_finite {
                    return Err(Error::Structural("affine: non-finite entry".into()));
                }
                Ok(())
            }
            HoloMap::DiagonalProduct { factors } => {
                if factors.is_empty() {
                    return Err(Error::Structural("diagonal_product: no factors".into()));
                }
                for (i, f) in factors.iter().enumerate() {
                    f.validate()?;
                    if f.in_dim() != 1 || f.out_dim() != 1 {
                        return Err(Error::Structural(format!(
                            "diagonal_product: factor {i} is not one-dimensional"
                        )));
                    }
                }
                Ok(())
            }
            HoloMap::Compose { outer, inner } => {
                outer.validate()?;
                inner.validate()?;
                if outer.in_dim() != inner.out_dim() {
                    return Err(Error::Structural(format!(
                        "compose: outer takes dimension {} but inner produces {}",
                        outer.in_dim(),
                        inner.out_dim()
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            HoloMap::Identity { .. } => "identity",
            HoloMap::Mobius { .. } => "mobius",
            HoloMap::Polynomial { .. } => "polynomial",
            HoloMap::Affine { .. } => "affine",
            HoloMap::DiagonalProduct { .. } => "diagonal_product",
            HoloMap::Compose { .. } => "compose",
            HoloMap::ScalarScale { .. } => "scalar_scale",
        }
    }

    pub fn in_dim(&self) -> usize {
        match self {
            HoloMap::Identity { dim } | HoloMap::ScalarScale { dim, .. } => *dim,
            HoloMap::Mobius { .. } => 1,
            HoloMap::Polynomial { coeffs } => coeffs.len(),
            HoloMap::Affine { linear, .. } => linear.first().map_or(0, Vec::len),
            HoloMap::DiagonalProduct { factors } => factors.len(),
            HoloMap::Compose { inner, .. } => inner.in_dim(),
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            HoloMap::Identity { dim } | HoloMap::ScalarScale { dim, .. } => *dim,
            HoloMap::Mobius { .. } => 1,
            HoloMap::Polynomial { coeffs } => coeffs.len(),
            HoloMap::Affine { linear, .. } => linear.len(),
            HoloMap::DiagonalProduct { factors } => factors.len(),
            HoloMap::Compose { outer, .. } => outer.out_dim(),
        }
    }

    /// Evaluates the map at `p`.
    pub fn evaluate(&self, p: &CPoint) -> Result<CPoint> {
        if p.dim() != self.in_dim() {
            return Err(Error::Structural(format!(
                "{}: expected a point of dimension {}, got {}",
                self.name(),
                self.in_dim(),
                p.dim()
            )));
        }
        if !p.is_finite() {
            return Err(Error::Numeric {
                node: self.name().into(),
                detail: "non-finite input".into(),
            });
        }
        self.eval_inner(p.coords())
    }

    fn eval_inner(&self, p: &[Complex]) -> Result<CPoint> {
        let out: Vec<Complex> = match self {
            HoloMap::Identity { .. } => p.to_vec(),
            HoloMap::Mobius { a } => vec![mobius_apply(*a, p[0])],
            HoloMap::Polynomial { coeffs } => coeffs
                .iter()
                .zip(p)
                .map(|(c, &z)| c.iter().rev().fold(Complex::new(0.0, 0.0), |acc, &ck| acc * z + ck))
                .collect(),
            HoloMap::Affine { linear, offset } => linear
                .iter()
                .zip(offset)
                .map(|(row, &o)| row.iter().zip(p).fold(Complex::new(0.0, 0.0), |acc, (&a, &z)| acc + a * z) + o)
                .collect(),
            HoloMap::DiagonalProduct { factors } => {
                let mut out = Vec::with_capacity(factors.len());
                for (f, &z) in factors.iter().zip(p) {
                    out.push(f.eval_inner(std::slice::from_ref(&z))?.coords()[0]);
                }
                out
            }
            HoloMap::Compose { outer, inner } => {
                let mid = inner.eval_inner(p)?;
                return outer.eval_inner(mid.coords());
            }
            HoloMap::ScalarScale { c, .. } => p.iter().map(|&z| z * *c).collect(),
        };
        if !out.iter().copied().all(finite) {
            return Err(Error::Numeric {
                node: self.name().into(),
                detail: "non-finite output".into(),
            });
        }
        Ok(CPoint::new(out))
    }

    /// Evaluates a one-dimensional map at a single complex number.
    pub fn eval1(&self, z: Complex) -> Result<Complex> {
        Ok(self.evaluate(&CPoint::scalar(z))?.coords()[0])
    }
}

/// `ω(z, w) − ω(f(z), f(w))` for a map of the unit disk into itself.
///
/// Holomorphic self-maps of the disk do not increase the Poincaré distance,
/// so the result is nonnegative up to rounding; automorphisms give zero.
pub fn schwarz_pick_gap(f: &HoloMap, z: Complex, w: Complex) -> Result<f64> {
    if f.in_dim() != 1 || f.out_dim() != 1 {
        return Err(Error::Structural(format!(
            "schwarz_pick_gap needs a map of one variable, got {} -> {}",
            f.in_dim(),
            f.out_dim()
        )));
    }
    check_in_disk("z", z)?;
    check_in_disk("w", w)?;
    let fz = f.eval1(z)?;
    let fw = f.eval1(w)?;
    check_in_disk("f(z)", fz)?;
    check_in_disk("f(w)", fw)?;
    Ok(poincare_unchecked(z, w) - poincare_unchecked(fz, fw))
}

/// Sampled estimate of how close `f(source)` comes to the boundary of
/// `target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageBoundReport {
    /// Largest boundary proximity seen (for disks: modulus after pullback
    /// to the unit disk).
    pub sup_modulus_estimate: f64,
    pub sample_count: usize,
    /// `1 − sup_modulus_estimate`; positive means every image point was
    /// strictly inside the target.
    pub margin_to_target: f64,
    pub seed: u64,
}

/// Evaluates `f` on `sample(source, s)` and records the largest boundary
/// proximity of the images inside `target`.
///
/// This only under-estimates the true supremum. An image point outside the
/// target shows up as `margin_to_target <= 0` rather than an error.
pub fn image_bound(f: &HoloMap, source: &Domain, target: &Domain, s: &SampleStream) -> Result<ImageBoundReport> {
    if f.in_dim() != source.dim() || f.out_dim() != target.dim() {
        return Err(Error::Structural(format!(
            "image_bound: map is {} -> {} but domains have dimensions {} and {}",
            f.in_dim(),
            f.out_dim(),
            source.dim(),
            target.dim()
        )));
    }
    let mut sup = 0.0_f64;
    for p in source.sample_iter(s)? {
        let q = f.evaluate(&p)?;
        sup = sup.max(target.boundary_proximity(&q)?);
    }
    Ok(ImageBoundReport {
        sup_modulus_estimate: sup,
        sample_count: s.count,
        margin_to_target: 1.0 - sup,
        seed: s.seed,
    })
}

fn random_disk_selfmap(rng: &mut ChaCha8Rng, bias: f64) -> Result<HoloMap> {
    let random_in_disk = |rng: &mut ChaCha8Rng, max: f64| {
        let rho = max * rng.random::<f64>().sqrt();
        let theta = std::f64::consts::TAU * rng.random::<f64>();
        Complex::from_polar(rho, theta)
    };
    let a0 = random_in_disk(rng, 0.9);
    let a1 = random_in_disk(rng, 0.9);
    let degree = rng.random_range(1..=4usize);
    // weights w_k > 0 with Σ w_k = 1: |p(z)| < 1 on the open disk
    let weights: Vec<f64> = (0..=degree).map(|_| 0.05 + rng.random::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    let coeffs = weights
        .iter()
        .map(|w| Complex::from_polar(w / total, std::f64::consts::TAU * rng.random::<f64>()))
        .collect();
    let inner = HoloMap::compose(HoloMap::polynomial1(coeffs)?, HoloMap::mobius(a0)?)?;
    let inner = HoloMap::compose(HoloMap::mobius(a1)?, inner)?;
    HoloMap::compose(HoloMap::scale(bias, 1)?, inner)
}

/// Random holomorphic self-map of the unit disk or a polydisk whose image
/// lies in `contraction_bias · d`.
///
/// Each coordinate is `bias · m₁ ∘ p ∘ m₀` with Möbius automorphisms
/// `m₀, m₁` and a polynomial `p` whose coefficient moduli sum to 1, so
/// `|p| < 1` on the open disk. Polydisk coordinates are conjugated by the
/// radius.
pub fn random_selfmap(d: &Domain, seed: u64, contraction_bias: f64) -> Result<HoloMap> {
    if !(contraction_bias > 0.0 && contraction_bias < 1.0) {
        return Err(Error::domain("contraction_bias", contraction_bias, "must lie in (0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match d {
        Domain::UnitDisk => random_disk_selfmap(&mut rng, contraction_bias),
        Domain::Polydisk { radii } => {
            let mut factors = Vec::with_capacity(radii.len());
            for &r in radii {
                let g = random_disk_selfmap(&mut rng, contraction_bias)?;
                let g = HoloMap::compose(g, HoloMap::scale(1.0 / r, 1)?)?;
                factors.push(HoloMap::compose(HoloMap::scale(r, 1)?, g)?);
            }
            HoloMap::diagonal(factors)
        }
        other => Err(Error::Capability(format!(
            "random_selfmap supports unit_disk and polydisk, not {}",
            other.kind_name()
        ))),
    }
}
