//! Certified fixed-point iteration for holomorphic maps with relatively
//! compact image.
//!
//! If `f(X) ⊂ U ⊂⊂ X`, then `c_X(f x, f y) ≤ k · c_X(x, y)` with the
//! nested-domain constant `k` of `(X, U)`, so the iterates `fⁿ(x₀)` form a
//! Cauchy sequence with steps bounded by `kⁿ · c_X(x₀, f x₀)` and converge
//! to the unique fixed point.

use serde::{Deserialize, Serialize};

use crate::contraction::ContractionCertificate;
use crate::domains::{CPoint, Domain, SampleStream};
use crate::error::{Error, Result};
use crate::holomaps::HoloMap;

/// Extra iterations allowed beyond the a-priori count.
pub const GUARD_STEPS: usize = 16;

/// A self-map `f` of `X` with image in `U`, a start point and a tolerance
/// measured in `c_X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointProblem {
    #[serde(rename = "domain")]
    pub ambient: Domain,
    /// Declared container of `f(X)`; must be relatively compact in `X`.
    #[serde(rename = "image_domain")]
    pub image: Domain,
    pub map: HoloMap,
    pub start: CPoint,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

impl FixedPointProblem {
    pub fn validate(&self) -> Result<()> {
        self.ambient.validate()?;
        self.image.validate()?;
        self.map.validate()?;
        let n = self.ambient.dim();
        if self.image.dim() != n || self.map.in_dim() != n || self.map.out_dim() != n || self.start.dim() != n {
            return Err(Error::Structural(format!(
                "dimensions disagree: domain {n}, image_domain {}, map {} -> {}, start {}",
                self.image.dim(),
                self.map.in_dim(),
                self.map.out_dim(),
                self.start.dim()
            )));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::domain("tolerance", self.tolerance, "must be finite and > 0"));
        }
        Ok(())
    }

    fn with_start(&self, start: CPoint) -> Self {
        FixedPointProblem { start, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    /// The final iterate `x_{n+1}`.
    pub b: CPoint,
    /// Index `n` of the last recorded step.
    pub iterations: usize,
    /// `c_X(xₙ, xₙ₊₁)`.
    pub last_step: f64,
    /// A-posteriori bound `last_step · k / (1 − k)` on `c_X(b, b*)`.
    pub certified_bound: f64,
    /// A-priori bound `kⁿ · trace[0] / (1 − k)`.
    pub a_priori_bound: f64,
    /// `c_X(b, f(b))`.
    pub residual: f64,
    pub k_used: f64,
    /// `trace[n] = c_X(xₙ, xₙ₊₁)` for `n = 0..=iterations`.
    pub trace: Vec<f64>,
}

/// Smallest `n ≥ 0` with `kⁿ · d0 / (1 − k) ≤ tol`.
///
/// `k = 0` returns 1: a single step lands on the fixed point.
pub fn required_iterations(k: f64, d0: f64, tol: f64) -> Result<usize> {
    if k.is_nan() || !(0.0..1.0).contains(&k) {
        return Err(Error::domain("k", k, "must lie in [0, 1)"));
    }
    if !(d0.is_finite() && d0 > 0.0) {
        return Err(Error::domain("d0", d0, "must be finite and > 0"));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::domain("tol", tol, "must be finite and > 0"));
    }
    if k == 0.0 {
        return Ok(1);
    }
    let bound = |n: usize| k.powi(n as i32) * d0 / (1.0 - k);
    if bound(0) <= tol {
        return Ok(0);
    }
    let estimate = ((tol * (1.0 - k) / d0).ln() / k.ln()).ceil().max(0.0) as usize;
    // the logarithm may be off by one ulp either way
    let mut n = estimate;
    while n > 0 && bound(n - 1) <= tol {
        n -= 1;
    }
    while bound(n) > tol {
        n += 1;
    }
    Ok(n)
}

fn check_certificate(cert: &ContractionCertificate) -> Result<()> {
    if !cert.is_certifying() {
        return Err(Error::Capability(
            "the solver needs a closed-form certificate; sampled certificates under-estimate k".into(),
        ));
    }
    if !(0.0..1.0).contains(&cert.k) {
        return Err(Error::domain("k", cert.k, "must lie in [0, 1)"));
    }
    Ok(())
}

fn apply_into(p: &FixedPointProblem, x: &CPoint) -> Result<CPoint> {
    let next = p.map.evaluate(x)?;
    if !p.image.contains(&next, 0.0)? {
        return Err(Error::Hypothesis(format!(
            "iterate {:?} escaped the declared image domain {}",
            next.coords(),
            p.image.kind_name()
        )));
    }
    if !p.ambient.contains(&next, 0.0)? {
        return Err(Error::Hypothesis(format!(
            "iterate {:?} escaped the domain {}",
            next.coords(),
            p.ambient.kind_name()
        )));
    }
    Ok(next)
}

/// Max over sampled pairs `(x, y)` of `X` of `c_X(f x, f y) − k · c_X(x, y)`.
pub fn step_contraction_check(
    f: &HoloMap,
    x: &Domain,
    u: &Domain,
    cert: &ContractionCertificate,
    pairs: &SampleStream,
) -> Result<f64> {
    check_certificate(cert)?;
    if !x.closed_form_capable() {
        return Err(Error::Capability(format!("{} has no closed-form distance", x.kind_name())));
    }
    let mut worst = f64::NEG_INFINITY;
    for (p, q) in x.sample_pairs(pairs)? {
        let fp = f.evaluate(&p)?;
        let fq = f.evaluate(&q)?;
        for img in [&fp, &fq] {
            if !u.contains(img, 0.0)? {
                return Err(Error::Hypothesis(format!(
                    "image point {:?} escaped {}",
                    img.coords(),
                    u.kind_name()
                )));
            }
        }
        let gap = x.caratheodory_unchecked(&fp, &fq)? - cert.k * x.caratheodory_unchecked(&p, &q)?;
        worst = worst.max(gap);
    }
    Ok(worst)
}

/// Iterates `f` from `p.start` until the a-posteriori bound
/// `c_X(xₙ, xₙ₊₁) · k / (1 − k)` drops to the tolerance.
///
/// Without an explicit `max_iter` the budget is the a-priori count from
/// [`required_iterations`] plus [`GUARD_STEPS`].
pub fn solve(p: &FixedPointProblem, cert: &ContractionCertificate) -> Result<FixedPointResult> {
    p.validate()?;
    check_certificate(cert)?;
    if !p.ambient.contains(&p.start, 0.0)? {
        return Err(Error::Hypothesis(format!(
            "start {:?} is not in the domain {}",
            p.start.coords(),
            p.ambient.kind_name()
        )));
    }
    let k = cert.k;
    let tol = p.tolerance;
    let mut x = p.start.clone();
    let mut trace = Vec::new();
    let mut limit = p.max_iter;
    loop {
        let next = apply_into(p, &x)?;
        let step = p.ambient.caratheodory_unchecked(&x, &next)?;
        trace.push(step);
        let n = trace.len() - 1;
        if n == 0 && limit.is_none() && step > 0.0 {
            limit = Some(required_iterations(k, step, tol)? + GUARD_STEPS);
        }
        if k == 0.0 || step == 0.0 || step * k / (1.0 - k) <= tol {
            let residual = p.ambient.caratheodory_unchecked(&next, &apply_into(p, &next)?)?;
            return Ok(FixedPointResult {
                b: next,
                iterations: n,
                last_step: step,
                certified_bound: step * k / (1.0 - k),
                a_priori_bound: k.powi(n as i32) * trace[0] / (1.0 - k),
                residual,
                k_used: k,
                trace,
            });
        }
        if n >= limit.unwrap_or(usize::MAX) {
            return Err(Error::NonConvergence {
                iterations: n,
                last_step: step,
                trace,
            });
        }
        x = next;
    }
}

/// Solves from every start and returns the largest pairwise `c_X` distance
/// between the resulting fixed points.
pub fn uniqueness_probe(p: &FixedPointProblem, cert: &ContractionCertificate, starts: &[CPoint]) -> Result<f64> {
    let points = std::thread::scope(|scope| {
        let handles: Vec<_> = starts
            .iter()
            .map(|s| {
                let prob = p.with_start(s.clone());
                scope.spawn(move || solve(&prob, cert).map(|r| r.b))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut spread = 0.0_f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            spread = spread.max(p.ambient.caratheodory_unchecked(a, b)?);
        }
    }
    Ok(spread)
}
