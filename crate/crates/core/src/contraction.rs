//! Diameter of a nested domain and the contraction constant `k = tanh M`.
//!
//! For an open `U ⊂ X` whose Carathéodory diameter `M = sup c_X(x, y)` over
//! `U × U` is finite, distances shrink uniformly: `c_X ≤ k · c_U` on `U`
//! with `k = tanh M < 1`. This module produces certificates for `M` and `k`,
//! checks the inequality on samples, and evaluates the rescaled-witness
//! lower bound for `c_U`.

use serde::{Deserialize, Serialize};

use crate::domains::{CPoint, DiskFactor, Domain, SampleStream};
use crate::error::{Error, Result};
use crate::holomaps::HoloMap;
use crate::metric::{atanh_stable, check_in_disk, mobius_apply, poincare_unchecked, Complex};

/// Diameters beyond this are treated as unbounded.
pub const DEFAULT_DIAMETER_CAP: f64 = 20.0;

/// Default relative-compactness margin of `U` inside `X`.
pub const DEFAULT_COMPACTNESS_MARGIN: f64 = 1e-6;

/// How a certificate's diameter was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Exact formula; the only kind accepted by verification and solving.
    ClosedForm,
    /// Max over sampled pairs. Under-estimates `M`, hence `k`.
    Sampled,
}

/// Diameter `M` of `U` for `c_X` and the constant `k = tanh M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionCertificate {
    #[serde(rename = "M")]
    pub m: f64,
    pub k: f64,
    pub method: Method,
    pub sample_count: usize,
    pub seed: u64,
}

impl ContractionCertificate {
    pub fn is_certifying(&self) -> bool {
        self.method == Method::ClosedForm
    }

    fn require_closed_form(&self, op: &str) -> Result<()> {
        if self.is_certifying() {
            Ok(())
        } else {
            Err(Error::Capability(format!(
                "{op} needs a closed-form certificate; sampled certificates under-estimate k"
            )))
        }
    }
}

/// `k = tanh M`.
pub fn contraction_constant(m: f64) -> Result<f64> {
    if !m.is_finite() || m < 0.0 {
        return Err(Error::domain("M", m, "must be finite and >= 0"));
    }
    let k = m.tanh();
    if k >= 1.0 {
        return Err(Error::domain("M", m, "tanh M rounds to 1 in double precision"));
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy)]
pub struct DiameterOptions {
    pub cap: f64,
    pub compactness_margin: f64,
}

impl Default for DiameterOptions {
    fn default() -> Self {
        DiameterOptions {
            cap: DEFAULT_DIAMETER_CAP,
            compactness_margin: DEFAULT_COMPACTNESS_MARGIN,
        }
    }
}

#[derive(Debug, Clone)]
pub enum DiameterMethod {
    ClosedForm,
    Sampled(SampleStream),
}

/// Per-coordinate data of `U` pulled back into the unit-disk model of `X`.
#[derive(Debug, Clone, Copy)]
struct PulledDisk {
    center: Complex,
    radius: f64,
}

impl PulledDisk {
    fn reach(&self) -> f64 {
        self.center.norm() + self.radius
    }

    /// Hyperbolic diameter of the Euclidean disk inside the unit disk and
    /// `tanh` of it.
    ///
    /// A Euclidean disk in the unit disk is a hyperbolic disk, and its
    /// diameter is attained on the segment through the origin:
    /// `M = ω(|c| − ρ, |c| + ρ)`, `tanh M = 2ρ / (1 − |c|² + ρ²)`. For a
    /// centred disk this is `M = 2 atanh ρ`, `k = 2ρ / (1 + ρ²)`.
    fn diameter(&self) -> Result<(f64, f64)> {
        let rho = self.radius;
        let c = self.center.norm();
        if c == 0.0 {
            if !(0.0..1.0).contains(&rho) {
                return Err(Error::domain("radius", rho, "must lie in [0, 1)"));
            }
            // 2 atanh ρ = ln((1 + ρ) / (1 − ρ)); ln1p only where the ratio is near 1
            let m = if rho >= 0.25 {
                ((1.0 + rho) / (1.0 - rho)).ln()
            } else {
                (2.0 * rho / (1.0 - rho)).ln_1p()
            };
            Ok((m, 2.0 * rho / (1.0 + rho * rho)))
        } else {
            let a = Complex::new(c - rho, 0.0);
            let b = Complex::new(c + rho, 0.0);
            let m = poincare_unchecked(a, b);
            Ok((m, 2.0 * rho / ((1.0 - c) * (1.0 + c) + rho * rho)))
        }
    }
}

/// Disk factors of `X` and `U` expressed in a common coordinate system.
fn nesting_factors(x: &Domain, u: &Domain) -> Option<(Vec<DiskFactor>, Vec<DiskFactor>)> {
    if let (Domain::AffineImage { base: bx, map: mx }, Domain::AffineImage { base: bu, map: mu }) = (x, u) {
        if mx == mu {
            return nesting_factors(bx, bu);
        }
    }
    Some((x.disk_factors()?, u.disk_factors()?))
}

fn pulled_disks(x: &Domain, u: &Domain) -> Result<Option<Vec<PulledDisk>>> {
    if x.dim() != u.dim() {
        return Err(Error::Structural(format!(
            "ambient has dimension {} but inner domain has dimension {}",
            x.dim(),
            u.dim()
        )));
    }
    let Some((fx, fu)) = nesting_factors(x, u) else {
        return Ok(None);
    };
    Ok(Some(
        fx.iter()
            .zip(&fu)
            .map(|(ox, ou)| PulledDisk {
                center: (ou.center - ox.center) / ox.radius,
                radius: ou.radius / ox.radius,
            })
            .collect(),
    ))
}

/// Inclusion, boundedness and compactness-margin checks on the defining
/// data, in that order. Returns the coordinatewise `(M, k)` with the
/// largest `M`.
fn structural_diameter(disks: &[PulledDisk], opts: &DiameterOptions) -> Result<(f64, f64)> {
    for (i, d) in disks.iter().enumerate() {
        if d.reach() > 1.0 {
            return Err(Error::Hypothesis(format!(
                "inner domain is not contained in the ambient domain (coordinate {i} reaches {})",
                d.reach()
            )));
        }
        if d.reach() == 1.0 {
            return Err(Error::Unbounded {
                diameter: f64::INFINITY,
                cap: opts.cap,
            });
        }
    }
    let mut best = (0.0_f64, 0.0_f64);
    for d in disks {
        let (m, k) = d.diameter()?;
        if m > best.0 {
            best = (m, k);
        }
    }
    if best.0 > opts.cap || best.1 >= 1.0 {
        return Err(Error::Unbounded {
            diameter: best.0,
            cap: opts.cap,
        });
    }
    for (i, d) in disks.iter().enumerate() {
        let margin = 1.0 - d.reach();
        if margin < opts.compactness_margin {
            return Err(Error::Hypothesis(format!(
                "inner domain is not relatively compact: coordinate {i} has margin {margin:e} < {:e}",
                opts.compactness_margin
            )));
        }
    }
    Ok(best)
}

/// Certificate for the diameter of `u` measured with `c_x`.
///
/// The closed-form path handles any nesting of disks (concentric or not,
/// via the hyperbolic-disk formula) and concentric polydisks, directly or
/// under a shared affine map. The sampled path returns the max of `c_x`
/// over `s.count` pairs from `u`; when the defining data allow it, the same
/// structural checks run first.
pub fn diameter(x: &Domain, u: &Domain, method: &DiameterMethod, opts: &DiameterOptions) -> Result<ContractionCertificate> {
    let disks = pulled_disks(x, u)?;
    match method {
        DiameterMethod::ClosedForm => {
            let disks = disks.ok_or_else(|| {
                Error::Capability(format!(
                    "no closed-form diameter for {} inside {}; use the sampled method",
                    u.kind_name(),
                    x.kind_name()
                ))
            })?;
            if disks.len() > 1 && disks.iter().any(|d| d.center != Complex::new(0.0, 0.0)) {
                return Err(Error::Capability(
                    "closed-form diameter covers concentric polydisk nestings only; use the sampled method".into(),
                ));
            }
            let (m, k) = structural_diameter(&disks, opts)?;
            Ok(ContractionCertificate {
                m,
                k,
                method: Method::ClosedForm,
                sample_count: 0,
                seed: 0,
            })
        }
        DiameterMethod::Sampled(s) => {
            if let Some(disks) = disks {
                structural_diameter(&disks, opts)?;
            }
            let mut m = 0.0_f64;
            for (p, q) in u.sample_pairs(s)? {
                for pt in [&p, &q] {
                    if !x.contains(pt, opts.compactness_margin)? {
                        return Err(Error::Hypothesis(format!(
                            "sampled point {:?} of the inner domain is not inside the ambient domain with margin {:e}",
                            pt.coords(),
                            opts.compactness_margin
                        )));
                    }
                }
                m = m.max(x.caratheodory_unchecked(&p, &q)?);
            }
            if m > opts.cap {
                return Err(Error::Unbounded { diameter: m, cap: opts.cap });
            }
            Ok(ContractionCertificate {
                m,
                k: contraction_constant(m)?,
                method: Method::Sampled,
                sample_count: s.count,
                seed: s.seed,
            })
        }
    }
}

/// Lower bound `atanh(|g(y)| / k) ≤ c_U(x, y)` from a witness `f: X → Δ`.
///
/// `g` is `f` followed by the Möbius map centring `f(x)`, so `g(x) = 0`.
/// On `U`, `|g| ≤ tanh M = k`, hence `g / k` maps `U` into the disk and its
/// Poincaré distance bounds `c_U` from below. A value `|g(y)| > k` means the
/// certificate is wrong for this witness.
pub fn witness_lower_bound(f: &HoloMap, x: &CPoint, y: &CPoint, k: f64) -> Result<f64> {
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::domain("k", k, "must lie in (0, 1)"));
    }
    if f.out_dim() != 1 {
        return Err(Error::Structural(format!(
            "witness must map into the unit disk, got output dimension {}",
            f.out_dim()
        )));
    }
    let fx = f.evaluate(x)?.coords()[0];
    let fy = f.evaluate(y)?.coords()[0];
    check_in_disk("f(x)", fx)?;
    check_in_disk("f(y)", fy)?;
    let v = mobius_apply(fx, fy).norm();
    if v > k {
        return Err(Error::Hypothesis(format!(
            "witness value |f(y)| = {v} exceeds the certificate's k = {k}"
        )));
    }
    atanh_stable(v / k).map_err(|_| {
        Error::Hypothesis(format!("witness value |f(y)| = {v} reaches the certificate's k = {k}"))
    })
}

/// Best [`witness_lower_bound`] over the ambient domain's own witness family
/// (coordinate projections, pulled back through affine maps).
pub fn family_lower_bound(x_dom: &Domain, x: &CPoint, y: &CPoint, k: f64) -> Result<f64> {
    let mut best = 0.0_f64;
    for w in x_dom.witnesses()? {
        best = best.max(witness_lower_bound(&w, x, y, k)?);
    }
    Ok(best)
}

/// Outcome of checking `c_X ≤ k · c_U` on sampled pairs of `U`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestingReport {
    pub pairs_checked: usize,
    /// Max over pairs of both `c_X − k·c_U` and `c_X − atanh(k·tanh c_U)`.
    pub max_violation: f64,
    pub worst_pair: (CPoint, CPoint),
    pub k_used: f64,
    /// Max of `c_X − k·c_U` alone.
    pub max_direct_violation: f64,
    /// Max of `c_X − atanh(k·tanh c_U)`.
    pub max_chain_violation: f64,
    /// Max of `atanh(k·tanh c_U) − k·c_U`; nonpositive by the convexity
    /// inequality.
    pub max_convexity_violation: f64,
    /// Largest observed `c_X / c_U` (pairs with `c_U > 0` only).
    pub max_ratio: f64,
    pub seed: u64,
}

/// Samples pairs from `U` and checks the nested-domain inequality together
/// with the intermediate bound `atanh(k·tanh c_U) ≥ c_X`.
///
/// Pairs are visited in stream order; the worst pair is the first one
/// attaining the maximum.
pub fn verify_nesting(x: &Domain, u: &Domain, cert: &ContractionCertificate, s: &SampleStream) -> Result<NestingReport> {
    cert.require_closed_form("verify_nesting")?;
    if !x.closed_form_capable() || !u.closed_form_capable() {
        return Err(Error::Capability("verify_nesting needs closed-form distances on both domains".into()));
    }
    if x.dim() != u.dim() {
        return Err(Error::Structural("ambient and inner dimensions differ".into()));
    }
    let k = cert.k;
    let mut pairs = 0usize;
    let mut worst: Option<(CPoint, CPoint)> = None;
    let (mut max_v, mut max_direct, mut max_chain, mut max_convexity, mut max_ratio) =
        (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0_f64);
    for (p, q) in u.sample_pairs(s)? {
        if !x.contains(&p, 0.0)? || !x.contains(&q, 0.0)? {
            return Err(Error::Hypothesis("sampled point of the inner domain lies outside the ambient domain".into()));
        }
        let cx = x.caratheodory_unchecked(&p, &q)?;
        let cu = u.caratheodory_unchecked(&p, &q)?;
        let chained = atanh_stable(k * cu.tanh())?;
        let direct = cx - k * cu;
        let chain = cx - chained;
        max_direct = max_direct.max(direct);
        max_chain = max_chain.max(chain);
        max_convexity = max_convexity.max(chained - k * cu);
        if cu > 0.0 {
            max_ratio = max_ratio.max(cx / cu);
        }
        let v = direct.max(chain);
        if v > max_v {
            max_v = v;
            worst = Some((p, q));
        }
        pairs += 1;
    }
    Ok(NestingReport {
        pairs_checked: pairs,
        max_violation: max_v,
        worst_pair: worst.expect("sample stream has count >= 1"),
        k_used: k,
        max_direct_violation: max_direct,
        max_chain_violation: max_chain,
        max_convexity_violation: max_convexity,
        max_ratio,
        seed: s.seed,
    })
}
