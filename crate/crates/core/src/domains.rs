//! Concrete open sets of ℂⁿ with exact Carathéodory distances.
//!
//! Supported kinds are the unit disk, scaled and affine disks, polydisks
//! centred at the origin, and invertible affine images of any of these. For
//! all of them the Carathéodory distance has a closed form: the Poincaré
//! distance after pulling back to the unit disk, with the max rule across
//! polydisk coordinates.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holomaps::HoloMap;
use crate::metric::{poincare_unchecked, Complex};

/// Largest accepted condition number of an affine linear part.
pub const MAX_CONDITION: f64 = 1e12;

/// Default boundary margin used when sampling interior points.
pub const DEFAULT_BOUNDARY_MARGIN: f64 = 1e-3;

/// A point of ℂⁿ.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CPoint(Vec<Complex>);

impl CPoint {
    pub fn new(coords: Vec<Complex>) -> Self {
        CPoint(coords)
    }

    pub fn scalar(z: Complex) -> Self {
        CPoint(vec![z])
    }

    pub fn from_re(re: f64) -> Self {
        CPoint(vec![Complex::new(re, 0.0)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Complex] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Euclidean distance in ℂⁿ.
    pub fn euclidean_distance(&self, other: &CPoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl<'de> Deserialize<'de> for CPoint {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        // Accept both `[[re, im], ...]` and a bare `[re, im]` for dimension 1.
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Many(Vec<Complex>),
            One(Complex),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Many(v) if v.is_empty() => Err(serde::de::Error::custom("point must have at least one coordinate")),
            Repr::Many(v) => Ok(CPoint(v)),
            Repr::One(z) => Ok(CPoint(vec![z])),
        }
    }
}

fn check_point(p: &CPoint, dim: usize) -> Result<()> {
    if p.dim() != dim {
        return Err(Error::Structural(format!(
            "point has dimension {} but the domain has dimension {dim}",
            p.dim()
        )));
    }
    if !p.is_finite() {
        return Err(Error::domain("point", format!("{:?}", p.coords()), "non-finite coordinate"));
    }
    Ok(())
}

/// Invertible affine map `p ↦ linear · p + offset` with its inverse cached.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "AffineSpec", into = "AffineSpec")]
pub struct Affine {
    linear: DMatrix<Complex>,
    inverse: DMatrix<Complex>,
    offset: Vec<Complex>,
}

#[derive(Serialize, Deserialize)]
struct AffineSpec {
    linear: Vec<Vec<Complex>>,
    offset: Vec<Complex>,
}

impl PartialEq for Affine {
    fn eq(&self, other: &Self) -> bool {
        self.linear == other.linear && self.offset == other.offset
    }
}

impl TryFrom<AffineSpec> for Affine {
    type Error = Error;

    fn try_from(spec: AffineSpec) -> Result<Self> {
        Affine::new(spec.linear, spec.offset)
    }
}

impl From<Affine> for AffineSpec {
    fn from(a: Affine) -> Self {
        AffineSpec {
            linear: a.rows(),
            offset: a.offset,
        }
    }
}

fn frobenius(m: &DMatrix<Complex>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl Affine {
    /// Builds the map from row-major `linear` and `offset`, rejecting
    /// singular or badly conditioned linear parts.
    pub fn new(linear: Vec<Vec<Complex>>, offset: Vec<Complex>) -> Result<Self> {
        let n = linear.len();
        if n == 0 || linear.iter().any(|row| row.len() != n) {
            return Err(Error::Structural("affine linear part must be a non-empty square matrix".into()));
        }
        if offset.len() != n {
            return Err(Error::Structural(format!(
                "affine offset has length {} but the linear part is {n}x{n}",
                offset.len()
            )));
        }
        let all_finite = linear
            .iter()
            .flatten()
            .chain(&offset)
            .all(|z| z.re.is_finite() && z.im.is_finite());
        if !all_finite {
            return Err(Error::Structural("affine map has a non-finite entry".into()));
        }
        let m = DMatrix::from_fn(n, n, |i, j| linear[i][j]);
        let inverse = m
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Structural("affine linear part is singular".into()))?;
        let cond = frobenius(&m) * frobenius(&inverse);
        if !cond.is_finite() || cond > MAX_CONDITION {
            return Err(Error::Structural(format!(
                "affine linear part is ill-conditioned (condition number {cond:e})"
            )));
        }
        Ok(Affine { linear: m, inverse, offset })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| Complex::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
            .collect();
        Affine::new(rows, vec![Complex::new(0.0, 0.0); n]).expect("identity is invertible")
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn rows(&self) -> Vec<Vec<Complex>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.linear[(i, j)]).collect())
            .collect()
    }

    pub fn offset(&self) -> &[Complex] {
        &self.offset
    }

    pub fn apply(&self, p: &[Complex]) -> Vec<Complex> {
        (0..self.dim())
            .map(|i| {
                (0..self.dim()).fold(Complex::new(0.0, 0.0), |acc, j| acc + self.linear[(i, j)] * p[j]) + self.offset[i]
            })
            .collect()
    }

    /// `linear⁻¹ · (q − offset)`.
    pub fn pullback(&self, q: &[Complex]) -> Vec<Complex> {
        let shifted: Vec<Complex> = q.iter().zip(&self.offset).map(|(a, b)| a - b).collect();
        (0..self.dim())
            .map(|i| (0..self.dim()).fold(Complex::new(0.0, 0.0), |acc, j| acc + self.inverse[(i, j)] * shifted[j]))
            .collect()
    }

    /// The inverse map `q ↦ linear⁻¹ q − linear⁻¹ offset` as a [`HoloMap`].
    pub fn inverse_map(&self) -> Result<HoloMap> {
        let n = self.dim();
        let rows: Vec<Vec<Complex>> = (0..n).map(|i| (0..n).map(|j| self.inverse[(i, j)]).collect()).collect();
        let shift = self.pullback(&vec![Complex::new(0.0, 0.0); n]);
        HoloMap::affine(rows, shift)
    }

    fn diagonal(&self) -> Option<Vec<Complex>> {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.linear[(i, j)] != Complex::new(0.0, 0.0) {
                    return None;
                }
            }
        }
        Some((0..n).map(|i| self.linear[(i, i)]).collect())
    }
}

/// A Euclidean disk `{|z − center| < radius}` in one coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskFactor {
    pub center: Complex,
    pub radius: f64,
}

/// An open subset of ℂⁿ of one of the supported kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    UnitDisk,
    /// `{|z| < r}` with `0 < r < 1`.
    ScaledDisk { r: f64 },
    /// `{|z − center| < radius}`.
    AffineDisk { center: Complex, radius: f64 },
    /// `{|zᵢ| < radiiᵢ for all i}`.
    Polydisk { radii: Vec<f64> },
    /// `{linear · p + offset : p ∈ base}`.
    AffineImage {
        base: Box<Domain>,
        #[serde(flatten)]
        map: Affine,
    },
}

fn positive_finite(what: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(what, x, "must be finite and > 0"))
    }
}

impl Domain {
    pub fn scaled_disk(r: f64) -> Result<Self> {
        let d = Domain::ScaledDisk { r };
        d.validate()?;
        Ok(d)
    }

    pub fn affine_disk(center: Complex, radius: f64) -> Result<Self> {
        let d = Domain::AffineDisk { center, radius };
        d.validate()?;
        Ok(d)
    }

    pub fn polydisk(radii: Vec<f64>) -> Result<Self> {
        let d = Domain::Polydisk { radii };
        d.validate()?;
        Ok(d)
    }

    pub fn affine_image(base: Domain, map: Affine) -> Result<Self> {
        let d = Domain::AffineImage {
            base: Box::new(base),
            map,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::UnitDisk => Ok(()),
            Domain::ScaledDisk { r } => {
                if *r > 0.0 && *r < 1.0 {
                    Ok(())
                } else {
                    Err(Error::domain("scaled_disk.r", r, "must lie in (0, 1)"))
                }
            }
            Domain::AffineDisk { center, radius } => {
                if !(center.re.is_finite() && center.im.is_finite()) {
                    return Err(Error::domain("affine_disk.center", center, "non-finite"));
                }
                positive_finite("affine_disk.radius", *radius)
            }
            Domain::Polydisk { radii } => {
                if radii.is_empty() {
                    return Err(Error::Structural("polydisk needs at least one radius".into()));
                }
                radii.iter().try_for_each(|&r| positive_finite("polydisk.radii", r))
            }
            Domain::AffineImage { base, map } => {
                base.validate()?;
                if base.dim() != map.dim() {
                    return Err(Error::Structural(format!(
                        "affine_image: base has dimension {} but the map acts on dimension {}",
                        base.dim(),
                        map.dim()
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Domain::UnitDisk => "unit_disk",
            Domain::ScaledDisk { .. } => "scaled_disk",
            Domain::AffineDisk { .. } => "affine_disk",
            Domain::Polydisk { .. } => "polydisk",
            Domain::AffineImage { .. } => "affine_image",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::UnitDisk | Domain::ScaledDisk { .. } | Domain::AffineDisk { .. } => 1,
            Domain::Polydisk { radii } => radii.len(),
            Domain::AffineImage { map, .. } => map.dim(),
        }
    }

    /// True when [`Domain::caratheodory`] is exact for this kind. Every
    /// supported kind qualifies.
    pub fn closed_form_capable(&self) -> bool {
        match self {
            Domain::AffineImage { base, .. } => base.closed_form_capable(),
            _ => true,
        }
    }

    /// The domain as a product of coordinate disks, when it is one.
    pub fn disk_factors(&self) -> Option<Vec<DiskFactor>> {
        let zero = Complex::new(0.0, 0.0);
        match self {
            Domain::UnitDisk => Some(vec![DiskFactor { center: zero, radius: 1.0 }]),
            Domain::ScaledDisk { r } => Some(vec![DiskFactor { center: zero, radius: *r }]),
            Domain::AffineDisk { center, radius } => Some(vec![DiskFactor {
                center: *center,
                radius: *radius,
            }]),
            Domain::Polydisk { radii } => Some(radii.iter().map(|&r| DiskFactor { center: zero, radius: r }).collect()),
            Domain::AffineImage { base, map } => {
                let diag = map.diagonal()?;
                let factors = base.disk_factors()?;
                Some(
                    factors
                        .iter()
                        .zip(diag)
                        .zip(map.offset())
                        .map(|((f, a), o)| DiskFactor {
                            center: a * f.center + o,
                            radius: a.norm() * f.radius,
                        })
                        .collect(),
                )
            }
        }
    }

    /// How far `p` is towards the boundary: `0` at the centre of a disk,
    /// `1` on its boundary. For polydisks the max over coordinates; affine
    /// images are measured after pullback.
    pub fn boundary_proximity(&self, p: &CPoint) -> Result<f64> {
        check_point(p, self.dim())?;
        Ok(self.proximity_unchecked(p.coords()))
    }

    fn proximity_unchecked(&self, p: &[Complex]) -> f64 {
        match self {
            Domain::UnitDisk => p[0].norm(),
            Domain::ScaledDisk { r } => p[0].norm() / r,
            Domain::AffineDisk { center, radius } => (p[0] - center).norm() / radius,
            Domain::Polydisk { radii } => p
                .iter()
                .zip(radii)
                .map(|(z, r)| z.norm() / r)
                .fold(0.0, f64::max),
            Domain::AffineImage { base, map } => base.proximity_unchecked(&map.pullback(p)),
        }
    }

    /// Membership with a boundary margin: `p` belongs when its boundary
    /// proximity is strictly below `1 − margin`. With `margin = 0` this is
    /// plain membership in the open set.
    pub fn contains(&self, p: &CPoint, margin: f64) -> Result<bool> {
        if !(0.0..1.0).contains(&margin) {
            return Err(Error::domain("margin", margin, "must lie in [0, 1)"));
        }
        Ok(self.boundary_proximity(p)? < 1.0 - margin)
    }

    /// Maps from this domain into the unit disk whose Poincaré distances
    /// realise the Carathéodory distance: `c(x, y) = maxᵢ ω(φᵢ(x), φᵢ(y))`.
    pub fn witnesses(&self) -> Result<Vec<HoloMap>> {
        let zero = Complex::new(0.0, 0.0);
        match self {
            Domain::UnitDisk => Ok(vec![HoloMap::identity(1)?]),
            Domain::ScaledDisk { r } => Ok(vec![HoloMap::scale(1.0 / r, 1)?]),
            Domain::AffineDisk { center, radius } => Ok(vec![HoloMap::affine(
                vec![vec![Complex::new(1.0 / radius, 0.0)]],
                vec![-center / radius],
            )?]),
            Domain::Polydisk { radii } => radii
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let row = (0..radii.len())
                        .map(|j| if i == j { Complex::new(1.0 / r, 0.0) } else { zero })
                        .collect();
                    HoloMap::affine(vec![row], vec![zero])
                })
                .collect(),
            Domain::AffineImage { base, map } => {
                let pull = map.inverse_map()?;
                base.witnesses()?
                    .into_iter()
                    .map(|w| HoloMap::compose(w, pull.clone()))
                    .collect()
            }
        }
    }

    /// Exact Carathéodory distance between two points of the domain.
    pub fn caratheodory(&self, x: &CPoint, y: &CPoint) -> Result<f64> {
        if !self.closed_form_capable() {
            return Err(Error::Capability(format!(
                "{} has no closed-form Caratheodory distance; use contraction::witness_lower_bound",
                self.kind_name()
            )));
        }
        for (name, p) in [("x", x), ("y", y)] {
            if !self.contains(p, 0.0)? {
                return Err(Error::domain(name, format!("{:?}", p.coords()), format!("point not in {}", self.kind_name())));
            }
        }
        self.caratheodory_unchecked(x, y)
    }

    pub(crate) fn caratheodory_unchecked(&self, x: &CPoint, y: &CPoint) -> Result<f64> {
        let (x, y) = (x.coords(), y.coords());
        Ok(match self {
            Domain::UnitDisk => poincare_unchecked(x[0], y[0]),
            Domain::ScaledDisk { r } => poincare_unchecked(x[0] / r, y[0] / r),
            Domain::Polydisk { radii } => polydisk_distance(radii, x, y),
            // evaluated through the witness maps rather than the pullback,
            // so pullback_isometry_check compares two independent routes
            Domain::AffineDisk { .. } | Domain::AffineImage { .. } => {
                let mut best = 0.0_f64;
                for w in self.witnesses()? {
                    let u = w.evaluate(&CPoint(x.to_vec()))?.coords()[0];
                    let v = w.evaluate(&CPoint(y.to_vec()))?.coords()[0];
                    if u.norm() >= 1.0 || v.norm() >= 1.0 {
                        return Err(Error::Numeric {
                            node: "witness".into(),
                            detail: "witness image left the unit disk".into(),
                        });
                    }
                    best = best.max(poincare_unchecked(u, v));
                }
                best
            }
        })
    }

    /// For image kinds: the base domain and the pullback of a point to it.
    pub fn pullback(&self, p: &CPoint) -> Result<(Domain, CPoint)> {
        check_point(p, self.dim())?;
        match self {
            Domain::AffineDisk { center, radius } => {
                Ok((Domain::UnitDisk, CPoint::scalar((p.0[0] - center) / radius)))
            }
            Domain::AffineImage { base, map } => Ok(((**base).clone(), CPoint(map.pullback(&p.0)))),
            other => Err(Error::Capability(format!(
                "{} is not an affine image; pullback is undefined",
                other.kind_name()
            ))),
        }
    }

    /// Reproducible points of the domain; see [`SampleStream`].
    pub fn sample(&self, s: &SampleStream) -> Result<Vec<CPoint>> {
        Ok(self.sample_iter(s)?.collect())
    }

    pub fn sample_iter(&self, s: &SampleStream) -> Result<SampleIter<'_>> {
        s.validate()?;
        Ok(SampleIter {
            domain: self,
            rng: ChaCha8Rng::seed_from_u64(s.seed),
            margin: s.boundary_margin,
            sampling: s.sampling,
            remaining: s.count,
        })
    }

    /// `s.count` consecutive pairs drawn from one stream of `2 · s.count`
    /// points. A shorter count yields a prefix of a longer one.
    pub fn sample_pairs(&self, s: &SampleStream) -> Result<PairIter<'_>> {
        let doubled = SampleStream {
            count: 2 * s.count,
            ..s.clone()
        };
        Ok(PairIter(self.sample_iter(&doubled)?))
    }

    fn draw(&self, rng: &mut ChaCha8Rng, margin: f64, sampling: Sampling, out: &mut Vec<Complex>) {
        match self {
            Domain::UnitDisk => out.push(draw_disk(rng, 1.0, margin, sampling)),
            Domain::ScaledDisk { r } => out.push(draw_disk(rng, *r, margin, sampling)),
            Domain::AffineDisk { center, radius } => out.push(center + draw_disk(rng, *radius, margin, sampling)),
            Domain::Polydisk { radii } => out.extend(radii.iter().map(|&r| draw_disk(rng, r, margin, sampling))),
            Domain::AffineImage { base, map } => {
                let mut tmp = Vec::with_capacity(map.dim());
                base.draw(rng, margin, sampling, &mut tmp);
                out.extend(map.apply(&tmp));
            }
        }
    }
}

fn polydisk_distance(radii: &[f64], x: &[Complex], y: &[Complex]) -> f64 {
    radii
        .iter()
        .zip(x.iter().zip(y))
        .map(|(r, (a, b))| poincare_unchecked(a / r, b / r))
        .fold(0.0, f64::max)
}

/// How sample moduli are distributed inside each coordinate disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Uniform with respect to area: relative modulus `√u`.
    #[default]
    Uniform,
    /// Concentrated near the boundary: relative modulus `1 − (1 − u)⁴`.
    BoundaryBiased,
}

fn draw_disk(rng: &mut ChaCha8Rng, radius: f64, margin: f64, sampling: Sampling) -> Complex {
    let u: f64 = rng.random();
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    let t = match sampling {
        Sampling::Uniform => u.sqrt(),
        Sampling::BoundaryBiased => 1.0 - (1.0 - u).powi(4),
    };
    Complex::from_polar(radius * (1.0 - margin) * t, theta)
}

/// Seed, margin and size of a reproducible sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleStream {
    pub seed: u64,
    pub boundary_margin: f64,
    pub count: usize,
    #[serde(default)]
    pub sampling: Sampling,
}

impl SampleStream {
    pub fn new(seed: u64, boundary_margin: f64, count: usize) -> Self {
        SampleStream {
            seed,
            boundary_margin,
            count,
            sampling: Sampling::Uniform,
        }
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::domain("count", self.count, "must be >= 1"));
        }
        if !(self.boundary_margin > 0.0 && self.boundary_margin < 1.0) {
            return Err(Error::domain("boundary_margin", self.boundary_margin, "must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Iterator over sampled points. Candidates that fail the margin test after
/// rounding are redrawn, so every emitted point satisfies
/// `contains(domain, p, boundary_margin)`.
pub struct SampleIter<'a> {
    domain: &'a Domain,
    rng: ChaCha8Rng,
    margin: f64,
    sampling: Sampling,
    remaining: usize,
}

impl Iterator for SampleIter<'_> {
    type Item = CPoint;

    fn next(&mut self) -> Option<CPoint> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let mut buf = Vec::with_capacity(self.domain.dim());
        loop {
            buf.clear();
            self.domain.draw(&mut self.rng, self.margin, self.sampling, &mut buf);
            if self.domain.proximity_unchecked(&buf) < 1.0 - self.margin {
                return Some(CPoint(buf));
            }
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

pub struct PairIter<'a>(SampleIter<'a>);

impl Iterator for PairIter<'_> {
    type Item = (CPoint, CPoint);

    fn next(&mut self) -> Option<Self::Item> {
        Some((self.0.next()?, self.0.next()?))
    }
}

/// `|c_d(x, y) − c_base(x', y')|` where `x', y'` are the pullbacks of
/// `x, y` to the base of an affine image. Biholomorphisms are isometries, so
/// this is zero up to rounding.
pub fn pullback_isometry_check(d: &Domain, x: &CPoint, y: &CPoint) -> Result<f64> {
    if !matches!(d, Domain::AffineDisk { .. } | Domain::AffineImage { .. }) {
        return Err(Error::Capability(format!(
            "pullback_isometry_check needs an affine image, got {}",
            d.kind_name()
        )));
    }
    let direct = d.caratheodory(x, y)?;
    let (base, px) = d.pullback(x)?;
    let (_, py) = d.pullback(y)?;
    let pulled = base.caratheodory(&px, &py)?;
    Ok((direct - pulled).abs())
}
