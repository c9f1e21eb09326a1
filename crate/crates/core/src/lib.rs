//! Invariant distances on model complex domains and the fixed-point theory
//! they support.
//!
//! * [`metric`]: Poincaré distance, disk automorphisms, careful `atanh`
//!   and the convexity inequality `atanh(r tanh x) ≤ r x`.
//! * [`domains`]: disks, polydisks and affine images with exact
//!   Carathéodory distances, membership and seeded sampling.
//! * [`holomaps`]: holomorphic maps as an expression tree.
//! * [`contraction`]: diameter `M` of a nested domain, `k = tanh M`, and
//!   checks of `c_X ≤ k · c_U`.
//! * [`fixed_point`]: iteration of maps with relatively compact image,
//!   with a-posteriori error bounds.
//! * [`cli`], [`report`]: the `cmetric` command-line front end.

pub mod cli;
pub mod contraction;
pub mod domains;
pub mod error;
pub mod fixed_point;
pub mod holomaps;
pub mod metric;
pub mod report;

pub use contraction::{ContractionCertificate, Method, NestingReport};
pub use domains::{CPoint, Domain, SampleStream, Sampling};
pub use error::{Error, Result};
pub use fixed_point::{FixedPointProblem, FixedPointResult};
pub use holomaps::HoloMap;
pub use metric::Complex;
