//! Domains, boundary distances, the hyperbolic metric of the ball, and
//! Mobius automorphisms used for normalization.
//!
//! All values are immutable after construction and every operation is a
//! pure function, so concurrent use needs no coordination.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec::Vector;

/// A closed half-space face `<normal, x> <= offset` of a polytope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub normal: Vector,
    pub offset: f64,
}

/// Supported domains. Every kind is convex; dimension is carried
/// explicitly and mixing dimensions is a hard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainSpec {
    UnitBall { n: usize },
    Ball { center: Vector, radius: f64 },
    /// Interior { x : <normal, x> > offset }; the normal is unit length.
    HalfSpace { normal: Vector, offset: f64 },
    /// Intersection of faces; must be used with interior points only.
    ConvexPolytope { n: usize, faces: Vec<Face> },
    /// Axis-aligned, centered at the origin.
    Ellipsoid { semi_axes: Vec<f64> },
}

impl DomainSpec {
    pub fn unit_ball(n: usize) -> Self {
        DomainSpec::UnitBall { n }
    }

    pub fn ellipsoid(semi_axes: Vec<f64>) -> Self {
        assert!(semi_axes.iter().all(|&a| a > 0.0));
        DomainSpec::Ellipsoid { semi_axes }
    }

    pub fn half_space(normal: Vector, offset: f64) -> Result<Self> {
        Ok(DomainSpec::HalfSpace {
            normal: normal.normalized()?,
            offset,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::UnitBall { n } => *n,
            DomainSpec::Ball { center, .. } => center.dim(),
            DomainSpec::HalfSpace { normal, .. } => normal.dim(),
            DomainSpec::ConvexPolytope { n, .. } => *n,
            DomainSpec::Ellipsoid { semi_axes } => semi_axes.len(),
        }
    }

    /// Every supported kind is convex.
    pub fn is_convex(&self) -> bool {
        true
    }

    pub fn contains(&self, x: &Vector) -> Result<bool> {
        x.check_dim(self.dim())?;
        Ok(match self {
            DomainSpec::UnitBall { .. } => x.norm() < 1.0,
            DomainSpec::Ball { center, radius } => x.dist(center) < *radius,
            DomainSpec::HalfSpace { normal, offset } => normal.dot(x) > *offset,
            DomainSpec::ConvexPolytope { faces, .. } => {
                faces.iter().all(|f| f.normal.dot(x) < f.offset)
            }
            DomainSpec::Ellipsoid { semi_axes } => {
                x.as_slice()
                    .iter()
                    .zip(semi_axes)
                    .map(|(c, a)| (c / a) * (c / a))
                    .sum::<f64>()
                    < 1.0
            }
        })
    }

    /// Euclidean distance from an interior point to the boundary.
    ///
    /// Exact for balls, half-spaces and polytopes (minimum over faces,
    /// valid for interior points of convex polytopes); solved numerically
    /// for ellipsoids via the one-dimensional Lagrange parameterization,
    /// root tolerance 1e-12.
    pub fn boundary_distance(&self, x: &Vector) -> Result<f64> {
        x.check_dim(self.dim())?;
        match self {
            DomainSpec::UnitBall { .. } => {
                let d = 1.0 - x.norm();
                if d < 0.0 {
                    return Err(Error::OutsideDomain(format!("|x| = {} >= 1", x.norm())));
                }
                Ok(d)
            }
            DomainSpec::Ball { center, radius } => {
                let d = radius - x.dist(center);
                if d < 0.0 {
                    return Err(Error::OutsideDomain(format!(
                        "|x - center| = {} >= radius {}",
                        x.dist(center),
                        radius
                    )));
                }
                Ok(d)
            }
            DomainSpec::HalfSpace { normal, offset } => {
                let d = normal.dot(x) - offset;
                if d < 0.0 {
                    return Err(Error::OutsideDomain(format!(
                        "<normal, x> = {} < offset {}",
                        normal.dot(x),
                        offset
                    )));
                }
                Ok(d)
            }
            DomainSpec::ConvexPolytope { faces, .. } => {
                if faces.is_empty() {
                    return Err(Error::Precondition("polytope has no faces".into()));
                }
                let mut best = f64::INFINITY;
                for (i, f) in faces.iter().enumerate() {
                    let d = (f.offset - f.normal.dot(x)) / f.normal.norm();
                    if d < 0.0 {
                        return Err(Error::OutsideDomain(format!(
                            "face {i} violated: <normal, x> = {} > offset {}",
                            f.normal.dot(x),
                            f.offset
                        )));
                    }
                    best = best.min(d);
                }
                Ok(best)
            }
            DomainSpec::Ellipsoid { semi_axes } => ellipsoid_boundary_distance(semi_axes, x),
        }
    }
}

/// Distance from an interior point to the boundary of the axis-aligned
/// ellipsoid sum (x_i / a_i)^2 = 1.
///
/// The nearest boundary point q satisfies q_i = a_i^2 p_i / (a_i^2 + t)
/// for a Lagrange parameter t; for interior points the relevant root of
/// sum (q_i / a_i)^2 = 1 lies in (-min a_i^2, 0] over the coordinates
/// where p_i != 0. Feet with q_k != 0 over zero coordinates p_k = 0 sit
/// at t = -a_k^2 and are enumerated separately; the distance is the
/// minimum over all feet.
fn ellipsoid_boundary_distance(semi_axes: &[f64], p: &Vector) -> Result<f64> {
    let level: f64 = p
        .as_slice()
        .iter()
        .zip(semi_axes)
        .map(|(c, a)| (c / a) * (c / a))
        .sum();
    if level >= 1.0 {
        return Err(Error::OutsideDomain(format!(
            "sum (x_i/a_i)^2 = {level} >= 1"
        )));
    }
    let min_axis = semi_axes.iter().cloned().fold(f64::INFINITY, f64::min);
    if p.norm() == 0.0 {
        return Ok(min_axis);
    }

    let a2: Vec<f64> = semi_axes.iter().map(|a| a * a).collect();
    let mut best = f64::INFINITY;

    // Regular branch: root of F(t) = sum_{p_i != 0} p_i^2 a_i^2 / (a_i^2 + t)^2 = 1
    // on (-min_{p_i != 0} a_i^2, 0]. F decreases from +inf to F(0) = level < 1.
    let lower_limit = p
        .as_slice()
        .iter()
        .zip(&a2)
        .filter(|(c, _)| **c != 0.0)
        .map(|(_, a)| *a)
        .fold(f64::INFINITY, f64::min);
    let f = |t: f64| -> f64 {
        p.as_slice()
            .iter()
            .zip(&a2)
            .map(|(c, a)| {
                let q = c * a / (a + t);
                q * q / a
            })
            .sum::<f64>()
            - 1.0
    };
    let mut lo = -lower_limit;
    let mut hi = 0.0;
    // Pull lo off the pole until F(lo) > 0.
    for _ in 0..200 {
        let mid = lo + 0.25 * (hi - lo);
        if f(mid) > 0.0 {
            lo = mid;
            break;
        }
        hi = mid;
    }
    // lo may still be at the pole; bisect on (lo, hi) where F(lo) > 0 > F(hi)
    let mut hi = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= 1e-15 * (1.0 + lo.abs()) {
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    let dist_sq: f64 = p
        .as_slice()
        .iter()
        .zip(&a2)
        .map(|(c, a)| {
            let diff = c * t / (a + t);
            diff * diff
        })
        .sum();
    best = best.min(dist_sq.sqrt());

    // Degenerate feet: for each distinct a_k^2 among zero coordinates,
    // t = -a_k^2 frees those coordinates.
    let mut seen: Vec<f64> = Vec::new();
    for (k, &ak2) in a2.iter().enumerate() {
        if p[k] != 0.0 || seen.iter().any(|&s| s == ak2) {
            continue;
        }
        seen.push(ak2);
        // components with p_i != 0 need a_i^2 != a_k^2
        if p
            .as_slice()
            .iter()
            .zip(&a2)
            .any(|(c, &ai2)| *c != 0.0 && ai2 == ak2)
        {
            continue;
        }
        let mut mass = 1.0;
        let mut dist_sq = 0.0;
        for (i, &ai2) in a2.iter().enumerate() {
            if p[i] != 0.0 {
                let q = p[i] * ai2 / (ai2 - ak2);
                mass -= q * q / ai2;
                dist_sq += (p[i] - q) * (p[i] - q);
            }
        }
        if mass >= 0.0 {
            // free coordinates with a_i^2 == a_k^2 share q^2 = a_k^2 * mass
            dist_sq += ak2 * mass;
            best = best.min(dist_sq.sqrt());
        }
    }

    Ok(best)
}

/// Poincare-ball hyperbolic distance,
/// arcosh(1 + 2|x-y|^2 / ((1-|x|^2)(1-|y|^2))).
pub fn hyperbolic_distance(x: &Vector, y: &Vector) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    let nx = x.norm_sq();
    let ny = y.norm_sq();
    if nx >= 1.0 || ny >= 1.0 {
        return Err(Error::OutsideDomain(
            "hyperbolic distance requires |x| < 1 and |y| < 1".into(),
        ));
    }
    let d2 = x.sub(y).norm_sq();
    let arg = 1.0 + 2.0 * d2 / ((1.0 - nx) * (1.0 - ny));
    // arcosh(a) = ln(a + sqrt(a^2 - 1))
    Ok((arg + (arg * arg - 1.0).max(0.0).sqrt()).ln())
}

/// Mobius automorphism of the unit ball taking a prescribed point to the
/// origin; the inverse is the transform anchored at -a.
#[derive(Debug, Clone, PartialEq)]
pub struct MobiusTransform {
    a: Vector,
}

/// Self-map T of the unit ball with T(a) = 0, smooth and invertible,
/// preserving the unit sphere.
pub fn mobius_to_origin(a: &Vector) -> Result<MobiusTransform> {
    if a.norm() >= 1.0 {
        return Err(Error::OutsideDomain(format!(
            "mobius anchor has |a| = {} >= 1",
            a.norm()
        )));
    }
    Ok(MobiusTransform { a: a.clone() })
}

impl MobiusTransform {
    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        let a = &self.a;
        x.check_dim(a.dim())?;
        let na = a.norm_sq();
        if na == 0.0 {
            return Ok(x.clone());
        }
        let diff = x.sub(a);
        let denom = 1.0 - 2.0 * x.dot(a) + x.norm_sq() * na;
        if denom.abs() < 1e-300 {
            return Err(Error::Singularity("mobius denominator vanished".into()));
        }
        // ((1-|a|^2)(x-a) - |x-a|^2 a) / (1 - 2<x,a> + |x|^2 |a|^2)
        let num = diff.scale(1.0 - na).sub(&a.scale(diff.norm_sq()));
        Ok(num.scale(1.0 / denom))
    }

    pub fn inverse(&self) -> MobiusTransform {
        MobiusTransform {
            a: self.a.scale(-1.0),
        }
    }

    pub fn anchor(&self) -> &Vector {
        &self.a
    }
}
