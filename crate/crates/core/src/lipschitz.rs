//! Empirical Lipschitz, co-Lipschitz and bi-Lipschitz estimation.
//!
//! Pair strategy: 70% uniform random pairs, 30% pairs with both
//! endpoints at radius >= 0.95 and separation <= 0.05, where harmonic
//! Lipschitz constants are typically attained. On top of the finite
//! pairs, the scan feeds in the local singular values sigma_max(x) and
//! sigma_min(x) at the plan points: these are limits of difference
//! ratios, so they are legitimate witnesses, and they make the reported
//! constants exact for constant-derivative maps. Reported constants are
//! lower bounds for L and upper bounds for the co-Lipschitz constant;
//! the scan never claims global suprema.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::{GradientMap, HarmonicMap};
use crate::sampling::{op, SamplingPlan};
use crate::vec::Vector;

/// A sampled pair with its difference ratio.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioPair {
    pub x: Vector,
    pub y: Vector,
    pub ratio: f64,
}

/// Result of a pair scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairScanResult {
    pub pair_count: usize,
    /// sup |f(x)-f(y)| / |x-y| over the scan (a lower bound for L).
    pub l_hat: f64,
    /// inf |f(x)-f(y)| / |x-y| over the scan (an upper bound for the
    /// co-Lipschitz constant).
    pub inv_hat: f64,
    pub max_pair: RatioPair,
    pub min_pair: RatioPair,
    /// counts over 32 equal bins spanning [inv_hat, l_hat].
    pub histogram: Vec<usize>,
}

const HISTOGRAM_BINS: usize = 32;

/// Difference-ratio scan; deterministic given the plan seed, and the
/// sup/inf are monotone in the pair count because sample streams are
/// indexed per pair.
pub fn lipschitz_scan(map: &HarmonicMap, plan: &SamplingPlan) -> Result<PairScanResult> {
    if plan.count < 2 {
        return Err(Error::Precondition("pair scan needs at least 2 samples".into()));
    }
    let n = map.dim();
    let uniform_pairs = (plan.count * 7) / 10;
    let near_pairs = plan.count - uniform_pairs;

    let mut ratios: Vec<RatioPair> = Vec::with_capacity(plan.count);
    for i in 0..uniform_pairs {
        let x = plan.point(n, op::LIPSCHITZ, 2 * i);
        let y = plan.point(n, op::LIPSCHITZ, 2 * i + 1);
        if x.dist(&y) < 1e-12 {
            continue;
        }
        let ratio = map.evaluate(&x)?.dist(&map.evaluate(&y)?) / x.dist(&y);
        ratios.push(RatioPair { x, y, ratio });
    }
    // near-boundary close pairs: both endpoints at radius >= 0.95,
    // separation <= 0.05
    let near_plan = SamplingPlan::near_boundary(near_pairs, plan.seed)
        .with_max_radius(plan.max_radius);
    let band = 0.95 * plan.max_radius..plan.max_radius;
    for i in 0..near_pairs {
        let x = near_plan.point(n, op::LIPSCHITZ_NEAR, 2 * i);
        let offset = near_plan
            .point(n, op::LIPSCHITZ_NEAR, 2 * i + 1)
            .normalized()?
            .scale(0.025 * (1.0 + (i % 2) as f64));
        let mut y = x.add(&offset);
        if !band.contains(&y.norm()) {
            y = x.sub(&offset);
        }
        if !band.contains(&y.norm()) || x.dist(&y) < 1e-12 {
            continue;
        }
        let ratio = map.evaluate(&x)?.dist(&map.evaluate(&y)?) / x.dist(&y);
        ratios.push(RatioPair { x, y, ratio });
    }
    // local (infinitesimal) witnesses from the jets at the plan points
    for i in 0..plan.count {
        let x = plan.point(n, op::LIPSCHITZ, i);
        let jet = map.jet(&x, false)?;
        ratios.push(RatioPair {
            y: x.clone(),
            x: x.clone(),
            ratio: jet.sigma_max(),
        });
        ratios.push(RatioPair {
            y: x.clone(),
            x,
            ratio: jet.sigma_min(),
        });
    }

    let mut l_hat = f64::NEG_INFINITY;
    let mut inv_hat = f64::INFINITY;
    let mut max_pair = ratios[0].clone();
    let mut min_pair = ratios[0].clone();
    for r in &ratios {
        if r.ratio > l_hat {
            l_hat = r.ratio;
            max_pair = r.clone();
        }
        if r.ratio < inv_hat {
            inv_hat = r.ratio;
            min_pair = r.clone();
        }
    }
    let span = (l_hat - inv_hat).max(f64::MIN_POSITIVE);
    let mut histogram = vec![0usize; HISTOGRAM_BINS];
    for r in &ratios {
        let bin = (((r.ratio - inv_hat) / span) * HISTOGRAM_BINS as f64) as usize;
        histogram[bin.min(HISTOGRAM_BINS - 1)] += 1;
    }
    Ok(PairScanResult {
        pair_count: ratios.len(),
        l_hat,
        inv_hat,
        max_pair,
        min_pair,
        histogram,
    })
}

/// Certificate that a 3D gradient map has strictly positive Hessian
/// determinant over the sample set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradientCertificate {
    pub samples: usize,
    pub passed: bool,
    pub inf_jacobian: f64,
    pub inf_point: Vector,
    /// present when the certificate failed: first sample with J <= 0.
    pub failure_point: Option<Vector>,
}

/// Verifies J = det H_u > 0 at all samples; a zero crossing fails the
/// certificate and names the point (the fixture is then not a
/// homeomorphic gradient map on the ball).
pub fn gradient_map_certificate(
    map: &GradientMap,
    plan: &SamplingPlan,
) -> Result<GradientCertificate> {
    if map.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: map.dim(),
        });
    }
    let mut inf_j = f64::INFINITY;
    let mut inf_point = Vector::zeros(3);
    for i in 0..plan.count {
        let x = plan.point(3, op::CERTIFICATE, i);
        let jet = map.map().jet(&x, false)?;
        if jet.jacobian <= 0.0 {
            return Ok(GradientCertificate {
                samples: i + 1,
                passed: false,
                inf_jacobian: jet.jacobian,
                inf_point: x.clone(),
                failure_point: Some(x),
            });
        }
        if jet.jacobian < inf_j {
            inf_j = jet.jacobian;
            inf_point = x;
        }
    }
    Ok(GradientCertificate {
        samples: plan.count,
        passed: true,
        inf_jacobian: inf_j,
        inf_point,
        failure_point: None,
    })
}
