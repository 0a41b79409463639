//! The averaged derivative alpha_f, the Koebe-type distance ratio,
//! superharmonicity testing of log-Jacobian quantities, and the 2D/3D
//! inequality chains built on them.
//!
//! The averaging region is always B_z = B(z, d(z, bd domain)) with the
//! distance taken in the declared source domain. Monte Carlo nodes are
//! deterministic given the quadrature seed; sphere means use product
//! rules because Monte Carlo noise would mask small superharmonicity
//! slacks. A Jacobian at or below 1e-14 at any node aborts with a
//! degeneracy error naming the node: a clamped logarithm would silently
//! destroy the meaning of the tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::harmonic::{GradientMap, HarmonicMap};
use crate::sampling::{op, BallQuadrature};
use crate::vec::Vector;

/// Jacobian cutoff below which averaging aborts.
pub const DEGENERACY_CUTOFF: f64 = 1e-14;

/// alpha_f(z) with the standard error inherited from the ball mean of
/// log J.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub value: f64,
    /// standard error of alpha (delta method).
    pub error: f64,
    /// ball mean of log J and its standard error.
    pub mean_log_j: f64,
    pub mean_log_j_error: f64,
    /// radius of the averaging ball B_z.
    pub radius: f64,
}

fn log_jacobian(map: &HarmonicMap, x: &Vector) -> Result<f64> {
    let jet = map.jet(x, false)?;
    if jet.jacobian <= DEGENERACY_CUTOFF {
        return Err(Error::Degenerate(format!(
            "jacobian {:.3e} at node {x} is at or below the 1e-14 cutoff",
            jet.jacobian
        )));
    }
    Ok(jet.jacobian.ln())
}

/// Geometric average derivative
/// alpha_f(z) = exp( (1/n) mean of log J_f over B_z ).
pub fn alpha(
    map: &HarmonicMap,
    z: &Vector,
    domain: &DomainSpec,
    quad: &BallQuadrature,
) -> Result<AlphaEstimate> {
    let n = map.dim();
    z.check_dim(n)?;
    let radius = domain.boundary_distance(z)?;
    if radius <= 0.0 {
        return Err(Error::Precondition(format!(
            "averaging ball degenerate: d(z, boundary) = {radius}"
        )));
    }
    let mean = quad.ball_mean(z, radius, op::ALPHA, |x| log_jacobian(map, x))?;
    let value = (mean.value / n as f64).exp();
    // rounding floor: a quadrature error estimate below machine precision
    // would understate the uncertainty of the exponentiated mean
    let error = value * (mean.error / n as f64 + 1e-15);
    Ok(AlphaEstimate {
        value,
        error,
        mean_log_j: mean.value,
        mean_log_j_error: mean.error,
        radius,
    })
}

/// Koebe-type ratio alpha_f(z) d(z, bd source) / d(f(z), bd target); the
/// sup and inf of this over a scan witness the distortion-only constant.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KoebeRatio {
    pub ratio: f64,
    pub alpha: f64,
    pub dist_source: f64,
    pub dist_target: f64,
}

pub fn koebe_ratio(
    map: &HarmonicMap,
    z: &Vector,
    source: &DomainSpec,
    target: &DomainSpec,
    quad: &BallQuadrature,
) -> Result<KoebeRatio> {
    let a = alpha(map, z, source, quad)?;
    let fz = map.evaluate(z)?;
    if !target.contains(&fz)? {
        return Err(Error::Range(format!(
            "f(z) = {fz} lies outside the target domain"
        )));
    }
    let dist_source = a.radius;
    let dist_target = target.boundary_distance(&fz)?;
    Ok(KoebeRatio {
        ratio: a.value * dist_source / dist_target,
        alpha: a.value,
        dist_source,
        dist_target,
    })
}

/// Slack of the reverse mean-value inequality at one radius.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SuperharmonicSlack {
    pub radius: f64,
    /// scalar(z) - spherical mean on S(z, r); superharmonicity predicts
    /// this to be >= 0.
    pub slack: f64,
    /// order-doubling quadrature error estimate for the mean.
    pub quad_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuperharmonicityReport {
    pub center_value: f64,
    pub slacks: Vec<SuperharmonicSlack>,
    pub min_slack: f64,
    pub max_quad_error: f64,
}

/// Reverse mean-value test: min over the radii of
/// scalar(z) - mean_{S(z,r)} scalar. Spheres must stay inside the
/// domain; product quadrature of the given polar order is doubled for
/// the error estimate.
pub fn superharmonicity_check<F>(
    scalar: F,
    z: &Vector,
    radii: &[f64],
    order: usize,
    domain: &DomainSpec,
) -> Result<SuperharmonicityReport>
where
    F: Fn(&Vector) -> Result<f64>,
{
    if radii.is_empty() {
        return Err(Error::Precondition("superharmonicity check needs radii".into()));
    }
    let n = z.dim();
    let d = domain.boundary_distance(z)?;
    for &r in radii {
        if r <= 0.0 || r >= d {
            return Err(Error::Precondition(format!(
                "sphere of radius {r} exits the domain (d(z, boundary) = {d})"
            )));
        }
    }
    let rule = crate::quad::SphereRule::new(n, order);
    let rule_fine = crate::quad::SphereRule::new(n, order * 2);
    let center_value = scalar(z)?;
    let mut slacks = Vec::with_capacity(radii.len());
    let mut min_slack = f64::INFINITY;
    let mut max_err = 0.0f64;
    for &r in radii {
        let coarse = rule.mean(z, r, &scalar)?;
        let fine = rule_fine.mean(z, r, &scalar)?;
        let quad_error = (fine - coarse).abs() + 1e-13 * (1.0 + fine.abs());
        let slack = center_value - fine;
        min_slack = min_slack.min(slack);
        max_err = max_err.max(quad_error);
        slacks.push(SuperharmonicSlack {
            radius: r,
            slack,
            quad_error,
        });
    }
    Ok(SuperharmonicityReport {
        center_value,
        slacks,
        min_slack,
        max_quad_error: max_err,
    })
}

/// log J_f as a scalar field, with the degeneracy cutoff applied.
pub fn log_jacobian_field(map: &HarmonicMap) -> impl Fn(&Vector) -> Result<f64> + '_ {
    move |x| log_jacobian(map, x)
}

/// log det H_u for a gradient map (the Jacobian of the gradient map is
/// the Hessian determinant of the potential).
pub fn log_hessian_det_field(map: &GradientMap) -> impl Fn(&Vector) -> Result<f64> + '_ {
    move |x| log_jacobian(map.map(), x)
}

/// 2D chain report: sigma_max^2 >= J >= alpha^2 plus the empirical
/// constant alpha / d(f(0), bd target) from the last link of the chain.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Chain2dReport {
    pub sigma_max_sq: f64,
    pub jacobian: f64,
    pub alpha_sq: f64,
    /// error estimate for alpha^2.
    pub alpha_sq_error: f64,
    /// sigma_max^2 - J; exact pointwise algebra, >= 0.
    pub first_slack: f64,
    /// J - alpha^2; superharmonicity of log J up to quadrature error.
    pub second_slack: f64,
    /// alpha(z) / d(f(0), bd target); divide by the distortion convention
    /// of your choice to witness the co-Lipschitz constant.
    pub alpha_over_dist0: f64,
}

pub fn chain_check_2d(
    map: &HarmonicMap,
    z: &Vector,
    domain: &DomainSpec,
    target: &DomainSpec,
    quad: &BallQuadrature,
) -> Result<Chain2dReport> {
    if map.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: map.dim(),
        });
    }
    let a = alpha(map, z, domain, quad)?;
    let jet = map.jet(z, false)?;
    if jet.jacobian <= DEGENERACY_CUTOFF {
        return Err(Error::Degenerate(format!(
            "jacobian {:.3e} at z = {z}",
            jet.jacobian
        )));
    }
    let f0 = map.evaluate(&Vector::zeros(2))?;
    let dist0 = target.boundary_distance(&f0)?;
    let sigma_max_sq = jet.sigma_max() * jet.sigma_max();
    let alpha_sq = a.value * a.value;
    Ok(Chain2dReport {
        sigma_max_sq,
        jacobian: jet.jacobian,
        alpha_sq,
        alpha_sq_error: 2.0 * a.value * a.error,
        first_slack: sigma_max_sq - jet.jacobian,
        second_slack: jet.jacobian - alpha_sq,
        alpha_over_dist0: a.value / dist0,
    })
}

/// 3D gradient-map chain report:
/// alpha^3 <= J <= (sup K_outer)^2 sigma_min^3.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Chain3dReport {
    pub alpha_cubed: f64,
    /// error estimate for alpha^3.
    pub alpha_cubed_error: f64,
    pub jacobian: f64,
    pub sigma_min_cubed: f64,
    pub sup_k_outer: f64,
    /// J - alpha^3.
    pub first_slack: f64,
    /// (sup K_outer)^2 sigma_min^3 - J.
    pub second_slack: f64,
}

/// The 3D chain for gradient maps; `sup_k_outer` is the supremum of the
/// outer distortion from a distortion scan of the same map.
pub fn chain_check_3d_gradient(
    map: &GradientMap,
    z: &Vector,
    domain: &DomainSpec,
    quad: &BallQuadrature,
    sup_k_outer: f64,
) -> Result<Chain3dReport> {
    if map.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: map.dim(),
        });
    }
    let a = alpha(map.map(), z, domain, quad)?;
    let jet = map.map().jet(z, false)?;
    if jet.jacobian <= DEGENERACY_CUTOFF {
        return Err(Error::Degenerate(format!(
            "hessian determinant {:.3e} at z = {z}",
            jet.jacobian
        )));
    }
    let alpha_cubed = a.value.powi(3);
    let sigma_min_cubed = jet.sigma_min().powi(3);
    Ok(Chain3dReport {
        alpha_cubed,
        alpha_cubed_error: 3.0 * a.value * a.value * a.error,
        jacobian: jet.jacobian,
        sigma_min_cubed,
        sup_k_outer,
        first_slack: jet.jacobian - alpha_cubed,
        second_slack: sup_k_outer * sup_k_outer * sigma_min_cubed - jet.jacobian,
    })
}

/// Jensen comparison of the geometric mean of J with its p-th power
/// mean: alpha^n / (mean of J^p over B_z)^(1/p). Equals 1 exactly for
/// constant Jacobians and is <= 1 otherwise.
///
/// Both means run over the same quadrature nodes, so the discrete Jensen
/// inequality binds the ratio at 1 up to rounding, not up to Monte Carlo
/// noise.
pub fn a_infinity_ratio(
    map: &HarmonicMap,
    z: &Vector,
    p: f64,
    domain: &DomainSpec,
    quad: &BallQuadrature,
) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Precondition(format!("p = {p} must lie in (0, 1]")));
    }
    let radius = domain.boundary_distance(z)?;
    if radius <= 0.0 {
        return Err(Error::Precondition(format!(
            "averaging ball degenerate: d(z, boundary) = {radius}"
        )));
    }
    // alpha^n = exp(mean log J); the dimension cancels out of the ratio
    let (mean_log, mean_pow) = quad.ball_mean_pair(z, radius, op::A_INFINITY, |x| {
        let j = map.jet(x, false)?.jacobian;
        if j <= DEGENERACY_CUTOFF {
            return Err(Error::Degenerate(format!(
                "jacobian {j:.3e} at node {x} is at or below the 1e-14 cutoff"
            )));
        }
        Ok((j.ln(), j.powf(p)))
    })?;
    Ok(mean_log.value.exp() / mean_pow.value.powf(1.0 / p))
}
