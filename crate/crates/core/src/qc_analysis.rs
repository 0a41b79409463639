//! Pointwise and global quasiconformal analysis: distortion records, the
//! Lp norm of the derivative, the delta lower bound, Bloch ratios, the
//! Harnack chain, and the differential inequality satisfied by
//! w = 1 - |f|^2.
//!
//! Distortion conventions: the outer distortion sigma_max^n / J, the
//! inner distortion J / sigma_min^n and the linear dilatation
//! sigma_max / sigma_min are computed separately and never conflated;
//! every check documents which one it consumes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::harmonic::HarmonicMap;
use crate::poly::Polynomial;
use crate::quad::ball_volume;
use crate::sampling::{op, Estimate, SamplingPlan};
use crate::vec::Vector;

/// Distortion data at one sample point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistortionRecord {
    pub point: Vector,
    /// sigma_max^n / J
    pub k_outer: f64,
    /// J / sigma_min^n
    pub k_inner: f64,
    /// sigma_max / sigma_min
    pub linear_dilatation: f64,
    pub jacobian: f64,
}

/// Per-point records plus suprema over the scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistortionScan {
    pub records: Vec<DistortionRecord>,
    pub sup_k_outer: f64,
    pub sup_k_inner: f64,
    pub sup_linear_dilatation: f64,
    pub sup_jacobian: f64,
    pub inf_jacobian: f64,
}

/// Jets every plan point and distills distortion records. Fails loudly
/// with the offending point if the Jacobian is not strictly positive
/// anywhere in the sample.
pub fn distortion_scan(map: &HarmonicMap, plan: &SamplingPlan) -> Result<DistortionScan> {
    let n = map.dim();
    let mut records = Vec::with_capacity(plan.count);
    let mut sup_k_outer = f64::NEG_INFINITY;
    let mut sup_k_inner = f64::NEG_INFINITY;
    let mut sup_h = f64::NEG_INFINITY;
    let mut sup_j = f64::NEG_INFINITY;
    let mut inf_j = f64::INFINITY;
    for i in 0..plan.count {
        let x = plan.point(n, op::DISTORTION, i);
        let jet = map.jet(&x, false)?;
        if jet.jacobian <= 0.0 {
            return Err(Error::NonPositiveJacobian {
                jacobian: jet.jacobian,
                point: x.to_string(),
            });
        }
        let sig_max = jet.sigma_max();
        let sig_min = jet.sigma_min();
        let rec = DistortionRecord {
            k_outer: sig_max.powi(n as i32) / jet.jacobian,
            k_inner: jet.jacobian / sig_min.powi(n as i32),
            linear_dilatation: sig_max / sig_min,
            jacobian: jet.jacobian,
            point: x,
        };
        sup_k_outer = sup_k_outer.max(rec.k_outer);
        sup_k_inner = sup_k_inner.max(rec.k_inner);
        sup_h = sup_h.max(rec.linear_dilatation);
        sup_j = sup_j.max(rec.jacobian);
        inf_j = inf_j.min(rec.jacobian);
        records.push(rec);
    }
    Ok(DistortionScan {
        records,
        sup_k_outer,
        sup_k_inner,
        sup_linear_dilatation: sup_h,
        sup_jacobian: sup_j,
        inf_jacobian: inf_j,
    })
}

/// Monte Carlo estimate of the L^p norm of the operator norm of Df over
/// B(0, max_radius), with a delta-method standard error.
pub fn lp_norm_df(map: &HarmonicMap, p: f64, plan: &SamplingPlan) -> Result<Estimate> {
    if p <= 0.0 {
        return Err(Error::Precondition(format!("p = {p} must be positive")));
    }
    let n = map.dim();
    let vol = ball_volume(n) * plan.max_radius.powi(n as i32);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let count = plan.count.max(2);
    for i in 0..count {
        let x = plan.point(n, op::LP_NORM, i);
        let jet = map.jet(&x, false)?;
        let v = jet.sigma_max().powf(p);
        sum += v;
        sum_sq += v * v;
    }
    let nf = count as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0) / (nf - 1.0);
    let integral = vol * mean;
    let integral_err = vol * var.sqrt();
    let value = integral.powf(1.0 / p);
    let error = if integral > 0.0 {
        integral_err * value / (p * integral)
    } else {
        0.0
    };
    Ok(Estimate { value, error })
}

/// Result of the delta scan: the empirical infimum of 1 - |x| + |f(x)|.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaBound {
    pub inf: f64,
    pub attaining_point: Vector,
}

/// Empirical infimum of 1 - |x| + |f(x)| over the plan; a range error if
/// the map leaves the ball at any sample.
pub fn delta_bound(map: &HarmonicMap, plan: &SamplingPlan) -> Result<DeltaBound> {
    let n = map.dim();
    let mut inf = f64::INFINITY;
    let mut attaining = Vector::zeros(n);
    for i in 0..plan.count {
        let x = plan.point(n, op::DELTA, i);
        let fx = map.evaluate(&x)?;
        if fx.norm() >= 1.0 {
            return Err(Error::Range(format!(
                "|f(x)| = {} >= 1 at x = {x}; map does not send the ball into itself",
                fx.norm()
            )));
        }
        let v = 1.0 - x.norm() + fx.norm();
        if v < inf {
            inf = v;
            attaining = x;
        }
    }
    Ok(DeltaBound {
        inf,
        attaining_point: attaining,
    })
}

/// Result of the Bloch scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlochRatio {
    /// sup over the scan of (1 - |x|) sigma_max(x) / sup|f|; an empirical
    /// lower witness for the dimensional constant.
    pub sup_ratio: f64,
    /// sup of the un-normalized numerator (1 - |x|) sigma_max(x).
    pub sup_numerator: f64,
    /// sup|f| estimated on a boundary-stratified sample at radius
    /// 1 - 1e-4; an under-estimate, making the ratio an over-estimate.
    pub sup_f_norm: f64,
    pub attaining_point: Vector,
}

/// Bloch-type gradient bound witness. The scan includes the origin,
/// where the ratio peaks for the constant-derivative fixtures.
pub fn bloch_ratio(map: &HarmonicMap, plan: &SamplingPlan) -> Result<BlochRatio> {
    let n = map.dim();
    let boundary_radius = 1.0 - 1e-4;
    let mut sup_f: f64 = 0.0;
    for i in 0..plan.count.max(512) {
        let dir = plan.point(n, op::BLOCH_SUP_F, i).normalized()?;
        let fx = map.evaluate(&dir.scale(boundary_radius))?;
        sup_f = sup_f.max(fx.norm());
    }
    if sup_f == 0.0 {
        return Err(Error::Degenerate(
            "zero map has no Bloch ratio (sup|f| = 0)".into(),
        ));
    }
    let mut sup_num = f64::NEG_INFINITY;
    let mut attaining = Vector::zeros(n);
    for i in 0..=plan.count {
        // sample index plan.count is the origin
        let x = if i == plan.count {
            Vector::zeros(n)
        } else {
            plan.point(n, op::BLOCH, i)
        };
        let jet = map.jet(&x, false)?;
        let v = (1.0 - x.norm()) * jet.sigma_max();
        if v > sup_num {
            sup_num = v;
            attaining = x;
        }
    }
    Ok(BlochRatio {
        sup_ratio: sup_num / sup_f,
        sup_numerator: sup_num,
        sup_f_norm: sup_f,
        attaining_point: attaining,
    })
}

/// Harnack chain report: slack of
/// d(f(z), bd target) >= (1-|z|)/(1+|z|)^(n-1) * d(f(0), bd target)
/// at every sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarnackReport {
    pub samples: usize,
    pub min_slack: f64,
    pub worst_point: Vector,
    pub dist_f0: f64,
}

pub fn harnack_chain_check(
    map: &HarmonicMap,
    target: &DomainSpec,
    plan: &SamplingPlan,
) -> Result<HarnackReport> {
    if !target.is_convex() {
        return Err(Error::Precondition("harnack chain needs a convex target".into()));
    }
    let n = map.dim();
    if target.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: target.dim(),
        });
    }
    let f0 = map.evaluate(&Vector::zeros(n))?;
    if !target.contains(&f0)? {
        return Err(Error::Range(format!("f(0) = {f0} lies outside the target")));
    }
    let dist_f0 = target.boundary_distance(&f0)?;
    let mut min_slack = f64::INFINITY;
    let mut worst = Vector::zeros(n);
    for i in 0..plan.count {
        let z = plan.point(n, op::HARNACK, i);
        let fz = map.evaluate(&z)?;
        if !target.contains(&fz)? {
            return Err(Error::Range(format!(
                "f(z) = {fz} lies outside the target at z = {z}"
            )));
        }
        let lhs = target.boundary_distance(&fz)?;
        let r = z.norm();
        let rhs = (1.0 - r) / (1.0 + r).powi(n as i32 - 1) * dist_f0;
        let slack = lhs - rhs;
        if slack < min_slack {
            min_slack = slack;
            worst = z;
        }
    }
    Ok(HarnackReport {
        samples: plan.count,
        min_slack,
        worst_point: worst,
        dist_f0,
    })
}

/// Pointwise record of the w = 1 - |f|^2 field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WFieldPoint {
    pub point: Vector,
    pub f_norm: f64,
    pub sigma_max: f64,
    pub grad_w_norm: f64,
    pub lap_w: f64,
    /// 2 |f| sigma_max - |grad w|; exact operator-norm inequality, >= 0.
    pub upper_slack: f64,
    /// |grad w| - 2 |f| sigma_max / H with H the linear dilatation.
    pub lower_slack: f64,
    /// relative defect of lap w = -2 ||Df||_HS^2.
    pub identity_defect: f64,
}

/// Report of the w-field scan: the sandwich slacks, the exact Laplacian
/// identity defect, and a fitted uniform differential inequality
/// |lap w| <= a |grad w|^2 + b.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WFieldReport {
    pub points: Vec<WFieldPoint>,
    pub min_upper_slack: f64,
    pub min_lower_slack: f64,
    pub max_identity_defect: f64,
    /// smallest feasible a given b_hat.
    pub a_hat: f64,
    /// b fixed by the Bloch term: 4 n^2 B^2 / delta^2 where B is the
    /// scan sup of (1-|x|) sigma_max and delta the empirical delta bound.
    pub b_hat: f64,
    pub delta: f64,
}

/// Exact w-field analysis. Requires components with polynomial form so
/// the Laplacian of w is coefficient-exact.
pub fn w_field_inequality(map: &HarmonicMap, plan: &SamplingPlan) -> Result<WFieldReport> {
    let n = map.dim();
    let polys = map.component_polys().ok_or_else(|| {
        Error::Capability(
            "w-field analysis needs exact jets (polynomial or exact-lift components)".into(),
        )
    })?;
    // w = 1 - sum f_j^2, lap w = -2 sum |grad f_j|^2 for harmonic f
    let mut w_poly = Polynomial::constant(n, 1.0);
    for p in &polys {
        w_poly = w_poly.add(&p.mul(p).scale(-1.0));
    }
    let lap_w_poly = w_poly.laplacian();

    let mut points = Vec::with_capacity(plan.count);
    let mut min_upper = f64::INFINITY;
    let mut min_lower = f64::INFINITY;
    let mut max_defect: f64 = 0.0;
    let mut sup_bloch_num = 0.0f64;
    let mut delta = f64::INFINITY;
    for i in 0..plan.count {
        let x = plan.point(n, op::W_FIELD, i);
        let jet = map.jet(&x, false)?;
        let f_norm = jet.value.norm();
        let sigma_max = jet.sigma_max();
        let h_dil = sigma_max / jet.sigma_min();
        // grad w = -2 Df^t f, exact
        let grad_w = jet.derivative.transpose_mul_vec(jet.value.as_slice()).scale(-2.0);
        let grad_w_norm = grad_w.norm();
        let lap_w = lap_w_poly.eval_vec(&x);
        let hs = jet.hs_norm_sq();
        let identity_defect = (lap_w + 2.0 * hs).abs() / (2.0 * hs).max(f64::MIN_POSITIVE);
        let upper_slack = 2.0 * f_norm * sigma_max - grad_w_norm;
        let lower_slack = grad_w_norm - 2.0 * f_norm * sigma_max / h_dil;
        min_upper = min_upper.min(upper_slack);
        min_lower = min_lower.min(lower_slack);
        max_defect = max_defect.max(identity_defect);
        sup_bloch_num = sup_bloch_num.max((1.0 - x.norm()) * sigma_max);
        delta = delta.min(1.0 - x.norm() + f_norm);
        points.push(WFieldPoint {
            point: x,
            f_norm,
            sigma_max,
            grad_w_norm,
            lap_w,
            upper_slack,
            lower_slack,
            identity_defect,
        });
    }
    let n2 = (n * n) as f64;
    let b_hat = 4.0 * n2 * sup_bloch_num * sup_bloch_num / (delta * delta);
    let mut a_hat = 0.0f64;
    for p in &points {
        let excess = p.lap_w.abs() - b_hat;
        if excess > 0.0 && p.grad_w_norm > 0.0 {
            a_hat = a_hat.max(excess / (p.grad_w_norm * p.grad_w_norm));
        }
    }
    Ok(WFieldReport {
        points,
        min_upper_slack: min_upper,
        min_lower_slack: min_lower,
        max_identity_defect: max_defect,
        a_hat,
        b_hat,
        delta,
    })
}
