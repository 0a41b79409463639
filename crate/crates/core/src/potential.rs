//! Green's function of the unit ball, Green and Riesz potentials, and
//! the integrability bootstrap for the uniform differential inequality
//! |lap w| <= a |grad w|^2 + b.
//!
//! Sign convention: G <= 0 on the ball so that w(x) = int G(x,y) h(y) dy
//! solves lap w = h with zero boundary values literally (textbook
//! kernels often carry the opposite sign). The normalization constant
//! c1(n) = 1 / area(S^{n-1}) is fixed by requiring the closed-form
//! gradient to match finite differences of G; the calibration is part of
//! the test suite rather than a trusted literature constant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{ball_volume, sphere_area};
use crate::sampling::{op, BallQuadrature, Estimate, QuadMode};
use crate::vec::Vector;

/// Kernel data for the ball Green's function in dimension n >= 2
/// (logarithmic in n = 2).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GreenKernel {
    pub n: usize,
    /// c1(n) = 1 / area(S^{n-1}).
    pub c1: f64,
}

impl GreenKernel {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Precondition("green kernel needs n >= 2".into()));
        }
        Ok(Self {
            n,
            c1: 1.0 / sphere_area(n),
        })
    }

    fn check_pair(&self, x: &Vector, y: &Vector) -> Result<()> {
        x.check_dim(self.n)?;
        y.check_dim(self.n)?;
        if x.norm() >= 1.0 || y.norm() >= 1.0 {
            return Err(Error::OutsideDomain(
                "green kernel arguments must lie in the open ball".into(),
            ));
        }
        if x.dist(y) <= 1e-12 {
            return Err(Error::Singularity(format!(
                "green kernel evaluated on the diagonal: |x - y| = {:.3e}",
                x.dist(y)
            )));
        }
        Ok(())
    }

    /// Distance to the reflected pole: |y| |x - y/|y|^2|, symmetric in
    /// x and y; equals 1 when either argument is 0.
    fn reflected_distance(x: &Vector, y: &Vector) -> f64 {
        (x.norm_sq() * y.norm_sq() - 2.0 * x.dot(y) + 1.0)
            .max(0.0)
            .sqrt()
    }

    /// G(x, y) with lap_x G = delta_y and zero boundary values; G <= 0 on
    /// the ball.
    pub fn green(&self, x: &Vector, y: &Vector) -> Result<f64> {
        self.check_pair(x, y)?;
        let rho = x.dist(y);
        let rho_star = Self::reflected_distance(x, y);
        Ok(if self.n == 2 {
            self.c1 * (rho / rho_star).ln()
        } else {
            let nm2 = self.n as f64 - 2.0;
            self.c1 / nm2 * (rho_star.powf(-nm2) - rho.powf(-nm2))
        })
    }

    /// Closed-form gradient in x:
    /// c1(n) [ (x-y)/|x-y|^n + |y|^n (y - |y|^2 x)/|y - |y|^2 x|^n ].
    pub fn green_gradient(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        self.check_pair(x, y)?;
        let diff = x.sub(y);
        let rho = diff.norm();
        let rho_star = Self::reflected_distance(x, y);
        let n = self.n as i32;
        // second term rewritten as (y - |y|^2 x) / rho_star^n, which stays
        // finite as y -> 0
        let mirror = y.sub(&x.scale(y.norm_sq()));
        Ok(diff
            .scale(rho.powi(-n))
            .add(&mirror.scale(rho_star.powi(-n)))
            .scale(self.c1))
    }
}

/// Convenience wrappers over a kernel constructed on the fly.
pub fn green(x: &Vector, y: &Vector) -> Result<f64> {
    GreenKernel::new(x.dim())?.green(x, y)
}

pub fn green_gradient(x: &Vector, y: &Vector) -> Result<Vector> {
    GreenKernel::new(x.dim())?.green_gradient(x, y)
}

/// Green potential w(x) = int_B G(x, y) h(y) dm(y).
///
/// Monte Carlo over the ball with a singularity patch: nodes within the
/// mean node spacing r0 of x are dropped and replaced by the analytic
/// integral of the kernel's leading singularity plus its regular part
/// over B(x, r0); the patch error is O(r0^2).
pub fn green_potential<F>(h: F, x: &Vector, quad: &BallQuadrature) -> Result<Estimate>
where
    F: Fn(&Vector) -> f64,
{
    let n = x.dim();
    let kernel = GreenKernel::new(n)?;
    if x.norm() >= 1.0 {
        return Err(Error::OutsideDomain("green potential point outside ball".into()));
    }
    if quad.mode != QuadMode::MonteCarlo {
        return Err(Error::Precondition(
            "green potential uses monte-carlo quadrature (singular integrand)".into(),
        ));
    }
    let vol = ball_volume(n);
    let count = quad.count.max(16);
    let r0 = (vol / count as f64).powf(1.0 / n as f64);
    let center = Vector::zeros(n);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for i in 0..count {
        let y = quad.mc_node(&center, 1.0, op::GREEN, i);
        let v = if y.dist(x) <= r0 {
            0.0
        } else {
            kernel.green(x, &y)? * h(&y)
        };
        sum += v;
        sum_sq += v * v;
    }
    let nf = count as f64;
    let mean = sum / nf;
    let var = ((sum_sq / nf - mean * mean).max(0.0)) / (nf - 1.0);
    let mc_value = vol * mean;
    let mc_error = vol * var.sqrt();

    // analytic patch over B(x, r0): leading singularity + regular part
    let hx = h(x);
    let rho_star_xx = 1.0 - x.norm_sq();
    let patch = if n == 2 {
        // int of c1 ln rho over B(x,r0) = r0^2 (2 ln r0 - 1) / 4 * (2 pi c1)
        let lead = 2.0 * std::f64::consts::PI * kernel.c1 * r0 * r0 * (2.0 * r0.ln() - 1.0) / 4.0;
        let regular = -kernel.c1 * rho_star_xx.ln() * ball_volume(2) * r0 * r0;
        hx * (lead + regular)
    } else {
        let nm2 = n as f64 - 2.0;
        // int of -c1/(n-2) rho^{2-n} over B(x,r0) = -r0^2 / (2 (n-2)) ... times h(x)
        let lead = -r0 * r0 / (2.0 * nm2);
        let regular = kernel.c1 / nm2 * rho_star_xx.powf(-nm2) * ball_volume(n) * r0.powi(n as i32);
        hx * (lead + regular)
    };
    Ok(Estimate {
        value: mc_value + patch,
        error: mc_error + r0 * r0,
    })
}

/// Riesz potential of order s: int_B h(y) |x - y|^{s - n} dm(y), with the
/// same singularity patch strategy as the Green potential.
pub fn riesz_potential<F>(s: f64, h: F, x: &Vector, quad: &BallQuadrature) -> Result<Estimate>
where
    F: Fn(&Vector) -> f64,
{
    let n = x.dim();
    if !(s > 0.0 && s < n as f64) {
        return Err(Error::Precondition(format!(
            "riesz order s = {s} must lie in (0, n = {n})"
        )));
    }
    if quad.mode != QuadMode::MonteCarlo {
        return Err(Error::Precondition(
            "riesz potential uses monte-carlo quadrature (singular integrand)".into(),
        ));
    }
    let vol = ball_volume(n);
    let count = quad.count.max(16);
    let r0 = (vol / count as f64).powf(1.0 / n as f64);
    let center = Vector::zeros(n);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for i in 0..count {
        let y = quad.mc_node(&center, 1.0, op::RIESZ, i);
        let d = y.dist(x);
        let v = if d <= r0 {
            0.0
        } else {
            h(&y) * d.powf(s - n as f64)
        };
        sum += v;
        sum_sq += v * v;
    }
    let nf = count as f64;
    let mean = sum / nf;
    let var = ((sum_sq / nf - mean * mean).max(0.0)) / (nf - 1.0);
    // patch: h(x) int_{B(x,r0)} |x-y|^{s-n} dm = h(x) area(S^{n-1}) r0^s / s
    let patch = h(x) * sphere_area(n) * r0.powf(s) / s;
    Ok(Estimate {
        value: vol * mean + patch,
        error: vol * var.sqrt() + r0 * r0,
    })
}

/// Trace of the integrability bootstrap p -> p n / (2n - p).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapTrace {
    pub n: usize,
    /// initial margin epsilon with p0 = n (1 + epsilon).
    pub epsilon: f64,
    /// exponent sequence starting at p0; strictly increasing, last entry
    /// > 2n when terminated.
    pub sequence: Vec<f64>,
    pub terminated: bool,
    /// set when an iterate hit 2n exactly and the start was nudged down.
    pub restarted: bool,
}

/// Iterates p_{l+1} = p_l n / (2n - p_l) from p0 in (n, 2n) until the
/// exponent exceeds 2n. An iterate landing on 2n (within 1e-9) would
/// blow up the next step, so the run restarts once from p0 (1 - 1e-6).
pub fn sobolev_bootstrap(n: usize, p0: f64) -> Result<BootstrapTrace> {
    let nf = n as f64;
    if !(p0 > nf && p0 < 2.0 * nf) {
        return Err(Error::Precondition(format!(
            "p0 = {p0} must lie in (n, 2n) = ({nf}, {})",
            2.0 * nf
        )));
    }
    let run = |start: f64| -> Option<Vec<f64>> {
        let mut seq = vec![start];
        let mut p = start;
        for _ in 0..10_000 {
            if p > 2.0 * nf {
                return Some(seq);
            }
            if (p - 2.0 * nf).abs() <= 1e-9 {
                return None; // degenerate: division by ~0 next step
            }
            p = p * nf / (2.0 * nf - p);
            seq.push(p);
        }
        Some(seq)
    };
    let (sequence, restarted) = match run(p0) {
        Some(seq) => (seq, false),
        None => {
            let nudged = p0 * (1.0 - 1e-6);
            match run(nudged) {
                Some(seq) => (seq, true),
                None => {
                    return Err(Error::Degenerate(
                        "bootstrap hit 2n exactly even after the restart nudge".into(),
                    ))
                }
            }
        }
    };
    let terminated = sequence.last().is_some_and(|&p| p > 2.0 * nf);
    Ok(BootstrapTrace {
        n,
        epsilon: p0 / nf - 1.0,
        sequence,
        terminated,
        restarted,
    })
}

/// One sample triple of the w-field used by the coefficient fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WFieldSample {
    pub point: Vector,
    pub w: f64,
    pub grad_norm: f64,
    pub laplacian: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientEstimate {
    /// minimal a with |lap w| <= a |grad w|^2 + b_hat over the samples.
    pub a_hat: f64,
    /// b fixed at max |lap w| over samples with |grad w| < 1.
    pub b_hat: f64,
    pub attaining_index: usize,
}

/// Extracts a feasible pair (a, b) for the uniform differential
/// inequality from sampled field data.
pub fn coefficient_estimate(samples: &[WFieldSample]) -> Result<CoefficientEstimate> {
    if samples.is_empty() {
        return Err(Error::Precondition("coefficient fit over empty sample set".into()));
    }
    let b_hat = samples
        .iter()
        .filter(|s| s.grad_norm < 1.0)
        .map(|s| s.laplacian.abs())
        .fold(0.0, f64::max);
    let mut a_hat = 0.0f64;
    let mut attaining = 0usize;
    for (i, s) in samples.iter().enumerate() {
        if s.grad_norm <= 0.0 {
            continue;
        }
        let excess = s.laplacian.abs() - b_hat;
        if excess > 0.0 {
            let a = excess / (s.grad_norm * s.grad_norm);
            if a > a_hat {
                a_hat = a;
                attaining = i;
            }
        }
    }
    Ok(CoefficientEstimate {
        a_hat,
        b_hat,
        attaining_index: attaining,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::SamplingPlan;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "expected {b}, got {a} (tol {tol})");
    }

    #[test]
    fn green_vanishes_toward_boundary() {
        let x = Vector::new(vec![1.0 - 1e-6, 0.0, 0.0]);
        let y = Vector::zeros(3);
        let g = green(&x, &y).unwrap();
        assert!(g.abs() < 1e-5, "boundary value {g}");
    }

    #[test]
    fn green_boundary_decay_is_linear_in_delta() {
        let plan = SamplingPlan::uniform(100, 3);
        let y = Vector::new(vec![0.2, -0.1, 0.3]);
        for i in 0..100 {
            let dir = plan.point(3, 95, i).normalized().unwrap();
            let g1 = green(&dir.scale(1.0 - 1e-3), &y).unwrap().abs();
            let g2 = green(&dir.scale(1.0 - 5e-4), &y).unwrap().abs();
            // halving delta roughly halves |G|
            assert!(g2 < 0.75 * g1, "no linear decay along {dir}: {g1} -> {g2}");
        }
    }

    #[test]
    fn green_is_symmetric() {
        let plan = SamplingPlan::uniform(200, 9).with_max_radius(0.95);
        let mut checked = 0;
        for pair in plan.points(3, 94).chunks(2) {
            let (x, y) = (&pair[0], &pair[1]);
            if x.dist(y) < 0.05 {
                continue;
            }
            let gxy = green(x, y).unwrap();
            let gyx = green(y, x).unwrap();
            assert!((gxy - gyx).abs() <= 1e-10 * gxy.abs().max(1e-3));
            checked += 1;
        }
        assert!(checked >= 80);
    }

    #[test]
    fn green_is_nonpositive_inside() {
        let plan = SamplingPlan::uniform(500, 21).with_max_radius(0.99);
        for pair in plan.points(3, 93).chunks(2) {
            if pair[0].dist(&pair[1]) < 1e-6 {
                continue;
            }
            assert!(green(&pair[0], &pair[1]).unwrap() <= 0.0);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let plan = SamplingPlan::uniform(400, 13).with_max_radius(0.9);
        let h = 1e-6;
        let mut checked = 0;
        let mut i = 0;
        while checked < 100 {
            let x = plan.point(3, op::GREEN, 2 * i);
            let y = plan.point(3, op::GREEN, 2 * i + 1);
            i += 1;
            if x.dist(&y) < 0.1 || x.norm() > 0.9 - 2.0 * h {
                continue;
            }
            let grad = green_gradient(&x, &y).unwrap();
            for k in 0..3 {
                let mut fwd = x.as_slice().to_vec();
                fwd[k] += h;
                let mut bwd = x.as_slice().to_vec();
                bwd[k] -= h;
                let fd = (green(&Vector::new(fwd), &y).unwrap()
                    - green(&Vector::new(bwd), &y).unwrap())
                    / (2.0 * h);
                let rel = (fd - grad[k]).abs() / (1.0 + grad[k].abs());
                assert!(rel < 1e-6, "component {k}: fd {fd} vs analytic {}", grad[k]);
            }
            checked += 1;
        }
    }

    #[test]
    fn gradient_bound_holds() {
        let kernel = GreenKernel::new(3).unwrap();
        let plan = SamplingPlan::uniform(2000, 17).with_max_radius(0.999);
        let mut checked = 0;
        for pair in plan.points(3, 92).chunks(2) {
            let (x, y) = (&pair[0], &pair[1]);
            if x.dist(y) < 1e-6 {
                continue;
            }
            let g = kernel.green_gradient(x, y).unwrap();
            let bound = 2.0 * kernel.c1 * y.dist(x).powi(1 - 3);
            assert!(g.norm() <= bound * (1.0 + 1e-12), "{} > {bound}", g.norm());
            checked += 1;
        }
        assert!(checked >= 900);
    }

    #[test]
    fn reflected_distance_inequality() {
        // |y| |x - y| <= |y - |y|^2 x| on 10^4 pairs, slack >= -1e-12
        let plan = SamplingPlan::uniform(20000, 23);
        for pair in plan.points(3, 91).chunks(2) {
            let (x, y) = (&pair[0], &pair[1]);
            let lhs = y.norm() * x.dist(y);
            let rhs = y.sub(&x.scale(y.norm_sq())).norm();
            assert!(rhs - lhs >= -1e-12, "lhs {lhs} rhs {rhs}");
        }
    }

    #[test]
    fn potential_of_constant_density() {
        // w = (|x|^2 - 1)/6 solves lap w = 1 on B^3 with zero boundary data
        let quad = BallQuadrature::monte_carlo(1 << 20, 42);
        let w0 = green_potential(|_| 1.0, &Vector::zeros(3), &quad).unwrap();
        assert_close(w0.value, -1.0 / 6.0, 1e-3);
        let w_half = green_potential(|_| 1.0, &Vector::new(vec![0.5, 0.0, 0.0]), &quad).unwrap();
        assert_close(w_half.value, -0.125, 1e-3);
    }

    #[test]
    fn potential_closed_form_at_twenty_points() {
        let quad = BallQuadrature::monte_carlo(1 << 18, 42);
        let plan = SamplingPlan::uniform(20, 31).with_max_radius(0.8);
        for i in 0..20 {
            let x = plan.point(3, 89, i);
            let w = green_potential(|_| 1.0, &x, &quad).unwrap();
            let expected = (x.norm_sq() - 1.0) / 6.0;
            assert_close(w.value, expected, 5e-3);
        }
    }

    #[test]
    fn potential_of_odd_density_vanishes_at_center() {
        let quad = BallQuadrature::monte_carlo(1 << 19, 7);
        let w = green_potential(|y| y[0], &Vector::zeros(3), &quad).unwrap();
        assert_close(w.value, 0.0, 1e-3);
    }

    #[test]
    fn riesz_radial_integrals() {
        let quad = BallQuadrature::monte_carlo(1 << 20, 42);
        // s = 2, n = 3: int |y|^{-1} dm = 2 pi
        let v = riesz_potential(2.0, |_| 1.0, &Vector::zeros(3), &quad).unwrap();
        assert_close(v.value, 2.0 * std::f64::consts::PI, 1e-2 * 6.28);
        // zero density
        let v = riesz_potential(1.5, |_| 0.0, &Vector::zeros(3), &quad).unwrap();
        assert_close(v.value, 0.0, 1e-12);
        // h = |y|, s = 1: kernel |y|^{s-n} = |y|^{-2}, so the integrand is
        // |y|^{-1} and the radial integral is again 2 pi
        let v = riesz_potential(1.0, |y: &Vector| y.norm(), &Vector::zeros(3), &quad).unwrap();
        assert_close(v.value, 2.0 * std::f64::consts::PI, 1e-2 * 6.28);
    }

    #[test]
    fn bootstrap_exact_rational_trace() {
        let trace = sobolev_bootstrap(3, 3.3).unwrap();
        assert!(trace.terminated);
        assert!(!trace.restarted);
        assert_eq!(trace.sequence.len(), 4);
        assert_close(trace.sequence[0], 3.3, 1e-15);
        assert_close(trace.sequence[1], 11.0 / 3.0, 1e-12);
        assert_close(trace.sequence[2], 33.0 / 7.0, 1e-12);
        assert_close(trace.sequence[3], 11.0, 1e-9);
        // doubling lower bound with epsilon = 0.1
        for (l, p) in trace.sequence.iter().enumerate() {
            assert!(*p > 3.0 * (1.0 + 0.1 * (1u64 << l) as f64) - 1e-9);
        }
    }

    #[test]
    fn bootstrap_monotone_and_short() {
        for &eps in &[0.05, 0.1, 0.2, 0.4] {
            let n = 3;
            let trace = sobolev_bootstrap(n, n as f64 * (1.0 + eps)).unwrap();
            assert!(trace.terminated);
            for w in trace.sequence.windows(2) {
                assert!(w[1] > w[0], "not strictly increasing: {w:?}");
            }
            let bound = (1.0 / eps).log2().ceil() as usize + 2;
            assert!(
                trace.sequence.len() <= bound + 1,
                "{} steps for eps {eps}, bound {bound}",
                trace.sequence.len()
            );
            assert!(*trace.sequence.last().unwrap() > 2.0 * n as f64);
        }
    }

    #[test]
    fn bootstrap_degenerate_start_restarts() {
        // p0 = 4, n = 3: p1 = 12 / 2 = 6 = 2n exactly
        let trace = sobolev_bootstrap(3, 4.0).unwrap();
        assert!(trace.restarted);
        assert!(trace.terminated);
        assert_close(trace.sequence[0], 4.0 * (1.0 - 1e-6), 1e-12);
        assert!(*trace.sequence.last().unwrap() > 6.0);
    }

    #[test]
    fn bootstrap_rejects_bad_start() {
        assert!(sobolev_bootstrap(3, 2.9).is_err());
        assert!(sobolev_bootstrap(3, 6.0).is_err());
        assert!(sobolev_bootstrap(3, 7.0).is_err());
    }

    #[test]
    fn coefficient_estimate_for_radial_w() {
        // w = 1 - |x|^2 on B^3: lap w = -6, |grad w| = 2|x|
        let plan = SamplingPlan::uniform(512, 3);
        let samples: Vec<WFieldSample> = (0..plan.count)
            .map(|i| {
                let x = plan.point(3, 88, i);
                WFieldSample {
                    w: 1.0 - x.norm_sq(),
                    grad_norm: 2.0 * x.norm(),
                    laplacian: -6.0,
                    point: x,
                }
            })
            .collect();
        let fit = coefficient_estimate(&samples).unwrap();
        assert_close(fit.b_hat, 6.0, 1e-12);
        assert_close(fit.a_hat, 0.0, 1e-12);
    }

    #[test]
    fn coefficient_estimate_rejects_empty() {
        assert!(coefficient_estimate(&[]).is_err());
    }
}
