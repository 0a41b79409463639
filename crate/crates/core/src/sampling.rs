//! Deterministic sample generation.
//!
//! Every Monte Carlo draw in the toolkit comes from a counter-based
//! stream: the generator is keyed by (plan seed, operation id) and the
//! stream index is the sample index. Sample i is therefore the same
//! no matter how many samples are requested or in which order they are
//! consumed, which makes scans reproducible and sup/inf aggregates
//! monotone in the sample count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::vec::Vector;

/// Operation ids separating the random streams of different scans.
pub mod op {
    pub const DISTORTION: u64 = 1;
    pub const LP_NORM: u64 = 2;
    pub const DELTA: u64 = 3;
    pub const BLOCH: u64 = 4;
    pub const BLOCH_SUP_F: u64 = 5;
    pub const HARNACK: u64 = 6;
    pub const W_FIELD: u64 = 7;
    pub const ALPHA: u64 = 8;
    pub const SUPERHARMONIC: u64 = 9;
    pub const CHAIN: u64 = 10;
    pub const A_INFINITY: u64 = 11;
    pub const QH_PAIRS: u64 = 12;
    pub const LIPSCHITZ: u64 = 13;
    pub const LIPSCHITZ_NEAR: u64 = 14;
    pub const CERTIFICATE: u64 = 15;
    pub const GREEN: u64 = 16;
    pub const RIESZ: u64 = 17;
    pub const KOEBE: u64 = 18;
}

/// Default cap keeping samples strictly inside the open ball.
pub const DEFAULT_MAX_RADIUS: f64 = 1.0 - 1e-9;

fn stream_rng(seed: u64, operation: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ operation.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}

fn standard_normal(rng: &mut ChaCha8Rng) -> (f64, f64) {
    // Box-Muller; u1 in (0,1]
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    (r * th.cos(), r * th.sin())
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    loop {
        let mut coords = Vec::with_capacity(n);
        while coords.len() < n {
            let (a, b) = standard_normal(rng);
            coords.push(a);
            if coords.len() < n {
                coords.push(b);
            }
        }
        let v = Vector::new(coords);
        let norm = v.norm();
        if norm > 1e-12 {
            return v.scale(1.0 / norm);
        }
    }
}

/// Point sampling strategy inside the ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleStrategy {
    /// Uniform with respect to volume over B(0, max_radius).
    UniformBall,
    /// Radius stratified: sample i draws its radius from the i-th of
    /// `count` equal-volume shells, directions uniform.
    RadialStratified,
    /// Radii in [0.95, 1) x max_radius, where Lipschitz and Bloch
    /// extremes concentrate.
    NearBoundary,
}

/// Reproducible sample plan: identical plans generate identical samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub strategy: SampleStrategy,
    pub count: usize,
    pub seed: u64,
    pub max_radius: f64,
}

impl SamplingPlan {
    pub fn uniform(count: usize, seed: u64) -> Self {
        Self {
            strategy: SampleStrategy::UniformBall,
            count,
            seed,
            max_radius: DEFAULT_MAX_RADIUS,
        }
    }

    pub fn near_boundary(count: usize, seed: u64) -> Self {
        Self {
            strategy: SampleStrategy::NearBoundary,
            count,
            seed,
            max_radius: DEFAULT_MAX_RADIUS,
        }
    }

    pub fn with_max_radius(mut self, r: f64) -> Self {
        assert!(r > 0.0 && r < 1.0, "max_radius must lie in (0, 1)");
        self.max_radius = r;
        self
    }

    /// The i-th sample point in R^n. Pure function of
    /// (plan, operation, i).
    pub fn point(&self, n: usize, operation: u64, i: usize) -> Vector {
        let mut rng = stream_rng(self.seed, operation, i as u64);
        let dir = random_direction(&mut rng, n);
        let u: f64 = rng.gen();
        let r = match self.strategy {
            SampleStrategy::UniformBall => self.max_radius * u.powf(1.0 / n as f64),
            SampleStrategy::RadialStratified => {
                let stratum = (i as f64 + u) / self.count.max(1) as f64;
                self.max_radius * stratum.powf(1.0 / n as f64)
            }
            SampleStrategy::NearBoundary => self.max_radius * (0.95 + 0.05 * u),
        };
        dir.scale(r)
    }

    pub fn points(&self, n: usize, operation: u64) -> Vec<Vector> {
        (0..self.count).map(|i| self.point(n, operation, i)).collect()
    }
}

/// Quadrature configuration for averages over balls B(z, r).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallQuadrature {
    pub mode: QuadMode,
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadMode {
    MonteCarlo,
    ProductRule,
}

/// A quadrature value with its error estimate (standard error for Monte
/// Carlo, order-doubling difference for product rules).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Compensated (Kahan) accumulator; keeps long Monte Carlo sums at
/// machine precision so error floors stay meaningful.
#[derive(Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl BallQuadrature {
    pub fn monte_carlo(count: usize, seed: u64) -> Self {
        Self {
            mode: QuadMode::MonteCarlo,
            count,
            seed,
        }
    }

    pub fn product_rule(count: usize) -> Self {
        Self {
            mode: QuadMode::ProductRule,
            count,
            seed: 0,
        }
    }

    /// The i-th Monte Carlo node, uniform over B(center, radius).
    pub fn mc_node(&self, center: &Vector, radius: f64, operation: u64, i: usize) -> Vector {
        let n = center.dim();
        let mut rng = stream_rng(self.seed, operation, i as u64);
        let dir = random_direction(&mut rng, n);
        let u: f64 = rng.gen();
        let r = radius * u.powf(1.0 / n as f64);
        center.add(&dir.scale(r))
    }

    /// Mean of `f` over B(center, radius), with error estimate.
    pub fn ball_mean<F>(
        &self,
        center: &Vector,
        radius: f64,
        operation: u64,
        mut f: F,
    ) -> crate::error::Result<Estimate>
    where
        F: FnMut(&Vector) -> crate::error::Result<f64>,
    {
        match self.mode {
            QuadMode::MonteCarlo => {
                let mut sum = KahanSum::default();
                let mut sum_sq = KahanSum::default();
                let count = self.count.max(2);
                for i in 0..count {
                    let x = self.mc_node(center, radius, operation, i);
                    let v = f(&x)?;
                    sum.add(v);
                    sum_sq.add(v * v);
                }
                let nf = count as f64;
                let mean = sum.value() / nf;
                let var = ((sum_sq.value() / nf - mean * mean).max(0.0)) / (nf - 1.0);
                Ok(Estimate {
                    value: mean,
                    error: var.sqrt(),
                })
            }
            QuadMode::ProductRule => {
                let order = self.product_order(center.dim());
                let fine = self.product_mean(center, radius, order, &mut f)?;
                let coarse = self.product_mean(center, radius, (order / 2).max(1), &mut f)?;
                Ok(Estimate {
                    value: fine,
                    error: (fine - coarse).abs() + 1e-14 * (1.0 + fine.abs()),
                })
            }
        }
    }

    /// Two means over the same node set; used where an inequality between
    /// the two averages must hold discretely, not just in expectation.
    pub fn ball_mean_pair<F>(
        &self,
        center: &Vector,
        radius: f64,
        operation: u64,
        mut f: F,
    ) -> crate::error::Result<(Estimate, Estimate)>
    where
        F: FnMut(&Vector) -> crate::error::Result<(f64, f64)>,
    {
        match self.mode {
            QuadMode::MonteCarlo => {
                let count = self.count.max(2);
                let mut acc = [KahanSum::default(); 4];
                for i in 0..count {
                    let x = self.mc_node(center, radius, operation, i);
                    let (a, b) = f(&x)?;
                    acc[0].add(a);
                    acc[1].add(a * a);
                    acc[2].add(b);
                    acc[3].add(b * b);
                }
                let nf = count as f64;
                let est = |s: f64, sq: f64| {
                    let mean = s / nf;
                    let var = ((sq / nf - mean * mean).max(0.0)) / (nf - 1.0);
                    Estimate {
                        value: mean,
                        error: var.sqrt(),
                    }
                };
                Ok((
                    est(acc[0].value(), acc[1].value()),
                    est(acc[2].value(), acc[3].value()),
                ))
            }
            QuadMode::ProductRule => {
                // the node sequence of ball_mean is deterministic, so the
                // second pass replays the cached first coordinates
                let mut first = Vec::new();
                let second = self.ball_mean(center, radius, operation, |x| {
                    let (a, b) = f(x)?;
                    first.push(a);
                    Ok(b)
                })?;
                let mut idx = 0;
                let first_mean = self.ball_mean(center, radius, operation, |_| {
                    let v = first[idx];
                    idx += 1;
                    Ok(v)
                })?;
                Ok((first_mean, second))
            }
        }
    }

    fn product_order(&self, n: usize) -> usize {
        // radial order m with roughly m * |sphere rule(m)| = count
        let m = match n {
            2 => ((self.count as f64).sqrt() / 2.0).ceil() as usize,
            _ => ((self.count as f64) / 8.0).powf(1.0 / 3.0).ceil() as usize,
        };
        m.max(2)
    }

    fn product_mean<F>(
        &self,
        center: &Vector,
        radius: f64,
        order: usize,
        f: &mut F,
    ) -> crate::error::Result<f64>
    where
        F: FnMut(&Vector) -> crate::error::Result<f64>,
    {
        let n = center.dim();
        // mean over the ball = n/R^n * int_0^R mean_sphere(r) r^{n-1} dr
        let (gl_nodes, gl_weights) = crate::quad::gauss_legendre(order);
        let sphere = crate::quad::SphereRule::new(n, (2 * order).max(4));
        let mut acc = 0.0;
        for (t, w) in gl_nodes.iter().zip(&gl_weights) {
            let r = radius * 0.5 * (t + 1.0);
            let mean_r = sphere.mean(center, r, &mut *f)?;
            // jacobian of the [-1,1] -> [0,R] map is R/2
            acc += w * (radius * 0.5) * mean_r * r.powi(n as i32 - 1);
        }
        Ok(acc * n as f64 / radius.powi(n as i32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plans_are_reproducible_and_prefix_stable() {
        let plan = SamplingPlan::uniform(64, 7);
        let a = plan.points(3, op::DISTORTION);
        let b = plan.points(3, op::DISTORTION);
        assert_eq!(a, b);
        let longer = SamplingPlan::uniform(128, 7);
        for i in 0..64 {
            assert_eq!(a[i], longer.point(3, op::DISTORTION, i));
        }
    }

    #[test]
    fn operations_get_distinct_streams() {
        let plan = SamplingPlan::uniform(4, 7);
        assert_ne!(plan.point(2, op::DISTORTION, 0), plan.point(2, op::DELTA, 0));
    }

    #[test]
    fn samples_stay_inside_max_radius() {
        let plan = SamplingPlan::near_boundary(256, 3).with_max_radius(0.999);
        for p in plan.points(2, op::BLOCH) {
            let r = p.norm();
            assert!(r < 0.999 && r >= 0.9 * 0.999);
        }
    }

    #[test]
    fn radial_stratification_covers_the_shells() {
        let count = 64;
        let plan = SamplingPlan {
            strategy: SampleStrategy::RadialStratified,
            count,
            seed: 5,
            max_radius: 1.0 - 1e-9,
        };
        for (i, p) in plan.points(2, op::DISTORTION).iter().enumerate() {
            // sample i lives in the i-th equal-volume shell
            let lo = (i as f64 / count as f64).sqrt();
            let hi = ((i as f64 + 1.0) / count as f64).sqrt();
            let r = p.norm();
            assert!(r >= lo - 1e-12 && r <= hi + 1e-12, "sample {i} at radius {r}");
        }
    }

    #[test]
    fn mc_ball_mean_of_constant_is_exact() {
        let quad = BallQuadrature::monte_carlo(512, 11);
        let z = Vector::zeros(3);
        let est = quad.ball_mean(&z, 0.5, op::ALPHA, |_| Ok(2.5)).unwrap();
        assert!((est.value - 2.5).abs() < 1e-14);
        assert!(est.error < 1e-14);
    }

    #[test]
    fn product_ball_mean_of_radius_squared() {
        // mean of |x|^2 over B(0,R) in R^3 is 3R^2/5
        let quad = BallQuadrature::product_rule(4096);
        let z = Vector::zeros(3);
        let est = quad.ball_mean(&z, 0.8, op::ALPHA, |x| Ok(x.norm_sq())).unwrap();
        assert!((est.value - 3.0 * 0.64 / 5.0).abs() < 1e-10);
    }

    #[test]
    fn mc_ball_mean_matches_closed_form() {
        let quad = BallQuadrature::monte_carlo(200_000, 5);
        let z = Vector::zeros(2);
        // mean of |x|^2 over B(0,1) in R^2 is 1/2
        let est = quad.ball_mean(&z, 1.0, op::ALPHA, |x| Ok(x.norm_sq())).unwrap();
        assert!((est.value - 0.5).abs() < 5.0 * est.error);
        assert!(est.error < 1e-2);
    }
}
