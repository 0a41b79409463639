//! Quadrature building blocks: Gauss-Legendre nodes, sphere rules, and
//! ball volumes.
//!
//! Sphere rules return mean weights (they sum to 1), so the weighted sum
//! of samples is the spherical average directly.

use std::f64::consts::PI;

use crate::vec::Vector;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on
/// the Legendre polynomial. Weights sum to 2.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        // Chebyshev-like initial guess
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(m, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Surface area of the unit sphere S^{n-1} in R^n.
pub fn sphere_area(n: usize) -> f64 {
    // 2 pi^{n/2} / Gamma(n/2)
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half_integer(n)
}

/// Volume of the unit ball B^n.
pub fn ball_volume(n: usize) -> f64 {
    sphere_area(n) / n as f64
}

/// Gamma(n/2) for integer n >= 1.
fn gamma_half_integer(n: usize) -> f64 {
    // Gamma(1/2) = sqrt(pi), Gamma(1) = 1, Gamma(x+1) = x Gamma(x)
    let mut val = if n % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut x = if n % 2 == 0 { 1.0 } else { 0.5 };
    while 2.0 * x < n as f64 {
        val *= x;
        x += 1.0;
    }
    val
}

/// A quadrature rule on the unit sphere S^{n-1}: unit direction nodes and
/// mean weights summing to 1.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub nodes: Vec<Vector>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// Product rule: trapezoid on S^1, Gauss-Legendre (polar) x uniform
    /// (azimuth) on S^2. `order` is the polar order for n = 3 and the
    /// node count for n = 2; the azimuthal count is 2 x order.
    pub fn new(n: usize, order: usize) -> Self {
        assert!(order >= 1);
        match n {
            2 => {
                let m = order;
                let w = 1.0 / m as f64;
                let mut nodes = Vec::with_capacity(m);
                for j in 0..m {
                    let th = 2.0 * PI * j as f64 / m as f64;
                    nodes.push(Vector::new(vec![th.cos(), th.sin()]));
                }
                Self {
                    nodes,
                    weights: vec![w; m],
                }
            }
            3 => {
                let (gl_nodes, gl_weights) = gauss_legendre(order);
                let m_az = 2 * order;
                let mut nodes = Vec::with_capacity(order * m_az);
                let mut weights = Vec::with_capacity(order * m_az);
                for (c, wp) in gl_nodes.iter().zip(&gl_weights) {
                    let s = (1.0 - c * c).max(0.0).sqrt();
                    // GL weights sum to 2 = the measure of [-1,1]; the mean
                    // over the sphere divides that out.
                    let w = wp / 2.0 / m_az as f64;
                    for j in 0..m_az {
                        let th = 2.0 * PI * j as f64 / m_az as f64;
                        nodes.push(Vector::new(vec![s * th.cos(), s * th.sin(), *c]));
                        weights.push(w);
                    }
                }
                Self { nodes, weights }
            }
            _ => panic!("sphere rules implemented for n = 2, 3"),
        }
    }

    /// Mean of `f` over the sphere of radius `r` about `center`.
    pub fn mean<F>(&self, center: &Vector, r: f64, mut f: F) -> crate::error::Result<f64>
    where
        F: FnMut(&Vector) -> crate::error::Result<f64>,
    {
        let mut acc = 0.0;
        for (node, w) in self.nodes.iter().zip(&self.weights) {
            let x = center.add(&node.scale(r));
            acc += w * f(&x)?;
        }
        Ok(acc)
    }
}
