//! Harmonic maps of the ball: exact harmonic-polynomial components and
//! Poisson-kernel extensions of boundary data.
//!
//! Trigonometric boundary data in the plane is lifted once, at
//! construction, to its exact interior harmonic polynomial, so
//! differentiation stays coefficient-exact; kernel quadrature is kept
//! only for tabulated boundary samples. Constructors validate
//! harmonicity and reject bad input instead of projecting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::SmallMatrix;
use crate::poly::{Exponents, Polynomial};
use crate::quad::SphereRule;
use crate::vec::Vector;

/// Relative tolerance on the Laplacian coefficient residual.
const HARMONICITY_TOL: f64 = 1e-12;

/// A polynomial certified harmonic at construction: applying the exact
/// coefficient-level Laplacian leaves nothing above 1e-12 of the largest
/// input coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicPolynomial {
    poly: Polynomial,
}

impl HarmonicPolynomial {
    pub fn new(poly: Polynomial) -> Result<Self> {
        let lap = poly.laplacian();
        let residual = lap.max_abs_coefficient();
        let scale = poly.max_abs_coefficient().max(f64::MIN_POSITIVE);
        if residual > HARMONICITY_TOL * scale {
            return Err(Error::NotHarmonic { residual });
        }
        Ok(Self { poly })
    }

    pub fn from_terms(n: usize, terms: Vec<(Exponents, f64)>) -> Result<Self> {
        Self::new(Polynomial::new(n, terms))
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn dim(&self) -> usize {
        self.poly.dim()
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        self.poly.eval_vec(x)
    }

    /// Partial derivatives of harmonic polynomials are harmonic.
    pub fn derivative(&self, i: usize) -> HarmonicPolynomial {
        HarmonicPolynomial {
            poly: self.poly.derivative(i),
        }
    }
}

/// Trigonometric boundary data on the circle:
/// constant + sum_k (cos_k cos k theta + sin_k sin k theta).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierBoundary {
    pub constant: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierBoundary {
    /// Exact harmonic lift: r^k cos k theta and r^k sin k theta as
    /// polynomials in (x, y), built by the complex-power recursion.
    pub fn lift(&self) -> Result<HarmonicPolynomial> {
        let x = Polynomial::coordinate(2, 0);
        let y = Polynomial::coordinate(2, 1);
        let mut acc = Polynomial::constant(2, self.constant);
        let mut re = Polynomial::constant(2, 1.0);
        let mut im = Polynomial::zero(2);
        let order = self.cos.len().max(self.sin.len());
        if order > crate::poly::MAX_SPEC_EXPONENT as usize {
            return Err(Error::Precondition(format!(
                "fourier order {order} exceeds the polynomial degree cap {}",
                crate::poly::MAX_SPEC_EXPONENT
            )));
        }
        for k in 1..=order {
            let new_re = x.mul(&re).add(&y.mul(&im).scale(-1.0));
            let new_im = x.mul(&im).add(&y.mul(&re));
            re = new_re;
            im = new_im;
            if let Some(&a) = self.cos.get(k - 1) {
                acc = acc.add(&re.scale(a));
            }
            if let Some(&b) = self.sin.get(k - 1) {
                acc = acc.add(&im.scale(b));
            }
        }
        HarmonicPolynomial::new(acc)
    }
}

/// Tabulated boundary samples with quadrature weights; weights sum to 1
/// so the weighted sum is the spherical mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereTable {
    pub nodes: Vec<Vector>,
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
}

impl SphereTable {
    fn validate(&self, n: usize) -> Result<()> {
        if self.nodes.len() != self.weights.len() || self.nodes.len() != self.values.len() {
            return Err(Error::Precondition(
                "sphere table lengths disagree".into(),
            ));
        }
        if self.nodes.len() < 4 {
            return Err(Error::Precondition("sphere table too small".into()));
        }
        for node in &self.nodes {
            node.check_dim(n)?;
            if (node.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::Precondition(format!(
                    "sphere table node off the unit sphere: |node| = {}",
                    node.norm()
                )));
            }
        }
        let w: f64 = self.weights.iter().sum();
        if (w - 1.0).abs() > 1e-9 {
            return Err(Error::Precondition(format!(
                "sphere table weights sum to {w}, expected 1"
            )));
        }
        Ok(())
    }

    /// Every-other-node subsample with renormalized weights, used as the
    /// coarse rule behind error estimates for user-supplied tables.
    fn halved(&self) -> SphereTable {
        let idx: Vec<usize> = (0..self.nodes.len()).step_by(2).collect();
        let mut wsum = 0.0;
        for &i in &idx {
            wsum += self.weights[i];
        }
        SphereTable {
            nodes: idx.iter().map(|&i| self.nodes[i].clone()).collect(),
            weights: idx.iter().map(|&i| self.weights[i] / wsum).collect(),
            values: idx.iter().map(|&i| self.values[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum PoissonData {
    /// Exact interior lift of trigonometric boundary data (n = 2).
    ExactLift {
        boundary: FourierBoundary,
        lift: HarmonicPolynomial,
    },
    /// Kernel quadrature against a fine table, with a coarse table for
    /// order-doubling error estimates.
    Quadrature { fine: SphereTable, coarse: SphereTable },
}

/// Harmonic extension of boundary data into the ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonExtensionField {
    n: usize,
    data: PoissonData,
}

/// Default boundary quadrature orders: 2^12 trapezoid nodes on the
/// circle; 64-point Gauss-Legendre polar rule (x 128 azimuthal) on the
/// sphere.
pub const DEFAULT_CIRCLE_ORDER: usize = 1 << 12;
pub const DEFAULT_SPHERE_ORDER: usize = 64;

impl PoissonExtensionField {
    pub fn from_fourier(boundary: FourierBoundary) -> Result<Self> {
        let lift = boundary.lift()?;
        Ok(Self {
            n: 2,
            data: PoissonData::ExactLift { boundary, lift },
        })
    }

    /// Sample a boundary function onto quadrature tables at the default
    /// order and twice the default order.
    pub fn from_boundary_fn_default<F>(n: usize, f: F) -> Result<Self>
    where
        F: Fn(&Vector) -> f64,
    {
        let order = if n == 2 {
            DEFAULT_CIRCLE_ORDER
        } else {
            DEFAULT_SPHERE_ORDER
        };
        Self::from_boundary_fn(n, order, f)
    }

    /// Sample a boundary function onto product quadrature tables at the
    /// given order and twice the order.
    pub fn from_boundary_fn<F>(n: usize, order: usize, f: F) -> Result<Self>
    where
        F: Fn(&Vector) -> f64,
    {
        if n != 2 && n != 3 {
            return Err(Error::Precondition("poisson fields support n = 2, 3".into()));
        }
        let table = |order: usize| {
            let rule = SphereRule::new(n, order);
            SphereTable {
                values: rule.nodes.iter().map(&f).collect(),
                nodes: rule.nodes,
                weights: rule.weights,
            }
        };
        Ok(Self {
            n,
            data: PoissonData::Quadrature {
                fine: table(order * 2),
                coarse: table(order),
            },
        })
    }

    pub fn from_table(n: usize, table: SphereTable) -> Result<Self> {
        table.validate(n)?;
        let coarse = table.halved();
        Ok(Self {
            n,
            data: PoissonData::Quadrature { fine: table, coarse },
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// The interior polynomial when the data admits an exact lift.
    pub fn poly_form(&self) -> Option<&Polynomial> {
        match &self.data {
            PoissonData::ExactLift { lift, .. } => Some(lift.poly()),
            PoissonData::Quadrature { .. } => None,
        }
    }

    pub fn fourier_data(&self) -> Option<&FourierBoundary> {
        match &self.data {
            PoissonData::ExactLift { boundary, .. } => Some(boundary),
            _ => None,
        }
    }

    pub fn table_data(&self) -> Option<&SphereTable> {
        match &self.data {
            PoissonData::Quadrature { fine, .. } => Some(fine),
            _ => None,
        }
    }

    fn check_interior(&self, x: &Vector) -> Result<()> {
        x.check_dim(self.n)?;
        if x.norm() >= 1.0 {
            return Err(Error::OutsideDomain(format!(
                "|x| = {} >= 1 for a poisson extension",
                x.norm()
            )));
        }
        Ok(())
    }

    /// Value with an attached quadrature error estimate (0 in exact-lift
    /// mode).
    pub fn value_with_error(&self, x: &Vector) -> Result<(f64, f64)> {
        self.check_interior(x)?;
        match &self.data {
            PoissonData::ExactLift { lift, .. } => Ok((lift.eval(x), 0.0)),
            PoissonData::Quadrature { fine, coarse } => {
                let vf = kernel_sum(self.n, fine, x);
                let vc = kernel_sum(self.n, coarse, x);
                Ok((vf, (vf - vc).abs()))
            }
        }
    }

    /// Gradient of the extension; closed-form kernel gradient in
    /// quadrature mode.
    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        self.check_interior(x)?;
        match &self.data {
            PoissonData::ExactLift { lift, .. } => Ok(Vector::new(
                (0..self.n)
                    .map(|i| lift.poly().derivative(i).eval_vec(x))
                    .collect(),
            )),
            PoissonData::Quadrature { fine, .. } => {
                let mut grad = vec![0.0; self.n];
                let nx = x.norm_sq();
                for ((node, w), v) in fine.nodes.iter().zip(&fine.weights).zip(&fine.values) {
                    let diff = node.sub(x);
                    let dist_sq = diff.norm_sq();
                    let dist_n = dist_sq.powf(self.n as f64 / 2.0);
                    // grad_x P = -2x / |x-z|^n + n (1-|x|^2)(z-x) / |x-z|^{n+2}
                    let c1 = -2.0 / dist_n;
                    let c2 = self.n as f64 * (1.0 - nx) / (dist_n * dist_sq);
                    for i in 0..self.n {
                        grad[i] += w * v * (c1 * x[i] + c2 * diff[i]);
                    }
                }
                Ok(Vector::new(grad))
            }
        }
    }
}

/// Poisson kernel sum over a table; weights are already mean weights, so
/// the kernel needs no surface-area normalization.
fn kernel_sum(n: usize, table: &SphereTable, x: &Vector) -> f64 {
    let nx = x.norm_sq();
    let mut acc = 0.0;
    for ((node, w), v) in table.nodes.iter().zip(&table.weights).zip(&table.values) {
        let dist = node.sub(x).norm();
        acc += w * v * (1.0 - nx) / dist.powi(n as i32);
    }
    acc
}

/// Harmonic extension of boundary data evaluated at an interior point.
///
/// Exact-lift mode is coefficient-exact; quadrature mode attaches an
/// order-doubling error estimate and fails with an accuracy error when
/// the estimate exceeds 1e-6.
pub fn poisson_extend(field: &PoissonExtensionField, x: &Vector) -> Result<f64> {
    let (value, err) = field.value_with_error(x)?;
    if err > 1e-6 {
        return Err(Error::Accuracy(format!(
            "poisson quadrature error estimate {err:.3e} exceeds 1e-6 at maximum order"
        )));
    }
    Ok(value)
}

/// One coordinate function of a harmonic map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Component {
    Polynomial(HarmonicPolynomial),
    Poisson(PoissonExtensionField),
}

impl Component {
    pub fn dim(&self) -> usize {
        match self {
            Component::Polynomial(p) => p.dim(),
            Component::Poisson(p) => p.dim(),
        }
    }

    /// The exact polynomial form, when one exists.
    pub fn poly_form(&self) -> Option<&Polynomial> {
        match self {
            Component::Polynomial(p) => Some(p.poly()),
            Component::Poisson(p) => p.poly_form(),
        }
    }

    pub fn value_with_error(&self, x: &Vector) -> Result<(f64, f64)> {
        match self {
            Component::Polynomial(p) => {
                check_open_ball(x)?;
                Ok((p.eval(x), 0.0))
            }
            Component::Poisson(p) => p.value_with_error(x),
        }
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        Ok(self.value_with_error(x)?.0)
    }

    /// Harmonicity certificate: exactly zero for polynomial-backed
    /// components (the constructor already checked the coefficients);
    /// a central finite-difference Laplacian with step 1e-3 for
    /// quadrature fields.
    pub fn laplacian_residual(&self, x: &Vector) -> Result<f64> {
        if let Some(_poly) = self.poly_form() {
            check_open_ball(x)?;
            x.check_dim(self.dim())?;
            return Ok(0.0);
        }
        let h = 1e-3;
        if x.norm() + h >= 1.0 {
            return Err(Error::OutsideDomain(
                "finite-difference stencil leaves the ball".into(),
            ));
        }
        let n = self.dim();
        let center = self.value(x)?;
        let mut lap = 0.0;
        for i in 0..n {
            let mut fwd = x.clone().as_slice().to_vec();
            fwd[i] += h;
            let mut bwd = x.clone().as_slice().to_vec();
            bwd[i] -= h;
            lap += (self.value(&Vector::new(fwd))? - 2.0 * center
                + self.value(&Vector::new(bwd))?)
                / (h * h);
        }
        Ok(lap)
    }
}

fn check_open_ball(x: &Vector) -> Result<()> {
    if x.norm() >= 1.0 {
        return Err(Error::OutsideDomain(format!(
            "|x| = {} >= 1; maps are defined on the open unit ball",
            x.norm()
        )));
    }
    Ok(())
}

/// Pointwise data of a map: value, derivative, singular values, Jacobian
/// determinant and (optionally) the component Hessians.
#[derive(Debug, Clone)]
pub struct Jet {
    pub point: Vector,
    pub value: Vector,
    pub derivative: SmallMatrix,
    /// Sorted descending.
    pub singular_values: Vec<f64>,
    pub jacobian: f64,
    pub hessians: Option<Vec<SmallMatrix>>,
}

impl Jet {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values[0]
    }

    pub fn sigma_min(&self) -> f64 {
        *self.singular_values.last().unwrap()
    }

    /// Squared Hilbert-Schmidt norm of the derivative.
    pub fn hs_norm_sq(&self) -> f64 {
        self.derivative.frobenius_sq()
    }
}

/// A map of the ball with harmonic coordinate functions.
#[derive(Debug, Clone)]
pub struct HarmonicMap {
    n: usize,
    components: Vec<Component>,
    declared_k: Option<f64>,
    /// grad_polys[c][i] = d component_c / d x_i, when every component has
    /// an exact polynomial form.
    grad_polys: Option<Vec<Vec<Polynomial>>>,
    /// hess_polys[c][i * n + j], same condition.
    hess_polys: Option<Vec<Vec<Polynomial>>>,
}

impl HarmonicMap {
    pub fn new(components: Vec<Component>, declared_k: Option<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Precondition("map needs at least one component".into()));
        }
        let n = components[0].dim();
        if components.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: components.len(),
            });
        }
        for c in &components {
            if c.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: c.dim(),
                });
            }
        }
        if let Some(k) = declared_k {
            if !(k >= 1.0) {
                return Err(Error::Precondition(format!(
                    "declared distortion bound K = {k} must be >= 1"
                )));
            }
        }
        let polys: Option<Vec<&Polynomial>> =
            components.iter().map(|c| c.poly_form()).collect();
        let (grad_polys, hess_polys) = match polys {
            Some(ps) => {
                let grads: Vec<Vec<Polynomial>> = ps
                    .iter()
                    .map(|p| (0..n).map(|i| p.derivative(i)).collect())
                    .collect();
                let hess: Vec<Vec<Polynomial>> = grads
                    .iter()
                    .map(|g| {
                        let mut hs = Vec::with_capacity(n * n);
                        for i in 0..n {
                            for j in 0..n {
                                hs.push(g[i].derivative(j));
                            }
                        }
                        hs
                    })
                    .collect();
                (Some(grads), Some(hess))
            }
            None => (None, None),
        };
        Ok(Self {
            n,
            components,
            declared_k,
            grad_polys,
            hess_polys,
        })
    }

    pub fn from_polynomials(polys: Vec<HarmonicPolynomial>, declared_k: Option<f64>) -> Result<Self> {
        Self::new(polys.into_iter().map(Component::Polynomial).collect(), declared_k)
    }

    pub fn identity(n: usize) -> Self {
        let comps = (0..n)
            .map(|i| Component::Polynomial(HarmonicPolynomial::new(Polynomial::coordinate(n, i)).unwrap()))
            .collect();
        Self::new(comps, Some(1.0)).unwrap()
    }

    /// f(x) = A x.
    pub fn linear(a: &SmallMatrix) -> Result<Self> {
        let n = a.dim();
        let comps = (0..n)
            .map(|i| {
                let mut p = Polynomial::zero(n);
                for j in 0..n {
                    p = p.add(&Polynomial::coordinate(n, j).scale(a.get(i, j)));
                }
                Ok(Component::Polynomial(HarmonicPolynomial::new(p)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps, None)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn declared_k(&self) -> Option<f64> {
        self.declared_k
    }

    /// Exact polynomial forms of all components, when available.
    pub fn component_polys(&self) -> Option<Vec<&Polynomial>> {
        self.components.iter().map(|c| c.poly_form()).collect()
    }

    pub fn evaluate(&self, x: &Vector) -> Result<Vector> {
        x.check_dim(self.n)?;
        check_open_ball(x)?;
        let mut out = Vec::with_capacity(self.n);
        for c in &self.components {
            out.push(c.value(x)?);
        }
        Ok(Vector::new(out))
    }

    /// Value plus the largest component quadrature error estimate.
    pub fn evaluate_with_error(&self, x: &Vector) -> Result<(Vector, f64)> {
        x.check_dim(self.n)?;
        check_open_ball(x)?;
        let mut out = Vec::with_capacity(self.n);
        let mut worst = 0.0f64;
        for c in &self.components {
            let (v, e) = c.value_with_error(x)?;
            out.push(v);
            worst = worst.max(e);
        }
        Ok((Vector::new(out), worst))
    }

    /// Pointwise derivative data. Derivatives and Hessians are exact
    /// coefficient-level derivatives for polynomial-backed components;
    /// Hessians of pure quadrature components are a capability error.
    pub fn jet(&self, x: &Vector, with_hessian: bool) -> Result<Jet> {
        x.check_dim(self.n)?;
        check_open_ball(x)?;
        let value = self.evaluate(x)?;
        let mut derivative = SmallMatrix::zeros(self.n);
        match &self.grad_polys {
            Some(grads) => {
                for (c, row) in grads.iter().enumerate() {
                    for (i, g) in row.iter().enumerate() {
                        derivative.set(c, i, g.eval_vec(x));
                    }
                }
            }
            None => {
                for (c, comp) in self.components.iter().enumerate() {
                    let grad = match comp {
                        Component::Polynomial(p) => Vector::new(
                            (0..self.n).map(|i| p.poly().derivative(i).eval_vec(x)).collect(),
                        ),
                        Component::Poisson(p) => p.gradient(x)?,
                    };
                    for i in 0..self.n {
                        derivative.set(c, i, grad[i]);
                    }
                }
            }
        }
        let hessians = if with_hessian {
            match &self.hess_polys {
                Some(hess) => Some(
                    hess.iter()
                        .map(|hs| {
                            let mut m = SmallMatrix::zeros(self.n);
                            for i in 0..self.n {
                                for j in 0..self.n {
                                    m.set(i, j, hs[i * self.n + j].eval_vec(x));
                                }
                            }
                            m
                        })
                        .collect(),
                ),
                None => {
                    return Err(Error::Capability(
                        "hessian requested for a representation without analytic second derivatives"
                            .into(),
                    ))
                }
            }
        } else {
            None
        };
        Ok(Jet {
            point: x.clone(),
            singular_values: derivative.singular_values(),
            jacobian: derivative.det(),
            value,
            derivative,
            hessians,
        })
    }
}

/// A map that is the gradient of a scalar harmonic potential; its
/// derivative matrix is the potential's Hessian.
#[derive(Debug, Clone)]
pub struct GradientMap {
    potential: HarmonicPolynomial,
    map: HarmonicMap,
}

impl GradientMap {
    pub fn new(potential: HarmonicPolynomial) -> Result<Self> {
        let n = potential.dim();
        let comps = (0..n)
            .map(|i| Component::Polynomial(potential.derivative(i)))
            .collect();
        Ok(Self {
            map: HarmonicMap::new(comps, None)?,
            potential,
        })
    }

    pub fn with_declared_k(potential: HarmonicPolynomial, k: f64) -> Result<Self> {
        let n = potential.dim();
        let comps = (0..n)
            .map(|i| Component::Polynomial(potential.derivative(i)))
            .collect();
        Ok(Self {
            map: HarmonicMap::new(comps, Some(k))?,
            potential,
        })
    }

    pub fn potential(&self) -> &HarmonicPolynomial {
        &self.potential
    }

    pub fn map(&self) -> &HarmonicMap {
        &self.map
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }
}
