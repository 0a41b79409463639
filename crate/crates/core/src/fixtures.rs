//! Built-in fixture registry: the canonical maps the test and report
//! suites run against.
//!
//! Each fixture carries its mapspec document (so it can be written out
//! and re-loaded through the same path user maps take), its source and
//! target domains, and flags describing which scans apply.

use crate::error::Result;
use crate::geometry::DomainSpec;
use crate::harmonic::FourierBoundary;
use crate::mapspec::{
    LoadedMap, MapSpecFile, PolynomialSpec, Representation, TermSpec,
};

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub spec: MapSpecFile,
    pub source: DomainSpec,
    pub target: DomainSpec,
    /// the map sends the unit ball into itself (delta scan applies).
    pub into_ball: bool,
}

impl Fixture {
    pub fn build(&self) -> Result<LoadedMap> {
        self.spec.build()
    }

    pub fn dim(&self) -> usize {
        self.spec.dimension
    }
}

fn poly(terms: &[(&[u32], f64)]) -> PolynomialSpec {
    PolynomialSpec {
        terms: terms
            .iter()
            .map(|(e, c)| TermSpec {
                exponents: e.to_vec(),
                coefficient: *c,
            })
            .collect(),
    }
}

fn polynomial_spec(n: usize, comps: Vec<PolynomialSpec>, k: Option<f64>, target: DomainSpec) -> MapSpecFile {
    MapSpecFile {
        format_version: crate::mapspec::FORMAT_VERSION,
        dimension: n,
        representation: Representation::Polynomial,
        components: Some(comps),
        potential: None,
        fourier: None,
        sphere_samples: None,
        declared_k: k,
        target: Some(target),
    }
}

fn gradient_spec(potential: PolynomialSpec, k: Option<f64>, target: DomainSpec) -> MapSpecFile {
    MapSpecFile {
        format_version: crate::mapspec::FORMAT_VERSION,
        dimension: 3,
        representation: Representation::GradientPotential,
        components: None,
        potential: Some(potential),
        fourier: None,
        sphere_samples: None,
        declared_k: k,
        target: Some(target),
    }
}

/// The registry, in a fixed order.
pub fn registry() -> Vec<Fixture> {
    let mut out = Vec::new();

    out.push(Fixture {
        name: "identity2",
        description: "identity map of the disk",
        spec: polynomial_spec(
            2,
            vec![poly(&[(&[1, 0], 1.0)]), poly(&[(&[0, 1], 1.0)])],
            Some(1.0),
            DomainSpec::unit_ball(2),
        ),
        source: DomainSpec::unit_ball(2),
        target: DomainSpec::unit_ball(2),
        into_ball: true,
    });

    out.push(Fixture {
        name: "identity3",
        description: "identity map of the ball",
        spec: polynomial_spec(
            3,
            vec![
                poly(&[(&[1, 0, 0], 1.0)]),
                poly(&[(&[0, 1, 0], 1.0)]),
                poly(&[(&[0, 0, 1], 1.0)]),
            ],
            Some(1.0),
            DomainSpec::unit_ball(3),
        ),
        source: DomainSpec::unit_ball(3),
        target: DomainSpec::unit_ball(3),
        into_ball: true,
    });

    out.push(Fixture {
        name: "shear05",
        description: "planar shear z + 0.5 conj(z); constant derivative diag(1.5, 0.5)",
        spec: polynomial_spec(
            2,
            vec![poly(&[(&[1, 0], 1.5)]), poly(&[(&[0, 1], 0.5)])],
            Some(3.0),
            DomainSpec::ellipsoid(vec![1.5, 0.5]),
        ),
        source: DomainSpec::unit_ball(2),
        target: DomainSpec::ellipsoid(vec![1.5, 0.5]),
        into_ball: false,
    });

    out.push(Fixture {
        name: "linear3",
        description: "gradient of x^2 - y^2/2 - z^2/2; constant derivative diag(2, -1, -1)",
        spec: gradient_spec(
            poly(&[(&[2, 0, 0], 1.0), (&[0, 2, 0], -0.5), (&[0, 0, 2], -0.5)]),
            Some(4.0),
            DomainSpec::ellipsoid(vec![2.0, 1.0, 1.0]),
        ),
        source: DomainSpec::unit_ball(3),
        target: DomainSpec::ellipsoid(vec![2.0, 1.0, 1.0]),
        into_ball: false,
    });

    out.push(Fixture {
        name: "cubic3",
        description: "perturbed cubic gradient map, potential x^2 - y^2/2 - z^2/2 + 0.2 xyz",
        spec: gradient_spec(
            poly(&[
                (&[2, 0, 0], 1.0),
                (&[0, 2, 0], -0.5),
                (&[0, 0, 2], -0.5),
                (&[1, 1, 1], 0.2),
            ]),
            Some(4.5),
            DomainSpec::ellipsoid(vec![2.15, 1.15, 1.15]),
        ),
        source: DomainSpec::unit_ball(3),
        target: DomainSpec::ellipsoid(vec![2.15, 1.15, 1.15]),
        into_ball: false,
    });

    // planar harmonic shear of degree 2, defined through its boundary
    // Fourier data: f = s (z + 0.2 conj(z)^2), s = 1/1.2, a self-map of
    // the disk with jacobian s^2 (1 - 0.16 |z|^2) > 0
    let s = 1.0 / 1.2;
    out.push(Fixture {
        name: "poisson2",
        description: "degree-2 boundary shear loaded as fourier data; disk into disk",
        spec: MapSpecFile {
            format_version: crate::mapspec::FORMAT_VERSION,
            dimension: 2,
            representation: Representation::FourierBoundary,
            components: None,
            potential: None,
            fourier: Some(vec![
                FourierBoundary {
                    constant: 0.0,
                    cos: vec![s, 0.2 * s],
                    sin: vec![0.0, 0.0],
                },
                FourierBoundary {
                    constant: 0.0,
                    cos: vec![0.0, 0.0],
                    sin: vec![s, -0.2 * s],
                },
            ]),
            sphere_samples: None,
            declared_k: Some(7.0 / 3.0),
            target: Some(DomainSpec::unit_ball(2)),
        },
        source: DomainSpec::unit_ball(2),
        target: DomainSpec::unit_ball(2),
        into_ball: true,
    });

    out
}

pub fn by_name(name: &str) -> Option<Fixture> {
    registry().into_iter().find(|f| f.name == name)
}
