//! Map-specification files: the on-disk description of a harmonic map.
//!
//! JSON documents with a `format_version`, a representation tag, the
//! coefficient tables for that representation, an optional declared
//! distortion bound and an optional target domain. Loading keeps the
//! original document alongside the built map, so load -> serialize ->
//! load is coefficient-exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::harmonic::{
    Component, FourierBoundary, GradientMap, HarmonicMap, HarmonicPolynomial,
    PoissonExtensionField, SphereTable,
};
use crate::poly::{Exponents, Polynomial, MAX_VARS};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    Polynomial,
    GradientPotential,
    FourierBoundary,
    SphereSamples,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub exponents: Vec<u32>,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialSpec {
    pub terms: Vec<TermSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpecFile {
    pub format_version: u32,
    pub dimension: usize,
    pub representation: Representation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<PolynomialSpec>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<PolynomialSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fourier: Option<Vec<FourierBoundary>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sphere_samples: Option<Vec<SphereTable>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub declared_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<DomainSpec>,
}

/// A loaded map: either a plain harmonic map or a gradient map carrying
/// its scalar potential.
#[derive(Debug, Clone)]
pub enum LoadedMap {
    Plain(HarmonicMap),
    Gradient(GradientMap),
}

impl LoadedMap {
    pub fn as_map(&self) -> &HarmonicMap {
        match self {
            LoadedMap::Plain(m) => m,
            LoadedMap::Gradient(g) => g.map(),
        }
    }

    pub fn as_gradient(&self) -> Option<&GradientMap> {
        match self {
            LoadedMap::Gradient(g) => Some(g),
            LoadedMap::Plain(_) => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.as_map().dim()
    }
}

fn to_exponents(spec: &TermSpec, n: usize) -> Result<Exponents> {
    if spec.exponents.len() != n {
        return Err(Error::Parse(format!(
            "term has {} exponents, dimension is {n}",
            spec.exponents.len()
        )));
    }
    let mut e: Exponents = [0; MAX_VARS];
    for (i, &v) in spec.exponents.iter().enumerate() {
        if v > crate::poly::MAX_SPEC_EXPONENT as u32 {
            return Err(Error::Parse(format!("exponent {v} out of range")));
        }
        e[i] = v as u8;
    }
    Ok(e)
}

fn build_polynomial(spec: &PolynomialSpec, n: usize) -> Result<HarmonicPolynomial> {
    let raw = spec
        .terms
        .iter()
        .map(|t| Ok((to_exponents(t, n)?, t.coefficient)))
        .collect::<Result<Vec<_>>>()?;
    HarmonicPolynomial::new(Polynomial::new(n, raw))
}

pub fn poly_to_spec(p: &Polynomial) -> PolynomialSpec {
    PolynomialSpec {
        terms: p
            .terms()
            .iter()
            .map(|t| TermSpec {
                exponents: t.exponents[..p.dim()].iter().map(|&e| e as u32).collect(),
                coefficient: t.coefficient,
            })
            .collect(),
    }
}

impl MapSpecFile {
    /// Builds the in-memory map this document describes.
    pub fn build(&self) -> Result<LoadedMap> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        let n = self.dimension;
        if n != 2 && n != 3 {
            return Err(Error::Parse(format!("dimension {n} not supported (2 or 3)")));
        }
        if let Some(t) = &self.target {
            if t.dim() != n {
                return Err(Error::Parse(format!(
                    "target domain dimension {} does not match map dimension {n}",
                    t.dim()
                )));
            }
        }
        match self.representation {
            Representation::Polynomial => {
                let comps = self.components.as_ref().ok_or_else(|| {
                    Error::Parse("polynomial representation needs `components`".into())
                })?;
                let polys = comps
                    .iter()
                    .map(|c| build_polynomial(c, n))
                    .collect::<Result<Vec<_>>>()?;
                Ok(LoadedMap::Plain(HarmonicMap::from_polynomials(
                    polys,
                    self.declared_k,
                )?))
            }
            Representation::GradientPotential => {
                let pot = self.potential.as_ref().ok_or_else(|| {
                    Error::Parse("gradient-potential representation needs `potential`".into())
                })?;
                let u = build_polynomial(pot, n)?;
                let g = match self.declared_k {
                    Some(k) => GradientMap::with_declared_k(u, k)?,
                    None => GradientMap::new(u)?,
                };
                Ok(LoadedMap::Gradient(g))
            }
            Representation::FourierBoundary => {
                if n != 2 {
                    return Err(Error::Parse(
                        "fourier-boundary representation is two-dimensional".into(),
                    ));
                }
                let fourier = self.fourier.as_ref().ok_or_else(|| {
                    Error::Parse("fourier-boundary representation needs `fourier`".into())
                })?;
                let comps = fourier
                    .iter()
                    .map(|b| {
                        Ok(Component::Poisson(PoissonExtensionField::from_fourier(
                            b.clone(),
                        )?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(LoadedMap::Plain(HarmonicMap::new(comps, self.declared_k)?))
            }
            Representation::SphereSamples => {
                let tables = self.sphere_samples.as_ref().ok_or_else(|| {
                    Error::Parse("sphere-samples representation needs `sphere_samples`".into())
                })?;
                let comps = tables
                    .iter()
                    .map(|t| {
                        Ok(Component::Poisson(PoissonExtensionField::from_table(
                            n,
                            t.clone(),
                        )?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(LoadedMap::Plain(HarmonicMap::new(comps, self.declared_k)?))
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("mapspec serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Parse(format!(
                "mapspec parse error at line {}, column {}: {e}",
                e.line(),
                e.column()
            ))
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec::Vector;

    #[test]
    fn polynomial_round_trip_is_exact() {
        let spec = MapSpecFile {
            format_version: 1,
            dimension: 2,
            representation: Representation::Polynomial,
            components: Some(vec![
                PolynomialSpec {
                    terms: vec![TermSpec {
                        exponents: vec![1, 0],
                        coefficient: 1.5,
                    }],
                },
                PolynomialSpec {
                    terms: vec![TermSpec {
                        exponents: vec![0, 1],
                        coefficient: 0.1 + 0.2, // deliberately non-representable
                    }],
                },
            ]),
            potential: None,
            fourier: None,
            sphere_samples: None,
            declared_k: Some(3.0),
            target: Some(DomainSpec::unit_ball(2)),
        };
        let json = spec.to_json();
        let back = MapSpecFile::from_json(&json).unwrap();
        assert_eq!(spec, back);
        assert_eq!(json, back.to_json());
        back.build().unwrap();
    }

    #[test]
    fn gradient_potential_builds() {
        let spec = MapSpecFile {
            format_version: 1,
            dimension: 3,
            representation: Representation::GradientPotential,
            components: None,
            potential: Some(PolynomialSpec {
                terms: vec![
                    TermSpec {
                        exponents: vec![2, 0, 0],
                        coefficient: 1.0,
                    },
                    TermSpec {
                        exponents: vec![0, 2, 0],
                        coefficient: -0.5,
                    },
                    TermSpec {
                        exponents: vec![0, 0, 2],
                        coefficient: -0.5,
                    },
                ],
            }),
            fourier: None,
            sphere_samples: None,
            declared_k: None,
            target: None,
        };
        let loaded = spec.build().unwrap();
        let g = loaded.as_gradient().expect("gradient map");
        let v = g
            .map()
            .evaluate(&Vector::new(vec![0.1, 0.2, 0.3]))
            .unwrap();
        assert!((v[0] - 0.2).abs() < 1e-15);
        assert!((v[1] + 0.2).abs() < 1e-15);
        assert!((v[2] + 0.3).abs() < 1e-15);
    }

    #[test]
    fn non_harmonic_component_rejected() {
        let spec = MapSpecFile {
            format_version: 1,
            dimension: 2,
            representation: Representation::Polynomial,
            components: Some(vec![
                PolynomialSpec {
                    terms: vec![
                        TermSpec {
                            exponents: vec![2, 0],
                            coefficient: 1.0,
                        },
                        TermSpec {
                            exponents: vec![0, 2],
                            coefficient: 1.0,
                        },
                    ],
                },
                PolynomialSpec {
                    terms: vec![TermSpec {
                        exponents: vec![0, 1],
                        coefficient: 1.0,
                    }],
                },
            ]),
            potential: None,
            fourier: None,
            sphere_samples: None,
            declared_k: None,
            target: None,
        };
        assert!(matches!(spec.build(), Err(Error::NotHarmonic { .. })));
    }

    #[test]
    fn parse_error_carries_location() {
        let err = MapSpecFile::from_json("{ \"format_version\": 1,").unwrap_err();
        match err {
            Error::Parse(msg) => assert!(msg.contains("line"), "{msg}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
