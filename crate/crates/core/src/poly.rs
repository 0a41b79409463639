//! Multi-index polynomials in up to three variables with exact
//! coefficient-level calculus: evaluation, differentiation, products and
//! the Laplacian as a linear map on coefficients.

use serde::{Deserialize, Serialize};

use crate::vec::Vector;

pub const MAX_VARS: usize = 3;
/// Per-variable exponent cap for map specifications; products of two
/// such polynomials (the w-field squares components) stay under the
/// evaluation power-table bound below.
pub const MAX_SPEC_EXPONENT: u8 = 31;
const MAX_DEGREE: usize = 64;

/// Exponent triple; unused trailing variables carry exponent zero.
pub type Exponents = [u8; MAX_VARS];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exponents: Exponents,
    pub coefficient: f64,
}

/// A polynomial over R^n, n <= 3, as a sorted, combined term list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    n: usize,
    terms: Vec<Term>,
}

impl Polynomial {
    pub fn new(n: usize, raw: Vec<(Exponents, f64)>) -> Self {
        assert!(n >= 1 && n <= MAX_VARS);
        let mut terms: Vec<Term> = raw
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(exponents, coefficient)| {
                for &e in &exponents[n..] {
                    assert_eq!(e, 0, "exponent on unused variable");
                }
                // the evaluation power table is per variable
                assert!(exponents.iter().all(|&e| (e as usize) <= MAX_DEGREE));
                Term {
                    exponents,
                    coefficient,
                }
            })
            .collect();
        terms.sort_by(|a, b| a.exponents.cmp(&b.exponents));
        // combine duplicates
        let mut combined: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match combined.last_mut() {
                Some(last) if last.exponents == t.exponents => {
                    last.coefficient += t.coefficient;
                }
                _ => combined.push(t),
            }
        }
        combined.retain(|t| t.coefficient != 0.0);
        Self { n, terms: combined }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(n, vec![])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::new(n, vec![([0, 0, 0], c)])
    }

    /// The coordinate monomial x_i.
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut e: Exponents = [0, 0, 0];
        e[i] = 1;
        Self::new(n, vec![(e, 1.0)])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coefficient.abs())
            .fold(0.0, f64::max)
    }

    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.exponents.iter().map(|&e| e as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        // per-axis power tables
        let mut max_e = [0usize; MAX_VARS];
        for t in &self.terms {
            for v in 0..self.n {
                max_e[v] = max_e[v].max(t.exponents[v] as usize);
            }
        }
        let mut powers = [[1.0f64; MAX_DEGREE + 1]; MAX_VARS];
        for v in 0..self.n {
            for e in 1..=max_e[v] {
                powers[v][e] = powers[v][e - 1] * x[v];
            }
        }
        let mut acc = 0.0;
        for t in &self.terms {
            let mut m = t.coefficient;
            for v in 0..self.n {
                m *= powers[v][t.exponents[v] as usize];
            }
            acc += m;
        }
        acc
    }

    pub fn eval_vec(&self, x: &Vector) -> f64 {
        self.eval(x.as_slice())
    }

    /// Exact coefficient-level partial derivative d/dx_i.
    pub fn derivative(&self, i: usize) -> Polynomial {
        assert!(i < self.n);
        let raw = self
            .terms
            .iter()
            .filter(|t| t.exponents[i] > 0)
            .map(|t| {
                let mut e = t.exponents;
                let k = e[i] as f64;
                e[i] -= 1;
                (e, t.coefficient * k)
            })
            .collect();
        Polynomial::new(self.n, raw)
    }

    /// Exact Laplacian as a linear map on coefficients.
    pub fn laplacian(&self) -> Polynomial {
        let mut raw = Vec::new();
        for t in &self.terms {
            for i in 0..self.n {
                if t.exponents[i] >= 2 {
                    let mut e = t.exponents;
                    let k = e[i] as f64;
                    e[i] -= 2;
                    raw.push((e, t.coefficient * k * (k - 1.0)));
                }
            }
        }
        Polynomial::new(self.n, raw)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.n, other.n);
        let mut raw: Vec<(Exponents, f64)> = self
            .terms
            .iter()
            .map(|t| (t.exponents, t.coefficient))
            .collect();
        raw.extend(other.terms.iter().map(|t| (t.exponents, t.coefficient)));
        Polynomial::new(self.n, raw)
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial::new(
            self.n,
            self.terms
                .iter()
                .map(|t| (t.exponents, t.coefficient * s))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.n, other.n);
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut e = a.exponents;
                for v in 0..MAX_VARS {
                    e[v] += b.exponents[v];
                }
                raw.push((e, a.coefficient * b.coefficient));
            }
        }
        Polynomial::new(self.n, raw)
    }
}
