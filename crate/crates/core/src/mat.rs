use std::f64::consts::PI;

use crate::vec::Vector;

/// Dense n x n matrix with n <= 3, stored inline (row major).
///
/// This is all the linear algebra the map analysis needs: derivative
/// matrices, Hessians, determinants and singular values in dimensions 2
/// and 3. Singular values come from a closed-form symmetric
/// eigen-decomposition of A^T A followed by one Newton polish step on the
/// characteristic polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallMatrix {
    n: usize,
    a: [f64; 9],
}

impl SmallMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1 && n <= 3, "SmallMatrix supports n in 1..=3");
        Self { n, a: [0.0; 9] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &d) in entries.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n);
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * 3 + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * 3 + j] = v;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(i, j, self.get(j, i));
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vector {
        debug_assert_eq!(x.len(), self.n);
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let mut s = 0.0;
            for j in 0..self.n {
                s += self.get(i, j) * x[j];
            }
            out[i] = s;
        }
        Vector::new(out)
    }

    /// y = A^T x.
    pub fn transpose_mul_vec(&self, x: &[f64]) -> Vector {
        debug_assert_eq!(x.len(), self.n);
        let mut out = vec![0.0; self.n];
        for j in 0..self.n {
            let mut s = 0.0;
            for i in 0..self.n {
                s += self.get(i, j) * x[i];
            }
            out[j] = s;
        }
        Vector::new(out)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let mut s = 0.0;
                for k in 0..self.n {
                    s += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, s);
            }
        }
        out
    }

    pub fn det(&self) -> f64 {
        match self.n {
            1 => self.get(0, 0),
            2 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0),
            3 => {
                let m = |i: usize, j: usize| self.get(i, j);
                m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                    - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                    + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
            }
            _ => unreachable!(),
        }
    }

    /// Squared Frobenius (Hilbert-Schmidt) norm.
    pub fn frobenius_sq(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.get(i, j);
                s += v * v;
            }
        }
        s
    }

    pub fn frobenius(&self) -> f64 {
        self.frobenius_sq().sqrt()
    }

    /// Maximum absolute deviation from symmetry, max |a_ij - a_ji|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Eigenvalues of a symmetric matrix, descending.
    ///
    /// 2x2 is the exact quadratic formula; 3x3 uses the trigonometric
    /// closed form with one Newton step per root on the characteristic
    /// polynomial to pull the roots back to ~1e-16 relative.
    pub fn sym_eigenvalues(&self) -> Vec<f64> {
        match self.n {
            1 => vec![self.get(0, 0)],
            2 => {
                let a = self.get(0, 0);
                let b = self.get(0, 1);
                let d = self.get(1, 1);
                let tr = a + d;
                let gap = ((a - d) * (a - d) + 4.0 * b * b).sqrt();
                vec![0.5 * (tr + gap), 0.5 * (tr - gap)]
            }
            3 => {
                let mut eig = self.sym_eigenvalues_3x3();
                for lam in eig.iter_mut() {
                    *lam = self.newton_polish(*lam);
                }
                eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
                eig
            }
            _ => unreachable!(),
        }
    }

    fn sym_eigenvalues_3x3(&self) -> Vec<f64> {
        let m = |i: usize, j: usize| self.get(i, j);
        let p1 = m(0, 1) * m(0, 1) + m(0, 2) * m(0, 2) + m(1, 2) * m(1, 2);
        if p1 == 0.0 {
            return vec![m(0, 0), m(1, 1), m(2, 2)];
        }
        let q = (m(0, 0) + m(1, 1) + m(2, 2)) / 3.0;
        let p2 = (m(0, 0) - q).powi(2) + (m(1, 1) - q).powi(2) + (m(2, 2) - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        if p == 0.0 {
            return vec![q, q, q];
        }
        let mut b = *self;
        for i in 0..3 {
            b.set(i, i, b.get(i, i) - q);
        }
        let r = (b.det() / (p * p * p * 2.0)).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
        let e2 = 3.0 * q - e1 - e3;
        vec![e1, e2, e3]
    }

    /// One Newton step on chi(lambda) = det(A - lambda I).
    fn newton_polish(&self, lam: f64) -> f64 {
        // chi(l) = -l^3 + c2 l^2 - c1 l + c0 for n = 3
        let m = |i: usize, j: usize| self.get(i, j);
        let c2 = m(0, 0) + m(1, 1) + m(2, 2);
        let c1 = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2)
            - m(0, 2) * m(2, 0)
            + m(1, 1) * m(2, 2)
            - m(1, 2) * m(2, 1);
        let c0 = self.det();
        let chi = -lam * lam * lam + c2 * lam * lam - c1 * lam + c0;
        let dchi = -3.0 * lam * lam + 2.0 * c2 * lam - c1;
        let scale = 1.0 + lam.abs();
        if dchi.abs() < 1e-8 * scale * scale {
            return lam; // near-multiple root, the closed form is already fine
        }
        lam - chi / dchi
    }

    /// Singular values, descending. Eigenvalues of A^T A, clamped at zero
    /// before the square root.
    pub fn singular_values(&self) -> Vec<f64> {
        let ata = self.transpose().matmul(self);
        ata.sym_eigenvalues()
            .into_iter()
            .map(|l| l.max(0.0).sqrt())
            .collect()
    }
}
