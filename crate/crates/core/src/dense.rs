//! Dense complex matrices for small Pauli tensor products.
//!
//! Deliberately naive: these are used as an independent route next to the
//! bit-level algebra in [`crate::pauli`], so they build every operator from
//! explicit 2×2 factors and Kronecker products.

use num_complex::Complex64;

use crate::pauli::{Pauli, PauliOperator};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.data[row * self.dim + col] = v;
    }

    pub fn pauli(p: Pauli) -> Self {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let data = match p {
            Pauli::I => vec![one, z, z, one],
            Pauli::X => vec![z, one, one, z],
            Pauli::Y => vec![z, -i, i, z],
            Pauli::Z => vec![one, z, z, -one],
        };
        DenseMatrix { dim: 2, data }
    }

    /// Kronecker product of the symbol factors, times the operator's sign.
    pub fn from_operator(op: &PauliOperator) -> Self {
        let mut m = DenseMatrix::identity(1);
        for p in op.symbols() {
            m = m.kron(&DenseMatrix::pauli(p));
        }
        m.scale(Complex64::new(op.sign().value() as f64, 0.0))
    }

    pub fn kron(&self, other: &DenseMatrix) -> DenseMatrix {
        let dim = self.dim * other.dim;
        let mut out = DenseMatrix::zeros(dim);
        for a in 0..self.dim {
            for b in 0..self.dim {
                let s = self.get(a, b);
                if s == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..other.dim {
                    for d in 0..other.dim {
                        out.set(a * other.dim + c, b * other.dim + d, s * other.get(c, d));
                    }
                }
            }
        }
        out
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        DenseMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> DenseMatrix {
        DenseMatrix {
            dim: self.dim,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn adjoint(&self) -> DenseMatrix {
        let n = self.dim;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Returns `c` if `self == c · I` within `tol`.
    pub fn as_scalar(&self, tol: f64) -> Option<Complex64> {
        let c = self.get(0, 0);
        let scaled = DenseMatrix::identity(self.dim).scale(c);
        (self.max_abs_diff(&scaled) <= tol).then_some(c)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_products() {
        let x = DenseMatrix::pauli(Pauli::X);
        let y = DenseMatrix::pauli(Pauli::Y);
        let z = DenseMatrix::pauli(Pauli::Z);
        let xy = x.matmul(&y);
        let iz = z.scale(Complex64::new(0.0, 1.0));
        assert!(xy.max_abs_diff(&iz) < 1e-15);
        assert_eq!(x.kron(&z).dim(), 4);
    }

    #[test]
    fn operator_is_hermitian_involution() {
        let op: PauliOperator = "-XYZ".parse().unwrap();
        let m = DenseMatrix::from_operator(&op);
        assert!(m.max_abs_diff(&m.adjoint()) < 1e-15);
        assert!(m.matmul(&m).max_abs_diff(&DenseMatrix::identity(8)) < 1e-15);
    }
}
