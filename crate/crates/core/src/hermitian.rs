//! Real coordinates for Hermitian N×N matrices.
//!
//! Lindblad generators map Hermitian matrices to Hermitian matrices, so they
//! can be represented by a real N²×N² matrix. Real arithmetic lets the heavy
//! linear algebra (LU, matrix exponentials) run on the fast f64 kernels.
//!
//! Basis ordering: the N diagonal projectors |i⟩⟨i| come first, then for each
//! pair i < j the symmetric |i⟩⟨j| + |j⟩⟨i| and antisymmetric
//! i|i⟩⟨j| − i|j⟩⟨i| elements. The coordinates of a Hermitian X are therefore
//! (X_ii, Re X_ij, Im X_ij).

use nalgebra::{DMatrix, DVector};

use crate::fock::C64;

#[derive(Clone, Debug)]
pub(crate) struct HermitianBasis {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl HermitianBasis {
    pub fn new(n: usize) -> Self {
        let pairs = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
        Self { n, pairs }
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i + j * self.n
    }

    pub fn coords(&self, x: &DMatrix<C64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.len());
        for i in 0..self.n {
            out[i] = x[(i, i)].re;
        }
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            out[self.n + 2 * k] = x[(i, j)].re;
            out[self.n + 2 * k + 1] = x[(i, j)].im;
        }
        out
    }

    pub fn matrix(&self, r: &[f64]) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            m[(i, i)] = C64::new(r[i], 0.0);
        }
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            let z = C64::new(r[self.n + 2 * k], r[self.n + 2 * k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
        m
    }

    /// Split an arbitrary X into Hermitian parts, X = H₁ + iH₂.
    pub fn split(x: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
        let xa = x.adjoint();
        let h1 = (x + &xa) * C64::new(0.5, 0.0);
        let h2 = (x - &xa) * C64::new(0.0, -0.5);
        (h1, h2)
    }

    /// Real representation of a column-stacked superoperator that preserves Hermiticity.
    pub fn real_superoperator(&self, l: &DMatrix<C64>) -> DMatrix<f64> {
        let n = self.n;
        let dim = self.len();
        let mut r = DMatrix::zeros(dim, dim);
        let write = |r: &mut DMatrix<f64>, col: usize, y: &dyn Fn(usize) -> C64| {
            for i in 0..n {
                r[(i, col)] = y(self.idx(i, i)).re;
            }
            for (k, &(i, j)) in self.pairs.iter().enumerate() {
                let z = y(self.idx(i, j));
                r[(n + 2 * k, col)] = z.re;
                r[(n + 2 * k + 1, col)] = z.im;
            }
        };
        for i in 0..n {
            let c = self.idx(i, i);
            write(&mut r, i, &|row| l[(row, c)]);
        }
        let iu = C64::new(0.0, 1.0);
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            let (cij, cji) = (self.idx(i, j), self.idx(j, i));
            write(&mut r, n + 2 * k, &|row| l[(row, cij)] + l[(row, cji)]);
            write(&mut r, n + 2 * k + 1, &|row| iu * (l[(row, cij)] - l[(row, cji)]));
        }
        r
    }

    /// Coefficients w with Tr[V X] = w · coords(X) for Hermitian V and X.
    pub fn trace_functional(&self, v: &DMatrix<C64>) -> DVector<f64> {
        let n = self.n;
        let mut w = DVector::zeros(self.len());
        for i in 0..n {
            w[i] = v[(i, i)].re;
        }
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            // V_ji X_ij + V_ij X_ji = 2 Re(V_ji X_ij)
            let vji = v[(j, i)];
            w[n + 2 * k] = 2.0 * vji.re;
            w[n + 2 * k + 1] = -2.0 * vji.im;
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_hermitian(n: usize, seed: u64) -> DMatrix<C64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let m = DMatrix::from_fn(n, n, |_, _| C64::new(next(), next()));
        &m + m.adjoint()
    }

    #[test]
    fn coordinates_round_trip() {
        let b = HermitianBasis::new(5);
        let x = sample_hermitian(5, 3);
        let back = b.matrix(b.coords(&x).as_slice());
        assert!((back - x).norm() < 1e-14);
    }

    #[test]
    fn trace_functional_matches_trace() {
        let b = HermitianBasis::new(6);
        let v = sample_hermitian(6, 1);
        let x = sample_hermitian(6, 2);
        let direct = (&v * &x).trace();
        let via = b.trace_functional(&v).dot(&b.coords(&x));
        assert!((direct.re - via).abs() < 1e-12);
        assert!(direct.im.abs() < 1e-12);
    }

    #[test]
    fn real_superoperator_reproduces_action() {
        // L(X) = -i[H, X] in column-stacked form
        let n = 4;
        let h = sample_hermitian(n, 7);
        let id = DMatrix::<C64>::identity(n, n);
        let l = (id.kronecker(&h) - h.transpose().kronecker(&id)) * C64::new(0.0, -1.0);
        let b = HermitianBasis::new(n);
        let r = b.real_superoperator(&l);
        let x = sample_hermitian(n, 9);
        let direct = (&h * &x - &x * &h) * C64::new(0.0, -1.0);
        let via = b.matrix((&r * b.coords(&x)).as_slice());
        assert!((direct - via).norm() < 1e-12);
    }

    #[test]
    fn split_reassembles() {
        let x = DMatrix::from_fn(3, 3, |i, j| C64::new(i as f64 - j as f64, (i * j) as f64 + 0.5));
        let (h1, h2) = HermitianBasis::split(&x);
        assert!((&h1 - h1.adjoint()).norm() < 1e-15);
        assert!((&h2 - h2.adjoint()).norm() < 1e-15);
        assert!((h1 + h2 * C64::new(0.0, 1.0) - x).norm() < 1e-14);
    }
}
