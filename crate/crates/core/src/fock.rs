//! Truncated Fock-space operators and states.
//!
//! Everything is stored densely. The truncation dimension `N` is carried by
//! each object; composite spaces (qubit ⊗ oscillator) keep the list of factor
//! dimensions with the left factor as the slow index.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{expm, hermiticity_defect};

pub type C64 = Complex<f64>;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-8;
pub const KET_NORM_TOL: f64 = 1e-8;

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, min: 2 });
    }
    Ok(())
}

/// A dense operator on a (possibly composite) truncated space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    dims: Vec<usize>,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let n = matrix.nrows();
        Self::with_dims(vec![n], matrix)
    }

    /// Operator on a product space; `dims` lists the factor dimensions, slowest first.
    pub fn with_dims(dims: Vec<usize>, matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape {
                expected: matrix.nrows(),
                actual: matrix.ncols(),
            });
        }
        let total: usize = dims.iter().product();
        if total != matrix.nrows() {
            return Err(Error::Shape {
                expected: total,
                actual: matrix.nrows(),
            });
        }
        check_dim(total)?;
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("operator has non-finite entries".into()));
        }
        Ok(Self { dims, matrix })
    }

    // Internal constructor for results of algebra on already valid operators.
    fn derived(dims: Vec<usize>, matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), matrix.nrows());
        Self { dims, matrix }
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self::derived(vec![dim], DMatrix::identity(dim, dim)))
    }

    pub fn zeros_like(&self) -> Self {
        Self::derived(self.dims.clone(), DMatrix::zeros(self.dim(), self.dim()))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Self::derived(self.dims.clone(), self.matrix.adjoint())
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::derived(self.dims.clone(), &self.matrix * c)
    }

    pub fn apply(&self, ket: &Ket) -> Result<DVector<C64>> {
        if ket.dim() != self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                actual: ket.dim(),
            });
        }
        Ok(&self.matrix * ket.amplitudes())
    }

    /// Eigenvalues of a Hermitian operator in ascending order.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    fn combine(&self, other: &Self, f: impl Fn(&DMatrix<C64>, &DMatrix<C64>) -> DMatrix<C64>) -> Self {
        assert_eq!(
            self.dim(),
            other.dim(),
            "operator dimension mismatch ({} vs {})",
            self.dim(),
            other.dim()
        );
        Self::derived(self.dims.clone(), f(&self.matrix, &other.matrix))
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.combine(rhs, |a, b| a + b)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.combine(rhs, |a, b| a - b)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.combine(rhs, |a, b| a * b)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(C64::new(rhs, 0.0))
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        self.scale(rhs)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// Bosonic lowering operator: ⟨n−1|a|n⟩ = √n.
pub fn annihilation_op(dim: usize) -> Result<Operator> {
    check_dim(dim)?;
    let mut m = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(Operator::derived(vec![dim], m))
}

pub fn creation_op(dim: usize) -> Result<Operator> {
    Ok(annihilation_op(dim)?.dagger())
}

pub fn number_op(dim: usize) -> Result<Operator> {
    check_dim(dim)?;
    let diag = DVector::from_fn(dim, |n, _| C64::new(n as f64, 0.0));
    Ok(Operator::derived(vec![dim], DMatrix::from_diagonal(&diag)))
}

/// (−1)^{a†a}.
pub fn parity_op(dim: usize) -> Result<Operator> {
    check_dim(dim)?;
    let diag = DVector::from_fn(dim, |n, _| C64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0));
    Ok(Operator::derived(vec![dim], DMatrix::from_diagonal(&diag)))
}

/// D(ξ) = exp(ξa† − ξ*a), exponentiated on the truncated space.
pub fn displacement_op(xi: C64, dim: usize) -> Result<Operator> {
    if !xi.re.is_finite() || !xi.im.is_finite() {
        return Err(Error::InvalidArgument(format!("displacement {xi} is not finite")));
    }
    let a = annihilation_op(dim)?;
    let generator = a.matrix.adjoint() * xi - &a.matrix * xi.conj();
    Ok(Operator::derived(vec![dim], expm(&generator)))
}

// Qubit operators in the {|g⟩, |e⟩} ordering.

/// σ₊ = |e⟩⟨g|.
pub fn sigma_plus() -> Operator {
    let mut m = DMatrix::zeros(2, 2);
    m[(1, 0)] = C64::new(1.0, 0.0);
    Operator::derived(vec![2], m)
}

pub fn sigma_minus() -> Operator {
    sigma_plus().dagger()
}

/// σz = |e⟩⟨e| − |g⟩⟨g|.
pub fn sigma_z() -> Operator {
    let m = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(-1.0, 0.0), C64::new(1.0, 0.0)]));
    Operator::derived(vec![2], m)
}

pub fn sigma_x() -> Operator {
    &sigma_plus() + &sigma_minus()
}

/// Kronecker product; `left` is the slow index.
pub fn tensor(left: &Operator, right: &Operator) -> Operator {
    let mut dims = left.dims.clone();
    dims.extend_from_slice(&right.dims);
    Operator::derived(dims, left.matrix.kronecker(&right.matrix))
}

/// A normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amplitudes: DVector<C64>,
}

impl Ket {
    /// Normalizes `amplitudes`; fails on a zero or non-finite vector.
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidArgument("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(Self {
            amplitudes: amplitudes / C64::new(norm, 0.0),
        })
    }

    pub fn basis(dim: usize, n: usize) -> Result<Self> {
        check_dim(dim)?;
        if n >= dim {
            return Err(Error::InvalidArgument(format!("Fock level {n} outside dimension {dim}")));
        }
        let mut v = DVector::zeros(dim);
        v[n] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn projector(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix { entries: m }
    }
}

/// A density matrix satisfying Hermiticity, unit trace and positivity to the module tolerances.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Shape {
                expected: entries.nrows(),
                actual: entries.ncols(),
            });
        }
        check_dim(entries.nrows())?;
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let rho = Self { entries };
        let herm = rho.hermiticity_defect();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("Hermiticity defect {herm:e}")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min_ev = rho.min_eigenvalue();
        if min_ev < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_ev:e}")));
        }
        Ok(rho)
    }

    /// Geometric (thermal) populations P_n ∝ q^n with q = n̄/(1+n̄), renormalized on the truncated space.
    pub fn thermal(dim: usize, nbar: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(nbar >= 0.0) || !nbar.is_finite() {
            return Err(Error::InvalidArgument(format!("nbar = {nbar}")));
        }
        let q = nbar / (1.0 + nbar);
        let raw: Vec<f64> = (0..dim).map(|n| q.powi(n as i32)).collect();
        let z: f64 = raw.iter().sum();
        let diag = DVector::from_iterator(dim, raw.iter().map(|p| C64::new(p / z, 0.0)));
        Ok(Self {
            entries: DMatrix::from_diagonal(&diag),
        })
    }

    pub fn fock(dim: usize, n: usize) -> Result<Self> {
        Ok(Ket::basis(dim, n)?.projector())
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.entries)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.entries.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// P_n = ⟨n|ρ|n⟩.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.entries[(n, n)].re).collect()
    }

    /// Copy into a larger space, padding with zeros. Never called implicitly.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(Error::InvalidDimension { dim, min: self.dim() });
        }
        let mut m = DMatrix::zeros(dim, dim);
        m.view_mut((0, 0), (self.dim(), self.dim())).copy_from(&self.entries);
        Ok(Self { entries: m })
    }
}

/// ⟨op⟩ together with the information needed to decide if it is real.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Expectation {
    pub value: C64,
    hermitian: bool,
}

impl Expectation {
    pub const RESIDUE_TOL: f64 = 1e-10;

    pub fn re(&self) -> f64 {
        self.value.re
    }

    /// Imaginary part of a Hermitian operator's expectation, when it exceeds the tolerance.
    pub fn imaginary_residue(&self) -> Option<f64> {
        (self.hermitian && self.value.im.abs() > Self::RESIDUE_TOL).then_some(self.value.im)
    }
}

/// States that can be traced against an operator.
pub trait QuantumState {
    fn dim(&self) -> usize;
    fn raw_expectation(&self, op: &DMatrix<C64>) -> C64;
}

impl QuantumState for Ket {
    fn dim(&self) -> usize {
        self.amplitudes.len()
    }
    fn raw_expectation(&self, op: &DMatrix<C64>) -> C64 {
        self.amplitudes.dotc(&(op * &self.amplitudes))
    }
}

impl QuantumState for DensityMatrix {
    fn dim(&self) -> usize {
        self.entries.nrows()
    }
    fn raw_expectation(&self, op: &DMatrix<C64>) -> C64 {
        // Tr[ρ A] = Σ_ij ρ_ij A_ji
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            for i in 0..n {
                acc += self.entries[(i, j)] * op[(j, i)];
            }
        }
        acc
    }
}

pub fn expectation<S: QuantumState>(state: &S, op: &Operator) -> Result<Expectation> {
    if state.dim() != op.dim() {
        return Err(Error::Shape {
            expected: op.dim(),
            actual: state.dim(),
        });
    }
    let value = state.raw_expectation(op.matrix());
    let hermitian = op.is_hermitian(1e-12);
    if hermitian && value.im.abs() > Expectation::RESIDUE_TOL {
        log::debug!("expectation of Hermitian operator has imaginary residue {:e}", value.im);
    }
    Ok(Expectation { value, hermitian })
}
