//! Thermal Lindblad dynamics of the driven Kerr oscillator.
//!
//! Density matrices are column-stacked: vec(ρ)[i + jN] = ρ_ij, so that
//! vec(AXB) = (Bᵀ ⊗ A) vec(X).

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{annihilation_op, DensityMatrix, Operator, C64};
use crate::hermitian::HermitianBasis;
use crate::linalg::expm;
use crate::model::{build_kerr_hamiltonian, DriveTerm, Frame, ReducedParams};
use crate::ode::{integrate, Tolerances};

const ZERO: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Generator of the master equation, both as a dense N²×N² matrix and in
/// operator form for cheap application.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    dim: usize,
    matrix: DMatrix<C64>,
    collapse_ops: Vec<Operator>,
    hamiltonian: Operator,
    /// H − (i/2) Σ C†C
    heff: DMatrix<C64>,
    heff_sparse: Sparse,
    collapse_sparse: Vec<Sparse>,
    gamma: f64,
    nbar: f64,
}

/// Nonzero entries (row, column, value) of a dense matrix.
#[derive(Clone, Debug)]
struct Sparse(Vec<(usize, usize, C64)>);

impl Sparse {
    fn new(m: &DMatrix<C64>) -> Self {
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)] != ZERO {
                    entries.push((i, j, m[(i, j)]));
                }
            }
        }
        Self(entries)
    }
}

/// −i[H,ρ] + (γ/2)n̄(2a†ρa − aa†ρ − ρaa†) + (γ/2)(n̄+1)(2aρa† − a†aρ − ρa†a).
///
/// Collapse operators are always `[√(γ(n̄+1)) a, √(γn̄) a†]` (channel 1 loss,
/// channel 2 thermal excitation), even when a rate vanishes.
pub fn build_liouvillian(h: &Operator, gamma: f64, nbar: f64) -> Result<Liouvillian> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma = {gamma}")));
    }
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::InvalidArgument(format!("nbar = {nbar}")));
    }
    let a = annihilation_op(h.dim())?;
    let loss = &a * (gamma * (nbar + 1.0)).sqrt();
    let gain = &a.dagger() * (gamma * nbar).sqrt();
    let mut l = Liouvillian::with_collapse_ops(h, vec![loss, gain])?;
    l.gamma = gamma;
    l.nbar = nbar;
    Ok(l)
}

impl Liouvillian {
    pub fn with_collapse_ops(h: &Operator, collapse_ops: Vec<Operator>) -> Result<Self> {
        let n = h.dim();
        for c in &collapse_ops {
            if c.dim() != n {
                return Err(Error::Shape {
                    expected: n,
                    actual: c.dim(),
                });
            }
        }
        let mut decay = DMatrix::<C64>::zeros(n, n);
        for c in &collapse_ops {
            decay += c.matrix().adjoint() * c.matrix();
        }
        let heff = h.matrix() - &decay * C64::new(0.0, 0.5);

        let id = DMatrix::<C64>::identity(n, n);
        let mut matrix = id.kronecker(&heff) * (-I);
        matrix += heff.conjugate().kronecker(&id) * I;
        for c in &collapse_ops {
            matrix += c.matrix().conjugate().kronecker(c.matrix());
        }
        let dissipative = collapse_ops.iter().any(|c| c.matrix().iter().any(|z| *z != ZERO));
        let collapse_sparse = collapse_ops.iter().map(|c| Sparse::new(c.matrix())).collect();
        Ok(Self {
            dim: n,
            matrix,
            collapse_ops,
            hamiltonian: h.clone(),
            heff_sparse: Sparse::new(&heff),
            collapse_sparse,
            heff,
            gamma: if dissipative { f64::NAN } else { 0.0 },
            nbar: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn collapse_ops(&self) -> &[Operator] {
        &self.collapse_ops
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    /// Damping rate; NaN when built from arbitrary collapse operators.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    /// H − (i/2) Σ C†C
    pub fn effective_hamiltonian(&self) -> &DMatrix<C64> {
        &self.heff
    }

    fn is_dissipative(&self) -> bool {
        self.gamma != 0.0
    }

    /// L(ρ) evaluated in operator form.
    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let n = self.dim;
        let mut out = DMatrix::zeros(n, n);
        self.apply_into(rho.as_slice(), out.as_mut_slice());
        out
    }

    /// Column-stacked L(ρ), overwriting `out`.
    fn apply_into(&self, rho: &[C64], out: &mut [C64]) {
        let n = self.dim;
        out.fill(ZERO);
        // −i Heff ρ
        for &(i, k, h) in &self.heff_sparse.0 {
            let f = -I * h;
            for j in 0..n {
                out[i + j * n] += f * rho[k + j * n];
            }
        }
        // +i ρ Heff†, (ρ Heff†)_ij = Σ_k ρ_ik conj(Heff_jk)
        for &(j, k, h) in &self.heff_sparse.0 {
            let f = I * h.conj();
            let (src, dst) = (k * n, j * n);
            for i in 0..n {
                out[i + dst] += f * rho[i + src];
            }
        }
        for c in &self.collapse_sparse {
            for &(i, k, c1) in &c.0 {
                for &(j, l, c2) in &c.0 {
                    out[i + j * n] += c1 * c2.conj() * rho[k + l * n];
                }
            }
        }
    }

    /// Real N²×N² matrix acting on Hermitian coordinates.
    pub(crate) fn real_matrix(&self, basis: &HermitianBasis) -> DMatrix<f64> {
        basis.real_superoperator(&self.matrix)
    }
}

/// Populations, blockade fidelity F = P₀ + P₁ and the 0–1 coherence over time.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BlockadeObservables {
    pub times: Vec<f64>,
    pub populations: Vec<Vec<f64>>,
    pub fidelity: Vec<f64>,
    /// X = Re⟨0|ρ|1⟩
    pub coherence_re: Vec<f64>,
    /// Y = Im⟨0|ρ|1⟩
    pub coherence_im: Vec<f64>,
}

impl BlockadeObservables {
    pub fn push(&mut self, t: f64, rho: &DensityMatrix) {
        let p = rho.populations();
        self.fidelity.push(p[0] + p[1]);
        let c = rho.get(0, 1);
        self.coherence_re.push(c.re);
        self.coherence_im.push(c.im);
        self.populations.push(p);
        self.times.push(t);
    }

    pub fn from_states(times: &[f64], states: &[DensityMatrix]) -> Self {
        let mut obs = Self::default();
        for (t, rho) in times.iter().zip(states) {
            obs.push(*t, rho);
        }
        obs
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// P_n at sample k, zero beyond the truncation.
    pub fn population(&self, k: usize, n: usize) -> f64 {
        self.populations[k].get(n).copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub observables: BlockadeObservables,
    pub states: Vec<DensityMatrix>,
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.first() != Some(&0.0) {
        return Err(Error::InvalidArgument("time grid must start at 0".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("time grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Integrate the master equation and sample ρ(t) on `times`.
///
/// `drive_terms` add −i[O_k e^{−iν_k t}, ρ] to the static generator. Static
/// problems of moderate size use the exact propagator, everything else the
/// adaptive integrator.
pub fn evolve(rho0: &DensityMatrix, l: &Liouvillian, drive_terms: &[DriveTerm], times: &[f64]) -> Result<Evolution> {
    if drive_terms.is_empty() && l.dim() <= PROPAGATOR_MAX_DIM {
        check_inputs(rho0, l, drive_terms, times)?;
        let states = propagate_static(rho0, l, times)?;
        let observables = BlockadeObservables::from_states(times, &states);
        return Ok(Evolution { observables, states });
    }
    evolve_with_tolerances(rho0, l, drive_terms, times, Tolerances::default())
}

fn check_inputs(rho0: &DensityMatrix, l: &Liouvillian, drive_terms: &[DriveTerm], times: &[f64]) -> Result<()> {
    let n = l.dim();
    if rho0.dim() != n {
        return Err(Error::Shape {
            expected: n,
            actual: rho0.dim(),
        });
    }
    for d in drive_terms {
        if d.operator.dim() != n {
            return Err(Error::Shape {
                expected: n,
                actual: d.operator.dim(),
            });
        }
    }
    check_times(times)
}

/// Master-equation integration with the adaptive Dormand–Prince scheme.
pub fn evolve_with_tolerances(
    rho0: &DensityMatrix,
    l: &Liouvillian,
    drive_terms: &[DriveTerm],
    times: &[f64],
    tol: Tolerances,
) -> Result<Evolution> {
    check_inputs(rho0, l, drive_terms, times)?;
    let n = l.dim();
    let drives: Vec<(Sparse, &DriveTerm)> = drive_terms.iter().map(|d| (Sparse::new(d.operator.matrix()), d)).collect();
    let mut rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        l.apply_into(y, dy);
        for (op, d) in &drives {
            // −i f [O, ρ]
            let f = d.coefficient(t) * (-I);
            for &(i, k, o) in &op.0 {
                let fo = f * o;
                for j in 0..n {
                    dy[i + j * n] += fo * y[k + j * n];
                }
            }
            for &(k, j, o) in &op.0 {
                let fo = f * o;
                for i in 0..n {
                    dy[i + j * n] -= fo * y[i + k * n];
                }
            }
        }
    };

    let y0: Vec<C64> = rho0.entries().as_slice().to_vec();
    let mut states = Vec::with_capacity(times.len());
    integrate(&mut rhs, y0, times, tol, |_, y| {
        let m = DMatrix::from_column_slice(n, n, y);
        states.push(DensityMatrix::new(m)?);
        Ok(())
    })?;
    let observables = BlockadeObservables::from_states(times, &states);
    Ok(Evolution { observables, states })
}

/// Largest dimension for which static evolution uses the exact propagator.
const PROPAGATOR_MAX_DIM: usize = 30;

/// ρ(t) = e^{Lt}ρ₀ through the real Hermitian-coordinate propagator, one
/// matrix exponential per distinct sampling interval.
fn propagate_static(rho0: &DensityMatrix, l: &Liouvillian, times: &[f64]) -> Result<Vec<DensityMatrix>> {
    let basis = HermitianBasis::new(l.dim());
    let r = l.real_matrix(&basis);
    let mut cache: Vec<(f64, DMatrix<f64>)> = Vec::new();
    let mut x = basis.coords(rho0.entries());
    let mut states = Vec::with_capacity(times.len());
    states.push(rho0.clone());
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        let pos = match cache.iter().position(|(h, _)| (h - dt).abs() <= 1e-13 * dt) {
            Some(p) => p,
            None => {
                cache.push((dt, expm(&(&r * dt))));
                cache.len() - 1
            }
        };
        x = &cache[pos].1 * x;
        states.push(DensityMatrix::new(basis.matrix(x.as_slice()))?);
    }
    Ok(states)
}

/// Unique fixed point of a dissipative Liouvillian by a dense linear solve,
/// with one population equation replaced by the trace condition.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    if !l.is_dissipative() {
        return Err(Error::NoUniqueSteadyState);
    }
    let n = l.dim();
    let basis = HermitianBasis::new(n);
    let mut r = l.real_matrix(&basis);
    // the population rows sum to zero (trace conservation), so one is redundant
    for j in 0..basis.len() {
        r[(0, j)] = if j < n { 1.0 } else { 0.0 };
    }
    let mut b = nalgebra::DVector::zeros(basis.len());
    b[0] = 1.0;

    let lu = r.lu();
    let u = lu.u();
    let diag_max = u.diagonal().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diag_min = u.diagonal().iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
    if !(diag_min > 1e-13 * diag_max) {
        return Err(Error::DegenerateSteadyState(format!(
            "pivot ratio {:e}",
            diag_min / diag_max
        )));
    }
    let x = lu
        .solve(&b)
        .ok_or_else(|| Error::DegenerateSteadyState("singular system".into()))?;
    let rho = basis.matrix(x.as_slice());

    let residual = l.apply(&rho).norm();
    let limit = 1e-10 * l.matrix().norm();
    if !(residual <= limit) {
        return Err(Error::DegenerateSteadyState(format!(
            "residual {residual:e} exceeds {limit:e}"
        )));
    }
    DensityMatrix::new(rho)
}

/// ‖L(ρ)‖ relative to ‖L‖ (Frobenius norms).
pub fn relative_residual(l: &Liouvillian, rho: &DensityMatrix) -> f64 {
    l.apply(rho.entries()).norm() / l.matrix().norm()
}

/// What a Fock truncation will be used for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purpose {
    Dynamics,
    Spectrum,
}

/// Tail mass above which a truncation is rejected.
pub const TAIL_LIMIT: f64 = 1e-8;
/// Largest Fock dimension the dense machinery is sized for.
pub const MAX_DIM: usize = 64;
const DIM_STEP: usize = 5;

/// Starting Fock dimension max(10, ⌈4(ε/γ + 3n̄)⌉), at least 12 for spectra.
/// Without damping the drive cannot be scaled by γ and the floor of 10 is used.
pub fn policy_dimension(epsilon: f64, gamma: f64, nbar: f64, purpose: Purpose) -> usize {
    let floor = match purpose {
        Purpose::Dynamics => 10,
        Purpose::Spectrum => 12,
    };
    if gamma <= 0.0 {
        return floor;
    }
    let estimate = (4.0 * (epsilon / gamma + 3.0 * nbar)).ceil();
    (estimate as usize).clamp(floor, MAX_DIM)
}

/// P_{N−1} + P_{N−2}.
pub fn tail_mass(rho: &DensityMatrix) -> f64 {
    let p = rho.populations();
    let n = p.len();
    p[n - 1] + p[n - 2]
}

/// A steady state together with the truncation it was computed at.
#[derive(Clone, Debug)]
pub struct SteadySolution {
    pub dim: usize,
    pub rho: DensityMatrix,
    pub liouvillian: Liouvillian,
    pub tail_mass: f64,
}

/// Steady state of the rotating-frame Kerr model, growing the truncation from
/// the policy value in steps of 5 until the tail mass is below [`TAIL_LIMIT`].
pub fn converged_steady_state(params: &ReducedParams, start_dim: Option<usize>, purpose: Purpose) -> Result<SteadySolution> {
    let mut dim = start_dim.unwrap_or_else(|| policy_dimension(params.epsilon, params.gamma, params.nbar, purpose));
    loop {
        let h = build_kerr_hamiltonian(params, dim, Frame::ResonantRotating)?;
        let l = build_liouvillian(&h.static_part, params.gamma, params.nbar)?;
        let rho = steady_state(&l)?;
        let tail = tail_mass(&rho);
        if tail < TAIL_LIMIT || dim + DIM_STEP > MAX_DIM {
            if tail >= TAIL_LIMIT {
                log::warn!("truncation at dim {dim} leaves tail mass {tail:e}");
            }
            return Ok(SteadySolution {
                dim,
                rho,
                liouvillian: l,
                tail_mass: tail,
            });
        }
        dim += DIM_STEP;
    }
}
