//! Monte Carlo wave-function unraveling of the thermal master equation.
//!
//! Trajectories evolve the unnormalized state under H_eff = H − (i/2)Σ C_k†C_k
//! and jump when ‖ψ‖² falls to a uniform random threshold. The jump time is
//! located by bisection, the channel is drawn with weights ‖C_k ψ‖².

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{Ket, Operator, C64};
use crate::linalg::expm;
use crate::model::HamiltonianSpec;
use crate::ode::{Dopri5, Tolerances};

/// Norm² tolerance of the jump-time bisection.
pub const JUMP_NORM_TOL: f64 = 1e-8;
/// Binary digits available to the static-Hamiltonian bisection.
const DEPTH: u32 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Jump {
    pub time: f64,
    /// 1-based index into the collapse operators (1 = loss, 2 = thermal excitation).
    pub channel: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub times: Vec<f64>,
    pub states: Vec<Ket>,
    pub jumps: Vec<Jump>,
}

impl Trajectory {
    /// |⟨n|ψ(t_k)⟩|².
    pub fn populations(&self, k: usize) -> Vec<f64> {
        self.states[k].populations()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleEstimate {
    pub times: Vec<f64>,
    pub p_mean: Vec<Vec<f64>>,
    /// Standard error of the mean; `None` for fewer than two trajectories.
    pub p_stderr: Option<Vec<Vec<f64>>>,
    pub n_traj: usize,
}

/// Per-trajectory seed derived from a master seed (SplitMix64 finalizer).
pub fn trajectory_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// U(dt/2^k) for k = 0..=DEPTH, with U(τ) = e^{−i H_eff τ}.
struct Dyadic {
    dt: f64,
    steps: Vec<DMatrix<C64>>,
}

enum Drift {
    Static { intervals: Vec<usize>, sets: Vec<Dyadic> },
    Driven { heff: DMatrix<C64>, drives: Vec<(DMatrix<C64>, C64)> },
}

/// Everything about an unraveling that is shared between trajectories.
pub struct Unraveling {
    dim: usize,
    collapse: Vec<DMatrix<C64>>,
    times: Vec<f64>,
    drift: Drift,
    tol: Tolerances,
}

impl Unraveling {
    pub fn new(h: &HamiltonianSpec, collapse: &[Operator], times: &[f64]) -> Result<Self> {
        let n = h.dim();
        for c in collapse {
            if c.dim() != n {
                return Err(Error::Shape {
                    expected: n,
                    actual: c.dim(),
                });
            }
        }
        if times.is_empty() || times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("time grid must be finite, non-empty and strictly increasing".into()));
        }
        let mut heff = h.static_part.matrix().clone();
        for c in collapse {
            heff -= c.matrix().adjoint() * c.matrix() * C64::new(0.0, 0.5);
        }
        let drift = if h.is_static() {
            let generator = &heff * C64::new(0.0, -1.0);
            let mut sets: Vec<Dyadic> = Vec::new();
            let mut intervals = Vec::with_capacity(times.len().saturating_sub(1));
            for w in times.windows(2) {
                let dt = w[1] - w[0];
                let pos = match sets.iter().position(|s| (s.dt - dt).abs() <= 1e-13 * dt) {
                    Some(p) => p,
                    None => {
                        let steps = (0..=DEPTH).map(|k| expm(&(&generator * C64::new(dt / 2f64.powi(k as i32), 0.0)))).collect();
                        sets.push(Dyadic { dt, steps });
                        sets.len() - 1
                    }
                };
                intervals.push(pos);
            }
            Drift::Static { intervals, sets }
        } else {
            let drives = h.drive_terms.iter().map(|d| (d.operator.matrix().clone(), d.frequency)).collect();
            Drift::Driven { heff, drives }
        };
        Ok(Self {
            dim: n,
            collapse: collapse.iter().map(|c| c.matrix().clone()).collect(),
            times: times.to_vec(),
            drift,
            tol: Tolerances::default(),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// One trajectory; bit-for-bit reproducible for a given seed.
    pub fn run(&self, psi0: &Ket, seed: u64) -> Result<Trajectory> {
        if psi0.dim() != self.dim {
            return Err(Error::Shape {
                expected: self.dim,
                actual: psi0.dim(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Trajectory {
            seed,
            times: self.times.clone(),
            states: Vec::with_capacity(self.times.len()),
            jumps: Vec::new(),
        };
        match &self.drift {
            Drift::Static { intervals, sets, .. } => self.run_static(psi0, &mut rng, intervals, sets, &mut out)?,
            Drift::Driven { heff, drives } => self.run_driven(psi0, &mut rng, heff, drives, &mut out)?,
        }
        Ok(out)
    }

    fn threshold(rng: &mut ChaCha8Rng) -> f64 {
        // uniform on (0, 1]
        1.0 - rng.random::<f64>()
    }

    /// Replace ψ by C_k ψ/‖C_k ψ‖ for a channel drawn with weights ‖C_k ψ‖².
    fn jump(&self, psi: &DVector<C64>, time: f64, rng: &mut ChaCha8Rng, jumps: &mut Vec<Jump>) -> Result<DVector<C64>> {
        let candidates: Vec<DVector<C64>> = self.collapse.iter().map(|c| c * psi).collect();
        let weights: Vec<f64> = candidates.iter().map(|v| v.norm_squared()).collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::NumericalDegeneracy { time });
        }
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut channel = weights.len() - 1;
        for (k, w) in weights.iter().enumerate() {
            acc += w;
            if u < acc && *w > 0.0 {
                channel = k;
                break;
            }
        }
        // guard against rounding picking a zero-weight tail channel
        while weights[channel] == 0.0 {
            channel -= 1;
        }
        jumps.push(Jump {
            time,
            channel: channel + 1,
        });
        let v = &candidates[channel];
        Ok(v / C64::new(v.norm(), 0.0))
    }

    fn run_static(
        &self,
        psi0: &Ket,
        rng: &mut ChaCha8Rng,
        intervals: &[usize],
        sets: &[Dyadic],
        out: &mut Trajectory,
    ) -> Result<()> {
        let full: u64 = 1 << DEPTH;
        let mut psi = psi0.amplitudes().clone();
        let mut r = Self::threshold(rng);
        out.states.push(psi0.clone());
        for (i, &set) in intervals.iter().enumerate() {
            let Dyadic { dt, steps } = &sets[set];
            let t0 = self.times[i];
            let tick = dt / full as f64;
            let mut pos: u64 = 0;
            loop {
                let remaining = full - pos;
                let end = apply_ticks(steps, remaining, &psi);
                if end.norm_squared() > r {
                    psi = end;
                    break;
                }
                // largest q < remaining with ‖U(q)ψ‖² > r, found digit by digit
                let mut cur = psi.clone();
                let mut q: u64 = 0;
                for k in (0..DEPTH).rev() {
                    let bit = 1u64 << k;
                    if q + bit >= remaining {
                        continue;
                    }
                    let trial = &steps[(DEPTH - k) as usize] * &cur;
                    if trial.norm_squared() > r {
                        cur = trial;
                        q += bit;
                        if cur.norm_squared() - r < JUMP_NORM_TOL {
                            break;
                        }
                    }
                }
                pos += q;
                let time = t0 + pos as f64 * tick;
                psi = self.jump(&cur, time, rng, &mut out.jumps)?;
                r = Self::threshold(rng);
            }
            out.states.push(Ket::new(psi.clone())?);
        }
        Ok(())
    }

    fn run_driven(
        &self,
        psi0: &Ket,
        rng: &mut ChaCha8Rng,
        heff: &DMatrix<C64>,
        drives: &[(DMatrix<C64>, C64)],
        out: &mut Trajectory,
    ) -> Result<()> {
        let n = self.dim;
        let minus_i = C64::new(0.0, -1.0);
        let mut sys = |t: f64, y: &[C64], dy: &mut [C64]| {
            let y = DVector::from_column_slice(y);
            let mut h = heff.clone();
            for (op, nu) in drives {
                h += op * (minus_i * nu * t).exp();
            }
            let v = (h * y) * minus_i;
            dy.copy_from_slice(v.as_slice());
        };
        let norm2 = |y: &[C64]| y.iter().map(|z| z.norm_sqr()).sum::<f64>();

        let t_end = *self.times.last().unwrap();
        let mut solver = Dopri5::new(self.times[0], psi0.amplitudes().as_slice().to_vec(), self.tol);
        let mut buf = vec![C64::new(0.0, 0.0); n];
        let mut r = Self::threshold(rng);
        out.states.push(psi0.clone());
        let mut next = 1;
        while next < self.times.len() {
            solver.step(&mut sys, t_end)?;
            let (t_prev, t_now) = (solver.t_prev(), solver.t());
            let crossing = norm2(solver.y()) <= r;
            let horizon = if crossing {
                let (mut lo, mut hi) = (t_prev, t_now);
                loop {
                    let mid = 0.5 * (lo + hi);
                    solver.dense(mid, &mut buf);
                    let gap = norm2(&buf) - r;
                    if gap > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if gap.abs() < JUMP_NORM_TOL || hi - lo <= 1e-14 * hi.abs().max(1.0) {
                        break;
                    }
                }
                lo
            } else {
                t_now
            };
            while next < self.times.len() && self.times[next] <= horizon {
                if self.times[next] == t_now {
                    buf.copy_from_slice(solver.y());
                } else {
                    solver.dense(self.times[next], &mut buf);
                }
                out.states.push(Ket::new(DVector::from_column_slice(&buf))?);
                next += 1;
            }
            if crossing {
                solver.dense(horizon, &mut buf);
                let psi = self.jump(&DVector::from_column_slice(&buf), horizon, rng, &mut out.jumps)?;
                solver.reset(horizon, psi.as_slice());
                r = Self::threshold(rng);
            }
        }
        Ok(())
    }
}

/// Apply U(ticks · dt/2^DEPTH) using the binary digits of `ticks`.
fn apply_ticks(steps: &[DMatrix<C64>], ticks: u64, psi: &DVector<C64>) -> DVector<C64> {
    let mut v = psi.clone();
    for k in (0..=DEPTH).rev() {
        if ticks & (1u64 << k) != 0 {
            v = &steps[(DEPTH - k) as usize] * v;
        }
    }
    v
}

pub fn run_trajectory(psi0: &Ket, h: &HamiltonianSpec, collapse: &[Operator], times: &[f64], seed: u64) -> Result<Trajectory> {
    Unraveling::new(h, collapse, times)?.run(psi0, seed)
}

/// `n_traj` trajectories seeded by [`trajectory_seed`], computed in parallel and
/// returned in index order.
pub fn run_ensemble(
    psi0: &Ket,
    h: &HamiltonianSpec,
    collapse: &[Operator],
    times: &[f64],
    master_seed: u64,
    n_traj: usize,
) -> Result<Vec<Trajectory>> {
    let u = Unraveling::new(h, collapse, times)?;
    (0..n_traj as u64)
        .into_par_iter()
        .map(|i| u.run(psi0, trajectory_seed(master_seed, i)))
        .collect()
}

/// Mean populations and their standard errors, summed in seed order so the
/// result does not depend on how the trajectories were gathered.
pub fn ensemble_average(trajectories: &[Trajectory]) -> Result<EnsembleEstimate> {
    let first = trajectories
        .first()
        .ok_or_else(|| Error::Aggregation("no trajectories".into()))?;
    let dim = first.states[0].dim();
    for t in trajectories {
        if t.times != first.times {
            return Err(Error::Aggregation(format!("trajectory {} has a different time grid", t.seed)));
        }
        if t.states.len() != t.times.len() || t.states.iter().any(|s| s.dim() != dim) {
            return Err(Error::Aggregation(format!("trajectory {} has inconsistent states", t.seed)));
        }
    }
    let mut order: Vec<&Trajectory> = trajectories.iter().collect();
    order.sort_by_key(|t| t.seed);

    let n = order.len();
    let nt = first.times.len();
    let mut mean = vec![vec![0.0; dim]; nt];
    for t in &order {
        for (k, s) in t.states.iter().enumerate() {
            for (m, p) in mean[k].iter_mut().zip(s.populations()) {
                *m += p;
            }
        }
    }
    for row in &mut mean {
        for m in row.iter_mut() {
            *m /= n as f64;
        }
    }
    let stderr = (n >= 2).then(|| {
        let mut var = vec![vec![0.0; dim]; nt];
        for t in &order {
            for (k, s) in t.states.iter().enumerate() {
                for ((v, p), m) in var[k].iter_mut().zip(s.populations()).zip(&mean[k]) {
                    *v += (p - m) * (p - m);
                }
            }
        }
        var.into_iter()
            .map(|row| row.into_iter().map(|v| (v / ((n - 1) as f64 * n as f64)).sqrt()).collect())
            .collect()
    });
    Ok(EnsembleEstimate {
        times: first.times.clone(),
        p_mean: mean,
        p_stderr: stderr,
        n_traj: n,
    })
}
