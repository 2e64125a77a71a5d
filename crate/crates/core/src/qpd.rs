//! Cahill–Glauber s-parameterized quasiprobability distributions.
//!
//! W^(s)(α) = (1/π) Tr[ρ T^(s)(α)] with T^(s)(α) = 2/(1−s) · D(α) q^{a†a} D†(α)
//! and q = (s+1)/(s−1). The Fock matrix elements of D(α) q^{a†a} D†(α) have a
//! closed associated-Laguerre form, which is what the grid evaluation uses.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{displacement_op, parity_op, DensityMatrix, C64};

/// Threshold below which a QPD value counts as negative.
pub const NEGATIVITY_TOL: f64 = 1e-6;
/// Largest tolerated imaginary residue of Tr[ρ T^(s)].
pub const IMAG_TOL: f64 = 1e-9;
/// Bound on the Fock tail of the input state, weighted by |q|ⁿ when s > 0.
pub const TAIL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Default for PhaseSpaceGrid {
    fn default() -> Self {
        Self::square(4.0, 201).expect("valid default grid")
    }
}

impl PhaseSpaceGrid {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        let g = Self {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
        };
        g.validate()?;
        Ok(g)
    }

    /// [−half_width, half_width]² with n points per axis.
    pub fn square(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, -half_width, half_width, n, n)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite());
        if !finite || !(self.x_min < self.x_max) || !(self.y_min < self.y_max) {
            return Err(Error::InvalidArgument("grid bounds must be finite and increasing".into()));
        }
        if self.nx < 16 || self.ny < 16 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 16 points per axis, got {}×{}",
                self.nx, self.ny
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.dy()
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// α at flat index k, x varying slowest.
    pub fn alpha(&self, k: usize) -> C64 {
        C64::new(self.x(k / self.ny), self.y(k % self.ny))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QpdMap {
    pub grid: PhaseSpaceGrid,
    pub s: f64,
    /// values[i * ny + j] = W^(s)(x_i + i y_j)
    pub values: Vec<f64>,
    pub min_value: f64,
    pub argmin: C64,
    pub negative_volume: f64,
}

#[derive(Serialize)]
struct QpdSidecar<'a> {
    s: f64,
    grid: &'a PhaseSpaceGrid,
    min_value: f64,
    argmin: [f64; 2],
    negative_volume: f64,
    normalization: f64,
}

impl QpdMap {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.ny + j]
    }

    /// Σ W Δx Δy over the grid.
    pub fn normalization(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx() * self.grid.dy()
    }

    /// CSV with header `x,y,value`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "x,y,value")?;
        for (k, v) in self.values.iter().enumerate() {
            let a = self.grid.alpha(k);
            writeln!(out, "{},{},{}", a.re, a.im, v)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn sidecar_json(&self) -> Result<String> {
        let side = QpdSidecar {
            s: self.s,
            grid: &self.grid,
            min_value: self.min_value,
            argmin: [self.argmin.re, self.argmin.im],
            negative_volume: self.negative_volume,
            normalization: self.normalization(),
        };
        Ok(serde_json::to_string_pretty(&side)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NegativityWitness {
    pub is_negative: bool,
    pub min_value: f64,
    pub argmin: [f64; 2],
    pub negative_volume: f64,
}

pub fn negativity_witness(map: &QpdMap) -> NegativityWitness {
    NegativityWitness {
        is_negative: map.min_value < -NEGATIVITY_TOL,
        min_value: map.min_value,
        argmin: [map.argmin.re, map.argmin.im],
        negative_volume: map.negative_volume,
    }
}

fn check_s(s: f64) -> Result<()> {
    if s == 1.0 {
        return Err(Error::UnsupportedSingularDistribution);
    }
    if !(-1.0..1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("s = {s} outside [-1, 1)")));
    }
    Ok(())
}

/// The eigenvalues of D q^{a†a} D† grow as |q|ⁿ for s > 0, so the Fock sum is
/// only trustworthy when the populations near the cutoff, weighted by |q|ⁿ, are small.
fn check_tail(rho: &DensityMatrix, s: f64) -> Result<()> {
    let p = rho.populations();
    let n = p.len();
    let q = ((s + 1.0) / (s - 1.0)).abs().max(1.0);
    let tail = p[n - 1] * q.powi(n as i32 - 1) + p[n - 2] * q.powi(n as i32 - 2);
    if !(tail < TAIL_TOL) {
        return Err(Error::InvalidState(format!(
            "Fock tail weight {tail:e} too large for phase-space evaluation at s = {s}"
        )));
    }
    Ok(())
}

/// Precomputed per-state data for repeated point evaluation.
struct Evaluator<'a> {
    rho: &'a DensityMatrix,
    s: f64,
    q: f64,
    c: f64,
    ln_fact: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(rho: &'a DensityMatrix, s: f64) -> Self {
        let q = (s + 1.0) / (s - 1.0);
        let mut ln_fact = vec![0.0; rho.dim() + 1];
        for k in 1..ln_fact.len() {
            ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
        }
        Self {
            rho,
            s,
            q,
            c: q - 1.0,
            ln_fact,
        }
    }

    /// Tr[ρ D(α) q^{a†a} D†(α)] as a complex number.
    fn trace(&self, alpha: C64) -> C64 {
        let dim = self.rho.dim();
        let (q, c) = (self.q, self.c);
        let r2 = alpha.norm_sqr();
        // |A| = |c||α|, arg A = arg α since c < 0
        let ln_a = (-c * alpha.norm()).ln();
        let phase = if alpha.norm() > 0.0 { alpha / alpha.norm() } else { C64::new(1.0, 0.0) };
        let mut total = C64::new(0.0, 0.0);
        for k in 0..dim {
            if k > 0 && alpha.norm() == 0.0 {
                break;
            }
            let phase_k = phase.powi(k as i32);
            let n_max = dim - k;
            if q == 0.0 {
                // only the (AB)^n/n! term survives: ⟨n+k|T'|n⟩ = e^{−|α|²} α^{n+k} conj(α)^n / √((n+k)! n!)
                for n in 0..n_max {
                    let m = n + k;
                    let ln_pow = if m + n == 0 { 0.0 } else { (m + n) as f64 * alpha.norm().ln() };
                    let ln_mag = -r2 + ln_pow - 0.5 * (self.ln_fact[m] + self.ln_fact[n]);
                    let elem = phase_k * ln_mag.exp();
                    total += self.pair(m, n, elem);
                }
                continue;
            }
            let x = -c * c * r2 / q;
            let ln_q = q.abs().ln();
            let q_sign = q.signum();
            // L_n^{(k)}(x) by forward recurrence, combined with the magnitude in log space
            let (mut l_prev, mut l_cur) = (0.0, 1.0);
            for n in 0..n_max {
                if n == 1 {
                    l_prev = 1.0;
                    l_cur = 1.0 + k as f64 - x;
                } else if n > 1 {
                    let j = (n - 1) as f64;
                    let next = ((2.0 * j + 1.0 + k as f64 - x) * l_cur - (j + k as f64) * l_prev) / (j + 1.0);
                    l_prev = l_cur;
                    l_cur = next;
                }
                let m = n + k;
                let mut ln_mag = c * r2 + 0.5 * (self.ln_fact[n] - self.ln_fact[m]) + n as f64 * ln_q;
                if k > 0 {
                    ln_mag += k as f64 * ln_a;
                }
                let sign = if n % 2 == 1 && q_sign < 0.0 { -1.0 } else { 1.0 };
                let elem = phase_k * (sign * l_cur * ln_mag.exp());
                total += self.pair(m, n, elem);
            }
        }
        total
    }

    /// Contribution of T'_mn and T'_nm = conj(T'_mn) to Σ ρ_nm T'_mn.
    fn pair(&self, m: usize, n: usize, elem: C64) -> C64 {
        if m == n {
            self.rho.get(n, m) * elem
        } else {
            self.rho.get(n, m) * elem + self.rho.get(m, n) * elem.conj()
        }
    }

    fn value(&self, alpha: C64) -> Result<f64> {
        let w = self.trace(alpha) * (2.0 / (PI * (1.0 - self.s)));
        if w.im.abs() > IMAG_TOL * w.re.abs().max(1.0) || !w.re.is_finite() {
            return Err(Error::InvalidState(format!("QPD residue {:e} at α = {alpha}", w.im)));
        }
        Ok(w.re)
    }
}

/// W^(s)(α) for s ∈ [−1, 1).
pub fn qpd_point(rho: &DensityMatrix, alpha: C64, s: f64) -> Result<f64> {
    check_s(s)?;
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::InvalidArgument(format!("α = {alpha}")));
    }
    check_tail(rho, s)?;
    Evaluator::new(rho, s).value(alpha)
}

/// W^(s) over a grid, evaluated in parallel; the result does not depend on the
/// number of threads.
pub fn qpd_grid(rho: &DensityMatrix, grid: &PhaseSpaceGrid, s: f64) -> Result<QpdMap> {
    check_s(s)?;
    grid.validate()?;
    check_tail(rho, s)?;
    let eval = Evaluator::new(rho, s);
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|k| eval.value(grid.alpha(k)))
        .collect::<Result<_>>()?;
    let (kmin, min_value) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
    let cell = grid.dx() * grid.dy();
    let negative_volume = values.iter().filter(|v| **v < 0.0).map(|v| -v * cell).sum();
    Ok(QpdMap {
        grid: *grid,
        s,
        values,
        min_value,
        argmin: grid.alpha(kmin),
        negative_volume,
    })
}

/// Wigner function from the displaced-parity identity W(α) = (2/π)Tr[ρ D(α) Π D†(α)],
/// with ρ embedded in `work_dim` levels so truncated displacements stay accurate.
pub fn wigner_by_parity(rho: &DensityMatrix, alpha: C64, work_dim: usize) -> Result<f64> {
    if work_dim < rho.dim() {
        return Err(Error::InvalidArgument(format!(
            "working dimension {work_dim} below state dimension {}",
            rho.dim()
        )));
    }
    let big = rho.embed(work_dim)?;
    let d = displacement_op(alpha, work_dim)?;
    let t = d.matrix() * parity_op(work_dim)?.matrix() * d.matrix().adjoint();
    let tr = (big.entries() * t).trace();
    Ok(2.0 / PI * tr.re)
}
