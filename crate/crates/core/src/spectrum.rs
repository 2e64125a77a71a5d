//! Steady-state EMF correlation ⟨V(0)V(τ)⟩ and its power spectrum.
//!
//! The correlation follows the regression contract C(τ) = Tr[V e^{Lτ}(ρ_ss V)]
//! in the rotating frame. Because ⟨V⟩ ≠ 0 under a coherent drive, the constant
//! ⟨V⟩² is split off before the transform; it contributes only a delta at ω′ = 0,
//! reported as `coherent_weight`.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{annihilation_op, expectation, DensityMatrix, Operator, C64};
use crate::hermitian::HermitianBasis;
use crate::lindblad::{converged_steady_state, relative_residual, Liouvillian, Purpose};
use crate::linalg::expm;
use crate::model::ReducedParams;

/// Number of lag samples.
pub const LAG_SAMPLES: usize = 1 << 14;
/// Required decay |C_c(τ_max)| / |C_c(0)| of the connected correlation.
pub const DECAY_LIMIT: f64 = 1e-6;
/// Largest relative steady-state residual accepted by the correlation.
pub const STALE_LIMIT: f64 = 1e-8;
const BLOCK: usize = 128;

/// V = i(a† − a), the EMF with its prefactor set to one.
pub fn emf_operator(dim: usize) -> Result<Operator> {
    let a = annihilation_op(dim)?;
    Ok(&(&a.dagger() - &a) * C64::new(0.0, 1.0))
}

/// Lag spacing and count: τ_max = max(32/γ, 4π/ε) over [`LAG_SAMPLES`] points.
pub fn lag_grid(epsilon: f64, gamma: f64) -> Result<Vec<f64>> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument("spectra need gamma > 0".into()));
    }
    let mut t_max = 32.0 / gamma;
    if epsilon > 0.0 {
        t_max = t_max.max(4.0 * std::f64::consts::PI / epsilon);
    }
    let dt = t_max / LAG_SAMPLES as f64;
    Ok((0..LAG_SAMPLES).map(|k| k as f64 * dt).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationSeries {
    pub taus: Vec<f64>,
    /// C(τ) = ⟨V(0)V(τ)⟩ including the coherent part.
    pub values: Vec<C64>,
    /// ⟨V⟩ in the steady state.
    pub mean: f64,
}

impl CorrelationSeries {
    /// C(τ) − ⟨V⟩².
    pub fn connected(&self) -> Vec<C64> {
        let c = self.mean * self.mean;
        self.values.iter().map(|v| v - c).collect()
    }

    pub fn dtau(&self) -> f64 {
        self.taus[1] - self.taus[0]
    }

    /// CSV `tau,re,im`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "tau,re,im")?;
        for (t, v) in self.taus.iter().zip(&self.values) {
            writeln!(out, "{},{},{}", t, v.re, v.im)?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumSeries {
    /// Rotating-frame detuning ω′, ascending.
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
    /// Weight 2π⟨V⟩² of the delta at ω′ = 0 removed from `values`.
    pub coherent_weight: f64,
    /// Largest |Im S| before it was discarded.
    pub max_imag: f64,
}

impl SpectrumSeries {
    pub fn d_omega(&self) -> f64 {
        self.omegas[1] - self.omegas[0]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::MAX, f64::min)
    }

    /// ∫ S dω′/(2π) by the rectangle rule.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.d_omega() / (2.0 * std::f64::consts::PI)
    }

    /// Value at the sample closest to ω′.
    pub fn at(&self, omega: f64) -> f64 {
        let k = ((omega - self.omegas[0]) / self.d_omega()).round().clamp(0.0, (self.omegas.len() - 1) as f64);
        self.values[k as usize]
    }

    /// CSV `omega,S`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "omega,S")?;
        for (w, v) in self.omegas.iter().zip(&self.values) {
            writeln!(out, "{},{}", w, v)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn uniform_step(taus: &[f64]) -> Result<f64> {
    if taus.len() < 2 || taus[0] != 0.0 {
        return Err(Error::InvalidArgument("lags must start at 0 with at least two samples".into()));
    }
    let dt = taus[1];
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument("lag spacing must be positive".into()));
    }
    for (k, t) in taus.iter().enumerate() {
        if (t - k as f64 * dt).abs() > 1e-9 * dt.max(k as f64 * dt) {
            return Err(Error::InvalidArgument("lags must be uniformly spaced".into()));
        }
    }
    Ok(dt)
}

fn matrix_power(p: &DMatrix<f64>, mut e: usize) -> DMatrix<f64> {
    let mut base = p.clone();
    let mut acc = DMatrix::identity(p.nrows(), p.ncols());
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// C(τ_k) = Tr[V e^{Lτ_k}(ρ_ss V)] on uniform lags starting at 0.
///
/// With P = e^{L dτ} in Hermitian coordinates, c(Bj + i) = ((Pᵀ)^{Bj} w) · (P^i x),
/// so only B + M/B matrix-vector products and one power P^B are needed.
pub fn two_time_correlation(rho_ss: &DensityMatrix, l: &Liouvillian, v: &Operator, taus: &[f64]) -> Result<CorrelationSeries> {
    let n = l.dim();
    for d in [rho_ss.dim(), v.dim()] {
        if d != n {
            return Err(Error::Shape { expected: n, actual: d });
        }
    }
    let dt = uniform_step(taus)?;
    let residual = relative_residual(l, rho_ss);
    if !(residual <= STALE_LIMIT) {
        return Err(Error::StaleSteadyState {
            residual,
            limit: STALE_LIMIT,
        });
    }

    let basis = HermitianBasis::new(n);
    let p = expm(&(l.real_matrix(&basis) * dt));
    let x = rho_ss.entries() * v.matrix();
    let (h1, h2) = HermitianBasis::split(&x);
    let w = basis.trace_functional(v.matrix());

    let m = taus.len();
    let b = BLOCK.min(m);
    let blocks = m.div_ceil(b);
    let dim = basis.len();
    let mut baby = DMatrix::<f64>::zeros(dim, 2 * b);
    let (mut x1, mut x2) = (basis.coords(&h1), basis.coords(&h2));
    for i in 0..b {
        baby.set_column(2 * i, &x1);
        baby.set_column(2 * i + 1, &x2);
        if i + 1 < b {
            x1 = &p * x1;
            x2 = &p * x2;
        }
    }
    let giant_t = matrix_power(&p, b).transpose();
    let mut giant = DMatrix::<f64>::zeros(dim, blocks);
    let mut wj: DVector<f64> = w;
    for j in 0..blocks {
        giant.set_column(j, &wj);
        if j + 1 < blocks {
            wj = &giant_t * wj;
        }
    }
    let prod = giant.transpose() * baby;
    let mut values = Vec::with_capacity(m);
    for k in 0..m {
        let (j, i) = (k / b, k % b);
        values.push(C64::new(prod[(j, 2 * i)], prod[(j, 2 * i + 1)]));
    }

    let v2 = expectation(rho_ss, &(v * v))?.value;
    if (values[0] - v2).norm() > 1e-8 * v2.norm().max(1.0) {
        return Err(Error::InvalidState(format!(
            "C(0) = {} disagrees with Tr[V²ρ] = {}",
            values[0], v2
        )));
    }
    let mean = expectation(rho_ss, v)?.re();
    Ok(CorrelationSeries {
        taus: taus.to_vec(),
        values,
        mean,
    })
}

/// S(ω′) = 2 Re ∫₀^∞ C_c(τ) e^{iω′τ} dτ for the connected correlation, by an
/// inverse FFT of the Hermitian extension C_c(−τ) = C_c(τ)*.
pub fn power_spectrum(c: &CorrelationSeries) -> Result<SpectrumSeries> {
    let m = c.values.len();
    let dt = uniform_step(&c.taus)?;
    let conn = c.connected();
    let c0 = conn[0].norm();
    let ratio = if c0 > 0.0 { conn[m - 1].norm() / c0 } else { 0.0 };
    if !(ratio < DECAY_LIMIT) {
        return Err(Error::TruncatedCorrelation { ratio });
    }

    let len = 2 * m;
    let mut buf = vec![C64::new(0.0, 0.0); len];
    buf[0] = C64::new(conn[0].re, 0.0);
    for k in 1..m {
        buf[k] = conn[k];
        buf[len - k] = conn[k].conj();
    }
    FftPlanner::new().plan_fft_inverse(len).process(&mut buf);

    let d_omega = 2.0 * std::f64::consts::PI / (len as f64 * dt);
    let mut omegas = Vec::with_capacity(len);
    let mut values = Vec::with_capacity(len);
    let mut max_imag = 0.0f64;
    for j in 0..len {
        // negative frequencies first
        let idx = (j + m) % len;
        let freq = (j as f64 - m as f64) * d_omega;
        omegas.push(freq);
        values.push(buf[idx].re * dt);
        max_imag = max_imag.max((buf[idx].im * dt).abs());
    }
    Ok(SpectrumSeries {
        omegas,
        values,
        coherent_weight: 2.0 * std::f64::consts::PI * c.mean * c.mean,
        max_imag,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Peak {
    pub frequency: f64,
    pub height: Option<f64>,
    /// Full width at half prominence.
    pub width: Option<f64>,
    /// Predicted position whose peak is expected to be missing.
    pub expected_absent: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
}

impl PeakSet {
    fn sorted(mut peaks: Vec<Peak>) -> Self {
        peaks.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
        Self { peaks }
    }

    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    /// Highest peak with frequency in [lo, hi].
    pub fn tallest_in(&self, lo: f64, hi: f64) -> Option<&Peak> {
        self.peaks
            .iter()
            .filter(|p| p.frequency >= lo && p.frequency <= hi)
            .max_by(|a, b| a.height.unwrap_or(0.0).total_cmp(&b.height.unwrap_or(0.0)))
    }

    /// Peak closest to ω′.
    pub fn nearest(&self, omega: f64) -> Option<&Peak> {
        self.peaks
            .iter()
            .min_by(|a, b| (a.frequency - omega).abs().total_cmp(&(b.frequency - omega).abs()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    TwoLevel,
    ThreeLevel,
}

/// Analytic peak centers of the truncated two- and three-level models.
pub fn predicted_peaks(epsilon: f64, kappa: f64, gamma: f64, nbar: f64, level: Level) -> Result<PeakSet> {
    let e = epsilon.abs();
    let at = |frequency: f64, expected_absent: bool| Peak {
        frequency,
        height: None,
        width: None,
        expected_absent,
    };
    match level {
        Level::TwoLevel => {
            let radicand = (8.0 * e).powi(2) - (gamma * (1.0 + 2.0 * nbar)).powi(2);
            if radicand < 0.0 {
                return Err(Error::Overdamped);
            }
            let w1 = 0.25 * radicand.sqrt();
            // the central line does not appear for a real drive amplitude
            Ok(PeakSet::sorted(vec![at(-w1, false), at(0.0, true), at(w1, false)]))
        }
        Level::ThreeLevel => {
            if !(kappa > 0.0) {
                return Err(Error::InvalidArgument("three-level peaks need kappa > 0".into()));
            }
            let d = e * e / (8.0 * kappa * kappa);
            let inner = 2.0 * e * (1.0 - d);
            let center = 2.0 * kappa * (1.0 + 6.0 * d);
            let split = e * (1.0 - d);
            let freqs = [
                0.0,
                inner,
                -inner,
                center + split,
                center - split,
                -(center + split),
                -(center - split),
            ];
            Ok(PeakSet::sorted(freqs.iter().map(|&f| at(f, false)).collect()))
        }
    }
}

/// Local maxima with prominence at least `min_prominence`, centers refined by a
/// parabola through the three highest samples.
pub fn find_peaks(s: &SpectrumSeries, min_prominence: f64) -> PeakSet {
    let v = &s.values;
    let n = v.len();
    let dw = s.d_omega();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if !(v[i] > v[i - 1]) {
            i += 1;
            continue;
        }
        // plateau: advance to its right edge
        let mut r = i;
        while r + 1 < n && v[r + 1] == v[i] {
            r += 1;
        }
        if r + 1 >= n || !(v[r + 1] < v[i]) {
            i = r + 1;
            continue;
        }
        let top = v[i];
        let mut left_min = top;
        let mut k = i;
        while k > 0 {
            k -= 1;
            if v[k] > top {
                break;
            }
            left_min = left_min.min(v[k]);
        }
        let mut right_min = top;
        let mut k = r;
        while k + 1 < n {
            k += 1;
            if v[k] > top {
                break;
            }
            right_min = right_min.min(v[k]);
        }
        let prominence = top - left_min.max(right_min);
        if prominence >= min_prominence {
            let c = (i + r) / 2;
            let (a, b, cc) = (v[c - 1], v[c], v[c + 1]);
            let denom = a - 2.0 * b + cc;
            let offset = if i == r && denom < 0.0 { 0.5 * (a - cc) / denom } else { 0.0 };
            let frequency = s.omegas[c] + offset * dw;
            let height = b - 0.25 * (a - cc) * offset;
            let level = top - prominence / 2.0;
            let mut lo = i;
            while lo > 0 && v[lo] > level {
                lo -= 1;
            }
            let mut hi = r;
            while hi + 1 < n && v[hi] > level {
                hi += 1;
            }
            let cross = |inside: usize, outside: usize| {
                let (yi, yo) = (v[inside], v[outside]);
                let frac = if yi != yo { (yi - level) / (yi - yo) } else { 0.0 };
                s.omegas[inside] + frac * (s.omegas[outside] - s.omegas[inside])
            };
            let left = if v[lo] <= level { cross(lo + 1, lo) } else { s.omegas[lo] };
            let right = if v[hi] <= level { cross(hi - 1, hi) } else { s.omegas[hi] };
            peaks.push(Peak {
                frequency,
                height: Some(height),
                width: Some(right - left),
                expected_absent: false,
            });
        }
        i = r + 1;
    }
    PeakSet::sorted(peaks)
}

/// Steady state, correlation and spectrum of the rotating-frame Kerr model.
#[derive(Clone, Debug)]
pub struct SpectrumRun {
    pub dim: usize,
    pub rho: DensityMatrix,
    pub correlation: CorrelationSeries,
    pub spectrum: SpectrumSeries,
}

/// Full pipeline at the policy truncation (or `dim` as the starting point).
pub fn steady_state_spectrum(params: &ReducedParams, dim: Option<usize>) -> Result<SpectrumRun> {
    let sol = converged_steady_state(params, dim, Purpose::Spectrum)?;
    let v = emf_operator(sol.dim)?;
    let taus = lag_grid(params.epsilon, params.gamma)?;
    let correlation = two_time_correlation(&sol.rho, &sol.liouvillian, &v, &taus)?;
    let spectrum = power_spectrum(&correlation)?;
    Ok(SpectrumRun {
        dim: sol.dim,
        rho: sol.rho,
        correlation,
        spectrum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{build_liouvillian, steady_state};
    use crate::model::{build_kerr_hamiltonian, Frame};

    fn series(omegas: Vec<f64>, values: Vec<f64>) -> SpectrumSeries {
        SpectrumSeries {
            omegas,
            values,
            coherent_weight: 0.0,
            max_imag: 0.0,
        }
    }

    fn lorentz(w: f64, w0: f64, hw: f64) -> f64 {
        hw * hw / ((w - w0).powi(2) + hw * hw)
    }

    #[test]
    fn emf_operator_structure() {
        let v = emf_operator(6).unwrap();
        assert_eq!(v.hermiticity_defect(), 0.0);
        assert!(((v.matrix() * v.matrix())[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        for n in 0..6 {
            assert_eq!(v.get(n, n), C64::new(0.0, 0.0));
        }
        assert!(emf_operator(1).is_err());
    }

    #[test]
    fn lag_grid_covers_decay_and_drive() {
        let t = lag_grid(3.0, 0.5).unwrap();
        assert_eq!(t.len(), LAG_SAMPLES);
        assert!((t[LAG_SAMPLES - 1] + t[1] - 64.0).abs() < 1e-12);
        let slow_drive = lag_grid(0.01, 1.0).unwrap();
        assert!((slow_drive[LAG_SAMPLES - 1] + slow_drive[1] - 4.0 * std::f64::consts::PI / 0.01).abs() < 1e-9);
        assert!(lag_grid(3.0, 0.0).is_err());
    }

    #[test]
    fn vacuum_correlation_and_lorentzian() {
        let (gamma, dim) = (0.5, 12);
        let r = ReducedParams::kerr(30.0, 0.0, gamma, 0.0).unwrap();
        let h = build_kerr_hamiltonian(&r, dim, Frame::ResonantRotating).unwrap();
        let l = build_liouvillian(&h.static_part, gamma, 0.0).unwrap();
        let rho = steady_state(&l).unwrap();
        let taus = lag_grid(0.0, gamma).unwrap();
        let c = two_time_correlation(&rho, &l, &emf_operator(dim).unwrap(), &taus).unwrap();
        for (t, v) in taus.iter().zip(&c.values) {
            assert!((v - C64::new((-gamma * t / 2.0).exp(), 0.0)).norm() < 1e-6);
        }
        let s = power_spectrum(&c).unwrap();
        assert!(s.max_imag < 1e-8 * s.max_value());
        let peak = s.at(0.0);
        assert!((peak / (4.0 / gamma) - 1.0).abs() < 0.01);
        let found = find_peaks(&s, 0.1 * peak);
        assert_eq!(found.len(), 1);
        let p = found.peaks[0];
        assert!(p.frequency.abs() < s.d_omega());
        assert!((p.width.unwrap() / gamma - 1.0).abs() < 0.01, "{:?}", p.width);
        assert!((s.integral() - 1.0).abs() < 0.01);
    }

    #[test]
    fn stale_steady_state_is_rejected() {
        let dim = 10;
        let r = ReducedParams::kerr(30.0, 3.0, 1.0, 0.01).unwrap();
        let h = build_kerr_hamiltonian(&r, dim, Frame::ResonantRotating).unwrap();
        let l = build_liouvillian(&h.static_part, 1.0, 0.01).unwrap();
        let vac = DensityMatrix::fock(dim, 0).unwrap();
        let taus = lag_grid(3.0, 1.0).unwrap();
        assert!(matches!(
            two_time_correlation(&vac, &l, &emf_operator(dim).unwrap(), &taus),
            Err(Error::StaleSteadyState { .. })
        ));
    }

    #[test]
    fn short_window_is_rejected() {
        let (gamma, dim) = (1.0, 10);
        let r = ReducedParams::kerr(30.0, 0.0, gamma, 0.0).unwrap();
        let h = build_kerr_hamiltonian(&r, dim, Frame::ResonantRotating).unwrap();
        let l = build_liouvillian(&h.static_part, gamma, 0.0).unwrap();
        let rho = steady_state(&l).unwrap();
        let taus: Vec<f64> = (0..1024).map(|k| k as f64 * 0.01).collect();
        let c = two_time_correlation(&rho, &l, &emf_operator(dim).unwrap(), &taus).unwrap();
        assert!(matches!(power_spectrum(&c), Err(Error::TruncatedCorrelation { .. })));
    }

    #[test]
    fn irregular_lags_are_rejected() {
        let dim = 10;
        let r = ReducedParams::kerr(30.0, 0.0, 1.0, 0.0).unwrap();
        let h = build_kerr_hamiltonian(&r, dim, Frame::ResonantRotating).unwrap();
        let l = build_liouvillian(&h.static_part, 1.0, 0.0).unwrap();
        let rho = steady_state(&l).unwrap();
        let v = emf_operator(dim).unwrap();
        assert!(two_time_correlation(&rho, &l, &v, &[0.0, 0.1, 0.3]).is_err());
        assert!(two_time_correlation(&rho, &l, &v, &[0.1, 0.2, 0.3]).is_err());
    }

    #[test]
    fn correlation_matches_direct_propagation() {
        // oracle: dense complex propagator of the column-stacked superoperator
        let dim = 8;
        let r = ReducedParams::kerr(5.0, 1.0, 1.0, 0.1).unwrap();
        let h = build_kerr_hamiltonian(&r, dim, Frame::ResonantRotating).unwrap();
        let l = build_liouvillian(&h.static_part, 1.0, 0.1).unwrap();
        let rho = steady_state(&l).unwrap();
        let v = emf_operator(dim).unwrap();
        let taus: Vec<f64> = (0..300).map(|k| k as f64 * 0.05).collect();
        let c = two_time_correlation(&rho, &l, &v, &taus).unwrap();
        let x0 = DVector::from_column_slice((rho.entries() * v.matrix()).as_slice());
        for k in [0usize, 1, 17, 128, 129, 299] {
            let xt = expm(&(l.matrix() * C64::new(taus[k], 0.0))) * &x0;
            let xm = DMatrix::from_column_slice(dim, dim, xt.as_slice());
            let direct = (v.matrix() * xm).trace();
            assert!((c.values[k] - direct).norm() < 1e-10, "k = {k}");
        }
        assert!((c.values[0] - expectation(&rho, &(&v * &v)).unwrap().value).norm() < 1e-10);
    }

    #[test]
    fn two_level_prediction() {
        let p = predicted_peaks(3.0, 30.0, 0.5, 0.0, Level::TwoLevel).unwrap();
        assert_eq!(p.len(), 3);
        assert!((p.peaks[2].frequency - 5.99869777).abs() < 1e-7);
        assert!(p.peaks[1].expected_absent && p.peaks[1].frequency == 0.0);
        let edge = predicted_peaks(1.0, 30.0, 8.0 / 1.5, 0.25, Level::TwoLevel).unwrap();
        assert!(edge.peaks[2].frequency.abs() < 1e-12);
        assert!(matches!(predicted_peaks(1.0, 30.0, 9.0, 0.0, Level::TwoLevel), Err(Error::Overdamped)));
    }

    #[test]
    fn three_level_prediction() {
        let p = predicted_peaks(3.0, 30.0, 0.5, 0.0, Level::ThreeLevel).unwrap();
        assert_eq!(p.len(), 7);
        let d = 9.0 / 7200.0;
        let f: Vec<f64> = p.peaks.iter().map(|x| x.frequency).collect();
        assert!((f[5] - (60.0 * (1.0 + 6.0 * d) - 3.0 * (1.0 - d))).abs() < 1e-12);
        assert!((f[6] - (60.45 + 2.99625)).abs() < 1e-12);
        assert!((f[4] - 6.0 * (1.0 - d)).abs() < 1e-12);
        assert!(f.windows(2).all(|w| w[0] < w[1]));
        assert!((f[5] - 57.0).abs() < 0.5 && (f[6] - 63.0).abs() < 0.5);
    }

    #[test]
    fn synthetic_peak_detection() {
        let omegas: Vec<f64> = (0..2001).map(|k| -20.0 + 0.02 * k as f64).collect();
        let single: Vec<f64> = omegas.iter().map(|&w| lorentz(w, 0.0, 0.5)).collect();
        let p = find_peaks(&series(omegas.clone(), single), 0.1);
        assert_eq!(p.len(), 1);
        assert!(p.peaks[0].frequency.abs() < 0.02);
        assert!((p.peaks[0].width.unwrap() - 1.0).abs() < 0.02);

        let double: Vec<f64> = omegas.iter().map(|&w| lorentz(w, -6.0, 0.3) + lorentz(w, 6.0, 0.3)).collect();
        let p = find_peaks(&series(omegas.clone(), double), 0.1);
        assert_eq!(p.len(), 2);
        assert!((p.peaks[0].frequency + 6.0).abs() < 0.01);
        assert!((p.peaks[1].frequency - 6.0).abs() < 0.01);
        assert!(p.peaks.iter().all(|x| x.height.unwrap() > 0.0));

        let flat = vec![1.0; omegas.len()];
        assert!(find_peaks(&series(omegas, flat), 0.0).is_empty());
    }

    #[test]
    fn sub_bin_refinement() {
        let omegas: Vec<f64> = (0..401).map(|k| -4.0 + 0.02 * k as f64).collect();
        let values: Vec<f64> = omegas.iter().map(|&w| lorentz(w, 1.013, 0.4)).collect();
        let p = find_peaks(&series(omegas, values), 0.1);
        assert!((p.peaks[0].frequency - 1.013).abs() < 0.002);
    }

    #[test]
    fn spectrum_is_even_in_drive_sign() {
        let (dim, gamma) = (12, 1.0);
        let spec = |eps: f64| {
            let r = ReducedParams::kerr(30.0, eps, gamma, 0.01).unwrap();
            let h = build_kerr_hamiltonian(&r, dim, Frame::ResonantRotating).unwrap();
            let l = build_liouvillian(&h.static_part, gamma, 0.01).unwrap();
            let rho = steady_state(&l).unwrap();
            let taus: Vec<f64> = (0..4096).map(|k| k as f64 * 0.01).collect();
            two_time_correlation(&rho, &l, &emf_operator(dim).unwrap(), &taus).unwrap()
        };
        let (a, b) = (spec(3.0), spec(-3.0));
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).norm() < 1e-10);
        }
        assert!((a.mean + b.mean).abs() < 1e-12);
    }
}
