//! Device parameters, the mapping onto the driven Kerr oscillator, and the
//! Hamiltonians of both the effective and the full qubit–resonator model.
//!
//! Units: ħ = k_B = 1 and every frequency is an angular frequency. Quoted
//! "GHz" values are used as-is, without 2π factors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    annihilation_op, number_op, sigma_minus, sigma_plus, sigma_x, tensor, Operator, C64,
};

/// Raw device parameters of the qubit–resonator circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    #[serde(alias = "E_c")]
    pub charging_energy: f64,
    #[serde(alias = "N_x")]
    pub cooper_pair_number: f64,
    #[serde(alias = "X_0")]
    pub zero_point_amplitude: f64,
    #[serde(alias = "d")]
    pub distance: f64,
    #[serde(alias = "B")]
    pub magnetic_field: f64,
    #[serde(alias = "I_0")]
    pub probe_current: f64,
    #[serde(alias = "L")]
    pub length: f64,
    /// Resonator frequency ω.
    pub omega: f64,
    /// Qubit frequency ω₀.
    #[serde(alias = "omega_0")]
    pub omega_qubit: f64,
    /// Rabi frequency Ω of the resonant qubit drive.
    #[serde(alias = "Omega")]
    pub rabi: f64,
    /// Probe-current frequency ω₂.
    #[serde(alias = "omega_2")]
    pub omega_probe: f64,
    #[serde(alias = "T")]
    pub temperature: f64,
    pub gamma: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.charging_energy,
            self.cooper_pair_number,
            self.zero_point_amplitude,
            self.distance,
            self.magnetic_field,
            self.probe_current,
            self.length,
            self.omega,
            self.omega_qubit,
            self.rabi,
            self.omega_probe,
            self.temperature,
            self.gamma,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("physical parameters must be finite".into()));
        }
        if self.omega <= 0.0 || self.omega_qubit <= 0.0 {
            return Err(Error::InvalidArgument("omega and omega_0 must be positive".into()));
        }
        if self.rabi < 0.0 {
            return Err(Error::InvalidArgument("Rabi frequency must be non-negative".into()));
        }
        if self.gamma < 0.0 || self.temperature < 0.0 {
            return Err(Error::InvalidArgument("gamma and T must be non-negative".into()));
        }
        if self.distance == 0.0 {
            return Err(Error::InvalidArgument("qubit–resonator distance is zero".into()));
        }
        Ok(())
    }

    /// Δ = ω₀ − ω.
    pub fn detuning(&self) -> f64 {
        self.omega_qubit - self.omega
    }

    /// g = 4 E_c N_x X₀ / d.
    pub fn coupling(&self) -> f64 {
        4.0 * self.charging_energy * self.cooper_pair_number * self.zero_point_amplitude / self.distance
    }

    /// ε = −B I₀ L X₀ (signed).
    pub fn signed_drive(&self) -> f64 {
        -self.magnetic_field * self.probe_current * self.length * self.zero_point_amplitude
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    #[default]
    Positive,
    Negative,
}

impl Sign {
    pub fn of(x: f64) -> Self {
        if x.is_sign_negative() && x != 0.0 {
            Sign::Negative
        } else {
            Sign::Positive
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }

    pub fn factor(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }
}

/// Validity of the approximations behind the effective Kerr model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeFlags {
    /// 3 ≤ Δ/g ≤ 20.
    pub rwa_ok: bool,
    /// Δ/g ≥ 3.
    pub dispersive_ok: bool,
    /// Ω ≥ 10 g²/Δ.
    pub dressed_ok: bool,
    /// ε ≤ κ/10.
    pub weak_drive_ok: bool,
}

impl RegimeFlags {
    fn evaluate(g: f64, delta: f64, rabi: f64, kappa: f64, epsilon: f64) -> Self {
        let ratio = delta / g;
        Self {
            rwa_ok: (3.0..=20.0).contains(&ratio),
            dispersive_ok: ratio >= 3.0,
            dressed_ok: rabi >= 10.0 * g * g / delta,
            weak_drive_ok: epsilon <= kappa / 10.0,
        }
    }
}

/// Parameters of the driven, damped Kerr oscillator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub kappa: f64,
    /// |ε|; the sign lives in `epsilon_sign`.
    pub epsilon: f64,
    #[serde(default)]
    pub epsilon_sign: Sign,
    pub gamma: f64,
    pub nbar: f64,
    /// ω̄ = ω + κ − g²/Δ.
    #[serde(default)]
    pub omega_bar: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub g: f64,
    /// Declared probe frequency ω₂, if any.
    #[serde(default)]
    pub probe_frequency: Option<f64>,
    pub regime: RegimeFlags,
}

impl ReducedParams {
    /// Directly specified Kerr parameters. The device-level flags are taken as
    /// satisfied since no device is involved; only the weak-drive flag is evaluated.
    pub fn kerr(kappa: f64, epsilon: f64, gamma: f64, nbar: f64) -> Result<Self> {
        for (name, v) in [("kappa", kappa), ("epsilon", epsilon), ("gamma", gamma), ("nbar", nbar)] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} = {v}")));
            }
        }
        if gamma < 0.0 || nbar < 0.0 {
            return Err(Error::InvalidArgument("gamma and nbar must be non-negative".into()));
        }
        Ok(Self {
            kappa,
            epsilon: epsilon.abs(),
            epsilon_sign: Sign::of(epsilon),
            gamma,
            nbar,
            omega_bar: 0.0,
            delta: 0.0,
            g: 0.0,
            probe_frequency: None,
            regime: RegimeFlags {
                rwa_ok: true,
                dispersive_ok: true,
                dressed_ok: true,
                weak_drive_ok: epsilon.abs() <= kappa / 10.0,
            },
        })
    }

    pub fn signed_epsilon(&self) -> f64 {
        self.epsilon_sign.factor() * self.epsilon
    }

    pub fn with_omega_bar(mut self, omega_bar: f64) -> Self {
        self.omega_bar = omega_bar;
        self
    }

    pub fn with_probe(mut self, omega_probe: f64) -> Self {
        self.probe_frequency = Some(omega_probe);
        self
    }
}

/// n̄ = 1/(e^{ω/T} − 1), zero at T = 0.
pub fn thermal_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    nbar_from_beta(omega / temperature)
}

/// n̄ as a function of β = ħω/(k_B T).
pub fn nbar_from_beta(beta: f64) -> f64 {
    if beta.is_infinite() {
        return 0.0;
    }
    1.0 / beta.exp_m1()
}

pub fn map_physical_params(p: &PhysicalParams) -> Result<ReducedParams> {
    p.validate()?;
    let delta = p.detuning();
    if delta == 0.0 {
        return Err(Error::DispersiveSingularity);
    }
    if p.rabi == 0.0 {
        return Err(Error::DegenerateDrive);
    }
    let g = p.coupling();
    let eps = p.signed_drive();
    let kappa = g.powi(4) / (p.rabi * delta * delta);
    let omega_bar = p.omega + kappa - g * g / delta;
    Ok(ReducedParams {
        kappa,
        epsilon: eps.abs(),
        epsilon_sign: Sign::of(eps),
        gamma: p.gamma,
        nbar: thermal_occupation(p.omega, p.temperature),
        omega_bar,
        delta,
        g,
        probe_frequency: Some(p.omega_probe),
        regime: RegimeFlags::evaluate(g, delta, p.rabi, kappa, eps.abs()),
    })
}

/// A term `operator · e^{−i·frequency·t}` of a time-dependent Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveTerm {
    pub operator: Operator,
    pub frequency: C64,
}

impl DriveTerm {
    pub fn coefficient(&self, t: f64) -> C64 {
        (C64::new(0.0, -1.0) * self.frequency * t).exp()
    }
}

/// H(t) = static + Σ_k O_k e^{−i ν_k t}.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSpec {
    pub static_part: Operator,
    pub drive_terms: Vec<DriveTerm>,
}

impl HamiltonianSpec {
    pub fn is_static(&self) -> bool {
        self.drive_terms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.static_part.dim()
    }

    pub fn at(&self, t: f64) -> Operator {
        let mut h = self.static_part.clone();
        for term in &self.drive_terms {
            h = &h + &term.operator.scale(term.coefficient(t));
        }
        h
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// Frame rotating at the probe frequency, with ω₂ = ω̄: time independent.
    ResonantRotating,
    /// ω̄a†a + κa†a(a†a−1) with an explicit probe at ω₂.
    LabEffective,
}

/// κ·a†a(a†a − 1).
pub fn kerr_term(kappa: f64, dim: usize) -> Result<Operator> {
    let n = number_op(dim)?;
    let n_minus = &n - &crate::fock::Operator::identity(dim)?;
    Ok(&(&n * &n_minus) * kappa)
}

pub fn build_kerr_hamiltonian(r: &ReducedParams, dim: usize, frame: Frame) -> Result<HamiltonianSpec> {
    if dim < 4 {
        return Err(Error::InvalidDimension { dim, min: 4 });
    }
    let a = annihilation_op(dim)?;
    let ad = a.dagger();
    let eps = r.signed_epsilon();
    let kerr = kerr_term(r.kappa, dim)?;
    match frame {
        Frame::ResonantRotating => {
            if let Some(w2) = r.probe_frequency {
                let scale = w2.abs().max(r.omega_bar.abs()).max(1.0);
                if (w2 - r.omega_bar).abs() > 1e-12 * scale {
                    return Err(Error::FrameMismatch {
                        probe: w2,
                        omega_bar: r.omega_bar,
                    });
                }
            }
            let drive = &(&a + &ad) * eps;
            Ok(HamiltonianSpec {
                static_part: &kerr + &drive,
                drive_terms: Vec::new(),
            })
        }
        Frame::LabEffective => {
            let w2 = r.probe_frequency.unwrap_or(r.omega_bar);
            let free = &number_op(dim)? * r.omega_bar;
            Ok(HamiltonianSpec {
                static_part: &free + &kerr,
                drive_terms: vec![
                    DriveTerm {
                        operator: &ad * eps,
                        frequency: C64::new(w2, 0.0),
                    },
                    DriveTerm {
                        operator: &a * eps,
                        frequency: C64::new(-w2, 0.0),
                    },
                ],
            })
        }
    }
}

/// Qubit ⊗ resonator Hamiltonian in the frame rotating at ω₀ for both parts:
/// −Δa†a + g(aσ₊ + a†σ₋) + Ω(σ₊ + σ₋), plus the probe when ε ≠ 0.
pub fn build_full_model(p: &PhysicalParams, dim: usize) -> Result<HamiltonianSpec> {
    if dim < 4 {
        return Err(Error::InvalidDimension { dim, min: 4 });
    }
    let r = map_physical_params(p)?;
    if !r.regime.rwa_ok || !r.regime.dispersive_ok {
        log::warn!(
            "full model outside its validity window: Δ/g = {:.3} (rwa_ok = {}, dispersive_ok = {})",
            r.delta / r.g,
            r.regime.rwa_ok,
            r.regime.dispersive_ok
        );
    }
    let id_q = Operator::identity(2)?;
    let id_r = Operator::identity(dim)?;
    let a = annihilation_op(dim)?;
    let ad = a.dagger();

    let free = &tensor(&id_q, &number_op(dim)?) * (-r.delta);
    let exchange = &(&tensor(&sigma_plus(), &a) + &tensor(&sigma_minus(), &ad)) * r.g;
    let rabi = &tensor(&sigma_x(), &id_r) * p.rabi;
    let static_part = &(&free + &exchange) + &rabi;

    let eps = r.signed_epsilon();
    let mut drive_terms = Vec::new();
    if eps != 0.0 {
        let nu = p.omega_probe - p.omega_qubit;
        drive_terms.push(DriveTerm {
            operator: &tensor(&id_q, &ad) * eps,
            frequency: C64::new(nu, 0.0),
        });
        drive_terms.push(DriveTerm {
            operator: &tensor(&id_q, &a) * eps,
            frequency: C64::new(-nu, 0.0),
        });
    }
    Ok(HamiltonianSpec {
        static_part,
        drive_terms,
    })
}

/// Second difference (E₂−E₁) − (E₁−E₀) of the ladder adiabatically connected
/// to |−⟩⊗|n⟩, obtained by dense diagonalization of the full static Hamiltonian.
pub fn dressed_ladder_anharmonicity(p: &PhysicalParams, dim: usize) -> Result<f64> {
    let h = build_full_model(p, dim)?;
    let eig = nalgebra::SymmetricEigen::new(h.static_part.matrix().clone());
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut levels = [0.0; 3];
    for (n, level) in levels.iter_mut().enumerate() {
        // |−⟩|n⟩ = (|g⟩|n⟩ − |e⟩|n⟩)/√2, qubit is the slow index
        let (ig, ie) = (n, dim + n);
        let (best, _) = (0..2 * dim)
            .map(|k| {
                let v = eig.eigenvectors.column(k);
                let overlap = (v[ig] * s - v[ie] * s).norm_sqr();
                (k, overlap)
            })
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        *level = eig.eigenvalues[best];
    }
    Ok((levels[2] - levels[1]) - (levels[1] - levels[0]))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn device(g: f64, delta: f64, rabi: f64) -> PhysicalParams {
        // E_c = g/4 with N_x = X_0 = d = 1 makes the coupling exactly g
        PhysicalParams {
            charging_energy: g / 4.0,
            cooper_pair_number: 1.0,
            zero_point_amplitude: 1.0,
            distance: 1.0,
            magnetic_field: 0.0,
            probe_current: 0.0,
            length: 1.0,
            omega: 1.0,
            omega_qubit: 1.0 + delta,
            rabi,
            omega_probe: 1.0,
            temperature: 0.0,
            gamma: 0.0,
        }
    }

    #[test]
    fn kappa_for_quoted_device_numbers() {
        let r = map_physical_params(&device(0.2, 1.0, 0.2)).unwrap();
        assert!((r.g - 0.2).abs() < 1e-15);
        assert!((r.kappa - 0.008).abs() < 1e-15);
    }

    #[test]
    fn kappa_scales_as_fourth_power_of_coupling() {
        let k1 = map_physical_params(&device(0.1, 0.9, 0.3)).unwrap().kappa;
        let k2 = map_physical_params(&device(0.2, 0.9, 0.3)).unwrap().kappa;
        assert_eq!(k2, 16.0 * k1);
    }

    #[test]
    fn renormalized_frequency_identity() {
        let r = map_physical_params(&device(0.2, 1.3, 0.4)).unwrap();
        assert!((r.omega_bar - 1.0 - (r.kappa - r.g * r.g / r.delta)).abs() < 1e-15);
    }

    #[test]
    fn thermal_occupation_limits() {
        assert_eq!(thermal_occupation(1.0, 0.0), 0.0);
        let n = nbar_from_beta(4.6);
        assert!((n - 0.01).abs() < 2e-4, "{n}");
        let mut p = device(0.2, 1.0, 0.2);
        p.temperature = 1.0 / 4.6;
        assert_eq!(map_physical_params(&p).unwrap().nbar, thermal_occupation(1.0, 1.0 / 4.6));
    }

    #[test]
    fn drive_sign_and_zero_field() {
        let mut p = device(0.2, 1.0, 0.2);
        p.magnetic_field = 2.0;
        p.probe_current = 0.5;
        p.zero_point_amplitude = 0.25;
        p.charging_energy = 0.2; // keep g = 0.2
        let r = map_physical_params(&p).unwrap();
        assert_eq!(r.epsilon, 0.25);
        assert_eq!(r.epsilon_sign, Sign::Negative);
        assert_eq!(r.signed_epsilon(), -0.25);
        p.magnetic_field = 0.0;
        assert_eq!(map_physical_params(&p).unwrap().epsilon, 0.0);
        p.magnetic_field = 2.0;
        p.probe_current = 0.0;
        assert_eq!(map_physical_params(&p).unwrap().epsilon, 0.0);
    }

    #[test]
    fn mapping_errors() {
        let p = device(0.2, 0.0, 0.2);
        assert!(matches!(map_physical_params(&p), Err(Error::DispersiveSingularity)));
        let p = device(0.2, 1.0, 0.0);
        assert!(matches!(map_physical_params(&p), Err(Error::DegenerateDrive)));
        let mut p = device(0.2, 1.0, 0.2);
        p.gamma = -1.0;
        assert!(map_physical_params(&p).is_err());
    }

    #[test]
    fn regime_flags_follow_thresholds() {
        let r = map_physical_params(&device(0.2, 1.0, 0.8)).unwrap();
        assert!(r.regime.rwa_ok && r.regime.dispersive_ok && r.regime.dressed_ok);
        // Ω = 0.2 = 5 g²/Δ misses the dressed threshold of 10 g²/Δ
        let r = map_physical_params(&device(0.2, 1.0, 0.2)).unwrap();
        assert!(!r.regime.dressed_ok);
        let r = map_physical_params(&device(0.2, 0.4, 0.8)).unwrap();
        assert!(!r.regime.rwa_ok && !r.regime.dispersive_ok);
        let r = map_physical_params(&device(0.2, 5.0, 0.8)).unwrap();
        assert!(!r.regime.rwa_ok && r.regime.dispersive_ok);
        let k = ReducedParams::kerr(30.0, 3.0, 1.0, 0.01).unwrap();
        assert!(k.regime.weak_drive_ok);
        let k = ReducedParams::kerr(30.0, 3.1, 1.0, 0.01).unwrap();
        assert!(!k.regime.weak_drive_ok);
    }

    #[test]
    fn rotating_frame_two_level_block() {
        let r = ReducedParams::kerr(30.0, 3.0, 1.0, 0.0).unwrap();
        let h = build_kerr_hamiltonian(&r, 6, Frame::ResonantRotating).unwrap();
        assert!(h.is_static());
        let m = h.static_part.matrix();
        assert_eq!(m[(0, 0)], C64::new(0.0, 0.0));
        assert_eq!(m[(1, 1)], C64::new(0.0, 0.0));
        assert_eq!(m[(0, 1)], C64::new(3.0, 0.0));
        assert_eq!(m[(1, 0)], C64::new(3.0, 0.0));
        assert_eq!(m[(2, 2)], C64::new(60.0, 0.0));
    }

    #[test]
    fn kerr_builder_errors() {
        let r = ReducedParams::kerr(30.0, 3.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            build_kerr_hamiltonian(&r, 3, Frame::ResonantRotating),
            Err(Error::InvalidDimension { dim: 3, min: 4 })
        ));
        let mismatched = r.clone().with_omega_bar(10.0).with_probe(10.5);
        assert!(matches!(
            build_kerr_hamiltonian(&mismatched, 8, Frame::ResonantRotating),
            Err(Error::FrameMismatch { .. })
        ));
        let matched = r.with_omega_bar(10.0).with_probe(10.0);
        assert!(build_kerr_hamiltonian(&matched, 8, Frame::ResonantRotating).is_ok());
    }

    #[test]
    fn lab_frame_structure() {
        let r = ReducedParams::kerr(30.0, 3.0, 1.0, 0.0).unwrap().with_omega_bar(50.0);
        let h = build_kerr_hamiltonian(&r, 6, Frame::LabEffective).unwrap();
        assert_eq!(h.drive_terms.len(), 2);
        assert_eq!(h.static_part.get(2, 2), C64::new(2.0 * 50.0 + 60.0, 0.0));
        // H(t) is Hermitian at any time
        for t in [0.0, 0.013, 1.7] {
            assert!(h.at(t).is_hermitian(1e-12));
        }
    }

    #[test]
    fn hamiltonians_are_hermitian() {
        let r = ReducedParams::kerr(7.0, 0.4, 1.0, 0.0).unwrap();
        for frame in [Frame::ResonantRotating, Frame::LabEffective] {
            let h = build_kerr_hamiltonian(&r, 12, frame).unwrap();
            assert!(h.static_part.is_hermitian(1e-12));
        }
        let mut p = device(0.2, 1.0, 0.8);
        p.magnetic_field = 1.0;
        p.probe_current = 0.01;
        let h = build_full_model(&p, 10).unwrap();
        assert!(h.static_part.is_hermitian(1e-12));
        assert_eq!(h.drive_terms.len(), 2);
        assert_eq!(h.static_part.dims(), &[2, 10]);
    }

    #[test]
    fn uncoupled_full_model_spectrum() {
        let (delta, rabi, dim) = (1.0, 0.3, 8);
        let h = build_full_model(&device(0.0, delta, rabi), dim).unwrap();
        let ev = h.static_part.hermitian_eigenvalues();
        let mut want: Vec<f64> = (0..dim)
            .flat_map(|n| [rabi - delta * n as f64, -rabi - delta * n as f64])
            .collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dressed_ladder_matches_leading_order_kerr() {
        let (g, delta) = (0.2, 1.0);
        let rabi = 20.0 * g * g / delta;
        let p = device(g, delta, rabi);
        let kappa = map_physical_params(&p).unwrap().kappa;
        let anh = dressed_ladder_anharmonicity(&p, 30).unwrap();
        let rel = (anh - 2.0 * kappa).abs() / (2.0 * kappa);
        assert!(rel < 0.25, "anharmonicity {anh}, 2κ {}", 2.0 * kappa);
    }

    #[test]
    fn anharmonicity_vanishes_at_large_detuning() {
        let (g, rabi) = (0.2, 0.8);
        let values: Vec<f64> = [10.0, 50.0, 250.0]
            .iter()
            .map(|&d| dressed_ladder_anharmonicity(&device(g, d, rabi), 20).unwrap().abs())
            .collect();
        assert!(values[0] > values[1] && values[1] > values[2], "{values:?}");
        // dispersive decoupling: |anharmonicity| falls off as Δ⁻²
        for w in values.windows(2) {
            assert!((w[0] / w[1] / 25.0 - 1.0).abs() < 0.1, "{values:?}");
        }
        assert!(values[2] < 1e-7);
    }

    #[test]
    fn deep_dispersive_dressed_limit() {
        // second order in (g²/Δ)(n + 1/2) across the dressed gap 2Ω shifts the
        // |−⟩ ladder by −g⁴n²/(2ΩΔ²), so the second difference tends to −κ
        let g = 0.2;
        for ratio in [20.0, 40.0] {
            let delta = ratio * g;
            let p = device(g, delta, 20.0 * g * g / delta);
            let kappa = map_physical_params(&p).unwrap().kappa;
            let anh = dressed_ladder_anharmonicity(&p, 20).unwrap();
            assert!((anh / kappa + 1.0).abs() < 0.02, "Δ/g = {ratio}: {anh} vs κ = {kappa}");
        }
    }
}
