use phonon_blockade::lindblad::{converged_steady_state, Purpose};
use phonon_blockade::mcwf::{ensemble_average, run_ensemble, EnsembleEstimate};
use phonon_blockade::qpd::{qpd_grid, PhaseSpaceGrid};
use phonon_blockade::{build_kerr_hamiltonian, build_liouvillian, steady_state, Frame, Ket, ReducedParams};

fn blockade_params() -> ReducedParams {
    ReducedParams::kerr(30.0, 3.0, 1.0, 0.01).unwrap()
}

fn ensemble(n_traj: usize, master_seed: u64, threads: usize) -> EnsembleEstimate {
    let p = blockade_params();
    let dim = 13;
    let h = build_kerr_hamiltonian(&p, dim, Frame::ResonantRotating).unwrap();
    let l = build_liouvillian(&h.static_part, p.gamma, p.nbar).unwrap();
    let times: Vec<f64> = (0..21).map(|k| k as f64 * 0.5).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let trajs = pool
        .install(|| run_ensemble(&Ket::basis(dim, 0).unwrap(), &h, l.collapse_ops(), &times, master_seed, n_traj))
        .unwrap();
    ensemble_average(&trajs).unwrap()
}

#[test]
fn steady_state_stable_under_larger_truncation() {
    let p = blockade_params();
    let sol = converged_steady_state(&p, None, Purpose::Dynamics).unwrap();
    let dim = sol.dim + 5;
    let h = build_kerr_hamiltonian(&p, dim, Frame::ResonantRotating).unwrap();
    let bigger = steady_state(&build_liouvillian(&h.static_part, p.gamma, p.nbar).unwrap()).unwrap();
    for (a, b) in sol.rho.populations().iter().zip(bigger.populations()) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
    let coherence = (sol.rho.get(0, 1) - bigger.get(0, 1)).norm();
    assert!(coherence < 1e-8);
}

#[test]
fn standard_error_scales_as_inverse_sqrt_trajectories() {
    let small = ensemble(1000, 11, 4);
    let large = ensemble(4000, 12, 4);
    let (se_small, se_large) = (small.p_stderr.unwrap(), large.p_stderr.unwrap());
    // P1 after the first half-lifetime, where it fluctuates between trajectories
    let ratios: Vec<f64> = (2..se_small.len()).map(|k| se_large[k][1] / se_small[k][1]).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!((mean / 0.5 - 1.0).abs() < 0.3, "stderr ratio {mean}");
}

#[test]
fn ensemble_independent_of_thread_count() {
    let one = ensemble(200, 5, 1);
    let many = ensemble(200, 5, 6);
    assert_eq!(one.p_mean, many.p_mean);
    assert_eq!(one.p_stderr, many.p_stderr);
}

#[test]
fn phase_space_map_independent_of_thread_count() {
    let rho = converged_steady_state(&blockade_params(), None, Purpose::Dynamics).unwrap().rho;
    let grid = PhaseSpaceGrid::square(3.0, 41).unwrap();
    let at = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| qpd_grid(&rho, &grid, 0.5).unwrap()).values
    };
    assert_eq!(at(1), at(5));
}
