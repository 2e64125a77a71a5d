use phonon_blockade::lindblad::{converged_steady_state, evolve, Purpose};
use phonon_blockade::qpd::{qpd_grid, PhaseSpaceGrid};
use phonon_blockade::{DensityMatrix, ReducedParams};
use proptest::prelude::*;

fn kerr_params() -> impl Strategy<Value = ReducedParams> {
    (5.0f64..40.0, 0.2f64..2.0, 0.5f64..2.0, 0.0f64..0.3)
        .prop_map(|(kappa, eps, gamma, nbar)| ReducedParams::kerr(kappa, eps, gamma, nbar).unwrap())
}

fn assert_physical(rho: &DensityMatrix) -> Result<(), TestCaseError> {
    prop_assert!((rho.trace().re - 1.0).abs() < 1e-8, "trace {}", rho.trace());
    prop_assert!(rho.trace().im.abs() < 1e-8);
    prop_assert!(rho.hermiticity_defect() < 1e-10);
    prop_assert!(rho.min_eigenvalue() > -1e-8, "min eigenvalue {}", rho.min_eigenvalue());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn steady_state_is_a_density_matrix(p in kerr_params()) {
        let sol = converged_steady_state(&p, None, Purpose::Dynamics).unwrap();
        assert_physical(&sol.rho)?;
        prop_assert!(sol.tail_mass < 1e-8);
    }

    #[test]
    fn evolution_preserves_trace_hermiticity_positivity(p in kerr_params()) {
        let sol = converged_steady_state(&p, None, Purpose::Dynamics).unwrap();
        let times: Vec<f64> = (0..9).map(|k| k as f64 * 0.5 / p.gamma).collect();
        let ev = evolve(&DensityMatrix::fock(sol.dim, 0).unwrap(), &sol.liouvillian, &[], &times).unwrap();
        for rho in &ev.states {
            assert_physical(rho)?;
        }
    }

    #[test]
    fn husimi_is_nonnegative_and_distributions_normalized(p in kerr_params()) {
        let rho = converged_steady_state(&p, None, Purpose::Dynamics).unwrap().rho;
        let grid = PhaseSpaceGrid::square(6.0, 121).unwrap();
        let q = qpd_grid(&rho, &grid, -1.0).unwrap();
        prop_assert!(q.min_value >= -1e-12, "Husimi min {}", q.min_value);
        prop_assert!((q.normalization() - 1.0).abs() < 1e-3, "Husimi norm {}", q.normalization());
        let w = qpd_grid(&rho, &grid, 0.0).unwrap();
        prop_assert!((w.normalization() - 1.0).abs() < 1e-3, "Wigner norm {}", w.normalization());
    }
}
