//! Time evolution from the vacuum, with and without damping.

use std::f64::consts::PI;

use phonon_blockade::lindblad::{converged_steady_state, policy_dimension, Purpose};
use phonon_blockade::mcwf::{ensemble_average, run_ensemble, run_trajectory, EnsembleEstimate, Trajectory};
use phonon_blockade::{build_kerr_hamiltonian, build_liouvillian, evolve, DensityMatrix, Evolution, Frame, Ket, ReducedParams};

use super::{blockade_row, evolution_invariants, fidelity, BLOCKADE_COLUMNS, DEFAULT_MCWF};
use crate::config::{ScenarioConfig, TimeGrid};
use crate::error::CliResult;
use crate::output::{Artifacts, Table};
use crate::report::{VerdictReport, INVARIANT_PREFIX};

/// Levels reported individually in the trajectory comparison; the rest are pooled.
const SHOWN_LEVELS: usize = 5;
/// Absolute slack added to the 3σ band, for levels whose sample spread is zero.
const MCWF_FLOOR: f64 = 1e-7;

pub(super) fn run_fig3a(cfg: &ScenarioConfig, files: &mut Artifacts, report: &mut VerdictReport) -> CliResult<()> {
    let params = cfg.reduced_params()?;
    let dim = cfg.dim.unwrap_or_else(|| policy_dimension(params.epsilon, params.gamma, params.nbar, Purpose::Dynamics));
    let grid = cfg.times.unwrap_or(TimeGrid {
        t_max: 10.0 / params.epsilon.max(f64::MIN_POSITIVE),
        samples: 401,
    });
    let times = grid.times();
    let h = build_kerr_hamiltonian(&params, dim, Frame::ResonantRotating)?;
    let l = build_liouvillian(&h.static_part, params.gamma, params.nbar)?;
    let ev = evolve(&DensityMatrix::fock(dim, 0)?, &l, &[], &times)?;
    files.table("populations.csv", &evolution_table(&ev, params.epsilon))?;

    let seed = cfg.mcwf.unwrap_or(DEFAULT_MCWF).master_seed;
    let traj = run_trajectory(&Ket::basis(dim, 0)?, &h, l.collapse_ops(), &times, seed)?;
    files.table("trajectory.csv", &trajectory_table(&traj))?;

    let min_f = ev.observables.fidelity.iter().copied().fold(f64::INFINITY, f64::min);
    report.at_least("min F over the window", min_f, 0.95);
    if params.gamma == 0.0 {
        report.push("no jumps without damping", "0", traj.jumps.len() as f64, 0.0, traj.jumps.is_empty());
        let mut worst = 0.0f64;
        for k in 0..times.len() {
            for (n, p) in traj.populations(k).iter().enumerate() {
                worst = worst.max((p - ev.observables.population(k, n)).abs());
            }
        }
        report.at_most("trajectory equals master-equation evolution", worst, 1e-6);
    }
    evolution_invariants(report, "evolution", &ev);

    let (fine, coarse) = floquet_benchmark(files)?;
    report.at_most("floquet remainder at eps/kappa = 0.01", fine, 2e-3);
    report.at_least("floquet remainder ratio 0.1 vs 0.01", coarse / fine, 50.0);
    Ok(())
}

pub(super) fn run_fig3b(cfg: &ScenarioConfig, files: &mut Artifacts, report: &mut VerdictReport) -> CliResult<()> {
    let params = cfg.reduced_params()?;
    let sol = converged_steady_state(&params, cfg.dim, Purpose::Dynamics)?;
    let dim = sol.dim;
    let f_ss = fidelity(&sol.rho);
    report.push("steady fidelity", "> 0.95", f_ss, 0.95, f_ss > 0.95);
    let coherence = sol.rho.get(0, 1).norm();
    report.push("steady coherence |<0|rho|1>|", "> 1e-3", coherence, 1e-3, coherence > 1e-3);
    let mut steady = Table::new(&BLOCKADE_COLUMNS);
    steady.push(blockade_row(&sol.rho));
    files.table("steady_state.csv", &steady)?;

    let times = cfg.times.unwrap_or(TimeGrid { t_max: 10.0, samples: 41 }).times();
    let h = build_kerr_hamiltonian(&params, dim, Frame::ResonantRotating)?;
    let l = &sol.liouvillian;
    let ev = evolve(&DensityMatrix::fock(dim, 0)?, l, &[], &times)?;
    files.table("populations.csv", &evolution_table(&ev, params.epsilon))?;
    let min_f = ev.observables.fidelity.iter().copied().fold(f64::INFINITY, f64::min);
    report.at_least("min F over the window", min_f, 0.95);
    evolution_invariants(report, "evolution", &ev);

    let mc = cfg.mcwf.unwrap_or(DEFAULT_MCWF);
    let trajs = run_ensemble(&Ket::basis(dim, 0)?, &h, l.collapse_ops(), &times, mc.master_seed, mc.n_traj)?;
    let est = ensemble_average(&trajs)?;
    files.table("mcwf_populations.csv", &ensemble_table(&est))?;
    files.table("jumps.csv", &jump_table(&trajs))?;
    trajectory_invariants(report, &trajs, &params, &times);
    compare_unraveling(report, &est, &ev);
    Ok(())
}

/// 3σ comparison of ensemble populations with the master equation, one check
/// per low level and one for all higher levels.
fn compare_unraveling(report: &mut VerdictReport, est: &EnsembleEstimate, ev: &Evolution) {
    let Some(se) = &est.p_stderr else {
        report.push("mcwf ensemble size", ">= 2", est.n_traj as f64, 2.0, false);
        return;
    };
    let dim = est.p_mean[0].len();
    let nt = est.times.len();
    let mut outside = vec![0usize; dim];
    let mut worst_z = vec![0.0f64; dim];
    for k in 0..nt {
        for n in 0..dim {
            let d = (est.p_mean[k][n] - ev.observables.population(k, n)).abs();
            if d > 3.0 * se[k][n] + MCWF_FLOOR {
                outside[n] += 1;
            }
            if se[k][n] > 0.0 {
                worst_z[n] = worst_z[n].max(d / se[k][n]);
            }
        }
    }
    let expected = format!("0 of {nt} times outside 3 stderr + {MCWF_FLOOR:e}");
    for n in 0..dim.min(SHOWN_LEVELS) {
        report.push(
            format!("mcwf P{n} within 3 stderr"),
            expected.clone(),
            serde_json::json!({"times_outside": outside[n], "worst_z": worst_z[n]}),
            3.0,
            outside[n] == 0,
        );
    }
    if dim > SHOWN_LEVELS {
        let rest: usize = outside[SHOWN_LEVELS..].iter().sum();
        report.push(
            format!("mcwf P{SHOWN_LEVELS}+ within 3 stderr"),
            expected,
            serde_json::json!({"times_outside": rest}),
            3.0,
            rest == 0,
        );
    }
}

fn trajectory_invariants(report: &mut VerdictReport, trajs: &[Trajectory], params: &ReducedParams, times: &[f64]) {
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let mut norm_defect = 0.0f64;
    let mut ordered = true;
    let mut thermal = 0usize;
    for t in trajs {
        for s in &t.states {
            norm_defect = norm_defect.max((s.norm_sqr() - 1.0).abs());
        }
        ordered &= t.jumps.windows(2).all(|w| w[1].time > w[0].time);
        ordered &= t.jumps.iter().all(|j| j.time >= t0 && j.time <= t1 && (1..=2).contains(&j.channel));
        thermal += t.jumps.iter().filter(|j| j.channel == 2).count();
    }
    report.invariant_at_most("trajectory ket norm defect", norm_defect, 1e-8);
    report.push(
        format!("{INVARIANT_PREFIX}jump times increasing inside the window"),
        "true",
        ordered,
        0.0,
        ordered,
    );
    if params.nbar == 0.0 {
        report.push(format!("{INVARIANT_PREFIX}no thermal jumps at nbar = 0"), "0", thermal as f64, 0.0, thermal == 0);
    }
}

fn evolution_table(ev: &Evolution, epsilon: f64) -> Table {
    let mut header = vec!["t", "eps_t"];
    header.extend(BLOCKADE_COLUMNS);
    let mut t = Table::new(&header);
    for (k, rho) in ev.states.iter().enumerate() {
        let time = ev.observables.times[k];
        let mut row = vec![time, epsilon * time];
        row.extend(blockade_row(rho));
        t.push(row);
    }
    t
}

fn trajectory_table(traj: &Trajectory) -> Table {
    let mut t = Table::new(&["t", "P0", "P1", "P2", "P3"]);
    for (k, time) in traj.times.iter().enumerate() {
        let p = traj.populations(k);
        let pn = |n: usize| p.get(n).copied().unwrap_or(0.0);
        t.push(vec![*time, pn(0), pn(1), pn(2), pn(3)]);
    }
    t
}

fn ensemble_table(est: &EnsembleEstimate) -> Table {
    let levels = est.p_mean[0].len().min(SHOWN_LEVELS);
    let mut header = vec!["t".to_string()];
    header.extend((0..levels).map(|n| format!("P{n}")));
    header.extend((0..levels).map(|n| format!("stderr_P{n}")));
    let mut t = Table::new(&header);
    for (k, time) in est.times.iter().enumerate() {
        let mut row = vec![*time];
        row.extend(&est.p_mean[k][..levels]);
        match &est.p_stderr {
            Some(se) => row.extend(&se[k][..levels]),
            None => row.extend(std::iter::repeat_n(f64::NAN, levels)),
        }
        t.push(row);
    }
    t
}

fn jump_table(trajs: &[Trajectory]) -> Table {
    let mut t = Table::new(&["trajectory", "time", "channel"]);
    for (i, traj) in trajs.iter().enumerate() {
        for j in &traj.jumps {
            t.push(vec![i as f64, j.time, j.channel as f64]);
        }
    }
    t
}

/// (εt, P₁) over one period π/ε at ε = 1, γ = 0.
fn floquet_trace(eps_over_kappa: f64) -> CliResult<Vec<(f64, f64)>> {
    let (eps, dim) = (1.0, 10);
    let params = ReducedParams::kerr(eps / eps_over_kappa, eps, 0.0, 0.0)?;
    let h = build_kerr_hamiltonian(&params, dim, Frame::ResonantRotating)?;
    let l = build_liouvillian(&h.static_part, 0.0, 0.0)?;
    let times: Vec<f64> = (0..=2000).map(|k| PI * k as f64 / 2000.0).collect();
    let ev = evolve(&DensityMatrix::fock(dim, 0)?, &l, &[], &times)?;
    Ok(times.iter().enumerate().map(|(k, t)| (*t, ev.observables.population(k, 1))).collect())
}

fn floquet_benchmark(files: &mut Artifacts) -> CliResult<(f64, f64)> {
    let fine = floquet_trace(0.01)?;
    let coarse = floquet_trace(0.1)?;
    let mut t = Table::new(&["eps_t", "sin2", "P1_ratio_0.1", "P1_ratio_0.01"]);
    let (mut e_fine, mut e_coarse) = (0.0f64, 0.0f64);
    for ((time, pf), (_, pc)) in fine.iter().zip(&coarse) {
        let exact = time.sin().powi(2);
        e_fine = e_fine.max((pf - exact).abs());
        e_coarse = e_coarse.max((pc - exact).abs());
        t.push(vec![*time, exact, *pc, *pf]);
    }
    files.table("floquet.csv", &t)?;
    Ok((e_fine, e_coarse))
}
