//! Steady-state sweeps over temperature and nonlinearity.

use phonon_blockade::lindblad::{converged_steady_state, Purpose, SteadySolution, TAIL_LIMIT};
use phonon_blockade::model::nbar_from_beta;
use phonon_blockade::ReducedParams;
use rayon::prelude::*;

use super::{blockade_row, fidelity, state_invariants, BLOCKADE_COLUMNS};
use crate::config::{ScenarioConfig, Sweep};
use crate::error::CliResult;
use crate::output::{Artifacts, Table};
use crate::report::VerdictReport;

const BETA_SWEEP: Sweep = Sweep::Range {
    start: 0.5,
    stop: 8.0,
    points: 41,
};

const KAPPA_SWEEP: Sweep = Sweep::Range {
    start: 1.0,
    stop: 60.0,
    points: 40,
};

/// Blockade fidelity that counts as achieved.
const F_BLOCKADE: f64 = 0.95;

/// Steady states for each parameter set, solved in parallel and returned in input order.
fn solve_all(points: &[ReducedParams], dim: Option<usize>) -> CliResult<Vec<SteadySolution>> {
    let sols: phonon_blockade::Result<Vec<_>> = points.par_iter().map(|p| converged_steady_state(p, dim, Purpose::Dynamics)).collect();
    Ok(sols?)
}

fn sweep_table(first: &[&str], keys: &[Vec<f64>], sols: &[SteadySolution]) -> Table {
    let mut header: Vec<&str> = first.to_vec();
    header.push("dim");
    header.extend(BLOCKADE_COLUMNS);
    let mut t = Table::new(&header);
    for (k, s) in keys.iter().zip(sols) {
        let mut row = k.clone();
        row.push(s.dim as f64);
        row.extend(blockade_row(&s.rho));
        t.push(row);
    }
    t
}

fn sweep_invariants(report: &mut VerdictReport, sols: &[SteadySolution]) {
    let tail = sols.iter().map(|s| s.tail_mass).fold(0.0, f64::max);
    report.invariant_at_most("steady-state tail mass", tail, TAIL_LIMIT);
    state_invariants(report, "steady state", sols.iter().map(|s| &s.rho));
}

/// Fidelity against β = ħω/(k_B T), with n̄ = 1/(e^β − 1).
pub(super) fn run_fig4a(cfg: &ScenarioConfig, files: &mut Artifacts, report: &mut VerdictReport) -> CliResult<()> {
    let base = cfg.reduced_params()?;
    let mut betas = cfg.sweep.clone().unwrap_or(BETA_SWEEP).values();
    betas.sort_by(f64::total_cmp);
    let points: Vec<ReducedParams> = betas
        .iter()
        .map(|&b| ReducedParams::kerr(base.kappa, base.signed_epsilon(), base.gamma, nbar_from_beta(b)))
        .collect::<phonon_blockade::Result<_>>()?;
    let sols = solve_all(&points, cfg.dim)?;
    let keys: Vec<Vec<f64>> = betas.iter().zip(&points).map(|(b, p)| vec![*b, p.nbar]).collect();
    files.table("sweep.csv", &sweep_table(&["beta", "nbar"], &keys, &sols))?;

    let f: Vec<f64> = sols.iter().map(|s| fidelity(&s.rho)).collect();
    // β ascending, so F must not increase when stepping back towards hotter baths
    let rise = f.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
    report.at_most("F nonincreasing as beta decreases", rise, 1e-10);
    let (hot, cold) = (f[0], f[f.len() - 1]);
    report.push(
        format!("F at hottest point (beta = {})", betas[0]),
        format!("< {F_BLOCKADE}"),
        hot,
        F_BLOCKADE,
        hot < F_BLOCKADE,
    );
    report.push(
        format!("F at coldest point (beta = {})", betas[betas.len() - 1]),
        format!("> {F_BLOCKADE}"),
        cold,
        F_BLOCKADE,
        cold > F_BLOCKADE,
    );
    sweep_invariants(report, &sols);
    Ok(())
}

/// Fidelity against κ/γ at fixed ε, γ and n̄.
pub(super) fn run_fig4b(cfg: &ScenarioConfig, files: &mut Artifacts, report: &mut VerdictReport) -> CliResult<()> {
    let base = cfg.reduced_params()?;
    let mut ratios = cfg.sweep.clone().unwrap_or(KAPPA_SWEEP).values();
    ratios.sort_by(f64::total_cmp);
    let points: Vec<ReducedParams> = ratios
        .iter()
        .map(|&r| ReducedParams::kerr(r * base.gamma, base.signed_epsilon(), base.gamma, base.nbar))
        .collect::<phonon_blockade::Result<_>>()?;
    let sols = solve_all(&points, cfg.dim)?;
    let keys: Vec<Vec<f64>> = ratios.iter().zip(&points).map(|(r, p)| vec![*r, p.kappa]).collect();
    files.table("sweep.csv", &sweep_table(&["kappa_over_gamma", "kappa"], &keys, &sols))?;

    let f: Vec<f64> = sols.iter().map(|s| fidelity(&s.rho)).collect();
    let threshold = ratios.iter().zip(&f).find(|(_, f)| **f >= F_BLOCKADE).map(|(r, _)| *r);
    let observed = threshold.unwrap_or(f64::NAN);
    report.push(
        "smallest kappa/gamma with F >= 0.95",
        "<= 10",
        observed,
        10.0,
        threshold.is_some_and(|r| r <= 10.0),
    );
    let worst_above = ratios
        .iter()
        .zip(&f)
        .filter(|(r, _)| **r >= 10.0)
        .map(|(_, f)| *f)
        .fold(f64::INFINITY, f64::min);
    report.at_least("min F for kappa/gamma >= 10", worst_above, F_BLOCKADE);
    let drop = f.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
    report.at_most("F nondecreasing in kappa", drop, 1e-10);
    sweep_invariants(report, &sols);
    Ok(())
}
