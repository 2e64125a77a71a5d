//! Reproduction scenarios. Each one writes its CSV artifacts and a
//! `verdict.json` into the output directory.

mod dynamics;
mod fig2;
mod full_model;
mod spectra;
mod sweeps;

use std::path::Path;
use std::time::Instant;

use phonon_blockade::{DensityMatrix, Evolution};

use crate::config::{McwfConfig, Scenario, ScenarioConfig};
use crate::error::CliResult;
use crate::output::Artifacts;
use crate::report::VerdictReport;

pub const VERDICT_FILE: &str = "verdict.json";

/// Default trajectory settings when a config has no `mcwf` block.
pub const DEFAULT_MCWF: McwfConfig = McwfConfig {
    n_traj: 2000,
    master_seed: 1,
};

/// Run `cfg` and write everything below `out_dir`.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> CliResult<VerdictReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut files = Artifacts::create(out_dir)?;
    let mut report = VerdictReport::new(cfg.scenario.name());
    log::info!("running {} into {}", cfg.scenario, out_dir.display());
    match cfg.scenario {
        Scenario::Fig2 => fig2::run(cfg, &mut files, &mut report)?,
        Scenario::Fig3a => dynamics::run_fig3a(cfg, &mut files, &mut report)?,
        Scenario::Fig3b => dynamics::run_fig3b(cfg, &mut files, &mut report)?,
        Scenario::Fig4a => sweeps::run_fig4a(cfg, &mut files, &mut report)?,
        Scenario::Fig4b => sweeps::run_fig4b(cfg, &mut files, &mut report)?,
        Scenario::Fig5a => spectra::run_fig5a(cfg, &mut files, &mut report)?,
        Scenario::Fig5b => spectra::run_fig5b(cfg, &mut files, &mut report)?,
        Scenario::FullModelCheck => full_model::run(cfg, &mut files, &mut report)?,
    }
    files.text("config.json", &(cfg.to_json() + "\n"))?;
    report.runtime_seconds = start.elapsed().as_secs_f64();
    report.write(&out_dir.join(VERDICT_FILE))?;
    Ok(report)
}

/// P₀…P₃, F = P₀ + P₁, X = Re⟨0|ρ|1⟩, Y = Im⟨0|ρ|1⟩.
pub(crate) const BLOCKADE_COLUMNS: [&str; 7] = ["P0", "P1", "P2", "P3", "F", "X", "Y"];

pub(crate) fn blockade_row(rho: &DensityMatrix) -> Vec<f64> {
    let p = rho.populations();
    let pn = |n: usize| p.get(n).copied().unwrap_or(0.0);
    let c = rho.get(0, 1);
    vec![pn(0), pn(1), pn(2), pn(3), pn(0) + pn(1), c.re, c.im]
}

pub(crate) fn fidelity(rho: &DensityMatrix) -> f64 {
    let p = rho.populations();
    p[0] + p[1]
}

/// Worst trace, Hermiticity and positivity defects over a set of states.
pub(crate) fn state_invariants<'a>(report: &mut VerdictReport, label: &str, states: impl IntoIterator<Item = &'a DensityMatrix>) {
    let (mut trace, mut herm, mut neg) = (0.0f64, 0.0f64, 0.0f64);
    for rho in states {
        trace = trace.max((rho.trace().re - 1.0).abs().max(rho.trace().im.abs()));
        herm = herm.max(rho.hermiticity_defect());
        neg = neg.max(-rho.min_eigenvalue());
    }
    report.invariant_at_most(&format!("{label} trace defect"), trace, 1e-8);
    report.invariant_at_most(&format!("{label} hermiticity defect"), herm, 1e-10);
    report.invariant_at_most(&format!("{label} negative eigenvalue"), neg, 1e-8);
}

pub(crate) fn evolution_invariants(report: &mut VerdictReport, label: &str, ev: &Evolution) {
    state_invariants(report, label, ev.states.iter());
}
