//! Anharmonicity of the dressed qubit–resonator ladder against the Kerr constant.

use phonon_blockade::model::{dressed_ladder_anharmonicity, map_physical_params, PhysicalParams};
use rayon::prelude::*;

use crate::config::{ScenarioConfig, Sweep};
use crate::error::{CliError, CliResult};
use crate::output::{Artifacts, Table};
use crate::report::VerdictReport;

/// Δ/g values of the informational scan, each at Ω = 20 g²/Δ.
const DETUNING_SCAN: Sweep = Sweep::Range {
    start: 3.0,
    stop: 20.0,
    points: 18,
};
const DEFAULT_DIM: usize = 30;
const REL_TOL: f64 = 0.25;

pub(super) fn run(cfg: &ScenarioConfig, files: &mut Artifacts, report: &mut VerdictReport) -> CliResult<()> {
    let p = cfg
        .physical
        .as_ref()
        .ok_or_else(|| CliError::Config("full-model-check needs a 'physical' parameter block".into()))?;
    let dim = cfg.dim.unwrap_or(DEFAULT_DIM);
    let r = map_physical_params(p)?;
    let anh = dressed_ladder_anharmonicity(p, dim)?;
    let refined = dressed_ladder_anharmonicity(p, dim + 10)?;
    let rel = (anh - 2.0 * r.kappa).abs() / (2.0 * r.kappa);
    report.push(
        "dressed anharmonicity vs 2 kappa",
        format!("relative error <= {REL_TOL}"),
        serde_json::json!({"anharmonicity": anh, "two_kappa": 2.0 * r.kappa, "relative_error": rel}),
        REL_TOL,
        rel <= REL_TOL,
    );
    report.invariant_at_most("anharmonicity truncation change (dim vs dim+10)", (anh - refined).abs() / anh.abs(), 1e-8);
    report.push(
        "regime flags",
        "dispersive and dressed",
        serde_json::json!({
            "delta_over_g": r.delta / r.g,
            "rwa_ok": r.regime.rwa_ok,
            "dispersive_ok": r.regime.dispersive_ok,
            "dressed_ok": r.regime.dressed_ok,
        }),
        0.0,
        r.regime.dispersive_ok && r.regime.dressed_ok,
    );

    let mut point = Table::new(&["g", "delta", "rabi", "kappa", "anharmonicity", "relative_error"]);
    point.push(vec![r.g, r.delta, p.rabi, r.kappa, anh, rel]);
    files.table("anharmonicity.csv", &point)?;

    let ratios = cfg.sweep.clone().unwrap_or(DETUNING_SCAN).values();
    let rows: phonon_blockade::Result<Vec<Vec<f64>>> = ratios
        .par_iter()
        .map(|&ratio| {
            let q = at_detuning(p, r.g, ratio);
            let kappa = map_physical_params(&q)?.kappa;
            let a = dressed_ladder_anharmonicity(&q, dim)?;
            Ok(vec![ratio, q.rabi, kappa, a, (a - 2.0 * kappa).abs() / (2.0 * kappa)])
        })
        .collect();
    let mut scan = Table::new(&["delta_over_g", "rabi", "kappa", "anharmonicity", "relative_error"]);
    for row in rows? {
        scan.push(row);
    }
    files.table("detuning_scan.csv", &scan)?;
    Ok(())
}

/// Copy of `p` with Δ = ratio·g and Ω = 20 g²/Δ.
fn at_detuning(p: &PhysicalParams, g: f64, ratio: f64) -> PhysicalParams {
    let delta = ratio * g;
    PhysicalParams {
        omega_qubit: p.omega + delta,
        rabi: 20.0 * g * g / delta,
        ..p.clone()
    }
}
