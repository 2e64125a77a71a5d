//! Steady-state quasiprobability maps.

use phonon_blockade::lindblad::{converged_steady_state, Purpose, TAIL_LIMIT};
use phonon_blockade::qpd::{negativity_witness, qpd_grid, PhaseSpaceGrid, NEGATIVITY_TOL};

use super::{blockade_row, fidelity, state_invariants, BLOCKADE_COLUMNS};
use crate::config::ScenarioConfig;
use crate::error::CliResult;
use crate::output::{tag, Artifacts, Table};
use crate::report::VerdictReport;

/// Ordering parameters: Wigner, the s = 1/2 map, Husimi.
const ORDERINGS: [f64; 3] = [0.0, 0.5, -1.0];

pub(super) fn run(cfg: &ScenarioConfig, files: &mut Artifacts, report: &mut VerdictReport) -> CliResult<()> {
    let params = cfg.reduced_params()?;
    let sol = converged_steady_state(&params, cfg.dim, Purpose::Dynamics)?;
    let grid = cfg.grid.unwrap_or_default();

    let mut pops = Table::new(&["n", "P"]);
    for (n, p) in sol.rho.populations().iter().enumerate() {
        pops.push(vec![n as f64, *p]);
    }
    files.table("populations.csv", &pops)?;
    let mut summary = Table::new(&BLOCKADE_COLUMNS);
    summary.push(blockade_row(&sol.rho));
    files.table("steady_state.csv", &summary)?;

    report.push("steady fidelity", "> 0.95", fidelity(&sol.rho), 0.95, fidelity(&sol.rho) > 0.95);
    report.invariant_at_most("steady-state tail mass", sol.tail_mass, TAIL_LIMIT);
    state_invariants(report, "steady state", [&sol.rho]);

    let covers_support = covers(&grid, 4.0);
    for s in ORDERINGS {
        let map = qpd_grid(&sol.rho, &grid, s)?;
        map.write_csv(&files.path(&format!("qpd_s{}.csv", tag(s))))?;
        files.text(&format!("qpd_s{}.json", tag(s)), &(map.sidecar_json()? + "\n"))?;
        if covers_support {
            let norm = map.normalization();
            report.push(
                format!("invariant: s={s} normalization"),
                "in [0.97, 1.03]",
                norm,
                0.03,
                (0.97..=1.03).contains(&norm),
            );
        }
        let w = negativity_witness(&map);
        if s == 0.0 {
            report.at_least("s=0 min_value", map.min_value, -NEGATIVITY_TOL);
        } else if s == 0.5 {
            report.push("s=1/2 is_negative", "true", w.is_negative, NEGATIVITY_TOL, w.is_negative);
            report.push("s=1/2 min_value", "< 0", map.min_value, 0.0, map.min_value < 0.0);
            let r = map.argmin.norm();
            report.push("s=1/2 argmin |alpha|", "< 0.5", r, 0.5, w.is_negative && r < 0.5);
        } else {
            report.at_least("invariant: Husimi min_value", map.min_value, -1e-9);
        }
    }
    Ok(())
}

/// The map is compared against unit normalization only when the grid spans
/// at least ±half_width on both axes.
fn covers(grid: &PhaseSpaceGrid, half_width: f64) -> bool {
    grid.x_min <= -half_width && grid.x_max >= half_width && grid.y_min <= -half_width && grid.y_max >= half_width
}
