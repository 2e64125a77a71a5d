//! Emission spectra of the EMF operator for families of damping rates or temperatures.

use phonon_blockade::spectrum::{find_peaks, predicted_peaks, steady_state_spectrum, Level, PeakSet, SpectrumRun, DECAY_LIMIT};
use phonon_blockade::ReducedParams;
use rayon::prelude::*;

use super::state_invariants;
use crate::config::{ScenarioConfig, Sweep};
use crate::error::CliResult;
use crate::output::{tag, Artifacts, Table};
use crate::report::VerdictReport;

/// Peaks lower than this fraction of the curve maximum are ignored.
const MIN_PROMINENCE: f64 = 1e-3;
/// Allowed offset of the 2ε peak from its two-level prediction.
const INNER_TOL: f64 = 0.3;
/// Allowed offset of each half of the 2κ ± ε doublet.
const DOUBLET_TOL: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Family {
    Gamma,
    Nbar,
}

impl Family {
    fn key(self) -> &'static str {
        match self {
            Family::Gamma => "gamma",
            Family::Nbar => "nbar",
        }
    }
}

struct Curve {
    value: f64,
    params: ReducedParams,
    run: SpectrumRun,
    peaks: PeakSet,
}

pub(super) fn run_fig5a(cfg: &ScenarioConfig, files: &mut Artifacts, report: &mut VerdictReport) -> CliResult<()> {
    let default = Sweep::List { values: vec![0.5, 1.0, 1.5] };
    let curves = compute(cfg, Family::Gamma, default)?;
    write_curves(files, Family::Gamma, &curves)?;
    for c in &curves {
        check_inner_peak(report, Family::Gamma, c)?;
        check_series(report, Family::Gamma, c);
    }
    // low dissipation gives high peaks
    monotone_heights(report, Family::Gamma, &curves);
    Ok(())
}

pub(super) fn run_fig5b(cfg: &ScenarioConfig, files: &mut Artifacts, report: &mut VerdictReport) -> CliResult<()> {
    let default = Sweep::List { values: vec![0.01, 0.5, 1.0] };
    let curves = compute(cfg, Family::Nbar, default)?;
    write_curves(files, Family::Nbar, &curves)?;
    for c in &curves {
        check_inner_peak(report, Family::Nbar, c)?;
        check_doublet(report, c);
        check_series(report, Family::Nbar, c);
    }
    monotone_heights(report, Family::Nbar, &curves);
    Ok(())
}

fn compute(cfg: &ScenarioConfig, family: Family, default: Sweep) -> CliResult<Vec<Curve>> {
    let base = cfg.reduced_params()?;
    let mut values = cfg.sweep.clone().unwrap_or(default).values();
    values.sort_by(f64::total_cmp);
    let params: Vec<ReducedParams> = values
        .iter()
        .map(|&v| match family {
            Family::Gamma => ReducedParams::kerr(base.kappa, base.signed_epsilon(), v, base.nbar),
            Family::Nbar => ReducedParams::kerr(base.kappa, base.signed_epsilon(), base.gamma, v),
        })
        .collect::<phonon_blockade::Result<_>>()?;
    let runs: phonon_blockade::Result<Vec<SpectrumRun>> = params.par_iter().map(|p| steady_state_spectrum(p, cfg.dim)).collect();
    Ok(values
        .into_iter()
        .zip(params)
        .zip(runs?)
        .map(|((value, params), run)| {
            let peaks = find_peaks(&run.spectrum, MIN_PROMINENCE * run.spectrum.max_value());
            Curve { value, params, run, peaks }
        })
        .collect())
}

fn write_curves(files: &mut Artifacts, family: Family, curves: &[Curve]) -> CliResult<()> {
    let key = family.key();
    let mut peaks = Table::new(&[key, "frequency", "height", "width"]);
    let mut summary = Table::new(&[key, "dim", "mean_V", "coherent_weight", "max_imag"]);
    for c in curves {
        let t = tag(c.value);
        c.run.spectrum.write_csv(&files.path(&format!("spectrum_{key}{t}.csv")))?;
        c.run.correlation.write_csv(&files.path(&format!("correlation_{key}{t}.csv")))?;
        for p in &c.peaks.peaks {
            peaks.push(vec![c.value, p.frequency, p.height.unwrap_or(f64::NAN), p.width.unwrap_or(f64::NAN)]);
        }
        summary.push(vec![
            c.value,
            c.run.dim as f64,
            c.run.correlation.mean,
            c.run.spectrum.coherent_weight,
            c.run.spectrum.max_imag,
        ]);
    }
    files.table("peaks.csv", &peaks)?;
    files.table("summary.csv", &summary)?;
    Ok(())
}

fn label(family: Family, c: &Curve) -> String {
    format!("{}={}", family.key(), c.value)
}

/// Positive-frequency peak of the single-phonon transition, tallest below κ.
fn inner_peak(c: &Curve) -> Option<(f64, f64)> {
    c.peaks
        .tallest_in(0.0, c.params.kappa)
        .map(|p| (p.frequency, p.height.unwrap_or(0.0)))
}

fn check_inner_peak(report: &mut VerdictReport, family: Family, c: &Curve) -> CliResult<()> {
    let p = &c.params;
    let predicted = predicted_peaks(p.epsilon, p.kappa, p.gamma, p.nbar, Level::TwoLevel)?;
    let target = predicted.peaks.iter().map(|q| q.frequency).fold(f64::MIN, f64::max);
    let observed = inner_peak(c).map_or(f64::NAN, |(f, _)| f);
    report.near(format!("2eps peak position ({})", label(family, c)), observed, target, INNER_TOL);
    Ok(())
}

/// Tallest peak on each side of 2κ must sit within tolerance of 2κ ∓ ε.
fn check_doublet(report: &mut VerdictReport, c: &Curve) {
    let (k, e) = (c.params.kappa, c.params.epsilon);
    let center = 2.0 * k;
    let lower = c.peaks.tallest_in(center - 2.0 * e, center).map_or(f64::NAN, |p| p.frequency);
    let upper = c.peaks.tallest_in(center, center + 2.0 * e).map_or(f64::NAN, |p| p.frequency);
    let name = label(Family::Nbar, c);
    report.near(format!("doublet lower peak ({name})"), lower, center - e, DOUBLET_TOL);
    report.near(format!("doublet upper peak ({name})"), upper, center + e, DOUBLET_TOL);
}

fn check_series(report: &mut VerdictReport, family: Family, c: &Curve) {
    let s = &c.run.spectrum;
    let name = label(family, c);
    let max = s.max_value();
    report.invariant_at_most(&format!("spectrum imaginary residue / max ({name})"), s.max_imag / max, 1e-8);
    report.invariant_at_most(&format!("spectrum negativity / max ({name})"), (-s.min_value()).max(0.0) / max, 1e-6);
    let c0 = c.run.correlation.connected()[0].re;
    report.invariant_at_most(&format!("Parseval relative error ({name})"), (s.integral() / c0 - 1.0).abs(), 0.01);
    let tail = c.run.correlation.connected().last().map_or(f64::NAN, |z| z.norm()) / c0.abs();
    report.invariant_at_most(&format!("connected correlation decay at tau_max ({name})"), tail, DECAY_LIMIT);
    state_invariants(report, &format!("steady state ({name})"), [&c.run.rho]);
}

/// The 2ε peak height falls as the swept rate or temperature rises.
fn monotone_heights(report: &mut VerdictReport, family: Family, curves: &[Curve]) {
    let heights: Vec<f64> = curves.iter().map(|c| inner_peak(c).map_or(f64::NAN, |(_, h)| h)).collect();
    let ok = heights.windows(2).all(|w| w[1] < w[0]);
    report.push(
        format!("2eps peak height decreasing in {}", family.key()),
        "strictly decreasing",
        serde_json::json!(heights),
        0.0,
        ok,
    );
}
