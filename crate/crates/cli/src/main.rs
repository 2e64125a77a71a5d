use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use phonon_blockade_cli::{run_scenario, CliError, CliResult, Scenario, ScenarioConfig};

/// Run a reproduction scenario and write CSV artifacts plus verdict.json.
///
/// Exit status: 0 when every check passes, 1 when a check fails, 2 on usage,
/// configuration or I/O errors.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Args {
    /// fig2, fig3a, fig3b, fig4a, fig4b, fig5a, fig5b or full-model-check
    scenario: String,
    /// JSON scenario configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: config `output_dir`, then $PHONON_BLOCKADE_OUT/<scenario>, then results/<scenario>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the trajectory master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn run(args: Args) -> CliResult<bool> {
    let scenario: Scenario = args.scenario.parse()?;
    let mut cfg = ScenarioConfig::load(&args.config)?;
    if cfg.scenario != scenario {
        return Err(CliError::Usage(format!(
            "scenario '{scenario}' does not match '{}' in {}",
            cfg.scenario,
            args.config.display()
        )));
    }
    if let Some(seed) = args.seed {
        let mut mc = cfg.mcwf.unwrap_or(phonon_blockade_cli::scenarios::DEFAULT_MCWF);
        mc.master_seed = seed;
        cfg.mcwf = Some(mc);
    }
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let out = cfg.resolve_output_dir(args.out.as_deref());
    let report = run_scenario(&cfg, &out)?;
    for c in &report.checks {
        println!("{} {}: observed {} (expected {})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.observed, c.expected);
    }
    println!(
        "{}: {} of {} checks passed in {:.2} s; artifacts in {}",
        report.scenario,
        report.checks.iter().filter(|c| c.pass).count(),
        report.checks.len(),
        report.runtime_seconds,
        out.display()
    );
    Ok(report.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("simulate: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
