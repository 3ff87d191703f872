use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use intratp_core::disaggregate::{DEFAULT_MAX_ITERATIONS, DEFAULT_RMS_RESIDUAL};
use intratp_core::io::{load_scenario, RampTable, OUT_DIR_ENV};
use intratp_core::metrics::{DEFAULT_BIN_WIDTH, DEFAULT_ZERO_THRESHOLD};
use intratp_core::netting::NettingConfig;
use intratp_core::pipeline::{self, RunConfig, RunOptions, Setup, SETUP_HVDC_RAMP_MW_PER_MIN};
use intratp_core::synth::{synth_figure_case, synth_random, write_synth, FigureCase, RandomParams};
use intratp_core::{Error, Resolution, Window};

/// Intra-trading-period balancing-need simulator.
#[derive(Parser)]
#[command(name = "intratp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Shape, net and analyse a scenario in one go.
    Run(RunArgs),
    /// Shape every component and write the hr/ stage.
    Disaggregate(RunArgs),
    /// Net the hr/ stage over AC lines and write the netting/ stage.
    Net(RunArgs),
    /// Analyse the hr/ and netting/ stages.
    Analyze(RunArgs),
    /// Generate a synthetic scenario.
    Synth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario manifest (TOML).
    #[arg(long, required_unless_present = "show_config")]
    manifest: Option<PathBuf>,
    /// Output directory; defaults to $INTRATP_OUT_DIR.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Predefined ramp rates and AC bounds (S1..S4).
    #[arg(long)]
    setup: Option<Setup>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    e_min: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// "full" or a number of TPs per LP window.
    #[arg(long)]
    window_tps: Option<Window>,
    #[arg(long)]
    zero_threshold: Option<f64>,
    #[arg(long)]
    bin_width: Option<f64>,
    /// Widen AC bounds by the TRM (`--use-trm` or `--use-trm false`).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    use_trm: Option<bool>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    show_config: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for the scenario files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Hand-built case (fig3, fig4_5, fig6); random when omitted.
    #[arg(long)]
    name: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    nodes: usize,
    #[arg(long, default_value_t = 24)]
    tps: usize,
    #[arg(long, default_value_t = 60)]
    tp_minutes: u32,
    #[arg(long, default_value_t = 1)]
    step_minutes: u32,
    #[arg(long, default_value_t = 0.15)]
    volatility: f64,
    /// Leave out HVDC links to external areas.
    #[arg(long)]
    no_hvdc: bool,
}

impl RunArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            setup: self.setup,
            alpha: self.alpha,
            use_trm: self.use_trm,
            window: self.window_tps,
            e_min: self.e_min,
            max_iterations: self.max_iter,
            zero_threshold: self.zero_threshold,
            bin_width: self.bin_width,
        }
    }
}

fn out_dir(out: &Option<PathBuf>) -> Result<PathBuf, Error> {
    out.clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .ok_or_else(|| Error::Parameter(format!("no output directory: pass --out or set {OUT_DIR_ENV}")))
}

fn json(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("serialisable")
}

fn defaults() -> serde_json::Value {
    let netting = NettingConfig::default();
    serde_json::json!({
        "alpha": netting.alpha,
        "use_trm": netting.use_trm,
        "window_tps": netting.window.to_string(),
        "solver_tolerance": netting.solver_tolerance,
        "e_min": format!("tps * {DEFAULT_RMS_RESIDUAL}^2 / 2"),
        "max_iterations": DEFAULT_MAX_ITERATIONS,
        "zero_threshold": DEFAULT_ZERO_THRESHOLD,
        "bin_width": DEFAULT_BIN_WIDTH,
        "ramp_normal": RampTable::NORMAL,
        "ramp_fast": RampTable::FAST,
        "setup_hvdc_ramp_mw_per_min": SETUP_HVDC_RAMP_MW_PER_MIN,
    })
}

enum Stage {
    Run,
    Disaggregate,
    Net,
    Analyze,
}

fn run_stage(stage: Stage, args: &RunArgs) -> Result<(), Error> {
    let Some(manifest) = &args.manifest else {
        println!("{}", json(&defaults()));
        return Ok(());
    };
    let scenario = load_scenario(manifest)?;
    let cfg = RunConfig::resolve(&scenario, &args.options())?;
    if args.show_config {
        println!("{}", json(&cfg));
        return Ok(());
    }
    let out = out_dir(&args.out)?;
    let components = match stage {
        Stage::Disaggregate => Some(pipeline::disaggregate_stage(&scenario, &cfg, &out)?.components),
        Stage::Net => {
            let result = pipeline::net_stage(&scenario, &cfg, &out)?;
            eprintln!("objective {}", result.objective);
            None
        }
        Stage::Run | Stage::Analyze => {
            let analysis = match stage {
                Stage::Run => pipeline::run(&scenario, &cfg, &out)?,
                _ => pipeline::analyze_stage(&scenario, &cfg, &out)?,
            };
            for node in &analysis.nodes {
                eprintln!(
                    "{}: max {} MW, min {} MW, mean |need| {} MW, zero {:.2}%",
                    node.node,
                    node.stats.max_need,
                    node.stats.min_need,
                    node.stats.mean_abs_need,
                    100.0 * node.stats.zero_share
                );
            }
            Some(analysis.components)
        }
    };
    if let Some(components) = components {
        let failed: Vec<String> = components
            .iter()
            .filter(|c| !c.report.converged)
            .map(|c| c.id.to_string())
            .collect();
        if !failed.is_empty() {
            eprintln!(
                "warning: TP energy correction did not converge for {} component(s): {}",
                failed.len(),
                failed.join(", ")
            );
        }
    }
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<(), Error> {
    let out = out_dir(&args.out)?;
    let path = match &args.name {
        Some(name) => {
            let case: FigureCase = name.parse()?;
            write_synth(&synth_figure_case(case)?, None, Some(case), &out)?
        }
        None => {
            let params = RandomParams {
                seed: args.seed,
                nodes: args.nodes,
                tps: args.tps,
                res: Resolution::new(args.tp_minutes, args.step_minutes)?,
                volatility: args.volatility,
                hvdc: !args.no_hvdc,
            };
            write_synth(&synth_random(&params)?, Some(&params), None, &out)?
        }
    };
    println!("{}", path.display());
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        2
    } else if e.is_infeasible() {
        3
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run_stage(Stage::Run, a),
        Command::Disaggregate(a) => run_stage(Stage::Disaggregate, a),
        Command::Net(a) => run_stage(Stage::Net, a),
        Command::Analyze(a) => run_stage(Stage::Analyze, a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
