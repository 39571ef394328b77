use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use duality_cli::config::{Scenario, ScenarioConfig};
use duality_cli::error::{CliError, Result, EXIT_CHECK};
use duality_cli::format::{fmt_g, OutputFormat, Table};
use duality_cli::grid::Spacing;
use duality_cli::paper_check::PaperCheck;
use duality_cli::scenarios::{FringeScan, G2AutoSweep, HomDip, StateRun, ZetaSweep};

/// Which-path information, visibility and complementarity of two-mode light.
///
/// Exit codes: 0 success, 2 bad flags or config, 3 a check failed,
/// 4 simulation error (e.g. cutoff too small), 5 i/o error.
#[derive(Debug, Parser)]
#[command(name = "duality", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Per-mode photon-number cutoff of the Fock space.
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long)]
    points: Option<usize>,
    /// Log-spaced grid.
    #[arg(long, conflicts_with = "linear")]
    log: bool,
    /// Linearly spaced grid.
    #[arg(long)]
    linear: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// TOML scenario file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct Range {
    #[arg(long)]
    min: Option<f64>,
    #[arg(long)]
    max: Option<f64>,
}

#[derive(Debug, Clone, Args)]
struct Inputs {
    /// State of input A, e.g. `fock(1)` or `coherent(1+0i)`.
    #[arg(long)]
    a: Option<String>,
    /// State of input B.
    #[arg(long)]
    b: Option<String>,
    /// Largest probability the cutoff may discard from a single-mode state.
    #[arg(long)]
    tail_tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// D2, V2, sqrt(X2) against g2_auto = g2_AA = g2_BB.
    SweepG2auto {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: Range,
        #[arg(long)]
        zeta: Option<f64>,
        #[arg(long)]
        g2_ab: Option<f64>,
    },
    /// D2, V2, sqrt(X2) against the intensity ratio zeta.
    SweepZeta {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: Range,
        #[arg(long)]
        g2_aa: Option<f64>,
        #[arg(long)]
        g2_bb: Option<f64>,
        #[arg(long)]
        g2_ab: Option<f64>,
    },
    /// HOM coincidence against the internal-mode angle chi in [0, pi/2].
    HomDip {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Beamsplitter outputs against a phase on B over [0, 2pi].
    FringeScan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Every correlation and duality quantity of one input.
    StateRun {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        inputs: Inputs,
        /// Key-value correlation record to analyze instead of a state.
        #[arg(long)]
        record: Option<PathBuf>,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Pinned regression values through every pathway.
    PaperCheck {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Shift G2_AB by this amount before evaluating (checks the checker).
        #[arg(long, hide = true, allow_negative_numbers = true)]
        perturb_g2ab: Option<f64>,
    },
}

fn flag_config(common: &Common) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.grid.points = common.points;
    cfg.grid.spacing = match (common.log, common.linear) {
        (true, _) => Some(Spacing::Log),
        (_, true) => Some(Spacing::Linear),
        _ => None,
    };
    cfg.parameters.cutoff = common.cutoff;
    cfg.parameters.seed = common.seed;
    cfg.output.path = common.out.clone();
    cfg.output.format = common.format;
    cfg
}

fn add_range(cfg: &mut ScenarioConfig, range: &Range) {
    cfg.grid.min = range.min;
    cfg.grid.max = range.max;
}

fn add_inputs(cfg: &mut ScenarioConfig, inputs: &Inputs) {
    cfg.input.a = inputs.a.clone();
    cfg.input.b = inputs.b.clone();
    cfg.parameters.tail_tol = inputs.tail_tol;
}

fn resolve(scenario: Scenario, common: &Common, flags: ScenarioConfig) -> Result<ScenarioConfig> {
    let merged = match &common.config {
        Some(path) => ScenarioConfig::load(path)?.overlay(&flags),
        None => flags,
    };
    merged.check_scenario(scenario)?;
    Ok(merged)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn emit_table(table: &Table, cfg: &ScenarioConfig) -> Result<()> {
    let format = cfg.output.format.unwrap_or(OutputFormat::Csv);
    emit(&table.render(format), cfg.output.path.as_ref())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SweepG2auto {
            common,
            range,
            zeta,
            g2_ab,
        } => {
            let mut flags = flag_config(&common);
            add_range(&mut flags, &range);
            flags.parameters.zeta = zeta;
            flags.parameters.g2_ab = g2_ab;
            let cfg = resolve(Scenario::SweepG2auto, &common, flags)?;
            emit_table(&G2AutoSweep::from_config(&cfg)?.run()?, &cfg)
        }
        Command::SweepZeta {
            common,
            range,
            g2_aa,
            g2_bb,
            g2_ab,
        } => {
            let mut flags = flag_config(&common);
            add_range(&mut flags, &range);
            flags.parameters.g2_aa = g2_aa;
            flags.parameters.g2_bb = g2_bb;
            flags.parameters.g2_ab = g2_ab;
            let cfg = resolve(Scenario::SweepZeta, &common, flags)?;
            emit_table(&ZetaSweep::from_config(&cfg)?.run()?, &cfg)
        }
        Command::HomDip { common, inputs } => {
            let mut flags = flag_config(&common);
            add_inputs(&mut flags, &inputs);
            let cfg = resolve(Scenario::HomDip, &common, flags)?;
            emit_table(&HomDip::from_config(&cfg)?.run()?, &cfg)
        }
        Command::FringeScan { common, inputs } => {
            let mut flags = flag_config(&common);
            add_inputs(&mut flags, &inputs);
            let cfg = resolve(Scenario::FringeScan, &common, flags)?;
            let (table, fit) = FringeScan::from_config(&cfg)?.run_with_fit()?;
            eprintln!(
                "fringe fit: offset {} amplitude {} visibility {} (from moments {})",
                fmt_g(fit.offset),
                fmt_g(fit.amplitude),
                fmt_g(fit.visibility),
                fmt_g(fit.expected.as_f64())
            );
            emit_table(&table, &cfg)
        }
        Command::StateRun {
            common,
            inputs,
            record,
            order,
        } => {
            let mut flags = flag_config(&common);
            add_inputs(&mut flags, &inputs);
            flags.input.record = record;
            flags.parameters.order = order;
            let cfg = resolve(Scenario::StateRun, &common, flags)?;
            emit_table(&StateRun::from_config(&cfg)?.run()?, &cfg)
        }
        Command::PaperCheck { out, perturb_g2ab } => {
            let check = PaperCheck::run_perturbed(perturb_g2ab.unwrap_or(0.0))?;
            emit(&check.render(), out.as_ref())?;
            if check.passed() {
                Ok(())
            } else {
                let names: Vec<_> = check.failures().iter().map(|r| r.label()).collect();
                Err(CliError::Check(format!("failed rows: {}", names.join(", "))))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("duality: {e}");
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(EXIT_CHECK as u8))
        }
    }
}
