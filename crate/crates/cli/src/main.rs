use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polarnet_cli::{
    emit_report, run_scenario, CliError, OutputFormat, ScenarioConfig, ScenarioReport,
};

#[derive(Parser)]
#[command(
    name = "polarnet",
    version,
    about = "Power control experiments for multi-layer repeater networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write plot data.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        /// Overrides `experiments`.
        #[arg(long)]
        experiments: Option<usize>,
        /// Overrides `root_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `outer_passes`.
        #[arg(long)]
        outer_passes: Option<usize>,
    },
    /// Check a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn print_summary(report: &ScenarioReport) {
    println!(
        "{}: {} experiments, {} outer passes, layers {:?}",
        report.name, report.experiments, report.outer_passes, report.layer_sizes
    );
    for p in &report.policies {
        println!(
            "  {:<12} final {:.6} (normalized), {:.4}x select-one optimum, SNR DL {:.6e}, UL {:.6e}, |h|^2/sigma^2 {:.6e}",
            p.id,
            p.final_normalized.mean,
            p.ratio_to_dag.mean,
            p.snr_dl.mean,
            p.snr_ul.mean,
            p.power_over_noise_floor.mean
        );
    }
    if let Some(b) = &report.bounds {
        for e in &b.entries {
            println!(
                "  bound {:<24} {:.6} (Monte Carlo SNR DL {:.6}, E|h|^2/sigma^2 {:.6})",
                e.distribution.label(),
                e.formula_bound,
                e.snr_dl.mean,
                e.channel_power_over_noise_floor.mean
            );
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { config } => {
            let c = ScenarioConfig::load(&config)?;
            println!(
                "{}: ok ({} policies, {} experiments)",
                c.name,
                c.policies.len(),
                c.experiments
            );
        }
        Command::Run {
            config,
            out,
            format,
            experiments,
            seed,
            outer_passes,
        } => {
            let mut c = ScenarioConfig::load(&config)?;
            if let Some(e) = experiments {
                c.experiments = e;
            }
            if let Some(s) = seed {
                c.root_seed = s;
            }
            if let Some(n) = outer_passes {
                c.outer_passes = n;
            }
            c.validate()?;
            let report = run_scenario(&c)?;
            print_summary(&report);
            for path in emit_report(&report, format, &out)? {
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
