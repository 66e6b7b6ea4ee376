use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use leviflat_cli::{check_scenarios, dump_leaves, dump_levi, load_config, parse_resolution, run_scenario, RunReport};

#[derive(Parser)]
#[command(name = "leviflat", version, about = "Bishop disc families and Levi-flat fillings of two-spheres")]
struct Cli {
    /// Output directory, overriding `output_dir` in the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Disc grid resolution, overriding the config.
    #[arg(long, global = true, value_name = "NT,NR", value_parser = parse_resolution)]
    resolution: Option<(usize, usize)>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline for a scenario.
    Run { config: PathBuf },
    /// Chart and normal-form invariants of every scenario.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Integrate and dump the characteristic leaves.
    Leaf { config: PathBuf },
    /// Levi form cross-check and Diederich-Fornaess scan.
    Levi { config: PathBuf },
}

fn summarize(report: &RunReport, quiet: bool) {
    if quiet {
        return;
    }
    for c in &report.checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        eprintln!("{tag}  {} = {:.3e} ({} {:.3e})", c.name, c.value, c.relation, c.threshold);
    }
    eprintln!("{:?}: exit {}", report.status, report.exit_code);
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match &cli.command {
        Command::Check { seed } => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(leviflat_cli::config::DEFAULT_OUTPUT_DIR));
            check_scenarios(&out, *seed, cli.quiet)
        }
        Command::Run { config } | Command::Leaf { config } | Command::Levi { config } => {
            let loaded = load_config(config).and_then(|mut c| {
                if let Some(out) = &cli.out {
                    c.output_dir = out.clone();
                }
                match cli.resolution {
                    Some((nt, nr)) => c.with_resolution(nt, nr),
                    None => Ok(c),
                }
            });
            let c = match loaded {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    if let Some(out) = &cli.out {
                        let _ = std::fs::create_dir_all(out)
                            .and_then(|_| std::fs::write(out.join(leviflat_cli::FAILED_MARKER), format!("Error\nconfig: {e}\n")));
                    }
                    return ExitCode::from(1);
                }
            };
            match cli.command {
                Command::Run { .. } => run_scenario(&c, cli.quiet),
                Command::Leaf { .. } => dump_leaves(&c, cli.quiet),
                _ => dump_levi(&c, cli.quiet),
            }
        }
    };
    summarize(&report, cli.quiet);
    ExitCode::from(report.exit_code as u8)
}
