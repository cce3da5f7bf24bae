use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::json;

use unidisc::bounds::{t_min_bounded, t_min_onesided, t_perfect, ErrorMode, CEILING_POLICY};
use unidisc::builder::{optimize_protocol, SearchConfig};
use unidisc::campaign::{emit_report, run_campaign, CampaignConfig, ReportFormat};
use unidisc::matrix::UnitaryMatrix;
use unidisc::measurement::{evaluate_povm, helstrom_povm, unambiguous_povm, UNIT_OVERLAP_TOL};
use unidisc::protocol::{audit_lemma2, run_protocol, Protocol};
use unidisc::spectral::{fidelity_closed_form, fidelity_hull_oracle, relative_arc};
use unidisc::{Error, Result};

/// Query-complexity bounds and protocol simulation for telling two unitaries apart.
///
/// Measurements assume equal priors on the two candidates. Query bounds are
/// rounded up as ceil(raw - 1e-9) so that exact integers stay put.
#[derive(Parser)]
#[command(name = "unidisc", version)]
struct Cli {
    /// Seed override for `search` and `verify`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Report format for `verify`.
    #[arg(long, global = true, default_value = "json")]
    format: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Smallest arc holding the eigenphases of U1^dagger U2.
    Theta {
        #[arg(long)]
        u1: PathBuf,
        #[arg(long)]
        u2: PathBuf,
    },
    /// Fidelity of two unitaries from the arc length.
    Fidelity {
        #[arg(long)]
        u1: PathBuf,
        #[arg(long)]
        u2: PathBuf,
        /// Also compute the convex-hull distance and the difference.
        #[arg(long)]
        oracle: bool,
    },
    /// Lower bound on the number of queries.
    Bound {
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        epsilon: f64,
        /// bounded | onesided
        #[arg(long)]
        mode: String,
    },
    /// ceil(pi / theta), the query count for perfect discrimination.
    Perfect {
        #[arg(long)]
        theta: f64,
    },
    /// Run a protocol on both unitaries and measure the final states.
    Simulate {
        #[arg(long)]
        u1: PathBuf,
        #[arg(long)]
        u2: PathBuf,
        #[arg(long)]
        protocol: PathBuf,
    },
    /// Numerically search for a protocol minimizing the final overlap.
    Search {
        #[arg(long)]
        u1: PathBuf,
        #[arg(long)]
        u2: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a verification campaign; exits nonzero on any bound violation.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(serde_json::from_reader(io::BufReader::new(file))?)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Error::Io(io::Error::new(e.kind(), format!("{}: {e}", p.display())))
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json(cli: &Cli, value: &serde_json::Value) -> Result<()> {
    let mut out = open_output(cli.output.as_deref())?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    let format: ReportFormat = cli.format.parse()?;
    match &cli.command {
        Command::Theta { u1, u2 } => {
            let (u1, u2): (UnitaryMatrix, UnitaryMatrix) = (read_json(u1)?, read_json(u2)?);
            let (arc, _) = relative_arc(&u1, &u2)?;
            write_json(cli, &serde_json::to_value(arc)?)?;
        }
        Command::Fidelity { u1, u2, oracle } => {
            let (u1, u2): (UnitaryMatrix, UnitaryMatrix) = (read_json(u1)?, read_json(u2)?);
            let (arc, spec) = relative_arc(&u1, &u2)?;
            let closed = fidelity_closed_form(arc.theta)?;
            let mut value = json!({ "theta": arc.theta, "fidelity": closed });
            if *oracle {
                let hull = fidelity_hull_oracle(&spec.points())?;
                value["oracle"] = json!(hull);
                value["difference"] = json!(closed - hull);
            }
            write_json(cli, &value)?;
        }
        Command::Bound { theta, epsilon, mode } => {
            let report = match mode.parse::<ErrorMode>()? {
                ErrorMode::BoundedError => t_min_bounded(*theta, *epsilon)?,
                ErrorMode::OneSidedError => t_min_onesided(*theta, *epsilon)?,
            };
            let mut value = serde_json::to_value(report)?;
            value["ceiling_policy"] = json!(CEILING_POLICY);
            write_json(cli, &value)?;
        }
        Command::Perfect { theta } => {
            let mut out = open_output(cli.output.as_deref())?;
            writeln!(out, "{}", t_perfect(*theta)?)?;
        }
        Command::Simulate { u1, u2, protocol } => {
            let (u1, u2): (UnitaryMatrix, UnitaryMatrix) = (read_json(u1)?, read_json(u2)?);
            let protocol: Protocol = read_json(protocol)?;
            let trace = run_protocol(&u1, &u2, &protocol)?;
            let (arc, _) = relative_arc(&u1, &u2)?;
            let (phi1, phi2) = trace.final_states();
            let helstrom = evaluate_povm(&helstrom_povm(phi1, phi2)?, phi1, phi2)?;
            let inconclusive = if trace.final_overlap < 1.0 - UNIT_OVERLAP_TOL {
                Some(evaluate_povm(&unambiguous_povm(phi1, phi2)?, phi1, phi2)?.worst_inconclusive())
            } else {
                None
            };
            write_json(
                cli,
                &json!({
                    "theta": arc.theta,
                    "queries": protocol.queries,
                    "distances": trace.distances,
                    "final_overlap": trace.final_overlap,
                    "helstrom_error": helstrom.worst_error(),
                    "unambiguous_inconclusive": inconclusive,
                    "lemma2_slacks": audit_lemma2(&trace, arc.theta)?,
                }),
            )?;
        }
        Command::Search { u1, u2, config } => {
            let (u1, u2): (UnitaryMatrix, UnitaryMatrix) = (read_json(u1)?, read_json(u2)?);
            let mut cfg: SearchConfig = read_json(config)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let out = optimize_protocol(&u1, &u2, &cfg)?;
            write_json(
                cli,
                &json!({
                    "protocol": out.protocol,
                    "overlap": out.overlap,
                    "initial_overlap": out.initial_overlap,
                    "budget_exhausted": out.budget_exhausted,
                }),
            )?;
        }
        Command::Verify { config } => {
            let mut cfg: CampaignConfig = read_json(config)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if let Some(path) = &cli.output {
                cfg.output_path = Some(path.clone());
            }
            let report = run_campaign(&cfg)?;
            let out = open_output(cfg.output_path.as_deref())?;
            emit_report(&report, format, out)?;
            for line in report.violation_lines() {
                eprintln!("{line}");
            }
            let s = &report.summary;
            eprintln!(
                "{} instances, {} violations, min bounded slack {:?}, min one-sided slack {:?}, \
                 min step slack {:?}, {:.2}s",
                s.instances,
                s.total_violations(),
                s.min_theorem1_slack_bounded,
                s.min_theorem1_slack_onesided,
                s.min_lemma2_slack,
                s.runtime_seconds
            );
            return Ok(s.total_violations() == 0);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
