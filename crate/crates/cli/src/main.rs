use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use polar_dirac::identities::SuiteOptions;
use polar_dirac::report::{
    catalog_csv, identity_table, run_catalog, run_identities, run_verify, to_json_string, Format,
    Outcome, Scenario, VerifyOptions,
};

#[derive(Parser)]
#[command(name = "polar-dirac", version, about = "Verify the polar form of the Dirac equation")]
struct Cli {
    /// Seed for randomised sample points and batteries.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Finite-difference step (overrides the scenario).
    #[arg(long, global = true)]
    fd_step: Option<f64>,

    /// Directory for report files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Restrict output to one format.
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a JSON scenario and write report.csv / summary.json.
    Verify { config: PathBuf },
    /// Print the equation catalog and the minimal-set enumeration.
    Catalog,
    /// Run the algebraic identity battery.
    Identities {
        /// Number of random spinors.
        #[arg(long, default_value_t = 1000)]
        battery: usize,
        /// Flip the Levi-Civita sign in the basis checks (negative control).
        #[arg(long, hide = true)]
        corrupt_epsilon: bool,
    },
}

fn exit(outcome: Outcome) -> ExitCode {
    ExitCode::from(outcome.code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify { config } => {
            let scenario = match Scenario::load(&config) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return exit(Outcome::ConfigError);
                }
            };
            let opts = VerifyOptions {
                seed: cli.seed,
                fd_step: cli.fd_step,
                out_dir: cli.out_dir,
                format: match cli.format {
                    None => Format::Both,
                    Some(OutFormat::Csv) => Format::Csv,
                    Some(OutFormat::Json) => Format::Json,
                },
            };
            match run_verify(&scenario, &opts) {
                Ok(rep) => {
                    println!(
                        "{} points, {}/{} sets meet the {} expectation: {}",
                        rep.summary["points"],
                        rep.summary["sets_meeting_expectation"],
                        rep.summary["set_count"],
                        rep.summary["expectation"].as_str().unwrap_or("?"),
                        if rep.outcome == Outcome::Pass { "PASS" } else { "FAIL" }
                    );
                    for path in &rep.written {
                        println!("wrote {}", path.display());
                    }
                    exit(rep.outcome)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    exit(Outcome::of(&e))
                }
            }
        }
        Command::Catalog => {
            let v = run_catalog();
            match cli.format {
                Some(OutFormat::Csv) => print!("{}", catalog_csv()),
                _ => print!("{}", to_json_string(&v)),
            }
            if v["enumeration_match"] == true {
                exit(Outcome::Pass)
            } else {
                exit(Outcome::IdentityFailure)
            }
        }
        Command::Identities {
            battery,
            corrupt_epsilon,
        } => {
            let opts = SuiteOptions {
                seed: cli.seed.unwrap_or(0),
                battery,
                eps_sign: if corrupt_epsilon { -1.0 } else { 1.0 },
            };
            let (rep, outcome) = run_identities(&opts);
            match cli.format {
                Some(OutFormat::Json) => print!(
                    "{}",
                    to_json_string(&serde_json::to_value(&rep).expect("report serialises"))
                ),
                _ => print!("{}", identity_table(&rep)),
            }
            exit(outcome)
        }
    }
}
