use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use asso_core::registry::Role;
use asso_core::ticketing::TicketTerms;
use asso_harness::rng::HarnessRng;
use asso_harness::scenario::{run_scenario, ScenarioScript};
use asso_harness::state::{LedgerMode, StateDir};
use asso_harness::{bench, ops};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "asso", version, about = "Anonymous single sign-on tickets: one protocol operation per command")]
struct Cli {
    /// Directory holding keys, messages and ledgers.
    #[arg(long, global = true, env = "ASSO_STATE_DIR", default_value = "./asso-state")]
    state_dir: PathBuf,
    /// Pairing curve. Only BLS12-381 is built in.
    #[arg(long, global = true, value_enum, default_value_t = Curve::Bls12_381)]
    curve: Curve,
    /// Fixed randomness seed; refused unless built with the `test-rng` feature.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Curve {
    #[value(name = "bls12-381")]
    Bls12_381,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoleArg {
    Issuer,
    Verifier,
    User,
    CentralVerifier,
}

impl From<RoleArg> for Role {
    fn from(r: RoleArg) -> Self {
        match r {
            RoleArg::Issuer => Role::Issuer,
            RoleArg::Verifier => Role::Verifier,
            RoleArg::User => Role::User,
            RoleArg::CentralVerifier => Role::CentralVerifier,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// CA: create the public parameters and master key.
    Setup {
        #[arg(long, default_value_t = 256)]
        security: u32,
    },
    /// Register an entity with the CA.
    Register {
        #[arg(value_enum)]
        role: RoleArg,
        id: String,
    },
    /// User: build a ticket request for a list of services (include the central verifier).
    Request {
        user: String,
        #[arg(long, value_delimiter = ',', required = true)]
        services: Vec<String>,
    },
    /// Issuer: answer a user's ticket request.
    Issue {
        user: String,
        #[arg(long)]
        tp: String,
        /// Journey or service description; defaults to the time period.
        #[arg(long)]
        text1: Option<String>,
        #[arg(long, default_value = "")]
        text2: String,
    },
    /// User: check the delivered ticket and store it.
    Accept { user: String },
    /// User: prepare the tag and proof for one verifier.
    Present {
        user: String,
        verifier: String,
        /// Check the verifier's credential before presenting.
        #[arg(long)]
        check_verifier: bool,
    },
    /// Verifier: validate a user's presentation.
    Validate {
        verifier: String,
        user: String,
        #[arg(long, value_enum, default_value_t)]
        ledger_mode: LedgerMode,
    },
    /// CA: let `to` validate `from`'s tags for one time period.
    Rekey {
        from: String,
        to: String,
        #[arg(long)]
        tp: String,
        #[arg(long)]
        text1: Option<String>,
    },
    /// Proxy verifier: validate a presentation made for `from`.
    ProxyValidate {
        proxy: String,
        from: String,
        user: String,
        #[arg(long)]
        tp: String,
        /// Use the re-key issued to another verifier instead of the proxy's own.
        #[arg(long)]
        rekey_to: Option<String>,
        #[arg(long, value_enum, default_value_t)]
        ledger_mode: LedgerMode,
    },
    /// Central verifier: open a user's ticket.
    Trace { user: String },
    /// Time every protocol phase.
    Bench {
        #[arg(long, default_value_t = 50)]
        iterations: usize,
        #[arg(long, default_value_t = 256)]
        security: u32,
        /// Also write the rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run a scripted multi-party scenario in a fresh state directory.
    Scenario { script: PathBuf },
}

enum Outcome {
    Accept,
    Reject(&'static str),
}

/// Exit status: 0 accept, 2 protocol rejection (reason on stdout), 1 any
/// other failure including usage errors.
fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Outcome::Accept) => ExitCode::SUCCESS,
        Ok(Outcome::Reject(reason)) => {
            println!("reject: {reason}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Protocol rejections become [`Outcome::Reject`]; everything else is an error.
fn settle(result: Result<()>) -> Result<Outcome> {
    match result {
        Ok(()) => Ok(Outcome::Accept),
        Err(e) => match e.downcast_ref::<asso_core::Error>() {
            Some(core) if core.is_rejection() => Ok(Outcome::Reject(core.reason())),
            _ => Err(e),
        },
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let Curve::Bls12_381 = cli.curve;
    let mut rng = HarnessRng::new(cli.seed)?;
    let sd = StateDir::new(&cli.state_dir);
    let rng = &mut rng;
    match cli.command {
        Command::Setup { security } => settle(ops::setup(&sd, security, rng)),
        Command::Register { role, id } => settle(ops::register(&sd, role.into(), &id, rng)),
        Command::Request { user, services } => settle(ops::request(&sd, &user, &services, rng)),
        Command::Issue { user, tp, text1, text2 } => {
            let text1 = text1.unwrap_or_else(|| tp.clone());
            settle(ops::issue(&sd, &user, &TicketTerms::new(tp, text1, text2), rng))
        }
        Command::Accept { user } => settle(ops::accept(&sd, &user)),
        Command::Present { user, verifier, check_verifier } => {
            settle(ops::present(&sd, &user, &verifier, check_verifier, rng))
        }
        Command::Validate { verifier, user, ledger_mode } => settle(ops::validate(&sd, &verifier, &user, ledger_mode)),
        Command::Rekey { from, to, tp, text1 } => {
            let text1 = text1.unwrap_or_else(|| tp.clone());
            settle(ops::rekey(&sd, &from, &to, &tp, &text1, rng))
        }
        Command::ProxyValidate { proxy, from, user, tp, rekey_to, ledger_mode } => {
            let to = rekey_to.unwrap_or_else(|| proxy.clone());
            settle(ops::proxy_validate(&sd, &proxy, &from, &to, &tp, &user, ledger_mode))
        }
        Command::Trace { user } => settle(ops::trace(&sd, &user).map(|report| {
            println!("user key: {}", hex_of(&report.user_pk));
            for s in &report.services {
                println!("service: {}", String::from_utf8_lossy(s));
            }
        })),
        Command::Bench { iterations, security, csv } => {
            let report = bench::run_benchmarks(security, iterations, rng)?;
            println!("{}", report.to_table());
            if let Some(path) = csv {
                std::fs::write(&path, report.to_csv()).with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(Outcome::Accept)
        }
        Command::Scenario { script } => {
            let text = std::fs::read_to_string(&script).with_context(|| format!("reading {}", script.display()))?;
            let script = ScenarioScript::from_toml(&text)?;
            if sd.exists("pp.msg") {
                anyhow::bail!(
                    "{} already holds a deployment; scenarios need a fresh state directory",
                    sd.root().display()
                );
            }
            let report = run_scenario(&script, &sd, rng)?;
            println!("{report}");
            anyhow::ensure!(report.passed(), "scenario outcomes differ from the script");
            Ok(Outcome::Accept)
        }
    }
}

fn hex_of<T: asso_core::codec::Encode>(value: &T) -> String {
    hex::encode(value.to_bytes())
}
