use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fmcc_cli::commands::{self, server_config};
use fmcc_cli::eventlog::TraceVariant;
use fmcc_cli::report::Report;
use fmcc_cli::{bench, CliError};
use fmcc_core::crypto::BackendKind;
use fmcc_core::index::Budget;
use fmcc_core::model::DEFAULT_EXTENSION_CAP;
use fmcc_core::net::LISTEN_ADDR_ENV;

const DEFAULT_ADDR: &str = "127.0.0.1:7878";

#[derive(Parser)]
#[command(name = "fmcc", version, about = "Private conformance checking against an FM-index of model runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Index files.
    #[command(subcommand)]
    Index(IndexCommand),
    /// Serve secure checks for a model.
    Serve {
        #[command(flatten)]
        source: Source,
        #[arg(long, env = LISTEN_ADDR_ENV, default_value = DEFAULT_ADDR)]
        addr: String,
        /// Undo messages allowed per session, or `inf`.
        #[arg(long, default_value = "8")]
        budget: Budget,
        /// Accepted backends; all by default.
        #[arg(long = "backend")]
        backends: Vec<BackendKind>,
    },
    /// Check traces against a running server.
    Check {
        #[arg(long, env = LISTEN_ADDR_ENV, default_value = DEFAULT_ADDR)]
        addr: String,
        #[arg(long, default_value = "group")]
        backend: BackendKind,
        #[command(flatten)]
        traces: Traces,
        #[arg(long)]
        no_timing: bool,
    },
    /// Align traces in plaintext, without a server.
    Align {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        traces: Traces,
        #[arg(long, default_value = "inf")]
        budget: Budget,
        #[arg(long)]
        no_timing: bool,
    },
    /// Time secure checks over loopback and write CSV.
    Bench {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        traces: Traces,
        #[arg(long = "backend", default_values_t = [BackendKind::Mock, BackendKind::Group])]
        backends: Vec<BackendKind>,
        #[arg(long, default_value_t = 5)]
        repetitions: usize,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum IndexCommand {
    /// Build an index file from a model.
    Build {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EXTENSION_CAP)]
        cap: usize,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ModelOrIndex {
    /// Petri net, .pnml or .json.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Index file written by `index build`.
    #[arg(long)]
    index: Option<PathBuf>,
}

#[derive(Args)]
struct Source {
    #[command(flatten)]
    which: ModelOrIndex,
    /// Linearization cap when building from a model.
    #[arg(long, default_value_t = DEFAULT_EXTENSION_CAP)]
    cap: usize,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "trace_source")]
struct TraceSource {
    /// CSV event log with case_id,activity,timestamp.
    #[arg(long)]
    log: Option<PathBuf>,
    /// One trace, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    trace: Option<String>,
}

#[derive(Args)]
struct Traces {
    #[command(flatten)]
    source: TraceSource,
    /// Only this case of the log.
    #[arg(long, requires = "log")]
    case: Option<String>,
}

impl Source {
    fn load(&self) -> Result<fmcc_core::FmIndex, CliError> {
        commands::index_from(self.which.model.as_deref(), self.which.index.as_deref(), self.cap)
    }
}

impl Traces {
    fn load(&self) -> Result<Vec<TraceVariant>, CliError> {
        match (&self.source.log, &self.source.trace) {
            (Some(log), _) => commands::load_variants(log, self.case.as_deref()),
            (None, Some(t)) => Ok(vec![TraceVariant {
                activities: commands::parse_trace(t),
                frequency: 1,
            }]),
            (None, None) => Err(CliError::Input("one of --log or --trace is required".into())),
        }
    }
}

fn print_report(report: &Report, timing: bool) -> Result<(), CliError> {
    print!("{}", report.render(timing));
    if report.aborted() > 0 {
        Err(CliError::Aborted(format!("{} variant(s) aborted", report.aborted())))
    } else {
        Ok(())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Index(IndexCommand::Build { model, out, cap }) => {
            let stats = commands::index_build(&model, &out, cap)?;
            println!("{stats}");
            Ok(())
        }
        Command::Serve { source, addr, budget, backends } => {
            let backends = if backends.is_empty() {
                vec![BackendKind::Mock, BackendKind::Group]
            } else {
                backends
            };
            commands::serve(source.load()?, &addr, server_config(budget, backends))
        }
        Command::Check { addr, backend, traces, no_timing } => {
            let report = commands::check(addr.as_str(), backend, &traces.load()?)?;
            print_report(&report, !no_timing)
        }
        Command::Align { source, traces, budget, no_timing } => {
            let report = commands::align_local(&source.load()?, &traces.load()?, budget)?;
            print_report(&report, !no_timing)
        }
        Command::Bench { source, traces, backends, repetitions, out } => {
            let index = source.load()?;
            let variants = traces.load()?;
            commands::check_labels(index.alphabet(), &variants)?;
            let rows = bench::run(index, &variants, &backends, repetitions)?;
            let csv_err = |e: csv::Error| CliError::Input(format!("csv: {e}"));
            match out {
                Some(path) => {
                    let f = File::create(&path)
                        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                    bench::write_csv(&rows, BufWriter::new(f)).map_err(csv_err)
                }
                None => bench::write_csv(&rows, io::stdout().lock()).map_err(csv_err),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = io::stdout().flush();
            eprintln!("fmcc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
