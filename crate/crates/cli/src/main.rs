use std::io;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand, ValueEnum};
use jalgo::ExitStatus;
use jalgo_core::RunLimits;
use jalgo_service::AppState;

#[derive(Parser)]
#[command(
    name = "jalgo",
    version,
    about = "Compile, run, trace and step through jAlgo programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Limits {
    /// Maximum number of recorded frames.
    #[arg(long, default_value_t = RunLimits::DEFAULT_MAX_FRAMES as u64, value_parser = clap::value_parser!(u64).range(1..))]
    max_frames: u64,
    /// Maximum number of tree nodes.
    #[arg(long, default_value_t = RunLimits::DEFAULT_MAX_NODES as u64, value_parser = clap::value_parser!(u64).range(1..))]
    max_nodes: u64,
}

impl Limits {
    fn to_run_limits(&self) -> RunLimits {
        let clamp = |n: u64| usize::try_from(n).unwrap_or(usize::MAX);
        RunLimits::new(clamp(self.max_frames), clamp(self.max_nodes))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Report lexical, syntax and semantic errors.
    Check { file: PathBuf },
    /// Run a program and print its output.
    Run {
        file: PathBuf,
        #[command(flatten)]
        limits: Limits,
    },
    /// Write the full execution trace as JSON.
    Trace {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Write to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        limits: Limits,
    },
    /// Step through a program interactively.
    Debug { file: PathBuf },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, env = "JALGO_PORT", default_value_t = 8321)]
        port: u16,
        #[arg(long, default_value_t = IpAddr::V4(Ipv4Addr::LOCALHOST))]
        bind: IpAddr,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            process::exit(if e.use_stderr() {
                ExitStatus::Usage.code()
            } else {
                0
            });
        }
    };

    let mut stdout = io::stdout().lock();
    let mut stderr = io::stderr();
    let status = match cli.command {
        Command::Check { file } => jalgo::check(&file, &mut stderr),
        Command::Run { file, limits } => {
            jalgo::run(&file, limits.to_run_limits(), &mut stdout, &mut stderr)
        }
        Command::Trace {
            file,
            format: Format::Json,
            out,
            limits,
        } => jalgo::trace(
            &file,
            limits.to_run_limits(),
            out.as_deref(),
            &mut stdout,
            &mut stderr,
        ),
        Command::Debug { file } => {
            let mut stdin = io::stdin().lock();
            jalgo::debug(&file, &mut stdin, &mut stdout, &mut stderr)
        }
        Command::Serve { port, bind } => {
            drop(stdout);
            serve(SocketAddr::new(bind, port))
        }
    };
    process::exit(status.code());
}

fn serve(addr: SocketAddr) -> ExitStatus {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("cannot start runtime: {e}");
            return ExitStatus::Io;
        }
    };
    runtime.block_on(async {
        let listener = match tokio::net::TcpListener::bind(addr).await {
            Ok(l) => l,
            Err(e) => {
                eprintln!("cannot bind {addr}: {e}");
                return ExitStatus::Io;
            }
        };
        let local = listener.local_addr().unwrap_or(addr);
        println!("listening on http://{local}");
        tokio::select! {
            result = jalgo_service::serve(listener, AppState::new()) => match result {
                Ok(()) => ExitStatus::Success,
                Err(e) => {
                    eprintln!("server error: {e}");
                    ExitStatus::Io
                }
            },
            _ = tokio::signal::ctrl_c() => ExitStatus::Success,
        }
    })
}
