use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use ugv_teleop::cli::{self, CliError, LinkOverrides, RunOptions};
use ugv_teleop::dtmf::DtmfConfig;

#[derive(Parser)]
#[command(name = "ugv", version, about = "Teleoperated UGV simulator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scripted mission headless and write the trajectory CSV.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        script: Option<PathBuf>,
        /// Simulated seconds.
        #[arg(long)]
        duration: f64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        link: LinkFlags,
    },
    /// Serve a live session over TCP (newline-delimited JSON).
    Serve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 8765)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[command(flatten)]
        link: LinkFlags,
    },
    /// DTMF encode/decode utilities.
    Dtmf {
        #[command(subcommand)]
        mode: DtmfMode,
    },
}

#[derive(Args)]
struct LinkFlags {
    #[arg(long)]
    seed: Option<u64>,
    /// Uplink audio SNR in dB ("inf" disables noise).
    #[arg(long)]
    snr_db: Option<f64>,
    #[arg(long)]
    drop_prob: Option<f64>,
    #[arg(long)]
    latency_ms: Option<f64>,
    #[arg(long)]
    invert_turns: bool,
}

impl From<LinkFlags> for LinkOverrides {
    fn from(f: LinkFlags) -> Self {
        LinkOverrides {
            seed: f.seed,
            snr_db: f.snr_db,
            drop_prob: f.drop_prob,
            latency_ms: f.latency_ms,
            invert_turns: f.invert_turns,
        }
    }
}

#[derive(Subcommand)]
enum DtmfMode {
    /// Command names, one per line, to WAV.
    Encode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tone: ToneFlags,
    },
    /// WAV to command names; writes to stdout unless --out is given.
    Decode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tone: ToneFlags,
    },
}

#[derive(Args)]
struct ToneFlags {
    #[arg(long, default_value_t = 8000)]
    sample_rate: u32,
    #[arg(long, default_value_t = 80.0)]
    tone_ms: f64,
    #[arg(long, default_value_t = 80.0)]
    gap_ms: f64,
    #[arg(long, default_value_t = 0.45)]
    amplitude: f64,
}

impl ToneFlags {
    fn config(&self) -> DtmfConfig {
        DtmfConfig {
            sample_rate: self.sample_rate,
            symbol_duration: self.tone_ms / 1000.0,
            gap_duration: self.gap_ms / 1000.0,
            amplitude: self.amplitude,
            ..DtmfConfig::default()
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Cmd::Run {
            scenario,
            script,
            duration,
            out,
            link,
        } => {
            let report = cli::run_scenario(&RunOptions {
                scenario,
                script,
                duration,
                out,
                link: link.into(),
            })?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report.rounded()).expect("report serializes")
            );
        }
        Cmd::Serve {
            scenario,
            port,
            host,
            link,
        } => {
            let mut config = cli::load_session_config(&scenario, &link.into())?;
            config.port = port;
            let shutdown = Arc::new(AtomicBool::new(false));
            let flag = shutdown.clone();
            ctrlc::set_handler(move || flag.store(true, Ordering::SeqCst))
                .map_err(|e| CliError::Environment(format!("cannot install signal handler: {e}")))?;
            cli::serve(config, &host, shutdown)?;
        }
        Cmd::Dtmf {
            mode: DtmfMode::Encode { input, out, tone },
        } => {
            let n = cli::dtmf_encode(&input, &out, &tone.config())?;
            eprintln!("encoded {n} command(s) to {}", out.display());
        }
        Cmd::Dtmf {
            mode: DtmfMode::Decode { input, out, tone },
        } => {
            let lines = cli::dtmf_decode(&input, &tone.config())?;
            let mut text = lines.join("\n");
            if !text.is_empty() {
                text.push('\n');
            }
            match out {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|e| CliError::Environment(format!("{}: {e}", path.display())))?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
