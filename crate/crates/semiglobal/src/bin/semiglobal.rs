use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use semiglobal::cli;
use semiglobal::config::RunConfig;

#[derive(Parser)]
#[command(name = "semiglobal", version, about = "Semiclassical wavefunctions from a contour-integral representation")]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (flat key=value file).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out` in the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Configuration overrides, `key=value`; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate ψ on the configured grid.
    Run,
    /// Decay sectors of the integrand at q.
    Sectors {
        #[arg(long, allow_hyphen_values = true)]
        q: Option<f64>,
    },
    /// Integration path at q.
    Contour {
        #[arg(long, allow_hyphen_values = true)]
        q: Option<f64>,
        #[arg(long)]
        sector_in: Option<usize>,
        #[arg(long)]
        sector_out: Option<usize>,
    },
    /// Best fit against a reference: numerov, wkb, airy_window or a CSV file.
    Compare {
        #[arg(long = "ref", default_value = "numerov")]
        reference: String,
    },
    /// Schrödinger residual across a list of ħ values.
    Scaling {
        /// Comma-separated ħ values (default: ħ and ħ/2 from the configuration).
        #[arg(long, value_delimiter = ',')]
        hbars: Vec<f64>,
    },
    /// Ai(x) and Ai'(x).
    Airy {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    /// Pearcey integral Pe(x, y).
    Pearcey {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        y: f64,
    },
}

fn load_config(args: &Args) -> Result<RunConfig, String> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            text.parse::<RunConfig>().map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => RunConfig::default(),
    };
    for kv in &args.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("--set expects key=value, got {kv:?}"))?;
        cfg.set(k, v).map_err(|e| e.to_string())?;
    }
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    Ok(cfg)
}

fn init_threads() {
    if let Ok(v) = std::env::var("SEMIGLOBAL_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring SEMIGLOBAL_THREADS={v:?}"),
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    init_threads();
    let cfg = match load_config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(cli::EXIT_CONFIG as u8);
        }
    };
    let mid = 0.5 * (cfg.q_min + cfg.q_max);
    let code = match args.command {
        Command::Run => cli::cmd_run(&cfg),
        Command::Sectors { q } => cli::cmd_sectors(&cfg, q.unwrap_or(mid)),
        Command::Contour { q, sector_in, sector_out } => cli::cmd_contour(&cfg, q.unwrap_or(mid), sector_in, sector_out),
        Command::Compare { reference } => cli::cmd_compare(&cfg, &reference),
        Command::Scaling { hbars } => {
            let list = if hbars.is_empty() { vec![cfg.hbar, cfg.hbar / 2.0] } else { hbars };
            cli::cmd_scaling(&cfg, &list)
        }
        Command::Airy { x } => cli::cmd_airy(x),
        Command::Pearcey { x, y } => cli::cmd_pearcey(x, y),
    };
    ExitCode::from(code as u8)
}
