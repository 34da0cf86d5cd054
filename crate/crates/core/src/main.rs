use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sclab::experiments::{self, catalogue, ExperimentConfig, Format};
use sclab::Result;

/// Environment variable naming the default output directory.
const OUT_ENV: &str = "SCLAB_OUT_DIR";

#[derive(Parser)]
#[command(name = "sclab", version, about = "Scale-calculus counterexample laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment, or `all`.
    Run {
        id: String,
        /// Flat JSON config; flags override its values.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: $SCLAB_OUT_DIR, else print to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "text")]
        format: Format,
    },
    /// List the experiment catalogue.
    List,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<bool> {
    match Cli::parse().command {
        Command::List => {
            for e in catalogue() {
                println!("{:<24} {}", e.id, e.anchor);
            }
            Ok(true)
        }
        Command::Run {
            id,
            config,
            seed,
            out,
            format,
        } => {
            let mut cfg = match &config {
                Some(p) => ExperimentConfig::load(p)?,
                None => ExperimentConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let out = out
                .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
                .or_else(|| cfg.out_dir.clone().map(PathBuf::from));
            if let Some(dir) = &out {
                cfg.out_dir = Some(dir.display().to_string());
            }
            let ids: Vec<String> = if id == "all" {
                catalogue().iter().map(|e| e.id.to_string()).collect()
            } else {
                vec![id]
            };
            let mut ok = true;
            for id in ids {
                let report = experiments::run(&id, &cfg)?;
                ok &= report.pass;
                match &out {
                    Some(dir) => {
                        for p in experiments::emit(&report, format, dir)? {
                            eprintln!("wrote {}", p.display());
                        }
                        eprintln!("{id}: {}", if report.pass { "PASS" } else { "FAIL" });
                    }
                    None => print!("{}", experiments::render(&report, format)?),
                }
            }
            Ok(ok)
        }
    }
}
