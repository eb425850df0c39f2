use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use icacdma::config::{self, ConfigError};
use icacdma::harness::{run_plan, SerReport};
use icacdma::{plot, table};
use icacdma_core::codes::GoldCodeSet;

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "icacdma", version, about = "ICA-based DS-CDMA detector simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment plan and write CSV tables and SVG plots.
    Run {
        /// TOML config; omitted keys take the full-grid defaults.
        config: Option<PathBuf>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Override a config key, e.g. `--set snr_db=-10,-5,0`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Print the Gold code family, one code per line.
    Codes {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-render SVG plots from the CSV tables in a directory.
    Plot {
        csv_dir: PathBuf,
        /// Where to write the SVGs (default: the CSV directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(format!("config error: {e}"))
    }
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn ensure_writable(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::Config(format!("cannot create {}: {e}", dir.display())))?;
    let probe = dir.join(".icacdma-write-test");
    fs::write(&probe, b"")
        .and_then(|_| fs::remove_file(&probe))
        .map_err(|e| Failure::Config(format!("{} is not writable: {e}", dir.display())))
}

fn write_wallclock(report: &SerReport, dir: &Path) -> io::Result<()> {
    let mut text = String::from("noise\tsymbols\tsnr_db\talgorithm\tdetector\truns\twallclock_s\n");
    for r in &report.records {
        text.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{:.3}\n",
            r.key.noise,
            r.key.symbols,
            r.key.snr_db,
            r.algorithm_name(),
            r.detector,
            r.runs,
            r.wallclock_s
        ));
    }
    fs::write(dir.join("wallclock.tsv"), text)
}

fn run(
    config_path: Option<&Path>,
    out: &Path,
    threads: Option<usize>,
    overrides: &[String],
) -> Result<(), Failure> {
    let plan = match config_path {
        Some(path) => config::parse_config_with(path, overrides)?,
        None => config::parse_config_str("", overrides)?,
    };
    ensure_writable(out)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(runtime)?;
    log::info!(
        "{} scenarios x {} runs on {} threads",
        plan.scenarios.len(),
        plan.runs_per_point,
        pool.current_num_threads()
    );
    let started = Instant::now();
    let report = pool.install(|| run_plan(&plan)).map_err(runtime)?;
    log::info!(
        "finished in {:.1}s ({:.1}s of compute)",
        started.elapsed().as_secs_f64(),
        report.total_wallclock_s()
    );
    let tables = table::tables(&report);
    for path in table::write_tables(&tables, out).map_err(runtime)? {
        log::info!("wrote {}", path.display());
    }
    for path in plot::render_tables(&tables, out).map_err(runtime)? {
        log::info!("wrote {}", path.display());
    }
    write_wallclock(&report, out).map_err(runtime)?;
    Ok(())
}

fn codes(out: Option<&Path>) -> Result<(), Failure> {
    let set = GoldCodeSet::standard();
    let mut text = String::new();
    for code in &set.codes {
        let chips: Vec<&str> = code.iter().map(|&c| if c > 0 { "+1" } else { "-1" }).collect();
        text.push_str(&chips.join(" "));
        text.push('\n');
    }
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| runtime(format!("{}: {e}", path.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(runtime),
    }
}

fn plot_dir(csv_dir: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let tables = table::read_tables(csv_dir).map_err(runtime)?;
    if tables.is_empty() {
        return Err(Failure::Runtime(format!(
            "no ser_<noise>_M<M>.csv tables in {}",
            csv_dir.display()
        )));
    }
    let dir = out.unwrap_or(csv_dir);
    for path in plot::render_tables(&tables, dir).map_err(runtime)? {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            config,
            out,
            threads,
            overrides,
        } => run(config.as_deref(), out, *threads, overrides),
        Command::Codes { out } => codes(out.as_deref()),
        Command::Plot { csv_dir, out } => plot_dir(csv_dir, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("icacdma: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("icacdma: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
