use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vlc_shaper::experiment::{
    load_config, pmf_report, read_pmf_report, run_point, run_sweep, write_sweep, DbConvention,
    ExperimentConfig, ExperimentError, Method, SweepResult,
};

#[derive(Parser)]
#[command(name = "vlc-shaper", version, about = "Joint PCS and precoding design for multi-user VLC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    db_convention: Option<DbConvention>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the LoS channel matrix of the configured room.
    ChannelDump {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve a single A/sigma point (the first configured one unless --db is given).
    Optimize {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        db: Option<f64>,
    },
    /// Solve every configured A/sigma point and write CSV reports.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Print the symbol distributions of one point of a finished sweep.
    PmfReport {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        point: f64,
    },
}

fn configure(run: &RunArgs) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = load_config(&run.config)?;
    if let Some(m) = run.method {
        cfg.method = m;
    }
    if let Some(s) = run.seed {
        cfg.seed = s;
    }
    if let Some(o) = &run.out {
        cfg.output_dir = o.clone();
    }
    if let Some(c) = run.db_convention {
        cfg.noise.db_convention = c;
    }
    Ok(cfg)
}

fn summarize(result: &SweepResult) {
    for p in &result.points {
        let users: Vec<String> = p.per_user.iter().map(|r| format!("{r:.4}")).collect();
        println!(
            "{:<20} {:>8} dB  sum rate {:.4} bits  [{}]  {} ms",
            p.method.name(),
            p.a_over_sigma_db,
            p.sum_rate,
            users.join(", "),
            p.wall_ms
        );
    }
    for f in &result.failures {
        eprintln!("{} dB failed: {}", f.a_over_sigma_db, f.error);
    }
}

fn run(cli: Cli) -> Result<bool, ExperimentError> {
    match cli.command {
        Command::ChannelDump { config } => {
            let cfg = load_config(&config)?;
            let h = cfg.room.channel()?;
            println!("user,led,gain");
            for k in 0..h.users() {
                for n in 0..h.leds() {
                    println!("{},{},{:e}", k + 1, n + 1, h.as_matrix()[(k, n)]);
                }
            }
            Ok(true)
        }
        Command::Optimize { run, db } => {
            let cfg = configure(&run)?;
            let db = db.unwrap_or(cfg.noise.a_over_sigma_db[0]);
            let channel = cfg.room.channel()?;
            let mut result = SweepResult { method: cfg.method, points: vec![], failures: vec![] };
            match run_point(&cfg, &channel, cfg.method, db, cfg.seed) {
                Ok(p) => result.points.push(p),
                Err(e) => result.failures.push(vlc_shaper::experiment::PointFailure {
                    a_over_sigma_db: db,
                    error: e.to_string(),
                }),
            }
            summarize(&result);
            if let Ok(report) = pmf_report(&result, db) {
                print!("{report}");
            }
            if run.out.is_some() {
                write_sweep(&result, &cfg.output_dir)?;
            }
            Ok(result.failures.is_empty())
        }
        Command::Sweep { run } => {
            let cfg = configure(&run)?;
            let result = run_sweep(&cfg, &cfg.output_dir)?;
            summarize(&result);
            Ok(result.failures.is_empty())
        }
        Command::PmfReport { out, point } => {
            print!("{}", read_pmf_report(&out, point)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
