use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use vibefactor::budget::DEFAULT_DELTA_E;
use vibefactor::hamiltonian::NormMode;
use vibefactor_cli::{
    cmd_estimate, cmd_gen_vibronic, cmd_sweep_rank, cmd_validate, exit_code, DeltaE, RunConfig,
};

/// Fault-tolerant cost estimates for factorized vibrational and vibronic Hamiltonians.
#[derive(Parser)]
#[command(name = "vibefactor", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cost reports for each method and a comparison table.
    Estimate(Common),
    /// CP error against rank for every tensor.
    SweepRank {
        #[command(flatten)]
        common: Common,
        /// Highest rank swept (default: the rank cap, else full rank).
        #[arg(long)]
        max_rank: Option<usize>,
    },
    /// Dense-matrix checks on a small model.
    Validate(Common),
    /// Add synthetic vibronic couplings to a vibrational model.
    GenVibronic {
        #[arg(long)]
        model: PathBuf,
        /// Number of electronic orbitals.
        #[arg(long)]
        orbitals: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "unfactorized,cp,tucker")]
    methods: Vec<String>,
    /// Target energy error in Hartree.
    #[arg(long, conflicts_with = "delta_e_rel")]
    delta_e: Option<f64>,
    /// Target energy error as a fraction of the unfactorized 1-norm.
    #[arg(long)]
    delta_e_rel: Option<f64>,
    #[arg(long, default_value_t = NormMode::Coefficient)]
    norm_mode: NormMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    #[arg(long)]
    rank_cap: Option<usize>,
    /// Use this CP rank for every tensor instead of searching.
    #[arg(long)]
    cp_rank: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl Common {
    fn config(self) -> RunConfig {
        let delta_e = match (self.delta_e, self.delta_e_rel) {
            (_, Some(r)) => DeltaE::Relative(r),
            (Some(x), None) => DeltaE::Absolute(x),
            (None, None) => DeltaE::Absolute(DEFAULT_DELTA_E),
        };
        RunConfig {
            model: self.model,
            methods: self.methods,
            delta_e,
            norm_mode: self.norm_mode,
            seed: self.seed,
            restarts: self.restarts,
            rank_cap: self.rank_cap,
            cp_rank: self.cp_rank,
            out: self.out,
        }
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("VIBEFACTOR_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| {
            anyhow::anyhow!("VIBEFACTOR_THREADS must be a positive integer, got {v:?}")
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    init_threads()?;
    match cli.command {
        Command::Estimate(c) => {
            let out = cmd_estimate(&c.config())?;
            for r in &out.rows {
                let rel = r
                    .relative_cost
                    .map(|x| format!("{x:.4}"))
                    .unwrap_or_else(|| "-".into());
                println!(
                    "{:<13} lambda={:<12.6} qubits={:<5} T={:<14} rel={rel}",
                    r.method, r.lambda, r.qubits, r.total_t
                );
            }
            println!("wrote {}", out.csv_path.display());
        }
        Command::SweepRank { common, max_rank } => {
            let (rows, path) = cmd_sweep_rank(&common.config(), max_rank)?;
            println!("{} rows, wrote {}", rows.len(), path.display());
        }
        Command::Validate(c) => {
            let s = cmd_validate(&c.config())?;
            for chk in &s.checks {
                println!("{:<8} {:<32} {}", chk.status, chk.name, chk.detail);
            }
            return Ok(s.passed);
        }
        Command::GenVibronic {
            model,
            orbitals,
            seed,
            out,
        } => {
            let path = cmd_gen_vibronic(&model, orbitals, seed, &out)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
