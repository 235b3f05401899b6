use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spraylab::{run, Command, RunConfig, Source};
use spraylab_core::curvature::Tolerances;
use spraylab_core::jet::DEFAULT_MAX_ORDER;

/// Numerical checks for sprays and Finsler metrics: constant flag curvature,
/// Bianchi identities, Hamel factors, projective invariants.
#[derive(Parser)]
#[command(name = "spraylab", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// CC-conditions for constant flag curvature of a metric's geodesic spray.
    CheckCc(Opts),
    /// Bianchi identities of the geodesic spray, optionally deformed by --factor.
    Bianchi(Opts),
    /// Hamel condition d_h d_J P = 0 for a factor against a metric's spray.
    Hamel(Opts),
    /// Hamel condition and CC-conditions of the deformed spray, and their agreement.
    Beltrami(Opts),
    /// How h, ξ, d_Jξ and d_hξ change under the deformation S − 2P𝒞.
    Invariants(Opts),
    /// Scalar flag curvature: Φ = κ(F² Id − F d_JF ⊗ 𝒞) pointwise.
    FlagCurvature(Opts),
    /// List catalog metrics and factors.
    Catalog(Opts),
}

#[derive(Args)]
struct Opts {
    /// Catalog metric name.
    #[arg(long, conflicts_with = "metric_file")]
    metric: Option<String>,
    /// File holding `dim=<n>`, optional `domain=<ball|cube> <r>`, and F(x, y).
    #[arg(long)]
    metric_file: Option<PathBuf>,
    /// Catalog factor name.
    #[arg(long, conflicts_with = "factor_file")]
    factor: Option<String>,
    /// File holding `dim=<n>`, optional `domain=...`, and P(x, y).
    #[arg(long)]
    factor_file: Option<PathBuf>,
    /// Dimension of the base manifold (catalog default 2).
    #[arg(long)]
    dim: Option<usize>,
    /// Number of sample points.
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Sampling and test-vector seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Seed of random catalog entries; defaults to --seed.
    #[arg(long)]
    metric_seed: Option<u64>,
    /// Tolerance for algebraic identities.
    #[arg(long, default_value_t = Tolerances::default().identity)]
    tol_id: f64,
    /// Tolerance one curvature level deep (isotropy, Hamel).
    #[arg(long, default_value_t = Tolerances::default().curvature)]
    tol_curv: f64,
    /// Tolerance two curvature levels deep (d_Jξ, d_hξ, κ spread).
    #[arg(long, default_value_t = Tolerances::default().xi)]
    tol_xi: f64,
    /// Highest derivative order carried by jets.
    #[arg(long, default_value_t = DEFAULT_MAX_ORDER)]
    max_order: usize,
    /// Write the JSON report here (`-` for stdout).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Always print the per-point table.
    #[arg(long)]
    table: bool,
    /// Worker threads (default: SPRAYLAB_THREADS, else all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl Opts {
    fn into_config(self, command: Command) -> RunConfig {
        let mut cfg = RunConfig::new(command);
        cfg.metric = self
            .metric
            .map(Source::Catalog)
            .or(self.metric_file.map(Source::File));
        cfg.factor = self
            .factor
            .map(Source::Catalog)
            .or(self.factor_file.map(Source::File));
        cfg.dim = self.dim;
        cfg.points = self.points;
        cfg.seed = self.seed;
        cfg.metric_seed = self.metric_seed;
        cfg.tolerances = Tolerances {
            identity: self.tol_id,
            curvature: self.tol_curv,
            xi: self.tol_xi,
        };
        cfg.max_order = self.max_order;
        cfg.json = self.json;
        cfg.table = self.table;
        cfg.threads = self.threads;
        cfg
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, opts) = match cli.command {
        Cmd::CheckCc(o) => (Command::CheckCc, o),
        Cmd::Bianchi(o) => (Command::Bianchi, o),
        Cmd::Hamel(o) => (Command::Hamel, o),
        Cmd::Beltrami(o) => (Command::Beltrami, o),
        Cmd::Invariants(o) => (Command::Invariants, o),
        Cmd::FlagCurvature(o) => (Command::FlagCurvature, o),
        Cmd::Catalog(o) => (Command::Catalog, o),
    };
    let cfg = opts.into_config(command);
    let to_stdout = cfg.json.as_deref() == Some(std::path::Path::new("-"));
    match run(&cfg) {
        Ok(outcome) => {
            if to_stdout {
                print!("{}", outcome.json_string());
                eprint!("{}", outcome.text);
            } else {
                print!("{}", outcome.text);
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
