use std::path::PathBuf;

use spraylab_core::curvature::Tolerances;
use spraylab_core::jet::DEFAULT_MAX_ORDER;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CheckCc,
    Bianchi,
    Hamel,
    Beltrami,
    Invariants,
    FlagCurvature,
    Catalog,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckCc => "check-cc",
            Command::Bianchi => "bianchi",
            Command::Hamel => "hamel",
            Command::Beltrami => "beltrami",
            Command::Invariants => "invariants",
            Command::FlagCurvature => "flag-curvature",
            Command::Catalog => "catalog",
        }
    }

    pub fn needs_factor(self) -> bool {
        matches!(
            self,
            Command::Hamel | Command::Beltrami | Command::Invariants
        )
    }
}

/// Where a metric or factor expression comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Catalog(String),
    /// `dim=<n>` header, optional `domain=ball|cube <radius>`, one expression.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub metric: Option<Source>,
    pub factor: Option<Source>,
    /// Catalog entries default to 2; checked against the header for files.
    pub dim: Option<usize>,
    pub points: usize,
    /// Sampling seed; also seeds the test-vector battery.
    pub seed: u64,
    /// Seed of random catalog entries (`rand_riemann`; `rand_factor` uses
    /// `metric_seed + 1`). Defaults to `seed`.
    pub metric_seed: Option<u64>,
    pub tolerances: Tolerances,
    pub max_order: usize,
    pub json: Option<PathBuf>,
    /// Print the per-point table even when every verdict passes.
    pub table: bool,
    /// Worker threads; `None` uses `SPRAYLAB_THREADS` or all cores.
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            metric: None,
            factor: None,
            dim: None,
            points: 100,
            seed: 42,
            metric_seed: None,
            tolerances: Tolerances::default(),
            max_order: DEFAULT_MAX_ORDER,
            json: None,
            table: false,
            threads: None,
        }
    }

    pub fn metric_seed(&self) -> u64 {
        self.metric_seed.unwrap_or(self.seed)
    }

    pub fn factor_seed(&self) -> u64 {
        self.metric_seed().wrapping_add(1)
    }
}
