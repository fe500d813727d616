//! Command-line definition.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Certify frame, K-frame and controlled K-frame inequalities.
#[derive(Debug, Clone, Parser)]
#[command(name = "kframe", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Relative tolerance of every certificate (overrides KFRAME_TOL).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Base seed for sampled checks and generators.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of sampled sequences for the perturbation condition.
    #[arg(long, global = true, default_value_t = 200)]
    pub trials: usize,
    /// Report (or generated data) destination; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; `sweep` defaults to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    /// Controlled K-frame bounds to K-frame bounds.
    C2k,
    /// K-frame bounds to controlled K-frame bounds.
    K2c,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Frame,
    /// Frame sharing an eigenbasis with the `k`/`c` pair of the same seed.
    JointFrame,
    /// Ill-conditioned frame for solver comparisons.
    GradedFrame,
    K,
    C,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Optimal frame bounds, and K-frame or controlled bounds when --k/--c are given.
    Bounds {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: Option<PathBuf>,
        #[arg(long)]
        c: Option<PathBuf>,
    },
    /// Certify A‖K*f‖² ≤ Σ|⟨f, f_i⟩|² ≤ B‖f‖².
    CertifyK {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: PathBuf,
        #[arg(long)]
        lower: f64,
        #[arg(long)]
        upper: f64,
    },
    /// Certify a controlled frame, or a controlled K-frame when --k is given.
    CertifyControlled {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: Option<PathBuf>,
        #[arg(long)]
        c: PathBuf,
        #[arg(long)]
        lower: f64,
        #[arg(long)]
        upper: f64,
    },
    /// Convert bounds between K-frames and controlled K-frames.
    Transfer {
        #[arg(long, value_enum)]
        direction: Direction,
        #[arg(long)]
        c: PathBuf,
        #[arg(long)]
        lower: f64,
        #[arg(long)]
        upper: f64,
        /// Frame to certify the transferred bounds against (needs --k).
        #[arg(long, requires = "k")]
        input: Option<PathBuf>,
        #[arg(long)]
        k: Option<PathBuf>,
    },
    /// Gate value and predicted bounds of a perturbed K-frame.
    PerturbPredict {
        #[arg(long)]
        k: PathBuf,
        #[arg(long)]
        lower: f64,
        #[arg(long)]
        upper: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
    },
    /// Compare predicted and empirical bounds of a perturbed family.
    ///
    /// With --c the compact controlled variant is run instead.
    PerturbVerify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        perturbed: PathBuf,
        #[arg(long)]
        k: PathBuf,
        #[arg(long)]
        c: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
    },
    /// Solve S x = g by the (preconditioned) frame algorithm.
    Solve {
        #[arg(long)]
        input: PathBuf,
        /// Right-hand side; all ones when absent.
        #[arg(long)]
        rhs: Option<PathBuf>,
        /// Control operator file, or `jacobi` for diag(S)⁻¹.
        #[arg(long)]
        c: Option<String>,
        #[arg(long, default_value_t = 1e-10)]
        tol_res: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
    },
    /// Perturbation ensemble, one CSV row per seed.
    Sweep(SweepArgs),
    /// Write a seeded random instance.
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        #[arg(long)]
        dim: usize,
        /// Number of frame vectors (frame kinds only).
        #[arg(long)]
        count: Option<usize>,
        /// Rank of K (`k`, `c` and `joint-frame`); full rank when absent.
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = 100.0)]
        kappa: f64,
        #[arg(long, default_value_t = 0.05)]
        coupling: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Seed range, `a..b` or `a..=b`.
    #[arg(long, default_value = "0..50")]
    pub seeds: String,
    /// Dimension range.
    #[arg(long, default_value = "2..=8")]
    pub d: String,
    /// Frame size range; clamped below by d.
    #[arg(long, default_value = "4..=12")]
    pub n: String,
    /// Range of ‖E‖ = γ, drawn uniformly per seed.
    #[arg(long, default_value = "0")]
    pub gamma: String,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
}
