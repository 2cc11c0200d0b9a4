use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "kpe", version, about = "Quantify and detect (k+1)-partite entanglement of N-qubit states")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Master seed for random generation and optimizer restarts.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Add validation diagnostics and the tolerances in force to the report.
    #[arg(long, global = true)]
    pub tolerance_report: bool,
    /// Output file (report, state or CSV depending on the command); stdout if absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a state file for a family member or a random state.
    Gen(GenArgs),
    /// Compute the (k+1)-PE concurrence, exactly for pure states and as an
    /// upper bound for mixed ones.
    Measure(MeasureArgs),
    /// Evaluate the detection functionals and decision rules.
    Detect(DetectArgs),
    /// Write the permutationally invariant part of a state and a detection report on it.
    Pi(PiArgs),
    /// Tabulate functionals and verdicts of a family over a grid of p.
    Sweep(SweepArgs),
    /// Regenerate the degree curves of the noisy GHZ and W families.
    Repro(ReproArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    Ghz,
    W,
    Dicke,
    Product,
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    /// State family; GHZ uses p·|GHZ⟩⟨GHZ| + (1−p)·I/2^N, the others (1−p)·|ψ⟩⟨ψ| + p·I/2^N.
    #[arg(long, value_enum)]
    pub family: Option<FamilyKind>,
    /// Number of qubits.
    #[arg(long)]
    pub n: Option<usize>,
    /// Noise parameter in [0, 1].
    #[arg(long)]
    pub p: Option<f64>,
    /// Number of excitations for the Dicke family.
    #[arg(long)]
    pub excitations: Option<usize>,
    /// Bit string such as 0110 for the product family.
    #[arg(long)]
    pub bits: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct Source {
    /// State file in the JSON state format.
    #[arg(long, conflicts_with = "family")]
    pub state: Option<PathBuf>,
    #[command(flatten)]
    pub family: FamilyArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RandomKind {
    /// Haar-random pure state.
    Haar,
    /// Density matrix from the Ginibre ensemble.
    Ginibre,
    /// Product of Haar-random blocks of at most --k qubits.
    Producible,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Draw a random state instead of a family member (uses --seed and --n).
    #[arg(long, value_enum, conflicts_with = "family")]
    pub random: Option<RandomKind>,
    /// Largest block size for --random producible.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizerArgs {
    /// Ensemble length of the convex-roof search.
    #[arg(long)]
    pub ensemble_size: Option<usize>,
    /// Number of optimizer restarts.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Iteration budget per restart.
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[command(flatten)]
    pub source: Source,
    /// Largest admissible block size.
    #[arg(long)]
    pub k: usize,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub source: Source,
    /// Values of k to test (repeat or comma-separate); all of 1..N−1 by default.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,
    /// Run the detectors on the permutationally invariant part.
    #[arg(long)]
    pub pi: bool,
}

#[derive(Debug, Args)]
pub struct PiArgs {
    #[command(flatten)]
    pub source: Source,
    /// Values of k for the detection report; all of 1..N−1 by default.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,
    /// Where to write the detection report; stdout if absent.
    #[arg(long)]
    pub report: Option<std::path::PathBuf>,
    /// Also search local unitaries for a lower bound on the measure, for each --k.
    #[arg(long, requires = "k")]
    pub bound: bool,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, default_value_t = 0.0)]
    pub p_start: f64,
    #[arg(long, default_value_t = 1.0)]
    pub p_stop: f64,
    #[arg(long, default_value_t = 0.01)]
    pub p_step: f64,
    /// Values of k (repeat or comma-separate); all of 1..N−1 by default.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// D_k of noisy GHZ states for N = 3, 4, 10.
    Fig1,
    /// D̃_k of noisy W states for N = 6, 8, 12.
    Fig2,
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    #[arg(value_enum)]
    pub figure: Figure,
    /// Grid step in p.
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
}
