use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "schatlab", version, about = "Schatten-class analysis of integral operators on tori and SU(2)")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sobolev norms, predicted and observed Schatten membership of a kernel.
    Analyze(AnalyzeArgs),
    /// Eigensum, naive diagonal quadrature and dyadic-averaged trace.
    Trace(TraceArgs),
    /// Schatten norms of powers of an elliptic operator on a torus.
    Powers(PowersArgs),
    /// Invariant operators on SU(2) and SO(3).
    Su2(Su2Args),
    /// Eigenvalue counting and multiplicity bounds.
    Weyl(WeylArgs),
    /// Coefficient growth of the Carleman-type witness.
    Carleman(CarlemanArgs),
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Analyze(a) => &a.common,
            Command::Trace(a) => &a.common,
            Command::Powers(a) => &a.common,
            Command::Su2(a) => &a.common,
            Command::Weyl(a) => &a.common,
            Command::Carleman(a) => &a.common,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Write (cutoff, partial sum) pairs as headerless CSV.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Omit the timestamp so identical inputs give identical bytes.
    #[arg(long)]
    pub reproducible: bool,
    /// Read `key=value` defaults from a file; flags on the command line win.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    RankOne,
    ConvPower,
    ConvTable,
    ProductRandom,
    ModeSum,
    Carleman,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KernelArgs {
    #[arg(long, value_enum, default_value_t = KernelKind::RankOne)]
    pub kernel: KernelKind,
    /// Torus dimension.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Decay exponent of conv-power, or of the row index for product-random.
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,
    /// Decay exponent of the column index for product-random.
    #[arg(long, default_value_t = 2.0)]
    pub b: f64,
    /// Symbol table for conv-table, e.g. `0=1;1=0.5;-1=0.5` (`1,0=...` on T²).
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<String>,
    /// Modes for mode-sum, e.g. `1:1=1;0:-2=0.5+0.5i`.
    #[arg(long, allow_hyphen_values = true)]
    pub modes: Option<String>,
    /// Index used by the Carleman demonstration.
    #[arg(long, default_value_t = 1.0)]
    pub p_demo: f64,
    /// Overwrite the diagonal of the kernel with this value.
    #[arg(long, allow_hyphen_values = true)]
    pub corrupt: Option<String>,
    /// Analyse a saved coefficient table instead of a kernel family.
    #[arg(long, value_name = "PATH", conflicts_with = "corrupt")]
    pub coefficients: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Lattice cutoff (default 1024 on T¹, 24 on T²).
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub mu1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub mu2: f64,
    /// Schatten indices to report on.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
    pub p: Vec<f64>,
    /// Quadrature grid for the naive trace.
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// Finest dyadic level of the averaged trace.
    #[arg(long, default_value_t = 24)]
    pub levels: u32,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TraceArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Series cutoff (default 1024 on T¹, 24 on T²).
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long, default_value_t = 16)]
    pub grid: usize,
    #[arg(long, default_value_t = 24)]
    pub levels: u32,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    TorusLaplacian,
    TorusBilaplacian,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PowersArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::TorusLaplacian)]
    pub model: ModelKind,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub p: f64,
    /// Largest lattice radius of the ladder.
    #[arg(long)]
    pub top: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpKind {
    Laplacian,
    Sublaplacian,
    Hgamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupKind {
    Su2,
    So3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZSignKind {
    /// Symbol `γ(ℓ(ℓ+1) − m²) − m`.
    Minus,
    /// Symbol `γ(ℓ(ℓ+1) − m²) + m`.
    Plus,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Su2Args {
    #[arg(long, value_enum, default_value_t = OpKind::Sublaplacian)]
    pub op: OpKind,
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value_t = ZSignKind::Minus)]
    pub z_sign: ZSignKind,
    #[arg(long, value_enum, default_value_t = GroupKind::Su2)]
    pub group: GroupKind,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub p: f64,
    /// Largest spin of the ladder.
    #[arg(long, default_value_t = 512)]
    pub l_max: u32,
    /// Shift `c` for the hypoellipticity check of `H₁ + c`.
    #[arg(long, allow_hyphen_values = true)]
    pub hypo_c: Option<f64>,
    /// Kernel regularity for the group membership thresholds.
    #[arg(long, default_value_t = 0.0)]
    pub mu1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub mu2: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WeylArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::TorusLaplacian)]
    pub model: ModelKind,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long)]
    pub lambda: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CarlemanArgs {
    /// Number of coefficients.
    #[arg(long, default_value_t = 1_000_000)]
    pub cutoff: usize,
    /// Exponent of the coefficient sum `Σ |c_k|^p`.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Grid for the sup norms of partial sums.
    #[arg(long, default_value_t = 4096)]
    pub grid: usize,
    #[command(flatten)]
    pub common: Common,
}
