use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "infoextract",
    version,
    about = "Extract individual information, decouple variables and measure information flow"
)]
pub struct Cli {
    /// Report errors as JSON on stderr.
    #[arg(long, global = true)]
    pub json_errors: bool,

    /// Worker threads (default: available cores).
    #[arg(long, global = true, env = "INFOEXTRACT_THREADS")]
    pub threads: Option<usize>,

    /// Units for reported information values.
    #[arg(long, global = true, value_enum, default_value_t = Units::Bits)]
    pub units: Units,

    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Bits,
    Nats,
}

impl Units {
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            Units::Bits => infoextract::infoflow::nats_to_bits(nats),
            Units::Nats => nats,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Units::Bits => "bits",
            Units::Nats => "nats",
        }
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate a seeded synthetic dataset.
    Synth(SynthArgs),
    /// Quantile-normalize columns to [0,1].
    Normalize(NormalizeArgs),
    /// Extract the information of a target not explained by given columns.
    Extract(ExtractArgs),
    /// Decouple all columns into pairwise independent components.
    Decouple(DecoupleArgs),
    /// Undo a stored layer stack.
    Reconstruct(ReconstructArgs),
    /// Mutual information of two columns.
    Mi(MiArgs),
    /// Direct mutual information given intermediate columns.
    Dmi(DmiArgs),
    /// Delay profiles, coefficient fields and spectra between series.
    Granger(GrangerArgs),
    /// Pairwise dependence report of a table, with optional scatter plot.
    Report(ReportArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct InputArgs {
    /// Input CSV with a header row.
    #[arg(short, long)]
    pub input: PathBuf,

    /// Field delimiter.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,

    /// Skip rows with missing cells instead of failing.
    #[arg(long)]
    pub drop_missing: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,

    /// Polynomial degree per variable.
    #[arg(long, default_value_t = infoextract::hcr::DEFAULT_DEGREE)]
    pub degree: usize,

    /// Grid points of calibrated densities.
    #[arg(long, default_value_t = infoextract::hcr::DEFAULT_GRID)]
    pub grid: usize,

    /// Density floor before normalization.
    #[arg(long, default_value_t = infoextract::hcr::DEFAULT_FLOOR)]
    pub floor: f64,

    /// Ridge penalty of moment regression.
    #[arg(long, default_value_t = infoextract::hcr::DEFAULT_RIDGE)]
    pub ridge: f64,

    /// Add pairwise product features to moment regression.
    #[arg(long)]
    pub pairwise_products: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Auto,
    JointSlice,
    MomentRegression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    GaussianCopula,
    MarkovChain,
    LaggedPair,
    LaggedChain,
    Independent,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, value_enum, required_unless_present = "spec")]
    pub kind: Option<KindArg>,

    /// JSON generator spec instead of flags.
    #[arg(long, conflicts_with = "kind")]
    pub spec: Option<PathBuf>,

    #[arg(long, default_value_t = 0.7)]
    pub rho: f64,

    /// Rows (also the series length of time-series kinds unless --t is set).
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,

    #[arg(long, default_value_t = 2)]
    pub dims: usize,

    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,

    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,

    #[arg(long, default_value_t = 1.0)]
    pub noise_z: f64,

    #[arg(long, default_value_t = 1.0)]
    pub noise_y: f64,

    /// Series length of time-series kinds.
    #[arg(long)]
    pub t: Option<usize>,

    #[arg(long, default_value_t = 3)]
    pub delay: usize,

    #[arg(long, default_value_t = 2)]
    pub delay_xy: usize,

    #[arg(long, default_value_t = 3)]
    pub delay_yz: usize,

    #[arg(long, default_value_t = 0.8)]
    pub coupling: f64,

    /// Noise scale of time-series kinds (default: sqrt(1 - coupling^2)).
    #[arg(long)]
    pub noise: Option<f64>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Quantile-normalize the generated columns.
    #[arg(long)]
    pub normalized: bool,

    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct NormalizeArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Columns to keep (comma separated; default all).
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,

    /// Write the fitted quantile maps as JSON.
    #[arg(long)]
    pub maps: Option<PathBuf>,

    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long)]
    pub target: String,

    /// Conditioning columns (comma separated; may be empty).
    #[arg(long, value_delimiter = ',')]
    pub given: Vec<String>,

    /// Successive extractions of the target.
    #[arg(long, default_value_t = 1)]
    pub iterations: usize,

    #[command(flatten)]
    pub model: ModelArgs,

    #[arg(long, default_value_t = infoextract::infoflow::DEFAULT_BINS)]
    pub bins: usize,

    /// Input is already on [0,1]; skip quantile normalization.
    #[arg(long)]
    pub normalized: bool,

    /// Layer stack JSON output.
    #[arg(long)]
    pub layers: PathBuf,

    /// Scatter plot of target against the first given column, before/after.
    #[arg(long)]
    pub plot: Option<PathBuf>,

    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct DecoupleArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Processing order (comma separated permutation; default file order).
    #[arg(long, value_delimiter = ',')]
    pub order: Vec<String>,

    #[arg(long, default_value_t = infoextract::decoupling::DEFAULT_SWEEPS)]
    pub sweeps: usize,

    #[command(flatten)]
    pub model: ModelArgs,

    #[arg(long, default_value_t = infoextract::infoflow::DEFAULT_BINS)]
    pub bins: usize,

    #[arg(long)]
    pub normalized: bool,

    /// Extract every column against the untouched others at once (not invertible).
    #[arg(long, conflicts_with = "experimental_sweep_start")]
    pub symmetric: bool,

    /// Experimental: condition on the table as of sweep start (not invertible).
    #[arg(long)]
    pub experimental_sweep_start: bool,

    #[arg(long)]
    pub layers: PathBuf,

    /// Dependence report JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,

    /// Line plot of the per-sweep dependence history.
    #[arg(long)]
    pub plot: Option<PathBuf>,

    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long)]
    pub layers: PathBuf,

    /// Map back to the raw scale using the stored quantile maps.
    #[arg(long)]
    pub denormalize: bool,

    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MiMethodArg {
    Binned,
    Hcr,
}

#[derive(Debug, Args, Serialize)]
pub struct MiArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long)]
    pub x: String,

    #[arg(long)]
    pub y: String,

    #[arg(long, value_enum, default_value_t = MiMethodArg::Binned)]
    pub method: MiMethodArg,

    #[arg(long, default_value_t = infoextract::infoflow::DEFAULT_BINS)]
    pub bins: usize,

    #[arg(long, default_value_t = infoextract::hcr::DEFAULT_DEGREE)]
    pub degree: usize,

    #[arg(long)]
    pub normalized: bool,

    /// JSON output (default stdout).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DmiArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// With --y, a single pair; omit both for a scan of all pairs.
    #[arg(long, requires = "y")]
    pub x: Option<String>,

    #[arg(long, requires = "x")]
    pub y: Option<String>,

    /// Intermediate columns (comma separated). In a full scan every pair
    /// conditions on all remaining columns.
    #[arg(long, value_delimiter = ',')]
    pub z: Vec<String>,

    /// Also compute the binned conditional MI reference (|z| <= 2).
    #[arg(long)]
    pub reference: bool,

    /// Bins per axis of the conditional reference.
    #[arg(long, default_value_t = infoextract::infoflow::DEFAULT_REFERENCE_BINS)]
    pub reference_bins: usize,

    #[command(flatten)]
    pub model: ModelArgs,

    #[arg(long, default_value_t = infoextract::infoflow::DEFAULT_BINS)]
    pub bins: usize,

    #[arg(long)]
    pub normalized: bool,

    /// Direct-MI matrix CSV of a full scan.
    #[arg(long)]
    pub matrix: Option<PathBuf>,

    /// JSON records (default stdout).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidueModeArg {
    Distribution,
    Linear,
}

#[derive(Debug, Args, Serialize)]
pub struct GrangerArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Source series; with --target analyzes one pair, otherwise all pairs.
    #[arg(long, requires = "target")]
    pub source: Option<String>,

    #[arg(long, requires = "source")]
    pub target: Option<String>,

    /// Own lags removed from the target.
    #[arg(long, default_value_t = 2)]
    pub lags: usize,

    #[arg(long, default_value_t = 10)]
    pub max_delay: usize,

    #[arg(long, default_value_t = infoextract::hcr::DEFAULT_DEGREE)]
    pub degree: usize,

    #[arg(long, default_value_t = infoextract::infoflow::DEFAULT_BINS)]
    pub bins: usize,

    #[arg(long, value_enum, default_value_t = ResidueModeArg::Distribution)]
    pub mode: ResidueModeArg,

    /// Residue extraction passes.
    #[arg(long, default_value_t = 2)]
    pub iterations: usize,

    /// PCA rank (overrides --pca-variance).
    #[arg(long)]
    pub pca_rank: Option<usize>,

    #[arg(long, default_value_t = 0.9)]
    pub pca_variance: f64,

    #[arg(long)]
    pub center_pca: bool,

    /// Skip panel decoupling and third-series lag conditioning.
    #[arg(long)]
    pub no_decouple: bool,

    /// Output prefix; files get .profile.csv, .coefficients.csv,
    /// .decomposition.json and .spectrum.csv suffixes.
    #[arg(short, long)]
    pub output: PathBuf,

    /// SVG of correlation and principal scores over the delay.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long, default_value_t = infoextract::infoflow::DEFAULT_BINS)]
    pub bins: usize,

    /// Table before transformation, for cross dependence and scatter plots.
    #[arg(long)]
    pub before: Option<PathBuf>,

    /// Input is already on [0,1].
    #[arg(long)]
    pub normalized: bool,

    /// Scatter plot of --x against --y (before/after panels with --before).
    #[arg(long, requires_all = ["x", "y"])]
    pub plot: Option<PathBuf>,

    #[arg(long)]
    pub x: Option<String>,

    #[arg(long)]
    pub y: Option<String>,

    #[arg(short, long)]
    pub output: PathBuf,
}
