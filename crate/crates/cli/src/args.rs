use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

/// Random-matrix ensembles, spectral statistics, symmetric-space catalog,
/// quantum-wire transport and Calogero-Sutherland checks.
///
/// Every CSV output starts with `#` lines recording the tool version, the
/// command and its resolved parameters. With `--out FILE` a
/// `FILE.manifest.json` with SHA-256 digests of all written files is added.
/// RMT_THREADS caps the number of worker threads.
#[derive(Parser, Debug)]
#[command(name = "symrmt", version)]
pub struct Cli {
    /// Root seed; every random draw derives from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Refuse to run a randomized command without --seed.
    #[arg(long, global = true)]
    pub strict: bool,
    /// TOML file whose keys mirror the long flags, either at top level or in
    /// a table named after the subcommand. Flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample spectra from an ensemble.
    Sample(SampleArgs),
    /// Spectral statistics of sampled spectra or of a Poisson surrogate.
    Stats(StatsArgs),
    /// Print the symmetric-space classification.
    Classify(ClassifyArgs),
    /// Conductance of a disordered wire versus length.
    Dmpk(DmpkArgs),
    /// Convergence table of the Calogero-Sutherland operator identity.
    CsCheck(CsCheckArgs),
    /// Check the Killing-form fixtures.
    LieFixtures(LieFixturesArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum KindArg {
    Gaussian,
    Circular,
    Chiral,
}

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Dyson index: 1, 2 or 4.
    #[arg(long, default_value_t = 2)]
    pub beta: u32,
    /// Matrix size (ignored for chiral).
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    /// Chiral block sizes, p >= q >= 1.
    #[arg(long, default_value_t = 0)]
    pub p: usize,
    #[arg(long, default_value_t = 0)]
    pub q: usize,
    /// Scale: semicircle radius 2v for Gaussian ensembles.
    #[arg(long, default_value_t = 1.0)]
    pub v: f64,
    #[arg(long, default_value_t = 1)]
    pub draws: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// Nearest-neighbour spacing density.
    Ps,
    /// Number variance.
    Sigma2,
    /// Spectral rigidity.
    Delta3,
    /// Two-level cluster function.
    Y2,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum UnfoldArg {
    /// Polynomial fit of the staircase, lowering the degree until monotone.
    Poly,
    /// Local mean spacing over a moving window.
    Local,
    /// Known uniform density.
    Uniform,
    /// Semicircle distribution of radius 2v.
    Semicircle,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Surrogate {
    Poisson,
}

#[derive(Args, Debug, Serialize)]
pub struct StatsArgs {
    /// Spectra CSV as written by `sample`.
    #[arg(long = "in", conflicts_with = "surrogate")]
    pub input: Option<PathBuf>,
    /// Generate uncorrelated levels instead of reading --in.
    #[arg(long, value_enum)]
    pub surrogate: Option<Surrogate>,
    /// Surrogate levels per draw.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Surrogate draws.
    #[arg(long, default_value_t = 100)]
    pub draws: usize,
    #[arg(long, value_enum)]
    pub observable: Observable,
    /// Defaults to `poly` for input files and `uniform` (density 1) for surrogates.
    #[arg(long, value_enum)]
    pub unfold: Option<UnfoldArg>,
    #[arg(long, default_value_t = 7)]
    pub degree: usize,
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    /// Density for `--unfold uniform`; defaults to levels/(2 pi) for files.
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub v: f64,
    #[arg(long = "Lmax", default_value_t = 10.0)]
    pub l_max: f64,
    #[arg(long, default_value_t = 0.5)]
    pub dl: f64,
    /// Fixed spacing-histogram bin width; Freedman-Diaconis when absent.
    #[arg(long)]
    pub bin_width: Option<f64>,
    /// Upper end of the fixed spacing histogram.
    #[arg(long, default_value_t = 4.0)]
    pub smax: f64,
    #[arg(long, default_value_t = 3.0)]
    pub rmax: f64,
    #[arg(long, default_value_t = 0.1)]
    pub dr: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Text,
    Csv,
}

#[derive(Args, Debug, Serialize)]
pub struct ClassifyArgs {
    /// Cartan class label, e.g. AIII or DIII-even.
    #[arg(long, required_unless_present = "all", conflicts_with = "all")]
    pub class: Option<String>,
    #[arg(long)]
    pub all: bool,
    /// Size N for the classes that take one (default 2).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, requires = "q")]
    pub p: Option<usize>,
    #[arg(long, requires = "p")]
    pub q: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Quadrature of the closed-form beta = 2 density.
    Exact,
    /// Stochastic integration of the scaling equation.
    Sde,
    /// Products of random thin-slice transfer matrices.
    Slices,
}

#[derive(Args, Debug, Serialize)]
pub struct DmpkArgs {
    /// Number of channels.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub beta: u32,
    /// Lengths in units of the mean free path, comma separated, increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    pub s: Vec<f64>,
    #[arg(long, value_enum, default_value = "sde")]
    pub method: Method,
    /// Run a second method and report agreement within 3 combined stderr.
    #[arg(long, value_enum)]
    pub compare: Option<Method>,
    /// Walkers (sde) or wires (slices).
    #[arg(long, default_value_t = 10000)]
    pub walkers: usize,
    /// Largest SDE step; defaults to 1e-3 times the largest length.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Slice thickness for the transfer-matrix product.
    #[arg(long, default_value_t = 0.01)]
    pub delta_s: f64,
    #[arg(long, default_value_t = 12.0)]
    pub k_max_factor: f64,
    #[arg(long, default_value_t = 400)]
    pub k_nodes: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub enum FamilyArg {
    #[value(name = "A")]
    A,
    #[value(name = "B")]
    B,
    #[value(name = "C")]
    C,
    #[value(name = "D")]
    D,
    #[value(name = "BC")]
    BC,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub enum PotentialArg {
    /// 1/x^2
    #[value(name = "I")]
    I,
    /// 1/sinh^2 x
    #[value(name = "II")]
    II,
    /// 1/sin^2 x
    #[value(name = "III")]
    #[allow(clippy::upper_case_acronyms)]
    III,
}

#[derive(Args, Debug, Serialize)]
pub struct CsCheckArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 1)]
    pub rank: usize,
    #[arg(long, default_value_t = 0)]
    pub m_o: u32,
    #[arg(long, default_value_t = 0)]
    pub m_l: u32,
    #[arg(long, default_value_t = 0)]
    pub m_s: u32,
    #[arg(long, value_enum, default_value = "II")]
    pub potential: PotentialArg,
    /// Grid spacings, coarsest first, each dividing the previous.
    #[arg(long, value_delimiter = ',', default_value = "0.04,0.02,0.01")]
    pub h: Vec<f64>,
    /// Lower box corner; a box inside the chamber is chosen when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "hi")]
    pub lo: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "lo")]
    pub hi: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct LieFixturesArgs {
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}
