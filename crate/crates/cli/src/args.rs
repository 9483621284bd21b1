use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cohq", version, about = "Coherent, private and Holevo information from the command line")]
pub struct Cli {
    /// Output format. CSV is available for sweeps and trial suites.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the artifact here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropies of a state and, given a factorization, of its marginals.
    Entropy(EntropyArgs),
    /// Coherent information of an input state through a channel.
    CoherentInfo(ChannelStateArgs),
    /// Private information lower bound by searching decompositions.
    PrivateInfo(PrivateArgs),
    /// Lower bound on the regularized coherent or private information.
    Capacity(CapacityArgs),
    /// Typical-subspace checks.
    Typicality {
        #[command(subcommand)]
        action: TypicalityCommand,
    },
    /// Seeded trial suites for the entropy inequalities and operator lemmas.
    VerifyLemmas(LemmaArgs),
    /// Seed sweeps over exact small-blocklength random codes.
    Simulate {
        #[command(subcommand)]
        kind: SimulateCommand,
    },
    /// Built-in worked examples.
    Example {
        #[command(subcommand)]
        which: ExampleCommand,
    },
}

/// `--channel` takes a JSON file or an example name (`appendix-c`,
/// `depolarizing(d)`, `identity(d)`).
#[derive(Debug, Args)]
pub struct ChannelArg {
    #[arg(long)]
    pub channel: String,
}

/// `--state` takes a JSON file, `mixed(d)`, `diag(p1,p2,...)` or
/// `uniform(d;i,j,...)` (normalized projector onto the listed basis states).
#[derive(Debug, Args)]
pub struct ChannelStateArgs {
    #[command(flatten)]
    pub channel: ChannelArg,
    #[arg(long)]
    pub state: String,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[arg(long)]
    pub state: String,
    /// Factor dimensions, e.g. `2,2`.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Factor labels, e.g. `A,B`; defaults to A, B, C, ...
    #[arg(long, value_delimiter = ',')]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_iterations: usize,
}

#[derive(Debug, Args)]
pub struct PrivateArgs {
    #[command(flatten)]
    pub input: ChannelStateArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Decomposition size (default d²).
    #[arg(long)]
    pub elements: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Coherent,
    Private,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub channel: ChannelArg,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Coherent)]
    pub objective: ObjectiveArg,
    #[arg(long, default_value_t = 1)]
    pub l: usize,
    #[command(flatten)]
    pub search: SearchArgs,
}

/// Either a wiretap file, or a channel with an input state whose
/// eigendecomposition supplies the alphabet.
#[derive(Debug, Args)]
pub struct SourceArgs {
    /// JSON with `probs` and either `bob`/`eve` state lists or
    /// `joint` states with `dim_q`, `dim_e`.
    #[arg(long, conflicts_with_all = ["channel", "state"])]
    pub wiretap: Option<String>,
    #[arg(long, requires = "state")]
    pub channel: Option<String>,
    #[arg(long, requires = "channel")]
    pub state: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum TypicalityCommand {
    /// Check the nine typicality properties at each n.
    Verify(TypicalityArgs),
}

#[derive(Debug, Args)]
pub struct TypicalityArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Blocklengths, e.g. `2,4,6`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub c_prime: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LemmaArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Trials for the operator Chernoff bound.
    #[arg(long, default_value_t = 2000)]
    pub chernoff_trials: usize,
    #[arg(long, default_value_t = 50)]
    pub mu: usize,
    #[arg(long, default_value_t = 0.3)]
    pub eta: f64,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Packing codes with the square-root decoder.
    Hsw(SimArgs),
    /// Covering codes on Eve's side.
    Covering(SimArgs),
    /// Private grid codes with expurgation.
    Private(SimArgs),
    /// Entanglement-generation codes (needs --channel and --state).
    Entgen(SimArgs),
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// Rows of the private grid.
    #[arg(long, default_value_t = 2)]
    pub kappa: usize,
    /// Columns of the private grid, or the covering code size.
    #[arg(long, default_value_t = 1)]
    pub mu: usize,
    /// Packing code size.
    #[arg(long, default_value_t = 2)]
    pub nu: usize,
    /// Number of seeds; seed i of the sweep is `--seed + i`.
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    /// Reject repeated codewords.
    #[arg(long)]
    pub distinct: bool,
    /// `measured`, `off`, or `fixed=EPS`.
    #[arg(long, default_value = "measured")]
    pub expurgation: String,
}

#[derive(Debug, Subcommand)]
pub enum ExampleCommand {
    /// The block channel that is noiseless on span{|1⟩,|2⟩} and fully
    /// depolarizing on span{|3⟩,|4⟩}.
    AppendixC(AppendixArgs),
}

#[derive(Debug, Args)]
pub struct AppendixArgs {
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Also search decompositions for the private information of π′₁₂.
    #[arg(long)]
    pub private: bool,
    #[command(flatten)]
    pub search: SearchArgs,
}
