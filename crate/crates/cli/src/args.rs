use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dsm_core::analysis::OperatorKind;
use dsm_core::{GraphModel, Mode};

#[derive(Debug, Parser)]
#[command(name = "dsm", version, about = "Doubly stochastic graph diffusion toolkit")]
pub struct Cli {
    /// Node-count ceiling for dense O(n^3) paths. Falls back to
    /// DSM_ORACLE_CAP, then 2000.
    #[arg(long, global = true, value_name = "N")]
    pub oracle_cap: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a synthetic graph and write it as an edge list.
    Generate(GenerateArgs),
    /// Apply B_K or B̂_K to a feature matrix by streaming.
    Diffuse(DiffuseArgs),
    /// Truncation error, row sums and dominance over a list of K.
    Verify(VerifyArgs),
    /// Laplacian and DSM spectra with exact and empirical gaps.
    Spectrum(SpectrumArgs),
    /// Empirical spectral gap of B̂_K over a grid of K.
    GapCurve(GapCurveArgs),
    /// Dirichlet energy under repeated propagation.
    Energy(EnergyArgs),
    /// Mean operator entry by hop distance.
    Decay(DecayArgs),
    /// Rank agreement of approximate and exact diagonals.
    Rank(RankArgs),
    /// Rank agreement of the negated diagonal with betweenness.
    Centrality(CentralityArgs),
    /// Export centrality and spatial encodings as CSV.
    Encode(EncodeArgs),
    /// Time exact inversion against streaming propagation.
    Bench(BenchArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Diffuse(_) => "diffuse",
            Command::Verify(_) => "verify",
            Command::Spectrum(_) => "spectrum",
            Command::GapCurve(_) => "gap-curve",
            Command::Energy(_) => "energy",
            Command::Decay(_) => "decay",
            Command::Rank(_) => "rank",
            Command::Centrality(_) => "centrality",
            Command::Encode(_) => "encode",
            Command::Bench(_) => "bench",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Er,
    Ba,
    Ws,
    Sbm,
    Rgg,
}

/// Generator parameters shared by every command that can sample a graph.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelName>,
    #[arg(long)]
    pub n: Option<usize>,
    /// ER edge probability.
    #[arg(long)]
    pub p: Option<f64>,
    /// BA attachments per new node.
    #[arg(long)]
    pub m: Option<usize>,
    /// WS lattice degree (even).
    #[arg(long)]
    pub neighbors: Option<usize>,
    /// WS rewiring probability.
    #[arg(long)]
    pub beta: Option<f64>,
    /// SBM block sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub blocks: Option<Vec<usize>>,
    #[arg(long)]
    pub p_in: Option<f64>,
    #[arg(long)]
    pub p_out: Option<f64>,
    /// RGG connection radius.
    #[arg(long)]
    pub radius: Option<f64>,
}

/// Either `--graph FILE` or a generator description.
#[derive(Debug, Clone, Args)]
pub struct GraphSource {
    /// Edge-list file to read instead of generating.
    #[arg(long, value_name = "FILE", conflicts_with = "model")]
    pub graph: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiffuseArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, value_parser = parse_k, allow_negative_numbers = true)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "compensated")]
    pub mode: ModeArg,
    /// Feature CSV with one row per node. Gaussian features are drawn from
    /// the seed when omitted.
    #[arg(long, value_name = "FILE")]
    pub features: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    pub features_dim: usize,
    /// Split rows across threads; output is identical to the sequential run.
    #[arg(long)]
    pub parallel: bool,
    /// Also write the residual mass `P^{K+1} 1` here.
    #[arg(long, value_name = "FILE")]
    pub mass_out: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, value_delimiter = ',', value_parser = parse_k, allow_negative_numbers = true,
          default_value = "0,1,2,5,10,20,50")]
    pub k_list: Vec<usize>,
    /// Record wall-clock times. Timed reports are not reproducible.
    #[arg(long)]
    pub timing: bool,
    #[arg(long, default_value_t = 16)]
    pub features_dim: usize,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub source: GraphSource,
    /// Also estimate the empirical gap of B̂_K at this K.
    #[arg(long, value_parser = parse_k, allow_negative_numbers = true)]
    pub k: Option<usize>,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GapCurveArgs {
    #[command(flatten)]
    pub source: GraphSource,
    /// Defaults to 0,1,2,3,5,8,12,20,35,60,100.
    #[arg(long, value_delimiter = ',', value_parser = parse_k, allow_negative_numbers = true)]
    pub k_list: Option<Vec<usize>>,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub source: GraphSource,
    /// Operators to trace; all four when omitted.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub kind: Vec<KindArg>,
    #[arg(long, value_parser = parse_k, allow_negative_numbers = true, default_value = "1")]
    pub k: usize,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long, default_value_t = 16)]
    pub features_dim: usize,
    /// Seed for the initial features. Defaults to `--seed`.
    #[arg(long)]
    pub feature_seed: Option<u64>,
    /// Step at which the report records the plateau value.
    #[arg(long, default_value_t = 100)]
    pub plateau_step: usize,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Directory for per-operator `energy_<kind>.csv` files.
    #[arg(long, value_name = "DIR")]
    pub csv_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecayArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, value_enum, default_value = "truncated")]
    pub kind: KindArg,
    #[arg(long, value_parser = parse_k, allow_negative_numbers = true, default_value = "2")]
    pub k: usize,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, value_delimiter = ',', value_parser = parse_k, allow_negative_numbers = true,
          default_value = "1,2,3,5,10,20,50")]
    pub k_list: Vec<usize>,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CentralityArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, value_enum, default_value = "exact")]
    pub kind: KindArg,
    #[arg(long, value_parser = parse_k, allow_negative_numbers = true, default_value = "10")]
    pub k: usize,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, value_enum, default_value = "compensated")]
    pub kind: KindArg,
    #[arg(long, value_parser = parse_k, allow_negative_numbers = true, default_value = "0")]
    pub k: usize,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Node counts to time; `--n` is ignored.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_parser = parse_k, allow_negative_numbers = true,
          default_value = "10,20,40,80")]
    pub k_list: Vec<usize>,
    #[arg(long, default_value_t = 16)]
    pub features_dim: usize,
    /// Repetitions per cell; the minimum time is kept.
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Truncated,
    Compensated,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Truncated => Mode::Truncated,
            ModeArg::Compensated => Mode::Compensated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Exact,
    Truncated,
    Compensated,
    Gcn,
}

impl From<KindArg> for OperatorKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Exact => OperatorKind::Exact,
            KindArg::Truncated => OperatorKind::Truncated,
            KindArg::Compensated => OperatorKind::Compensated,
            KindArg::Gcn => OperatorKind::Gcn,
        }
    }
}

fn parse_k(s: &str) -> Result<usize, String> {
    let v: i64 = s.trim().parse().map_err(|_| format!("k must be an integer, got '{s}'"))?;
    usize::try_from(v).map_err(|_| "k must be ≥ 0".to_string())
}

impl ModelArgs {
    /// Builds the generator description, with `n_override` replacing `--n`.
    pub fn to_model(&self, n_override: Option<usize>) -> Result<GraphModel, String> {
        let model = self.model.ok_or("--model is required")?;
        let n = || n_override.or(self.n).ok_or("--n is required");
        let need = |v: Option<f64>, flag: &str| v.ok_or(format!("{flag} is required"));
        Ok(match model {
            ModelName::Er => GraphModel::Er { n: n()?, p: need(self.p, "--p")? },
            ModelName::Ba => GraphModel::Ba {
                n: n()?,
                m: self.m.ok_or("--m is required")?,
            },
            ModelName::Ws => GraphModel::Ws {
                n: n()?,
                k: self.neighbors.ok_or("--neighbors is required")?,
                beta: need(self.beta, "--beta")?,
            },
            ModelName::Sbm => {
                let mut sizes = self.blocks.clone().ok_or("--blocks is required")?;
                if let Some(n) = n_override {
                    // Same block count, sizes as even as possible.
                    let b = sizes.len().max(1);
                    sizes = (0..b).map(|i| n / b + usize::from(i < n % b)).collect();
                } else if let Some(n) = self.n {
                    if n != sizes.iter().sum::<usize>() {
                        return Err("--n must equal the sum of --blocks".into());
                    }
                }
                GraphModel::Sbm {
                    sizes,
                    p_in: need(self.p_in, "--p-in")?,
                    p_out: need(self.p_out, "--p-out")?,
                }
            }
            ModelName::Rgg => GraphModel::Rgg {
                n: n()?,
                radius: need(self.radius, "--radius")?,
            },
        })
    }
}
