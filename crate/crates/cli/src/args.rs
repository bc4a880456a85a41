use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use physkge::engine::{EmbeddingConfig, EnergySchedule, RepulsionMode};
use physkge::rdf::RDF_TYPE;

#[derive(Debug, Parser)]
#[command(name = "physkge", version, about = "Knowledge graph embeddings from a physical force model")]
pub struct Cli {
    /// Worker threads; 0 uses every available core. Results do not depend on it.
    #[arg(long, global = true, env = "PHYSKGE_THREADS", default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse N-Triples (plain or gzip) and write the binary graph cache.
    Ingest(IngestArgs),
    /// Compute embeddings for a graph.
    Embed(EmbedArgs),
    /// Score embeddings by type prediction and, given clusters, purity.
    Eval(EvalArgs),
    /// Write a synthetic university graph.
    Generate(GenerateArgs),
    /// Time the sweeps on synthetic graphs of growing size and fit a line.
    Scaling(ScalingArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// N-Triples files, merged with per-file blank node scopes.
    #[arg(long, short, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// Binary cache to write.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Also dump positive and negative pairs as `term<TAB>term<TAB>weight`.
    #[arg(long)]
    pub similarity: Option<PathBuf>,
    #[arg(long, default_value_t = 45)]
    pub k: usize,
    #[arg(long, default_value_t = 1.45557)]
    pub omega: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub counting: CountingArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CountingArgs {
    /// Leave `rdf:type` triples out of the co-occurrence counts.
    #[arg(long)]
    pub exclude_type_triples: bool,
    /// Predicate treated as `rdf:type`.
    #[arg(long, default_value = RDF_TYPE)]
    pub type_iri: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Repulsion {
    Coordinate,
    Norm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Schedule {
    Clamped,
    Strict,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// N-Triples file(s) or a single binary cache.
    #[arg(long, short, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub dim: usize,
    #[arg(long, default_value_t = 45)]
    pub k: usize,
    #[arg(long, default_value_t = 0.0414)]
    pub delta_e: f64,
    #[arg(long, default_value_t = 1.45557)]
    pub omega: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Repulsion::Coordinate)]
    pub repulsion: Repulsion,
    #[arg(long, value_enum, default_value_t = Schedule::Clamped)]
    pub energy_schedule: Schedule,
    /// Skip the per-sweep objective (saves about one sweep of work each).
    #[arg(long)]
    pub no_objective: bool,
    /// Embedding TSV; the header goes to `<out>.header.json`.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Per-sweep JSON lines.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Refuse to start when the two position matrices need more bytes than
    /// this. Accepts K, M, G suffixes (powers of 1024).
    #[arg(long, env = "PHYSKGE_MEMORY_BUDGET", default_value = "8G", value_parser = parse_bytes)]
    pub memory_budget: u64,
    #[command(flatten)]
    pub counting: CountingArgs,
}

impl EmbedArgs {
    pub fn config(&self) -> EmbeddingConfig {
        EmbeddingConfig {
            dim: self.dim,
            k: self.k,
            max_iters: self.max_iters,
            epsilon: self.epsilon,
            delta_e: self.delta_e,
            omega: self.omega,
            seed: self.seed,
            repulsion: match self.repulsion {
                Repulsion::Coordinate => RepulsionMode::Coordinate,
                Repulsion::Norm => RepulsionMode::Norm,
            },
            energy_schedule: match self.energy_schedule {
                Schedule::Clamped => EnergySchedule::Clamped,
                Schedule::Strict => EnergySchedule::Strict,
            },
            track_objective: !self.no_objective,
            ..EmbeddingConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, short)]
    pub embeddings: PathBuf,
    /// The graph the embeddings were computed on.
    #[arg(long, short, required = true, num_args = 1..)]
    pub graph: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "1,3,5")]
    pub mu_list: Vec<usize>,
    /// Typed subjects to evaluate; all of them when the graph has fewer.
    #[arg(long, default_value_t = 100_000)]
    pub sample_size: usize,
    /// Cluster assignment TSV (`term<TAB>label`, negative label = noise).
    #[arg(long, conflicts_with = "kmeans")]
    pub clusters: Option<PathBuf>,
    /// Cluster the sample with k-means into this many clusters instead.
    #[arg(long)]
    pub kmeans: Option<usize>,
    /// Where to write the k-means assignment.
    #[arg(long, requires = "kmeans")]
    pub clusters_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = RDF_TYPE)]
    pub type_iri: String,
    /// JSON report; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Number of universities, about 4600 triples each.
    #[arg(long)]
    pub scale: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 14)]
    pub classes: usize,
    /// Output path; `.gz` compresses.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[arg(long, value_delimiter = ',', default_value = "11,22,44,88")]
    pub scales: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "5,10,20")]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = 25)]
    pub dim: usize,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON report; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

pub fn parse_bytes(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let (digits, shift) = match s.chars().last().map(|c| c.to_ascii_uppercase()) {
        Some('K') => (&s[..s.len() - 1], 10),
        Some('M') => (&s[..s.len() - 1], 20),
        Some('G') => (&s[..s.len() - 1], 30),
        Some('T') => (&s[..s.len() - 1], 40),
        _ => (s, 0),
    };
    let n: u64 = digits.trim().parse().map_err(|_| format!("invalid byte count `{s}`"))?;
    n.checked_mul(1 << shift).ok_or_else(|| format!("byte count `{s}` overflows"))
}
