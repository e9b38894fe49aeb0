use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vacant_core::properties::P2Exponent;
use vacant_core::{Graph, WalkMode};

use crate::config::Provenance;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "vacant",
    version,
    about = "Vacant-set experiments for lazy random walks on regular graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Vacant-set census at multiples of t* = n ln d.
    Scan(ScanArgs),
    /// Exact expected returns R_v within the mixing time.
    Rv(RvArgs),
    /// Spectral gap and mixing time.
    Mixing(MixingArgs),
    /// Survival of the first-visit time against the geometric prediction.
    Firstvisit(FirstVisitArgs),
    /// Which vertex of a set is hit first after burn-in.
    Whichvertex(WhichVertexArgs),
    /// Set avoidance in H against vertex avoidance in the contraction.
    Contract(ContractArgs),
    /// Checks of the expansion properties P1-P4.
    Properties(PropertiesArgs),
    /// Gambler's ruin absorption probabilities.
    Ruin(RuinArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphChoice {
    Hypercube,
    RandomRegular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeChoice {
    Lazy,
    Speedy,
}

impl From<ModeChoice> for WalkMode {
    fn from(m: ModeChoice) -> Self {
        match m {
            ModeChoice::Lazy => WalkMode::Lazy,
            ModeChoice::Speedy => WalkMode::Speedy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExponentChoice {
    Fifth,
    Quarter,
}

impl From<ExponentChoice> for P2Exponent {
    fn from(e: ExponentChoice) -> Self {
        match e {
            ExponentChoice::Fifth => P2Exponent::Fifth,
            ExponentChoice::Quarter => P2Exponent::Quarter,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Graph family; defaults to random-regular when --n is given, else hypercube.
    #[arg(long, value_enum)]
    pub graph: Option<GraphChoice>,
    /// Dimension of the hypercube, or degree of the random regular graph.
    #[arg(long)]
    pub d: Option<usize>,
    /// Vertex count (random regular graphs).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// K in the burn-in length L = ceil(2 K T ln n).
    #[arg(long, default_value_t = 1.0)]
    pub k_const: f64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Worker threads; 0 or absent uses every core. Never changes output.
    #[arg(long)]
    pub parallel: Option<usize>,
    /// key=value file; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Common {
    /// Build the graph and record its parameters.
    pub fn graph(&self, default_d: usize, prov: &mut Provenance) -> Result<Graph, CliError> {
        let kind = self.graph.unwrap_or(if self.n.is_some() {
            GraphChoice::RandomRegular
        } else {
            GraphChoice::Hypercube
        });
        match kind {
            GraphChoice::Hypercube => {
                let d = self.d.unwrap_or(default_d);
                if let Some(n) = self.n {
                    if d >= 64 || n != 1usize << d {
                        return Err(CliError::Usage(format!(
                            "--n {n} disagrees with hypercube dimension {d}"
                        )));
                    }
                }
                prov.set("graph", "hypercube");
                prov.set("d", d);
                Ok(Graph::hypercube(d)?)
            }
            GraphChoice::RandomRegular => {
                let n = self
                    .n
                    .ok_or_else(|| CliError::Usage("random-regular needs --n".into()))?;
                let d = self.d.unwrap_or(3);
                prov.set("graph", "random-regular");
                prov.set("n", n);
                prov.set("d", d);
                prov.set("seed", self.seed);
                Ok(Graph::random_regular(n, d, self.seed)?)
            }
        }
    }

    pub fn eps(&self, default: f64) -> Result<f64, CliError> {
        let eps = self.eps.unwrap_or(default);
        if eps > 0.0 && eps < 1.0 {
            Ok(eps)
        } else {
            Err(CliError::Usage(format!(
                "--eps must lie in (0, 1), got {eps}"
            )))
        }
    }

    pub fn trials(&self, default: u64) -> Result<u64, CliError> {
        match self.trials.unwrap_or(default) {
            0 => Err(CliError::Usage("--trials must be positive".into())),
            t => Ok(t),
        }
    }
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated multiples of t*.
    #[arg(long, default_value = "0.2,0.4,0.6,0.8,1.0,1.2,1.4,1.6")]
    pub multipliers: String,
    #[arg(long, value_enum, default_value_t = ModeChoice::Speedy)]
    pub mode: ModeChoice,
    #[arg(long, default_value_t = 0)]
    pub start: u32,
    /// Clock value at which the U_0 window opens.
    #[arg(long, default_value_t = 0)]
    pub window_start: u64,
}

#[derive(Debug, Args)]
pub struct RvArgs {
    #[command(flatten)]
    pub common: Common,
    /// Vertex v (random regular graphs; hypercubes are vertex-transitive).
    #[arg(long, default_value_t = 0)]
    pub vertex: u32,
}

#[derive(Debug, Args)]
pub struct MixingArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FirstVisitArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 0)]
    pub start: u32,
    /// Vertex whose first visit is timed; defaults to the last vertex.
    #[arg(long)]
    pub target: Option<u32>,
    /// Last lazy step observed; defaults to L + 8n.
    #[arg(long)]
    pub tmax: Option<u64>,
    /// Also write the survival curve (t, survival, se) here.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WhichVertexArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "1,2")]
    pub members: String,
    #[arg(long, default_value_t = 0)]
    pub start: u32,
    /// Last lazy step at which a hit counts; defaults to L + 4n.
    #[arg(long)]
    pub horizon: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ContractArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 3)]
    pub set_size: usize,
    #[arg(long, default_value_t = 1)]
    pub instances: u64,
    /// Last step of the start-specific comparison.
    #[arg(long, default_value_t = 64)]
    pub t: u64,
    /// Window after the joint mixing time for the stationarized comparison;
    /// run only on graphs with at most 256 vertices.
    #[arg(long, default_value_t = 32)]
    pub window: u64,
}

#[derive(Debug, Args)]
pub struct PropertiesArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1.0)]
    pub rho1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub p1_constant: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rho2: f64,
    #[arg(long, value_enum, default_value_t = ExponentChoice::Fifth)]
    pub p2_exponent: ExponentChoice,
    /// Sources sampled for P3 on graphs too large for the exhaustive check.
    #[arg(long, default_value_t = 64)]
    pub p3_sources: u64,
    #[arg(long, default_value_t = 10_000)]
    pub p4_samples: u64,
}

#[derive(Debug, Args)]
pub struct RuinArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub ell: u32,
    /// Single start; all of 0..=ell when absent.
    #[arg(long)]
    pub j: Option<u32>,
}

pub fn parse_list<T: std::str::FromStr>(flag: &str, text: &str) -> Result<Vec<T>, CliError> {
    let items: Vec<&str> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(CliError::Usage(format!("--{flag} is empty")));
    }
    items
        .iter()
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Usage(format!("--{flag}: cannot parse {s:?}")))
        })
        .collect()
}
