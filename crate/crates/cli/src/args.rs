use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "alignmarket",
    version,
    about = "Experiments on markets of imperfectly aligned AI advisors"
)]
pub struct Cli {
    /// Seed for every random choice the command makes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// State prior for persuasion instances: `uniform` or a file holding a
    /// JSON array or comma/whitespace separated probabilities.
    #[arg(long, global = true)]
    pub prior: Option<String>,

    /// How Alice reacts to a message.
    #[arg(long, global = true, value_enum, default_value_t = Receiver::BestResponse)]
    pub receiver: Receiver,

    /// Directory receiving all outputs.
    #[arg(long, global = true, default_value = "out")]
    #[serde(skip)]
    pub out: PathBuf,

    /// Encoding of tabular outputs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Receiver {
    Obedient,
    BestResponse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Best-AI selection game experiments.
    #[command(subcommand)]
    Game(GameCmd),
    /// Single-sender and oblivious multi-sender persuasion.
    #[command(subcommand)]
    Persuade(PersuadeCmd),
    /// Fit nonnegative or simplex weights of agents to a ground truth.
    Fit(FitArgs),
    /// Test error of fitted committees as the agent pool grows.
    Scaling(ScalingArgs),
    /// Generate a score matrix of noisy copies of a ground truth.
    GenAgents(GenAgentsArgs),
    /// Committee size that makes the average agent close to the target.
    Hoeffding(HoeffdingArgs),
    /// Monte Carlo check of the committee-size guarantee.
    ValidatePropA1(ValidateArgs),
    /// Straightforward conversations on a finite joint prior.
    #[command(subcommand)]
    Conversation(ConversationCmd),
    /// Utility guarantees for conversational Alice.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Embedded instances and priors.
    #[command(subcommand)]
    Fixtures(FixturesCmd),
}

#[derive(Debug, Args, Serialize)]
pub struct InstanceArgs {
    /// Fixture name or path to an instance JSON file.
    #[arg(long, default_value = "synthetic1")]
    pub instance: String,
}

#[derive(Debug, Args, Serialize)]
pub struct CommitteeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub instance: InstanceArgs,

    /// `all`, or a comma separated list of sender names or indices.
    #[arg(long, default_value = "all")]
    pub committee: String,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameCmd {
    /// Best-response dynamics from the monopoly schemes.
    Brd {
        #[command(flatten)]
        #[serde(flatten)]
        committee: CommitteeArgs,
        /// Round cap; defaults to four times schemes times members.
        #[arg(long)]
        max_rounds: Option<usize>,
    },
    /// All stable symmetric deterministic profiles.
    Enumerate {
        #[command(flatten)]
        #[serde(flatten)]
        committee: CommitteeArgs,
    },
    /// Misalignment score over equilibrium and first-best outcomes.
    Misalign {
        #[command(flatten)]
        #[serde(flatten)]
        committee: CommitteeArgs,
    },
    /// Random orders in which senders join the market.
    Paths {
        #[command(flatten)]
        #[serde(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 20)]
        paths: usize,
    },
    /// Equilibrium utility against the first-best minus twice the misalignment.
    Bound {
        #[command(flatten)]
        #[serde(flatten)]
        committee: CommitteeArgs,
        /// Evaluate every nonempty committee and emit figure data.
        #[arg(long)]
        sweep: bool,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PersuadeCmd {
    /// Sender-optimal obedient scheme from the persuasion LP.
    Optimal {
        #[command(flatten)]
        #[serde(flatten)]
        instance: InstanceArgs,
        /// Sender name or index.
        #[arg(long)]
        bob: String,
    },
    /// Sender-optimal deterministic scheme.
    Monopoly {
        #[command(flatten)]
        #[serde(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        bob: String,
    },
    /// Alice combining one independently chosen scheme per sender.
    Oblivious {
        #[command(flatten)]
        #[serde(flatten)]
        instance: InstanceArgs,
        /// JSON array with one `[state][message]` matrix per sender; defaults
        /// to each sender's LP-optimal scheme.
        #[arg(long)]
        schemes: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    Nnls,
    Simplex,
    Both,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    /// Score CSV: `item,truth,<agents…>`, optionally preceded by `#scale=<max>`.
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long, value_enum, default_value_t = FitMethod::Both)]
    pub method: FitMethod,
}

#[derive(Debug, Args, Serialize)]
pub struct ScalingArgs {
    #[arg(long)]
    pub scores: PathBuf,
    /// Comma separated committee sizes; defaults to 1,2,5,10,20,50,100 and the
    /// pool size, capped at the pool size.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub permutations: usize,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct GenAgentsArgs {
    /// Score CSV whose truth column is reused; a random truth is drawn otherwise.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Items in a random truth.
    #[arg(long, default_value_t = 500)]
    pub items: usize,
    #[arg(long, default_value_t = 100)]
    pub agents: usize,
    /// `uniform:<half width>` or `gaussian:<sigma>`.
    #[arg(long, default_value = "uniform:0.15")]
    pub noise: String,
}

#[derive(Debug, Args, Serialize)]
pub struct HoeffdingArgs {
    #[arg(long)]
    pub actions: usize,
    #[arg(long)]
    pub states: usize,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub delta: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 3)]
    pub actions: usize,
    #[arg(long, default_value_t = 3)]
    pub states: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// `bernoulli`, `uniform:<half width>` or `exact`.
    #[arg(long, default_value = "bernoulli")]
    pub model: String,
    /// Overrides the Hoeffding committee size.
    #[arg(long)]
    pub committee_size: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct JointArgs {
    /// Prior fixture name or path to a joint prior JSON file.
    #[arg(long, default_value = "corr222")]
    pub joint: String,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConversationCmd {
    /// One conversation and its belief path.
    Run {
        #[command(flatten)]
        #[serde(flatten)]
        joint: JointArgs,
        /// Alice's feature, by label or index.
        #[arg(long, default_value = "0")]
        xa: String,
        /// Bob's feature, by label or index.
        #[arg(long, default_value = "0")]
        xb: String,
        #[arg(long, default_value_t = 5)]
        rounds: usize,
    },
    /// Agreement round and final estimation error for every feature pair.
    Agreement {
        #[command(flatten)]
        #[serde(flatten)]
        joint: JointArgs,
        #[arg(long, default_value_t = 5)]
        rounds: usize,
        #[arg(long, default_value_t = 0.1)]
        zeta: f64,
    },
    /// Information-substitutes check over subset pairs.
    Substitutes {
        #[command(flatten)]
        #[serde(flatten)]
        joint: JointArgs,
        /// Draw this many subset pairs per action instead of enumerating.
        #[arg(long)]
        samples: Option<usize>,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsCmd {
    /// Quantal-response utility guarantee and its small-λ form.
    Thm49 {
        #[arg(long)]
        actions: usize,
        /// Conversation rounds; derived from `--zeta` when omitted.
        #[arg(long, required_unless_present = "zeta", conflicts_with = "zeta")]
        rounds: Option<f64>,
        /// Target agreement level, used to derive the rounds.
        #[arg(long)]
        zeta: Option<f64>,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixturesCmd {
    /// Names of embedded instances and joint priors.
    List,
    /// Write an embedded fixture as JSON.
    Dump { name: String },
}
