mod dialogue;
mod fixtures;
mod game;
mod hull;
mod persuade;

use std::fmt;
use std::path::Path;

use alignmarket::fixtures as instances;
use alignmarket::{load_instance, PersuasionInstance, ReceiverMode};
use anyhow::{Context, Result};

use crate::args::{Cli, Command, Receiver};
use crate::output::Output;

/// A flag value that parsed but makes no sense for the chosen input.
#[derive(Debug)]
pub struct UsageError {
    pub flag: &'static str,
    pub detail: String,
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid value for '--{}': {}", self.flag, self.detail)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(flag: &'static str, detail: impl Into<String>) -> anyhow::Error {
    UsageError {
        flag,
        detail: detail.into(),
    }
    .into()
}

/// Settings shared by every subcommand.
pub struct Ctx {
    pub seed: u64,
    pub prior: Option<String>,
    pub receiver: ReceiverMode,
    pub out: Output,
}

pub fn run(cli: Cli) -> Result<()> {
    let parameters = serde_json::to_value(&cli)?;
    let ctx = Ctx {
        seed: cli.seed,
        prior: cli.prior,
        receiver: match cli.receiver {
            Receiver::Obedient => ReceiverMode::Obedient,
            Receiver::BestResponse => ReceiverMode::PosteriorBestResponse,
        },
        out: Output::new(&cli.out, cli.format)?,
    };
    let (name, ctx) = match cli.command {
        Command::Game(cmd) => game::run(cmd, ctx)?,
        Command::Persuade(cmd) => persuade::run(cmd, ctx)?,
        Command::Fit(a) => hull::fit(a, ctx)?,
        Command::Scaling(a) => hull::scaling(a, ctx)?,
        Command::GenAgents(a) => hull::gen_agents(a, ctx)?,
        Command::Hoeffding(a) => hull::hoeffding(a, ctx)?,
        Command::ValidatePropA1(a) => hull::validate(a, ctx)?,
        Command::Conversation(cmd) => dialogue::conversation(cmd, ctx)?,
        Command::Bounds(cmd) => dialogue::bounds(cmd, ctx)?,
        Command::Fixtures(cmd) => fixtures::run(cmd, ctx)?,
    };
    ctx.out.finish(name, ctx.seed, parameters)
}

fn read_prior_vector(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading prior {}", path.display()))?;
    if let Ok(v) = serde_json::from_str::<Vec<f64>>(&text) {
        return Ok(v);
    }
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .with_context(|| format!("prior entry {t:?} is not a number"))
        })
        .collect()
}

/// Embedded fixture or instance file, with the `--prior` override applied.
pub fn instance(name: &str, prior: Option<&str>) -> Result<PersuasionInstance> {
    let inst = if instances::NAMES.contains(&name) {
        instances::by_name(name)?
    } else if Path::new(name).exists() {
        load_instance(name)?
    } else {
        return Err(usage(
            "instance",
            format!(
                "{name:?} is neither a fixture ({}) nor a file",
                instances::NAMES.join(", ")
            ),
        ));
    };
    Ok(match prior {
        None => inst,
        Some("uniform") => inst.with_uniform_prior(),
        Some(path) => inst.with_prior(read_prior_vector(Path::new(path))?)?,
    })
}

/// A sender given by name or index.
pub fn bob(inst: &PersuasionInstance, flag: &'static str, key: &str) -> Result<usize> {
    inst.bob_index(key)
        .or_else(|| key.parse::<usize>().ok().filter(|&i| i < inst.num_bobs()))
        .ok_or_else(|| usage(flag, format!("no sender {key:?}")))
}

pub fn committee(inst: &PersuasionInstance, spec: &str) -> Result<Vec<usize>> {
    if spec == "all" {
        return Ok((0..inst.num_bobs()).collect());
    }
    let mut members = spec
        .split(',')
        .map(|k| bob(inst, "committee", k.trim()))
        .collect::<Result<Vec<_>>>()?;
    members.sort_unstable();
    if members.windows(2).any(|w| w[0] == w[1]) {
        return Err(usage("committee", "a sender is listed twice"));
    }
    Ok(members)
}

/// Per-state actions of a deterministic scheme, e.g. `a0;a2;a1`.
pub fn scheme_label(inst: &PersuasionInstance, map: &[usize]) -> String {
    map.iter()
        .map(|&a| inst.actions()[a].as_str())
        .collect::<Vec<_>>()
        .join(";")
}

pub fn member_names(inst: &PersuasionInstance, members: &[usize]) -> String {
    members
        .iter()
        .map(|&j| inst.bobs()[j].name.as_str())
        .collect::<Vec<_>>()
        .join(";")
}
