//! Fitting Alice's utility inside the convex hull of agent utilities.
//!
//! Score matrices hold one row per item: the ground truth and every agent's
//! score, rescaled to `[0,1]`.

mod agents;
mod hoeffding;
mod scaling;

pub use agents::{generate_noisy_agents, NoiseModel, NoisyAgents};
pub use hoeffding::{
    hoeffding_committee_size, validate_alignment_probability, AgentModel, ValidationConfig, ValidationReport,
};
pub use scaling::{k_scaling_experiment, MetricStats, ScalingCurve, ScalingRecord};

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::instance::INPUT_TOL;

/// Items scored by a ground truth and a set of named agents.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    items: Vec<String>,
    truth: Vec<f64>,
    agents: Vec<String>,
    /// `design[item][agent]`.
    design: Vec<Vec<f64>>,
}

fn check_unit(v: f64, loc: impl Fn() -> String) -> Result<()> {
    if !(-INPUT_TOL..=1.0 + INPUT_TOL).contains(&v) {
        return Err(Error::Invariant(format!("{} = {v} is outside [0,1]", loc())));
    }
    Ok(())
}

impl ScoreMatrix {
    pub fn new(items: Vec<String>, truth: Vec<f64>, agents: Vec<String>, design: Vec<Vec<f64>>) -> Result<Self> {
        if items.len() != truth.len() || design.len() != truth.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} items, {} truth values, {} design rows",
                items.len(),
                truth.len(),
                design.len()
            )));
        }
        if agents.is_empty() {
            return Err(Error::DimensionMismatch("at least one agent column is required".into()));
        }
        for (i, row) in design.iter().enumerate() {
            if row.len() != agents.len() {
                return Err(Error::DimensionMismatch(format!(
                    "item {i} has {} agent scores, expected {}",
                    row.len(),
                    agents.len()
                )));
            }
            check_unit(truth[i], || format!("truth[{i}]"))?;
            for (a, &v) in row.iter().enumerate() {
                check_unit(v, || format!("{}[{i}]", agents[a]))?;
            }
        }
        Ok(Self {
            items,
            truth,
            agents,
            design,
        })
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn truth(&self) -> &[f64] {
        &self.truth
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn design(&self) -> &[Vec<f64>] {
        &self.design
    }

    pub fn num_items(&self) -> usize {
        self.truth.len()
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn column(&self, agent: usize) -> Vec<f64> {
        self.design.iter().map(|r| r[agent]).collect()
    }

    /// Parses the score CSV format: a `#scale=<max>` line, then a header
    /// `item,truth,<agent>...`. Every value is divided by the scale.
    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut reader = BufReader::new(reader);
        let mut first = String::new();
        reader.read_line(&mut first)?;
        let scale: f64 = first
            .trim()
            .strip_prefix("#scale=")
            .ok_or_else(|| Error::schema("line 1", "expected a `#scale=<max>` metadata line"))?
            .trim()
            .parse()
            .map_err(|e| Error::schema("line 1", format!("bad scale: {e}")))?;
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::schema("line 1", format!("scale must be positive, got {scale}")));
        }

        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = csv.headers()?.clone();
        if header.len() < 3 || &header[0] != "item" || &header[1] != "truth" {
            return Err(Error::schema("line 2", "header must be `item,truth,<agent>,...`"));
        }
        let agents: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
        let (mut items, mut truth, mut design) = (Vec::new(), Vec::new(), Vec::new());
        for (r, record) in csv.records().enumerate() {
            let record = record?;
            let line = r + 3;
            let parse = |c: usize| -> Result<f64> {
                record[c]
                    .parse::<f64>()
                    .map(|v| v / scale)
                    .map_err(|e| Error::schema(format!("line {line} column {}", c + 1), e.to_string()))
            };
            items.push(record[0].to_string());
            truth.push(parse(1)?);
            design.push((2..record.len()).map(parse).collect::<Result<Vec<_>>>()?);
        }
        Self::new(items, truth, agents, design)
    }

    pub fn to_csv_writer(&self, writer: impl Write) -> Result<()> {
        let mut writer = writer;
        writeln!(writer, "#scale=1")?;
        let mut csv = csv::Writer::from_writer(writer);
        let mut header = vec!["item".to_string(), "truth".to_string()];
        header.extend(self.agents.iter().cloned());
        csv.write_record(&header)?;
        for (i, row) in self.design.iter().enumerate() {
            let mut rec = vec![self.items[i].clone(), self.truth[i].to_string()];
            rec.extend(row.iter().map(f64::to_string));
            csv.write_record(&rec)?;
        }
        csv.flush()?;
        Ok(())
    }
}

pub fn load_scores(path: impl AsRef<Path>) -> Result<ScoreMatrix> {
    ScoreMatrix::from_csv_reader(std::fs::File::open(path)?)
}

pub fn save_scores(scores: &ScoreMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    scores.to_csv_writer(&mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}
