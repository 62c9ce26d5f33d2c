//! Scenario file handling, tabular exports, plot emission, and the
//! published-value reproduction verifier.

pub mod format;
pub mod plot;
pub mod reproduce;

use std::fs;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::attention::{ModelConfig, Projections, SquareMatrix, Trajectory};
use crate::embedding::build_vocabulary;
use crate::scenario::{parse_prompt, Scenario, SweepTable};
use crate::{Error, Result};
use format::format_sig;

/// On-disk scenario schema. Unknown fields are rejected, not ignored.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    dimension: usize,
    types: Vec<TypeEntry>,
    prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t_eff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    projections: Option<ProjectionsFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TypeEntry {
    label: String,
    vector: Vec<f64>,
}

/// d x d matrices in row-major order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProjectionsFile {
    query: Vec<f64>,
    key: Vec<f64>,
    value: Vec<f64>,
}

pub const DEFAULT_T_EFF: f64 = 1.0;
pub const DEFAULT_MAX_STEPS: usize = 50;

/// Loads and fully validates a scenario file. Optional fields take the
/// documented defaults (t_eff = 1.0, identity projections, max_steps = 50).
pub fn load_scenario_file(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path)?;
    let file: ScenarioFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    scenario_from_file(file, path)
}

fn scenario_from_file(file: ScenarioFile, path: &Path) -> Result<Scenario> {
    for entry in &file.types {
        if entry.vector.len() != file.dimension {
            return Err(Error::Validation(format!(
                "vector for `{}` has {} components, expected dimension {}",
                entry.label,
                entry.vector.len(),
                file.dimension
            )));
        }
    }
    let vocab = build_vocabulary(
        file.types
            .iter()
            .map(|e| (e.label.clone(), e.vector.clone()))
            .collect(),
    )?;
    let t_eff = file.t_eff.unwrap_or(DEFAULT_T_EFF);
    if !(t_eff > 0.0 && t_eff.is_finite()) {
        return Err(Error::Validation("t_eff must be positive".into()));
    }
    let max_steps = file.max_steps.unwrap_or(DEFAULT_MAX_STEPS);
    let mut config = ModelConfig::new(t_eff, max_steps)?;
    if let Some(p) = file.projections {
        let d = file.dimension;
        config = config.with_projections(Projections {
            query: SquareMatrix::new(d, p.query)?,
            key: SquareMatrix::new(d, p.key)?,
            value: SquareMatrix::new(d, p.value)?,
        });
    }
    let prompt = parse_prompt(&file.prompt, &vocab)?;
    let name = file.name.unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".into())
    });
    let scenario = Scenario {
        name,
        vocab,
        prompt,
        config,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Writes a scenario in the on-disk schema; load_scenario_file of the
/// result equals the original fieldwise.
pub fn save_scenario_file(scenario: &Scenario, path: &Path) -> Result<()> {
    let file = ScenarioFile {
        name: Some(scenario.name.clone()),
        dimension: scenario.vocab.dimension(),
        types: scenario
            .vocab
            .entries()
            .iter()
            .map(|(label, vector)| TypeEntry {
                label: label.clone(),
                vector: vector.components().to_vec(),
            })
            .collect(),
        prompt: encode_prompt(&scenario.prompt),
        t_eff: Some(scenario.config.t_eff),
        max_steps: Some(scenario.config.max_steps),
        projections: scenario.config.projections.as_ref().map(|p| ProjectionsFile {
            query: p.query.rows().to_vec(),
            key: p.key.rows().to_vec(),
            value: p.value.rows().to_vec(),
        }),
    };
    let json = serde_json::to_string_pretty(&file).expect("scenario serializes");
    fs::write(path, json + "\n")?;
    Ok(())
}

fn encode_prompt(prompt: &[String]) -> String {
    if prompt.iter().all(|l| l.chars().count() == 1) {
        prompt.concat()
    } else {
        prompt.join(",")
    }
}

/// Renders a trajectory as CSV: position, query, context components,
/// projection per vocabulary label, emitted label. LF endings, nine
/// significant digits.
pub fn render_trajectory_csv(trajectory: &Trajectory) -> String {
    let mut header = vec!["position".to_string(), "query".to_string()];
    let (dim, labels): (usize, Vec<String>) = match trajectory.records.first() {
        Some(first) => (
            first.context.dim(),
            first
                .projections_onto
                .iter()
                .map(|(l, _)| l.clone())
                .collect(),
        ),
        None => (0, Vec::new()),
    };
    for axis in 0..dim {
        header.push(format!("context_{axis}"));
    }
    for label in &labels {
        header.push(format!("proj_{label}"));
    }
    header.push("emitted".to_string());

    let mut out = header.join(",");
    out.push('\n');
    for record in &trajectory.records {
        let mut fields = vec![record.position.to_string(), record.query_label.clone()];
        for &c in record.context.components() {
            fields.push(format_sig(c, 9));
        }
        for (_, p) in &record.projections_onto {
            fields.push(format_sig(*p, 9));
        }
        fields.push(record.emitted.clone());
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn export_trajectory(trajectory: &Trajectory, path: &Path) -> Result<()> {
    fs::write(path, render_trajectory_csv(trajectory))?;
    Ok(())
}

/// Renders a sweep table as CSV: value, benign flip, harmful flip,
/// emitted-sequence summary. Absent flips render as empty fields.
pub fn render_sweep_csv(table: &SweepTable) -> String {
    let mut out = String::from("value,benign_flip,harmful_flip,emitted_summary\n");
    for row in &table.rows {
        let benign = row
            .benign_flip
            .map(|p| p.to_string())
            .unwrap_or_default();
        let harmful = row
            .harmful_flip
            .map(|p| p.to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_sig(row.value, 9),
            benign,
            harmful,
            row.emitted_summary
        ));
    }
    out
}

pub fn export_sweep(table: &SweepTable, path: &Path) -> Result<()> {
    fs::write(path, render_sweep_csv(table))?;
    Ok(())
}

/// Everything needed to re-run an experiment bit-identically, plus
/// provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunArtifact {
    pub tool_version: String,
    pub timestamp: DateTime<Utc>,
    pub scenario: Scenario,
    pub payload: RunPayload,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunPayload {
    Trajectory(Trajectory),
    Sweep(SweepTable),
}

impl RunArtifact {
    pub fn new(scenario: Scenario, payload: RunPayload) -> Self {
        RunArtifact {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: Utc::now(),
            scenario,
            payload,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("artifact serializes");
        fs::write(path, json + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}
