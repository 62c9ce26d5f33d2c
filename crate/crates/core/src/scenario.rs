//! Symbolic prompt parsing, the built-in reference scenario, and
//! parameter sweeps.

use serde::{Deserialize, Serialize};

use crate::attention::{run_trajectory, ModelConfig, Trajectory};
use crate::embedding::{build_vocabulary, ContentVocabulary};
use crate::tipping::detect_flips;
use crate::{Error, Result};

/// A complete, runnable experiment definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub vocab: ContentVocabulary,
    pub prompt: Vec<String>,
    pub config: ModelConfig,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        for label in &self.prompt {
            self.vocab.require(label)?;
        }
        if self.prompt.is_empty() {
            return Err(Error::EmptyPrompt);
        }
        Ok(())
    }

    pub fn run(&self) -> Result<Trajectory> {
        run_trajectory(&self.prompt, &self.vocab, &self.config)
    }
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SweepTarget {
    /// The softmax effective temperature.
    TEff,
    /// One axis of one label's embedding vector.
    VectorComponent { label: String, axis: usize },
    /// Prompt length m: the prompt becomes m copies of label A.
    PromptACount,
}

impl SweepTarget {
    /// Parses a parameter path: `t_eff`, `m`, or `vector:<label>:<axis>`.
    pub fn parse(path: &str) -> Result<Self> {
        match path {
            "t_eff" => Ok(SweepTarget::TEff),
            "m" => Ok(SweepTarget::PromptACount),
            other => {
                let parts: Vec<&str> = other.split(':').collect();
                if parts.len() == 3 && parts[0] == "vector" && !parts[1].is_empty() {
                    let axis = parts[2]
                        .parse::<usize>()
                        .map_err(|_| Error::InvalidParameterPath(other.to_string()))?;
                    Ok(SweepTarget::VectorComponent {
                        label: parts[1].to_string(),
                        axis,
                    })
                } else {
                    Err(Error::InvalidParameterPath(other.to_string()))
                }
            }
        }
    }
}

/// A sweep over one parameter, sampled at the listed values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub target: SweepTarget,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn new(target: SweepTarget, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySweepValues);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("sweep values must be finite".into()));
        }
        Ok(SweepSpec { target, values })
    }
}

/// One sweep sample: the parameter value, the first benign (A to B) and
/// harmful (to D) flip positions, and a run-length summary of the emitted
/// sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub harmful_flip: Option<usize>,
    pub benign_flip: Option<usize>,
    pub emitted_summary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub parameter: SweepTarget,
    pub rows: Vec<SweepRow>,
}

/// Parses a symbolic prompt: single characters by default, or
/// comma-delimited tokens for multi-character labels.
pub fn parse_prompt(symbols: &str, vocab: &ContentVocabulary) -> Result<Vec<String>> {
    if symbols.is_empty() {
        return Err(Error::EmptyPrompt);
    }
    let tokens: Vec<String> = if symbols.contains(',') {
        symbols.split(',').map(|t| t.trim().to_string()).collect()
    } else {
        symbols.chars().map(|c| c.to_string()).collect()
    };
    for (idx, token) in tokens.iter().enumerate() {
        if vocab.get(token).is_none() {
            return Err(Error::UnknownSymbol {
                symbol: token.clone(),
                position: idx + 1,
            });
        }
    }
    Ok(tokens)
}

/// The built-in four-type legal-brief scenario: prompt ACCA, t_eff = 1,
/// identity projections, 12 generated tokens.
pub fn paper_scenario() -> Scenario {
    let vocab = build_vocabulary(vec![
        ("A", vec![0.4, -0.3, 0.0]),
        ("B", vec![0.8, 0.0, 0.0]),
        ("C", vec![-0.2, -0.2, 0.0]),
        ("D", vec![0.9, 0.5, 0.0]),
    ])
    .expect("static vocabulary is valid");
    let prompt = parse_prompt("ACCA", &vocab).expect("static prompt is valid");
    Scenario {
        name: "legal-brief".into(),
        vocab,
        prompt,
        config: ModelConfig::new(1.0, 12).expect("static config is valid"),
    }
}

fn run_length_summary(emitted: &[&str]) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut iter = emitted.iter();
    if let Some(&first) = iter.next() {
        let mut current = first;
        let mut count = 1usize;
        for &label in iter {
            if label == current {
                count += 1;
            } else {
                parts.push(format!("{current}*{count}"));
                current = label;
                count = 1;
            }
        }
        parts.push(format!("{current}*{count}"));
    }
    parts.join(" ")
}

fn apply_target(base: &Scenario, target: &SweepTarget, value: f64) -> Result<Scenario> {
    let mut scenario = base.clone();
    match target {
        SweepTarget::TEff => {
            if value.is_nan() || value <= 0.0 {
                return Err(Error::InvalidSweepValue {
                    param: "t_eff".into(),
                    value,
                    reason: "must be positive".into(),
                });
            }
            scenario.config.t_eff = value;
        }
        SweepTarget::VectorComponent { label, axis } => {
            scenario.vocab = scenario.vocab.with_component(label, *axis, value)?;
        }
        SweepTarget::PromptACount => {
            if value.fract() != 0.0 || value < 1.0 {
                return Err(Error::InvalidSweepValue {
                    param: "m".into(),
                    value,
                    reason: "must be a positive integer".into(),
                });
            }
            scenario.vocab.require("A")?;
            scenario.prompt = vec!["A".to_string(); value as usize];
        }
    }
    scenario.validate()?;
    Ok(scenario)
}

fn evaluate_row(base: &Scenario, target: &SweepTarget, value: f64) -> Result<SweepRow> {
    let scenario = apply_target(base, target, value)?;
    let trajectory = scenario.run()?;
    let flips = detect_flips(&trajectory)?;
    let benign_flip = flips
        .iter()
        .find(|f| f.from_label == "A" && f.to_label == "B")
        .map(|f| f.position);
    let harmful_flip = flips
        .iter()
        .find(|f| f.to_label == "D")
        .map(|f| f.position);
    Ok(SweepRow {
        value,
        harmful_flip,
        benign_flip,
        emitted_summary: run_length_summary(&trajectory.emitted()),
    })
}

/// Sequential sweep runner.
pub fn run_sweep_seq(base: &Scenario, spec: &SweepSpec) -> Result<SweepTable> {
    if spec.values.is_empty() {
        return Err(Error::EmptySweepValues);
    }
    let rows = spec
        .values
        .iter()
        .map(|&v| evaluate_row(base, &spec.target, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        parameter: spec.target.clone(),
        rows,
    })
}

/// Sweep runner; rows are evaluated in parallel when the `parallel`
/// feature is enabled, and the table is assembled in spec order either
/// way.
pub fn run_sweep(base: &Scenario, spec: &SweepSpec) -> Result<SweepTable> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if spec.values.is_empty() {
            return Err(Error::EmptySweepValues);
        }
        let rows = spec
            .values
            .par_iter()
            .map(|&v| evaluate_row(base, &spec.target, v))
            .collect::<Result<Vec<_>>>()?;
        Ok(SweepTable {
            parameter: spec.target.clone(),
            rows,
        })
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_sweep_seq(base, spec)
    }
}
