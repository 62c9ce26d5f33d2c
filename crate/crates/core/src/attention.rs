//! The effective single attention head: scores, softmax weights at an
//! effective temperature, context vector, greedy selection, and trajectory
//! generation.
//!
//! Conventions:
//! - The query for producing token t+1 is the LAST history token z_t.
//! - Ties in greedy selection resolve to the earliest vocabulary
//!   declaration order.
//! - Decoding is greedy (zero decoding temperature); there is no sampling.

use serde::{Deserialize, Serialize};

use crate::embedding::{ContentVocabulary, SpinVector};
use crate::{Error, Result};

/// Square matrix in row-major storage, used for optional query/key/value
/// projections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix {
    dim: usize,
    rows: Vec<f64>,
}

impl SquareMatrix {
    pub fn new(dim: usize, rows: Vec<f64>) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: rows.len(),
            });
        }
        if rows.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteComponent("<projection matrix>".into()));
        }
        Ok(SquareMatrix { dim, rows })
    }

    pub fn identity(dim: usize) -> Self {
        let mut rows = vec![0.0; dim * dim];
        for i in 0..dim {
            rows[i * dim + i] = 1.0;
        }
        SquareMatrix { dim, rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    pub fn apply(&self, v: &SpinVector) -> Result<SpinVector> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.dim(),
            });
        }
        let mut out = vec![0.0; self.dim];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.rows[i * self.dim..(i + 1) * self.dim]
                .iter()
                .zip(v.components())
                .map(|(m, x)| m * x)
                .sum();
        }
        SpinVector::new(out)
    }
}

/// Optional query/key/value projection triple; identity when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projections {
    pub query: SquareMatrix,
    pub key: SquareMatrix,
    pub value: SquareMatrix,
}

/// Engine configuration. Tie-breaking is fixed to vocabulary declaration
/// order and is not configurable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub t_eff: f64,
    pub projections: Option<Projections>,
    pub max_steps: usize,
}

impl ModelConfig {
    pub fn new(t_eff: f64, max_steps: usize) -> Result<Self> {
        let cfg = ModelConfig {
            t_eff,
            projections: None,
            max_steps,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_projections(mut self, projections: Projections) -> Self {
        self.projections = Some(projections);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_eff > 0.0 && self.t_eff.is_finite()) {
            return Err(Error::InvalidTemperature(self.t_eff));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidStepLimit);
        }
        Ok(())
    }
}

/// One generation step: everything computed while producing the token at
/// `position` (1-based index into prompt + generated output).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub position: usize,
    pub query_label: String,
    pub weights: Vec<f64>,
    pub context: SpinVector,
    /// Dot product of each vocabulary vector with the context, in
    /// vocabulary declaration order.
    pub projections_onto: Vec<(String, f64)>,
    pub emitted: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    StepLimit,
}

/// Full deterministic generation run: prompt plus one record per generated
/// token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub prompt: Vec<String>,
    pub records: Vec<StepRecord>,
    pub terminated_by: Termination,
}

impl Trajectory {
    /// Emitted labels in generation order.
    pub fn emitted(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.emitted.as_str()).collect()
    }

    /// Prompt followed by emitted labels.
    pub fn full_sequence(&self) -> Vec<&str> {
        self.prompt
            .iter()
            .map(String::as_str)
            .chain(self.records.iter().map(|r| r.emitted.as_str()))
            .collect()
    }
}

/// Mutable generation state: history of labels plus borrowed vocabulary
/// and configuration. A value, not shared mutable state.
#[derive(Debug, Clone)]
pub struct GenerationState<'a> {
    history: Vec<String>,
    vocab: &'a ContentVocabulary,
    config: &'a ModelConfig,
}

impl<'a> GenerationState<'a> {
    pub fn new(
        prompt: &[String],
        vocab: &'a ContentVocabulary,
        config: &'a ModelConfig,
    ) -> Result<Self> {
        if prompt.is_empty() {
            return Err(Error::EmptyPrompt);
        }
        config.validate()?;
        for label in prompt {
            vocab.require(label)?;
        }
        Ok(GenerationState {
            history: prompt.to_vec(),
            vocab,
            config,
        })
    }

    pub fn history(&self) -> &[String] {
        &self.history
    }

    /// Produces the next token, appends it to the history, and returns the
    /// full step record.
    pub fn step(&mut self) -> Result<StepRecord> {
        let position = self.history.len() + 1;
        let query_label = self.history.last().expect("history nonempty").clone();
        let scores = attention_scores(&self.history, self.vocab, self.config)?;
        let weights = attention_weights(&scores, self.config.t_eff)?;
        let context = weighted_context(&self.history, &weights, self.vocab, self.config)?;
        let (emitted, projections_onto) = select_next(&context, self.vocab)?;
        self.history.push(emitted.clone());
        Ok(StepRecord {
            position,
            query_label,
            weights,
            context,
            projections_onto,
            emitted,
        })
    }
}

/// Attention scores s_{t,i} from the last history token (the query) to
/// every history token i = 1..t.
pub fn attention_scores(
    history: &[String],
    vocab: &ContentVocabulary,
    config: &ModelConfig,
) -> Result<Vec<f64>> {
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let query_raw = vocab.require(history.last().expect("nonempty"))?;
    let query = match &config.projections {
        Some(p) => p.query.apply(query_raw)?,
        None => query_raw.clone(),
    };
    let mut scores = Vec::with_capacity(history.len());
    for label in history {
        let key_raw = vocab.require(label)?;
        let key = match &config.projections {
            Some(p) => p.key.apply(key_raw)?,
            None => key_raw.clone(),
        };
        scores.push(query.dot(&key)?);
    }
    Ok(scores)
}

/// Softmax of scores/t_eff, computed with max-score subtraction.
pub fn attention_weights(scores: &[f64], t_eff: f64) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    if !(t_eff > 0.0 && t_eff.is_finite()) {
        return Err(Error::InvalidTemperature(t_eff));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFiniteScore);
    }
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| ((s - max) / t_eff).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

fn weighted_context(
    history: &[String],
    weights: &[f64],
    vocab: &ContentVocabulary,
    config: &ModelConfig,
) -> Result<SpinVector> {
    let mut context = SpinVector::zeros(vocab.dimension());
    for (label, &w) in history.iter().zip(weights) {
        let value_raw = vocab.require(label)?;
        let value = match &config.projections {
            Some(p) => p.value.apply(value_raw)?,
            None => value_raw.clone(),
        };
        context.add_scaled(&value, w);
    }
    Ok(context)
}

/// Context vector N(t): attention-weighted average of all history token
/// vectors, with the last token as query.
pub fn context_vector(
    history: &[String],
    vocab: &ContentVocabulary,
    config: &ModelConfig,
) -> Result<SpinVector> {
    let scores = attention_scores(history, vocab, config)?;
    let weights = attention_weights(&scores, config.t_eff)?;
    weighted_context(history, &weights, vocab, config)
}

/// Greedy selection: the vocabulary label with maximal projection onto the
/// context, ties resolved by declaration order. Also returns the full
/// projection mapping in declaration order.
pub fn select_next(
    context: &SpinVector,
    vocab: &ContentVocabulary,
) -> Result<(String, Vec<(String, f64)>)> {
    if context.dim() != vocab.dimension() {
        return Err(Error::DimensionMismatch {
            expected: vocab.dimension(),
            got: context.dim(),
        });
    }
    let mut projections = Vec::with_capacity(vocab.len());
    let mut best: Option<(usize, f64)> = None;
    for (idx, (label, vector)) in vocab.entries().iter().enumerate() {
        let p = vector.dot(context)?;
        projections.push((label.clone(), p));
        // strict inequality keeps the earliest declaration on ties
        match best {
            Some((_, best_p)) if p <= best_p => {}
            _ => best = Some((idx, p)),
        }
    }
    let (best_idx, _) = best.expect("vocabulary nonempty");
    Ok((vocab.entries()[best_idx].0.clone(), projections))
}

/// Runs greedy generation from the prompt until `config.max_steps` tokens
/// have been produced. Deterministic: identical inputs give identical
/// trajectories.
pub fn run_trajectory(
    prompt: &[String],
    vocab: &ContentVocabulary,
    config: &ModelConfig,
) -> Result<Trajectory> {
    let mut state = GenerationState::new(prompt, vocab, config)?;
    let mut records = Vec::with_capacity(config.max_steps);
    for _ in 0..config.max_steps {
        records.push(state.step()?);
    }
    Ok(Trajectory {
        prompt: prompt.to_vec(),
        records,
        terminated_by: Termination::StepLimit,
    })
}

#[cfg(test)]
pub(crate) fn labels(symbols: &[&str]) -> Vec<String> {
    symbols.iter().map(|s| s.to_string()).collect()
}
