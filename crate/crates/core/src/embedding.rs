//! Content-type embedding vectors and the vocabulary that houses them.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A d-dimensional embedding vector for one content type.
///
/// All components are finite; the dimension is fixed at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpinVector(Vec<f64>);

impl SpinVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyVector);
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteComponent("<vector>".into()));
        }
        Ok(SpinVector(components))
    }

    /// Zero vector of the given dimension, for accumulation.
    pub fn zeros(dim: usize) -> Self {
        SpinVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    /// Euclidean inner product.
    pub fn dot(&self, other: &SpinVector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a * b)
            .sum())
    }

    pub(crate) fn add_scaled(&mut self, other: &SpinVector, factor: f64) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += factor * b;
        }
    }

    pub(crate) fn set_component(&mut self, axis: usize, value: f64) -> Result<()> {
        if axis >= self.0.len() {
            return Err(Error::DimensionMismatch {
                expected: self.0.len(),
                got: axis + 1,
            });
        }
        if !value.is_finite() {
            return Err(Error::NonFiniteComponent("<component>".into()));
        }
        self.0[axis] = value;
        Ok(())
    }
}

/// Ordered mapping from content-type labels to embedding vectors.
///
/// Declaration order is significant: it is the tie-break precedence for
/// greedy selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentVocabulary {
    entries: Vec<(String, SpinVector)>,
    dimension: usize,
}

impl ContentVocabulary {
    pub fn entries(&self) -> &[(String, SpinVector)] {
        &self.entries
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, label: &str) -> Option<&SpinVector> {
        self.entries
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| v)
    }

    pub fn require(&self, label: &str) -> Result<&SpinVector> {
        self.get(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(l, _)| l.as_str())
    }

    /// Replaces one component of one entry's vector, leaving everything
    /// else untouched. Used by parameter sweeps.
    pub fn with_component(&self, label: &str, axis: usize, value: f64) -> Result<Self> {
        let mut out = self.clone();
        let entry = out
            .entries
            .iter_mut()
            .find(|(l, _)| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        entry.1.set_component(axis, value)?;
        Ok(out)
    }
}

/// Builds a vocabulary from (label, vector) pairs, preserving declaration
/// order.
pub fn build_vocabulary<L, C>(entries: Vec<(L, C)>) -> Result<ContentVocabulary>
where
    L: Into<String>,
    C: Into<Vec<f64>>,
{
    if entries.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let mut built: Vec<(String, SpinVector)> = Vec::with_capacity(entries.len());
    let mut dimension = 0usize;
    for (label, components) in entries {
        let label: String = label.into();
        if label.is_empty() {
            return Err(Error::EmptyLabel);
        }
        if built.iter().any(|(l, _)| *l == label) {
            return Err(Error::DuplicateLabel(label));
        }
        let components: Vec<f64> = components.into();
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteComponent(label));
        }
        let vector = SpinVector::new(components)?;
        if built.is_empty() {
            dimension = vector.dim();
        } else if vector.dim() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: vector.dim(),
            });
        }
        built.push((label, vector));
    }
    Ok(ContentVocabulary {
        entries: built,
        dimension,
    })
}

/// True iff the labelled vector is orthogonal (within `tol`) to every
/// vector in `against`.
pub fn check_perpendicular(
    vocab: &ContentVocabulary,
    label: &str,
    against: &[&str],
    tol: f64,
) -> Result<bool> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidTolerance(tol));
    }
    let subject = vocab.require(label)?;
    for other in against {
        let v = vocab.require(other)?;
        if subject.dot(v)?.abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}
