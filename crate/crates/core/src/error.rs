use thiserror::Error;

use crate::tree::{Span, TreeError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggregateError {
    #[error("parser weights sum to zero")]
    ZeroTotalWeight,
    #[error("invalid weight {0} (weights must be finite and non-negative)")]
    InvalidWeight(f64),
    #[error("expected {expected} weights, got {found}")]
    WeightCount { expected: usize, found: usize },
    #[error("corpus has no sentences")]
    EmptyCorpus,
    #[error("aggregation needs at least 2 parsers, got {0}")]
    TooFewParsers(usize),
    #[error("no parser provides a label for cluster {0}")]
    Unlabeled(Span),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Checks a weight vector and returns its sum.
pub(crate) fn check_weights(weights: &[f64], expected: usize) -> Result<f64, AggregateError> {
    if weights.len() != expected {
        return Err(AggregateError::WeightCount {
            expected,
            found: weights.len(),
        });
    }
    if let Some(&w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(AggregateError::InvalidWeight(w));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(AggregateError::ZeroTotalWeight);
    }
    Ok(total)
}
