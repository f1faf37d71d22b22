//! Consensus baselines: majority-rule, greedy, strict, and unweighted
//! optimal consensus, plus majority-vote labels.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::AggregateError;
use crate::io::SentenceBundle;
use crate::labels::aggregate_labels;
use crate::structure::{aggregate_clusters, bundle_clusters, DEFAULT_TIE_TOLERANCE};
use crate::tree::{compatible, ClusterSet, LabeledSpanMap, Span};

/// GC threshold used when none is given.
pub const DEFAULT_GC_THRESHOLD: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConsensusMethod {
    /// Majority-rule: support strictly above one half.
    Mrc,
    /// Greedy: highest support first, kept when compatible.
    Gc,
    /// Strict: clusters every parser agrees on.
    Sc,
    /// Weighted optimum with all weights equal and no reweighting.
    CptamW,
}

impl fmt::Display for ConsensusMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConsensusMethod::Mrc => "mrc",
            ConsensusMethod::Gc => "gc",
            ConsensusMethod::Sc => "sc",
            ConsensusMethod::CptamW => "cptam-w",
        })
    }
}

impl FromStr for ConsensusMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mrc" => Ok(ConsensusMethod::Mrc),
            "gc" => Ok(ConsensusMethod::Gc),
            "sc" => Ok(ConsensusMethod::Sc),
            "cptam-w" | "cptam_w" => Ok(ConsensusMethod::CptamW),
            other => Err(format!("unknown consensus method {other:?}")),
        }
    }
}

fn support_counts(inputs: &[ClusterSet]) -> BTreeMap<Span, usize> {
    let mut counts = BTreeMap::new();
    for clusters in inputs {
        for span in clusters {
            *counts.entry(*span).or_insert(0) += 1;
        }
    }
    counts
}

/// Consensus over one cluster set per parser. `threshold` (a fraction of
/// parsers) is only used by [`ConsensusMethod::Gc`].
pub fn consensus_clusters(
    inputs: &[ClusterSet],
    method: ConsensusMethod,
    threshold: f64,
) -> ClusterSet {
    let p = inputs.len();
    let counts = support_counts(inputs);
    match method {
        ConsensusMethod::Mrc => counts
            .iter()
            .filter(|(_, &c)| 2 * c > p)
            .map(|(s, _)| *s)
            .collect(),
        ConsensusMethod::Sc => counts
            .iter()
            .filter(|(_, &c)| c == p)
            .map(|(s, _)| *s)
            .collect(),
        ConsensusMethod::Gc => {
            let mut order: Vec<(Span, usize)> = counts.into_iter().collect();
            // BTreeMap order is already leftmost-then-shortest; the stable
            // sort keeps it among equal counts.
            order.sort_by_key(|&(_, c)| std::cmp::Reverse(c));
            let mut kept: Vec<Span> = Vec::new();
            for (span, count) in order {
                if (count as f64) < threshold * p as f64 {
                    break;
                }
                if kept.iter().all(|k| compatible(*k, span)) {
                    kept.push(span);
                }
            }
            kept.into_iter().collect()
        }
        ConsensusMethod::CptamW => aggregate_clusters(inputs, &vec![1.0; p], DEFAULT_TIE_TOLERANCE)
            .expect("uniform weights are valid"),
    }
}

/// Consensus structure of a bundle; singleton clusters always included.
pub fn consensus(bundle: &SentenceBundle, method: ConsensusMethod, threshold: f64) -> ClusterSet {
    consensus_clusters(&bundle_clusters(bundle, true), method, threshold)
}

/// Most frequent label chain per cluster.
pub fn majority_vote_labels(
    agg: &ClusterSet,
    bundle: &SentenceBundle,
) -> Result<LabeledSpanMap, AggregateError> {
    aggregate_labels(agg, bundle, &vec![1.0; bundle.parser_count()])
}
