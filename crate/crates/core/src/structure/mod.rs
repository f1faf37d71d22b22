//! Optimal weighted consensus of cluster sets.
//!
//! For fixed parser weights, the cluster set minimizing the weighted sum of
//! RF distances to the inputs keeps every cluster whose weighted support is
//! above half the total weight, drops everything below, and fills in a
//! maximum compatible subset of the clusters sitting at exactly one half.
//! Those half-support clusters form a bipartite incompatibility graph when
//! support is counted by tree membership, so the maximum subset comes from a
//! matching; the exact search in [`mis`] covers the remaining cases.

pub mod mis;

use std::cmp::Ordering;

use crate::error::{check_weights, AggregateError};
use crate::io::SentenceBundle;
use crate::tree::{compatible, ClusterSet, Span};

/// Default relative tolerance when comparing support to half the total.
pub const DEFAULT_TIE_TOLERANCE: f64 = 1e-9;

/// The union of input clusters for one sentence, with weighted support.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateClusters {
    /// Sorted by span.
    support: Vec<(Span, f64)>,
    total_weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportClass {
    /// Strictly more than half of the total weight.
    Majority,
    /// Exactly half, within tolerance.
    Tie,
    Minority,
}

impl CandidateClusters {
    pub fn support(&self, span: &Span) -> f64 {
        self.support
            .binary_search_by(|(s, _)| s.cmp(span))
            .map_or(0.0, |i| self.support[i].1)
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Span, &f64)> + '_ {
        self.support.iter().map(|(s, w)| (s, w))
    }

    pub fn spans(&self) -> impl Iterator<Item = Span> + '_ {
        self.support.iter().map(|(s, _)| *s)
    }

    pub fn classify(&self, support: f64, tolerance: f64) -> SupportClass {
        let half = 0.5 * self.total_weight;
        let diff = support - half;
        if diff.abs() <= tolerance * self.total_weight {
            SupportClass::Tie
        } else if diff > 0.0 {
            SupportClass::Majority
        } else {
            SupportClass::Minority
        }
    }

    /// Clusters with support strictly above half.
    pub fn majority(&self, tolerance: f64) -> ClusterSet {
        self.support
            .iter()
            .filter(|(_, s)| self.classify(*s, tolerance) == SupportClass::Majority)
            .map(|(span, _)| *span)
            .collect()
    }
}

/// Weighted support of every cluster in `inputs` (one cluster set per parser).
pub fn candidate_clusters(
    inputs: &[ClusterSet],
    weights: &[f64],
) -> Result<CandidateClusters, AggregateError> {
    let total_weight = check_weights(weights, inputs.len())?;
    // p-way merge of the sorted inputs; each span's weights are summed in
    // parser order.
    let sets: Vec<&[Span]> = inputs.iter().map(ClusterSet::as_slice).collect();
    let mut heads = vec![0usize; sets.len()];
    let mut support: Vec<(Span, f64)> =
        Vec::with_capacity(sets.iter().map(|s| s.len()).max().unwrap_or(0));
    loop {
        let next = sets
            .iter()
            .zip(&heads)
            .filter_map(|(s, &h)| s.get(h))
            .min()
            .copied();
        let Some(span) = next else { break };
        let mut total = 0.0;
        for ((set, head), &w) in sets.iter().zip(heads.iter_mut()).zip(weights) {
            if set.get(*head) == Some(&span) {
                total += w;
                *head += 1;
            }
        }
        support.push((span, total));
    }
    Ok(CandidateClusters {
        support,
        total_weight,
    })
}

pub fn bundle_clusters(bundle: &SentenceBundle, include_preterminals: bool) -> Vec<ClusterSet> {
    bundle
        .trees
        .iter()
        .map(|t| t.clusters(include_preterminals))
        .collect()
}

/// Half-support clusters that are compatible with everything in `kept`.
pub fn exact_tie_set(cands: &CandidateClusters, kept: &ClusterSet, tolerance: f64) -> Vec<Span> {
    cands
        .iter()
        .filter(|(_, &s)| cands.classify(s, tolerance) == SupportClass::Tie)
        .map(|(span, _)| *span)
        .filter(|span| !kept.contains(span) && kept.iter().all(|k| compatible(*k, *span)))
        .collect()
}

/// Graph over clusters with an edge between every incompatible pair.
#[derive(Debug, Clone, PartialEq)]
pub struct IncompatibilityGraph {
    nodes: Vec<Span>,
    support: Vec<f64>,
    adj: Vec<Vec<usize>>,
}

impl IncompatibilityGraph {
    pub fn new(nodes: Vec<Span>, support: Vec<f64>) -> Self {
        assert_eq!(nodes.len(), support.len());
        let mut adj = vec![Vec::new(); nodes.len()];
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                if !compatible(nodes[i], nodes[j]) {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        IncompatibilityGraph {
            nodes,
            support,
            adj,
        }
    }

    pub fn from_candidates(spans: Vec<Span>, cands: &CandidateClusters) -> Self {
        let support = spans.iter().map(|s| cands.support(s)).collect();
        Self::new(spans, support)
    }

    pub fn nodes(&self) -> &[Span] {
        &self.nodes
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adj
    }

    pub fn edges(&self) -> Vec<(Span, Span)> {
        let mut out = Vec::new();
        for (i, ns) in self.adj.iter().enumerate() {
            for &j in ns {
                if i < j {
                    out.push((self.nodes[i], self.nodes[j]));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_bipartite(&self) -> bool {
        mis::is_bipartite(&self.adj)
    }

    /// Node indices ordered by preference: higher support, then leftmost,
    /// then shortest.
    fn preference(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by(|&a, &b| {
            self.support[b]
                .partial_cmp(&self.support[a])
                .unwrap_or(Ordering::Equal)
                .then(self.nodes[a].start.cmp(&self.nodes[b].start))
                .then(self.nodes[a].end.cmp(&self.nodes[b].end))
        });
        order
    }
}

/// A maximum set of pairwise-compatible nodes, deterministic under the
/// support/leftmost/shortest preference order. Returned sorted by span.
pub fn max_independent_set(g: &IncompatibilityGraph) -> Vec<Span> {
    if g.edge_count() == 0 {
        return g.nodes.clone();
    }
    let mut out: Vec<Span> = mis::maximum_independent_set(&g.adj, &g.preference())
        .into_iter()
        .map(|i| g.nodes[i])
        .collect();
    out.sort();
    out
}

/// The weighted-RF-optimal cluster set for one sentence, given each
/// parser's clusters and weights.
pub fn aggregate_clusters(
    inputs: &[ClusterSet],
    weights: &[f64],
    tolerance: f64,
) -> Result<ClusterSet, AggregateError> {
    let cands = candidate_clusters(inputs, weights)?;
    let mut kept = cands.majority(tolerance);
    let ties = exact_tie_set(&cands, &kept, tolerance);
    if !ties.is_empty() {
        let graph = IncompatibilityGraph::from_candidates(ties, &cands);
        kept.extend(max_independent_set(&graph));
    }
    Ok(kept)
}

pub fn aggregate_structure(
    bundle: &SentenceBundle,
    weights: &[f64],
    include_preterminals: bool,
    tolerance: f64,
) -> Result<ClusterSet, AggregateError> {
    aggregate_clusters(
        &bundle_clusters(bundle, include_preterminals),
        weights,
        tolerance,
    )
}
