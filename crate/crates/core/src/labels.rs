//! Weighted label voting over an aggregated structure.

use std::collections::BTreeMap;

use crate::error::{check_weights, AggregateError};
use crate::io::SentenceBundle;
use crate::tree::{tree_from_clusters, ClusterSet, LabelChain, LabeledSpanMap, ParseTree, Token};

/// Relative tolerance for treating two vote totals as equal.
const VOTE_TOLERANCE: f64 = 1e-9;

/// Picks a label chain for every span of `agg` by weighted vote over the
/// parsers' label maps. A parser whose tree lacks a span does not vote on it.
///
/// Ties go to the chain backed by the heaviest single voter, then to the
/// lexicographically smallest chain.
pub fn vote_labels(
    agg: &ClusterSet,
    parser_labels: &[LabeledSpanMap],
    weights: &[f64],
) -> Result<LabeledSpanMap, AggregateError> {
    check_weights(weights, parser_labels.len())?;
    let mut out = LabeledSpanMap::new();
    for span in agg {
        // chain -> (total weight, heaviest voter)
        let mut tally: BTreeMap<&LabelChain, (f64, f64)> = BTreeMap::new();
        for (labels, &w) in parser_labels.iter().zip(weights) {
            if let Some(chain) = labels.get(span) {
                let entry = tally.entry(chain).or_insert((0.0, f64::NEG_INFINITY));
                entry.0 += w;
                entry.1 = entry.1.max(w);
            }
        }
        let top = tally
            .values()
            .map(|v| v.0)
            .fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Err(AggregateError::Unlabeled(*span));
        }
        let scale = top.abs().max(1.0);
        // BTreeMap iteration is lexicographic, so keeping the first strict
        // improvement leaves the smallest chain among equals.
        let mut best: Option<(&LabelChain, f64)> = None;
        for (chain, &(score, heaviest)) in &tally {
            if top - score > VOTE_TOLERANCE * scale {
                continue;
            }
            if best.is_none_or(|(_, h)| heaviest > h) {
                best = Some((chain, heaviest));
            }
        }
        out.insert(*span, best.unwrap().0.clone());
    }
    Ok(out)
}

pub fn aggregate_labels(
    agg: &ClusterSet,
    bundle: &SentenceBundle,
    label_weights: &[f64],
) -> Result<LabeledSpanMap, AggregateError> {
    let maps: Vec<LabeledSpanMap> = bundle.trees.iter().map(ParseTree::labeled_spans).collect();
    vote_labels(agg, &maps, label_weights)
}

/// Number of spans, per parser, where the parser voted and its chain differs
/// from the chosen one.
pub fn label_mismatches(chosen: &LabeledSpanMap, parser_labels: &[LabeledSpanMap]) -> Vec<u64> {
    parser_labels
        .iter()
        .map(|labels| {
            chosen
                .iter()
                .filter(|(span, chain)| labels.get(span).is_some_and(|c| c != *chain))
                .count() as u64
        })
        .collect()
}

pub fn finalize_tree(
    agg: &ClusterSet,
    labels: &LabeledSpanMap,
    tokens: &[Token],
) -> Result<ParseTree, AggregateError> {
    Ok(tree_from_clusters(agg, labels, tokens)?)
}
