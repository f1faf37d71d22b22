//! Robinson-Foulds distance, the weighted structure objective, and
//! inter-parser agreement statistics.

use serde::{Deserialize, Serialize};

use crate::io::Corpus;
use crate::tree::ClusterSet;

/// Size of the symmetric difference of two cluster sets.
pub fn rf_distance(a: &ClusterSet, b: &ClusterSet) -> usize {
    a.symmetric_difference_len(b)
}

/// Per-parser distance totals `Σ_i RF(aggregated_i, tree_ik)`.
pub fn per_parser_rf(inputs: &[Vec<ClusterSet>], aggregated: &[ClusterSet]) -> Vec<u64> {
    let p = inputs.first().map_or(0, Vec::len);
    let mut totals = vec![0u64; p];
    for (sentence, agg) in inputs.iter().zip(aggregated) {
        for (k, clusters) in sentence.iter().enumerate() {
            totals[k] += rf_distance(agg, clusters) as u64;
        }
    }
    totals
}

/// `Σ_k w_k Σ_i RF(aggregated_i, tree_ik)` over precomputed cluster sets,
/// `inputs[i][k]` being parser k's clusters for sentence i.
pub fn weighted_objective_sets(
    inputs: &[Vec<ClusterSet>],
    aggregated: &[ClusterSet],
    weights: &[f64],
) -> f64 {
    weighted_sum(&per_parser_rf(inputs, aggregated), weights)
}

pub fn weighted_sum(totals: &[u64], weights: &[f64]) -> f64 {
    totals
        .iter()
        .zip(weights)
        .map(|(&d, &w)| w * d as f64)
        .sum()
}

/// Weighted RF objective of `aggregated` against the corpus trees.
pub fn weighted_objective(
    corpus: &Corpus,
    aggregated: &[ClusterSet],
    weights: &[f64],
    include_preterminals: bool,
) -> f64 {
    let inputs: Vec<Vec<ClusterSet>> = corpus
        .bundles
        .iter()
        .map(|b| {
            b.trees
                .iter()
                .map(|t| t.clusters(include_preterminals))
                .collect()
        })
        .collect();
    weighted_objective_sets(&inputs, aggregated, weights)
}

/// Share of sentences (in percent) on which all, some, or no parsers
/// produce the same unlabeled structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementStats {
    pub pct_all_agree: f64,
    pub pct_partial_agree: f64,
    pub pct_none_agree: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agreement {
    All,
    Partial,
    None,
}

pub fn classify_agreement(structures: &[ClusterSet]) -> Agreement {
    let p = structures.len();
    if structures.iter().all(|s| *s == structures[0]) {
        return Agreement::All;
    }
    for i in 0..p {
        for j in i + 1..p {
            if structures[i] == structures[j] {
                return Agreement::Partial;
            }
        }
    }
    Agreement::None
}

pub fn agreement_stats(corpus: &Corpus) -> AgreementStats {
    let n = corpus.len();
    if n == 0 {
        return AgreementStats {
            pct_all_agree: 0.0,
            pct_partial_agree: 0.0,
            pct_none_agree: 0.0,
        };
    }
    let (mut all, mut partial, mut none) = (0usize, 0usize, 0usize);
    for bundle in &corpus.bundles {
        let structures: Vec<ClusterSet> = bundle.trees.iter().map(|t| t.clusters(false)).collect();
        match classify_agreement(&structures) {
            Agreement::All => all += 1,
            Agreement::Partial => partial += 1,
            Agreement::None => none += 1,
        }
    }
    let pct = |c: usize| 100.0 * c as f64 / n as f64;
    AgreementStats {
        pct_all_agree: pct(all),
        pct_partial_agree: pct(partial),
        pct_none_agree: pct(none),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_bracketed;
    use crate::tree::Span;

    fn set(pairs: &[(usize, usize)]) -> ClusterSet {
        pairs.iter().map(|&(a, b)| Span::new(a, b)).collect()
    }

    fn corpus(rows: &[&[&str]]) -> Corpus {
        let p = rows[0].len();
        let per_parser = (0..p)
            .map(|k| {
                rows.iter()
                    .map(|r| parse_bracketed(r[k]).unwrap())
                    .collect()
            })
            .collect();
        Corpus::from_trees((0..p).map(|k| format!("p{k}")).collect(), per_parser, false).unwrap()
    }

    #[test]
    fn rf_examples() {
        let a = set(&[(0, 2), (0, 3)]);
        let b = set(&[(1, 3), (0, 3)]);
        assert_eq!(rf_distance(&a, &a), 0);
        assert_eq!(rf_distance(&a, &b), 2);
        assert_eq!(rf_distance(&ClusterSet::new(), &set(&[(0, 3)])), 1);
    }

    #[test]
    fn objective_examples() {
        let x = "(S (A a) (B b) (C c))";
        let y = "(S (X (A a) (B b)) (C c))";
        let c = corpus(&[&[y, x]]);
        let agg = vec![parse_bracketed(x).unwrap().clusters(true)];
        // parser 0 differs by [0,2), parser 1 matches
        assert_eq!(weighted_objective(&c, &agg, &[1.0, 1.0], true), 1.0);
        let two = corpus(&[&["(S (X (A a) (B b)) (C c))", "(S (A a) (Y (B b) (C c)))"]]);
        let agg = vec![set(&[(0, 3), (1, 3)]).with_singletons(3)];
        let tree1 = parse_bracketed("(S (X (A a) (B b)) (C c))")
            .unwrap()
            .clusters(true);
        assert_eq!(rf_distance(&agg[0], &tree1), 2);
        assert_eq!(weighted_objective(&two, &agg, &[1.0, 1.0], true), 2.0);
        assert_eq!(weighted_objective(&two, &agg, &[2.0, 2.0], true), 4.0);
        let unanimous = corpus(&[&[x, x, x]]);
        let agg = vec![parse_bracketed(x).unwrap().clusters(false)];
        assert_eq!(
            weighted_objective(&unanimous, &agg, &[0.3, 1.0, 5.0], false),
            0.0
        );
    }

    #[test]
    fn agreement_examples() {
        let t1 = "(S (X (A a) (B b)) (C c))";
        let t2 = "(S (A a) (X (B b) (C c)))";
        let t3 = "(S (A a) (B b) (C c))";
        let s = agreement_stats(&corpus(&[&[t1, t1, t1], &[t2, t2, t2]]));
        assert_eq!(
            (s.pct_all_agree, s.pct_partial_agree, s.pct_none_agree),
            (100.0, 0.0, 0.0)
        );
        let s = agreement_stats(&corpus(&[&[t1, t1, t1], &[t1, t2, t1]]));
        assert_eq!(
            (s.pct_all_agree, s.pct_partial_agree, s.pct_none_agree),
            (50.0, 50.0, 0.0)
        );
        let s = agreement_stats(&corpus(&[&[t1, t2, t3]]));
        assert_eq!(
            (s.pct_all_agree, s.pct_partial_agree, s.pct_none_agree),
            (0.0, 0.0, 100.0)
        );
    }

    #[test]
    fn agreement_ignores_labels() {
        let s = agreement_stats(&corpus(&[&["(S (X (A a) (B b)))", "(T (Y (C a) (D b)))"]]));
        assert_eq!(s.pct_all_agree, 100.0);
    }
}
