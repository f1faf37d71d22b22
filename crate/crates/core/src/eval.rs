//! Scoring against gold trees.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::driver::ParserWeights;
use crate::io::Corpus;
use crate::rf::rf_distance;
use crate::tree::{ParseTree, Span};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("{pred} predicted trees for {gold} gold trees")]
    LengthMismatch { pred: usize, gold: usize },
    #[error("sentence {0}: predicted and gold tokens differ")]
    TokenizationMismatch(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub correct: u64,
    pub predicted: u64,
    pub gold: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rf_total: Option<u64>,
}

impl EvalReport {
    pub fn from_counts(correct: u64, predicted: u64, gold: u64, rf_total: Option<u64>) -> Self {
        let precision = if predicted == 0 {
            0.0
        } else {
            correct as f64 / predicted as f64
        };
        let recall = if gold == 0 {
            0.0
        } else {
            correct as f64 / gold as f64
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        EvalReport {
            precision,
            recall,
            f1,
            correct,
            predicted,
            gold,
            rf_total,
        }
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<10} {:>10}",
            "precision",
            format!("{:.4}", self.precision)
        )?;
        writeln!(f, "{:<10} {:>10}", "recall", format!("{:.4}", self.recall))?;
        writeln!(f, "{:<10} {:>10}", "f1", format!("{:.4}", self.f1))?;
        writeln!(f, "{:<10} {:>10}", "correct", self.correct)?;
        writeln!(f, "{:<10} {:>10}", "predicted", self.predicted)?;
        write!(f, "{:<10} {:>10}", "gold", self.gold)?;
        if let Some(rf) = self.rf_total {
            write!(f, "\n{:<10} {:>10}", "rf_total", rf)?;
        }
        Ok(())
    }
}

fn check_aligned(pred: &[ParseTree], gold: &[ParseTree]) -> Result<(), EvalError> {
    if pred.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            pred: pred.len(),
            gold: gold.len(),
        });
    }
    for (i, (p, g)) in pred.iter().zip(gold).enumerate() {
        if !p.token_texts().eq(g.token_texts()) {
            return Err(EvalError::TokenizationMismatch(i));
        }
    }
    Ok(())
}

/// `(span, label)` pairs for every node, preterminals included. Repeated
/// labels within one unary chain count once.
pub fn labeled_constituents(tree: &ParseTree) -> BTreeSet<(Span, String)> {
    tree.labeled_spans()
        .into_iter()
        .flat_map(|(span, chain)| chain.0.into_iter().map(move |l| (span, l)))
        .collect()
}

pub fn eval_labeled(pred: &[ParseTree], gold: &[ParseTree]) -> Result<EvalReport, EvalError> {
    check_aligned(pred, gold)?;
    let (mut correct, mut predicted, mut total_gold) = (0u64, 0u64, 0u64);
    for (p, g) in pred.iter().zip(gold) {
        let pc = labeled_constituents(p);
        let gc = labeled_constituents(g);
        correct += pc.intersection(&gc).count() as u64;
        predicted += pc.len() as u64;
        total_gold += gc.len() as u64;
    }
    Ok(EvalReport::from_counts(
        correct, predicted, total_gold, None,
    ))
}

/// Unlabeled bracket scores without preterminals, plus the summed RF distance.
pub fn eval_structure(pred: &[ParseTree], gold: &[ParseTree]) -> Result<EvalReport, EvalError> {
    check_aligned(pred, gold)?;
    let (mut correct, mut predicted, mut total_gold, mut rf) = (0u64, 0u64, 0u64, 0u64);
    for (p, g) in pred.iter().zip(gold) {
        let pc = p.clusters(false);
        let gc = g.clusters(false);
        correct += pc.intersection_len(&gc) as u64;
        predicted += pc.len() as u64;
        total_gold += gc.len() as u64;
        rf += rf_distance(&pc, &gc) as u64;
    }
    Ok(EvalReport::from_counts(
        correct,
        predicted,
        total_gold,
        Some(rf),
    ))
}

/// Share of spans present in both trees whose label chains agree.
pub fn label_accuracy(pred: &[ParseTree], gold: &[ParseTree]) -> Result<f64, EvalError> {
    check_aligned(pred, gold)?;
    let (mut same, mut shared) = (0u64, 0u64);
    for (p, g) in pred.iter().zip(gold) {
        let gl = g.labeled_spans();
        for (span, chain) in p.labeled_spans() {
            if let Some(gold_chain) = gl.get(&span) {
                shared += 1;
                if *gold_chain == chain {
                    same += 1;
                }
            }
        }
    }
    Ok(if shared == 0 {
        0.0
    } else {
        same as f64 / shared as f64
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParserReport {
    pub parser: String,
    pub labeled: EvalReport,
    pub structure: EvalReport,
    pub label_accuracy: f64,
}

/// Scores every parser of a corpus against aligned gold trees.
pub fn eval_corpus(corpus: &Corpus, gold: &[ParseTree]) -> Result<Vec<ParserReport>, EvalError> {
    (0..corpus.parser_count())
        .map(|k| {
            let trees = corpus.parser_trees(k);
            Ok(ParserReport {
                parser: corpus.parser_names[k].clone(),
                labeled: eval_labeled(&trees, gold)?,
                structure: eval_structure(&trees, gold)?,
                label_accuracy: label_accuracy(&trees, gold)?,
            })
        })
        .collect()
}

/// Competition ranks (1 = best, ties share the lower rank) for
/// higher-is-better scores.
pub fn competition_ranks(scores: &[f64]) -> Vec<usize> {
    const EPS: f64 = 1e-12;
    scores
        .iter()
        .map(|&s| {
            1 + scores
                .iter()
                .filter(|&&o| o - s > EPS * s.abs().max(1.0))
                .count()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspectRanking {
    pub scores: Vec<f64>,
    pub weights: Vec<f64>,
    pub rank_by_score: Vec<usize>,
    pub rank_by_weight: Vec<usize>,
    pub matches: bool,
}

impl AspectRanking {
    fn new(scores: Vec<f64>, weights: Vec<f64>) -> Self {
        let rank_by_score = competition_ranks(&scores);
        let rank_by_weight = competition_ranks(&weights);
        let matches = rank_by_score == rank_by_weight;
        AspectRanking {
            scores,
            weights,
            rank_by_score,
            rank_by_weight,
            matches,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingTable {
    pub parsers: Vec<String>,
    /// Structure F1 against gold vs. estimated structure weights.
    pub structure: AspectRanking,
    /// Label accuracy against gold vs. estimated label weights.
    pub label: AspectRanking,
}

pub fn rank_parsers(
    corpus: &Corpus,
    gold: &[ParseTree],
    weights: &ParserWeights,
) -> Result<RankingTable, EvalError> {
    let reports = eval_corpus(corpus, gold)?;
    Ok(RankingTable {
        parsers: corpus.parser_names.clone(),
        structure: AspectRanking::new(
            reports.iter().map(|r| r.structure.f1).collect(),
            weights.structure.clone(),
        ),
        label: AspectRanking::new(
            reports.iter().map(|r| r.label_accuracy).collect(),
            weights.label.clone(),
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_bracketed;

    fn trees(lines: &[&str]) -> Vec<ParseTree> {
        lines.iter().map(|l| parse_bracketed(l).unwrap()).collect()
    }

    #[test]
    fn perfect_scores() {
        let g = trees(&[
            "(S (NP (DT the) (NN dog)) (VP (VBZ runs)))",
            "(S (NP (NN x)))",
        ]);
        let r = eval_labeled(&g, &g).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));
        let r = eval_structure(&g, &g).unwrap();
        assert_eq!((r.f1, r.rf_total), (1.0, Some(0)));
    }

    #[test]
    fn formula() {
        let r = EvalReport::from_counts(3, 4, 5, None);
        assert_eq!(r.precision, 0.75);
        assert_eq!(r.recall, 0.6);
        assert!((r.f1 - 2.0 / 3.0).abs() < 1e-12);
        let r = EvalReport::from_counts(0, 0, 5, None);
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn structure_example() {
        let p = trees(&["(S (X (A a) (B b)) (C c))"]);
        let g = trees(&["(S (A a) (Y (B b) (C c)))"]);
        let r = eval_structure(&p, &g).unwrap();
        assert_eq!(r.rf_total, Some(2));
        assert_eq!((r.correct, r.predicted, r.gold), (1, 2, 2));
        assert_eq!((r.precision, r.recall), (0.5, 0.5));
    }

    #[test]
    fn labeled_counts_chain_elements() {
        let p = trees(&["(S (NP (NN dog)))"]);
        let g = trees(&["(S (VP (NN dog)))"]);
        let r = eval_labeled(&p, &g).unwrap();
        assert_eq!((r.correct, r.predicted, r.gold), (2, 3, 3));
        // duplicate labels in a chain collapse
        let p = trees(&["(NP (NP (NN dog)))"]);
        assert_eq!(eval_labeled(&p, &p).unwrap().predicted, 2);
    }

    #[test]
    fn alignment_errors() {
        let a = trees(&["(S (A a) (B b))"]);
        let b = trees(&["(S (A a) (B c))"]);
        assert_eq!(
            eval_labeled(&a, &b),
            Err(EvalError::TokenizationMismatch(0))
        );
        assert_eq!(
            eval_structure(&a, &[]),
            Err(EvalError::LengthMismatch { pred: 1, gold: 0 })
        );
    }

    #[test]
    fn label_accuracy_on_shared_spans() {
        let p = trees(&["(S (NP (A a) (B b)) (C c))"]);
        let g = trees(&["(S (VP (A a) (B b)) (D c))"]);
        // shared spans: [0,3) S ok, [0,2) NP/VP, [0,1) ok, [1,2) ok, [2,3) C/D
        assert!((label_accuracy(&p, &g).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(competition_ranks(&[0.9, 0.5, 0.7]), vec![1, 3, 2]);
        assert_eq!(competition_ranks(&[1.0, 1.0, 0.2]), vec![1, 1, 3]);
        assert_eq!(competition_ranks(&[1.0, 1.0]), vec![1, 1]);
    }

    #[test]
    fn ranking_identical_parsers() {
        let t = "(S (NP (A a) (B b)) (C c))";
        let per_parser = vec![trees(&[t]), trees(&[t])];
        let corpus = Corpus::from_trees(vec!["a".into(), "b".into()], per_parser, false).unwrap();
        let gold = trees(&["(S (A a) (VP (B b) (C c)))"]);
        let table = rank_parsers(&corpus, &gold, &ParserWeights::uniform(2)).unwrap();
        assert_eq!(table.structure.rank_by_score, vec![1, 1]);
        assert_eq!(table.structure.rank_by_weight, vec![1, 1]);
        assert!(table.structure.matches && table.label.matches);
    }
}
