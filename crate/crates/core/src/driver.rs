//! Block coordinate descent over aggregated trees and parser weights.
//!
//! The structure phase alternates the optimal cluster-set update with the
//! closed-form weight update until the weights settle; the label phase then
//! does the same for label chains on the fixed structure.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::AggregateError;
use crate::io::Corpus;
use crate::labels::{finalize_tree, label_mismatches, vote_labels};
use crate::rf::{per_parser_rf, weighted_sum};
use crate::structure::{aggregate_clusters, DEFAULT_TIE_TOLERANCE};
use crate::tree::{ClusterSet, LabeledSpanMap, ParseTree};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParserWeights {
    pub structure: Vec<f64>,
    pub label: Vec<f64>,
}

impl ParserWeights {
    pub fn uniform(p: usize) -> Self {
        ParserWeights {
            structure: vec![1.0; p],
            label: vec![1.0; p],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriverConfig {
    pub max_iters: usize,
    /// Stop once no weight moves by more than this.
    pub convergence_tol: f64,
    /// Added to distances inside the log so a perfect parser gets a finite weight.
    pub distance_smoothing: f64,
    /// Count singleton clusters in the structure objective.
    pub include_preterminals: bool,
    pub tie_tolerance: f64,
    pub weight_normalization: WeightNormalization,
}

/// Reference distance inside the weight update's logarithm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightNormalization {
    /// `-log(d_k / max_j d_j)`: the worst parser gets weight 0.
    #[default]
    Max,
    /// `-log(d_k / sum_j d_j)`: the exact minimizer under `sum_k exp(-w_k) = 1`,
    /// which makes the objective trace non-increasing.
    Sum,
}

impl Default for DriverConfig {
    fn default() -> Self {
        DriverConfig {
            max_iters: 100,
            convergence_tol: 1e-6,
            distance_smoothing: 1e-6,
            include_preterminals: true,
            tie_tolerance: DEFAULT_TIE_TOLERANCE,
            weight_normalization: WeightNormalization::Max,
        }
    }
}

impl DriverConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_iters == 0 {
            return Err("max_iters must be positive".into());
        }
        for (name, v) in [
            ("convergence_tol", self.convergence_tol),
            ("distance_smoothing", self.distance_smoothing),
            ("tie_tolerance", self.tie_tolerance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregationResult {
    pub trees: Vec<ParseTree>,
    pub structure_trees: Vec<ClusterSet>,
    pub weights: ParserWeights,
    /// Weighted RF objective after each structure iteration.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    /// Weighted label mismatches after each label iteration.
    pub label_objective_trace: Vec<f64>,
    pub label_iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Structure,
    Label,
}

/// One line of the optional iteration trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub phase: Phase,
    pub iteration: usize,
    pub objective: f64,
    pub weights: Vec<f64>,
}

/// `w_k = -log((d_k + ε) / (max_j d_j + ε))`, falling back to all ones when
/// every weight comes out zero.
pub fn log_ratio_weights(totals: &[f64], smoothing: f64) -> Vec<f64> {
    let max = totals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = totals
        .iter()
        .map(|&d| -((d + smoothing) / (max + smoothing)).ln())
        .map(|w| if w == 0.0 { 0.0 } else { w })
        .collect();
    if weights.iter().all(|&w| w == 0.0) {
        vec![1.0; totals.len()]
    } else {
        weights
    }
}

/// `w_k = -log((d_k + ε) / sum_j (d_j + ε))`, with the same all-zero fallback.
pub fn log_share_weights(totals: &[f64], smoothing: f64) -> Vec<f64> {
    let sum: f64 = totals.iter().map(|d| d + smoothing).sum();
    let weights: Vec<f64> = totals
        .iter()
        .map(|&d| -((d + smoothing) / sum).ln().min(0.0))
        .map(|w| if w == 0.0 { 0.0 } else { w })
        .collect();
    if weights.iter().all(|&w| w == 0.0) {
        vec![1.0; totals.len()]
    } else {
        weights
    }
}

fn normalized_weights(totals: &[f64], config: &DriverConfig) -> Vec<f64> {
    match config.weight_normalization {
        WeightNormalization::Max => log_ratio_weights(totals, config.distance_smoothing),
        WeightNormalization::Sum => log_share_weights(totals, config.distance_smoothing),
    }
}

pub fn update_structure_weights(per_parser_total_rf: &[f64], smoothing: f64) -> Vec<f64> {
    log_ratio_weights(per_parser_total_rf, smoothing)
}

pub fn update_label_weights(per_parser_mismatches: &[f64], smoothing: f64) -> Vec<f64> {
    log_ratio_weights(per_parser_mismatches, smoothing)
}

fn max_abs_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn as_f64(v: &[u64]) -> Vec<f64> {
    v.iter().map(|&x| x as f64).collect()
}

pub fn run_cptam(
    corpus: &Corpus,
    config: &DriverConfig,
) -> Result<AggregationResult, AggregateError> {
    run_cptam_with(corpus, config, None, &mut |_| {})
}

/// Runs both phases. `initial` overrides the uniform starting weights;
/// `observer` receives one event per iteration.
pub fn run_cptam_with(
    corpus: &Corpus,
    config: &DriverConfig,
    initial: Option<&ParserWeights>,
    observer: &mut dyn FnMut(&TraceEvent),
) -> Result<AggregationResult, AggregateError> {
    if corpus.is_empty() {
        return Err(AggregateError::EmptyCorpus);
    }
    let p = corpus.parser_count();
    if p < 2 {
        return Err(AggregateError::TooFewParsers(p));
    }
    let start = initial
        .cloned()
        .unwrap_or_else(|| ParserWeights::uniform(p));

    let inputs: Vec<Vec<ClusterSet>> = corpus
        .bundles
        .par_iter()
        .map(|b| {
            b.trees
                .iter()
                .map(|t| t.clusters(config.include_preterminals))
                .collect()
        })
        .collect();
    let structure = structure_phase(&inputs, start.structure, config, observer)?;

    let parser_labels: Vec<Vec<LabeledSpanMap>> = corpus
        .bundles
        .par_iter()
        .map(|b| b.trees.iter().map(ParseTree::labeled_spans).collect())
        .collect();
    // Every token keeps a preterminal even when singletons were left out of
    // the structure objective; they are unanimous anyway.
    let full_structure: Vec<ClusterSet> = structure
        .trees
        .iter()
        .zip(&corpus.bundles)
        .map(|(c, b)| c.clone().with_singletons(b.len()))
        .collect();
    let labels = label_phase(
        &full_structure,
        &parser_labels,
        start.label,
        config,
        observer,
    )?;

    let trees = full_structure
        .par_iter()
        .zip(&labels.chosen)
        .zip(&corpus.bundles)
        .map(|((agg, chosen), bundle)| finalize_tree(agg, chosen, &bundle.tokens))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(AggregationResult {
        trees,
        structure_trees: structure.trees,
        weights: ParserWeights {
            structure: structure.weights,
            label: labels.weights,
        },
        objective_trace: structure.trace,
        iterations: structure.iterations,
        label_objective_trace: labels.trace,
        label_iterations: labels.iterations,
    })
}

pub struct StructurePhase {
    pub trees: Vec<ClusterSet>,
    pub weights: Vec<f64>,
    pub trace: Vec<f64>,
    pub iterations: usize,
}

/// Structure phase on precomputed cluster sets (`inputs[i][k]`).
pub fn structure_phase(
    inputs: &[Vec<ClusterSet>],
    mut weights: Vec<f64>,
    config: &DriverConfig,
    observer: &mut dyn FnMut(&TraceEvent),
) -> Result<StructurePhase, AggregateError> {
    let mut trees: Vec<ClusterSet> = Vec::new();
    let mut trace = Vec::new();
    let mut iterations = 0;
    while iterations < config.max_iters {
        iterations += 1;
        let next: Vec<ClusterSet> = inputs
            .par_iter()
            .map(|sets| aggregate_clusters(sets, &weights, config.tie_tolerance))
            .collect::<Result<_, _>>()?;
        let totals = per_parser_rf(inputs, &next);
        let new_weights = normalized_weights(&as_f64(&totals), config);
        let objective = weighted_sum(&totals, &new_weights);
        trace.push(objective);
        observer(&TraceEvent {
            phase: Phase::Structure,
            iteration: iterations,
            objective,
            weights: new_weights.clone(),
        });
        let unchanged = next == trees;
        let shift = max_abs_change(&weights, &new_weights);
        trees = next;
        weights = new_weights;
        if unchanged || shift < config.convergence_tol {
            break;
        }
    }
    Ok(StructurePhase {
        trees,
        weights,
        trace,
        iterations,
    })
}

struct LabelPhase {
    chosen: Vec<LabeledSpanMap>,
    weights: Vec<f64>,
    trace: Vec<f64>,
    iterations: usize,
}

fn label_phase(
    structure: &[ClusterSet],
    parser_labels: &[Vec<LabeledSpanMap>],
    mut weights: Vec<f64>,
    config: &DriverConfig,
    observer: &mut dyn FnMut(&TraceEvent),
) -> Result<LabelPhase, AggregateError> {
    let p = weights.len();
    let mut chosen: Vec<LabeledSpanMap> = Vec::new();
    let mut trace = Vec::new();
    let mut iterations = 0;
    while iterations < config.max_iters {
        iterations += 1;
        let next: Vec<LabeledSpanMap> = structure
            .par_iter()
            .zip(parser_labels)
            .map(|(agg, maps)| vote_labels(agg, maps, &weights))
            .collect::<Result<_, _>>()?;
        let totals = next
            .par_iter()
            .zip(parser_labels)
            .map(|(c, maps)| label_mismatches(c, maps))
            .reduce(
                || vec![0u64; p],
                |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
            );
        let new_weights = normalized_weights(&as_f64(&totals), config);
        let objective = weighted_sum(&totals, &new_weights);
        trace.push(objective);
        observer(&TraceEvent {
            phase: Phase::Label,
            iteration: iterations,
            objective,
            weights: new_weights.clone(),
        });
        let unchanged = next == chosen;
        let shift = max_abs_change(&weights, &new_weights);
        chosen = next;
        weights = new_weights;
        if unchanged || shift < config.convergence_tol {
            break;
        }
    }
    Ok(LabelPhase {
        chosen,
        weights,
        trace,
        iterations,
    })
}
