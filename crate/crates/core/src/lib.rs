//! Aggregation of constituency parse trees from several parsers.
//!
//! Parser reliabilities are estimated without gold data by alternating
//! between the weighted Robinson-Foulds consensus of the trees and a
//! closed-form weight update; labels are then chosen by weighted vote on the
//! aggregated structure. The crate also ships the classic consensus
//! baselines, bracket scoring, and a synthetic corpus generator.

pub mod baselines;
pub mod driver;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod io;
pub mod labels;
pub mod rf;
pub mod structure;
pub mod tree;

pub use baselines::{consensus, majority_vote_labels, ConsensusMethod};
pub use driver::{run_cptam, AggregationResult, DriverConfig, ParserWeights, WeightNormalization};
pub use error::AggregateError;
pub use eval::{eval_labeled, eval_structure, rank_parsers, EvalReport};
pub use io::{load_corpus, parse_bracketed, write_bracketed, Corpus, SentenceBundle};
pub use rf::{agreement_stats, rf_distance, AgreementStats};
pub use structure::{aggregate_structure, max_independent_set};
pub use tree::{ClusterSet, LabelChain, LabeledSpanMap, Node, ParseTree, Span, Token};
