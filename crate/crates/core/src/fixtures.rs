//! Seeded synthetic corpora: random gold trees plus noisy copies standing in
//! for parsers of different quality.

use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::io::Corpus;
use crate::tree::{Node, ParseTree, Token};

pub const PHRASE_LABELS: &[&str] = &["S", "NP", "VP", "PP", "ADJP", "ADVP", "SBAR"];
pub const POS_LABELS: &[&str] = &["NN", "VB", "DT", "JJ", "IN", "RB", "PRP"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FixtureError {
    #[error("noise rate {0} outside [0, 1)")]
    NoiseRate(f64),
    #[error("invalid sentence length range {0}..={1}")]
    LengthRange(usize, usize),
}

/// Gold trees and a corpus holding one corrupted copy per noise rate.
pub fn generate_corpus(
    seed: u64,
    sentences: usize,
    lengths: RangeInclusive<usize>,
    noise_rates: &[f64],
) -> Result<(Vec<ParseTree>, Corpus), FixtureError> {
    let (min_len, max_len) = (*lengths.start(), *lengths.end());
    if min_len == 0 || min_len > max_len {
        return Err(FixtureError::LengthRange(min_len, max_len));
    }
    if let Some(&r) = noise_rates.iter().find(|r| !(0.0..1.0).contains(*r)) {
        return Err(FixtureError::NoiseRate(r));
    }
    let mut gold_rng = ChaCha8Rng::seed_from_u64(seed);
    let gold: Vec<ParseTree> = (0..sentences)
        .map(|_| {
            let len = gold_rng.gen_range(min_len..=max_len);
            random_tree(&mut gold_rng, len)
        })
        .collect();

    let per_parser: Vec<Vec<ParseTree>> = noise_rates
        .iter()
        .enumerate()
        .map(|(k, &rate)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64 + 1);
            gold.iter().map(|g| corrupt(g, rate, &mut rng)).collect()
        })
        .collect();
    let names = (1..=noise_rates.len())
        .map(|k| format!("parser{k}"))
        .collect();
    let corpus = Corpus::from_trees(names, per_parser, false).expect("fixture trees share tokens");
    Ok((gold, corpus))
}

pub fn random_tree(rng: &mut impl Rng, len: usize) -> ParseTree {
    let tokens: Vec<Token> = (0..len)
        .map(|i| Token::new(i, format!("w{}", rng.gen_range(0..500))))
        .collect();
    let root = if len == 1 {
        Node::phrase("S", vec![random_preterminal(rng, 0)])
    } else {
        let mut root = random_phrase(rng, 0, len);
        if let Node::Phrase { label, .. } = &mut root {
            *label = "S".to_string();
        }
        root
    };
    ParseTree::new(root, tokens).expect("generated tree is valid")
}

fn random_preterminal(rng: &mut impl Rng, token: usize) -> Node {
    Node::preterminal(*POS_LABELS.choose(rng).unwrap(), token)
}

// Spans of length >= 2 split into 2 or 3 children.
fn random_phrase(rng: &mut impl Rng, start: usize, end: usize) -> Node {
    let len = end - start;
    let parts = if len >= 3 && rng.gen_bool(0.3) { 3 } else { 2 };
    let mut cuts: Vec<usize> = (start + 1..end).collect::<Vec<_>>();
    cuts.shuffle(rng);
    cuts.truncate(parts - 1);
    cuts.sort_unstable();
    let mut bounds = vec![start];
    bounds.extend(cuts);
    bounds.push(end);
    let children = bounds
        .windows(2)
        .map(|w| {
            if w[1] - w[0] == 1 {
                random_preterminal(rng, w[0])
            } else {
                random_phrase(rng, w[0], w[1])
            }
        })
        .collect();
    Node::phrase(*PHRASE_LABELS.choose(rng).unwrap(), children)
}

/// Copy of `tree` where each non-root phrase is, with probability `rate`,
/// either deleted (children spliced into the parent) or rotated with a
/// sibling, and each label is then replaced with probability `rate`.
pub fn corrupt(tree: &ParseTree, rate: f64, rng: &mut impl Rng) -> ParseTree {
    if rate == 0.0 {
        return tree.clone();
    }
    let mut root = tree.root().clone();
    if let Node::Phrase { children, .. } = &mut root {
        corrupt_children(children, rate, rng);
    }
    flip_labels(&mut root, rate, rng);
    ParseTree::new(root, tree.tokens().to_vec()).expect("corruption keeps the tree valid")
}

fn corrupt_children(children: &mut Vec<Node>, rate: f64, rng: &mut impl Rng) {
    for child in children.iter_mut() {
        if let Node::Phrase {
            children: inner, ..
        } = child
        {
            corrupt_children(inner, rate, rng);
        }
    }
    let mut i = 0;
    while i < children.len() {
        if children[i].is_preterminal() || !rng.gen_bool(rate) {
            i += 1;
            continue;
        }
        let can_rotate = children.len() > 1 && children[i].children().len() >= 2;
        if !can_rotate || rng.gen_bool(0.5) {
            let Node::Phrase {
                children: inner, ..
            } = children.remove(i)
            else {
                unreachable!()
            };
            let k = inner.len();
            children.splice(i..i, inner);
            i += k;
        } else if i + 1 < children.len() {
            rotate_right(children, i);
            i += 2;
        } else {
            rotate_left(children, i);
            i += 1;
        }
    }
}

// [.., X(c1..cm), S, ..] -> [.., X(c1..cm-1), Y(cm, S), ..]
fn rotate_right(children: &mut Vec<Node>, i: usize) {
    let sibling = children.remove(i + 1);
    let Node::Phrase {
        label,
        children: mut inner,
    } = children.remove(i)
    else {
        unreachable!()
    };
    let last = inner.pop().unwrap();
    let moved = Node::phrase(label.clone(), vec![last, sibling]);
    let rest = if inner.len() == 1 {
        inner.pop().unwrap()
    } else {
        Node::phrase(label, inner)
    };
    children.insert(i, rest);
    children.insert(i + 1, moved);
}

// [.., S, X(c1..cm), ..] -> [.., Y(S, c1), X(c2..cm), ..]
fn rotate_left(children: &mut Vec<Node>, i: usize) {
    let Node::Phrase {
        label,
        children: mut inner,
    } = children.remove(i)
    else {
        unreachable!()
    };
    let sibling = children.remove(i - 1);
    let first = inner.remove(0);
    let moved = Node::phrase(label.clone(), vec![sibling, first]);
    let rest = if inner.len() == 1 {
        inner.pop().unwrap()
    } else {
        Node::phrase(label, inner)
    };
    children.insert(i - 1, moved);
    children.insert(i, rest);
}

fn flip_labels(node: &mut Node, rate: f64, rng: &mut impl Rng) {
    let (label, inventory) = match node {
        Node::Phrase { label, .. } => (label, PHRASE_LABELS),
        Node::Preterminal { label, .. } => (label, POS_LABELS),
    };
    if rng.gen_bool(rate) {
        let current = label.clone();
        let choices: Vec<&&str> = inventory.iter().filter(|l| **l != current).collect();
        *label = choices.choose(rng).unwrap().to_string();
    }
    if let Node::Phrase { children, .. } = node {
        for child in children {
            flip_labels(child, rate, rng);
        }
    }
}
