//! Parse trees, spans, cluster sets and label chains.
//!
//! A constituency node always dominates a contiguous run of tokens, so a
//! cluster (the leaf set under a node) is stored as a half-open token
//! interval. Unary chains collapse to a single span carrying the ordered
//! list of labels found at that span.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One token of a sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub text: String,
}

impl Token {
    pub fn new(index: usize, text: impl Into<String>) -> Self {
        Token {
            index,
            text: text.into(),
        }
    }
}

/// A node of a constituency tree.
///
/// Preterminals dominate exactly one token, referenced by its index in the
/// owning tree's token list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Phrase { label: String, children: Vec<Node> },
    Preterminal { label: String, token: usize },
}

impl Node {
    pub fn phrase(label: impl Into<String>, children: Vec<Node>) -> Self {
        Node::Phrase {
            label: label.into(),
            children,
        }
    }

    pub fn preterminal(label: impl Into<String>, token: usize) -> Self {
        Node::Preterminal {
            label: label.into(),
            token,
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Node::Phrase { label, .. } | Node::Preterminal { label, .. } => label,
        }
    }

    pub fn children(&self) -> &[Node] {
        match self {
            Node::Phrase { children, .. } => children,
            Node::Preterminal { .. } => &[],
        }
    }

    pub fn is_preterminal(&self) -> bool {
        matches!(self, Node::Preterminal { .. })
    }

    /// Number of nodes in this subtree, preterminals included.
    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(Node::node_count).sum::<usize>()
    }

    /// Token interval dominated by this node. Only meaningful for nodes of a
    /// validated tree.
    pub fn span(&self) -> Span {
        match self {
            Node::Preterminal { token, .. } => Span::new(*token, *token + 1),
            Node::Phrase { children, .. } => {
                let first = children.first().expect("phrase without children").span();
                let last = children.last().expect("phrase without children").span();
                Span::new(first.start, last.end)
            }
        }
    }

    fn relabel(&mut self, f: &impl Fn(&str) -> String) {
        match self {
            Node::Phrase { label, children } => {
                *label = f(label);
                children.iter_mut().for_each(|c| c.relabel(f));
            }
            Node::Preterminal { label, .. } => *label = f(label),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("tree has no tokens")]
    Empty,
    #[error("phrase node {0:?} has no children")]
    ChildlessNode(String),
    #[error("token {0:?} has empty text")]
    EmptyToken(usize),
    #[error("token at position {position} has index {index}")]
    TokenIndex { position: usize, index: usize },
    #[error("preterminals do not cover tokens 0..{tokens} in order")]
    LeafOrder { tokens: usize },
    #[error("clusters {0} and {1} are incompatible")]
    IncompatibleClusters(Span, Span),
    #[error("cluster set lacks the root span {0}")]
    MissingRoot(Span),
    #[error("no label for cluster {0}")]
    MissingLabel(Span),
    #[error("span {span} lies outside a sentence of {len} tokens")]
    SpanOutOfRange { span: Span, len: usize },
    #[error("empty label chain for cluster {0}")]
    EmptyLabelChain(Span),
}

/// A rooted, ordered, labeled tree over one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParseTree {
    root: Node,
    tokens: Vec<Token>,
}

impl ParseTree {
    /// Builds a tree, checking that the preterminals cover the tokens left
    /// to right and that every phrase has at least one child.
    pub fn new(root: Node, tokens: Vec<Token>) -> Result<Self, TreeError> {
        if tokens.is_empty() {
            return Err(TreeError::Empty);
        }
        for (position, token) in tokens.iter().enumerate() {
            if token.index != position {
                return Err(TreeError::TokenIndex {
                    position,
                    index: token.index,
                });
            }
            if token.text.is_empty() {
                return Err(TreeError::EmptyToken(position));
            }
        }
        let mut next = 0;
        check_node(&root, &mut next, tokens.len())?;
        if next != tokens.len() {
            return Err(TreeError::LeafOrder {
                tokens: tokens.len(),
            });
        }
        Ok(ParseTree { root, tokens })
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn root_span(&self) -> Span {
        Span::new(0, self.tokens.len())
    }

    pub fn token_texts(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.text.as_str())
    }

    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }

    /// Returns a copy with every node label passed through `f`.
    pub fn map_labels(&self, f: impl Fn(&str) -> String) -> ParseTree {
        let mut root = self.root.clone();
        root.relabel(&f);
        ParseTree {
            root,
            tokens: self.tokens.clone(),
        }
    }

    /// Cluster set of the tree. Singleton spans are kept only when
    /// `include_preterminals` is set; the root span is always present.
    pub fn clusters(&self, include_preterminals: bool) -> ClusterSet {
        clusters_of(self, include_preterminals)
    }

    pub fn labeled_spans(&self) -> LabeledSpanMap {
        labeled_spans_of(self)
    }
}

fn check_node(node: &Node, next: &mut usize, len: usize) -> Result<(), TreeError> {
    match node {
        Node::Preterminal { token, .. } => {
            if *token != *next || *token >= len {
                return Err(TreeError::LeafOrder { tokens: len });
            }
            *next += 1;
        }
        Node::Phrase { label, children } => {
            if children.is_empty() {
                return Err(TreeError::ChildlessNode(label.clone()));
            }
            for child in children {
                check_node(child, next, len)?;
            }
        }
    }
    Ok(())
}

/// Half-open token interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start < end, "empty span [{start},{end})");
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn is_singleton(&self) -> bool {
        self.len() == 1
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn is_disjoint(&self, other: &Span) -> bool {
        self.end <= other.start || other.end <= self.start
    }

    pub fn compatible(&self, other: &Span) -> bool {
        compatible(*self, *other)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.start, self.end)
    }
}

/// Two clusters are compatible when they are disjoint or nested.
pub fn compatible(a: Span, b: Span) -> bool {
    a.is_disjoint(&b) || a.contains(&b) || b.contains(&a)
}

/// A set of clusters, iterated in `(start, end)` order. Stored as a sorted
/// vector, which keeps the merge walks in RF computations cache-friendly.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ClusterSet(Vec<Span>);

impl ClusterSet {
    pub fn new() -> Self {
        ClusterSet(Vec::new())
    }

    pub fn insert(&mut self, span: Span) -> bool {
        match self.0.binary_search(&span) {
            Ok(_) => false,
            Err(i) => {
                self.0.insert(i, span);
                true
            }
        }
    }

    pub fn remove(&mut self, span: &Span) -> bool {
        match self.0.binary_search(span) {
            Ok(i) => {
                self.0.remove(i);
                true
            }
            Err(_) => false,
        }
    }

    pub fn contains(&self, span: &Span) -> bool {
        self.0.binary_search(span).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Span> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Span] {
        &self.0
    }

    /// `(only in self, in both, only in other)` counts.
    fn overlap(&self, other: &ClusterSet) -> (usize, usize, usize) {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j, mut shared) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    shared += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        (a.len() - shared, shared, b.len() - shared)
    }

    /// Number of clusters in exactly one of the two sets.
    pub fn symmetric_difference_len(&self, other: &ClusterSet) -> usize {
        let (only_self, _, only_other) = self.overlap(other);
        only_self + only_other
    }

    pub fn intersection_len(&self, other: &ClusterSet) -> usize {
        self.overlap(other).1
    }

    pub fn is_subset(&self, other: &ClusterSet) -> bool {
        self.overlap(other).0 == 0
    }

    /// First incompatible pair, if any.
    pub fn find_conflict(&self) -> Option<(Span, Span)> {
        // Sorted by start: a span can only conflict with later spans that
        // start strictly inside it.
        let spans = &self.0;
        for (i, a) in spans.iter().enumerate() {
            for b in &spans[i + 1..] {
                if b.start >= a.end {
                    break;
                }
                if !compatible(*a, *b) {
                    return Some((*a, *b));
                }
            }
        }
        None
    }

    pub fn is_pairwise_compatible(&self) -> bool {
        self.find_conflict().is_none()
    }

    /// Adds `[i, i+1)` for every token of an `n`-token sentence.
    pub fn with_singletons(mut self, n: usize) -> Self {
        self.extend((0..n).map(|i| Span::new(i, i + 1)));
        self
    }
}

impl FromIterator<Span> for ClusterSet {
    fn from_iter<I: IntoIterator<Item = Span>>(iter: I) -> Self {
        let mut set = ClusterSet(iter.into_iter().collect());
        set.0.sort_unstable();
        set.0.dedup();
        set
    }
}

impl Extend<Span> for ClusterSet {
    fn extend<I: IntoIterator<Item = Span>>(&mut self, iter: I) {
        self.0.extend(iter);
        self.0.sort_unstable();
        self.0.dedup();
    }
}

impl<'a> IntoIterator for &'a ClusterSet {
    type Item = &'a Span;
    type IntoIter = std::slice::Iter<'a, Span>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Labels found at one span, topmost first. Length > 1 means a unary chain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LabelChain(pub Vec<String>);

impl LabelChain {
    pub fn single(label: impl Into<String>) -> Self {
        LabelChain(vec![label.into()])
    }

    pub fn labels(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for LabelChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("|"))
    }
}

impl<S: Into<String>> FromIterator<S> for LabelChain {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        LabelChain(iter.into_iter().map(Into::into).collect())
    }
}

pub type LabeledSpanMap = BTreeMap<Span, LabelChain>;

pub fn clusters_of(tree: &ParseTree, include_preterminals: bool) -> ClusterSet {
    let mut spans = Vec::with_capacity(2 * tree.len());
    collect_spans(tree.root(), &mut |span| {
        if include_preterminals || !span.is_singleton() {
            spans.push(span);
        }
    });
    spans.push(tree.root_span());
    spans.into_iter().collect()
}

fn collect_spans(node: &Node, sink: &mut impl FnMut(Span)) -> Span {
    let span = match node {
        Node::Preterminal { token, .. } => Span::new(*token, *token + 1),
        Node::Phrase { children, .. } => {
            let mut start = usize::MAX;
            let mut end = 0;
            for child in children {
                let s = collect_spans(child, sink);
                start = start.min(s.start);
                end = end.max(s.end);
            }
            Span::new(start, end)
        }
    };
    sink(span);
    span
}

pub fn labeled_spans_of(tree: &ParseTree) -> LabeledSpanMap {
    let mut out = LabeledSpanMap::new();
    collect_labels(tree.root(), &mut out);
    out
}

// Pre-order, so the topmost node of a unary chain is pushed first.
fn collect_labels(node: &Node, out: &mut LabeledSpanMap) -> Span {
    match node {
        Node::Preterminal { label, token } => {
            let span = Span::new(*token, *token + 1);
            out.entry(span)
                .or_insert_with(|| LabelChain(Vec::new()))
                .0
                .push(label.clone());
            span
        }
        Node::Phrase { label, children } => {
            let span = node.span();
            out.entry(span)
                .or_insert_with(|| LabelChain(Vec::new()))
                .0
                .push(label.clone());
            for child in children {
                collect_labels(child, out);
            }
            span
        }
    }
}

/// Rebuilds the tree whose node spans are exactly `clusters` (plus one
/// singleton per token), children ordered left to right.
///
/// Every singleton span must have a label chain, since its bottom label is
/// the token's part-of-speech tag. Labels for spans not in `clusters` are
/// ignored, except singletons, which are always materialized.
pub fn tree_from_clusters(
    clusters: &ClusterSet,
    labels: &LabeledSpanMap,
    tokens: &[Token],
) -> Result<ParseTree, TreeError> {
    let n = tokens.len();
    if n == 0 {
        return Err(TreeError::Empty);
    }
    let root = Span::new(0, n);
    if !clusters.contains(&root) {
        return Err(TreeError::MissingRoot(root));
    }
    if let Some(span) = clusters.iter().find(|s| s.end > n) {
        return Err(TreeError::SpanOutOfRange {
            span: *span,
            len: n,
        });
    }
    if let Some((a, b)) = clusters.find_conflict() {
        return Err(TreeError::IncompatibleClusters(a, b));
    }

    let mut spans: Vec<Span> = clusters
        .clone()
        .with_singletons(n)
        .iter()
        .copied()
        .collect();
    // Parents before children: start ascending, longer first.
    spans.sort_by(|a, b| a.start.cmp(&b.start).then(b.end.cmp(&a.end)));
    for span in &spans {
        match labels.get(span) {
            None => return Err(TreeError::MissingLabel(*span)),
            Some(chain) if chain.is_empty() => return Err(TreeError::EmptyLabelChain(*span)),
            Some(_) => {}
        }
    }

    let mut pos = 0;
    let node = build_node(&spans, &mut pos, labels);
    debug_assert_eq!(pos, spans.len());
    ParseTree::new(node, tokens.to_vec())
}

fn build_node(spans: &[Span], pos: &mut usize, labels: &LabeledSpanMap) -> Node {
    let span = spans[*pos];
    *pos += 1;
    let chain = labels[&span].labels();
    let mut node = if span.is_singleton() {
        Node::preterminal(chain[chain.len() - 1].clone(), span.start)
    } else {
        let mut children = Vec::new();
        while *pos < spans.len() && span.contains(&spans[*pos]) {
            children.push(build_node(spans, pos, labels));
        }
        Node::phrase(chain[chain.len() - 1].clone(), children)
    };
    for label in chain[..chain.len() - 1].iter().rev() {
        node = Node::phrase(label.clone(), vec![node]);
    }
    node
}
