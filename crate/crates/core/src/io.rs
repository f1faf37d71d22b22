//! Reading and writing bracketed trees, and joining per-parser files into
//! an aligned corpus.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree::{Node, ParseTree, Token, TreeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unbalanced brackets")]
    UnbalancedBrackets,
    #[error("empty tree")]
    EmptyTree,
    #[error("node without label")]
    NodeWithoutLabel,
    #[error("malformed tree: {0}")]
    Malformed(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// What to do with a bracket that opens without a label, e.g. `( (NP ...))`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmptyLabelPolicy {
    #[default]
    Reject,
    /// Label the node `X`.
    AssignX,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    pub empty_label: EmptyLabelPolicy,
    /// Strip function tags such as `-SBJ` or `=2` from labels.
    pub strip_function_tags: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Lexeme<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn lex(line: &str) -> Vec<Lexeme<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match ch {
            '(' | ')' => {
                if let Some(s) = start.take() {
                    out.push(Lexeme::Atom(&line[s..i]));
                }
                out.push(if ch == '(' {
                    Lexeme::Open
                } else {
                    Lexeme::Close
                });
            }
            c if c.is_whitespace() => {
                if let Some(s) = start.take() {
                    out.push(Lexeme::Atom(&line[s..i]));
                }
            }
            _ => {
                if start.is_none() {
                    start = Some(i);
                }
            }
        }
    }
    if let Some(s) = start {
        out.push(Lexeme::Atom(&line[s..]));
    }
    out
}

// Raw s-expression before validation.
enum Sexp<'a> {
    List(Option<&'a str>, Vec<Sexp<'a>>),
    Atom(&'a str),
}

fn read_sexp<'a>(lexemes: &[Lexeme<'a>], pos: &mut usize) -> Result<Sexp<'a>, ParseError> {
    match lexemes.get(*pos) {
        None => Err(ParseError::UnbalancedBrackets),
        Some(Lexeme::Close) => Err(ParseError::UnbalancedBrackets),
        Some(Lexeme::Atom(a)) => {
            *pos += 1;
            Ok(Sexp::Atom(a))
        }
        Some(Lexeme::Open) => {
            *pos += 1;
            let label = match lexemes.get(*pos) {
                Some(Lexeme::Atom(a)) => {
                    *pos += 1;
                    Some(*a)
                }
                _ => None,
            };
            let mut items = Vec::new();
            loop {
                match lexemes.get(*pos) {
                    None => return Err(ParseError::UnbalancedBrackets),
                    Some(Lexeme::Close) => {
                        *pos += 1;
                        return Ok(Sexp::List(label, items));
                    }
                    Some(_) => items.push(read_sexp(lexemes, pos)?),
                }
            }
        }
    }
}

/// Strips a function-tag suffix: everything from the first `-` or `=` that
/// is not at position 0. `-LRB-`, `-RRB-` and `-NONE-` are left untouched.
pub fn strip_function_tag(label: &str) -> &str {
    if label.starts_with('-') {
        return label;
    }
    match label.find(['-', '=']) {
        Some(i) if i > 0 => &label[..i],
        _ => label,
    }
}

/// Parses one bracketed tree such as `(S (NP (DT the) (NN dog)) (VP (VBZ runs)))`.
/// A `ROOT`/`TOP` or unlabeled outer wrapper around a single tree is removed.
pub fn parse_bracketed(line: &str) -> Result<ParseTree, ParseError> {
    parse_bracketed_with(line, &ParseOptions::default())
}

pub fn parse_bracketed_with(line: &str, opts: &ParseOptions) -> Result<ParseTree, ParseError> {
    let lexemes = lex(line);
    if lexemes.is_empty() {
        return Err(ParseError::EmptyTree);
    }
    let mut pos = 0;
    let mut sexp = read_sexp(&lexemes, &mut pos)?;
    if pos != lexemes.len() {
        return Err(match lexemes[pos] {
            Lexeme::Close => ParseError::UnbalancedBrackets,
            _ => ParseError::Malformed("trailing content after tree".into()),
        });
    }
    if let Sexp::Atom(_) = sexp {
        return Err(ParseError::Malformed("expected '('".into()));
    }
    // Peel wrappers.
    loop {
        match sexp {
            Sexp::List(label, mut items)
                if matches!(label, None | Some("ROOT") | Some("TOP"))
                    && items.len() == 1
                    && matches!(items[0], Sexp::List(..)) =>
            {
                sexp = items.pop().unwrap();
            }
            Sexp::List(None, items) if items.is_empty() => return Err(ParseError::EmptyTree),
            other => {
                sexp = other;
                break;
            }
        }
    }
    let mut tokens = Vec::new();
    let root = convert(sexp, &mut tokens, opts)?;
    Ok(ParseTree::new(root, tokens)?)
}

fn convert(
    sexp: Sexp<'_>,
    tokens: &mut Vec<Token>,
    opts: &ParseOptions,
) -> Result<Node, ParseError> {
    let Sexp::List(label, items) = sexp else {
        return Err(ParseError::Malformed("token outside a preterminal".into()));
    };
    let label = match label {
        Some(l) if opts.strip_function_tags => strip_function_tag(l).to_string(),
        Some(l) => l.to_string(),
        None => match opts.empty_label {
            EmptyLabelPolicy::Reject => return Err(ParseError::NodeWithoutLabel),
            EmptyLabelPolicy::AssignX => "X".to_string(),
        },
    };
    if items.is_empty() {
        return Err(if tokens.is_empty() && label.is_empty() {
            ParseError::EmptyTree
        } else {
            ParseError::Malformed(format!("node {label:?} has no children"))
        });
    }
    if let [Sexp::Atom(text)] = items.as_slice() {
        let index = tokens.len();
        tokens.push(Token::new(index, *text));
        return Ok(Node::preterminal(label, index));
    }
    let mut children = Vec::with_capacity(items.len());
    for item in items {
        if let Sexp::Atom(text) = item {
            return Err(ParseError::Malformed(format!(
                "token {text:?} under {label:?} is not wrapped in a preterminal"
            )));
        }
        children.push(convert(item, tokens, opts)?);
    }
    Ok(Node::phrase(label, children))
}

/// Canonical single-line form.
pub fn write_bracketed(tree: &ParseTree) -> String {
    let mut out = String::new();
    write_node(tree.root(), tree.tokens(), &mut out);
    out
}

fn write_node(node: &Node, tokens: &[Token], out: &mut String) {
    out.push('(');
    out.push_str(node.label());
    match node {
        Node::Preterminal { token, .. } => {
            out.push(' ');
            out.push_str(&tokens[*token].text);
        }
        Node::Phrase { children, .. } => {
            for child in children {
                out.push(' ');
                write_node(child, tokens, out);
            }
        }
    }
    out.push(')');
}

/// Splits a multi-line file into tree strings by bracket balancing.
pub fn split_multiline(text: &str) -> Result<Vec<(usize, String)>, (usize, ParseError)> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    let mut start_line = 0;
    for (lineno, line) in text.lines().enumerate() {
        if depth == 0 && line.trim().is_empty() {
            continue;
        }
        if depth == 0 {
            start_line = lineno;
        }
        for ch in line.chars() {
            match ch {
                '(' => depth += 1,
                ')' => {
                    if depth == 0 {
                        return Err((lineno, ParseError::UnbalancedBrackets));
                    }
                    depth -= 1;
                }
                _ => {}
            }
        }
        if !current.is_empty() {
            current.push(' ');
        }
        current.push_str(line.trim());
        if depth == 0 {
            out.push((start_line, std::mem::take(&mut current)));
        }
    }
    if depth != 0 {
        return Err((start_line, ParseError::UnbalancedBrackets));
    }
    Ok(out)
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Parse {
        path: PathBuf,
        line: usize,
        #[source]
        source: ParseError,
    },
    #[error("{path}:{line}: blank line")]
    BlankLine { path: PathBuf, line: usize },
    #[error("{path} has {found} trees, expected {expected} (from {reference})")]
    LineCountMismatch {
        path: PathBuf,
        found: usize,
        expected: usize,
        reference: PathBuf,
    },
    #[error("sentence {sentence}: tokens from parser {parser} differ from parser {reference}")]
    TokenizationMismatch {
        sentence: usize,
        parser: String,
        reference: String,
    },
    #[error("{0} parser names for {1} files")]
    NameCount(usize, usize),
    #[error("no input files")]
    NoInputs,
}

impl CorpusError {
    /// Alignment problems, as opposed to I/O or format problems.
    pub fn is_alignment(&self) -> bool {
        matches!(
            self,
            CorpusError::LineCountMismatch { .. } | CorpusError::TokenizationMismatch { .. }
        )
    }
}

/// One sentence with the trees of all parsers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceBundle {
    pub sentence_id: usize,
    pub tokens: Vec<Token>,
    pub trees: Vec<ParseTree>,
}

impl SentenceBundle {
    /// Builds a bundle, requiring identical token text across trees.
    /// On mismatch returns the index of the first disagreeing tree.
    pub fn new(sentence_id: usize, trees: Vec<ParseTree>) -> Result<Self, usize> {
        let first = trees.first().ok_or(0usize)?;
        if let Some(k) = trees
            .iter()
            .position(|t| !t.token_texts().eq(first.token_texts()))
        {
            return Err(k);
        }
        Ok(SentenceBundle {
            sentence_id,
            tokens: first.tokens().to_vec(),
            trees,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn parser_count(&self) -> usize {
        self.trees.len()
    }
}

/// A skipped sentence, as written to the skip report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub sentence_id: usize,
    pub parser: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub parser_names: Vec<String>,
    pub bundles: Vec<SentenceBundle>,
    pub skipped: Vec<SkipRecord>,
}

impl Corpus {
    /// Aligns per-parser tree lists (`per_parser[k][i]` is parser k's tree for
    /// sentence i).
    pub fn from_trees(
        parser_names: Vec<String>,
        per_parser: Vec<Vec<ParseTree>>,
        skip_misaligned: bool,
    ) -> Result<Self, CorpusError> {
        if parser_names.len() != per_parser.len() {
            return Err(CorpusError::NameCount(parser_names.len(), per_parser.len()));
        }
        let n = per_parser.first().map_or(0, Vec::len);
        if let Some(k) = per_parser.iter().position(|t| t.len() != n) {
            return Err(CorpusError::LineCountMismatch {
                path: PathBuf::from(&parser_names[k]),
                found: per_parser[k].len(),
                expected: n,
                reference: PathBuf::from(&parser_names[0]),
            });
        }
        let mut columns: Vec<_> = per_parser.into_iter().map(Vec::into_iter).collect();
        let mut bundles = Vec::with_capacity(n);
        let mut skipped = Vec::new();
        for i in 0..n {
            let trees: Vec<ParseTree> = columns.iter_mut().map(|c| c.next().unwrap()).collect();
            match SentenceBundle::new(i, trees) {
                Ok(b) => bundles.push(b),
                Err(k) if skip_misaligned => skipped.push(SkipRecord {
                    sentence_id: i,
                    parser: parser_names[k].clone(),
                    reason: format!("tokenization differs from parser {}", parser_names[0]),
                }),
                Err(k) => {
                    return Err(CorpusError::TokenizationMismatch {
                        sentence: i,
                        parser: parser_names[k].clone(),
                        reference: parser_names[0].clone(),
                    })
                }
            }
        }
        Ok(Corpus {
            parser_names,
            bundles,
            skipped,
        })
    }

    pub fn parser_count(&self) -> usize {
        self.parser_names.len()
    }

    pub fn len(&self) -> usize {
        self.bundles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bundles.is_empty()
    }

    /// Trees of parser `k`, in sentence order.
    pub fn parser_trees(&self, k: usize) -> Vec<ParseTree> {
        self.bundles.iter().map(|b| b.trees[k].clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub parse: ParseOptions,
    /// Accept trees spread across several lines.
    pub multiline: bool,
    /// Drop misaligned sentences and record them instead of failing.
    pub skip_misaligned: bool,
}

/// Reads a file of bracketed trees. Line numbers in errors are 1-based.
pub fn read_trees(path: &Path, opts: &LoadOptions) -> Result<Vec<ParseTree>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let entries: Vec<(usize, String)> = if opts.multiline {
        split_multiline(&text).map_err(|(line, source)| CorpusError::Parse {
            path: path.to_path_buf(),
            line: line + 1,
            source,
        })?
    } else {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                return Err(CorpusError::BlankLine {
                    path: path.to_path_buf(),
                    line: i + 1,
                });
            }
            entries.push((i, line.to_string()));
        }
        entries
    };
    entries
        .par_iter()
        .map(|(line, s)| {
            parse_bracketed_with(s, &opts.parse).map_err(|source| CorpusError::Parse {
                path: path.to_path_buf(),
                line: line + 1,
                source,
            })
        })
        .collect()
}

pub fn load_corpus(
    paths: &[PathBuf],
    parser_names: &[String],
    opts: &LoadOptions,
) -> Result<Corpus, CorpusError> {
    if paths.is_empty() {
        return Err(CorpusError::NoInputs);
    }
    if paths.len() != parser_names.len() {
        return Err(CorpusError::NameCount(parser_names.len(), paths.len()));
    }
    let mut per_parser = Vec::with_capacity(paths.len());
    for path in paths {
        per_parser.push(read_trees(path, opts)?);
    }
    let n = per_parser[0].len();
    if let Some(k) = per_parser.iter().position(|t| t.len() != n) {
        return Err(CorpusError::LineCountMismatch {
            path: paths[k].clone(),
            found: per_parser[k].len(),
            expected: n,
            reference: paths[0].clone(),
        });
    }
    Corpus::from_trees(parser_names.to_vec(), per_parser, opts.skip_misaligned)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{LabelChain, Span};
    use std::io::Write;

    #[test]
    fn parses_unary_chain() {
        let t = parse_bracketed("(S (NP (DT the)))").unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(
            t.clusters(true).iter().copied().collect::<Vec<_>>(),
            vec![Span::new(0, 1)]
        );
        assert_eq!(
            t.labeled_spans()[&Span::new(0, 1)],
            LabelChain::from_iter(["S", "NP", "DT"])
        );
    }

    #[test]
    fn strips_wrappers() {
        let plain = parse_bracketed("(S (X a))").unwrap();
        assert_eq!(parse_bracketed("((S (X a)))").unwrap(), plain);
        assert_eq!(parse_bracketed("(ROOT (S (X a)))").unwrap(), plain);
        assert_eq!(parse_bracketed("(TOP (S (X a)))").unwrap(), plain);
        assert_eq!(parse_bracketed("  (S\t(X   a) )  ").unwrap(), plain);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            parse_bracketed("(S (NP the"),
            Err(ParseError::UnbalancedBrackets)
        );
        assert_eq!(
            parse_bracketed("(S (X a)))"),
            Err(ParseError::UnbalancedBrackets)
        );
        assert_eq!(parse_bracketed(""), Err(ParseError::EmptyTree));
        assert_eq!(parse_bracketed("()"), Err(ParseError::EmptyTree));
        assert_eq!(
            parse_bracketed("(S ( (X a)))"),
            Err(ParseError::NodeWithoutLabel)
        );
        assert!(matches!(
            parse_bracketed("(S a (X b))"),
            Err(ParseError::Malformed(_))
        ));
        assert!(matches!(
            parse_bracketed("(S (X a b))"),
            Err(ParseError::Malformed(_))
        ));
        assert!(matches!(
            parse_bracketed("(S (X a)) (T (Y b))"),
            Err(ParseError::Malformed(_))
        ));
        assert!(matches!(
            parse_bracketed("(S (X))"),
            Err(ParseError::Malformed(_))
        ));
    }

    #[test]
    fn empty_label_policy() {
        let opts = ParseOptions {
            empty_label: EmptyLabelPolicy::AssignX,
            ..Default::default()
        };
        let t = parse_bracketed_with("(S ( (Y a) (Z b)))", &opts).unwrap();
        assert_eq!(write_bracketed(&t), "(S (X (Y a) (Z b)))");
    }

    #[test]
    fn escaped_brackets_are_verbatim() {
        let s = "(S (-LRB- -LRB-) (NN x) (-RRB- -RRB-))";
        let t = parse_bracketed(s).unwrap();
        assert_eq!(t.tokens()[0].text, "-LRB-");
        assert_eq!(write_bracketed(&t), s);
    }

    #[test]
    fn canonical_output() {
        let t = parse_bracketed("(S  (NP (NN dog) ) )").unwrap();
        assert_eq!(write_bracketed(&t), "(S (NP (NN dog)))");
        let s = "(S (NP (DT the) (NN dog)) (VP (VBZ runs)))";
        assert_eq!(write_bracketed(&parse_bracketed(s).unwrap()), s);
    }

    #[test]
    fn function_tags() {
        assert_eq!(strip_function_tag("NP-SBJ"), "NP");
        assert_eq!(strip_function_tag("NP-SBJ-1"), "NP");
        assert_eq!(strip_function_tag("PP=2"), "PP");
        assert_eq!(strip_function_tag("-LRB-"), "-LRB-");
        assert_eq!(strip_function_tag("-NONE-"), "-NONE-");
        assert_eq!(strip_function_tag("NN"), "NN");
        let opts = ParseOptions {
            strip_function_tags: true,
            ..Default::default()
        };
        let t = parse_bracketed_with("(S (NP-SBJ (-LRB- -LRB-)) (VP=1 (VB go)))", &opts).unwrap();
        assert_eq!(write_bracketed(&t), "(S (NP (-LRB- -LRB-)) (VP (VB go)))");
    }

    #[test]
    fn multiline_split() {
        let text = "(S\n  (NP (DT a))\n  (VP (V b)))\n\n(S (X c))\n";
        let trees = split_multiline(text).unwrap();
        assert_eq!(trees.len(), 2);
        assert_eq!(trees[0].0, 0);
        assert_eq!(trees[1], (4, "(S (X c))".to_string()));
        assert!(split_multiline("(S (X a)").is_err());
    }

    fn write_file(dir: &Path, name: &str, lines: &[&str]) -> PathBuf {
        let path = dir.join(name);
        let mut f = fs::File::create(&path).unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        path
    }

    #[test]
    fn load_aligned_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let lines = ["(S (A a) (B b))", "(S (A c))", "(S (X (A d) (B e)) (C f))"];
        let a = write_file(dir.path(), "a.txt", &lines);
        let b = write_file(dir.path(), "b.txt", &lines);
        let names = vec!["a".to_string(), "b".to_string()];
        let c = load_corpus(&[a, b], &names, &LoadOptions::default()).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.parser_count(), 2);
        assert!(c.skipped.is_empty());
    }

    #[test]
    fn load_errors() {
        let dir = tempfile::tempdir().unwrap();
        let a = write_file(
            dir.path(),
            "a.txt",
            &["(S (A a))", "(S (A b))", "(S (A c))"],
        );
        let b = write_file(
            dir.path(),
            "b.txt",
            &["(S (A a))", "(S (A b))", "(S (A c))", "(S (A d))"],
        );
        let names = vec!["a".to_string(), "b".to_string()];
        let err = load_corpus(&[a.clone(), b], &names, &LoadOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            CorpusError::LineCountMismatch {
                found: 4,
                expected: 3,
                ..
            }
        ));
        assert!(err.is_alignment());

        let c = write_file(
            dir.path(),
            "c.txt",
            &["(S (A a))", "(S (A ab))", "(S (A c))"],
        );
        let d = write_file(
            dir.path(),
            "d.txt",
            &["(S (A a))", "(S (A a) (B b))", "(S (A c))"],
        );
        let err =
            load_corpus(&[c.clone(), d.clone()], &names, &LoadOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            CorpusError::TokenizationMismatch { sentence: 1, .. }
        ));

        let skip = LoadOptions {
            skip_misaligned: true,
            ..Default::default()
        };
        let corpus = load_corpus(&[c, d], &names, &skip).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(
            corpus.skipped,
            vec![SkipRecord {
                sentence_id: 1,
                parser: "b".into(),
                reason: "tokenization differs from parser a".into()
            }]
        );
        assert_eq!(corpus.bundles[1].sentence_id, 2);

        let blank = write_file(dir.path(), "blank.txt", &["(S (A a))", "", "(S (A c))"]);
        let err = load_corpus(&[a.clone(), blank], &names, &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::BlankLine { line: 2, .. }));

        let bad = write_file(
            dir.path(),
            "bad.txt",
            &["(S (A a))", "(S (A b)", "(S (A c))"],
        );
        let err = load_corpus(&[a.clone(), bad], &names, &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::Parse { line: 2, .. }));
        assert!(err.to_string().contains("bad.txt:2"));

        let err = load_corpus(
            &[a, dir.path().join("missing.txt")],
            &names,
            &LoadOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::Io { .. }));
    }
}
