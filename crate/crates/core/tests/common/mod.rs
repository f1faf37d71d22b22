#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use treeagg::fixtures::{corrupt, random_tree};
use treeagg::io::SentenceBundle;
use treeagg::{ClusterSet, Node, ParseTree, Span, Token};

const LABELS: &[&str] = &[
    "S", "NP", "VP", "NP-SBJ", "-NONE-", "PRP$", "S=1", ",", "``", "WHNP", "X",
];
const WORDS: &[&str] = &[
    "dog", "-LRB-", "'s", "3.5", "é", "$", "``", "the", "U.S.", "--",
];

/// Random tree with unary chains, punctuation labels, and 1 to 4 children
/// per phrase.
pub fn wild_tree(rng: &mut impl Rng, len: usize) -> ParseTree {
    let tokens = (0..len)
        .map(|i| Token::new(i, *WORDS.choose(rng).unwrap()))
        .collect();
    let root = wild_node(rng, 0, len);
    let root = match root {
        Node::Preterminal { .. } => Node::phrase("S", vec![root]),
        n => n,
    };
    ParseTree::new(root, tokens).unwrap()
}

fn wild_node(rng: &mut impl Rng, start: usize, end: usize) -> Node {
    let mut node = if end - start == 1 {
        Node::preterminal(*LABELS.choose(rng).unwrap(), start)
    } else {
        let parts = rng.gen_range(1..=(end - start).min(4)).max(2);
        let mut cuts: Vec<usize> = (start + 1..end).collect();
        cuts.shuffle(rng);
        cuts.truncate(parts - 1);
        cuts.sort_unstable();
        let mut bounds = vec![start];
        bounds.extend(cuts);
        bounds.push(end);
        let children = bounds
            .windows(2)
            .map(|w| wild_node(rng, w[0], w[1]))
            .collect();
        Node::phrase(*LABELS.choose(rng).unwrap(), children)
    };
    while rng.gen_bool(0.2) {
        node = Node::phrase(*LABELS.choose(rng).unwrap(), vec![node]);
    }
    node
}

/// A bundle of `p` trees over `len` tokens: noisy copies of one tree, or
/// unrelated random trees.
pub fn random_bundle(rng: &mut impl Rng, len: usize, p: usize) -> SentenceBundle {
    let base = random_tree(rng, len);
    let independent = rng.gen_bool(0.3);
    let trees = (0..p)
        .map(|_| {
            let t = if independent {
                random_tree(rng, len)
            } else {
                let rate = rng.gen_range(0.0..0.6);
                corrupt(&base, rate, rng)
            };
            ParseTree::new(t.root().clone(), base.tokens().to_vec()).unwrap()
        })
        .collect();
    SentenceBundle::new(0, trees).unwrap()
}

/// Random set of spans over `n` tokens, not necessarily compatible.
pub fn random_span_set(rng: &mut impl Rng, n: usize) -> ClusterSet {
    let mut set = ClusterSet::new();
    for start in 0..n {
        for end in start + 1..=n {
            if rng.gen_bool(0.25) {
                set.insert(Span::new(start, end));
            }
        }
    }
    set
}

/// Symmetric difference size by nested scans over plain vectors.
pub fn naive_rf(a: &ClusterSet, b: &ClusterSet) -> usize {
    let a: Vec<Span> = a.iter().copied().collect();
    let b: Vec<Span> = b.iter().copied().collect();
    a.iter().filter(|x| !b.contains(x)).count() + b.iter().filter(|x| !a.contains(x)).count()
}

/// Every pairwise-compatible subset of `cands`, passed to `visit`.
pub fn for_each_compatible_subset(cands: &[Span], visit: &mut dyn FnMut(&[Span])) {
    fn go(cands: &[Span], i: usize, chosen: &mut Vec<Span>, visit: &mut dyn FnMut(&[Span])) {
        if i == cands.len() {
            visit(chosen);
            return;
        }
        go(cands, i + 1, chosen, visit);
        let c = cands[i];
        let ok = chosen
            .iter()
            .all(|k| k.is_disjoint(&c) || k.contains(&c) || c.contains(k));
        if ok {
            chosen.push(c);
            go(cands, i + 1, chosen, visit);
            chosen.pop();
        }
    }
    go(cands, 0, &mut Vec::new(), visit);
}

/// Size of a maximum independent set by exhaustive search.
pub fn brute_force_mis(adj: &[Vec<usize>]) -> usize {
    let n = adj.len();
    let mut best = 0;
    for mask in 0u32..(1 << n) {
        let independent =
            (0..n).all(|v| mask >> v & 1 == 0 || adj[v].iter().all(|&u| mask >> u & 1 == 0));
        if independent {
            best = best.max(mask.count_ones() as usize);
        }
    }
    best
}

pub fn random_graph(rng: &mut impl Rng, n: usize, bipartite: bool) -> Vec<Vec<usize>> {
    let side: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let density = rng.gen_range(0.05..0.6);
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if (!bipartite || side[i] != side[j]) && rng.gen_bool(density) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    adj
}

/// Odd-cycle check by BFS 2-coloring.
pub fn has_odd_cycle(adj: &[Vec<usize>]) -> bool {
    let mut color = vec![u8::MAX; adj.len()];
    for s in 0..adj.len() {
        if color[s] != u8::MAX {
            continue;
        }
        color[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if color[u] == u8::MAX {
                    color[u] = 1 - color[v];
                    queue.push_back(u);
                } else if color[u] == color[v] {
                    return true;
                }
            }
        }
    }
    false
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
