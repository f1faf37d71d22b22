//! Maximum independent sets on small graphs given as adjacency lists.
//!
//! Bipartite graphs are solved through a maximum matching and König's
//! theorem. Anything else goes to an exact branch-and-bound search.

use std::collections::VecDeque;

const UNMATCHED: usize = usize::MAX;

/// Two-colors the vertices with `alive[v]` set. `None` if an odd cycle exists.
pub fn two_coloring(adj: &[Vec<usize>], alive: &[bool]) -> Option<Vec<u8>> {
    let n = adj.len();
    let mut color = vec![u8::MAX; n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        if !alive[s] || color[s] != u8::MAX {
            continue;
        }
        color[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if !alive[u] {
                    continue;
                }
                if color[u] == u8::MAX {
                    color[u] = 1 - color[v];
                    queue.push_back(u);
                } else if color[u] == color[v] {
                    return None;
                }
            }
        }
    }
    Some(color)
}

pub fn is_bipartite(adj: &[Vec<usize>]) -> bool {
    two_coloring(adj, &vec![true; adj.len()]).is_some()
}

/// Hopcroft-Karp over the alive subgraph. Returns `mate[v]` for every vertex.
fn maximum_matching(adj: &[Vec<usize>], alive: &[bool], color: &[u8]) -> Vec<usize> {
    let n = adj.len();
    let left: Vec<usize> = (0..n).filter(|&v| alive[v] && color[v] == 0).collect();
    let mut mate = vec![UNMATCHED; n];
    let mut dist = vec![usize::MAX; n];
    loop {
        // BFS layers from free left vertices.
        let mut queue = VecDeque::new();
        for &v in &left {
            if mate[v] == UNMATCHED {
                dist[v] = 0;
                queue.push_back(v);
            } else {
                dist[v] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if !alive[u] {
                    continue;
                }
                match mate[u] {
                    UNMATCHED => found = true,
                    w if dist[w] == usize::MAX => {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            break;
        }
        for &v in &left {
            if mate[v] == UNMATCHED {
                augment(v, adj, alive, &mut mate, &mut dist);
            }
        }
    }
    mate
}

fn augment(
    v: usize,
    adj: &[Vec<usize>],
    alive: &[bool],
    mate: &mut [usize],
    dist: &mut [usize],
) -> bool {
    for &u in &adj[v] {
        if !alive[u] {
            continue;
        }
        let w = mate[u];
        if w == UNMATCHED
            || (dist[w] == dist[v].wrapping_add(1) && augment(w, adj, alive, mate, dist))
        {
            mate[v] = u;
            mate[u] = v;
            return true;
        }
    }
    dist[v] = usize::MAX;
    false
}

/// Maximum independent set of a bipartite alive subgraph: the complement of
/// the minimum vertex cover built from a maximum matching (König).
pub fn konig_independent_set(adj: &[Vec<usize>], alive: &[bool], color: &[u8]) -> Vec<usize> {
    let n = adj.len();
    let mate = maximum_matching(adj, alive, color);
    // Z: vertices reachable from free left vertices along alternating paths
    // (non-matching edges left→right, matching edges right→left).
    let mut reached = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n)
        .filter(|&v| alive[v] && color[v] == 0 && mate[v] == UNMATCHED)
        .collect();
    for &v in &queue {
        reached[v] = true;
    }
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v] {
            if !alive[u] || reached[u] || mate[v] == u {
                continue;
            }
            reached[u] = true;
            let w = mate[u];
            if w != UNMATCHED && !reached[w] {
                reached[w] = true;
                queue.push_back(w);
            }
        }
    }
    // Cover = (L \ Z) ∪ (R ∩ Z); independent set is its complement.
    (0..n)
        .filter(|&v| alive[v])
        .filter(|&v| {
            if color[v] == 0 {
                reached[v]
            } else {
                !reached[v]
            }
        })
        .collect()
}

/// Size of a maximum independent set of the alive subgraph.
pub fn independence_number(adj: &[Vec<usize>], alive: &[bool]) -> usize {
    match two_coloring(adj, alive) {
        Some(color) => konig_independent_set(adj, alive, &color).len(),
        None => exact_independence_number(adj, alive),
    }
}

/// Exact branch-and-bound, for graphs that are not bipartite.
pub fn exact_independence_number(adj: &[Vec<usize>], alive: &[bool]) -> usize {
    let mut alive = alive.to_vec();
    let mut best = 0;
    branch(adj, &mut alive, 0, &mut best);
    best
}

fn branch(adj: &[Vec<usize>], alive: &mut [bool], taken: usize, best: &mut usize) {
    let remaining: Vec<usize> = (0..adj.len()).filter(|&v| alive[v]).collect();
    if taken + remaining.len() <= *best {
        return;
    }
    let degree = |v: usize, alive: &[bool]| adj[v].iter().filter(|&&u| alive[u]).count();
    // Vertices of degree 0 or 1 always belong to some maximum set.
    if let Some(&v) = remaining.iter().find(|&&v| degree(v, alive) <= 1) {
        let removed = take_closed_neighborhood(adj, alive, v);
        branch(adj, alive, taken + 1, best);
        restore(alive, &removed);
        return;
    }
    let Some(&v) = remaining.iter().max_by_key(|&&v| degree(v, alive)) else {
        *best = (*best).max(taken);
        return;
    };
    let removed = take_closed_neighborhood(adj, alive, v);
    branch(adj, alive, taken + 1, best);
    restore(alive, &removed);

    alive[v] = false;
    branch(adj, alive, taken, best);
    alive[v] = true;
}

fn take_closed_neighborhood(adj: &[Vec<usize>], alive: &mut [bool], v: usize) -> Vec<usize> {
    let mut removed = vec![v];
    alive[v] = false;
    for &u in &adj[v] {
        if alive[u] {
            alive[u] = false;
            removed.push(u);
        }
    }
    removed
}

fn restore(alive: &mut [bool], removed: &[usize]) {
    for &v in removed {
        alive[v] = true;
    }
}

/// A maximum independent set, chosen to be lexicographically first with
/// respect to `preference` (a permutation of the vertices, most preferred
/// first). Returned in preference order.
pub fn maximum_independent_set(adj: &[Vec<usize>], preference: &[usize]) -> Vec<usize> {
    let n = adj.len();
    debug_assert_eq!(preference.len(), n);
    // Components are independent of each other, so solving each one alone
    // gives the same lexicographically-first set at a fraction of the cost.
    let mut component = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for &s in preference {
        if component[s] != usize::MAX {
            continue;
        }
        let id = members.len();
        component[s] = id;
        let mut stack = vec![s];
        let mut nodes = Vec::new();
        while let Some(v) = stack.pop() {
            nodes.push(v);
            for &u in &adj[v] {
                if component[u] == usize::MAX {
                    component[u] = id;
                    stack.push(u);
                }
            }
        }
        members.push(nodes);
    }
    let mut orders: Vec<Vec<usize>> = vec![Vec::new(); members.len()];
    for &v in preference {
        orders[component[v]].push(v);
    }
    let mut local = vec![0; n];
    let mut chosen = vec![false; n];
    for (nodes, order) in members.iter().zip(&orders) {
        if nodes.len() == 1 {
            chosen[nodes[0]] = true;
            continue;
        }
        for (i, &v) in nodes.iter().enumerate() {
            local[v] = i;
        }
        let sub: Vec<Vec<usize>> = nodes
            .iter()
            .map(|&v| adj[v].iter().map(|&u| local[u]).collect())
            .collect();
        let order: Vec<usize> = order.iter().map(|&v| local[v]).collect();
        for i in lexicographic_mis(&sub, &order) {
            chosen[nodes[i]] = true;
        }
    }
    preference.iter().copied().filter(|&v| chosen[v]).collect()
}

fn lexicographic_mis(adj: &[Vec<usize>], preference: &[usize]) -> Vec<usize> {
    let n = adj.len();
    let mut alive = vec![true; n];
    let mut target = independence_number(adj, &alive);
    let mut chosen = Vec::with_capacity(target);
    for &v in preference {
        if !alive[v] {
            continue;
        }
        let neighbors: Vec<usize> = adj[v].iter().copied().filter(|&u| alive[u]).collect();
        if neighbors.is_empty() {
            alive[v] = false;
            chosen.push(v);
            target -= 1;
            continue;
        }
        alive[v] = false;
        for &u in &neighbors {
            alive[u] = false;
        }
        if 1 + independence_number(adj, &alive) == target {
            chosen.push(v);
            target -= 1;
        } else {
            for &u in &neighbors {
                alive[u] = true;
            }
        }
    }
    debug_assert_eq!(target, 0);
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    fn brute_force(adj: &[Vec<usize>]) -> usize {
        let n = adj.len();
        (0u32..1 << n)
            .filter(|mask| {
                (0..n).all(|v| mask & (1 << v) == 0 || adj[v].iter().all(|&u| mask & (1 << u) == 0))
            })
            .map(|mask| mask.count_ones() as usize)
            .max()
            .unwrap()
    }

    #[test]
    fn no_edges_keeps_everything() {
        let adj = graph(4, &[]);
        assert_eq!(
            maximum_independent_set(&adj, &[0, 1, 2, 3]),
            vec![0, 1, 2, 3]
        );
    }

    #[test]
    fn single_edge_follows_preference() {
        let adj = graph(2, &[(0, 1)]);
        assert_eq!(maximum_independent_set(&adj, &[1, 0]), vec![1]);
        assert_eq!(maximum_independent_set(&adj, &[0, 1]), vec![0]);
    }

    #[test]
    fn path_keeps_ends() {
        let adj = graph(3, &[(0, 1), (1, 2)]);
        let mut set = maximum_independent_set(&adj, &[1, 0, 2]);
        set.sort();
        assert_eq!(set, vec![0, 2]);
    }

    #[test]
    fn odd_cycle_uses_exact_search() {
        let adj = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        assert!(!is_bipartite(&adj));
        assert_eq!(independence_number(&adj, &[true; 5]), 2);
        let set = maximum_independent_set(&adj, &[0, 1, 2, 3, 4]);
        assert_eq!(set, vec![0, 2]);
    }

    #[test]
    fn konig_matches_brute_force_on_grids() {
        // 3x3 grid graph is bipartite with independence number 5.
        let mut edges = Vec::new();
        for r in 0..3 {
            for c in 0..3 {
                let v = r * 3 + c;
                if c < 2 {
                    edges.push((v, v + 1));
                }
                if r < 2 {
                    edges.push((v, v + 3));
                }
            }
        }
        let adj = graph(9, &edges);
        assert!(is_bipartite(&adj));
        assert_eq!(independence_number(&adj, &[true; 9]), 5);
        assert_eq!(brute_force(&adj), 5);
    }

    #[test]
    fn complete_bipartite() {
        let edges: Vec<_> = (0..3).flat_map(|a| (3..7).map(move |b| (a, b))).collect();
        let adj = graph(7, &edges);
        assert_eq!(independence_number(&adj, &[true; 7]), 4);
        let mut set = maximum_independent_set(&adj, &[0, 1, 2, 3, 4, 5, 6]);
        set.sort();
        assert_eq!(set, vec![3, 4, 5, 6]);
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn agrees_with_brute_force(n in 1usize..12, raw in proptest::collection::vec((0usize..12, 0usize..12), 0..30)) {
            let edges: Vec<_> = raw.into_iter().filter(|&(a, b)| a < n && b < n && a != b).collect();
            let adj = graph(n, &edges);
            let size = independence_number(&adj, &vec![true; n]);
            prop_assert_eq!(size, brute_force(&adj));
            let pref: Vec<usize> = (0..n).rev().collect();
            let set = maximum_independent_set(&adj, &pref);
            prop_assert_eq!(set.len(), size);
            for &a in &set {
                for &b in &set {
                    prop_assert!(!adj[a].contains(&b));
                }
            }
        }
    }
}
