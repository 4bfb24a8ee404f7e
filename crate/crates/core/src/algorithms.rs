//! Hop distances and Brandes betweenness.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Distance sentinel for nodes outside the source's component.
pub const UNREACHABLE: usize = usize::MAX;

pub fn bfs_distances(g: &Graph, source: usize) -> Result<Vec<usize>> {
    let n = g.node_count();
    if source >= n {
        return Err(Error::IndexOutOfRange { index: source, n });
    }
    let mut dist = vec![UNREACHABLE; n];
    let mut queue = VecDeque::with_capacity(n);
    dist[source] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let next = dist[u] + 1;
        for &v in g.neighbors(u) {
            if dist[v] == UNREACHABLE {
                dist[v] = next;
                queue.push_back(v);
            }
        }
    }
    Ok(dist)
}

/// Row `i` is `bfs_distances(g, i)`.
pub fn all_pairs_distances(g: &Graph) -> Vec<Vec<usize>> {
    (0..g.node_count())
        .map(|s| bfs_distances(g, s).expect("source in range"))
        .collect()
}

pub fn component_count(g: &Graph) -> usize {
    let n = g.node_count();
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        stack.push(s);
        while let Some(u) = stack.pop() {
            for &v in g.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    count
}

pub fn is_connected(g: &Graph) -> bool {
    component_count(g) <= 1
}

/// Normalized betweenness centrality, scaled by `2 / ((n-1)(n-2))` so every
/// value lies in `[0, 1]`. Graphs with fewer than three nodes give zeros.
pub fn betweenness(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut bc = vec![0.0; n];
    if n < 3 {
        return bc;
    }

    let mut stack = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![UNREACHABLE; n];
    let mut delta = vec![0.0f64; n];

    for s in 0..n {
        stack.clear();
        for p in preds.iter_mut() {
            p.clear();
        }
        sigma.fill(0.0);
        dist.fill(UNREACHABLE);
        delta.fill(0.0);

        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in g.neighbors(v) {
                if dist[w] == UNREACHABLE {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }

        while let Some(w) = stack.pop() {
            let coeff = (1.0 + delta[w]) / sigma[w];
            for &v in &preds[w] {
                delta[v] += sigma[v] * coeff;
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }

    // Each unordered pair was counted from both endpoints.
    let scale = 1.0 / ((n - 1) as f64 * (n - 2) as f64);
    for b in &mut bc {
        *b *= scale;
    }
    bc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    fn path3() -> Graph {
        build_graph(3, &[(0, 1), (1, 2)]).unwrap()
    }

    fn k3() -> Graph {
        build_graph(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn bfs_examples() {
        assert_eq!(bfs_distances(&path3(), 0).unwrap(), vec![0, 1, 2]);
        assert_eq!(bfs_distances(&k3(), 1).unwrap(), vec![1, 0, 1]);
        let iso = Graph::empty(2);
        assert_eq!(bfs_distances(&iso, 0).unwrap(), vec![0, UNREACHABLE]);
        assert_eq!(
            bfs_distances(&iso, 2),
            Err(Error::IndexOutOfRange { index: 2, n: 2 })
        );
    }

    #[test]
    fn betweenness_examples() {
        assert_eq!(betweenness(&path3()), vec![0.0, 1.0, 0.0]);
        assert_eq!(betweenness(&k3()), vec![0.0, 0.0, 0.0]);
        let star = build_graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(betweenness(&star), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(betweenness(&build_graph(2, &[(0, 1)]).unwrap()), vec![0.0, 0.0]);
    }

    #[test]
    fn betweenness_square_with_two_paths() {
        // 0-1-2-3-0: each opposite pair has two shortest paths.
        let c4 = build_graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        // Node 1 carries half of the (0,2) paths: 0.5 * 2/(3*2) = 1/6.
        for b in betweenness(&c4) {
            assert!((b - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn components() {
        assert_eq!(component_count(&Graph::empty(3)), 3);
        assert!(is_connected(&path3()));
        let g = build_graph(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(component_count(&g), 2);
        assert!(is_connected(&Graph::empty(0)));
    }
}
