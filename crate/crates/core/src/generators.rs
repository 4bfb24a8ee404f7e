//! Seeded synthetic graph models.
//!
//! All models draw from [`Rng`], so `(model, seed)` fully determines the
//! resulting edge set.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum GraphModel {
    /// Erdős–Rényi G(n, p).
    Er { n: usize, p: f64 },
    /// Barabási–Albert: complete seed on `m` nodes, then `m` preferential
    /// attachments per new node, without replacement.
    Ba { n: usize, m: usize },
    /// Watts–Strogatz: ring lattice with `k/2` neighbors per side, far
    /// endpoints rewired with probability `beta`.
    Ws { n: usize, k: usize, beta: f64 },
    /// Stochastic block model over consecutive blocks of the given sizes.
    Sbm {
        sizes: Vec<usize>,
        p_in: f64,
        p_out: f64,
    },
    /// Random geometric graph on the unit square.
    Rgg { n: usize, radius: f64 },
}

impl GraphModel {
    pub fn node_count(&self) -> usize {
        match self {
            GraphModel::Er { n, .. }
            | GraphModel::Ba { n, .. }
            | GraphModel::Ws { n, .. }
            | GraphModel::Rgg { n, .. } => *n,
            GraphModel::Sbm { sizes, .. } => sizes.iter().sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must lie in [0, 1], got {p}")))
            }
        };
        match *self {
            GraphModel::Er { p, .. } => prob("p", p),
            GraphModel::Ba { n, m } => {
                if m >= 1 && m < n {
                    Ok(())
                } else {
                    Err(Error::InvalidParams(format!(
                        "BA requires 1 <= m < n, got m={m}, n={n}"
                    )))
                }
            }
            GraphModel::Ws { n, k, beta } => {
                if k % 2 != 0 {
                    return Err(Error::InvalidParams(format!("WS k must be even, got {k}")));
                }
                if k >= n {
                    return Err(Error::InvalidParams(format!(
                        "WS requires k < n, got k={k}, n={n}"
                    )));
                }
                prob("beta", beta)
            }
            GraphModel::Sbm {
                ref sizes,
                p_in,
                p_out,
            } => {
                if sizes.is_empty() {
                    return Err(Error::InvalidParams("SBM needs at least one block".into()));
                }
                prob("p_in", p_in)?;
                prob("p_out", p_out)
            }
            GraphModel::Rgg { radius, .. } => {
                if radius > 0.0 && radius.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParams(format!(
                        "RGG radius must be positive, got {radius}"
                    )))
                }
            }
        }
    }

    /// Short label such as `ba(n=200,m=3)`.
    pub fn label(&self) -> String {
        match self {
            GraphModel::Er { n, p } => format!("er(n={n},p={p})"),
            GraphModel::Ba { n, m } => format!("ba(n={n},m={m})"),
            GraphModel::Ws { n, k, beta } => format!("ws(n={n},k={k},beta={beta})"),
            GraphModel::Sbm { sizes, p_in, p_out } => {
                let s: Vec<String> = sizes.iter().map(|s| s.to_string()).collect();
                format!("sbm(sizes={},p_in={p_in},p_out={p_out})", s.join("+"))
            }
            GraphModel::Rgg { n, radius } => format!("rgg(n={n},radius={radius})"),
        }
    }
}

/// Draws a graph from `model` using the stream seeded by `seed`.
pub fn generate_graph(model: &GraphModel, seed: u64) -> Result<Graph> {
    model.validate()?;
    let mut rng = Rng::new(seed);
    let n = model.node_count();
    let edges = match *model {
        GraphModel::Er { n, p } => erdos_renyi(n, p, &mut rng),
        GraphModel::Ba { n, m } => barabasi_albert(n, m, &mut rng),
        GraphModel::Ws { n, k, beta } => watts_strogatz(n, k, beta, &mut rng),
        GraphModel::Sbm {
            ref sizes,
            p_in,
            p_out,
        } => stochastic_block(sizes, p_in, p_out, &mut rng),
        GraphModel::Rgg { n, radius } => random_geometric(n, radius, &mut rng),
    };
    Graph::from_edges(n, &edges)
}

/// Geometric skipping over the lower triangle (Batagelj–Brandes), so the cost
/// is linear in nodes plus edges.
fn erdos_renyi(n: usize, p: f64, rng: &mut Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    if n < 2 || p <= 0.0 {
        return edges;
    }
    if p >= 1.0 {
        for v in 1..n {
            for w in 0..v {
                edges.push((w, v));
            }
        }
        return edges;
    }
    let log_q = (1.0 - p).ln();
    let mut v: usize = 1;
    let mut w: i64 = -1;
    while v < n {
        let r = rng.uniform();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((w as usize, v));
        }
    }
    edges
}

fn barabasi_albert(n: usize, m: usize, rng: &mut Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(m * (m - 1) / 2 + (n - m) * m);
    // One entry per edge endpoint: sampling uniformly from it is sampling
    // proportionally to degree.
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * edges.capacity());
    for v in 1..m {
        for u in 0..v {
            edges.push((u, v));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(m);
    for t in m..n {
        chosen.clear();
        while chosen.len() < m {
            let target = if endpoints.is_empty() {
                // m = 1 with a degree-free seed node.
                rng.index(t)
            } else {
                endpoints[rng.index(endpoints.len())]
            };
            if !chosen.contains(&target) {
                chosen.push(target);
            }
        }
        for &u in &chosen {
            edges.push((u, t));
            endpoints.push(u);
            endpoints.push(t);
        }
    }
    edges
}

fn watts_strogatz(n: usize, k: usize, beta: f64, rng: &mut Rng) -> Vec<(usize, usize)> {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for i in 0..n {
        for j in 1..=k / 2 {
            let v = (i + j) % n;
            adj[i].insert(v);
            adj[v].insert(i);
        }
    }
    for j in 1..=k / 2 {
        for i in 0..n {
            let v = (i + j) % n;
            if rng.uniform() >= beta {
                continue;
            }
            if !adj[i].contains(&v) || adj[i].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.index(n);
                if w != i && !adj[i].contains(&w) {
                    break w;
                }
            };
            adj[i].remove(&v);
            adj[v].remove(&i);
            adj[i].insert(w);
            adj[w].insert(i);
        }
    }
    adjacency_to_edges(&adj)
}

fn stochastic_block(sizes: &[usize], p_in: f64, p_out: f64, rng: &mut Rng) -> Vec<(usize, usize)> {
    let block: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
        .collect();
    let n = block.len();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if block[u] == block[v] { p_in } else { p_out };
            if rng.uniform() < p {
                edges.push((u, v));
            }
        }
    }
    edges
}

fn random_geometric(n: usize, radius: f64, rng: &mut Rng) -> Vec<(usize, usize)> {
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.uniform(), rng.uniform())).collect();
    let r2 = radius * radius;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let dx = pts[u].0 - pts[v].0;
            let dy = pts[u].1 - pts[v].1;
            if dx * dx + dy * dy <= r2 {
                edges.push((u, v));
            }
        }
    }
    edges
}

fn adjacency_to_edges(adj: &[BTreeSet<usize>]) -> Vec<(usize, usize)> {
    adj.iter()
        .enumerate()
        .flat_map(|(u, nbrs)| nbrs.range(u + 1..).map(move |&v| (u, v)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_extremes() {
        let full = generate_graph(&GraphModel::Er { n: 10, p: 1.0 }, 5).unwrap();
        assert_eq!(full.edge_count(), 45);
        let none = generate_graph(&GraphModel::Er { n: 10, p: 0.0 }, 5).unwrap();
        assert_eq!(none.edge_count(), 0);
    }

    #[test]
    fn er_density_is_plausible() {
        let g = generate_graph(&GraphModel::Er { n: 400, p: 0.05 }, 1).unwrap();
        let expected = 0.05 * 400.0 * 399.0 / 2.0;
        let e = g.edge_count() as f64;
        assert!((e - expected).abs() < 0.1 * expected, "{e} vs {expected}");
    }

    #[test]
    fn ws_without_rewiring_is_ring_lattice() {
        let g = generate_graph(
            &GraphModel::Ws {
                n: 10,
                k: 4,
                beta: 0.0,
            },
            9,
        )
        .unwrap();
        assert_eq!(g.edge_count(), 20);
        assert!(g.degrees().iter().all(|&d| d == 4));
        assert!(g.has_edge(0, 9) && g.has_edge(0, 8) && !g.has_edge(0, 5));
    }

    #[test]
    fn ws_rewiring_keeps_edge_count() {
        let g = generate_graph(
            &GraphModel::Ws {
                n: 50,
                k: 6,
                beta: 0.5,
            },
            2,
        )
        .unwrap();
        assert_eq!(g.edge_count(), 150);
    }

    #[test]
    fn ba_edge_count() {
        let g = generate_graph(&GraphModel::Ba { n: 5, m: 2 }, 3).unwrap();
        assert_eq!(g.edge_count(), 7);
        let g = generate_graph(&GraphModel::Ba { n: 200, m: 3 }, 3).unwrap();
        assert_eq!(g.edge_count(), 3 + 197 * 3);
        let g = generate_graph(&GraphModel::Ba { n: 20, m: 1 }, 3).unwrap();
        assert_eq!(g.edge_count(), 19);
    }

    #[test]
    fn sbm_blocks() {
        let g = generate_graph(
            &GraphModel::Sbm {
                sizes: vec![5, 5],
                p_in: 1.0,
                p_out: 0.0,
            },
            0,
        )
        .unwrap();
        assert_eq!(g.node_count(), 10);
        assert_eq!(g.edge_count(), 20);
        assert!(!g.has_edge(0, 5));
    }

    #[test]
    fn rgg_large_radius_is_complete() {
        let g = generate_graph(&GraphModel::Rgg { n: 8, radius: 1.5 }, 4).unwrap();
        assert_eq!(g.edge_count(), 28);
    }

    #[test]
    fn invalid_params() {
        let bad = [
            GraphModel::Er { n: 5, p: 1.5 },
            GraphModel::Ba { n: 5, m: 5 },
            GraphModel::Ba { n: 5, m: 0 },
            GraphModel::Ws { n: 10, k: 3, beta: 0.1 },
            GraphModel::Ws { n: 4, k: 4, beta: 0.1 },
            GraphModel::Ws { n: 10, k: 4, beta: -0.1 },
            GraphModel::Sbm { sizes: vec![], p_in: 0.5, p_out: 0.1 },
            GraphModel::Sbm { sizes: vec![3], p_in: 0.5, p_out: 2.0 },
            GraphModel::Rgg { n: 4, radius: 0.0 },
        ];
        for m in bad {
            assert!(
                matches!(generate_graph(&m, 0), Err(Error::InvalidParams(_))),
                "{m:?}"
            );
        }
    }

    #[test]
    fn determinism() {
        let models = [
            GraphModel::Er { n: 60, p: 0.1 },
            GraphModel::Ba { n: 60, m: 3 },
            GraphModel::Ws { n: 60, k: 4, beta: 0.3 },
            GraphModel::Sbm { sizes: vec![20, 40], p_in: 0.3, p_out: 0.02 },
            GraphModel::Rgg { n: 60, radius: 0.2 },
        ];
        for m in models {
            let a = generate_graph(&m, 17).unwrap();
            let b = generate_graph(&m, 17).unwrap();
            assert_eq!(a.col_indices(), b.col_indices());
            let c = generate_graph(&m, 18).unwrap();
            assert_ne!(a, c, "{m:?}");
        }
    }
}
