//! Fixtures shared by the criterion benches.

use dsm_core::analysis::gaussian_features;
use dsm_core::{generate_graph, DenseMatrix, Graph, GraphModel};

/// Erdős–Rényi graph with the given mean degree.
pub fn er_graph(n: usize, mean_degree: f64, seed: u64) -> Graph {
    let p = (mean_degree / (n.max(2) - 1) as f64).min(1.0);
    generate_graph(&GraphModel::Er { n, p }, seed).expect("valid parameters")
}

pub fn ba_graph(n: usize, m: usize, seed: u64) -> Graph {
    generate_graph(&GraphModel::Ba { n, m }, seed).expect("valid parameters")
}

pub fn features(g: &Graph, f: usize, seed: u64) -> DenseMatrix {
    gaussian_features(g.node_count(), f, seed)
}
