use std::collections::VecDeque;

use dsm_core::algorithms::{all_pairs_distances, UNREACHABLE};
use dsm_core::analysis::{kendall_tau, materialize};
use dsm_core::spectral::{dsm_spectrum_from_laplacian, laplacian_spectrum, symmetric_eigenvalues};
use dsm_core::*;
use proptest::prelude::*;

const CAP: OracleCap = OracleCap::DEFAULT;

fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n, 0.0..=1.0f64, any::<u64>())
        .prop_map(|(n, p, seed)| generate_graph(&GraphModel::Er { n, p }, seed).unwrap())
}

fn arb_model() -> impl Strategy<Value = GraphModel> {
    prop_oneof![
        (2..40usize, 0.0..=1.0f64).prop_map(|(n, p)| GraphModel::Er { n, p }),
        (3..40usize, 1..3usize).prop_map(|(n, m)| GraphModel::Ba { n, m }),
        (6..40usize, 0.0..=1.0f64).prop_map(|(n, beta)| GraphModel::Ws { n, k: 4, beta }),
        (1..10usize, 1..10usize, 0.0..=1.0f64, 0.0..=0.3f64).prop_map(|(a, b, p_in, p_out)| {
            GraphModel::Sbm { sizes: vec![a, b], p_in, p_out }
        }),
        (1..40usize, 0.05..0.8f64).prop_map(|(n, radius)| GraphModel::Rgg { n, radius }),
    ]
}

fn features(n: usize, f: usize, seed: u64) -> DenseMatrix {
    analysis::gaussian_features(n, f, seed)
}

/// Betweenness by listing every simple path and keeping the shortest ones.
fn brute_force_betweenness(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut bc = vec![0.0; n];
    if n < 3 {
        return bc;
    }
    for s in 0..n {
        for t in s + 1..n {
            let mut paths: Vec<Vec<usize>> = Vec::new();
            let mut stack = vec![vec![s]];
            while let Some(path) = stack.pop() {
                let last = *path.last().unwrap();
                if last == t {
                    paths.push(path);
                    continue;
                }
                for &w in g.neighbors(last) {
                    if !path.contains(&w) {
                        let mut next = path.clone();
                        next.push(w);
                        stack.push(next);
                    }
                }
            }
            let Some(shortest) = paths.iter().map(Vec::len).min() else {
                continue;
            };
            let best: Vec<_> = paths.iter().filter(|p| p.len() == shortest).collect();
            for v in 0..n {
                if v == s || v == t {
                    continue;
                }
                let through = best.iter().filter(|p| p.contains(&v)).count();
                bc[v] += through as f64 / best.len() as f64;
            }
        }
    }
    let scale = 2.0 / ((n - 1) as f64 * (n - 2) as f64);
    bc.iter().map(|b| b * scale).collect()
}

#[test]
fn brandes_matches_path_enumeration() {
    for seed in 0..50 {
        let n = 3 + (seed as usize % 6);
        let g = generate_graph(&GraphModel::Er { n, p: 0.4 }, seed).unwrap();
        let fast = betweenness(&g);
        let slow = brute_force_betweenness(&g);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12, "seed {seed}: {fast:?} vs {slow:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csr_is_symmetric_and_sorted(model in arb_model(), seed in any::<u64>()) {
        let g = generate_graph(&model, seed).unwrap();
        let offs = g.row_offsets();
        prop_assert_eq!(offs[0], 0);
        prop_assert_eq!(offs[g.node_count()], 2 * g.edge_count());
        prop_assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
        let mut transpose: Vec<Vec<usize>> = vec![Vec::new(); g.node_count()];
        for i in 0..g.node_count() {
            let row = g.neighbors(i);
            prop_assert!(row.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(!row.contains(&i));
            for &j in row {
                transpose[j].push(i);
            }
        }
        for (i, col) in transpose.iter().enumerate() {
            prop_assert_eq!(col.as_slice(), g.neighbors(i));
        }
    }

    #[test]
    fn generators_are_deterministic(model in arb_model(), seed in any::<u64>()) {
        let a = generate_graph(&model, seed).unwrap();
        let b = generate_graph(&model, seed).unwrap();
        prop_assert_eq!(a.col_indices(), b.col_indices());
        prop_assert_eq!(a.row_offsets(), b.row_offsets());
        prop_assert_eq!(a.node_count(), model.node_count());
    }

    #[test]
    fn bfs_respects_edges(g in arb_graph(30), src in any::<prop::sample::Index>()) {
        let s = src.index(g.node_count());
        let dist = bfs_distances(&g, s).unwrap();
        prop_assert_eq!(dist[s], 0);
        for (u, v) in g.edges() {
            if dist[u] != UNREACHABLE || dist[v] != UNREACHABLE {
                prop_assert!(dist[u] != UNREACHABLE && dist[v] != UNREACHABLE);
                prop_assert!(dist[u] <= dist[v] + 1 && dist[v] <= dist[u] + 1);
            }
        }
    }

    #[test]
    fn edge_list_round_trip(g in arb_graph(25)) {
        let text = g.to_edge_list(&["generated".to_string()]);
        prop_assert_eq!(Graph::parse_edge_list(&text).unwrap(), g);
    }

    #[test]
    fn residual_mass_bounds(g in arb_graph(25), k in 0..15usize) {
        let a = residual_mass(&g, k);
        let b = residual_mass(&g, k + 1);
        for i in 0..g.node_count() {
            prop_assert!((0.0..1.0).contains(&a.values[i]));
            prop_assert!(b.values[i] <= a.values[i]);
            if g.degree(i) == 0 {
                prop_assert_eq!(a.values[i], 0.0);
            }
        }
    }

    #[test]
    fn telescoping_and_conservation(g in arb_graph(25), k in 0..12usize) {
        let bk = truncated_dsm(&g, k, CAP).unwrap();
        let bh = compensated_dsm(&g, k, CAP).unwrap();
        let m = residual_mass(&g, k);
        for (i, s) in bk.row_sums().iter().enumerate() {
            prop_assert!((s - (1.0 - m.values[i])).abs() <= 1e-12);
        }
        for s in bh.row_sums() {
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn operators_are_symmetric(g in arb_graph(25), k in 0..12usize) {
        prop_assert!(exact_dsm(&g, CAP).unwrap().symmetry_error() <= 1e-12);
        prop_assert!(truncated_dsm(&g, k, CAP).unwrap().symmetry_error() <= 1e-12);
        prop_assert!(compensated_dsm(&g, k, CAP).unwrap().symmetry_error() <= 1e-12);
    }

    #[test]
    fn hard_cutoff_and_diagonal_compensation(g in arb_graph(25), k in 0..8usize) {
        let bk = truncated_dsm(&g, k, CAP).unwrap();
        let bh = compensated_dsm(&g, k, CAP).unwrap();
        let dist = all_pairs_distances(&g);
        let n = g.node_count();
        for i in 0..n {
            for j in 0..n {
                if dist[i][j] == UNREACHABLE || dist[i][j] > k {
                    prop_assert_eq!(bk[(i, j)], 0.0);
                    prop_assert_eq!(bh[(i, j)], 0.0);
                }
                if i == j {
                    prop_assert!(bh[(i, i)] >= bk[(i, i)]);
                } else {
                    prop_assert_eq!(bh[(i, j)], bk[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn diagonal_strictly_dominates(g in arb_graph(25), k in 0..12usize) {
        for b in [truncated_dsm(&g, k, CAP).unwrap(), compensated_dsm(&g, k, CAP).unwrap()] {
            for i in 0..b.rows() {
                for j in 0..b.cols() {
                    if i != j {
                        prop_assert!(b[(i, i)] > b[(i, j)]);
                    }
                }
            }
        }
    }

    #[test]
    fn streaming_matches_dense(g in arb_graph(40), k in 0..10usize, f in 1..4usize, seed in any::<u64>()) {
        let z0 = features(g.node_count(), f, seed);
        for (mode, kind) in [(Mode::Truncated, analysis::OperatorKind::Truncated),
                             (Mode::Compensated, analysis::OperatorKind::Compensated)] {
            let dense = materialize(&g, kind, k, CAP).unwrap().matmul(&z0).unwrap();
            let streamed = propagate(&g, k, &z0, mode).unwrap();
            prop_assert!(streamed.max_abs_diff(&dense).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn parallel_agrees_with_sequential(g in arb_graph(60), k in 0..10usize, seed in any::<u64>()) {
        let z0 = features(g.node_count(), 3, seed);
        for mode in [Mode::Truncated, Mode::Compensated] {
            let a = propagate_with(&g, k, &z0, mode, Execution::Sequential).unwrap();
            let b = propagate_with(&g, k, &z0, mode, Execution::Parallel).unwrap();
            prop_assert!(a.max_abs_diff(&b).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn truncation_error_is_bounded_and_monotone(g in arb_graph(20)) {
        let b = exact_dsm(&g, CAP).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..15 {
            let err = b.sub(&truncated_dsm(&g, k, CAP).unwrap()).unwrap().inf_norm();
            prop_assert!(err <= error_bound(g.max_degree(), k) + 1e-12);
            prop_assert!(err <= prev + 1e-15);
            prev = err;
        }
    }

    #[test]
    fn dsm_eigenvalues_follow_laplacian(g in arb_graph(20)) {
        let direct = symmetric_eigenvalues(&exact_dsm(&g, CAP).unwrap()).unwrap();
        let mapped = dsm_spectrum_from_laplacian(&laplacian_spectrum(&g, CAP).unwrap()).unwrap();
        // `direct` is ascending, `mapped` descending.
        for (a, b) in direct.iter().rev().zip(&mapped) {
            prop_assert!((a - b).abs() <= 1e-8);
            prop_assert!(*b > 0.0 && *b <= 1.0 + 1e-8);
        }
    }

    #[test]
    fn kendall_tau_is_antisymmetric(x in prop::collection::vec(-1e3..1e3f64, 2..30),
                                    y in prop::collection::vec(-1e3..1e3f64, 30)) {
        let y = &y[..x.len()];
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        if let (Ok(a), Ok(b)) = (kendall_tau(&x, y), kendall_tau(&x, &neg)) {
            prop_assert!((a + b).abs() <= 1e-12);
            prop_assert!((-1.0..=1.0).contains(&a));
            prop_assert_eq!(kendall_tau(y, &x).unwrap(), a);
        }
    }

    #[test]
    fn dense_csv_round_trip(rows in 1..6usize, cols in 1..6usize, seed in any::<u64>()) {
        let m = features(rows, cols, seed);
        prop_assert_eq!(DenseMatrix::from_csv(&m.to_csv()).unwrap(), m);
    }
}

/// BFS hop counts from a plain queue over an adjacency matrix, used to
/// cross-check `all_pairs_distances` on a handful of fixed graphs.
#[test]
fn all_pairs_matches_matrix_bfs() {
    for seed in 0..10 {
        let g = generate_graph(&GraphModel::Ws { n: 12, k: 2, beta: 0.5 }, seed).unwrap();
        let n = g.node_count();
        let adj: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| g.has_edge(i, j)).collect()).collect();
        let all = all_pairs_distances(&g);
        for s in 0..n {
            let mut dist = vec![UNREACHABLE; n];
            dist[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for v in 0..n {
                    if adj[u][v] && dist[v] == UNREACHABLE {
                        dist[v] = dist[u] + 1;
                        q.push_back(v);
                    }
                }
            }
            assert_eq!(all[s], dist);
        }
    }
}
