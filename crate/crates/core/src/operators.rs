//! The doubly stochastic graph matrix `B = (I + L)^{-1}` and its Neumann
//! approximations.
//!
//! With `D̃ = I + D` and the substochastic transition matrix `P = D̃^{-1} A`,
//!
//! ```text
//! B    = Σ_{k≥0}  P^k D̃^{-1}
//! B_K  = Σ_{k≤K}  P^k D̃^{-1}                  (truncated)
//! B̂_K  = B_K + diag(P^{K+1} 1)                 (mass compensated)
//! ```
//!
//! Row `i` of `P` sums to `d_i / (d_i + 1) < 1`, so the series converges and
//! `B_K 1 = 1 - P^{K+1} 1`. The compensated operator folds that missing mass
//! back onto the diagonal, making every row sum exactly one again.
//!
//! [`exact_dsm`], [`truncated_dsm`] and [`compensated_dsm`] materialize
//! `n x n` matrices and refuse to run above the [`OracleCap`]. [`propagate`]
//! applies either approximation to a feature matrix in `O(K |E| f)` without
//! forming any dense operator.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Node-count ceiling for the `O(n^3)` / `O(n^2)` dense paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCap(pub usize);

impl OracleCap {
    pub const DEFAULT: OracleCap = OracleCap(2000);

    pub fn check(self, n: usize) -> Result<()> {
        if n > self.0 {
            Err(Error::OracleCapExceeded { n, cap: self.0 })
        } else {
            Ok(())
        }
    }
}

impl Default for OracleCap {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Truncated,
    Compensated,
}

/// How [`propagate_with`] distributes rows. Both modes run the identical
/// per-row kernel, so their outputs agree bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Sequential,
    Parallel,
}

/// `P = D̃^{-1} A`, applied through the CSR structure.
#[derive(Debug, Clone)]
pub struct TransitionOperator<'g> {
    graph: &'g Graph,
    inv_aug_degree: Vec<f64>,
}

impl<'g> TransitionOperator<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        let inv_aug_degree = (0..graph.node_count())
            .map(|i| 1.0 / (graph.degree(i) as f64 + 1.0))
            .collect();
        Self {
            graph,
            inv_aug_degree,
        }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    /// Entries `1 / (d_i + 1)`.
    pub fn inv_aug_degree(&self) -> &[f64] {
        &self.inv_aug_degree
    }

    /// `P x` for an `n x f` matrix.
    pub fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.graph.node_count();
        check_rows(n, x)?;
        let f = x.cols();
        let mut out = DenseMatrix::zeros(n, f);
        for i in 0..n {
            self.apply_row(i, x.as_slice(), f, out.row_mut(i));
        }
        Ok(out)
    }

    /// `out = P v` for vectors.
    pub fn apply_vec(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let s: f64 = self.graph.neighbors(i).iter().map(|&l| v[l]).sum();
            *o = s * self.inv_aug_degree[i];
        }
    }

    /// Row `i` of `P x`, where `x` is a row-major buffer with `f` columns.
    #[inline]
    fn apply_row(&self, i: usize, x: &[f64], f: usize, out: &mut [f64]) {
        out.fill(0.0);
        for &l in self.graph.neighbors(i) {
            for (o, v) in out.iter_mut().zip(&x[l * f..(l + 1) * f]) {
                *o += v;
            }
        }
        let w = self.inv_aug_degree[i];
        for o in out.iter_mut() {
            *o *= w;
        }
    }
}

/// `m = P^{K+1} 1`: the walk mass that has not terminated after `K + 1`
/// steps, equal to the row-sum deficit of `B_K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualMass {
    pub values: Vec<f64>,
    pub order: usize,
}

impl ResidualMass {
    /// Single CSV column with header `m`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m\n");
        for v in &self.values {
            out.push_str(&crate::dense::format_f64(*v));
            out.push('\n');
        }
        out
    }
}

/// Residual mass for truncation order `k`, via `k + 1` sparse products.
pub fn residual_mass(g: &Graph, k: usize) -> ResidualMass {
    let t = TransitionOperator::new(g);
    let mut m = vec![1.0; g.node_count()];
    let mut next = vec![0.0; g.node_count()];
    for _ in 0..=k {
        t.apply_vec(&m, &mut next);
        std::mem::swap(&mut m, &mut next);
    }
    ResidualMass { values: m, order: k }
}

/// `(d_max / (d_max + 1))^{K+1}`, the infinity-norm bound on `B - B_K`.
pub fn error_bound(d_max: usize, k: usize) -> f64 {
    let r = d_max as f64 / (d_max as f64 + 1.0);
    r.powi(k as i32 + 1)
}

/// Exact `B = (I + L)^{-1}` by dense LU inversion.
pub fn exact_dsm(g: &Graph, cap: OracleCap) -> Result<DenseMatrix> {
    cap.check(g.node_count())?;
    modified_laplacian(g).inverse()
}

/// Dense `I + D - A`.
pub fn modified_laplacian(g: &Graph) -> DenseMatrix {
    let n = g.node_count();
    let mut m = DenseMatrix::identity(n);
    for i in 0..n {
        m[(i, i)] += g.degree(i) as f64;
        for &j in g.neighbors(i) {
            m[(i, j)] = -1.0;
        }
    }
    m
}

/// `‖(I + L) B - I‖_∞`, computed sparsely.
pub fn inverse_residual(g: &Graph, b: &DenseMatrix) -> Result<f64> {
    let n = g.node_count();
    check_rows(n, b)?;
    let mut worst = 0.0f64;
    let mut row = vec![0.0; b.cols()];
    for i in 0..n {
        let scale = 1.0 + g.degree(i) as f64;
        for (r, v) in row.iter_mut().zip(b.row(i)) {
            *r = scale * v;
        }
        for &l in g.neighbors(i) {
            for (r, v) in row.iter_mut().zip(b.row(l)) {
                *r -= v;
            }
        }
        if i < row.len() {
            row[i] -= 1.0;
        }
        worst = worst.max(row.iter().map(|v| v.abs()).sum());
    }
    Ok(worst)
}

/// Successive truncation orders `B_0, B_1, ...` materialized incrementally,
/// one CSR-times-dense pass per order.
///
/// Terms are accumulated from nonnegative values only, so an entry whose
/// hop distance exceeds the current order is an exact `0.0`.
pub struct NeumannSeries<'g> {
    transition: TransitionOperator<'g>,
    order: usize,
    term: DenseMatrix,
    sum: DenseMatrix,
    mass: Vec<f64>,
}

impl<'g> NeumannSeries<'g> {
    /// Starts at order 0: `B_0 = D̃^{-1}`.
    pub fn new(g: &'g Graph, cap: OracleCap) -> Result<Self> {
        cap.check(g.node_count())?;
        let transition = TransitionOperator::new(g);
        let term = DenseMatrix::from_diagonal(transition.inv_aug_degree());
        let sum = term.clone();
        let ones = vec![1.0; g.node_count()];
        let mut mass = vec![0.0; g.node_count()];
        transition.apply_vec(&ones, &mut mass);
        Ok(Self {
            transition,
            order: 0,
            term,
            sum,
            mass,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `B_K` for the current order.
    pub fn truncated(&self) -> &DenseMatrix {
        &self.sum
    }

    /// `P^{K+1} 1` for the current order.
    pub fn residual(&self) -> ResidualMass {
        ResidualMass {
            values: self.mass.clone(),
            order: self.order,
        }
    }

    /// `B̂_K` for the current order.
    pub fn compensated(&self) -> DenseMatrix {
        let mut out = self.sum.clone();
        for (i, m) in self.mass.iter().enumerate() {
            out[(i, i)] += m;
        }
        out
    }

    /// Moves to order `K + 1`.
    pub fn advance(&mut self) {
        let next = self
            .transition
            .apply(&self.term)
            .expect("term has graph dimensions");
        for (s, t) in self.sum.as_mut_slice().iter_mut().zip(next.as_slice()) {
            *s += t;
        }
        self.term = next;
        let mut m = vec![0.0; self.mass.len()];
        self.transition.apply_vec(&self.mass, &mut m);
        self.mass = m;
        self.order += 1;
    }

    pub fn advance_to(&mut self, k: usize) {
        while self.order < k {
            self.advance();
        }
    }
}

/// Materialized `B_K`.
pub fn truncated_dsm(g: &Graph, k: usize, cap: OracleCap) -> Result<DenseMatrix> {
    let mut series = NeumannSeries::new(g, cap)?;
    series.advance_to(k);
    Ok(series.sum)
}

/// Materialized `B̂_K = B_K + diag(P^{K+1} 1)`.
pub fn compensated_dsm(g: &Graph, k: usize, cap: OracleCap) -> Result<DenseMatrix> {
    let mut series = NeumannSeries::new(g, cap)?;
    series.advance_to(k);
    Ok(series.compensated())
}

/// Streams `B_K z0` or `B̂_K z0` sequentially. See [`propagate_with`].
pub fn propagate(g: &Graph, k: usize, z0: &DenseMatrix, mode: Mode) -> Result<DenseMatrix> {
    propagate_with(g, k, z0, mode, Execution::Sequential)
}

/// Runs the synchronous recurrences
///
/// ```text
/// S(0) = D̃^{-1} Z0          m(0) = 1
/// S(k) = P S(k-1) + S(0)     m(k) = P m(k-1)
/// ```
///
/// and returns `S(K)` (truncated) or `S(K) + diag(m(K+1)) Z0`
/// (compensated). Memory is three `n x f` buffers; work is `O(K |E| f)`.
pub fn propagate_with(
    g: &Graph,
    k: usize,
    z0: &DenseMatrix,
    mode: Mode,
    exec: Execution,
) -> Result<DenseMatrix> {
    let n = g.node_count();
    check_rows(n, z0)?;
    let f = z0.cols();
    let t = TransitionOperator::new(g);
    let inv = t.inv_aug_degree();

    let mut s0 = z0.clone();
    for i in 0..n {
        let w = inv[i];
        for v in s0.row_mut(i) {
            *v *= w;
        }
    }

    let mut cur = s0.clone();
    let mut next = DenseMatrix::zeros(n, f);
    let track_mass = mode == Mode::Compensated;
    let mut mass = if track_mass { vec![1.0; n] } else { Vec::new() };
    let mut mass_next = vec![0.0; mass.len()];

    let step = |i: usize, out: &mut [f64], cur: &[f64]| {
        t.apply_row(i, cur, f, out);
        for (o, s) in out.iter_mut().zip(s0.row(i)) {
            *o += s;
        }
    };

    for _ in 0..k {
        match exec {
            Execution::Sequential => {
                let src = cur.as_slice();
                for (i, out) in next.as_mut_slice().chunks_mut(f.max(1)).enumerate().take(n) {
                    step(i, out, src);
                }
            }
            Execution::Parallel => {
                let src = cur.as_slice();
                next.as_mut_slice()
                    .par_chunks_mut(f.max(1))
                    .enumerate()
                    .for_each(|(i, out)| step(i, out, src));
            }
        }
        std::mem::swap(&mut cur, &mut next);
        if track_mass {
            t.apply_vec(&mass, &mut mass_next);
            std::mem::swap(&mut mass, &mut mass_next);
        }
    }

    if track_mass {
        // m(K+1)
        t.apply_vec(&mass, &mut mass_next);
        for i in 0..n {
            let m = mass_next[i];
            for (o, z) in cur.row_mut(i).iter_mut().zip(z0.row(i)) {
                *o += m * z;
            }
        }
    }
    Ok(cur)
}

fn check_rows(n: usize, x: &DenseMatrix) -> Result<()> {
    if x.rows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.rows(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    const CAP: OracleCap = OracleCap::DEFAULT;

    fn k3() -> Graph {
        build_graph(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }
    fn p2() -> Graph {
        build_graph(2, &[(0, 1)]).unwrap()
    }
    fn p3() -> Graph {
        build_graph(3, &[(0, 1), (1, 2)]).unwrap()
    }

    fn assert_close(a: &DenseMatrix, b: &DenseMatrix, tol: f64) {
        let d = a.max_abs_diff(b).unwrap();
        assert!(d <= tol, "max diff {d} > {tol}\n{a:?}\n{b:?}");
    }

    fn filled(n: usize, diag: f64, off: f64) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = if i == j { diag } else { off };
            }
        }
        m
    }

    #[test]
    fn transition_examples() {
        let g = k3();
        let t = TransitionOperator::new(&g);
        let y = t.apply(&DenseMatrix::column_vector(&[1.0; 3])).unwrap();
        assert_close(&y, &DenseMatrix::column_vector(&[2.0 / 3.0; 3]), 1e-15);

        let g = p3();
        let y = TransitionOperator::new(&g)
            .apply(&DenseMatrix::column_vector(&[1.0, 0.0, 0.0]))
            .unwrap();
        assert_close(&y, &DenseMatrix::column_vector(&[0.0, 1.0 / 3.0, 0.0]), 1e-15);

        let g = Graph::empty(2);
        let x = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(TransitionOperator::new(&g).apply(&x).unwrap(), DenseMatrix::zeros(2, 2));

        assert!(matches!(
            TransitionOperator::new(&k3()).apply(&DenseMatrix::zeros(2, 1)),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn exact_examples() {
        assert_close(&exact_dsm(&k3(), CAP).unwrap(), &filled(3, 0.5, 0.25), 1e-15);
        let expected = DenseMatrix::from_rows(&[[2.0 / 3.0, 1.0 / 3.0], [1.0 / 3.0, 2.0 / 3.0]]).unwrap();
        assert_close(&exact_dsm(&p2(), CAP).unwrap(), &expected, 1e-15);
        let expected = DenseMatrix::from_rows(&[
            [5.0 / 8.0, 2.0 / 8.0, 1.0 / 8.0],
            [2.0 / 8.0, 4.0 / 8.0, 2.0 / 8.0],
            [1.0 / 8.0, 2.0 / 8.0, 5.0 / 8.0],
        ])
        .unwrap();
        let b = exact_dsm(&p3(), CAP).unwrap();
        assert_close(&b, &expected, 1e-15);
        assert!(inverse_residual(&p3(), &b).unwrap() < 1e-14);
    }

    #[test]
    fn oracle_cap_is_enforced() {
        let g = Graph::empty(5);
        let cap = OracleCap(4);
        let err = Error::OracleCapExceeded { n: 5, cap: 4 };
        assert_eq!(exact_dsm(&g, cap), Err(err.clone()));
        assert_eq!(truncated_dsm(&g, 1, cap), Err(err.clone()));
        assert_eq!(compensated_dsm(&g, 1, cap), Err(err));
    }

    #[test]
    fn truncated_examples() {
        assert_close(&truncated_dsm(&k3(), 1, CAP).unwrap(), &filled(3, 1.0 / 3.0, 1.0 / 9.0), 1e-15);
        let b = truncated_dsm(&p3(), 1, CAP).unwrap();
        assert_eq!(b[(0, 2)], 0.0);
        assert_eq!(b[(2, 0)], 0.0);
        let g = build_graph(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(
            truncated_dsm(&g, 0, CAP).unwrap(),
            DenseMatrix::from_diagonal(&[0.25, 0.5, 0.5, 0.5])
        );
    }

    #[test]
    fn residual_examples() {
        let m = residual_mass(&k3(), 1);
        assert_eq!(m.order, 1);
        for v in m.values {
            assert!((v - 4.0 / 9.0).abs() < 1e-15);
        }
        assert_eq!(residual_mass(&p2(), 1).values, vec![0.25, 0.25]);
        assert_eq!(residual_mass(&Graph::empty(1), 3).values, vec![0.0]);
        assert_eq!(residual_mass(&p2(), 1).to_csv(), "m\n2.5000000000000000e-1\n2.5000000000000000e-1\n");
    }

    #[test]
    fn compensated_examples() {
        assert_close(&compensated_dsm(&k3(), 1, CAP).unwrap(), &filled(3, 7.0 / 9.0, 1.0 / 9.0), 1e-15);
        assert_close(&compensated_dsm(&k3(), 0, CAP).unwrap(), &DenseMatrix::identity(3), 1e-15);
        let expected = DenseMatrix::from_rows(&[[0.75, 0.25], [0.25, 0.75]]).unwrap();
        assert_close(&compensated_dsm(&p2(), 1, CAP).unwrap(), &expected, 1e-15);
    }

    #[test]
    fn propagate_examples() {
        let z = DenseMatrix::from_rows(&[[1.0, -2.0], [0.5, 3.0], [4.0, 0.0]]).unwrap();
        for mode in [Mode::Truncated, Mode::Compensated] {
            for k in [0, 1, 5] {
                assert_eq!(propagate(&Graph::empty(3), k, &z, mode).unwrap(), z);
            }
        }

        let out = propagate(&k3(), 1, &DenseMatrix::identity(3), Mode::Compensated).unwrap();
        assert_close(&out, &compensated_dsm(&k3(), 1, CAP).unwrap(), 1e-15);

        let out = propagate(&p2(), 1, &DenseMatrix::column_vector(&[1.0, 0.0]), Mode::Truncated).unwrap();
        assert_close(&out, &DenseMatrix::column_vector(&[0.5, 0.25]), 1e-15);

        assert!(matches!(
            propagate(&p2(), 1, &DenseMatrix::zeros(3, 1), Mode::Truncated),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn propagate_zero_columns() {
        let out = propagate(&p3(), 3, &DenseMatrix::zeros(3, 0), Mode::Compensated).unwrap();
        assert_eq!((out.rows(), out.cols()), (3, 0));
    }

    #[test]
    fn bound_examples() {
        assert!((error_bound(2, 3) - 16.0 / 81.0).abs() < 1e-15);
        assert_eq!(error_bound(0, 0), 0.0);
        assert_eq!(error_bound(0, 7), 0.0);
        assert_eq!(error_bound(1, 1), 0.25);
    }

    #[test]
    fn regular_graphs_attain_bound() {
        for (g, k) in [(k3(), 1usize), (p2(), 1)] {
            let b = exact_dsm(&g, CAP).unwrap();
            let bk = truncated_dsm(&g, k, CAP).unwrap();
            let err = b.sub(&bk).unwrap().inf_norm();
            assert!((err - error_bound(g.max_degree(), k)).abs() < 1e-10);
        }
    }

    #[test]
    fn series_matches_direct_construction() {
        let g = p3();
        let mut s = NeumannSeries::new(&g, CAP).unwrap();
        s.advance_to(4);
        assert_eq!(s.order(), 4);
        assert_eq!(s.truncated(), &truncated_dsm(&g, 4, CAP).unwrap());
        assert_eq!(s.residual(), residual_mass(&g, 4));
    }
}
