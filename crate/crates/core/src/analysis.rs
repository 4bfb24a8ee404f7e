//! Diagnostics built on the operators: truncation error checks, rank
//! preservation, distance decay, Dirichlet energy and centrality
//! correlation. Each routine returns a serializable report.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::algorithms::{all_pairs_distances, betweenness, UNREACHABLE};
use crate::dense::{format_f64, DenseMatrix};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::operators::{
    error_bound, exact_dsm, propagate, Mode, NeumannSeries, OracleCap,
};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Exact,
    Truncated,
    Compensated,
    /// `D̂^{-1/2} (A + I) D̂^{-1/2}` with `D̂ = I + D`.
    Gcn,
}

impl OperatorKind {
    fn mode(self) -> Option<Mode> {
        match self {
            OperatorKind::Truncated => Some(Mode::Truncated),
            OperatorKind::Compensated => Some(Mode::Compensated),
            _ => None,
        }
    }
}

/// Materializes the exact, truncated or compensated operator.
pub fn materialize(g: &Graph, kind: OperatorKind, k: usize, cap: OracleCap) -> Result<DenseMatrix> {
    match kind {
        OperatorKind::Exact => exact_dsm(g, cap),
        OperatorKind::Truncated | OperatorKind::Compensated => {
            let mut s = NeumannSeries::new(g, cap)?;
            s.advance_to(k);
            Ok(if kind == OperatorKind::Truncated {
                s.truncated().clone()
            } else {
                s.compensated()
            })
        }
        OperatorKind::Gcn => Err(Error::InvalidParams(
            "the GCN operator is only applied, never materialized".into(),
        )),
    }
}

/// `n x f` matrix of independent standard normals, filled row by row.
pub fn gaussian_features(n: usize, f: usize, seed: u64) -> DenseMatrix {
    let mut rng = Rng::new(seed);
    let data = (0..n * f).map(|_| rng.normal()).collect();
    DenseMatrix::from_vec(n, f, data).expect("shape matches")
}

/// `½ Tr(Xᵀ L X)`, i.e. half the squared feature differences summed over
/// each undirected edge.
pub fn dirichlet_energy(g: &Graph, x: &DenseMatrix) -> Result<f64> {
    if x.rows() != g.node_count() {
        return Err(Error::DimensionMismatch {
            expected: g.node_count(),
            found: x.rows(),
        });
    }
    let mut total = 0.0;
    for (u, v) in g.edges() {
        total += x
            .row(u)
            .iter()
            .zip(x.row(v))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    Ok(0.5 * total)
}

/// One application of the renormalized GCN propagation matrix.
pub fn gcn_apply(g: &Graph, x: &DenseMatrix) -> Result<DenseMatrix> {
    let n = g.node_count();
    if x.rows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.rows(),
        });
    }
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|i| 1.0 / (g.degree(i) as f64 + 1.0).sqrt())
        .collect();
    let mut out = DenseMatrix::zeros(n, x.cols());
    for i in 0..n {
        let row = out.row_mut(i);
        let self_w = inv_sqrt[i] * inv_sqrt[i];
        for (o, v) in row.iter_mut().zip(x.row(i)) {
            *o = self_w * v;
        }
        for &j in g.neighbors(i) {
            let w = inv_sqrt[i] * inv_sqrt[j];
            for (o, v) in row.iter_mut().zip(x.row(j)) {
                *o += w * v;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrajectory {
    pub kind: OperatorKind,
    #[serde(rename = "K")]
    pub k: usize,
    /// `energies[t] = E(op^t x0)` for `t = 0..=steps`.
    pub energies: Vec<f64>,
}

impl EnergyTrajectory {
    pub fn initial(&self) -> f64 {
        self.energies[0]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,energy\n");
        for (t, e) in self.energies.iter().enumerate() {
            let _ = writeln!(out, "{t},{}", format_f64(*e));
        }
        out
    }
}

/// Energy after each of `steps` repeated applications of the chosen
/// operator. The exact operator is applied densely; the others stream.
pub fn energy_trajectory(
    g: &Graph,
    kind: OperatorKind,
    k: usize,
    x0: &DenseMatrix,
    steps: usize,
    cap: OracleCap,
) -> Result<EnergyTrajectory> {
    if steps == 0 {
        return Err(Error::InvalidParams("steps must be at least 1".into()));
    }
    let dense = match kind {
        OperatorKind::Exact => Some(exact_dsm(g, cap)?),
        _ => None,
    };
    let mut x = x0.clone();
    let mut energies = Vec::with_capacity(steps + 1);
    energies.push(dirichlet_energy(g, &x)?);
    for _ in 0..steps {
        x = match (kind, &dense) {
            (OperatorKind::Exact, Some(b)) => b.matmul(&x)?,
            (OperatorKind::Gcn, _) => gcn_apply(g, &x)?,
            (other, _) => propagate(g, k, &x, other.mode().expect("streamed kind"))?,
        };
        energies.push(dirichlet_energy(g, &x)?);
    }
    Ok(EnergyTrajectory { kind, k, energies })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub kind: OperatorKind,
    #[serde(rename = "K")]
    pub k: usize,
    /// Mean entry over ordered pairs at each hop distance; index 0 is the
    /// diagonal.
    pub mean_entry: Vec<f64>,
    pub counts: Vec<usize>,
}

impl DecayProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("distance,mean,count\n");
        for (d, (m, c)) in self.mean_entry.iter().zip(&self.counts).enumerate() {
            let _ = writeln!(out, "{d},{},{c}", format_f64(*m));
        }
        out
    }
}

/// Mean operator entry as a function of shortest-path distance. Pairs in
/// different components are skipped.
pub fn distance_decay_profile(
    g: &Graph,
    kind: OperatorKind,
    k: usize,
    cap: OracleCap,
) -> Result<DecayProfile> {
    let b = materialize(g, kind, k, cap)?;
    let dist = all_pairs_distances(g);
    let max_d = dist
        .iter()
        .flatten()
        .filter(|&&d| d != UNREACHABLE)
        .copied()
        .max()
        .unwrap_or(0);
    let mut sums = vec![0.0; max_d + 1];
    let mut counts = vec![0usize; max_d + 1];
    for (i, row) in dist.iter().enumerate() {
        for (j, &d) in row.iter().enumerate() {
            if d != UNREACHABLE {
                sums[d] += b[(i, j)];
                counts[d] += 1;
            }
        }
    }
    let mean_entry = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
        .collect();
    Ok(DecayProfile {
        kind,
        k,
        mean_entry,
        counts,
    })
}

/// Relative tolerance under which two values count as tied in
/// [`kendall_tau_with_ties`] when called from the rank reports.
pub const RANK_TIE_TOLERANCE: f64 = 1e-12;

/// Kendall tau-b with ties decided by exact equality.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    kendall_tau_with_ties(x, y, 0.0)
}

/// Kendall tau-b, `(C - D) / sqrt((n0 - n1)(n0 - n2))`, by pair
/// enumeration. Values within `rel_tol` of each other (relative to the
/// larger magnitude) are treated as tied.
pub fn kendall_tau_with_ties(x: &[f64], y: &[f64], rel_tol: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::DegenerateInput("need at least two observations".into()));
    }
    let cmp = |a: f64, b: f64| -> i8 {
        if (a - b).abs() <= rel_tol * a.abs().max(b.abs()) {
            0
        } else if a < b {
            -1
        } else {
            1
        }
    };
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut tied_x, mut tied_y) = (0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let sx = cmp(x[i], x[j]);
            let sy = cmp(y[i], y[j]);
            if sx == 0 {
                tied_x += 1;
            }
            if sy == 0 {
                tied_y += 1;
            }
            match sx * sy {
                1 => concordant += 1,
                -1 => discordant += 1,
                _ => {}
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as i64;
    let denom = ((pairs - tied_x) as f64 * (pairs - tied_y) as f64).sqrt();
    if denom == 0.0 {
        return Err(Error::DegenerateInput(
            "a ranking is constant, tau-b is undefined".into(),
        ));
    }
    Ok(((concordant - discordant) as f64 / denom).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    #[serde(rename = "K")]
    pub k: usize,
    /// `τ(diag B_K, diag B)`.
    pub tau_uncompensated: f64,
    /// `τ(diag B̂_K, diag B)`.
    pub tau_compensated: f64,
}

/// Rank agreement of the approximate diagonals with the exact diagonal.
pub fn rank_preservation(g: &Graph, k: usize, cap: OracleCap) -> Result<RankReport> {
    Ok(rank_preservation_sweep(g, &[k], cap)?.remove(0))
}

/// [`rank_preservation`] for several orders sharing one exact inversion.
pub fn rank_preservation_sweep(g: &Graph, ks: &[usize], cap: OracleCap) -> Result<Vec<RankReport>> {
    let exact = exact_dsm(g, cap)?.diagonal();
    let mut order: Vec<usize> = ks.to_vec();
    order.sort_unstable();
    order.dedup();
    let mut series = NeumannSeries::new(g, cap)?;
    let mut by_k = Vec::with_capacity(order.len());
    for &k in &order {
        series.advance_to(k);
        let trunc = series.truncated().diagonal();
        let comp = series.compensated().diagonal();
        by_k.push(RankReport {
            k,
            tau_uncompensated: kendall_tau_with_ties(&trunc, &exact, RANK_TIE_TOLERANCE)?,
            tau_compensated: kendall_tau_with_ties(&comp, &exact, RANK_TIE_TOLERANCE)?,
        });
    }
    Ok(ks
        .iter()
        .map(|k| *by_k.iter().find(|r| r.k == *k).expect("computed"))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralityReport {
    pub source: OperatorKind,
    #[serde(rename = "K")]
    pub k: usize,
    /// `τ(-diag(op), betweenness)`.
    pub tau: f64,
}

/// Rank agreement between small operator diagonals and high betweenness.
pub fn centrality_correlation(
    g: &Graph,
    k: usize,
    source: OperatorKind,
    cap: OracleCap,
) -> Result<CentralityReport> {
    if g.node_count() < 3 {
        return Err(Error::DegenerateInput("centrality needs at least three nodes".into()));
    }
    let neg_diag: Vec<f64> = materialize(g, source, k, cap)?
        .diagonal()
        .into_iter()
        .map(|d| -d)
        .collect();
    let bc = betweenness(g);
    Ok(CentralityReport {
        source,
        k,
        tau: kendall_tau_with_ties(&neg_diag, &bc, RANK_TIE_TOLERANCE)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub graph: String,
    pub n: usize,
    pub edges: usize,
    pub d_max: usize,
    #[serde(rename = "K")]
    pub k: usize,
    /// `‖B - B_K‖_∞`.
    pub err_uncompensated: f64,
    /// `‖B - B̂_K‖_∞`.
    pub err_compensated: f64,
    pub bound: f64,
    pub row_sum_min_uncompensated: f64,
    pub row_sum_max_uncompensated: f64,
    pub row_sum_min_compensated: f64,
    pub row_sum_max_compensated: f64,
    /// Strict `b_ii > b_ij` in every row of both approximations.
    pub dominance_ok: bool,
    /// Smallest `b_ii - max_{j≠i} b_ij` over both approximations.
    pub dominance_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_stream: Option<f64>,
}

impl VerificationReport {
    pub fn bound_holds(&self) -> bool {
        self.err_uncompensated <= self.bound + 1e-12
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VerifyOptions {
    /// Record wall-clock times for the exact inversion and for streaming
    /// propagation of a Gaussian feature block.
    pub timing: bool,
    pub timing_features: usize,
    pub seed: u64,
}

pub fn verify_truncation(g: &Graph, k: usize, cap: OracleCap) -> Result<VerificationReport> {
    Ok(verify_sweep(g, "graph", &[k], cap, VerifyOptions::default())?.remove(0))
}

/// One report per requested order; the exact inverse is computed once.
pub fn verify_sweep(
    g: &Graph,
    label: &str,
    ks: &[usize],
    cap: OracleCap,
    opts: VerifyOptions,
) -> Result<Vec<VerificationReport>> {
    let started = Instant::now();
    let exact = exact_dsm(g, cap)?;
    let exact_time = started.elapsed().as_secs_f64();
    let d_max = g.max_degree();

    let features = if opts.timing {
        Some(gaussian_features(g.node_count(), opts.timing_features.max(1), opts.seed))
    } else {
        None
    };

    let mut sorted: Vec<usize> = ks.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut series = NeumannSeries::new(g, cap)?;
    let mut reports = Vec::with_capacity(sorted.len());
    for &k in &sorted {
        series.advance_to(k);
        let trunc = series.truncated();
        let comp = series.compensated();
        let (tmin, tmax) = min_max(&trunc.row_sums());
        let (cmin, cmax) = min_max(&comp.row_sums());
        let margin = dominance_margin(trunc).min(dominance_margin(&comp));
        let stream_time = match &features {
            Some(z) => {
                let t = Instant::now();
                propagate(g, k, z, Mode::Compensated)?;
                Some(t.elapsed().as_secs_f64())
            }
            None => None,
        };
        reports.push(VerificationReport {
            graph: label.to_string(),
            n: g.node_count(),
            edges: g.edge_count(),
            d_max,
            k,
            err_uncompensated: exact.sub(trunc)?.inf_norm(),
            err_compensated: exact.sub(&comp)?.inf_norm(),
            bound: error_bound(d_max, k),
            row_sum_min_uncompensated: tmin,
            row_sum_max_uncompensated: tmax,
            row_sum_min_compensated: cmin,
            row_sum_max_compensated: cmax,
            dominance_ok: margin > 0.0,
            dominance_margin: margin,
            wall_time_exact: opts.timing.then_some(exact_time),
            wall_time_stream: stream_time,
        });
    }
    Ok(ks
        .iter()
        .map(|k| reports.iter().find(|r| r.k == *k).expect("computed").clone())
        .collect())
}

/// `min_i (b_ii - max_{j≠i} b_ij)`; `+∞` when no row has an off-diagonal.
pub fn dominance_margin(b: &DenseMatrix) -> f64 {
    let mut margin = f64::INFINITY;
    for i in 0..b.rows() {
        let row = b.row(i);
        let off = row
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max);
        if off.is_finite() {
            margin = margin.min(row[i] - off);
        }
    }
    margin
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    })
}
