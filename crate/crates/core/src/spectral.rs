//! Eigenstructure of `L`, `B` and the compensated approximations.

use serde::{Deserialize, Serialize};

use crate::algorithms::is_connected;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::operators::{propagate, Mode, OracleCap};
use crate::rng::Rng;

/// Off-diagonal Frobenius threshold, relative to the matrix norm.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Laplacian eigenvalues down to `-NEGATIVE_TOLERANCE` are treated as zero.
pub const NEGATIVE_TOLERANCE: f64 = 1e-8;

/// All eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi
/// rotations.
pub fn symmetric_eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>> {
    if m.rows() != m.cols() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: m.cols(),
        });
    }
    let n = m.rows();
    let mut a = m.as_slice().to_vec();
    let scale = a.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);

    let off_norm = |a: &[f64]| {
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += 2.0 * a[i * n + j] * a[i * n + j];
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&a) > JACOBI_TOLERANCE * scale {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { iterations: sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Dense `L = D - A`.
pub fn laplacian(g: &Graph) -> DenseMatrix {
    let n = g.node_count();
    let mut l = DenseMatrix::zeros(n, n);
    for i in 0..n {
        l[(i, i)] = g.degree(i) as f64;
        for &j in g.neighbors(i) {
            l[(i, j)] = -1.0;
        }
    }
    l
}

/// Laplacian eigenvalues `λ_1 ≤ … ≤ λ_n`.
pub fn laplacian_spectrum(g: &Graph, cap: OracleCap) -> Result<Vec<f64>> {
    cap.check(g.node_count())?;
    symmetric_eigenvalues(&laplacian(g))
}

/// Maps ascending Laplacian eigenvalues to the DSM spectrum
/// `μ = 1 / (1 + λ)`, which comes out descending.
pub fn dsm_spectrum_from_laplacian(lambda: &[f64]) -> Result<Vec<f64>> {
    let mut mu = Vec::with_capacity(lambda.len());
    for &l in lambda {
        if l < -NEGATIVE_TOLERANCE {
            return Err(Error::NegativeEigenvalue(l));
        }
        mu.push(1.0 / (1.0 + l.max(0.0)));
    }
    Ok(mu)
}

/// `γ = 1 - 1 / (1 + λ_2)`.
pub fn exact_spectral_gap(g: &Graph, cap: OracleCap) -> Result<f64> {
    if g.node_count() < 2 {
        return Err(Error::InvalidParams("spectral gap needs at least two nodes".into()));
    }
    let lambda = laplacian_spectrum(g, cap)?;
    gap_from_spectrum(&lambda)
}

fn gap_from_spectrum(lambda: &[f64]) -> Result<f64> {
    let l2 = lambda[1];
    if l2 < -NEGATIVE_TOLERANCE {
        return Err(Error::NegativeEigenvalue(l2));
    }
    Ok(1.0 - 1.0 / (1.0 + l2.max(0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    /// Stop once `‖B v - θ v‖ ≤ tolerance · θ` for the unit iterate `v`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100_000,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalGap {
    #[serde(rename = "K")]
    pub k: usize,
    /// `1 - μ_2(B̂_K)`.
    pub value: f64,
    pub mu2: f64,
    pub iterations: usize,
    /// Set for disconnected graphs, where `μ_2 = 1` and the estimate only
    /// reflects one of several unit eigenvalues.
    pub disconnected: bool,
}

/// `γ^(K) = 1 - μ_2(B̂_K)` by power iteration with the constant direction
/// deflated. `B̂_K` is symmetric, positive definite and fixes `1`, so the
/// deflated iteration converges to its second eigenvalue. The operator is
/// applied through [`propagate`], never densely.
pub fn empirical_spectral_gap(g: &Graph, k: usize) -> Result<EmpiricalGap> {
    empirical_spectral_gap_with(g, k, PowerIteration::default())
}

pub fn empirical_spectral_gap_with(g: &Graph, k: usize, cfg: PowerIteration) -> Result<EmpiricalGap> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::DegenerateSpectrum(
            "no second eigenvalue with fewer than two nodes".into(),
        ));
    }
    let mut rng = Rng::new(cfg.seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    deflate(&mut v);
    if normalize(&mut v) == 0.0 {
        return Err(Error::DegenerateSpectrum("start vector lies in the constant direction".into()));
    }

    for it in 1..=cfg.max_iterations {
        let w = propagate(g, k, &DenseMatrix::column_vector(&v), Mode::Compensated)?;
        let mut w = w.as_slice().to_vec();
        deflate(&mut w);
        let theta: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let residual = v
            .iter()
            .zip(&w)
            .map(|(a, b)| (b - theta * a).powi(2))
            .sum::<f64>()
            .sqrt();
        if normalize(&mut w) < 1e-300 {
            return Err(Error::DegenerateSpectrum(
                "iterate vanished after deflation".into(),
            ));
        }
        v = w;
        if residual <= cfg.tolerance * theta.abs() {
            return Ok(EmpiricalGap {
                k,
                value: 1.0 - theta,
                mu2: theta,
                iterations: it,
                disconnected: !is_connected(g),
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_iterations,
    })
}

fn deflate(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalGapEntry {
    #[serde(rename = "K")]
    pub k: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub gamma_exact: f64,
    pub gamma_empirical: Option<EmpiricalGapEntry>,
}

/// Full report; the empirical gap is included when `k` is given.
pub fn spectrum_report(g: &Graph, k: Option<usize>, cap: OracleCap) -> Result<SpectrumReport> {
    let lambda = laplacian_spectrum(g, cap)?;
    let mu = dsm_spectrum_from_laplacian(&lambda)?;
    let gamma_exact = if lambda.len() >= 2 {
        gap_from_spectrum(&lambda)?
    } else {
        0.0
    };
    let gamma_empirical = match k {
        Some(k) => {
            let gap = empirical_spectral_gap(g, k)?;
            Some(EmpiricalGapEntry { k, value: gap.value })
        }
        None => None,
    };
    Ok(SpectrumReport {
        lambda,
        mu,
        gamma_exact,
        gamma_empirical,
    })
}

/// Default truncation grid for gap-convergence curves.
pub const GAP_CURVE_GRID: [usize; 11] = [0, 1, 2, 3, 5, 8, 12, 20, 35, 60, 100];
