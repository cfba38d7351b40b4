//! Diffusion-map embeddings of functional data.
//!
//! The random walk is built in four steps:
//!
//! 1. kernel matrix `K` from pairwise quadrature distances — Gaussian
//!    `exp(−d²_{L²}/(2σ²))` or Laplacian `exp(−d_{L¹}/σ²)` (the σ² in the
//!    Laplacian denominator is deliberate, matching the definition this
//!    module implements rather than the more common unsquared form);
//! 2. density normalization `k⁽ᵅ⁾_ij = k_ij/(d_i^α d_j^α)` with
//!    `d_i = Σ_j k_ij`; `α = 0` leaves `K` untouched;
//! 3. row-stochastic transition matrix `p_ij = k⁽ᵅ⁾_ij / d⁽ᵅ⁾_i` with
//!    stationary distribution `π_i = d⁽ᵅ⁾_i / Σ_j d⁽ᵅ⁾_j`;
//! 4. spectrum of `P` via its symmetric conjugate
//!    `S = D^{−1/2} K⁽ᵅ⁾ D^{−1/2}` — the non-symmetric `P` never meets an
//!    eigensolver. Right eigenvectors are `ψ_l = D^{−1/2} v_l`, rescaled to
//!    `Σ_i π_i ψ_l(i)² = 1`, which makes `ψ_0` exactly the all-ones vector
//!    and the diffusion-distance identity below exact.
//!
//! The embedding column `l` is `λ_l^T ψ_l` for `l = 1…L` (`ψ_0` carries no
//! information and is dropped). Euclidean distances in the full embedding
//! equal diffusion distances `D_T(i,j)² = Σ_k (pᵀ_ik − pᵀ_jk)²/π_k`, which
//! [`diffusion_distance_exact`] computes the slow way as a cross-check.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::eig;
use crate::error::{Error, Result};
use crate::fda::{l1_distance, l2_distance, FunctionalDataset, QuadratureScheme};
use crate::fpca::canonical_sign;

/// Pairwise-similarity kernel family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    /// `exp(−d²_{L²} / (2σ²))`.
    Gaussian,
    /// `exp(−d_{L¹} / σ²)`.
    Laplacian,
}

/// Hyperparameters for a diffusion-map fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdmParams {
    pub kernel: KernelKind,
    /// Kernel bandwidth; strictly positive.
    pub sigma: f64,
    /// Density-normalization exponent in `[0, 1]`.
    pub alpha: f64,
    /// Random-walk steps `T ≥ 1`.
    pub steps: u32,
    /// Embedding dimension `L ≥ 1` (requires `L ≤ N − 1` at fit time).
    pub dims: usize,
}

impl FdmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "kernel bandwidth {} must be positive",
                self.sigma
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidSpec(format!(
                "density exponent {} outside [0, 1]",
                self.alpha
            )));
        }
        if self.steps == 0 {
            return Err(Error::InvalidSpec("step count must be ≥ 1".into()));
        }
        if self.dims == 0 {
            return Err(Error::InvalidSpec("embedding dimension must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// A fitted diffusion map over one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct FdmModel {
    /// Raw kernel matrix `K` (symmetric, positive, unit diagonal).
    pub kernel: DMatrix<f64>,
    /// Density-normalized kernel `K⁽ᵅ⁾`.
    pub normalized_kernel: DMatrix<f64>,
    /// Row-stochastic transition matrix `P`.
    pub transition: DMatrix<f64>,
    /// `λ_0 ≥ λ_1 ≥ … ≥ λ_L` (`λ_0 = 1` up to round-off).
    pub eigenvalues: Vec<f64>,
    /// Right eigenvectors `ψ_0 … ψ_L`, each of length `N`, normalized to
    /// `Σ_i π_i ψ(i)² = 1`.
    pub psi: Vec<Vec<f64>>,
    /// Left eigenvectors `φ_l = π ∘ ψ_l`, biorthonormal to the `ψ`;
    /// exposed read-only and unused by the embedding.
    pub phi: Vec<Vec<f64>>,
    /// Stationary distribution of `P`.
    pub stationary: Vec<f64>,
    /// `N × L` embedding; column `l − 1` is `λ_l^T ψ_l`.
    pub embedding: Vec<Vec<f64>>,
    pub params: FdmParams,
    /// Set when `λ_1 > 1 − 1e-12`: the similarity graph is numerically
    /// disconnected and the embedding scale becomes unreliable.
    pub near_disconnected: bool,
}

/// Pairwise kernel matrix from quadrature distances.
pub fn kernel_matrix(
    data: &FunctionalDataset,
    q: &QuadratureScheme,
    kernel: KernelKind,
    sigma: f64,
) -> Result<DMatrix<f64>> {
    let n = data.n_functions();
    if n < 2 {
        return Err(Error::Dimension(format!(
            "kernel matrix needs at least 2 functions, got {n}"
        )));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "kernel bandwidth {sigma} must be positive"
        )));
    }
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = 1.0;
        for j in i + 1..n {
            let v = match kernel {
                KernelKind::Gaussian => {
                    let d = l2_distance(data.row(i), data.row(j), q)?;
                    (-d * d / (2.0 * sigma * sigma)).exp()
                }
                KernelKind::Laplacian => {
                    let d = l1_distance(data.row(i), data.row(j), q)?;
                    (-d / (sigma * sigma)).exp()
                }
            };
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// Density normalization `k⁽ᵅ⁾_ij = k_ij / (d_i^α d_j^α)`.
///
/// `α = 0` returns the input unchanged, bit for bit.
pub fn alpha_normalize(k: &DMatrix<f64>, alpha: f64) -> DMatrix<f64> {
    if alpha == 0.0 {
        return k.clone();
    }
    let n = k.nrows();
    let deg_a: Vec<f64> = (0..n)
        .map(|i| {
            let d: f64 = k.row(i).iter().sum();
            if alpha == 1.0 {
                d
            } else {
                d.powf(alpha)
            }
        })
        .collect();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = k[(i, j)] / (deg_a[i] * deg_a[j]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Row-normalizes a symmetric positive kernel into a transition matrix and
/// its stationary distribution `π_i = d_i / Σ_j d_j`.
pub fn transition_matrix(k_alpha: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let n = k_alpha.nrows();
    let deg: Vec<f64> = (0..n).map(|i| k_alpha.row(i).iter().sum()).collect();
    let total: f64 = deg.iter().sum();
    let mut p = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            p[(i, j)] = k_alpha[(i, j)] / deg[i];
        }
    }
    let pi = deg.iter().map(|d| d / total).collect();
    (p, pi)
}

/// Fits a diffusion map to a dataset with the given quadrature geometry.
pub fn fit_fdm(
    data: &FunctionalDataset,
    q: &QuadratureScheme,
    params: &FdmParams,
) -> Result<FdmModel> {
    params.validate()?;
    let k = kernel_matrix(data, q, params.kernel, params.sigma)?;
    fit_fdm_from_kernel(k, params)
}

/// Fits a diffusion map directly from a precomputed kernel matrix.
pub fn fit_fdm_from_kernel(kernel: DMatrix<f64>, params: &FdmParams) -> Result<FdmModel> {
    params.validate()?;
    let n = kernel.nrows();
    if n < 2 || params.dims > n - 1 {
        return Err(Error::Dimension(format!(
            "embedding dimension {} needs at least {} functions, got {n}",
            params.dims,
            params.dims + 1
        )));
    }
    let k_alpha = alpha_normalize(&kernel, params.alpha);
    let (transition, stationary) = transition_matrix(&k_alpha);
    let deg: Vec<f64> = (0..n).map(|i| k_alpha.row(i).iter().sum()).collect();
    let total_deg: f64 = deg.iter().sum();
    let sqrt_deg: Vec<f64> = deg.iter().map(|d| d.sqrt()).collect();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = k_alpha[(i, j)] / (sqrt_deg[i] * sqrt_deg[j]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    let (raw_values, raw_vectors) = eig::decompose_symmetric(&s);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        raw_values[b]
            .partial_cmp(&raw_values[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let l = params.dims;
    let scale = total_deg.sqrt();
    let mut eigenvalues = Vec::with_capacity(l + 1);
    let mut psi = Vec::with_capacity(l + 1);
    let mut phi = Vec::with_capacity(l + 1);
    for &idx in order.iter().take(l + 1) {
        eigenvalues.push(raw_values[idx]);
        let mut v: Vec<f64> = raw_vectors.column(idx).iter().copied().collect();
        canonical_sign(&mut v);
        // ψ = √(Σd)·D^{−1/2}v has Σ_i π_i ψ(i)² = ‖v‖² = 1 by construction.
        let p: Vec<f64> = v
            .iter()
            .zip(&sqrt_deg)
            .map(|(vi, sd)| scale * vi / sd)
            .collect();
        let f: Vec<f64> = p.iter().zip(&stationary).map(|(pi_v, pi)| pi * pi_v).collect();
        psi.push(p);
        phi.push(f);
    }
    let near_disconnected = eigenvalues.len() > 1 && eigenvalues[1] > 1.0 - 1e-12;
    let mut embedding = vec![Vec::with_capacity(l); n];
    for l_i in 1..=l {
        let factor = eigenvalues[l_i].powi(params.steps as i32);
        for (i, row) in embedding.iter_mut().enumerate() {
            row.push(factor * psi[l_i][i]);
        }
    }
    Ok(FdmModel {
        kernel,
        normalized_kernel: k_alpha,
        transition,
        eigenvalues,
        psi,
        phi,
        stationary,
        embedding,
        params: *params,
        near_disconnected,
    })
}

fn check_index(model: &FdmModel, i: usize) -> Result<()> {
    let n = model.transition.nrows();
    if i >= n {
        return Err(Error::IndexOutOfBounds { index: i, len: n });
    }
    Ok(())
}

/// Diffusion distance computed the slow, definitional way:
/// `D_T(i,j)² = Σ_k (pᵀ_ik − pᵀ_jk)² / π_k`, with `Pᵀ` formed by repeated
/// matrix multiplication. This is the oracle the embedding is checked
/// against, not a fast path.
pub fn diffusion_distance_exact(model: &FdmModel, i: usize, j: usize, steps: u32) -> Result<f64> {
    check_index(model, i)?;
    check_index(model, j)?;
    let mut pt = model.transition.clone();
    for _ in 1..steps {
        pt = &pt * &model.transition;
    }
    let n = pt.nrows();
    let mut acc = 0.0;
    for k in 0..n {
        let d = pt[(i, k)] - pt[(j, k)];
        acc += d * d / model.stationary[k];
    }
    Ok(acc.max(0.0).sqrt())
}

/// Euclidean distance between two embedding rows.
pub fn embedding_distance(model: &FdmModel, i: usize, j: usize) -> Result<f64> {
    check_index(model, i)?;
    check_index(model, j)?;
    let a = &model.embedding[i];
    let b = &model.embedding[j];
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    Ok(acc.sqrt())
}
