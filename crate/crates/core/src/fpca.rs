//! Functional principal component analysis on quadrature-weighted data.
//!
//! The fit works on the discretized eigenproblem: with `W` the diagonal of
//! quadrature weights and `Σ̂ = N⁻¹XᵀX` the (optionally centered) sample
//! covariance,
//!
//! - eigenpairs come from the *symmetric* matrix `W^{1/2} Σ̂ W^{1/2}` — the
//!   non-symmetric `Σ̂W` form is never solved;
//! - component functions are `ξ̃_l = W^{−1/2} u_l`, W-orthonormal by
//!   construction;
//! - scores are quadrature inner products `θ̂_li = ⟨x_i, ξ̃_l⟩_W`, and the
//!   training scores are produced by the same projection code path as
//!   [`transform`], so fitting and transforming the training data agree
//!   bit-for-bit.
//!
//! Covariance is uncentered by default; `centered = true` subtracts the
//! pointwise mean function first and stores it for later projections.
//! Eigenvector sign is pinned by flipping each `u_l` so its largest-magnitude
//! entry is positive (first such index on ties).

use nalgebra::DMatrix;

use crate::eig;
use crate::error::{Error, Result};
use crate::fda::{inner_product, FunctionalDataset, QuadratureScheme, SampleGrid};

/// Flips `v` in place so the entry with the largest absolute value is
/// positive; on ties the first such entry decides. Zero vectors are left
/// unchanged.
pub(crate) fn canonical_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Sample covariance `Σ̂ = N⁻¹XᵀX`, optionally after subtracting the
/// pointwise mean function; explicitly symmetrized as `(A + Aᵀ)/2`.
pub fn covariance_matrix(data: &FunctionalDataset, centered: bool) -> DMatrix<f64> {
    let n = data.n_functions();
    let m = data.n_points();
    let mut x = DMatrix::from_row_slice(n, m, data.values());
    if centered {
        for j in 0..m {
            let mean = x.column(j).sum() / n as f64;
            for i in 0..n {
                x[(i, j)] -= mean;
            }
        }
    }
    let mut c = x.transpose() * &x;
    c /= n as f64;
    for j in 0..m {
        for k in 0..j {
            let v = (c[(j, k)] + c[(k, j)]) / 2.0;
            c[(j, k)] = v;
            c[(k, j)] = v;
        }
    }
    c
}

/// Pointwise mean function of the dataset rows.
fn column_means(data: &FunctionalDataset) -> Vec<f64> {
    let n = data.n_functions();
    let m = data.n_points();
    let mut mean = vec![0.0; m];
    for i in 0..n {
        for (j, v) in data.row(i).iter().enumerate() {
            mean[j] += v;
        }
    }
    for v in &mut mean {
        *v /= n as f64;
    }
    mean
}

/// A fitted functional PCA basis with its training scores.
#[derive(Debug, Clone, PartialEq)]
pub struct FpcaModel {
    /// Top-L eigenvalues, non-increasing, negatives clamped to zero.
    pub eigenvalues: Vec<f64>,
    /// All `M` eigenvalues of the weighted covariance (clamped, sorted);
    /// the denominator for explained-variance ratios.
    pub full_spectrum: Vec<f64>,
    /// `L × M` discretized component functions `ξ̃_l`, W-orthonormal.
    pub components: Vec<Vec<f64>>,
    /// `N × L` training scores.
    pub scores: Vec<Vec<f64>>,
    pub quadrature: QuadratureScheme,
    pub grid: SampleGrid,
    pub centered: bool,
    /// Pointwise mean subtracted before projection when `centered`.
    pub mean: Option<Vec<f64>>,
}

/// Fits an L-component FPCA basis to the dataset.
pub fn fit_fpca(
    data: &FunctionalDataset,
    q: &QuadratureScheme,
    l: usize,
    centered: bool,
) -> Result<FpcaModel> {
    let n = data.n_functions();
    let m = data.n_points();
    if q.len() != m {
        return Err(Error::LengthMismatch {
            left: q.len(),
            right: m,
        });
    }
    for (j, &w) in q.weights().iter().enumerate() {
        if w == 0.0 {
            return Err(Error::ZeroWeight { index: j });
        }
    }
    let l_max = n.min(m);
    if l == 0 || l > l_max {
        return Err(Error::Dimension(format!(
            "component count {l} outside 1..={l_max} for {n} functions on {m} points"
        )));
    }
    let cov = covariance_matrix(data, centered);
    let sqrt_w: Vec<f64> = q.weights().iter().map(|w| w.sqrt()).collect();
    let mut b = DMatrix::zeros(m, m);
    for j in 0..m {
        for k in j..m {
            let v = sqrt_w[j] * cov[(j, k)] * sqrt_w[k];
            b[(j, k)] = v;
            b[(k, j)] = v;
        }
    }
    let (raw_values, raw_vectors) = eig::decompose_symmetric(&b);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &c| {
        raw_values[c]
            .partial_cmp(&raw_values[a])
            .unwrap()
            .then(a.cmp(&c))
    });
    let full_spectrum: Vec<f64> = order
        .iter()
        .map(|&i| raw_values[i].max(0.0))
        .collect();
    let eigenvalues = full_spectrum[..l].to_vec();
    let mut components = Vec::with_capacity(l);
    for &i in order.iter().take(l) {
        let mut u: Vec<f64> = raw_vectors.column(i).iter().copied().collect();
        canonical_sign(&mut u);
        let xi: Vec<f64> = u.iter().zip(&sqrt_w).map(|(uj, sw)| uj / sw).collect();
        components.push(xi);
    }
    let mean = centered.then(|| column_means(data));
    let mut model = FpcaModel {
        eigenvalues,
        full_spectrum,
        components,
        scores: Vec::new(),
        quadrature: q.clone(),
        grid: data.grid().clone(),
        centered,
        mean,
    };
    model.scores = transform(&model, data)?;
    Ok(model)
}

/// Projects new functions onto the fitted basis: `θ_l = ⟨x − mean, ξ̃_l⟩_W`.
///
/// Passing the training dataset reproduces `model.scores` bit-for-bit.
pub fn transform(model: &FpcaModel, new_data: &FunctionalDataset) -> Result<Vec<Vec<f64>>> {
    if new_data.grid() != &model.grid {
        return Err(Error::GridMismatch);
    }
    let mut scores = Vec::with_capacity(new_data.n_functions());
    let mut buf = vec![0.0; new_data.n_points()];
    for i in 0..new_data.n_functions() {
        let row = new_data.row(i);
        let x: &[f64] = match &model.mean {
            Some(mean) => {
                for (b, (v, mu)) in buf.iter_mut().zip(row.iter().zip(mean)) {
                    *b = v - mu;
                }
                &buf
            }
            None => row,
        };
        let mut row_scores = Vec::with_capacity(model.components.len());
        for xi in &model.components {
            row_scores.push(inner_product(x, xi, &model.quadrature)?);
        }
        scores.push(row_scores);
    }
    Ok(scores)
}

/// Fraction of total variance carried by each kept component:
/// `λ_l / Σ_all λ`.
pub fn explained_variance_ratio(model: &FpcaModel) -> Result<Vec<f64>> {
    let total: f64 = model.full_spectrum.iter().sum();
    if !(total > 0.0) {
        return Err(Error::AllZeroVariance);
    }
    Ok(model.eigenvalues.iter().map(|l| l / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fda::{l2_norm, trapezoid_weights};
    use approx::assert_relative_eq;
    use nalgebra::SymmetricEigen;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn dataset(points: &[f64], rows: Vec<Vec<f64>>) -> (FunctionalDataset, QuadratureScheme) {
        let grid = SampleGrid::from_points(points.to_vec()).unwrap();
        let q = trapezoid_weights(&grid);
        (FunctionalDataset::from_rows(grid, rows).unwrap(), q)
    }

    fn random_dataset(
        seed: u64,
        n: usize,
        points: &[f64],
    ) -> (FunctionalDataset, QuadratureScheme) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..n)
            .map(|_| {
                (0..points.len())
                    .map(|_| StandardNormal.sample(&mut rng))
                    .collect()
            })
            .collect();
        dataset(points, rows)
    }

    // ── 1. Covariance ──

    #[test]
    fn covariance_of_antipodal_pair() {
        let (data, _) = dataset(&[0.0, 1.0], vec![vec![1.0, 1.0], vec![-1.0, -1.0]]);
        let c = covariance_matrix(&data, false);
        for j in 0..2 {
            for k in 0..2 {
                assert_relative_eq!(c[(j, k)], 1.0, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn covariance_of_zero_function_is_zero() {
        let (data, _) = dataset(&[0.0, 1.0, 2.0], vec![vec![0.0, 0.0, 0.0]]);
        let c = covariance_matrix(&data, false);
        assert!(c.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn covariance_is_exactly_symmetric() {
        let (data, _) = random_dataset(3, 5, &[0.0, 0.3, 1.1, 2.0]);
        for centered in [false, true] {
            let c = covariance_matrix(&data, centered);
            for j in 0..4 {
                for k in 0..4 {
                    assert_eq!(c[(j, k)], c[(k, j)], "entry ({j},{k}), centered={centered}");
                }
            }
        }
    }

    #[test]
    fn centering_removes_the_mean_component() {
        let (data, _) = dataset(&[0.0, 1.0], vec![vec![2.0, 2.0], vec![2.0, 2.0]]);
        let c = covariance_matrix(&data, true);
        assert!(c.iter().all(|&v| v.abs() < 1e-14));
    }

    // ── 2. Fit: worked instances ──

    #[test]
    fn antipodal_pair_has_unit_eigenvalue_and_flat_component() {
        let (data, q) = dataset(&[0.0, 1.0], vec![vec![1.0, 1.0], vec![-1.0, -1.0]]);
        let model = fit_fpca(&data, &q, 1, false).unwrap();
        assert_relative_eq!(model.eigenvalues[0], 1.0, max_relative = 1e-10);
        assert_relative_eq!(model.components[0][0], 1.0, max_relative = 1e-10);
        assert_relative_eq!(model.components[0][1], 1.0, max_relative = 1e-10);
        assert_relative_eq!(model.scores[0][0], 1.0, max_relative = 1e-10);
        assert_relative_eq!(model.scores[1][0], -1.0, max_relative = 1e-10);
    }

    #[test]
    fn single_function_gives_itself_normalized() {
        let (data, q) = dataset(&[0.0, 0.5, 1.0], vec![vec![2.0, 1.0, 2.0]]);
        let model = fit_fpca(&data, &q, 1, false).unwrap();
        let norm = l2_norm(&[2.0, 1.0, 2.0], &q).unwrap();
        for (j, &v) in model.components[0].iter().enumerate() {
            assert_relative_eq!(v, [2.0, 1.0, 2.0][j] / norm, max_relative = 1e-8);
        }
        assert_relative_eq!(model.scores[0][0], norm, max_relative = 1e-8);
        let unit = l2_norm(&model.components[0], &q).unwrap();
        assert_relative_eq!(unit, 1.0, max_relative = 1e-10);
    }

    /// Reference: plain uncentered PCA of the weight-scaled matrix
    /// `Y = X·diag(√w)`. Its scores must equal the functional scores, because
    /// the weighted eigenproblem is the Euclidean one after that change of
    /// variables.
    fn plain_pca_scores(rows: &[Vec<f64>], weights: &[f64], l: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = rows.len();
        let m = weights.len();
        let mut y = DMatrix::zeros(n, m);
        for i in 0..n {
            for j in 0..m {
                y[(i, j)] = rows[i][j] * weights[j].sqrt();
            }
        }
        let c = y.transpose() * &y / n as f64;
        let eig = SymmetricEigen::new(c);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .partial_cmp(&eig.eigenvalues[a])
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut vals = Vec::new();
        let mut scores = vec![Vec::new(); n];
        for &idx in order.iter().take(l) {
            vals.push(eig.eigenvalues[idx]);
            let mut u: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
            canonical_sign(&mut u);
            for i in 0..n {
                let s: f64 = (0..m).map(|j| y[(i, j)] * u[j]).sum();
                scores[i].push(s);
            }
        }
        (vals, scores)
    }

    #[test]
    fn scores_match_plain_pca_of_weight_scaled_data() {
        for (seed, points) in [
            (11, vec![0.0, 0.25, 0.5, 0.75, 1.0]),
            (12, vec![0.0, 0.1, 0.4, 1.0, 1.3]),
        ] {
            let (data, q) = random_dataset(seed, 6, &points);
            let rows: Vec<Vec<f64>> = (0..6).map(|i| data.row(i).to_vec()).collect();
            let model = fit_fpca(&data, &q, 3, false).unwrap();
            let (vals, scores) = plain_pca_scores(&rows, q.weights(), 3);
            for l in 0..3 {
                assert_relative_eq!(model.eigenvalues[l], vals[l].max(0.0), epsilon = 1e-10);
                for i in 0..6 {
                    assert_relative_eq!(model.scores[i][l], scores[i][l], epsilon = 1e-8);
                }
            }
        }
    }

    // ── 3. Transform ──

    #[test]
    fn transform_of_training_data_is_bit_identical() {
        let (data, q) = random_dataset(21, 5, &[0.0, 0.5, 1.0, 1.5]);
        for centered in [false, true] {
            let model = fit_fpca(&data, &q, 2, centered).unwrap();
            let again = transform(&model, &data).unwrap();
            assert_eq!(model.scores, again, "centered={centered}");
        }
    }

    #[test]
    fn transform_of_zero_function_is_zero() {
        let (data, q) = random_dataset(22, 4, &[0.0, 1.0, 2.0]);
        let model = fit_fpca(&data, &q, 2, false).unwrap();
        let (zero, _) = dataset(&[0.0, 1.0, 2.0], vec![vec![0.0, 0.0, 0.0]]);
        let s = transform(&model, &zero).unwrap();
        assert_eq!(s[0], vec![0.0, 0.0]);
    }

    #[test]
    fn transform_of_a_component_yields_a_unit_coordinate() {
        let (data, q) = random_dataset(23, 5, &[0.0, 0.5, 1.0, 1.5, 2.0]);
        let model = fit_fpca(&data, &q, 3, false).unwrap();
        let grid = model.grid.clone();
        let comp = FunctionalDataset::from_rows(grid, vec![model.components[0].clone()]).unwrap();
        let s = transform(&model, &comp).unwrap();
        assert_relative_eq!(s[0][0], 1.0, epsilon = 1e-8);
        assert!(s[0][1].abs() < 1e-8 && s[0][2].abs() < 1e-8);
    }

    #[test]
    fn transform_rejects_foreign_grids() {
        let (data, q) = random_dataset(24, 4, &[0.0, 1.0, 2.0]);
        let model = fit_fpca(&data, &q, 1, false).unwrap();
        let (other, _) = dataset(&[0.0, 1.0, 3.0], vec![vec![1.0, 2.0, 3.0]]);
        assert!(matches!(
            transform(&model, &other),
            Err(Error::GridMismatch)
        ));
    }

    // ── 4. Explained variance ──

    #[test]
    fn rank_one_dataset_explains_everything() {
        let (data, q) = dataset(&[0.0, 0.5, 1.0], vec![vec![1.0, 2.0, 1.0]]);
        let model = fit_fpca(&data, &q, 1, false).unwrap();
        let r = explained_variance_ratio(&model).unwrap();
        assert_eq!(r.len(), 1);
        assert_relative_eq!(r[0], 1.0, max_relative = 1e-10);
    }

    #[test]
    fn two_equal_orthogonal_components_split_evenly() {
        // f = (2,0,0) and g = (0,0,2) are W-orthogonal on {0, 0.5, 1}
        // (trapezoid weights ¼, ½, ¼) with equal W-norms; ±f, ±g give both
        // directions equal variance.
        let (data, q) = dataset(
            &[0.0, 0.5, 1.0],
            vec![
                vec![2.0, 0.0, 0.0],
                vec![0.0, 0.0, 2.0],
                vec![-2.0, 0.0, 0.0],
                vec![0.0, 0.0, -2.0],
            ],
        );
        let model = fit_fpca(&data, &q, 2, false).unwrap();
        let r = explained_variance_ratio(&model).unwrap();
        assert_relative_eq!(r[0], 0.5, max_relative = 1e-10);
        assert_relative_eq!(r[1], 0.5, max_relative = 1e-10);
    }

    #[test]
    fn ratios_sum_to_at_most_one() {
        let (data, q) = random_dataset(31, 6, &[0.0, 0.4, 0.9, 1.0, 1.8]);
        let model = fit_fpca(&data, &q, 2, false).unwrap();
        let r = explained_variance_ratio(&model).unwrap();
        assert!(r.iter().sum::<f64>() <= 1.0 + 1e-12);
        assert!(r[0] >= r[1]);
    }

    #[test]
    fn all_zero_dataset_has_no_variance_to_explain() {
        let (data, q) = dataset(&[0.0, 1.0], vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
        let model = fit_fpca(&data, &q, 1, false).unwrap();
        assert!(matches!(
            explained_variance_ratio(&model),
            Err(Error::AllZeroVariance)
        ));
    }

    // ── 5. Model invariants ──

    #[test]
    fn dimension_and_weight_preconditions() {
        let (data, q) = random_dataset(41, 3, &[0.0, 1.0, 2.0, 3.0]);
        assert!(matches!(
            fit_fpca(&data, &q, 0, false),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            fit_fpca(&data, &q, 4, false),
            Err(Error::Dimension(_))
        ));
        let zero_q =
            QuadratureScheme::from_weights(vec![0.0, 1.5, 1.0, 0.5], 3.0).unwrap();
        assert!(matches!(
            fit_fpca(&data, &zero_q, 1, false),
            Err(Error::ZeroWeight { index: 0 })
        ));
    }

    #[test]
    fn first_component_maximizes_projected_variance() {
        let (data, q) = random_dataset(42, 6, &[0.0, 0.3, 0.7, 1.2, 1.5]);
        let model = fit_fpca(&data, &q, 1, false).unwrap();
        let lambda1 = model.eigenvalues[0];
        let m = data.n_points();
        let n = data.n_functions();
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        for _ in 0..1000 {
            let mut g: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = l2_norm(&g, &q).unwrap();
            if norm < 1e-12 {
                continue;
            }
            for v in &mut g {
                *v /= norm;
            }
            let var: f64 = (0..n)
                .map(|i| {
                    let s = inner_product(data.row(i), &g, &q).unwrap();
                    s * s
                })
                .sum::<f64>()
                / n as f64;
            assert!(
                var <= lambda1 + 1e-10,
                "random direction variance {var} exceeds λ₁ = {lambda1}"
            );
        }
    }

    #[test]
    fn row_reordering_permutes_scores() {
        let points = [0.0, 0.5, 1.0, 2.0];
        let (data, q) = random_dataset(43, 5, &points);
        let rows: Vec<Vec<f64>> = (0..5).map(|i| data.row(i).to_vec()).collect();
        let perm = [3usize, 0, 4, 1, 2];
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| rows[i].clone()).collect();
        let (data_p, _) = dataset(&points, permuted);
        let a = fit_fpca(&data, &q, 2, false).unwrap();
        let b = fit_fpca(&data_p, &q, 2, false).unwrap();
        for (new_i, &old_i) in perm.iter().enumerate() {
            for l in 0..2 {
                assert_relative_eq!(b.scores[new_i][l], a.scores[old_i][l], epsilon = 1e-10);
            }
        }
    }

    // ── 6. Properties ──

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn components_are_w_orthonormal_and_eigenvalues_clamped(
            rows in proptest::collection::vec(
                proptest::collection::vec(-1.0f64..1.0, 4),
                2..6
            ),
            centered in proptest::bool::ANY,
        ) {
            let (data, q) = dataset(&[0.0, 0.4, 0.9, 1.6], rows.clone());
            let l = rows.len().min(4);
            let model = fit_fpca(&data, &q, l, centered).unwrap();
            for a in 0..l {
                prop_assert!(model.eigenvalues[a] >= 0.0);
                if a > 0 {
                    prop_assert!(model.eigenvalues[a - 1] >= model.eigenvalues[a]);
                }
                for b in 0..l {
                    let ip = inner_product(&model.components[a], &model.components[b], &q).unwrap();
                    let expect = if a == b { 1.0 } else { 0.0 };
                    prop_assert!((ip - expect).abs() < 1e-8,
                        "⟨ξ{a}, ξ{b}⟩ = {ip}");
                }
            }
        }

        #[test]
        fn full_rank_fit_reconstructs_training_data(
            rows in proptest::collection::vec(
                proptest::collection::vec(-1.0f64..1.0, 5),
                2..7
            ),
        ) {
            let (data, q) = dataset(&[0.0, 0.4, 0.9, 1.6, 2.0], rows.clone());
            let total: f64 = data.values().iter().map(|v| v * v).sum();
            prop_assume!(total > 0.01);
            let l = rows.len().min(5);
            let model = fit_fpca(&data, &q, l, false).unwrap();
            let mut err = 0.0;
            for i in 0..rows.len() {
                for (j, &x) in data.row(i).iter().enumerate() {
                    let recon: f64 = (0..l)
                        .map(|c| model.scores[i][c] * model.components[c][j])
                        .sum();
                    err += (recon - x) * (recon - x);
                }
            }
            prop_assert!(
                (err / total).sqrt() < 1e-6,
                "relative reconstruction error {}",
                (err / total).sqrt()
            );
        }
    }
}
