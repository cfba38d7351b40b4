//! Discretized functional data and its quadrature-weighted geometry.
//!
//! A "function" here is a vector of values on a shared sampling grid.
//! Integrals are approximated with a quadrature rule over that grid, which
//! turns the L² inner product, norms and distances between functions into
//! weighted sums:
//!
//! - `⟨x, y⟩ = Σ_j w_j x_j y_j`
//! - `‖x‖₂ = √⟨x, x⟩`,  `‖x − y‖₁ = Σ_j w_j |x_j − y_j|`
//!
//! Summation is plain left-to-right so that results are reproducible
//! bit-for-bit across runs; none of these kernels is parallelized.

use crate::error::{Error, Result};

/// Relative tolerance used to recognize a uniform grid step.
const UNIFORM_STEP_RTOL: f64 = 1e-12;

/// Relative tolerance for the weights-sum-to-span check.
const WEIGHT_SUM_RTOL: f64 = 1e-10;

/// Strictly increasing sampling points `t_1 < … < t_M` (seconds, or hertz for
/// spectra).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    points: Vec<f64>,
    uniform_step: Option<f64>,
}

impl SampleGrid {
    /// Builds a grid from explicit points, checking monotonicity. A uniform
    /// step is detected automatically when every gap matches the first one
    /// within `1e-12` relative.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::GridTooShort {
                min: 2,
                got: points.len(),
            });
        }
        for (i, pair) in points.windows(2).enumerate() {
            if !(pair[1] > pair[0]) {
                return Err(Error::NonIncreasingGrid { index: i });
            }
        }
        let h = points[1] - points[0];
        let uniform = points
            .windows(2)
            .all(|p| ((p[1] - p[0]) - h).abs() <= UNIFORM_STEP_RTOL * h);
        Ok(Self {
            points,
            uniform_step: uniform.then_some(h),
        })
    }

    /// Builds the uniform grid `start + i·step` for `i = 0 .. len`.
    pub fn uniform(start: f64, step: f64, len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::GridTooShort { min: 2, got: len });
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidSpec(format!("step {step} must be positive")));
        }
        let points = (0..len).map(|i| start + i as f64 * step).collect();
        Self::from_points(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `t_M − t_1`.
    pub fn span(&self) -> f64 {
        self.points[self.points.len() - 1] - self.points[0]
    }

    /// The common step, when the grid is uniform.
    pub fn uniform_step(&self) -> Option<f64> {
        self.uniform_step
    }
}

/// Nonnegative quadrature weights, one per grid point, summing to the grid
/// span.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureScheme {
    weights: Vec<f64>,
}

impl QuadratureScheme {
    /// Wraps explicit weights after checking sign and that they sum to `span`
    /// within `1e-10` relative.
    pub fn from_weights(weights: Vec<f64>, span: f64) -> Result<Self> {
        for (i, &w) in weights.iter().enumerate() {
            if w < 0.0 || !w.is_finite() {
                return Err(Error::NegativeWeight { index: i });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - span).abs() > WEIGHT_SUM_RTOL * span.abs() {
            return Err(Error::WeightSumMismatch { sum, span });
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Trapezoid-rule weights for an arbitrary strictly increasing grid:
///
/// `w_1 = (t_2 − t_1)/2`, `w_M = (t_M − t_{M−1})/2`, and interior
/// `w_j = (t_{j+1} − t_{j−1})/2`. On a uniform grid of step `h` the interior
/// weights are all exactly `h`.
pub fn trapezoid_weights(grid: &SampleGrid) -> QuadratureScheme {
    let t = grid.points();
    let m = t.len();
    let mut w = vec![0.0; m];
    w[0] = (t[1] - t[0]) / 2.0;
    w[m - 1] = (t[m - 1] - t[m - 2]) / 2.0;
    for j in 1..m - 1 {
        w[j] = (t[j + 1] - t[j - 1]) / 2.0;
    }
    // Construction satisfies the sum-equals-span identity by telescoping, so
    // this cannot fail for a valid grid.
    QuadratureScheme { weights: w }
}

fn check_len(x: &[f64], q: &QuadratureScheme) -> Result<()> {
    if x.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: q.len(),
        });
    }
    Ok(())
}

/// Quadrature inner product `Σ_j w_j x_j y_j`, summed left to right.
pub fn inner_product(x: &[f64], y: &[f64], q: &QuadratureScheme) -> Result<f64> {
    check_len(x, q)?;
    check_len(y, q)?;
    let w = q.weights();
    let mut acc = 0.0;
    for j in 0..x.len() {
        // Grouping the product as w·(x·y) keeps the sum bit-identical under
        // argument swap, which the symmetry property relies on.
        acc += w[j] * (x[j] * y[j]);
    }
    Ok(acc)
}

/// Weighted L² norm `√⟨x, x⟩`.
pub fn l2_norm(x: &[f64], q: &QuadratureScheme) -> Result<f64> {
    Ok(inner_product(x, x, q)?.max(0.0).sqrt())
}

/// Weighted L² distance `‖x − y‖₂`.
pub fn l2_distance(x: &[f64], y: &[f64], q: &QuadratureScheme) -> Result<f64> {
    check_len(x, q)?;
    check_len(y, q)?;
    let w = q.weights();
    let mut acc = 0.0;
    for j in 0..x.len() {
        let d = x[j] - y[j];
        acc += w[j] * d * d;
    }
    Ok(acc.max(0.0).sqrt())
}

/// Weighted L¹ distance `Σ_j w_j |x_j − y_j|`.
pub fn l1_distance(x: &[f64], y: &[f64], q: &QuadratureScheme) -> Result<f64> {
    check_len(x, q)?;
    check_len(y, q)?;
    let w = q.weights();
    let mut acc = 0.0;
    for j in 0..x.len() {
        acc += w[j] * (x[j] - y[j]).abs();
    }
    Ok(acc)
}

/// A set of `N ≥ 1` functions sampled on one grid, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalDataset {
    grid: SampleGrid,
    values: Vec<f64>,
    n: usize,
    labels: Option<Vec<String>>,
}

impl FunctionalDataset {
    /// Builds a dataset from per-function rows. All rows must match the grid
    /// length and contain only finite values.
    pub fn from_rows(grid: SampleGrid, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let m = grid.len();
        let n = rows.len();
        let mut values = Vec::with_capacity(n * m);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: m,
                });
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue { row: i, col: j });
                }
            }
            values.extend_from_slice(&row);
        }
        Ok(Self {
            grid,
            values,
            n,
            labels: None,
        })
    }

    /// Attaches one label per function.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: self.n,
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }

    /// Number of functions `N`.
    pub fn n_functions(&self) -> usize {
        self.n
    }

    /// Number of grid points `M`.
    pub fn n_points(&self) -> usize {
        self.grid.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.grid.len();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid(points: &[f64]) -> SampleGrid {
        SampleGrid::from_points(points.to_vec()).unwrap()
    }

    // ── 1. Grids ──

    #[test]
    fn uniform_grid_has_step() {
        let g = SampleGrid::uniform(0.0, 0.25, 5).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.uniform_step(), Some(0.25));
        assert_relative_eq!(g.span(), 1.0);
    }

    #[test]
    fn nonuniform_grid_has_no_step() {
        let g = grid(&[0.0, 1.0, 3.0]);
        assert_eq!(g.uniform_step(), None);
    }

    #[test]
    fn decreasing_grid_rejected() {
        assert!(matches!(
            SampleGrid::from_points(vec![0.0, 2.0, 1.0]),
            Err(Error::NonIncreasingGrid { index: 1 })
        ));
        assert!(matches!(
            SampleGrid::from_points(vec![0.0, 0.0, 1.0]),
            Err(Error::NonIncreasingGrid { index: 0 })
        ));
    }

    #[test]
    fn single_point_grid_rejected() {
        assert!(SampleGrid::from_points(vec![1.0]).is_err());
    }

    // ── 2. Trapezoid weights ──

    #[test]
    fn trapezoid_weights_nonuniform_example() {
        let q = trapezoid_weights(&grid(&[0.0, 1.0, 3.0]));
        assert_eq!(q.weights(), &[0.5, 1.5, 1.0]);
    }

    #[test]
    fn trapezoid_interior_weights_equal_step_on_uniform_grid() {
        let g = SampleGrid::uniform(0.0, 0.1, 9).unwrap();
        let q = trapezoid_weights(&g);
        for &w in &q.weights()[1..8] {
            assert_relative_eq!(w, 0.1, max_relative = 1e-12);
        }
        assert_relative_eq!(q.weights()[0], 0.05, max_relative = 1e-12);
        assert_relative_eq!(q.weights()[8], 0.05, max_relative = 1e-12);
    }

    #[test]
    fn from_weights_checks_sum_and_sign() {
        assert!(QuadratureScheme::from_weights(vec![0.5, 1.5, 1.0], 3.0).is_ok());
        assert!(matches!(
            QuadratureScheme::from_weights(vec![0.5, 0.5], 3.0),
            Err(Error::WeightSumMismatch { .. })
        ));
        assert!(matches!(
            QuadratureScheme::from_weights(vec![-0.5, 3.5], 3.0),
            Err(Error::NegativeWeight { index: 0 })
        ));
    }

    // ── 3. Inner product, norms, distances ──

    #[test]
    fn inner_product_of_identity_on_unit_grid() {
        // x(t) = y(t) = t on {0, 0.5, 1}: trapezoid gives 3/8, not the exact
        // integral 1/3 — the quadrature value is the contract here.
        let g = grid(&[0.0, 0.5, 1.0]);
        let q = trapezoid_weights(&g);
        let t = g.points().to_vec();
        let ip = inner_product(&t, &t, &q).unwrap();
        assert_relative_eq!(ip, 0.375, max_relative = 1e-12);
    }

    #[test]
    fn l1_distance_of_constants() {
        // |2 − (−1)| = 3 integrated over a span of 2.
        let g = grid(&[0.0, 1.0, 2.0]);
        let q = trapezoid_weights(&g);
        let x = vec![2.0; 3];
        let y = vec![-1.0; 3];
        assert_relative_eq!(l1_distance(&x, &y, &q).unwrap(), 6.0, max_relative = 1e-12);
    }

    #[test]
    fn norm_of_zero_function_is_zero() {
        let g = grid(&[0.0, 0.5, 1.0]);
        let q = trapezoid_weights(&g);
        assert_eq!(l2_norm(&[0.0, 0.0, 0.0], &q).unwrap(), 0.0);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let g = grid(&[0.0, 0.5, 1.0]);
        let q = trapezoid_weights(&g);
        assert!(matches!(
            inner_product(&[1.0, 2.0], &[1.0, 2.0, 3.0], &q),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(l2_distance(&[1.0, 2.0], &[1.0, 2.0, 3.0], &q).is_err());
    }

    // ── 4. Datasets ──

    #[test]
    fn dataset_rows_round_trip() {
        let g = grid(&[0.0, 0.5, 1.0]);
        let d = FunctionalDataset::from_rows(g, vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]])
            .unwrap();
        assert_eq!(d.n_functions(), 2);
        assert_eq!(d.n_points(), 3);
        assert_eq!(d.row(0), &[1.0, 2.0, 3.0]);
        assert_eq!(d.row(1), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn dataset_rejects_bad_rows() {
        let g = grid(&[0.0, 0.5, 1.0]);
        assert!(matches!(
            FunctionalDataset::from_rows(g.clone(), vec![]),
            Err(Error::EmptyDataset)
        ));
        assert!(matches!(
            FunctionalDataset::from_rows(g.clone(), vec![vec![1.0, 2.0]]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            FunctionalDataset::from_rows(g, vec![vec![1.0, f64::NAN, 2.0]]),
            Err(Error::NonFiniteValue { row: 0, col: 1 })
        ));
    }

    // ── 5. Properties ──

    proptest! {
        /// Symmetry must be exact: both orders run the identical summation.
        #[test]
        fn inner_product_symmetry_is_exact(
            vals in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..20)
        ) {
            let m = vals.len();
            let g = SampleGrid::uniform(0.0, 1.0 / (m as f64), m).unwrap();
            let q = trapezoid_weights(&g);
            let x: Vec<f64> = vals.iter().map(|p| p.0).collect();
            let y: Vec<f64> = vals.iter().map(|p| p.1).collect();
            let a = inner_product(&x, &y, &q).unwrap();
            let b = inner_product(&y, &x, &q).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn cauchy_schwarz_holds(
            vals in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..20)
        ) {
            let m = vals.len();
            let g = SampleGrid::uniform(0.0, 1.0 / (m as f64), m).unwrap();
            let q = trapezoid_weights(&g);
            let x: Vec<f64> = vals.iter().map(|p| p.0).collect();
            let y: Vec<f64> = vals.iter().map(|p| p.1).collect();
            let xy = inner_product(&x, &y, &q).unwrap();
            let xx = inner_product(&x, &x, &q).unwrap();
            let yy = inner_product(&y, &y, &q).unwrap();
            prop_assert!(xy * xy <= xx * yy + 1e-12);
        }

        #[test]
        fn triangle_inequality_holds(
            vals in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 2..20)
        ) {
            let m = vals.len();
            let g = SampleGrid::uniform(0.0, 1.0 / (m as f64), m).unwrap();
            let q = trapezoid_weights(&g);
            let x: Vec<f64> = vals.iter().map(|p| p.0).collect();
            let y: Vec<f64> = vals.iter().map(|p| p.1).collect();
            let z: Vec<f64> = vals.iter().map(|p| p.2).collect();
            let xz = l2_distance(&x, &z, &q).unwrap();
            let xy = l2_distance(&x, &y, &q).unwrap();
            let yz = l2_distance(&y, &z, &q).unwrap();
            prop_assert!(xz <= xy + yz + 1e-12);
            let xz1 = l1_distance(&x, &z, &q).unwrap();
            let xy1 = l1_distance(&x, &y, &q).unwrap();
            let yz1 = l1_distance(&y, &z, &q).unwrap();
            prop_assert!(xz1 <= xy1 + yz1 + 1e-12);
        }

        /// Distances are symmetric and zero on the diagonal.
        #[test]
        fn distances_are_metric_like(
            vals in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..20)
        ) {
            let m = vals.len();
            let g = SampleGrid::uniform(0.0, 1.0 / (m as f64), m).unwrap();
            let q = trapezoid_weights(&g);
            let x: Vec<f64> = vals.iter().map(|p| p.0).collect();
            let y: Vec<f64> = vals.iter().map(|p| p.1).collect();
            prop_assert_eq!(l2_distance(&x, &y, &q).unwrap(), l2_distance(&y, &x, &q).unwrap());
            prop_assert_eq!(l1_distance(&x, &y, &q).unwrap(), l1_distance(&y, &x, &q).unwrap());
            prop_assert_eq!(l2_distance(&x, &x, &q).unwrap(), 0.0);
            prop_assert_eq!(l1_distance(&x, &x, &q).unwrap(), 0.0);
        }

        /// Trapezoid weights always sum to the grid span.
        #[test]
        fn trapezoid_weights_sum_to_span(
            gaps in proptest::collection::vec(0.01f64..2.0, 1..30)
        ) {
            let mut t = vec![0.0];
            for gap in &gaps {
                t.push(t.last().unwrap() + gap);
            }
            let g = SampleGrid::from_points(t).unwrap();
            let q = trapezoid_weights(&g);
            let sum: f64 = q.weights().iter().sum();
            prop_assert!((sum - g.span()).abs() <= 1e-10 * g.span());
        }
    }
}
