//! The sampled base space and the scalar fields living on it.
//!
//! A [`Grid`] is a finite list of sample points standing in for a compact
//! Hausdorff space, together with an adjacency relation used for discrete
//! continuity-modulus estimates. A [`ScalarField`] assigns one complex value
//! to every grid point and realizes an element of the function algebra over
//! the base, with the sup norm as the algebra norm.

use std::sync::Arc;

use crate::error::{FieldError, Result};
use crate::C64;

/// Pointwise nonnegativity tolerance for series increments, absorbing round-off.
pub const MONOTONE_TOL: f64 = 1e-12;

/// Default tolerance below which a field must dip at the point at infinity
/// of a compactified grid.
pub const VANISH_AT_INFINITY_TOL: f64 = 1e-9;

/// A finite sample of a compact base space.
///
/// Points carry coordinates in some ambient real vector space, the metric is
/// the Euclidean distance between coordinates, and `adjacency` declares which
/// sample pairs count as neighboring for modulus estimates. When
/// `compactified` is set, the last point is the distinguished point at
/// infinity of a one-point compactification.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<Vec<f64>>,
    adjacency: Vec<(usize, usize)>,
    compactified: bool,
}

impl Grid {
    pub fn new(points: Vec<Vec<f64>>, adjacency: Vec<(usize, usize)>) -> Result<Arc<Self>> {
        Self::build(points, adjacency, false)
    }

    /// Same as [`Grid::new`], but marks the last point as the point at infinity.
    pub fn new_compactified(
        points: Vec<Vec<f64>>,
        adjacency: Vec<(usize, usize)>,
    ) -> Result<Arc<Self>> {
        Self::build(points, adjacency, true)
    }

    fn build(
        points: Vec<Vec<f64>>,
        adjacency: Vec<(usize, usize)>,
        compactified: bool,
    ) -> Result<Arc<Self>> {
        if points.is_empty() {
            return Err(FieldError::InvalidGrid("no sample points".into()));
        }
        let coord_dim = points[0].len();
        if points.iter().any(|p| p.len() != coord_dim) {
            return Err(FieldError::InvalidGrid(
                "points have inconsistent coordinate dimensions".into(),
            ));
        }
        let n = points.len();
        for &(i, j) in &adjacency {
            if i >= n || j >= n {
                return Err(FieldError::InvalidGrid(format!(
                    "adjacency pair ({i}, {j}) out of range for {n} points"
                )));
            }
            if i == j {
                return Err(FieldError::InvalidGrid(format!(
                    "adjacency pair ({i}, {j}) is a self-loop"
                )));
            }
        }
        // The metric must vanish only on the diagonal.
        for i in 0..n {
            for j in (i + 1)..n {
                if euclidean(&points[i], &points[j]) == 0.0 {
                    return Err(FieldError::InvalidGrid(format!(
                        "points {i} and {j} coincide"
                    )));
                }
            }
        }
        // Every point must take part in at least one adjacency pair so the
        // modulus estimator covers the whole grid.
        if n > 1 {
            let mut covered = vec![false; n];
            for &(i, j) in &adjacency {
                covered[i] = true;
                covered[j] = true;
            }
            if let Some(idx) = covered.iter().position(|c| !c) {
                return Err(FieldError::InvalidGrid(format!(
                    "point {idx} participates in no adjacency pair"
                )));
            }
        }
        Ok(Arc::new(Grid {
            points,
            adjacency,
            compactified,
        }))
    }

    /// Uniform one-dimensional grid of `n` points on `[a, b]` with
    /// consecutive-neighbor adjacency.
    pub fn line(n: usize, a: f64, b: f64) -> Arc<Self> {
        assert!(n >= 1, "line grid needs at least one point");
        let points: Vec<Vec<f64>> = if n == 1 {
            vec![vec![a]]
        } else {
            (0..n)
                .map(|i| vec![a + (b - a) * i as f64 / (n - 1) as f64])
                .collect()
        };
        let adjacency = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Self::build(points, adjacency, false).expect("line grid is valid")
    }

    /// `n` points on the unit circle in the plane with ring adjacency.
    pub fn circle(n: usize) -> Arc<Self> {
        assert!(n >= 3, "circle grid needs at least three points");
        let points = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
        let adjacency = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::build(points, adjacency, false).expect("circle grid is valid")
    }

    pub fn single_point() -> Arc<Self> {
        Self::build(vec![vec![0.0]], vec![], false).expect("one-point grid is valid")
    }

    /// Product grid: points are coordinate concatenations, adjacency is the
    /// graph product (neighbors in one factor, equal in the other).
    pub fn product(left: &Arc<Grid>, right: &Arc<Grid>) -> Arc<Self> {
        let mut points = Vec::with_capacity(left.len() * right.len());
        for a in left.points() {
            for b in right.points() {
                let mut coords = a.clone();
                coords.extend_from_slice(b);
                points.push(coords);
            }
        }
        let idx = |i: usize, j: usize| i * right.len() + j;
        let mut adjacency = Vec::new();
        for &(i, i2) in left.adjacency() {
            for j in 0..right.len() {
                adjacency.push((idx(i, j), idx(i2, j)));
            }
        }
        for &(j, j2) in right.adjacency() {
            for i in 0..left.len() {
                adjacency.push((idx(i, j), idx(i, j2)));
            }
        }
        // Degenerate factors (single points) contribute no edges of their own.
        if adjacency.is_empty() && points.len() > 1 {
            for k in 0..points.len() - 1 {
                adjacency.push((k, k + 1));
            }
        }
        Self::build(points, adjacency, false).expect("product grid is valid")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one point
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn adjacency(&self) -> &[(usize, usize)] {
        &self.adjacency
    }

    pub fn compactified(&self) -> bool {
        self.compactified
    }

    /// Index of the point at infinity, when the grid is compactified.
    pub fn infinity_index(&self) -> Option<usize> {
        self.compactified.then(|| self.len() - 1)
    }

    /// Euclidean distance between sample points `i` and `j`.
    pub fn metric(&self, i: usize, j: usize) -> f64 {
        euclidean(&self.points[i], &self.points[j])
    }

    /// Largest pairwise distance on the grid.
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut d = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                d = d.max(self.metric(i, j));
            }
        }
        d
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// One complex value per grid point; an element of the function algebra.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<C64>,
}

impl ScalarField {
    pub fn new(grid: Arc<Grid>, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(FieldError::InvalidGrid(format!(
                "value count {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn from_real(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        let values = values.into_iter().map(|v| C64::new(v, 0.0)).collect();
        Self::new(grid, values)
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(usize) -> C64) -> Self {
        let values = (0..grid.len()).map(f).collect();
        ScalarField { grid, values }
    }

    pub fn constant(grid: Arc<Grid>, value: C64) -> Self {
        let values = vec![value; grid.len()];
        ScalarField { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        Self::constant(grid, C64::new(0.0, 0.0))
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> C64 {
        self.values[i]
    }

    /// Realization of the algebra norm: `max_x |a(x)|`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_real(&self) -> f64 {
        self.values.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_real(&self) -> f64 {
        self.values.iter().map(|v| v.re).fold(f64::INFINITY, f64::min)
    }

    pub fn max_imag_abs(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.max_imag_abs() <= tol
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn conj(&self) -> Self {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(ScalarField {
            grid: self.grid.clone(),
            values,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(ScalarField {
            grid: self.grid.clone(),
            values,
        })
    }

    /// Pointwise algebra product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(ScalarField {
            grid: self.grid.clone(),
            values,
        })
    }

    /// Discrete continuity modulus over the declared adjacencies:
    /// `max |a(x_i) - a(x_j)| / d(x_i, x_j)`.
    pub fn continuity_modulus(&self) -> f64 {
        self.grid
            .adjacency()
            .iter()
            .map(|&(i, j)| (self.values[i] - self.values[j]).norm() / self.grid.metric(i, j))
            .fold(0.0, f64::max)
    }

    /// Whether the field dips below `tol` at the point at infinity.
    /// Returns `None` when the grid is not compactified.
    pub fn vanishes_at_infinity(&self, tol: f64) -> Option<bool> {
        self.grid
            .infinity_index()
            .map(|i| self.values[i].norm() <= tol)
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(FieldError::GridMismatch)
        }
    }

    pub fn check_on_grid(&self, grid: &Arc<Grid>) -> Result<()> {
        if Arc::ptr_eq(&self.grid, grid) || *self.grid == **grid {
            Ok(())
        } else {
            Err(FieldError::GridMismatch)
        }
    }
}

/// Realization of the algebra norm as a free function.
pub fn sup_norm(a: &ScalarField) -> f64 {
    a.sup_norm()
}

/// Outcome of monitoring a positive series for uniform convergence.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub converged: bool,
    pub terms_used: usize,
    pub final_increment_sup: f64,
    /// Per-point magnitude of the tail estimate at truncation.
    pub uniformity_profile: Vec<f64>,
}

/// Accumulates a series of pointwise-nonnegative increments until the sup
/// norm of the tail estimate (last increment times `tail_multiplier`) drops
/// below `tol`, or `max_terms` increments have been consumed.
///
/// Positive series over the function algebra converge in norm exactly when
/// their pointwise sums stay continuous, so a uniform last-increment test is
/// the faithful finite-sample convergence monitor. Callers that know an
/// analytic tail envelope can sharpen the test through `tail_multiplier`.
pub fn dini_monitor_with_tail<I>(
    grid: &Arc<Grid>,
    increments: I,
    tol: f64,
    max_terms: usize,
    tail_multiplier: f64,
) -> Result<(ScalarField, ConvergenceReport)>
where
    I: IntoIterator<Item = ScalarField>,
{
    if tol <= 0.0 {
        return Err(FieldError::BadDomain(format!(
            "dini monitor tolerance must be positive, got {tol}"
        )));
    }
    if max_terms == 0 {
        return Err(FieldError::BadDomain(
            "dini monitor needs max_terms >= 1".into(),
        ));
    }
    if tail_multiplier <= 0.0 {
        return Err(FieldError::BadDomain(format!(
            "tail multiplier must be positive, got {tail_multiplier}"
        )));
    }

    let mut sum = ScalarField::zeros(grid.clone());
    let mut terms_used = 0usize;
    let mut last_sup = 0.0f64;
    let mut profile = vec![0.0f64; grid.len()];
    let mut converged = true; // an empty series has converged trivially

    for increment in increments {
        sum.check_same_grid(&increment)?;
        terms_used += 1;
        let min_re = increment.min_real();
        if min_re < -MONOTONE_TOL || increment.max_imag_abs() > MONOTONE_TOL {
            return Err(FieldError::NonMonotone {
                term: terms_used,
                min_value: min_re.min(-increment.max_imag_abs()),
            });
        }
        sum = sum.add(&increment)?;
        last_sup = increment.sup_norm();
        for (slot, v) in profile.iter_mut().zip(increment.values()) {
            *slot = v.norm() * tail_multiplier;
        }
        if last_sup * tail_multiplier <= tol {
            converged = true;
            break;
        }
        converged = false;
        if terms_used == max_terms {
            break;
        }
    }

    let report = ConvergenceReport {
        converged,
        terms_used,
        final_increment_sup: last_sup,
        uniformity_profile: profile,
    };
    Ok((sum, report))
}

/// [`dini_monitor_with_tail`] with the default pure last-increment test.
pub fn dini_monitor<I>(
    grid: &Arc<Grid>,
    increments: I,
    tol: f64,
    max_terms: usize,
) -> Result<(ScalarField, ConvergenceReport)>
where
    I: IntoIterator<Item = ScalarField>,
{
    dini_monitor_with_tail(grid, increments, tol, max_terms, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn sup_norm_examples() {
        let grid = Grid::line(4, 0.0, 1.0);
        assert_eq!(ScalarField::constant(grid.clone(), c(1.0)).sup_norm(), 1.0);
        assert_eq!(ScalarField::zeros(grid.clone()).sup_norm(), 0.0);

        let grid3 = Grid::line(3, -1.0, 1.0); // points -1, 0, 1
        let f = ScalarField::from_real(grid3.clone(), vec![-1.0, 0.5, 1.0]).unwrap();
        assert_eq!(f.sup_norm(), 1.0);
    }

    #[test]
    fn sup_norm_zero_iff_zero_field() {
        let grid = Grid::line(3, 0.0, 1.0);
        let f = ScalarField::from_real(grid, vec![0.0, 1e-300, 0.0]).unwrap();
        assert!(f.sup_norm() > 0.0);
    }

    #[test]
    fn grid_validation() {
        assert!(matches!(
            Grid::new(vec![], vec![]),
            Err(FieldError::InvalidGrid(_))
        ));
        // out-of-range adjacency
        assert!(Grid::new(vec![vec![0.0], vec![1.0]], vec![(0, 2)]).is_err());
        // duplicate points make the metric degenerate
        assert!(Grid::new(vec![vec![0.0], vec![0.0]], vec![(0, 1)]).is_err());
        // uncovered point
        assert!(Grid::new(vec![vec![0.0], vec![1.0], vec![2.0]], vec![(0, 1)]).is_err());
    }

    #[test]
    fn metric_is_symmetric_and_positive() {
        let grid = Grid::circle(5);
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(grid.metric(i, j), grid.metric(j, i));
                if i != j {
                    assert!(grid.metric(i, j) > 0.0);
                }
            }
        }
    }

    #[test]
    fn product_grid_shape() {
        let a = Grid::line(3, 0.0, 1.0);
        let b = Grid::line(2, 0.0, 1.0);
        let p = Grid::product(&a, &b);
        assert_eq!(p.len(), 6);
        assert_eq!(p.point(0).len(), 2);
        // edges: 2*2 from the left factor + 1*3 from the right factor
        assert_eq!(p.adjacency().len(), 7);
    }

    #[test]
    fn continuity_modulus_of_linear_field() {
        let grid = Grid::line(2, 0.0, 1.0);
        let f = ScalarField::from_real(grid, vec![0.0, 1.0]).unwrap();
        assert!((f.continuity_modulus() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn compactified_vanishing() {
        let grid =
            Grid::new_compactified(vec![vec![0.0], vec![1.0], vec![2.0]], vec![(0, 1), (1, 2)])
                .unwrap();
        let dies = ScalarField::from_real(grid.clone(), vec![1.0, 0.5, 1e-12]).unwrap();
        let lives = ScalarField::from_real(grid, vec![1.0, 0.5, 0.3]).unwrap();
        assert_eq!(dies.vanishes_at_infinity(VANISH_AT_INFINITY_TOL), Some(true));
        assert_eq!(
            lives.vanishes_at_infinity(VANISH_AT_INFINITY_TOL),
            Some(false)
        );
        let plain = Grid::line(2, 0.0, 1.0);
        let f = ScalarField::zeros(plain);
        assert_eq!(f.vanishes_at_infinity(VANISH_AT_INFINITY_TOL), None);
    }

    #[test]
    fn dini_geometric_series() {
        // increments 2^-i; direct summation oracle says the sup of the i-th
        // increment first dips below 1e-6 at i = 20, i.e. after 21 terms.
        let grid = Grid::line(3, 0.0, 1.0);
        let increments = (0..100).map(|i| {
            ScalarField::constant(grid.clone(), c(0.5f64.powi(i)))
        });
        let (sum, report) = dini_monitor(&grid, increments, 1e-6, 100).unwrap();
        assert!(report.converged);
        assert_eq!(report.terms_used, 21);
        // oracle: direct summation of the consumed terms
        let direct: f64 = (0..21).map(|i| 0.5f64.powi(i)).sum();
        assert!((sum.value(0).re - direct).abs() < 1e-12);
        assert!(report.final_increment_sup <= 1e-6);
    }

    #[test]
    fn dini_zero_series() {
        let grid = Grid::line(2, 0.0, 1.0);
        let increments = std::iter::repeat_with({
            let g = grid.clone();
            move || ScalarField::zeros(g.clone())
        })
        .take(50);
        let (_, report) = dini_monitor(&grid, increments, 1e-6, 50).unwrap();
        assert!(report.converged);
        assert_eq!(report.terms_used, 1);
    }

    #[test]
    fn dini_harmonic_exhausts() {
        // oracle: the 1000th increment is 1/1000 > 1e-6, so the monitor must
        // exhaust its budget without converging.
        let grid = Grid::line(2, 0.0, 1.0);
        let increments = (1..=2000).map(|i| ScalarField::constant(grid.clone(), c(1.0 / i as f64)));
        let (_, report) = dini_monitor(&grid, increments, 1e-6, 1000).unwrap();
        assert!(!report.converged);
        assert_eq!(report.terms_used, 1000);
        assert!(report.final_increment_sup > 1e-6);
    }

    #[test]
    fn dini_rejects_negative_increments() {
        let grid = Grid::line(2, 0.0, 1.0);
        let increments = vec![
            ScalarField::constant(grid.clone(), c(0.5)),
            ScalarField::constant(grid.clone(), c(-0.25)),
        ];
        let err = dini_monitor(&grid, increments, 1e-6, 10).unwrap_err();
        assert!(matches!(err, FieldError::NonMonotone { term: 2, .. }));
    }

    #[test]
    fn dini_tail_multiplier_sharpens() {
        // Geometric series with ratio 1/2 has tail = last increment, so the
        // multiplier 1 test is already exact; a multiplier of 2 must stop at
        // the same term or one later, never earlier.
        let grid = Grid::line(2, 0.0, 1.0);
        let mk = |mult: f64| {
            let increments = (0..100).map(|i| ScalarField::constant(grid.clone(), c(0.5f64.powi(i))));
            dini_monitor_with_tail(&grid, increments, 1e-6, 100, mult)
                .unwrap()
                .1
                .terms_used
        };
        assert!(mk(2.0) >= mk(1.0));
    }
}
