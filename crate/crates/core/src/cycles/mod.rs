//! Example unbounded cycles at desk scale, with p-summability reports.
//!
//! A cycle couples a base grid with a spectral model of a self-adjoint
//! operator: either a closed-form eigenvalue generator with an analytic tail
//! for the resolvent trace, or a dense matrix-field discretization.
//! Summability of the cycle means the trace of `(1 + S^2)^(-p/2)` stays
//! finite and continuous over the base, which the report probes through
//! truncated partial sums.

mod circle;
mod fibration;
mod index;
mod sphere;

pub use circle::{circle_crossed_product_cycle, CircleCycle};
pub use fibration::{perturbed_fibration_cycle, trivial_fibration_cycle};
pub use index::{
    dirichlet_laplacian_eigenvalues, index_comparison_constant, index_cycle, IndexCycle,
};
pub use sphere::{sphere_embedding_cycle, sphere_profile};

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::base::{Grid, ScalarField};
use crate::error::{FieldError, Result};
use crate::linalg;
use crate::opfield::OperatorField;
use crate::zeta::gauss_legendre;
use crate::C64;

/// Closed-form spectral data: eigenvalues of `S` enumerated in increasing
/// modulus, so resolvent contributions arrive in decreasing order.
pub struct ClosedFormModel {
    /// Number of modes the truncated generator provides.
    pub count: usize,
    /// `(mode index, grid index) -> eigenvalue of S`.
    eigenvalue: Box<dyn Fn(usize, usize) -> f64 + Send + Sync>,
    /// `(consumed depth, p) -> upper bound on the remaining resolvent trace`,
    /// uniform over the grid; infinite when the trace diverges.
    tail: Option<Box<dyn Fn(usize, f64) -> f64 + Send + Sync>>,
}

impl ClosedFormModel {
    pub fn new(
        count: usize,
        eigenvalue: impl Fn(usize, usize) -> f64 + Send + Sync + 'static,
        tail: Option<Box<dyn Fn(usize, f64) -> f64 + Send + Sync>>,
    ) -> Self {
        ClosedFormModel {
            count,
            eigenvalue: Box::new(eigenvalue),
            tail,
        }
    }

    pub fn eigenvalue(&self, mode: usize, x: usize) -> f64 {
        (self.eigenvalue)(mode, x)
    }

    pub fn tail(&self, depth: usize, p: f64) -> Option<f64> {
        self.tail.as_ref().map(|t| t(depth, p))
    }
}

pub enum SpectralModel {
    ClosedForm(ClosedFormModel),
    Matrix {
        field: OperatorField,
        spectra: OnceLock<Vec<Vec<f64>>>,
    },
}

impl std::fmt::Debug for SpectralModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpectralModel::ClosedForm(m) => {
                write!(f, "ClosedForm {{ count: {} }}", m.count)
            }
            SpectralModel::Matrix { field, .. } => {
                write!(f, "Matrix {{ dim: {} }}", field.dim())
            }
        }
    }
}

impl SpectralModel {
    pub fn matrix(field: OperatorField) -> Self {
        SpectralModel::Matrix {
            field,
            spectra: OnceLock::new(),
        }
    }

    /// Modes available before the truncation runs out.
    pub fn count(&self) -> usize {
        match self {
            SpectralModel::ClosedForm(m) => m.count,
            SpectralModel::Matrix { field, .. } => field.dim(),
        }
    }

    /// Eigenvalue of `S` at `(mode, x)`, modes ordered by increasing modulus.
    pub fn eigenvalue(&self, mode: usize, x: usize) -> f64 {
        match self {
            SpectralModel::ClosedForm(m) => m.eigenvalue(mode, x),
            SpectralModel::Matrix { .. } => self.matrix_spectra()[x][mode],
        }
    }

    pub fn tail(&self, depth: usize, p: f64) -> Option<f64> {
        match self {
            SpectralModel::ClosedForm(m) => m.tail(depth, p),
            SpectralModel::Matrix { .. } => None,
        }
    }

    fn matrix_spectra(&self) -> &Vec<Vec<f64>> {
        match self {
            SpectralModel::Matrix { field, spectra } => spectra.get_or_init(|| {
                field
                    .matrices()
                    .par_iter()
                    .map(|m| {
                        let mut eigs = linalg::hermitian_eigen_sorted(m).0;
                        eigs.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
                        eigs
                    })
                    .collect()
            }),
            SpectralModel::ClosedForm(_) => unreachable!("closed-form model has no matrix"),
        }
    }
}

/// A module over the base grid together with spectral data of a regular
/// self-adjoint operator and the exponent at which summability is claimed.
#[derive(Debug)]
pub struct KKCycle {
    pub label: String,
    pub grid: Arc<Grid>,
    pub model: SpectralModel,
    pub claimed_summability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Summable,
    NotSummable,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct DepthValue {
    pub depth: usize,
    /// `sup_x` of the truncated trace `sum_k (1 + lambda_k(x)^2)^(-p/2)`.
    pub sup_trace: f64,
    /// The same value with the analytic tail added, when a tail model exists.
    pub corrected: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SummabilityReport {
    pub p: f64,
    /// Pointwise Schatten p-norm of the truncated resolvent at the deepest depth.
    pub resolvent_norm_field: ScalarField,
    /// Analytic tail at the deepest depth, when the model provides one.
    pub tail_model: Option<f64>,
    pub verdict: Verdict,
    /// Raw partial sums per depth so the verdict can be audited.
    pub partial_sums: Vec<DepthValue>,
    /// Least-squares decay exponent of per-mode contributions, when fittable.
    pub decay_exponent: Option<f64>,
    /// True when the truncation consumed the model's full spectrum.
    pub exhausted: bool,
}

/// Convergence tolerance for the default summability verdict.
pub const SUMMABILITY_TOL: f64 = 1e-6;

/// Probes `(1 + S^2)^(-1/2)` for membership in the Schatten p-class by
/// truncated traces at the given depths. The verdict is `Summable` when the
/// (tail-corrected) depth sequence is Cauchy at `tol` with a finite tail,
/// `NotSummable` when the tail diverges or per-mode contributions decay no
/// faster than harmonically, and `Inconclusive` otherwise. Divergence cannot
/// be proven numerically, so the raw partial sums always ship with the
/// report.
pub fn summability_report(
    cycle: &KKCycle,
    p: f64,
    truncation_depths: &[usize],
    tol: f64,
) -> Result<SummabilityReport> {
    if p <= 0.0 {
        return Err(FieldError::BadExponent {
            p,
            reason: "summability needs p > 0",
        });
    }
    if truncation_depths.is_empty() {
        return Err(FieldError::BadDomain("no truncation depths supplied".into()));
    }
    let count = cycle.model.count();
    let mut depths: Vec<usize> = truncation_depths
        .iter()
        .map(|&d| d.min(count))
        .filter(|&d| d > 0)
        .collect();
    depths.sort_unstable();
    depths.dedup();
    if depths.is_empty() {
        return Err(FieldError::BadDomain("all depths truncate to zero".into()));
    }
    let max_depth = *depths.last().unwrap();
    let npoints = cycle.grid.len();

    let mut partial = vec![0.0f64; npoints];
    let mut per_mode_sup = Vec::with_capacity(max_depth);
    let mut partial_sums = Vec::with_capacity(depths.len());
    let mut depth_iter = depths.iter().peekable();
    for mode in 0..max_depth {
        let mut sup_term = 0.0f64;
        for (x, slot) in partial.iter_mut().enumerate() {
            let lambda = cycle.model.eigenvalue(mode, x);
            let term = (1.0 + lambda * lambda).powf(-p / 2.0);
            *slot += term;
            sup_term = sup_term.max(term);
        }
        per_mode_sup.push(sup_term);
        if let Some(&&d) = depth_iter.peek() {
            if mode + 1 == d {
                depth_iter.next();
                let sup_trace = partial.iter().copied().fold(0.0, f64::max);
                let corrected = cycle.model.tail(d, p).map(|t| sup_trace + t);
                partial_sums.push(DepthValue {
                    depth: d,
                    sup_trace,
                    corrected,
                });
            }
        }
    }

    let resolvent_norm_field = ScalarField::from_real(
        cycle.grid.clone(),
        partial.iter().map(|s| s.powf(1.0 / p)).collect(),
    )?;
    let tail_model = cycle.model.tail(max_depth, p);
    let exhausted = max_depth >= count;

    let decay_exponent = fit_decay_exponent(&per_mode_sup);

    let verdict = decide_verdict(&partial_sums, tail_model, exhausted, decay_exponent, tol);
    Ok(SummabilityReport {
        p,
        resolvent_norm_field,
        tail_model,
        verdict,
        partial_sums,
        decay_exponent,
        exhausted,
    })
}

/// Least-squares slope of `log a_k` against `log k` over the deeper half of
/// the consumed modes; `None` when there are too few positive terms.
fn fit_decay_exponent(per_mode_sup: &[f64]) -> Option<f64> {
    let n = per_mode_sup.len();
    if n < 6 {
        return None;
    }
    let window: Vec<(f64, f64)> = (n / 2..n)
        .filter(|&k| per_mode_sup[k] > 0.0)
        .map(|k| ((k as f64 + 1.0).ln(), per_mode_sup[k].ln()))
        .collect();
    if window.len() < 3 {
        return None;
    }
    let m = window.len() as f64;
    let sx: f64 = window.iter().map(|(x, _)| x).sum();
    let sy: f64 = window.iter().map(|(_, y)| y).sum();
    let sxx: f64 = window.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = window.iter().map(|(x, y)| x * y).sum();
    let denom = m * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    // slope of log a_k ~ -q log k; report q
    Some(-(m * sxy - sx * sy) / denom)
}

fn decide_verdict(
    partial_sums: &[DepthValue],
    tail_model: Option<f64>,
    exhausted: bool,
    decay_exponent: Option<f64>,
    tol: f64,
) -> Verdict {
    if let Some(tail) = tail_model {
        if !tail.is_finite() {
            return Verdict::NotSummable;
        }
    }
    if exhausted && tail_model.unwrap_or(0.0) <= tol {
        // the finite spectrum was consumed entirely: the trace is exact
        return Verdict::Summable;
    }
    if let Some(q) = decay_exponent {
        if q <= 1.0 {
            return Verdict::NotSummable;
        }
    }
    if partial_sums.len() >= 2 {
        let pick = |dv: &DepthValue| dv.corrected.unwrap_or(dv.sup_trace);
        let last = pick(&partial_sums[partial_sums.len() - 1]);
        let prev = pick(&partial_sums[partial_sums.len() - 2]);
        if (last - prev).abs() < tol && tail_model.map_or(true, f64::is_finite) {
            return Verdict::Summable;
        }
    }
    Verdict::Inconclusive
}

#[derive(Debug, Clone)]
pub struct ExternalProductReport {
    pub holds: bool,
    /// Smallest eigenvalue of `RHS - LHS` over the grid.
    pub margin: f64,
}

/// Checks the resolvent-power inequality behind additivity of summability
/// under external products: for commuting positive fields `a, b` and
/// exponents `p, q > 0`,
/// `(1 + a + b)^(-p-q) <= (1 + a)^(-p/2) (1 + b)^(-q) (1 + a)^(-p/2)`.
pub fn external_product_check(
    a: &OperatorField,
    b: &OperatorField,
    p: f64,
    q: f64,
) -> Result<ExternalProductReport> {
    if p <= 0.0 || q <= 0.0 {
        return Err(FieldError::BadExponent {
            p: p.min(q),
            reason: "external product needs p, q > 0",
        });
    }
    a.check_compatible(b)?;
    for field in [a, b] {
        let dev = field.sup_hermitian_deviation();
        if dev > 1e-8 {
            return Err(FieldError::NotHermitian { deviation: dev });
        }
    }
    let mut commutator_sup = 0.0f64;
    for (ma, mb) in a.matrices().iter().zip(b.matrices()) {
        commutator_sup = commutator_sup.max(linalg::op_norm(&(ma * mb - mb * ma)));
    }
    if commutator_sup >= 1e-10 {
        return Err(FieldError::NotCommuting {
            norm: commutator_sup,
        });
    }

    let mut margin = f64::INFINITY;
    for x in 0..a.grid().len() {
        let ma = a.localize(x)?;
        let mb = b.localize(x)?;
        let dim = ma.nrows();
        let one = nalgebra::DMatrix::<C64>::identity(dim, dim);
        let min_eig = |m: &nalgebra::DMatrix<C64>| -> Result<()> {
            let low = linalg::hermitian_eigen_sorted(m).0.last().copied().unwrap_or(0.0);
            if low < -crate::opfield::POSITIVITY_TOL {
                return Err(FieldError::NotPositive {
                    min_eigenvalue: low,
                });
            }
            Ok(())
        };
        min_eig(ma)?;
        min_eig(mb)?;

        let lhs = linalg::hermitian_calculus(&(&one + ma + mb), |l| {
            C64::new(l.powf(-p - q), 0.0)
        });
        let a_half = linalg::hermitian_calculus(&(&one + ma), |l| C64::new(l.powf(-p / 2.0), 0.0));
        let b_pow = linalg::hermitian_calculus(&(&one + mb), |l| C64::new(l.powf(-q), 0.0));
        let rhs = &a_half * b_pow * &a_half;
        let gap = linalg::hermitize(&(rhs - lhs));
        let low = linalg::hermitian_eigen_sorted(&gap)
            .0
            .last()
            .copied()
            .unwrap_or(0.0);
        margin = margin.min(low);
    }
    Ok(ExternalProductReport {
        holds: margin >= -1e-9,
        margin,
    })
}

// Tail evaluation for spectra `lambda_k = k` on the integers: remainders of
// `sum (1 + k^2)^(-p/2)` by Euler-Maclaurin with a series-expanded integral.

/// `sum_{k >= a} (1 + k^2)^(-p/2)` for `a >= 1`; infinite for `p <= 1`.
pub(crate) fn integer_resolvent_tail(a: usize, p: f64) -> f64 {
    if p <= 1.0 {
        return f64::INFINITY;
    }
    let a = a as f64;
    let g = |x: f64| (1.0 + x * x).powf(-p / 2.0);
    // -g'(a)/12
    let gprime_correction = p * a * (1.0 + a * a).powf(-(p + 2.0) / 2.0) / 12.0;
    integral_resolvent(a, p) + g(a) / 2.0 + gprime_correction
}

/// `int_a^inf (1 + x^2)^(-p/2) dx` for `a >= 1`, by 32-node quadrature up to
/// x = 8 and a binomial expansion of the integrand beyond.
fn integral_resolvent(a: f64, p: f64) -> f64 {
    let split = 8.0f64.max(a);
    let mut total = 0.0;
    if a < split {
        let (nodes, weights) = gauss_legendre(32);
        let mid = 0.5 * (a + split);
        let half = 0.5 * (split - a);
        total += nodes
            .iter()
            .zip(&weights)
            .map(|(t, w)| w * half * (1.0 + (mid + half * t).powi(2)).powf(-p / 2.0))
            .sum::<f64>();
    }
    // beyond the split: (1 + x^2)^(-p/2) = sum_j C(-p/2, j) x^(-p - 2j)
    let mut coeff = 1.0f64;
    for j in 0..30 {
        let jf = j as f64;
        if j > 0 {
            coeff *= (-p / 2.0 - (jf - 1.0)) / jf;
        }
        let power = p + 2.0 * jf - 1.0;
        total += coeff * split.powf(-power) / power;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::FieldSampler;
    use nalgebra::DMatrix;

    #[test]
    fn integer_tail_matches_direct_summation() {
        for (a, p) in [(5usize, 2.0), (12, 2.0), (3, 1.5), (40, 3.0)] {
            let direct: f64 = (a..200_000)
                .map(|k| {
                    let k = k as f64;
                    (1.0 + k * k).powf(-p / 2.0)
                })
                .sum();
            let series = integer_resolvent_tail(a, p);
            assert!(
                (series - direct).abs() < 1e-7,
                "tail mismatch at a = {a}, p = {p}: {series} vs {direct}"
            );
        }
        assert!(!integer_resolvent_tail(10, 1.0).is_finite());
        assert!(!integer_resolvent_tail(10, 0.5).is_finite());
    }

    #[test]
    fn external_product_trivial_equality() {
        let grid = Grid::line(2, 0.0, 1.0);
        let zero = OperatorField::zeros(grid, 3);
        let report = external_product_check(&zero, &zero, 1.0, 1.0).unwrap();
        assert!(report.holds);
        assert!(report.margin.abs() < 1e-12);
    }

    #[test]
    fn external_product_scalar_case() {
        // a = 1, b = 3, p = q = 1: lhs = 5^-2 = 0.04,
        // rhs = 2^(-1/2) * 4^(-1) * 2^(-1/2) = 1/8
        let grid = Grid::line(2, 0.0, 1.0);
        let a = OperatorField::constant(grid.clone(), DMatrix::from_element(1, 1, C64::new(1.0, 0.0)))
            .unwrap();
        let b = OperatorField::constant(grid, DMatrix::from_element(1, 1, C64::new(3.0, 0.0)))
            .unwrap();
        let report = external_product_check(&a, &b, 1.0, 1.0).unwrap();
        assert!(report.holds);
        // margin = rhs - lhs = 1/8 - 1/25
        assert!((report.margin - (0.125 - 0.04)).abs() < 1e-12);
    }

    #[test]
    fn external_product_random_commuting_pairs() {
        let grid = Grid::line(3, 0.0, 1.0);
        for seed in 0..20 {
            let mut sampler = FieldSampler::new(seed, grid.clone(), 4);
            let (a, b) = sampler.commuting_positive_pair();
            for (p, q) in [(1.0, 1.0), (2.0, 0.5)] {
                let report = external_product_check(&a, &b, p, q).unwrap();
                assert!(report.holds, "violated at seed {seed}, (p,q)=({p},{q})");
            }
        }
    }

    #[test]
    fn external_product_rejects_noncommuting() {
        let grid = Grid::line(2, 0.0, 1.0);
        let mut sampler = FieldSampler::new(5, grid.clone(), 3);
        let a = sampler.positive_field();
        let b = sampler.positive_field();
        assert!(matches!(
            external_product_check(&a, &b, 1.0, 1.0),
            Err(FieldError::NotCommuting { .. })
        ));
    }

    #[test]
    fn decay_fit_recovers_power_law() {
        let terms: Vec<f64> = (1..=64).map(|k| (k as f64).powf(-2.0)).collect();
        let q = fit_decay_exponent(&terms).unwrap();
        assert!((q - 2.0).abs() < 1e-6);
    }
}
