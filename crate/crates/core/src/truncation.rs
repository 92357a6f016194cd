//! Finite-rank truncations `P_n T P_n` with quantitative Schatten-norm error
//! bounds, and compactness certification by finite-rank approximability.
//!
//! The truncation projections are constant fields in the standard
//! coordinates; module-adapted truncations are obtained by conjugating
//! through a frame first.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{FieldError, Result};
use crate::linalg;
use crate::opfield::OperatorField;
use crate::schatten::schatten_norm_field;
use crate::C64;

/// Slack allowed between a measured truncation error and its proven bound.
pub const BOUND_SLACK: f64 = 1e-9;

/// The compression `P_n T P_n` onto the first `n` standard coordinates.
pub fn truncate(t: &OperatorField, n: usize) -> Result<OperatorField> {
    let dim = t.dim();
    if n > dim {
        return Err(FieldError::RankOutOfRange { rank: n, dim });
    }
    let matrices = t
        .matrices()
        .iter()
        .map(|m| {
            let mut out = DMatrix::<C64>::zeros(dim, dim);
            out.view_mut((0, 0), (n, n)).copy_from(&m.view((0, 0), (n, n)));
            out
        })
        .collect();
    OperatorField::new(t.grid().clone(), dim, matrices)
}

/// The weak polar decomposition `T = S |T|^(1/2)` with `|S|^2 = |T|`,
/// computed fiberwise from the singular value decomposition.
pub fn weak_polar(t: &OperatorField) -> Result<(OperatorField, OperatorField)> {
    let dim = t.dim();
    let factors: Vec<(DMatrix<C64>, DMatrix<C64>)> = t
        .matrices()
        .par_iter()
        .map(|m| {
            let svd = m.clone().svd(true, true);
            let u = svd.u.expect("svd with u requested");
            let v_t = svd.v_t.expect("svd with v requested");
            let root = DMatrix::<C64>::from_diagonal(&DVector::from_iterator(
                svd.singular_values.len(),
                svd.singular_values.iter().map(|s| C64::new(s.sqrt(), 0.0)),
            ));
            let s = &u * &root * &v_t;
            let abs_half = v_t.adjoint() * root * v_t;
            (s, abs_half)
        })
        .collect();
    let (s, abs_half): (Vec<_>, Vec<_>) = factors.into_iter().unzip();
    Ok((
        OperatorField::new(t.grid().clone(), dim, s)?,
        OperatorField::new(t.grid().clone(), dim, abs_half)?,
    ))
}

/// The polar-route truncation `P_n S P_n |T|^(1/2) P_n`, the variant suited
/// to exponents below two.
pub fn truncate_polar(t: &OperatorField, n: usize) -> Result<OperatorField> {
    let (s, abs_half) = weak_polar(t)?;
    let sn = truncate(&s, n)?;
    let compressed = sn.compose(&truncate(&abs_half, n)?)?;
    truncate(&compressed, n)
}

/// Both proven truncation error bounds next to the measured error.
#[derive(Debug, Clone)]
pub struct TruncationBound {
    pub p: f64,
    pub n: usize,
    pub m: usize,
    /// The smaller of the two proven bounds.
    pub bound: f64,
    /// Sup over the grid of the corner-estimate bound
    /// `||T||_p^(1/2) ((tr e|T*|^p e)^(1/2p) + (tr e|T|^p e)^(1/2p))`.
    pub corner_bound: f64,
    /// The aggregate bound `[2^(2p-1) sup_x tr|T|^p * sum <e_i, (|T|^p + |T*|^p) e_i>]^(1/2p)`.
    pub aggregate_bound: f64,
    pub measured: f64,
}

impl TruncationBound {
    pub fn csv_header() -> &'static str {
        "n,m,p,bound,measured"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.n, self.m, self.p, self.bound, self.measured
        )
    }
}

/// Measures `||P_m T P_m - P_n T P_n||_p` against the two proven bounds.
/// `BoundViolated` signals an implementation bug, not bad data: the
/// inequality is a theorem.
pub fn truncation_bound(t: &OperatorField, p: f64, n: usize, m: usize) -> Result<TruncationBound> {
    let dim = t.dim();
    if p < 1.0 {
        return Err(FieldError::BadExponent {
            p,
            reason: "truncation bound needs p >= 1",
        });
    }
    if n > m || m > dim {
        return Err(FieldError::RankOutOfRange { rank: m.max(n), dim });
    }

    let abs_p = t.abs_power(p)?;
    let abs_adj_p = t.adjoint().abs_power(p)?;

    let mut corner_sup = 0.0f64;
    let mut aggregate_sup = 0.0f64;
    for x in 0..t.grid().len() {
        let tr_abs_p: f64 = abs_p.localize(x)?.diagonal().iter().map(|v| v.re).sum();
        let norm_p = tr_abs_p.max(0.0).powf(1.0 / p);
        // diagonal block of the intermediate coordinates, e = P_m - P_n
        let corner = |field: &OperatorField| -> f64 {
            field
                .localize(x)
                .map(|mat| (n..m).map(|i| mat[(i, i)].re).sum::<f64>().max(0.0))
                .unwrap_or(0.0)
        };
        let tr_e_abs = corner(&abs_p);
        let tr_e_abs_adj = corner(&abs_adj_p);
        let corner_bound =
            norm_p.sqrt() * (tr_e_abs_adj.powf(1.0 / (2.0 * p)) + tr_e_abs.powf(1.0 / (2.0 * p)));
        corner_sup = corner_sup.max(corner_bound);
        let aggregate = 2.0f64.powf(2.0 * p - 1.0) * tr_abs_p * (tr_e_abs + tr_e_abs_adj);
        aggregate_sup = aggregate_sup.max(aggregate);
    }
    let aggregate_bound = aggregate_sup.powf(1.0 / (2.0 * p));

    let diff = truncate(t, m)?.sub(&truncate(t, n)?)?;
    let measured = schatten_norm_field(&diff, p)?.sup_norm();

    let bound = corner_sup.min(aggregate_bound);
    if measured > bound + BOUND_SLACK {
        return Err(FieldError::BoundViolated { measured, bound });
    }
    Ok(TruncationBound {
        p,
        n,
        m,
        bound,
        corner_bound: corner_sup,
        aggregate_bound,
        measured,
    })
}

#[derive(Debug, Clone)]
pub struct CornerBound {
    pub p: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// For a coordinate projection `e` onto indices `a..b` and `p >= 2`, measures
/// `sup_x ||T(x) e||_p^p` against `sup_x tr e |T(x)|^p e`.
pub fn truncated_corner_bound(
    t: &OperatorField,
    e_rank_range: (usize, usize),
    p: f64,
) -> Result<CornerBound> {
    let (a, b) = e_rank_range;
    let dim = t.dim();
    if p < 2.0 {
        return Err(FieldError::BadExponent {
            p,
            reason: "corner bound needs p >= 2",
        });
    }
    if a >= b || b > dim {
        return Err(FieldError::RankOutOfRange { rank: b.max(a), dim });
    }
    let abs_p = t.abs_power(p)?;
    let mut lhs = 0.0f64;
    let mut rhs = 0.0f64;
    for x in 0..t.grid().len() {
        let m = t.localize(x)?;
        let mut te = DMatrix::<C64>::zeros(dim, dim);
        te.view_mut((0, a), (dim, b - a))
            .copy_from(&m.view((0, a), (dim, b - a)));
        let norm = linalg::schatten_norm(&te, p);
        lhs = lhs.max(norm.powf(p));
        let trace: f64 = (a..b).map(|i| abs_p.localize(x).unwrap()[(i, i)].re).sum();
        rhs = rhs.max(trace);
    }
    if lhs > rhs + BOUND_SLACK {
        return Err(FieldError::BoundViolated {
            measured: lhs,
            bound: rhs,
        });
    }
    Ok(CornerBound { p, lhs, rhs })
}

/// Finite-rank approximability data in operator norm.
#[derive(Debug, Clone)]
pub struct CompactnessCertificate {
    /// Smallest rank with tail operator norm below the tolerance.
    pub rank_needed: usize,
    /// `||T - P_n T P_n||` for n = 0..=dim.
    pub tail_profile: Vec<f64>,
    /// True when no rank short of the full dimension suffices.
    pub saturated: bool,
}

/// Finds the smallest truncation rank approximating `T` to `tol` in operator
/// norm. At finite fiber dimension every field is approximable, so a
/// certificate that only the full dimension works is reported as saturation
/// rather than an error.
pub fn compactness_certificate(t: &OperatorField, tol: f64) -> Result<CompactnessCertificate> {
    if tol <= 0.0 {
        return Err(FieldError::BadDomain(format!(
            "compactness tolerance must be positive, got {tol}"
        )));
    }
    let dim = t.dim();
    let mut tail_profile = Vec::with_capacity(dim + 1);
    let mut rank_needed = dim;
    let mut found = false;
    for n in 0..=dim {
        let tail = t.sub(&truncate(t, n)?)?.sup_operator_norm();
        tail_profile.push(tail);
        if !found && tail < tol {
            rank_needed = n;
            found = true;
        }
    }
    Ok(CompactnessCertificate {
        rank_needed,
        tail_profile,
        saturated: rank_needed == dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::Grid;
    use crate::gen::FieldSampler;
    use crate::schatten::schatten_sup_norm;
    use std::sync::Arc;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn diag_field(grid: &Arc<Grid>, entries: &[f64]) -> OperatorField {
        OperatorField::constant(
            grid.clone(),
            DMatrix::from_diagonal(&DVector::from_iterator(
                entries.len(),
                entries.iter().map(|&e| c(e)),
            )),
        )
        .unwrap()
    }

    #[test]
    fn truncate_edges() {
        let grid = Grid::line(2, 0.0, 1.0);
        let t = diag_field(&grid, &[1.0, 2.0, 3.0, 4.0]);
        let full = truncate(&t, 4).unwrap();
        assert!(full.sub(&t).unwrap().sup_operator_norm() < 1e-15);
        let none = truncate(&t, 0).unwrap();
        assert!(none.sup_operator_norm() < 1e-15);
        let half = truncate(&t, 2).unwrap();
        let expected = diag_field(&grid, &[1.0, 2.0, 0.0, 0.0]);
        assert!(half.sub(&expected).unwrap().sup_operator_norm() < 1e-15);
        assert!(matches!(
            truncate(&t, 5),
            Err(FieldError::RankOutOfRange { .. })
        ));
    }

    #[test]
    fn truncation_bound_block_diagonal_vanishes() {
        // supported in the first two coordinates: the difference is zero and
        // the corner trace vanishes
        let grid = Grid::line(2, 0.0, 1.0);
        let t = diag_field(&grid, &[1.0, -0.5, 0.0, 0.0]);
        let b = truncation_bound(&t, 2.0, 2, 4).unwrap();
        assert!(b.measured < 1e-12);
    }

    #[test]
    fn truncation_bound_dyadic_example() {
        let grid = Grid::line(2, 0.0, 1.0);
        let t = diag_field(&grid, &[1.0, 0.5, 0.25, 0.125]);
        let b = truncation_bound(&t, 2.0, 2, 4).unwrap();
        let expected = (1.0f64 / 16.0 + 1.0 / 64.0).sqrt();
        assert!((b.measured - expected).abs() < 1e-12);
        assert!(b.bound >= b.measured);
    }

    #[test]
    fn truncation_bound_monte_carlo() {
        let grid = Grid::line(4, 0.0, 1.0);
        for seed in 0..40 {
            let mut sampler = FieldSampler::new(seed, grid.clone(), 8);
            let t = sampler.operator_field().normalized();
            for p in [1.0, 2.0, 4.0] {
                let b = truncation_bound(&t, p, 3, 6).expect("bound holds");
                assert!(b.measured <= b.bound + BOUND_SLACK);
            }
        }
    }

    #[test]
    fn corner_bound_examples() {
        let grid = Grid::line(2, 0.0, 1.0);

        // diagonal commuting case is an equality
        let t = diag_field(&grid, &[0.9, 0.7, 0.5, 0.3]);
        let b = truncated_corner_bound(&t, (1, 3), 2.0).unwrap();
        assert!((b.lhs - b.rhs).abs() < 1e-12);

        // T equal to a rank-one coordinate projection: both sides one
        let e = diag_field(&grid, &[0.0, 1.0, 0.0]);
        let b = truncated_corner_bound(&e, (1, 2), 2.0).unwrap();
        assert!((b.lhs - 1.0).abs() < 1e-12);
        assert!((b.rhs - 1.0).abs() < 1e-12);

        assert!(matches!(
            truncated_corner_bound(&t, (0, 2), 1.5),
            Err(FieldError::BadExponent { .. })
        ));
    }

    #[test]
    fn corner_bound_random_fields() {
        let grid = Grid::line(3, 0.0, 1.0);
        for seed in 100..130 {
            let mut sampler = FieldSampler::new(seed, grid.clone(), 6);
            let t = sampler.operator_field().normalized();
            for p in [2.0, 3.0, 4.0] {
                let b = truncated_corner_bound(&t, (0, 2), p).expect("corner bound holds");
                assert!(b.lhs <= b.rhs + BOUND_SLACK);
            }
        }
    }

    #[test]
    fn compactness_examples() {
        let grid = Grid::line(2, 0.0, 1.0);
        let zero = OperatorField::zeros(grid.clone(), 4);
        let cert = compactness_certificate(&zero, 0.5).unwrap();
        assert_eq!(cert.rank_needed, 0);
        assert!(!cert.saturated);

        let t = diag_field(&grid, &[1.0, 0.5, 0.25, 0.125]);
        let cert = compactness_certificate(&t, 0.3).unwrap();
        assert_eq!(cert.rank_needed, 2);

        let id = OperatorField::identity(grid, 4);
        let cert = compactness_certificate(&id, 0.5).unwrap();
        assert_eq!(cert.rank_needed, 4);
        assert!(cert.saturated);
    }

    #[test]
    fn truncation_tails_are_monotone() {
        let grid = Grid::line(3, 0.0, 1.0);
        let mut sampler = FieldSampler::new(7, grid.clone(), 6);
        let t = sampler.operator_field();
        for p in [1.0, 2.0] {
            let mut last = f64::INFINITY;
            for n in 0..=6 {
                let tail = schatten_sup_norm(&t.sub(&truncate(&t, n).unwrap()).unwrap(), p).unwrap();
                assert!(tail <= last + 1e-12);
                last = tail;
            }
            assert!(last < 1e-12);
        }
    }

    #[test]
    fn weak_polar_reconstructs_and_bounds() {
        let grid = Grid::line(3, 0.0, 1.0);
        let mut sampler = FieldSampler::new(17, grid.clone(), 5);
        let t = sampler.operator_field().normalized();
        let (s, abs_half) = weak_polar(&t).unwrap();
        // reconstruction
        let recon = s.compose(&abs_half).unwrap();
        assert!(recon.sub(&t).unwrap().sup_operator_norm() < 1e-10);
        // |S|^2 = |T|
        let s_sq = s.adjoint().compose(&s).unwrap();
        let abs_t = t.abs_power(1.0).unwrap();
        assert!(s_sq.sub(&abs_t).unwrap().sup_operator_norm() < 1e-10);
        // the factorization estimate ||P S||_{2p} <= ||T||_p^{1/2}
        for p in [1.0, 2.0] {
            let ps = truncate(&s, 3).unwrap();
            let lhs = schatten_sup_norm(&ps, 2.0 * p).unwrap();
            let rhs = schatten_sup_norm(&t, p).unwrap().sqrt();
            assert!(lhs <= rhs + 1e-9, "p = {p}: {lhs} > {rhs}");
        }
    }

    #[test]
    fn polar_truncation_converges_for_small_p() {
        let grid = Grid::line(2, 0.0, 1.0);
        let mut sampler = FieldSampler::new(23, grid.clone(), 6);
        let t = sampler.operator_field().normalized();
        let mut last = f64::INFINITY;
        for n in [2, 4, 6] {
            let variant = truncate_polar(&t, n).unwrap();
            let err = schatten_sup_norm(&t.sub(&variant).unwrap(), 1.0).unwrap();
            assert!(err <= last + 1e-9);
            last = err;
        }
        assert!(last < 1e-9); // exact at full rank
    }
}
