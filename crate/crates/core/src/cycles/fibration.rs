//! Fibrations with circle-Dirac fibers: the trivial product, where the
//! vertical operator is constant over the base, and a perturbed variant with
//! an x-dependent potential for resolvent-continuity experiments.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::base::{Grid, ScalarField};
use crate::error::{FieldError, Result};
use crate::opfield::OperatorField;
use crate::C64;

use super::{circle_crossed_product_cycle, KKCycle, SpectralModel};

/// Vertical circle Dirac on every fiber, constant in x: the resolvent trace
/// field has continuity modulus zero.
pub fn trivial_fibration_cycle(x_grid: &Arc<Grid>, n_modes: usize) -> Result<KKCycle> {
    let circle = circle_crossed_product_cycle(x_grid, n_modes)?;
    let mut cycle = circle.cycle;
    cycle.label = "trivial-fibration".into();
    Ok(cycle)
}

/// A matrix-field variant with fiber operator `D + potential(x) V`, where
/// `V` is a fixed Hermitian nearest-mode coupling. Useful for checking the
/// resolvent-identity bound on the continuity of the p-norm field.
pub fn perturbed_fibration_cycle(
    x_grid: &Arc<Grid>,
    n_modes: usize,
    potential: &ScalarField,
) -> Result<KKCycle> {
    if n_modes == 0 {
        return Err(FieldError::BadDomain("fibration needs n_modes >= 1".into()));
    }
    potential.check_on_grid(x_grid)?;
    if !potential.is_real(1e-12) {
        return Err(FieldError::BadDomain("potential must be real".into()));
    }
    let size = 2 * n_modes + 1;
    let dirac = DMatrix::<C64>::from_fn(size, size, |i, j| {
        if i == j {
            C64::new(i as f64 - n_modes as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let coupling = DMatrix::<C64>::from_fn(size, size, |i, j| {
        if i.abs_diff(j) == 1 {
            C64::new(0.5, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let field = OperatorField::from_fn(x_grid.clone(), size, |x| {
        &dirac + &coupling * potential.value(x)
    })?;
    Ok(KKCycle {
        label: "perturbed-fibration".into(),
        grid: x_grid.clone(),
        model: SpectralModel::matrix(field),
        claimed_summability: 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::{summability_report, SUMMABILITY_TOL};
    use crate::linalg;
    use crate::schatten::schatten_norm_field;

    #[test]
    fn trivial_fibration_norm_field_is_constant() {
        let grid = Grid::line(7, 0.0, 2.0);
        let cycle = trivial_fibration_cycle(&grid, 64).unwrap();
        let report = summability_report(&cycle, 2.0, &[64, 129], SUMMABILITY_TOL).unwrap();
        assert!(report.resolvent_norm_field.continuity_modulus() == 0.0);
    }

    #[test]
    fn trivial_fibration_matches_circle_values() {
        let xgrid = Grid::line(5, 0.0, 1.0);
        let fib = trivial_fibration_cycle(&xgrid, 32).unwrap();
        let point = Grid::single_point();
        let circle = circle_crossed_product_cycle(&point, 32).unwrap();
        let rf = summability_report(&fib, 2.0, &[65], SUMMABILITY_TOL).unwrap();
        let rc = summability_report(&circle.cycle, 2.0, &[65], SUMMABILITY_TOL).unwrap();
        let fiber_value = rc.resolvent_norm_field.value(0).re;
        for x in 0..xgrid.len() {
            assert!((rf.resolvent_norm_field.value(x).re - fiber_value).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbed_fibration_modulus_obeys_resolvent_identity() {
        let grid = Grid::line(6, 0.0, 1.0);
        let n_modes = 8;
        let potential = ScalarField::from_fn(grid.clone(), |x| {
            C64::new((grid.point(x)[0] * 2.1).sin(), 0.0)
        });
        let cycle = perturbed_fibration_cycle(&grid, n_modes, &potential).unwrap();
        let field = match &cycle.model {
            SpectralModel::Matrix { field, .. } => field.clone(),
            _ => unreachable!(),
        };
        let size = 2 * n_modes + 1;
        let i_unit = C64::new(0.0, 1.0);
        let p = 2.0;
        // resolvents R(x) = (S(x) + i)^(-1)
        let resolvents: Vec<DMatrix<C64>> = field
            .matrices()
            .iter()
            .map(|m| {
                (m + DMatrix::<C64>::identity(size, size) * i_unit)
                    .try_inverse()
                    .expect("resolvent exists off the real axis")
            })
            .collect();
        let resolvent_field =
            OperatorField::new(grid.clone(), size, resolvents.clone()).unwrap();
        let norms = schatten_norm_field(&resolvent_field, p).unwrap();
        for &(a, b) in grid.adjacency() {
            let diff_norm = linalg::schatten_norm(&(&resolvents[a] - &resolvents[b]), p);
            // resolvent identity: R(a) - R(b) = R(a) (S(b) - S(a)) R(b)
            let ds = linalg::op_norm(
                &(field.matrices()[b].clone() - field.matrices()[a].clone()),
            );
            let bound = linalg::op_norm(&resolvents[a]) * ds * norms.value(b).re;
            assert!(
                diff_norm <= bound + 1e-9,
                "edge ({a},{b}): {diff_norm} > {bound}"
            );
        }
    }
}
