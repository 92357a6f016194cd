//! The sphere-embedding cycle: one-dimensional fibers over a product of a
//! sphere grid and a normal interval, with the multiplication operator
//! `f(s) = (pi / 2 eps) tan(pi s / 2 eps)`.

use std::sync::Arc;

use crate::base::Grid;
use crate::error::{FieldError, Result};

use super::{ClosedFormModel, KKCycle, SpectralModel};

/// The defining profile of the normal-direction operator.
pub fn sphere_profile(eps: f64, s: f64) -> f64 {
    let scale = std::f64::consts::FRAC_PI_2 / eps;
    scale * (scale * s).tan()
}

/// Builds the embedding cycle over `sphere_grid x (-eps, eps)` with
/// `s_grid_size` interior normal samples. The fibers are one-dimensional,
/// so the resolvent trace is the closed-form field `(1 + f(s)^2)^(-p/2)`.
pub fn sphere_embedding_cycle(
    eps: f64,
    s_grid_size: usize,
    sphere_grid: &Arc<Grid>,
) -> Result<KKCycle> {
    if eps <= 0.0 {
        return Err(FieldError::BadDomain(format!(
            "normal half-width must be positive, got {eps}"
        )));
    }
    if s_grid_size == 0 {
        return Err(FieldError::BadDomain("normal grid needs at least one point".into()));
    }
    // interior points, strictly inside (-eps, eps)
    let step = 2.0 * eps / (s_grid_size as f64 + 1.0);
    let s_points: Vec<f64> = (1..=s_grid_size).map(|j| -eps + j as f64 * step).collect();
    if s_points.iter().any(|s| s.abs() >= eps) {
        return Err(FieldError::BadDomain(
            "normal samples must stay strictly inside the interval".into(),
        ));
    }
    let s_grid = Grid::line(s_grid_size, s_points[0], s_points[s_grid_size - 1]);
    let grid = Grid::product(sphere_grid, &s_grid);

    // the normal coordinate is the last one of each product point
    let eigenvalues: Vec<f64> = (0..grid.len())
        .map(|x| {
            let coords = grid.point(x);
            sphere_profile(eps, coords[coords.len() - 1])
        })
        .collect();
    let model = ClosedFormModel::new(
        1,
        move |_mode, x| eigenvalues[x],
        None, // the fiber spectrum is exhausted at depth one
    );
    Ok(KKCycle {
        label: "sphere-embedding".into(),
        grid,
        model: SpectralModel::ClosedForm(model),
        claimed_summability: 0.0, // summable for every p > 0
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::{summability_report, Verdict, SUMMABILITY_TOL};

    #[test]
    fn profile_values() {
        let eps = 0.8;
        assert!(sphere_profile(eps, 0.0).abs() < 1e-15);
        // f(eps/2) = (pi / 2 eps) tan(pi/4) = pi / (2 eps)
        let expected = std::f64::consts::FRAC_PI_2 / eps;
        assert!((sphere_profile(eps, eps / 2.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn cycle_matches_closed_form_field() {
        let eps = 0.5;
        let sphere = Grid::circle(6);
        let cycle = sphere_embedding_cycle(eps, 9, &sphere).unwrap();
        for p in [0.5, 1.0, 2.0] {
            let report = summability_report(&cycle, p, &[1], SUMMABILITY_TOL).unwrap();
            assert_eq!(report.verdict, Verdict::Summable);
            for x in 0..cycle.grid.len() {
                let coords = cycle.grid.point(x);
                let f = sphere_profile(eps, coords[coords.len() - 1]);
                let expected = (1.0 + f * f).powf(-p / 2.0);
                let trace = report.resolvent_norm_field.value(x).re.powf(p);
                assert!(
                    (trace - expected).abs() < 1e-12,
                    "p = {p}, x = {x}: {trace} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn trace_field_vanishes_toward_the_ends() {
        // the tan pole pushes the resolvent trace to zero at the interval ends
        let eps = 0.3;
        let sphere = Grid::circle(4);
        let cycle = sphere_embedding_cycle(eps, 21, &sphere).unwrap();
        let report = summability_report(&cycle, 1.0, &[1], SUMMABILITY_TOL).unwrap();
        // locate the extreme normal coordinates on the product grid
        let mut boundary_max = 0.0f64;
        let mut center_min = f64::INFINITY;
        for x in 0..cycle.grid.len() {
            let coords = cycle.grid.point(x);
            let s = coords[coords.len() - 1];
            let value = report.resolvent_norm_field.value(x).re;
            if s.abs() > 0.9 * eps {
                boundary_max = boundary_max.max(value);
            }
            if s.abs() < 0.1 * eps {
                center_min = center_min.min(value);
            }
        }
        assert!(boundary_max < 0.12, "boundary value {boundary_max}");
        assert!(center_min > 0.9, "center value {center_min}");
    }

    #[test]
    fn rejects_bad_domain() {
        let sphere = Grid::circle(4);
        assert!(matches!(
            sphere_embedding_cycle(-1.0, 5, &sphere),
            Err(FieldError::BadDomain(_))
        ));
        assert!(matches!(
            sphere_embedding_cycle(0.5, 0, &sphere),
            Err(FieldError::BadDomain(_))
        ));
    }
}
