//! Operator zeta functions `zeta(z, T) = tr T^z` as Dirichlet series over
//! eigenvalue fields, with angular tail bounds and residue extrapolation.

use rayon::prelude::*;

use crate::base::ScalarField;
use crate::error::{FieldError, Result};
use crate::linalg;
use crate::opfield::{OperatorField, POSITIVITY_TOL, POS_POWER_FLOOR};
use crate::C64;

/// Fiberwise eigenvalues assembled by rank index into scalar fields,
/// decreasing at every point.
#[derive(Debug, Clone)]
pub struct EigenvalueFields {
    pub lambdas: Vec<ScalarField>,
    pub count: usize,
}

impl EigenvalueFields {
    /// Discrete continuity modulus of each eigenvalue field.
    pub fn moduli(&self) -> Vec<f64> {
        self.lambdas.iter().map(|l| l.continuity_modulus()).collect()
    }

    pub fn value(&self, k: usize, x: usize) -> f64 {
        self.lambdas[k].value(x).re
    }

    /// From explicit per-rank constants (for synthetic spectra in tests and
    /// closed-form cycles).
    pub fn from_rows(grid: &std::sync::Arc<crate::base::Grid>, rows: &[Vec<f64>]) -> Result<Self> {
        let lambdas = rows
            .iter()
            .map(|row| ScalarField::from_real(grid.clone(), row.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(EigenvalueFields {
            count: lambdas.len(),
            lambdas,
        })
    }
}

/// Extracts the decreasingly ordered eigenvalue fields of a Hermitian
/// positive semidefinite operator field.
pub fn eigenvalue_fields(t: &OperatorField) -> Result<EigenvalueFields> {
    let dev = t.sup_hermitian_deviation();
    if dev > 1e-8 * (1.0 + t.sup_operator_norm()) {
        return Err(FieldError::NotHermitian { deviation: dev });
    }
    let spectra: Vec<Vec<f64>> = t
        .matrices()
        .par_iter()
        .map(|m| linalg::hermitian_eigen_sorted(m).0)
        .collect();
    let min_eig = spectra
        .iter()
        .flat_map(|s| s.iter().copied())
        .fold(f64::INFINITY, f64::min);
    if min_eig < -POSITIVITY_TOL {
        return Err(FieldError::NotPositive {
            min_eigenvalue: min_eig,
        });
    }
    let dim = t.dim();
    let lambdas = (0..dim)
        .map(|k| {
            ScalarField::from_real(
                t.grid().clone(),
                spectra.iter().map(|s| s[k].max(0.0)).collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EigenvalueFields { lambdas, count: dim })
}

#[derive(Debug, Clone)]
pub struct ZetaValue {
    pub z: C64,
    pub value: ScalarField,
    pub terms_used: usize,
    pub tail_bound: f64,
}

/// The zeta function `zeta(z, T)(x) = sum_k lambda_k(x)^z` of a positive
/// contraction field, on the half-plane `Re z > p`. Zero modes below the
/// relative eigenvalue floor are dropped.
pub fn zeta(t: &OperatorField, z: C64, p: f64, tol: f64) -> Result<ZetaValue> {
    if tol <= 0.0 {
        return Err(FieldError::BadDomain(format!(
            "zeta tolerance must be positive, got {tol}"
        )));
    }
    if p < 1.0 {
        return Err(FieldError::BadExponent {
            p,
            reason: "zeta needs a summability exponent p >= 1",
        });
    }
    let fields = eigenvalue_fields(t)?;
    zeta_from_eigenvalues(&fields, z, p)
}

/// The same Dirichlet sum evaluated on explicit eigenvalue fields.
pub fn zeta_from_eigenvalues(fields: &EigenvalueFields, z: C64, p: f64) -> Result<ZetaValue> {
    if z.re <= p {
        return Err(FieldError::OutOfHalfPlane { re: z.re, p });
    }
    let max_eig = fields
        .lambdas
        .iter()
        .map(ScalarField::max_real)
        .fold(0.0f64, f64::max);
    if max_eig > 1.0 + POSITIVITY_TOL {
        return Err(FieldError::NotContraction {
            max_eigenvalue: max_eig,
        });
    }
    let floor = POS_POWER_FLOOR * max_eig;
    let grid = fields
        .lambdas
        .first()
        .map(|l| l.grid().clone())
        .ok_or(FieldError::InsufficientSamples { needed: 1, got: 0 })?;
    let value = ScalarField::from_fn(grid, |x| {
        let mut acc = C64::new(0.0, 0.0);
        for l in &fields.lambdas {
            let lam = l.value(x).re;
            if lam > floor {
                acc += (z * C64::new(lam.ln(), 0.0)).exp();
            }
        }
        acc
    });
    Ok(ZetaValue {
        z,
        value,
        terms_used: fields.count,
        tail_bound: 0.0, // the fiber spectrum is finite here
    })
}

/// The Abel-summation tail bound `sec(alpha) * sup_x sum_{k >= m} lambda_k(x)^p`,
/// valid for every `z` in the angular region `|Arg(z - p)| <= alpha`.
/// `m` is the 1-based index of the first tail eigenvalue.
pub fn jensen_cahen_tail(
    lambdas: &EigenvalueFields,
    p: f64,
    alpha: f64,
    m: usize,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < std::f64::consts::FRAC_PI_2) {
        return Err(FieldError::BadAngle { alpha });
    }
    if m == 0 {
        return Err(FieldError::BadDomain("tail index m is 1-based".into()));
    }
    let max_eig = lambdas
        .lambdas
        .iter()
        .map(ScalarField::max_real)
        .fold(0.0f64, f64::max);
    if max_eig > 1.0 + POSITIVITY_TOL {
        return Err(FieldError::NotContraction {
            max_eigenvalue: max_eig,
        });
    }
    if m > lambdas.count {
        return Ok(0.0);
    }
    let grid = lambdas.lambdas[0].grid().clone();
    let mut sup = 0.0f64;
    for x in 0..grid.len() {
        let tail: f64 = lambdas.lambdas[(m - 1)..]
            .iter()
            .map(|l| l.value(x).re.max(0.0).powf(p))
            .sum();
        sup = sup.max(tail);
    }
    Ok(sup / alpha.cos())
}

#[derive(Debug, Clone)]
pub struct ContinuityProbe {
    /// Largest metric radius around the base point on which the sup over `K`
    /// of the zeta oscillation stays below the requested epsilon.
    pub radius: f64,
    /// A failing grid point when the radius is zero.
    pub witness: Option<usize>,
}

/// Probes uniform-on-compacts continuity of `x -> zeta(., T)(x)`: finds the
/// largest radius around `x_index` on which `sup_{z in K} |zeta(z)(y) - zeta(z)(x)| < eps`.
pub fn zeta_uniform_continuity_probe(
    t: &OperatorField,
    k_samples: &[C64],
    p: f64,
    x_index: usize,
    eps: f64,
) -> Result<ContinuityProbe> {
    if x_index >= t.grid().len() {
        return Err(FieldError::IndexOutOfRange {
            index: x_index,
            size: t.grid().len(),
        });
    }
    if k_samples.is_empty() {
        return Err(FieldError::InsufficientSamples { needed: 1, got: 0 });
    }
    let fields = eigenvalue_fields(t)?;
    let values: Vec<ZetaValue> = k_samples
        .iter()
        .map(|&z| zeta_from_eigenvalues(&fields, z, p))
        .collect::<Result<Vec<_>>>()?;

    let grid = t.grid();
    let mut candidates: Vec<(f64, usize)> = (0..grid.len())
        .filter(|&y| y != x_index)
        .map(|y| (grid.metric(x_index, y), y))
        .collect();
    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let oscillation = |y: usize| -> f64 {
        values
            .iter()
            .map(|zv| (zv.value.value(y) - zv.value.value(x_index)).norm())
            .fold(0.0, f64::max)
    };

    let mut radius = 0.0f64;
    for &(d, y) in &candidates {
        if oscillation(y) < eps {
            radius = d;
        } else {
            return Ok(ContinuityProbe {
                radius,
                witness: (radius == 0.0).then_some(y),
            });
        }
    }
    // every point passes: report the full grid diameter
    Ok(ContinuityProbe {
        radius: grid.diameter(),
        witness: None,
    })
}

/// Extrapolates the simple-pole residue `lim_{z -> s0} (z - s0) zeta(z)`
/// pointwise from samples at real `z` decreasing toward `s0`, by Neville
/// extrapolation of `(z - s0) zeta(z)` to `z = s0` through the three samples
/// closest to the abscissa.
pub fn residue_estimate(samples: &[(f64, ScalarField)], s0: f64) -> Result<ScalarField> {
    if samples.len() < 3 {
        return Err(FieldError::InsufficientSamples {
            needed: 3,
            got: samples.len(),
        });
    }
    let mut ordered: Vec<&(f64, ScalarField)> = samples.iter().collect();
    ordered.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for &&(z, _) in &ordered {
        if z <= s0 {
            return Err(FieldError::BadDomain(format!(
                "sample at z = {z} is not to the right of the abscissa {s0}"
            )));
        }
    }
    let picked = &ordered[0..3];
    let grid = picked[0].1.grid().clone();
    let hs: Vec<f64> = picked.iter().map(|(z, _)| z - s0).collect();

    let value = ScalarField::from_fn(grid, |x| {
        // g(h) = h * zeta(s0 + h)(x), extrapolated to h = 0
        let mut table: Vec<C64> = picked
            .iter()
            .map(|(z, f)| C64::new(z - s0, 0.0) * f.value(x))
            .collect();
        for level in 1..3 {
            for i in 0..(3 - level) {
                let (h_i, h_il) = (hs[i], hs[i + level]);
                let num = table[i + 1] * C64::new(h_i, 0.0) - table[i] * C64::new(h_il, 0.0);
                table[i] = num / C64::new(h_i - h_il, 0.0);
            }
        }
        table[0]
    });
    Ok(value)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::Grid;
    use crate::schatten::trace_field;
    use nalgebra::{DMatrix, DVector};
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eigenvalue_fields_of_diagonal() {
        let grid = Grid::line(2, 0.2, 0.7); // points 0.2 and 0.7
        let t = OperatorField::from_fn(grid.clone(), 3, |x| {
            DMatrix::from_diagonal(&DVector::from_vec(vec![
                c(1.0, 0.0),
                c(grid.point(x)[0], 0.0),
                c(0.0, 0.0),
            ]))
        })
        .unwrap();
        let fields = eigenvalue_fields(&t).unwrap();
        assert_eq!(fields.count, 3);
        assert!((fields.value(0, 0) - 1.0).abs() < 1e-14);
        assert!((fields.value(1, 0) - 0.2).abs() < 1e-14);
        assert!((fields.value(1, 1) - 0.7).abs() < 1e-14);
        assert!(fields.value(2, 0).abs() < 1e-14);
    }

    #[test]
    fn eigenvalue_fields_sort_crossing_branches() {
        // two analytic branches a(x) = x and b(x) = 1 - x cross at 1/2; the
        // rank-ordered fields are the pointwise max and min
        let grid = Grid::line(9, 0.0, 1.0);
        let t = OperatorField::from_fn(grid.clone(), 2, |x| {
            let s = grid.point(x)[0];
            DMatrix::from_diagonal(&DVector::from_vec(vec![c(s, 0.0), c(1.0 - s, 0.0)]))
        })
        .unwrap();
        let fields = eigenvalue_fields(&t).unwrap();
        for x in 0..grid.len() {
            let s = grid.point(x)[0];
            assert!((fields.value(0, x) - s.max(1.0 - s)).abs() < 1e-14);
            assert!((fields.value(1, x) - s.min(1.0 - s)).abs() < 1e-14);
        }
        // sorted assembly is continuous: modulus bounded by the branch slope
        for modulus in fields.moduli() {
            assert!(modulus <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn eigenvalue_fields_reject_nonpositive() {
        let grid = Grid::line(2, 0.0, 1.0);
        let t = OperatorField::constant(grid.clone(), DMatrix::from_element(1, 1, c(-0.5, 0.0)))
            .unwrap();
        assert!(matches!(
            eigenvalue_fields(&t),
            Err(FieldError::NotPositive { .. })
        ));
    }

    #[test]
    fn zeta_of_projection_counts_rank() {
        let grid = Grid::line(3, 0.0, 1.0);
        let p = OperatorField::constant(
            grid,
            DMatrix::from_diagonal(&DVector::from_vec(vec![
                c(1.0, 0.0),
                c(1.0, 0.0),
                c(0.0, 0.0),
            ])),
        )
        .unwrap();
        let zv = zeta(&p, c(3.5, 1.0), 1.0, 1e-9).unwrap();
        for v in zv.value.values() {
            assert!((v - c(2.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn zeta_scalar_power() {
        let grid = Grid::line(2, 0.0, 1.0);
        let t = OperatorField::constant(grid, DMatrix::from_element(1, 1, c(0.5, 0.0))).unwrap();
        let zv = zeta(&t, c(3.0, 0.0), 1.0, 1e-9).unwrap();
        assert!((zv.value.value(0).re - 0.125).abs() < 1e-14);
    }

    #[test]
    fn zeta_geometric_spectrum() {
        // lambda_k = 2^-k for k = 1..20 at z = 2: sum 4^-k = (1 - 4^-20) / 3
        let grid = Grid::line(2, 0.0, 1.0);
        let rows: Vec<Vec<f64>> = (1..=20).map(|k| vec![0.5f64.powi(k); 2]).collect();
        let fields = EigenvalueFields::from_rows(&grid, &rows).unwrap();
        let zv = zeta_from_eigenvalues(&fields, c(2.0, 0.0), 1.0).unwrap();
        let oracle: f64 = (1..=20).map(|k| 0.25f64.powi(k)).sum();
        assert!((zv.value.value(0).re - oracle).abs() < 1e-15);
        assert!((oracle - 1.0 / 3.0).abs() < 0.25f64.powi(20) * 2.0);
    }

    #[test]
    fn zeta_preconditions() {
        let grid = Grid::line(2, 0.0, 1.0);
        let t = OperatorField::constant(grid.clone(), DMatrix::from_element(1, 1, c(0.5, 0.0)))
            .unwrap();
        assert!(matches!(
            zeta(&t, c(0.5, 0.0), 1.0, 1e-9),
            Err(FieldError::OutOfHalfPlane { .. })
        ));
        let big = OperatorField::constant(grid, DMatrix::from_element(1, 1, c(1.5, 0.0))).unwrap();
        assert!(matches!(
            zeta(&big, c(3.0, 0.0), 1.0, 1e-9),
            Err(FieldError::NotContraction { .. })
        ));
    }

    #[test]
    fn zeta_matches_functional_calculus_route() {
        let grid = Grid::line(4, 0.0, 1.0);
        let mut sampler = crate::gen::FieldSampler::new(41, grid.clone(), 5);
        let t = sampler.positive_contraction();
        for z in [c(2.5, 0.0), c(3.0, 1.5), c(4.0, -2.0)] {
            let via_series = zeta(&t, z, 1.0, 1e-9).unwrap();
            let via_calculus = trace_field(&t.pos_power(z).unwrap());
            assert!(
                via_series
                    .value
                    .sub(&via_calculus)
                    .unwrap()
                    .sup_norm()
                    < 1e-9
            );
        }
    }

    #[test]
    fn zeta_monotone_in_real_exponent() {
        let grid = Grid::line(3, 0.0, 1.0);
        let mut sampler = crate::gen::FieldSampler::new(43, grid.clone(), 4);
        let t = sampler.positive_contraction();
        let low = zeta(&t, c(2.0, 0.0), 1.0, 1e-9).unwrap();
        let high = zeta(&t, c(3.0, 0.0), 1.0, 1e-9).unwrap();
        for x in 0..grid.len() {
            assert!(high.value.value(x).re <= low.value.value(x).re + 1e-12);
        }
    }

    #[test]
    fn jensen_cahen_examples() {
        let grid = Grid::line(2, 0.0, 1.0);
        let rows: Vec<Vec<f64>> = (1..=12).map(|k| vec![0.5f64.powi(k); 2]).collect();
        let fields = EigenvalueFields::from_rows(&grid, &rows).unwrap();

        // beyond the last nonzero eigenvalue the tail is empty
        assert_eq!(
            jensen_cahen_tail(&fields, 1.0, std::f64::consts::FRAC_PI_4, 13).unwrap(),
            0.0
        );

        // geometric arithmetic: sec(pi/4) * sum_{k>=5} 2^-k = sqrt(2) / 16
        let rows: Vec<Vec<f64>> = (1..=40).map(|k| vec![0.5f64.powi(k); 2]).collect();
        let fields = EigenvalueFields::from_rows(&grid, &rows).unwrap();
        let bound = jensen_cahen_tail(&fields, 1.0, std::f64::consts::FRAC_PI_4, 5).unwrap();
        let expected = std::f64::consts::SQRT_2 / 16.0;
        assert!((bound - expected).abs() < 1e-12);

        assert!(matches!(
            jensen_cahen_tail(&fields, 1.0, 2.0, 5),
            Err(FieldError::BadAngle { .. })
        ));
    }

    #[test]
    fn jensen_cahen_dominates_sampled_tails() {
        let grid = Grid::line(3, 0.0, 1.0);
        // x-dependent geometric spectra
        let rows: Vec<Vec<f64>> = (1..=40)
            .map(|k| {
                (0..3)
                    .map(|x| (0.3 + 0.1 * x as f64).powi(k))
                    .collect()
            })
            .collect();
        let fields = EigenvalueFields::from_rows(&grid, &rows).unwrap();
        let p = 1.0;
        let alpha = std::f64::consts::FRAC_PI_4;
        let m = 4;
        let bound = jensen_cahen_tail(&fields, p, alpha, m).unwrap();
        // 20 samples in the angular region
        for i in 0..20 {
            let rho = 0.05 + 0.35 * i as f64;
            let phi = alpha * ((i as f64 * 0.7).sin());
            let z = c(p + rho * phi.cos(), rho * phi.sin());
            for x in 0..3 {
                let tail: C64 = rows[(m - 1)..]
                    .iter()
                    .map(|row| (z * C64::new(row[x].ln(), 0.0)).exp())
                    .sum();
                assert!(
                    tail.norm() <= bound + 1e-9,
                    "tail {} exceeds bound {bound} at z = {z}",
                    tail.norm()
                );
            }
        }
    }

    #[test]
    fn continuity_probe_constant_field() {
        let grid = Grid::line(5, 0.0, 2.0);
        let t = OperatorField::identity(grid.clone(), 2).scale(c(0.5, 0.0));
        let probe =
            zeta_uniform_continuity_probe(&t, &[c(2.0, 0.0), c(3.0, 0.0)], 1.0, 0, 0.05).unwrap();
        assert!((probe.radius - grid.diameter()).abs() < 1e-14);
        assert!(probe.witness.is_none());
    }

    #[test]
    fn continuity_probe_matches_scalar_oracle() {
        // T = diag(x) on a fine grid: zeta(z)(x) = x^z, oscillation known in
        // closed form
        let n = 33;
        let grid = Grid::line(n, 0.1, 0.9);
        let t = OperatorField::from_fn(grid.clone(), 1, |x| {
            DMatrix::from_element(1, 1, c(grid.point(x)[0], 0.0))
        })
        .unwrap();
        let k: Vec<C64> = vec![c(2.0, 0.0), c(3.0, 0.0)];
        let eps = 0.05;
        let x0 = n / 2;
        let probe = zeta_uniform_continuity_probe(&t, &k, 1.0, x0, eps).unwrap();
        // oracle scan with scalar powers
        let base = grid.point(x0)[0];
        let mut oracle_radius = 0.0f64;
        let mut candidates: Vec<usize> = (0..n).filter(|&y| y != x0).collect();
        candidates.sort_by(|&a, &b| {
            grid.metric(x0, a).partial_cmp(&grid.metric(x0, b)).unwrap()
        });
        for y in candidates {
            let s = grid.point(y)[0];
            let osc = (s * s - base * base)
                .abs()
                .max((s.powi(3) - base.powi(3)).abs());
            if osc < eps {
                oracle_radius = grid.metric(x0, y);
            } else {
                break;
            }
        }
        assert!((probe.radius - oracle_radius).abs() < 1e-12);
    }

    #[test]
    fn continuity_probe_large_epsilon_covers_grid() {
        let grid = Grid::line(7, 0.1, 0.9);
        let t = OperatorField::from_fn(grid.clone(), 1, |x| {
            DMatrix::from_element(1, 1, c(grid.point(x)[0], 0.0))
        })
        .unwrap();
        let probe =
            zeta_uniform_continuity_probe(&t, &[c(2.0, 0.0)], 1.0, 0, 10.0).unwrap();
        assert!((probe.radius - grid.diameter()).abs() < 1e-14);
    }

    #[test]
    fn residue_recovers_exact_pole() {
        let grid = Grid::line(3, 0.0, 1.0);
        let cfield = ScalarField::from_real(grid.clone(), vec![2.0, -1.0, 0.5]).unwrap();
        let samples: Vec<(f64, ScalarField)> = [1.5, 1.25, 1.125]
            .iter()
            .map(|&z| {
                let zeta_vals = cfield.scale(c(1.0 / (z - 1.0), 0.0));
                (z, zeta_vals)
            })
            .collect();
        let residue = residue_estimate(&samples, 1.0).unwrap();
        assert!(residue.sub(&cfield).unwrap().sup_norm() < 1e-10);
    }

    #[test]
    fn residue_drops_regular_part() {
        let grid = Grid::line(2, 0.0, 1.0);
        let cval = 1.7;
        let bval = -0.9;
        let samples: Vec<(f64, ScalarField)> = [1.5, 1.25, 1.125]
            .iter()
            .map(|&z| {
                let v = cval / (z - 1.0) + bval;
                (z, ScalarField::constant(grid.clone(), c(v, 0.0)))
            })
            .collect();
        let residue = residue_estimate(&samples, 1.0).unwrap();
        assert!((residue.value(0).re - cval).abs() < 1e-10);

        assert!(matches!(
            residue_estimate(&samples[0..2], 1.0),
            Err(FieldError::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (nodes, weights) = gauss_legendre(8);
        // exact for degree up to 15: check x^6 over [-1, 1] = 2/7
        let value: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * x.powi(6))
            .sum();
        assert!((value - 2.0 / 7.0).abs() < 1e-13);
        let total: f64 = weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-13);
    }
}
