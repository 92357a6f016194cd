//! The crossed-product cycle over a circle action: Fourier-mode Dirac
//! operator with eigenvalues `k`, the shift unitary, and the localized
//! Dirichlet series of the covariance algebra's generators.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::base::{Grid, ScalarField};
use crate::error::{FieldError, Result};
use crate::opfield::OperatorField;
use crate::C64;

use super::{integer_resolvent_tail, ClosedFormModel, KKCycle, SpectralModel};

/// Fourier-mode model of the circle Dirac operator tensored with the base
/// algebra: modes `k = -n..n` with eigenvalue `k`, constant over the grid.
pub struct CircleCycle {
    pub cycle: KKCycle,
    pub n_modes: usize,
}

/// Mode consumption order by increasing modulus: 0, +1, -1, +2, -2, ...
fn mode_at(index: usize) -> i64 {
    if index == 0 {
        0
    } else {
        let pair = ((index - 1) / 2 + 1) as i64;
        if index % 2 == 1 {
            pair
        } else {
            -pair
        }
    }
}

/// Remaining resolvent trace after consuming `depth` modes in modulus order.
fn circle_tail(depth: usize, p: f64) -> f64 {
    let g = |k: usize| {
        let k = k as f64;
        (1.0 + k * k).powf(-p / 2.0)
    };
    if depth == 0 {
        return g(0) + 2.0 * integer_resolvent_tail(1, p);
    }
    let used = depth - 1;
    let pairs = used / 2;
    if used % 2 == 1 {
        // the positive half of the next pair is consumed, its mirror is not
        g(pairs + 1) + 2.0 * integer_resolvent_tail(pairs + 2, p)
    } else {
        2.0 * integer_resolvent_tail(pairs + 1, p)
    }
}

/// Builds the Fourier-mode crossed-product model with `2 n_modes + 1` modes.
pub fn circle_crossed_product_cycle(x_grid: &Arc<Grid>, n_modes: usize) -> Result<CircleCycle> {
    if n_modes == 0 {
        return Err(FieldError::BadDomain("circle cycle needs n_modes >= 1".into()));
    }
    let count = 2 * n_modes + 1;
    let model = ClosedFormModel::new(
        count,
        |mode, _x| mode_at(mode) as f64,
        Some(Box::new(|depth, p| circle_tail(depth, p))),
    );
    Ok(CircleCycle {
        cycle: KKCycle {
            label: "circle-crossed-product".into(),
            grid: x_grid.clone(),
            model: SpectralModel::ClosedForm(model),
            claimed_summability: 1.0, // summable for every p > 1
        },
        n_modes,
    })
}

impl CircleCycle {
    fn matrix_size(&self) -> usize {
        2 * self.n_modes + 1
    }

    /// Fourier mode of basis index `j` in the natural ordering `-n..n`.
    pub fn basis_mode(&self, j: usize) -> i64 {
        j as i64 - self.n_modes as i64
    }

    /// The Dirac matrix `diag(k)` in the natural mode ordering.
    pub fn dirac_matrix(&self) -> DMatrix<C64> {
        let size = self.matrix_size();
        DMatrix::from_fn(size, size, |i, j| {
            if i == j {
                C64::new(self.basis_mode(i) as f64, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// The truncated shift `U^power`, mapping mode `k` to `k + power`.
    pub fn shift_matrix(&self, power: i64) -> DMatrix<C64> {
        let size = self.matrix_size();
        DMatrix::from_fn(size, size, |i, j| {
            if i as i64 - j as i64 == power {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// `|D|^(-z)` on the truncation, with the zero mode dropped.
    pub fn abs_dirac_neg_power(&self, z: C64) -> DMatrix<C64> {
        let size = self.matrix_size();
        DMatrix::from_fn(size, size, |i, j| {
            let k = self.basis_mode(i).unsigned_abs();
            if i == j && k > 0 {
                ((-z) * C64::new((k as f64).ln(), 0.0)).exp()
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// The representation of `sum_k f_k u_k`: pointwise multiplication by
    /// `f_k` composed with the k-th shift power.
    pub fn represent(&self, coeffs: &[(i64, ScalarField)]) -> Result<OperatorField> {
        let size = self.matrix_size();
        let grid = self.cycle.grid.clone();
        let mut matrices = vec![DMatrix::<C64>::zeros(size, size); grid.len()];
        for (k, f) in coeffs {
            f.check_on_grid(&grid)?;
            let shift = self.shift_matrix(*k);
            for (x, m) in matrices.iter_mut().enumerate() {
                *m += &shift * f.value(x);
            }
        }
        OperatorField::new(grid, size, matrices)
    }

    /// Truncated Dirichlet sum `2 sum_{k=1..n} k^(-z)` of `tr |D|^(-z)`.
    pub fn trace_abs_dirac_neg_power(&self, z: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for k in 1..=self.n_modes {
            acc += ((-z) * C64::new((k as f64).ln(), 0.0)).exp();
        }
        acc * C64::new(2.0, 0.0)
    }

    /// Euler-Maclaurin estimate of the dropped modes `2 sum_{k > n} k^(-z)`:
    /// `n^(1-z)/(z-1) - n^(-z)/2 + z n^(-z-1)/12` per sign of k.
    pub fn dirichlet_tail(&self, z: C64) -> C64 {
        let n = self.n_modes as f64;
        let nz = ((-z) * C64::new(n.ln(), 0.0)).exp(); // n^(-z)
        let one = C64::new(1.0, 0.0);
        let tail = nz * C64::new(n, 0.0) / (z - one) - nz * C64::new(0.5, 0.0)
            + z * nz / C64::new(12.0 * n, 0.0);
        tail * C64::new(2.0, 0.0)
    }

    /// The localized Dirichlet series `zeta_D(a, z)(x) = tr(rho(a) |D|^(-z))(x)`
    /// for `a = sum_k f_k u_k`, with the analytic tail of the mode sum added.
    /// Only the `k = 0` coefficient survives: the shifts have zero diagonal
    /// against the diagonal `|D|^(-z)`.
    pub fn zeta_localized(&self, coeffs: &[(i64, ScalarField)], z: C64) -> Result<ScalarField> {
        let grid = self.cycle.grid.clone();
        let mut diagonal_coeff = ScalarField::zeros(grid.clone());
        for (k, f) in coeffs {
            f.check_on_grid(&grid)?;
            if *k == 0 {
                diagonal_coeff = diagonal_coeff.add(f)?;
            }
        }
        let mode_sum = self.trace_abs_dirac_neg_power(z) + self.dirichlet_tail(z);
        Ok(diagonal_coeff.scale(mode_sum))
    }

    /// Dense-matrix route for cross-checks at small truncations:
    /// `tr(rho(a)(x) |D|^(-z))` evaluated literally.
    pub fn zeta_localized_dense(
        &self,
        coeffs: &[(i64, ScalarField)],
        z: C64,
    ) -> Result<ScalarField> {
        let rep = self.represent(coeffs)?;
        let power = self.abs_dirac_neg_power(z);
        Ok(ScalarField::from_fn(self.cycle.grid.clone(), |x| {
            (rep.matrices()[x].clone() * &power).trace()
        }))
    }

    /// The commutator field `[D, rho(a)]`; equals `sum_k k f_k U^k` exactly
    /// on the truncation.
    pub fn commutator_with_dirac(&self, coeffs: &[(i64, ScalarField)]) -> Result<OperatorField> {
        let rep = self.represent(coeffs)?;
        let d = self.dirac_matrix();
        let matrices = rep
            .matrices()
            .iter()
            .map(|m| &d * m - m * &d)
            .collect();
        OperatorField::new(self.cycle.grid.clone(), self.matrix_size(), matrices)
    }
}
