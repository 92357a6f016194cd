//! The one-dimensional index cycle: a chiral block operator built from
//! `d/ds + f(s)` on the interval `(-eps, eps)` with Dirichlet boundary,
//! discretized by central differences.
//!
//! With `B = A + F` (A the antisymmetric central difference, F the diagonal
//! potential), the Hermitian realization is `T = [[0, B^T], [B, 0]]`; the
//! blocks of `T^2` are the two partner Hamiltonians `-A^2 + F^2 -+ [A, F]`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::base::Grid;
use crate::error::{FieldError, Result};
use crate::opfield::OperatorField;
use crate::C64;

use super::{sphere_profile, ClosedFormModel, KKCycle, SpectralModel};

pub struct IndexCycle {
    pub cycle: KKCycle,
    pub eps: f64,
    /// Interior grid points per block.
    pub n: usize,
    /// Grid spacing `2 eps / (n + 1)`.
    pub spacing: f64,
    matrix: DMatrix<f64>,
    /// Eigenvalues of the block operator, sorted by increasing modulus.
    spectrum_by_modulus: Vec<f64>,
}

/// The norm bound `c = f(eps/2)^2 + |f'(eps/2)|` controlling the comparison
/// of `T^2` with the Dirichlet Laplacian on the half interval.
pub fn index_comparison_constant(eps: f64) -> f64 {
    let f = sphere_profile(eps, eps / 2.0);
    // f'(s) = (pi / 2 eps)^2 sec^2(pi s / 2 eps); at s = eps/2 that is
    // (pi / 2 eps)^2 * 2
    let scale = std::f64::consts::FRAC_PI_2 / eps;
    let fprime = scale * scale * 2.0;
    f * f + fprime
}

/// Eigenvalues of the discrete Dirichlet Laplacian on `m` interior points
/// with spacing `h`: `(4 / h^2) sin^2(j pi / (2 (m + 1)))`, ascending.
pub fn dirichlet_laplacian_eigenvalues(m: usize, h: f64) -> Vec<f64> {
    (1..=m)
        .map(|j| {
            let s = (j as f64 * std::f64::consts::PI / (2.0 * (m as f64 + 1.0))).sin();
            4.0 / (h * h) * s * s
        })
        .collect()
}

/// Central-difference discretization of the index operator with `n` interior
/// points per chiral block; the base is a single point.
pub fn index_cycle(eps: f64, n: usize) -> Result<IndexCycle> {
    if n < 16 {
        return Err(FieldError::GridTooCoarse { min: 16, got: n });
    }
    if eps <= 0.0 {
        return Err(FieldError::BadDomain(format!(
            "interval half-width must be positive, got {eps}"
        )));
    }
    let h = 2.0 * eps / (n as f64 + 1.0);
    // B = A + F with A the central difference and F = diag f(s_j)
    let mut b = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let s = -eps + (j as f64 + 1.0) * h;
        b[(j, j)] = sphere_profile(eps, s);
        if j + 1 < n {
            b[(j, j + 1)] = 1.0 / (2.0 * h);
            b[(j + 1, j)] = -1.0 / (2.0 * h);
        }
    }
    let size = 2 * n;
    let mut t = DMatrix::<f64>::zeros(size, size);
    t.view_mut((0, n), (n, n)).copy_from(&b.transpose());
    t.view_mut((n, 0), (n, n)).copy_from(&b);

    let eig = nalgebra::SymmetricEigen::new(t.clone());
    let mut spectrum: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    spectrum.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());

    let grid = Grid::single_point();
    let spectrum_for_model = spectrum.clone();
    let model = ClosedFormModel::new(size, move |mode, _x| spectrum_for_model[mode], None);
    Ok(IndexCycle {
        cycle: KKCycle {
            label: "index".into(),
            grid,
            model: SpectralModel::ClosedForm(model),
            claimed_summability: 1.0, // summable for every p > 1
        },
        eps,
        n,
        spacing: h,
        matrix: t,
        spectrum_by_modulus: spectrum,
    })
}

impl IndexCycle {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// The operator as a complex field over the one-point base.
    pub fn operator_field(&self) -> OperatorField {
        let size = 2 * self.n;
        let m = DMatrix::<C64>::from_fn(size, size, |i, j| C64::new(self.matrix[(i, j)], 0.0));
        OperatorField::new(Grid::single_point(), size, vec![m]).expect("single fiber")
    }

    /// Singular values (eigenvalue magnitudes), ascending.
    pub fn singular_values(&self) -> Vec<f64> {
        self.spectrum_by_modulus.iter().map(|l| l.abs()).collect()
    }

    /// Eigenvalues of `T^2`, ascending.
    pub fn squared_spectrum(&self) -> Vec<f64> {
        let mut sq: Vec<f64> = self.spectrum_by_modulus.iter().map(|l| l * l).collect();
        sq.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sq
    }

    /// Ascending eigenvalues of the comparison operator: the discrete
    /// Dirichlet Laplacian on the half interval `(-eps/2, eps/2)` at the same
    /// spacing, doubled for the two chiral components.
    pub fn comparison_spectrum(&self) -> Vec<f64> {
        // interior points of the half interval at spacing h
        let m = ((self.eps / self.spacing).floor() as usize).saturating_sub(1);
        let single = dirichlet_laplacian_eigenvalues(m, self.spacing);
        let mut doubled = Vec::with_capacity(2 * m);
        for mu in single {
            doubled.push(mu);
            doubled.push(mu);
        }
        doubled.sort_by(|a, b| a.partial_cmp(b).unwrap());
        doubled
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.cycle.grid
    }
}
