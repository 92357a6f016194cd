//! Operator fields: one square complex matrix per grid point.
//!
//! An [`OperatorField`] is the finite truncation of a bounded, strongly
//! continuous family of operators over the base space; evaluation at a grid
//! point ([`OperatorField::localize`]) is a *-homomorphism onto the fiber
//! matrix algebra. Fiberwise absolute powers and positive powers go through
//! the singular value and Hermitian eigendecompositions.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::base::{Grid, ScalarField};
use crate::error::{FieldError, Result};
use crate::linalg;
use crate::C64;

/// Eigenvalues below `POS_POWER_FLOOR * max_eigenvalue` are treated as zero
/// modes and dropped by the positive functional calculus.
pub const POS_POWER_FLOOR: f64 = 1e-12;

/// Positivity slack for spectral preconditions.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Which norm to use for fiber-difference estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    Operator,
    Schatten(f64),
}

#[derive(Debug, Clone)]
pub struct OperatorField {
    grid: Arc<Grid>,
    dim: usize,
    matrices: Vec<DMatrix<C64>>,
}

impl OperatorField {
    pub fn new(grid: Arc<Grid>, dim: usize, matrices: Vec<DMatrix<C64>>) -> Result<Self> {
        if dim == 0 {
            return Err(FieldError::BadDomain("fiber dimension must be positive".into()));
        }
        if matrices.len() != grid.len() {
            return Err(FieldError::InvalidGrid(format!(
                "matrix count {} does not match grid size {}",
                matrices.len(),
                grid.len()
            )));
        }
        if matrices.iter().any(|m| m.nrows() != dim || m.ncols() != dim) {
            return Err(FieldError::DimensionMismatch {
                left: dim,
                right: matrices
                    .iter()
                    .find(|m| m.nrows() != dim || m.ncols() != dim)
                    .map(|m| m.nrows())
                    .unwrap_or(0),
            });
        }
        Ok(OperatorField { grid, dim, matrices })
    }

    pub fn from_fn(grid: Arc<Grid>, dim: usize, f: impl Fn(usize) -> DMatrix<C64>) -> Result<Self> {
        let matrices = (0..grid.len()).map(f).collect();
        Self::new(grid, dim, matrices)
    }

    pub fn constant(grid: Arc<Grid>, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(FieldError::DimensionMismatch {
                left: dim,
                right: matrix.ncols(),
            });
        }
        let matrices = vec![matrix; grid.len()];
        Self::new(grid, dim, matrices)
    }

    pub fn identity(grid: Arc<Grid>, dim: usize) -> Self {
        let matrices = vec![DMatrix::<C64>::identity(dim, dim); grid.len()];
        OperatorField { grid, dim, matrices }
    }

    pub fn zeros(grid: Arc<Grid>, dim: usize) -> Self {
        let matrices = vec![DMatrix::<C64>::zeros(dim, dim); grid.len()];
        OperatorField { grid, dim, matrices }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrices(&self) -> &[DMatrix<C64>] {
        &self.matrices
    }

    /// Evaluation at a grid point; the localization *-homomorphism.
    pub fn localize(&self, x_index: usize) -> Result<&DMatrix<C64>> {
        self.matrices.get(x_index).ok_or(FieldError::IndexOutOfRange {
            index: x_index,
            size: self.grid.len(),
        })
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if !(Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid) {
            return Err(FieldError::GridMismatch);
        }
        if self.dim != other.dim {
            return Err(FieldError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    /// Pointwise operator product `(ST)(x) = S(x) T(x)`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let matrices = self
            .matrices
            .par_iter()
            .zip(other.matrices.par_iter())
            .map(|(a, b)| a * b)
            .collect();
        Ok(OperatorField {
            grid: self.grid.clone(),
            dim: self.dim,
            matrices,
        })
    }

    /// Pointwise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let matrices = self.matrices.iter().map(|m| m.adjoint()).collect();
        OperatorField {
            grid: self.grid.clone(),
            dim: self.dim,
            matrices,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let matrices = self
            .matrices
            .iter()
            .zip(&other.matrices)
            .map(|(a, b)| a + b)
            .collect();
        Ok(OperatorField {
            grid: self.grid.clone(),
            dim: self.dim,
            matrices,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let matrices = self
            .matrices
            .iter()
            .zip(&other.matrices)
            .map(|(a, b)| a - b)
            .collect();
        Ok(OperatorField {
            grid: self.grid.clone(),
            dim: self.dim,
            matrices,
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        let matrices = self.matrices.iter().map(|m| m * c).collect();
        OperatorField {
            grid: self.grid.clone(),
            dim: self.dim,
            matrices,
        }
    }

    /// The module action of the function algebra: `(T a)(x) = a(x) T(x)`.
    pub fn scalar_mul(&self, a: &ScalarField) -> Result<Self> {
        if !(Arc::ptr_eq(&self.grid, a.grid()) || *self.grid == **a.grid()) {
            return Err(FieldError::GridMismatch);
        }
        let matrices = self
            .matrices
            .iter()
            .enumerate()
            .map(|(i, m)| m * a.value(i))
            .collect();
        Ok(OperatorField {
            grid: self.grid.clone(),
            dim: self.dim,
            matrices,
        })
    }

    pub fn apply(&self, v: &VectorField) -> Result<VectorField> {
        if self.dim != v.dim {
            return Err(FieldError::DimensionMismatch {
                left: self.dim,
                right: v.dim,
            });
        }
        if !(Arc::ptr_eq(&self.grid, &v.grid) || *self.grid == *v.grid) {
            return Err(FieldError::GridMismatch);
        }
        let vectors = self
            .matrices
            .iter()
            .zip(&v.vectors)
            .map(|(m, x)| m * x)
            .collect();
        Ok(VectorField {
            grid: self.grid.clone(),
            dim: self.dim,
            vectors,
        })
    }

    /// `sup_x ||T(x)||` in the fiber operator norm.
    pub fn sup_operator_norm(&self) -> f64 {
        self.matrices
            .par_iter()
            .map(linalg::op_norm)
            .reduce(|| 0.0, f64::max)
    }

    /// Rescale so the sup operator norm is at most one (identity on the zero field).
    pub fn normalized(&self) -> Self {
        let n = self.sup_operator_norm();
        if n <= 1.0 {
            self.clone()
        } else {
            self.scale(C64::new(1.0 / n, 0.0))
        }
    }

    pub fn sup_hermitian_deviation(&self) -> f64 {
        self.matrices
            .iter()
            .map(linalg::hermitian_deviation)
            .fold(0.0, f64::max)
    }

    /// Fiberwise `|T|^p` for `p > 0`, through the singular value decomposition:
    /// with `T = U diag(s) V*` this is `V diag(s^p) V*`, Hermitian positive
    /// semidefinite, with `0^p = 0`.
    pub fn abs_power(&self, p: f64) -> Result<Self> {
        if p <= 0.0 {
            return Err(FieldError::BadExponent {
                p,
                reason: "absolute power needs p > 0",
            });
        }
        let matrices = self
            .matrices
            .par_iter()
            .map(|m| {
                let svd = m.clone().svd(false, true);
                let v_t = svd.v_t.expect("svd with v requested");
                let diag = DMatrix::<C64>::from_diagonal(&DVector::from_iterator(
                    svd.singular_values.len(),
                    svd.singular_values.iter().map(|s| C64::new(s.powf(p), 0.0)),
                ));
                linalg::hermitize(&(v_t.adjoint() * diag * v_t))
            })
            .collect();
        Ok(OperatorField {
            grid: self.grid.clone(),
            dim: self.dim,
            matrices,
        })
    }

    /// Fiberwise `T^z` for Hermitian positive semidefinite fields and
    /// `Re z > 0`, with `lambda^z = exp(z ln lambda)` above the relative
    /// eigenvalue floor and zero below it.
    pub fn pos_power(&self, z: C64) -> Result<Self> {
        if z.re <= 0.0 {
            return Err(FieldError::BadExponent {
                p: z.re,
                reason: "positive power needs Re z > 0",
            });
        }
        let dev = self.sup_hermitian_deviation();
        if dev > 1e-8 * (1.0 + self.sup_operator_norm()) {
            return Err(FieldError::NotHermitian { deviation: dev });
        }
        let eigen: Vec<(Vec<f64>, DMatrix<C64>)> = self
            .matrices
            .par_iter()
            .map(linalg::hermitian_eigen_sorted)
            .collect();
        let min_eig = eigen
            .iter()
            .flat_map(|(v, _)| v.iter().copied())
            .fold(f64::INFINITY, f64::min);
        if min_eig < -POSITIVITY_TOL {
            return Err(FieldError::NotPositive {
                min_eigenvalue: min_eig,
            });
        }
        let max_eig = eigen
            .iter()
            .flat_map(|(v, _)| v.iter().copied())
            .fold(0.0f64, f64::max);
        let floor = POS_POWER_FLOOR * max_eig;
        let matrices = eigen
            .into_iter()
            .map(|(values, vectors)| {
                let diag = DMatrix::<C64>::from_diagonal(&DVector::from_iterator(
                    values.len(),
                    values.iter().map(|&l| {
                        if l > floor {
                            (z * C64::new(l.ln(), 0.0)).exp()
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    }),
                ));
                &vectors * diag * vectors.adjoint()
            })
            .collect();
        Ok(OperatorField {
            grid: self.grid.clone(),
            dim: self.dim,
            matrices,
        })
    }

    /// Discrete stand-in for norm continuity of `x -> T(x)`: the largest
    /// difference quotient over declared adjacencies in the chosen norm.
    pub fn continuity_modulus(&self, kind: NormKind) -> Result<f64> {
        if let NormKind::Schatten(p) = kind {
            if p < 1.0 {
                return Err(FieldError::BadExponent {
                    p,
                    reason: "schatten modulus needs p >= 1",
                });
            }
        }
        let value = self
            .grid
            .adjacency()
            .par_iter()
            .map(|&(i, j)| {
                let diff = &self.matrices[i] - &self.matrices[j];
                let norm = match kind {
                    NormKind::Operator => linalg::op_norm(&diff),
                    NormKind::Schatten(p) => linalg::schatten_norm(&diff, p),
                };
                norm / self.grid.metric(i, j)
            })
            .reduce(|| 0.0, f64::max);
        Ok(value)
    }
}

/// One fiber vector per grid point; a section of the standard bundle.
#[derive(Debug, Clone)]
pub struct VectorField {
    grid: Arc<Grid>,
    dim: usize,
    vectors: Vec<DVector<C64>>,
}

impl VectorField {
    pub fn new(grid: Arc<Grid>, dim: usize, vectors: Vec<DVector<C64>>) -> Result<Self> {
        if dim == 0 {
            return Err(FieldError::BadDomain("fiber dimension must be positive".into()));
        }
        if vectors.len() != grid.len() {
            return Err(FieldError::InvalidGrid(format!(
                "vector count {} does not match grid size {}",
                vectors.len(),
                grid.len()
            )));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(FieldError::DimensionMismatch {
                left: dim,
                right: v.len(),
            });
        }
        Ok(VectorField { grid, dim, vectors })
    }

    /// The same fiber vector at every point.
    pub fn constant(grid: Arc<Grid>, vector: DVector<C64>) -> Self {
        let dim = vector.len();
        let vectors = vec![vector; grid.len()];
        VectorField { grid, dim, vectors }
    }

    /// Standard basis vector as a constant section.
    pub fn basis(grid: Arc<Grid>, dim: usize, index: usize) -> Self {
        let mut v = DVector::<C64>::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Self::constant(grid, v)
    }

    pub fn zeros(grid: Arc<Grid>, dim: usize) -> Self {
        let vectors = vec![DVector::<C64>::zeros(dim); grid.len()];
        VectorField { grid, dim, vectors }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[DVector<C64>] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &DVector<C64> {
        &self.vectors[i]
    }

    /// The algebra-valued inner product `<v, w>(x) = <v(x), w(x)>`, conjugate
    /// linear in the first slot.
    pub fn inner(&self, other: &Self) -> Result<ScalarField> {
        if self.dim != other.dim {
            return Err(FieldError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        if !(Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid) {
            return Err(FieldError::GridMismatch);
        }
        let values = self
            .vectors
            .iter()
            .zip(&other.vectors)
            .map(|(v, w)| v.dotc(w))
            .collect();
        ScalarField::new(self.grid.clone(), values)
    }

    /// Pointwise norm field `x -> ||v(x)||`.
    pub fn norm_field(&self) -> ScalarField {
        ScalarField::from_fn(self.grid.clone(), |i| {
            C64::new(self.vectors[i].norm(), 0.0)
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.vectors.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(FieldError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let vectors = self
            .vectors
            .iter()
            .zip(&other.vectors)
            .map(|(a, b)| a + b)
            .collect();
        Ok(VectorField {
            grid: self.grid.clone(),
            dim: self.dim,
            vectors,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let negated = other.scale(C64::new(-1.0, 0.0));
        self.add(&negated)
    }

    pub fn scale(&self, c: C64) -> Self {
        let vectors = self.vectors.iter().map(|v| v * c).collect();
        VectorField {
            grid: self.grid.clone(),
            dim: self.dim,
            vectors,
        }
    }

    /// The module action: `(v a)(x) = v(x) a(x)`.
    pub fn scalar_mul(&self, a: &ScalarField) -> Result<Self> {
        if !(Arc::ptr_eq(&self.grid, a.grid()) || *self.grid == **a.grid()) {
            return Err(FieldError::GridMismatch);
        }
        let vectors = self
            .vectors
            .iter()
            .enumerate()
            .map(|(i, v)| v * a.value(i))
            .collect();
        Ok(VectorField {
            grid: self.grid.clone(),
            dim: self.dim,
            vectors,
        })
    }

    /// The rank-one field `|v><w|`.
    pub fn outer(&self, other: &Self) -> Result<OperatorField> {
        if self.dim != other.dim {
            return Err(FieldError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let matrices = self
            .vectors
            .iter()
            .zip(&other.vectors)
            .map(|(v, w)| {
                DMatrix::<C64>::from_fn(self.dim, self.dim, |r, c| v[r] * w[c].conj())
            })
            .collect();
        OperatorField::new(self.grid.clone(), self.dim, matrices)
    }
}
