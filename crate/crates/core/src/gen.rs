//! Seeded pseudo-random field generation for property runs.
//!
//! All randomness flows through a ChaCha8 stream seeded from a caller-supplied
//! integer, so every report is reproducible bit for bit: entries are standard
//! complex Gaussians `(n1 + i n2) / sqrt(2)` drawn point by point in grid
//! order, row-major within each fiber matrix, real part before imaginary.
//! Hermitian and positive variants come from symmetrization and squaring.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::base::{Grid, ScalarField};
use crate::frames::ModuleSpec;
use crate::opfield::{OperatorField, VectorField};
use crate::C64;

pub struct FieldSampler {
    rng: ChaCha8Rng,
    grid: Arc<Grid>,
    dim: usize,
}

impl FieldSampler {
    pub fn new(seed: u64, grid: Arc<Grid>, dim: usize) -> Self {
        FieldSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            grid,
            dim,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn gaussian(&mut self) -> C64 {
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        C64::new(re, im) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
    }

    fn gaussian_matrix(&mut self) -> DMatrix<C64> {
        let dim = self.dim;
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = self.gaussian();
            }
        }
        m
    }

    /// Complex Gaussian operator field.
    pub fn operator_field(&mut self) -> OperatorField {
        let matrices = (0..self.grid.len()).map(|_| self.gaussian_matrix()).collect();
        OperatorField::new(self.grid.clone(), self.dim, matrices).expect("sampled field is valid")
    }

    /// Hermitian field by symmetrization `(G + G*) / 2`.
    pub fn hermitian_field(&mut self) -> OperatorField {
        let g = self.operator_field();
        g.add(&g.adjoint()).unwrap().scale(C64::new(0.5, 0.0))
    }

    /// Positive field by squaring, `G* G`.
    pub fn positive_field(&mut self) -> OperatorField {
        let g = self.operator_field();
        g.adjoint().compose(&g).unwrap()
    }

    /// Positive contraction `0 <= T <= 1`, rescaled just under the bound.
    pub fn positive_contraction(&mut self) -> OperatorField {
        let pos = self.positive_field();
        let top = pos.sup_operator_norm();
        pos.scale(C64::new(1.0 / (top * (1.0 + 1e-12)), 0.0))
    }

    /// Unitary field from the QR factor of a Gaussian sample.
    pub fn unitary_field(&mut self) -> OperatorField {
        let matrices: Vec<DMatrix<C64>> = (0..self.grid.len())
            .map(|_| self.gaussian_matrix().qr().q())
            .collect();
        OperatorField::new(self.grid.clone(), self.dim, matrices).expect("unitary field is valid")
    }

    /// Rank-`rank` projection field from the leading QR columns.
    pub fn projection_field(&mut self, rank: usize) -> OperatorField {
        assert!(rank <= self.dim, "rank exceeds fiber dimension");
        let matrices: Vec<DMatrix<C64>> = (0..self.grid.len())
            .map(|_| {
                let q = self.gaussian_matrix().qr().q();
                let cols = q.columns(0, rank).into_owned();
                &cols * cols.adjoint()
            })
            .collect();
        OperatorField::new(self.grid.clone(), self.dim, matrices).expect("projection field is valid")
    }

    /// A module operator `P G P` compressed by the spec's projection and
    /// normalized to sup operator norm at most one.
    pub fn module_operator(&mut self, spec: &ModuleSpec) -> OperatorField {
        let g = self.operator_field();
        let p = spec.projection();
        p.compose(&g)
            .unwrap()
            .compose(p)
            .unwrap()
            .normalized()
    }

    /// A positive module operator `P G* G P`, normalized.
    pub fn positive_module_operator(&mut self, spec: &ModuleSpec) -> OperatorField {
        let g = self.positive_field();
        let p = spec.projection();
        p.compose(&g).unwrap().compose(p).unwrap().normalized()
    }

    pub fn vector_field(&mut self) -> VectorField {
        let dim = self.dim;
        let vectors = (0..self.grid.len())
            .map(|_| DVector::from_iterator(dim, (0..dim).map(|_| self.gaussian())))
            .collect();
        VectorField::new(self.grid.clone(), dim, vectors).expect("sampled vectors are valid")
    }

    pub fn scalar_field(&mut self) -> ScalarField {
        let values = (0..self.grid.len()).map(|_| self.gaussian()).collect();
        ScalarField::new(self.grid.clone(), values).expect("sampled scalars are valid")
    }

    /// Real scalar field with values uniform in `[lo, hi]`.
    pub fn real_scalar_field_in(&mut self, lo: f64, hi: f64) -> ScalarField {
        let values = (0..self.grid.len())
            .map(|_| C64::new(self.rng.gen_range(lo..=hi), 0.0))
            .collect();
        ScalarField::new(self.grid.clone(), values).expect("sampled scalars are valid")
    }

    /// Commuting positive pair sharing one unitary eigenbasis per point.
    pub fn commuting_positive_pair(&mut self) -> (OperatorField, OperatorField) {
        let dim = self.dim;
        let mut left = Vec::with_capacity(self.grid.len());
        let mut right = Vec::with_capacity(self.grid.len());
        for _ in 0..self.grid.len() {
            let u = self.gaussian_matrix().qr().q();
            let d1 = DMatrix::<C64>::from_diagonal(&DVector::from_iterator(
                dim,
                (0..dim).map(|_| C64::new(self.rng.gen_range(0.0..=2.0), 0.0)),
            ));
            let d2 = DMatrix::<C64>::from_diagonal(&DVector::from_iterator(
                dim,
                (0..dim).map(|_| C64::new(self.rng.gen_range(0.0..=2.0), 0.0)),
            ));
            left.push(&u * &d1 * u.adjoint());
            right.push(&u * &d2 * u.adjoint());
        }
        (
            OperatorField::new(self.grid.clone(), dim, left).unwrap(),
            OperatorField::new(self.grid.clone(), dim, right).unwrap(),
        )
    }
}
