//! Frames of projective submodules of the standard module, frame transforms,
//! and the frame-series route to Schatten norms and traces.
//!
//! A module is specified by a projection field `P`; its sections are the
//! vector fields with `P v = v`. A frame is a finite family of such sections
//! whose coordinate map reconstructs every inner product:
//! `<v, w> = sum_i <v, e_i> <e_i, w>`. The series `sum_i <e_i, |T|^p e_i>`
//! then recovers the pointwise Schatten trace independently of the frame,
//! which is the identity the rest of the crate cross-checks against the
//! fiberwise singular-value route.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::base::{dini_monitor, ConvergenceReport, Grid, ScalarField};
use crate::error::{FieldError, Result};
use crate::gen::FieldSampler;
use crate::linalg;
use crate::opfield::{OperatorField, VectorField};
use crate::C64;

/// Projection idempotency tolerance for module specs.
pub const PROJECTION_IDEMPOTENT_TOL: f64 = 1e-10;
/// Projection self-adjointness tolerance for module specs.
pub const PROJECTION_ADJOINT_TOL: f64 = 1e-12;
/// Membership tolerance for vectors and operators acting on the module.
pub const MODULE_MEMBERSHIP_TOL: f64 = 1e-8;
/// Seed for the default residual test vectors, fixed for reproducible reports.
pub const DEFAULT_RESIDUAL_SEED: u64 = 0x5eed;

/// A projective submodule of the standard module, cut out by a projection field.
#[derive(Debug, Clone)]
pub struct ModuleSpec {
    projection: OperatorField,
    label: String,
}

impl ModuleSpec {
    pub fn new(projection: OperatorField, label: impl Into<String>) -> Result<Self> {
        let idem = projection
            .compose(&projection)?
            .sub(&projection)?
            .sup_operator_norm();
        if idem >= PROJECTION_IDEMPOTENT_TOL {
            return Err(FieldError::InvalidProjection(format!(
                "P^2 - P has norm {idem}"
            )));
        }
        let herm = projection.sup_hermitian_deviation();
        if herm >= PROJECTION_ADJOINT_TOL {
            return Err(FieldError::InvalidProjection(format!(
                "P* - P has norm {herm}"
            )));
        }
        Ok(ModuleSpec {
            projection,
            label: label.into(),
        })
    }

    pub fn projection(&self) -> &OperatorField {
        &self.projection
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.projection.grid()
    }

    pub fn dim(&self) -> usize {
        self.projection.dim()
    }

    /// Compress a vector field into the module.
    pub fn project_vector(&self, v: &VectorField) -> Result<VectorField> {
        self.projection.apply(v)
    }

    /// How far `v` is from being a section of the module.
    pub fn membership_residual(&self, v: &VectorField) -> Result<f64> {
        Ok(self.project_vector(v)?.sub(v)?.sup_norm())
    }

    /// How far `T` is from satisfying `PT = TP = T`.
    pub fn operator_residual(&self, t: &OperatorField) -> Result<f64> {
        let p = &self.projection;
        let left = p.compose(t)?.sub(t)?.sup_operator_norm();
        let right = t.compose(p)?.sub(t)?.sup_operator_norm();
        Ok(left.max(right))
    }

    fn check_operator(&self, t: &OperatorField) -> Result<()> {
        let residual = self.operator_residual(t)?;
        if residual > MODULE_MEMBERSHIP_TOL {
            return Err(FieldError::NotModuleOperator { residual });
        }
        Ok(())
    }
}

/// A finite frame of a module: ordered sections with the reconstruction identity.
#[derive(Debug, Clone)]
pub struct Frame {
    elements: Vec<VectorField>,
    module: Arc<ModuleSpec>,
}

impl Frame {
    pub fn new(elements: Vec<VectorField>, module: Arc<ModuleSpec>) -> Result<Self> {
        for e in &elements {
            let residual = module.membership_residual(e)?;
            if residual > PROJECTION_IDEMPOTENT_TOL {
                return Err(FieldError::NotInModule { residual });
            }
        }
        Ok(Frame { elements, module })
    }

    pub fn elements(&self) -> &[VectorField] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn module(&self) -> &Arc<ModuleSpec> {
        &self.module
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.module.grid()
    }

    /// The default residual test vectors: the projected standard basis plus
    /// eight seeded pseudo-random module vectors.
    pub fn default_test_vectors(&self, seed: u64) -> Vec<VectorField> {
        let dim = self.module.dim();
        let grid = self.grid().clone();
        let mut vectors: Vec<VectorField> = (0..dim)
            .map(|i| {
                self.module
                    .project_vector(&VectorField::basis(grid.clone(), dim, i))
                    .expect("projection applies")
            })
            .collect();
        let mut sampler = FieldSampler::new(seed, grid, dim);
        for _ in 0..8 {
            let v = sampler.vector_field();
            vectors.push(self.module.project_vector(&v).expect("projection applies"));
        }
        vectors
    }
}

/// The frame `{P e_i}` obtained by compressing the standard basis sections.
pub fn projected_frame(spec: &Arc<ModuleSpec>) -> Result<Frame> {
    let dim = spec.dim();
    let grid = spec.grid().clone();
    let elements = (0..dim)
        .map(|i| spec.project_vector(&VectorField::basis(grid.clone(), dim, i)))
        .collect::<Result<Vec<_>>>()?;
    Frame::new(elements, spec.clone())
}

/// A partition-of-unity frame `{eta_i v0}` of the rank-one module of sections
/// supported on `region` with fiber direction `v0`.
///
/// The profiles must satisfy `sum_i eta_i(x)^2 = 1` on the region and vanish
/// off it.
pub fn pou_frame(
    grid: &Arc<Grid>,
    region: &[usize],
    v0: DVector<C64>,
    bump_profiles: &[ScalarField],
) -> Result<Frame> {
    let dim = v0.len();
    if dim == 0 {
        return Err(FieldError::BadDomain("direction vector is empty".into()));
    }
    if (v0.norm() - 1.0).abs() > 1e-10 {
        return Err(FieldError::InvalidProjection(format!(
            "direction vector has norm {}, expected 1",
            v0.norm()
        )));
    }
    for &i in region {
        if i >= grid.len() {
            return Err(FieldError::IndexOutOfRange {
                index: i,
                size: grid.len(),
            });
        }
    }
    let mut indicator = vec![false; grid.len()];
    for &i in region {
        indicator[i] = true;
    }
    for eta in bump_profiles {
        eta.check_on_grid(grid)?;
        if !eta.is_real(1e-12) {
            return Err(FieldError::NotPartitionOfUnity(
                "profiles must be real".into(),
            ));
        }
    }
    for x in 0..grid.len() {
        let sum_sq: f64 = bump_profiles
            .iter()
            .map(|eta| eta.value(x).re * eta.value(x).re)
            .sum();
        let target = if indicator[x] { 1.0 } else { 0.0 };
        if (sum_sq - target).abs() > 1e-10 {
            return Err(FieldError::NotPartitionOfUnity(format!(
                "sum of squared profiles at point {x} is {sum_sq}, expected {target}"
            )));
        }
    }

    // projection field: indicator * |v0><v0|
    let rank_one = DMatrix::<C64>::from_fn(dim, dim, |r, c| v0[r] * v0[c].conj());
    let projection = OperatorField::from_fn(grid.clone(), dim, |x| {
        if indicator[x] {
            rank_one.clone()
        } else {
            DMatrix::<C64>::zeros(dim, dim)
        }
    })?;
    let spec = Arc::new(ModuleSpec::new(projection, "pou")?);

    let direction = VectorField::constant(grid.clone(), v0);
    let elements = bump_profiles
        .iter()
        .map(|eta| direction.scalar_mul(eta))
        .collect::<Result<Vec<_>>>()?;
    Frame::new(elements, spec)
}

/// Worst reconstruction defect over the supplied pairs and all grid points:
/// `max |<v, w>(x) - sum_i <v, e_i>(x) <e_i, w>(x)|`.
///
/// Test vectors are compressed into the module before use.
pub fn frame_residual(frame: &Frame, test_pairs: &[(VectorField, VectorField)]) -> Result<f64> {
    Ok(frame_residual_field(frame, test_pairs)?.sup_norm())
}

/// Pointwise residual profile, the per-point worst defect over pairs.
pub fn frame_residual_field(
    frame: &Frame,
    test_pairs: &[(VectorField, VectorField)],
) -> Result<ScalarField> {
    let grid = frame.grid().clone();
    let mut worst = vec![0.0f64; grid.len()];
    for (v, w) in test_pairs {
        let v = frame.module().project_vector(v)?;
        let w = frame.module().project_vector(w)?;
        let direct = v.inner(&w)?;
        let mut series = ScalarField::zeros(grid.clone());
        for e in frame.elements() {
            let ve = v.inner(e)?;
            let ew = e.inner(&w)?;
            series = series.add(&ve.mul(&ew)?)?;
        }
        let defect = direct.sub(&series)?;
        for (slot, d) in worst.iter_mut().zip(defect.values()) {
            *slot = slot.max(d.norm());
        }
    }
    ScalarField::from_real(grid, worst)
}

/// Residual against the default seeded test vector set.
pub fn frame_residual_default(frame: &Frame) -> Result<f64> {
    let vectors = frame.default_test_vectors(DEFAULT_RESIDUAL_SEED);
    let mut pairs = Vec::new();
    for i in 0..vectors.len() {
        for j in i..vectors.len() {
            pairs.push((vectors[i].clone(), vectors[j].clone()));
        }
    }
    frame_residual(frame, &pairs)
}

/// Frame coordinates `theta(v) = (<e_i, v>)_i` of a module section.
pub fn frame_transform(frame: &Frame, v: &VectorField) -> Result<Vec<ScalarField>> {
    let residual = frame.module().membership_residual(v)?;
    if residual > MODULE_MEMBERSHIP_TOL {
        return Err(FieldError::NotInModule { residual });
    }
    frame.elements().iter().map(|e| e.inner(v)).collect()
}

/// The compression `G_ij = <e_i, T e_j>` of a module operator through the
/// frame transform; a matrix field of size `frame.len()` whose Schatten data
/// agrees with that of `T`.
pub fn conjugate_by_transform(frame: &Frame, t: &OperatorField) -> Result<OperatorField> {
    frame.module().check_operator(t)?;
    let k = frame.len();
    if k == 0 {
        return Err(FieldError::BadDomain(
            "cannot conjugate through an empty frame".into(),
        ));
    }
    let grid = frame.grid().clone();
    let images: Vec<VectorField> = frame
        .elements()
        .iter()
        .map(|e| t.apply(e))
        .collect::<Result<Vec<_>>>()?;
    let mut coords = vec![vec![C64::new(0.0, 0.0); grid.len()]; k * k];
    for (j, te_j) in images.iter().enumerate() {
        for (i, e_i) in frame.elements().iter().enumerate() {
            let entry = e_i.inner(te_j)?;
            for (x, value) in entry.values().iter().enumerate() {
                coords[i * k + j][x] = *value;
            }
        }
    }
    let matrices = (0..grid.len())
        .map(|x| DMatrix::<C64>::from_fn(k, k, |i, j| coords[i * k + j][x]))
        .collect();
    OperatorField::new(grid, k, matrices)
}

/// The Schatten trace through the frame series `sum_i <e_i, |T|^p e_i>`,
/// accumulated by the convergence monitor. For an exact frame the value
/// equals the pointwise `tr |T(x)|^p`.
pub fn frame_trace_series(
    t: &OperatorField,
    frame: &Frame,
    p: f64,
    tol: f64,
) -> Result<(ScalarField, ConvergenceReport)> {
    if p < 1.0 {
        return Err(FieldError::BadExponent {
            p,
            reason: "frame trace series needs p >= 1",
        });
    }
    frame.module().check_operator(t)?;
    let grid = frame.grid().clone();
    let abs_p = t.abs_power(p)?;
    let increments = frame
        .elements()
        .iter()
        .map(|e| {
            let img = abs_p.apply(e)?;
            e.inner(&img)
        })
        .collect::<Result<Vec<_>>>()?;
    // A finite frame is a countable frame with zero tail; the trailing zero
    // increment lets an exactly terminating series register as converged.
    let tail = std::iter::once(ScalarField::zeros(grid.clone()));
    let max_terms = frame.len() + 1;
    dini_monitor(&grid, increments.into_iter().chain(tail), tol, max_terms)
}

/// The algebra-valued trace through the series `sum_i <e_i, T e_i>`.
/// Equals the pointwise trace of `P T P` for exact frames.
pub fn trace_via_frame(t: &OperatorField, frame: &Frame) -> Result<ScalarField> {
    frame.module().check_operator(t)?;
    let mut sum = ScalarField::zeros(frame.grid().clone());
    for e in frame.elements() {
        let img = t.apply(e)?;
        sum = sum.add(&e.inner(&img)?)?;
    }
    Ok(sum)
}

/// The Hilbert-Schmidt pairing through the frame series
/// `sum_i <S e_i, T e_i>`.
pub fn hs_inner_via_frame(
    s: &OperatorField,
    t: &OperatorField,
    frame: &Frame,
) -> Result<ScalarField> {
    frame.module().check_operator(s)?;
    frame.module().check_operator(t)?;
    let mut sum = ScalarField::zeros(frame.grid().clone());
    for e in frame.elements() {
        let se = s.apply(e)?;
        let te = t.apply(e)?;
        sum = sum.add(&se.inner(&te)?)?;
    }
    Ok(sum)
}
