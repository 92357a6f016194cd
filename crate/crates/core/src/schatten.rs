//! Fiberwise Schatten norms, the algebra-valued trace, and the
//! Hilbert-Schmidt pairing, together with structured inequality checks.
//!
//! Pointwise Schatten data here always comes from the per-fiber singular
//! value decomposition; the frame-series route lives in [`crate::frames`] so
//! the two can be cross-checked against each other.

use rayon::prelude::*;

use crate::base::ScalarField;
use crate::error::{FieldError, Result};
use crate::linalg;
use crate::opfield::{NormKind, OperatorField};
use crate::C64;

/// Absolute slack for inequality checks on unit-scale inputs.
pub const INEQUALITY_SLACK: f64 = 1e-9;

/// The pointwise Schatten p-norm as a scalar field:
/// `x -> (sum_i s_i(T(x))^p)^(1/p)` over the singular values.
pub fn schatten_norm_field(t: &OperatorField, p: f64) -> Result<ScalarField> {
    if p < 1.0 {
        return Err(FieldError::BadExponent {
            p,
            reason: "schatten norm needs p >= 1",
        });
    }
    let values: Vec<C64> = t
        .matrices()
        .par_iter()
        .map(|m| C64::new(linalg::schatten_norm(m, p), 0.0))
        .collect();
    ScalarField::new(t.grid().clone(), values)
}

/// `sup_x ||T(x)||_p`, the Banach norm on the Schatten class.
pub fn schatten_sup_norm(t: &OperatorField, p: f64) -> Result<f64> {
    Ok(schatten_norm_field(t, p)?.sup_norm())
}

/// The pointwise trace `x -> sum_i T(x)_{ii}`.
pub fn trace_field(t: &OperatorField) -> ScalarField {
    ScalarField::from_fn(t.grid().clone(), |x| t.matrices()[x].trace())
}

/// The Hilbert-Schmidt pairing through the polarization of `tr |T + i^k S|^2`.
/// Pointwise it agrees with `tr(S(x)* T(x))`.
pub fn hs_inner(s: &OperatorField, t: &OperatorField) -> Result<ScalarField> {
    s.check_compatible(t)?;
    let ik = [
        C64::new(1.0, 0.0),
        C64::new(0.0, 1.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, -1.0),
    ];
    let values: Vec<C64> = (0..s.grid().len())
        .map(|x| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..4 {
                let combo = &t.matrices()[x] + &s.matrices()[x] * ik[k];
                // tr |M|^2 is the squared Frobenius norm
                let sq: f64 = combo.iter().map(|v| v.norm_sqr()).sum();
                acc += ik[k] * C64::new(sq, 0.0);
            }
            acc * C64::new(0.25, 0.0)
        })
        .collect();
    ScalarField::new(s.grid().clone(), values)
}

/// Structured outcome of the Hoelder-von Neumann check.
#[derive(Debug, Clone)]
pub struct HoelderReport {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `||ST||_r <= ||S||_p ||T||_q` with `1/r = 1/p + 1/q` on inputs
/// normalized to sup operator norm at most one.
pub fn check_hoelder(
    s: &OperatorField,
    t: &OperatorField,
    p: f64,
    q: f64,
) -> Result<HoelderReport> {
    if p < 1.0 || q < 1.0 {
        return Err(FieldError::BadExponent {
            p: p.min(q),
            reason: "hoelder exponents need p, q >= 1",
        });
    }
    s.check_compatible(t)?;
    let r = 1.0 / (1.0 / p + 1.0 / q);
    let s = s.normalized();
    let t = t.normalized();
    let st = s.compose(&t)?;
    let lhs = schatten_sup_norm(&st, r)?;
    let rhs = schatten_sup_norm(&s, p)? * schatten_sup_norm(&t, q)?;
    Ok(HoelderReport {
        p,
        q,
        r,
        lhs,
        rhs,
        holds: lhs <= rhs + INEQUALITY_SLACK,
    })
}

/// Sup norm of `tr(ST) - tr(TS)` on normalized inputs; cyclicity says this
/// stays at round-off level.
pub fn check_trace_cyclic(s: &OperatorField, t: &OperatorField) -> Result<f64> {
    s.check_compatible(t)?;
    let s = s.normalized();
    let t = t.normalized();
    let st = trace_field(&s.compose(&t)?);
    let ts = trace_field(&t.compose(&s)?);
    Ok(st.sub(&ts)?.sup_norm())
}

#[derive(Debug, Clone)]
pub struct OrderIdealReport {
    pub p: f64,
    pub max_trace_excess: f64,
    pub holds: bool,
}

/// For `|S|^p <= |T|^p` pointwise, verifies the trace inequality
/// `tr |S|^p <= tr |T|^p` pointwise. The operator-order precondition is
/// checked on the Hermitian difference and failure is an error, not a
/// `holds = false` verdict.
pub fn check_order_ideal(
    s: &OperatorField,
    t: &OperatorField,
    p: f64,
) -> Result<OrderIdealReport> {
    if p < 1.0 {
        return Err(FieldError::BadExponent {
            p,
            reason: "order-ideal check needs p >= 1",
        });
    }
    s.check_compatible(t)?;
    let sp = s.abs_power(p)?;
    let tp = t.abs_power(p)?;
    let diff = tp.sub(&sp)?;
    let min_eig = diff
        .matrices()
        .par_iter()
        .map(|m| {
            linalg::hermitian_eigen_sorted(&linalg::hermitize(m))
                .0
                .last()
                .copied()
                .unwrap_or(0.0)
        })
        .reduce(|| f64::INFINITY, f64::min);
    if min_eig < -crate::opfield::POSITIVITY_TOL {
        return Err(FieldError::PreconditionFailed(format!(
            "|S|^p <= |T|^p fails pointwise: min eigenvalue of the difference is {min_eig}"
        )));
    }
    let excess = trace_field(&sp).sub(&trace_field(&tp))?.max_real();
    Ok(OrderIdealReport {
        p,
        max_trace_excess: excess,
        holds: excess <= INEQUALITY_SLACK,
    })
}

/// Pointwise norms, sup norm and modulus for one exponent, ready for export.
#[derive(Debug, Clone)]
pub struct SchattenReport {
    pub p: f64,
    pub norm_field: ScalarField,
    pub sup_norm: f64,
    pub modulus: f64,
}

impl SchattenReport {
    pub fn compute(t: &OperatorField, p: f64) -> Result<Self> {
        let norm_field = schatten_norm_field(t, p)?;
        let sup_norm = norm_field.sup_norm();
        let modulus = t.continuity_modulus(NormKind::Schatten(p))?;
        Ok(SchattenReport {
            p,
            norm_field,
            sup_norm,
            modulus,
        })
    }

    /// CSV rows `x_index,pointwise_norm` preceded by metadata comments.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# p={}\n", self.p));
        out.push_str(&format!("# sup_norm={}\n", self.sup_norm));
        out.push_str(&format!("# modulus={}\n", self.modulus));
        out.push_str("x_index,pointwise_norm\n");
        for (i, v) in self.norm_field.values().iter().enumerate() {
            out.push_str(&format!("{},{}\n", i, v.re));
        }
        out
    }
}
