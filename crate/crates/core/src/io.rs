//! JSON schemas and CSV export for grids and fields.
//!
//! All schemas carry a `schema_version` field. Complex numbers serialize as
//! `[re, im]` pairs; matrices as row-major flat lists of pairs, one list per
//! grid point. Numbers render in the shortest round-trip decimal form, so a
//! serialize/parse/serialize cycle is byte-identical.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::base::{Grid, ScalarField};
use crate::error::{FieldError, Result};
use crate::frames::Frame;
use crate::opfield::{OperatorField, VectorField};
use crate::C64;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridJson {
    pub schema_version: u32,
    pub points: Vec<Vec<f64>>,
    pub adjacency: Vec<(usize, usize)>,
    #[serde(default)]
    pub compactified: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalarFieldJson {
    pub schema_version: u32,
    pub points: Vec<Vec<f64>>,
    pub adjacency: Vec<(usize, usize)>,
    #[serde(default)]
    pub compactified: bool,
    pub values: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorFieldJson {
    pub schema_version: u32,
    pub points: Vec<Vec<f64>>,
    pub adjacency: Vec<(usize, usize)>,
    #[serde(default)]
    pub compactified: bool,
    pub dim: usize,
    /// One row-major flat matrix per grid point.
    pub matrices: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameJson {
    pub schema_version: u32,
    pub label: String,
    pub points: Vec<Vec<f64>>,
    pub adjacency: Vec<(usize, usize)>,
    #[serde(default)]
    pub compactified: bool,
    pub dim: usize,
    /// One projection matrix per grid point, row-major.
    pub projection: Vec<Vec<[f64; 2]>>,
    /// Frame elements, each a list of per-point fiber vectors.
    pub elements: Vec<Vec<Vec<[f64; 2]>>>,
}

fn pack(c: C64) -> [f64; 2] {
    [c.re, c.im]
}

fn unpack(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

pub fn grid_to_json(grid: &Grid) -> GridJson {
    GridJson {
        schema_version: SCHEMA_VERSION,
        points: grid.points().to_vec(),
        adjacency: grid.adjacency().to_vec(),
        compactified: grid.compactified(),
    }
}

pub fn grid_from_json(json: &GridJson) -> Result<Arc<Grid>> {
    if json.compactified {
        Grid::new_compactified(json.points.clone(), json.adjacency.clone())
    } else {
        Grid::new(json.points.clone(), json.adjacency.clone())
    }
}

pub fn scalar_field_to_json(field: &ScalarField) -> ScalarFieldJson {
    let grid = grid_to_json(field.grid());
    ScalarFieldJson {
        schema_version: SCHEMA_VERSION,
        points: grid.points,
        adjacency: grid.adjacency,
        compactified: grid.compactified,
        values: field.values().iter().map(|&v| pack(v)).collect(),
    }
}

pub fn scalar_field_from_json(json: &ScalarFieldJson) -> Result<ScalarField> {
    let grid = grid_from_json(&GridJson {
        schema_version: json.schema_version,
        points: json.points.clone(),
        adjacency: json.adjacency.clone(),
        compactified: json.compactified,
    })?;
    ScalarField::new(grid, json.values.iter().map(|&v| unpack(v)).collect())
}

pub fn operator_field_to_json(field: &OperatorField) -> OperatorFieldJson {
    let grid = grid_to_json(field.grid());
    let dim = field.dim();
    let matrices = field
        .matrices()
        .iter()
        .map(|m| {
            let mut flat = Vec::with_capacity(dim * dim);
            for i in 0..dim {
                for j in 0..dim {
                    flat.push(pack(m[(i, j)]));
                }
            }
            flat
        })
        .collect();
    OperatorFieldJson {
        schema_version: SCHEMA_VERSION,
        points: grid.points,
        adjacency: grid.adjacency,
        compactified: grid.compactified,
        dim,
        matrices,
    }
}

pub fn operator_field_from_json(json: &OperatorFieldJson) -> Result<OperatorField> {
    let grid = grid_from_json(&GridJson {
        schema_version: json.schema_version,
        points: json.points.clone(),
        adjacency: json.adjacency.clone(),
        compactified: json.compactified,
    })?;
    let dim = json.dim;
    let matrices = json
        .matrices
        .iter()
        .map(|flat| {
            if flat.len() != dim * dim {
                return Err(FieldError::DimensionMismatch {
                    left: dim * dim,
                    right: flat.len(),
                });
            }
            Ok(DMatrix::<C64>::from_fn(dim, dim, |i, j| {
                unpack(flat[i * dim + j])
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    OperatorField::new(grid, dim, matrices)
}

pub fn frame_to_json(frame: &Frame) -> FrameJson {
    let module = frame.module();
    let projection = operator_field_to_json(module.projection());
    let elements = frame
        .elements()
        .iter()
        .map(|e| {
            e.vectors()
                .iter()
                .map(|v| v.iter().map(|&c| pack(c)).collect())
                .collect()
        })
        .collect();
    FrameJson {
        schema_version: SCHEMA_VERSION,
        label: module.label().to_string(),
        points: projection.points,
        adjacency: projection.adjacency,
        compactified: projection.compactified,
        dim: module.dim(),
        projection: projection.matrices,
        elements,
    }
}

pub fn frame_from_json(json: &FrameJson) -> Result<Frame> {
    let projection = operator_field_from_json(&OperatorFieldJson {
        schema_version: json.schema_version,
        points: json.points.clone(),
        adjacency: json.adjacency.clone(),
        compactified: json.compactified,
        dim: json.dim,
        matrices: json.projection.clone(),
    })?;
    let grid = projection.grid().clone();
    let spec = Arc::new(crate::frames::ModuleSpec::new(projection, json.label.clone())?);
    let elements = json
        .elements
        .iter()
        .map(|vectors| {
            let fibers = vectors
                .iter()
                .map(|v| DVector::from_iterator(json.dim, v.iter().map(|&c| unpack(c))))
                .collect();
            VectorField::new(grid.clone(), json.dim, fibers)
        })
        .collect::<Result<Vec<_>>>()?;
    Frame::new(elements, spec)
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| FieldError::Serialization(e.to_string()))
}

pub fn from_json_str<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| FieldError::Serialization(e.to_string()))
}

/// CSV with one row per grid point: `x_index,re,im`.
pub fn scalar_field_csv(field: &ScalarField) -> String {
    let mut out = String::from("x_index,re,im\n");
    for (i, v) in field.values().iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", i, v.re, v.im));
    }
    out
}

/// CSV with one row per grid point: index followed by the coordinates.
pub fn grid_csv(grid: &Grid) -> String {
    let coord_dim = grid.point(0).len();
    let mut out = String::from("x_index");
    for d in 0..coord_dim {
        out.push_str(&format!(",coord{d}"));
    }
    out.push('\n');
    for (i, p) in grid.points().iter().enumerate() {
        out.push_str(&i.to_string());
        for c in p {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::FieldSampler;

    #[test]
    fn operator_field_round_trip_is_bit_exact() {
        let grid = Grid::line(3, 0.0, 1.0);
        let mut sampler = FieldSampler::new(88, grid, 3);
        let field = sampler.operator_field();
        let json = to_json_string(&operator_field_to_json(&field)).unwrap();
        let parsed: OperatorFieldJson = from_json_str(&json).unwrap();
        let back = operator_field_from_json(&parsed).unwrap();
        for (a, b) in field.matrices().iter().zip(back.matrices()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
        // serialize again: byte-identical
        let again = to_json_string(&operator_field_to_json(&back)).unwrap();
        assert_eq!(json, again);
    }

    #[test]
    fn scalar_field_round_trip() {
        let grid = Grid::line(4, -1.0, 2.0);
        let mut sampler = FieldSampler::new(9, grid, 2);
        let field = sampler.scalar_field();
        let json = to_json_string(&scalar_field_to_json(&field)).unwrap();
        let parsed: ScalarFieldJson = from_json_str(&json).unwrap();
        let back = scalar_field_from_json(&parsed).unwrap();
        assert_eq!(field.values(), back.values());
    }

    #[test]
    fn frame_round_trip_preserves_residual() {
        let grid = Grid::line(4, 0.0, 1.0);
        let spec = Arc::new(
            crate::frames::ModuleSpec::new(OperatorField::identity(grid, 2), "full").unwrap(),
        );
        let frame = crate::frames::projected_frame(&spec).unwrap();
        let json = to_json_string(&frame_to_json(&frame)).unwrap();
        let back = frame_from_json(&from_json_str::<FrameJson>(&json).unwrap()).unwrap();
        assert_eq!(back.len(), frame.len());
        assert!(crate::frames::frame_residual_default(&back).unwrap() < 1e-12);
    }

    #[test]
    fn malformed_json_is_a_serialization_error() {
        let err = from_json_str::<GridJson>("{not json").unwrap_err();
        assert!(matches!(err, FieldError::Serialization(_)));
    }

    #[test]
    fn csv_shape() {
        let grid = Grid::line(2, 0.0, 1.0);
        let f = ScalarField::from_real(grid.clone(), vec![0.5, -1.25]).unwrap();
        let csv = scalar_field_csv(&f);
        assert_eq!(csv, "x_index,re,im\n0,0.5,0\n1,-1.25,0\n");
        let gcsv = grid_csv(&grid);
        assert!(gcsv.starts_with("x_index,coord0\n"));
    }
}
