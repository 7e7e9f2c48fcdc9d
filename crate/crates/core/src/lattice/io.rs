//! Segment-list and design JSON files.
//!
//! Segment list: `{"label": .., "points": [[x,y,z],..], "segments": [[a,b],..],
//! "units": "mm", "z": ..}`. A design wraps several of those under `layers` next
//! to `layer_thickness` and `rotation_deg_per_layer`. Files are written through
//! [`crate::format::to_stable_json`].

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Design, LatticeError, Layer, Point3, Segment, Welder};
use crate::format::to_stable_json;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerFile {
    #[serde(default = "mm")]
    pub units: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub points: Vec<[f64; 3]>,
    pub segments: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
}

fn mm() -> String {
    "mm".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignFile {
    pub layer_thickness: f64,
    pub rotation_deg_per_layer: f64,
    pub layers: Vec<LayerFile>,
}

impl From<&Layer> for LayerFile {
    fn from(layer: &Layer) -> Self {
        LayerFile {
            units: mm(),
            label: (!layer.label.is_empty()).then(|| layer.label.clone()),
            points: layer.points.iter().map(|&p| p.into()).collect(),
            segments: layer.segments.iter().map(|&s| s.into()).collect(),
            z: Some(layer.z),
        }
    }
}

/// Either kind of lattice document, as detected from its keys.
#[derive(Debug, Clone, PartialEq)]
pub enum LatticeDocument {
    Layer(Layer),
    Design(Design),
}

impl LatticeDocument {
    /// View as a design; a bare layer becomes a one-layer design.
    pub fn into_design(self) -> Design {
        match self {
            LatticeDocument::Design(d) => d,
            LatticeDocument::Layer(l) => Design { layers: vec![l], layer_thickness: 0.0, rotation_deg_per_layer: 0.0 },
        }
    }
}

fn json_context(err: &serde_json::Error) -> String {
    format!("line {} column {}", err.line(), err.column())
}

fn format_err(context: impl Into<String>, reason: impl Into<String>) -> LatticeError {
    LatticeError::Format { context: context.into(), reason: reason.into() }
}

/// Validate and weld a parsed segment list. `where_` prefixes error contexts.
fn layer_from_file(file: LayerFile, weld_tol: f64, where_: &str) -> Result<Layer, LatticeError> {
    if file.units != "mm" {
        return Err(format_err(format!("{where_}units"), format!("expected \"mm\", got {:?}", file.units)));
    }
    let mut welder = Welder::new(weld_tol);
    let mut remap = Vec::with_capacity(file.points.len());
    for (i, p) in file.points.iter().enumerate() {
        let p = Point3::from(*p);
        if !p.is_finite() {
            return Err(format_err(format!("{where_}points[{i}]"), "coordinate is not finite"));
        }
        remap.push(welder.insert(p));
    }
    let n = file.points.len();
    let mut seen = HashSet::with_capacity(file.segments.len());
    let mut segments = Vec::with_capacity(file.segments.len());
    for (k, [a, b]) in file.segments.iter().copied().enumerate() {
        let ctx = || format!("{where_}segments[{k}]");
        if a >= n || b >= n {
            return Err(format_err(ctx(), format!("index {} out of bounds for {n} points", a.max(b))));
        }
        let (wa, wb) = (remap[a], remap[b]);
        if wa == wb {
            return Err(format_err(ctx(), format!("points {a} and {b} weld into one vertex (self-loop)")));
        }
        let key = (wa.min(wb), wa.max(wb));
        if !seen.insert(key) {
            return Err(format_err(ctx(), format!("duplicate segment between points {a} and {b}")));
        }
        segments.push(Segment::new(wa, wb));
    }
    let points = welder.into_points();
    let z = file.z.unwrap_or_else(|| points.iter().map(|p| p.z).fold(f64::INFINITY, f64::min));
    Ok(Layer { points, segments, z: if z.is_finite() { z } else { 0.0 }, label: file.label.unwrap_or_default() })
}

/// Parse a segment-list JSON document into a welded, validated layer.
pub fn layer_from_json(text: &str, weld_tol: f64) -> Result<Layer, LatticeError> {
    let file: LayerFile = serde_json::from_str(text).map_err(|e| format_err(json_context(&e), e.to_string()))?;
    layer_from_file(file, weld_tol, "")
}

pub fn design_from_json(text: &str, weld_tol: f64) -> Result<Design, LatticeError> {
    let file: DesignFile = serde_json::from_str(text).map_err(|e| format_err(json_context(&e), e.to_string()))?;
    let layers = file
        .layers
        .into_iter()
        .enumerate()
        .map(|(k, l)| layer_from_file(l, weld_tol, &format!("layers[{k}].")))
        .collect::<Result<Vec<_>, _>>()?;
    for (k, w) in layers.windows(2).enumerate() {
        if w[1].z <= w[0].z {
            return Err(format_err(format!("layers[{}].z", k + 1), "layer heights must strictly increase"));
        }
    }
    Ok(Design { layers, layer_thickness: file.layer_thickness, rotation_deg_per_layer: file.rotation_deg_per_layer })
}

/// Parse either a design or a single segment list.
pub fn read_document(text: &str, weld_tol: f64) -> Result<LatticeDocument, LatticeError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format_err(json_context(&e), e.to_string()))?;
    if value.get("layers").is_some() {
        design_from_json(text, weld_tol).map(LatticeDocument::Design)
    } else {
        layer_from_json(text, weld_tol).map(LatticeDocument::Layer)
    }
}

/// Read a segment-list file.
pub fn import_segments(path: impl AsRef<Path>, weld_tol: f64) -> Result<Layer, LatticeError> {
    let text = std::fs::read_to_string(path)?;
    layer_from_json(&text, weld_tol)
}

pub fn layer_to_json(layer: &Layer) -> String {
    to_stable_json(&LayerFile::from(layer)).expect("layer serialization cannot fail")
}

pub fn design_to_json(design: &Design) -> String {
    let file = DesignFile {
        layer_thickness: design.layer_thickness,
        rotation_deg_per_layer: design.rotation_deg_per_layer,
        layers: design.layers.iter().map(LayerFile::from).collect(),
    };
    to_stable_json(&file).expect("design serialization cannot fail")
}
