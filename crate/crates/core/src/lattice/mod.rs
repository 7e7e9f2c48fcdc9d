//! Planar lattice layers: generation, import, clipping, rotation, stacking and
//! projection onto height fields.
//!
//! A [`Layer`] is a welded list of points plus a list of straight struts
//! ([`Segment`]) referencing them. Every operation here is a pure function over
//! immutable inputs.

mod clip;
mod io;
mod tiling;
mod weld;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use clip::{clip_layer, clip_segment};
pub use io::{
    design_from_json, design_to_json, import_segments, layer_from_json, layer_to_json, read_document, DesignFile,
    LatticeDocument, LayerFile,
};
pub use tiling::{
    arrowhead_unit_cell, gen_arrowhead, gen_honeycomb, gen_rectilinear, gen_reentrant_honeycomb, gen_snub_square,
    honeycomb_lattice_vectors, reentrant_unit_cell, snub_square_cell_size, tile_cells, Tiling,
};
pub use weld::{LayerBuilder, Welder};

/// Default distance under which two vertices are merged, in mm.
pub const DEFAULT_WELD_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },
    #[error("vertex {index} at ({x}, {y}) lies outside the surface domain")]
    Domain { index: usize, x: f64, y: f64 },
    #[error("format error at {context}: {reason}")]
    Format { context: String, reason: String },
    #[error("invalid layer: {0}")]
    InvalidLayer(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn param_err(name: &'static str, reason: impl Into<String>) -> LatticeError {
    LatticeError::Parameter { name, reason: reason.into() }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<(), LatticeError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(param_err(name, format!("must be a positive finite number, got {value}")))
    }
}

/// A point in mm. Serialized as `[x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        let (dx, dy, dz) = (other.x - self.x, other.y - self.y, other.z - self.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn lerp(&self, other: &Point3, t: f64) -> Point3 {
        Point3::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t, self.z + (other.z - self.z) * t)
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(v: [f64; 3]) -> Self {
        Point3::new(v[0], v[1], v[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

/// A strut between two points of a layer, by index. Serialized as `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Segment {
    pub a: usize,
    pub b: usize,
}

impl Segment {
    pub const fn new(a: usize, b: usize) -> Self {
        Self { a, b }
    }

    /// Unordered key, smaller index first.
    pub fn key(&self) -> (usize, usize) {
        if self.a <= self.b {
            (self.a, self.b)
        } else {
            (self.b, self.a)
        }
    }
}

impl From<[usize; 2]> for Segment {
    fn from(v: [usize; 2]) -> Self {
        Segment::new(v[0], v[1])
    }
}

impl From<Segment> for [usize; 2] {
    fn from(s: Segment) -> Self {
        [s.a, s.b]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Layer {
    pub points: Vec<Point3>,
    pub segments: Vec<Segment>,
    /// Nominal height of the layer in mm. Planar layers have every point at this z.
    pub z: f64,
    pub label: String,
}

impl Layer {
    pub fn segment_endpoints(&self, s: &Segment) -> (Point3, Point3) {
        (self.points[s.a], self.points[s.b])
    }

    pub fn segment_length(&self, s: &Segment) -> f64 {
        self.points[s.a].distance(&self.points[s.b])
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| self.segment_length(s)).sum()
    }

    /// Axis-aligned xy bounds as `(min_x, min_y, max_x, max_y)`, `None` when empty.
    pub fn bounds(&self) -> Option<(f64, f64, f64, f64)> {
        let first = self.points.first()?;
        let init = (first.x, first.y, first.x, first.y);
        Some(self.points.iter().fold(init, |(a, b, c, d), p| (a.min(p.x), b.min(p.y), c.max(p.x), d.max(p.y))))
    }

    /// Check the layer invariants: finite points, in-bounds indices, no self-loops,
    /// no duplicate struts and every strut longer than `weld_tol`.
    pub fn validate(&self, weld_tol: f64) -> Result<(), LatticeError> {
        if let Some(i) = self.points.iter().position(|p| !p.is_finite()) {
            return Err(LatticeError::InvalidLayer(format!("point {i} is not finite")));
        }
        let mut seen = std::collections::HashSet::with_capacity(self.segments.len());
        for (k, s) in self.segments.iter().enumerate() {
            let n = self.points.len();
            if s.a >= n || s.b >= n {
                return Err(LatticeError::InvalidLayer(format!(
                    "segment {k} references point {} of {n}",
                    s.a.max(s.b)
                )));
            }
            if s.a == s.b {
                return Err(LatticeError::InvalidLayer(format!("segment {k} is a self-loop")));
            }
            if !seen.insert(s.key()) {
                return Err(LatticeError::InvalidLayer(format!("segment {k} duplicates ({}, {})", s.a, s.b)));
            }
            if self.segment_length(s) <= weld_tol {
                return Err(LatticeError::InvalidLayer(format!("segment {k} is shorter than the weld tolerance")));
            }
        }
        Ok(())
    }
}

/// A stack of layers printed bottom to top.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Design {
    pub layers: Vec<Layer>,
    /// Centre-to-centre distance between consecutive layers, mm.
    pub layer_thickness: f64,
    pub rotation_deg_per_layer: f64,
}

/// Cropping region for generated or imported layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Contour {
    Rectangle { width: f64, height: f64, center: [f64; 2] },
    Circle { radius: f64, center: [f64; 2] },
}

impl Contour {
    pub fn rectangle(width: f64, height: f64) -> Self {
        Contour::Rectangle { width, height, center: [width / 2.0, height / 2.0] }
    }

    pub fn rectangle_centered(width: f64, height: f64, cx: f64, cy: f64) -> Self {
        Contour::Rectangle { width, height, center: [cx, cy] }
    }

    pub fn circle(radius: f64, cx: f64, cy: f64) -> Self {
        Contour::Circle { radius, center: [cx, cy] }
    }

    pub fn validate(&self) -> Result<(), LatticeError> {
        match *self {
            Contour::Rectangle { width, height, center } => {
                require_positive("width", width)?;
                require_positive("height", height)?;
                if !(center[0].is_finite() && center[1].is_finite()) {
                    return Err(param_err("center", "must be finite"));
                }
            }
            Contour::Circle { radius, center } => {
                require_positive("radius", radius)?;
                if !(center[0].is_finite() && center[1].is_finite()) {
                    return Err(param_err("center", "must be finite"));
                }
            }
        }
        Ok(())
    }

    pub fn center(&self) -> (f64, f64) {
        match *self {
            Contour::Rectangle { center, .. } | Contour::Circle { center, .. } => (center[0], center[1]),
        }
    }

    /// `(min_x, min_y, max_x, max_y)`.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        match *self {
            Contour::Rectangle { width, height, center } => {
                (center[0] - width / 2.0, center[1] - height / 2.0, center[0] + width / 2.0, center[1] + height / 2.0)
            }
            Contour::Circle { radius, center } => {
                (center[0] - radius, center[1] - radius, center[0] + radius, center[1] + radius)
            }
        }
    }

    /// Closed containment test, widened by `eps`.
    pub fn contains(&self, x: f64, y: f64, eps: f64) -> bool {
        match *self {
            Contour::Rectangle { .. } => {
                let (x0, y0, x1, y1) = self.bounds();
                x >= x0 - eps && x <= x1 + eps && y >= y0 - eps && y <= y1 + eps
            }
            Contour::Circle { radius, center } => {
                let (dx, dy) = (x - center[0], y - center[1]);
                (dx * dx + dy * dy).sqrt() <= radius + eps
            }
        }
    }
}

/// Rigid rotation of every point about `center` in the xy plane; z is kept.
pub fn rotate_layer(layer: &Layer, angle_deg: f64, center: Point3) -> Layer {
    let (sin, cos) = angle_deg.to_radians().sin_cos();
    let points = layer
        .points
        .iter()
        .map(|p| {
            let (dx, dy) = (p.x - center.x, p.y - center.y);
            Point3::new(center.x + cos * dx - sin * dy, center.y + sin * dx + cos * dy, p.z)
        })
        .collect();
    Layer { points, ..layer.clone() }
}

/// Stack `n_layers` copies of `base`. Layer `k` is rotated by `k * rotation_deg`
/// about the centre of the base layer's xy bounds and lifted by `k * layer_thickness`.
pub fn stack_layers(
    base: &Layer,
    n_layers: usize,
    layer_thickness: f64,
    rotation_deg: f64,
) -> Result<Design, LatticeError> {
    if n_layers == 0 {
        return Err(param_err("n_layers", "must be at least 1"));
    }
    if n_layers > 1 {
        require_positive("layer_thickness", layer_thickness)?;
    }
    if !rotation_deg.is_finite() {
        return Err(param_err("rotation_deg", "must be finite"));
    }
    let center =
        base.bounds().map(|(x0, y0, x1, y1)| Point3::new((x0 + x1) / 2.0, (y0 + y1) / 2.0, 0.0)).unwrap_or_default();
    let layers = (0..n_layers)
        .map(|k| {
            let mut layer = rotate_layer(base, k as f64 * rotation_deg, center);
            let dz = k as f64 * layer_thickness;
            for p in &mut layer.points {
                p.z += dz;
            }
            layer.z = base.z + dz;
            if layer.label.is_empty() {
                layer.label = format!("layer{k}");
            } else {
                layer.label = format!("{}#{k}", base.label);
            }
            layer
        })
        .collect();
    Ok(Design { layers, layer_thickness, rotation_deg_per_layer: rotation_deg })
}

/// A printing surface `z = f(x, y)`.
pub trait HeightField {
    /// Height at `(x, y)`, or `None` outside the domain.
    fn height(&self, x: f64, y: f64) -> Option<f64>;
}

impl<F: Fn(f64, f64) -> Option<f64>> HeightField for F {
    fn height(&self, x: f64, y: f64) -> Option<f64> {
        self(x, y)
    }
}

/// The flat plane `z = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Flat;

impl HeightField for Flat {
    fn height(&self, _x: f64, _y: f64) -> Option<f64> {
        Some(0.0)
    }
}

/// Upper cap of a sphere: `z = cz + sqrt(R² - (x-cx)² - (y-cy)²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalCap {
    pub center: [f64; 3],
    pub radius: f64,
}

impl HeightField for SphericalCap {
    fn height(&self, x: f64, y: f64) -> Option<f64> {
        let (dx, dy) = (x - self.center[0], y - self.center[1]);
        let rem = self.radius * self.radius - dx * dx - dy * dy;
        (rem >= 0.0).then(|| self.center[2] + rem.sqrt())
    }
}

/// Replace each vertex z by `surface(x, y) + layer.z`. Struts stay straight chords.
pub fn project_layer(layer: &Layer, surface: &dyn HeightField) -> Result<Layer, LatticeError> {
    let points = layer
        .points
        .iter()
        .enumerate()
        .map(|(index, p)| match surface.height(p.x, p.y) {
            Some(h) if h.is_finite() => Ok(Point3::new(p.x, p.y, h + layer.z)),
            _ => Err(LatticeError::Domain { index, x: p.x, y: p.y }),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Layer { points, ..layer.clone() })
}
