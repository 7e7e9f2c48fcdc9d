//! Toolpath planning and emission.
//!
//! A design plus one solution per layer is planned into a flat list of moves
//! ([`plan_program`]). Both backends, Marlin G-code and the generic toolpath CSV,
//! render that same list, so they always agree on geometry and extrusion.
//!
//! Extrusion per strut follows the cylinder model
//! `E = k · 4 · length · LT · EM · d_n / (π · f_d²)`, emitted in relative mode.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{Design, Point3};
use crate::optimizer::Solution;

#[derive(Debug, Error, PartialEq)]
pub enum GcodeError {
    #[error("invalid print parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },
    #[error("design has {layers} layers but {solutions} solutions were given")]
    LayerCountMismatch { layers: usize, solutions: usize },
    #[error("layer {layer}: path references node {node} without a position ({node_count} nodes)")]
    MissingNode { layer: usize, node: usize, node_count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrintParams {
    /// LT, mm.
    pub layer_thickness: f64,
    /// EM.
    pub extrusion_multiplier: f64,
    /// d_n, mm.
    pub nozzle_diameter: f64,
    /// f_d, mm.
    pub filament_diameter: f64,
    /// Correction for non-cylindrical filament cross-sections.
    pub k: f64,
    /// mm/min.
    pub print_speed: f64,
    /// mm/min.
    pub travel_speed: f64,
    /// Paths with fewer edges than this are printed slower.
    pub short_path_max_segments: usize,
    pub short_path_speed_factor: f64,
    /// mm of filament pulled back before each travel; 0 disables retraction.
    pub retraction_length: f64,
    /// mm/min.
    pub retraction_speed: f64,
    /// Height of the first layer, mm.
    pub first_layer_z: f64,
    /// Lift during travels between paths, mm; 0 disables.
    pub z_hop: f64,
    pub nozzle_temp: Option<f64>,
    pub bed_temp: Option<f64>,
}

impl Default for PrintParams {
    fn default() -> Self {
        Self {
            layer_thickness: 0.148,
            extrusion_multiplier: 1.0,
            nozzle_diameter: 0.2,
            filament_diameter: 1.75,
            k: 1.0,
            print_speed: 600.0,
            travel_speed: 3000.0,
            short_path_max_segments: 4,
            short_path_speed_factor: 0.6,
            retraction_length: 0.5,
            retraction_speed: 1800.0,
            first_layer_z: 0.148,
            z_hop: 0.0,
            nozzle_temp: None,
            bed_temp: None,
        }
    }
}

fn param(name: &'static str, reason: impl Into<String>) -> GcodeError {
    GcodeError::Parameter { name, reason: reason.into() }
}

impl PrintParams {
    pub fn validate(&self) -> Result<(), GcodeError> {
        let positive = [
            ("layer_thickness", self.layer_thickness),
            ("nozzle_diameter", self.nozzle_diameter),
            ("filament_diameter", self.filament_diameter),
            ("k", self.k),
            ("print_speed", self.print_speed),
            ("travel_speed", self.travel_speed),
            ("retraction_speed", self.retraction_speed),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(param(name, format!("must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("extrusion_multiplier", self.extrusion_multiplier),
            ("retraction_length", self.retraction_length),
            ("z_hop", self.z_hop),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(param(name, format!("must be non-negative, got {v}")));
            }
        }
        if !self.first_layer_z.is_finite() {
            return Err(param("first_layer_z", "must be finite"));
        }
        let f = self.short_path_speed_factor;
        if !(f > 0.0 && f <= 1.0) {
            return Err(param("short_path_speed_factor", format!("must lie in (0, 1], got {f}")));
        }
        for (name, t) in [("nozzle_temp", self.nozzle_temp), ("bed_temp", self.bed_temp)] {
            if let Some(t) = t {
                if !(t.is_finite() && t >= 0.0) {
                    return Err(param(name, format!("must be a non-negative temperature, got {t}")));
                }
            }
        }
        Ok(())
    }

    /// Feed for extrusions on a path with `num_edges` struts.
    pub fn path_feed(&self, num_edges: usize) -> f64 {
        if num_edges < self.short_path_max_segments {
            self.print_speed * self.short_path_speed_factor
        } else {
            self.print_speed
        }
    }

    /// Machine height of layer `index`.
    pub fn layer_z(&self, index: usize) -> f64 {
        self.first_layer_z + index as f64 * self.layer_thickness
    }
}

/// Filament length to feed for a strut of `length` mm.
pub fn e_value(length: f64, params: &PrintParams) -> Result<f64, GcodeError> {
    if !(length >= 0.0 && length.is_finite()) {
        return Err(param("length", format!("must be a non-negative length, got {length}")));
    }
    let numerator = 4.0 * length * params.layer_thickness * params.extrusion_multiplier * params.nozzle_diameter;
    let denominator = PI * params.filament_diameter * params.filament_diameter;
    Ok(params.k * numerator / denominator)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Move {
    Travel { x: f64, y: f64, z: f64, feed: f64 },
    Extrude { x: f64, y: f64, z: f64, feed: f64, e_delta: f64 },
    Retract { e_delta: f64, feed: f64 },
    Prime { e_delta: f64, feed: f64 },
}

impl Move {
    pub fn kind(&self) -> &'static str {
        match self {
            Move::Travel { .. } => "travel",
            Move::Extrude { .. } => "extrude",
            Move::Retract { .. } => "retract",
            Move::Prime { .. } => "prime",
        }
    }

    pub fn e_delta(&self) -> f64 {
        match *self {
            Move::Travel { .. } => 0.0,
            Move::Extrude { e_delta, .. } | Move::Retract { e_delta, .. } | Move::Prime { e_delta, .. } => e_delta,
        }
    }
}

/// Plan one layer. Node `z` values are offsets added to the layer height `z`.
///
/// Each path, in solution order: optional retract, travel to its first node
/// (lifted by `z_hop` when set), optional prime, then one extrusion per strut.
pub fn plan_layer(
    solution: &Solution,
    node_pos: &[Point3],
    z: f64,
    params: &PrintParams,
) -> Result<Vec<Move>, GcodeError> {
    plan_layer_indexed(solution, node_pos, z, params, 0)
}

fn plan_layer_indexed(
    solution: &Solution,
    node_pos: &[Point3],
    z: f64,
    params: &PrintParams,
    layer: usize,
) -> Result<Vec<Move>, GcodeError> {
    let pos = |node: usize| -> Result<Point3, GcodeError> {
        node_pos.get(node).map(|p| Point3::new(p.x, p.y, z + p.z)).ok_or(GcodeError::MissingNode {
            layer,
            node,
            node_count: node_pos.len(),
        })
    };
    let mut moves = Vec::new();
    let mut current: Option<Point3> = None;
    for path in &solution.paths {
        let Some(&first) = path.nodes.first() else { continue };
        let start = pos(first)?;
        if params.retraction_length > 0.0 {
            moves.push(Move::Retract { e_delta: -params.retraction_length, feed: params.retraction_speed });
        }
        let travel = |p: Point3| Move::Travel { x: p.x, y: p.y, z: p.z, feed: params.travel_speed };
        match current {
            Some(here) if params.z_hop > 0.0 => {
                let lift = here.z.max(start.z) + params.z_hop;
                moves.push(travel(Point3::new(here.x, here.y, lift)));
                moves.push(travel(Point3::new(start.x, start.y, lift)));
                moves.push(travel(start));
            }
            _ => moves.push(travel(start)),
        }
        if params.retraction_length > 0.0 {
            moves.push(Move::Prime { e_delta: params.retraction_length, feed: params.retraction_speed });
        }
        let feed = params.path_feed(path.num_edges);
        let mut prev = start;
        for &node in &path.nodes[1..] {
            let p = pos(node)?;
            let e_delta = e_value(prev.distance(&p), params)?;
            moves.push(Move::Extrude { x: p.x, y: p.y, z: p.z, feed, e_delta });
            prev = p;
        }
        current = Some(prev);
    }
    Ok(moves)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlannedLayer {
    pub index: usize,
    /// Machine z of the layer plane.
    pub z: f64,
    pub moves: Vec<Move>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolpathProgram {
    pub layers: Vec<PlannedLayer>,
}

impl ToolpathProgram {
    pub fn moves(&self) -> impl Iterator<Item = &Move> {
        self.layers.iter().flat_map(|l| l.moves.iter())
    }

    pub fn total_e(&self) -> f64 {
        self.moves().map(Move::e_delta).sum()
    }
}

/// Plan every layer of `design` with its solution. Node positions are moved to
/// machine coordinates: layer `k` sits at `first_layer_z + k · LT`, and a vertex
/// keeps its height offset relative to its layer's nominal z.
pub fn plan_program(
    design: &Design,
    solutions: &[Solution],
    params: &PrintParams,
) -> Result<ToolpathProgram, GcodeError> {
    params.validate()?;
    if design.layers.len() != solutions.len() {
        return Err(GcodeError::LayerCountMismatch { layers: design.layers.len(), solutions: solutions.len() });
    }
    let layers = design
        .layers
        .iter()
        .zip(solutions)
        .enumerate()
        .map(|(index, (layer, solution))| {
            let offsets: Vec<Point3> = layer.points.iter().map(|p| Point3::new(p.x, p.y, p.z - layer.z)).collect();
            let z = params.layer_z(index);
            let moves = plan_layer_indexed(solution, &offsets, z, params, index)?;
            Ok(PlannedLayer { index, z, moves })
        })
        .collect::<Result<Vec<_>, GcodeError>>()?;
    Ok(ToolpathProgram { layers })
}

/// Fixed-point formatting without a `-0.000` artefact.
pub(crate) fn fixed(x: f64, decimals: usize) -> String {
    let s = format!("{:.*}", decimals, x);
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn coord(x: f64) -> String {
    fixed(x, 5)
}

fn extrusion(e: f64) -> String {
    fixed(e, 6)
}

fn feed(f: f64) -> String {
    fixed(f, 2)
}

/// Render a planned program as Marlin G-code.
pub fn marlin_text(program: &ToolpathProgram, params: &PrintParams) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "; strutpath continuous lattice toolpath");
    let _ = writeln!(w, "; layers: {}", program.layers.len());
    let _ = writeln!(w, "G21 ; millimetres");
    let _ = writeln!(w, "G90 ; absolute positioning");
    let _ = writeln!(w, "M83 ; relative extrusion");
    if let Some(t) = params.bed_temp {
        let _ = writeln!(w, "M140 S{}", fixed(t, 0));
    }
    if let Some(t) = params.nozzle_temp {
        let _ = writeln!(w, "M104 S{}", fixed(t, 0));
    }
    if let Some(t) = params.bed_temp {
        let _ = writeln!(w, "M190 S{}", fixed(t, 0));
    }
    if let Some(t) = params.nozzle_temp {
        let _ = writeln!(w, "M109 S{}", fixed(t, 0));
    }
    let _ = writeln!(w, "G28 ; home");

    for layer in &program.layers {
        let mut z_now = coord(layer.z);
        let _ = writeln!(w, ";LAYER:{}", layer.index);
        let _ = writeln!(w, "G0 Z{} F{}", z_now, feed(params.travel_speed));
        for m in &layer.moves {
            match *m {
                Move::Travel { x, y, z, feed: f } => {
                    let zs = coord(z);
                    if zs != z_now {
                        let _ = writeln!(w, "G0 X{} Y{} Z{} F{}", coord(x), coord(y), zs, feed(f));
                        z_now = zs;
                    } else {
                        let _ = writeln!(w, "G0 X{} Y{} F{}", coord(x), coord(y), feed(f));
                    }
                }
                Move::Extrude { x, y, z, feed: f, e_delta } => {
                    let zs = coord(z);
                    if zs != z_now {
                        let _ =
                            writeln!(w, "G1 X{} Y{} Z{} E{} F{}", coord(x), coord(y), zs, extrusion(e_delta), feed(f));
                        z_now = zs;
                    } else {
                        let _ = writeln!(w, "G1 X{} Y{} E{} F{}", coord(x), coord(y), extrusion(e_delta), feed(f));
                    }
                }
                Move::Retract { e_delta, feed: f } | Move::Prime { e_delta, feed: f } => {
                    let _ = writeln!(w, "G1 E{} F{}", extrusion(e_delta), feed(f));
                }
            }
        }
    }

    let _ = writeln!(w, ";END");
    if params.nozzle_temp.is_some() {
        let _ = writeln!(w, "M104 S0");
    }
    if params.bed_temp.is_some() {
        let _ = writeln!(w, "M140 S0");
    }
    let _ = writeln!(w, "M84 ; motors off");
    out
}

/// Marlin G-code for a whole design.
pub fn emit_marlin(design: &Design, solutions: &[Solution], params: &PrintParams) -> Result<String, GcodeError> {
    let program = plan_program(design, solutions, params)?;
    Ok(marlin_text(&program, params))
}

/// Column names of the toolpath CSV.
pub const CSV_HEADER: [&str; 7] = ["layer", "move_type", "x", "y", "z", "feed", "e_delta"];

/// Render a planned program as CSV, one record per move plus one travel record
/// per layer for the move up to the layer plane (the `G0 Z` line of the Marlin
/// backend). Positions start at the homed origin; retract and prime rows carry the
/// current position.
pub fn toolpath_csv_text(program: &ToolpathProgram, params: &PrintParams) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(CSV_HEADER).expect("in-memory write");
    let mut here = (0.0, 0.0, 0.0);
    let mut record = |layer: usize, kind: &str, p: (f64, f64, f64), f: f64, e: f64| {
        wtr.write_record([
            layer.to_string(),
            kind.to_string(),
            coord(p.0),
            coord(p.1),
            coord(p.2),
            feed(f),
            extrusion(e),
        ])
        .expect("in-memory write");
    };
    for layer in &program.layers {
        here.2 = layer.z;
        record(layer.index, "travel", here, params.travel_speed, 0.0);
        for m in &layer.moves {
            match *m {
                Move::Travel { x, y, z, feed } => {
                    here = (x, y, z);
                    record(layer.index, m.kind(), here, feed, 0.0);
                }
                Move::Extrude { x, y, z, feed, e_delta } => {
                    here = (x, y, z);
                    record(layer.index, m.kind(), here, feed, e_delta);
                }
                Move::Retract { e_delta, feed } | Move::Prime { e_delta, feed } => {
                    record(layer.index, m.kind(), here, feed, e_delta);
                }
            }
        }
    }
    String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn emit_toolpath_csv(design: &Design, solutions: &[Solution], params: &PrintParams) -> Result<String, GcodeError> {
    let program = plan_program(design, solutions, params)?;
    Ok(toolpath_csv_text(&program, params))
}
