//! Continuous toolpath planning for thin-walled architected lattices.
//!
//! The pipeline mirrors how a single-filament lattice goes from design to printer:
//!
//! 1. [`lattice`] generates, imports, clips, rotates, stacks and projects planar
//!    layers made of straight struts.
//! 2. [`graph`] turns a welded layer into an undirected weighted graph whose edge
//!    weights are strut lengths.
//! 3. [`optimizer`] decomposes the edge set into continuous non-branching paths with
//!    a randomized greedy grower, restarted many times and scored.
//! 4. [`gcode`] plans the moves and writes Marlin G-code or a generic toolpath CSV.
//! 5. [`analyzer`] parses arbitrary G-code back into extruding polylines and scores
//!    them against the nominal design.
//! 6. [`stats`] summarises local-thickness histograms of printed samples.
//!
//! [`report`] renders deterministic SVG figures and [`format`] holds the
//! byte-stable JSON writer shared by every file format.

pub mod analyzer;
pub mod format;
pub mod gcode;
pub mod graph;
pub mod lattice;
pub mod optimizer;
pub mod report;
pub mod stats;

pub use analyzer::{
    compare_to_nominal, extract_trajectories, parse_gcode, AnalyzerError, CorrectionMode, GMove, NominalDesign,
    Trajectory, TrajectoryReport,
};
pub use gcode::{e_value, emit_marlin, emit_toolpath_csv, plan_layer, GcodeError, Move, PrintParams};
pub use graph::{build_graph, EdgeId, GraphError, LatticeGraph, NodeId};
pub use lattice::{Contour, Design, LatticeError, Layer, Point3, Segment};
pub use optimizer::{build_solution, optimize, GrowthMode, OptimizerConfig, OptimizerError, Path, RunReport, Solution};
pub use stats::{StatsError, StdFormula, ThicknessHistogram};
