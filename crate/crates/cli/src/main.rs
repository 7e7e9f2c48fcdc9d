//! `strutpath`: generate lattices, optimize continuous toolpaths, emit G-code,
//! analyze existing G-code and summarise thickness histograms.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "strutpath", version, about = "Continuous toolpath planning for thin-walled lattices")]
pub struct Cli {
    /// Run configuration JSON; flags override its fields.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate or import a lattice layer, optionally stacked and projected.
    Gen(GenArgs),
    /// Decompose every layer into continuous paths.
    Optimize(OptimizeArgs),
    /// Write Marlin G-code or a toolpath CSV for optimized layers.
    Emit(EmitArgs),
    /// Reconstruct trajectories from G-code and score them against a design.
    Analyze(AnalyzeArgs),
    /// Thickness statistics from histogram CSV files.
    Stats(StatsArgs),
    /// Render SVG figures for an optimization run.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Geometry {
    Honeycomb,
    SnubSquare,
    Arrowhead,
    ReentrantHoneycomb,
    Rectilinear,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub geometry: Option<Geometry>,
    /// Honeycomb hexagon circumradius, mm.
    #[arg(long)]
    pub hex_radius: Option<f64>,
    /// Snub-square strut length, mm.
    #[arg(long)]
    pub cell_size: Option<f64>,
    /// Arrowhead / re-entrant cell width, mm.
    #[arg(long)]
    pub cell_h: Option<f64>,
    /// Arrowhead / re-entrant cell height, mm.
    #[arg(long)]
    pub cell_v: Option<f64>,
    /// Re-entrant strut angle, degrees.
    #[arg(long)]
    pub reentrant_angle: Option<f64>,
    /// Rectilinear line spacing, mm.
    #[arg(long)]
    pub strand_distance: Option<f64>,
    /// Rectilinear line direction, degrees.
    #[arg(long)]
    pub angle: Option<f64>,
    /// Segment-list JSON to import instead of generating.
    #[arg(long, value_name = "FILE", conflicts_with = "geometry")]
    pub import: Option<PathBuf>,
    /// Rectangular contour `WIDTHxHEIGHT` with its corner at the origin.
    #[arg(long, value_name = "WxH", conflicts_with = "circle")]
    pub bbox: Option<String>,
    /// Circular contour of this radius centred at the origin.
    #[arg(long, value_name = "RADIUS")]
    pub circle: Option<f64>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub layer_thickness: Option<f64>,
    /// Rotation between consecutive layers, degrees.
    #[arg(long)]
    pub rotation: Option<f64>,
    /// Project onto a sphere of this radius whose top touches z = 0 above the
    /// contour centre.
    #[arg(long)]
    pub sphere_radius: Option<f64>,
    #[arg(long)]
    pub weld_tol: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Max,
    Min,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Layer or design JSON.
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Master seed; falls back to GIPPO_SEED, then the config, then 0.
    #[arg(long, env = "GIPPO_SEED")]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Minimum node count of a long path for LTS and OE.
    #[arg(long)]
    pub long_min_nodes: Option<usize>,
    #[arg(long)]
    pub weld_tol: Option<f64>,
    /// Run report JSON; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Score of every iteration as CSV.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EmitFormat {
    Marlin,
    Csv,
}

#[derive(Debug, Args)]
pub struct EmitArgs {
    /// Layer or design JSON that was optimized.
    pub design: PathBuf,
    /// Output of `optimize`.
    pub solution: PathBuf,
    #[arg(long, value_enum, default_value = "marlin")]
    pub format: EmitFormat,
    /// Print parameters JSON; overrides the config's `print` section.
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub layer_thickness: Option<f64>,
    #[arg(long)]
    pub extrusion_multiplier: Option<f64>,
    #[arg(long)]
    pub nozzle_diameter: Option<f64>,
    #[arg(long)]
    pub filament_diameter: Option<f64>,
    /// Extrusion correction factor.
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub print_speed: Option<f64>,
    #[arg(long)]
    pub travel_speed: Option<f64>,
    /// Retraction length, mm; 0 disables retraction.
    #[arg(long)]
    pub retraction: Option<f64>,
    #[arg(long)]
    pub first_layer_z: Option<f64>,
    #[arg(long)]
    pub z_hop: Option<f64>,
    #[arg(long)]
    pub nozzle_temp: Option<f64>,
    #[arg(long)]
    pub bed_temp: Option<f64>,
    #[arg(long)]
    pub weld_tol: Option<f64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// G-code file, or a toolpath CSV written by `emit --format csv`.
    pub gcode: PathBuf,
    /// Nominal layer or design JSON.
    #[arg(long)]
    pub nominal: PathBuf,
    /// Multiply by real/nominal edges instead of nominal/real.
    #[arg(long)]
    pub literal_correction: bool,
    /// Skip unreadable lines with a warning instead of failing.
    #[arg(long)]
    pub lenient: bool,
    #[arg(long)]
    pub long_min_nodes: Option<usize>,
    #[arg(long)]
    pub weld_tol: Option<f64>,
    /// SVG overlay of the reconstructed polylines on the nominal struts.
    #[arg(long, value_name = "FILE")]
    pub svg: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Formula {
    Standard,
    Literal,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// `thickness_um,frequency` CSV files, one per replicate.
    #[arg(required = true)]
    pub histograms: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "standard")]
    pub formula: Formula,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Layer or design JSON that was optimized.
    pub design: PathBuf,
    /// Output of `optimize`.
    pub solution: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// G-code to overlay on the first layer.
    #[arg(long, value_name = "FILE")]
    pub gcode: Option<PathBuf>,
    #[arg(long)]
    pub weld_tol: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.kind.exit_code())
        }
    }
}
