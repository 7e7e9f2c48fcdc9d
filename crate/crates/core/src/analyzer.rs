//! Reconstruct printed trajectories from G-code and score them against a nominal
//! lattice.
//!
//! [`parse_gcode`] turns text into [`GMove`]s while tracking positioning and
//! extrusion modes. [`extract_trajectories`] interprets them and chains
//! consecutive extruding moves into polylines. [`compare_to_nominal`] scores those
//! polylines as if they were optimizer paths and penalises programs that print
//! more struts than the design has.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::LatticeGraph;
use crate::lattice::{Design, Point3};
use crate::optimizer::path_score;

/// Minimum displacement for a move to count as motion, in mm. Also the tolerance
/// for chaining consecutive extrusions.
pub const MOTION_EPS: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum AnalyzerError {
    #[error("line {line}: malformed value {text:?} for word {letter}")]
    Parse { line: usize, letter: char, text: String },
    #[error("line {line}: {reason}")]
    State { line: usize, reason: String },
    #[error("trajectory has no extruding moves to score")]
    EmptyTrajectory,
    #[error("nominal design has no struts")]
    EmptyNominal,
    #[error("toolpath CSV: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// G0
    Rapid,
    /// G1
    Linear,
    /// G2 or G3
    Arc,
    /// G28
    Home,
    /// G92
    SetPosition,
    /// Anything else, including mode switches, kept by its code (`"M83"`).
    Other(String),
}

/// One parsed command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GMove {
    pub line: usize,
    pub command: Command,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub z: Option<f64>,
    pub e: Option<f64>,
    pub f: Option<f64>,
    /// Positioning mode in effect for this move (G90).
    pub absolute_xyz: bool,
    /// Extrusion mode in effect for this move (M82).
    pub absolute_e: bool,
}

/// Machine modes as Marlin initialises them: absolute positioning and extrusion.
#[derive(Debug, Clone, Copy)]
struct Modes {
    absolute_xyz: bool,
    absolute_e: bool,
}

impl Default for Modes {
    fn default() -> Self {
        Modes { absolute_xyz: true, absolute_e: true }
    }
}

fn strip_comments(line: &str) -> String {
    let line = line.split(';').next().unwrap_or("");
    let line = line.split('*').next().unwrap_or("");
    let mut out = String::with_capacity(line.len());
    let mut depth = 0usize;
    for c in line.chars() {
        match c {
            '(' => depth += 1,
            ')' if depth > 0 => depth -= 1,
            _ if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out
}

/// Length of the numeric prefix of `s`: sign, digits, one dot, optional exponent.
/// An `e`/`E` counts as an exponent only when a digit (after an optional sign)
/// follows, so write a space before an `E` word that follows a number.
fn numeric_prefix(s: &[u8]) -> usize {
    let mut i = 0;
    if matches!(s.first(), Some(b'+' | b'-')) {
        i += 1;
    }
    let mut digits = false;
    while i < s.len() && (s[i].is_ascii_digit() || s[i] == b'.') {
        digits |= s[i].is_ascii_digit();
        i += 1;
    }
    if digits && matches!(s.get(i), Some(b'e' | b'E')) {
        let mut j = i + 1;
        if matches!(s.get(j), Some(b'+' | b'-')) {
            j += 1;
        }
        if s.get(j).is_some_and(u8::is_ascii_digit) {
            while s.get(j).is_some_and(u8::is_ascii_digit) {
                j += 1;
            }
            i = j;
        }
    }
    i
}

/// Letters whose values must be numeric; anything else is skipped silently.
fn is_strict_letter(c: char) -> bool {
    matches!(c, 'G' | 'M' | 'X' | 'Y' | 'Z' | 'E' | 'F')
}

fn parse_line(raw: &str, line: usize, modes: &mut Modes) -> Result<Option<GMove>, AnalyzerError> {
    let text = strip_comments(raw);
    let bytes = text.as_bytes();
    let mut words: Vec<(char, f64)> = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let letter = c.to_ascii_uppercase();
        i += 1;
        while i < bytes.len() && bytes[i] == b' ' {
            i += 1;
        }
        let len = numeric_prefix(&bytes[i..]);
        let token = std::str::from_utf8(&bytes[i..i + len]).unwrap_or("");
        let value = token.parse::<f64>().ok().filter(|v| v.is_finite());
        let end = i + len;
        let glued = bytes.get(end).is_some_and(|b| !b.is_ascii_whitespace() && !b.is_ascii_alphabetic());
        match value {
            Some(v) if !glued && letter.is_ascii_alphabetic() => words.push((letter, v)),
            _ if is_strict_letter(letter) => {
                let stop = bytes[i..].iter().position(u8::is_ascii_whitespace).map_or(bytes.len(), |p| i + p);
                return Err(AnalyzerError::Parse {
                    line,
                    letter,
                    text: String::from_utf8_lossy(&bytes[i..stop]).into_owned(),
                });
            }
            _ => {
                // unknown word: skip to the next whitespace
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
                    i += 1;
                }
                continue;
            }
        }
        i = end;
        if matches!(words.last(), Some(&('M', v)) if v == 117.0 || v == 118.0) {
            // display/serial messages carry free text
            break;
        }
    }

    let Some(pos) = words.iter().position(|&(l, _)| l == 'G' || l == 'M') else {
        return Ok(None);
    };
    let (letter, code) = words[pos];
    let code_name = if code.fract() == 0.0 { format!("{letter}{}", code as i64) } else { format!("{letter}{code}") };
    let command = match code_name.as_str() {
        "G0" => Command::Rapid,
        "G1" => Command::Linear,
        "G2" | "G3" => Command::Arc,
        "G28" => Command::Home,
        "G92" => Command::SetPosition,
        "G90" => {
            *modes = Modes { absolute_xyz: true, absolute_e: true };
            Command::Other(code_name)
        }
        "G91" => {
            *modes = Modes { absolute_xyz: false, absolute_e: false };
            Command::Other(code_name)
        }
        "M82" => {
            modes.absolute_e = true;
            Command::Other(code_name)
        }
        "M83" => {
            modes.absolute_e = false;
            Command::Other(code_name)
        }
        _ => Command::Other(code_name),
    };
    let word = |l: char| words.iter().rev().find(|w| w.0 == l).map(|w| w.1);
    Ok(Some(GMove {
        line,
        command,
        x: word('X'),
        y: word('Y'),
        z: word('Z'),
        e: word('E'),
        f: word('F'),
        absolute_xyz: modes.absolute_xyz,
        absolute_e: modes.absolute_e,
    }))
}

/// Parse G-code text. Comments (`;…`, `(…)`), line numbers and checksums are
/// dropped, lines without a G or M word produce no move, and unknown commands are
/// kept as [`Command::Other`]. A malformed number on a G, M, X, Y, Z, E or F word
/// is an error carrying its 1-based line number.
pub fn parse_gcode(text: &str) -> Result<Vec<GMove>, AnalyzerError> {
    let mut modes = Modes::default();
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if let Some(m) = parse_line(line, k + 1, &mut modes)? {
            out.push(m);
        }
    }
    Ok(out)
}

/// Lenient parse of arbitrary bytes: lines that are not UTF-8 or do not parse are
/// skipped and reported as warnings.
pub fn parse_gcode_bytes(bytes: &[u8]) -> (Vec<GMove>, Vec<String>) {
    let mut modes = Modes::default();
    let mut out = Vec::new();
    let mut warnings = Vec::new();
    for (k, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let line = k + 1;
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        match std::str::from_utf8(raw) {
            Err(_) => warnings.push(format!("line {line}: not valid UTF-8, skipped")),
            Ok(s) => match parse_line(s, line, &mut modes) {
                Ok(Some(m)) => out.push(m),
                Ok(None) => {}
                Err(e) => warnings.push(format!("{e}, skipped")),
            },
        }
    }
    (out, warnings)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    /// Chained extruding runs, each with at least two points.
    pub polylines: Vec<Vec<Point3>>,
    pub total_extruding_length_mm: f64,
    pub total_travel_length_mm: f64,
    /// Number of extruding linear moves.
    pub edge_count: usize,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn polyline_length(polyline: &[Point3]) -> f64 {
        polyline.windows(2).map(|w| w[0].distance(&w[1])).sum()
    }
}

#[derive(Default)]
struct Interpreter {
    pos: [f64; 3],
    known: bool,
    e_abs: f64,
    /// Filament retracted and not yet primed back.
    debt: f64,
    chain: Vec<Point3>,
    traj: Trajectory,
    arcs: usize,
}

impl Interpreter {
    fn traj(&mut self) -> &mut Trajectory {
        &mut self.traj
    }

    fn break_chain(&mut self) {
        let chain = std::mem::take(&mut self.chain);
        if chain.len() >= 2 {
            self.traj().polylines.push(chain);
        }
    }

    fn target(&self, m: &GMove) -> [f64; 3] {
        let mut p = self.pos;
        for (axis, v) in [m.x, m.y, m.z].into_iter().enumerate() {
            if let Some(v) = v {
                p[axis] = if m.absolute_xyz { v } else { p[axis] + v };
            }
        }
        p
    }

    /// Net filament advance of a move after paying back pending retraction.
    fn extrusion(&mut self, m: &GMove) -> f64 {
        let Some(e) = m.e else { return 0.0 };
        let delta = if m.absolute_e {
            let d = e - self.e_abs;
            self.e_abs = e;
            d
        } else {
            e
        };
        if delta < 0.0 {
            self.debt -= delta;
            0.0
        } else {
            let paid = delta.min(self.debt);
            self.debt -= paid;
            delta - paid
        }
    }

    fn step(&mut self, m: &GMove) -> Result<(), AnalyzerError> {
        match &m.command {
            Command::Rapid | Command::Linear => {
                let target = self.target(m);
                let net = self.extrusion(m);
                let from = Point3::from(self.pos);
                let to = Point3::from(target);
                let d = from.distance(&to);
                let extruding = m.command == Command::Linear && net > 0.0;
                let positioned = m.x.is_some() || m.y.is_some() || m.z.is_some();
                if m.command == Command::Rapid && positioned {
                    // an explicit travel ends the run even when it goes nowhere
                    self.break_chain();
                }
                if extruding && !self.known {
                    return Err(AnalyzerError::State {
                        line: m.line,
                        reason: "extrusion before any position was established".into(),
                    });
                }
                if d > MOTION_EPS {
                    if extruding {
                        let continues = self.chain.last().is_some_and(|last| last.distance(&from) <= MOTION_EPS);
                        if !continues {
                            self.break_chain();
                            self.chain.push(from);
                        }
                        self.chain.push(to);
                        let t = self.traj();
                        t.edge_count += 1;
                        t.total_extruding_length_mm += d;
                    } else {
                        self.break_chain();
                        self.traj().total_travel_length_mm += d;
                    }
                }
                self.pos = target;
                self.known |= positioned;
            }
            Command::Home => {
                self.break_chain();
                let all = m.x.is_none() && m.y.is_none() && m.z.is_none();
                for (axis, v) in [m.x, m.y, m.z].into_iter().enumerate() {
                    if all || v.is_some() {
                        self.pos[axis] = 0.0;
                    }
                }
                self.known = true;
            }
            Command::SetPosition => {
                self.break_chain();
                for (axis, v) in [m.x, m.y, m.z].into_iter().enumerate() {
                    if let Some(v) = v {
                        self.pos[axis] = v;
                        self.known = true;
                    }
                }
                if let Some(e) = m.e {
                    self.e_abs = e;
                    self.debt = 0.0;
                }
            }
            Command::Arc => {
                self.break_chain();
                self.arcs += 1;
                self.pos = self.target(m);
                if m.x.is_some() || m.y.is_some() || m.z.is_some() {
                    self.known = true;
                }
            }
            Command::Other(_) => {}
        }
        Ok(())
    }
}

/// Interpret parsed moves and collect extruding polylines.
///
/// A G1 extrudes when it moves more than [`MOTION_EPS`] and advances the filament
/// by a positive net amount once earlier retractions are paid back. Consecutive
/// extruding moves that share an endpoint form one polyline; any other move with
/// displacement ends it, and so does a G0 with coordinates even if it stays in
/// place. Other moves without displacement never break a chain.
pub fn extract_trajectories(moves: &[GMove]) -> Result<Trajectory, AnalyzerError> {
    let mut it = Interpreter::default();
    for m in moves {
        it.step(m)?;
    }
    it.break_chain();
    if it.arcs > 0 {
        it.traj.warnings.push(format!("{} arc moves (G2/G3) ignored", it.arcs));
    }
    Ok(it.traj)
}

/// Rebuild a trajectory from the generic toolpath CSV.
pub fn trajectory_from_toolpath_csv(text: &str) -> Result<Trajectory, AnalyzerError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| AnalyzerError::Csv(e.to_string()))?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| AnalyzerError::Csv(format!("missing column `{name}`")))
    };
    let (kind, x, y, z, e) = (col("move_type")?, col("x")?, col("y")?, col("z")?, col("e_delta")?);
    let mut moves = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| AnalyzerError::Csv(e.to_string()))?;
        let num = |i: usize| -> Result<Option<f64>, AnalyzerError> {
            let s = record.get(i).unwrap_or("").trim();
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Some)
                .ok_or_else(|| AnalyzerError::Csv(format!("line {line}: malformed number {s:?}")))
        };
        let (command, xyz) = match record.get(kind).unwrap_or("") {
            "travel" => (Command::Rapid, true),
            "extrude" => (Command::Linear, true),
            "retract" | "prime" => (Command::Linear, false),
            other => return Err(AnalyzerError::Csv(format!("line {line}: unknown move type {other:?}"))),
        };
        let (mx, my, mz) = if xyz { (num(x)?, num(y)?, num(z)?) } else { (None, None, None) };
        moves.push(GMove {
            line,
            command,
            x: mx,
            y: my,
            z: mz,
            e: num(e)?,
            f: None,
            absolute_xyz: true,
            absolute_e: false,
        });
    }
    extract_trajectories(&moves)
}

/// The reference a trajectory is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NominalDesign {
    pub edge_count: usize,
    pub total_length_mm: f64,
}

impl NominalDesign {
    pub fn from_graph(graph: &LatticeGraph) -> Self {
        NominalDesign { edge_count: graph.edge_count(), total_length_mm: graph.total_weight() }
    }

    pub fn from_design(design: &Design) -> Self {
        NominalDesign {
            edge_count: design.layers.iter().map(|l| l.segments.len()).sum(),
            total_length_mm: design.layers.iter().map(|l| l.total_length()).sum(),
        }
    }
}

impl From<&LatticeGraph> for NominalDesign {
    fn from(graph: &LatticeGraph) -> Self {
        Self::from_graph(graph)
    }
}

/// Which way the edge-count correction is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionMode {
    /// `raw · nominal_edges / real_edges`: extra printed struts lower the score.
    #[default]
    Intent,
    /// `raw · real_edges / nominal_edges`, the ratio as literally written.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub polyline_count: usize,
    pub total_extruding_length_mm: f64,
    pub total_travel_length_mm: f64,
    /// Extruding moves actually printed.
    pub real_edge_count: usize,
    pub nominal_edge_count: usize,
    pub nominal_total_length_mm: f64,
    pub raw_score: f64,
    pub corrected_score: f64,
    pub correction: CorrectionMode,
    /// Printed over nominal length.
    pub length_ratio: f64,
    /// Share of printed length in polylines of at least `long_min_nodes` points.
    pub lts_percent: f64,
    pub warnings: Vec<String>,
}

/// Score a trajectory's polylines as paths and correct for the strut count.
pub fn compare_to_nominal(
    trajectory: &Trajectory,
    nominal: &NominalDesign,
    long_min_nodes: usize,
    correction: CorrectionMode,
) -> Result<TrajectoryReport, AnalyzerError> {
    if trajectory.polylines.is_empty() || trajectory.edge_count == 0 {
        return Err(AnalyzerError::EmptyTrajectory);
    }
    if nominal.edge_count == 0 || nominal.total_length_mm.is_nan() || nominal.total_length_mm <= 0.0 {
        return Err(AnalyzerError::EmptyNominal);
    }
    let lengths: Vec<(f64, usize)> =
        trajectory.polylines.iter().map(|p| (Trajectory::polyline_length(p), p.len() - 1)).collect();
    let raw_score = path_score(lengths.iter().copied()).map_err(|_| AnalyzerError::EmptyTrajectory)?;
    let (real, nominal_edges) = (trajectory.edge_count as f64, nominal.edge_count as f64);
    let corrected_score = match correction {
        CorrectionMode::Intent => raw_score * nominal_edges / real,
        CorrectionMode::Literal => raw_score * real / nominal_edges,
    };
    let printed: f64 = lengths.iter().map(|l| l.0).sum();
    let long: f64 =
        trajectory.polylines.iter().zip(&lengths).filter(|(p, _)| p.len() >= long_min_nodes).map(|(_, l)| l.0).sum();
    Ok(TrajectoryReport {
        polyline_count: trajectory.polylines.len(),
        total_extruding_length_mm: trajectory.total_extruding_length_mm,
        total_travel_length_mm: trajectory.total_travel_length_mm,
        real_edge_count: trajectory.edge_count,
        nominal_edge_count: nominal.edge_count,
        nominal_total_length_mm: nominal.total_length_mm,
        raw_score,
        corrected_score,
        correction,
        length_ratio: trajectory.total_extruding_length_mm / nominal.total_length_mm,
        lts_percent: if printed > 0.0 { 100.0 * long / printed } else { 0.0 },
        warnings: trajectory.warnings.clone(),
    })
}
