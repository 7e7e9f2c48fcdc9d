use std::fmt::Write as _;
use std::path::Path;

use anyhow::anyhow;
use serde::{Deserialize, Serialize};
use strutpath::analyzer::{
    compare_to_nominal, extract_trajectories, parse_gcode, parse_gcode_bytes, trajectory_from_toolpath_csv,
    CorrectionMode, NominalDesign, Trajectory,
};
use strutpath::format::to_stable_json;
use strutpath::gcode::{emit_marlin, emit_toolpath_csv, PrintParams};
use strutpath::graph::{build_graph, LatticeGraph};
use strutpath::lattice::{
    clip_layer, design_to_json, import_segments, layer_to_json, project_layer, read_document, stack_layers, Contour,
    Design, SphericalCap, Tiling,
};
use strutpath::optimizer::{optimize_with_threads, GrowthMode, RunReport, Solution};
use strutpath::report::{overlay_svg, paths_svg, scores_svg};
use strutpath::stats::{histogram_from_csv, summarize, StdFormula};

use crate::config::RunConfig;
use crate::error::{input, internal, usage, CliResult, Context};
use crate::{AnalyzeArgs, Cli, Command, EmitArgs, EmitFormat, Formula, GenArgs, Geometry, Mode, OptimizeArgs};
use crate::{ReportArgs, StatsArgs};

/// Output of `optimize`: one run report per layer, bottom to top.
#[derive(Debug, Serialize, Deserialize)]
pub struct OptimizeOutput {
    pub master_seed: u64,
    pub layers: Vec<RunReport>,
}

/// Seed of layer `k`, so stacked copies of one layer get independent streams.
pub fn layer_seed(master: u64, k: usize) -> u64 {
    master ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn run(cli: Cli) -> CliResult<()> {
    let config = RunConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Gen(a) => gen(a, config),
        Command::Optimize(a) => optimize(a, config),
        Command::Emit(a) => emit(a, config),
        Command::Analyze(a) => analyze(a, config),
        Command::Stats(a) => stats(a),
        Command::Report(a) => report(a, config),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).context(format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).context(format!("reading {}", path.display()))
}

fn read_design(path: &Path, weld_tol: f64) -> CliResult<Design> {
    let text = read_text(path)?;
    let doc = read_document(&text, weld_tol).context(format!("in {}", path.display()))?;
    Ok(doc.into_design())
}

fn read_solutions(path: &Path) -> CliResult<OptimizeOutput> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(input).context(format!("parsing solution {}", path.display()))
}

fn build_graphs(design: &Design) -> CliResult<Vec<LatticeGraph>> {
    design.layers.iter().enumerate().map(|(k, l)| build_graph(l).context(format!("layer {k}"))).collect()
}

fn parse_bbox(text: &str) -> CliResult<Contour> {
    let parsed = text
        .split_once(['x', 'X'])
        .and_then(|(w, h)| Some((w.trim().parse::<f64>().ok()?, h.trim().parse::<f64>().ok()?)));
    match parsed {
        Some((w, h)) => Ok(Contour::rectangle(w, h)),
        None => Err(usage(anyhow!("invalid --bbox {text:?}, expected WIDTHxHEIGHT such as 10x10"))),
    }
}

fn need(value: Option<f64>, flag: &str, geometry: &str) -> CliResult<f64> {
    value.ok_or_else(|| usage(anyhow!("--{flag} is required for {geometry}")))
}

fn tiling_from_args(a: &GenArgs) -> CliResult<Option<Tiling>> {
    let Some(g) = a.geometry else { return Ok(None) };
    let tiling = match g {
        Geometry::Honeycomb => Tiling::Honeycomb { hex_radius: need(a.hex_radius, "hex-radius", "honeycomb")? },
        Geometry::SnubSquare => Tiling::SnubSquare { cell_size: need(a.cell_size, "cell-size", "snub-square")? },
        Geometry::Arrowhead => {
            Tiling::Arrowhead { h: need(a.cell_h, "cell-h", "arrowhead")?, v: need(a.cell_v, "cell-v", "arrowhead")? }
        }
        Geometry::ReentrantHoneycomb => Tiling::ReentrantHoneycomb {
            h: need(a.cell_h, "cell-h", "reentrant-honeycomb")?,
            v: need(a.cell_v, "cell-v", "reentrant-honeycomb")?,
            reentrant_angle: need(a.reentrant_angle, "reentrant-angle", "reentrant-honeycomb")?,
        },
        Geometry::Rectilinear => Tiling::Rectilinear {
            strand_distance: need(a.strand_distance, "strand-distance", "rectilinear")?,
            angle_deg: a.angle.unwrap_or(0.0),
        },
    };
    Ok(Some(tiling))
}

fn gen(a: GenArgs, config: RunConfig) -> CliResult<()> {
    let weld_tol = a.weld_tol.unwrap_or(config.weld_tol);
    let contour = match (&a.bbox, a.circle) {
        (Some(b), _) => Some(parse_bbox(b)?),
        (None, Some(r)) => Some(Contour::circle(r, 0.0, 0.0)),
        (None, None) => config.contour,
    };
    if let Some(c) = &contour {
        c.validate()?;
    }
    let tiling = tiling_from_args(&a)?;
    let import = a.import.clone().or(if tiling.is_none() { config.import.clone() } else { None });
    let base = match (tiling.or(config.geometry), import) {
        (_, Some(path)) => {
            let layer = import_segments(&path, weld_tol).context(format!("importing {}", path.display()))?;
            match &contour {
                Some(c) => clip_layer(&layer, c),
                None => layer,
            }
        }
        (Some(tiling), None) => {
            let contour = contour.ok_or_else(|| usage(anyhow!("a contour is required: pass --bbox or --circle")))?;
            tiling.generate(&contour)?
        }
        (None, None) => return Err(usage(anyhow!("nothing to generate: pass --geometry or --import"))),
    };

    let layers = a.layers.unwrap_or(config.layers);
    let thickness = a.layer_thickness.unwrap_or(config.layer_thickness);
    let rotation = a.rotation.unwrap_or(config.rotation_deg_per_layer);
    let mut design = stack_layers(&base, layers, thickness, rotation)?;
    let cap = match a.sphere_radius {
        Some(r) => {
            let (cx, cy) = match (&contour, base.bounds()) {
                (Some(c), _) => c.center(),
                (None, Some((x0, y0, x1, y1))) => ((x0 + x1) / 2.0, (y0 + y1) / 2.0),
                (None, None) => (0.0, 0.0),
            };
            Some(SphericalCap { center: [cx, cy, -r], radius: r })
        }
        None => config.projection,
    };
    if let Some(cap) = cap {
        if !(cap.radius.is_finite() && cap.radius > 0.0) {
            return Err(usage(anyhow!("invalid parameter `sphere_radius`: must be positive")));
        }
        for layer in &mut design.layers {
            *layer = project_layer(layer, &cap)?;
        }
    }

    let text = if design.layers.len() == 1 && layers == 1 {
        let mut layer = design.layers.remove(0);
        layer.label = base.label.clone();
        layer_to_json(&layer)
    } else {
        design_to_json(&design)
    };
    write_output(a.output.as_deref(), &text)
}

fn optimize(a: OptimizeArgs, config: RunConfig) -> CliResult<()> {
    let weld_tol = a.weld_tol.unwrap_or(config.weld_tol);
    let design = read_design(&a.input, weld_tol)?;
    if design.layers.is_empty() {
        return Err(input(anyhow!("{} has no layers", a.input.display())));
    }
    let graphs = build_graphs(&design)?;

    let mut opt = config.optimizer.clone();
    if let Some(m) = a.mode {
        opt.mode = match m {
            Mode::Max => GrowthMode::Max,
            Mode::Min => GrowthMode::Min,
        };
    }
    if let Some(n) = a.iterations {
        opt.iterations = n;
    }
    if let Some(n) = a.long_min_nodes {
        opt.long_path_min_nodes = n;
    }
    let master_seed = a.seed.unwrap_or(opt.master_seed);
    let threads = a.threads.unwrap_or(config.threads);

    let mut reports = Vec::with_capacity(graphs.len());
    for (k, g) in graphs.iter().enumerate() {
        let layer_config =
            strutpath::optimizer::OptimizerConfig { master_seed: layer_seed(master_seed, k), ..opt.clone() };
        let report = optimize_with_threads(g, &layer_config, threads).context(format!("layer {k}"))?;
        reports.push(report);
    }

    if let Some(trace) = &a.trace {
        let mut csv = String::from("layer,iteration,score\n");
        for (k, r) in reports.iter().enumerate() {
            for (i, s) in r.per_iteration_scores.iter().enumerate() {
                let _ = writeln!(csv, "{k},{i},{s}");
            }
        }
        write_output(Some(trace), &csv)?;
    }
    let out = OptimizeOutput { master_seed, layers: reports };
    let text = to_stable_json(&out).map_err(internal)?;
    write_output(a.output.as_deref(), &text)
}

fn print_params(a: &EmitArgs, config: &RunConfig) -> CliResult<PrintParams> {
    let mut p = match &a.params {
        Some(path) => serde_json::from_str(&read_text(path)?)
            .map_err(input)
            .context(format!("parsing print parameters {}", path.display()))?,
        None => config.print.clone(),
    };
    let set = |slot: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(&mut p.layer_thickness, a.layer_thickness);
    set(&mut p.extrusion_multiplier, a.extrusion_multiplier);
    set(&mut p.nozzle_diameter, a.nozzle_diameter);
    set(&mut p.filament_diameter, a.filament_diameter);
    set(&mut p.k, a.k);
    set(&mut p.print_speed, a.print_speed);
    set(&mut p.travel_speed, a.travel_speed);
    set(&mut p.retraction_length, a.retraction);
    set(&mut p.first_layer_z, a.first_layer_z);
    set(&mut p.z_hop, a.z_hop);
    if a.nozzle_temp.is_some() {
        p.nozzle_temp = a.nozzle_temp;
    }
    if a.bed_temp.is_some() {
        p.bed_temp = a.bed_temp;
    }
    p.validate()?;
    Ok(p)
}

fn best_solutions(out: OptimizeOutput) -> Vec<Solution> {
    out.layers.into_iter().map(|r| r.best).collect()
}

fn emit(a: EmitArgs, config: RunConfig) -> CliResult<()> {
    let params = print_params(&a, &config)?;
    let design = read_design(&a.design, a.weld_tol.unwrap_or(config.weld_tol))?;
    let solutions = best_solutions(read_solutions(&a.solution)?);
    let text = match a.format {
        EmitFormat::Marlin => emit_marlin(&design, &solutions, &params)?,
        EmitFormat::Csv => emit_toolpath_csv(&design, &solutions, &params)?,
    };
    write_output(a.output.as_deref(), &text)
}

fn load_trajectory(path: &Path, lenient: bool) -> CliResult<Trajectory> {
    let bytes = std::fs::read(path).context(format!("reading {}", path.display()))?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let text = String::from_utf8(bytes).map_err(input)?;
        return trajectory_from_toolpath_csv(&text).context(format!("in {}", path.display()));
    }
    if lenient {
        let (moves, warnings) = parse_gcode_bytes(&bytes);
        let mut traj = extract_trajectories(&moves).context(format!("in {}", path.display()))?;
        traj.warnings.splice(0..0, warnings);
        return Ok(traj);
    }
    let text =
        String::from_utf8(bytes).map_err(|_| input(anyhow!("{} is not UTF-8 text (try --lenient)", path.display())))?;
    let moves = parse_gcode(&text).context(format!("in {}", path.display()))?;
    extract_trajectories(&moves).context(format!("in {}", path.display()))
}

fn analyze(a: AnalyzeArgs, config: RunConfig) -> CliResult<()> {
    let design = read_design(&a.nominal, a.weld_tol.unwrap_or(config.weld_tol))?;
    let trajectory = load_trajectory(&a.gcode, a.lenient)?;
    let nominal = NominalDesign::from_design(&design);
    let correction = if a.literal_correction { CorrectionMode::Literal } else { CorrectionMode::Intent };
    let long_min = a.long_min_nodes.unwrap_or(config.optimizer.long_path_min_nodes);
    let report = compare_to_nominal(&trajectory, &nominal, long_min, correction)?;
    if let Some(svg) = &a.svg {
        let graph = match design.layers.first() {
            Some(l) => Some(build_graph(l)?),
            None => None,
        };
        write_output(Some(svg), &overlay_svg(&trajectory, graph.as_ref(), "reconstructed trajectory"))?;
    }
    write_output(a.output.as_deref(), &to_stable_json(&report).map_err(internal)?)
}

fn stats(a: StatsArgs) -> CliResult<()> {
    let named = a
        .histograms
        .iter()
        .map(|p| {
            let h = histogram_from_csv(&read_text(p)?).context(format!("in {}", p.display()))?;
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, h))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let formula = match a.formula {
        Formula::Standard => StdFormula::Standard,
        Formula::Literal => StdFormula::Literal,
    };
    let report = summarize(&named, formula)?;
    write_output(a.output.as_deref(), &to_stable_json(&report).map_err(internal)?)
}

fn report(a: ReportArgs, config: RunConfig) -> CliResult<()> {
    let design = read_design(&a.design, a.weld_tol.unwrap_or(config.weld_tol))?;
    let run = read_solutions(&a.solution)?;
    if run.layers.len() != design.layers.len() {
        return Err(input(anyhow!(
            "solution has {} layers but the design has {}",
            run.layers.len(),
            design.layers.len()
        )));
    }
    let graphs = build_graphs(&design)?;
    std::fs::create_dir_all(&a.out_dir).context(format!("creating {}", a.out_dir.display()))?;
    let file = |name: String| a.out_dir.join(name);
    for (k, (g, r)) in graphs.iter().zip(&run.layers).enumerate() {
        let title = format!("layer {k} best (iteration {}, score {:.4})", r.best_iteration, r.best.score);
        write_output(Some(&file(format!("paths_layer{k}.svg"))), &paths_svg(g, &r.best, &r.config, &title))?;
        let title = format!("layer {k} worst (iteration {}, score {:.4})", r.worst_iteration, r.worst.score);
        write_output(Some(&file(format!("worst_paths_layer{k}.svg"))), &paths_svg(g, &r.worst, &r.config, &title))?;
        let title = format!("layer {k} score per iteration");
        write_output(Some(&file(format!("scores_layer{k}.svg"))), &scores_svg(&r.per_iteration_scores, &title))?;
        let dump = to_stable_json(&g.debug_dump()).map_err(internal)?;
        write_output(Some(&file(format!("graph_layer{k}.json"))), &dump)?;
    }
    if let Some(gcode) = &a.gcode {
        let trajectory = load_trajectory(gcode, true)?;
        write_output(
            Some(&file("overlay.svg".into())),
            &overlay_svg(&trajectory, graphs.first(), "reconstructed trajectory"),
        )?;
    }
    Ok(())
}
