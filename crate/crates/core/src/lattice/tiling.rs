//! Periodic tilings and line fills.
//!
//! Periodic tilings are anchored at the contour centre. Each generator fills a
//! region 1.5× the contour bounds along both axes (at least twice the area), welds
//! shared vertices and then crops to the contour with [`clip_layer`].

use std::f64::consts::{FRAC_PI_3, SQRT_2};

use serde::{Deserialize, Serialize};

use super::{
    clip_layer, clip_segment, param_err, require_positive, Contour, LatticeError, Layer, LayerBuilder, Point3,
    DEFAULT_WELD_TOL,
};

const MAX_CELLS: f64 = 5.0e6;
const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Named generator with its parameters, as used by configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "geometry", rename_all = "snake_case")]
pub enum Tiling {
    Honeycomb { hex_radius: f64 },
    SnubSquare { cell_size: f64 },
    Arrowhead { h: f64, v: f64 },
    ReentrantHoneycomb { h: f64, v: f64, reentrant_angle: f64 },
    Rectilinear { strand_distance: f64, angle_deg: f64 },
}

impl Tiling {
    pub fn generate(&self, contour: &Contour) -> Result<Layer, LatticeError> {
        match *self {
            Tiling::Honeycomb { hex_radius } => gen_honeycomb(hex_radius, contour),
            Tiling::SnubSquare { cell_size } => gen_snub_square(cell_size, contour),
            Tiling::Arrowhead { h, v } => gen_arrowhead(h, v, contour),
            Tiling::ReentrantHoneycomb { h, v, reentrant_angle } => {
                gen_reentrant_honeycomb(h, v, reentrant_angle, contour)
            }
            Tiling::Rectilinear { strand_distance, angle_deg } => gen_rectilinear(strand_distance, angle_deg, contour),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Tiling::Honeycomb { .. } => "honeycomb",
            Tiling::SnubSquare { .. } => "snub_square",
            Tiling::Arrowhead { .. } => "arrowhead",
            Tiling::ReentrantHoneycomb { .. } => "reentrant_honeycomb",
            Tiling::Rectilinear { .. } => "rectilinear",
        }
    }
}

/// Bounds of the fill region: the contour bounds scaled by 1.5 about their centre.
fn fill_region(contour: &Contour) -> (f64, f64, f64, f64) {
    let (x0, y0, x1, y1) = contour.bounds();
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let (hw, hh) = (0.75 * (x1 - x0), 0.75 * (y1 - y0));
    (cx - hw, cy - hh, cx + hw, cy + hh)
}

fn check_cell_budget(region: (f64, f64, f64, f64), cell_area: f64) -> Result<(), LatticeError> {
    let area = (region.2 - region.0) * (region.3 - region.1);
    if area / cell_area > MAX_CELLS {
        return Err(param_err("cell size", "too small for the contour, tiling would be enormous"));
    }
    Ok(())
}

fn p2(x: f64, y: f64) -> Point3 {
    Point3::new(x, y, 0.0)
}

/// Lattice translation vectors of the honeycomb with circumradius `r`.
pub fn honeycomb_lattice_vectors(r: f64) -> [(f64, f64); 2] {
    [(1.5 * r, SQRT_3 * r / 2.0), (0.0, SQRT_3 * r)]
}

/// Regular hexagonal tiling with circumradius (= side length) `hex_radius`.
/// Hexagons have a vertex on the +x axis; one is centred on the contour centre.
pub fn gen_honeycomb(hex_radius: f64, contour: &Contour) -> Result<Layer, LatticeError> {
    require_positive("hex_radius", hex_radius)?;
    contour.validate()?;
    let r = hex_radius;
    let region = fill_region(contour);
    check_cell_budget(region, 1.5 * SQRT_3 * r * r)?;
    let (cx, cy) = contour.center();
    let (x0, y0, x1, y1) = region;
    let (pitch_x, pitch_y) = (1.5 * r, SQRT_3 * r);
    let corners: Vec<(f64, f64)> = (0..6)
        .map(|k| {
            let (s, c) = (k as f64 * FRAC_PI_3).sin_cos();
            (r * c, r * s)
        })
        .collect();

    let mut builder = LayerBuilder::new(DEFAULT_WELD_TOL);
    let i_min = ((x0 - cx - r) / pitch_x).floor() as i64;
    let i_max = ((x1 - cx + r) / pitch_x).ceil() as i64;
    for i in i_min..=i_max {
        let hx = cx + i as f64 * pitch_x;
        let shift = i as f64 * pitch_y / 2.0;
        let j_min = ((y0 - cy - shift - r) / pitch_y).floor() as i64;
        let j_max = ((y1 - cy - shift + r) / pitch_y).ceil() as i64;
        for j in j_min..=j_max {
            let hy = cy + shift + j as f64 * pitch_y;
            for k in 0..6 {
                let (ax, ay) = corners[k];
                let (bx, by) = corners[(k + 1) % 6];
                builder.add_segment(p2(hx + ax, hy + ay), p2(hx + bx, hy + by));
            }
        }
    }
    Ok(clip_layer(&builder.finish(0.0, "honeycomb"), contour))
}

/// Side of the square periodic cell of the snub square tiling with unit edge `a`.
pub fn snub_square_cell_size(a: f64) -> f64 {
    a * (1.0 + SQRT_3) / SQRT_2
}

/// Snub square tiling (vertex figure 3.3.4.3.4) with edge length `cell_size`.
///
/// The periodic cell of side `a(1+√3)/√2` holds two squares, centred at the cell
/// corner and the cell centre and turned 30° relative to each other; each vertex is
/// shared by two squares. Triangle edges are the remaining vertex pairs at distance
/// exactly `a`.
pub fn gen_snub_square(cell_size: f64, contour: &Contour) -> Result<Layer, LatticeError> {
    require_positive("cell_size", cell_size)?;
    contour.validate()?;
    let a = cell_size;
    let period = snub_square_cell_size(a);
    let region = fill_region(contour);
    check_cell_budget(region, period * period / 2.0)?;
    let (cx, cy) = contour.center();
    let (x0, y0, x1, y1) = region;
    let circumradius = a / SQRT_2;

    let square = |sx: f64, sy: f64, start_deg: f64| -> [Point3; 4] {
        std::array::from_fn(|k| {
            let (s, c) = (start_deg + 90.0 * k as f64).to_radians().sin_cos();
            p2(sx + circumradius * c, sy + circumradius * s)
        })
    };

    let mut builder = LayerBuilder::new(DEFAULT_WELD_TOL);
    let i_min = ((x0 - cx) / period).floor() as i64 - 1;
    let i_max = ((x1 - cx) / period).ceil() as i64 + 1;
    let j_min = ((y0 - cy) / period).floor() as i64 - 1;
    let j_max = ((y1 - cy) / period).ceil() as i64 + 1;
    for i in i_min..=i_max {
        for j in j_min..=j_max {
            let (ox, oy) = (cx + i as f64 * period, cy + j as f64 * period);
            for (sx, sy, start) in [(ox, oy, 60.0), (ox + period / 2.0, oy + period / 2.0, 30.0)] {
                for p in square(sx, sy, start) {
                    builder.add_point(p);
                }
            }
        }
    }

    // All edges, square and triangle alike, join vertices exactly `a` apart.
    let points = builder.points().to_vec();
    let mut grid: std::collections::HashMap<(i64, i64), Vec<usize>> = Default::default();
    let key = |p: &Point3| ((p.x / a).floor() as i64, (p.y / a).floor() as i64);
    for (i, p) in points.iter().enumerate() {
        grid.entry(key(p)).or_default().push(i);
    }
    for (i, p) in points.iter().enumerate() {
        let (kx, ky) = key(p);
        let mut near: Vec<usize> = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = grid.get(&(kx + dx, ky + dy)) {
                    near.extend(bucket.iter().copied().filter(|&j| j > i));
                }
            }
        }
        near.sort_unstable();
        for j in near {
            if (points[j].distance(p) - a).abs() <= 1e-7 * a {
                builder.add_indexed(i, j);
            }
        }
    }
    Ok(clip_layer(&builder.finish(0.0, "snub_square"), contour))
}

/// One arrowhead cell with its lower-left wing tip at the origin.
///
/// Seven struts: two walls `x = 0` and `x = h` of height `v` (each shared with
/// the horizontal neighbour), an inner chevron from the wing tips `(0,0)`,
/// `(h,0)` to `(h/2, v/4)`, an outer chevron from the same tips to `(h/2, 3v/4)`,
/// and a vertical strut from `(h/2, -v/4)` (the outer apex of the cell below) up
/// to the inner apex. Cells repeat with period `h` horizontally and `v` vertically.
pub fn arrowhead_unit_cell(h: f64, v: f64) -> Vec<(Point3, Point3)> {
    let (m, inner, outer) = (h / 2.0, v / 4.0, 0.75 * v);
    vec![
        (p2(0.0, 0.0), p2(0.0, v)),
        (p2(h, 0.0), p2(h, v)),
        (p2(0.0, 0.0), p2(m, inner)),
        (p2(h, 0.0), p2(m, inner)),
        (p2(0.0, 0.0), p2(m, outer)),
        (p2(h, 0.0), p2(m, outer)),
        (p2(m, outer - v), p2(m, inner)),
    ]
}

/// One re-entrant (bow-tie) hexagon centred at the origin.
///
/// Vertical walls of height `v` at `x = ±h/2`; top and bottom are chevrons dipping
/// towards the centre by `c = (h/2)·tan(angle)`. Rows repeat with period `h` and
/// are staggered by `h/2`, the row pitch being `v - c`.
pub fn reentrant_unit_cell(h: f64, v: f64, reentrant_angle_deg: f64) -> Vec<(Point3, Point3)> {
    let (a, b) = (h / 2.0, v / 2.0);
    let c = a * reentrant_angle_deg.to_radians().tan();
    let pts = [p2(-a, b), p2(0.0, b - c), p2(a, b), p2(a, -b), p2(0.0, -b + c), p2(-a, -b)];
    (0..6).map(|k| (pts[k], pts[(k + 1) % 6])).collect()
}

/// Union of `cell` translated by each offset, welded and deduplicated.
pub fn tile_cells(cell: &[(Point3, Point3)], offsets: impl IntoIterator<Item = (f64, f64)>, label: &str) -> Layer {
    let mut builder = LayerBuilder::new(DEFAULT_WELD_TOL);
    for (ox, oy) in offsets {
        for (p, q) in cell {
            builder.add_segment(p2(p.x + ox, p.y + oy), p2(q.x + ox, q.y + oy));
        }
    }
    builder.finish(0.0, label)
}

/// Arrowhead auxetic tiling with unit cell `h` wide and `v` tall.
pub fn gen_arrowhead(h: f64, v: f64, contour: &Contour) -> Result<Layer, LatticeError> {
    require_positive("h", h)?;
    require_positive("v", v)?;
    contour.validate()?;
    let region = fill_region(contour);
    check_cell_budget(region, h * v)?;
    let (cx, cy) = contour.center();
    let (x0, y0, x1, y1) = region;
    let i_range = ((x0 - cx) / h).floor() as i64 - 1..=((x1 - cx) / h).ceil() as i64 + 1;
    let j_range = ((y0 - cy) / v).floor() as i64 - 1..=((y1 - cy) / v).ceil() as i64 + 1;
    let offsets = i_range.flat_map(|i| j_range.clone().map(move |j| (cx + i as f64 * h, cy + j as f64 * v)));
    let layer = tile_cells(&arrowhead_unit_cell(h, v), offsets, "arrowhead");
    Ok(clip_layer(&layer, contour))
}

/// Re-entrant honeycomb offsets of cell `(i, j)`.
pub(crate) fn reentrant_offset(h: f64, pitch_y: f64, i: i64, j: i64) -> (f64, f64) {
    let stagger = if j.rem_euclid(2) == 1 { h / 2.0 } else { 0.0 };
    (i as f64 * h + stagger, j as f64 * pitch_y)
}

/// Re-entrant honeycomb with bow-tie cells `h` wide and `v` tall whose inclined
/// struts make `reentrant_angle` degrees with the horizontal.
pub fn gen_reentrant_honeycomb(h: f64, v: f64, reentrant_angle: f64, contour: &Contour) -> Result<Layer, LatticeError> {
    require_positive("h", h)?;
    require_positive("v", v)?;
    if !(reentrant_angle > 0.0 && reentrant_angle < 90.0) {
        return Err(param_err("reentrant_angle", format!("must lie in (0, 90), got {reentrant_angle}")));
    }
    let dip = h / 2.0 * reentrant_angle.to_radians().tan();
    if dip >= v / 2.0 {
        return Err(param_err(
            "reentrant_angle",
            format!("chevron depth {dip:.6} must stay below half the cell height {:.6}", v / 2.0),
        ));
    }
    contour.validate()?;
    let pitch_y = v - dip;
    let region = fill_region(contour);
    check_cell_budget(region, h * pitch_y)?;
    let (cx, cy) = contour.center();
    let (x0, y0, x1, y1) = region;
    let i_range = ((x0 - cx) / h).floor() as i64 - 1..=((x1 - cx) / h).ceil() as i64 + 1;
    let j_range = ((y0 - cy) / pitch_y).floor() as i64 - 1..=((y1 - cy) / pitch_y).ceil() as i64 + 1;
    let offsets = i_range.flat_map(|i| {
        j_range.clone().map(move |j| {
            let (ox, oy) = reentrant_offset(h, pitch_y, i, j);
            (cx + ox, cy + oy)
        })
    });
    let layer = tile_cells(&reentrant_unit_cell(h, v, reentrant_angle), offsets, "reentrant_honeycomb");
    Ok(clip_layer(&layer, contour))
}

/// Parallel lines `strand_distance` apart at `angle_deg` from the x axis.
///
/// Along the line normal `n = (-sin, cos)`, the first line sits at the contour's
/// minimum extent and the following ones at integer multiples of the spacing, up to
/// the maximum extent.
pub fn gen_rectilinear(strand_distance: f64, angle_deg: f64, contour: &Contour) -> Result<Layer, LatticeError> {
    require_positive("strand_distance", strand_distance)?;
    if !angle_deg.is_finite() {
        return Err(param_err("angle_deg", "must be finite"));
    }
    contour.validate()?;
    let (s, c) = angle_deg.to_radians().sin_cos();
    let (ux, uy) = (c, s);
    let (nx, ny) = (-s, c);
    let (x0, y0, x1, y1) = contour.bounds();
    let (cx, cy) = contour.center();
    let (s_min, s_max) = match *contour {
        Contour::Rectangle { .. } => {
            let proj = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)].map(|(x, y)| x * nx + y * ny);
            proj.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
        }
        Contour::Circle { radius, .. } => {
            let mid = cx * nx + cy * ny;
            (mid - radius, mid + radius)
        }
    };
    let count = ((s_max - s_min) / strand_distance + 1e-9).floor();
    if count > MAX_CELLS {
        return Err(param_err("strand_distance", "too small for the contour"));
    }
    let half_len = (x1 - x0).hypot(y1 - y0) + 1.0;
    let c_proj = cx * nx + cy * ny;
    let mut builder = LayerBuilder::new(DEFAULT_WELD_TOL);
    for k in 0..=(count as i64) {
        let offset = s_min + k as f64 * strand_distance - c_proj;
        let (bx, by) = (cx + offset * nx, cy + offset * ny);
        let p = p2(bx - half_len * ux, by - half_len * uy);
        let q = p2(bx + half_len * ux, by + half_len * uy);
        if let Some((a, b)) = clip_segment(p, q, contour) {
            builder.add_segment(a, b);
        }
    }
    Ok(builder.finish(0.0, "rectilinear"))
}
