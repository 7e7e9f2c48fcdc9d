use super::{Contour, Layer, LayerBuilder, Point3, DEFAULT_WELD_TOL};

/// Boundary slack for containment tests. Points this close to the contour count as
/// inside, which keeps struts lying on the boundary and makes clipping idempotent.
const BOUNDARY_EPS: f64 = 1e-9;

/// Intersect the segment `p -> q` with the closed contour interior. Returns the
/// surviving piece (z interpolated linearly), or `None` if nothing remains.
pub fn clip_segment(p: Point3, q: Point3, contour: &Contour) -> Option<(Point3, Point3)> {
    let p_in = contour.contains(p.x, p.y, BOUNDARY_EPS);
    let q_in = contour.contains(q.x, q.y, BOUNDARY_EPS);
    if p_in && q_in {
        return Some((p, q));
    }
    let (t0, t1) = match *contour {
        Contour::Rectangle { .. } => liang_barsky(p, q, contour.bounds())?,
        Contour::Circle { radius, center } => circle_range(p, q, radius, center)?,
    };
    let a = if p_in { p } else { p.lerp(&q, t0) };
    let b = if q_in { q } else { p.lerp(&q, t1) };
    Some((a, b))
}

fn liang_barsky(p: Point3, q: Point3, bounds: (f64, f64, f64, f64)) -> Option<(f64, f64)> {
    let (x0, y0, x1, y1) = bounds;
    let (dx, dy) = (q.x - p.x, q.y - p.y);
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for (pk, qk) in [(-dx, p.x - x0), (dx, x1 - p.x), (-dy, p.y - y0), (dy, y1 - p.y)] {
        if pk == 0.0 {
            if qk < -BOUNDARY_EPS {
                return None;
            }
        } else {
            let r = qk / pk;
            if pk < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

fn circle_range(p: Point3, q: Point3, radius: f64, center: [f64; 2]) -> Option<(f64, f64)> {
    let (dx, dy) = (q.x - p.x, q.y - p.y);
    let (fx, fy) = (p.x - center[0], p.y - center[1]);
    let a = dx * dx + dy * dy;
    if a == 0.0 {
        return None;
    }
    let b = 2.0 * (fx * dx + fy * dy);
    let c = fx * fx + fy * fy - radius * radius;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t0 = ((-b - sq) / (2.0 * a)).max(0.0);
    let t1 = ((-b + sq) / (2.0 * a)).min(1.0);
    (t0 <= t1).then_some((t0, t1))
}

/// Crop every strut of `layer` to the contour. Struts crossing the boundary are
/// shortened, struts fully outside disappear, new boundary vertices are welded and
/// unreferenced points dropped.
pub fn clip_layer(layer: &Layer, contour: &Contour) -> Layer {
    let mut builder = LayerBuilder::with_points(&layer.points, DEFAULT_WELD_TOL);
    for s in &layer.segments {
        let (p, q) = layer.segment_endpoints(s);
        if let Some((a, b)) = clip_segment(p, q, contour) {
            if a == p && b == q {
                builder.add_indexed(s.a, s.b);
            } else {
                builder.add_segment(a, b);
            }
        }
    }
    builder.finish(layer.z, layer.label.clone())
}
