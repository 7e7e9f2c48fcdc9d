use std::collections::{HashMap, HashSet};

use super::{Layer, Point3, Segment};

/// Merges points closer than a tolerance. Indices are assigned in first-appearance
/// order; a new point closer than `tol` to several existing points snaps to the
/// lowest index.
#[derive(Debug, Clone)]
pub struct Welder {
    tol: f64,
    points: Vec<Point3>,
    grid: HashMap<[i64; 3], Vec<usize>>,
}

impl Welder {
    pub fn new(tol: f64) -> Self {
        assert!(tol > 0.0 && tol.is_finite(), "weld tolerance must be positive");
        Self { tol, points: Vec::new(), grid: HashMap::new() }
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    fn cell(&self, p: &Point3) -> [i64; 3] {
        [(p.x / self.tol).floor() as i64, (p.y / self.tol).floor() as i64, (p.z / self.tol).floor() as i64]
    }

    /// Index of an existing point within tolerance of `p`, if any.
    pub fn find(&self, p: &Point3) -> Option<usize> {
        let c = self.cell(p);
        let mut best: Option<usize> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let key = [c[0] + dx, c[1] + dy, c[2] + dz];
                    if let Some(bucket) = self.grid.get(&key) {
                        for &i in bucket {
                            if self.points[i].distance(p) <= self.tol && best.is_none_or(|b| i < b) {
                                best = Some(i);
                            }
                        }
                    }
                }
            }
        }
        best
    }

    /// Insert `p`, returning the index of the welded vertex.
    pub fn insert(&mut self, p: Point3) -> usize {
        if let Some(i) = self.find(&p) {
            return i;
        }
        let i = self.points.len();
        let key = self.cell(&p);
        self.grid.entry(key).or_default().push(i);
        self.points.push(p);
        i
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point3> {
        self.points
    }
}

/// Incrementally assembles a layer from coordinate pairs. Endpoints are welded,
/// struts that collapse to a point are dropped and duplicates are ignored.
#[derive(Debug, Clone)]
pub struct LayerBuilder {
    welder: Welder,
    segments: Vec<Segment>,
    seen: HashSet<(usize, usize)>,
}

impl LayerBuilder {
    pub fn new(weld_tol: f64) -> Self {
        Self { welder: Welder::new(weld_tol), segments: Vec::new(), seen: HashSet::new() }
    }

    /// Start from an existing point list so that surviving vertices keep their order.
    pub fn with_points(points: &[Point3], weld_tol: f64) -> Self {
        let mut b = Self::new(weld_tol);
        for p in points {
            b.welder.insert(*p);
        }
        b
    }

    pub fn add_point(&mut self, p: Point3) -> usize {
        self.welder.insert(p)
    }

    /// Add a strut by coordinates. Returns `true` if a new strut was recorded.
    pub fn add_segment(&mut self, p: Point3, q: Point3) -> bool {
        if p.distance(&q) <= self.welder.tol() {
            return false;
        }
        let a = self.welder.insert(p);
        let b = self.welder.insert(q);
        self.add_indexed(a, b)
    }

    pub fn add_indexed(&mut self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        if !self.seen.insert(key) {
            return false;
        }
        self.segments.push(Segment::new(a, b));
        true
    }

    pub fn points(&self) -> &[Point3] {
        self.welder.points()
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    /// Finish the layer, dropping points no strut references. Relative point order
    /// is preserved.
    pub fn finish(self, z: f64, label: impl Into<String>) -> Layer {
        let points = self.welder.into_points();
        let mut used = vec![false; points.len()];
        for s in &self.segments {
            used[s.a] = true;
            used[s.b] = true;
        }
        let mut remap = vec![usize::MAX; points.len()];
        let mut kept = Vec::with_capacity(points.len());
        for (i, p) in points.into_iter().enumerate() {
            if used[i] {
                remap[i] = kept.len();
                kept.push(p);
            }
        }
        let segments = self.segments.into_iter().map(|s| Segment::new(remap[s.a], remap[s.b])).collect();
        Layer { points: kept, segments, z, label: label.into() }
    }
}
