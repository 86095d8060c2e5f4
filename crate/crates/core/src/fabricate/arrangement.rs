use crate::geometry::{Point2, LENGTH_EPS};
use std::collections::{BTreeSet, HashMap};

/// Planar arrangement of polygon rings: points closer than the length
/// tolerance are merged, segments are split at every crossing and at every
/// point lying on them, so the result has no crossings left for the
/// triangulator to resolve.
#[derive(Debug, Default)]
pub(super) struct Arrangement {
    pub points: Vec<Point2>,
    cells: HashMap<(i64, i64), Vec<u32>>,
    pub segments: BTreeSet<(u32, u32)>,
}

const CELL: f64 = 1e-6;
const MAX_ROUNDS: usize = 8;

fn cell(p: Point2) -> (i64, i64) {
    ((p.x / CELL).floor() as i64, (p.y / CELL).floor() as i64)
}

impl Arrangement {
    /// Index of `p`, or of an existing point within tolerance.
    pub fn point(&mut self, p: Point2) -> u32 {
        let (cx, cy) = cell(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(v) = self.cells.get(&(cx + dx, cy + dy)) {
                    if let Some(&i) = v.iter().find(|&&i| {
                        let q = self.points[i as usize];
                        (q.x - p.x).abs() <= LENGTH_EPS && (q.y - p.y).abs() <= LENGTH_EPS
                    }) {
                        return i;
                    }
                }
            }
        }
        let i = self.points.len() as u32;
        self.points.push(p);
        self.cells.entry((cx, cy)).or_default().push(i);
        i
    }

    pub fn ring(&mut self, poly: &[Point2]) {
        let idx: Vec<u32> = poly.iter().map(|&p| self.point(p)).collect();
        for i in 0..idx.len() {
            self.add_segment(idx[i], idx[(i + 1) % idx.len()]);
        }
    }

    fn add_segment(&mut self, a: u32, b: u32) {
        if a != b {
            self.segments.insert((a.min(b), a.max(b)));
        }
    }

    /// Splits until no segment crosses another or passes through a point.
    /// Returns false if that did not settle.
    pub fn resolve(&mut self) -> bool {
        for _ in 0..MAX_ROUNDS {
            if !self.split_round() {
                return true;
            }
        }
        false
    }

    fn split_round(&mut self) -> bool {
        let segs: Vec<(u32, u32)> = self.segments.iter().copied().collect();
        let pt = |i: u32| self.points[i as usize];
        let bounds: Vec<(f64, f64, f64, f64)> = segs
            .iter()
            .map(|&(a, b)| {
                let (p, q) = (pt(a), pt(b));
                (p.x.min(q.x), p.x.max(q.x), p.y.min(q.y), p.y.max(q.y))
            })
            .collect();
        let mut order: Vec<usize> = (0..segs.len()).collect();
        order.sort_by(|&i, &j| bounds[i].0.total_cmp(&bounds[j].0));

        // Crossing points, computed before any welding so the round is order independent.
        let mut cuts: Vec<(usize, Point2)> = Vec::new();
        for (k, &i) in order.iter().enumerate() {
            let bi = bounds[i];
            for &j in &order[k + 1..] {
                let bj = bounds[j];
                if bj.0 > bi.1 + LENGTH_EPS {
                    break;
                }
                if bj.2 > bi.3 + LENGTH_EPS || bi.2 > bj.3 + LENGTH_EPS {
                    continue;
                }
                let (a, b) = segs[i];
                let (c, d) = segs[j];
                if a == c || a == d || b == c || b == d {
                    continue;
                }
                if let Some(x) = crossing(pt(a), pt(b), pt(c), pt(d)) {
                    cuts.push((i, x));
                    cuts.push((j, x));
                }
            }
        }
        let mut on: Vec<Vec<u32>> = vec![Vec::new(); segs.len()];
        for (s, x) in cuts {
            let v = self.point(x);
            on[s].push(v);
        }

        // Points lying on a segment interior.
        let mut by_x: Vec<u32> = (0..self.points.len() as u32).collect();
        by_x.sort_by(|&i, &j| {
            self.points[i as usize]
                .x
                .total_cmp(&self.points[j as usize].x)
        });
        for (s, &(a, b)) in segs.iter().enumerate() {
            let (lo, hi) = (bounds[s].0 - LENGTH_EPS, bounds[s].1 + LENGTH_EPS);
            let start = by_x.partition_point(|&i| self.points[i as usize].x < lo);
            for &v in &by_x[start..] {
                let p = self.points[v as usize];
                if p.x > hi {
                    break;
                }
                if v != a
                    && v != b
                    && on_interior(p, self.points[a as usize], self.points[b as usize])
                {
                    on[s].push(v);
                }
            }
        }

        let mut changed = false;
        for (s, &(a, b)) in segs.iter().enumerate() {
            let mut vs = std::mem::take(&mut on[s]);
            vs.retain(|&v| v != a && v != b);
            if vs.is_empty() {
                continue;
            }
            let (pa, pb) = (self.points[a as usize], self.points[b as usize]);
            let dir = pb - pa;
            vs.sort_by(|&u, &v| {
                let tu = (self.points[u as usize] - pa).dot(dir);
                let tv = (self.points[v as usize] - pa).dot(dir);
                tu.total_cmp(&tv)
            });
            vs.dedup();
            self.segments.remove(&(a, b));
            let mut prev = a;
            for v in vs.into_iter().chain([b]) {
                self.add_segment(prev, v);
                prev = v;
            }
            changed = true;
        }
        changed
    }
}

/// Proper crossing point of segments ab and cd, if any. Touching at an end
/// or running parallel is left to the point-on-segment pass.
fn crossing(a: Point2, b: Point2, c: Point2, d: Point2) -> Option<Point2> {
    let r = b - a;
    let s = d - c;
    let den = r.cross(s);
    if den.abs() <= f64::EPSILON * r.norm() * s.norm() {
        return None;
    }
    let t = (c - a).cross(s) / den;
    let u = (c - a).cross(r) / den;
    if t > 0.0 && t < 1.0 && u > 0.0 && u < 1.0 {
        Some(a + r * t)
    } else {
        None
    }
}

fn on_interior(p: Point2, a: Point2, b: Point2) -> bool {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return false;
    }
    let t = (p - a).dot(ab) / len2;
    if t <= 0.0 || t >= 1.0 {
        return false;
    }
    let dist = (p - a).cross(ab).abs() / len2.sqrt();
    dist <= LENGTH_EPS
}
