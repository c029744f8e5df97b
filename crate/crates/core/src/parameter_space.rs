//! Geometry of the parameter strip `]0,1[ x R`: admissible lines, polyline
//! paths, regions with excluded disks, lattices, gap scans and loops.

use std::collections::VecDeque;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bifiltration::{ParamPoint, SimplicialBifiltration};
use crate::diagram_metric::point_distance;
use crate::error::{Error, Result};
use crate::persistence::{diagram_at, DiagramPoint, PersistenceDiagram};

/// The line with direction `(a, 1-a)` through `(b, -b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleLine {
    pub param: ParamPoint,
}

impl AdmissibleLine {
    pub fn new(param: ParamPoint) -> Self {
        Self { param }
    }

    pub fn direction(&self) -> (f64, f64) {
        (self.param.a, 1.0 - self.param.a)
    }

    pub fn basepoint(&self) -> (f64, f64) {
        (self.param.b, -self.param.b)
    }

    pub fn point_at(&self, t: f64) -> (f64, f64) {
        let (da, db) = self.direction();
        let (x0, y0) = self.basepoint();
        (x0 + t * da, y0 + t * db)
    }

    /// Filtration value of the plane point `(x, y)` on the line, i.e. the
    /// normalized coordinate `min{a,1-a} * t`.
    pub fn normalized_coordinate(&self, x: f64, y: f64) -> f64 {
        let p = self.param;
        p.scale() * ((x - p.b) / p.a).max((y + p.b) / (1.0 - p.a))
    }
}

/// A polyline in the strip parameterized by arc-length fraction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamPath {
    waypoints: Vec<ParamPoint>,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl ParamPath {
    pub fn new(waypoints: Vec<ParamPoint>) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::Domain("a path needs at least one waypoint".into()));
        }
        if let Some(p) = waypoints.iter().find(|p| !p.is_valid()) {
            return Err(Error::InvalidParam(p.a));
        }
        let mut pts: Vec<ParamPoint> = Vec::with_capacity(waypoints.len());
        for p in waypoints {
            if pts.last() != Some(&p) {
                pts.push(p);
            }
        }
        let mut cumulative = vec![0.0];
        for w in pts.windows(2) {
            cumulative.push(cumulative.last().unwrap() + w[0].dist(&w[1]));
        }
        Ok(Self { waypoints: pts, cumulative })
    }

    pub fn constant(p: ParamPoint) -> Result<Self> {
        Self::new(vec![p])
    }

    pub fn straight(p: ParamPoint, q: ParamPoint) -> Result<Self> {
        Self::new(vec![p, q])
    }

    pub fn waypoints(&self) -> &[ParamPoint] {
        &self.waypoints
    }

    pub fn start(&self) -> ParamPoint {
        self.waypoints[0]
    }

    pub fn end(&self) -> ParamPoint {
        *self.waypoints.last().unwrap()
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn is_closed(&self) -> bool {
        self.start() == self.end()
    }

    /// Point at arc fraction `s`; `s = 0` and `s = 1` return the end
    /// waypoints exactly.
    pub fn point_at(&self, s: f64) -> ParamPoint {
        let total = self.length();
        if s <= 0.0 || total == 0.0 {
            return self.start();
        }
        if s >= 1.0 {
            return self.end();
        }
        let target = s * total;
        let k = self.cumulative.partition_point(|&c| c <= target).clamp(1, self.waypoints.len() - 1);
        let (c0, c1) = (self.cumulative[k - 1], self.cumulative[k]);
        let t = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.0 };
        self.waypoints[k - 1].lerp(&self.waypoints[k], t)
    }

    pub fn reversed(&self) -> Self {
        let mut w = self.waypoints.clone();
        w.reverse();
        Self::new(w).expect("reversal of a valid path")
    }

    /// `self` followed by `other`; requires `self.end() == other.start()`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.end() != other.start() {
            return Err(Error::Domain("paths do not share an endpoint".into()));
        }
        let mut w = self.waypoints.clone();
        w.extend_from_slice(&other.waypoints[1..]);
        Self::new(w)
    }

    /// `sup_s |self(s) - other(s)|_inf`, sampled at `n + 1` fractions plus all
    /// waypoint fractions of both paths.
    pub fn sup_distance(&self, other: &Self, n: usize) -> f64 {
        let mut fr: Vec<f64> = (0..=n).map(|i| i as f64 / n.max(1) as f64).collect();
        for p in [self, other] {
            if p.length() > 0.0 {
                fr.extend(p.cumulative.iter().map(|c| c / p.length()));
            }
        }
        fr.iter().map(|&s| self.point_at(s).dist_inf(&other.point_at(s))).fold(0.0, f64::max)
    }
}

/// Number of counter-clockwise turns of a closed polyline around `q`
/// (the path is closed implicitly if its ends differ).
pub fn winding_number(path: &ParamPath, q: ParamPoint) -> i32 {
    let w = path.waypoints();
    let mut total = 0.0;
    for i in 0..w.len() {
        let p0 = w[i];
        let p1 = w[(i + 1) % w.len()];
        let (x0, y0) = (p0.a - q.a, p0.b - q.b);
        let (x1, y1) = (p1.a - q.a, p1.b - q.b);
        total += (x0 * y1 - y0 * x1).atan2(x0 * x1 + y0 * y1);
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i32
}

/// Closed axis-aligned rectangle `[a0, a1] x [b0, b1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub a0: f64,
    pub a1: f64,
    pub b0: f64,
    pub b1: f64,
}

impl Rect {
    pub fn new(a0: f64, a1: f64, b0: f64, b1: f64) -> Result<Self> {
        let r = Self { a0, a1, b0, b1 };
        if !(a0 > 0.0 && a1 < 1.0 && a0 < a1 && b0 < b1 && b0.is_finite() && b1.is_finite()) {
            return Err(Error::InvalidRegion(format!(
                "rectangle {r:?} must satisfy 0 < a0 < a1 < 1 and b0 < b1"
            )));
        }
        Ok(r)
    }

    /// Parses `a0,a1,b0,b1`.
    pub fn parse(s: &str) -> Result<Self> {
        let v: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidRegion(format!("cannot parse rectangle `{s}`")))?;
        if v.len() != 4 {
            return Err(Error::InvalidRegion(format!("rectangle `{s}` needs four numbers")));
        }
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn contains(&self, p: &ParamPoint) -> bool {
        p.a >= self.a0 && p.a <= self.a1 && p.b >= self.b0 && p.b <= self.b1
    }

    /// `n x n` grid of nodes including the corners (`n >= 2`).
    pub fn grid(&self, n: usize) -> Vec<ParamPoint> {
        let n = n.max(2);
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.node(i, j, n, n));
            }
        }
        out
    }

    pub fn node(&self, i: usize, j: usize, na: usize, nb: usize) -> ParamPoint {
        let a = self.a0 + (self.a1 - self.a0) * i as f64 / (na - 1) as f64;
        let b = self.b0 + (self.b1 - self.b0) * j as f64 / (nb - 1) as f64;
        ParamPoint { a, b }
    }

    pub fn center(&self) -> ParamPoint {
        ParamPoint { a: 0.5 * (self.a0 + self.a1), b: 0.5 * (self.b0 + self.b1) }
    }

    /// Euclidean distance from an inside point to the rectangle boundary.
    pub fn distance_to_boundary(&self, p: &ParamPoint) -> f64 {
        (p.a - self.a0).min(self.a1 - p.a).min(p.b - self.b0).min(self.b1 - p.b).abs()
    }

    pub fn interiors_overlap(&self, o: &Rect) -> bool {
        self.a0 < o.a1 && o.a0 < self.a1 && self.b0 < o.b1 && o.b0 < self.b1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: ParamPoint,
    pub radius: f64,
}

impl Disk {
    /// Distance from the centre to the segment `pq`.
    fn segment_distance(&self, p: &ParamPoint, q: &ParamPoint) -> f64 {
        let (dx, dy) = (q.a - p.a, q.b - p.b);
        let len2 = dx * dx + dy * dy;
        let t = if len2 > 0.0 {
            (((self.center.a - p.a) * dx + (self.center.b - p.b) * dy) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        p.lerp(q, t).dist(&self.center)
    }
}

/// A rectangle minus finitely many closed disks, with separation constant `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterRegion {
    pub rect: Rect,
    pub disks: Vec<Disk>,
    pub separation: f64,
}

#[derive(Serialize, Deserialize)]
struct RegionFile {
    rect: [f64; 4],
    #[serde(default)]
    disks: Vec<[f64; 3]>,
    c: f64,
}

/// Relative slack when testing whether a segment touches a disk, so that
/// points sampled on a circle can be joined to the lattice.
const DISK_SLACK: f64 = 1e-9;

impl ParameterRegion {
    pub fn new(rect: Rect, disks: Vec<Disk>, separation: f64) -> Result<Self> {
        let rect = Rect::new(rect.a0, rect.a1, rect.b0, rect.b1)?;
        if !(separation > 0.0 && separation.is_finite()) {
            return Err(Error::InvalidRegion(format!("separation must be positive, got {separation}")));
        }
        for (i, d) in disks.iter().enumerate() {
            let c = d.center;
            if !(d.radius > 0.0) {
                return Err(Error::InvalidRegion(format!("disk {i} has non-positive radius")));
            }
            if !(c.a - d.radius > rect.a0 && c.a + d.radius < rect.a1 && c.b - d.radius > rect.b0 && c.b + d.radius < rect.b1) {
                return Err(Error::InvalidRegion(format!("disk {i} is not strictly inside the rectangle")));
            }
            for (j, e) in disks.iter().enumerate().skip(i + 1) {
                if c.dist(&e.center) <= d.radius + e.radius {
                    return Err(Error::InvalidRegion(format!("disks {i} and {j} intersect")));
                }
            }
        }
        Ok(Self { rect, disks, separation })
    }

    pub fn without_disks(rect: Rect, separation: f64) -> Result<Self> {
        Self::new(rect, vec![], separation)
    }

    pub fn with_separation(&self, c: f64) -> Result<Self> {
        Self::new(self.rect, self.disks.clone(), c)
    }

    /// In the closed rectangle and outside every closed disk.
    pub fn contains(&self, p: &ParamPoint) -> bool {
        self.rect.contains(p) && self.disks.iter().all(|d| p.dist(&d.center) > d.radius)
    }

    /// Whether the segment `pq` stays in the closed rectangle and off the
    /// open-with-slack disks (touching a circle is allowed).
    pub fn segment_inside(&self, p: &ParamPoint, q: &ParamPoint) -> bool {
        let tol = 1e-12;
        let in_rect = |x: &ParamPoint| {
            x.a >= self.rect.a0 - tol && x.a <= self.rect.a1 + tol && x.b >= self.rect.b0 - tol && x.b <= self.rect.b1 + tol
        };
        in_rect(p)
            && in_rect(q)
            && self.disks.iter().all(|d| d.segment_distance(p, q) >= d.radius * (1.0 - DISK_SLACK))
    }

    /// Distance from an inside point to the region boundary.
    pub fn distance_to_boundary(&self, p: &ParamPoint) -> f64 {
        self.disks
            .iter()
            .map(|d| (p.dist(&d.center) - d.radius).abs())
            .fold(self.rect.distance_to_boundary(p), f64::min)
    }

    /// A point of the region, preferring the rectangle centre.
    pub fn pick_basepoint(&self) -> Result<ParamPoint> {
        let c = self.rect.center();
        if self.contains(&c) && self.distance_to_boundary(&c) > 0.0 {
            return Ok(c);
        }
        let grid = self.rect.grid(17);
        grid.into_iter()
            .filter(|p| self.contains(p))
            .max_by(|p, q| self.distance_to_boundary(p).total_cmp(&self.distance_to_boundary(q)))
            .ok_or_else(|| Error::InvalidRegion("region has no interior points".into()))
    }

    /// `n` points per rectangle side and `n` points per disk circle.
    pub fn boundary_samples(&self, n: usize) -> Vec<ParamPoint> {
        let r = self.rect;
        let n = n.max(2);
        let mut out = Vec::new();
        for i in 0..n {
            let t = i as f64 / n as f64;
            out.push(ParamPoint { a: r.a0 + t * (r.a1 - r.a0), b: r.b0 });
            out.push(ParamPoint { a: r.a1, b: r.b0 + t * (r.b1 - r.b0) });
            out.push(ParamPoint { a: r.a1 - t * (r.a1 - r.a0), b: r.b1 });
            out.push(ParamPoint { a: r.a0, b: r.b1 - t * (r.b1 - r.b0) });
        }
        for d in &self.disks {
            for i in 0..n {
                let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                out.push(ParamPoint { a: d.center.a + d.radius * th.cos(), b: d.center.b + d.radius * th.sin() });
            }
        }
        out
    }

    /// `n` points on `a = 1/2` inside the region, if the rectangle meets it.
    pub fn half_line_samples(&self, n: usize) -> Vec<ParamPoint> {
        if !(self.rect.a0 <= 0.5 && 0.5 <= self.rect.a1) {
            return vec![];
        }
        let n = n.max(2);
        (0..n)
            .map(|i| ParamPoint { a: 0.5, b: self.rect.b0 + (self.rect.b1 - self.rect.b0) * i as f64 / (n - 1) as f64 })
            .filter(|p| self.contains(p))
            .collect()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: RegionFile = serde_json::from_str(s)?;
        let [a0, a1, b0, b1] = f.rect;
        let disks = f
            .disks
            .iter()
            .map(|&[a, b, r]| Ok(Disk { center: ParamPoint::new(a, b)?, radius: r }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(Rect { a0, a1, b0, b1 }, disks, f.c)
    }

    pub fn to_json_string(&self) -> String {
        let r = self.rect;
        let f = RegionFile {
            rect: [r.a0, r.a1, r.b0, r.b1],
            disks: self.disks.iter().map(|d| [d.center.a, d.center.b, d.radius]).collect(),
            c: self.separation,
        };
        serde_json::to_string(&f).expect("plain data serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// A grid over the region's rectangle restricted to the region, with edges
/// between grid neighbours whose segment stays inside.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub nodes: Vec<ParamPoint>,
    pub adjacency: Vec<Vec<usize>>,
    /// `(i, j)` grid coordinates of each node.
    pub coords: Vec<(usize, usize)>,
    pub na: usize,
    pub nb: usize,
}

impl Lattice {
    pub fn new(region: &ParameterRegion, na: usize, nb: usize) -> Self {
        let (na, nb) = (na.max(2), nb.max(2));
        let mut index = vec![None; na * nb];
        let mut nodes = Vec::new();
        let mut coords = Vec::new();
        for i in 0..na {
            for j in 0..nb {
                let p = region.rect.node(i, j, na, nb);
                if region.contains(&p) {
                    index[i * nb + j] = Some(nodes.len());
                    nodes.push(p);
                    coords.push((i, j));
                }
            }
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (k, &(i, j)) in coords.iter().enumerate() {
            for (di, dj) in [(1usize, 0usize), (0, 1)] {
                let (i2, j2) = (i + di, j + dj);
                if i2 >= na || j2 >= nb {
                    continue;
                }
                if let Some(l) = index[i2 * nb + j2] {
                    if region.segment_inside(&nodes[k], &nodes[l]) {
                        adjacency[k].push(l);
                        adjacency[l].push(k);
                    }
                }
            }
        }
        for a in &mut adjacency {
            a.sort_unstable();
        }
        Self { nodes, adjacency, coords, na, nb }
    }

    /// Largest lattice spacing.
    pub fn spacing(&self, region: &ParameterRegion) -> f64 {
        let r = region.rect;
        ((r.a1 - r.a0) / (self.na - 1) as f64).max((r.b1 - r.b0) / (self.nb - 1) as f64)
    }

    /// Nearest node joined to `p` by a segment inside the region.
    pub fn nearest_visible(&self, region: &ParameterRegion, p: &ParamPoint) -> Option<usize> {
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by(|&x, &y| self.nodes[x].dist(p).total_cmp(&self.nodes[y].dist(p)).then(x.cmp(&y)));
        order.into_iter().find(|&k| region.segment_inside(p, &self.nodes[k]))
    }

    /// Breadth-first parents from `root` (`parent[root] = root`).
    pub fn bfs_tree(&self, root: usize) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.nodes.len()];
        parent[root] = Some(root);
        let mut queue = VecDeque::from([root]);
        while let Some(k) = queue.pop_front() {
            for &l in &self.adjacency[k] {
                if parent[l].is_none() {
                    parent[l] = Some(k);
                    queue.push_back(l);
                }
            }
        }
        parent
    }

    /// Node sequence from the BFS root to `target`.
    pub fn tree_path(parent: &[Option<usize>], target: usize) -> Option<Vec<usize>> {
        let mut path = vec![target];
        let mut k = target;
        loop {
            let p = parent[k]?;
            if p == k {
                break;
            }
            path.push(p);
            k = p;
        }
        path.reverse();
        Some(path)
    }

    /// Polyline inside the region from `p` to `q` through the lattice.
    pub fn route(&self, region: &ParameterRegion, p: ParamPoint, q: ParamPoint) -> Result<Vec<ParamPoint>> {
        if region.segment_inside(&p, &q) {
            return Ok(vec![p, q]);
        }
        let unreachable = || Error::Geometry(format!("no lattice route from ({}, {}) to ({}, {})", p.a, p.b, q.a, q.b));
        let s = self.nearest_visible(region, &p).ok_or_else(unreachable)?;
        let t = self.nearest_visible(region, &q).ok_or_else(unreachable)?;
        let tree = self.bfs_tree(s);
        let nodes = Self::tree_path(&tree, t).ok_or_else(unreachable)?;
        let mut out = vec![p];
        out.extend(nodes.into_iter().map(|k| self.nodes[k]));
        out.push(q);
        Ok(simplify(out))
    }
}

/// Drops repeated and collinear interior waypoints.
fn simplify(points: Vec<ParamPoint>) -> Vec<ParamPoint> {
    let mut out: Vec<ParamPoint> = Vec::with_capacity(points.len());
    for p in points {
        if out.last() == Some(&p) {
            continue;
        }
        if out.len() >= 2 {
            let (x, y) = (out[out.len() - 2], out[out.len() - 1]);
            let cross = (y.a - x.a) * (p.b - y.b) - (y.b - x.b) * (p.a - y.a);
            let dot = (y.a - x.a) * (p.a - y.a) + (y.b - x.b) * (p.b - y.b);
            if cross.abs() <= 1e-15 && dot > 0.0 {
                out.pop();
            }
        }
        out.push(p);
    }
    out
}

/// Smallest `d` between distinct points of a diagram and between each point
/// and the diagonal; `∞` for diagrams with at most one point.
pub fn diagram_gap(d: &PersistenceDiagram) -> f64 {
    if d.len() <= 1 {
        return f64::INFINITY;
    }
    let pts = d.points();
    let mut gap = f64::INFINITY;
    for (i, x) in pts.iter().enumerate() {
        gap = gap.min(point_distance(x, &DiagramPoint::Diagonal));
        for y in &pts[i + 1..] {
            gap = gap.min(point_distance(x, y));
        }
    }
    gap
}

/// Smallest `d` between two distinct points, ignoring the diagonal.
pub fn diagram_pair_gap(d: &PersistenceDiagram) -> f64 {
    let pts = d.points();
    let mut gap = f64::INFINITY;
    for (i, x) in pts.iter().enumerate() {
        for y in &pts[i + 1..] {
            gap = gap.min(point_distance(x, y));
        }
    }
    gap
}

pub fn min_diagram_gap(bif: &SimplicialBifiltration, p: ParamPoint, degree: usize) -> Result<f64> {
    Ok(diagram_gap(&diagram_at(bif, p, degree)?))
}

fn pair_gap_at(bif: &SimplicialBifiltration, p: ParamPoint, degree: usize) -> Result<f64> {
    Ok(diagram_pair_gap(&diagram_at(bif, p, degree)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularPairReport {
    pub location: ParamPoint,
    pub degree: usize,
    pub min_gap_at_location: f64,
    pub refinement_radius: f64,
}

/// CSV with header `a,b,degree,gap`.
pub fn singular_reports_csv(reports: &[SingularPairReport]) -> String {
    let mut out = String::from("a,b,degree,gap\n");
    for r in reports {
        out.push_str(&format!("{},{},{},{}\n", r.location.a, r.location.b, r.degree, r.min_gap_at_location));
    }
    out
}

/// Relative threshold (against the median scan gap) below which a refined
/// local minimum counts as a singular pair.
pub const SINGULAR_THRESHOLD: f64 = 0.1;

/// Ratio of window radii over which a candidate's gap must at least halve.
const PLATEAU_SPAN: f64 = 16.0;

/// Grid scan of the distance between distinct diagram points. Distances to
/// the diagonal are left out: a point approaching the diagonal is not a
/// multiple point. Every grid local minimum below half the median is refined
/// by nested grid bisection until the window radius drops below
/// `refine_tol`, then kept if the refined gap is below
/// [`SINGULAR_THRESHOLD`] times the median scan gap and is either negligible
/// or at most half the gap seen at a sixteen times larger window. A mesh
/// whose diagram points come close without meeting therefore reports
/// nothing.
pub fn detect_singular_pairs(
    bif: &SimplicialBifiltration,
    degree: usize,
    scan: Rect,
    grid_n: usize,
    refine_tol: f64,
) -> Result<Vec<SingularPairReport>> {
    if grid_n < 8 {
        return Err(Error::Domain(format!("grid_n must be at least 8, got {grid_n}")));
    }
    if !(refine_tol > 0.0) {
        return Err(Error::Domain("refine_tol must be positive".into()));
    }
    let n = grid_n;
    let pts = scan.grid(n);
    let gaps: Vec<f64> = pts.par_iter().map(|&p| pair_gap_at(bif, p, degree)).collect::<Result<_>>()?;
    let mut finite: Vec<f64> = gaps.iter().copied().filter(|g| g.is_finite()).collect();
    if finite.is_empty() {
        return Ok(vec![]);
    }
    finite.sort_by(f64::total_cmp);
    let median = finite[finite.len() / 2];
    let at = |i: usize, j: usize| gaps[i * n + j];
    let mut candidates = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let g = at(i, j);
            if !(g < 0.5 * median) {
                continue;
            }
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (x, y) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) != (0, 0) && x >= 0 && y >= 0 && (x as usize) < n && (y as usize) < n && at(x as usize, y as usize) < g {
                        is_min = false;
                    }
                }
            }
            if is_min {
                candidates.push((pts[i * n + j], g));
            }
        }
    }
    let ha = (scan.a1 - scan.a0) / (n - 1) as f64;
    let hb = (scan.b1 - scan.b0) / (n - 1) as f64;
    let mut reports: Vec<SingularPairReport> = Vec::new();
    for (c, start_gap) in candidates {
        let (loc, gap, radius, history) = refine_minimum(bif, degree, scan, c, ha, hb, refine_tol)?;
        // A multiple point is a zero of the gap, so the gap must keep
        // shrinking with the window; positive minima and terraces of a
        // piecewise-linear landscape level off instead.
        let earlier = history
            .iter()
            .rev()
            .find(|(r, _)| *r >= PLATEAU_SPAN * radius)
            .map_or(start_gap, |&(_, g)| g);
        let converging = gap <= 1e-3 * median || gap <= 0.5 * earlier;
        if converging
            && gap < SINGULAR_THRESHOLD * median
            && !reports.iter().any(|r| (r.location.a - loc.a).abs() <= ha && (r.location.b - loc.b).abs() <= hb)
        {
            reports.push(SingularPairReport { location: loc, degree, min_gap_at_location: gap, refinement_radius: radius });
        }
    }
    reports.sort_by(|x, y| x.location.a.total_cmp(&y.location.a).then(x.location.b.total_cmp(&y.location.b)));
    Ok(reports)
}

fn refine_minimum(
    bif: &SimplicialBifiltration,
    degree: usize,
    scan: Rect,
    start: ParamPoint,
    ha: f64,
    hb: f64,
    tol: f64,
) -> Result<(ParamPoint, f64, f64, Vec<(f64, f64)>)> {
    let mut center = start;
    let mut history = Vec::new();
    let mut best = pair_gap_at(bif, center, degree)?;
    let (mut ra, mut rb) = (ha, hb);
    const K: i32 = 2;
    // Pattern search: keep the window size while the centre improves, halve
    // it once it stalls.
    let mut moves_at_scale = 0;
    while ra.max(rb) >= tol {
        let window: Vec<ParamPoint> = (-K..=K)
            .flat_map(|i| (-K..=K).map(move |j| (i, j)))
            .map(|(i, j)| ParamPoint {
                a: (center.a + ra * i as f64 / K as f64).clamp(scan.a0, scan.a1),
                b: (center.b + rb * j as f64 / K as f64).clamp(scan.b0, scan.b1),
            })
            .collect();
        let gaps: Vec<f64> = window.par_iter().map(|&p| pair_gap_at(bif, p, degree)).collect::<Result<_>>()?;
        let mut moved = false;
        for (p, g) in window.into_iter().zip(gaps) {
            if g < best {
                best = g;
                center = p;
                moved = true;
            }
        }
        if moved && moves_at_scale < 32 {
            moves_at_scale += 1;
        } else {
            history.push((ra.max(rb), best));
            ra /= 2.0;
            rb /= 2.0;
            moves_at_scale = 0;
        }
    }
    Ok((center, best, ra.max(rb), history))
}

/// `c = 1/4` of the smallest diagram gap over a grid of `n x n` region points,
/// boundary samples and `a = 1/2` samples, taken over every given function.
pub fn choose_separation(
    bifs: &[&SimplicialBifiltration],
    degree: usize,
    region: &ParameterRegion,
    n: usize,
) -> Result<f64> {
    let min_gap = sampled_min_gap(bifs, degree, region, n)?;
    if !min_gap.is_finite() {
        return Ok(1.0);
    }
    if min_gap <= 0.0 {
        return Err(Error::InvalidRegion("a sampled diagram has a multiple point".into()));
    }
    Ok(0.25 * min_gap)
}

/// Smallest diagram gap over region samples (see [`choose_separation`]).
pub fn sampled_min_gap(bifs: &[&SimplicialBifiltration], degree: usize, region: &ParameterRegion, n: usize) -> Result<f64> {
    let mut pts: Vec<ParamPoint> = region.rect.grid(n).into_iter().filter(|p| region.contains(p)).collect();
    pts.extend(region.boundary_samples(n));
    pts.extend(region.half_line_samples(n));
    let gaps: Vec<f64> = pts
        .par_iter()
        .flat_map_iter(|&p| bifs.iter().map(move |b| min_diagram_gap(b, p, degree)))
        .collect::<Result<_>>()?;
    Ok(gaps.into_iter().fold(f64::INFINITY, f64::min))
}

/// For each disk, a counter-clockwise square ring around it reached from
/// `basepoint` by a lattice route, traversed once and returning along the
/// same route.
pub fn generator_loops(region: &ParameterRegion, basepoint: ParamPoint) -> Result<Vec<ParamPath>> {
    if !region.contains(&basepoint) {
        return Err(Error::Geometry(format!("basepoint ({}, {}) is not in the region", basepoint.a, basepoint.b)));
    }
    if region.disks.is_empty() {
        return Ok(vec![]);
    }
    let halves: Vec<f64> = (0..region.disks.len()).map(|j| ring_half_side(region, j)).collect::<Result<_>>()?;
    let r = region.rect;
    let mut spacing = (r.a1 - r.a0).max(r.b1 - r.b0) / 64.0;
    for (j, d) in region.disks.iter().enumerate() {
        spacing = spacing.min((halves[j] - d.radius) / 2.0);
    }
    let na = (((r.a1 - r.a0) / spacing).ceil() as usize + 1).min(513);
    let nb = (((r.b1 - r.b0) / spacing).ceil() as usize + 1).min(513);
    let lattice = Lattice::new(region, na, nb);
    let mut loops = Vec::with_capacity(region.disks.len());
    for (j, d) in region.disks.iter().enumerate() {
        let s = halves[j];
        let c = d.center;
        let corner = |sa: f64, sb: f64| ParamPoint { a: c.a + sa * s, b: c.b + sb * s };
        // Enter the ring at the corner closest to the basepoint.
        let corners = [corner(1.0, -1.0), corner(1.0, 1.0), corner(-1.0, 1.0), corner(-1.0, -1.0)];
        let k0 = (0..4).min_by(|&x, &y| corners[x].dist(&basepoint).total_cmp(&corners[y].dist(&basepoint))).unwrap();
        let ring: Vec<ParamPoint> = (0..=4).map(|t| corners[(k0 + t) % 4]).collect();
        let tail = lattice.route(region, basepoint, corners[k0])?;
        let mut w = tail.clone();
        w.extend_from_slice(&ring[1..]);
        w.extend(tail.iter().rev().skip(1));
        let path = ParamPath::new(w)?;
        for (k, e) in region.disks.iter().enumerate() {
            let expected = i32::from(k == j);
            if winding_number(&path, e.center) != expected {
                return Err(Error::Geometry(format!("loop {j} winds {} times around disk {k}", winding_number(&path, e.center))));
            }
        }
        loops.push(path);
    }
    Ok(loops)
}

/// Half side of the square ring around disk `j`: halfway between the disk
/// radius and the largest square that stays inside the rectangle and clear
/// of the other disks.
fn ring_half_side(region: &ParameterRegion, j: usize) -> Result<f64> {
    let d = region.disks[j];
    let c = d.center;
    let r = region.rect;
    let mut max_s = (c.a - r.a0).min(r.a1 - c.a).min(c.b - r.b0).min(r.b1 - c.b);
    for (k, e) in region.disks.iter().enumerate() {
        if k == j {
            continue;
        }
        // Largest s with the square [c ± s] at Euclidean distance >= radius from e.
        let (lo, hi) = (0.0, max_s);
        let clear = |s: f64| {
            let dx = ((e.center.a - c.a).abs() - s).max(0.0);
            let dy = ((e.center.b - c.b).abs() - s).max(0.0);
            dx.hypot(dy) > e.radius
        };
        if !clear(d.radius) {
            return Err(Error::Geometry(format!("disks {j} and {k} are too close for a square loop")));
        }
        let (mut lo, mut hi) = (d.radius.max(lo), hi);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if clear(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        max_s = max_s.min(lo);
    }
    if max_s <= d.radius {
        return Err(Error::Geometry(format!("no room for a loop around disk {j}")));
    }
    Ok(0.5 * (d.radius + max_s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(a: f64, b: f64) -> ParamPoint {
        ParamPoint::new(a, b).unwrap()
    }

    fn region(disks: Vec<Disk>) -> ParameterRegion {
        ParameterRegion::new(Rect::new(0.1, 0.9, -1.0, 1.0).unwrap(), disks, 0.01).unwrap()
    }

    #[test]
    fn contains_examples() {
        let r = region(vec![]);
        assert!(r.contains(&pp(0.5, 0.0)));
        let r = ParameterRegion::new(Rect::new(0.1, 0.45, -0.5, 0.5).unwrap(), vec![Disk { center: pp(0.25, 0.0), radius: 0.05 }], 0.01).unwrap();
        assert!(!r.contains(&pp(0.25, 0.0)));
        assert!(r.contains(&pp(0.25, 0.051)));
    }

    #[test]
    fn region_validation() {
        let rect = Rect::new(0.1, 0.9, -1.0, 1.0).unwrap();
        assert!(Rect::new(0.0, 0.5, 0.0, 1.0).is_err());
        assert!(ParameterRegion::new(rect, vec![], 0.0).is_err());
        let d = |a, b, r| Disk { center: pp(a, b), radius: r };
        assert!(ParameterRegion::new(rect, vec![d(0.12, 0.0, 0.05)], 0.1).is_err());
        assert!(ParameterRegion::new(rect, vec![d(0.3, 0.0, 0.1), d(0.45, 0.0, 0.1)], 0.1).is_err());
    }

    #[test]
    fn region_json_roundtrip() {
        let text = r#"{"rect":[0.1,0.45,-0.5,0.5],"disks":[[0.25,0.0,0.05]],"c":0.002}"#;
        let r = ParameterRegion::from_json_str(text).unwrap();
        assert_eq!(r.disks.len(), 1);
        assert_eq!(ParameterRegion::from_json_str(&r.to_json_string()).unwrap(), r);
        assert!(ParameterRegion::from_json_str(r#"{"rect":[0.1,0.45,-0.5],"c":1}"#).is_err());
    }

    #[test]
    fn path_parameterization() {
        let p = ParamPath::new(vec![pp(0.2, 0.0), pp(0.4, 0.0), pp(0.4, 0.2)]).unwrap();
        assert_eq!(p.point_at(0.0), pp(0.2, 0.0));
        assert_eq!(p.point_at(1.0), pp(0.4, 0.2));
        let mid = p.point_at(0.5);
        assert!((mid.a - 0.4).abs() < 1e-12 && mid.b.abs() < 1e-12);
        assert_eq!(p.reversed().reversed(), p);
        assert!(ParamPath::new(vec![]).is_err());
        assert!(ParamPath::new(vec![ParamPoint { a: 1.2, b: 0.0 }]).is_err());
        let c = ParamPath::constant(pp(0.3, 0.3)).unwrap();
        assert_eq!(c.point_at(0.7), pp(0.3, 0.3));
        assert!(p.concat(&c).is_err());
        assert_eq!(p.concat(&p.reversed()).unwrap().end(), p.start());
    }

    #[test]
    fn winding_numbers() {
        let sq = ParamPath::new(vec![pp(0.2, -0.1), pp(0.4, -0.1), pp(0.4, 0.1), pp(0.2, 0.1), pp(0.2, -0.1)]).unwrap();
        assert_eq!(winding_number(&sq, pp(0.3, 0.0)), 1);
        assert_eq!(winding_number(&sq.reversed(), pp(0.3, 0.0)), -1);
        assert_eq!(winding_number(&sq, pp(0.6, 0.0)), 0);
    }

    #[test]
    fn loops_for_zero_one_two_disks() {
        assert!(generator_loops(&region(vec![]), pp(0.5, 0.0)).unwrap().is_empty());
        let d1 = Disk { center: pp(0.3, 0.0), radius: 0.05 };
        let d2 = Disk { center: pp(0.7, 0.3), radius: 0.08 };
        let r = region(vec![d1]);
        let loops = generator_loops(&r, pp(0.5, -0.5)).unwrap();
        assert_eq!(loops.len(), 1);
        assert_eq!(winding_number(&loops[0], d1.center), 1);
        assert!(loops[0].is_closed());
        let r = region(vec![d1, d2]);
        let base = pp(0.5, 0.8);
        let loops = generator_loops(&r, base).unwrap();
        let profile: Vec<(i32, i32)> =
            loops.iter().map(|l| (winding_number(l, d1.center), winding_number(l, d2.center))).collect();
        assert_eq!(profile, vec![(1, 0), (0, 1)]);
        for l in &loops {
            for w in l.waypoints().windows(2) {
                assert!(r.segment_inside(&w[0], &w[1]));
            }
        }
        assert!(generator_loops(&r, d1.center).is_err());
    }

    #[test]
    fn gap_of_small_diagrams() {
        let one = PersistenceDiagram::new(0, vec![DiagramPoint::Proper { u: 0.0, v: 1.0 }]).unwrap();
        assert_eq!(diagram_gap(&one), f64::INFINITY);
        let two = PersistenceDiagram::new(0, vec![DiagramPoint::Proper { u: 0.0, v: 1.0 }, DiagramPoint::Proper { u: 0.0, v: 1.25 }])
            .unwrap();
        assert_eq!(diagram_gap(&two), 0.25);
    }

    #[test]
    fn constant_gap_input_has_no_singular_pairs() {
        // Two far-apart bars whose positions do not depend on (a, b) much.
        let bif = SimplicialBifiltration::from_maximal(
            "bars",
            vec![[0.0, 0.0], [10.0, 10.0], [1.0, 1.0], [30.0, 30.0], [5.0, 5.0]],
            vec![vec![0, 1], vec![2, 3], vec![1, 4], vec![4, 3]],
        )
        .unwrap();
        let r = detect_singular_pairs(&bif, 0, Rect::new(0.2, 0.8, -1.0, 1.0).unwrap(), 8, 0.01).unwrap();
        assert!(r.is_empty());
        assert!(detect_singular_pairs(&bif, 0, Rect::new(0.2, 0.8, -1.0, 1.0).unwrap(), 4, 0.01).is_err());
    }

    #[test]
    fn line_geometry() {
        let l = AdmissibleLine::new(pp(0.25, 1.0));
        assert_eq!(l.basepoint(), (1.0, -1.0));
        assert_eq!(l.point_at(4.0), (2.0, 2.0));
        assert!((l.normalized_coordinate(2.0, 2.0) - 1.0).abs() < 1e-12);
    }
}
