//! Analytic extended Pareto grids of the built-in examples.
//!
//! A grid is a finite union of contours: circle arcs (proper contours) and
//! axis-parallel half-lines (improper contours). Double points are the
//! transversal crossings of contours together with the non-smooth junctions
//! where an arc ends on a half-line. Removing them splits the grid into
//! contour-arcs, each labelled with a homological degree and a sign.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::bifiltration::{ParamPoint, SimplicialBifiltration};
use crate::error::{Error, Result};
use crate::examples::{ExampleId, SPHERE_CENTERS, SPHERE_RADIUS, TORUS_RADII};
use crate::parameter_space::AdmissibleLine;
use crate::persistence::{diagram_at, DiagramPoint};

/// Coordinates closer than this are the same point of the plane.
const POINT_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Vertical,
    Horizontal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ContourKind {
    /// `center + radius (cos t, sin t)` for `t` in `[theta0, theta1]`.
    Proper { center: (f64, f64), radius: f64, theta0: f64, theta1: f64 },
    /// `x = x0, y >= y0` (vertical) or `y = y0, x >= x0` (horizontal),
    /// parameterized by the free coordinate.
    Improper { axis: Axis, anchor: (f64, f64) },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Contour {
    pub kind: ContourKind,
    pub provenance: String,
}

impl Contour {
    pub fn arc(center: (f64, f64), radius: f64, theta0: f64, theta1: f64, provenance: impl Into<String>) -> Self {
        Self { kind: ContourKind::Proper { center, radius, theta0, theta1 }, provenance: provenance.into() }
    }

    pub fn vertical(x0: f64, y0: f64, provenance: impl Into<String>) -> Self {
        Self { kind: ContourKind::Improper { axis: Axis::Vertical, anchor: (x0, y0) }, provenance: provenance.into() }
    }

    pub fn horizontal(x0: f64, y0: f64, provenance: impl Into<String>) -> Self {
        Self { kind: ContourKind::Improper { axis: Axis::Horizontal, anchor: (x0, y0) }, provenance: provenance.into() }
    }

    pub fn is_proper(&self) -> bool {
        matches!(self.kind, ContourKind::Proper { .. })
    }

    /// Parameter interval; the upper end is infinite for half-lines.
    pub fn param_range(&self) -> (f64, f64) {
        match self.kind {
            ContourKind::Proper { theta0, theta1, .. } => (theta0, theta1),
            ContourKind::Improper { axis: Axis::Vertical, anchor } => (anchor.1, f64::INFINITY),
            ContourKind::Improper { axis: Axis::Horizontal, anchor } => (anchor.0, f64::INFINITY),
        }
    }

    pub fn point(&self, t: f64) -> (f64, f64) {
        match self.kind {
            ContourKind::Proper { center, radius, .. } => (center.0 + radius * t.cos(), center.1 + radius * t.sin()),
            ContourKind::Improper { axis: Axis::Vertical, anchor } => (anchor.0, t),
            ContourKind::Improper { axis: Axis::Horizontal, anchor } => (t, anchor.1),
        }
    }

    /// Unit tangent in the direction of increasing parameter.
    fn tangent(&self, t: f64) -> (f64, f64) {
        match self.kind {
            ContourKind::Proper { .. } => (-t.sin(), t.cos()),
            ContourKind::Improper { axis: Axis::Vertical, .. } => (0.0, 1.0),
            ContourKind::Improper { axis: Axis::Horizontal, .. } => (1.0, 0.0),
        }
    }

    /// Parameter of a point known to lie on the supporting curve, or `None`
    /// if it falls outside the parameter interval.
    fn param_of(&self, (x, y): (f64, f64)) -> Option<f64> {
        let (lo, hi) = self.param_range();
        let t = match self.kind {
            ContourKind::Proper { center, .. } => {
                let raw = (y - center.1).atan2(x - center.0);
                // Representative of the angle in [lo - eps, lo - eps + 2π).
                let base = lo - 1e-9;
                base + (raw - base).rem_euclid(2.0 * PI)
            }
            ContourKind::Improper { axis: Axis::Vertical, .. } => y,
            ContourKind::Improper { axis: Axis::Horizontal, .. } => x,
        };
        let eps = 1e-9 * (1.0 + t.abs());
        if t < lo - eps || t > hi + eps {
            return None;
        }
        Some(t.clamp(lo, hi))
    }

    /// Intersections with the admissible line as `(parameter, tangent flag)`.
    pub fn intersect_line(&self, line: &AdmissibleLine) -> Vec<(f64, bool)> {
        let (dx, dy) = line.direction();
        let (bx, by) = line.basepoint();
        let candidates: Vec<((f64, f64), bool)> = match self.kind {
            ContourKind::Proper { center, radius, .. } => {
                let (wx, wy) = (bx - center.0, by - center.1);
                let dd = dx * dx + dy * dy;
                let wd = wx * dx + wy * dy;
                let disc = wd * wd - dd * (wx * wx + wy * wy - radius * radius);
                let scale = radius * radius * dd;
                if disc < -1e-12 * scale {
                    Vec::new()
                } else if disc <= 1e-12 * scale {
                    let s = -wd / dd;
                    vec![(line.point_at(s), true)]
                } else {
                    let r = disc.sqrt();
                    vec![(line.point_at((-wd - r) / dd), false), (line.point_at((-wd + r) / dd), false)]
                }
            }
            ContourKind::Improper { axis: Axis::Vertical, anchor } => vec![(line.point_at((anchor.0 - bx) / dx), false)],
            ContourKind::Improper { axis: Axis::Horizontal, anchor } => vec![(line.point_at((anchor.1 - by) / dy), false)],
        };
        candidates.into_iter().filter_map(|(pt, tan)| self.param_of(pt).map(|t| (t, tan))).collect()
    }

    /// Polyline of the contour, with half-lines cut at `extent` units.
    pub fn polyline(&self, t0: f64, t1: f64, extent: f64, samples: usize) -> Vec<[f64; 2]> {
        match self.kind {
            ContourKind::Proper { .. } => (0..=samples)
                .map(|k| {
                    let (x, y) = self.point(t0 + (t1 - t0) * k as f64 / samples as f64);
                    [x, y]
                })
                .collect(),
            ContourKind::Improper { .. } => {
                let end = if t1.is_finite() { t1 } else { t0.max(extent) + 1.0 };
                [t0, end].iter().map(|&t| self.point(t)).map(|(x, y)| [x, y]).collect()
            }
        }
    }
}

/// Points of the supporting curves of two contours, as plane points.
fn curve_intersections(c1: &Contour, c2: &Contour) -> Result<Vec<(f64, f64)>> {
    use ContourKind::*;
    let circle_axis = |center: (f64, f64), radius: f64, axis: Axis, anchor: (f64, f64)| {
        let (off, fixed, other_c) = match axis {
            Axis::Vertical => (anchor.0 - center.0, anchor.0, center.1),
            Axis::Horizontal => (anchor.1 - center.1, anchor.1, center.0),
        };
        let h2 = radius * radius - off * off;
        let tol = 1e-12 * radius * radius;
        let hs: Vec<f64> = if h2 < -tol {
            vec![]
        } else if h2 <= tol {
            vec![0.0]
        } else {
            vec![-h2.sqrt(), h2.sqrt()]
        };
        hs.into_iter()
            .map(|h| match axis {
                Axis::Vertical => (fixed, other_c + h),
                Axis::Horizontal => (other_c + h, fixed),
            })
            .collect::<Vec<_>>()
    };
    Ok(match (&c1.kind, &c2.kind) {
        (Proper { center: p, radius: r, .. }, Proper { center: q, radius: s, .. }) => {
            let (dx, dy) = (q.0 - p.0, q.1 - p.1);
            let d = dx.hypot(dy);
            if d < POINT_EPS {
                if (r - s).abs() >= POINT_EPS {
                    return Ok(vec![]);
                }
                // Same circle: only shared endpoints may meet.
                let mid = |c: &Contour| {
                    let (lo, hi) = c.param_range();
                    c.point(0.5 * (lo + hi))
                };
                if c2.param_of(mid(c1)).is_some() || c1.param_of(mid(c2)).is_some() {
                    return Err(Error::Geometry("overlapping arcs on one circle".into()));
                }
                let ends = |c: &Contour| {
                    let (lo, hi) = c.param_range();
                    [c.point(lo), c.point(hi)]
                };
                return Ok(ends(c1).into_iter().chain(ends(c2)).collect());
            }
            let along = (d * d + r * r - s * s) / (2.0 * d);
            let h2 = r * r - along * along;
            let (mx, my) = (p.0 + along * dx / d, p.1 + along * dy / d);
            let tol = 1e-12 * r * r;
            if h2 < -tol {
                vec![]
            } else if h2 <= tol {
                vec![(mx, my)]
            } else {
                let h = h2.sqrt();
                vec![(mx - h * dy / d, my + h * dx / d), (mx + h * dy / d, my - h * dx / d)]
            }
        }
        (Proper { center, radius, .. }, Improper { axis, anchor }) | (Improper { axis, anchor }, Proper { center, radius, .. }) => {
            circle_axis(*center, *radius, *axis, *anchor)
        }
        (Improper { axis: a1, anchor: p }, Improper { axis: a2, anchor: q }) => {
            if a1 == a2 {
                let same = match a1 {
                    Axis::Vertical => (p.0 - q.0).abs() < POINT_EPS,
                    Axis::Horizontal => (p.1 - q.1).abs() < POINT_EPS,
                };
                if same {
                    return Err(Error::Geometry("overlapping half-lines".into()));
                }
                vec![]
            } else if *a1 == Axis::Vertical {
                vec![(p.0, q.1)]
            } else {
                vec![(q.0, p.1)]
            }
        }
    })
}

fn same_point(p: (f64, f64), q: (f64, f64)) -> bool {
    (p.0 - q.0).abs() < POINT_EPS && (p.1 - q.1).abs() < POINT_EPS
}

/// One maximal piece of a contour between consecutive double points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArcPiece {
    pub contour: usize,
    pub t0: f64,
    pub t1: f64,
}

/// A connected component of the grid minus its double points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContourArc {
    pub id: usize,
    pub degree: usize,
    pub sign: i8,
    pub pieces: Vec<ArcPiece>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoublePoint {
    pub x: f64,
    pub y: f64,
    pub contours: Vec<usize>,
    /// Common degree of every arc ending here, when there is one.
    pub degree: Option<usize>,
    /// True where contours end on each other rather than cross.
    pub junction: bool,
    pub name: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtendedParetoGrid {
    pub name: String,
    pub contours: Vec<Contour>,
    pub double_points: Vec<DoublePoint>,
    pub annihilation_crossings: Vec<(f64, f64)>,
    pub arcs: Vec<ContourArc>,
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut i = i;
        while self.0[i] != r {
            let next = self.0[i];
            self.0[i] = r;
            i = next;
        }
        r
    }

    fn union(&mut self, i: usize, j: usize) {
        let (ri, rj) = (self.find(i), self.find(j));
        if ri != rj {
            self.0[ri.max(rj)] = ri.min(rj);
        }
    }
}

impl ExtendedParetoGrid {
    /// Builds the grid from its contours. `label` gives `(degree, sign)` at a
    /// point of a contour away from double points. It must be constant along
    /// each contour-arc.
    pub fn from_contours(
        name: impl Into<String>,
        contours: Vec<Contour>,
        label: impl Fn(&Contour, (f64, f64)) -> (usize, i8),
    ) -> Result<Self> {
        for c in &contours {
            if let ContourKind::Proper { radius, theta0, theta1, .. } = c.kind {
                if !(radius > 0.0 && theta0 < theta1 && theta1 - theta0 < 2.0 * PI) {
                    return Err(Error::Geometry(format!("arc `{}` is not simple", c.provenance)));
                }
            }
        }

        // Double points with their contour parameters.
        let mut doubles: Vec<((f64, f64), Vec<(usize, f64)>, bool)> = Vec::new();
        let mut smooth_joins: Vec<(f64, f64)> = Vec::new();
        for i in 0..contours.len() {
            for j in i + 1..contours.len() {
                for pt in curve_intersections(&contours[i], &contours[j])? {
                    let (Some(ti), Some(tj)) = (contours[i].param_of(pt), contours[j].param_of(pt)) else {
                        continue;
                    };
                    let end_i = endpoint_direction(&contours[i], ti);
                    let end_j = endpoint_direction(&contours[j], tj);
                    if let (Some(u), Some(v)) = (end_i, end_j) {
                        if u.0 * v.0 + u.1 * v.1 < -1.0 + 1e-9 {
                            smooth_joins.push(pt);
                            continue;
                        }
                    }
                    let entry = match doubles.iter().position(|(q, _, _)| same_point(*q, pt)) {
                        Some(k) => k,
                        None => {
                            doubles.push((pt, Vec::new(), false));
                            doubles.len() - 1
                        }
                    };
                    doubles[entry].2 |= end_i.is_some() && end_j.is_some();
                    for (c, t) in [(i, ti), (j, tj)] {
                        if !doubles[entry].1.iter().any(|&(c2, _)| c2 == c) {
                            doubles[entry].1.push((c, t));
                        }
                    }
                }
            }
        }
        doubles.sort_by(|p, q| p.0 .0.total_cmp(&q.0 .0).then(p.0 .1.total_cmp(&q.0 .1)));

        // Split every contour at its double points.
        let mut pieces: Vec<ArcPiece> = Vec::new();
        for (ci, c) in contours.iter().enumerate() {
            let (lo, hi) = c.param_range();
            let mut cuts: Vec<f64> = doubles
                .iter()
                .flat_map(|(_, on, _)| on.iter().filter(|&&(c2, _)| c2 == ci).map(|&(_, t)| t))
                .collect();
            cuts.push(lo);
            cuts.push(hi);
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|a, b| (*a - *b).abs() < POINT_EPS);
            for w in cuts.windows(2) {
                pieces.push(ArcPiece { contour: ci, t0: w[0], t1: w[1] });
            }
        }

        // Merge pieces across smooth junctions.
        let mut dsu = Dsu((0..pieces.len()).collect());
        for &pt in &smooth_joins {
            let touching: Vec<usize> = (0..pieces.len())
                .filter(|&k| {
                    let p = &pieces[k];
                    let c = &contours[p.contour];
                    same_point(c.point(p.t0), pt) || (p.t1.is_finite() && same_point(c.point(p.t1), pt))
                })
                .collect();
            for w in touching.windows(2) {
                dsu.union(w[0], w[1]);
            }
        }
        let mut arcs: Vec<ContourArc> = Vec::new();
        let mut arc_of_root = std::collections::HashMap::new();
        for k in 0..pieces.len() {
            let root = dsu.find(k);
            let piece = pieces[k].clone();
            let c = &contours[piece.contour];
            let mid = if piece.t1.is_finite() { 0.5 * (piece.t0 + piece.t1) } else { piece.t0 + 1.0 };
            let (degree, sign) = label(c, c.point(mid));
            let id = *arc_of_root.entry(root).or_insert_with(|| {
                arcs.push(ContourArc { id: arcs.len(), degree, sign, pieces: Vec::new() });
                arcs.len() - 1
            });
            if (arcs[id].degree, arcs[id].sign) != (degree, sign) {
                return Err(Error::Geometry(format!("label changes along the arc through `{}`", c.provenance)));
            }
            arcs[id].pieces.push(piece);
        }

        let double_points = doubles
            .into_iter()
            .map(|((x, y), on, junction)| {
                let mut contour_ids: Vec<usize> = on.iter().map(|&(c, _)| c).collect();
                contour_ids.sort_unstable();
                let degrees: Vec<usize> = arcs
                    .iter()
                    .filter(|arc| arc_has_endpoint(&contours, arc, (x, y)))
                    .map(|arc| arc.degree)
                    .collect();
                let degree = degrees.first().copied().filter(|d| degrees.iter().all(|e| e == d));
                DoublePoint { x, y, contours: contour_ids, degree, junction, name: None }
            })
            .collect();

        let mut grid = Self { name: name.into(), contours, double_points, annihilation_crossings: Vec::new(), arcs };
        grid.annihilation_crossings = grid.compute_annihilation_crossings();
        Ok(grid)
    }

    pub fn double_point(&self, name: &str) -> Option<&DoublePoint> {
        self.double_points.iter().find(|d| d.name.as_deref() == Some(name))
    }

    /// Arc containing parameter `t` of contour `ci` in its interior.
    pub fn arc_at(&self, ci: usize, t: f64) -> Option<usize> {
        self.arcs
            .iter()
            .find(|arc| {
                arc.pieces.iter().any(|p| {
                    let eps = 1e-9 * (1.0 + t.abs());
                    p.contour == ci && t > p.t0 + eps && (t < p.t1 - eps || p.t1.is_infinite())
                })
            })
            .map(|arc| arc.id)
    }

    fn name_double_point(&mut self, name: &str, at: (f64, f64)) -> Result<()> {
        let d = self
            .double_points
            .iter_mut()
            .find(|d| (d.x - at.0).abs() < 1e-6 && (d.y - at.1).abs() < 1e-6)
            .ok_or_else(|| Error::Inconsistent(format!("no double point near {at:?} for `{name}`")))?;
        d.name = Some(name.to_string());
        Ok(())
    }

    /// Junctions where a `(d,+1)` arc and a `(d,-1)` arc end together.
    /// Transversal crossings of a birth arc and a death arc are excluded:
    /// near them the two arcs carry different classes.
    fn compute_annihilation_crossings(&self) -> Vec<(f64, f64)> {
        self.double_points
            .iter()
            .filter(|dp| dp.junction)
            .filter(|dp| {
                let ending: Vec<&ContourArc> =
                    self.arcs.iter().filter(|a| arc_has_endpoint(&self.contours, a, (dp.x, dp.y))).collect();
                ending.iter().any(|b| b.sign == 1 && ending.iter().any(|d| d.sign == -1 && d.degree == b.degree))
            })
            .map(|dp| (dp.x, dp.y))
            .collect()
    }

    /// Largest absolute coordinate of a finite grid feature.
    fn extent(&self) -> f64 {
        let mut m: f64 = 0.0;
        for c in &self.contours {
            match c.kind {
                ContourKind::Proper { center, radius, .. } => m = m.max(center.0.abs().max(center.1.abs()) + radius),
                ContourKind::Improper { anchor, .. } => m = m.max(anchor.0.abs().max(anchor.1.abs())),
            }
        }
        m
    }

    /// Plot-ready JSON: contours and arcs as polylines, half-lines cut one
    /// unit past the grid extent.
    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct ContourDump<'a> {
            index: usize,
            kind: &'a ContourKind,
            provenance: &'a str,
            polyline: Vec<[f64; 2]>,
        }
        #[derive(Serialize)]
        struct ArcDump<'a> {
            id: usize,
            degree: usize,
            sign: i8,
            pieces: &'a [ArcPiece],
            polylines: Vec<Vec<[f64; 2]>>,
        }
        #[derive(Serialize)]
        struct Dump<'a> {
            name: &'a str,
            contours: Vec<ContourDump<'a>>,
            arcs: Vec<ArcDump<'a>>,
            double_points: &'a [DoublePoint],
            annihilation_crossings: &'a [(f64, f64)],
        }
        let extent = self.extent();
        let poly = |ci: usize, t0: f64, t1: f64| self.contours[ci].polyline(t0, t1, extent, 48);
        let dump = Dump {
            name: &self.name,
            contours: self
                .contours
                .iter()
                .enumerate()
                .map(|(index, c)| {
                    let (t0, t1) = c.param_range();
                    ContourDump { index, kind: &c.kind, provenance: &c.provenance, polyline: poly(index, t0, t1) }
                })
                .collect(),
            arcs: self
                .arcs
                .iter()
                .map(|a| ArcDump {
                    id: a.id,
                    degree: a.degree,
                    sign: a.sign,
                    pieces: &a.pieces,
                    polylines: a.pieces.iter().map(|p| poly(p.contour, p.t0, p.t1)).collect(),
                })
                .collect(),
            double_points: &self.double_points,
            annihilation_crossings: &self.annihilation_crossings,
        };
        Ok(serde_json::to_string_pretty(&dump)?)
    }
}

/// Direction pointing into the contour when `t` is one of its endpoints.
fn endpoint_direction(c: &Contour, t: f64) -> Option<(f64, f64)> {
    let (lo, hi) = c.param_range();
    let (tx, ty) = c.tangent(t);
    if (t - lo).abs() < 1e-9 {
        Some((tx, ty))
    } else if hi.is_finite() && (t - hi).abs() < 1e-9 {
        Some((-tx, -ty))
    } else {
        None
    }
}

fn arc_has_endpoint(contours: &[Contour], arc: &ContourArc, at: (f64, f64)) -> bool {
    arc.pieces.iter().any(|p| {
        let c = &contours[p.contour];
        same_point(c.point(p.t0), at) || (p.t1.is_finite() && same_point(c.point(p.t1), at))
    })
}

/// A point where an admissible line meets the grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridIntersection {
    pub x: f64,
    pub y: f64,
    /// Normalized coordinate of the point along the line.
    pub w: f64,
    pub contours: Vec<usize>,
    /// Arc met on each listed contour; `None` at a double point.
    pub arcs: Vec<Option<usize>>,
    pub tangent: bool,
}

/// All intersections of the line with the grid, sorted by coordinate.
pub fn line_grid_intersections(grid: &ExtendedParetoGrid, line: &AdmissibleLine) -> Vec<GridIntersection> {
    let mut out: Vec<GridIntersection> = Vec::new();
    for (ci, c) in grid.contours.iter().enumerate() {
        for (t, tangent) in c.intersect_line(line) {
            let (x, y) = c.point(t);
            let arc = grid.arc_at(ci, t);
            match out.iter_mut().find(|g| same_point((g.x, g.y), (x, y))) {
                Some(g) => {
                    if !g.contours.contains(&ci) {
                        g.contours.push(ci);
                        g.arcs.push(arc);
                    }
                    g.tangent |= tangent;
                }
                None => out.push(GridIntersection {
                    x,
                    y,
                    w: line.normalized_coordinate(x, y),
                    contours: vec![ci],
                    arcs: vec![arc],
                    tangent,
                }),
            }
        }
    }
    out.sort_by(|p, q| p.w.total_cmp(&q.w));
    out
}

pub fn intersections_csv(hits: &[GridIntersection]) -> String {
    let mut s = String::from("x,y,w,contours,arcs,tangent\n");
    for h in hits {
        let join = |v: Vec<String>| v.join(";");
        let contours = join(h.contours.iter().map(|c| c.to_string()).collect());
        let arcs = join(h.arcs.iter().map(|a| a.map_or("double".into(), |a| a.to_string())).collect());
        s.push_str(&format!("{},{},{},{},{},{}\n", h.x, h.y, h.w, contours, arcs, h.tangent));
    }
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct PositionReport {
    pub param: ParamPoint,
    pub degree: usize,
    pub checked: usize,
    pub unmatched: Vec<f64>,
    /// Largest distance from a matched coordinate to its nearest intersection.
    pub max_error: f64,
    pub tolerance: f64,
}

impl PositionReport {
    pub fn pass(&self) -> bool {
        self.unmatched.is_empty()
    }
}

/// Checks that every finite coordinate of the degree-`degree` diagram at `p`
/// is within `tol` of the coordinate of a grid intersection.
pub fn position_check(
    grid: &ExtendedParetoGrid,
    bif: &SimplicialBifiltration,
    degree: usize,
    p: ParamPoint,
    tol: f64,
) -> Result<PositionReport> {
    let dgm = diagram_at(bif, p, degree)?;
    let ws: Vec<f64> = line_grid_intersections(grid, &AdmissibleLine::new(p)).iter().map(|h| h.w).collect();
    let mut report = PositionReport { param: p, degree, checked: 0, unmatched: Vec::new(), max_error: 0.0, tolerance: tol };
    for pt in dgm.points() {
        for c in [pt.birth(), pt.death()].into_iter().flatten().filter(|c| c.is_finite()) {
            report.checked += 1;
            let err = ws.iter().map(|w| (w - c).abs()).fold(f64::INFINITY, f64::min);
            if err <= tol {
                report.max_error = report.max_error.max(err);
            } else {
                report.unmatched.push(c);
            }
        }
    }
    Ok(report)
}

/// Where a diagram coordinate lands on the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcEnd {
    Arc(usize),
    Infinity,
    /// No intersection within tolerance, or the nearest one is a double point.
    Unresolved,
}

#[derive(Clone, Debug, Serialize)]
pub struct ArcPairing {
    pub point: DiagramPoint,
    pub birth: ArcEnd,
    pub death: ArcEnd,
    /// Two different arcs were within tolerance of one coordinate.
    pub ambiguous: bool,
}

/// Assigns the birth and death of every diagram point at `p` to the arcs the
/// line meets at the nearest intersection.
pub fn pair_arcs(
    grid: &ExtendedParetoGrid,
    bif: &SimplicialBifiltration,
    degree: usize,
    p: ParamPoint,
    tol: f64,
) -> Result<Vec<ArcPairing>> {
    let dgm = diagram_at(bif, p, degree)?;
    let hits = line_grid_intersections(grid, &AdmissibleLine::new(p));
    let locate = |c: f64| -> (ArcEnd, bool) {
        let mut near: Vec<(f64, &GridIntersection)> =
            hits.iter().map(|h| ((h.w - c).abs(), h)).filter(|(e, _)| *e <= tol).collect();
        near.sort_by(|x, y| x.0.total_cmp(&y.0));
        let Some((_, best)) = near.first() else { return (ArcEnd::Unresolved, false) };
        let end = match best.arcs.as_slice() {
            [Some(a)] => ArcEnd::Arc(*a),
            _ => ArcEnd::Unresolved,
        };
        let ambiguous = near.len() > 1 || best.arcs.len() > 1;
        (end, ambiguous)
    };
    Ok(dgm
        .points()
        .iter()
        .map(|&pt| {
            let (birth, amb_b) = pt.birth().map_or((ArcEnd::Unresolved, false), locate);
            let (death, amb_d) = match pt {
                DiagramPoint::Proper { v, .. } => locate(v),
                _ => (ArcEnd::Infinity, false),
            };
            ArcPairing { point: pt, birth, death, ambiguous: amb_b || amb_d }
        })
        .collect())
}

pub fn annihilation_catalog(grid: &ExtendedParetoGrid) -> Vec<(f64, f64)> {
    grid.annihilation_crossings.clone()
}

/// `(a, b)` of the admissible line through two points, if one exists.
pub fn line_through(p: (f64, f64), q: (f64, f64)) -> Option<ParamPoint> {
    let (dx, dy) = (q.0 - p.0, q.1 - p.1);
    let (dx, dy) = if dx < 0.0 || (dx == 0.0 && dy < 0.0) { (-dx, -dy) } else { (dx, dy) };
    if dx <= 0.0 || dy <= 0.0 {
        return None;
    }
    let a = dx / (dx + dy);
    Some(ParamPoint { a, b: p.0 * (1.0 - a) - p.1 * a })
}

pub fn builtin_grid(id: &str) -> Result<ExtendedParetoGrid> {
    match id.parse::<ExampleId>()? {
        ExampleId::Torus => torus_grid(),
        ExampleId::TwoSpheres => two_spheres_grid(),
        other => Err(Error::UnknownExample(format!("no analytic grid for `{}`", other.as_str()))),
    }
}

/// Quarter arcs of a round silhouette and its four half-lines.
fn round_contours(center: (f64, f64), r: f64, tag: &str) -> Vec<Contour> {
    let (cx, cy) = center;
    vec![
        Contour::arc(center, r, 0.0, FRAC_PI_2, format!("{tag}: upper-right critical arc")),
        Contour::arc(center, r, PI, PI + FRAC_PI_2, format!("{tag}: lower-left critical arc")),
        Contour::vertical(cx - r, cy, format!("{tag}: minimum of f1")),
        Contour::vertical(cx + r, cy, format!("{tag}: maximum of f1")),
        Contour::horizontal(cx, cy - r, format!("{tag}: minimum of f2")),
        Contour::horizontal(cx, cy + r, format!("{tag}: maximum of f2")),
    ]
}

/// Labels of a round sphere's grid: the lower-left part creates the
/// component, the upper-right arc creates a 1-cycle that the maximum
/// half-lines destroy until both coordinates pass the top, where the
/// 2-cycle appears.
fn sphere_label(center: (f64, f64), r: f64, c: &Contour, (x, y): (f64, f64)) -> (usize, i8) {
    match c.kind {
        ContourKind::Proper { theta0, .. } => {
            if theta0 < 1.0 {
                (1, 1)
            } else {
                (0, 1)
            }
        }
        ContourKind::Improper { axis, anchor } => {
            let (fixed, free, free_top) = match axis {
                Axis::Vertical => (anchor.0 - center.0, y, center.1 + r),
                Axis::Horizontal => (anchor.1 - center.1, x, center.0 + r),
            };
            if fixed < 0.0 {
                (0, 1)
            } else if free < free_top {
                (1, -1)
            } else {
                (2, 1)
            }
        }
    }
}

fn torus_grid() -> Result<ExtendedParetoGrid> {
    let (big, small) = TORUS_RADII;
    let (r_in, r_out) = (big - small, big + small);
    let o = (0.0, 0.0);
    let mut contours = vec![
        Contour::arc(o, r_in, 0.0, FRAC_PI_2, "inner equator, upper-right"),
        Contour::arc(o, r_out, 0.0, FRAC_PI_2, "outer equator, upper-right"),
        Contour::arc(o, r_in, PI, PI + FRAC_PI_2, "inner equator, lower-left"),
        Contour::arc(o, r_out, PI, PI + FRAC_PI_2, "outer equator, lower-left"),
    ];
    for v in [-r_out, -r_in, r_in, r_out] {
        contours.push(Contour::vertical(v, 0.0, format!("critical value {v} of f1")));
    }
    for v in [-r_out, -r_in, r_in, r_out] {
        contours.push(Contour::horizontal(0.0, v, format!("critical value {v} of f2")));
    }
    let label = move |c: &Contour, (x, y): (f64, f64)| -> (usize, i8) {
        match c.kind {
            ContourKind::Proper { radius, theta0, .. } => {
                let inner = (radius - r_in).abs() < 1e-12;
                let upper = theta0 < 1.0;
                if inner == upper {
                    (0, 1)
                } else {
                    (1, 1)
                }
            }
            ContourKind::Improper { axis, anchor } => {
                let (v, free) = match axis {
                    Axis::Vertical => (anchor.0, y),
                    Axis::Horizontal => (anchor.1, x),
                };
                if v < -r_in - 1e-12 {
                    (0, 1)
                } else if v < 0.0 {
                    (1, 1)
                } else if v < r_out - 1e-12 {
                    if free < r_in {
                        (0, -1)
                    } else {
                        (1, 1)
                    }
                } else if free < r_out {
                    (1, -1)
                } else {
                    (2, 1)
                }
            }
        }
    };
    ExtendedParetoGrid::from_contours(ExampleId::Torus.as_str(), contours, label)
}

fn two_spheres_grid() -> Result<ExtendedParetoGrid> {
    let r = SPHERE_RADIUS;
    let mut contours = Vec::new();
    for (k, &c) in SPHERE_CENTERS.iter().enumerate() {
        contours.extend(round_contours(c, r, &format!("sphere {}", k + 1)));
    }
    let label = move |c: &Contour, pt: (f64, f64)| {
        let k = contours_owner(c);
        sphere_label(SPHERE_CENTERS[k], r, c, pt)
    };
    let mut grid = ExtendedParetoGrid::from_contours(ExampleId::TwoSpheres.as_str(), contours, label)?;

    let [p, q] = SPHERE_CENTERS;
    let crossings = curve_intersections(&Contour::arc(p, r, 0.0, 1.0, ""), &Contour::arc(q, r, 0.0, 1.0, ""))?;
    let upper = crossings.iter().copied().max_by(|u, v| u.1.total_cmp(&v.1)).ok_or_else(|| Error::Inconsistent("spheres do not cross".into()))?;
    let lower = crossings.iter().copied().min_by(|u, v| u.1.total_cmp(&v.1)).ok_or_else(|| Error::Inconsistent("spheres do not cross".into()))?;
    grid.name_double_point("A", upper)?;
    grid.name_double_point("B", (q.0 + r, p.1 + r))?;
    grid.name_double_point("C", lower)?;
    grid.name_double_point("D", (p.0 + r, q.1 + r))?;
    Ok(grid)
}

/// Index of the sphere a built-in contour belongs to, from its provenance.
fn contours_owner(c: &Contour) -> usize {
    usize::from(c.provenance.starts_with("sphere 2"))
}
