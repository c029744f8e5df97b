//! Transport of diagram points and matchings along paths of regular
//! parameters.
//!
//! A sweep advances along the path in adaptive steps. Each step recomputes the
//! diagram and continues every tracked point to its nearest neighbour. The
//! step is accepted only when that neighbour is closer than
//! `safety_factor * c` and every other candidate (the diagonal included) is
//! farther than `c`. Here `c` is the region's separation constant, by default
//! raised to half the smallest gap of the two diagrams when that is larger:
//! distinct points more than `2c` apart is exactly the separation hypothesis,
//! read locally.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bifiltration::{ParamPoint, SimplicialBifiltration};
use crate::diagram_metric::{bottleneck_distance, point_distance, Matching};
use crate::error::{Error, Result};
use crate::parameter_space::{diagram_gap, ParamPath};
use crate::persistence::{diagram_at, DiagramPoint, PersistenceDiagram};

/// Distance within which a given point counts as a point of the start diagram.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportConfig {
    /// First step as a fraction of the path length (before seeding).
    pub initial_step: f64,
    /// Smallest step fraction tried before giving up.
    pub min_step: f64,
    pub safety_factor: f64,
    /// The separation constant `c` of the region.
    pub separation: f64,
    /// Cap on the parameter-space length of one step.
    pub max_step_length: f64,
    /// Raise `c` per step to half the smaller gap of the two diagrams.
    pub local_separation: bool,
}

impl TransportConfig {
    pub fn new(separation: f64) -> Self {
        Self { initial_step: 0.05, min_step: 1e-6, safety_factor: 0.45, separation, max_step_length: 0.02, local_separation: true }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.min_step
            && self.min_step < self.initial_step
            && self.initial_step <= 1.0
            && 0.0 < self.safety_factor
            && self.safety_factor < 1.0
            && self.separation > 0.0
            && self.separation.is_finite()
            && self.max_step_length > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid transport configuration {self:?}")))
        }
    }
}

/// Step constant `K / min(a(a-ε), (1-a)(1-a-ε))` bounding how far slice
/// diagrams move per unit of parameter displacement `ε`, with
/// `K = ||f||∞ + max(a, 1-a) + |b|`. `None` when `ε ≥ min(a, 1-a)`.
pub fn oldbound_constant(sup_norm: f64, p: ParamPoint, eps: f64) -> Option<f64> {
    let (a, b) = (p.a, p.b);
    if !(eps >= 0.0 && eps < a.min(1.0 - a)) {
        return None;
    }
    let k = sup_norm + a.max(1.0 - a) + b.abs();
    Some(k / (a * (a - eps)).min((1.0 - a) * (1.0 - a - eps)))
}

/// The path-continuity constant: max of [`oldbound_constant`] with `ε = η`
/// along the path, sampled densely on every segment.
pub fn c_eta(sup_norm: f64, path: &ParamPath, eta: f64) -> Result<f64> {
    const PER_SEGMENT: usize = 64;
    let w = path.waypoints();
    let mut pts = vec![w[0]];
    for pair in w.windows(2) {
        pts.extend((1..=PER_SEGMENT).map(|i| pair[0].lerp(&pair[1], i as f64 / PER_SEGMENT as f64)));
    }
    pts.iter().try_fold(0.0f64, |acc, p| {
        oldbound_constant(sup_norm, *p, eta)
            .map(|c| acc.max(c))
            .ok_or_else(|| Error::Domain(format!("eta = {eta} is not below min(a, 1-a) at ({}, {})", p.a, p.b)))
    })
}

/// Anything that can produce the degree-`k` diagram at a parameter.
pub trait DiagramSource: Sync {
    fn degree(&self) -> usize;
    fn diagram(&self, p: ParamPoint) -> Result<Arc<PersistenceDiagram>>;
    /// Sup norm of the underlying map, used to seed the first step.
    fn sup_norm(&self) -> f64;
}

/// Slice diagrams of a bifiltration, optionally memoized by parameter.
pub struct SliceSource<'a> {
    bif: &'a SimplicialBifiltration,
    degree: usize,
    sup_norm: f64,
    cache: Option<Mutex<HashMap<(u64, u64), Arc<PersistenceDiagram>>>>,
}

impl<'a> SliceSource<'a> {
    pub fn new(bif: &'a SimplicialBifiltration, degree: usize) -> Self {
        Self { bif, degree, sup_norm: bif.sup_norm(), cache: None }
    }

    /// Memoizes diagrams at exactly repeated parameters (lattice nodes).
    pub fn cached(bif: &'a SimplicialBifiltration, degree: usize) -> Self {
        Self { cache: Some(Mutex::new(HashMap::new())), ..Self::new(bif, degree) }
    }

    pub fn bifiltration(&self) -> &'a SimplicialBifiltration {
        self.bif
    }
}

impl DiagramSource for SliceSource<'_> {
    fn degree(&self) -> usize {
        self.degree
    }

    fn diagram(&self, p: ParamPoint) -> Result<Arc<PersistenceDiagram>> {
        let Some(cache) = &self.cache else {
            return Ok(Arc::new(diagram_at(self.bif, p, self.degree)?));
        };
        let key = (p.a.to_bits(), p.b.to_bits());
        if let Some(d) = cache.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(d));
        }
        let d = Arc::new(diagram_at(self.bif, p, self.degree)?);
        cache.lock().expect("cache lock").insert(key, Arc::clone(&d));
        Ok(d)
    }

    fn sup_norm(&self) -> f64 {
        self.sup_norm
    }
}

/// Samples `(s, point)` of one transported point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointTrack {
    pub path: ParamPath,
    pub samples: Vec<(f64, DiagramPoint)>,
}

impl PointTrack {
    /// CSV `s,u,v`; `v = inf` for improper points, both coordinates `diag`
    /// for the diagonal.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,u,v\n");
        for (s, x) in &self.samples {
            match x {
                DiagramPoint::Proper { u, v } => out.push_str(&format!("{s},{u},{v}\n")),
                DiagramPoint::Improper { u } => out.push_str(&format!("{s},{u},inf\n")),
                DiagramPoint::Diagonal => out.push_str(&format!("{s},diag,diag\n")),
            }
        }
        out
    }

    pub fn end(&self) -> DiagramPoint {
        self.samples.last().expect("tracks are never empty").1
    }
}

/// A permutation of `0..n`, `p[i]` being the image of `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation(pub Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Inconsistent(format!("{images:?} is not a permutation")));
            }
        }
        Ok(Self(images))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Self(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Points moved by the permutation.
    pub fn support(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(i, j)| i != *j).map(|(i, _)| i).collect()
    }

    pub fn is_transposition(&self) -> bool {
        let s = self.support();
        s.len() == 2 && self.0[s[0]] == s[1]
    }
}

impl fmt::Display for Permutation {
    /// Cycle notation, `()` for the identity.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut seen = vec![false; self.0.len()];
        let mut any = false;
        for start in 0..self.0.len() {
            if seen[start] || self.0[start] == start {
                continue;
            }
            any = true;
            write!(f, "(")?;
            let mut i = start;
            let mut first = true;
            while !seen[i] {
                seen[i] = true;
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{i}")?;
                first = false;
                i = self.0[i];
            }
            write!(f, ")")?;
        }
        if !any {
            write!(f, "()")?;
        }
        Ok(())
    }
}

/// Where every start point ends up: `map[i]` indexes the end diagram.
#[derive(Clone, Debug)]
pub struct TransportTable {
    pub start: Arc<PersistenceDiagram>,
    pub end: Arc<PersistenceDiagram>,
    pub map: Vec<usize>,
}

impl TransportTable {
    /// Reads a table between equal-size diagrams as a permutation of indices.
    pub fn as_permutation(&self) -> Result<Permutation> {
        Permutation::from_images(self.map.clone())
    }

    /// `then ∘ self`; `then` must start where `self` ends.
    pub fn then(&self, then: &TransportTable) -> TransportTable {
        TransportTable {
            start: Arc::clone(&self.start),
            end: Arc::clone(&then.end),
            map: self.map.iter().map(|&i| then.map[i]).collect(),
        }
    }

    pub fn inverse(&self) -> TransportTable {
        let mut inv = vec![0; self.map.len()];
        for (i, &j) in self.map.iter().enumerate() {
            inv[j] = i;
        }
        TransportTable { start: Arc::clone(&self.end), end: Arc::clone(&self.start), map: inv }
    }

    pub fn identity(d: Arc<PersistenceDiagram>) -> TransportTable {
        TransportTable { map: (0..d.len()).collect(), start: Arc::clone(&d), end: d }
    }
}

enum StepOutcome {
    /// `motion` is the largest move as a fraction of the allowed one.
    Accepted { assign: Vec<usize>, motion: f64 },
    Ambiguous,
    Violation(String),
}

/// Continues `current` (indices into `cur`) into `next`.
fn try_step(
    cur: &PersistenceDiagram,
    tracked: &[usize],
    next: &PersistenceDiagram,
    all_tracked: bool,
    cfg: &TransportConfig,
) -> StepOutcome {
    let c_glob = cfg.separation;
    let c = if cfg.local_separation { c_glob.max(0.5 * diagram_gap(cur).min(diagram_gap(next))) } else { c_glob };
    let mut motion: f64 = 0.0;
    let mut claimed = vec![false; next.len()];
    let mut assign = Vec::with_capacity(tracked.len());
    for &i in tracked {
        let y = cur.get(i);
        let mut best = (f64::INFINITY, usize::MAX);
        let mut second = point_distance(&y, &DiagramPoint::Diagonal);
        for (j, z) in next.points().iter().enumerate() {
            let d = point_distance(&y, z);
            if d < best.0 {
                second = second.min(best.0);
                best = (d, j);
            } else {
                second = second.min(d);
            }
        }
        if best.1 == usize::MAX {
            return StepOutcome::Violation("the diagram lost every point".into());
        }
        let to_diag = point_distance(&next.get(best.1), &DiagramPoint::Diagonal);
        if to_diag < c_glob {
            return StepOutcome::Violation(format!("a tracked point is within {to_diag:.3e} of the diagonal"));
        }
        if !(best.0 < cfg.safety_factor * c && second > c) || claimed[best.1] {
            return StepOutcome::Ambiguous;
        }
        claimed[best.1] = true;
        motion = motion.max(best.0 / (cfg.safety_factor * c));
        assign.push(best.1);
    }
    if all_tracked {
        if let Some(j) = claimed.iter().position(|c| !c) {
            let to_diag = point_distance(&next.get(j), &DiagramPoint::Diagonal);
            if to_diag < c_glob {
                return StepOutcome::Violation(format!("a point appeared within {to_diag:.3e} of the diagonal"));
            }
            return StepOutcome::Ambiguous;
        }
    } else {
        // Untracked points are not checked one by one, so verify the whole
        // diagram moved little.
        match bottleneck_distance(cur, next) {
            Ok((d, _)) if d < cfg.safety_factor * c => motion = motion.max(d / (cfg.safety_factor * c)),
            _ => return StepOutcome::Ambiguous,
        }
    }
    StepOutcome::Accepted { assign, motion }
}

/// First-step fraction from the step constant at the path start.
fn seeded_step(src: &dyn DiagramSource, path: &ParamPath, cfg: &TransportConfig) -> f64 {
    let p = path.start();
    let target = cfg.safety_factor * cfg.separation;
    let mut eps = 0.5 * p.a.min(1.0 - p.a);
    while eps > 1e-12 {
        match oldbound_constant(src.sup_norm(), p, eps) {
            Some(k) if eps * k <= target => break,
            _ => eps *= 0.5,
        }
    }
    // Sup-norm parameter displacement never exceeds arc length.
    (eps / path.length()).max(cfg.min_step)
}

struct Sweep {
    start: Arc<PersistenceDiagram>,
    end: Arc<PersistenceDiagram>,
    /// End index of each tracked start point.
    map: Vec<usize>,
    tracks: Vec<Vec<(f64, DiagramPoint)>>,
    /// Parameter length of the last accepted step.
    last_step_length: f64,
}

fn sweep(
    src: &dyn DiagramSource,
    path: &ParamPath,
    cfg: &TransportConfig,
    tracked: Option<&[usize]>,
    record: bool,
    first_step_length: Option<f64>,
) -> Result<Sweep> {
    cfg.validate()?;
    let start = src.diagram(path.start())?;
    let tracked: Vec<usize> = tracked.map(|t| t.to_vec()).unwrap_or_else(|| (0..start.len()).collect());
    let all_tracked = tracked.len() == start.len();
    let mut tracks: Vec<Vec<(f64, DiagramPoint)>> =
        if record { tracked.iter().map(|&i| vec![(0.0, start.get(i))]).collect() } else { vec![] };
    let length = path.length();
    if length == 0.0 {
        for t in &mut tracks {
            let x = t[0].1;
            t.push((1.0, x));
        }
        return Ok(Sweep { map: tracked, end: Arc::clone(&start), start, tracks, last_step_length: 0.0 });
    }
    let h_max = (cfg.max_step_length / length).min(1.0);
    let first = match first_step_length {
        Some(l) if l > 0.0 => l / length,
        _ => seeded_step(src, path, cfg),
    };
    let mut h = cfg.initial_step.min(h_max).min(first);
    let mut last = 0.0;
    let mut s = 0.0;
    let mut cur = Arc::clone(&start);
    let mut pos: Vec<usize> = tracked.clone();
    while s < 1.0 {
        let mut t = s + h;
        if t > 1.0 - 0.5 * cfg.min_step {
            t = 1.0;
        }
        let p = path.point_at(t);
        let next = src.diagram(p)?;
        match try_step(&cur, &pos, &next, all_tracked, cfg) {
            StepOutcome::Accepted { assign, motion } => {
                if record {
                    for (k, &j) in assign.iter().enumerate() {
                        tracks[k].push((t, next.get(j)));
                    }
                }
                pos = assign;
                cur = next;
                last = (t - s) * length;
                s = t;
                // Aim the next step at about 70% of the allowed motion.
                let grow = if motion > 0.0 { (0.7 / motion).clamp(0.5, 2.0) } else { 2.0 };
                h = (grow * h).min(h_max).max(cfg.min_step);
            }
            StepOutcome::Ambiguous => {
                h *= 0.5;
                if h < cfg.min_step {
                    return Err(Error::SingularityEncountered { at: p, s: t });
                }
            }
            StepOutcome::Violation(reason) => return Err(Error::RegionViolation { at: p, s: t, reason }),
        }
    }
    Ok(Sweep { start, end: cur, map: pos, tracks, last_step_length: last })
}

fn locate(d: &PersistenceDiagram, x: &DiagramPoint) -> Result<usize> {
    d.points()
        .iter()
        .enumerate()
        .map(|(i, y)| (point_distance(x, y), i))
        .filter(|(dist, _)| *dist <= MEMBERSHIP_TOLERANCE)
        .min_by(|p, q| p.0.total_cmp(&q.0))
        .map(|(_, i)| i)
        .ok_or_else(|| Error::NotInDiagram(x.to_string()))
}

/// Transports a single point, returning its end position and track.
pub fn transport_point_in(
    src: &dyn DiagramSource,
    path: &ParamPath,
    x: DiagramPoint,
    cfg: &TransportConfig,
) -> Result<(DiagramPoint, PointTrack)> {
    if x == DiagramPoint::Diagonal {
        let samples = vec![(0.0, x), (1.0, x)];
        return Ok((x, PointTrack { path: path.clone(), samples }));
    }
    let start = src.diagram(path.start())?;
    let i = locate(&start, &x)?;
    let sw = sweep(src, path, cfg, Some(&[i]), true, None)?;
    let samples = sw.tracks.into_iter().next().expect("one track");
    Ok((sw.end.get(sw.map[0]), PointTrack { path: path.clone(), samples }))
}

pub fn transport_point(
    bif: &SimplicialBifiltration,
    degree: usize,
    path: &ParamPath,
    x: DiagramPoint,
    cfg: &TransportConfig,
) -> Result<(DiagramPoint, PointTrack)> {
    transport_point_in(&SliceSource::new(bif, degree), path, x, cfg)
}

/// Sequential sweep transporting every point together.
pub fn transport_diagram_in(src: &dyn DiagramSource, path: &ParamPath, cfg: &TransportConfig) -> Result<TransportTable> {
    Ok(transport_diagram_warm(src, path, cfg, None)?.0)
}

/// Like [`transport_diagram_in`], but the first step has the given parameter
/// length instead of the seeded one (every step is still verified). Returns
/// the length of the last accepted step, to warm-start an adjoining path.
pub fn transport_diagram_warm(
    src: &dyn DiagramSource,
    path: &ParamPath,
    cfg: &TransportConfig,
    first_step_length: Option<f64>,
) -> Result<(TransportTable, f64)> {
    let sw = sweep(src, path, cfg, None, false, first_step_length)?;
    check_bijection(&sw.map, &sw.end)?;
    Ok((TransportTable { start: sw.start, end: sw.end, map: sw.map }, sw.last_step_length))
}

/// Each point tracked on its own, in parallel. Agrees with
/// [`transport_diagram_in`] whenever the path stays in a separated region.
pub fn transport_diagram_independent(
    src: &dyn DiagramSource,
    path: &ParamPath,
    cfg: &TransportConfig,
) -> Result<TransportTable> {
    let start = src.diagram(path.start())?;
    let end = src.diagram(path.end())?;
    let map: Vec<usize> = (0..start.len())
        .into_par_iter()
        .map(|i| {
            let (y, _) = transport_point_in(src, path, start.get(i), cfg)?;
            locate(&end, &y)
        })
        .collect::<Result<_>>()?;
    check_bijection(&map, &end)?;
    Ok(TransportTable { start, end, map })
}

fn check_bijection(map: &[usize], end: &PersistenceDiagram) -> Result<()> {
    if map.len() != end.len() {
        return Err(Error::Inconsistent(format!(
            "transport sends {} points onto a diagram with {}",
            map.len(),
            end.len()
        )));
    }
    Permutation::from_images(map.to_vec()).map(|_| ())
}

pub fn transport_diagram(
    bif: &SimplicialBifiltration,
    degree: usize,
    path: &ParamPath,
    cfg: &TransportConfig,
) -> Result<TransportTable> {
    transport_diagram_in(&SliceSource::new(bif, degree), path, cfg)
}

/// `T_g ∘ σ ∘ T_f⁻¹` given both transport tables.
pub fn compose_matching(tf: &TransportTable, tg: &TransportTable, sigma: &Matching) -> Matching {
    Matching::new(
        sigma.pairs.iter().map(|&(i, j)| (tf.map[i], tg.map[j])).collect(),
        sigma.left_to_delta.iter().map(|&i| tf.map[i]).collect(),
        sigma.right_to_delta.iter().map(|&j| tg.map[j]).collect(),
    )
}

pub fn transport_matching_in(
    src_f: &dyn DiagramSource,
    src_g: &dyn DiagramSource,
    path: &ParamPath,
    sigma: &Matching,
    cfg: &TransportConfig,
) -> Result<Matching> {
    let tf = transport_diagram_in(src_f, path, cfg)?;
    let tg = transport_diagram_in(src_g, path, cfg)?;
    sigma.validate(&tf.start, &tg.start)?;
    Ok(compose_matching(&tf, &tg, sigma))
}

pub fn transport_matching(
    f: &SimplicialBifiltration,
    g: &SimplicialBifiltration,
    degree: usize,
    path: &ParamPath,
    sigma: &Matching,
    cfg: &TransportConfig,
) -> Result<Matching> {
    transport_matching_in(&SliceSource::new(f, degree), &SliceSource::new(g, degree), path, sigma, cfg)
}

pub fn loop_permutation_in(src: &dyn DiagramSource, lp: &ParamPath, cfg: &TransportConfig) -> Result<Permutation> {
    if !lp.is_closed() {
        return Err(Error::Geometry("loop must start and end at the same point".into()));
    }
    transport_diagram_in(src, lp, cfg)?.as_permutation()
}

pub fn loop_permutation(
    bif: &SimplicialBifiltration,
    degree: usize,
    lp: &ParamPath,
    cfg: &TransportConfig,
) -> Result<Permutation> {
    loop_permutation_in(&SliceSource::new(bif, degree), lp, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two points circling each other as the parameter winds around
    /// `(0.5, 0)`: `(u, v) = (±ρ cos θ/2, 4 ± ρ sin θ/2)` style half-angle
    /// motion, so one turn swaps them.
    pub(crate) struct Swirl;

    impl DiagramSource for Swirl {
        fn degree(&self) -> usize {
            0
        }
        fn diagram(&self, p: ParamPoint) -> Result<Arc<PersistenceDiagram>> {
            let (x, y) = (p.a - 0.5, p.b);
            let r = (x * x + y * y).sqrt();
            let half = y.atan2(x) / 2.0;
            let (du, dv) = (r * half.cos(), r * half.sin());
            let pts = vec![DiagramPoint::proper(-du, 4.0 - dv), DiagramPoint::proper(du, 4.0 + dv)];
            Ok(Arc::new(PersistenceDiagram::new(0, pts)?))
        }
        fn sup_norm(&self) -> f64 {
            5.0
        }
    }

    fn square(c: ParamPoint, h: f64) -> ParamPath {
        let p = |x: f64, y: f64| ParamPoint { a: c.a + x * h, b: c.b + y * h };
        ParamPath::new(vec![p(1.0, 0.0), p(1.0, 1.0), p(-1.0, 1.0), p(-1.0, -1.0), p(1.0, -1.0), p(1.0, 0.0)]).unwrap()
    }

    #[test]
    fn permutation_algebra() {
        let p = Permutation::from_images(vec![1, 2, 0]).unwrap();
        assert_eq!(p.compose(&p.inverse()), Permutation::identity(3));
        assert!(!p.is_transposition());
        let t = Permutation::from_images(vec![0, 2, 1]).unwrap();
        assert!(t.is_transposition());
        assert!(t.compose(&t).is_identity());
        assert_eq!(p.to_string(), "(0 1 2)");
        assert_eq!(Permutation::identity(2).to_string(), "()");
        assert!(Permutation::from_images(vec![0, 0]).is_err());
    }

    #[test]
    fn swirl_loop_swaps_and_double_loop_does_not() {
        let cfg = TransportConfig::new(0.01);
        let lp = square(ParamPoint { a: 0.5, b: 0.0 }, 0.1);
        let perm = loop_permutation_in(&Swirl, &lp, &cfg).unwrap();
        assert!(perm.is_transposition());
        let twice = lp.concat(&lp).unwrap();
        assert!(loop_permutation_in(&Swirl, &twice, &cfg).unwrap().is_identity());
        // A loop that does not enclose the branch point.
        let off = square(ParamPoint { a: 0.75, b: 0.0 }, 0.1);
        assert!(loop_permutation_in(&Swirl, &off, &cfg).unwrap().is_identity());
    }

    #[test]
    fn sweep_and_independent_modes_agree() {
        let cfg = TransportConfig::new(0.01);
        let lp = square(ParamPoint { a: 0.5, b: 0.0 }, 0.1);
        let a = transport_diagram_in(&Swirl, &lp, &cfg).unwrap();
        let b = transport_diagram_independent(&Swirl, &lp, &cfg).unwrap();
        assert_eq!(a.map, b.map);
    }

    #[test]
    fn constant_path_and_diagonal_are_fixed() {
        let cfg = TransportConfig::new(0.01);
        let p = ParamPoint { a: 0.6, b: 0.1 };
        let path = ParamPath::constant(p).unwrap();
        let d = Swirl.diagram(p).unwrap();
        let (y, track) = transport_point_in(&Swirl, &path, d.get(0), &cfg).unwrap();
        assert_eq!(y, d.get(0));
        assert_eq!(track.samples.first().unwrap().1, d.get(0));
        let lp = square(ParamPoint { a: 0.5, b: 0.0 }, 0.1);
        let (y, track) = transport_point_in(&Swirl, &lp, DiagramPoint::Diagonal, &cfg).unwrap();
        assert_eq!(y, DiagramPoint::Diagonal);
        assert!(track.samples.iter().all(|(_, x)| *x == DiagramPoint::Diagonal));
        assert!(track.to_csv().contains("diag,diag"));
    }

    #[test]
    fn point_not_in_diagram_is_rejected() {
        let cfg = TransportConfig::new(0.01);
        let path = ParamPath::constant(ParamPoint { a: 0.6, b: 0.1 }).unwrap();
        let err = transport_point_in(&Swirl, &path, DiagramPoint::proper(100.0, 200.0), &cfg).unwrap_err();
        assert!(matches!(err, Error::NotInDiagram(_)));
    }

    #[test]
    fn crossing_the_branch_point_is_singular() {
        let cfg = TransportConfig::new(0.01);
        let path = ParamPath::straight(ParamPoint { a: 0.4, b: 0.0 }, ParamPoint { a: 0.6, b: 0.0 }).unwrap();
        let err = transport_diagram_in(&Swirl, &path, &cfg).unwrap_err();
        assert!(matches!(err, Error::SingularityEncountered { .. }), "{err}");
    }

    #[test]
    fn track_steps_respect_the_contract() {
        let cfg = TransportConfig { local_separation: false, ..TransportConfig::new(0.01) };
        let lp = square(ParamPoint { a: 0.5, b: 0.0 }, 0.1);
        let d = Swirl.diagram(lp.start()).unwrap();
        let (_, track) = transport_point_in(&Swirl, &lp, d.get(1), &cfg).unwrap();
        for w in track.samples.windows(2) {
            assert!(point_distance(&w[0].1, &w[1].1) < cfg.safety_factor * cfg.separation);
        }
        assert_eq!(track.samples.last().unwrap().0, 1.0);
    }

    #[test]
    fn oldbound_constant_domain() {
        let p = ParamPoint { a: 0.5, b: 1.0 };
        assert_eq!(oldbound_constant(2.0, p, 0.0), Some(3.5 / 0.25));
        assert!(oldbound_constant(2.0, p, 0.5).is_none());
        let path = ParamPath::straight(p, ParamPoint { a: 0.25, b: 1.0 }).unwrap();
        let c = c_eta(2.0, &path, 0.1).unwrap();
        assert!(c >= oldbound_constant(2.0, ParamPoint { a: 0.25, b: 1.0 }, 0.1).unwrap() - 1e-12);
        assert!(c_eta(2.0, &path, 0.3).is_err());
    }
}
