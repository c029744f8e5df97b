//! Brute-force reference implementations shared by the integration tests.
//! Nothing here calls into the library's algorithms; inputs and outputs use
//! the library's data types only.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use cohmatch::bifiltration::{ParamPoint, SimplicialBifiltration};
use cohmatch::persistence::{DiagramPoint, PersistenceDiagram};
use rand::Rng;

/// Extended distance between two diagram elements, `None` standing for the
/// diagonal.
pub fn reference_distance(x: Option<DiagramPoint>, y: Option<DiagramPoint>) -> f64 {
    let half = |p: DiagramPoint| match p {
        DiagramPoint::Proper { u, v } => (v - u) / 2.0,
        _ => f64::INFINITY,
    };
    match (x, y) {
        (None, None) => 0.0,
        (Some(p), None) | (None, Some(p)) => half(p),
        (Some(DiagramPoint::Improper { u }), Some(DiagramPoint::Improper { u: w })) => (u - w).abs(),
        (Some(p @ DiagramPoint::Proper { u, v }), Some(q @ DiagramPoint::Proper { u: s, v: t })) => {
            let direct = (u - s).abs().max((v - t).abs());
            direct.min(half(p).max(half(q)))
        }
        _ => f64::INFINITY,
    }
}

/// Minimum over every partial bijection of the largest matched distance.
pub fn reference_bottleneck(left: &[DiagramPoint], right: &[DiagramPoint]) -> f64 {
    fn rec(i: usize, left: &[DiagramPoint], right: &[DiagramPoint], used: &mut Vec<bool>, worst: f64, best: &mut f64) {
        if worst >= *best {
            return;
        }
        if i == left.len() {
            let rest = right
                .iter()
                .zip(used.iter())
                .filter(|(_, &u)| !u)
                .map(|(q, _)| reference_distance(None, Some(*q)))
                .fold(worst, f64::max);
            *best = best.min(rest);
            return;
        }
        rec(i + 1, left, right, used, worst.max(reference_distance(Some(left[i]), None)), best);
        for j in 0..right.len() {
            if !used[j] {
                used[j] = true;
                rec(i + 1, left, right, used, worst.max(reference_distance(Some(left[i]), Some(right[j]))), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(0, left, right, &mut vec![false; right.len()], 0.0, &mut best);
    best
}

/// Random diagram on a coarse dyadic lattice, so that ties are frequent and
/// every distance is computed exactly.
pub fn random_diagram(rng: &mut impl Rng, degree: usize, max_points: usize, improper: usize) -> PersistenceDiagram {
    let n = rng.gen_range(0..=max_points);
    let mut pts = Vec::new();
    for i in 0..n {
        let u = rng.gen_range(0..24) as f64 / 4.0;
        if i < improper {
            pts.push(DiagramPoint::Improper { u });
        } else {
            let v = u + rng.gen_range(1..12) as f64 / 4.0;
            pts.push(DiagramPoint::Proper { u, v });
        }
    }
    PersistenceDiagram::new(degree, pts).unwrap()
}

/// Rank over the two-element field of vectors packed into `u64` words.
pub fn rank_mod2(mut rows: Vec<u64>) -> usize {
    let mut rank = 0;
    for bit in (0..64).rev() {
        let mask = 1u64 << bit;
        let Some(pos) = rows.iter().position(|r| r & mask != 0) else { continue };
        let pivot = rows.swap_remove(pos);
        for r in rows.iter_mut() {
            if *r & mask != 0 {
                *r ^= pivot;
            }
        }
        rank += 1;
    }
    rank
}

/// Slice value computed from its definition.
pub fn reference_slice_value(f1: f64, f2: f64, p: ParamPoint) -> f64 {
    let (a, b) = (p.a, p.b);
    a.min(1.0 - a) * ((f1 - b) / a).max((f2 + b) / (1.0 - a))
}

/// A filtered complex in a form independent of the library.
pub struct ReferenceFiltration {
    /// Sorted vertex lists.
    pub simplices: Vec<Vec<usize>>,
    pub values: Vec<f64>,
    index: HashMap<Vec<usize>, usize>,
}

impl ReferenceFiltration {
    pub fn new(bif: &SimplicialBifiltration, p: ParamPoint) -> Self {
        let simplices: Vec<Vec<usize>> = bif
            .simplices()
            .iter()
            .map(|s| {
                let mut s = s.clone();
                s.sort_unstable();
                s
            })
            .collect();
        let vertex_values: Vec<f64> = bif.values().iter().map(|v| reference_slice_value(v[0], v[1], p)).collect();
        let values = simplices.iter().map(|s| s.iter().map(|&v| vertex_values[v]).fold(f64::NEG_INFINITY, f64::max)).collect();
        let index = simplices.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Self { simplices, values, index }
    }

    fn of_dim(&self, k: usize) -> Vec<usize> {
        (0..self.simplices.len()).filter(|&i| self.simplices[i].len() == k + 1).collect()
    }

    /// Boundary of simplex `s` as a bit mask over the simplices listed in
    /// `basis`.
    fn boundary_mask(&self, s: usize, basis: &HashMap<usize, usize>) -> u64 {
        let verts = &self.simplices[s];
        if verts.len() == 1 {
            return 0;
        }
        let mut mask = 0;
        for drop in 0..verts.len() {
            let face: Vec<usize> = verts.iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, &v)| v).collect();
            mask |= 1u64 << basis[&self.index[&face]];
        }
        mask
    }

    /// Rank of `H_k(K_u) -> H_k(K_v)`: `dim Z_k(K_u)` minus the dimension of
    /// the boundaries of `K_v` that lie in `K_u`.
    pub fn betti(&self, k: usize, u: f64, v: f64) -> usize {
        let ks = self.of_dim(k);
        assert!(ks.len() <= 64);
        let k_basis: HashMap<usize, usize> = ks.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let in_u: Vec<usize> = ks.iter().copied().filter(|&s| self.values[s] <= u).collect();
        let z = if k == 0 {
            in_u.len()
        } else {
            let km1: HashMap<usize, usize> = self.of_dim(k - 1).into_iter().enumerate().map(|(i, s)| (s, i)).collect();
            in_u.len() - rank_mod2(in_u.iter().map(|&s| self.boundary_mask(s, &km1)).collect())
        };
        let u_mask: u64 = in_u.iter().map(|s| 1u64 << k_basis[s]).fold(0, |a, b| a | b);
        let bounds: Vec<u64> =
            self.of_dim(k + 1).into_iter().filter(|&t| self.values[t] <= v).map(|t| self.boundary_mask(t, &k_basis)).collect();
        let rb = rank_mod2(bounds.clone());
        let outside = rank_mod2(bounds.into_iter().map(|m| m & !u_mask).collect());
        z - (rb - outside)
    }

    pub fn distinct_values(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn dimension(&self) -> usize {
        self.simplices.iter().map(|s| s.len() - 1).max().unwrap_or(0)
    }
}

/// Random complex on at most seven vertices with at most `max_simplices`
/// simplices, with small integer vertex values so that ties occur.
pub fn random_complex(rng: &mut impl Rng, max_simplices: usize) -> SimplicialBifiltration {
    let n = rng.gen_range(3..=7);
    let values: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen_range(0..5) as f64, rng.gen_range(0..5) as f64]).collect();
    let mut set: BTreeSet<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    for _ in 0..30 {
        let dim = rng.gen_range(1..=3usize).min(n - 1);
        let mut verts = BTreeSet::new();
        while verts.len() < dim + 1 {
            verts.insert(rng.gen_range(0..n));
        }
        let verts: Vec<usize> = verts.into_iter().collect();
        let faces: Vec<Vec<usize>> = (1u32..(1 << verts.len()))
            .map(|m| verts.iter().enumerate().filter(|(i, _)| m & (1 << i) != 0).map(|(_, &v)| v).collect())
            .collect();
        let added = faces.iter().filter(|f| !set.contains(*f)).count();
        if set.len() + added <= max_simplices {
            set.extend(faces);
        }
    }
    SimplicialBifiltration::new("random", values, set.into_iter().collect()).unwrap()
}
