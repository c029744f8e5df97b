//! The extended metric on diagram points, matchings and bottleneck distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::persistence::{DiagramPoint, PersistenceDiagram};

/// Default bound on `|D1| + |D2|` for exhaustive matching enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 12;

/// `d(X, Y) = min{max(|u-u'|, |v-v'|), max((v-u)/2, (v'-u')/2)}` extended to
/// points at infinity and to the diagonal element.
pub fn point_distance(x: &DiagramPoint, y: &DiagramPoint) -> f64 {
    use DiagramPoint::*;
    match (*x, *y) {
        (Diagonal, Diagonal) => 0.0,
        (Proper { u, v }, Diagonal) | (Diagonal, Proper { u, v }) => (v - u) / 2.0,
        (Improper { .. }, Diagonal) | (Diagonal, Improper { .. }) => f64::INFINITY,
        (Improper { u }, Improper { u: w }) => (u - w).abs(),
        (Improper { .. }, Proper { .. }) | (Proper { .. }, Improper { .. }) => f64::INFINITY,
        (Proper { u, v }, Proper { u: u2, v: v2 }) => {
            let direct = (u - u2).abs().max((v - v2).abs());
            let via_diagonal = ((v - u) / 2.0).max((v2 - u2) / 2.0);
            direct.min(via_diagonal)
        }
    }
}

/// Sup-norm distance in the plane, `|u-u'|` for two points at infinity.
/// Infinite when kinds differ.
pub fn point_sup_distance(x: &DiagramPoint, y: &DiagramPoint) -> f64 {
    use DiagramPoint::*;
    match (*x, *y) {
        (Diagonal, Diagonal) => 0.0,
        (Improper { u }, Improper { u: w }) => (u - w).abs(),
        (Proper { u, v }, Proper { u: u2, v: v2 }) => (u - u2).abs().max((v - v2).abs()),
        _ => f64::INFINITY,
    }
}

/// A bijection between two diagrams extended by the diagonal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    pub left_to_delta: Vec<usize>,
    pub right_to_delta: Vec<usize>,
}

/// Which matched pair realizes a cost.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatchedPair {
    Points(usize, usize),
    LeftToDelta(usize),
    RightToDelta(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchingCost {
    pub value: f64,
    pub argmax_pair: Option<MatchedPair>,
}

impl Matching {
    /// Builds and canonicalizes (sorted lists).
    pub fn new(mut pairs: Vec<(usize, usize)>, mut left_to_delta: Vec<usize>, mut right_to_delta: Vec<usize>) -> Self {
        pairs.sort_unstable();
        left_to_delta.sort_unstable();
        right_to_delta.sort_unstable();
        Self { pairs, left_to_delta, right_to_delta }
    }

    /// The identity matching of a diagram with `n` points onto itself.
    pub fn identity(n: usize) -> Self {
        Self::new((0..n).map(|i| (i, i)).collect(), vec![], vec![])
    }

    pub fn inverse(&self) -> Self {
        Self::new(
            self.pairs.iter().map(|&(i, j)| (j, i)).collect(),
            self.right_to_delta.clone(),
            self.left_to_delta.clone(),
        )
    }

    /// Image of left point `i`, `None` meaning the diagonal.
    pub fn image_of(&self, i: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == i).map(|p| p.1)
    }

    /// Checks that every point of both diagrams appears exactly once.
    pub fn validate(&self, left: &PersistenceDiagram, right: &PersistenceDiagram) -> Result<()> {
        if left.degree() != right.degree() {
            return Err(Error::DegreeMismatch(left.degree(), right.degree()));
        }
        let mut seen_l = vec![false; left.len()];
        let mut seen_r = vec![false; right.len()];
        let mark = |seen: &mut Vec<bool>, i: usize, side: &str| -> Result<()> {
            match seen.get_mut(i) {
                None => Err(Error::InvalidMatching(format!("{side} index {i} out of range"))),
                Some(true) => Err(Error::InvalidMatching(format!("{side} index {i} used twice"))),
                Some(s) => {
                    *s = true;
                    Ok(())
                }
            }
        };
        for &(i, j) in &self.pairs {
            mark(&mut seen_l, i, "left")?;
            mark(&mut seen_r, j, "right")?;
        }
        for &i in &self.left_to_delta {
            mark(&mut seen_l, i, "left")?;
        }
        for &j in &self.right_to_delta {
            mark(&mut seen_r, j, "right")?;
        }
        if let Some(i) = seen_l.iter().position(|s| !s) {
            return Err(Error::InvalidMatching(format!("left point {i} is unmatched")));
        }
        if let Some(j) = seen_r.iter().position(|s| !s) {
            return Err(Error::InvalidMatching(format!("right point {j} is unmatched")));
        }
        Ok(())
    }
}

/// `max d(X, σ(X))` over the matching, diagonal matches included. The
/// argmax is the first pair attaining the maximum.
pub fn matching_cost(m: &Matching, left: &PersistenceDiagram, right: &PersistenceDiagram) -> MatchingCost {
    let mut best = MatchingCost { value: 0.0, argmax_pair: None };
    let mut consider = |d: f64, which: MatchedPair| {
        if best.argmax_pair.is_none() || d > best.value {
            best = MatchingCost { value: d, argmax_pair: Some(which) };
        }
    };
    for &(i, j) in &m.pairs {
        consider(point_distance(&left.get(i), &right.get(j)), MatchedPair::Points(i, j));
    }
    for &i in &m.left_to_delta {
        consider(point_distance(&left.get(i), &DiagramPoint::Diagonal), MatchedPair::LeftToDelta(i));
    }
    for &j in &m.right_to_delta {
        consider(point_distance(&DiagramPoint::Diagonal, &right.get(j)), MatchedPair::RightToDelta(j));
    }
    best
}

/// Bipartite graph for threshold feasibility. Left nodes: left points then
/// one diagonal copy per right point. Right nodes: right points then one
/// diagonal copy per left point.
struct Feasibility<'a> {
    left: &'a [DiagramPoint],
    right: &'a [DiagramPoint],
    dist: Vec<Vec<f64>>,
    to_delta_l: Vec<f64>,
    to_delta_r: Vec<f64>,
}

impl<'a> Feasibility<'a> {
    fn new(d1: &'a PersistenceDiagram, d2: &'a PersistenceDiagram) -> Self {
        let (left, right) = (d1.points(), d2.points());
        let dist = left.iter().map(|x| right.iter().map(|y| point_distance(x, y)).collect()).collect();
        let to_delta_l = left.iter().map(|x| point_distance(x, &DiagramPoint::Diagonal)).collect();
        let to_delta_r = right.iter().map(|y| point_distance(&DiagramPoint::Diagonal, y)).collect();
        Self { left, right, dist, to_delta_l, to_delta_r }
    }

    fn edge(&self, l: usize, r: usize, t: f64) -> bool {
        let (n1, n2) = (self.left.len(), self.right.len());
        match (l < n1, r < n2) {
            (true, true) => self.dist[l][r] <= t,
            (true, false) => r - n2 == l && self.to_delta_l[l] <= t,
            (false, true) => l - n1 == r && self.to_delta_r[r] <= t,
            (false, false) => true,
        }
    }

    /// Perfect matching at threshold `t`, as `match_of_left`.
    fn perfect(&self, t: f64) -> Option<Vec<usize>> {
        let n = self.left.len() + self.right.len();
        let mut match_r: Vec<Option<usize>> = vec![None; n];
        for l in 0..n {
            let mut visited = vec![false; n];
            if !self.augment(l, t, &mut visited, &mut match_r) {
                return None;
            }
        }
        let mut match_l = vec![0; n];
        for (r, l) in match_r.iter().enumerate() {
            match_l[l.expect("perfect")] = r;
        }
        Some(match_l)
    }

    fn augment(&self, l: usize, t: f64, visited: &mut [bool], match_r: &mut [Option<usize>]) -> bool {
        for r in 0..match_r.len() {
            if visited[r] || !self.edge(l, r, t) {
                continue;
            }
            visited[r] = true;
            if match_r[r].is_none() || self.augment(match_r[r].unwrap(), t, visited, match_r) {
                match_r[r] = Some(l);
                return true;
            }
        }
        false
    }

    fn to_matching(&self, match_l: &[usize]) -> Matching {
        let (n1, n2) = (self.left.len(), self.right.len());
        let mut pairs = Vec::new();
        let mut ld = Vec::new();
        let mut rd = Vec::new();
        for (l, &r) in match_l.iter().enumerate() {
            if l < n1 {
                if r < n2 {
                    pairs.push((l, r));
                } else {
                    ld.push(l);
                }
            } else if r < n2 {
                rd.push(r);
            }
        }
        Matching::new(pairs, ld, rd)
    }
}

/// Bottleneck distance and an optimal matching. Candidate thresholds are the
/// finite values of `d` between points and to the diagonal; the smallest
/// feasible one is found by binary search. When no finite threshold admits a
/// perfect matching the distance is infinite and some matching is returned.
pub fn bottleneck_distance(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<(f64, Matching)> {
    if d1.degree() != d2.degree() {
        return Err(Error::DegreeMismatch(d1.degree(), d2.degree()));
    }
    let feas = Feasibility::new(d1, d2);
    let mut cands: Vec<f64> = std::iter::once(0.0)
        .chain(feas.dist.iter().flatten().copied())
        .chain(feas.to_delta_l.iter().copied())
        .chain(feas.to_delta_r.iter().copied())
        .filter(|x| x.is_finite())
        .collect();
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let (mut lo, mut hi) = (0usize, cands.len());
    // Invariant: candidates below lo are infeasible; hi is feasible or len.
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feas.perfect(cands[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    if lo < cands.len() {
        let m = feas.perfect(cands[lo]).expect("feasible threshold");
        Ok((cands[lo], feas.to_matching(&m)))
    } else {
        let m = feas.perfect(f64::INFINITY).expect("complete graph has a perfect matching");
        Ok((f64::INFINITY, feas.to_matching(&m)))
    }
}

/// All injections of `0..k` into `0..n`, in lexicographic order.
fn injections(k: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                rec(k, n, cur, used, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(k, n, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// All partial injections of `0..k` into `0..n` (`None` = diagonal).
fn partial_injections(k: usize, n: usize) -> Vec<Vec<Option<usize>>> {
    fn rec(k: usize, n: usize, cur: &mut Vec<Option<usize>>, used: &mut [bool], out: &mut Vec<Vec<Option<usize>>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        cur.push(None);
        rec(k, n, cur, used, out);
        cur.pop();
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                cur.push(Some(j));
                rec(k, n, cur, used, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(k, n, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

pub fn enumerate_matchings(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<Vec<Matching>> {
    enumerate_matchings_capped(d1, d2, DEFAULT_ENUMERATION_CAP)
}

/// Every matching between the diagrams. Points at infinity are matched among
/// themselves (a bijection when counts agree, otherwise an injection of the
/// smaller set with the excess sent to the diagonal, which costs `∞`); proper
/// points range over all partial injections.
pub fn enumerate_matchings_capped(d1: &PersistenceDiagram, d2: &PersistenceDiagram, cap: usize) -> Result<Vec<Matching>> {
    if d1.degree() != d2.degree() {
        return Err(Error::DegreeMismatch(d1.degree(), d2.degree()));
    }
    let total = d1.len() + d2.len();
    if total > cap {
        return Err(Error::CapExceeded { points: total, cap });
    }
    let split = |d: &PersistenceDiagram| -> (Vec<usize>, Vec<usize>) {
        (0..d.len()).partition(|&i| d.get(i).is_improper())
    };
    let (i1, p1) = split(d1);
    let (i2, p2) = split(d2);
    let swap = i1.len() > i2.len();
    let improper: Vec<(Vec<(usize, usize)>, Vec<usize>, Vec<usize>)> = if !swap {
        injections(i1.len(), i2.len())
            .into_iter()
            .map(|inj| {
                let pairs: Vec<_> = inj.iter().enumerate().map(|(a, &b)| (i1[a], i2[b])).collect();
                let rest = (0..i2.len()).filter(|b| !inj.contains(b)).map(|b| i2[b]).collect();
                (pairs, vec![], rest)
            })
            .collect()
    } else {
        injections(i2.len(), i1.len())
            .into_iter()
            .map(|inj| {
                let pairs: Vec<_> = inj.iter().enumerate().map(|(b, &a)| (i1[a], i2[b])).collect();
                let rest = (0..i1.len()).filter(|a| !inj.contains(a)).map(|a| i1[a]).collect();
                (pairs, rest, vec![])
            })
            .collect()
    };
    let proper = partial_injections(p1.len(), p2.len());
    let mut out = Vec::with_capacity(improper.len() * proper.len());
    for (ipairs, ild, ird) in &improper {
        for inj in &proper {
            let mut pairs = ipairs.clone();
            let mut ld = ild.clone();
            let mut rd = ird.clone();
            let mut used = vec![false; p2.len()];
            for (a, t) in inj.iter().enumerate() {
                match t {
                    Some(b) => {
                        used[*b] = true;
                        pairs.push((p1[a], p2[*b]));
                    }
                    None => ld.push(p1[a]),
                }
            }
            rd.extend((0..p2.len()).filter(|&b| !used[b]).map(|b| p2[b]));
            out.push(Matching::new(pairs, ld, rd));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use DiagramPoint::*;

    fn dg(points: Vec<DiagramPoint>) -> PersistenceDiagram {
        PersistenceDiagram::new(0, points).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(point_distance(&Proper { u: 1.0, v: 3.0 }, &Proper { u: 1.0, v: 3.0 }), 0.0);
        assert_eq!(point_distance(&Proper { u: 0.0, v: 1.0 }, &Diagonal), 0.5);
        let d = point_distance(&Proper { u: 0.0, v: 10.0 }, &Proper { u: 0.4, v: 9.8 });
        assert!((d - 0.4).abs() < 1e-15);
        assert_eq!(point_distance(&Improper { u: 1.0 }, &Improper { u: 2.0 }), 1.0);
        assert_eq!(point_distance(&Improper { u: 1.0 }, &Proper { u: 0.0, v: 5.0 }), f64::INFINITY);
        assert_eq!(point_distance(&Improper { u: 1.0 }, &Diagonal), f64::INFINITY);
        assert_eq!(point_distance(&Diagonal, &Diagonal), 0.0);
        // Two short bars are close through the diagonal.
        assert_eq!(point_distance(&Proper { u: 0.0, v: 0.25 }, &Proper { u: 5.0, v: 5.5 }), 0.25);
    }

    #[test]
    fn cost_examples() {
        let d = dg(vec![Proper { u: 0.0, v: 2.0 }]);
        let e = dg(vec![]);
        let m = Matching::new(vec![], vec![0], vec![]);
        m.validate(&d, &e).unwrap();
        assert_eq!(matching_cost(&m, &d, &e).value, 1.0);
        assert_eq!(matching_cost(&Matching::identity(1), &d, &d).value, 0.0);
        assert_eq!(matching_cost(&Matching::identity(0), &e, &e).value, 0.0);
        let i = dg(vec![Improper { u: 0.0 }]);
        let p = dg(vec![Proper { u: 0.0, v: 1.0 }]);
        assert_eq!(matching_cost(&Matching::identity(1), &i, &p).value, f64::INFINITY);
    }

    #[test]
    fn validation_catches_errors() {
        let d = dg(vec![Proper { u: 0.0, v: 2.0 }, Proper { u: 1.0, v: 2.0 }]);
        assert!(Matching::new(vec![(0, 0)], vec![], vec![1]).validate(&d, &d).is_err());
        assert!(Matching::new(vec![(0, 0), (1, 0)], vec![], vec![1]).validate(&d, &d).is_err());
        assert!(Matching::new(vec![(0, 0), (1, 5)], vec![], vec![]).validate(&d, &d).is_err());
        let e = PersistenceDiagram::new(1, vec![]).unwrap();
        assert!(matches!(bottleneck_distance(&d, &e), Err(Error::DegreeMismatch(0, 1))));
    }

    #[test]
    fn bottleneck_examples() {
        let d = dg(vec![Proper { u: 0.0, v: 2.0 }, Improper { u: 1.0 }]);
        assert_eq!(bottleneck_distance(&d, &d).unwrap().0, 0.0);
        let (v, m) = bottleneck_distance(&dg(vec![Proper { u: 0.0, v: 2.0 }]), &dg(vec![])).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(m.left_to_delta, vec![0]);
        let (v, _) = bottleneck_distance(&dg(vec![Improper { u: 0.0 }]), &dg(vec![Improper { u: 3.0 }])).unwrap();
        assert_eq!(v, 3.0);
        let (v, m) = bottleneck_distance(&dg(vec![Improper { u: 0.0 }]), &dg(vec![])).unwrap();
        assert_eq!(v, f64::INFINITY);
        assert_eq!(m.left_to_delta, vec![0]);
        assert_eq!(bottleneck_distance(&dg(vec![]), &dg(vec![])).unwrap().0, 0.0);
    }

    #[test]
    fn enumeration_counts() {
        let e = dg(vec![]);
        assert_eq!(enumerate_matchings(&e, &e).unwrap().len(), 1);
        let p = dg(vec![Proper { u: 0.0, v: 1.0 }]);
        let q = dg(vec![Proper { u: 0.5, v: 2.0 }]);
        assert_eq!(enumerate_matchings(&p, &q).unwrap().len(), 2);
        let p2 = dg(vec![Proper { u: 0.0, v: 1.0 }, Proper { u: 0.2, v: 3.0 }]);
        // Partial injections of two points into one: none, P1->Q, P2->Q.
        assert_eq!(enumerate_matchings(&p2, &q).unwrap().len(), 3);
        let q2 = dg(vec![Proper { u: 0.5, v: 2.0 }, Proper { u: 1.0, v: 4.0 }]);
        assert_eq!(enumerate_matchings(&p2, &q2).unwrap().len(), 7);
        let i2 = dg(vec![Improper { u: 0.0 }, Improper { u: 1.0 }]);
        assert_eq!(enumerate_matchings(&i2, &i2).unwrap().len(), 2);
        for m in enumerate_matchings(&p2, &q2).unwrap() {
            m.validate(&p2, &q2).unwrap();
        }
    }

    #[test]
    fn enumeration_with_improper_mismatch_is_infinite() {
        let a = dg(vec![Improper { u: 0.0 }, Improper { u: 1.0 }, Proper { u: 0.0, v: 1.0 }]);
        let b = dg(vec![Improper { u: 0.5 }]);
        let all = enumerate_matchings(&a, &b).unwrap();
        assert_eq!(all.len(), 2);
        for m in &all {
            m.validate(&a, &b).unwrap();
            assert_eq!(matching_cost(m, &a, &b).value, f64::INFINITY);
        }
    }

    #[test]
    fn enumeration_cap() {
        let many = dg((0..7).map(|i| Proper { u: i as f64, v: i as f64 + 1.0 }).collect());
        assert!(matches!(enumerate_matchings(&many, &many), Err(Error::CapExceeded { points: 14, cap: 12 })));
    }

    #[test]
    fn inverse_swaps_sides() {
        let m = Matching::new(vec![(0, 1)], vec![2], vec![0]);
        let inv = m.inverse();
        assert_eq!(inv.pairs, vec![(1, 0)]);
        assert_eq!(inv.left_to_delta, vec![0]);
        assert_eq!(inv.right_to_delta, vec![2]);
        assert_eq!(inv.inverse(), m);
    }
}
