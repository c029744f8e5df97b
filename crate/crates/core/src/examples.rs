//! Built-in example bifiltrations: a planar function with monodromy, a torus
//! and two disjoint spheres, all projected to the `(x, z)` or `(x, f2)` plane.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bifiltration::SimplicialBifiltration;
use crate::error::{Error, Result};

/// Default `x` and `y` bounds of the monodromy rectangle.
pub const MONODROMY_BOUNDS: [f64; 4] = [-1.2, 1.3, -1.0, 5.5];

/// Torus radii: distance from the axis to the tube centre, and tube radius.
pub const TORUS_RADII: (f64, f64) = (1.5, 0.5);

/// Sphere centres in the `(x, z)` plane and common radius.
pub const SPHERE_CENTERS: [(f64, f64); 2] = [(0.0, 0.0), (-1.0, 1.25)];
pub const SPHERE_RADIUS: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleId {
    MonodromyBasic,
    Torus,
    TwoSpheres,
}

impl ExampleId {
    pub const ALL: [ExampleId; 3] = [ExampleId::MonodromyBasic, ExampleId::Torus, ExampleId::TwoSpheres];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExampleId::MonodromyBasic => "monodromy_basic",
            ExampleId::Torus => "torus",
            ExampleId::TwoSpheres => "two_spheres",
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExampleId::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::UnknownExample(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExampleSpec {
    pub id: ExampleId,
    /// Mesh density. The planar example uses columns `1/(8 * resolution)`
    /// apart and rows `1/4` apart; the surfaces use `resolution` cells
    /// around their longitude.
    pub resolution: usize,
    /// `[x0, x1, y0, y1]` for the planar example; ignored otherwise.
    pub bounds: Option<[f64; 4]>,
}

impl ExampleSpec {
    pub fn new(id: ExampleId, resolution: usize) -> Self {
        Self { id, resolution, bounds: None }
    }
}

pub fn generate(spec: &ExampleSpec) -> Result<SimplicialBifiltration> {
    if spec.resolution < 8 {
        return Err(Error::Domain(format!("resolution must be at least 8, got {}", spec.resolution)));
    }
    match spec.id {
        ExampleId::MonodromyBasic => monodromy_basic(spec.resolution, spec.bounds.unwrap_or(MONODROMY_BOUNDS)),
        ExampleId::Torus => torus(spec.resolution),
        ExampleId::TwoSpheres => two_spheres(spec.resolution),
    }
}

/// Second component of the planar example: linear in `x` on the rows
/// `y = 0, 1, 2, 3`, interpolated linearly in between, slope `-1` in `y`
/// outside `[0, 3]`.
pub fn monodromy_f2(x: f64, y: f64) -> f64 {
    let row = |k: i32| match k {
        0 => -x,
        1 => -x + 1.0,
        2 => -2.0 * x,
        _ => -2.0 * x + 1.25,
    };
    if y <= 0.0 {
        row(0) - y
    } else if y >= 3.0 {
        row(3) - (y - 3.0)
    } else {
        let k = (y.floor() as i32).min(2);
        let t = y - k as f64;
        (1.0 - t) * row(k) + t * row(k + 1)
    }
}

/// Row spacing of the planar example. Basin minima and saddles of every
/// slice lie on the rows `y = 0, 1, 2, 3`, so `y` needs no refinement.
pub const MONODROMY_ROW_SPACING: f64 = 0.25;

/// Column spacing of the planar example at a given resolution.
pub fn monodromy_column_spacing(res: usize) -> f64 {
    1.0 / (8 * res) as f64
}

fn monodromy_basic(res: usize, bounds: [f64; 4]) -> Result<SimplicialBifiltration> {
    let [x0, x1, y0, y1] = bounds;
    if !(x0 < x1 && y0 < y1) || bounds.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("invalid bounds {bounds:?}")));
    }
    let hy = MONODROMY_ROW_SPACING;
    let ny = ((y1 - y0) / hy).round() as usize;
    if ((y0 / hy).round() * hy - y0).abs() > 1e-12 || ((y0 + ny as f64 * hy) - y1).abs() > 1e-12 {
        return Err(Error::Domain(format!("y bounds must be multiples of {hy}, got {y0} and {y1}")));
    }
    let nx = ((x1 - x0) / monodromy_column_spacing(res)).round().max(1.0) as usize;
    let hx = (x1 - x0) / nx as f64;
    let mut values = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let y = y0 + j as f64 * hy;
        for i in 0..=nx {
            let x = x0 + i as f64 * hx;
            values.push([x, monodromy_f2(x, y)]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut tris = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            tris.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    SimplicialBifiltration::from_maximal(ExampleId::MonodromyBasic.as_str(), values, tris)
}

/// Periodic grid triangulation of `n x m` vertices indexed `(i, j)`.
fn periodic_triangles(n: usize, m: usize, id: impl Fn(usize, usize) -> usize) -> Vec<Vec<usize>> {
    let mut tris = Vec::with_capacity(2 * n * m);
    for i in 0..n {
        for j in 0..m {
            let (i1, j1) = ((i + 1) % n, (j + 1) % m);
            tris.push(vec![id(i, j), id(i1, j), id(i1, j1)]);
            tris.push(vec![id(i, j), id(i1, j1), id(i, j1)]);
        }
    }
    tris
}

fn torus(res: usize) -> Result<SimplicialBifiltration> {
    let (big, small) = TORUS_RADII;
    let n = res;
    let m = (res / 2).max(8);
    let mut values = Vec::with_capacity(n * m);
    for i in 0..n {
        let theta = 2.0 * PI * i as f64 / n as f64;
        for j in 0..m {
            let phi = 2.0 * PI * j as f64 / m as f64;
            let rho = big + small * phi.cos();
            values.push([rho * theta.cos(), rho * theta.sin()]);
        }
    }
    let tris = periodic_triangles(n, m, |i, j| i * m + j);
    SimplicialBifiltration::from_maximal(ExampleId::Torus.as_str(), values, tris)
}

/// UV sphere with poles on the `y` axis; `(x, z)` values only.
fn sphere(center: (f64, f64), radius: f64, n_theta: usize, n_phi: usize, offset: usize) -> (Vec<[f64; 2]>, Vec<Vec<usize>>) {
    let mut values = vec![[center.0, center.1]; 2];
    for k in 1..n_phi {
        let phi = PI * k as f64 / n_phi as f64;
        for i in 0..n_theta {
            let theta = 2.0 * PI * i as f64 / n_theta as f64;
            values.push([center.0 + radius * phi.sin() * theta.cos(), center.1 + radius * phi.sin() * theta.sin()]);
        }
    }
    let (north, south) = (offset, offset + 1);
    let ring = |k: usize, i: usize| offset + 2 + (k - 1) * n_theta + (i % n_theta);
    let mut tris = Vec::new();
    for i in 0..n_theta {
        tris.push(vec![north, ring(1, i), ring(1, i + 1)]);
        tris.push(vec![south, ring(n_phi - 1, i), ring(n_phi - 1, i + 1)]);
        for k in 1..n_phi - 1 {
            tris.push(vec![ring(k, i), ring(k + 1, i), ring(k + 1, i + 1)]);
            tris.push(vec![ring(k, i), ring(k + 1, i + 1), ring(k, i + 1)]);
        }
    }
    (values, tris)
}

fn two_spheres(res: usize) -> Result<SimplicialBifiltration> {
    let n_theta = res.div_ceil(4) * 4;
    let n_phi = (n_theta / 2).max(4);
    let mut values = Vec::new();
    let mut tris = Vec::new();
    for c in SPHERE_CENTERS {
        let (v, t) = sphere(c, SPHERE_RADIUS, n_theta, n_phi, values.len());
        values.extend(v);
        tris.extend(t);
    }
    SimplicialBifiltration::from_maximal(ExampleId::TwoSpheres.as_str(), values, tris)
}

/// `f + δ` with a smooth, deterministic `δ` of sup norm at most `amplitude`.
/// The perturbation is a function of the vertex values, so it is continuous
/// on the underlying space.
pub fn perturbed(bif: &SimplicialBifiltration, amplitude: f64, seed: u64) -> Result<SimplicialBifiltration> {
    let golden = 0.618_033_988_749_894_9_f64;
    let phase = |k: u64| 2.0 * PI * ((seed.wrapping_mul(2654435761).wrapping_add(k) as f64 * golden).fract());
    let (p1, p2) = (phase(1), phase(2));
    let (w1, w2) = (0.9 + 0.4 * (phase(3) / (2.0 * PI)), 0.7 + 0.5 * (phase(4) / (2.0 * PI)));
    let values = bif
        .values()
        .iter()
        .map(|&[x, y]| {
            [
                x + amplitude * (w1 * x + 0.6 * y + p1).sin(),
                y + amplitude * (0.8 * x - w2 * y + p2).cos(),
            ]
        })
        .collect();
    bif.with_values(format!("{}+δ{seed}", bif.name()), values)
}

/// `(h1(f1), h2(f2))` with `h_i(x) = x + amplitude * sin(w_i x + p_i)` and
/// `amplitude * w_i < 1`, so both maps are increasing. Sublevel sets of every
/// slice are those of `f` at reparametrized levels: no pair is created or
/// destroyed and every diagram point moves by at most `amplitude`.
pub fn reparametrized(bif: &SimplicialBifiltration, amplitude: f64, seed: u64) -> Result<SimplicialBifiltration> {
    if !(amplitude >= 0.0 && amplitude < 0.5) {
        return Err(Error::Domain(format!("amplitude must lie in [0, 0.5), got {amplitude}")));
    }
    let golden = 0.618_033_988_749_894_9_f64;
    let unit = |k: u64| (seed.wrapping_mul(2654435761).wrapping_add(k) as f64 * golden).fract();
    let (p1, p2) = (2.0 * PI * unit(1), 2.0 * PI * unit(2));
    let (w1, w2) = (0.5 + 1.5 * unit(3), 0.5 + 1.5 * unit(4));
    let values = bif
        .values()
        .iter()
        .map(|&[x, y]| [x + amplitude * (w1 * x + p1).sin(), y + amplitude * (w2 * y + p2).sin()])
        .collect();
    bif.with_values(format!("{}~h{seed}", bif.name()), values)
}

/// `(f1 + s, f2 - s)`: every slice at `(a, b)` equals the original slice at
/// `(a, b - s)`, so singular pairs shift by `s` in `b`.
pub fn shifted(bif: &SimplicialBifiltration, s: f64) -> Result<SimplicialBifiltration> {
    let values = bif.values().iter().map(|&[x, y]| [x + s, y - s]).collect();
    bif.with_values(format!("{}+shift{s}", bif.name()), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bifiltration::ParamPoint;
    use crate::persistence::diagram_at;

    #[test]
    fn f2_rows() {
        assert_eq!(monodromy_f2(0.0, 3.0), 1.25);
        assert_eq!(monodromy_f2(1.0, 1.5), -1.0);
        assert_eq!(monodromy_f2(0.5, 0.0), -0.5);
        assert_eq!(monodromy_f2(0.0, -1.0), 1.0);
        assert_eq!(monodromy_f2(0.0, 6.0), -1.75);
        assert_eq!(monodromy_f2(2.0, 1.0), -1.0);
    }

    #[test]
    fn ids_parse() {
        for id in ExampleId::ALL {
            assert_eq!(id.as_str().parse::<ExampleId>().unwrap(), id);
        }
        assert!(matches!("klein".parse::<ExampleId>(), Err(Error::UnknownExample(_))));
    }

    #[test]
    fn low_resolution_rejected() {
        assert!(generate(&ExampleSpec::new(ExampleId::Torus, 4)).is_err());
        let bad = ExampleSpec { id: ExampleId::MonodromyBasic, resolution: 8, bounds: Some([1.0, 0.0, 0.0, 1.0]) };
        assert!(generate(&bad).is_err());
    }

    #[test]
    fn torus_extent_and_betti() {
        let t = generate(&ExampleSpec::new(ExampleId::Torus, 16)).unwrap();
        let (lo, hi) = t.values().iter().fold((f64::MAX, f64::MIN), |(l, h), v| (l.min(v[0]), h.max(v[0])));
        assert!((lo + 2.0).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
        let p = ParamPoint::new(0.43, 0.11).unwrap();
        let counts: Vec<usize> = (0..3).map(|k| diagram_at(&t, p, k).unwrap().improper_count()).collect();
        assert_eq!(counts, vec![1, 2, 1]);
    }

    #[test]
    fn spheres_components() {
        let s = generate(&ExampleSpec::new(ExampleId::TwoSpheres, 12)).unwrap();
        let p = ParamPoint::new(0.5, 0.0).unwrap();
        assert_eq!(diagram_at(&s, p, 0).unwrap().improper_count(), 2);
        assert_eq!(diagram_at(&s, p, 1).unwrap().improper_count(), 0);
        assert_eq!(diagram_at(&s, p, 2).unwrap().improper_count(), 2);
    }

    #[test]
    fn perturbation_is_bounded_and_deterministic() {
        let t = generate(&ExampleSpec::new(ExampleId::Torus, 8)).unwrap();
        let g = perturbed(&t, 0.01, 7).unwrap();
        assert!(t.sup_distance(&g).unwrap() <= 0.01);
        assert_eq!(g.values(), perturbed(&t, 0.01, 7).unwrap().values());
        assert_ne!(g.values(), perturbed(&t, 0.01, 8).unwrap().values());
    }

    #[test]
    fn shift_moves_slices_in_b() {
        let m = generate(&ExampleSpec { id: ExampleId::MonodromyBasic, resolution: 8, bounds: None }).unwrap();
        let g = shifted(&m, 3.0).unwrap();
        let p = ParamPoint::new(0.3, 0.2).unwrap();
        let q = ParamPoint::new(0.3, 0.2 - 3.0).unwrap();
        assert_eq!(diagram_at(&g, p, 0).unwrap().len(), diagram_at(&m, q, 0).unwrap().len());
    }
}
