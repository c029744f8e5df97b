//! Persistent monodromy groups, coherent cost and the coherent matching
//! distance, next to the classical 2D matching distance.
//!
//! The supremum over all paths from the basepoint is evaluated as a maximum
//! over (group element, endpoint). Each endpoint is reached by one fixed path:
//! a short segment from the basepoint onto a lattice, the breadth-first tree
//! of that lattice, and a final segment. The group supplies every other
//! homotopy class.

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::bifiltration::{ParamPoint, SimplicialBifiltration};
use crate::diagram_metric::{bottleneck_distance, enumerate_matchings, matching_cost, Matching};
use crate::error::{Error, Result};
use crate::parameter_space::{generator_loops, Lattice, ParamPath, ParameterRegion, Rect};
use crate::persistence::{diagram_at, PersistenceDiagram};
use crate::transport::{
    compose_matching, loop_permutation_in, oldbound_constant, transport_diagram_warm, DiagramSource, Permutation,
    SliceSource, TransportConfig, TransportTable,
};

/// Serializes non-finite values as the string `"inf"`.
fn ser_real<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str("inf")
    }
}

/// Monodromy of `f` and `g` at a common basepoint, as pairs of permutations.
#[derive(Clone, Debug, Serialize)]
pub struct PairPermutationGroup {
    pub basepoint: ParamPoint,
    pub generators: Vec<(Permutation, Permutation)>,
    /// The closure; element 0 is the identity.
    pub elements: Vec<(Permutation, Permutation)>,
}

fn factorial(n: usize) -> usize {
    (1..=n).fold(1usize, |acc, k| acc.saturating_mul(k))
}

impl PairPermutationGroup {
    /// Breadth-first closure of the generators. The result is capped at
    /// `((q + 1)!)²` for `q` generators.
    pub fn generate(basepoint: ParamPoint, nf: usize, ng: usize, generators: Vec<(Permutation, Permutation)>) -> Result<Self> {
        for (pf, pg) in &generators {
            if pf.len() != nf || pg.len() != ng {
                return Err(Error::Inconsistent("generator size differs from the basepoint diagrams".into()));
            }
        }
        let bound = factorial(generators.len() + 1).saturating_mul(factorial(generators.len() + 1));
        let id = (Permutation::identity(nf), Permutation::identity(ng));
        let mut seen: HashSet<(Permutation, Permutation)> = HashSet::from([id.clone()]);
        let mut elements = vec![id.clone()];
        let mut queue = VecDeque::from([id]);
        while let Some(e) = queue.pop_front() {
            for (gf, gg) in &generators {
                let next = (gf.compose(&e.0), gg.compose(&e.1));
                if seen.insert(next.clone()) {
                    if elements.len() >= bound {
                        return Err(Error::Inconsistent(format!("group closure exceeds the bound {bound}")));
                    }
                    elements.push(next.clone());
                    queue.push_back(next);
                }
            }
        }
        Ok(Self { basepoint, generators, elements })
    }

    pub fn trivial(basepoint: ParamPoint, nf: usize, ng: usize) -> Self {
        Self::generate(basepoint, nf, ng, vec![]).expect("trivial group")
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// `h·σ = h_g ∘ σ ∘ h_f⁻¹`, the loop transport of `σ`.
    pub fn act(&self, index: usize, sigma: &Matching) -> Matching {
        let (pf, pg) = &self.elements[index];
        Matching::new(
            sigma.pairs.iter().map(|&(i, j)| (pf.apply(i), pg.apply(j))).collect(),
            sigma.left_to_delta.iter().map(|&i| pf.apply(i)).collect(),
            sigma.right_to_delta.iter().map(|&j| pg.apply(j)).collect(),
        )
    }
}

pub fn monodromy_group_in(
    src_f: &dyn DiagramSource,
    src_g: &dyn DiagramSource,
    region: &ParameterRegion,
    basepoint: ParamPoint,
    cfg: &TransportConfig,
) -> Result<PairPermutationGroup> {
    let loops = generator_loops(region, basepoint)?;
    let generators = loops
        .par_iter()
        .map(|lp| Ok((loop_permutation_in(src_f, lp, cfg)?, loop_permutation_in(src_g, lp, cfg)?)))
        .collect::<Result<Vec<_>>>()?;
    let nf = src_f.diagram(basepoint)?.len();
    let ng = src_g.diagram(basepoint)?.len();
    PairPermutationGroup::generate(basepoint, nf, ng, generators)
}

pub fn monodromy_group(
    f: &SimplicialBifiltration,
    g: &SimplicialBifiltration,
    degree: usize,
    region: &ParameterRegion,
    basepoint: ParamPoint,
    cfg: &TransportConfig,
) -> Result<PairPermutationGroup> {
    monodromy_group_in(&SliceSource::new(f, degree), &SliceSource::new(g, degree), region, basepoint, cfg)
}

/// Endpoint sample for the coherent cost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    /// Interior lattice is `lattice_n x lattice_n` over the rectangle.
    pub lattice_n: usize,
    /// Points per rectangle side and per disk circle.
    pub boundary_n: usize,
    /// Points on `a = 1/2`.
    pub half_line_n: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self { lattice_n: 12, boundary_n: 16, half_line_n: 24 }
    }
}

/// Transport tables from the basepoint to every endpoint, for one function.
struct Field {
    tables: Vec<TransportTable>,
}

/// Basepoint-to-endpoint paths shared by `f` and `g`.
struct Routes {
    lattice: Lattice,
    /// Lattice node the basepoint is joined to.
    root: usize,
    /// BFS parent of every reachable node.
    parent: Vec<Option<usize>>,
    /// Node order by BFS level.
    levels: Vec<Vec<usize>>,
    /// For each endpoint, the node it hangs from.
    anchor: Vec<usize>,
}

impl Routes {
    fn new(region: &ParameterRegion, basepoint: ParamPoint, endpoints: &[ParamPoint], n: usize) -> Result<Self> {
        let lattice = Lattice::new(region, n, n);
        let root = lattice
            .nearest_visible(region, &basepoint)
            .ok_or_else(|| Error::Geometry("basepoint sees no lattice node".into()))?;
        let parent = lattice.bfs_tree(root);
        let mut levels: Vec<Vec<usize>> = vec![vec![root]];
        let mut depth = vec![usize::MAX; lattice.nodes.len()];
        depth[root] = 0;
        // Parents precede children in BFS discovery, so a second BFS pass
        // gives depths consistent with `parent`.
        let mut queue = VecDeque::from([root]);
        while let Some(k) = queue.pop_front() {
            for &l in &lattice.adjacency[k] {
                if parent[l] == Some(k) && depth[l] == usize::MAX {
                    depth[l] = depth[k] + 1;
                    if levels.len() <= depth[l] {
                        levels.push(vec![]);
                    }
                    levels[depth[l]].push(l);
                    queue.push_back(l);
                }
            }
        }
        let index: std::collections::HashMap<(u64, u64), usize> =
            lattice.nodes.iter().enumerate().map(|(k, p)| ((p.a.to_bits(), p.b.to_bits()), k)).collect();
        let anchor = endpoints
            .iter()
            .map(|e| {
                let k = match index.get(&(e.a.to_bits(), e.b.to_bits())) {
                    Some(&k) => Some(k),
                    None => lattice.nearest_visible(region, e),
                };
                k.filter(|&k| parent[k].is_some())
                    .ok_or_else(|| Error::Geometry(format!("endpoint ({}, {}) is not reachable", e.a, e.b)))
            })
            .collect::<Result<_>>()?;
        Ok(Self { lattice, root, parent, levels, anchor })
    }

    fn field(&self, src: &dyn DiagramSource, basepoint: ParamPoint, endpoints: &[ParamPoint], cfg: &TransportConfig) -> Result<Field> {
        let nodes = &self.lattice.nodes;
        // Each segment warm-starts from the last step accepted on the segment
        // leading to its start node.
        let segment = |p: ParamPoint, q: ParamPoint, warm: Option<f64>| -> Result<(TransportTable, f64)> {
            if p == q {
                return Ok((TransportTable::identity(src.diagram(p)?), warm.unwrap_or(0.0)));
            }
            transport_diagram_warm(src, &ParamPath::straight(p, q)?, cfg, warm)
        };
        let mut at_node: Vec<Option<(TransportTable, f64)>> = vec![None; nodes.len()];
        at_node[self.root] = Some(segment(basepoint, nodes[self.root], None)?);
        for level in &self.levels[1..] {
            let step: Vec<(usize, TransportTable, f64)> = level
                .par_iter()
                .map(|&k| {
                    let p = self.parent[k].expect("reachable");
                    let warm = at_node[p].as_ref().map(|x| x.1).filter(|&w| w > 0.0);
                    let (t, last) = segment(nodes[p], nodes[k], warm)?;
                    Ok((k, t, last))
                })
                .collect::<Result<_>>()?;
            for (k, t, last) in step {
                let p = self.parent[k].expect("reachable");
                let composed = at_node[p].as_ref().expect("parent first").0.then(&t);
                at_node[k] = Some((composed, last));
            }
        }
        let tables = endpoints
            .par_iter()
            .zip(&self.anchor)
            .map(|(&e, &k)| {
                let (to_node, warm) = at_node[k].as_ref().expect("reachable node");
                let warm = Some(*warm).filter(|&w| w > 0.0);
                Ok(to_node.then(&segment(nodes[k], e, warm)?.0))
            })
            .collect::<Result<_>>()?;
        Ok(Field { tables })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub a: f64,
    pub b: f64,
    pub group_index: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoherentCostReport {
    pub sigma: Matching,
    #[serde(serialize_with = "ser_real")]
    pub value: f64,
    pub witness: Option<Witness>,
}

/// Precomputed transport of both functions to a sample of endpoints.
pub struct CoherentEvaluator {
    pub basepoint: ParamPoint,
    pub group: PairPermutationGroup,
    /// Endpoint 0 is the basepoint (the constant path).
    pub endpoints: Vec<ParamPoint>,
    /// Lattice edges between endpoints, used for the measured Lipschitz
    /// constant.
    edges: Vec<(usize, usize)>,
    lattice_spacing: f64,
    field_f: Field,
    field_g: Field,
    sup_norm: f64,
}

impl CoherentEvaluator {
    /// Computes the monodromy group and the endpoint transports.
    pub fn new(
        src_f: &dyn DiagramSource,
        src_g: &dyn DiagramSource,
        region: &ParameterRegion,
        basepoint: ParamPoint,
        spec: &SampleSpec,
        cfg: &TransportConfig,
    ) -> Result<Self> {
        let group = monodromy_group_in(src_f, src_g, region, basepoint, cfg)?;
        Self::with_group(src_f, src_g, region, basepoint, spec, cfg, group)
    }

    pub fn with_group(
        src_f: &dyn DiagramSource,
        src_g: &dyn DiagramSource,
        region: &ParameterRegion,
        basepoint: ParamPoint,
        spec: &SampleSpec,
        cfg: &TransportConfig,
        group: PairPermutationGroup,
    ) -> Result<Self> {
        if !region.contains(&basepoint) {
            return Err(Error::Geometry(format!("basepoint ({}, {}) is not in the region", basepoint.a, basepoint.b)));
        }
        let n = spec.lattice_n.max(2);
        let lattice = Lattice::new(region, n, n);
        let mut endpoints = vec![basepoint];
        let first_node = endpoints.len();
        endpoints.extend(lattice.nodes.iter().copied());
        let edges = lattice
            .adjacency
            .iter()
            .enumerate()
            .flat_map(|(k, adj)| adj.iter().filter(move |&&l| l > k).map(move |&l| (first_node + k, first_node + l)))
            .collect();
        endpoints.extend(region.boundary_samples(spec.boundary_n));
        endpoints.extend(region.half_line_samples(spec.half_line_n));
        let routes = Routes::new(region, basepoint, &endpoints, n)?;
        let lattice_spacing = routes.lattice.spacing(region);
        let field_f = routes.field(src_f, basepoint, &endpoints, cfg)?;
        let field_g = routes.field(src_g, basepoint, &endpoints, cfg)?;
        Ok(Self {
            basepoint,
            group,
            endpoints,
            edges,
            lattice_spacing,
            field_f,
            field_g,
            sup_norm: src_f.sup_norm().max(src_g.sup_norm()),
        })
    }

    pub fn base_diagrams(&self) -> (&PersistenceDiagram, &PersistenceDiagram) {
        (&self.field_f.tables[0].start, &self.field_g.tables[0].start)
    }

    pub fn endpoint_diagrams(&self, e: usize) -> (&Arc<PersistenceDiagram>, &Arc<PersistenceDiagram>) {
        (&self.field_f.tables[e].end, &self.field_g.tables[e].end)
    }

    /// Cost of `h·σ` transported to endpoint `e`.
    pub fn transported_cost(&self, sigma: &Matching, h: usize, e: usize) -> f64 {
        let (tf, tg) = (&self.field_f.tables[e], &self.field_g.tables[e]);
        let m = compose_matching(tf, tg, &self.group.act(h, sigma));
        matching_cost(&m, &tf.end, &tg.end).value
    }

    /// Max over the group at each endpoint, with the maximizing element.
    pub fn cost_profile(&self, sigma: &Matching) -> Vec<(f64, usize)> {
        (0..self.endpoints.len())
            .into_par_iter()
            .map(|e| {
                (0..self.group.order())
                    .map(|h| (self.transported_cost(sigma, h, e), h))
                    .fold((f64::NEG_INFINITY, 0), |best, x| if x.0 > best.0 { x } else { best })
            })
            .collect()
    }

    pub fn coherent_cost(&self, sigma: &Matching) -> Result<CoherentCostReport> {
        let (df, dg) = self.base_diagrams();
        sigma.validate(df, dg)?;
        let profile = self.cost_profile(sigma);
        let (e, &(value, h)) = profile
            .iter()
            .enumerate()
            .fold((0, &profile[0]), |best, x| if x.1 .0 > best.1 .0 { x } else { best });
        let p = self.endpoints[e];
        Ok(CoherentCostReport { sigma: sigma.clone(), value, witness: Some(Witness { a: p.a, b: p.b, group_index: h }) })
    }

    /// Measured Lipschitz constant of the group-maximized cost along lattice
    /// edges, times the lattice spacing.
    pub fn measured_tolerance(&self, sigma: &Matching) -> f64 {
        let profile = self.cost_profile(sigma);
        let lip = self
            .edges
            .iter()
            .filter(|(k, l)| profile[*k].0.is_finite() && profile[*l].0.is_finite())
            .map(|&(k, l)| (profile[k].0 - profile[l].0).abs() / self.endpoints[k].dist(&self.endpoints[l]))
            .fold(0.0, f64::max);
        lip * self.lattice_spacing
    }

    /// A priori tolerance: twice the step constant over the sample times half
    /// the lattice spacing (both functions move).
    pub fn a_priori_tolerance(&self) -> f64 {
        let eps = 0.5 * self.lattice_spacing;
        let k = self
            .endpoints
            .iter()
            .map(|p| oldbound_constant(self.sup_norm, *p, eps).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max);
        2.0 * k * eps
    }

    pub fn lattice_spacing(&self) -> f64 {
        self.lattice_spacing
    }

    /// `min` over all matchings of the coherent cost.
    pub fn distance(&self) -> Result<CoherentDistanceReport> {
        let (df, dg) = self.base_diagrams();
        if df.improper_count() != dg.improper_count() {
            return Ok(CoherentDistanceReport {
                value: f64::INFINITY,
                witness: None,
                sigma: None,
                tolerance: 0.0,
                a_priori_tolerance: self.a_priori_tolerance(),
                group_order: self.group.order(),
                endpoints: self.endpoints.len(),
            });
        }
        let sigmas = enumerate_matchings(df, dg)?;
        let reports = sigmas.par_iter().map(|s| self.coherent_cost(s)).collect::<Result<Vec<_>>>()?;
        let best = reports
            .into_iter()
            .reduce(|x, y| if y.value < x.value { y } else { x })
            .expect("at least one matching");
        let tolerance = if best.value.is_finite() { self.measured_tolerance(&best.sigma) } else { 0.0 };
        Ok(CoherentDistanceReport {
            value: best.value,
            witness: best.witness,
            sigma: Some(best.sigma),
            tolerance,
            a_priori_tolerance: self.a_priori_tolerance(),
            group_order: self.group.order(),
            endpoints: self.endpoints.len(),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoherentDistanceReport {
    #[serde(serialize_with = "ser_real")]
    pub value: f64,
    pub witness: Option<Witness>,
    pub sigma: Option<Matching>,
    /// Measured Lipschitz constant times the lattice spacing.
    #[serde(serialize_with = "ser_real")]
    pub tolerance: f64,
    #[serde(serialize_with = "ser_real")]
    pub a_priori_tolerance: f64,
    pub group_order: usize,
    pub endpoints: usize,
}

impl CoherentDistanceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Coherent cost of one matching at the basepoint.
#[allow(clippy::too_many_arguments)]
pub fn coherent_cost(
    f: &SimplicialBifiltration,
    g: &SimplicialBifiltration,
    degree: usize,
    region: &ParameterRegion,
    basepoint: ParamPoint,
    sigma: &Matching,
    group: &PairPermutationGroup,
    spec: &SampleSpec,
    cfg: &TransportConfig,
) -> Result<CoherentCostReport> {
    let (sf, sg) = (SliceSource::cached(f, degree), SliceSource::cached(g, degree));
    CoherentEvaluator::with_group(&sf, &sg, region, basepoint, spec, cfg, group.clone())?.coherent_cost(sigma)
}

/// `CD_U(f, g)` evaluated from `basepoint`.
pub fn coherent_matching_distance(
    f: &SimplicialBifiltration,
    g: &SimplicialBifiltration,
    degree: usize,
    region: &ParameterRegion,
    basepoint: ParamPoint,
    spec: &SampleSpec,
    cfg: &TransportConfig,
) -> Result<CoherentDistanceReport> {
    let df = diagram_at(f, basepoint, degree)?;
    let dg = diagram_at(g, basepoint, degree)?;
    if df.improper_count() != dg.improper_count() {
        return Ok(CoherentDistanceReport {
            value: f64::INFINITY,
            witness: None,
            sigma: None,
            tolerance: 0.0,
            a_priori_tolerance: 0.0,
            group_order: 0,
            endpoints: 0,
        });
    }
    let (sf, sg) = (SliceSource::cached(f, degree), SliceSource::cached(g, degree));
    CoherentEvaluator::new(&sf, &sg, region, basepoint, spec, cfg)?.distance()
}

/// One cell of a matching-distance heatmap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub a: f64,
    pub b: f64,
    pub value: f64,
}

/// CSV `a,b,value`.
pub fn heatmap_csv(cells: &[HeatmapCell]) -> String {
    let mut out = String::from("a,b,value\n");
    for c in cells {
        let v = if c.value.is_finite() { c.value.to_string() } else { "inf".to_string() };
        out.push_str(&format!("{},{},{}\n", c.a, c.b, v));
    }
    out
}

fn bottleneck_at(f: &SimplicialBifiltration, g: &SimplicialBifiltration, degree: usize, p: ParamPoint) -> Result<f64> {
    Ok(bottleneck_distance(&diagram_at(f, p, degree)?, &diagram_at(g, p, degree)?)?.0)
}

/// Max of the bottleneck distance between slice diagrams over the
/// `grid_n x grid_n` grid on `rect`, with the full table in grid order.
pub fn dmatch(
    f: &SimplicialBifiltration,
    g: &SimplicialBifiltration,
    degree: usize,
    rect: Rect,
    grid_n: usize,
) -> Result<(f64, Vec<HeatmapCell>)> {
    if grid_n < 2 {
        return Err(Error::Domain(format!("grid size must be at least 2, got {grid_n}")));
    }
    dmatch_at(f, g, degree, &rect.grid(grid_n))
}

/// Max of the bottleneck distance over the given parameters.
pub fn dmatch_at(
    f: &SimplicialBifiltration,
    g: &SimplicialBifiltration,
    degree: usize,
    points: &[ParamPoint],
) -> Result<(f64, Vec<HeatmapCell>)> {
    if !f.same_complex(g) {
        return Err(Error::ComplexMismatch("heatmap needs two functions on one complex".into()));
    }
    let cells = points
        .par_iter()
        .map(|&p| Ok(HeatmapCell { a: p.a, b: p.b, value: bottleneck_at(f, g, degree, p)? }))
        .collect::<Result<Vec<_>>>()?;
    let max = cells.iter().map(|c| c.value).fold(0.0, f64::max);
    Ok((max, cells))
}

#[derive(Clone, Debug, Serialize)]
pub struct BasepointReport {
    pub basepoints: Vec<ParamPoint>,
    pub values: Vec<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Recomputes `CD_U` from every basepoint; passes when all values agree
/// within the largest reported tolerance.
pub fn basepoint_independence_check(
    f: &SimplicialBifiltration,
    g: &SimplicialBifiltration,
    degree: usize,
    region: &ParameterRegion,
    basepoints: &[ParamPoint],
    spec: &SampleSpec,
    cfg: &TransportConfig,
) -> Result<BasepointReport> {
    let reports = basepoints
        .iter()
        .map(|&p| coherent_matching_distance(f, g, degree, region, p, spec, cfg))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = reports.iter().map(|r| r.value).collect();
    let tolerance = reports.iter().map(|r| r.tolerance).fold(0.0, f64::max);
    let spread = values.iter().copied().fold(f64::NEG_INFINITY, f64::max) - values.iter().copied().fold(f64::INFINITY, f64::min);
    let all_inf = values.iter().all(|v| v.is_infinite());
    Ok(BasepointReport { basepoints: basepoints.to_vec(), values, tolerance, pass: all_inf || spread <= tolerance + 1e-12 })
}

#[derive(Clone, Debug, Serialize)]
pub struct PseudoMetricReport {
    pub cd_fg: f64,
    pub cd_gf: f64,
    pub cd_gh: f64,
    pub cd_fh: f64,
    pub tolerance: f64,
    pub symmetric: bool,
    pub triangle: bool,
}

/// Symmetry (exact) and the triangle inequality (within twice the
/// tolerance) on a triple.
#[allow(clippy::too_many_arguments)]
pub fn pseudo_metric_check(
    f: &SimplicialBifiltration,
    g: &SimplicialBifiltration,
    h: &SimplicialBifiltration,
    degree: usize,
    region: &ParameterRegion,
    basepoint: ParamPoint,
    spec: &SampleSpec,
    cfg: &TransportConfig,
) -> Result<PseudoMetricReport> {
    let cd = |x, y| coherent_matching_distance(x, y, degree, region, basepoint, spec, cfg);
    let (fg, gf, gh, fh) = (cd(f, g)?, cd(g, f)?, cd(g, h)?, cd(f, h)?);
    let tolerance = [&fg, &gh, &fh].iter().map(|r| r.tolerance).fold(0.0, f64::max);
    Ok(PseudoMetricReport {
        cd_fg: fg.value,
        cd_gf: gf.value,
        cd_gh: gh.value,
        cd_fh: fh.value,
        tolerance,
        symmetric: fg.value == gf.value,
        triangle: fh.value <= fg.value + gh.value + 2.0 * tolerance,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MaxPrincipleReport {
    pub argmax: ParamPoint,
    #[serde(serialize_with = "ser_real")]
    pub value: f64,
    pub distance_to_half_line: f64,
    pub distance_to_boundary: f64,
    pub grid_step: f64,
    pub pass: bool,
}

fn distance_to_half_or_boundary(region: &ParameterRegion, p: &ParamPoint) -> (f64, f64) {
    ((p.a - 0.5).abs(), region.distance_to_boundary(p))
}

/// Locates the maximum of the group-maximized transported cost of `σ` over
/// the evaluator's endpoints. Passes when some maximizer lies within one
/// lattice step of `a = 1/2` or of the region boundary.
pub fn max_principle_check(eval: &CoherentEvaluator, region: &ParameterRegion, sigma: &Matching) -> Result<MaxPrincipleReport> {
    let (df, dg) = eval.base_diagrams();
    sigma.validate(df, dg)?;
    let profile = eval.cost_profile(sigma);
    let value = profile.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
    let step = eval.lattice_spacing();
    let tie = 1e-12 * value.abs().max(1.0);
    let maximizers: Vec<usize> = (0..profile.len()).filter(|&e| profile[e].0 >= value - tie).collect();
    let score = |e: usize| {
        let (dh, db) = distance_to_half_or_boundary(region, &eval.endpoints[e]);
        dh.min(db)
    };
    let best = *maximizers
        .iter()
        .min_by(|&&x, &&y| score(x).total_cmp(&score(y)).then(x.cmp(&y)))
        .expect("non-empty sample");
    let argmax = eval.endpoints[best];
    let (dh, db) = distance_to_half_or_boundary(region, &argmax);
    Ok(MaxPrincipleReport {
        argmax,
        value,
        distance_to_half_line: dh,
        distance_to_boundary: db,
        grid_step: step,
        pass: dh.min(db) <= step + 1e-12,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub cd_per_region: Vec<f64>,
    pub tolerance_per_region: Vec<f64>,
    pub cd_family: f64,
    pub dmatch_family: f64,
    pub tolerance: f64,
    pub holds: bool,
}

/// `CD` over a family of disjoint regions (the max over regions) and the
/// sampled matching distance over their union.
pub fn family_distances(
    f: &SimplicialBifiltration,
    g: &SimplicialBifiltration,
    degree: usize,
    regions: &[ParameterRegion],
    spec: &SampleSpec,
    dmatch_grid: usize,
    cfg_for: impl Fn(&ParameterRegion) -> TransportConfig,
) -> Result<FamilyReport> {
    for (i, r) in regions.iter().enumerate() {
        for (j, s) in regions.iter().enumerate().skip(i + 1) {
            if r.rect.interiors_overlap(&s.rect) {
                return Err(Error::InvalidRegion(format!("regions {i} and {j} overlap")));
            }
        }
    }
    let mut cd_per_region = Vec::new();
    let mut tolerance_per_region = Vec::new();
    let mut samples = Vec::new();
    for r in regions {
        let base = r.pick_basepoint()?;
        let rep = coherent_matching_distance(f, g, degree, r, base, spec, &cfg_for(r))?;
        cd_per_region.push(rep.value);
        tolerance_per_region.push(rep.tolerance);
        samples.extend(r.rect.grid(dmatch_grid).into_iter().filter(|p| r.contains(p)));
        samples.extend(r.half_line_samples(dmatch_grid));
    }
    let (dmatch_family, _) = dmatch_at(f, g, degree, &samples)?;
    let cd_family = cd_per_region.iter().copied().fold(0.0, f64::max);
    let tolerance = tolerance_per_region.iter().copied().fold(0.0, f64::max);
    Ok(FamilyReport {
        holds: dmatch_family <= cd_family + tolerance + 1e-12,
        cd_per_region,
        tolerance_per_region,
        cd_family,
        dmatch_family,
        tolerance,
    })
}
