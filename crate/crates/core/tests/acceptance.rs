//! End-to-end acceptance checks. Each check prints one `PASS` or `FAIL` line
//! with its measurements; the test fails if any check fails.

mod common;

use std::error::Error as StdError;
use std::io::Write;
use std::time::{Duration, Instant};

use cohmatch::bifiltration::{build_slice, slice_value, sup_norm_slice_gap, ParamPoint, SimplicialBifiltration};
use cohmatch::coherent_distance::{
    basepoint_independence_check, coherent_matching_distance, dmatch, dmatch_at, max_principle_check, pseudo_metric_check,
    CoherentEvaluator, SampleSpec,
};
use cohmatch::diagram_metric::bottleneck_distance;
use cohmatch::examples::{generate, perturbed, reparametrized, shifted, ExampleId, ExampleSpec};
use cohmatch::parameter_space::{
    choose_separation, detect_singular_pairs, generator_loops, AdmissibleLine, Disk, ParamPath, ParameterRegion, Rect,
};
use cohmatch::pareto_grid::{builtin_grid, line_grid_intersections, position_check};
use cohmatch::persistence::{compute_diagram, diagram_at, multiplicity, persistent_betti, DiagramPoint};
use cohmatch::transport::{loop_permutation, transport_diagram, SliceSource, TransportConfig};
use common::{random_complex, random_diagram, reference_bottleneck, ReferenceFiltration};
use rand::{Rng, SeedableRng};
use num_rational::Ratio;
use rand_chacha::ChaCha8Rng;

type Q = Ratio<i128>;

/// Allowance for the rounding of normalized slice values, relative to the
/// magnitude of the vertex values.
const ROUNDING: f64 = 8.0 * f64::EPSILON;

type Outcome = Result<(bool, String), Box<dyn StdError>>;

fn say(line: &str) {
    // Written past the harness capture so the lines show up in every run.
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

fn run(id: usize, name: &str, limit: Option<Duration>, check: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let result = check();
    let elapsed = t.elapsed();
    let (ok, detail) = match result {
        Ok((ok, detail)) => (ok, detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let pass = ok && in_time;
    let budget = limit.map(|l| format!(", limit {:.0} s", l.as_secs_f64())).unwrap_or_default();
    say(&format!(
        "{} [{id:>2}] {name} ({:.1} s{budget}): {detail}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    ));
    pass
}

fn pp(a: f64, b: f64) -> ParamPoint {
    ParamPoint { a, b }
}

fn example(id: ExampleId, res: usize) -> Result<SimplicialBifiltration, Box<dyn StdError>> {
    Ok(generate(&ExampleSpec::new(id, res))?)
}

const SCAN: Rect = Rect { a0: 0.1, a1: 0.45, b0: -0.5, b1: 0.5 };
const AROUND_SINGULAR: Rect = Rect { a0: 0.15, a1: 0.35, b0: -0.1, b1: 0.1 };
const QUIET: Rect = Rect { a0: 0.3, a1: 0.45, b0: 0.2, b1: 0.5 };
const SPHERES_R1: Rect = Rect { a0: 0.4, a1: 0.6, b0: -1.1, b1: -0.5 };
const SPHERES_R2: Rect = Rect { a0: 0.46, a1: 0.54, b0: -0.45, b1: -0.25 };

fn spec(n: usize) -> SampleSpec {
    SampleSpec { lattice_n: n, boundary_n: n, half_line_n: n }
}

/// Singular pair of the planar example, located on a mesh fine enough to
/// carry an exact multiple point.
fn planar_singular_pair() -> Result<ParamPoint, Box<dyn StdError>> {
    let f = example(ExampleId::MonodromyBasic, 32)?;
    let reports = detect_singular_pairs(&f, 0, SCAN, 16, 1e-3)?;
    match reports.as_slice() {
        [r] => Ok(r.location),
        _ => Err(format!("expected one singular pair, found {}", reports.len()).into()),
    }
}

/// The planar example's region around its singular pair (moved up by
/// `shift`), with `c` chosen from the given functions.
fn singular_region(f: &SimplicialBifiltration, others: &[&SimplicialBifiltration], shift: f64) -> Result<ParameterRegion, Box<dyn StdError>> {
    let s = planar_singular_pair()?;
    let rect = Rect { b0: AROUND_SINGULAR.b0 + shift, b1: AROUND_SINGULAR.b1 + shift, ..AROUND_SINGULAR };
    let r0 = ParameterRegion::new(rect, vec![Disk { center: pp(s.a, s.b + shift), radius: 0.03 }], 1.0)?;
    let mut all = vec![f];
    all.extend_from_slice(others);
    let c = choose_separation(&all, 0, &r0, 16)?;
    Ok(r0.with_separation(c)?)
}

fn quiet_region(fs: &[&SimplicialBifiltration], degree: usize, rect: Rect) -> Result<ParameterRegion, Box<dyn StdError>> {
    let r0 = ParameterRegion::without_disks(rect, 1.0)?;
    let c = choose_separation(fs, degree, &r0, 16)?;
    Ok(r0.with_separation(c)?)
}

fn monodromy_reproduction() -> Outcome {
    let f = example(ExampleId::MonodromyBasic, 32)?;
    let reports = detect_singular_pairs(&f, 0, SCAN, 16, 1e-3)?;
    if reports.len() != 1 {
        return Ok((false, format!("{} singular pairs detected", reports.len())));
    }
    let s = reports[0].location;
    let offset = s.dist(&pp(0.25, 0.0));
    let region = singular_region(&f, &[], 0.0)?;
    let base = region.pick_basepoint()?;
    let loops = generator_loops(&region, base)?;
    let cfg = TransportConfig::new(region.separation);
    let perm = loop_permutation(&f, 0, &loops[0], &cfg)?;
    let dgm = diagram_at(&f, base, 0)?;
    let swapped_proper = perm.support().iter().all(|&i| dgm.get(i).is_proper());
    let twice = loop_permutation(&f, 0, &loops[0].concat(&loops[0])?, &cfg)?;
    let ok = offset <= 0.02 && perm.is_transposition() && swapped_proper && twice.is_identity();
    Ok((
        ok,
        format!(
            "pair at ({:.4}, {:.4}), {offset:.4} from (0.25, 0) (tol 0.02); loop {perm} on proper points: {swapped_proper}; doubled loop {twice}",
            s.a, s.b
        ),
    ))
}

fn position_theorem() -> Outcome {
    let bif = example(ExampleId::Torus, 64)?;
    let grid = builtin_grid("torus")?;
    let tol = 3.0 * bif.max_edge_extent();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut lines = Vec::new();
    while lines.len() < 100 {
        let p = pp(rng.gen_range(0.05..0.95), rng.gen_range(-3.0..3.0));
        let hits = line_grid_intersections(&grid, &AdmissibleLine::new(p));
        if hits.iter().all(|h| !h.tangent && h.arcs.iter().all(|a| a.is_some())) {
            lines.push(p);
        }
    }
    let (mut checked, mut failures, mut worst) = (0, 0, 0.0f64);
    for &p in &lines {
        for degree in 0..3 {
            let r = position_check(&grid, &bif, degree, p, tol)?;
            checked += r.checked;
            worst = worst.max(r.max_error);
            if !r.pass() {
                failures += 1;
            }
        }
    }
    Ok((
        failures == 0 && checked > 0,
        format!("{} lines, {checked} coordinates, worst error {worst:.4}, tol {tol:.4} (3 x edge), {failures} failing diagrams", lines.len()),
    ))
}

fn bottleneck_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = 0;
    let mut infinite = 0;
    for trial in 0..500 {
        let improper = if trial % 5 == 0 { rng.gen_range(0..3) } else { 1 };
        let d1 = random_diagram(&mut rng, 1, 6, improper);
        let other = if trial % 7 == 0 { rng.gen_range(0..3) } else { improper };
        let d2 = random_diagram(&mut rng, 1, 6, other);
        let (got, m) = bottleneck_distance(&d1, &d2)?;
        m.validate(&d1, &d2)?;
        let want = reference_bottleneck(d1.points(), d2.points());
        if got.is_infinite() {
            infinite += 1;
        }
        if got != want {
            mismatches += 1;
        }
    }
    Ok((mismatches == 0, format!("500 pairs, {mismatches} mismatches, {infinite} infinite distances")))
}

fn multiplicity_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut candidates, mut points, mut bad) = (0usize, 0usize, Vec::new());
    for trial in 0..50 {
        let bif = random_complex(&mut rng, 50);
        // At a = 1/2 with a dyadic b every slice value is exact, so equal
        // values are equal and distinct ones are far apart.
        let p = pp(0.5, rng.gen_range(-8..=8) as f64 / 4.0);
        let reference = ReferenceFiltration::new(&bif, p);
        let slice = build_slice(&bif, p)?;
        if slice.simplex_values != reference.values {
            bad.push(format!("trial {trial}: slice values differ"));
            continue;
        }
        let vals = reference.distinct_values();
        let eps = vals.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min).min(4.0) / 4.0;
        let top = vals.last().copied().unwrap_or(0.0) + 1.0;
        for k in 0..=reference.dimension() {
            let dgm = compute_diagram(&slice, k)?;
            let mut total = 0;
            let mut check = |pt: DiagramPoint, from_def: i64, lib_def: i64| -> Result<(), Box<dyn StdError>> {
                candidates += 1;
                let in_dgm = dgm.count(&pt) as i64;
                let lib_mult = multiplicity(&slice, k, &pt)? as i64;
                if !(from_def == in_dgm && lib_def == in_dgm && lib_mult == in_dgm) {
                    bad.push(format!("trial {trial} degree {k} at {pt}: definition {from_def}, library definition {lib_def}, diagram {in_dgm}"));
                }
                total += in_dgm as usize;
                Ok(())
            };
            let beta = |u: f64, v: f64| reference.betti(k, u, v) as i64;
            let lib_beta = |u: f64, v: f64| -> Result<i64, Box<dyn StdError>> { Ok(persistent_betti(&slice, k, u, v)? as i64) };
            for (i, &u) in vals.iter().enumerate() {
                for &v in &vals[i + 1..] {
                    let def = beta(u + eps, v - eps) - beta(u - eps, v - eps) - beta(u + eps, v + eps) + beta(u - eps, v + eps);
                    let lib = lib_beta(u + eps, v - eps)? - lib_beta(u - eps, v - eps)? - lib_beta(u + eps, v + eps)?
                        + lib_beta(u - eps, v + eps)?;
                    check(DiagramPoint::Proper { u, v }, def, lib)?;
                }
                let def = beta(u + eps, top) - beta(u - eps, top);
                let lib = lib_beta(u + eps, top)? - lib_beta(u - eps, top)?;
                check(DiagramPoint::Improper { u }, def, lib)?;
            }
            points += total;
            if total != dgm.len() {
                bad.push(format!("trial {trial} degree {k}: diagram has {} points, candidates account for {total}", dgm.len()));
            }
        }
    }
    let first = bad.first().cloned().unwrap_or_default();
    Ok((bad.is_empty(), format!("50 complexes, {candidates} candidate points, {points} diagram points, {} mismatches {first}", bad.len())))
}

fn stability_suite() -> Outcome {
    let mono = example(ExampleId::MonodromyBasic, 16)?;
    let surfaces = [mono.clone(), example(ExampleId::Torus, 16)?, example(ExampleId::TwoSpheres, 16)?];
    let around = singular_region(&mono, &[], 0.0)?;
    let quiet = quiet_region(&[&mono], 0, QUIET)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut slices, mut violations, mut worst_ratio) = (0, Vec::new(), 0.0f64);
    for trial in 0..50u64 {
        // Arbitrary smooth noise: slice stability and the matching distance.
        let f = &surfaces[trial as usize % 3];
        let g = perturbed(f, rng.gen_range(0.01..0.2), trial)?;
        let delta = f.sup_distance(&g)?;
        for _ in 0..4 {
            let p = pp(rng.gen_range(0.05..0.95), rng.gen_range(-2.0..2.0));
            for degree in 0..=f.dimension().min(2) {
                let (db, _) = bottleneck_distance(&diagram_at(f, p, degree)?, &diagram_at(&g, p, degree)?)?;
                let slice_gap = sup_norm_slice_gap(f, &g, p)?;
                slices += 1;
                // Slice values are rounded, so the slice gap may exceed delta by
                // a few units in the last place.
                let allowance = ROUNDING * f.sup_norm();
                if !(db <= slice_gap && db <= delta + allowance && slice_gap <= delta + allowance) {
                    violations.push(format!("trial {trial}: d_B {db} slice gap {slice_gap} delta {delta}"));
                }
                worst_ratio = worst_ratio.max(db / delta);
            }
        }
        let degree = trial as usize % 2;
        let (dm, _) = dmatch(f, &g, degree, Rect { a0: 0.2, a1: 0.8, b0: -1.0, b1: 1.0 }, 5)?;
        if dm > delta + ROUNDING * f.sup_norm() {
            violations.push(format!("trial {trial}: D_match {dm} > {delta}"));
        }
        // Coherent distance: a monotone reparametrization keeps g in F_{U,c}.
        let (region, n) = if trial % 5 == 0 { (&around, 6) } else { (&quiet, 4) };
        let c = region.separation;
        let g = reparametrized(&mono, c * rng.gen_range(0.1..0.45), trial)?;
        let delta = mono.sup_distance(&g)?;
        let cd = coherent_matching_distance(&mono, &g, 0, region, region.pick_basepoint()?, &spec(n), &TransportConfig::new(c))?;
        if !(delta < c && cd.value <= delta) {
            violations.push(format!("trial {trial}: CD {} delta {delta} c {c}", cd.value));
        }
    }
    let first = violations.first().cloned().unwrap_or_default();
    Ok((
        violations.is_empty(),
        format!("50 trials, {slices} slice comparisons (worst d_B / |delta| = {worst_ratio:.3}), 50 CD and 50 D_match bounds; {} violations {first}", violations.len()),
    ))
}

/// `D_match` over the region's samples and `CD_U`, with the reported tolerance.
fn order_on_region(
    f: &SimplicialBifiltration,
    g: &SimplicialBifiltration,
    degree: usize,
    region: &ParameterRegion,
    n: usize,
) -> Result<(f64, f64, f64), Box<dyn StdError>> {
    let cd = coherent_matching_distance(f, g, degree, region, region.pick_basepoint()?, &spec(n), &TransportConfig::new(region.separation))?;
    let mut samples: Vec<ParamPoint> = region.rect.grid(16).into_iter().filter(|p| region.contains(p)).collect();
    samples.extend(region.half_line_samples(16));
    let (dm, _) = dmatch_at(f, g, degree, &samples)?;
    Ok((dm, cd.value, cd.tolerance))
}

fn order_relations() -> Outcome {
    let f = example(ExampleId::MonodromyBasic, 32)?;
    let g = shifted(&f, 0.3)?;
    let s = example(ExampleId::TwoSpheres, 32)?;
    let t = perturbed(&s, 0.05, 3)?;
    let cases = [
        ("monodromy A", singular_region(&f, &[&g], 0.0)?, &f, &g, 0, 12),
        ("monodromy B", singular_region(&f, &[&g], 0.3)?, &f, &g, 0, 12),
        ("spheres R1", quiet_region(&[&s, &t], 1, SPHERES_R1)?, &s, &t, 1, 12),
        ("spheres R2", quiet_region(&[&s, &t], 1, SPHERES_R2)?, &s, &t, 1, 12),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, region, f, g, degree, n) in cases.iter() {
        let (dm, cd, tol) = order_on_region(f, g, *degree, region, *n)?;
        ok &= dm <= cd + tol;
        parts.push(format!("{name}: D_match {dm:.4} <= CD {cd:.4} + tol {tol:.4}"));
    }
    Ok((ok, parts.join("; ")))
}

fn maximum_principle() -> Outcome {
    let f = example(ExampleId::TwoSpheres, 32)?;
    let g = perturbed(&f, 0.05, 3)?;
    let region = quiet_region(&[&f, &g], 1, SPHERES_R1)?;
    let (sf, sg) = (SliceSource::cached(&f, 1), SliceSource::cached(&g, 1));
    let ev = CoherentEvaluator::new(&sf, &sg, &region, region.rect.center(), &spec(64), &TransportConfig::new(region.separation))?;
    let report = ev.distance()?;
    let sigma = report.sigma.as_ref().ok_or("no optimal matching")?;
    let mp = max_principle_check(&ev, &region, sigma)?;
    Ok((
        mp.pass,
        format!(
            "argmax ({:.4}, {:.4}), value {:.4}; distance to a = 1/2 {:.4}, to boundary {:.4}, grid step {:.4}",
            mp.argmax.a, mp.argmax.b, mp.value, mp.distance_to_half_line, mp.distance_to_boundary, mp.grid_step
        ),
    ))
}

fn transport_algebra() -> Outcome {
    let f = example(ExampleId::MonodromyBasic, 16)?;
    let rects = [QUIET, Rect { a0: 0.15, a1: 0.35, b0: 0.05, b1: 0.1 }];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut failures, mut pairs) = (Vec::new(), 0);
    for (ri, rect) in rects.iter().enumerate() {
        let region = quiet_region(&[&f], 0, *rect)?;
        let cfg = TransportConfig::new(region.separation);
        let mut draw = || pp(rng.gen_range(rect.a0..rect.a1), rng.gen_range(rect.b0..rect.b1));
        for _ in 0..50 {
            let (p, w, q, r) = (draw(), draw(), draw(), draw());
            let first = ParamPath::new(vec![p, w, q])?;
            let second = ParamPath::straight(q, r)?;
            let t1 = transport_diagram(&f, 0, &first, &cfg)?;
            let t2 = transport_diagram(&f, 0, &second, &cfg)?;
            let t12 = transport_diagram(&f, 0, &first.concat(&second)?, &cfg)?;
            let back = transport_diagram(&f, 0, &first.reversed(), &cfg)?;
            let straight = transport_diagram(&f, 0, &ParamPath::straight(p, q)?, &cfg)?;
            pairs += 1;
            if t12.map != t1.then(&t2).map {
                failures.push(format!("rect {ri}: composition at {p:?}"));
            }
            if back.map != t1.inverse().map {
                failures.push(format!("rect {ri}: inverse at {p:?}"));
            }
            if straight.map != t1.map {
                failures.push(format!("rect {ri}: homotopy at {p:?}"));
            }
        }
    }
    let first = failures.first().cloned().unwrap_or_default();
    Ok((failures.is_empty(), format!("{pairs} path pairs, {} failures {first}", failures.len())))
}

fn pseudo_metric() -> Outcome {
    let mono = example(ExampleId::MonodromyBasic, 16)?;
    let around = singular_region(&mono, &[], 0.0)?;
    let quiet = quiet_region(&[&mono], 0, QUIET)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut asym, mut triangle, mut worst_slack) = (0, 0, f64::NEG_INFINITY);
    for k in 0..10u64 {
        let (region, n) = if k < 2 { (&around, 6) } else { (&quiet, 4) };
        let c = region.separation;
        let mut member = |seed: u64| reparametrized(&mono, c * rng.gen_range(0.1..0.45), seed);
        let (f, g, h) = (member(100 + 3 * k)?, member(101 + 3 * k)?, member(102 + 3 * k)?);
        let r = pseudo_metric_check(&f, &g, &h, 0, region, region.pick_basepoint()?, &spec(n), &TransportConfig::new(c))?;
        asym += usize::from(!r.symmetric);
        triangle += usize::from(!r.triangle);
        worst_slack = worst_slack.max(r.cd_fh - r.cd_fg - r.cd_gh - 2.0 * r.tolerance);
    }
    let g = reparametrized(&mono, 0.4 * around.separation, 77)?;
    let base = around.pick_basepoint()?;
    let others = [pp(0.17, -0.08), pp(0.33, 0.08), pp(0.25, 0.09)];
    let bases: Vec<ParamPoint> = std::iter::once(base).chain(others.into_iter().filter(|p| around.contains(p))).collect();
    let bi = basepoint_independence_check(&mono, &g, 0, &around, &bases, &spec(6), &TransportConfig::new(around.separation))?;
    let spread = bi.values.iter().copied().fold(f64::NEG_INFINITY, f64::max) - bi.values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((
        asym == 0 && triangle == 0 && bi.pass && bases.len() >= 3,
        format!(
            "10 triples: {asym} asymmetric, {triangle} triangle violations (worst excess over 2 x tol {worst_slack:.2e}); {} basepoints, spread {spread:.2e} vs tol {:.2e}",
            bases.len(),
            bi.tolerance
        ),
    ))
}

/// Exact slice value on rationals.
fn exact_slice_value(f1: Q, f2: Q, a: Q, b: Q) -> Q {
    let one = Q::from_integer(1);
    let scale = if a < one - a { a } else { one - a };
    let x = (f1 - b) / a;
    let y = (f2 + b) / (one - a);
    scale * if x > y { x } else { y }
}

fn slice_lemma() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut violations, mut worst_rounding) = (0, 0.0f64);
    let q = |n: i64| Q::new(n as i128, 64);
    for _ in 0..1000 {
        let [f1, f2, g1, g2] = [0; 4].map(|_| rng.gen_range(-320..=320i64));
        let den = rng.gen_range(2..=1000i64);
        let a = Q::new(rng.gen_range(1..den) as i128, den as i128);
        let b = q(rng.gen_range(-320..=320));
        let abs = |x: Q| if x < Q::from_integer(0) { -x } else { x };
        let lhs = abs(exact_slice_value(q(f1), q(f2), a, b) - exact_slice_value(q(g1), q(g2), a, b));
        let rhs = abs(q(f1) - q(g1)).max(abs(q(f2) - q(g2)));
        violations += usize::from(lhs > rhs);
        // The floating-point slice value agrees with the exact one up to rounding.
        let to_f = |x: Q| *x.numer() as f64 / *x.denom() as f64;
        let p = pp(to_f(a), to_f(b));
        let exact = to_f(exact_slice_value(q(f1), q(f2), a, b));
        worst_rounding = worst_rounding.max((slice_value(to_f(q(f1)), to_f(q(f2)), p) - exact).abs() / exact.abs().max(1.0));
    }
    // The supremum over b at a = 1/2 recovers the sup norm.
    let h = 0.05;
    let mut worst = 0.0f64;
    for (i, id) in ExampleId::ALL.into_iter().enumerate() {
        let f = example(id, 16)?;
        let g = perturbed(&f, 0.1 + 0.05 * i as f64, i as u64)?;
        let delta = f.sup_distance(&g)?;
        let bound = f.sup_norm().max(g.sup_norm()) + 1.0;
        let steps = (2.0 * bound / h).ceil() as usize;
        let mut sup = 0.0f64;
        for j in 0..=steps {
            sup = sup.max(sup_norm_slice_gap(&f, &g, pp(0.5, -bound + j as f64 * h))?);
        }
        worst = worst.max((delta - sup).abs());
    }
    Ok((
        violations == 0 && worst_rounding <= ROUNDING && worst <= h,
        format!(
            "1000 exact samples, {violations} violations (float slice values within {worst_rounding:.1e} relative); a = 1/2 sup differs from the sup norm by at most {worst:.2e} (spacing {h})"
        ),
    ))
}

#[test]
fn acceptance_criteria() {
    let minutes = |m: u64| Some(Duration::from_secs(60 * m));
    let results = [
        run(1, "monodromy reproduction", minutes(2), monodromy_reproduction),
        run(2, "position of diagram coordinates on the torus grid", minutes(5), position_theorem),
        run(3, "bottleneck distance against exhaustive enumeration", Some(Duration::from_secs(30)), bottleneck_oracle),
        run(4, "multiplicities against persistent Betti numbers", minutes(2), multiplicity_oracle),
        run(5, "stability under perturbation", None, stability_suite),
        run(6, "matching distance below coherent distance", None, order_relations),
        run(7, "maximum principle on two spheres", minutes(10), maximum_principle),
        run(8, "transport algebra", None, transport_algebra),
        run(9, "pseudo-metric axioms", None, pseudo_metric),
        run(10, "slice lemma and the a = 1/2 supremum", None, slice_lemma),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, &ok)| !ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
