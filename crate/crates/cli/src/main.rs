use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cohmatch::bifiltration::{ParamPoint, SimplicialBifiltration};
use cohmatch::coherent_distance::{coherent_matching_distance, dmatch, heatmap_csv, PairPermutationGroup, SampleSpec};
use cohmatch::examples::{generate, perturbed, reparametrized, shifted, ExampleId, ExampleSpec};
use cohmatch::parameter_space::{
    choose_separation, detect_singular_pairs, generator_loops, singular_reports_csv, AdmissibleLine, Disk, ParameterRegion, Rect,
};
use cohmatch::pareto_grid::{builtin_grid, intersections_csv, line_grid_intersections};
use cohmatch::persistence::diagram_at;
use cohmatch::transport::{loop_permutation, TransportConfig};
use cohmatch::Error;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "cohmatch", version, about = "Slice persistence, monodromy and coherent matching distances of bifiltrations")]
struct Cli {
    /// Worker threads for grid sweeps (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Accepted for scripting convenience; no command output depends on it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Source {
    /// Built-in example: monodromy_basic, torus or two_spheres.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    example: Option<String>,
    /// JSON complex file with `vertices` (f1, f2) and maximal `simplices`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Mesh resolution of a built-in example.
    #[arg(long, default_value_t = 32)]
    resolution: usize,
}

#[derive(Args, Debug)]
struct Partner {
    /// Second function: `example:<id>`, `file:<path>`, `shift:<s>`,
    /// `perturb:<amplitude>:<k>` or `reparam:<amplitude>:<k>`. Defaults to
    /// the built-in partner of the example.
    #[arg(long)]
    g: Option<String>,
}

#[derive(Args, Debug)]
struct Output {
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RegionArgs {
    /// JSON region file `{"rect": [a0, a1, b0, b1], "disks": [[a, b, r]], "c": c}`.
    #[arg(long, conflicts_with_all = ["rect", "disk"], required_unless_present = "rect")]
    region: Option<PathBuf>,
    /// Rectangle `a0,a1,b0,b1`; `c` is then chosen from sampled gaps.
    #[arg(long, allow_hyphen_values = true)]
    rect: Option<String>,
    /// Removed disk `a,b,r`; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    disk: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Persistence diagram of one slice as CSV `degree,u,v`.
    Diagram {
        #[command(flatten)]
        source: Source,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, default_value_t = 0)]
        degree: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Bottleneck distance of slices over a grid, CSV `a,b,value`.
    Heatmap {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        partner: Partner,
        #[arg(long, allow_hyphen_values = true)]
        rect: String,
        #[arg(long, default_value_t = 16)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        degree: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Loop permutations around every removed disk, as JSON.
    Monodromy {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        region: RegionArgs,
        /// Basepoint; chosen inside the region when omitted.
        #[arg(long, allow_hyphen_values = true, requires = "b")]
        a: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires = "a")]
        b: Option<f64>,
        #[arg(long, default_value_t = 0)]
        degree: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Coherent matching distance over a region, as JSON.
    Cohdist {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        partner: Partner,
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long, allow_hyphen_values = true, requires = "b")]
        a: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires = "a")]
        b: Option<f64>,
        #[arg(long, default_value_t = 0)]
        degree: usize,
        /// Endpoint samples: lattice side, points per boundary piece and on `a = 1/2`.
        #[arg(long, default_value_t = 12)]
        grid: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Singular pairs found by a grid scan, CSV `a,b,degree,gap`.
    Singular {
        #[command(flatten)]
        source: Source,
        #[arg(long, allow_hyphen_values = true)]
        rect: String,
        #[arg(long, default_value_t = 16)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        degree: usize,
        /// Window radius at which refinement stops.
        #[arg(long, default_value_t = 1e-3)]
        refine: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Analytic extended Pareto grid of a built-in surface: JSON, or the
    /// intersections with one line as CSV when `--a` and `--b` are given.
    Grid {
        #[arg(long)]
        example: String,
        #[arg(long, allow_hyphen_values = true, requires = "b")]
        a: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires = "a")]
        b: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
}

/// Exit status 2: the input was rejected. Exit status 3: the computation failed.
enum Failure {
    Input(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Compute(e.to_string())
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn input_error(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

fn load(source: &Source) -> Outcome<(SimplicialBifiltration, Option<ExampleId>)> {
    match (&source.example, &source.input) {
        (Some(id), _) => {
            let id: ExampleId = id.parse()?;
            Ok((generate(&ExampleSpec::new(id, source.resolution))?, Some(id)))
        }
        (None, Some(path)) => Ok((SimplicialBifiltration::load(path)?, None)),
        (None, None) => Err(input_error("one of --example or --input is required")),
    }
}

fn parse_numbers(s: &str, n: usize, what: &str) -> Outcome<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| input_error(format!("{what}: expected {n} comma-separated numbers, got `{s}`")))?;
    if v.len() != n {
        return Err(input_error(format!("{what}: expected {n} comma-separated numbers, got `{s}`")));
    }
    Ok(v)
}

fn parse_rect(s: &str) -> Outcome<Rect> {
    Ok(Rect::parse(s)?)
}

fn partner(f: &SimplicialBifiltration, id: Option<ExampleId>, source: &Source, spec: &Option<String>) -> Outcome<SimplicialBifiltration> {
    let spec = match (spec, id) {
        (Some(s), _) => s.clone(),
        (None, Some(ExampleId::MonodromyBasic)) => "shift:0.3".into(),
        (None, Some(_)) => "perturb:0.05:3".into(),
        (None, None) => return Err(input_error("--g is required with --input")),
    };
    let (kind, rest) = spec.split_once(':').unwrap_or((spec.as_str(), ""));
    let amplitude_and_k = |rest: &str| -> Outcome<(f64, u64)> {
        let (amp, k) = rest.split_once(':').ok_or_else(|| input_error(format!("--g {spec}: expected <amplitude>:<k>")))?;
        let amp = amp.parse().map_err(|_| input_error(format!("--g {spec}: bad amplitude")))?;
        let k = k.parse().map_err(|_| input_error(format!("--g {spec}: bad index")))?;
        Ok((amp, k))
    };
    let g = match kind {
        "example" => generate(&ExampleSpec::new(rest.parse()?, source.resolution))?,
        "file" => SimplicialBifiltration::load(rest)?,
        "shift" => shifted(f, rest.parse().map_err(|_| input_error(format!("--g {spec}: bad shift")))?)?,
        "perturb" => {
            let (amp, k) = amplitude_and_k(rest)?;
            perturbed(f, amp, k)?
        }
        "reparam" => {
            let (amp, k) = amplitude_and_k(rest)?;
            reparametrized(f, amp, k)?
        }
        "same" => f.clone(),
        _ => return Err(input_error(format!("--g: unknown kind `{kind}`"))),
    };
    if !f.same_complex(&g) {
        return Err(input_error("the two functions must live on the same complex"));
    }
    Ok(g)
}

fn region(args: &RegionArgs, fs: &[&SimplicialBifiltration], degree: usize) -> Outcome<ParameterRegion> {
    if let Some(path) = &args.region {
        return Ok(ParameterRegion::load(path)?);
    }
    let rect = parse_rect(args.rect.as_deref().ok_or_else(|| input_error("one of --region or --rect is required"))?)?;
    let disks = args
        .disk
        .iter()
        .map(|d| {
            let v = parse_numbers(d, 3, "--disk")?;
            Ok(Disk { center: ParamPoint::new(v[0], v[1])?, radius: v[2] })
        })
        .collect::<Outcome<Vec<_>>>()?;
    let draft = ParameterRegion::new(rect, disks, 1.0)?;
    let c = choose_separation(fs, degree, &draft, 16)?;
    Ok(draft.with_separation(c)?)
}

fn basepoint(region: &ParameterRegion, a: Option<f64>, b: Option<f64>) -> Outcome<ParamPoint> {
    match (a, b) {
        (Some(a), Some(b)) => {
            let p = ParamPoint::new(a, b)?;
            if !region.contains(&p) {
                return Err(input_error(format!("basepoint ({a}, {b}) is not inside the region")));
            }
            Ok(p)
        }
        _ => Ok(region.pick_basepoint()?),
    }
}

fn region_json(r: &ParameterRegion) -> serde_json::Value {
    serde_json::from_str(&r.to_json_string()).expect("region json")
}

fn run(cli: Cli) -> Outcome<(String, Option<PathBuf>)> {
    match cli.command {
        Command::Diagram { source, a, b, degree, output } => {
            let p = ParamPoint::new(a, b)?;
            let (f, _) = load(&source)?;
            Ok((diagram_at(&f, p, degree)?.to_csv(), output.out))
        }
        Command::Heatmap { source, partner: g, rect, grid, degree, output } => {
            let rect = parse_rect(&rect)?;
            let (f, id) = load(&source)?;
            let g = partner(&f, id, &source, &g.g)?;
            let (_, cells) = dmatch(&f, &g, degree, rect, grid)?;
            Ok((heatmap_csv(&cells), output.out))
        }
        Command::Monodromy { source, region: rargs, a, b, degree, output } => {
            let (f, _) = load(&source)?;
            let region = region(&rargs, &[&f], degree)?;
            let base = basepoint(&region, a, b)?;
            let cfg = TransportConfig::new(region.separation);
            let dgm = diagram_at(&f, base, degree)?;
            let loops = generator_loops(&region, base)?;
            let perms = loops.iter().map(|lp| loop_permutation(&f, degree, lp, &cfg)).collect::<Result<Vec<_>, _>>()?;
            let gens = perms.iter().map(|p| (p.clone(), cohmatch::transport::Permutation::identity(0))).collect();
            let group = PairPermutationGroup::generate(base, dgm.len(), 0, gens)?;
            let report = json!({
                "basepoint": base,
                "degree": degree,
                "region": region_json(&region),
                "diagram": dgm.points().iter().map(|p| json!({"u": p.birth(), "v": p.death().filter(|v| v.is_finite())})).collect::<Vec<_>>(),
                "generators": loops.iter().zip(&perms).enumerate().map(|(i, (lp, p))| json!({
                    "disk": i,
                    "loop_waypoints": lp.waypoints().len(),
                    "images": p.0,
                    "cycles": p.to_string(),
                    "transposition": p.is_transposition(),
                })).collect::<Vec<_>>(),
                "group_order": group.order(),
                "separation": region.separation,
                "tolerance": cohmatch::transport::MEMBERSHIP_TOLERANCE,
            });
            Ok((serde_json::to_string_pretty(&report).expect("json") + "\n", output.out))
        }
        Command::Cohdist { source, partner: g, region: rargs, a, b, degree, grid, output } => {
            if grid < 2 {
                return Err(input_error(format!("--grid must be at least 2, got {grid}")));
            }
            let (f, id) = load(&source)?;
            let g = partner(&f, id, &source, &g.g)?;
            let region = region(&rargs, &[&f, &g], degree)?;
            let base = basepoint(&region, a, b)?;
            let spec = SampleSpec { lattice_n: grid, boundary_n: grid, half_line_n: grid };
            let report = coherent_matching_distance(&f, &g, degree, &region, base, &spec, &TransportConfig::new(region.separation))?;
            let mut value: serde_json::Value = serde_json::from_str(&report.to_json()).expect("report json");
            value["basepoint"] = json!(base);
            value["region"] = region_json(&region);
            Ok((serde_json::to_string_pretty(&value).expect("json") + "\n", output.out))
        }
        Command::Singular { source, rect, grid, degree, refine, output } => {
            let rect = parse_rect(&rect)?;
            let (f, _) = load(&source)?;
            Ok((singular_reports_csv(&detect_singular_pairs(&f, degree, rect, grid, refine)?), output.out))
        }
        Command::Grid { example, a, b, output } => {
            let grid = builtin_grid(&example)?;
            let text = match (a, b) {
                (Some(a), Some(b)) => intersections_csv(&line_grid_intersections(&grid, &AdmissibleLine::new(ParamPoint::new(a, b)?))),
                _ => grid.to_json()? + "\n",
            };
            Ok((text, output.out))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if k == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    match run(cli) {
        Ok((text, out)) => {
            let written = match out {
                Some(path) => std::fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
