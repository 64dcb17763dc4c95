//! `adicspace`: JSON reports for diagrams, labelings, dimension-space
//! matrices, random walks, rotations, cutting and stacking, and rank-one
//! approximation of circulant products.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adicspace::atcheck::{self, circulant_product, explicit_rank_one, greedy_rank_one};
use adicspace::bratteli::{validate_diagram, DiagramSpec, OrderedBratteliDiagram};
use adicspace::dimspace::{build_matrices, is_nonincreasing, ones_state};
use adicspace::families;
use adicspace::labeling::label_edges;
use adicspace::laurent::{format_rational, parse_rational, LaurentPoly, Rational, Scalar};
use adicspace::rotation::{
    rank_one_gap, rank_one_polys, rotation_diagram, CFExpansion, GrowthRule,
};
use adicspace::stacking::{build_tower, compare_with_rotation};
use adicspace::walk::{exact_distribution, simulate, tv_distance, WalkState};
use adicspace::Error;
use clap::{ArgGroup, Args, Parser, Subcommand};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

/// Largest accepted `--budget`.
const HARD_BUDGET_CAP: u64 = 1 << 28;

#[derive(Parser, Debug)]
#[command(
    name = "adicspace",
    version,
    about = "Exact dimension-space computations for ordered Bratteli diagrams"
)]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monomial cap for exact expansions.
    #[arg(long, global = true, env = "ADICSPACE_BUDGET", default_value_t = 1 << 20,
          value_parser = clap::value_parser!(u64).range(1..=HARD_BUDGET_CAP))]
    budget: u64,
    /// Seed for the walk simulator.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a diagram file and summarise it.
    Validate { diagram: PathBuf },
    /// Edge labels and extremal path sums.
    Label { diagram: PathBuf },
    /// The matrices M_n over the Laurent polynomials.
    Matrices(MatricesArgs),
    /// Exact and simulated laws of the matrix-valued walk.
    Walk(WalkArgs),
    /// Continued-fraction rotation diagram.
    Rotation(RotationArgs),
    /// Cutting-and-stacking towers and the skyscraper.
    Stack(StackArgs),
    /// Rank-one approximation of circulant products.
    At(AtArgs),
    /// Emit a bundled example diagram.
    Generate(GenerateArgs),
}

#[derive(Args, Debug)]
struct MatricesArgs {
    diagram: PathBuf,
    /// Only the first N matrices.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    depth: Option<u64>,
    /// Partial product M_{b−1}⋯M_a, written `a..b`.
    #[arg(long)]
    product: Option<String>,
    /// JSON array of Laurent polynomials to push forward.
    #[arg(long, requires = "horizon")]
    norm: Option<PathBuf>,
    /// Level of the vector given with --norm.
    #[arg(long, default_value_t = 0)]
    from: usize,
    #[arg(long, requires = "norm")]
    horizon: Option<usize>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("mode").required(true).multiple(true).args(["exact", "trials"])))]
struct WalkArgs {
    diagram: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    level: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    trials: Option<u64>,
    #[arg(long)]
    exact: bool,
    /// Starting vertex index within the starting level.
    #[arg(long, default_value_t = 0)]
    vertex: usize,
    #[arg(long, default_value_t = 0)]
    start_level: usize,
}

#[derive(Args, Debug, Clone)]
#[command(group(ArgGroup::new("terms").required(true).args(["cf", "cf_file"])))]
struct CfArgs {
    /// Comma-separated terms a(1), a(2), ….
    #[arg(long)]
    cf: Option<String>,
    /// File holding the terms.
    #[arg(long)]
    cf_file: Option<PathBuf>,
    /// Growth of the terms beyond those given: linear[:s] or geometric[:r].
    #[arg(long)]
    rule: Option<String>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("what").required(true).args(["matrices", "polys", "gaps"])))]
struct RotationArgs {
    #[command(flatten)]
    cf: CfArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    depth: u64,
    #[arg(long)]
    matrices: bool,
    #[arg(long)]
    polys: bool,
    #[arg(long)]
    gaps: bool,
}

#[derive(Args, Debug)]
struct StackArgs {
    #[command(flatten)]
    cf: CfArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    stage: u64,
    /// Apply the stage map to this rational point.
    #[arg(long, conflicts_with = "compare")]
    map: Option<String>,
    /// Compare translations with the rotation on a grid.
    #[arg(long)]
    compare: bool,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    grid: u64,
    #[arg(long, default_value = "1/8")]
    tolerance: String,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("method").required(true).args(["explicit", "greedy"])))]
struct AtArgs {
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(short = 'M', long = "M", value_parser = clap::value_parser!(u64).range(1..))]
    m: u64,
    #[arg(short = 'N', long = "N", value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long)]
    explicit: bool,
    /// Sweeps of coordinate descent.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    greedy: Option<u64>,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// odometer, morse or circulant.
    family: String,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    depth: u64,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(2..))]
    k: u64,
}

/// Everything a report depends on, hashed into `input_hash`.
struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    fn new(args: &[String]) -> Self {
        let mut hasher = Sha256::new();
        for a in args {
            hasher.update(a.as_bytes());
            hasher.update([0]);
        }
        Inputs { hasher }
    }

    fn read(&mut self, path: &Path) -> Result<String, Error> {
        let bytes = fs::read(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
        self.hasher.update(&bytes);
        String::from_utf8(bytes)
            .map_err(|_| Error::Parse(format!("{} is not UTF-8", path.display())))
    }

    fn digest(self) -> String {
        hex::encode(self.hasher.finalize())
    }
}

fn load_diagram(inputs: &mut Inputs, path: &Path) -> Result<OrderedBratteliDiagram, Error> {
    let spec = DiagramSpec::from_json_str(&inputs.read(path)?)?;
    validate_diagram(&spec)
}

fn load_cf(inputs: &mut Inputs, a: &CfArgs) -> Result<CFExpansion, Error> {
    let text = match (&a.cf, &a.cf_file) {
        (Some(s), _) => s.clone(),
        (None, Some(p)) => inputs.read(p)?,
        (None, None) => unreachable!("clap requires one of --cf and --cf-file"),
    };
    let rule = a
        .rule
        .as_deref()
        .map(str::parse::<GrowthRule>)
        .transpose()?;
    CFExpansion::new(CFExpansion::parse_terms(&text)?, rule)
}

fn by_vertex_name(d: &OrderedBratteliDiagram, level: usize, v: Value) -> Value {
    let Value::Object(m) = v else { return v };
    let renamed: Map<String, Value> = m
        .into_iter()
        .map(|(k, x)| {
            let name = k
                .parse::<usize>()
                .ok()
                .map(|i| d.vertex_name(level, i).to_string())
                .unwrap_or(k);
            (name, x)
        })
        .collect();
    Value::Object(renamed)
}

fn run(cli: &Cli, inputs: &mut Inputs) -> Result<Value, Error> {
    let budget = u128::from(cli.budget);
    match &cli.command {
        Command::Validate { diagram } => {
            let d = load_diagram(inputs, diagram)?;
            Ok(json!({
                "valid": true,
                "depth": d.depth(),
                "dims": (0..=d.depth()).map(|n| d.dim(n)).collect::<Vec<_>>(),
                "edges": (0..d.depth()).map(|n| d.edges(n).len()).collect::<Vec<_>>(),
            }))
        }
        Command::Label { diagram } => {
            let d = load_diagram(inputs, diagram)?;
            Ok(label_edges(&d).to_json(&d))
        }
        Command::Matrices(a) => matrices(inputs, a),
        Command::Walk(a) => walk(inputs, a, cli.seed),
        Command::Rotation(a) => rotation(inputs, a),
        Command::Stack(a) => stack(inputs, a),
        Command::At(a) => at(a, budget),
        Command::Generate(a) => generate(a),
    }
}

fn matrices(inputs: &mut Inputs, a: &MatricesArgs) -> Result<Value, Error> {
    let d = load_diagram(inputs, &a.diagram)?;
    let ds = build_matrices(&d, &label_edges(&d));
    let depth = match a.depth {
        Some(n) if n as usize > ds.depth() => {
            return Err(Error::DepthExceeded {
                requested: n as usize,
                depth: ds.depth(),
            })
        }
        Some(n) => n as usize,
        None => ds.depth(),
    };
    let mut out = Map::new();
    out.insert(
        "matrices".into(),
        Value::Array(ds.matrices()[..depth].iter().map(|m| m.to_json()).collect()),
    );
    out.insert("column_stochastic".into(), json!(ds.is_column_stochastic()));
    out.insert(
        "harmonic_ones".into(),
        ds.check_harmonic(&ones_state(ds.dims()))?.to_json(),
    );
    if let Some(range) = &a.product {
        let (from, to) = range
            .split_once("..")
            .and_then(|(x, y)| Some((x.trim().parse().ok()?, y.trim().parse().ok()?)))
            .ok_or_else(|| Error::Parse(format!("product range {range:?} is not a..b")))?;
        out.insert(
            "product".into(),
            json!({"from": from, "to": to, "matrix": ds.partial_product(from, to)?.to_json()}),
        );
    }
    if let (Some(path), Some(horizon)) = (&a.norm, a.horizon) {
        let v: Value =
            serde_json::from_str(&inputs.read(path)?).map_err(|e| Error::Parse(e.to_string()))?;
        let f = v
            .as_array()
            .ok_or_else(|| Error::Parse("the vector must be a JSON array of polynomials".into()))?
            .iter()
            .map(LaurentPoly::from_json)
            .collect::<Result<Vec<_>, _>>()?;
        let seq = ds.norm_sequence(&f, a.from, horizon)?;
        out.insert(
            "norm".into(),
            json!({
                "from": a.from,
                "horizon": horizon,
                "sequence": seq.iter().map(format_rational).collect::<Vec<_>>(),
                "nonincreasing": is_nonincreasing(&seq),
            }),
        );
    }
    Ok(Value::Object(out))
}

fn walk(inputs: &mut Inputs, a: &WalkArgs, seed: u64) -> Result<Value, Error> {
    let d = load_diagram(inputs, &a.diagram)?;
    let ds = build_matrices(&d, &label_edges(&d));
    let level = a.level as usize;
    let start = WalkState::new(0, a.vertex, a.start_level);
    let mut out = Map::new();
    out.insert("level".into(), json!(level));
    let exact = if a.exact {
        let h = exact_distribution(&ds, level, &start)?;
        out.insert("exact".into(), by_vertex_name(&d, level, h.to_json()));
        Some(h)
    } else {
        None
    };
    if let Some(trials) = a.trials {
        let h = simulate(&ds, level, &start, trials, seed)?;
        out.insert("seed".into(), json!(seed));
        out.insert("trials".into(), json!(trials));
        out.insert("empirical".into(), by_vertex_name(&d, level, h.to_json()));
        if let Some(e) = &exact {
            let tv = tv_distance(e, &h)?;
            out.insert("tv_distance".into(), json!(format_rational(&tv)));
        }
    }
    Ok(Value::Object(out))
}

fn rotation(inputs: &mut Inputs, a: &RotationArgs) -> Result<Value, Error> {
    let cf = load_cf(inputs, &a.cf)?;
    let depth = a.depth as usize;
    let mut out = Map::new();
    out.insert("alpha".into(), cf.alpha().to_json());
    out.insert("summability".into(), cf.summability_report().to_json());
    if a.matrices {
        let (d, l) = rotation_diagram(&cf, depth)?;
        let ds = build_matrices(&d, &l);
        out.insert(
            "matrices".into(),
            Value::Array(ds.matrices().iter().map(|m| m.to_json()).collect()),
        );
    }
    if a.polys {
        let (polys, warning) = rank_one_polys(&cf, depth)?;
        out.insert(
            "polys".into(),
            Value::Array(polys.iter().map(|p| p.to_json()).collect()),
        );
        if let Some(w) = warning {
            out.insert("warning".into(), json!(w));
        }
    }
    if a.gaps {
        let gaps = (1..=depth)
            .map(|n| rank_one_gap(&cf, n).map(|g| g.to_json()))
            .collect::<Result<Vec<_>, _>>()?;
        out.insert("gaps".into(), Value::Array(gaps));
    }
    Ok(Value::Object(out))
}

fn stack(inputs: &mut Inputs, a: &StackArgs) -> Result<Value, Error> {
    let cf = load_cf(inputs, &a.cf)?;
    let t = build_tower(&cf, a.stage as usize)?;
    if let Some(x) = &a.map {
        let x = parse_rational(x)?;
        let level = t.locate(&x)?;
        let y = t.map(&x)?;
        return Ok(json!({
            "stage": t.stage(),
            "x": format_rational(&x),
            "level": level,
            "image": format_rational(&y),
        }));
    }
    if a.compare {
        let tol: Rational = parse_rational(&a.tolerance)?;
        return Ok(compare_with_rotation(&t, &cf, a.grid as usize, &tol)?.to_json());
    }
    Ok(t.to_json())
}

fn at(a: &AtArgs, budget: u128) -> Result<Value, Error> {
    let (k, m, n) = (a.k as usize, a.m as usize, a.n as usize);
    if a.explicit && k != 4 {
        return Err(Error::InvalidParameter(
            "the explicit construction is defined for k = 4".into(),
        ));
    }
    let mat = circulant_product(k, m, n, budget)?;
    let mut out = Map::new();
    out.insert("k".into(), json!(k));
    out.insert("M".into(), json!(m));
    out.insert("N".into(), json!(n));
    if a.explicit {
        let x = explicit_rank_one(m, n, budget)?;
        let err = atcheck::approximation_error(&mat, &x.candidate())?;
        out.insert("error".into(), json!(format_rational(&err)));
        out.insert(
            "regrouped_error".into(),
            json!(format_rational(&x.regrouped_error(&mat))),
        );
        out.insert("class_violations".into(), json!(x.class_violations(&mat)));
        out.insert("norms".into(), x.norms_json());
    } else if let Some(iters) = a.greedy {
        let r = greedy_rank_one(&mat, iters as usize)?;
        let err = r.trace.last().cloned().unwrap_or_default();
        out.insert("error".into(), json!(format_rational(&err)));
        out.insert(
            "trace".into(),
            json!(r.trace.iter().map(format_rational).collect::<Vec<_>>()),
        );
        out.insert(
            "norms".into(),
            json!({
                "column": r.candidate.column.iter().map(|p| format_rational(&p.one_norm())).collect::<Vec<_>>(),
                "row": r.candidate.row.iter().map(|p| format_rational(&p.one_norm())).collect::<Vec<_>>(),
            }),
        );
        out.insert("candidate".into(), r.candidate.to_json());
    }
    Ok(Value::Object(out))
}

fn generate(a: &GenerateArgs) -> Result<Value, Error> {
    let depth = a.depth as usize;
    let d = match a.family.as_str() {
        "odometer" => families::odometer(depth),
        "morse" => families::morse(depth),
        "circulant" => families::circulant(a.k as usize, depth),
        other => return Err(Error::InvalidParameter(format!("unknown family {other:?}"))),
    };
    serde_json::to_value(d.to_spec()).map_err(|e| Error::Parse(e.to_string()))
}

fn emit(out: Option<&Path>, v: &Value) -> Result<(), String> {
    let text = serde_json::to_string_pretty(v).expect("reports serialize") + "\n";
    match out {
        Some(p) => fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    // The output path does not change the result.
    let hashed: Vec<String> = {
        let mut v = Vec::new();
        let mut it = args.iter().skip(1);
        while let Some(a) = it.next() {
            if a == "--out" {
                it.next();
            } else if !a.starts_with("--out=") {
                v.push(a.clone());
            }
        }
        v.push(format!("budget={}", cli.budget));
        v
    };
    let mut inputs = Inputs::new(&hashed);
    let result = run(&cli, &mut inputs);
    let mut report = Map::new();
    report.insert("tool".into(), json!("adicspace"));
    report.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    report.insert("input_hash".into(), json!(inputs.digest()));
    let code = match result {
        Ok(v) => {
            report.insert("result".into(), v);
            ExitCode::SUCCESS
        }
        Err(e) => {
            report.insert(
                "error".into(),
                json!({"code": e.code(), "message": e.to_string()}),
            );
            ExitCode::from(1)
        }
    };
    if let Err(msg) = emit(cli.out.as_deref(), &Value::Object(report)) {
        eprintln!("{msg}");
        return ExitCode::from(1);
    }
    code
}
