use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use harmonic_acs::acs::{classify, STRUCTURE_TOL};
use harmonic_acs::catalog::{self, Params};
use harmonic_acs::geom::{Backend, DEFAULT_POINTS, DEFAULT_SEED};
use harmonic_acs::harmonic::{default_tol, harmonicity};
use harmonic_acs::hyper::{hypersurface_report, AMBIENT_TOL, IDENTITY_TOL};
use harmonic_acs::liealg::{self, SkewMatrix};
use harmonic_acs::parallel::Execution;

#[derive(Parser)]
#[command(
    name = "hacs",
    version,
    about = "Verify harmonicity of almost contact metric structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List catalog models with their expected verdicts.
    List,
    /// Evaluate harmonic-section and harmonic-map residuals and compare with expectations.
    Verify(RunArgs),
    /// Classify the structure (Sasakian, Kenmotsu, cosymplectic, …) and fit (α, β).
    Classify(RunArgs),
    /// Split a skew matrix into its h, m1 and m2 components.
    Decompose {
        /// Matrix file: JSON array of rows, or whitespace/comma separated rows.
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the hypersurface identity suite on a hypersurface model.
    Hypersurface(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Jet,
    Fd,
}

#[derive(Args)]
struct RunArgs {
    /// Catalog model id (see `hacs list`).
    id: String,
    /// Half the dimension of the contact distribution.
    #[arg(long)]
    n: Option<usize>,
    /// Ellipsoid semi-axis.
    #[arg(long)]
    a: Option<f64>,
    /// Kenmotsu warping rate.
    #[arg(long)]
    c: Option<f64>,
    /// Base model for product-line.
    #[arg(long)]
    base: Option<String>,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    points: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Verdict tolerance (default 1e-6 for jet, 5e-3 for fd).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = BackendArg::Jet)]
    backend: BackendArg,
    /// Evaluate points one at a time.
    #[arg(long)]
    sequential: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn invalid(e: impl std::fmt::Display) -> anyhow::Error {
    anyhow!("{e}")
}

struct Run {
    backend: Backend,
    exec: Execution,
    tol: f64,
    params: Params,
    points: Vec<Vec<f64>>,
    model: catalog::Model,
    config: Value,
}

impl RunArgs {
    fn prepare(&self) -> anyhow::Result<Run> {
        let backend = match self.backend {
            BackendArg::Jet => Backend::Jet,
            BackendArg::Fd => Backend::Fd,
        };
        let tol = self.tol.unwrap_or_else(|| default_tol(backend));
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(invalid(format!("tolerance must be positive, got {tol}")));
        }
        if self.points == 0 {
            return Err(invalid("at least one point is required"));
        }
        let params = Params {
            n: self.n,
            a: self.a,
            c: self.c,
            base: self.base.clone(),
        };
        let resolved = catalog::resolve_params(&self.id, &params).map_err(invalid)?;
        let model = catalog::build(&self.id, &params).map_err(invalid)?;
        let points = model.structure().domain().sample(self.points, self.seed);
        let exec = if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        };
        let config = json!({
            "params": resolved,
            "points": self.points,
            "seed": self.seed,
            "tol": tol,
            "backend": backend,
            "execution": exec,
        });
        let run = Run {
            backend,
            exec,
            tol,
            params,
            points,
            model,
            config,
        };
        run.validate()?;
        Ok(run)
    }
}

impl Run {
    fn validate(&self) -> anyhow::Result<()> {
        let v = self
            .model
            .structure()
            .validate(&self.points, self.exec)
            .map_err(invalid)?;
        v.require(STRUCTURE_TOL)
            .map_err(|e| invalid(format!("{e}: {}", serde_json::to_string(&v).unwrap_or_default())))?;
        if let Some(h) = self.model.hypersurface() {
            let ys: Vec<Vec<f64>> = self.points.iter().map(|x| h.ambient_point(x)).collect();
            let a = h.ambient.validate(&ys, self.exec).map_err(invalid)?;
            a.require(AMBIENT_TOL).map_err(|e| {
                invalid(format!(
                    "ambient {e}: {}",
                    serde_json::to_string(&a).unwrap_or_default()
                ))
            })?;
        }
        Ok(())
    }
}

fn emit(report: &Value, path: Option<&Path>, summary: &str) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    match path {
        Some(p) => {
            fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?;
            println!("{summary}");
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn verify(args: &RunArgs) -> anyhow::Result<bool> {
    let run = args.prepare()?;
    let s = run.model.structure();
    let report = harmonicity(s, &run.points, run.tol, run.backend, run.exec)?;
    let exp = catalog::expected_verdicts(&args.id, &run.params)?;
    let (es, em) = exp.resolve(&report.verdicts);
    let v = report.verdicts;
    let matched = v.harmonic_section == es && v.harmonic_map == em;
    let out = json!({
        "model_id": args.id,
        "config": run.config,
        "per_point": report.per_point,
        "maxima": report.maxima,
        "verdicts": report.verdicts,
        "expected": {"harmonic_section": es, "harmonic_map": em},
        "match": matched,
    });
    let summary = format!(
        "{}: section={} map={} expected=({es},{em}) {}",
        args.id,
        v.harmonic_section,
        v.harmonic_map,
        if matched { "MATCH" } else { "MISMATCH" }
    );
    emit(&out, args.json.as_deref(), &summary)?;
    Ok(matched)
}

fn run_classify(args: &RunArgs) -> anyhow::Result<bool> {
    let run = args.prepare()?;
    let c = classify(run.model.structure(), &run.points, run.tol, run.backend, run.exec)?;
    let flags = serde_json::to_value(c.flags)?;
    let expected = catalog::expected_flags(&args.id, &run.params)?;
    let matched = expected.iter().all(|f| flags.get(*f) == Some(&Value::Bool(true)));
    let out = json!({
        "model_id": args.id,
        "config": run.config,
        "per_point": c.per_point,
        "maxima": {"fit_residual": c.max_fit_residual},
        "verdicts": flags,
        "alpha": c.alpha,
        "beta": c.beta,
        "expected": expected,
        "match": matched,
    });
    let summary = format!(
        "{}: alpha={:.6} beta={:.6} {}",
        args.id,
        c.alpha.mean,
        c.beta.mean,
        if matched { "MATCH" } else { "MISMATCH" }
    );
    emit(&out, args.json.as_deref(), &summary)?;
    Ok(matched)
}

fn run_hypersurface(args: &RunArgs) -> anyhow::Result<bool> {
    let run = args.prepare()?;
    let hs = run
        .model
        .hypersurface()
        .ok_or_else(|| invalid(format!("{} is not a hypersurface model", args.id)))?;
    let r = hypersurface_report(hs, &run.points, run.tol, run.backend, run.exec)?;
    let exp = catalog::expected_verdicts(&args.id, &run.params)?;
    let (es, em) = exp.resolve(&r.harmonic.verdicts);
    let v = r.harmonic.verdicts;
    let identities_ok = r.identities.max() < IDENTITY_TOL;
    let t = &r.theorems;
    let theorems_ok = [t.shape_theorem_holds, t.umbilic_theorem_holds, t.product_theorem_holds]
        .iter()
        .all(|c| c.unwrap_or(true))
        && t.biconditionals.is_none_or(|b| b.iter().all(|&x| x));
    let matched = v.harmonic_section == es && v.harmonic_map == em && identities_ok && theorems_ok;
    let out = json!({
        "model_id": args.id,
        "config": run.config,
        "per_point": r.per_point,
        "maxima": r.harmonic.maxima,
        "verdicts": r.harmonic.verdicts,
        "expected": {"harmonic_section": es, "harmonic_map": em},
        "match": matched,
        "ambient": r.ambient,
        "identities": r.identities,
        "theorems": r.theorems,
    });
    let summary = format!(
        "{}: section={} map={} identities max={:.3e} theorems={} {}",
        args.id,
        v.harmonic_section,
        v.harmonic_map,
        r.identities.max(),
        theorems_ok,
        if matched { "MATCH" } else { "MISMATCH" }
    );
    emit(&out, args.json.as_deref(), &summary)?;
    Ok(matched)
}

fn parse_matrix(text: &str) -> anyhow::Result<Vec<Vec<f64>>> {
    if let Ok(rows) = serde_json::from_str::<Vec<Vec<f64>>>(text) {
        return Ok(rows);
    }
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<f64>().map_err(|e| invalid(format!("bad entry `{t}`: {e}"))))
                .collect()
        })
        .collect::<anyhow::Result<_>>()?;
    if rows.is_empty() {
        bail!(invalid("matrix file is empty"));
    }
    Ok(rows)
}

fn decompose(file: &Path, json_path: Option<&Path>) -> anyhow::Result<bool> {
    let text = fs::read_to_string(file).map_err(|e| invalid(format!("{}: {e}", file.display())))?;
    let rows = parse_matrix(&text)?;
    let a = SkewMatrix::from_rows(&rows).map_err(invalid)?;
    let split = liealg::decompose(&a);
    let err = (split.reconstruct() - a.entries()).amax();
    let hat = liealg::hat(&split.m1_part).ok().map(|h| {
        (0..h.nrows())
            .map(|i| h.row(i).iter().copied().collect::<Vec<f64>>())
            .collect::<Vec<_>>()
    });
    let hat2 = liealg::hat2(&split.m2_part)
        .ok()
        .map(|v| v.iter().copied().collect::<Vec<f64>>());
    let out = json!({
        "size": 2 * a.k() + 1,
        "k": a.k(),
        "h": split.h_part.rows(),
        "m1": split.m1_part.rows(),
        "m2": split.m2_part.rows(),
        "norms": {
            "h": split.h_part.norm_sq().sqrt(),
            "m1": split.m1_part.norm_sq().sqrt(),
            "m2": split.m2_part.norm_sq().sqrt(),
        },
        "m1_hat": hat,
        "m2_hat": hat2,
        "reconstruction_error": err,
    });
    let summary = format!(
        "decomposed {}x{} matrix, reconstruction error {err:.3e}",
        2 * a.k() + 1,
        2 * a.k() + 1
    );
    emit(&out, json_path, &summary)?;
    Ok(true)
}

fn list() -> anyhow::Result<bool> {
    for e in catalog::entries() {
        let fmt = |x: catalog::Expected| match x {
            catalog::Expected::Fixed(b) => b.to_string(),
            catalog::Expected::FollowsXi => "as xi".to_string(),
        };
        println!(
            "{:<24} section={:<6} map={:<6} params: {}\n    {}\n    basis: {}",
            e.id,
            fmt(e.expected.harmonic_section),
            fmt(e.expected.harmonic_map),
            e.params,
            e.description,
            e.basis
        );
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::List => list(),
        Command::Verify(a) => verify(a),
        Command::Classify(a) => run_classify(a),
        Command::Hypersurface(a) => run_hypersurface(a),
        Command::Decompose { file, json } => decompose(file, json.as_deref()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
