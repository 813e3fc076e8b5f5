use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use wg_elasticity::mesh::{check_regularity, import_mesh, DiagonalPattern, DEFAULT_THETA_THRESHOLD};
use wg_elasticity::verify::{convergence_study, error_norms, run_selftest, MeshFamily};
use wg_elasticity::{
    solve_elasticity, CaseId, ConvergenceReport, LameParameters, ManufacturedCase, Mesh, SolveMethod, SolveOptions,
    StudyConfig,
};

#[derive(Parser, Debug)]
#[command(name = "wg-elast", version, about = "Weak Galerkin solver for linear elasticity")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "WG_ELAST_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one manufactured problem and report errors and solver diagnostics.
    Solve(SolveArgs),
    /// Run a convergence study and write the rate table as CSV.
    Convergence(ConvergenceArgs),
    /// Validate a mesh file and print shape-regularity indicators.
    CheckMesh(CheckMeshArgs),
    /// Run the built-in property checks.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Family {
    Triangle,
    Ladder,
    CubeTet,
}

impl From<Family> for MeshFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::Triangle => MeshFamily::Triangle,
            Family::Ladder => MeshFamily::Ladder,
            Family::CubeTet => MeshFamily::CubeTet,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Pattern {
    Uniform,
    Alternating,
}

impl From<Pattern> for DiagonalPattern {
    fn from(p: Pattern) -> Self {
        match p {
            Pattern::Uniform => DiagonalPattern::Uniform,
            Pattern::Alternating => DiagonalPattern::Alternating,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Method {
    Direct,
    Cg,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Manufactured case supplying the data.
    #[arg(long, default_value = "2d")]
    case: CaseId,
    /// Mesh file; without it a generated mesh with `--n` cells per side is used.
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long, value_enum, default_value = "uniform")]
    pattern: Pattern,
    #[arg(long, default_value_t = 0)]
    k: usize,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, value_enum, default_value = "direct")]
    method: Method,
    /// Write a one-row CSV summary here instead of printing it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct ConvergenceArgs {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    case: Option<CaseId>,
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long, value_enum)]
    pattern: Option<Pattern>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    mu: Option<f64>,
    /// Comma-separated list, e.g. `1,1e3,1e6`.
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    /// `a..b` for the sizes 2^a..=2^b, or a comma-separated list of sizes.
    #[arg(long)]
    levels: Option<String>,
    /// Largest allowed skeleton dof count on the finest level.
    #[arg(long)]
    dof_budget: Option<usize>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Check the final rates against k+2 (displacement) and k+1 (stress).
    #[arg(long)]
    assert: bool,
    /// Allowed deviation of the final rates when `--assert` is given.
    #[arg(long)]
    rate_tol: Option<f64>,
    /// With `--assert`, also require err(max lambda) / err(min lambda) to be
    /// at most this on the finest level.
    #[arg(long)]
    max_lambda_ratio: Option<f64>,
}

#[derive(Args, Debug)]
struct CheckMeshArgs {
    #[arg(long)]
    file: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THETA_THRESHOLD)]
    threshold: f64,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    /// Print every property, not only failures.
    #[arg(long)]
    verbose: bool,
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    case: Option<CaseId>,
    family: Option<Family>,
    pattern: Option<Pattern>,
    k: Option<usize>,
    mu: Option<f64>,
    lambda: Option<Vec<f64>>,
    levels: Option<LevelsValue>,
    dof_budget: Option<usize>,
    method: Option<Method>,
    out: Option<PathBuf>,
    #[serde(default)]
    assert: bool,
    rate_tol: Option<f64>,
    max_lambda_ratio: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum LevelsValue {
    Range(String),
    List(Vec<usize>),
}

/// Outcome of a command that ran to completion.
enum Status {
    Ok,
    AssertionFailed,
}

fn main() -> ExitCode {
    // Exit code 2 is reserved for failed assertions, so usage errors map to 1.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Convergence(a) => convergence(a),
        Command::CheckMesh(a) => check_mesh(a),
        Command::Selftest(a) => selftest(a),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::AssertionFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn solve_options(method: Method) -> SolveOptions {
    let method = match method {
        Method::Direct => SolveMethod::Direct,
        Method::Cg => SolveMethod::Cg,
    };
    SolveOptions { method, ..SolveOptions::default() }
}

fn read_mesh(path: &Path) -> Result<Mesh> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    import_mesh(&text).with_context(|| format!("parsing {}", path.display()))
}

fn default_family(case: CaseId) -> Family {
    if case.dim() == 3 {
        Family::CubeTet
    } else {
        Family::Triangle
    }
}

fn solve(a: SolveArgs) -> Result<Status> {
    let (mesh, label) = match &a.mesh {
        Some(p) => (read_mesh(p)?, p.display().to_string()),
        None => {
            let family = a.family.unwrap_or_else(|| default_family(a.case));
            (MeshFamily::from(family).build(a.n, a.pattern.into())?, format!("{family:?}-{}", a.n).to_lowercase())
        }
    };
    if mesh.dim() != a.case.dim() {
        bail!("case {} needs a {}D mesh, got {}D", a.case.name(), a.case.dim(), mesh.dim());
    }
    let lame = LameParameters::new(a.mu.unwrap_or(a.case.default_mu()), a.lambda)?;
    let case = ManufacturedCase::new(a.case, lame);
    let out = solve_elasticity(&mesh, a.k, &case.problem(), &solve_options(a.method))?;
    let e = error_norms(&mesh, &case, &out.solution)?;
    let mut text = String::from(
        "case,k,lambda,mesh,cells,dofs,free_dofs,err_u,err_sigma,err_gradu,relative_residual,positive_definite\n",
    );
    text += &format!(
        "{},{},{},{},{},{},{},{},{},{},{:e},{}\n",
        a.case.name(),
        a.k,
        a.lambda,
        label,
        mesh.cells().len(),
        out.dofs.n_skeleton_dofs(),
        out.system.n_free(),
        e.err_u,
        e.err_sigma,
        e.err_gradu,
        out.report.relative_residual,
        out.report.positive_definite
    );
    emit(a.out.as_deref(), &text)?;
    Ok(Status::Ok)
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn parse_levels(s: &str) -> Result<Vec<usize>> {
    if let Some((lo, hi)) = s.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let lo: u32 = lo.trim().parse().with_context(|| format!("bad level range `{s}`"))?;
        let hi: u32 = hi.trim().parse().with_context(|| format!("bad level range `{s}`"))?;
        if lo > hi || hi > 20 {
            bail!("level range `{s}` must satisfy a <= b <= 20");
        }
        return Ok((lo..=hi).map(|e| 1usize << e).collect());
    }
    s.split(',').map(|t| t.trim().parse::<usize>().with_context(|| format!("bad level `{t}`"))).collect()
}

/// Flags merged over the optional config file.
fn study_config(a: &ConvergenceArgs) -> Result<(StudyConfig, FileConfig)> {
    let mut file = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str::<FileConfig>(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => FileConfig::default(),
    };
    let case = a.case.or(file.case).unwrap_or(CaseId::Case2d);
    let k = a.k.or(file.k).unwrap_or(0);
    let lambdas = a.lambda.clone().or(file.lambda.take()).unwrap_or_else(|| vec![1.0]);
    let levels = match (&a.levels, &file.levels) {
        (Some(s), _) => parse_levels(s)?,
        (None, Some(LevelsValue::Range(s))) => parse_levels(s)?,
        (None, Some(LevelsValue::List(v))) => v.clone(),
        (None, None) => parse_levels("2..5")?,
    };
    let mut cfg = StudyConfig::new(case, k, lambdas, levels);
    cfg.family = a.family.or(file.family).unwrap_or_else(|| default_family(case)).into();
    if let Some(p) = a.pattern.or(file.pattern) {
        cfg.pattern = p.into();
    }
    if let Some(mu) = a.mu.or(file.mu) {
        cfg.mu = mu;
    }
    cfg.dof_budget = a.dof_budget.or(file.dof_budget);
    cfg.solve = solve_options(a.method.or(file.method).unwrap_or(Method::Direct));
    file.assert |= a.assert;
    file.rate_tol = a.rate_tol.or(file.rate_tol);
    file.max_lambda_ratio = a.max_lambda_ratio.or(file.max_lambda_ratio);
    file.out = a.out.clone().or(file.out);
    Ok((cfg, file))
}

fn convergence(a: ConvergenceArgs) -> Result<Status> {
    let (cfg, opts) = study_config(&a)?;
    let report = convergence_study(&cfg)?;
    emit(opts.out.as_deref(), &report.to_csv_string()?)?;
    if !opts.assert {
        return Ok(Status::Ok);
    }
    let failures = check_rates(&cfg, &report, opts.rate_tol.unwrap_or(0.2), opts.max_lambda_ratio);
    for f in &failures {
        eprintln!("assertion failed: {f}");
    }
    Ok(if failures.is_empty() { Status::Ok } else { Status::AssertionFailed })
}

fn check_rates(cfg: &StudyConfig, report: &ConvergenceReport, tol: f64, max_ratio: Option<f64>) -> Vec<String> {
    let mut failures = Vec::new();
    let want_u = cfg.k as f64 + 2.0;
    let want_s = cfg.k as f64 + 1.0;
    for &lambda in &cfg.lambdas {
        let Some(last) = report.for_lambda(lambda).last().copied() else { continue };
        let (Some(ru), Some(rs)) = (last.rate_u, last.rate_sigma) else {
            failures.push(format!("lambda={lambda}: at least two levels are needed for a rate"));
            continue;
        };
        if (ru - want_u).abs() > tol {
            failures.push(format!("lambda={lambda}: rate_u {ru:.3} not within {tol} of {want_u}"));
        }
        if (rs - want_s).abs() > tol {
            failures.push(format!("lambda={lambda}: rate_sigma {rs:.3} not within {tol} of {want_s}"));
        }
    }
    if let Some(max) = max_ratio {
        let finest = *cfg.levels.last().unwrap();
        let lo = cfg.lambdas.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = cfg.lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if let (Some(a), Some(b)) = (report.row(lo, finest), report.row(hi, finest)) {
            for (name, r) in [("u", b.err_u / a.err_u), ("sigma", b.err_sigma / a.err_sigma)] {
                if r > max {
                    failures.push(format!("err_{name} ratio {r:.3} between lambda={hi} and {lo} exceeds {max}"));
                }
            }
        }
    }
    failures
}

fn check_mesh(a: CheckMeshArgs) -> Result<Status> {
    let mesh = read_mesh(&a.file)?;
    let r = check_regularity(&mesh, a.threshold);
    println!("dimension: {}", mesh.dim());
    println!("vertices: {}", mesh.vertices().len());
    println!("cells: {}", mesh.cells().len());
    println!("faces: {}", mesh.faces().len());
    println!("skeleton pieces: {}", mesh.skeleton().len());
    println!("volume: {}", mesh.total_volume());
    println!("min theta: {:.6}", r.min_theta);
    println!("min ell: {:.6}", r.min_ell);
    println!("flagged cells (threshold {}): {}", r.threshold, r.flagged.len());
    for c in &r.flagged {
        println!("  cell {c}: theta {:.3e}, ell {:.3e}", r.theta[*c], r.ell[*c]);
    }
    Ok(Status::Ok)
}

fn selftest(a: SelftestArgs) -> Result<Status> {
    let report = run_selftest();
    for r in &report.results {
        if a.verbose || !r.passed {
            let tag = if r.passed { "PASS" } else { "FAIL" };
            println!("{tag} {:<40} error {:.3e} (tolerance {:.1e}) {}", r.name, r.error, r.tolerance, r.detail);
        }
    }
    println!("{} passed, {} failed", report.passed(), report.failed());
    Ok(if report.all_passed() { Status::Ok } else { Status::AssertionFailed })
}
