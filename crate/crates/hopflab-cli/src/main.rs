//! `hopflab`: verification laboratory for the Hopf hypersurface catalog in
//! indefinite complex projective space.
//!
//! Exit codes: 0 all criteria passed, 1 at least one criterion failed,
//! 2 configuration or feasibility error, 3 internal numeric failure.

use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use hopflab_cli::config::{
    self, canonical_id, default_families, parse_family_descriptor, ConfigError, ReportFormat,
    SuiteConfig,
};
use hopflab_cli::report::{parse_json, render_json, render_markdown};
use hopflab_cli::suite::run_suite;
use hopflab_core::catalog::{Family, HypersurfaceSpec};
use hopflab_core::spectral::{classify, operator_spectrum, spectral_summary};
use hopflab_core::weingarten::descend;
use hopflab_core::Signature;

#[derive(Parser)]
#[command(
    name = "hopflab",
    version,
    about = "Numerical verification of Hopf hypersurfaces in indefinite complex projective space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

// The variants differ in size, but exactly one is ever built per process.
#[allow(clippy::large_enum_variant)]
#[derive(Subcommand)]
enum Command {
    /// List catalog members with their closed-form invariants.
    Catalog(CatalogArgs),
    /// Run the verification suite and emit a report.
    Verify(VerifyArgs),
    /// Measure one member and name its place in the classification.
    Classify(ClassifyArgs),
    /// Re-render a saved JSON report as JSON or markdown.
    Report(ReportArgs),
}

#[derive(Args)]
struct CatalogArgs {
    /// Complex dimension of the projective space.
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Index (number of timelike directions) of the ambient metric.
    #[arg(long, default_value_t = 2)]
    p: usize,
    /// Family descriptor, repeatable; defaults to the whole catalog.
    #[arg(long = "family", value_name = "DESC")]
    families: Vec<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Configuration file (`key = value` lines) applied before flags.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Complex dimension of the projective space.
    #[arg(long)]
    n: Option<usize>,
    /// Index (number of timelike directions) of the ambient metric.
    #[arg(long)]
    p: Option<usize>,
    /// Family descriptor, repeatable; replaces the default catalog.
    #[arg(long = "family", value_name = "DESC")]
    families: Vec<String>,
    /// Timelike block count for a bare `--family type_a`.
    #[arg(long)]
    q: Option<usize>,
    /// Block size for a bare `--family type_a`.
    #[arg(long)]
    m: Option<usize>,
    /// Shape parameter for a bare `--family` kind.
    #[arg(long)]
    t: Option<f64>,
    /// Sampled points per family.
    #[arg(long)]
    samples: Option<usize>,
    /// Seed every sampling stream derives from.
    #[arg(long)]
    seed: Option<u64>,
    /// Finite-difference step (alias for --tol.fd_step).
    #[arg(long, value_name = "STEP")]
    h: Option<f64>,
    /// Report file; relative paths land under HOPFLAB_OUT_DIR when set.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Report format: json or markdown.
    #[arg(long, value_name = "FMT")]
    format: Option<String>,
    #[arg(long = "tol.constraint_tol", value_name = "X")]
    tol_constraint_tol: Option<f64>,
    #[arg(long = "tol.eig_cluster_tol", value_name = "X")]
    tol_eig_cluster_tol: Option<f64>,
    #[arg(long = "tol.rank_tol", value_name = "X")]
    tol_rank_tol: Option<f64>,
    #[arg(long = "tol.fd_step", value_name = "X")]
    tol_fd_step: Option<f64>,
    #[arg(long = "tol.newton_tol", value_name = "X")]
    tol_newton_tol: Option<f64>,
    #[arg(long = "tol.newton_max_iter", value_name = "K")]
    tol_newton_max_iter: Option<u32>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Complex dimension of the projective space.
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Index (number of timelike directions) of the ambient metric.
    #[arg(long, default_value_t = 2)]
    p: usize,
    /// Family descriptor for the single member to classify.
    #[arg(long, value_name = "DESC")]
    family: String,
    /// Timelike block count for a bare `--family type_a`.
    #[arg(long)]
    q: Option<usize>,
    /// Block size for a bare `--family type_a`.
    #[arg(long)]
    m: Option<usize>,
    /// Shape parameter for a bare `--family` kind.
    #[arg(long)]
    t: Option<f64>,
    /// Seed for the sample point.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct ReportArgs {
    /// Saved JSON report to re-render.
    input: PathBuf,
    /// Output format: json or markdown.
    #[arg(long, value_name = "FMT", default_value = "json")]
    format: String,
    /// Output file; relative paths land under HOPFLAB_OUT_DIR when set.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Catalog(args) => catalog_cmd(args),
        Command::Verify(args) => verify_cmd(args),
        Command::Classify(args) => classify_cmd(args),
        Command::Report(args) => report_cmd(args),
    }
}

fn fail(code: u8, message: impl Display) -> ExitCode {
    eprintln!("hopflab: {message}");
    ExitCode::from(code)
}

/// Folds the bare `--q/--m/--t` parameter flags into the family descriptors.
fn compose_families(
    flags: &[String],
    q: Option<usize>,
    m: Option<usize>,
    t: Option<f64>,
) -> Result<Vec<String>, ConfigError> {
    let mut params = Vec::new();
    if let Some(q) = q {
        params.push(format!("q={q}"));
    }
    if let Some(m) = m {
        params.push(format!("m={m}"));
    }
    if let Some(t) = t {
        params.push(format!("t={t}"));
    }
    if params.is_empty() {
        return Ok(flags.to_vec());
    }
    let flag = if q.is_some() {
        "q"
    } else if m.is_some() {
        "m"
    } else {
        "t"
    };
    match flags {
        [] => Err(ConfigError::OrphanParameter { flag }),
        [one] => {
            let joined = params.join(",");
            Ok(vec![if one.contains(':') {
                format!("{one},{joined}")
            } else {
                format!("{one}:{joined}")
            }])
        }
        _ => Err(ConfigError::InvalidValue {
            key: "family".into(),
            value: params.join(","),
            reason: "--q/--m/--t require exactly one --family",
        }),
    }
}

fn build_config(args: &VerifyArgs) -> Result<SuiteConfig, ConfigError> {
    let mut cfg = SuiteConfig::default();
    if let Some(path) = &args.config {
        config::apply_config_file(&mut cfg, path)?;
    }
    let mut family_replaced = false;
    for descriptor in compose_families(&args.families, args.q, args.m, args.t)? {
        config::apply_pair(&mut cfg, "family", &descriptor, &mut family_replaced)?;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(p) = args.p {
        cfg.p = p;
    }
    if let Some(samples) = args.samples {
        cfg.samples = samples;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(h) = args.h {
        cfg.tol.fd_step = h;
    }
    if let Some(x) = args.tol_constraint_tol {
        cfg.tol.constraint_tol = x;
    }
    if let Some(x) = args.tol_eig_cluster_tol {
        cfg.tol.eig_cluster_tol = x;
    }
    if let Some(x) = args.tol_rank_tol {
        cfg.tol.rank_tol = x;
    }
    if let Some(x) = args.tol_fd_step {
        cfg.tol.fd_step = x;
    }
    if let Some(x) = args.tol_newton_tol {
        cfg.tol.newton_tol = x;
    }
    if let Some(k) = args.tol_newton_max_iter {
        cfg.tol.newton_max_iter = k;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    if let Some(format) = &args.format {
        cfg.format = ReportFormat::parse(format)?;
    }
    Ok(cfg)
}

fn verify_cmd(args: VerifyArgs) -> ExitCode {
    let cfg = match build_config(&args) {
        Ok(cfg) => cfg,
        Err(e) => return fail(2, e),
    };
    let start = Instant::now();
    let outcome = match run_suite(&cfg) {
        Ok(outcome) => outcome,
        Err(e) => return fail(e.exit_code() as u8, e),
    };
    let rendered = match cfg.format {
        ReportFormat::Json => render_json(&outcome.report),
        ReportFormat::Markdown => render_markdown(&outcome.report),
    };
    if let Some(out) = &cfg.out {
        let path = config::resolve_out_path(out);
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                if let Err(e) = std::fs::create_dir_all(parent) {
                    return fail(2, format!("cannot create {}: {e}", parent.display()));
                }
            }
        }
        if let Err(e) = std::fs::write(&path, rendered.as_bytes()) {
            return fail(2, format!("cannot write report to {}: {e}", path.display()));
        }
        eprintln!("hopflab: report written to {}", path.display());
    } else {
        print!("{rendered}");
    }
    // Wall time goes to stderr only; report bytes stay run-independent.
    let verdict = if outcome.all_passed {
        "all criteria passed"
    } else {
        "criteria FAILED"
    };
    eprintln!(
        "hopflab: {verdict} in {:.1} s",
        start.elapsed().as_secs_f64()
    );
    if outcome.all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn catalog_cmd(args: CatalogArgs) -> ExitCode {
    let sig = match Signature::new(args.n, args.p) {
        Ok(sig) => sig,
        Err(e) => return fail(2, e),
    };
    let mut families: Vec<Family> = Vec::new();
    if args.families.is_empty() {
        families = default_families();
    } else {
        for descriptor in &args.families {
            match parse_family_descriptor(descriptor) {
                Ok(parsed) => families.extend(parsed),
                Err(e) => return fail(2, e),
            }
        }
    }
    let mut rows: Vec<(String, Family)> =
        families.into_iter().map(|f| (canonical_id(&f), f)).collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    rows.dedup_by(|a, b| a.0 == b.0);

    println!("catalog at n = {}, p = {}", args.n, args.p);
    for (id, family) in rows {
        println!("\n{id}");
        let spec = match HypersurfaceSpec::new(sig, family) {
            Ok(spec) => spec,
            Err(e) => {
                println!("  infeasible: {e}");
                continue;
            }
        };
        if let Err(e) = spec.feasibility() {
            println!("  infeasible: {e}");
            continue;
        }
        if spec.is_degenerate() {
            println!("  epsilon: 0 (the normal is null; no shape operator descends)");
            println!("  lift: doubles the normal, annihilates the structure direction,");
            println!("        and carries one nilpotent block over eigenvalue 0");
            continue;
        }
        let pred = match spec.predicted_invariants() {
            Ok(pred) => pred,
            Err(e) => return fail(3, format!("{id}: {e}")),
        };
        println!("  epsilon: {}", spec.epsilon());
        println!("  structure eigenvalue mu: {}", pred.mu);
        for (value, mult) in &pred.eigenvalues {
            println!("  eigenvalue {value}  x{mult}");
        }
        if let Some(r) = pred.radius {
            println!("  radius: {r}");
        }
        if pred.orientation_caveat {
            println!("  note: printed invariants assume the opposite normal orientation");
        }
    }
    ExitCode::SUCCESS
}

fn classify_cmd(args: ClassifyArgs) -> ExitCode {
    let sig = match Signature::new(args.n, args.p) {
        Ok(sig) => sig,
        Err(e) => return fail(2, e),
    };
    let descriptors =
        match compose_families(std::slice::from_ref(&args.family), args.q, args.m, args.t) {
            Ok(d) => d,
            Err(e) => return fail(2, e),
        };
    let families = match parse_family_descriptor(&descriptors[0]) {
        Ok(f) => f,
        Err(e) => return fail(2, e),
    };
    if families.len() != 1 {
        return fail(2, "classify needs a single member, not a whole catalog");
    }
    let family = families.into_iter().next().expect("checked length");
    let id = canonical_id(&family);
    let spec = match HypersurfaceSpec::new(sig, family).and_then(|s| {
        s.feasibility()?;
        Ok(s)
    }) {
        Ok(spec) => spec,
        Err(e) => return fail(2, e),
    };
    let tol = hopflab_core::TolerancePolicy::default();
    let z = match spec.sample_point(args.seed) {
        Ok(z) => z,
        Err(e) => return fail(3, format!("{id}: {e}")),
    };
    println!("family: {id}");
    if spec.is_degenerate() {
        let summary = match operator_spectrum(&spec, &z, &tol) {
            Ok(s) => s,
            Err(e) => return fail(3, format!("{id}: {e}")),
        };
        println!("epsilon: 0 (null normal; the induced metric degenerates)");
        println!("lifted spectrum:");
        for (value, alg, geo) in &summary.clusters {
            println!("  {value}  algebraic {alg}, geometric {geo}");
        }
        println!(
            "diagonalizable: {} (a nilpotent block sits over the zero eigenvalue)",
            summary.diagonalizable
        );
        println!("classification: outside the nondegenerate catalog");
        return ExitCode::SUCCESS;
    }
    let w = match descend(&spec, &z, &tol) {
        Ok(w) => w,
        Err(e) => return fail(3, format!("{id}: {e}")),
    };
    let summary = spectral_summary(&w.matrix, &tol);
    let verdict = classify(w.epsilon, &summary, w.mu, &tol);
    println!("epsilon: {}", w.epsilon);
    println!("structure eigenvalue mu: {}", w.mu);
    println!("spectrum:");
    for (value, alg, geo) in &summary.clusters {
        println!("  {value}  algebraic {alg}, geometric {geo}");
    }
    println!("classification: {}", verdict.tag.as_str());
    if let Some(lambda) = verdict.lambda {
        println!("shared curvature lambda: {lambda}");
    }
    if let Some(r) = verdict.r {
        println!("radius: {r}");
    }
    if let Some(constraint) = verdict.qm_constraint {
        println!("block constraint: {constraint}");
    }
    ExitCode::SUCCESS
}

fn report_cmd(args: ReportArgs) -> ExitCode {
    let format = match ReportFormat::parse(&args.format) {
        Ok(f) => f,
        Err(e) => return fail(2, e),
    };
    let text = match std::fs::read_to_string(&args.input) {
        Ok(t) => t,
        Err(e) => return fail(2, format!("cannot read {}: {e}", args.input.display())),
    };
    let value = match parse_json(&text) {
        Ok(v) => v,
        Err(e) => return fail(2, format!("{} is not a report: {e}", args.input.display())),
    };
    let rendered = match format {
        ReportFormat::Json => render_json(&value),
        ReportFormat::Markdown => render_markdown(&value),
    };
    match &args.out {
        Some(out) => {
            let path = config::resolve_out_path(out);
            if let Err(e) = std::fs::write(&path, rendered.as_bytes()) {
                return fail(2, format!("cannot write {}: {e}", path.display()));
            }
        }
        None => print!("{rendered}"),
    }
    ExitCode::SUCCESS
}
