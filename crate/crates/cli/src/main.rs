use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use pseudocontact_core::report::{classification_text, to_json, to_text};
use pseudocontact_core::specfile::{emit, load};
use pseudocontact_core::{catalog, verify, CheckOptions, Error, Profile, StructureSpec, Suite};

/// Verifies identities and theorems of almost contact pseudo-metric structures.
#[derive(Debug, Parser)]
#[command(name = "pseudocontact", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run check suites and print a report.
    Check {
        file: PathBuf,
        #[arg(long, default_value = "all", value_parser = parse_suite)]
        suite: Suite,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Tolerance override, `check_id=value`. Repeatable.
        #[arg(long = "tol", value_parser = parse_override)]
        tol: Vec<(String, f64)>,
        /// Tolerance profile; defaults to PSEUDOCONTACT_TOL, then `default`.
        #[arg(long)]
        profile: Option<Profile>,
    },
    /// Print the classification flags and residuals.
    Classify { file: PathBuf },
    /// List or export built-in examples.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Print every operator at one point.
    Probe {
        file: PathBuf,
        /// Comma-separated coordinates.
        #[arg(long)]
        point: String,
    },
}

#[derive(Debug, Subcommand)]
enum CatalogAction {
    List,
    Emit { name: String, out: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse()
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (id, value) = s.split_once('=').ok_or_else(|| format!("expected check_id=value, got `{s}`"))?;
    let v: f64 = value.trim().parse().map_err(|e| format!("tolerance `{value}`: {e}"))?;
    if !(v.is_finite() && v > 0.0) {
        return Err(format!("tolerance must be positive, got {v}"));
    }
    Ok((id.trim().to_string(), v))
}

/// Input problems exit with 2, everything else with 1.
enum Failure {
    Input(anyhow::Error),
    Checks,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.into())
    }
}

fn load_spec(path: &Path) -> Result<StructureSpec> {
    load(path).with_context(|| format!("cannot load {}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Input(e)) => {
            eprintln!("error: {}", chain(&e));
            ExitCode::from(2)
        }
    }
}

/// The error chain joined by `: `, skipping causes already quoted by their parent.
fn chain(e: &anyhow::Error) -> String {
    let mut out = String::new();
    let mut parent = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !parent.ends_with(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
        parent = text;
    }
    out
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Check {
            file,
            suite,
            seed,
            points,
            format,
            tol,
            profile,
        } => {
            let spec = load_spec(&file)?;
            let options = CheckOptions {
                suite,
                seed,
                points,
                profile,
                overrides: tol.into_iter().collect::<BTreeMap<_, _>>(),
            };
            let v = verify(&spec, &options)?;
            let out = match format {
                Format::Json => to_json(&spec, &v),
                Format::Text => to_text(&spec, &v),
            };
            print!("{out}");
            if !v.passed() {
                return Err(Failure::Checks);
            }
        }
        Command::Classify { file } => {
            let spec = load_spec(&file)?;
            let v = verify(&spec, &CheckOptions { suite: Suite::Axioms, ..CheckOptions::default() })?;
            print!("{}", classification_text(&v.classification));
        }
        Command::Catalog { action: CatalogAction::List } => {
            for (name, description) in catalog::list() {
                println!("{name:<36} {description}");
            }
        }
        Command::Catalog {
            action: CatalogAction::Emit { name, out },
        } => {
            let entry = catalog::entry(&name)?;
            std::fs::write(&out, emit(&entry.spec)).with_context(|| format!("cannot write {}", out.display()))?;
        }
        Command::Probe { file, point } => {
            let spec = load_spec(&file)?;
            let point = parse_point(&point, &spec)?;
            print!("{}", probe(&spec, &point)?);
        }
    }
    Ok(())
}

fn parse_point(text: &str, spec: &StructureSpec) -> Result<Vec<f64>> {
    let point = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| anyhow!("coordinate `{}`: {e}", s.trim())))
        .collect::<Result<Vec<_>>>()?;
    if point.len() != spec.dim() {
        bail!("point has {} coordinates, chart has {}", point.len(), spec.dim());
    }
    if !spec.chart.contains(&point) {
        return Err(Error::OutsideDomain { point }.into());
    }
    Ok(point)
}

fn number(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:>22.14e}")
}

fn matrix(out: &mut String, name: &str, m: &DMatrix<f64>) {
    let _ = writeln!(out, "{name}");
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| number(m[(i, j)])).collect();
        let _ = writeln!(out, "  {}", row.join(" "));
    }
}

fn probe(spec: &StructureSpec, point: &[f64]) -> Result<String> {
    let p = spec.evaluate(point)?;
    let d = p.dim();
    let mut out = String::new();
    let coords: Vec<String> = point.iter().map(|x| number(*x).trim().to_string()).collect();
    let _ = writeln!(out, "point ({})", coords.join(", "));
    let _ = writeln!(out, "signature ({}, {})", p.metric.signature.0, p.metric.signature.1);
    matrix(&mut out, "g", p.g());
    for k in 0..d {
        let m = DMatrix::from_fn(d, d, |i, j| p.christoffel.get(k, i, j));
        matrix(&mut out, &format!("Gamma^{k}_ij"), &m);
    }
    let _ = writeln!(out, "max |R^l_kij| {}", number(p.curvature.max_abs()).trim());
    matrix(&mut out, "Ricci S_ij", &p.curvature.ricci);
    let Some(c) = &p.contact else {
        let _ = writeln!(out, "structure fields not bound");
        return Ok(out);
    };
    let _ = writeln!(out, "g(xi, xi) {}", number(c.xi_norm).trim());
    matrix(&mut out, "phi", &c.phi);
    matrix(&mut out, "Phi", &c.ops.phi_form);
    matrix(&mut out, "d eta", &c.ops.d_eta);
    matrix(&mut out, "h", &c.ops.h);
    matrix(&mut out, "ell", &c.ops.ell);
    matrix(&mut out, "tau", &c.ops.tau);
    matrix(&mut out, "nabla xi", &c.ops.nabla_xi);
    matrix(&mut out, "nabla_xi h", &c.ops.nabla_xi_h);
    Ok(out)
}
