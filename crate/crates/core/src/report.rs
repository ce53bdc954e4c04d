//! JSON and text renderings of a verification run.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use crate::specfile::digest;
use crate::structure::StructureSpec;
use crate::verify::{CheckRecord, Classification, PredicateValue, Verification};

pub const SCHEMA_VERSION: u32 = 1;
pub const ENGINE_NAME: &str = "pseudocontact";
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Conventions a reader needs to interpret the residuals.
pub const NOTES: &[&str] = &[
    "curvature: R(X, Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z, components R^l_kij with R(∂_i, ∂_j)∂_k = R^l_kij ∂_l",
    "ℓX = R(X, ξ)ξ",
    "Ricci: S(X, Y) = Σ ε_i g(R(e_i, X)Y, e_i) over a pseudo-orthonormal frame, Q = g⁻¹S",
    "dη(X, Y) = ½(Xη(Y) − Yη(X) − η([X, Y])), Φ(X, Y) = g(X, φY)",
    "CR structure: H = Ker η, J = φ|H, θ = −η",
    "first integrability condition read as [JX, Y] + [X, JY] ∈ H",
    "the coefficient of ξ in (∇_{JX} J)JY − (∇_X J)Y is −α(X, Y); cr.gamma_alpha checks γ = −α",
    "H basis: projections X − η(X)ξ of coordinate vectors chosen by Euclidean pivoting",
    "residual: max |lhs − rhs| / max(1, |lhs|, |rhs|) over probes, maximized over points; NaN fails",
    "predicates: residual < 1e-6 true, > 1e-3 false, otherwise indeterminate",
];

#[derive(Debug, Serialize)]
struct Engine {
    name: &'static str,
    version: &'static str,
}

#[derive(Debug, Serialize)]
struct SpecInfo<'a> {
    name: &'a str,
    digest: String,
}

#[derive(Debug, Serialize)]
struct Summary {
    pass: usize,
    fail: usize,
    indeterminate: usize,
    skipped: usize,
    contradiction: usize,
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    schema: u32,
    engine: Engine,
    spec: SpecInfo<'a>,
    suite: &'static str,
    seed: u64,
    points: usize,
    profile: &'static str,
    summary: Summary,
    records: &'a [CheckRecord],
    classification: &'a Classification,
    predicates: &'a BTreeMap<String, PredicateValue>,
    notes: &'static [&'static str],
}

fn summary(records: &[CheckRecord]) -> Summary {
    use crate::verify::Status::*;
    let count = |s| records.iter().filter(|r| r.status == s).count();
    Summary {
        pass: count(Pass),
        fail: count(Fail),
        indeterminate: count(Indeterminate),
        skipped: count(Skipped),
        contradiction: count(Contradiction),
    }
}

/// Pretty-printed JSON report, byte-identical for identical inputs.
pub fn to_json(spec: &StructureSpec, v: &Verification) -> String {
    let report = Report {
        schema: SCHEMA_VERSION,
        engine: Engine {
            name: ENGINE_NAME,
            version: ENGINE_VERSION,
        },
        spec: SpecInfo {
            name: &spec.name,
            digest: digest(spec),
        },
        suite: v.suite.name(),
        seed: v.seed,
        points: v.points.len(),
        profile: v.profile.name(),
        summary: summary(&v.records),
        records: &v.records,
        classification: &v.classification,
        predicates: &v.predicates,
        notes: NOTES,
    };
    let mut out = serde_json::to_string_pretty(&report).expect("reports always serialize");
    out.push('\n');
    out
}

/// `1.234e-9` style, or `-` when absent.
pub fn format_residual(r: Option<f64>) -> String {
    match r {
        None => "-".into(),
        Some(x) if x.is_nan() => "NaN".into(),
        Some(x) => format!("{x:.3e}"),
    }
}

/// Fixed-width table report.
pub fn to_text(spec: &StructureSpec, v: &Verification) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{ENGINE_NAME} {ENGINE_VERSION}");
    let _ = writeln!(out, "spec      {} ({})", spec.name, digest(spec));
    let _ = writeln!(
        out,
        "suite     {}  seed {}  points {}  profile {}",
        v.suite,
        v.seed,
        v.points.len(),
        v.profile
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<36} {:<13} {:>10} {:>10} {:>6} {:>5}",
        "check", "status", "residual", "tolerance", "points", "null"
    );
    for r in &v.records {
        let _ = writeln!(
            out,
            "{:<36} {:<13} {:>10} {:>10} {:>6} {:>5}",
            r.check_id,
            r.status.name(),
            format_residual(r.max_residual),
            format_residual(r.tolerance),
            r.points_tested,
            r.probes_skipped_null
        );
    }
    let s = summary(&v.records);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{} pass, {} fail, {} indeterminate, {} skipped, {} contradiction",
        s.pass, s.fail, s.indeterminate, s.skipped, s.contradiction
    );
    let _ = writeln!(out);
    out.push_str(&classification_text(&v.classification));
    out
}

fn flag_label(name: &str) -> &str {
    match name {
        "k_contact" => "K_contact",
        other => other,
    }
}

/// One `flag: value` line per classification flag.
pub fn classification_text(c: &Classification) -> String {
    let mut out = String::new();
    for (name, flag) in c.flags() {
        let residual = c.residuals.get(name).copied().flatten();
        let _ = write!(out, "{}: {}", flag_label(name), flag.label());
        if residual.is_some() {
            let _ = write!(out, " (residual {})", format_residual(residual));
        }
        out.push('\n');
    }
    out
}
