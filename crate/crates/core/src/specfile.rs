//! TOML spec files: parsing with validation, canonical emission and digests.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chart::{default_coordinates, sample_points, Chart, TensorFieldSpec};
use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::structure::{AlmostContactSpec, ExpectedClassification, SamplingSpec, StructureSpec, ToleranceSpec};
use crate::tolerance::Profile;

/// Largest disagreement allowed between the two triangles of a full metric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct File {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<Meta>,
    chart: ChartSection,
    metric: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phi: Option<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    xi: Option<Vector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta: Option<Vector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sampling: Option<Sampling>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    expected: Option<Expected>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Meta {
    #[serde(default)]
    name: String,
    #[serde(default)]
    description: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartSection {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coordinates: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Matrix {
    components: Vec<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Vector {
    components: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sampling {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    extra: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    profile: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    overrides: BTreeMap<String, f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Expected {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    almost_contact: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    compatible: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    contact: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k_contact: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sasakian: Option<bool>,
}

/// Reads and validates a spec file.
pub fn load(path: &Path) -> Result<StructureSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Spec(format!("{}: {e}", path.display())))?;
    parse_spec(&text)
}

/// Parses and validates spec-file text.
pub fn parse_spec(text: &str) -> Result<StructureSpec> {
    let file: File = toml::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
    let n = file.chart.n;
    if n == 0 {
        return Err(Error::InvalidChart("n must be positive".into()));
    }
    let dim = 2 * n + 1;
    let coordinates = file.chart.coordinates.unwrap_or_else(|| default_coordinates(n));
    let domain = file
        .chart
        .domain
        .map(|d| d.into_iter().map(|[lo, hi]| (lo, hi)).collect())
        .unwrap_or_else(|| vec![(-1.0, 1.0); dim]);
    let chart = Chart::new(n, coordinates, domain)?;
    let coords = chart.coordinates().to_vec();

    let sampling = match file.sampling {
        None => SamplingSpec::default(),
        Some(s) => {
            let defaults = SamplingSpec::default();
            for p in &s.extra {
                if !chart.contains(p) {
                    return Err(Error::OutsideDomain { point: p.clone() });
                }
            }
            SamplingSpec {
                seed: s.seed.unwrap_or(defaults.seed),
                points: s.points.unwrap_or(defaults.points),
                extra: s.extra,
            }
        }
    };

    let metric = metric_field(&file.metric.components, &chart, &sampling)?;
    let structure = match (file.phi, file.xi, file.eta) {
        (None, None, None) => None,
        (Some(phi), Some(xi), Some(eta)) => Some(AlmostContactSpec {
            phi: matrix_field("phi", (1, 1), &phi.components, &coords)?,
            xi: vector_field("xi", (1, 0), &xi.components, &coords)?,
            eta: vector_field("eta", (0, 1), &eta.components, &coords)?,
        }),
        _ => return Err(Error::Spec("sections [phi], [xi] and [eta] must be given together".into())),
    };

    let tolerances = match file.tolerances {
        None => ToleranceSpec::default(),
        Some(t) => {
            let profile = t.profile.map(|p| p.parse::<Profile>()).transpose().map_err(Error::Spec)?;
            for (id, v) in &t.overrides {
                if !(v.is_finite() && *v > 0.0) {
                    return Err(Error::Spec(format!("tolerance override `{id}` must be positive, got {v}")));
                }
            }
            ToleranceSpec { profile, overrides: t.overrides }
        }
    };
    let expected = file.expected.map(|e| ExpectedClassification {
        almost_contact: e.almost_contact,
        compatible: e.compatible,
        contact: e.contact,
        k_contact: e.k_contact,
        sasakian: e.sasakian,
    });
    let meta = file.meta.unwrap_or(Meta {
        name: String::new(),
        description: String::new(),
    });
    Ok(StructureSpec {
        name: meta.name,
        description: meta.description,
        chart,
        metric,
        structure,
        sampling,
        tolerances,
        expected,
    })
}

fn parse_component(section: &str, label: String, text: &str, coords: &[String]) -> Result<Expr> {
    parse(text, coords).map_err(|source| Error::Parse {
        context: format!("[{section}] {label} `{text}`"),
        source,
    })
}

fn vector_field(section: &str, valence: (u8, u8), rows: &[String], coords: &[String]) -> Result<TensorFieldSpec> {
    let dim = coords.len();
    if rows.len() != dim {
        return Err(Error::Spec(format!("[{section}] needs {dim} components, got {}", rows.len())));
    }
    let exprs = rows
        .iter()
        .enumerate()
        .map(|(i, t)| parse_component(section, format!("component {i}"), t, coords))
        .collect::<Result<Vec<_>>>()?;
    TensorFieldSpec::new(valence, dim, exprs)
}

fn matrix_field(section: &str, valence: (u8, u8), rows: &[Vec<String>], coords: &[String]) -> Result<TensorFieldSpec> {
    let dim = coords.len();
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Spec(format!("[{section}] needs {dim} rows of {dim} components")));
    }
    let mut exprs = Vec::with_capacity(dim * dim);
    for (i, row) in rows.iter().enumerate() {
        for (j, t) in row.iter().enumerate() {
            exprs.push(parse_component(section, format!("row {i} column {j}"), t, coords)?);
        }
    }
    TensorFieldSpec::new(valence, dim, exprs)
}

/// Accepts the lower triangle or full rows; full rows must agree with their
/// transpose at the first sample points.
fn metric_field(rows: &[Vec<String>], chart: &Chart, sampling: &SamplingSpec) -> Result<TensorFieldSpec> {
    let coords = chart.coordinates();
    let dim = coords.len();
    let lower = rows.len() == dim && rows.iter().enumerate().all(|(i, r)| r.len() == i + 1);
    let full = rows.len() == dim && rows.iter().all(|r| r.len() == dim);
    if !lower && !full {
        return Err(Error::Spec(format!(
            "[metric] needs {dim} rows, either the lower triangle (row i has i + 1 entries) or full rows"
        )));
    }
    let mut parsed: Vec<Vec<Expr>> = Vec::with_capacity(dim);
    for (i, row) in rows.iter().enumerate() {
        parsed.push(
            row.iter()
                .enumerate()
                .map(|(j, t)| parse_component("metric", format!("row {i} column {j}"), t, coords))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    if full {
        let points = sample_points(chart, sampling.seed, 8, &[]);
        for i in 0..dim {
            for j in 0..i {
                if parsed[i][j] == parsed[j][i] {
                    continue;
                }
                for p in &points {
                    let a = parsed[i][j].eval(p).map_err(|source| Error::Eval {
                        context: format!("[metric] row {i} column {j}"),
                        source,
                    })?;
                    let b = parsed[j][i].eval(p).map_err(|source| Error::Eval {
                        context: format!("[metric] row {j} column {i}"),
                        source,
                    })?;
                    if (a - b).abs() > SYMMETRY_TOLERANCE {
                        return Err(Error::AsymmetricInput {
                            point: p.clone(),
                            residual: (a - b).abs(),
                        });
                    }
                }
            }
        }
    }
    let components = (0..dim)
        .flat_map(|i| (0..dim).map(move |j| (i, j)))
        .map(|(i, j)| {
            let (r, c) = if j <= i { (i, j) } else { (j, i) };
            parsed[r][c].clone()
        })
        .collect();
    TensorFieldSpec::new((0, 2), dim, components)
}

fn strings(exprs: &[Expr]) -> Vec<String> {
    exprs.iter().map(Expr::to_string).collect()
}

/// Canonical spec-file text: every section present that carries data, the
/// metric as its lower triangle.
pub fn emit(spec: &StructureSpec) -> String {
    let dim = spec.dim();
    let metric_rows = (0..dim)
        .map(|i| (0..=i).map(|j| spec.metric.entry(i, j).to_string()).collect())
        .collect();
    let matrix = |f: &TensorFieldSpec| Matrix {
        components: (0..dim)
            .map(|i| (0..dim).map(|j| f.entry(i, j).to_string()).collect())
            .collect(),
    };
    let s = spec.structure.as_ref();
    let file = File {
        meta: Some(Meta {
            name: spec.name.clone(),
            description: spec.description.clone(),
        }),
        chart: ChartSection {
            n: spec.n(),
            coordinates: Some(spec.chart.coordinates().to_vec()),
            domain: Some(spec.chart.domain().iter().map(|&(lo, hi)| [lo, hi]).collect()),
        },
        metric: Matrix { components: metric_rows },
        phi: s.map(|s| matrix(&s.phi)),
        xi: s.map(|s| Vector {
            components: strings(s.xi.components()),
        }),
        eta: s.map(|s| Vector {
            components: strings(s.eta.components()),
        }),
        sampling: Some(Sampling {
            seed: Some(spec.sampling.seed),
            points: Some(spec.sampling.points),
            extra: spec.sampling.extra.clone(),
        }),
        tolerances: if spec.tolerances == ToleranceSpec::default() {
            None
        } else {
            Some(Tolerances {
                profile: spec.tolerances.profile.map(|p| p.name().to_string()),
                overrides: spec.tolerances.overrides.clone(),
            })
        },
        expected: spec.expected.map(|e| Expected {
            almost_contact: e.almost_contact,
            compatible: e.compatible,
            contact: e.contact,
            k_contact: e.k_contact,
            sasakian: e.sasakian,
        }),
    };
    toml::to_string(&file).expect("spec files always serialize")
}

/// SHA-256 of the canonical emission, hex encoded.
pub fn digest(spec: &StructureSpec) -> String {
    hex::encode(Sha256::digest(emit(spec).as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FLAT: &str = r#"
[chart]
n = 1

[metric]
components = [["1"], ["0", "1"], ["0", "0", "1"]]
"#;

    #[test]
    fn lower_triangle_is_symmetrized() {
        let s = parse_spec(FLAT).unwrap();
        assert_eq!(s.chart.coordinates(), ["x1", "y1", "z"]);
        assert!(s.structure.is_none());
        assert_eq!(s.metric.entry(0, 2), s.metric.entry(2, 0));
    }

    #[test]
    fn inconsistent_full_metric_is_rejected() {
        let text = r#"
[chart]
n = 1
[metric]
components = [["1", "x1", "0"], ["0", "1", "0"], ["0", "0", "1"]]
"#;
        assert!(matches!(parse_spec(text), Err(Error::AsymmetricInput { .. })));
        let text = text.replace(r#"["0", "1", "0"]"#, r#"["x1", "1", "0"]"#);
        assert!(parse_spec(&text).is_ok());
    }

    #[test]
    fn malformed_expression_reports_offset() {
        let text = FLAT.replace(r#"["0", "1"]"#, r#"["0", "1 + * y1"]"#);
        let err = parse_spec(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("[metric] row 1 column 1"), "{msg}");
        assert!(msg.contains("byte 4"), "{msg}");
    }

    #[test]
    fn partial_structure_is_rejected() {
        let text = format!("{FLAT}\n[xi]\ncomponents = [\"0\", \"0\", \"1\"]\n");
        assert!(matches!(parse_spec(&text), Err(Error::Spec(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{FLAT}\n[sampling]\nseeds = 3\n");
        assert!(parse_spec(&text).is_err());
    }

    #[test]
    fn emission_is_a_fixpoint() {
        let s = parse_spec(FLAT).unwrap();
        let once = emit(&s);
        let again = emit(&parse_spec(&once).unwrap());
        assert_eq!(once, again);
        assert_eq!(digest(&s).len(), 64);
    }
}
