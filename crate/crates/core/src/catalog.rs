//! Built-in example manifolds.

use crate::chart::{default_coordinates, Chart, TensorFieldSpec};
use crate::contact::structure_measurements;
use crate::error::{Error, Result};
use crate::expr::parse;
use crate::structure::{AlmostContactSpec, ExpectedClassification, SamplingSpec, StructureSpec, ToleranceSpec};
use crate::tolerance::Truth;
use crate::verify::{verify, CheckOptions, Flag, Suite};

/// A named example with its expected classification.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub description: String,
    pub spec: StructureSpec,
}

impl CatalogEntry {
    pub fn expected(&self) -> Option<ExpectedClassification> {
        self.spec.expected
    }
}

/// Names and one-line descriptions of every entry, in listing order.
pub fn list() -> Vec<(&'static str, &'static str)> {
    ENTRIES.iter().map(|(name, description, _)| (*name, *description)).collect()
}

type Builder = fn() -> Result<CatalogEntry>;

const ENTRIES: &[(&str, &str, Builder)] = &[
    ("standard_sasakian_n1", "standard Sasakian structure on R^3, Riemannian", || {
        entry_standard_sasakian(1, 1, 0)
    }),
    ("standard_sasakian_n1_lorentzian", "standard Sasakian structure on R^3 with timelike xi", || {
        entry_standard_sasakian(1, -1, 0)
    }),
    ("standard_sasakian_n2_mixed", "standard Sasakian structure on R^5 with one negative (x1, y1) pair", || {
        entry_standard_sasakian(2, 1, 1)
    }),
    ("standard_sasakian_n2_lorentzian", "standard Sasakian structure on R^5 with timelike xi", || {
        entry_standard_sasakian(2, -1, 0)
    }),
    ("flat_contact_r3", "flat associated metric on R^3 with rotating contact form, h != 0", entry_flat_contact_r3),
    (
        "non_contact_rotated_phi_n2",
        "compatible almost contact structure on R^5 that is not contact",
        entry_non_contact_rotated_phi,
    ),
    ("flat_euclidean_3", "Euclidean R^3 without structure fields", || entry_flat_pseudo_euclidean(3, 0)),
    ("minkowski_3", "Minkowski R^(1,2) without structure fields", || entry_flat_pseudo_euclidean(2, 1)),
];

/// Builds the named entry.
pub fn entry(name: &str) -> Result<CatalogEntry> {
    let (_, _, build) = ENTRIES
        .iter()
        .find(|(n, _, _)| *n == name)
        .ok_or_else(|| Error::UnknownEntry(name.to_string()))?;
    build()
}

/// Every entry in listing order.
pub fn all() -> Result<Vec<CatalogEntry>> {
    ENTRIES.iter().map(|(_, _, build)| build()).collect()
}

fn fields(coordinates: &[String], valence: (u8, u8), components: &[String]) -> Result<TensorFieldSpec> {
    let exprs = components
        .iter()
        .enumerate()
        .map(|(k, text)| {
            parse(text, coordinates).map_err(|source| Error::Parse {
                context: format!("catalog component {k} `{text}`"),
                source,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    TensorFieldSpec::new(valence, coordinates.len(), exprs)
}

fn sign(s: f64) -> &'static str {
    if s < 0.0 {
        "-"
    } else {
        ""
    }
}

fn expected(flags: [bool; 5]) -> Option<ExpectedClassification> {
    Some(ExpectedClassification {
        almost_contact: Some(flags[0]),
        compatible: Some(flags[1]),
        contact: Some(flags[2]),
        k_contact: Some(flags[3]),
        sasakian: Some(flags[4]),
    })
}

fn build(
    name: String,
    description: String,
    chart: Chart,
    metric: Vec<String>,
    structure: Option<[Vec<String>; 3]>,
    expected: Option<ExpectedClassification>,
) -> Result<CatalogEntry> {
    let coords = chart.coordinates().to_vec();
    let metric = fields(&coords, (0, 2), &metric)?;
    let structure = match structure {
        None => None,
        Some([phi, xi, eta]) => Some(AlmostContactSpec {
            phi: fields(&coords, (1, 1), &phi)?,
            xi: fields(&coords, (1, 0), &xi)?,
            eta: fields(&coords, (0, 1), &eta)?,
        }),
    };
    let entry = CatalogEntry {
        name: name.clone(),
        description: description.clone(),
        spec: StructureSpec {
            name,
            description,
            chart,
            metric,
            structure,
            sampling: SamplingSpec::default(),
            tolerances: ToleranceSpec::default(),
            expected,
        },
    };
    check_center(&entry)?;
    Ok(entry)
}

/// Checks the defining identities of the expected classification at the
/// chart center.
fn check_center(entry: &CatalogEntry) -> Result<()> {
    let (Some(expected), Some(_)) = (entry.spec.expected, &entry.spec.structure) else {
        return Ok(());
    };
    let p = entry.spec.evaluate(&entry.spec.chart.center())?;
    let m = structure_measurements(&p);
    let truth = |id: &str| m.get(id).map_or(Truth::Indeterminate, |x| Truth::from_residual(x.residual));
    let mut required: Vec<(&str, Option<bool>)> = ["axiom.phi_squared", "axiom.eta_xi", "axiom.phi_xi", "axiom.eta_phi"]
        .into_iter()
        .map(|id| (id, expected.almost_contact))
        .collect();
    required.push(("compat.metric", expected.compatible));
    required.push(("pred.contact", expected.contact));
    required.push(("pred.h_zero", expected.k_contact));
    required.push(("pred.sasakian", expected.sasakian));
    for (id, want) in required {
        if want == Some(true) && !truth(id).is_true() {
            return Err(Error::ConstructionSelfTestFailed {
                name: entry.name.clone(),
                detail: format!("{id} does not hold at the center"),
            });
        }
    }
    Ok(())
}

/// Standard structure on `R^{2n+1}` with `η = ½(dz − Σ y_i dx_i)`, `ξ = 2∂_z`
/// and `g = εη⊗η + ¼Σ δ_i(dx_i² + dy_i²)`, `δ_i = −1` for `i ≤ index_s`.
pub fn entry_standard_sasakian(n: usize, epsilon: i32, index_s: usize) -> Result<CatalogEntry> {
    if n == 0 || index_s > n || epsilon.abs() != 1 {
        return Err(Error::Spec(format!(
            "standard Sasakian entry needs n ≥ 1, ε = ±1 and 0 ≤ s ≤ n, got n = {n}, ε = {epsilon}, s = {index_s}"
        )));
    }
    let eps = f64::from(epsilon);
    let delta = |i: usize| if i < index_s { -1.0 } else { 1.0 };
    let chart = Chart::standard(n)?;
    let d = 2 * n + 1;
    let (x, y, z) = (|i: usize| i, |i: usize| n + i, 2 * n);
    let ynames = &chart.coordinates()[n..2 * n];

    let mut g = vec!["0".to_string(); d * d];
    for i in 0..n {
        for j in 0..n {
            let mut e = format!("{}{}*{}/4", sign(eps), ynames[i.min(j)], ynames[i.max(j)]);
            if i == j {
                e = format!("{e} {} 1/4", if delta(i) < 0.0 { "-" } else { "+" });
            }
            g[x(i) * d + x(j)] = e;
        }
        let xz = format!("{}{}/4", sign(-eps), ynames[i]);
        g[x(i) * d + z] = xz.clone();
        g[z * d + x(i)] = xz;
        g[y(i) * d + y(i)] = format!("{}1/4", sign(delta(i)));
    }
    g[z * d + z] = format!("{}1/4", sign(eps));

    let mut phi = vec!["0".to_string(); d * d];
    for i in 0..n {
        let s = sign(delta(i));
        phi[x(i) * d + y(i)] = format!("{s}1");
        phi[z * d + y(i)] = format!("{s}{}", ynames[i]);
        phi[y(i) * d + x(i)] = format!("{}1", sign(-delta(i)));
    }
    let mut xi = vec!["0".to_string(); d];
    xi[z] = "2".into();
    let mut eta = vec!["0".to_string(); d];
    for i in 0..n {
        eta[x(i)] = format!("-{}/2", ynames[i]);
    }
    eta[z] = "1/2".into();

    let name = match (n, epsilon, index_s) {
        (_, 1, 0) => format!("standard_sasakian_n{n}"),
        (_, -1, 0) => format!("standard_sasakian_n{n}_lorentzian"),
        (_, 1, _) => format!("standard_sasakian_n{n}_mixed"),
        _ => format!("standard_sasakian_n{n}_s{index_s}_eps{epsilon}"),
    };
    let description = format!("standard Sasakian structure on R^{d}, ε = {epsilon}, {index_s} negative pairs");
    build(name, description, chart, g, Some([phi, xi, eta]), expected([true; 5]))
}

/// `g = ¼I`, `η = ½(cos z dx + sin z dy)`, `ξ = 2(cos z ∂_x + sin z ∂_y)`.
pub fn entry_flat_contact_r3() -> Result<CatalogEntry> {
    let chart = Chart::standard(1)?;
    let s = |v: &[&str]| v.iter().map(|t| t.to_string()).collect::<Vec<_>>();
    let g = s(&["1/4", "0", "0", "0", "1/4", "0", "0", "0", "1/4"]);
    let phi = s(&["0", "0", "sin(z)", "0", "0", "-cos(z)", "-sin(z)", "cos(z)", "0"]);
    let xi = s(&["2*cos(z)", "2*sin(z)", "0"]);
    let eta = s(&["cos(z)/2", "sin(z)/2", "0"]);
    build(
        "flat_contact_r3".into(),
        "flat associated metric on R^3 with rotating contact form".into(),
        chart,
        g,
        Some([phi, xi, eta]),
        expected([true, true, true, false, false]),
    )
}

/// Standard Riemannian Sasakian metric on `R^5` with `φ` rotated in the
/// `(x1, x2)` and `(y1, y2)` planes, so `dη ≠ Φ`.
pub fn entry_non_contact_rotated_phi() -> Result<CatalogEntry> {
    let base = entry_standard_sasakian(2, 1, 0)?;
    let chart = Chart::standard(2)?;
    let d = 5;
    let g = base
        .spec
        .metric
        .components()
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>();
    let mut phi = vec!["0".to_string(); d * d];
    // columns x1, x2, y1, y2 map to -∂x2 - y2∂z, ∂x1 + y1∂z, ∂y2, -∂y1
    phi[d] = "-1".into();
    phi[4 * d] = "-y2".into();
    phi[1] = "1".into();
    phi[4 * d + 1] = "y1".into();
    phi[3 * d + 2] = "1".into();
    phi[2 * d + 3] = "-1".into();
    let xi = ["0", "0", "0", "0", "2"].map(String::from).to_vec();
    let eta = ["-y1/2", "-y2/2", "0", "0", "1/2"].map(String::from).to_vec();
    build(
        "non_contact_rotated_phi_n2".into(),
        "compatible almost contact structure on R^5 that is not contact".into(),
        chart,
        g,
        Some([phi, xi, eta]),
        expected([true, true, false, false, false]),
    )
}

/// Constant `diag(−1, …, −1, 1, …, 1)` with `q` negative entries.
pub fn entry_flat_pseudo_euclidean(p_count: usize, q_count: usize) -> Result<CatalogEntry> {
    let d = p_count + q_count;
    if d.is_multiple_of(2) {
        return Err(Error::Spec(format!("p + q must be odd, got {d}")));
    }
    let n = (d - 1) / 2;
    let chart = Chart::new(n, default_coordinates(n), vec![(-1.0, 1.0); d])?;
    let mut g = vec!["0".to_string(); d * d];
    for i in 0..d {
        g[i * d + i] = if i < q_count { "-1".into() } else { "1".into() };
    }
    let (name, description) = match q_count {
        0 => (format!("flat_euclidean_{d}"), format!("Euclidean R^{d} without structure fields")),
        1 => (format!("minkowski_{d}"), format!("Minkowski R^(1,{p_count}) without structure fields")),
        _ => (
            format!("flat_pseudo_euclidean_{p_count}_{q_count}"),
            format!("flat R^({q_count},{p_count}) without structure fields"),
        ),
    };
    build(name, description, chart, g, None, None)
}

/// Runs every suite on the entry and compares against its expectations.
pub fn self_test(entry: &CatalogEntry) -> Result<()> {
    let v = verify(&entry.spec, &CheckOptions { suite: Suite::All, ..CheckOptions::default() })?;
    let failed: Vec<String> = v
        .records
        .iter()
        .filter(|r| r.status.is_failure())
        .map(|r| format!("{} {}", r.check_id, r.status))
        .collect();
    if !failed.is_empty() {
        return Err(Error::ConstructionSelfTestFailed {
            name: entry.name.clone(),
            detail: failed.join(", "),
        });
    }
    if entry.spec.structure.is_some() && v.classification.almost_contact != Flag::True {
        return Err(Error::ConstructionSelfTestFailed {
            name: entry.name.clone(),
            detail: "almost contact axioms fail".into(),
        });
    }
    Ok(())
}
