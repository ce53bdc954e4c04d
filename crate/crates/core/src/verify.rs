//! Sampling, per-point measurement, ordered aggregation and the check table.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::chart::sample_points;
use crate::contact::{metric_measurements, structure_measurements};
use crate::cr::cr_measurements;
use crate::error::{Error, Result};
use crate::measure::{aggregate, Aggregate, Measure, Measurements};
use crate::structure::StructureSpec;
use crate::tolerance::{DerivativeOrder, Profile, Truth};

use DerivativeOrder::{High, Low};

/// Check suites selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Axioms,
    Identities,
    Codazzi,
    Sectional,
    Cr,
    All,
}

impl Suite {
    pub fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Axioms => "axioms",
            Suite::Identities => "identities",
            Suite::Codazzi => "codazzi",
            Suite::Sectional => "sectional",
            Suite::Cr => "cr",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Suite, String> {
        match s {
            "axioms" => Ok(Suite::Axioms),
            "identities" => Ok(Suite::Identities),
            "codazzi" => Ok(Suite::Codazzi),
            "sectional" => Ok(Suite::Sectional),
            "cr" => Ok(Suite::Cr),
            "all" => Ok(Suite::All),
            other => Err(format!("unknown suite `{other}`")),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Indeterminate,
    Skipped,
    Contradiction,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Indeterminate => "indeterminate",
            Status::Skipped => "skipped",
            Status::Contradiction => "contradiction",
        }
    }

    pub fn is_failure(self) -> bool {
        matches!(self, Status::Fail | Status::Contradiction)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One line of a check report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check_id: String,
    pub reference: String,
    pub max_residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub points_tested: usize,
    pub probes_skipped_null: usize,
    pub status: Status,
    pub note: String,
}

/// A classification flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    True,
    False,
    Indeterminate,
    NotBound,
}

impl Flag {
    fn from_truth(t: Truth) -> Flag {
        match t {
            Truth::True => Flag::True,
            Truth::False => Flag::False,
            Truth::Indeterminate => Flag::Indeterminate,
        }
    }

    pub fn truth(self) -> Truth {
        match self {
            Flag::True => Truth::True,
            Flag::Indeterminate => Truth::Indeterminate,
            Flag::False | Flag::NotBound => Truth::False,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Flag::True => "true",
            Flag::False => "false",
            Flag::Indeterminate => "indeterminate",
            Flag::NotBound => "not bound",
        }
    }
}

/// Nested classification of a structure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub almost_contact: Flag,
    pub compatible: Flag,
    pub contact: Flag,
    pub k_contact: Flag,
    pub sasakian: Flag,
    /// Maximum residual behind each flag.
    pub residuals: BTreeMap<String, Option<f64>>,
}

impl Classification {
    pub fn flags(&self) -> [(&'static str, Flag); 5] {
        [
            ("almost_contact", self.almost_contact),
            ("compatible", self.compatible),
            ("contact", self.contact),
            ("k_contact", self.k_contact),
            ("sasakian", self.sasakian),
        ]
    }
}

/// A predicate aggregated over the samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredicateValue {
    pub truth: Truth,
    pub max_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions {
    pub suite: Suite,
    pub seed: Option<u64>,
    pub points: Option<usize>,
    pub profile: Option<Profile>,
    pub overrides: BTreeMap<String, f64>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            suite: Suite::All,
            seed: None,
            points: None,
            profile: None,
            overrides: BTreeMap::new(),
        }
    }
}

/// Everything produced by one verification run.
#[derive(Debug, Clone)]
pub struct Verification {
    pub seed: u64,
    pub profile: Profile,
    pub suite: Suite,
    pub points: Vec<Vec<f64>>,
    pub per_point: Vec<Measurements>,
    pub aggregates: BTreeMap<&'static str, Aggregate>,
    pub predicates: BTreeMap<String, PredicateValue>,
    pub classification: Classification,
    pub records: Vec<CheckRecord>,
}

impl Verification {
    pub fn record(&self, id: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.check_id == id)
    }

    pub fn max_residual(&self, id: &str) -> Option<f64> {
        self.aggregates.get(id).map(|a| a.max_residual)
    }

    pub fn passed(&self) -> bool {
        !self.records.iter().any(|r| r.status.is_failure())
    }

    pub fn predicate(&self, name: &str) -> Truth {
        self.predicates.get(name).map_or(Truth::Indeterminate, |p| p.truth)
    }
}

/// Structural precondition of a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Base {
    Always,
    Structure,
    Compatible,
    Contact,
    /// Compatible structure with geodesic `ξ`.
    Geodesic,
}

#[derive(Debug, Clone, Copy)]
enum Rule {
    /// Residual of the named measurement against a tolerance.
    Residual(&'static str, DerivativeOrder),
    /// Premises imply conclusions.
    Implies(&'static [&'static str], &'static [&'static str]),
    /// Both sides agree.
    Iff(&'static [&'static str], &'static [&'static str]),
    /// The predicates agree with each other at every sample point.
    AllEqual(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy)]
struct CheckDef {
    id: &'static str,
    suite: Suite,
    reference: &'static str,
    base: Base,
    when: &'static [&'static str],
    rule: Rule,
}

const fn residual(
    id: &'static str,
    suite: Suite,
    base: Base,
    when: &'static [&'static str],
    order: DerivativeOrder,
    reference: &'static str,
) -> CheckDef {
    CheckDef {
        id,
        suite,
        reference,
        base,
        when,
        rule: Rule::Residual(id, order),
    }
}

const fn logic(id: &'static str, suite: Suite, base: Base, when: &'static [&'static str], rule: Rule, reference: &'static str) -> CheckDef {
    CheckDef {
        id,
        suite,
        reference,
        base,
        when,
        rule,
    }
}

use Base::{Always, Compatible, Contact, Geodesic, Structure};
use Suite::{Axioms, Codazzi, Cr, Identities, Sectional};

const NONE: &[&str] = &[];
const NABLA_XI_H: &[&str] = &["nabla_xi_h"];
const PARALLEL: &[&str] = &["nabla_xi_h", "nabla_ell"];
const INTEGRABLE_NONDEGENERATE: &[&str] = &["cr_integrable", "levi_nondegenerate"];

const CHECKS: &[CheckDef] = &[
    residual("axiom.phi_squared", Axioms, Structure, NONE, Low, "φ² = −I + η⊗ξ"),
    residual("axiom.eta_xi", Axioms, Structure, NONE, Low, "η(ξ) = 1"),
    residual("axiom.phi_xi", Axioms, Structure, NONE, Low, "φξ = 0"),
    residual("axiom.eta_phi", Axioms, Structure, NONE, Low, "η∘φ = 0"),
    residual("axiom.phi_rank", Axioms, Structure, NONE, Low, "rank φ = 2n"),
    residual("compat.metric", Axioms, Structure, NONE, Low, "g(φX, φY) = g(X, Y) − εη(X)η(Y)"),
    residual("compat.eta_dual", Axioms, Structure, NONE, Low, "η(X) = εg(X, ξ)"),
    residual("compat.xi_unit", Axioms, Structure, NONE, Low, "g(ξ, ξ) = ε = ±1"),
    residual("compat.epsilon_constant", Axioms, Structure, NONE, Low, "ε = sign g(ξ, ξ) is the same at every sample"),
    residual("form.phi_skew", Axioms, Structure, NONE, Low, "Φ(X, Y) = g(X, φY) is skew"),
    residual("form.volume", Axioms, Compatible, NONE, Low, "η ∧ Φⁿ ≠ 0, as |det(Φ + η⊗η)| = 1 on a φ-basis"),
    residual("frame.phi_basis", Axioms, Compatible, NONE, Low, "local φ-basis {e_i, φe_i, ξ} is pseudo-orthonormal and complete"),
    residual("frame.pseudo_orthonormal", Axioms, Always, NONE, Low, "plumbing"),
    residual("connection.torsion_free", Axioms, Always, NONE, Low, "Γ^k_ij = Γ^k_ji"),
    residual("connection.metric_compatible", Axioms, Always, NONE, Low, "∇g = 0"),
    residual("curvature.antisymmetry", Axioms, Always, NONE, Low, "R(X, Y)Z = −R(Y, X)Z"),
    residual("curvature.metric_skew", Axioms, Always, NONE, Low, "g(R(X, Y)Z, W) = −g(R(X, Y)W, Z)"),
    residual("curvature.pair_symmetry", Axioms, Always, NONE, Low, "R(X, Y, Z, W) = R(Z, W, X, Y)"),
    residual("curvature.bianchi", Axioms, Always, NONE, Low, "R(X, Y)Z + R(Y, Z)X + R(Z, X)Y = 0"),
    residual("ricci.frame_trace", Axioms, Always, NONE, Low, "S(X, Y) = Σ ε_i g(R(e_i, X)Y, e_i)"),
    residual("ricci.symmetric", Axioms, Always, NONE, Low, "S(X, Y) = S(Y, X)"),
    logic("corollary.sasakian_k_contact", Axioms, Structure, NONE, Rule::Implies(&["sasakian"], &["k_contact"]), "a Sasakian pseudo-metric manifold is K-contact"),
    residual("identity.nabla_xi", Identities, Contact, NONE, Low, "∇_X ξ = −εφX − φhX"),
    residual("identity.lie_g", Identities, Contact, NONE, Low, "(£_ξ g)(X, Y) = 2g(hφX, Y)"),
    residual("identity.nabla_xi_h", Identities, Contact, NONE, Low, "(∇_ξ h)X = φX − h²φX + φR(ξ, X)ξ"),
    residual("identity.xi_curvature_sum", Identities, Contact, NONE, Low, "R(ξ, X)ξ − φR(ξ, φX)ξ = 2(h² + φ²)X"),
    residual("identity.trace_nabla_phi", Identities, Contact, NONE, Low, "tr ∇φ = 2nξ"),
    residual("identity.nabla_eta", Identities, Compatible, NONE, Low, "(∇_X η)Y = εg(∇_X ξ, Y)"),
    residual("lie.phi_xi", Identities, Structure, NONE, Low, "(£_ξ φ)ξ = 0"),
    residual("lie.g_symmetric", Identities, Structure, NONE, Low, "(£_ξ g)(X, Y) = (£_ξ g)(Y, X)"),
    residual("operator.h_self_adjoint", Identities, Contact, NONE, Low, "h = ½£_ξ φ is self-adjoint"),
    residual("operator.h_xi", Identities, Contact, NONE, Low, "hξ = 0"),
    residual("operator.h_anticommutes", Identities, Contact, NONE, Low, "φh + hφ = 0"),
    residual("operator.h_trace", Identities, Contact, NONE, Low, "tr h = tr φh = 0"),
    residual("operator.eta_h", Identities, Contact, NONE, Low, "η(hX) = 0"),
    residual("operator.tau_self_adjoint", Identities, Compatible, NONE, Low, "g(τX, Y) = (£_ξ g)(X, Y) defines a self-adjoint τ"),
    residual("operator.tau_2h_phi", Identities, Contact, NONE, Low, "τ = 2hφ"),
    residual("operator.ell_xi", Identities, Structure, NONE, Low, "ℓξ = R(ξ, ξ)ξ = 0"),
    residual("operator.nabla_ell_xi", Identities, Structure, NONE, High, "(∇_X ℓ)ξ = −ℓ(∇_X ξ)"),
    logic("lemma.k_contact_sasakian", Identities, Contact, &["k_contact"], Rule::Iff(&["sasakian"], &["curvature_xi"]), "K-contact: Sasakian ⇔ R(X, Y)ξ = η(Y)X − η(X)Y"),
    residual("codazzi.antisymmetry", Codazzi, Contact, NONE, Low, "(∇_X A)Y − (∇_Y A)X changes sign under X ↔ Y"),
    residual("codazzi.h_curvature", Codazzi, Contact, &["h_codazzi"], Low, "h Codazzi ⇒ R(ξ, X)ξ = φ²X − εhX"),
    logic("theorem.h_codazzi_nilpotent", Codazzi, Contact, NONE, Rule::Implies(&["h_codazzi"], &["h_squared"]), "h Codazzi ⇒ h² = 0"),
    logic("theorem.h_codazzi_sasakian", Codazzi, Contact, NONE, Rule::Iff(&["sasakian"], &["curvature_xi", "h_codazzi"]), "Sasakian ⇔ R(X, Y)ξ = η(Y)X − η(X)Y and h Codazzi"),
    logic("corollary.lorentzian_h_codazzi", Codazzi, Contact, &["lorentzian"], Rule::Implies(&["h_codazzi"], &["h_zero"]), "contact Lorentzian: h Codazzi ⇒ h = 0"),
    logic("lemma.tau_codazzi_curvature", Codazzi, Contact, NONE, Rule::Iff(&["tau_codazzi"], &["tau_curvature"]), "τ Codazzi ⇔ R(ξ, X)Y = ε(∇_X φ)Y"),
    residual("codazzi.tau_curvature_xi", Codazzi, Contact, &["tau_codazzi"], Low, "τ Codazzi ⇒ R(X, Y)ξ = ε{(∇_Y φ)X − (∇_X φ)Y}"),
    residual("codazzi.ricci_xi", Codazzi, Contact, &["tau_codazzi"], Low, "τ Codazzi ⇒ Qξ = 2εnξ"),
    residual("codazzi.xi_curvature_phi", Codazzi, Contact, &["tau_codazzi"], Low, "τ Codazzi ⇒ R(ξ, X)ξ − φR(ξ, φX)ξ = 2φ²X"),
    logic("theorem.tau_codazzi_nilpotent", Codazzi, Contact, NONE, Rule::Implies(&["tau_codazzi"], &["h_squared"]), "τ Codazzi ⇒ h² = 0"),
    logic("theorem.tau_codazzi_sasakian", Codazzi, Contact, NONE, Rule::Iff(&["sasakian"], &["curvature_xi", "tau_codazzi"]), "Sasakian ⇔ R(X, Y)ξ = η(Y)X − η(X)Y and τ Codazzi"),
    logic("corollary.lorentzian_tau_codazzi", Codazzi, Contact, &["lorentzian"], Rule::Implies(&["tau_codazzi"], &["h_zero"]), "contact Lorentzian: τ Codazzi ⇒ h = 0"),
    residual("sectional.k_formula", Sectional, Contact, NONE, Low, "K(ξ, X) = ε{1 − ε_X g(h²X, X) − ε_X g((∇_ξ h)X, φX)}"),
    residual("sectional.k_phi_formula", Sectional, Contact, NONE, Low, "K(ξ, X) = K(ξ, φX) − 2εε_X g((∇_ξ h)X, φX)"),
    residual("sectional.k_sum", Sectional, Contact, NONE, Low, "K(ξ, X) + K(ξ, φX) = 2ε{1 − ε_X g(h²X, X)}"),
    residual("sectional.sign_invariance", Sectional, Contact, NONE, Low, "K(ξ, −X) = K(ξ, X)"),
    residual("sectional.phi_symmetry", Sectional, Contact, NABLA_XI_H, Low, "∇_ξ h = 0 ⇒ K(ξ, X) = K(ξ, φX)"),
    residual("sectional.ell_formula", Sectional, Contact, NABLA_XI_H, Low, "∇_ξ h = 0 ⇒ ℓX = −h²X + X − η(X)ξ"),
    residual("sectional.ell_h_cubic", Sectional, Contact, PARALLEL, Low, "εh²φX − h³φX − εφX + hφX = 0"),
    residual("sectional.h_cubic_x", Sectional, Contact, PARALLEL, Low, "εg(h²X, X) + g(h³X, X) − εg(X, X) − g(hX, X) = 0"),
    residual("sectional.h_cubic_phi_x", Sectional, Contact, PARALLEL, Low, "−εg(h²X, X) + g(h³X, X) + εg(X, X) − g(hX, X) = 0"),
    residual("sectional.h_squared_unit", Sectional, Contact, PARALLEL, Low, "g(h²X, X) = g(X, X) = ε_X"),
    logic("theorem.k_contact_sectional", Sectional, Contact, NONE, Rule::Implies(&["k_contact"], &["xi_sectional_eps"]), "K-contact ⇒ every ξ-sectional curvature equals ε"),
    logic("theorem.h_squared_sectional", Sectional, Contact, NABLA_XI_H, Rule::Iff(&["h_squared"], &["xi_sectional_eps"]), "∇_ξ h = 0: h² = 0 ⇔ every ξ-sectional curvature equals ε"),
    logic("corollary.lorentzian_sectional", Sectional, Contact, &["lorentzian"], Rule::Iff(&["k_contact"], &["xi_sectional_eps"]), "contact Lorentzian: K-contact ⇔ every ξ-sectional curvature equals −1"),
    logic("theorem.parallel_ell_sectional", Sectional, Contact, NONE, Rule::Implies(PARALLEL, &["xi_sectional_zero"]), "∇_ξ h = 0 and ∇ℓ = 0 ⇒ every ξ-sectional curvature vanishes"),
    residual("cr.theta_h", Cr, Structure, NONE, Low, "θ = −η vanishes on H = Ker η"),
    residual("cr.j_squared", Cr, Structure, NONE, Low, "J² = −I on H"),
    residual("cr.project_h", Cr, Compatible, NONE, Low, "X − η(X)ξ is g-orthogonal to ξ"),
    residual("cr.levi_bracket", Cr, Structure, NONE, Low, "L_θ(X, Y) = dθ(X, JY) with dθ(X, Y) = −½θ([X, Y]) on H"),
    residual("cr.levi_metric", Cr, Contact, NONE, Low, "L_θ(X, Y) = g(X, Y) on H"),
    logic("cr.proposition_equivalence", Cr, Structure, NONE, Rule::AllEqual(&["levi_hermitian", "levi_symmetric", "bracket_in_h", "alpha_symmetric"]), "L_θ Hermitian ⇔ L_θ symmetric ⇔ [JX, Y] + [X, JY] ∈ H ⇔ α symmetric"),
    CheckDef {
        id: "cr.bracket_in_h",
        suite: Cr,
        reference: "[JX, Y] + [X, JY] ∈ H on contact structures",
        base: Contact,
        when: NONE,
        rule: Rule::Residual("pred.bracket_in_h", Low),
    },
    CheckDef {
        id: "cr.webster",
        suite: Cr,
        reference: "g_θ = g for g_θ(X, Y) = L_θ(X, Y), g_θ(X, ξ) = 0, g_θ(ξ, ξ) = ε",
        base: Contact,
        when: NONE,
        rule: Rule::Residual("pred.webster", Low),
    },
    logic("theorem.webster_contact", Cr, Compatible, NONE, Rule::Implies(&["contact"], &["levi_nondegenerate", "webster"]), "contact pseudo-metric ⇒ nondegenerate almost CR structure with Webster metric g"),
    CheckDef {
        id: "cr.structure_equation",
        suite: Cr,
        reference: "integrable ⇒ (∇_X J)Y − (∇_{JX} J)JY = α(X, Y)ξ",
        base: Compatible,
        when: INTEGRABLE_NONDEGENERATE,
        rule: Rule::Residual("pred.cr_63", Low),
    },
    residual("cr.a_tensor", Cr, Compatible, INTEGRABLE_NONDEGENERATE, Low, "integrable ⇒ A(X, Y, Z) = g((∇_{JX} J)JY − (∇_X J)Y, Z) = 0 on H"),
    residual("cr.gamma_alpha", Cr, Compatible, INTEGRABLE_NONDEGENERATE, Low, "integrable ⇒ (∇_{JX} J)JY − (∇_X J)Y = γ(X, Y)ξ with γ = −α"),
    logic("theorem.cr_characterization", Cr, Contact, &["levi_nondegenerate"], Rule::Iff(&["cr_integrable"], &["cr_63"]), "(H, J) integrable ⇔ (∇_X J)Y − (∇_{JX} J)JY = α(X, Y)ξ"),
    residual("cr.bott_in_h", Cr, Geodesic, NONE, Low, "ξ geodesic ⇒ [ξ, X] ∈ H for X in H"),
    residual("cr.bott_2h", Cr, Geodesic, NONE, Low, "ξ geodesic ⇒ 2hX = (∇̆_ξ J)X"),
    logic("theorem.bott_h", Cr, Geodesic, NONE, Rule::Iff(&["h_zero"], &["bott_zero"]), "ξ geodesic: h = 0 ⇔ ∇̆_ξ J = 0"),
    logic("corollary.contact_bott", Cr, Contact, NONE, Rule::Iff(&["k_contact"], &["bott_zero"]), "contact: K-contact ⇔ ∇̆_ξ J = 0"),
    logic("theorem.sasakian_cr", Cr, Structure, NONE, Rule::Iff(&["sasakian"], &["cr_integrable", "bott_zero"]), "Sasakian ⇔ (H, J) integrable and ∇̆_ξ J = 0"),
    residual("cr.structure_derivative", Cr, Contact, &["cr_integrable"], Low, "integrable ⇒ (∇_X φ)Y = g(X + εhX, Y)ξ − εη(Y)(X + εhX)"),
];

/// Ids of every check in table order.
pub fn check_ids() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.id).collect()
}

/// Runs every measurement at every sample point and assembles the report
/// records for the selected suite.
pub fn verify(spec: &StructureSpec, options: &CheckOptions) -> Result<Verification> {
    let seed = options.seed.unwrap_or(spec.sampling.seed);
    let count = options.points.unwrap_or(spec.sampling.points);
    let profile = match options.profile.or(spec.tolerances.profile) {
        Some(p) => p,
        None => Profile::from_env().map_err(Error::Spec)?,
    };
    let mut overrides = spec.tolerances.overrides.clone();
    overrides.extend(options.overrides.iter().map(|(k, v)| (k.clone(), *v)));
    for id in overrides.keys() {
        if !CHECKS.iter().any(|c| c.id == id) {
            return Err(Error::Spec(format!("tolerance override for unknown check `{id}`")));
        }
    }
    for p in &spec.sampling.extra {
        if p.len() != spec.dim() || !spec.chart.contains(p) {
            return Err(Error::OutsideDomain { point: p.clone() });
        }
    }
    let points = sample_points(&spec.chart, seed, count, &spec.sampling.extra);

    let evaluated: Vec<Result<(Measurements, Option<f64>)>> = points
        .par_iter()
        .map(|pt| {
            let p = spec.evaluate(pt)?;
            let mut m = metric_measurements(&p);
            m.extend(structure_measurements(&p));
            m.extend(cr_measurements(&p));
            Ok((m, p.contact.as_ref().map(|c| c.epsilon)))
        })
        .collect();
    let mut per_point = Vec::with_capacity(points.len());
    let mut epsilons = Vec::with_capacity(points.len());
    for e in evaluated {
        let (m, eps) = e?;
        per_point.push(m);
        epsilons.push(eps);
    }
    if let Some(Some(reference)) = epsilons.first().copied() {
        for (m, eps) in per_point.iter_mut().zip(&epsilons) {
            m.insert("compat.epsilon_constant", Measure::new((eps.unwrap_or(f64::NAN) - reference).abs()));
        }
    }

    let aggregates = aggregate(per_point.iter());
    let bound = spec.structure.is_some();
    let classification = classify_aggregates(&aggregates, bound);
    let predicates = predicates(&aggregates, &classification);

    let mut records = Vec::new();
    for def in CHECKS.iter().filter(|c| options.suite.includes(c.suite)) {
        records.push(evaluate_check(def, &aggregates, &predicates, &per_point, bound, profile, &overrides));
    }
    if let Some(expected) = &spec.expected {
        let wanted = [
            ("almost_contact", expected.almost_contact),
            ("compatible", expected.compatible),
            ("contact", expected.contact),
            ("k_contact", expected.k_contact),
            ("sasakian", expected.sasakian),
        ];
        for ((name, flag), (_, want)) in classification.flags().into_iter().zip(wanted) {
            let Some(want) = want else { continue };
            let (status, note) = match flag {
                Flag::Indeterminate => (Status::Indeterminate, "computed flag is indeterminate".to_string()),
                f if (f == Flag::True) == want => (Status::Pass, String::new()),
                f => (Status::Fail, format!("expected {want}, computed {}", f.label())),
            };
            records.push(CheckRecord {
                check_id: format!("classification.{name}"),
                reference: "expected classification".into(),
                max_residual: classification.residuals.get(name).copied().flatten(),
                tolerance: None,
                points_tested: points.len(),
                probes_skipped_null: 0,
                status,
                note,
            });
        }
    }

    Ok(Verification {
        seed,
        profile,
        suite: options.suite,
        points,
        per_point,
        aggregates,
        predicates,
        classification,
        records,
    })
}

fn truth_of(aggregates: &BTreeMap<&'static str, Aggregate>, id: &str) -> Truth {
    match aggregates.get(id) {
        Some(a) if a.mostly_null_points > 0 => Truth::Indeterminate,
        Some(a) => Truth::from_residual(a.max_residual),
        None => Truth::Indeterminate,
    }
}

fn classify_aggregates(aggregates: &BTreeMap<&'static str, Aggregate>, bound: bool) -> Classification {
    let criteria: [(&str, &[&str]); 5] = [
        ("almost_contact", &["axiom.phi_squared", "axiom.eta_xi", "axiom.phi_xi", "axiom.eta_phi"]),
        ("compatible", &["compat.metric", "compat.epsilon_constant"]),
        ("contact", &["pred.contact"]),
        ("k_contact", &["pred.h_zero"]),
        ("sasakian", &["pred.sasakian"]),
    ];
    let mut residuals = BTreeMap::new();
    if !bound {
        for (name, _) in criteria {
            residuals.insert(name.to_string(), None);
        }
        return Classification {
            almost_contact: Flag::NotBound,
            compatible: Flag::NotBound,
            contact: Flag::NotBound,
            k_contact: Flag::NotBound,
            sasakian: Flag::NotBound,
            residuals,
        };
    }
    let mut own = Vec::new();
    for (name, ids) in criteria {
        let truth = Truth::all(ids.iter().map(|id| truth_of(aggregates, id)));
        let worst = ids
            .iter()
            .filter_map(|id| aggregates.get(id).map(|a| a.max_residual))
            .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| crate::tolerance::max_residual(a, r))));
        residuals.insert(name.to_string(), worst);
        own.push(truth);
    }
    let almost_contact = own[0];
    let compatible = almost_contact.and(own[1]);
    let contact = compatible.and(own[2]);
    let k_contact = contact.and(own[3]);
    let sasakian = contact.and(own[4]);
    Classification {
        almost_contact: Flag::from_truth(almost_contact),
        compatible: Flag::from_truth(compatible),
        contact: Flag::from_truth(contact),
        k_contact: Flag::from_truth(k_contact),
        sasakian: Flag::from_truth(sasakian),
        residuals,
    }
}

fn predicates(
    aggregates: &BTreeMap<&'static str, Aggregate>,
    classification: &Classification,
) -> BTreeMap<String, PredicateValue> {
    let mut out = BTreeMap::new();
    for (id, a) in aggregates {
        if let Some(name) = id.strip_prefix("pred.") {
            out.insert(
                name.to_string(),
                PredicateValue {
                    truth: truth_of(aggregates, id),
                    max_residual: Some(a.max_residual),
                },
            );
        }
    }
    let integrable = match (out.get("bracket_in_h"), out.get("cr_d2")) {
        (Some(a), Some(b)) => Some(PredicateValue {
            truth: a.truth.and(b.truth),
            max_residual: Some(crate::tolerance::max_residual(
                a.max_residual.unwrap_or(f64::NAN),
                b.max_residual.unwrap_or(f64::NAN),
            )),
        }),
        _ => None,
    };
    if let Some(v) = integrable {
        out.insert("cr_integrable".into(), v);
    }
    for (name, flag) in classification.flags() {
        out.insert(
            name.to_string(),
            PredicateValue {
                truth: flag.truth(),
                max_residual: classification.residuals.get(name).copied().flatten(),
            },
        );
    }
    out
}

fn predicate(predicates: &BTreeMap<String, PredicateValue>, name: &str) -> Truth {
    predicates.get(name).map_or(Truth::Indeterminate, |p| p.truth)
}

fn conjunction(predicates: &BTreeMap<String, PredicateValue>, names: &[&str]) -> Truth {
    Truth::all(names.iter().map(|n| predicate(predicates, n)))
}

fn describe(predicates: &BTreeMap<String, PredicateValue>, names: &[&str]) -> String {
    names
        .iter()
        .map(|n| format!("{n}={}", predicate(predicates, n)))
        .collect::<Vec<_>>()
        .join(" ∧ ")
}

fn evaluate_check(
    def: &CheckDef,
    aggregates: &BTreeMap<&'static str, Aggregate>,
    predicates: &BTreeMap<String, PredicateValue>,
    per_point: &[Measurements],
    bound: bool,
    profile: Profile,
    overrides: &BTreeMap<String, f64>,
) -> CheckRecord {
    let mut record = CheckRecord {
        check_id: def.id.to_string(),
        reference: def.reference.to_string(),
        max_residual: None,
        tolerance: None,
        points_tested: 0,
        probes_skipped_null: 0,
        status: Status::Skipped,
        note: String::new(),
    };
    if let Rule::Residual(measure, order) = def.rule {
        record.tolerance = Some(overrides.get(def.id).copied().unwrap_or_else(|| profile.tolerance(order)));
        if let Some(a) = aggregates.get(measure) {
            record.max_residual = Some(a.max_residual);
            record.points_tested = a.points;
            record.probes_skipped_null = a.null_skipped;
        }
    }

    let base = match def.base {
        Base::Always => Truth::True,
        _ if !bound => {
            record.note = "structure fields not bound".into();
            return record;
        }
        Base::Structure => Truth::True,
        Base::Compatible => predicate(predicates, "compatible"),
        Base::Contact => predicate(predicates, "contact"),
        Base::Geodesic => predicate(predicates, "compatible").and(predicate(predicates, "xi_geodesic")),
    };
    let gate = Truth::all(std::iter::once(base).chain(def.when.iter().map(|n| predicate(predicates, n))));
    let base_name = match def.base {
        Base::Always | Base::Structure => "",
        Base::Compatible => "compatible",
        Base::Contact => "contact",
        Base::Geodesic => "compatible ∧ xi_geodesic",
    };
    let gate_names: Vec<&str> = std::iter::once(base_name).filter(|s| !s.is_empty()).chain(def.when.iter().copied()).collect();
    match gate {
        Truth::False => {
            record.note = format!("hypothesis not met: {}", describe(predicates, &gate_names));
            return record;
        }
        Truth::Indeterminate => {
            record.status = Status::Indeterminate;
            record.note = format!("hypothesis indeterminate: {}", describe(predicates, &gate_names));
            return record;
        }
        Truth::True => {}
    }

    match def.rule {
        Rule::Residual(..) => {
            let (Some(r), Some(tol)) = (record.max_residual, record.tolerance) else {
                record.status = Status::Fail;
                record.note = "no measurement".into();
                return record;
            };
            let Rule::Residual(measure, _) = def.rule else { unreachable!() };
            let mostly_null = aggregates.get(measure).map_or(0, |a| a.mostly_null_points);
            record.status = if mostly_null > 0 {
                record.note = format!("more than half of the probes were null at {mostly_null} points");
                Status::Indeterminate
            } else if r.is_nan() {
                record.note = "non-finite residual".into();
                Status::Fail
            } else if r <= tol {
                Status::Pass
            } else {
                Status::Fail
            };
        }
        Rule::Implies(premises, conclusions) => {
            let a = conjunction(predicates, premises);
            let b = conjunction(predicates, conclusions);
            record.points_tested = per_point.len();
            record.note = format!("{} ⇒ {}", describe(predicates, premises), describe(predicates, conclusions));
            record.status = match (a, b) {
                (Truth::True, Truth::False) => Status::Contradiction,
                (Truth::False, _) | (_, Truth::True) => Status::Pass,
                _ => Status::Indeterminate,
            };
        }
        Rule::Iff(left, right) => {
            let a = conjunction(predicates, left);
            let b = conjunction(predicates, right);
            record.points_tested = per_point.len();
            record.note = format!("{} ⇔ {}", describe(predicates, left), describe(predicates, right));
            record.status = match (a, b) {
                (Truth::Indeterminate, _) | (_, Truth::Indeterminate) => Status::Indeterminate,
                (x, y) if x == y => Status::Pass,
                _ => Status::Contradiction,
            };
        }
        Rule::AllEqual(names) => {
            let mut disagreements = 0;
            let mut undecided = 0;
            for m in per_point {
                let truths: Vec<Truth> = names
                    .iter()
                    .map(|n| {
                        m.get(&format!("pred.{n}"))
                            .map_or(Truth::Indeterminate, |x| Truth::from_residual(x.residual))
                    })
                    .collect();
                let any_true = truths.contains(&Truth::True);
                let any_false = truths.contains(&Truth::False);
                if any_true && any_false {
                    disagreements += 1;
                } else if truths.contains(&Truth::Indeterminate) {
                    undecided += 1;
                }
            }
            record.points_tested = per_point.len();
            record.note = format!(
                "{}; {disagreements} points disagree, {undecided} undecided",
                describe(predicates, names)
            );
            record.status = if disagreements > 0 {
                Status::Contradiction
            } else if undecided > 0 {
                Status::Indeterminate
            } else {
                Status::Pass
            };
        }
    }
    record
}
