//! Fixtures shared by the engine benchmarks.

use pseudocontact_core::catalog;
use pseudocontact_core::jet::MAX_ORDER;
use pseudocontact_core::{Jet, StructureSpec};

/// Spec of a catalog entry; panics on unknown names.
pub fn spec(name: &str) -> StructureSpec {
    catalog::entry(name).expect("catalog entry").spec
}

/// A non-central point inside the chart box.
pub fn probe_point(spec: &StructureSpec) -> Vec<f64> {
    spec.chart
        .domain()
        .iter()
        .enumerate()
        .map(|(i, (lo, hi))| lo + (hi - lo) * (0.3 + 0.1 * i as f64))
        .collect()
}

/// Order-3 jets of two smooth functions in `vars` variables.
pub fn jet_pair(vars: usize) -> (Jet, Jet) {
    let x: Vec<Jet> = (0..vars)
        .map(|i| Jet::variable(i, 0.1 * (i + 1) as f64, vars, MAX_ORDER).unwrap())
        .collect();
    let sum = x.iter().skip(1).fold(x[0].clone(), |acc, v| &acc + v);
    let prod = x.iter().skip(1).fold(x[0].clone(), |acc, v| &acc * v);
    (sum.sin().unwrap(), prod.exp().unwrap())
}
