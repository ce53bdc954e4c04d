//! Named residual measurements at a point, and their ordered aggregation.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::tolerance::{max_residual, Residual};

/// Fraction of null probes above which a probe-based measurement at a point
/// is reported as indeterminate.
pub const MAX_NULL_FRACTION: f64 = 0.5;

/// One measurement at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measure {
    pub residual: f64,
    /// Probes evaluated.
    pub probes: usize,
    /// Probes skipped because `|g(X, X)|` was below the pivot threshold.
    pub null_skipped: usize,
}

impl Measure {
    pub fn new(residual: f64) -> Measure {
        Measure {
            residual,
            probes: 0,
            null_skipped: 0,
        }
    }

    pub fn from_residual(r: &Residual, probes: usize) -> Measure {
        Measure {
            residual: r.value(),
            probes,
            null_skipped: 0,
        }
    }

    pub fn with_nulls(mut self, null_skipped: usize) -> Measure {
        self.null_skipped = null_skipped;
        self
    }

    /// True when more than half of the candidate probes were null.
    pub fn mostly_null(&self) -> bool {
        let total = self.probes + self.null_skipped;
        total > 0 && self.null_skipped as f64 > MAX_NULL_FRACTION * total as f64
    }
}

/// Measurements at one point keyed by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Measurements(pub BTreeMap<&'static str, Measure>);

impl Measurements {
    pub fn new() -> Measurements {
        Measurements::default()
    }

    pub fn insert(&mut self, id: &'static str, m: Measure) {
        self.0.insert(id, m);
    }

    pub fn residual(&mut self, id: &'static str, r: &Residual, probes: usize) {
        self.insert(id, Measure::from_residual(r, probes));
    }

    pub fn value(&mut self, id: &'static str, v: f64) {
        self.insert(id, Measure::new(v));
    }

    pub fn get(&self, id: &str) -> Option<&Measure> {
        self.0.get(id)
    }

    pub fn extend(&mut self, other: Measurements) {
        self.0.extend(other.0);
    }
}

/// A measurement aggregated over sample points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregate {
    pub max_residual: f64,
    pub points: usize,
    pub null_skipped: usize,
    /// Points at which most probes were null.
    pub mostly_null_points: usize,
}

impl Aggregate {
    fn start(m: &Measure) -> Aggregate {
        Aggregate {
            max_residual: m.residual,
            points: 1,
            null_skipped: m.null_skipped,
            mostly_null_points: usize::from(m.mostly_null()),
        }
    }

    fn absorb(&mut self, m: &Measure) {
        self.max_residual = max_residual(self.max_residual, m.residual);
        self.points += 1;
        self.null_skipped += m.null_skipped;
        self.mostly_null_points += usize::from(m.mostly_null());
    }
}

/// Folds per-point measurements in the given order.
pub fn aggregate<'a>(points: impl IntoIterator<Item = &'a Measurements>) -> BTreeMap<&'static str, Aggregate> {
    let mut out: BTreeMap<&'static str, Aggregate> = BTreeMap::new();
    for m in points {
        for (id, measure) in &m.0 {
            out.entry(id)
                .and_modify(|a| a.absorb(measure))
                .or_insert_with(|| Aggregate::start(measure));
        }
    }
    out
}
