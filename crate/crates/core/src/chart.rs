//! Charts, component specifications, point metrics, sampling and
//! pseudo-orthonormal frames.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::{Jet, JetError};
use crate::tensor::{lie_bracket, BilinearField, EndoField, VectorField};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5EED;
/// Number of sampled points besides the box center.
pub const DEFAULT_POINTS: usize = 32;
/// Pseudo-Gram–Schmidt rejects candidates with `|g(v,v)|` below this.
pub const PIVOT_THRESHOLD: f64 = 1e-6;
const MAX_FRAME_ATTEMPTS: u64 = 20;
const HALTON_POINTS: usize = 8;
const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// A single coordinate chart of dimension `2n+1` with a sampling box.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    n: usize,
    coordinates: Vec<String>,
    domain: Vec<(f64, f64)>,
}

impl Chart {
    pub fn new(n: usize, coordinates: Vec<String>, domain: Vec<(f64, f64)>) -> Result<Chart> {
        let dim = 2 * n + 1;
        if n == 0 {
            return Err(Error::InvalidChart("n must be positive".into()));
        }
        if coordinates.len() != dim {
            return Err(Error::InvalidChart(format!(
                "expected {dim} coordinate names, got {}",
                coordinates.len()
            )));
        }
        if domain.len() != dim {
            return Err(Error::InvalidChart(format!(
                "expected {dim} domain intervals, got {}",
                domain.len()
            )));
        }
        for (i, name) in coordinates.iter().enumerate() {
            let ok = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !ok {
                return Err(Error::InvalidChart(format!("invalid coordinate name `{name}`")));
            }
            if coordinates[..i].contains(name) {
                return Err(Error::InvalidChart(format!("duplicate coordinate `{name}`")));
            }
        }
        for (name, &(lo, hi)) in coordinates.iter().zip(&domain) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidChart(format!("degenerate interval for `{name}`: [{lo}, {hi}]")));
            }
        }
        Ok(Chart { n, coordinates, domain })
    }

    /// Coordinates `x1..xn, y1..yn, z` on the box `[-1, 1]^(2n+1)`.
    pub fn standard(n: usize) -> Result<Chart> {
        Chart::new(n, default_coordinates(n), vec![(-1.0, 1.0); 2 * n + 1])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn coordinates(&self) -> &[String] {
        &self.coordinates
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn center(&self) -> Vec<f64> {
        self.domain.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim() && point.iter().zip(&self.domain).all(|(&x, &(lo, hi))| x >= lo && x <= hi)
    }
}

pub fn default_coordinates(n: usize) -> Vec<String> {
    (1..=n)
        .map(|i| format!("x{i}"))
        .chain((1..=n).map(|i| format!("y{i}")))
        .chain(std::iter::once("z".to_string()))
        .collect()
}

/// Component expressions of a tensor field of valence `(r, s)`, `r + s ≤ 2`,
/// stored row-major with contravariant indices first.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorFieldSpec {
    valence: (u8, u8),
    dim: usize,
    components: Vec<Expr>,
}

impl TensorFieldSpec {
    pub fn new(valence: (u8, u8), dim: usize, components: Vec<Expr>) -> Result<TensorFieldSpec> {
        let rank = (valence.0 + valence.1) as u32;
        if rank > 2 {
            return Err(Error::Spec(format!("valence {valence:?} exceeds rank 2")));
        }
        let expected = dim.pow(rank);
        if components.len() != expected {
            return Err(Error::Spec(format!(
                "valence {valence:?} in dimension {dim} needs {expected} components, got {}",
                components.len()
            )));
        }
        Ok(TensorFieldSpec { valence, dim, components })
    }

    pub fn valence(&self) -> (u8, u8) {
        self.valence
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// Component at row `i`, column `j` of a rank-2 field.
    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.components[i * self.dim + j]
    }

    /// Evaluates every component against the coordinate jets `inputs`.
    pub fn eval_jets(&self, inputs: &[Jet], label: &str) -> Result<Vec<Jet>> {
        self.components
            .iter()
            .enumerate()
            .map(|(k, e)| {
                e.eval_with(inputs).map_err(|source| Error::Eval {
                    context: format!("{label}{}", self.index_label(k)),
                    source,
                })
            })
            .collect()
    }

    fn index_label(&self, k: usize) -> String {
        match self.valence.0 + self.valence.1 {
            0 => String::new(),
            1 => format!("[{k}]"),
            _ => format!("[{}][{}]", k / self.dim, k % self.dim),
        }
    }
}

/// Coordinate jets of `point` at the given order.
pub fn coordinate_jets(point: &[f64], order: usize) -> Result<Vec<Jet>, JetError> {
    point
        .iter()
        .enumerate()
        .map(|(i, &x)| Jet::variable(i, x, point.len(), order))
        .collect()
}

/// The metric at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAtPoint {
    pub components: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    /// Counts of positive and negative eigenvalues.
    pub signature: (usize, usize),
    pub determinant: f64,
}

impl MetricAtPoint {
    /// Validates symmetry and non-degeneracy of `g` at `point`.
    pub fn from_matrix(g: DMatrix<f64>, point: &[f64]) -> Result<MetricAtPoint> {
        let scale = g.amax().max(1.0);
        let asym = (&g - g.transpose()).amax() / scale;
        if asym > 1e-10 {
            return Err(Error::AsymmetricInput {
                point: point.to_vec(),
                residual: asym,
            });
        }
        let g = (&g + g.transpose()) * 0.5;
        let eig = SymmetricEigen::new(g.clone());
        let smallest = eig.eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if !(smallest > 1e-10 * scale) {
            return Err(Error::DegenerateMetric {
                point: point.to_vec(),
                smallest,
            });
        }
        let positive = eig.eigenvalues.iter().filter(|v| **v > 0.0).count();
        let determinant = eig.eigenvalues.iter().product();
        let inverse = g
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::DegenerateMetric {
                point: point.to_vec(),
                smallest,
            })?;
        let inverse = (&inverse + inverse.transpose()) * 0.5;
        Ok(MetricAtPoint {
            signature: (positive, g.nrows() - positive),
            components: g,
            inverse,
            determinant,
        })
    }

    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&(&self.components * y))
    }
}

/// Evaluates a `(0,2)` field at `point` and validates it as a metric.
pub fn metric_at(g: &TensorFieldSpec, point: &[f64]) -> Result<MetricAtPoint> {
    if g.valence() != (0, 2) {
        return Err(Error::Spec(format!("metric must have valence (0, 2), got {:?}", g.valence())));
    }
    let m = g.dim();
    let mut values = Vec::with_capacity(m * m);
    for (k, e) in g.components().iter().enumerate() {
        values.push(e.eval(point).map_err(|source| Error::Eval {
            context: format!("metric[{}][{}]", k / m, k % m),
            source,
        })?);
    }
    MetricAtPoint::from_matrix(DMatrix::from_row_slice(m, m, &values), point)
}

/// Box center, then up to eight Halton points, then seeded uniform points,
/// then the explicit `extra` points.
pub fn sample_points(chart: &Chart, seed: u64, count: usize, extra: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dim = chart.dim();
    let lerp = |u: f64, (lo, hi): (f64, f64)| lo + (hi - lo) * u;
    let mut points = vec![chart.center()];
    let halton = count.min(HALTON_POINTS);
    for k in 1..=halton as u64 {
        points.push(
            (0..dim)
                .map(|d| lerp(radical_inverse(k, PRIMES[d % PRIMES.len()]), chart.domain()[d]))
                .collect(),
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in halton..count {
        points.push((0..dim).map(|d| lerp(rng.random::<f64>(), chart.domain()[d])).collect());
    }
    points.extend(extra.iter().cloned());
    points
}

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while k > 0 {
        out += (k % base) as f64 * inv;
        k /= base;
        inv /= base as f64;
    }
    out
}

/// Pseudo-orthonormal vectors with their signs `ε_a = g(f_a, f_a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub vectors: Vec<DVector<f64>>,
    pub signs: Vec<f64>,
}

impl Frame {
    fn empty() -> Frame {
        Frame {
            vectors: Vec::new(),
            signs: Vec::new(),
        }
    }

    fn push(&mut self, v: DVector<f64>, sign: f64) {
        self.vectors.push(v);
        self.signs.push(sign);
    }

    /// Components `c_a = ε_a g(v, f_a)`.
    pub fn expand(&self, g: &DMatrix<f64>, v: &DVector<f64>) -> Vec<f64> {
        let gv = g * v;
        self.vectors.iter().zip(&self.signs).map(|(f, s)| s * gv.dot(f)).collect()
    }

    pub fn reconstruct(&self, coefficients: &[f64]) -> DVector<f64> {
        let dim = self.vectors.first().map_or(0, |v| v.len());
        self.vectors
            .iter()
            .zip(coefficients)
            .fold(DVector::zeros(dim), |acc, (f, c)| acc + f * *c)
    }

    /// Largest deviation of the Gram matrix from `diag(signs)`.
    pub fn orthonormality_residual(&self, g: &DMatrix<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, fa) in self.vectors.iter().enumerate() {
            for (b, fb) in self.vectors.iter().enumerate() {
                let target = if a == b { self.signs[a] } else { 0.0 };
                worst = worst.max((fa.dot(&(g * fb)) - target).abs());
            }
        }
        worst
    }
}

fn orthogonalize(g: &DMatrix<f64>, frame: &Frame, v: &DVector<f64>) -> DVector<f64> {
    let mut v = v.clone();
    if frame.vectors.is_empty() {
        return v;
    }
    for _ in 0..2 {
        let c = frame.expand(g, &v);
        v -= frame.reconstruct(&c);
    }
    v
}

/// Orthogonalizes every candidate against `frame` and normalizes the one with
/// the largest `|g(v,v)|`.
fn best_pivot(g: &DMatrix<f64>, frame: &Frame, candidates: &[DVector<f64>]) -> Option<(DVector<f64>, f64)> {
    candidates
        .iter()
        .map(|c| {
            let v = orthogonalize(g, frame, c);
            let q = v.dot(&(g * &v));
            (v, q)
        })
        .filter(|(_, q)| q.abs() >= PIVOT_THRESHOLD)
        .fold(None, |best: Option<(DVector<f64>, f64)>, (v, q)| match &best {
            Some((_, bq)) if bq.abs() >= q.abs() => best,
            _ => Some((v, q)),
        })
        .map(|(v, q)| (v / q.abs().sqrt(), q.signum()))
}

fn random_candidates(base: &[DVector<f64>], attempt: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED.wrapping_add(attempt));
    let dim = base.first().map_or(0, |v| v.len());
    (0..base.len())
        .map(|_| {
            base.iter()
                .fold(DVector::zeros(dim), |acc, b| acc + b * rng.random_range(-1.0..1.0))
        })
        .collect()
}

/// Pseudo-orthonormal frame of the whole tangent space from the coordinate
/// vectors, reseeding with random combinations when a pivot is null.
pub fn pseudo_orthonormal_frame(g: &DMatrix<f64>, point: &[f64]) -> Result<Frame> {
    let dim = g.nrows();
    let base: Vec<DVector<f64>> = (0..dim).map(|k| DVector::from_fn(dim, |i, _| f64::from(i == k))).collect();
    for attempt in 0..MAX_FRAME_ATTEMPTS {
        let candidates = if attempt == 0 { base.clone() } else { random_candidates(&base, attempt) };
        let mut frame = Frame::empty();
        while frame.vectors.len() < dim {
            match best_pivot(g, &frame, &candidates) {
                Some((v, s)) => frame.push(v, s),
                None => break,
            }
        }
        if frame.vectors.len() == dim {
            return Ok(frame);
        }
    }
    Err(Error::FrameConstructionFailure {
        point: point.to_vec(),
        reason: "every candidate became null".into(),
    })
}

/// A local φ-basis `{e_1..e_n, φe_1..φe_n, ξ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiBasis {
    pub n: usize,
    pub frame: Frame,
}

impl PhiBasis {
    pub fn e(&self, i: usize) -> &DVector<f64> {
        &self.frame.vectors[i]
    }

    pub fn phi_e(&self, i: usize) -> &DVector<f64> {
        &self.frame.vectors[self.n + i]
    }

    pub fn xi(&self) -> &DVector<f64> {
        &self.frame.vectors[2 * self.n]
    }

    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.frame.vectors
    }

    pub fn signs(&self) -> &[f64] {
        &self.frame.signs
    }
}

/// Builds a φ-basis by pseudo-Gram–Schmidt on the projections of the
/// coordinate vectors onto `Ker η`, pairing each accepted `e` with `φe`.
pub fn build_phi_basis(
    g: &DMatrix<f64>,
    phi: &DMatrix<f64>,
    xi: &DVector<f64>,
    eta: &DVector<f64>,
    point: &[f64],
) -> Result<PhiBasis> {
    let dim = g.nrows();
    let n = (dim - 1) / 2;
    let base: Vec<DVector<f64>> = (0..dim)
        .map(|k| {
            let mut v = DVector::from_fn(dim, |i, _| f64::from(i == k));
            v -= xi * eta[k];
            v
        })
        .collect();
    let epsilon = xi.dot(&(g * xi));
    if epsilon.abs() < PIVOT_THRESHOLD {
        return Err(Error::FrameConstructionFailure {
            point: point.to_vec(),
            reason: "ξ is null".into(),
        });
    }
    for attempt in 0..MAX_FRAME_ATTEMPTS {
        let candidates = if attempt == 0 { base.clone() } else { random_candidates(&base, attempt) };
        let mut frame = Frame::empty();
        let mut es = Vec::new();
        while es.len() < n {
            let Some((e, s)) = best_pivot(g, &frame, &candidates) else { break };
            let pe = phi * &e;
            frame.push(e.clone(), s);
            frame.push(pe.clone(), s);
            es.push((e, pe, s));
        }
        if es.len() == n {
            let mut out = Frame::empty();
            for (e, _, s) in &es {
                out.push(e.clone(), *s);
            }
            for (_, pe, s) in &es {
                out.push(pe.clone(), *s);
            }
            out.push(xi / epsilon.abs().sqrt(), epsilon.signum());
            return Ok(PhiBasis { n, frame: out });
        }
    }
    Err(Error::FrameConstructionFailure {
        point: point.to_vec(),
        reason: "no non-null vector left in Ker η".into(),
    })
}

/// `£_ξ φ`, assembled column by column as `[ξ, φ∂_j] − φ[ξ, ∂_j]`.
pub fn lie_derivative_phi(phi: &EndoField, xi: &VectorField) -> EndoField {
    let dim = phi.dim();
    let proto = &xi.0[0];
    let columns: Vec<VectorField> = (0..dim)
        .map(|j| {
            let dj = VectorField::coordinate(j, dim, proto);
            let phi_dj = VectorField((0..dim).map(|i| phi.get(i, j).clone()).collect());
            let a = lie_bracket(xi, &phi_dj);
            let b = phi.apply(&lie_bracket(xi, &dj));
            a.sub(&b)
        })
        .collect();
    EndoField::from_columns(&columns)
}

/// `(£_ξ g)(∂_i, ∂_j) = ξ(g_ij) − g([ξ,∂_i], ∂_j) − g(∂_i, [ξ,∂_j])`.
pub fn lie_derivative_metric(g: &BilinearField, xi: &VectorField) -> BilinearField {
    let dim = g.dim();
    let proto = &xi.0[0];
    let brackets: Vec<VectorField> = (0..dim)
        .map(|i| lie_bracket(xi, &VectorField::coordinate(i, dim, proto)))
        .collect();
    let mut entries = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let gij = g.get(i, j);
            let mut acc = gij.derivative(0).truncate(xi.order()).constant_like(0.0);
            for k in 0..dim {
                acc.add_product(&xi.0[k], &gij.derivative(k));
                acc -= &(&brackets[i].0[k] * g.get(k, j));
                acc -= &(&brackets[j].0[k] * g.get(i, k));
            }
            entries.push(acc);
        }
    }
    BilinearField::new(dim, entries)
}
