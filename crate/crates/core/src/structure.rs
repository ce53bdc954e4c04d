//! Structure specifications and everything materialized at one chart point.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::chart::{
    build_phi_basis, coordinate_jets, lie_derivative_metric, lie_derivative_phi, pseudo_orthonormal_frame, Chart,
    Frame, MetricAtPoint, PhiBasis, TensorFieldSpec, DEFAULT_POINTS, DEFAULT_SEED,
};
use crate::connection::{
    christoffel_jets, covariant_derivative, jet_matrix_inverse, metric_jets, riemann_jets, ChristoffelAtPoint,
    CurvatureAtPoint,
};
use crate::error::{Error, Result};
use crate::jet::{Jet, MAX_ORDER};
use crate::tensor::{BilinearField, CovectorField, EndoField, JetTensor, VectorField};
use crate::tolerance::Profile;

/// The fields `(φ, ξ, η)` of an almost contact structure.
#[derive(Debug, Clone, PartialEq)]
pub struct AlmostContactSpec {
    pub phi: TensorFieldSpec,
    pub xi: TensorFieldSpec,
    pub eta: TensorFieldSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingSpec {
    pub seed: u64,
    pub points: usize,
    pub extra: Vec<Vec<f64>>,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        SamplingSpec {
            seed: DEFAULT_SEED,
            points: DEFAULT_POINTS,
            extra: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ToleranceSpec {
    pub profile: Option<Profile>,
    pub overrides: BTreeMap<String, f64>,
}

/// Expected classification flags, compared against the computed ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExpectedClassification {
    pub almost_contact: Option<bool>,
    pub compatible: Option<bool>,
    pub contact: Option<bool>,
    pub k_contact: Option<bool>,
    pub sasakian: Option<bool>,
}

/// A chart with metric and optional almost contact fields.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureSpec {
    pub name: String,
    pub description: String,
    pub chart: Chart,
    pub metric: TensorFieldSpec,
    pub structure: Option<AlmostContactSpec>,
    pub sampling: SamplingSpec,
    pub tolerances: ToleranceSpec,
    pub expected: Option<ExpectedClassification>,
}

impl StructureSpec {
    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn n(&self) -> usize {
        self.chart.n()
    }

    /// Evaluates every field at `point`.
    pub fn evaluate(&self, point: &[f64]) -> Result<PointEvaluation> {
        PointEvaluation::new(self, point)
    }
}

/// Jet-valued almost contact fields at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldJets {
    pub g: BilinearField,
    pub phi: EndoField,
    pub xi: VectorField,
    pub eta: CovectorField,
}

/// Operators attached to an almost contact pseudo-metric structure at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureOperators {
    /// `h = ½ £_ξ φ`.
    pub h: DMatrix<f64>,
    /// `ℓX = R(X, ξ)ξ`.
    pub ell: DMatrix<f64>,
    /// `g(τX, Y) = (£_ξ g)(X, Y)`.
    pub tau: DMatrix<f64>,
    /// `Φ(X, Y) = g(X, φY)`.
    pub phi_form: DMatrix<f64>,
    /// `dη(X, Y) = ½(Xη(Y) − Yη(X) − η([X, Y]))`.
    pub d_eta: DMatrix<f64>,
    /// `X ↦ ∇_X ξ`.
    pub nabla_xi: DMatrix<f64>,
    /// `∇_ξ h`.
    pub nabla_xi_h: DMatrix<f64>,
    /// `£_ξ g` as a bilinear form.
    pub lie_g: DMatrix<f64>,
    /// `£_ξ φ` as a matrix.
    pub lie_phi: DMatrix<f64>,
}

/// Almost contact data at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactPoint {
    pub jets: FieldJets,
    pub phi: DMatrix<f64>,
    pub xi: DVector<f64>,
    pub eta: DVector<f64>,
    /// `g(ξ, ξ)` as computed.
    pub xi_norm: f64,
    /// Sign of `g(ξ, ξ)`.
    pub epsilon: f64,
    pub ops: StructureOperators,
    /// `(∇_k φ)^i_j`, one matrix per `k`.
    pub nabla_phi: Vec<DMatrix<f64>>,
    /// `(∇_k η)_j` at row `j`, column `k`.
    pub nabla_eta: DMatrix<f64>,
    pub nabla_h: Vec<DMatrix<f64>>,
    pub nabla_tau: Vec<DMatrix<f64>>,
    /// Uses third derivatives of the metric.
    pub nabla_ell: Vec<DMatrix<f64>>,
    pub phi_basis: Option<PhiBasis>,
}

/// Everything computed at one sample point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEvaluation {
    pub point: Vec<f64>,
    pub n: usize,
    pub metric: MetricAtPoint,
    /// `(∇_k g)_ij`, one matrix per `k`.
    pub nabla_g: Vec<DMatrix<f64>>,
    /// `∂_k g_ij`, one matrix per `k`.
    pub metric_partials: Vec<DMatrix<f64>>,
    pub christoffel: ChristoffelAtPoint,
    pub curvature: CurvatureAtPoint,
    pub frame: Frame,
    pub contact: Option<ContactPoint>,
}

impl PointEvaluation {
    pub fn new(spec: &StructureSpec, point: &[f64]) -> Result<PointEvaluation> {
        let dim = spec.dim();
        if point.len() != dim {
            return Err(Error::Spec(format!("point has {} coordinates, chart has {dim}", point.len())));
        }
        let metric = crate::chart::metric_at(&spec.metric, point)?;
        let inputs = coordinate_jets(point, MAX_ORDER).map_err(|e| Error::Spec(e.to_string()))?;
        let g = metric_jets(&spec.metric, &inputs)?;
        let g_inv = jet_matrix_inverse(dim, g.entries()).map_err(|_| Error::DegenerateMetric {
            point: point.to_vec(),
            smallest: 0.0,
        })?;
        let gamma = christoffel_jets(&g, &g_inv);
        let riemann = riemann_jets(&gamma);
        let frame = pseudo_orthonormal_frame(&metric.components, point)?;
        let curvature = CurvatureAtPoint::new(&riemann, &metric.components, &metric.inverse, &frame);
        let nabla_g = covariant_derivative(&JetTensor::from(&g), &gamma).matrices_by_last();
        let metric_partials = (0..dim)
            .map(|k| DMatrix::from_fn(dim, dim, |i, j| g.get(i, j).d(k)))
            .collect();

        let contact = match &spec.structure {
            None => None,
            Some(fields) => Some(contact_point(fields, &inputs, g, &g_inv, &gamma, &riemann, &metric, point)?),
        };

        Ok(PointEvaluation {
            point: point.to_vec(),
            n: spec.n(),
            metric,
            nabla_g,
            metric_partials,
            christoffel: ChristoffelAtPoint::from_jets(&gamma),
            curvature,
            frame,
            contact,
        })
    }

    pub fn dim(&self) -> usize {
        self.point.len()
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.metric.components
    }

    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.metric.inner(x, y)
    }

    /// Coordinate basis vectors.
    pub fn coordinate_probes(&self) -> Vec<DVector<f64>> {
        let d = self.dim();
        (0..d).map(|k| DVector::from_fn(d, |i, _| f64::from(i == k))).collect()
    }
}

#[allow(clippy::too_many_arguments)]
fn contact_point(
    fields: &AlmostContactSpec,
    inputs: &[Jet],
    g: BilinearField,
    g_inv: &[Jet],
    gamma: &JetTensor,
    riemann: &JetTensor,
    metric: &MetricAtPoint,
    point: &[f64],
) -> Result<ContactPoint> {
    let dim = g.dim();
    let phi = EndoField::new(dim, fields.phi.eval_jets(inputs, "phi")?);
    let xi = VectorField(fields.xi.eval_jets(inputs, "xi")?);
    let eta = CovectorField(fields.eta.eval_jets(inputs, "eta")?);

    let phi_v = phi.value();
    let xi_v = xi.value();
    let eta_v = eta.value();
    let xi_norm = metric.inner(&xi_v, &xi_v);
    let epsilon = if xi_norm < 0.0 { -1.0 } else { 1.0 };

    let lie_phi = lie_derivative_phi(&phi, &xi);
    let h = lie_phi.scale(0.5);
    let lie_g = lie_derivative_metric(&g, &xi);
    let order = lie_g.entries()[0].order();
    let tau = JetTensor::from_fn(dim, 1, 1, |idx| {
        let mut acc = lie_g.get(0, 0).constant_like(0.0);
        for k in 0..dim {
            acc.add_product(&g_inv[idx[0] * dim + k].truncate(order), lie_g.get(k, idx[1]));
        }
        acc
    });
    let ell = JetTensor::from_fn(dim, 1, 1, |idx| {
        let (l, i) = (idx[0], idx[1]);
        let mut acc = riemann.get(&[l, 0, i, 0]).constant_like(0.0);
        for j in 0..dim {
            for k in 0..dim {
                let xx = &xi.0[j] * &xi.0[k];
                acc.add_product(riemann.get(&[l, k, i, j]), &xx);
            }
        }
        acc
    });

    let h_t = JetTensor::from(&h);
    let nabla_xi = covariant_derivative(&JetTensor::from(&xi), gamma).matrix();
    let nabla_eta = covariant_derivative(&JetTensor::from(&eta), gamma).matrix();
    let nabla_phi = covariant_derivative(&JetTensor::from(&phi), gamma).matrices_by_last();
    let nabla_h = covariant_derivative(&h_t, gamma).matrices_by_last();
    let nabla_tau = covariant_derivative(&tau, gamma).matrices_by_last();
    let nabla_ell = covariant_derivative(&ell, gamma).matrices_by_last();
    let nabla_xi_h = nabla_h
        .iter()
        .zip(xi_v.iter())
        .fold(DMatrix::zeros(dim, dim), |acc, (d, x)| acc + d * *x);

    let d_eta = DMatrix::from_fn(dim, dim, |i, j| 0.5 * (eta.0[j].d(i) - eta.0[i].d(j)));
    let phi_form = &metric.components * &phi_v;
    let phi_basis = build_phi_basis(&metric.components, &phi_v, &xi_v, &eta_v, point).ok();

    let ops = StructureOperators {
        h: h.value(),
        ell: ell.matrix(),
        tau: tau.matrix(),
        phi_form,
        d_eta,
        nabla_xi,
        nabla_xi_h,
        lie_g: lie_g.value(),
        lie_phi: lie_phi.value(),
    };
    Ok(ContactPoint {
        jets: FieldJets { g, phi, xi, eta },
        phi: phi_v,
        xi: xi_v,
        eta: eta_v,
        xi_norm,
        epsilon,
        ops,
        nabla_phi,
        nabla_eta,
        nabla_h,
        nabla_tau,
        nabla_ell,
        phi_basis,
    })
}
