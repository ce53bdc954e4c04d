//! The almost CR structure `(H, J, θ)` with `H = Ker η`, `J = φ|H` and
//! `θ = −η`, measured at one point.

use nalgebra::{DMatrix, DVector};

use crate::connection::apply_derivative;
use crate::measure::Measurements;
use crate::structure::{ContactPoint, PointEvaluation};
use crate::tensor::{lie_bracket, VectorField};
use crate::tolerance::Residual;

/// `|det L| > LEVI_DEGENERACY · scale^{2n}` counts as nondegenerate.
pub const LEVI_DEGENERACY: f64 = 1e-8;

/// Orthogonal projection `X − η(X)ξ` onto `H`.
pub fn project_h(c: &ContactPoint, x: &DVector<f64>) -> DVector<f64> {
    x - &c.xi * c.eta.dot(x)
}

/// Coordinate indices whose projections span `H`, chosen greedily by
/// Euclidean norm after removing the span of earlier choices.
pub fn h_basis_indices(c: &ContactPoint, n: usize) -> Vec<usize> {
    let d = c.xi.len();
    let projected: Vec<DVector<f64>> = (0..d)
        .map(|k| project_h(c, &DVector::from_fn(d, |i, _| f64::from(i == k))))
        .collect();
    let mut chosen: Vec<usize> = Vec::new();
    let mut ortho: Vec<DVector<f64>> = Vec::new();
    while chosen.len() < 2 * n {
        let best = (0..d)
            .filter(|k| !chosen.contains(k))
            .map(|k| {
                let mut v = projected[k].clone();
                for _ in 0..2 {
                    for u in &ortho {
                        v -= u * u.dot(&v);
                    }
                }
                (k, v)
            })
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()));
        let Some((k, v)) = best else { break };
        let norm = v.norm();
        if norm < 1e-12 {
            break;
        }
        chosen.push(k);
        ortho.push(v / norm);
    }
    chosen
}

/// `∂_k − η_k ξ` as a jet field; tangent to `H` wherever `η(ξ) = 1`.
pub fn h_extended(c: &ContactPoint, k: usize) -> VectorField {
    let d = c.xi.len();
    let proto = &c.jets.eta.0[0];
    VectorField::coordinate(k, d, proto).sub(&c.jets.xi.scale_by(&c.jets.eta.0[k]))
}

/// Levi form `L_θ(X, Y) = dθ(X, JY) = −dη(X, φY)` for arbitrary vectors.
pub fn levi(c: &ContactPoint, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    -x.dot(&(&c.ops.d_eta * (&c.phi * y)))
}

/// `(∇_X η)Y`.
fn nabla_eta(c: &ContactPoint, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    y.dot(&(&c.nabla_eta * x))
}

/// `α(X, Y) = (∇_X θ)(JY) + (∇_{JX} θ)(Y)`.
pub fn alpha(c: &ContactPoint, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    -(nabla_eta(c, x, &(&c.phi * y)) + nabla_eta(c, &(&c.phi * x), y))
}

/// Webster metric `g_θ` rebuilt from `(H, J, θ)` and `ε`.
pub fn webster_metric(c: &ContactPoint) -> DMatrix<f64> {
    let d = c.xi.len();
    let p = DMatrix::identity(d, d) - &c.xi * c.eta.transpose();
    let levi_full = -(&c.ops.d_eta * &c.phi);
    p.transpose() * levi_full * p + &c.eta * c.eta.transpose() * c.epsilon
}

/// `(∇̆_ξ J)X = [ξ, JX]|H − J([ξ, X]|H)` for an H-extended field `X`.
pub fn bott_j(c: &ContactPoint, x: &VectorField) -> DVector<f64> {
    let jx = c.jets.phi.apply(x);
    let a = project_h(c, &lie_bracket(&c.jets.xi, &jx).value());
    let b = project_h(c, &lie_bracket(&c.jets.xi, x).value());
    a - &c.phi * b
}

/// Every CR measurement at a point. Empty when the structure is not bound.
pub fn cr_measurements(p: &PointEvaluation) -> Measurements {
    let mut out = Measurements::new();
    let Some(c) = p.contact.as_ref() else {
        return out;
    };
    let n = p.n;
    let eps = c.epsilon;
    let g = p.g();
    let phi = &c.phi;

    let indices = h_basis_indices(c, n);
    let fields: Vec<VectorField> = indices.iter().map(|&k| h_extended(c, k)).collect();
    let jfields: Vec<VectorField> = fields.iter().map(|f| c.jets.phi.apply(f)).collect();
    let basis: Vec<DVector<f64>> = fields.iter().map(VectorField::value).collect();
    let m = basis.len();
    let complete = m == 2 * n;

    let mut r = Residual::new();
    let mut j2 = Residual::new();
    for v in &basis {
        r.push(c.eta.dot(v), 0.0);
        j2.push_vec(&(phi * (phi * v)), &(-v));
    }
    if !complete {
        r.poison();
        j2.poison();
    }
    out.residual("cr.theta_h", &r, m);
    out.residual("cr.j_squared", &j2, m);

    let mut r = Residual::new();
    for x in p.coordinate_probes() {
        r.push(p.inner(&project_h(c, &x), &c.xi), 0.0);
    }
    out.residual("cr.project_h", &r, p.dim());

    let levi_m = DMatrix::from_fn(m, m, |a, b| levi(c, &basis[a], &basis[b]));
    let mut bracket = Residual::new();
    let mut metric = Residual::new();
    let mut hermitian = Residual::new();
    let mut d1 = Residual::new();
    let mut d2 = Residual::new();
    let mut alpha_sym = Residual::new();
    let mut eq63 = Residual::new();
    let mut a_tensor = Residual::new();
    let mut gamma_alpha = Residual::new();
    let mut gamma_alpha_literal = Residual::new();
    for a in 0..m {
        let (x, jx) = (&basis[a], &jfields[a].value());
        for b in 0..m {
            let (y, jy) = (&basis[b], &jfields[b].value());
            let l = levi_m[(a, b)];
            let half_bracket = 0.5 * c.eta.dot(&lie_bracket(&fields[a], &jfields[b]).value());
            bracket.push(l, half_bracket);
            metric.push(l, p.inner(x, y));
            hermitian.push(levi(c, jx, jy), l);

            let b1 = lie_bracket(&jfields[a], &fields[b]).value() + lie_bracket(&fields[a], &jfields[b]).value();
            d1.push(c.eta.dot(&b1), 0.0);
            let rhs = project_h(c, &lie_bracket(&jfields[a], &jfields[b]).value())
                - project_h(c, &lie_bracket(&fields[a], &fields[b]).value());
            d2.push_vec(&(phi * project_h(c, &b1)), &rhs);

            let al = alpha(c, x, y);
            alpha_sym.push(al, alpha(c, y, x));
            let nxj = apply_derivative(&c.nabla_phi, x, y);
            let njxj = apply_derivative(&c.nabla_phi, jx, jy);
            eq63.push_vec(&(&nxj - &njxj), &(&c.xi * al));
            let defect = &njxj - &nxj;
            for z in &basis {
                a_tensor.push(p.inner(&defect, z), 0.0);
            }
            let gamma = eps * p.inner(&defect, &c.xi);
            gamma_alpha.push(gamma, -al);
            gamma_alpha_literal.push(gamma, al);
        }
    }
    let pairs = m * m;
    out.residual("cr.levi_bracket", &bracket, pairs);
    out.residual("cr.levi_metric", &metric, pairs);
    out.residual("pred.levi_hermitian", &hermitian, pairs);
    let mut r = Residual::new();
    r.push_mat(&levi_m, &levi_m.transpose());
    out.residual("pred.levi_symmetric", &r, pairs);
    out.residual("pred.bracket_in_h", &d1, pairs);
    out.residual("pred.cr_d2", &d2, pairs);
    out.residual("pred.alpha_symmetric", &alpha_sym, pairs);
    out.residual("pred.cr_63", &eq63, pairs);
    out.residual("cr.a_tensor", &a_tensor, pairs * m);
    out.residual("cr.gamma_alpha", &gamma_alpha, pairs);
    out.residual("cr.gamma_alpha_literal", &gamma_alpha_literal, pairs);

    let scale = levi_m.amax();
    let nondegenerate = complete && scale > 0.0 && levi_m.determinant().abs() > LEVI_DEGENERACY * scale.powi(m as i32);
    out.value("pred.levi_nondegenerate", if nondegenerate { 0.0 } else { 1.0 });

    let mut zero = Residual::new();
    let mut two_h = Residual::new();
    let mut in_h = Residual::new();
    for (f, v) in fields.iter().zip(&basis) {
        let bj = bott_j(c, f);
        zero.push_zero_vec(&bj);
        two_h.push_vec(&((&c.ops.h * v) * 2.0), &bj);
        in_h.push(c.eta.dot(&lie_bracket(&c.jets.xi, f).value()), 0.0);
    }
    out.residual("pred.bott_zero", &zero, m);
    out.residual("cr.bott_2h", &two_h, m);
    out.residual("cr.bott_in_h", &in_h, m);

    let mut r = Residual::new();
    r.push_mat(&webster_metric(c), g);
    out.residual("pred.webster", &r, 0);
    out
}
