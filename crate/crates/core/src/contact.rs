//! Almost contact axioms, structure identities, Codazzi defects and
//! ξ-sectional curvatures, measured at one point.

use nalgebra::{DMatrix, DVector};

use crate::chart::PIVOT_THRESHOLD;
use crate::connection::{apply_derivative, derivative_along};
use crate::error::{Error, Result};
use crate::measure::{Measure, Measurements};
use crate::structure::{ContactPoint, PointEvaluation};
use crate::tolerance::Residual;

/// Probe vectors for identity checks: the coordinate frame followed by the
/// φ-basis when one exists.
pub fn identity_probes(p: &PointEvaluation) -> Vec<DVector<f64>> {
    let mut probes = p.coordinate_probes();
    if let Some(basis) = p.contact.as_ref().and_then(|c| c.phi_basis.as_ref()) {
        probes.extend(basis.vectors().iter().cloned());
    }
    probes
}

/// `(∇_X A)Y − (∇_Y A)X` from the derivative table of `A`, built from the
/// antisymmetrized table so that swapping `X` and `Y` flips the sign exactly.
pub fn codazzi_defect(d: &[DMatrix<f64>], x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let dim = x.len();
    let mut out = DVector::zeros(dim);
    for j in 0..dim {
        for k in (j + 1)..dim {
            let w = x[k] * y[j] - x[j] * y[k];
            if w == 0.0 {
                continue;
            }
            for i in 0..dim {
                out[i] += w * (d[k][(i, j)] - d[j][(i, k)]);
            }
        }
    }
    out
}

/// `h = ½ £_ξ φ`, refused when `dη ≠ Φ` beyond `tol`.
pub fn h_operator(p: &PointEvaluation, tol: f64) -> Result<DMatrix<f64>> {
    let c = p.contact.as_ref().ok_or(Error::StructureNotBound)?;
    let mut r = Residual::new();
    r.push_mat(&c.ops.d_eta, &c.ops.phi_form);
    let residual = r.value();
    if residual.is_nan() || residual > tol {
        return Err(Error::ContactViolation { residual });
    }
    Ok(c.ops.h.clone())
}

/// `K(ξ, X) = εε_X g(R(ξ, X)X, ξ)` for a unit `X` in `Ker η`.
pub fn xi_sectional(p: &PointEvaluation, x: &DVector<f64>, tol: f64) -> Result<f64> {
    let c = p.contact.as_ref().ok_or(Error::StructureNotBound)?;
    let q = p.inner(x, x);
    if q.abs() < PIVOT_THRESHOLD {
        return Err(Error::InadmissibleProbe(format!("null probe, g(X,X) = {q:e}")));
    }
    if (q.abs() - 1.0).abs() > tol {
        return Err(Error::InadmissibleProbe(format!("probe is not unit, g(X,X) = {q}")));
    }
    if c.eta.dot(x).abs() > tol {
        return Err(Error::InadmissibleProbe("probe is not in Ker η".into()));
    }
    Ok(sectional(p, c, x, q.signum()))
}

fn sectional(p: &PointEvaluation, c: &ContactPoint, x: &DVector<f64>, eps_x: f64) -> f64 {
    c.epsilon * eps_x * p.curvature.form(&c.xi, x, x, &c.xi)
}

fn unit_vector(dim: usize, k: usize) -> DVector<f64> {
    DVector::from_fn(dim, |i, _| f64::from(i == k))
}

/// Connection, curvature and frame measurements that need only the metric.
pub fn metric_measurements(p: &PointEvaluation) -> Measurements {
    let d = p.dim();
    let g = p.g();
    let mut out = Measurements::new();

    let mut r = Residual::new();
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                r.push(p.christoffel.get(k, i, j), p.christoffel.get(k, j, i));
            }
        }
    }
    out.residual("connection.torsion_free", &r, 0);

    let mut r = Residual::new();
    for m in &p.nabla_g {
        r.push_zero_mat(m);
    }
    out.residual("connection.metric_compatible", &r, 0);

    let rc = &p.curvature;
    let (mut anti, mut skew, mut pair, mut bianchi) = (Residual::new(), Residual::new(), Residual::new(), Residual::new());
    for l in 0..d {
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    anti.push(rc.raised(l, k, i, j), -rc.raised(l, k, j, i));
                    skew.push(rc.lowered(l, k, i, j), -rc.lowered(k, l, i, j));
                    pair.push(rc.lowered(l, k, i, j), rc.lowered(j, i, k, l));
                    let cyc = rc.raised(l, k, i, j) + rc.raised(l, i, j, k) + rc.raised(l, j, k, i);
                    bianchi.push(cyc, 0.0);
                }
            }
        }
    }
    out.residual("curvature.antisymmetry", &anti, 0);
    out.residual("curvature.metric_skew", &skew, 0);
    out.residual("curvature.pair_symmetry", &pair, 0);
    out.residual("curvature.bianchi", &bianchi, 0);

    let mut r = Residual::new();
    r.push_mat(&rc.ricci, &rc.ricci_trace());
    out.residual("ricci.frame_trace", &r, 0);
    let mut r = Residual::new();
    r.push_mat(&rc.ricci, &rc.ricci.transpose());
    out.residual("ricci.symmetric", &r, 0);

    let mut r = Residual::new();
    let probes = p.coordinate_probes();
    for v in &probes {
        r.push_vec(&p.frame.reconstruct(&p.frame.expand(g, v)), v);
    }
    r.push(p.frame.orthonormality_residual(g), 0.0);
    out.residual("frame.pseudo_orthonormal", &r, probes.len());

    out.value("pred.lorentzian", if p.metric.signature.1 == 1 { 0.0 } else { 1.0 });
    out
}

/// Every measurement that needs the almost contact fields. Empty when the
/// structure is not bound.
pub fn structure_measurements(p: &PointEvaluation) -> Measurements {
    let Some(c) = p.contact.as_ref() else {
        return Measurements::new();
    };
    let mut out = Measurements::new();
    axioms(p, c, &mut out);
    compatibility(p, c, &mut out);
    identities(p, c, &mut out);
    operators(p, c, &mut out);
    codazzi(p, c, &mut out);
    sectional_curvatures(p, c, &mut out);
    out
}

fn axioms(p: &PointEvaluation, c: &ContactPoint, out: &mut Measurements) {
    let d = p.dim();
    let ident = DMatrix::<f64>::identity(d, d);
    let mut r = Residual::new();
    r.push_mat(&(&c.phi * &c.phi), &(-&ident + &c.xi * c.eta.transpose()));
    out.residual("axiom.phi_squared", &r, 0);

    let mut r = Residual::new();
    r.push(c.eta.dot(&c.xi), 1.0);
    out.residual("axiom.eta_xi", &r, 0);

    let mut r = Residual::new();
    r.push_zero_vec(&(&c.phi * &c.xi));
    out.residual("axiom.phi_xi", &r, 0);

    let mut r = Residual::new();
    r.push_zero_vec(&(c.phi.transpose() * &c.eta));
    out.residual("axiom.eta_phi", &r, 0);

    let sv = c.phi.clone().singular_values();
    let top = sv.max().max(1.0);
    let rank = sv.iter().filter(|s| **s > 1e-6 * top).count();
    out.value("axiom.phi_rank", (rank as f64 - 2.0 * p.n as f64).abs());
}

fn compatibility(p: &PointEvaluation, c: &ContactPoint, out: &mut Measurements) {
    let g = p.g();
    let eps = c.epsilon;

    let mut r = Residual::new();
    r.push_mat(&(c.phi.transpose() * g * &c.phi), &(g - &c.eta * c.eta.transpose() * eps));
    out.residual("compat.metric", &r, 0);

    let mut r = Residual::new();
    r.push_vec(&c.eta, &((g * &c.xi) * eps));
    out.residual("compat.eta_dual", &r, 0);

    let mut r = Residual::new();
    r.push(c.xi_norm, eps);
    out.residual("compat.xi_unit", &r, 0);

    let mut r = Residual::new();
    r.push_mat(&c.ops.phi_form, &(-c.ops.phi_form.transpose()));
    out.residual("form.phi_skew", &r, 0);

    let mut r = Residual::new();
    match &c.phi_basis {
        Some(basis) => {
            r.push(basis.frame.orthonormality_residual(g), 0.0);
            let probes = p.coordinate_probes();
            for v in &probes {
                r.push_vec(&basis.frame.reconstruct(&basis.frame.expand(g, v)), v);
            }
            out.residual("frame.phi_basis", &r, probes.len());

            let f = basis.vectors();
            let pairing = DMatrix::from_fn(f.len(), f.len(), |a, b| {
                f[a].dot(&(&c.ops.phi_form * &f[b])) + c.eta.dot(&f[a]) * c.eta.dot(&f[b])
            });
            let mut r = Residual::new();
            r.push(pairing.determinant().abs(), 1.0);
            out.residual("form.volume", &r, f.len());
        }
        None => {
            r.poison();
            out.residual("frame.phi_basis", &r, 0);
            out.residual("form.volume", &r, 0);
        }
    }

    let mut r = Residual::new();
    r.push_mat(&c.ops.d_eta, &c.ops.phi_form);
    out.residual("pred.contact", &r, 0);
}

fn identities(p: &PointEvaluation, c: &ContactPoint, out: &mut Measurements) {
    let g = p.g();
    let eps = c.epsilon;
    let n = p.n as f64;
    let ops = &c.ops;
    let probes = identity_probes(p);
    let np = probes.len();
    let phi = &c.phi;
    let h = &ops.h;
    let h2 = h * h;
    let rxi = |x: &DVector<f64>| p.curvature.apply(&c.xi, x, &c.xi);

    let mut nabla_xi = Residual::new();
    let mut nabla_xi_h = Residual::new();
    let mut curvature_sum = Residual::new();
    let mut xi_phi_sum = Residual::new();
    let mut h_curvature = Residual::new();
    let mut ell_formula = Residual::new();
    let mut ell_cubic = Residual::new();
    let mut nabla_ell_xi = Residual::new();
    let mut nabla_ell_zero = Residual::new();
    let h3 = &h2 * h;
    for x in &probes {
        let px = phi * x;
        nabla_xi.push_vec(&(&ops.nabla_xi * x), &(-(&px * eps) - phi * (h * x)));
        let r_x = rxi(x);
        nabla_xi_h.push_vec(&(&ops.nabla_xi_h * x), &(&px - &h2 * &px + phi * &r_x));
        let lhs = &r_x - phi * rxi(&px);
        curvature_sum.push_vec(&lhs, &((&h2 * x + phi * &px) * 2.0));
        xi_phi_sum.push_vec(&lhs, &((phi * &px) * 2.0));
        h_curvature.push_vec(&r_x, &(phi * &px - (h * x) * eps));
        ell_formula.push_vec(&(&ops.ell * x), &(-(&h2 * x) + x - &c.xi * c.eta.dot(x)));
        ell_cubic.push_zero_vec(&((&h2 * &px) * eps - &h3 * &px - &px * eps + h * &px));
        let nl = derivative_along(&c.nabla_ell, x);
        nabla_ell_xi.push_vec(&(&nl * &c.xi), &(-(&ops.ell * (&ops.nabla_xi * x))));
        nabla_ell_zero.push_zero_mat(&nl);
    }
    out.residual("identity.nabla_xi", &nabla_xi, np);
    out.residual("identity.nabla_xi_h", &nabla_xi_h, np);
    out.residual("identity.xi_curvature_sum", &curvature_sum, np);
    out.residual("codazzi.xi_curvature_phi", &xi_phi_sum, np);
    out.residual("codazzi.h_curvature", &h_curvature, np);
    out.residual("sectional.ell_formula", &ell_formula, np);
    out.residual("sectional.ell_h_cubic", &ell_cubic, np);
    out.residual("operator.nabla_ell_xi", &nabla_ell_xi, np);
    out.residual("pred.nabla_ell", &nabla_ell_zero, np);

    let mut r = Residual::new();
    r.push_mat(&ops.lie_g, &((h * phi).transpose() * g * 2.0));
    out.residual("identity.lie_g", &r, 0);

    let mut r = Residual::new();
    match &c.phi_basis {
        Some(basis) => {
            let mut trace = DVector::zeros(p.dim());
            for (f, s) in basis.vectors().iter().zip(basis.signs()) {
                trace += apply_derivative(&c.nabla_phi, f, f) * *s;
            }
            r.push_vec(&trace, &(&c.xi * (2.0 * n)));
        }
        None => r.poison(),
    }
    out.residual("identity.trace_nabla_phi", &r, p.dim());

    let mut r = Residual::new();
    r.push_mat(&c.nabla_eta, &((g * &ops.nabla_xi) * eps));
    out.residual("identity.nabla_eta", &r, 0);

    let mut r = Residual::new();
    r.push_zero_vec(&(&ops.nabla_xi * &c.xi));
    out.residual("pred.xi_geodesic", &r, 0);

    let mut r = Residual::new();
    r.push_zero_vec(&(&ops.lie_phi * &c.xi));
    out.residual("lie.phi_xi", &r, 0);
    let mut r = Residual::new();
    r.push_mat(&ops.lie_g, &ops.lie_g.transpose());
    out.residual("lie.g_symmetric", &r, 0);

    // Pairwise identities.
    let mut sasakian = Residual::new();
    let mut curvature_xi = Residual::new();
    let mut tau_curvature = Residual::new();
    let mut tau_curvature_xi = Residual::new();
    let mut structure = Residual::new();
    for x in &probes {
        let nphi_x = derivative_along(&c.nabla_phi, x);
        let rx_xi = |y: &DVector<f64>| p.curvature.apply(x, y, &c.xi);
        let hx = h * x;
        let x_h = x + &hx * eps;
        for y in &probes {
            let gxy = p.inner(x, y);
            let eta_y = c.eta.dot(y);
            let nphi_xy = &nphi_x * y;
            sasakian.push_vec(&nphi_xy, &(&c.xi * gxy - x * (eps * eta_y)));
            curvature_xi.push_vec(&rx_xi(y), &(x * eta_y - y * c.eta.dot(x)));
            tau_curvature.push_vec(&p.curvature.apply(&c.xi, x, y), &(&nphi_xy * eps));
            let nphi_yx = apply_derivative(&c.nabla_phi, y, x);
            tau_curvature_xi.push_vec(&rx_xi(y), &((nphi_yx - &nphi_xy) * eps));
            structure.push_vec(&nphi_xy, &(&c.xi * p.inner(&x_h, y) - &x_h * (eps * eta_y)));
        }
    }
    let pairs = np * np;
    out.residual("pred.sasakian", &sasakian, pairs);
    out.residual("pred.curvature_xi", &curvature_xi, pairs);
    out.residual("pred.tau_curvature", &tau_curvature, pairs);
    out.residual("codazzi.tau_curvature_xi", &tau_curvature_xi, pairs);
    out.residual("cr.structure_derivative", &structure, pairs);

    let mut r = Residual::new();
    r.push_vec(&(&p.curvature.ricci_operator * &c.xi), &(&c.xi * (2.0 * eps * n)));
    out.residual("codazzi.ricci_xi", &r, 0);
}

fn operators(p: &PointEvaluation, c: &ContactPoint, out: &mut Measurements) {
    let g = p.g();
    let ops = &c.ops;
    let h = &ops.h;
    let phi = &c.phi;

    let mut r = Residual::new();
    r.push_mat(&(g * h), &(h.transpose() * g));
    out.residual("operator.h_self_adjoint", &r, 0);

    let mut r = Residual::new();
    r.push_zero_vec(&(h * &c.xi));
    out.residual("operator.h_xi", &r, 0);

    let mut r = Residual::new();
    r.push_zero_mat(&(phi * h + h * phi));
    out.residual("operator.h_anticommutes", &r, 0);

    let mut r = Residual::new();
    r.push(h.trace(), 0.0);
    r.push((phi * h).trace(), 0.0);
    out.residual("operator.h_trace", &r, 0);

    let mut r = Residual::new();
    r.push_zero_vec(&(h.transpose() * &c.eta));
    out.residual("operator.eta_h", &r, 0);

    let mut r = Residual::new();
    r.push_mat(&(g * &ops.tau), &(ops.tau.transpose() * g));
    out.residual("operator.tau_self_adjoint", &r, 0);

    let mut r = Residual::new();
    r.push_mat(&ops.tau, &((h * phi) * 2.0));
    out.residual("operator.tau_2h_phi", &r, 0);

    let mut r = Residual::new();
    r.push_zero_vec(&(&ops.ell * &c.xi));
    out.residual("operator.ell_xi", &r, 0);

    let mut r = Residual::new();
    r.push_zero_mat(h);
    out.residual("pred.h_zero", &r, 0);

    let mut r = Residual::new();
    r.push_zero_mat(&(h * h));
    out.residual("pred.h_squared", &r, 0);

    let mut r = Residual::new();
    r.push_zero_mat(&ops.nabla_xi_h);
    out.residual("pred.nabla_xi_h", &r, 0);
}

fn codazzi(p: &PointEvaluation, c: &ContactPoint, out: &mut Measurements) {
    let probes = identity_probes(p);
    let pairs = probes.len() * probes.len();
    let mut antisymmetry = Residual::new();
    for (table, id) in [(&c.nabla_h, "pred.h_codazzi"), (&c.nabla_tau, "pred.tau_codazzi")] {
        let mut r = Residual::new();
        for x in &probes {
            for y in &probes {
                r.push_vec(&apply_derivative(table, x, y), &apply_derivative(table, y, x));
                antisymmetry.push_vec(&codazzi_defect(table, x, y), &(-codazzi_defect(table, y, x)));
            }
        }
        out.residual(id, &r, pairs);
    }
    out.residual("codazzi.antisymmetry", &antisymmetry, 2 * pairs);
}

/// Unit probes in `Ker η` with their signs, and the number of null
/// candidates skipped.
pub fn sectional_probes(p: &PointEvaluation) -> (Vec<(DVector<f64>, f64)>, usize) {
    let Some(c) = p.contact.as_ref() else {
        return (Vec::new(), 0);
    };
    let d = p.dim();
    let mut candidates: Vec<DVector<f64>> = Vec::new();
    if let Some(basis) = &c.phi_basis {
        for i in 0..basis.n {
            candidates.push(basis.e(i).clone());
            candidates.push(basis.phi_e(i).clone());
        }
    }
    let project = |v: DVector<f64>| {
        let eta_v = c.eta.dot(&v);
        v - &c.xi * eta_v
    };
    for k in 0..d {
        candidates.push(project(unit_vector(d, k)));
    }
    for k in 0..d.saturating_sub(1) {
        candidates.push(project(unit_vector(d, k) + unit_vector(d, k + 1)));
    }
    let mut probes = Vec::new();
    let mut nulls = 0;
    for v in candidates {
        if v.amax() < 1e-12 {
            continue;
        }
        let q = p.inner(&v, &v);
        if q.abs() < PIVOT_THRESHOLD {
            nulls += 1;
            continue;
        }
        probes.push((v / q.abs().sqrt(), q.signum()));
    }
    (probes, nulls)
}

fn sectional_curvatures(p: &PointEvaluation, c: &ContactPoint, out: &mut Measurements) {
    let (probes, nulls) = sectional_probes(p);
    let eps = c.epsilon;
    let h = &c.ops.h;
    let h2 = h * h;
    let h3 = &h2 * h;
    let nh = &c.ops.nabla_xi_h;

    let mut formula = Residual::new();
    let mut phi_formula = Residual::new();
    let mut sum = Residual::new();
    let mut sign = Residual::new();
    let mut phi_symmetry = Residual::new();
    let mut cubic_x = Residual::new();
    let mut cubic_phi_x = Residual::new();
    let mut h2_unit = Residual::new();
    let mut eq_eps = Residual::new();
    let mut eq_zero = Residual::new();
    for (x, ex) in &probes {
        let k = sectional(p, c, x, *ex);
        let px = &c.phi * x;
        let epx = p.inner(&px, &px).signum();
        let k_phi = sectional(p, c, &px, epx);
        let gx = |a: &DVector<f64>| p.inner(a, x);
        let h2xx = gx(&(&h2 * x));
        let nh_term = p.inner(&(nh * x), &px);

        formula.push(k, eps * (1.0 - ex * h2xx - ex * nh_term));
        phi_formula.push(k, k_phi - 2.0 * eps * ex * nh_term);
        sum.push(k + k_phi, 2.0 * eps * (1.0 - ex * h2xx));
        sign.push(k, sectional(p, c, &(-x), *ex));
        phi_symmetry.push(k, k_phi);
        let (hxx, h3xx, xx) = (gx(&(h * x)), gx(&(&h3 * x)), gx(x));
        cubic_x.push(eps * h2xx + h3xx - eps * xx - hxx, 0.0);
        cubic_phi_x.push(-eps * h2xx + h3xx + eps * xx - hxx, 0.0);
        h2_unit.push(h2xx, *ex);
        eq_eps.push(k, eps);
        eq_zero.push(k, 0.0);
    }
    let np = probes.len();
    let mut put = |id: &'static str, r: &Residual| {
        out.insert(id, Measure::from_residual(r, np).with_nulls(nulls));
    };
    put("sectional.k_formula", &formula);
    put("sectional.k_phi_formula", &phi_formula);
    put("sectional.k_sum", &sum);
    put("sectional.sign_invariance", &sign);
    put("sectional.phi_symmetry", &phi_symmetry);
    put("sectional.h_cubic_x", &cubic_x);
    put("sectional.h_cubic_phi_x", &cubic_phi_x);
    put("sectional.h_squared_unit", &h2_unit);
    put("pred.xi_sectional_eps", &eq_eps);
    put("pred.xi_sectional_zero", &eq_zero);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codazzi_defect_matches_direct_difference_and_is_antisymmetric() {
        let d: Vec<DMatrix<f64>> = (0..3)
            .map(|k| DMatrix::from_fn(3, 3, |i, j| (i * 7 + j * 3 + k * 5) as f64 * 0.1 - 0.4))
            .collect();
        let x = DVector::from_vec(vec![0.3, -1.2, 0.7]);
        let y = DVector::from_vec(vec![1.1, 0.4, -0.5]);
        let direct = apply_derivative(&d, &x, &y) - apply_derivative(&d, &y, &x);
        let defect = codazzi_defect(&d, &x, &y);
        assert!((direct - &defect).amax() < 1e-14);
        assert_eq!(defect, -codazzi_defect(&d, &y, &x));
        assert_eq!(codazzi_defect(&d, &x, &x).amax(), 0.0);
    }
}
