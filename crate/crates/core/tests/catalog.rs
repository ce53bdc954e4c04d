use pseudocontact_core::catalog::{self, entry_flat_contact_r3, entry_flat_pseudo_euclidean, entry_standard_sasakian};
use pseudocontact_core::contact::xi_sectional;
use pseudocontact_core::specfile::{emit, parse_spec};
use pseudocontact_core::verify::{verify, CheckOptions, Status};

fn run(spec: &pseudocontact_core::StructureSpec) -> pseudocontact_core::Verification {
    verify(spec, &CheckOptions::default()).unwrap()
}

#[test]
fn every_entry_passes_its_self_test() {
    for e in catalog::all().unwrap() {
        catalog::self_test(&e).unwrap_or_else(|err| panic!("{err}"));
    }
}

#[test]
fn emitted_entries_reproduce_identical_records() {
    for e in catalog::all().unwrap() {
        let back = parse_spec(&emit(&e.spec)).unwrap();
        assert_eq!(back, e.spec, "{}", e.name);
        assert_eq!(run(&back).records, run(&e.spec).records, "{}", e.name);
    }
}

#[test]
fn standard_entries_are_sasakian_with_xi_sectional_curvature_epsilon() {
    for (n, eps, s) in [(1, 1, 0), (1, -1, 0), (2, 1, 1), (2, -1, 0)] {
        let e = entry_standard_sasakian(n, eps, s).unwrap();
        let v = run(&e.spec);
        for id in ["pred.contact", "pred.h_zero", "pred.xi_sectional_eps"] {
            assert!(v.max_residual(id).unwrap() < 1e-9, "{} {id}", e.name);
        }
        assert!(v.max_residual("pred.curvature_xi").unwrap() < 1e-8);
        assert!(v.max_residual("pred.sasakian").unwrap() < 1e-8);
        assert!(v.max_residual("codazzi.ricci_xi").unwrap() < 1e-7);
        assert!(v.max_residual("operator.tau_2h_phi").unwrap() < 1e-9);
        assert!(v.max_residual("sectional.ell_formula").unwrap() < 1e-8);

        let p = e.spec.evaluate(&[0.3; 5][..e.spec.dim()]).unwrap();
        let basis = p.contact.as_ref().unwrap().phi_basis.clone().unwrap();
        for i in 0..n {
            for x in [basis.e(i), basis.phi_e(i)] {
                let k = xi_sectional(&p, x, 1e-9).unwrap();
                assert!((k - f64::from(eps)).abs() < 1e-8, "{} K = {k}", e.name);
            }
        }
    }
}

#[test]
fn flat_contact_r3_has_vanishing_xi_sectional_curvature() {
    let e = entry_flat_contact_r3().unwrap();
    let v = run(&e.spec);
    assert!(v.max_residual("pred.h_zero").unwrap() > 0.1);
    assert!(v.max_residual("pred.h_codazzi").unwrap() > 0.1);
    assert!(v.max_residual("pred.nabla_xi_h").unwrap() < 1e-10);
    assert!(v.max_residual("pred.xi_sectional_zero").unwrap() < 1e-8);
    assert!(v.max_residual("sectional.h_squared_unit").unwrap() < 1e-8);
    let p = e.spec.evaluate(&[0.1, -0.5, 0.8]).unwrap();
    let e1 = p.contact.as_ref().unwrap().phi_basis.as_ref().unwrap().e(0).clone();
    assert!(xi_sectional(&p, &e1, 1e-9).unwrap().abs() < 1e-8);
    let flags = v.classification.flags().map(|(_, f)| f.truth().is_true());
    assert_eq!(flags, [true, true, true, false, false]);
}

#[test]
fn xi_sectional_refuses_inadmissible_probes() {
    let e = entry_standard_sasakian(1, 1, 0).unwrap();
    let p = e.spec.evaluate(&[0.0; 3]).unwrap();
    let c = p.contact.as_ref().unwrap();
    assert!(xi_sectional(&p, &c.xi, 1e-9).is_err());
    let e1 = c.phi_basis.as_ref().unwrap().e(0) * 2.0;
    assert!(xi_sectional(&p, &e1, 1e-9).is_err());
}

#[test]
fn flat_entries_have_zero_connection_and_curvature() {
    for (p, q) in [(3, 0), (2, 1)] {
        let e = entry_flat_pseudo_euclidean(p, q).unwrap();
        for pt in pseudocontact_core::chart::sample_points(&e.spec.chart, 1, 8, &[]) {
            let eval = e.spec.evaluate(&pt).unwrap();
            assert_eq!(eval.christoffel.max_abs(), 0.0);
            assert!(eval.curvature.max_abs() < 1e-12);
        }
        let v = run(&e.spec);
        assert!(v.records.iter().all(|r| matches!(r.status, Status::Pass | Status::Skipped)));
    }
    assert!(entry_flat_pseudo_euclidean(2, 2).is_err());
}

#[test]
fn non_contact_entry_fails_the_proposition_conditions_jointly() {
    let e = catalog::entry("non_contact_rotated_phi_n2").unwrap();
    let v = run(&e.spec);
    for name in ["levi_hermitian", "levi_symmetric", "bracket_in_h", "alpha_symmetric"] {
        assert!(!v.predicate(name).is_true(), "{name}");
        assert!(v.max_residual(&format!("pred.{name}")).unwrap() > 1e-3, "{name}");
    }
    assert!(v.max_residual("pred.webster").unwrap() > 0.01);
    assert_eq!(v.record("cr.proposition_equivalence").unwrap().status, Status::Pass);
}
