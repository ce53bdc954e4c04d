mod common;

use common::{call, names, one_plus_square, smooth_expr};
use proptest::prelude::*;
use pseudocontact_core::expr::Func;
use pseudocontact_core::jet::{JetLayout, MAX_ORDER};
use pseudocontact_core::{Expr, Jet};

fn jet_strategy() -> impl Strategy<Value = Jet> {
    let layout = JetLayout::get(2, MAX_ORDER).unwrap();
    prop::collection::vec(-3.0..3.0f64, layout.len()).prop_map(move |data| Jet::from_partials(&layout, data))
}

fn close(a: &Jet, b: &Jet, tol: f64) -> bool {
    a.partials()
        .iter()
        .zip(b.partials())
        .all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

/// Central difference of order `alpha` with a tensor-product stencil.
fn finite_difference(e: &Expr, point: &[f64], alpha: &[u8], h: f64) -> f64 {
    let stencil = |k: u8| -> Vec<(f64, f64)> {
        match k {
            0 => vec![(0.0, 1.0)],
            1 => vec![(h, 0.5 / h), (-h, -0.5 / h)],
            2 => vec![(h, 1.0 / (h * h)), (0.0, -2.0 / (h * h)), (-h, 1.0 / (h * h))],
            _ => {
                let s = 0.5 / (h * h * h);
                vec![(2.0 * h, s), (h, -2.0 * s), (-h, 2.0 * s), (-2.0 * h, -s)]
            }
        }
    };
    let stencils: Vec<Vec<(f64, f64)>> = alpha.iter().map(|&k| stencil(k)).collect();
    let mut total = 0.0;
    let mut idx = vec![0usize; alpha.len()];
    loop {
        let mut p = point.to_vec();
        let mut w = 1.0;
        for (i, s) in stencils.iter().enumerate() {
            p[i] += s[idx[i]].0;
            w *= s[idx[i]].1;
        }
        total += w * e.eval(&p).unwrap();
        let mut i = 0;
        loop {
            if i == idx.len() {
                return total;
            }
            idx[i] += 1;
            if idx[i] < stencils[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

const STEPS: [f64; 4] = [0.0, 1e-5, 1e-4, 1e-3];
const BOUNDS: [f64; 4] = [1e-12, 1e-6, 1e-4, 5e-3];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jets_form_a_commutative_ring(a in jet_strategy(), b in jet_strategy(), c in jet_strategy()) {
        prop_assert!(close(&(&(&a + &b) + &c), &(&a + &(&b + &c)), 1e-12));
        prop_assert!(close(&(&a + &b), &(&b + &a), 0.0));
        prop_assert!(close(&(&a * &b), &(&b * &a), 1e-12));
        prop_assert!(close(&(&(&a * &b) * &c), &(&a * &(&b * &c)), 1e-10));
        prop_assert!(close(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c)), 1e-10));
        prop_assert!(close(&(&a * &a.constant_like(1.0)), &a, 0.0));
        prop_assert!(close(&(&a + &a.constant_like(0.0)), &a, 0.0));
        prop_assert!(close(&(&a - &a), &a.constant_like(0.0), 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn jet_partials_match_finite_differences(
        e in smooth_expr(),
        p in prop::array::uniform3(-1.0..1.0f64),
    ) {
        let jet = e.eval_jet(&p, MAX_ORDER).unwrap();
        for (k, alpha) in jet.layout().indices().iter().enumerate() {
            let order: u8 = alpha.iter().sum();
            if order == 0 {
                continue;
            }
            let fd = finite_difference(&e, &p, alpha, STEPS[order as usize]);
            let exact = jet.partials()[k];
            let err = (exact - fd).abs() / fd.abs().max(1.0);
            prop_assert!(err < BOUNDS[order as usize], "{e} at {p:?}, ∂^{alpha:?}: jet {exact}, fd {fd}");
        }
    }

    #[test]
    fn chain_rule_for_sine(e in smooth_expr(), p in prop::array::uniform3(-1.0..1.0f64)) {
        let u = e.eval_jet(&p, 2).unwrap();
        let f = call(Func::Sin, e.clone()).eval_jet(&p, 2).unwrap();
        let (s, co) = (u.value().sin(), u.value().cos());
        for i in 0..3 {
            prop_assert!((f.d(i) - co * u.d(i)).abs() < 1e-9 * (1.0 + u.d(i).abs()));
            for j in 0..3 {
                let mut alpha = [0u8; 3];
                alpha[i] += 1;
                alpha[j] += 1;
                let want = -s * u.d(i) * u.d(j) + co * u.partial(&alpha).unwrap();
                let got = f.partial(&alpha).unwrap();
                prop_assert!((got - want).abs() < 1e-9 * (1.0 + want.abs()));
            }
        }
    }

    #[test]
    fn exp_inverts_ln(e in smooth_expr(), p in prop::array::uniform3(-1.0..1.0f64)) {
        let positive = one_plus_square(e);
        let f = positive.eval_jet(&p, MAX_ORDER).unwrap();
        let g = call(Func::Exp, call(Func::Ln, positive)).eval_jet(&p, MAX_ORDER).unwrap();
        prop_assert!(close(&f, &g, 1e-9));
    }
}

#[test]
fn finite_difference_oracle_is_sound() {
    let e = pseudocontact_core::parse("x^3*y + sin(z)", &names()).unwrap();
    let p = [0.3, -0.2, 0.7];
    assert!((finite_difference(&e, &p, &[3, 0, 0], 1e-3) - 6.0 * -0.2).abs() < 1e-5);
    assert!((finite_difference(&e, &p, &[2, 1, 0], 1e-3) - 6.0 * 0.3).abs() < 1e-5);
    assert!((finite_difference(&e, &p, &[0, 0, 3], 1e-3) + 0.7f64.cos()).abs() < 1e-5);
}
