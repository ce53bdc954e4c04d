#![allow(dead_code)]

use proptest::prelude::*;
use pseudocontact_core::expr::{BinaryOp, Func};
use pseudocontact_core::Expr;

pub const NAMES: [&str; 3] = ["x", "y", "z"];

pub fn names() -> Vec<String> {
    NAMES.iter().map(|s| s.to_string()).collect()
}

pub fn coord(i: usize) -> Expr {
    Expr::Coordinate {
        index: i,
        name: NAMES[i].to_string(),
    }
}

pub fn c(v: f64) -> Expr {
    Expr::Constant(v)
}

pub fn bin(op: BinaryOp, a: Expr, b: Expr) -> Expr {
    Expr::Binary {
        op,
        lhs: Box::new(a),
        rhs: Box::new(b),
    }
}

pub fn call(func: Func, a: Expr) -> Expr {
    Expr::Call { func, arg: Box::new(a) }
}

pub fn pow(a: Expr, exponent: i32) -> Expr {
    Expr::Pow {
        base: Box::new(a),
        exponent,
    }
}

/// `1 + a²`, positive everywhere.
pub fn one_plus_square(a: Expr) -> Expr {
    bin(BinaryOp::Add, c(1.0), pow(a, 2))
}

/// Smooth expressions in three variables that are defined on all of `R^3`.
pub fn smooth_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0..3usize).prop_map(coord),
        (0.0..2.0f64).prop_map(c),
        (-2.0..-0.1f64).prop_map(|v| Expr::Neg(Box::new(c(-v)))),
    ];
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| bin(BinaryOp::Add, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| bin(BinaryOp::Sub, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| bin(BinaryOp::Mul, a, b)),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| bin(BinaryOp::Div, a, bin(BinaryOp::Add, c(2.0), call(Func::Cos, b)))),
            inner.clone().prop_map(|a| call(Func::Sin, a)),
            inner.clone().prop_map(|a| call(Func::Cos, a)),
            inner.clone().prop_map(|a| call(Func::Exp, call(Func::Sin, a))),
            inner.clone().prop_map(|a| call(Func::Ln, one_plus_square(a))),
            inner.clone().prop_map(|a| call(Func::Sqrt, one_plus_square(a))),
            inner.clone().prop_map(|a| call(Func::Sinh, call(Func::Cos, a))),
            (inner, 2..4i32).prop_map(|(a, n)| pow(a, n)),
        ]
    })
}

/// Any expression the parser can produce over three variables.
pub fn any_expr() -> impl Strategy<Value = Expr> {
    let constant = prop_oneof![
        (0u32..1000).prop_map(|v| c(f64::from(v))),
        (0.0..1e3f64).prop_map(c),
        (-30i32..30).prop_map(|e| c(10f64.powi(e) * 1.25)),
    ];
    let leaf = prop_oneof![(0..3usize).prop_map(coord), constant];
    leaf.prop_recursive(6, 64, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), 0..4usize).prop_map(|(a, b, k)| {
                let op = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div][k];
                bin(op, a, b)
            }),
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (inner.clone(), 0..Func::ALL.len()).prop_map(|(a, k)| call(Func::ALL[k], a)),
            (inner, -4..5i32).prop_map(|(a, n)| pow(a, n)),
        ]
    })
}
