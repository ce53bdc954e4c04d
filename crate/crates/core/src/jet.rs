//! Truncated multivariate jets.
//!
//! A [`Jet`] carries the value of a scalar function at a base point together
//! with every raw partial derivative `∂^α f` for `|α| ≤ order`, `order ≤ 3`.
//! Entries are stored densely in graded-lexicographic order of the
//! multi-indices, so the jet of order `k` is a prefix of the jet of order
//! `k + 1` and truncation is a slice.
//!
//! Arithmetic is exact up to floating-point rounding: products use the
//! multivariate Leibniz rule and unary functions are composed through their
//! univariate Taylor expansion, which on truncated polynomials is the
//! Faà di Bruno formula.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

/// Highest derivative order a jet can carry.
pub const MAX_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JetError {
    #[error("jet order {0} is outside 0..=3")]
    InvalidOrder(usize),
    #[error("coordinate index {index} out of range for {num_vars} variables")]
    IndexOutOfRange { index: usize, num_vars: usize },
    #[error("jets need at least one variable")]
    NoVariables,
    #[error("domain violation in {op}: argument value {value}")]
    Domain { op: &'static str, value: f64 },
    #[error("non-finite result in {op}")]
    NonFinite { op: &'static str },
}

/// Index tables shared by all jets with the same variable count and order.
pub struct JetLayout {
    num_vars: usize,
    order: usize,
    indices: Vec<Vec<u8>>,
    lookup: HashMap<Vec<u8>, usize>,
    // (lhs entry, rhs entry, Π C(α_i, β_i)) for every split α = β + γ
    products: Vec<Vec<(u32, u32, f64)>>,
    // shift[i][a] = entry of α_a + e_i, for entries a of the order-1 prefix
    shift: Vec<Vec<u32>>,
    lower: Vec<Arc<JetLayout>>,
}

impl fmt::Debug for JetLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetLayout")
            .field("num_vars", &self.num_vars)
            .field("order", &self.order)
            .field("len", &self.indices.len())
            .finish()
    }
}

fn multi_indices(num_vars: usize, degree: usize) -> Vec<Vec<u8>> {
    fn rec(pos: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left as u8;
            out.push(cur.clone());
            return;
        }
        for take in (0..=left).rev() {
            cur[pos] = take as u8;
            rec(pos + 1, left - take, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    let mut cur = vec![0u8; num_vars];
    rec(0, degree, &mut cur, &mut out);
    out
}

fn binomial(n: u8, k: u8) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * f64::from(n - i) / f64::from(i + 1);
    }
    r
}

impl JetLayout {
    fn build(num_vars: usize, order: usize, lower: Vec<Arc<JetLayout>>) -> JetLayout {
        let indices: Vec<Vec<u8>> = (0..=order)
            .flat_map(|d| multi_indices(num_vars, d))
            .collect();
        let lookup: HashMap<Vec<u8>, usize> = indices
            .iter()
            .enumerate()
            .map(|(k, a)| (a.clone(), k))
            .collect();
        let products = indices
            .iter()
            .map(|alpha| {
                let mut terms = Vec::new();
                for (b, beta) in indices.iter().enumerate() {
                    if beta.iter().zip(alpha).all(|(x, y)| x <= y) {
                        let gamma: Vec<u8> = alpha.iter().zip(beta).map(|(a, b)| a - b).collect();
                        let c: f64 = alpha
                            .iter()
                            .zip(beta)
                            .map(|(&a, &b)| binomial(a, b))
                            .product();
                        terms.push((b as u32, lookup[&gamma] as u32, c));
                    }
                }
                terms
            })
            .collect();
        let shift = if order == 0 {
            vec![Vec::new(); num_vars]
        } else {
            let below = lower[order - 1].indices.len();
            (0..num_vars)
                .map(|i| {
                    indices[..below]
                        .iter()
                        .map(|a| {
                            let mut b = a.clone();
                            b[i] += 1;
                            lookup[&b] as u32
                        })
                        .collect()
                })
                .collect()
        };
        JetLayout {
            num_vars,
            order,
            indices,
            lookup,
            products,
            shift,
            lower,
        }
    }

    /// Shared layout for `num_vars` variables at `order`.
    pub fn get(num_vars: usize, order: usize) -> Result<Arc<JetLayout>, JetError> {
        if order > MAX_ORDER {
            return Err(JetError::InvalidOrder(order));
        }
        if num_vars == 0 {
            return Err(JetError::NoVariables);
        }
        static CACHE: OnceLock<Mutex<HashMap<usize, Vec<Arc<JetLayout>>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        let chain = guard.entry(num_vars).or_insert_with(|| {
            let mut chain: Vec<Arc<JetLayout>> = Vec::with_capacity(MAX_ORDER + 1);
            for k in 0..=MAX_ORDER {
                let layout = JetLayout::build(num_vars, k, chain.clone());
                chain.push(Arc::new(layout));
            }
            chain
        });
        Ok(chain[order].clone())
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Multi-indices in storage order.
    pub fn indices(&self) -> &[Vec<u8>] {
        &self.indices
    }

    pub fn position(&self, alpha: &[u8]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    fn at_order(self: &Arc<Self>, order: usize) -> Arc<JetLayout> {
        if order == self.order {
            self.clone()
        } else {
            self.lower[order].clone()
        }
    }
}

/// Value and raw partial derivatives of a scalar function at a point.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<JetLayout>,
    data: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("num_vars", &self.layout.num_vars)
            .field("order", &self.layout.order)
            .field("partials", &self.data)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.layout.num_vars == other.layout.num_vars
            && self.layout.order == other.layout.order
            && self.data == other.data
    }
}

impl Jet {
    /// Constant function `c`: every partial of positive order is zero.
    pub fn constant(c: f64, num_vars: usize, order: usize) -> Result<Jet, JetError> {
        let layout = JetLayout::get(num_vars, order)?;
        Ok(Jet::constant_in(c, &layout))
    }

    /// Coordinate function `x_i` evaluated at `x`.
    pub fn variable(i: usize, x: f64, num_vars: usize, order: usize) -> Result<Jet, JetError> {
        if i >= num_vars {
            return Err(JetError::IndexOutOfRange { index: i, num_vars });
        }
        let layout = JetLayout::get(num_vars, order)?;
        let mut jet = Jet::constant_in(x, &layout);
        if order > 0 {
            jet.data[1 + i] = 1.0;
        }
        Ok(jet)
    }

    pub fn constant_in(c: f64, layout: &Arc<JetLayout>) -> Jet {
        let mut data = vec![0.0; layout.len()];
        data[0] = c;
        Jet {
            layout: layout.clone(),
            data,
        }
    }

    /// Builds a jet from raw partials in storage order.
    pub fn from_partials(layout: &Arc<JetLayout>, data: Vec<f64>) -> Jet {
        assert_eq!(data.len(), layout.len(), "partials length must match layout");
        Jet {
            layout: layout.clone(),
            data,
        }
    }

    /// A constant with the same variable count and order as `self`.
    pub fn constant_like(&self, c: f64) -> Jet {
        Jet::constant_in(c, &self.layout)
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    pub fn value(&self) -> f64 {
        self.data[0]
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn num_vars(&self) -> usize {
        self.layout.num_vars
    }

    /// Raw partials in storage order.
    pub fn partials(&self) -> &[f64] {
        &self.data
    }

    /// `∂^α f` for the multi-index `alpha`, if `|α| ≤ order`.
    pub fn partial(&self, alpha: &[u8]) -> Option<f64> {
        self.layout.position(alpha).map(|k| self.data[k])
    }

    /// First partial `∂f/∂x_i`; zero for order-0 jets.
    pub fn d(&self, i: usize) -> f64 {
        if self.layout.order == 0 {
            0.0
        } else {
            self.data[1 + i]
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Jet of `∂f/∂x_i`, one order lower.
    ///
    /// Panics on an order-0 jet.
    pub fn derivative(&self, i: usize) -> Jet {
        assert!(self.layout.order > 0, "order-0 jet has no derivative");
        let layout = self.layout.at_order(self.layout.order - 1);
        let data = self.layout.shift[i].iter().map(|&k| self.data[k as usize]).collect();
        Jet { layout, data }
    }

    /// Drops partials above `order` (no-op when `order ≥ self.order()`).
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.layout.order {
            return self.clone();
        }
        let layout = self.layout.at_order(order);
        let data = self.data[..layout.len()].to_vec();
        Jet { layout, data }
    }

    pub fn scale(&self, c: f64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add_scalar(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.data[0] += c;
        out
    }

    /// `self += a * b`, truncated to the lowest order involved.
    pub fn add_product(&mut self, a: &Jet, b: &Jet) {
        let order = self.order().min(a.order()).min(b.order());
        if order < self.order() {
            *self = self.truncate(order);
        }
        for (k, terms) in self.layout.products[..self.data.len()].iter().enumerate() {
            let mut acc = 0.0;
            for &(l, r, c) in terms {
                acc += c * a.data[l as usize] * b.data[r as usize];
            }
            self.data[k] += acc;
        }
    }

    /// `self -= a * b`, truncated to the lowest order involved.
    pub fn sub_product(&mut self, a: &Jet, b: &Jet) {
        let order = self.order().min(a.order()).min(b.order());
        if order < self.order() {
            *self = self.truncate(order);
        }
        for (k, terms) in self.layout.products[..self.data.len()].iter().enumerate() {
            let mut acc = 0.0;
            for &(l, r, c) in terms {
                acc += c * a.data[l as usize] * b.data[r as usize];
            }
            self.data[k] -= acc;
        }
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        debug_assert_eq!(self.num_vars(), other.num_vars(), "jet variable counts differ");
        let order = self.order().min(other.order());
        let layout = self.layout.at_order(order);
        let data = self.data[..layout.len()]
            .iter()
            .zip(&other.data[..layout.len()])
            .map(|(a, b)| f(*a, *b))
            .collect();
        Jet { layout, data }
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        debug_assert_eq!(self.num_vars(), other.num_vars(), "jet variable counts differ");
        let order = self.order().min(other.order());
        let layout = self.layout.at_order(order);
        let table = if self.order() >= other.order() {
            &self.layout.products
        } else {
            &other.layout.products
        };
        let data = table[..layout.len()]
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|&(l, r, c)| c * self.data[l as usize] * other.data[r as usize])
                    .sum()
            })
            .collect();
        Jet { layout, data }
    }

    /// Composes a univariate function with this jet given the function's
    /// derivatives `derivs[k] = f^(k)(value)`.
    fn compose(&self, derivs: [f64; MAX_ORDER + 1], op: &'static str) -> Result<Jet, JetError> {
        let order = self.order();
        let mut delta = self.clone();
        delta.data[0] = 0.0;
        let mut out = self.constant_like(derivs[0]);
        let mut power = delta.clone();
        let mut factorial = 1.0;
        for (k, dk) in derivs.iter().enumerate().take(order + 1).skip(1) {
            factorial *= k as f64;
            let c = dk / factorial;
            for (o, p) in out.data.iter_mut().zip(&power.data) {
                *o += c * p;
            }
            if k < order {
                power = power.mul_jet(&delta);
            }
        }
        out.finite_or(op)
    }

    fn finite_or(self, op: &'static str) -> Result<Jet, JetError> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(JetError::NonFinite { op })
        }
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        let u = self.value();
        if u == 0.0 || !u.is_finite() {
            return Err(JetError::Domain { op: "div", value: u });
        }
        let r = 1.0 / u;
        self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r], "div")
    }

    pub fn div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.mul_jet(&other.recip()?).finite_or("div")
    }

    /// Integer power; `0^0` is the constant 1.
    pub fn pow_int(&self, n: i32) -> Result<Jet, JetError> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = self.constant_like(1.0);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_jet(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul_jet(&sq);
            }
        }
        acc.finite_or("pow")
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        let u = self.value();
        if u.is_nan() || u <= 0.0 {
            return Err(JetError::Domain { op: "sqrt", value: u });
        }
        let s = u.sqrt();
        let s3 = s * u;
        let s5 = s3 * u;
        self.compose([s, 0.5 / s, -0.25 / s3, 0.375 / s5], "sqrt")
    }

    pub fn exp(&self) -> Result<Jet, JetError> {
        let e = self.value().exp();
        self.compose([e; 4], "exp")
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        let u = self.value();
        if u.is_nan() || u <= 0.0 {
            return Err(JetError::Domain { op: "ln", value: u });
        }
        let r = 1.0 / u;
        self.compose([u.ln(), r, -r * r, 2.0 * r * r * r], "ln")
    }

    pub fn sin(&self) -> Result<Jet, JetError> {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c], "sin")
    }

    pub fn cos(&self) -> Result<Jet, JetError> {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s], "cos")
    }

    pub fn tan(&self) -> Result<Jet, JetError> {
        let u = self.value();
        if u.cos() == 0.0 {
            return Err(JetError::Domain { op: "tan", value: u });
        }
        let t = u.tan();
        let sec2 = 1.0 + t * t;
        self.compose(
            [t, sec2, 2.0 * t * sec2, 2.0 * sec2 * (1.0 + 3.0 * t * t)],
            "tan",
        )
    }

    pub fn sinh(&self) -> Result<Jet, JetError> {
        let u = self.value();
        let (s, c) = (u.sinh(), u.cosh());
        self.compose([s, c, s, c], "sinh")
    }

    pub fn cosh(&self) -> Result<Jet, JetError> {
        let u = self.value();
        let (s, c) = (u.sinh(), u.cosh());
        self.compose([c, s, c, s], "cosh")
    }
}

impl Add<&Jet> for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub<&Jet> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_jet(rhs)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        if rhs.order() < self.order() {
            *self = self.truncate(rhs.order());
        }
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        if rhs.order() < self.order() {
            *self = self.truncate(rhs.order());
        }
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}
