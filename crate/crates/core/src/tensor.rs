//! Jet-valued tensor fields at a point: vectors, covectors and (1,1)
//! endomorphisms whose components carry partial derivatives.

use nalgebra::{DMatrix, DVector};

use crate::jet::Jet;

/// Components `X^i` of a vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField(pub Vec<Jet>);

/// Components `w_i` of a 1-form.
#[derive(Debug, Clone, PartialEq)]
pub struct CovectorField(pub Vec<Jet>);

/// Components `A^i_j` of a (1,1) tensor field, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EndoField {
    dim: usize,
    entries: Vec<Jet>,
}

/// Symmetric-or-not (0,2) tensor `B_ij`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearField {
    dim: usize,
    entries: Vec<Jet>,
}

pub(crate) fn sum_products<'a>(pairs: impl Iterator<Item = (&'a Jet, &'a Jet)>, proto: &Jet) -> Jet {
    let mut acc = proto.constant_like(0.0);
    for (a, b) in pairs {
        acc.add_product(a, b);
    }
    acc
}

impl VectorField {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> usize {
        self.0.iter().map(Jet::order).min().unwrap_or(0)
    }

    /// Constant-coefficient field with components `v`.
    pub fn constant(v: &DVector<f64>, proto: &Jet) -> VectorField {
        VectorField(v.iter().map(|&c| proto.constant_like(c)).collect())
    }

    /// Coordinate field `∂_k`.
    pub fn coordinate(k: usize, dim: usize, proto: &Jet) -> VectorField {
        VectorField((0..dim).map(|i| proto.constant_like(if i == k { 1.0 } else { 0.0 })).collect())
    }

    pub fn value(&self) -> DVector<f64> {
        DVector::from_iterator(self.0.len(), self.0.iter().map(Jet::value))
    }

    /// Directional derivative of each component along `dir`.
    pub fn derivative_along(&self, dir: &VectorField) -> VectorField {
        VectorField(
            self.0
                .iter()
                .map(|c| {
                    let mut acc = c.derivative(0).truncate(dir.order()).constant_like(0.0);
                    for (i, d) in dir.0.iter().enumerate() {
                        acc.add_product(d, &c.derivative(i));
                    }
                    acc
                })
                .collect(),
        )
    }

    pub fn scale(&self, c: f64) -> VectorField {
        VectorField(self.0.iter().map(|j| j.scale(c)).collect())
    }

    pub fn scale_by(&self, f: &Jet) -> VectorField {
        VectorField(self.0.iter().map(|j| j * f).collect())
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn truncate(&self, order: usize) -> VectorField {
        VectorField(self.0.iter().map(|j| j.truncate(order)).collect())
    }
}

/// `[X, Y]^k = X^i ∂_i Y^k − Y^i ∂_i X^k`, one jet order lower than the inputs.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> VectorField {
    y.derivative_along(x).sub(&x.derivative_along(y))
}

impl CovectorField {
    pub fn value(&self) -> DVector<f64> {
        DVector::from_iterator(self.0.len(), self.0.iter().map(Jet::value))
    }

    /// `w(X)` as a jet.
    pub fn apply(&self, x: &VectorField) -> Jet {
        sum_products(self.0.iter().zip(&x.0), &self.0[0].truncate(x.order()))
    }
}

impl EndoField {
    pub fn new(dim: usize, entries: Vec<Jet>) -> EndoField {
        assert_eq!(entries.len(), dim * dim);
        EndoField { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet {
        &self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[Jet] {
        &self.entries
    }

    pub fn value(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j).value())
    }

    /// Matrix of `∂_k A^i_j`.
    pub fn partial(&self, k: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j).d(k))
    }

    pub fn apply(&self, x: &VectorField) -> VectorField {
        VectorField(
            (0..self.dim)
                .map(|i| {
                    let row = &self.entries[i * self.dim..(i + 1) * self.dim];
                    sum_products(row.iter().zip(&x.0), &row[0].truncate(x.order()))
                })
                .collect(),
        )
    }

    pub fn compose(&self, other: &EndoField) -> EndoField {
        let n = self.dim;
        let entries = (0..n * n)
            .map(|ij| {
                let (i, j) = (ij / n, ij % n);
                let proto = self.get(i, 0).truncate(other.get(0, j).order());
                sum_products((0..n).map(|k| (self.get(i, k), other.get(k, j))), &proto)
            })
            .collect();
        EndoField { dim: n, entries }
    }

    pub fn scale(&self, c: f64) -> EndoField {
        EndoField {
            dim: self.dim,
            entries: self.entries.iter().map(|j| j.scale(c)).collect(),
        }
    }

    pub fn truncate(&self, order: usize) -> EndoField {
        EndoField {
            dim: self.dim,
            entries: self.entries.iter().map(|j| j.truncate(order)).collect(),
        }
    }

    /// Builds the endomorphism whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[VectorField]) -> EndoField {
        let n = columns.len();
        let entries = (0..n * n).map(|ij| columns[ij % n].0[ij / n].clone()).collect();
        EndoField { dim: n, entries }
    }
}

impl BilinearField {
    pub fn new(dim: usize, entries: Vec<Jet>) -> BilinearField {
        assert_eq!(entries.len(), dim * dim);
        BilinearField { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet {
        &self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[Jet] {
        &self.entries
    }

    pub fn value(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j).value())
    }

    /// `B(X, Y)` as a jet.
    pub fn apply(&self, x: &VectorField, y: &VectorField) -> Jet {
        let n = self.dim;
        let order = x.order().min(y.order()).min(self.entries[0].order());
        let mut acc = self.entries[0].truncate(order).constant_like(0.0);
        for i in 0..n {
            for j in 0..n {
                let xy = &x.0[i] * &y.0[j];
                acc.add_product(self.get(i, j), &xy);
            }
        }
        acc
    }

    /// Index-lowering map `X ↦ B(X, ·)` as a covector field.
    pub fn lower(&self, x: &VectorField) -> CovectorField {
        let n = self.dim;
        CovectorField(
            (0..n)
                .map(|j| {
                    let proto = self.get(0, j).truncate(x.order());
                    sum_products((0..n).map(|i| (&x.0[i], self.get(i, j))), &proto)
                })
                .collect(),
        )
    }

    pub fn truncate(&self, order: usize) -> BilinearField {
        BilinearField {
            dim: self.dim,
            entries: self.entries.iter().map(|j| j.truncate(order)).collect(),
        }
    }
}

/// Jet-valued tensor with `up` contravariant indices followed by `down`
/// covariant ones, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JetTensor {
    dim: usize,
    up: usize,
    down: usize,
    data: Vec<Jet>,
}

/// All index tuples of length `rank` over `0..dim`, in row-major order.
pub fn multi_indices(dim: usize, rank: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..dim.pow(rank as u32)).map(move |mut flat| {
        let mut idx = vec![0; rank];
        for slot in idx.iter_mut().rev() {
            *slot = flat % dim;
            flat /= dim;
        }
        idx
    })
}

impl JetTensor {
    pub fn from_fn(dim: usize, up: usize, down: usize, mut f: impl FnMut(&[usize]) -> Jet) -> JetTensor {
        let data = multi_indices(dim, up + down).map(|idx| f(&idx)).collect();
        JetTensor { dim, up, down, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn up(&self) -> usize {
        self.up
    }

    pub fn down(&self) -> usize {
        self.down
    }

    pub fn rank(&self) -> usize {
        self.up + self.down
    }

    pub fn order(&self) -> usize {
        self.data.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        debug_assert_eq!(idx.len(), self.rank());
        &self.data[idx.iter().fold(0, |acc, &i| acc * self.dim + i)]
    }

    pub fn data(&self) -> &[Jet] {
        &self.data
    }

    pub fn values(&self) -> Vec<f64> {
        self.data.iter().map(Jet::value).collect()
    }

    pub fn truncate(&self, order: usize) -> JetTensor {
        JetTensor {
            dim: self.dim,
            up: self.up,
            down: self.down,
            data: self.data.iter().map(|j| j.truncate(order)).collect(),
        }
    }

    /// Values of a rank-2 tensor as a matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.rank(), 2);
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(&[i, j]).value())
    }

    /// Values of a rank-3 tensor as one matrix per last index.
    pub fn matrices_by_last(&self) -> Vec<DMatrix<f64>> {
        assert_eq!(self.rank(), 3);
        (0..self.dim)
            .map(|k| DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(&[i, j, k]).value()))
            .collect()
    }
}

impl From<&EndoField> for JetTensor {
    fn from(a: &EndoField) -> JetTensor {
        JetTensor::from_fn(a.dim(), 1, 1, |idx| a.get(idx[0], idx[1]).clone())
    }
}

impl From<&BilinearField> for JetTensor {
    fn from(b: &BilinearField) -> JetTensor {
        JetTensor::from_fn(b.dim(), 0, 2, |idx| b.get(idx[0], idx[1]).clone())
    }
}

impl From<&VectorField> for JetTensor {
    fn from(v: &VectorField) -> JetTensor {
        JetTensor::from_fn(v.dim(), 1, 0, |idx| v.0[idx[0]].clone())
    }
}

impl From<&CovectorField> for JetTensor {
    fn from(w: &CovectorField) -> JetTensor {
        JetTensor::from_fn(w.0.len(), 0, 1, |idx| w.0[idx[0]].clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn field(exprs: &[&str], point: &[f64], order: usize) -> VectorField {
        let names: Vec<String> = ["x", "y", "z"][..point.len()].iter().map(|s| s.to_string()).collect();
        VectorField(
            exprs
                .iter()
                .map(|s| parse(s, &names).unwrap().eval_jet(point, order).unwrap())
                .collect(),
        )
    }

    #[test]
    fn coordinate_fields_commute() {
        let proto = Jet::constant(0.0, 3, 2).unwrap();
        let dx = VectorField::coordinate(0, 3, &proto);
        let dy = VectorField::coordinate(1, 3, &proto);
        assert_eq!(lie_bracket(&dx, &dy).value(), DVector::zeros(3));
    }

    #[test]
    fn bracket_of_x_dy_and_dx() {
        let p = [0.4, -1.0, 2.0];
        let x = field(&["0", "x", "0"], &p, 2);
        let y = field(&["1", "0", "0"], &p, 2);
        let b = lie_bracket(&x, &y).value();
        assert_eq!(b, DVector::from_vec(vec![0.0, -1.0, 0.0]));
    }

    #[test]
    fn multi_indices_are_row_major() {
        let all: Vec<Vec<usize>> = multi_indices(2, 2).collect();
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(multi_indices(3, 0).count(), 1);
    }

    #[test]
    fn endo_from_columns_roundtrip() {
        let p = [0.1, 0.2, 0.3];
        let c0 = field(&["x", "y", "z"], &p, 1);
        let c1 = field(&["1", "2", "3"], &p, 1);
        let c2 = field(&["x*y", "0", "z^2"], &p, 1);
        let a = EndoField::from_columns(&[c0.clone(), c1, c2]);
        let e0 = VectorField::coordinate(0, 3, &c0.0[0]);
        assert_eq!(a.apply(&e0).value(), c0.value());
    }
}
