//! Levi-Civita connection, covariant derivatives, curvature and Ricci
//! tensors, with `R(X,Y) = [∇_X, ∇_Y] − ∇_[X,Y]`.

use nalgebra::{DMatrix, DVector};

use crate::chart::{coordinate_jets, metric_at, pseudo_orthonormal_frame, Frame, TensorFieldSpec};
use crate::error::{Error, Result};
use crate::jet::{Jet, JetError};
use crate::tensor::{BilinearField, JetTensor};

/// Inverse of a jet-valued matrix by Gauss–Jordan elimination, pivoting on
/// values.
pub fn jet_matrix_inverse(dim: usize, entries: &[Jet]) -> Result<Vec<Jet>, JetError> {
    let proto = &entries[0];
    let mut a: Vec<Vec<Jet>> = (0..dim).map(|i| entries[i * dim..(i + 1) * dim].to_vec()).collect();
    let mut inv: Vec<Vec<Jet>> = (0..dim)
        .map(|i| (0..dim).map(|j| proto.constant_like(f64::from(i == j))).collect())
        .collect();
    for col in 0..dim {
        let pivot = (col..dim)
            .max_by(|&r, &s| a[r][col].value().abs().total_cmp(&a[s][col].value().abs()))
            .unwrap_or(col);
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].recip()?;
        a[col] = a[col].iter().map(|x| x * &p).collect();
        inv[col] = inv[col].iter().map(|x| x * &p).collect();
        for r in 0..dim {
            if r == col {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..dim {
                let (ac, ic) = (a[col][c].clone(), inv[col][c].clone());
                a[r][c].sub_product(&f, &ac);
                inv[r][c].sub_product(&f, &ic);
            }
        }
    }
    Ok(inv.into_iter().flatten().collect())
}

/// `Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij)`, indexed `[k, i, j]`.
///
/// Symmetric in `i, j` by construction.
pub fn christoffel_jets(g: &BilinearField, g_inv: &[Jet]) -> JetTensor {
    let dim = g.dim();
    let dg: Vec<Vec<Jet>> = (0..dim * dim)
        .map(|ij| (0..dim).map(|k| g.entries()[ij].derivative(k)).collect())
        .collect();
    let d = |k: usize, i: usize, j: usize| &dg[i * dim + j][k];
    let mut first = vec![Vec::new(); dim * dim];
    for i in 0..dim {
        for j in i..dim {
            first[i * dim + j] = (0..dim)
                .map(|l| (&(d(i, j, l) + d(j, i, l)) - d(l, i, j)).scale(0.5))
                .collect::<Vec<Jet>>();
        }
    }
    let order = dg[0][0].order();
    JetTensor::from_fn(dim, 1, 2, |idx| {
        let (k, i, j) = (idx[0], idx[1].min(idx[2]), idx[1].max(idx[2]));
        let lowered = &first[i * dim + j];
        let mut acc = lowered[0].constant_like(0.0);
        for (l, low) in lowered.iter().enumerate() {
            acc.add_product(&g_inv[k * dim + l].truncate(order), low);
        }
        acc
    })
}

/// `R^l_kij` with `R(∂_i, ∂_j)∂_k = R^l_kij ∂_l`, indexed `[l, k, i, j]`.
pub fn riemann_jets(gamma: &JetTensor) -> JetTensor {
    let dim = gamma.dim();
    JetTensor::from_fn(dim, 1, 3, |idx| {
        let (l, k, i, j) = (idx[0], idx[1], idx[2], idx[3]);
        let mut acc = &gamma.get(&[l, j, k]).derivative(i) - &gamma.get(&[l, i, k]).derivative(j);
        for m in 0..dim {
            acc.add_product(gamma.get(&[l, i, m]), gamma.get(&[m, j, k]));
            acc.sub_product(gamma.get(&[l, j, m]), gamma.get(&[m, i, k]));
        }
        acc
    })
}

/// `∇T` with the differentiation index appended last: for `T^a_b`,
/// `(∇T)^a_{bk} = ∂_k T^a_b + Γ^a_{kl} T^l_b − Γ^l_{kb} T^a_l`.
pub fn covariant_derivative(t: &JetTensor, gamma: &JetTensor) -> JetTensor {
    let (dim, up, rank) = (t.dim(), t.up(), t.rank());
    let order = t.order().saturating_sub(1).min(gamma.order());
    JetTensor::from_fn(dim, up, t.down() + 1, |idx| {
        let (base, k) = (&idx[..rank], idx[rank]);
        let mut acc = t.get(base).derivative(k).truncate(order);
        let mut probe = base.to_vec();
        for slot in 0..rank {
            for l in 0..dim {
                probe[slot] = l;
                if slot < up {
                    acc.add_product(gamma.get(&[base[slot], k, l]), t.get(&probe));
                } else {
                    acc.sub_product(gamma.get(&[l, k, base[slot]]), t.get(&probe));
                }
            }
            probe[slot] = base[slot];
        }
        acc
    })
}

/// Christoffel symbols at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelAtPoint {
    pub dim: usize,
    data: Vec<f64>,
}

impl ChristoffelAtPoint {
    pub fn from_jets(gamma: &JetTensor) -> ChristoffelAtPoint {
        ChristoffelAtPoint {
            dim: gamma.dim(),
            data: gamma.values(),
        }
    }

    /// `Γ^k_ij`.
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    /// `Γ(X, Y)^k = Γ^k_ij X^i Y^j`.
    pub fn contract(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.dim, |k, _| {
            let mut s = 0.0;
            for i in 0..self.dim {
                for j in 0..self.dim {
                    s += self.get(k, i, j) * x[i] * y[j];
                }
            }
            s
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Curvature at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureAtPoint {
    pub dim: usize,
    /// `R^l_kij`, indexed `[l, k, i, j]`.
    raised: Vec<f64>,
    /// `R_lkij = g_lm R^m_kij`.
    lowered: Vec<f64>,
    /// Ricci form `S`, traced over a pseudo-orthonormal frame.
    pub ricci: DMatrix<f64>,
    /// Ricci operator `Q = g⁻¹S`.
    pub ricci_operator: DMatrix<f64>,
}

impl CurvatureAtPoint {
    pub fn new(riemann: &JetTensor, g: &DMatrix<f64>, g_inv: &DMatrix<f64>, frame: &Frame) -> CurvatureAtPoint {
        let dim = riemann.dim();
        let raised = riemann.values();
        let idx = |l: usize, k: usize, i: usize, j: usize| ((l * dim + k) * dim + i) * dim + j;
        let mut lowered = vec![0.0; raised.len()];
        for l in 0..dim {
            for k in 0..dim {
                for i in 0..dim {
                    for j in 0..dim {
                        lowered[idx(l, k, i, j)] = (0..dim).map(|m| g[(l, m)] * raised[idx(m, k, i, j)]).sum();
                    }
                }
            }
        }
        let mut out = CurvatureAtPoint {
            dim,
            raised,
            lowered,
            ricci: DMatrix::zeros(dim, dim),
            ricci_operator: DMatrix::zeros(dim, dim),
        };
        out.ricci = out.ricci_from_frame(frame);
        out.ricci_operator = g_inv * &out.ricci;
        out
    }

    fn idx(&self, l: usize, k: usize, i: usize, j: usize) -> usize {
        ((l * self.dim + k) * self.dim + i) * self.dim + j
    }

    /// `R^l_kij`.
    pub fn raised(&self, l: usize, k: usize, i: usize, j: usize) -> f64 {
        self.raised[self.idx(l, k, i, j)]
    }

    /// `R_lkij`.
    pub fn lowered(&self, l: usize, k: usize, i: usize, j: usize) -> f64 {
        self.lowered[self.idx(l, k, i, j)]
    }

    /// `R(X, Y)Z`.
    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        let d = self.dim;
        DVector::from_fn(d, |l, _| {
            let mut s = 0.0;
            for k in 0..d {
                if z[k] == 0.0 {
                    continue;
                }
                for i in 0..d {
                    if x[i] == 0.0 {
                        continue;
                    }
                    for j in 0..d {
                        s += self.raised(l, k, i, j) * x[i] * y[j] * z[k];
                    }
                }
            }
            s
        })
    }

    /// `R(X, Y, Z, W) = g(R(X, Y)Z, W)`.
    pub fn form(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>, w: &DVector<f64>) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for l in 0..d {
            for k in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        s += self.lowered(l, k, i, j) * x[i] * y[j] * z[k] * w[l];
                    }
                }
            }
        }
        s
    }

    /// `S(X, Y) = Σ_a ε_a g(R(f_a, X)Y, f_a)`.
    pub fn ricci_from_frame(&self, frame: &Frame) -> DMatrix<f64> {
        let d = self.dim;
        DMatrix::from_fn(d, d, |j, k| {
            let mut s = 0.0;
            for (f, eps) in frame.vectors.iter().zip(&frame.signs) {
                for l in 0..d {
                    for i in 0..d {
                        s += eps * self.lowered(l, k, i, j) * f[i] * f[l];
                    }
                }
            }
            s
        })
    }

    /// Coordinate trace `S_jk = R^l_klj`.
    pub fn ricci_trace(&self) -> DMatrix<f64> {
        let d = self.dim;
        DMatrix::from_fn(d, d, |j, k| (0..d).map(|l| self.raised(l, k, l, j)).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.raised.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Metric jets at `point`, symmetrized.
pub fn metric_jets(g: &TensorFieldSpec, inputs: &[Jet]) -> Result<BilinearField> {
    let dim = g.dim();
    let raw = g.eval_jets(inputs, "metric")?;
    let entries = (0..dim * dim)
        .map(|ij| {
            let (i, j) = (ij / dim, ij % dim);
            (&raw[i * dim + j] + &raw[j * dim + i]).scale(0.5)
        })
        .collect();
    Ok(BilinearField::new(dim, entries))
}

fn connection_jets(g: &TensorFieldSpec, point: &[f64], order: usize) -> Result<(BilinearField, Vec<Jet>, JetTensor)> {
    metric_at(g, point)?;
    let inputs = coordinate_jets(point, order).map_err(|e| Error::Spec(e.to_string()))?;
    let gj = metric_jets(g, &inputs)?;
    let g_inv = jet_matrix_inverse(gj.dim(), gj.entries()).map_err(|_| Error::DegenerateMetric {
        point: point.to_vec(),
        smallest: 0.0,
    })?;
    let gamma = christoffel_jets(&gj, &g_inv);
    Ok((gj, g_inv, gamma))
}

/// Christoffel symbols of `g` at `point`.
pub fn christoffel(g: &TensorFieldSpec, point: &[f64]) -> Result<ChristoffelAtPoint> {
    let (_, _, gamma) = connection_jets(g, point, 1)?;
    Ok(ChristoffelAtPoint::from_jets(&gamma))
}

/// Curvature of `g` at `point`.
pub fn curvature(g: &TensorFieldSpec, point: &[f64]) -> Result<CurvatureAtPoint> {
    let metric = metric_at(g, point)?;
    let (_, _, gamma) = connection_jets(g, point, 2)?;
    let frame = pseudo_orthonormal_frame(&metric.components, point)?;
    Ok(CurvatureAtPoint::new(
        &riemann_jets(&gamma),
        &metric.components,
        &metric.inverse,
        &frame,
    ))
}

/// Applies a `(1,1)` derivative table `D[k]^i_j = (∇_k A)^i_j` as `(∇_X A)Y`.
pub fn apply_derivative(d: &[DMatrix<f64>], x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    d.iter()
        .zip(x.iter())
        .filter(|(_, xk)| **xk != 0.0)
        .fold(DVector::zeros(y.len()), |acc, (dk, xk)| acc + (dk * y) * *xk)
}

/// `Σ_k X^k D[k]` as a matrix.
pub fn derivative_along(d: &[DMatrix<f64>], x: &DVector<f64>) -> DMatrix<f64> {
    let dim = x.len();
    d.iter()
        .zip(x.iter())
        .fold(DMatrix::zeros(dim, dim), |acc, (dk, xk)| acc + dk * *xk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn metric(names: &[&str], rows: &[&str]) -> TensorFieldSpec {
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let comps = rows.iter().map(|s| parse(s, &names).unwrap()).collect();
        TensorFieldSpec::new((0, 2), names.len(), comps).unwrap()
    }

    #[test]
    fn constant_metric_is_flat() {
        let g = metric(&["a", "b", "c"], &["-1", "0", "0", "0", "1", "0", "0", "0", "1"]);
        let c = christoffel(&g, &[0.3, 0.2, 0.1]).unwrap();
        assert_eq!(c.max_abs(), 0.0);
        let r = curvature(&g, &[0.3, 0.2, 0.1]).unwrap();
        assert_eq!(r.max_abs(), 0.0);
        assert_eq!(r.ricci_operator.amax(), 0.0);
    }

    #[test]
    fn polar_christoffels() {
        let g = metric(&["r", "t"], &["1", "0", "0", "r^2"]);
        let c = christoffel(&g, &[1.7, 0.4]).unwrap();
        assert!((c.get(0, 1, 1) + 1.7).abs() < 1e-15);
        assert!((c.get(1, 0, 1) - 1.0 / 1.7).abs() < 1e-15);
        assert_eq!(c.get(1, 0, 1), c.get(1, 1, 0));
    }

    #[test]
    fn round_sphere_has_unit_curvature() {
        let g = metric(&["u", "v"], &["1", "0", "0", "sin(u)^2"]);
        let p = [0.9, -0.3];
        let r = curvature(&g, &p).unwrap();
        let e0 = DVector::from_vec(vec![1.0, 0.0]);
        let e1 = DVector::from_vec(vec![0.0, 1.0 / p[0].sin()]);
        let k = r.form(&e0, &e1, &e1, &e0);
        assert!((k - 1.0).abs() < 1e-12, "K = {k}");
        assert!((&r.ricci - r.ricci_trace()).amax() < 1e-12);
    }

    #[test]
    fn jet_inverse_matches_value_inverse() {
        let names: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let xs = coordinate_jets(&[0.4, 0.9], 2).unwrap();
        let entries: Vec<Jet> = ["0", "1+a", "1+a", "b^2"]
            .iter()
            .map(|s| parse(s, &names).unwrap().eval_with(&xs).unwrap())
            .collect();
        let inv = jet_matrix_inverse(2, &entries).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = entries[0].constant_like(0.0);
                for k in 0..2 {
                    acc.add_product(&entries[i * 2 + k], &inv[k * 2 + j]);
                }
                let target = entries[0].constant_like(f64::from(i == j));
                assert!(acc.partials().iter().zip(target.partials()).all(|(a, b)| (a - b).abs() < 1e-12));
            }
        }
    }
}
