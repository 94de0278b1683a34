//! Levi-Civita connection and curvature from metric jets.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::tensor::{Slot, Tensor};
use crate::error::{Error, Result};
use crate::jet::{self, Jet};

/// Smallest admissible metric eigenvalue.
pub const MIN_METRIC_EIGENVALUE: f64 = 1e-10;

/// `Γ^k_{ij}` flattened as `[k][i][j]`, one derivative order below the metric.
pub fn christoffel(metric: &[Jet], inverse: &[Jet], m: usize) -> Vec<Jet> {
    let order = metric[0].order();
    assert!(order >= 1, "metric jets must carry first derivatives");
    let dg: Vec<Vec<Jet>> = (0..m).map(|l| metric.iter().map(|g| g.diff(l)).collect()).collect();
    let ginv: Vec<Jet> = inverse.iter().map(|j| j.truncate(order - 1)).collect();
    let zero = dg[0][0].zero_like();
    let mut gamma = vec![zero.clone(); m * m * m];
    for i in 0..m {
        for j in i..m {
            // first-kind symbols [ij, l]
            let first: Vec<Jet> = (0..m)
                .map(|l| {
                    let s = &(&dg[i][j * m + l] + &dg[j][i * m + l]) - &dg[l][i * m + j];
                    s.scale(0.5)
                })
                .collect();
            for k in 0..m {
                let mut acc = zero.clone();
                for (l, f) in first.iter().enumerate() {
                    acc += &ginv[k * m + l] * f;
                }
                gamma[(k * m + i) * m + j] = acc.clone();
                gamma[(k * m + j) * m + i] = acc;
            }
        }
    }
    gamma
}

/// `(R(∂_i,∂_j)∂_k)^l` stored at `[l][k][i][j]`, with `R(X,Y) = [∇_X,∇_Y] − ∇_[X,Y]`.
pub fn riemann(gamma: &[Jet], m: usize) -> Tensor<f64> {
    let g = |a: usize, b: usize, c: usize| &gamma[(a * m + b) * m + c];
    Tensor::from_fn(m, vec![Slot::Up, Slot::Down, Slot::Down, Slot::Down], |idx| {
        let (l, k, i, j) = (idx[0], idx[1], idx[2], idx[3]);
        let mut v = g(l, j, k).d1(i) - g(l, i, k).d1(j);
        for p in 0..m {
            v += g(l, i, p).value() * g(p, j, k).value() - g(l, j, p).value() * g(p, i, k).value();
        }
        v
    })
}

/// `Ric(X,Y) = tr(Z ↦ R(Z,X)Y)` from a curvature tensor in the layout of [`riemann`].
pub fn ricci(r: &Tensor<f64>) -> Tensor<f64> {
    let m = r.dim();
    Tensor::from_fn(m, vec![Slot::Down, Slot::Down], |idx| {
        (0..m).map(|a| *r.get(&[a, idx[1], a, idx[0]])).sum()
    })
}

/// The endomorphism `R(X,Y)` as a matrix.
pub fn curvature_operator(r: &Tensor<f64>, x: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64> {
    let m = r.dim();
    DMatrix::from_fn(m, m, |l, k| {
        let mut acc = 0.0;
        for i in 0..m {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..m {
                acc += r.get(&[l, k, i, j]) * x[i] * y[j];
            }
        }
        acc
    })
}

/// `r(u,v)w = ⟨v,w⟩u − ⟨u,w⟩v` for the inner product with Gram matrix `g`.
pub fn r_operator(u: &DVector<f64>, v: &DVector<f64>, w: &DVector<f64>, g: &DMatrix<f64>) -> DVector<f64> {
    let vw = v.dot(&(g * w));
    let uw = u.dot(&(g * w));
    u * vw - v * uw
}

/// Levi-Civita data at one point: metric, inverse and Christoffel jets.
#[derive(Debug, Clone)]
pub struct Connection {
    pub dim: usize,
    pub metric: Vec<Jet>,
    pub inverse: Vec<Jet>,
    pub gamma: Vec<Jet>,
}

impl Connection {
    /// Builds the connection of metric jets (row-major `m × m`) at `point`.
    pub fn new(metric: Vec<Jet>, point: &[f64]) -> Result<Self> {
        let m = (metric.len() as f64).sqrt().round() as usize;
        if m * m != metric.len() {
            return Err(Error::NotSquare {
                rows: metric.len(),
                cols: 1,
            });
        }
        let values = DMatrix::from_fn(m, m, |i, j| metric[i * m + j].value());
        let sym = (&values + values.transpose()) * 0.5;
        let min = SymmetricEigen::new(sym).eigenvalues.min();
        if !(min > MIN_METRIC_EIGENVALUE) {
            return Err(Error::DegenerateMetric {
                point: point.to_vec(),
                min_eigenvalue: min,
            });
        }
        let inverse = jet::invert(&metric, m).ok_or_else(|| Error::DegenerateMetric {
            point: point.to_vec(),
            min_eigenvalue: min,
        })?;
        let gamma = christoffel(&metric, &inverse, m);
        Ok(Self {
            dim: m,
            metric,
            inverse,
            gamma,
        })
    }

    pub fn metric_values(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.metric[i * self.dim + j].value())
    }

    pub fn inverse_values(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.inverse[i * self.dim + j].value())
    }

    pub fn metric_tensor(&self) -> Tensor<Jet> {
        Tensor::from_vec(self.dim, vec![Slot::Down, Slot::Down], self.metric.clone())
    }

    /// Christoffel values `Γ^k_{ij}` flattened `[k][i][j]`.
    pub fn christoffel_values(&self) -> Vec<f64> {
        self.gamma.iter().map(Jet::value).collect()
    }

    pub fn nabla(&self, t: &Tensor<Jet>) -> Tensor<Jet> {
        t.covariant_derivative(&self.gamma)
    }

    pub fn riemann(&self) -> Tensor<f64> {
        riemann(&self.gamma, self.dim)
    }
}

/// Curvature tensor with its metric, for frame-free identity checks.
#[derive(Debug, Clone)]
pub struct Curvature {
    pub metric: DMatrix<f64>,
    pub riemann: Tensor<f64>,
}

impl Curvature {
    pub fn new(conn: &Connection) -> Self {
        Self {
            metric: conn.metric_values(),
            riemann: conn.riemann(),
        }
    }

    /// `R_{abcd} = ⟨R(∂_c,∂_d)∂_b, ∂_a⟩`.
    pub fn lowered(&self) -> Tensor<f64> {
        let m = self.riemann.dim();
        Tensor::from_fn(m, vec![Slot::Down; 4], |idx| {
            (0..m)
                .map(|p| self.metric[(idx[0], p)] * self.riemann.get(&[p, idx[1], idx[2], idx[3]]))
                .sum()
        })
    }

    /// Largest violation of antisymmetry, pair symmetry and the first Bianchi identity.
    pub fn symmetry_defect(&self) -> f64 {
        let r = self.lowered();
        let m = r.dim();
        let mut worst: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for d in 0..m {
                        let v = *r.get(&[a, b, c, d]);
                        worst = worst
                            .max((v + r.get(&[a, b, d, c])).abs())
                            .max((v + r.get(&[b, a, c, d])).abs())
                            .max((v - r.get(&[c, d, a, b])).abs())
                            .max((v + r.get(&[a, c, d, b]) + r.get(&[a, d, b, c])).abs());
                    }
                }
            }
        }
        worst
    }

    pub fn ricci(&self) -> Tensor<f64> {
        ricci(&self.riemann)
    }

    /// Sectional curvature of the plane spanned by `x`, `y`.
    pub fn sectional(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let g = &self.metric;
        let rxy_y = curvature_operator(&self.riemann, x, y) * y;
        let num = rxy_y.dot(&(g * x));
        let xx = x.dot(&(g * x));
        let yy = y.dot(&(g * y));
        let xy = x.dot(&(g * y));
        num / (xx * yy - xy * xy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere2(theta: f64, phi: f64) -> Connection {
        let x = Jet::seeds(&[theta, phi], 3);
        let s = x[0].sin();
        let one = x[0].lift_const(1.0);
        let zero = x[0].zero_like();
        Connection::new(vec![one, zero.clone(), zero, &s * &s], &[theta, phi]).unwrap()
    }

    #[test]
    fn round_two_sphere_christoffel() {
        let c = sphere2(std::f64::consts::FRAC_PI_4, 0.3);
        let g = c.christoffel_values();
        // Γ^θ_{φφ} and Γ^φ_{θφ}
        assert!((g[3] + 0.5).abs() < 1e-14);
        assert!((g[4 + 1] - 1.0).abs() < 1e-14);
        assert!((g[4 + 2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn round_two_sphere_curvature() {
        let c = sphere2(1.1, -0.4);
        let k = Curvature::new(&c);
        let e0 = DVector::from_vec(vec![1.0, 0.0]);
        let e1 = DVector::from_vec(vec![0.0, 1.0]);
        assert!((k.sectional(&e0, &e1) - 1.0).abs() < 1e-12);
        assert!(k.symmetry_defect() < 1e-12);
        let ric = k.ricci();
        for i in 0..2 {
            for j in 0..2 {
                assert!((ric.get(&[i, j]) - k.metric[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn r_operator_examples() {
        let g = DMatrix::identity(3, 3);
        let e = |i: usize| DVector::from_fn(3, |k, _| if k == i { 1.0 } else { 0.0 });
        assert_eq!(r_operator(&e(0), &e(1), &e(0), &g), -e(1));
        assert_eq!(r_operator(&e(2), &e(2), &e(1), &g), DVector::zeros(3));
        assert_eq!(r_operator(&e(0), &(e(1) * 2.0), &e(1), &g), e(0) * 2.0);
    }

    #[test]
    fn degenerate_metric_is_rejected() {
        let x = Jet::seeds(&[0.0, 0.0], 2);
        let z = x[0].zero_like();
        let err = Connection::new(vec![x[0].lift_const(1.0), z.clone(), z.clone(), z], &[0.0, 0.0]);
        assert!(matches!(err, Err(Error::DegenerateMetric { .. })));
    }
}
