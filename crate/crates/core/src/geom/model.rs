//! Riemannian manifolds given by a chart metric or a Euclidean parametrization.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::curvature::{Connection, Curvature};
use super::{evaluate, Backend, BoxDomain, JetSource};
use crate::error::{Error, Result};
use crate::jet::Jet;

/// Maps coordinate jets to a list of component jets of the same order.
pub type JetMap = Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;

/// Produces component jets at a chart point to a requested order.
pub type FieldFn = Arc<dyn Fn(&[f64], usize) -> Vec<Jet> + Send + Sync>;

#[derive(Clone)]
pub enum MetricBackend {
    /// Metric components `g_ij` as functions of the coordinates (row-major).
    IntrinsicChart { metric: JetMap },
    /// Parametrization `F: ℝᵐ → ℝᴺ`; the metric is `⟨∂_iF, ∂_jF⟩`.
    EmbeddedPatch { ambient_dim: usize, map: JetMap },
    /// Metric components supplied directly, e.g. restricted from an ambient chart.
    Induced { metric: FieldFn },
}

#[derive(Clone)]
pub struct ManifoldModel {
    pub dim: usize,
    pub domain: BoxDomain,
    pub backend: MetricBackend,
}

impl fmt::Debug for ManifoldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.backend {
            MetricBackend::IntrinsicChart { .. } => "intrinsic",
            MetricBackend::EmbeddedPatch { .. } => "embedded",
            MetricBackend::Induced { .. } => "induced",
        };
        f.debug_struct("ManifoldModel")
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("backend", &kind)
            .finish()
    }
}

/// Pullback metric `g_ij = Σ_a ∂_iF^a ∂_jF^a`, one order below the map jets.
pub fn pullback_metric(map: &[Jet], m: usize) -> Vec<Jet> {
    let d: Vec<Vec<Jet>> = (0..m).map(|i| map.iter().map(|f| f.diff(i)).collect()).collect();
    let mut g: Vec<Jet> = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            if j < i {
                let v = g[j * m + i].clone();
                g.push(v);
                continue;
            }
            let mut acc = d[i][0].zero_like();
            for (a, b) in d[i].iter().zip(&d[j]) {
                acc += a * b;
            }
            g.push(acc);
        }
    }
    g
}

impl ManifoldModel {
    pub fn intrinsic(
        dim: usize,
        domain: BoxDomain,
        metric: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    ) -> Self {
        assert_eq!(domain.dim(), dim);
        Self {
            dim,
            domain,
            backend: MetricBackend::IntrinsicChart {
                metric: Arc::new(metric),
            },
        }
    }

    pub fn embedded(
        dim: usize,
        ambient_dim: usize,
        domain: BoxDomain,
        map: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    ) -> Self {
        assert_eq!(domain.dim(), dim);
        Self {
            dim,
            domain,
            backend: MetricBackend::EmbeddedPatch {
                ambient_dim,
                map: Arc::new(map),
            },
        }
    }

    pub fn induced(dim: usize, domain: BoxDomain, metric: FieldFn) -> Self {
        assert_eq!(domain.dim(), dim);
        Self {
            dim,
            domain,
            backend: MetricBackend::Induced { metric },
        }
    }

    /// Flat ℝᵐ on the given box.
    pub fn flat(dim: usize, domain: BoxDomain) -> Self {
        Self::intrinsic(dim, domain, move |x| {
            let mut g = Vec::with_capacity(dim * dim);
            for i in 0..dim {
                for j in 0..dim {
                    g.push(x[0].lift_const(if i == j { 1.0 } else { 0.0 }));
                }
            }
            g
        })
    }

    /// Metric component jets at `x` to the given order.
    pub fn metric_jets(&self, x: &[f64], order: usize) -> Vec<Jet> {
        match &self.backend {
            MetricBackend::IntrinsicChart { metric } => metric(&Jet::seeds(x, order)),
            MetricBackend::EmbeddedPatch { map, .. } => pullback_metric(&map(&Jet::seeds(x, order + 1)), self.dim),
            MetricBackend::Induced { metric } => metric(x, order),
        }
    }

    /// Jacobian of the parametrization, for embedded patches.
    pub fn jacobian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        match &self.backend {
            MetricBackend::EmbeddedPatch { ambient_dim, map } => {
                let f = map(&Jet::seeds(x, 1));
                Some(DMatrix::from_fn(*ambient_dim, self.dim, |a, i| f[a].d1(i)))
            }
            _ => None,
        }
    }

    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.domain.check(x)?;
        if let Some(jac) = self.jacobian(x) {
            let sv = jac.clone().singular_values();
            if sv.min() < 1e-10 {
                return Err(Error::RankDeficient(x.to_vec()));
            }
        }
        Ok(self.connection(x, Backend::Jet)?.metric_values())
    }

    pub fn connection(&self, x: &[f64], backend: Backend) -> Result<Connection> {
        self.domain.check(x)?;
        Connection::new(evaluate(self, x, backend), x)
    }

    pub fn christoffel(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.connection(x, Backend::Jet)?.christoffel_values())
    }

    pub fn curvature(&self, x: &[f64], backend: Backend) -> Result<Curvature> {
        Ok(Curvature::new(&self.connection(x, backend)?))
    }
}

impl JetSource for ManifoldModel {
    fn nvars(&self) -> usize {
        self.dim
    }

    fn components(&self, x: &[f64], order: usize) -> Vec<Jet> {
        self.metric_jets(x, order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_metric_is_identity_and_connection_vanishes() {
        let m = ManifoldModel::flat(3, BoxDomain::cube(3, 1.0));
        let x = [0.1, -0.2, 0.3];
        assert_eq!(m.metric_at(&x).unwrap(), DMatrix::identity(3, 3));
        assert!(m.christoffel(&x).unwrap().iter().all(|v| *v == 0.0));
        assert_eq!(m.curvature(&x, Backend::Jet).unwrap().riemann.max_abs(), 0.0);
    }

    #[test]
    fn points_outside_domain_are_rejected() {
        let m = ManifoldModel::flat(2, BoxDomain::cube(2, 1.0));
        assert!(matches!(m.metric_at(&[2.0, 0.0]), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn embedded_metric_is_jacobian_gram() {
        let m = ManifoldModel::embedded(2, 3, BoxDomain::cube(2, 1.0), |x| {
            vec![x[0].clone(), x[1].clone(), &(&x[0] * &x[0]) + &(&x[0] * &x[1])]
        });
        let x = [0.3, -0.4];
        let jac = m.jacobian(&x).unwrap();
        let g = m.metric_at(&x).unwrap();
        assert!((g - jac.transpose() * jac).amax() < 1e-14);
    }
}
