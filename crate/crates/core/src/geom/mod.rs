//! Riemannian computation kernel: charts, differentiation backends, Christoffel
//! symbols, curvature and orthonormal frames.

pub mod curvature;
pub mod fd;
pub mod frame;
pub mod model;
pub mod tensor;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;

pub use curvature::{christoffel, r_operator, Connection, Curvature};
pub use frame::{orthonormal_frame, FrameAtPoint, FrameChoice};
pub use model::{ManifoldModel, MetricBackend};
pub use tensor::{Slot, Tensor};

/// Derivative order carried by primitive fields (metric and structure tensors).
pub const PRIMITIVE_ORDER: usize = 2;

/// Default number of sample points.
pub const DEFAULT_POINTS: usize = 32;
/// Default sampling seed.
pub const DEFAULT_SEED: u64 = 42;
/// Fraction of the box width kept clear at each face when sampling.
pub const SAMPLE_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Truncated Taylor arithmetic.
    #[default]
    Jet,
    /// Central differences with Richardson extrapolation (cross-check only).
    Fd,
}

/// Anything that produces component jets of smooth fields at chart points.
pub trait JetSource: Send + Sync {
    /// Chart dimension.
    fn nvars(&self) -> usize;

    /// Flat list of component jets at `x`, exact through derivative `order`.
    fn components(&self, x: &[f64], order: usize) -> Vec<Jet>;
}

/// Components at `x` as order-[`PRIMITIVE_ORDER`] jets computed by `backend`.
pub fn evaluate(src: &dyn JetSource, x: &[f64], backend: Backend) -> Vec<Jet> {
    match backend {
        Backend::Jet => src.components(x, PRIMITIVE_ORDER),
        Backend::Fd => {
            let f = |p: &[f64]| src.components(p, 0).iter().map(Jet::value).collect::<Vec<_>>();
            fd::jets_by_differences(&f, x, fd::DEFAULT_STEP)
        }
    }
}

/// Axis-aligned chart box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert!(lo.iter().zip(&hi).all(|(a, b)| a < b), "empty box");
        Self { lo, hi }
    }

    pub fn cube(dim: usize, half_width: f64) -> Self {
        Self::new(vec![-half_width; dim], vec![half_width; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// True when `x` keeps at least `margin` (fraction of the width) from every face.
    pub fn contains_with_margin(&self, x: &[f64], margin: f64) -> bool {
        x.len() == self.dim()
            && x.iter().enumerate().all(|(i, v)| {
                let w = self.hi[i] - self.lo[i];
                *v >= self.lo[i] + margin * w && *v <= self.hi[i] - margin * w
            })
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if self.contains_with_margin(x, 0.0) {
            Ok(())
        } else {
            Err(Error::OutsideDomain { point: x.to_vec() })
        }
    }

    /// Seeded uniform draws from the box shrunk by [`SAMPLE_MARGIN`].
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                (0..self.dim())
                    .map(|i| {
                        let w = self.hi[i] - self.lo[i];
                        let a = self.lo[i] + SAMPLE_MARGIN * w;
                        let b = self.hi[i] - SAMPLE_MARGIN * w;
                        rng.gen_range(a..b)
                    })
                    .collect()
            })
            .collect()
    }
}
