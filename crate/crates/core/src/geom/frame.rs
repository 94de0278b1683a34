//! Orthonormal frames at a point.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Unit-norm tolerance for a distinguished vector.
pub const UNIT_TOL: f64 = 1e-9;

/// How the starting basis for Gram–Schmidt is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrameChoice {
    /// Coordinate vectors.
    #[default]
    Coordinate,
    /// Seeded uniform random vectors, giving a generic rotation of the coordinate frame.
    Random(u64),
}

/// Orthonormal frame at a point, as columns in chart components.
#[derive(Debug, Clone)]
pub struct FrameAtPoint {
    pub point: Vec<f64>,
    pub vectors: DMatrix<f64>,
    /// `vectors⁻¹ = vectorsᵀ g`.
    pub inverse: DMatrix<f64>,
}

impl FrameAtPoint {
    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vector(&self, i: usize) -> DVector<f64> {
        self.vectors.column(i).into_owned()
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn gram_defect(&self, g: &DMatrix<f64>) -> f64 {
        let gram = self.vectors.transpose() * g * &self.vectors;
        (gram - DMatrix::identity(self.dim(), self.dim())).amax()
    }
}

fn inner(g: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.dot(&(g * b))
}

/// Gram–Schmidt frame for the metric `g`. When `distinguished` is given it
/// becomes the last frame vector and the others span its orthogonal complement.
pub fn orthonormal_frame(
    point: &[f64],
    g: &DMatrix<f64>,
    distinguished: Option<&DVector<f64>>,
    choice: FrameChoice,
) -> Result<FrameAtPoint> {
    let m = g.nrows();
    let mut candidates: Vec<DVector<f64>> = match choice {
        FrameChoice::Coordinate => (0..m)
            .map(|i| DVector::from_fn(m, |k, _| if k == i { 1.0 } else { 0.0 }))
            .collect(),
        FrameChoice::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..m)
                .map(|_| DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0)))
                .collect()
        }
    };
    let mut chosen: Vec<DVector<f64>> = Vec::with_capacity(m);
    if let Some(xi) = distinguished {
        let n = inner(g, xi, xi).sqrt();
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit(n));
        }
        chosen.push(xi.clone());
    }
    while chosen.len() < m {
        // pick the candidate least dependent on what is already chosen
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for (ci, c) in candidates.iter().enumerate() {
            let mut v = c.clone();
            for _ in 0..2 {
                for e in &chosen {
                    v -= e * inner(g, e, &v);
                }
            }
            let n = inner(g, &v, &v).sqrt() / inner(g, c, c).sqrt();
            if best.as_ref().map_or(true, |b| n > b.2) {
                best = Some((ci, v, n));
            }
        }
        let (ci, v, n) = best.ok_or(Error::DegenerateFrame)?;
        if n < 1e-8 {
            return Err(Error::DegenerateFrame);
        }
        candidates.remove(ci);
        let len = inner(g, &v, &v).sqrt();
        chosen.push(v / len);
    }
    if distinguished.is_some() {
        chosen.rotate_left(1);
    }
    let vectors = DMatrix::from_columns(&chosen);
    let inverse = vectors.transpose() * g;
    Ok(FrameAtPoint {
        point: point.to_vec(),
        vectors,
        inverse,
    })
}
