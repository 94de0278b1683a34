//! Component arrays of tensor fields in chart or frame coordinates.

use nalgebra::DMatrix;

use crate::jet::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Up,
    Down,
}

/// Components of a tensor of arbitrary valence, stored row-major with the
/// first slot most significant.
#[derive(Debug, Clone)]
pub struct Tensor<T> {
    dim: usize,
    slots: Vec<Slot>,
    data: Vec<T>,
}

impl<T: Clone> Tensor<T> {
    pub fn from_fn(dim: usize, slots: Vec<Slot>, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let rank = slots.len();
        let len = dim.pow(rank as u32);
        let mut idx = vec![0usize; rank];
        let mut data = Vec::with_capacity(len);
        for flat in 0..len {
            unflatten(flat, dim, &mut idx);
            data.push(f(&idx));
        }
        Self { dim, slots, data }
    }

    pub fn from_vec(dim: usize, slots: Vec<Slot>, data: Vec<T>) -> Self {
        assert_eq!(data.len(), dim.pow(slots.len() as u32), "component count mismatch");
        Self { dim, slots, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> &T {
        &self.data[self.flat_index(idx)]
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> Tensor<U> {
        Tensor {
            dim: self.dim,
            slots: self.slots.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }
}

fn unflatten(mut flat: usize, dim: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
}

impl Tensor<Jet> {
    pub fn values(&self) -> Tensor<f64> {
        self.map(Jet::value)
    }

    /// Drops a chart variable from every component (restriction to a coordinate slice).
    pub fn restrict_var(&self, var: usize) -> Tensor<Jet> {
        self.map(|j| j.restrict(var))
    }

    /// Levi-Civita covariant derivative. The derivative direction becomes a new
    /// trailing covariant slot: `(∇T)[I, i] = (∇_{∂_i} T)[I]`.
    ///
    /// `gamma[k][i][j]` (flattened) holds `Γ^k_{ij}`.
    pub fn covariant_derivative(&self, gamma: &[Jet]) -> Tensor<Jet> {
        let m = self.dim;
        assert_eq!(gamma.len(), m * m * m);
        let rank = self.rank();
        let mut slots = self.slots.clone();
        slots.push(Slot::Down);
        let mut work = vec![0usize; rank];
        Tensor::from_fn(m, slots, |full| {
            let (idx, i) = (&full[..rank], full[rank]);
            let mut acc = self.get(idx).diff(i);
            for (s, slot) in self.slots.iter().enumerate() {
                work.copy_from_slice(idx);
                for c in 0..m {
                    work[s] = c;
                    let comp = &self.data[self.flat_index(&work)];
                    let g = match slot {
                        Slot::Up => &gamma[(idx[s] * m + i) * m + c],
                        Slot::Down => &gamma[(c * m + i) * m + idx[s]],
                    };
                    if g.max_abs_coeff() == 0.0 {
                        continue;
                    }
                    match slot {
                        Slot::Up => acc += g * comp,
                        Slot::Down => acc -= g * comp,
                    }
                }
            }
            acc
        })
    }
}

impl Tensor<f64> {
    /// Components with respect to a new basis whose vectors are the columns of
    /// `basis` (given in the current coordinates); `inverse` is its inverse.
    pub fn to_basis(&self, basis: &DMatrix<f64>, inverse: &DMatrix<f64>) -> Tensor<f64> {
        let m = self.dim;
        let mut cur = self.data.clone();
        let mut idx = vec![0usize; self.rank()];
        for (s, slot) in self.slots.iter().enumerate() {
            let stride = m.pow((self.rank() - 1 - s) as u32);
            let mut next = vec![0.0; cur.len()];
            for (flat, out) in next.iter_mut().enumerate() {
                unflatten(flat, m, &mut idx);
                let a = idx[s];
                let base = flat - a * stride;
                let mut acc = 0.0;
                for c in 0..m {
                    let coef = match slot {
                        Slot::Up => inverse[(a, c)],
                        Slot::Down => basis[(c, a)],
                    };
                    acc += coef * cur[base + c * stride];
                }
                *out = acc;
            }
            cur = next;
        }
        Tensor {
            dim: m,
            slots: self.slots.clone(),
            data: cur,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// A rank-2 tensor as a matrix (first slot = row).
    pub fn as_matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.rank(), 2);
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    /// The matrix obtained by fixing every slot except the first two.
    pub fn matrix_at(&self, tail: &[usize]) -> DMatrix<f64> {
        assert_eq!(tail.len() + 2, self.rank());
        let m = self.dim;
        let mut idx = vec![0usize; self.rank()];
        idx[2..].copy_from_slice(tail);
        DMatrix::from_fn(m, m, |a, b| {
            idx[0] = a;
            idx[1] = b;
            *self.get(&idx)
        })
    }

    /// The vector obtained by fixing every slot except the first.
    pub fn vector_at(&self, tail: &[usize]) -> nalgebra::DVector<f64> {
        assert_eq!(tail.len() + 1, self.rank());
        let mut idx = vec![0usize; self.rank()];
        idx[1..].copy_from_slice(tail);
        nalgebra::DVector::from_fn(self.dim, |a, _| {
            idx[0] = a;
            *self.get(&idx)
        })
    }
}
