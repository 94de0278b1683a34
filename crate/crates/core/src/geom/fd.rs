//! Central finite differences with one Richardson step, packaged as order-2 jets.

use crate::jet::{Jet, JetLayout};

/// Default base step.
pub const DEFAULT_STEP: f64 = 1e-4;

struct Stencil<'a, F> {
    f: &'a F,
    x: &'a [f64],
    center: Vec<f64>,
}

impl<F: Fn(&[f64]) -> Vec<f64>> Stencil<'_, F> {
    fn at(&self, offsets: &[(usize, f64)]) -> Vec<f64> {
        let mut p = self.x.to_vec();
        for &(i, d) in offsets {
            p[i] += d;
        }
        (self.f)(&p)
    }

    fn first(&self, i: usize, h: f64) -> Vec<f64> {
        let plus = self.at(&[(i, h)]);
        let minus = self.at(&[(i, -h)]);
        plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect()
    }

    fn second(&self, i: usize, j: usize, h: f64) -> Vec<f64> {
        if i == j {
            let plus = self.at(&[(i, h)]);
            let minus = self.at(&[(i, -h)]);
            plus.iter()
                .zip(&minus)
                .zip(&self.center)
                .map(|((a, b), c)| (a - 2.0 * c + b) / (h * h))
                .collect()
        } else {
            let pp = self.at(&[(i, h), (j, h)]);
            let pm = self.at(&[(i, h), (j, -h)]);
            let mp = self.at(&[(i, -h), (j, h)]);
            let mm = self.at(&[(i, -h), (j, -h)]);
            (0..pp.len())
                .map(|k| (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h))
                .collect()
        }
    }
}

fn richardson(coarse: Vec<f64>, fine: Vec<f64>) -> Vec<f64> {
    coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
}

/// Order-2 jets of every output component of `f` at `x`.
pub fn jets_by_differences<F: Fn(&[f64]) -> Vec<f64>>(f: &F, x: &[f64], step: f64) -> Vec<Jet> {
    let n = x.len();
    let layout = JetLayout::get(n, 2);
    let center = f(x);
    let stencil = Stencil { f, x, center };
    let ncomp = stencil.center.len();
    let mut coeffs = vec![vec![0.0; layout.len()]; ncomp];
    for (k, c) in coeffs.iter_mut().enumerate() {
        c[0] = stencil.center[k];
    }
    for i in 0..n {
        let d = richardson(stencil.first(i, step), stencil.first(i, step / 2.0));
        for k in 0..ncomp {
            coeffs[k][1 + i] = d[k];
        }
    }
    for i in 0..n {
        for j in i..n {
            let d = richardson(stencil.second(i, j, step), stencil.second(i, j, step / 2.0));
            let mut exps = vec![0u8; n];
            exps[i] += 1;
            exps[j] += 1;
            let idx = layout.index_of(&exps).expect("second-order monomial");
            let factor = if i == j { 0.5 } else { 1.0 };
            for k in 0..ncomp {
                coeffs[k][idx] = factor * d[k];
            }
        }
    }
    coeffs.into_iter().map(|c| Jet::from_coeffs(n, 2, c)).collect()
}
