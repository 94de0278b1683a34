//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the Taylor coefficients `c_α = ∂^α f / α!` of a function of
//! `nvars` variables about a base point, for every multi-index with `|α| ≤ order`.
//! Monomials are enumerated degree by degree, so the coefficient vector of a
//! lower-order jet is a prefix of the higher-order one with the same variable
//! count. Binary operations between jets of different orders truncate to the
//! smaller order.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::sync::{Mutex, OnceLock};

/// Largest supported truncation order.
pub const MAX_ORDER: usize = 4;

/// Monomial enumeration and product tables for one `(nvars, order)` pair.
pub struct JetLayout {
    nvars: usize,
    order: usize,
    monomials: Vec<Vec<u8>>,
    degree: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    products: Vec<(u32, u32, u32)>,
    // For each variable: (destination in order-1 layout, source, factor).
    derivatives: Vec<Vec<(u32, u32, f64)>>,
}

impl JetLayout {
    fn build(nvars: usize, order: usize) -> Self {
        let mut monomials = Vec::new();
        let mut degree = Vec::new();
        for d in 0..=order {
            let mut cur = vec![0u8; nvars];
            enumerate_degree(nvars, d, 0, &mut cur, &mut monomials);
            while degree.len() < monomials.len() {
                degree.push(d);
            }
        }
        let index: HashMap<Vec<u8>, usize> = monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();

        let mut products = Vec::new();
        for (i, a) in monomials.iter().enumerate() {
            for (j, b) in monomials.iter().enumerate() {
                if degree[i] + degree[j] > order {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                products.push((i as u32, j as u32, index[&sum] as u32));
            }
        }

        let mut derivatives = Vec::with_capacity(nvars);
        for v in 0..nvars {
            let mut table = Vec::new();
            if order > 0 {
                for (dst, m) in monomials.iter().enumerate() {
                    if degree[dst] + 1 > order {
                        continue;
                    }
                    let mut up = m.clone();
                    up[v] += 1;
                    table.push((dst as u32, index[&up] as u32, f64::from(up[v])));
                }
            }
            derivatives.push(table);
        }

        Self {
            nvars,
            order,
            monomials,
            degree,
            index,
            products,
            derivatives,
        }
    }

    /// Cached layout for `(nvars, order)`.
    pub fn get(nvars: usize, order: usize) -> &'static JetLayout {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        static REGISTRY: OnceLock<Mutex<HashMap<(usize, usize), &'static JetLayout>>> = OnceLock::new();
        let registry = REGISTRY.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = registry.lock().expect("jet layout registry poisoned");
        guard
            .entry((nvars, order))
            .or_insert_with(|| Box::leak(Box::new(JetLayout::build(nvars, order))))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomial(&self, i: usize) -> &[u8] {
        &self.monomials[i]
    }

    pub fn index_of(&self, exponents: &[u8]) -> Option<usize> {
        self.index.get(exponents).copied()
    }

    fn count_up_to(&self, order: usize) -> usize {
        self.degree.iter().take_while(|&&d| d <= order).count()
    }
}

fn enumerate_degree(nvars: usize, remaining: usize, pos: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if nvars == 0 {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if pos == nvars - 1 {
        cur[pos] = remaining as u8;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        cur[pos] = k as u8;
        enumerate_degree(nvars, remaining - k, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

/// Truncated Taylor expansion of a scalar function.
#[derive(Clone)]
pub struct Jet {
    layout: &'static JetLayout,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.layout.nvars)
            .field("order", &self.layout.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Jet {
    pub fn constant(nvars: usize, order: usize, value: f64) -> Self {
        let layout = JetLayout::get(nvars, order);
        let mut coeffs = vec![0.0; layout.len()];
        coeffs[0] = value;
        Self { layout, coeffs }
    }

    /// The coordinate function `x_var` expanded about `value`.
    pub fn variable(nvars: usize, order: usize, var: usize, value: f64) -> Self {
        let mut jet = Self::constant(nvars, order, value);
        if order > 0 {
            jet.coeffs[1 + var] = 1.0;
        }
        jet
    }

    /// Seeded coordinate jets for the point `x`.
    pub fn seeds(x: &[f64], order: usize) -> Vec<Jet> {
        (0..x.len()).map(|i| Self::variable(x.len(), order, i, x[i])).collect()
    }

    pub fn from_coeffs(nvars: usize, order: usize, coeffs: Vec<f64>) -> Self {
        let layout = JetLayout::get(nvars, order);
        assert_eq!(coeffs.len(), layout.len(), "coefficient count mismatch");
        Self { layout, coeffs }
    }

    /// A constant with the same variable count and order as `self`.
    pub fn lift_const(&self, value: f64) -> Self {
        Self::constant(self.layout.nvars, self.layout.order, value)
    }

    pub fn zero_like(&self) -> Self {
        self.lift_const(0.0)
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Partial derivative with respect to variable `i` at the base point.
    pub fn d1(&self, i: usize) -> f64 {
        assert!(self.order() >= 1, "first derivative of an order-0 jet");
        self.coeffs[1 + i]
    }

    /// Mixed second partial `∂_i ∂_j` at the base point.
    pub fn d2(&self, i: usize, j: usize) -> f64 {
        self.partial(&[i, j])
    }

    /// Mixed partial derivative along the listed variables at the base point.
    pub fn partial(&self, vars: &[usize]) -> f64 {
        assert!(vars.len() <= self.order(), "derivative order exceeds jet order");
        let mut exps = vec![0u8; self.nvars()];
        for &v in vars {
            exps[v] += 1;
        }
        let idx = self.layout.index_of(&exps).expect("monomial in layout");
        let factorial: f64 = exps
            .iter()
            .map(|&e| (1..=u32::from(e)).product::<u32>() as f64)
            .product();
        self.coeffs[idx] * factorial
    }

    /// Gradient at the base point.
    pub fn gradient(&self) -> Vec<f64> {
        (0..self.nvars()).map(|i| self.d1(i)).collect()
    }

    /// Derivative jet `∂_var f`, one order lower.
    pub fn diff(&self, var: usize) -> Self {
        assert!(self.order() >= 1, "cannot differentiate an order-0 jet");
        let layout = JetLayout::get(self.nvars(), self.order() - 1);
        let mut coeffs = vec![0.0; layout.len()];
        for &(dst, src, factor) in &self.layout.derivatives[var] {
            coeffs[dst as usize] = factor * self.coeffs[src as usize];
        }
        Self { layout, coeffs }
    }

    /// Drop to a lower truncation order.
    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.order() {
            return self.clone();
        }
        let layout = JetLayout::get(self.nvars(), order);
        let n = self.layout.count_up_to(order);
        Self {
            layout,
            coeffs: self.coeffs[..n].to_vec(),
        }
    }

    /// Restriction to the slice `x_var = base value`: removes the variable.
    pub fn restrict(&self, var: usize) -> Self {
        let layout = JetLayout::get(self.nvars() - 1, self.order());
        let mut coeffs = vec![0.0; layout.len()];
        for (i, m) in layout.monomials.iter().enumerate() {
            let mut full = Vec::with_capacity(m.len() + 1);
            full.extend_from_slice(&m[..var]);
            full.push(0);
            full.extend_from_slice(&m[var..]);
            coeffs[i] = self.coeffs[self.layout.index[&full]];
        }
        Self { layout, coeffs }
    }

    /// Inserts a new variable at position `var` on which the jet does not depend.
    pub fn lift(&self, var: usize) -> Self {
        let layout = JetLayout::get(self.nvars() + 1, self.order());
        let mut coeffs = vec![0.0; layout.len()];
        for (i, m) in self.layout.monomials.iter().enumerate() {
            let mut full = Vec::with_capacity(m.len() + 1);
            full.extend_from_slice(&m[..var]);
            full.push(0);
            full.extend_from_slice(&m[var..]);
            coeffs[layout.index[&full]] = self.coeffs[i];
        }
        Self { layout, coeffs }
    }

    /// `Σ_k derivs[k] / k! · h^k` where `h = self − value`.
    ///
    /// `derivs[k]` is the k-th derivative of the outer function at `self.value()`.
    pub fn compose(&self, derivs: &[f64]) -> Self {
        let order = self.order();
        assert!(derivs.len() > order, "need {} derivatives", order + 1);
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut out = self.lift_const(derivs[0]);
        let mut power = self.lift_const(1.0);
        let mut factorial = 1.0;
        for (k, d) in derivs.iter().enumerate().take(order + 1).skip(1) {
            power = &power * &h;
            factorial *= k as f64;
            out.axpy(d / factorial, &power);
        }
        out
    }

    fn axpy(&mut self, a: f64, other: &Jet) {
        let n = self.coeffs.len().min(other.coeffs.len());
        for i in 0..n {
            self.coeffs[i] += a * other.coeffs[i];
        }
    }

    pub fn recip(&self) -> Self {
        let v = self.value();
        let mut derivs = Vec::with_capacity(self.order() + 1);
        let mut d = 1.0 / v;
        for k in 0..=self.order() {
            derivs.push(d);
            d *= -((k + 1) as f64) / v;
        }
        self.compose(&derivs)
    }

    pub fn sqrt(&self) -> Self {
        let v = self.value();
        let mut derivs = Vec::with_capacity(self.order() + 1);
        let mut d = v.sqrt();
        let mut p = 0.5;
        for _ in 0..=self.order() {
            derivs.push(d);
            d *= p / v;
            p -= 1.0;
        }
        self.compose(&derivs)
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&vec![e; self.order() + 1])
    }

    pub fn ln(&self) -> Self {
        let v = self.value();
        let mut derivs = vec![v.ln()];
        let mut d = 1.0 / v;
        for k in 1..=self.order() {
            derivs.push(d);
            d *= -(k as f64) / v;
        }
        self.compose(&derivs)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let derivs: Vec<f64> = (0..=self.order()).map(|k| cycle[k % 4]).collect();
        self.compose(&derivs)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let derivs: Vec<f64> = (0..=self.order()).map(|k| cycle[k % 4]).collect();
        self.compose(&derivs)
    }

    pub fn powi(&self, n: i32) -> Self {
        if n == 0 {
            return self.lift_const(1.0);
        }
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = &out * self;
        }
        out
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            layout: self.layout,
            coeffs: self.coeffs.iter().map(|c| a * c).collect(),
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

fn check_compatible(a: &Jet, b: &Jet) {
    assert_eq!(a.nvars(), b.nvars(), "jets over different variable counts");
}

fn common<'a>(a: &'a Jet, b: &'a Jet) -> &'static JetLayout {
    check_compatible(a, b);
    if a.order() <= b.order() {
        a.layout
    } else {
        b.layout
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let layout = common(self, rhs);
        let coeffs = (0..layout.len()).map(|i| self.coeffs[i] + rhs.coeffs[i]).collect();
        Jet { layout, coeffs }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let layout = common(self, rhs);
        let coeffs = (0..layout.len()).map(|i| self.coeffs[i] - rhs.coeffs[i]).collect();
        Jet { layout, coeffs }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let layout = common(self, rhs);
        let mut coeffs = vec![0.0; layout.len()];
        for &(i, j, k) in &layout.products {
            coeffs[k as usize] += self.coeffs[i as usize] * rhs.coeffs[j as usize];
        }
        Jet { layout, coeffs }
    }
}

impl Div for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self * &rhs.recip()
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet {
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
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
owned_binop!(Div, div);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += rhs;
        out
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        if rhs.order() < self.order() {
            *self = &*self + rhs;
        } else {
            check_compatible(self, rhs);
            for (c, r) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
                *c += r;
            }
        }
    }
}

impl AddAssign<Jet> for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self += &rhs;
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        if rhs.order() < self.order() {
            *self = &*self - rhs;
        } else {
            check_compatible(self, rhs);
            for (c, r) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
                *c -= r;
            }
        }
    }
}

impl SubAssign<Jet> for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self -= &rhs;
    }
}

/// Sum of the jets in `terms`; `zero` fixes the layout when `terms` is empty.
pub fn sum<'a, I: IntoIterator<Item = &'a Jet>>(zero: &Jet, terms: I) -> Jet {
    let mut acc = zero.clone();
    for t in terms {
        acc += t;
    }
    acc
}

/// Inverse of a square matrix of jets by Gauss–Jordan elimination with
/// partial pivoting on the base values. Returns `None` when singular.
pub fn invert(mat: &[Jet], n: usize) -> Option<Vec<Jet>> {
    assert_eq!(mat.len(), n * n);
    let mut a: Vec<Jet> = mat.to_vec();
    let zero = a[0].zero_like();
    let one = a[0].lift_const(1.0);
    let mut inv: Vec<Jet> = (0..n * n)
        .map(|k| if k / n == k % n { one.clone() } else { zero.clone() })
        .collect();
    let scale = mat.iter().fold(0.0f64, |m, j| m.max(j.value().abs())).max(1e-300);
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| a[r * n + col].value().abs().total_cmp(&a[s * n + col].value().abs()))?;
        if a[pivot * n + col].value().abs() <= 1e-14 * scale {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
                inv.swap(pivot * n + k, col * n + k);
            }
        }
        let p = a[col * n + col].recip();
        for k in 0..n {
            a[col * n + k] = &a[col * n + k] * &p;
            inv[col * n + k] = &inv[col * n + k] * &p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col].clone();
            if f.max_abs_coeff() == 0.0 {
                continue;
            }
            for k in 0..n {
                let t = &f * &a[col * n + k];
                a[r * n + k] -= t;
                let t = &f * &inv[col * n + k];
                inv[r * n + k] -= t;
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn layout_sizes() {
        // C(n + k, k) monomials
        assert_eq!(JetLayout::get(3, 3).len(), 20);
        assert_eq!(JetLayout::get(6, 2).len(), 28);
        assert_eq!(JetLayout::get(7, 3).len(), 120);
    }

    #[test]
    fn lower_order_is_prefix() {
        let hi = JetLayout::get(4, 3);
        let lo = JetLayout::get(4, 2);
        for i in 0..lo.len() {
            assert_eq!(hi.monomial(i), lo.monomial(i));
        }
    }

    #[test]
    fn univariate_series() {
        let x = Jet::variable(1, 3, 0, 0.0);
        let e = x.exp();
        assert_relative_eq!(e.coeffs()[3], 1.0 / 6.0, epsilon = 1e-15);
        let s = x.sin();
        assert_relative_eq!(s.coeffs()[3], -1.0 / 6.0, epsilon = 1e-15);
        let r = (&x + 1.0).recip();
        assert_relative_eq!(r.coeffs()[2], 1.0, epsilon = 1e-15);
        assert_relative_eq!(r.coeffs()[3], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn mixed_partials_of_product() {
        // f = x² y sin(z) at (1, 2, 0.3)
        let s = Jet::seeds(&[1.0, 2.0, 0.3], 3);
        let f = &(&(&s[0] * &s[0]) * &s[1]) * &s[2].sin();
        assert_relative_eq!(f.d2(0, 1), 2.0 * 0.3f64.sin(), epsilon = 1e-14);
        assert_relative_eq!(f.partial(&[0, 0, 2]), 2.0 * 2.0 * 0.3f64.cos(), epsilon = 1e-14);
        assert_relative_eq!(f.partial(&[0, 1, 2]), 2.0 * 0.3f64.cos(), epsilon = 1e-14);
        assert_relative_eq!(f.d2(0, 1), f.d2(1, 0));
    }

    #[test]
    fn diff_matches_partials() {
        let s = Jet::seeds(&[0.4, -0.7], 3);
        let f = (&s[0] * &s[1]).exp() + s[0].sqrt();
        let fx = f.diff(0);
        assert_eq!(fx.order(), 2);
        assert_relative_eq!(fx.d2(0, 1), f.partial(&[0, 0, 1]), epsilon = 1e-13);
        assert_relative_eq!(fx.d1(1), f.d2(0, 1), epsilon = 1e-13);
    }

    #[test]
    fn restrict_and_lift() {
        let s = Jet::seeds(&[0.2, 0.5, -0.1], 2);
        let f = &(&s[0] * &s[2]) + &s[1].cos();
        let r = f.restrict(1);
        assert_eq!(r.nvars(), 2);
        assert_relative_eq!(r.d2(0, 1), 1.0, epsilon = 1e-15);
        let l = r.lift(1);
        assert_eq!(l.d1(1), 0.0);
        assert_relative_eq!(l.d2(0, 2), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn invert_jet_matrix() {
        let s = Jet::seeds(&[0.3, 0.8], 2);
        let one = s[0].lift_const(1.0);
        let m = vec![&one + &s[0], s[1].clone(), s[1].clone(), &one + &(&s[0] * &s[0])];
        let inv = invert(&m, 2).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = one.zero_like();
                for k in 0..2 {
                    acc += &m[i * 2 + k] * &inv[k * 2 + j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((acc.value() - target).abs() < 1e-14);
                assert!(acc.d1(0).abs() < 1e-13 && acc.d2(0, 1).abs() < 1e-13);
            }
        }
    }
}
