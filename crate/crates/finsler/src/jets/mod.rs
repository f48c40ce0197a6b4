//! Truncated multivariate Taylor arithmetic ("jets").
//!
//! A [`Jet`] holds every partial derivative of a scalar function at a point up
//! to a fixed total order (at most [`MAX_ORDER`]), stored as Taylor
//! coefficients: the coefficient of multi-index `m` is `∂^m f / m!`. Sums,
//! products, and composition with analytic functions propagate derivatives
//! exactly — no truncation error beyond the order cap and no finite-difference
//! step to tune. Everything downstream (metric tensors, sprays, curvature)
//! reads its derivatives out of jets.
//!
//! Coefficient layout is graded lexicographic; see [`shape`] for the exact
//! ordering contract.

mod shape;

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
pub use shape::MAX_ORDER;
use shape::JetShape;

/// Taylor expansion of a scalar function, truncated at a total order.
#[derive(Clone)]
pub struct Jet {
    shape: Arc<JetShape>,
    coeffs: Vec<f64>,
}

impl Jet {
    /// The constant function `value`.
    pub fn constant(num_vars: usize, order: usize, value: f64) -> Jet {
        let shape = JetShape::get(num_vars, order);
        let mut coeffs = vec![0.0; shape.len()];
        coeffs[0] = value;
        Jet { shape, coeffs }
    }

    /// The coordinate function `var`, expanded around `value`.
    pub fn variable(num_vars: usize, order: usize, var: usize, value: f64) -> Jet {
        assert!(var < num_vars, "variable index {var} out of range");
        let mut jet = Jet::constant(num_vars, order, value);
        if order >= 1 {
            // Degree-1 coefficients sit right after the constant, in
            // graded-lex order: the slot for e_var is at 1 + (num_vars-1-var).
            jet.coeffs[1 + (num_vars - 1 - var)] = 1.0;
        }
        jet
    }

    /// All coordinate functions expanded around `point`.
    pub fn variables(num_vars: usize, order: usize, point: &[f64]) -> Vec<Jet> {
        assert_eq!(point.len(), num_vars);
        (0..num_vars)
            .map(|v| Jet::variable(num_vars, order, v, point[v]))
            .collect()
    }

    pub fn num_vars(&self) -> usize {
        self.shape.num_vars
    }

    pub fn order(&self) -> usize {
        self.shape.order
    }

    /// Value of the function at the expansion point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Raw Taylor coefficients in graded-lex order.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Partial derivative `∂^m f` (not the Taylor coefficient: the factorial
    /// is multiplied back in).
    pub fn partial(&self, m: &[usize]) -> Result<f64> {
        if m.len() != self.num_vars() {
            return Err(Error::Dimension { expected: self.num_vars(), got: m.len() });
        }
        let degree: usize = m.iter().sum();
        if degree > self.order() {
            return Err(Error::DegreeExceedsOrder { degree, order: self.order() });
        }
        let idx: Vec<u8> = m.iter().map(|&e| e as u8).collect();
        let pos = self.shape.position(&idx).expect("degree already checked");
        let factorial: f64 = m.iter().map(|&e| (1..=e).product::<usize>() as f64).product();
        Ok(self.coeffs[pos] * factorial)
    }

    /// Exact partial derivative with respect to `var`, as a jet one order
    /// lower. Requires `order >= 1`.
    pub fn derivative(&self, var: usize) -> Jet {
        assert!(self.order() >= 1, "cannot differentiate an order-0 jet");
        assert!(var < self.num_vars());
        let out_shape = JetShape::get(self.num_vars(), self.order() - 1);
        let mut coeffs = vec![0.0; out_shape.len()];
        let mut bumped = vec![0u8; self.num_vars()];
        for (i, m) in out_shape.indices.iter().enumerate() {
            bumped.copy_from_slice(m);
            bumped[var] += 1;
            let src = self.shape.position(&bumped).expect("bumped index within order");
            coeffs[i] = self.coeffs[src] * f64::from(bumped[var]);
        }
        Jet { shape: out_shape, coeffs }
    }

    /// Drop all coefficients of total degree above `order`.
    pub fn truncated(&self, order: usize) -> Jet {
        assert!(order <= self.order(), "cannot extend a jet by truncation");
        if order == self.order() {
            return self.clone();
        }
        let out_shape = JetShape::get(self.num_vars(), order);
        let keep = self.shape.len_through_degree[order];
        debug_assert_eq!(keep, out_shape.len());
        Jet { shape: out_shape, coeffs: self.coeffs[..keep].to_vec() }
    }

    pub fn scale(&self, factor: f64) -> Jet {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= factor;
        }
        out
    }

    pub fn plus(&self, constant: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += constant;
        out
    }

    /// `self / other`. Errors if `other` has zero constant term.
    pub fn div(&self, other: &Jet) -> Result<Jet> {
        Ok(self * &other.recip()?)
    }

    /// `1 / self`. Errors if the constant term is zero.
    pub fn recip(&self) -> Result<Jet> {
        let u0 = self.value();
        if u0 == 0.0 {
            return Err(Error::DivisionByZeroJet);
        }
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut c = 1.0 / u0;
        for _ in 0..=self.order() {
            series.push(c);
            c = -c / u0;
        }
        Ok(self.compose(&series))
    }

    /// Square root; the constant term must be positive.
    pub fn sqrt(&self) -> Result<Jet> {
        self.powf_named(0.5, "sqrt")
    }

    /// Real power `self^alpha`; the constant term must be positive.
    pub fn powf(&self, alpha: f64) -> Result<Jet> {
        self.powf_named(alpha, "powf")
    }

    fn powf_named(&self, alpha: f64, func: &'static str) -> Result<Jet> {
        let u0 = self.value();
        if u0 <= 0.0 {
            return Err(Error::BadFunctionDomain { func, value: u0 });
        }
        // c_k = binom(alpha, k) * u0^(alpha - k)
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut c = u0.powf(alpha);
        for k in 0..=self.order() {
            series.push(c);
            c *= (alpha - k as f64) / ((k + 1) as f64 * u0);
        }
        Ok(self.compose(&series))
    }

    /// Integer power by repeated multiplication; negative exponents go
    /// through [`Jet::recip`].
    pub fn powi(&self, n: i32) -> Result<Jet> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut out = Jet::constant(self.num_vars(), self.order(), 1.0);
        for _ in 0..n {
            out = &out * self;
        }
        Ok(out)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut c = e;
        for k in 0..=self.order() {
            series.push(c);
            c /= (k + 1) as f64;
        }
        self.compose(&series)
    }

    /// Natural log; the constant term must be positive.
    pub fn ln(&self) -> Result<Jet> {
        let u0 = self.value();
        if u0 <= 0.0 {
            return Err(Error::BadFunctionDomain { func: "ln", value: u0 });
        }
        let mut series = Vec::with_capacity(self.order() + 1);
        series.push(u0.ln());
        let mut c = 1.0 / u0;
        for k in 1..=self.order() {
            series.push(c / k as f64);
            c = -c / u0;
        }
        Ok(self.compose(&series))
    }

    pub fn sin(&self) -> Jet {
        self.circular(self.value().sin(), self.value().cos())
    }

    pub fn cos(&self) -> Jet {
        self.circular(self.value().cos(), -self.value().sin())
    }

    fn circular(&self, f0: f64, f1: f64) -> Jet {
        // Derivatives cycle with period 4: f, f', -f, -f'.
        let cycle = [f0, f1, -f0, -f1];
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut factorial = 1.0;
        for k in 0..=self.order() {
            if k > 0 {
                factorial *= k as f64;
            }
            series.push(cycle[k % 4] / factorial);
        }
        self.compose(&series)
    }

    /// Evaluate a univariate Taylor series (coefficients around `self`'s
    /// constant term) at `self`. Horner on the constant-free part terminates
    /// exactly because that part is nilpotent under truncation.
    fn compose(&self, series: &[f64]) -> Jet {
        debug_assert_eq!(series.len(), self.order() + 1);
        let mut w = self.clone();
        w.coeffs[0] = 0.0;
        let mut acc = Jet::constant(self.num_vars(), self.order(), series[self.order()]);
        for k in (0..self.order()).rev() {
            acc = &acc * &w;
            acc.coeffs[0] += series[k];
        }
        acc
    }

    fn assert_same_shape(&self, other: &Jet) {
        assert!(
            Arc::ptr_eq(&self.shape, &other.shape),
            "jet shape mismatch: ({}, {}) vs ({}, {})",
            self.num_vars(),
            self.order(),
            other.num_vars(),
            other.order()
        );
    }
}

/// Expand a scalar field at `point` to the requested order by evaluating it
/// on coordinate jets.
pub fn lift<F>(field: F, point: &[f64], order: usize) -> Result<Jet>
where
    F: FnOnce(&[Jet]) -> Result<Jet>,
{
    if order > MAX_ORDER {
        return Err(Error::OrderTooHigh { requested: order, max: MAX_ORDER });
    }
    let vars = Jet::variables(point.len(), order, point);
    field(&vars)
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.assert_same_shape(rhs);
        let mut out = self.clone();
        for (c, r) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *c += r;
        }
        out
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.assert_same_shape(rhs);
        let mut out = self.clone();
        for (c, r) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *c -= r;
        }
        out
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.assert_same_shape(rhs);
        let mut coeffs = vec![0.0; self.shape.len()];
        for &(a, b, c) in &self.shape.mul_pairs {
            coeffs[c as usize] += self.coeffs[a as usize] * rhs.coeffs[b as usize];
        }
        Jet { shape: self.shape.clone(), coeffs }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        &self + &rhs
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        &self - &rhs
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        &self * &rhs
    }
}

impl std::fmt::Debug for Jet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Jet")
            .field("num_vars", &self.num_vars())
            .field("order", &self.order())
            .field("coeffs", &self.coeffs)
            .finish()
    }
}
