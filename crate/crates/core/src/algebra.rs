//! The commutative unital C*-algebra `A = C^d` with pointwise operations.
//!
//! Elements carry their component count; `d = 1` recovers plain complex
//! scalars. The norm is the sup norm over components, the involution is
//! componentwise conjugation, and the order is the componentwise positive
//! cone, which together realise the C*-structure every frame inequality
//! below is phrased in.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, DEFAULT_TOL};

/// Descriptor of the algebra: the number of components of `C^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Algebra {
    pub d: usize,
}

impl Algebra {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::ValidationFailed("algebra needs d >= 1".into()));
        }
        Ok(Algebra { d })
    }

    pub fn unit(&self) -> AlgebraElement {
        AlgebraElement::unit(self.d)
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement::zero(self.d)
    }
}

/// An element of `C^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    values: Vec<Complex64>,
}

impl AlgebraElement {
    pub fn new(values: Vec<Complex64>) -> Self {
        assert!(!values.is_empty(), "algebra elements need d >= 1");
        AlgebraElement { values }
    }

    pub fn from_reals(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Constant element `x * 1_A`.
    pub fn constant(d: usize, x: f64) -> Self {
        Self::new(vec![Complex64::new(x, 0.0); d])
    }

    pub fn unit(d: usize) -> Self {
        Self::constant(d, 1.0)
    }

    pub fn zero(d: usize) -> Self {
        Self::constant(d, 0.0)
    }

    pub fn d(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn component(&self, t: usize) -> Complex64 {
        self.values[t]
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.d() != other.d() {
            return Err(Error::DescriptorMismatch(self.d(), other.d()));
        }
        Ok(())
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.check(other)?;
        Ok(Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    /// The involution `a*`: componentwise complex conjugation.
    pub fn star(&self) -> Self {
        Self::new(self.values.iter().map(|z| z.conj()).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a * b)
    }

    pub fn scale(&self, x: f64) -> Self {
        Self::new(self.values.iter().map(|&z| z * x).collect())
    }

    /// Componentwise reciprocal; fails when any component sits within
    /// `tol` of zero.
    pub fn inv(&self, tol: f64) -> Result<Self> {
        for (t, z) in self.values.iter().enumerate() {
            if z.norm() <= tol {
                return Err(Error::NotInvertible {
                    component: t,
                    modulus: z.norm(),
                });
            }
        }
        Ok(Self::new(self.values.iter().map(|z| z.inv()).collect()))
    }

    /// C*-norm of `l^inf`: the largest component modulus.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Positivity: self-adjoint with spectrum in the nonnegative reals,
    /// i.e. `|Im| <= tol` and `Re >= -tol` in every component.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.values
            .iter()
            .all(|z| z.im.abs() <= tol && z.re >= -tol)
    }

    /// The partial order `self <= other`, decided as positivity of the
    /// difference.
    pub fn leq(&self, other: &Self, tol: f64) -> Result<bool> {
        Ok(other.sub(self)?.is_positive(tol))
    }

    /// Componentwise nonnegative square root of a positive element.
    pub fn sqrt_pos(&self) -> Result<Self> {
        if !self.is_positive(DEFAULT_TOL) {
            return Err(Error::NotPositive);
        }
        Ok(Self::new(
            self.values
                .iter()
                .map(|z| Complex64::new(z.re.max(0.0).sqrt(), 0.0))
                .collect(),
        ))
    }

    /// `|a| = (a* a)^{1/2}`: the componentwise modulus.
    pub fn abs_alg(&self) -> Self {
        Self::new(
            self.values
                .iter()
                .map(|z| Complex64::new(z.norm(), 0.0))
                .collect(),
        )
    }

    /// Strictly nonzero in the sense used by frame bounds: positive and
    /// invertible, i.e. every component real and `> tol`.
    pub fn is_strictly_nonzero(&self, tol: f64) -> bool {
        self.is_positive(tol) && self.values.iter().all(|z| z.re > tol)
    }

    /// Largest real part over components (for positive elements, the norm).
    pub fn max_re(&self) -> f64 {
        self.values.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_re(&self) -> f64 {
        self.values.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }
}

/// l2 norm of a finite sequence of algebra elements:
/// `|| sum_i a_i a_i* ||^{1/2}`.
pub fn sequence_l2_norm(items: &[AlgebraElement]) -> f64 {
    if items.is_empty() {
        return 0.0;
    }
    let d = items[0].d();
    let mut acc = vec![0.0f64; d];
    for a in items {
        for (t, slot) in acc.iter_mut().enumerate() {
            *slot += a.component(t).norm_sqr();
        }
    }
    acc.iter().cloned().fold(0.0, f64::max).sqrt()
}
