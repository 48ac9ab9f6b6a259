//! Forward-mode dual numbers, nestable for exact second derivatives.
//!
//! Kernels are written once over [`Scalar`] and instantiated with `f64` for
//! plain evaluation, [`Dual`] of `f64` for one directional derivative, and
//! `Dual<Dual<f64>>` for one second-derivative entry per evaluation.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn constant(v: f64) -> Self;
    /// Underlying primal value, stripped of all derivative payload.
    fn value(self) -> f64;
    /// Multiply by a constant.
    fn scale(self, c: f64) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn powf(self, e: f64) -> Self;

    fn zero() -> Self {
        Self::constant(0.0)
    }
    fn one() -> Self {
        Self::constant(1.0)
    }
}

impl Scalar for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn value(self) -> f64 {
        self
    }
    fn scale(self, c: f64) -> Self {
        self * c
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn powf(self, e: f64) -> Self {
        f64::powf(self, e)
    }
}

/// Value plus one derivative direction over any scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<T> {
    pub val: T,
    pub der: T,
}

/// First derivatives: `Dual<f64>`.
pub type Dual1 = Dual<f64>;
/// Second derivatives via forward-over-forward nesting.
pub type Dual2 = Dual<Dual<f64>>;

impl<T: Scalar> Dual<T> {
    pub fn new(val: T, der: T) -> Self {
        Self { val, der }
    }

    /// Constant with zero derivative.
    pub fn lift(val: T) -> Self {
        Self {
            val,
            der: T::zero(),
        }
    }

    /// Variable seeded with unit derivative.
    pub fn seeded(val: T) -> Self {
        Self { val, der: T::one() }
    }
}

impl Dual2 {
    /// Seed for the mixed second derivative d^2 f / (d outer)(d inner):
    /// `outer` marks the variable differentiated by the outer dual, `inner`
    /// by the inner dual. Both may be set for a diagonal entry.
    pub fn seeded2(v: f64, outer: bool, inner: bool) -> Self {
        Dual {
            val: Dual {
                val: v,
                der: if inner { 1.0 } else { 0.0 },
            },
            der: Dual {
                val: if outer { 1.0 } else { 0.0 },
                der: 0.0,
            },
        }
    }

    /// The mixed second derivative carried by this number.
    pub fn second(self) -> f64 {
        self.der.der
    }
    /// First derivative w.r.t. the outer seed.
    pub fn first_outer(self) -> f64 {
        self.der.val
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.val + rhs.val, self.der + rhs.der)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.val - rhs.val, self.der - rhs.der)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.val * rhs.val,
            self.val * rhs.der + self.der * rhs.val,
        )
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q = self.val / rhs.val;
        Self::new(q, (self.der - q * rhs.der) / rhs.val)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.val, -self.der)
    }
}

impl<T: Scalar> AddAssign for Dual<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Scalar> SubAssign for Dual<T> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<T: Scalar> MulAssign for Dual<T> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn constant(v: f64) -> Self {
        Self::lift(T::constant(v))
    }

    fn value(self) -> f64 {
        self.val.value()
    }

    fn scale(self, c: f64) -> Self {
        Self::new(self.val.scale(c), self.der.scale(c))
    }

    fn sqrt(self) -> Self {
        let s = self.val.sqrt();
        Self::new(s, self.der.scale(0.5) / s)
    }

    fn abs(self) -> Self {
        if self.val.value() < 0.0 {
            -self
        } else {
            self
        }
    }

    fn powf(self, e: f64) -> Self {
        let p = self.val.powf(e);
        Self::new(p, (self.der * self.val.powf(e - 1.0)).scale(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f<S: Scalar>(x: S, y: S) -> S {
        // x^2 * sqrt(y) + x / y + |x| * y^1.5
        x * x * y.sqrt() + x / y + x.abs() * y.powf(1.5)
    }

    #[test]
    fn first_derivative_matches_finite_difference() {
        let (x0, y0) = (1.3, 2.7);
        let fx = f(Dual1::seeded(x0), Dual1::lift(y0)).der;
        let h = 1e-6;
        let fd = (f(x0 + h, y0) - f(x0 - h, y0)) / (2.0 * h);
        assert!((fx - fd).abs() < 1e-8, "{fx} vs {fd}");
    }

    #[test]
    fn second_derivative_matches_finite_difference() {
        let (x0, y0) = (0.9, 1.8);
        // d^2 f / dx dy
        let x = Dual2::seeded2(x0, true, false);
        let y = Dual2::seeded2(y0, false, true);
        let fxy = f(x, y).second();
        let h = 1e-4;
        let g = |x: f64, y: f64| f(x, y);
        let fd = (g(x0 + h, y0 + h) - g(x0 + h, y0 - h) - g(x0 - h, y0 + h) + g(x0 - h, y0 - h))
            / (4.0 * h * h);
        assert!((fxy - fd).abs() < 1e-6, "{fxy} vs {fd}");

        // diagonal d^2 f / dx^2
        let x = Dual2::seeded2(x0, true, true);
        let y = Dual2::lift(Dual1::lift(y0));
        let fxx = f(x, y).second();
        let fd2 = (g(x0 + h, y0) - 2.0 * g(x0, y0) + g(x0 - h, y0)) / (h * h);
        assert!((fxx - fd2).abs() < 1e-5, "{fxx} vs {fd2}");
    }

    #[test]
    fn division_and_sqrt_are_exact_on_constants() {
        let a = Dual1::seeded(4.0);
        let s = a.sqrt();
        assert_eq!(s.val, 2.0);
        assert_eq!(s.der, 0.25);
        let q = a / Dual1::lift(2.0);
        assert_eq!(q.val, 2.0);
        assert_eq!(q.der, 0.5);
    }
}
