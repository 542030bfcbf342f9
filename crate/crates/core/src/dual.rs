//! Forward-mode dual numbers.
//!
//! `Dual<T>` carries a value and one infinitesimal part. Nesting
//! (`Dual<Dual<f64>>`, `Dual<Dual<Dual<f64>>>`) gives exact mixed partial
//! derivatives up to third order, which is what the curvature code needs
//! for metric components and their derivatives.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar arithmetic shared by `f64` and every dual-number nesting.
pub trait Real:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    /// The plain real part, stripped of every infinitesimal.
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn tan(self) -> Self {
        self.sin() / self.cos()
    }
    fn tanh(self) -> Self {
        self.sinh() / self.cosh()
    }

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        let mut base = if n < 0 { Self::one() / self } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    fn powf(self, p: Self) -> Self {
        (p * self.ln()).exp()
    }

    fn scale(self, s: f64) -> Self {
        self * Self::from_f64(s)
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, p: Self) -> Self {
        f64::powf(self, p)
    }
}

/// `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Real> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Self { re, eps }
    }

    pub fn constant(re: T) -> Self {
        Self {
            re,
            eps: T::zero(),
        }
    }

    pub fn variable(re: T) -> Self {
        Self { re, eps: T::one() }
    }

    // f(re + eps ε) = f(re) + f'(re) eps ε
    fn chain(self, f: T, df: T) -> Self {
        Self {
            re: f,
            eps: df * self.eps,
        }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = T::one() / o.re;
        let re = self.re * inv;
        Self::new(re, (self.eps - re * o.eps) * inv)
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.eps)
    }
}

impl<T: Real> Real for Dual<T> {
    fn from_f64(v: f64) -> Self {
        Self::constant(T::from_f64(v))
    }
    fn value(&self) -> f64 {
        self.re.value()
    }
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn sinh(self) -> Self {
        self.chain(self.re.sinh(), self.re.cosh())
    }
    fn cosh(self) -> Self {
        self.chain(self.re.cosh(), self.re.sinh())
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.re.ln(), T::one() / self.re)
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, T::one() / (s + s))
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        let prev = self.re.powi(n - 1);
        self.chain(prev * self.re, prev.scale(n as f64))
    }
}

pub type Dual2 = Dual<Dual<f64>>;
pub type Dual3 = Dual<Dual<Dual<f64>>>;

/// Seeds a coordinate vector for a first derivative along axis `a`.
pub fn seed1(p: &[f64], a: usize) -> Vec<Dual<f64>> {
    p.iter()
        .enumerate()
        .map(|(i, &x)| Dual::new(x, if i == a { 1.0 } else { 0.0 }))
        .collect()
}

/// Seeds for the mixed partial along axes `a` then `b`.
pub fn seed2(p: &[f64], a: usize, b: usize) -> Vec<Dual2> {
    p.iter()
        .enumerate()
        .map(|(i, &x)| {
            let inner = Dual::new(x, if i == a { 1.0 } else { 0.0 });
            let outer = Dual::from_f64(if i == b { 1.0 } else { 0.0 });
            Dual::new(inner, outer)
        })
        .collect()
}

/// Seeds for the mixed partial along axes `a`, `b`, `c`.
pub fn seed3(p: &[f64], a: usize, b: usize, c: usize) -> Vec<Dual3> {
    p.iter()
        .enumerate()
        .map(|(i, &x)| {
            let l1 = Dual::new(x, if i == a { 1.0 } else { 0.0 });
            let l2 = Dual::new(l1, Dual::from_f64(if i == b { 1.0 } else { 0.0 }));
            Dual::new(l2, Dual2::from_f64(if i == c { 1.0 } else { 0.0 }))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn first_derivative_of_product_and_transcendentals() {
        let x = Dual::variable(0.7);
        let f = x.sin() * x.exp();
        let expected = 0.7f64.cos() * 0.7f64.exp() + 0.7f64.sin() * 0.7f64.exp();
        assert_relative_eq!(f.eps, expected, epsilon = 1e-15);
    }

    #[test]
    fn nested_duals_give_mixed_partials() {
        // f(x, y) = x^2 y^3 ; f_xy = 6 x y^2 ; f_xyy = 12 x y
        let p = [1.5, -0.5];
        let f = |v: &[Dual3]| v[0].powi(2) * v[1].powi(3);
        let d = f(&seed3(&p, 0, 1, 1));
        assert_relative_eq!(d.eps.eps.eps, 12.0 * 1.5 * -0.5, epsilon = 1e-14);
        let d2 = {
            let v = seed2(&p, 0, 1);
            v[0].powi(2) * v[1].powi(3)
        };
        assert_relative_eq!(d2.eps.eps, 6.0 * 1.5 * 0.25, epsilon = 1e-14);
    }

    #[test]
    fn quotient_and_sqrt() {
        let x = Dual::variable(2.0);
        let f = x.sqrt() / (x + Dual::from_f64(1.0));
        // d/dx sqrt(x)/(x+1) = (1/(2 sqrt x)(x+1) - sqrt x)/(x+1)^2
        let s = 2.0f64.sqrt();
        let expected = (3.0 / (2.0 * s) - s) / 9.0;
        assert_relative_eq!(f.eps, expected, epsilon = 1e-15);
    }
}
