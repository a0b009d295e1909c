//! Forward-mode dual numbers with a fixed-size gradient.
//!
//! Device equations are written once over [`Dual`] and yield exact first
//! partials with respect to every seeded input.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::smooth::{SmoothParams, ValDer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<const N: usize> {
    pub value: f64,
    pub grad: [f64; N],
}

impl<const N: usize> Dual<N> {
    pub const fn constant(value: f64) -> Self {
        Self {
            value,
            grad: [0.0; N],
        }
    }

    /// The `index`-th independent input.
    pub fn seed(value: f64, index: usize) -> Self {
        let mut grad = [0.0; N];
        grad[index] = 1.0;
        Self { value, grad }
    }

    /// Compose with a scalar function given as value/derivative at `self.value`.
    pub fn chain(self, f: ValDer) -> Self {
        Self {
            value: f.value,
            grad: self.grad.map(|g| g * f.deriv),
        }
    }

    pub fn d(&self, index: usize) -> f64 {
        self.grad[index]
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.grad.iter().all(|g| g.is_finite())
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(ValDer::new(e, e))
    }

    pub fn sinh(self) -> Self {
        self.chain(ValDer::new(self.value.sinh(), self.value.cosh()))
    }

    pub fn tanh(self) -> Self {
        let t = self.value.tanh();
        self.chain(ValDer::new(t, 1.0 - t * t))
    }

    pub fn powi(self, n: i32) -> Self {
        let deriv = if n == 0 {
            0.0
        } else {
            f64::from(n) * self.value.powi(n - 1)
        };
        self.chain(ValDer::new(self.value.powi(n), deriv))
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.value;
        self.chain(ValDer::new(r, -r * r))
    }

    pub fn smoothstep(self, p: &SmoothParams) -> Self {
        self.chain(p.smoothstep(self.value))
    }

    pub fn smoothclip(self, p: &SmoothParams) -> Self {
        self.chain(p.smoothclip(self.value))
    }

    pub fn safeexp(self, p: &SmoothParams) -> Self {
        self.chain(p.safeexp(self.value))
    }

    pub fn safesinh(self, p: &SmoothParams) -> Self {
        self.chain(p.safesinh(self.value))
    }

    pub fn safelog(self, p: &SmoothParams) -> Self {
        self.chain(p.safelog(self.value))
    }

    /// `safeexp(b * safelog(self))`.
    pub fn safepow(self, b: Self, p: &SmoothParams) -> Self {
        (b * self.safelog(p)).safeexp(p)
    }

    /// `f_neg + (f_pos - f_neg) * smoothstep(x)`.
    pub fn smoothswitch(f_neg: Self, f_pos: Self, x: Self, p: &SmoothParams) -> Self {
        f_neg + (f_pos - f_neg) * x.smoothstep(p)
    }
}

impl<const N: usize> From<f64> for Dual<N> {
    fn from(value: f64) -> Self {
        Self::constant(value)
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut grad = self.grad;
        grad.iter_mut().zip(rhs.grad).for_each(|(a, b)| *a += b);
        Self {
            value: self.value + rhs.value,
            grad,
        }
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut grad = self.grad;
        grad.iter_mut().zip(rhs.grad).for_each(|(a, b)| *a -= b);
        Self {
            value: self.value - rhs.value,
            grad,
        }
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut grad = [0.0; N];
        for (i, g) in grad.iter_mut().enumerate() {
            *g = self.grad[i] * rhs.value + self.value * rhs.grad[i];
        }
        Self {
            value: self.value * rhs.value,
            grad,
        }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            value: -self.value,
            grad: self.grad.map(|g| -g),
        }
    }
}

impl<const N: usize> Add<f64> for Dual<N> {
    type Output = Self;
    fn add(self, rhs: f64) -> Self {
        Self {
            value: self.value + rhs,
            grad: self.grad,
        }
    }
}

impl<const N: usize> Sub<f64> for Dual<N> {
    type Output = Self;
    fn sub(self, rhs: f64) -> Self {
        Self {
            value: self.value - rhs,
            grad: self.grad,
        }
    }
}

impl<const N: usize> Mul<f64> for Dual<N> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self {
            value: self.value * rhs,
            grad: self.grad.map(|g| g * rhs),
        }
    }
}

impl<const N: usize> Div<f64> for Dual<N> {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        Self {
            value: self.value / rhs,
            grad: self.grad.map(|g| g / rhs),
        }
    }
}

impl<const N: usize> Add<Dual<N>> for f64 {
    type Output = Dual<N>;
    fn add(self, rhs: Dual<N>) -> Dual<N> {
        rhs + self
    }
}

impl<const N: usize> Sub<Dual<N>> for f64 {
    type Output = Dual<N>;
    fn sub(self, rhs: Dual<N>) -> Dual<N> {
        -rhs + self
    }
}

impl<const N: usize> Mul<Dual<N>> for f64 {
    type Output = Dual<N>;
    fn mul(self, rhs: Dual<N>) -> Dual<N> {
        rhs * self
    }
}

impl<const N: usize> Div<Dual<N>> for f64 {
    type Output = Dual<N>;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Dual<N>) -> Dual<N> {
        rhs.recip() * self
    }
}
