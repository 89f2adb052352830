//! Truncated Taylor jets of order three.
//!
//! A jet carries `[v, v', v''/2, v'''/6]` at a point. Evaluating a profile on
//! `Jet::variable(r)` yields the value and the first three derivatives exactly,
//! which is what the curvature formulas and the pole limits need.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T> {
    c: [T; 4],
}

impl<T: Real> Jet<T> {
    pub fn constant(v: T) -> Self {
        Self { c: [v, T::zero(), T::zero(), T::zero()] }
    }

    /// The identity map seeded at `r`.
    pub fn variable(r: T) -> Self {
        Self { c: [r, T::one(), T::zero(), T::zero()] }
    }

    pub fn value(&self) -> T {
        self.c[0]
    }

    /// Derivative of order `k` (0..=3).
    pub fn derivative(&self, k: usize) -> T {
        match k {
            0 => self.c[0],
            1 => self.c[1],
            2 => self.c[2] * T::two(),
            3 => self.c[3] * T::lit(6.0),
            _ => panic!("jets carry derivatives up to order 3"),
        }
    }

    /// Applies a scalar function given its value and first three derivatives at `self.value()`.
    fn compose(self, g: [T; 4]) -> Self {
        let [_, a1, a2, a3] = self.c;
        let six = T::lit(6.0);
        // d = a - a0 has no constant term; d^2 and d^3 truncated at order 3.
        let d2_2 = a1 * a1;
        let d2_3 = T::two() * a1 * a2;
        let d3_3 = a1 * a1 * a1;
        Self {
            c: [
                g[0],
                g[1] * a1,
                g[1] * a2 + g[2] * d2_2 / T::two(),
                g[1] * a3 + g[2] * d2_3 / T::two() + g[3] * d3_3 / six,
            ],
        }
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn exp(self) -> Self {
        let e = self.c[0].exp();
        self.compose([e; 4])
    }

    pub fn ln(self) -> Self {
        let x = self.c[0];
        let inv = x.recip();
        self.compose([x.ln(), inv, -inv * inv, T::two() * inv * inv * inv])
    }

    pub fn sinh(self) -> Self {
        let (s, c) = (self.c[0].sinh(), self.c[0].cosh());
        self.compose([s, c, s, c])
    }

    pub fn cosh(self) -> Self {
        let (s, c) = (self.c[0].sinh(), self.c[0].cosh());
        self.compose([c, s, c, s])
    }

    pub fn tanh(self) -> Self {
        let th = self.c[0].tanh();
        let sech2 = T::one() - th * th;
        self.compose([
            th,
            sech2,
            -T::two() * th * sech2,
            T::two() * sech2 * (T::two() * th * th - sech2),
        ])
    }

    pub fn sqrt(self) -> Self {
        let x = self.c[0];
        let s = x.sqrt();
        let d1 = T::half() / s;
        let d2 = -d1 / (T::two() * x);
        let d3 = -T::lit(1.5) * d2 / x;
        self.compose([s, d1, d2, d3])
    }

    pub fn recip(self) -> Self {
        let x = self.c[0];
        let inv = x.recip();
        let inv2 = inv * inv;
        self.compose([inv, -inv2, T::two() * inv2 * inv, -T::lit(6.0) * inv2 * inv2])
    }

    /// Real power with a constant exponent; requires a positive base unless
    /// the exponent is an integer.
    pub fn powf(self, p: f64) -> Self {
        if p.fract() == 0.0 && p.abs() <= 64.0 {
            return self.powi(p as i32);
        }
        let x = self.c[0];
        let pt = T::lit(p);
        let one = T::one();
        let v = x.powf(pt);
        let d1 = pt * x.powf(pt - one);
        let d2 = pt * (pt - one) * x.powf(pt - T::two());
        let d3 = pt * (pt - one) * (pt - T::two()) * x.powf(pt - T::lit(3.0));
        self.compose([v, d1, d2, d3])
    }

    pub fn powi(self, k: i32) -> Self {
        if k < 0 {
            return self.powi(-k).recip();
        }
        let mut acc = Jet::constant(T::one());
        let mut base = self;
        let mut e = k as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

impl<T: Real> Add for Jet<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { c: [self.c[0] + o.c[0], self.c[1] + o.c[1], self.c[2] + o.c[2], self.c[3] + o.c[3]] }
    }
}

impl<T: Real> Sub for Jet<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { c: [self.c[0] - o.c[0], self.c[1] - o.c[1], self.c[2] - o.c[2], self.c[3] - o.c[3]] }
    }
}

impl<T: Real> Neg for Jet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { c: [-self.c[0], -self.c[1], -self.c[2], -self.c[3]] }
    }
}

impl<T: Real> Mul for Jet<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a, b) = (self.c, o.c);
        Self {
            c: [
                a[0] * b[0],
                a[0] * b[1] + a[1] * b[0],
                a[0] * b[2] + a[1] * b[1] + a[2] * b[0],
                a[0] * b[3] + a[1] * b[2] + a[2] * b[1] + a[3] * b[0],
            ],
        }
    }
}

impl<T: Real> Div for Jet<T> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn sin_derivatives() {
        let r = 0.7_f64;
        let j = Jet::variable(r).sin();
        assert!(close(j.derivative(0), r.sin()));
        assert!(close(j.derivative(1), r.cos()));
        assert!(close(j.derivative(2), -r.sin()));
        assert!(close(j.derivative(3), -r.cos()));
    }

    #[test]
    fn product_and_quotient_rules() {
        // f = r^2 e^r / (1 + r)
        let r = 0.3_f64;
        let x = Jet::variable(r);
        let f = x * x * x.exp() / (Jet::constant(1.0) + x);
        // reference by finite differences of the closed form
        let g = |t: f64| t * t * t.exp() / (1.0 + t);
        let h = 1e-3;
        let d1 = (g(r + h) - g(r - h)) / (2.0 * h);
        let d2 = (g(r + h) - 2.0 * g(r) + g(r - h)) / (h * h);
        let d3 = (g(r + 2.0 * h) - 2.0 * g(r + h) + 2.0 * g(r - h) - g(r - 2.0 * h)) / (2.0 * h * h * h);
        assert!((f.derivative(1) - d1).abs() < 1e-6);
        assert!((f.derivative(2) - d2).abs() < 1e-5);
        assert!((f.derivative(3) - d3).abs() < 1e-4);
    }

    #[test]
    fn powers_and_tanh() {
        let r = 1.3_f64;
        let x = Jet::variable(r);
        let p = x.powf(2.5);
        assert!(close(p.derivative(3), 2.5 * 1.5 * 0.5 * r.powf(-0.5)));
        let q = x.powi(-2);
        assert!(close(q.derivative(2), 6.0 * r.powi(-4)));
        let t = x.tanh();
        let s2 = 1.0 / r.cosh().powi(2);
        assert!(close(t.derivative(1), s2));
        assert!(close(t.derivative(3), -2.0 * s2 * s2 + 4.0 * r.tanh().powi(2) * s2));
        let s = x.sqrt();
        assert!(close(s.derivative(3), 3.0 / 8.0 * r.powf(-2.5)));
    }
}
