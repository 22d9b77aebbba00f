//! Second-order forward-mode jets.
//!
//! A [`Jet2`] carries a value together with its gradient and Hessian with
//! respect to the three spatial coordinates. Arithmetic propagates both
//! derivative orders exactly; there is no truncation beyond roundoff.

use std::ops::{Add, Mul, Neg, Sub};

use crate::{M3, R3};

/// Value, gradient and symmetric Hessian of a scalar quantity at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: R3,
    pub hess: M3,
}

/// Reason a jet operation left its domain. The evaluator attaches the
/// offending subexpression and the evaluation point.
pub type DomainReason = &'static str;

impl Jet2 {
    pub fn constant(value: f64) -> Self {
        Jet2 {
            value,
            grad: R3::zeros(),
            hess: M3::zeros(),
        }
    }

    /// Seed for the coordinate with the given index (0 = x, 1 = y, 2 = z).
    pub fn variable(value: f64, axis: usize) -> Self {
        let mut grad = R3::zeros();
        grad[axis] = 1.0;
        Jet2 {
            value,
            grad,
            hess: M3::zeros(),
        }
    }

    /// Chain rule through a scalar map with value `f` and derivatives `d1`,
    /// `d2` at `self.value`.
    fn chain(self, f: f64, d1: f64, d2: f64) -> Self {
        Jet2 {
            value: f,
            grad: self.grad * d1,
            hess: self.hess * d1 + outer(self.grad, self.grad) * d2,
        }
    }

    pub fn recip(self) -> Result<Self, DomainReason> {
        if self.value == 0.0 {
            return Err("division by zero");
        }
        let inv = 1.0 / self.value;
        Ok(self.chain(inv, -inv * inv, 2.0 * inv * inv * inv))
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn tan(self) -> Self {
        let t = self.value.tan();
        let d1 = 1.0 + t * t;
        self.chain(t, d1, 2.0 * t * d1)
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Result<Self, DomainReason> {
        if self.value <= 0.0 {
            return Err("log of a non-positive value");
        }
        let inv = 1.0 / self.value;
        Ok(self.chain(self.value.ln(), inv, -inv * inv))
    }

    pub fn sqrt(self) -> Result<Self, DomainReason> {
        if self.value < 0.0 {
            return Err("sqrt of a negative value");
        }
        if self.value == 0.0 {
            return Err("sqrt is not differentiable at zero");
        }
        let r = self.value.sqrt();
        let d1 = 0.5 / r;
        Ok(self.chain(r, d1, -0.5 * d1 / self.value))
    }

    pub fn acos(self) -> Result<Self, DomainReason> {
        let u = self.value;
        if u.abs() >= 1.0 {
            return Err("arccos argument outside (-1, 1)");
        }
        let w = 1.0 - u * u;
        let d1 = -1.0 / w.sqrt();
        Ok(self.chain(u.acos(), d1, d1 * u / w))
    }

    pub fn asin(self) -> Result<Self, DomainReason> {
        let u = self.value;
        if u.abs() >= 1.0 {
            return Err("arcsin argument outside (-1, 1)");
        }
        let w = 1.0 - u * u;
        let d1 = 1.0 / w.sqrt();
        Ok(self.chain(u.asin(), d1, d1 * u / w))
    }

    pub fn abs(self) -> Result<Self, DomainReason> {
        if self.value == 0.0 {
            return Err("abs is not differentiable at zero");
        }
        let s = self.value.signum();
        Ok(self.chain(self.value.abs(), s, 0.0))
    }

    /// Integer power by repeated multiplication; valid for any base except a
    /// zero base with a negative exponent.
    pub fn powi(self, k: i32) -> Result<Self, DomainReason> {
        if k == 0 {
            return Ok(Jet2::constant(1.0));
        }
        let mut acc = self;
        for _ in 1..k.unsigned_abs() {
            acc = acc * self;
        }
        if k < 0 {
            acc.recip()
        } else {
            Ok(acc)
        }
    }

    /// General power via exp(e * ln(base)); requires a positive base.
    pub fn pow(self, e: Jet2) -> Result<Self, DomainReason> {
        if self.value <= 0.0 {
            return Err("power with a non-positive base");
        }
        Ok((e * self.ln()?).exp())
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.iter().all(|h| h.is_finite())
    }
}

fn outer(a: R3, b: R3) -> M3 {
    a * b.transpose()
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        Jet2 {
            value: self.value + rhs.value,
            grad: self.grad + rhs.grad,
            hess: self.hess + rhs.hess,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        Jet2 {
            value: self.value - rhs.value,
            grad: self.grad - rhs.grad,
            hess: self.hess - rhs.hess,
        }
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        Jet2 {
            value: self.value * rhs.value,
            grad: self.grad * rhs.value + rhs.grad * self.value,
            hess: self.hess * rhs.value
                + rhs.hess * self.value
                + outer(self.grad, rhs.grad)
                + outer(rhs.grad, self.grad),
        }
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2 {
            value: -self.value,
            grad: -self.grad,
            hess: -self.hess,
        }
    }
}
