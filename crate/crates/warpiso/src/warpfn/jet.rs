//! Second-order forward-mode differentiation.
//!
//! A [`Jet`] carries a value together with first and second derivatives with
//! respect to the evaluation variable. Propagating jets through the
//! expression tree yields exact derivatives of the expression (up to float
//! rounding), with no finite differencing and no symbolic expansion.

/// Truncated second-order Taylor data `(v, v', v'')` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Arithmetic on jets either succeeds or reports why the operation left the
/// real domain; the caller attaches the offending subexpression.
pub type JetResult = Result<Jet, &'static str>;

impl std::ops::Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
}

impl std::ops::Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2 }
    }
}

impl std::ops::Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet { v: -self.v, d1: -self.d1, d2: -self.d2 }
    }
}

impl std::ops::Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

impl Jet {
    pub const fn constant(c: f64) -> Self {
        Jet { v: c, d1: 0.0, d2: 0.0 }
    }

    /// The evaluation variable: value `t`, unit first derivative.
    pub const fn variable(t: f64) -> Self {
        Jet { v: t, d1: 1.0, d2: 0.0 }
    }

    /// Division is the one arithmetic operator that can fail.
    #[allow(clippy::should_implement_trait)]
    pub fn div(self, o: Jet) -> JetResult {
        if o.v == 0.0 {
            return Err("division by zero");
        }
        let q = self.v / o.v;
        let d1 = (self.d1 - q * o.d1) / o.v;
        let d2 = (self.d2 - 2.0 * d1 * o.d1 - q * o.d2) / o.v;
        Ok(Jet { v: q, d1, d2 })
    }

    /// Chain rule through a scalar function with value `f` and derivatives
    /// `df`, `ddf` at `self.v`.
    fn chain(self, f: f64, df: f64, ddf: f64) -> Jet {
        Jet {
            v: f,
            d1: df * self.d1,
            d2: df * self.d2 + ddf * self.d1 * self.d1,
        }
    }

    pub fn exp(self) -> Jet {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn log(self) -> JetResult {
        if self.v <= 0.0 {
            return Err("log of a nonpositive value");
        }
        let inv = 1.0 / self.v;
        Ok(self.chain(self.v.ln(), inv, -inv * inv))
    }

    pub fn sin(self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn sinh(self) -> Jet {
        self.chain(self.v.sinh(), self.v.cosh(), self.v.sinh())
    }

    pub fn cosh(self) -> Jet {
        self.chain(self.v.cosh(), self.v.sinh(), self.v.cosh())
    }

    /// Power with arbitrary exponent jet.
    ///
    /// A constant integer exponent uses the direct power rule, which stays
    /// valid for nonpositive bases. Everything else goes through
    /// `exp(b · log a)` and therefore needs a positive base.
    pub fn pow(self, exponent: Jet) -> JetResult {
        let constant_exponent = exponent.d1 == 0.0 && exponent.d2 == 0.0;
        if constant_exponent {
            let p = exponent.v;
            if p == 0.0 {
                return Ok(Jet::constant(1.0));
            }
            if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
                return self.powi(p as i32);
            }
            if self.v <= 0.0 {
                return Err("fractional power of a nonpositive base");
            }
            let f = self.v.powf(p);
            let df = p * self.v.powf(p - 1.0);
            let ddf = p * (p - 1.0) * self.v.powf(p - 2.0);
            return Ok(self.chain(f, df, ddf));
        }
        if self.v <= 0.0 {
            return Err("variable power of a nonpositive base");
        }
        Ok((exponent * self.log()?).exp())
    }

    fn powi(self, n: i32) -> JetResult {
        match n {
            0 => Ok(Jet::constant(1.0)),
            1 => Ok(self),
            _ => {
                if n < 0 && self.v == 0.0 {
                    return Err("negative power of zero");
                }
                let nf = f64::from(n);
                let f = self.v.powi(n);
                let df = nf * self.v.powi(n - 1);
                // powi(0.0, 0) = 1, so the n = 2 case at v = 0 still yields
                // the correct curvature 2·d1².
                let ddf = nf * (nf - 1.0) * self.v.powi(n - 2);
                Ok(self.chain(f, df, ddf))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(t: f64) -> Jet {
        Jet::variable(t)
    }

    #[test]
    fn product_rule() {
        // d/dt (t·sin t) = sin t + t cos t, d² = 2cos t − t sin t
        let t = 0.7;
        let j = var(t) * var(t).sin();
        assert!((j.d1 - (t.sin() + t * t.cos())).abs() < 1e-15);
        assert!((j.d2 - (2.0 * t.cos() - t * t.sin())).abs() < 1e-15);
    }

    #[test]
    fn quotient_rule_matches_product_with_reciprocal() {
        let t = 1.3;
        let a = var(t).sinh();
        let b = var(t).cosh();
        let q = a.div(b).unwrap(); // tanh
        let sech2 = 1.0 / (t.cosh() * t.cosh());
        assert!((q.v - t.tanh()).abs() < 1e-15);
        assert!((q.d1 - sech2).abs() < 1e-15);
        assert!((q.d2 + 2.0 * t.tanh() * sech2).abs() < 1e-14);
    }

    #[test]
    fn integer_power_at_zero_base() {
        let j = var(0.0).pow(Jet::constant(2.0)).unwrap();
        assert_eq!(j.v, 0.0);
        assert_eq!(j.d1, 0.0);
        assert_eq!(j.d2, 2.0);
    }

    #[test]
    fn variable_exponent_requires_positive_base() {
        assert!(var(-1.0).pow(var(2.0)).is_err());
        let j = var(2.0).pow(var(2.0)).unwrap(); // t^t at 2
        let v = 4.0;
        let d1 = v * (2.0f64.ln() + 1.0);
        assert!((j.v - v).abs() < 1e-12);
        assert!((j.d1 - d1).abs() < 1e-12);
    }

    #[test]
    fn division_by_zero_is_reported() {
        assert_eq!(var(0.0).sin().div(var(0.0).sin()).unwrap_err(), "division by zero");
    }

    #[test]
    fn log_domain() {
        assert!(var(0.0).log().is_err());
        assert!(var(-2.0).log().is_err());
        let j = var(2.0).log().unwrap();
        assert!((j.d1 - 0.5).abs() < 1e-16);
        assert!((j.d2 + 0.25).abs() < 1e-16);
    }
}
