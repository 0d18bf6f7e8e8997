use std::fmt;

/// Expression tree over the single variable `t`.
///
/// The grammar admits constants, `t`, the four arithmetic operators, `^`,
/// unary minus, and the function set {exp, log, sin, cos, sinh, cosh}.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Sinh(Box<Expr>),
    Cosh(Box<Expr>),
}

/// Fully parenthesized pretty-printer. The output re-parses to a tree with
/// identical evaluation behavior (the round trip is covered by property
/// tests), so it doubles as the canonical serialization of an expression.
impl fmt::Display for Expr {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(out, "(-{:?})", -c)
                } else {
                    write!(out, "{:?}", c)
                }
            }
            Expr::Var => write!(out, "t"),
            Expr::Add(a, b) => write!(out, "({a} + {b})"),
            Expr::Sub(a, b) => write!(out, "({a} - {b})"),
            Expr::Mul(a, b) => write!(out, "({a} * {b})"),
            Expr::Div(a, b) => write!(out, "({a} / {b})"),
            Expr::Pow(a, b) => write!(out, "({a} ^ {b})"),
            Expr::Neg(a) => write!(out, "(-{a})"),
            Expr::Exp(a) => write!(out, "exp({a})"),
            Expr::Log(a) => write!(out, "log({a})"),
            Expr::Sin(a) => write!(out, "sin({a})"),
            Expr::Cos(a) => write!(out, "cos({a})"),
            Expr::Sinh(a) => write!(out, "sinh({a})"),
            Expr::Cosh(a) => write!(out, "cosh({a})"),
        }
    }
}
