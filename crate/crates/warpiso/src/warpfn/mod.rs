//! Warping functions: parsing, exact first/second derivatives, and
//! positivity / log-convexity certification on a working interval.

mod ast;
mod jet;
mod parse;

pub use ast::Expr;
pub use jet::Jet;

use crate::error::{Error, Result};

/// Default number of certification grid points.
pub const DEFAULT_CERT_GRID: usize = 4096;
/// `(log f)'' ≥ -TOL_LOG_CONVEX` on the grid counts as log-convex.
pub const TOL_LOG_CONVEX: f64 = 1e-9;
/// `min (log f)'' > TOL_STRICT` counts as strictly log-convex.
pub const TOL_STRICT: f64 = 1e-9;

/// A parsed warping function together with its working interval
/// `[0, domain_max]` and an optional user-declared value of the growth limit
/// `lim n·f'/f` (consumed by the profile machinery).
///
/// Immutable after construction; evaluation is deterministic and safe to
/// share across threads.
#[derive(Debug, Clone)]
pub struct WarpingFunction {
    source: String,
    ast: Expr,
    domain_max: f64,
    declared_limit: Option<f64>,
}

impl WarpingFunction {
    /// Parse `source` and fix the working interval `[0, domain_max]`.
    pub fn parse(source: &str, domain_max: f64) -> Result<Self> {
        if !(domain_max.is_finite() && domain_max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "domain_max must be a positive finite real, got {domain_max}"
            )));
        }
        let ast = parse::parse(source)?;
        Ok(WarpingFunction {
            source: source.to_owned(),
            ast,
            domain_max,
            declared_limit: None,
        })
    }

    pub fn with_declared_limit(mut self, limit: Option<f64>) -> Self {
        self.declared_limit = limit;
        self
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn domain_max(&self) -> f64 {
        self.domain_max
    }

    pub fn declared_limit(&self) -> Option<f64> {
        self.declared_limit
    }

    /// Canonical serialization of the parsed tree; re-parses to an
    /// evaluation-identical tree.
    pub fn unparse(&self) -> String {
        self.ast.to_string()
    }

    /// Evaluate `(f, f', f'')` at `t` by second-order forward-mode
    /// differentiation through the tree.
    pub fn eval2(&self, t: f64) -> Result<(f64, f64, f64)> {
        let jet = eval_jet(&self.ast, t)?;
        Ok((jet.v, jet.d1, jet.d2))
    }

    /// `(log f)''(t) = (f·f'' - f'²)/f²`.
    pub fn log_second_derivative(&self, t: f64) -> Result<f64> {
        let (f, d1, d2) = self.eval2(t)?;
        Ok((f * d2 - d1 * d1) / (f * f))
    }

    /// Evaluate positivity and log-convexity verdicts on a uniform grid over
    /// the working interval. Failures are verdicts, not errors; only
    /// evaluation problems (domain errors) are reported as `Err`.
    pub fn certify(&self, grid_points: usize) -> Result<CertificationReport> {
        if grid_points < 2 {
            return Err(Error::InvalidParameter(format!(
                "certification grid needs at least 2 points, got {grid_points}"
            )));
        }
        let step = self.domain_max / (grid_points - 1) as f64;
        let mut min_f = f64::INFINITY;
        let mut argmin_f = 0.0;
        let mut min_log_second = f64::INFINITY;
        let mut argmin_log_second = 0.0;
        for i in 0..grid_points {
            let t = if i + 1 == grid_points { self.domain_max } else { i as f64 * step };
            let (f, d1, d2) = self.eval2(t)?;
            if f < min_f {
                min_f = f;
                argmin_f = t;
            }
            let log_second = (f * d2 - d1 * d1) / (f * f);
            if log_second < min_log_second {
                min_log_second = log_second;
                argmin_log_second = t;
            }
        }
        Ok(CertificationReport {
            grid_points,
            domain_max: self.domain_max,
            min_f,
            argmin_f,
            min_log_second,
            argmin_log_second,
            positive: min_f > 0.0,
            log_convex: min_log_second >= -TOL_LOG_CONVEX,
            strictly_log_convex: min_log_second > TOL_STRICT,
        })
    }

    pub fn certify_default(&self) -> Result<CertificationReport> {
        self.certify(DEFAULT_CERT_GRID)
    }
}

/// Grid verdicts for a warping function: a sanity gate, not a proof.
#[derive(Debug, Clone, Copy)]
pub struct CertificationReport {
    pub grid_points: usize,
    pub domain_max: f64,
    pub min_f: f64,
    pub argmin_f: f64,
    pub min_log_second: f64,
    pub argmin_log_second: f64,
    pub positive: bool,
    pub log_convex: bool,
    pub strictly_log_convex: bool,
}

fn eval_jet(expr: &Expr, t: f64) -> Result<Jet> {
    let attach = |res: jet::JetResult| {
        res.map_err(|message| Error::Domain { subexpr: expr.to_string(), t, message })
    };
    match expr {
        Expr::Const(c) => Ok(Jet::constant(*c)),
        Expr::Var => Ok(Jet::variable(t)),
        Expr::Add(a, b) => Ok(eval_jet(a, t)? + eval_jet(b, t)?),
        Expr::Sub(a, b) => Ok(eval_jet(a, t)? - eval_jet(b, t)?),
        Expr::Mul(a, b) => Ok(eval_jet(a, t)? * eval_jet(b, t)?),
        Expr::Div(a, b) => attach(eval_jet(a, t)?.div(eval_jet(b, t)?)),
        Expr::Pow(a, b) => attach(eval_jet(a, t)?.pow(eval_jet(b, t)?)),
        Expr::Neg(a) => Ok(-eval_jet(a, t)?),
        Expr::Exp(a) => Ok(eval_jet(a, t)?.exp()),
        Expr::Log(a) => attach(eval_jet(a, t)?.log()),
        Expr::Sin(a) => Ok(eval_jet(a, t)?.sin()),
        Expr::Cos(a) => Ok(eval_jet(a, t)?.cos()),
        Expr::Sinh(a) => Ok(eval_jet(a, t)?.sinh()),
        Expr::Cosh(a) => Ok(eval_jet(a, t)?.cosh()),
    }
}
