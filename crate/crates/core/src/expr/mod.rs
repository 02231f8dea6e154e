//! A small complex-expression language with exact Wirtinger jets.
//!
//! Grammar (standard precedence, left association, `^` binds tightest):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := unary ('^' '-'? integer)?
//! unary  := '-'? atom
//! atom   := number | z | i | e | pi | func '(' expr ')' | pow '(' expr ',' expr ')' | '(' expr ')'
//! func   := conj | re | im | abs | log | exp
//! ```
//!
//! Integer exponents are bounded by 64 in modulus and trees by depth 256.
//! `pow(u, c)` takes a real constant `c` and uses the principal logarithm.
//!
//! ```
//! use qcmap::expr::parse_expr;
//! use num_complex::Complex64;
//!
//! let f = parse_expr("z*conj(z)").unwrap();
//! let jet = f.jet(Complex64::new(0.5, 0.0)).unwrap();
//! assert_eq!(jet.value.re, 0.25);
//! assert_eq!((jet.dz.re, jet.dzbar.re), (0.5, 0.5));
//! ```

mod ast;
mod eval;
mod parse;

pub use ast::{BinOp, Expr, ExprKind, Func};
pub use eval::{eval_jet, eval_value, EvalError};
pub use parse::{parse_expr, parse_expr_in, ParseError, MAX_DEPTH, MAX_INT_EXPONENT};

use num_complex::Complex64;

use crate::jet::WirtingerJet;

/// Alias used throughout the crate for a parsed expression.
pub type ExprAst = Expr;

impl Expr {
    pub fn eval(&self, z: Complex64) -> Result<Complex64, EvalError> {
        eval_value(self, z)
    }

    pub fn jet(&self, z: Complex64) -> Result<WirtingerJet, EvalError> {
        eval_jet(self, z)
    }

    /// Evaluates a real-valued expression; the imaginary part must vanish up
    /// to `1e-12` relative.
    pub fn eval_real(&self, z: Complex64) -> Result<f64, EvalError> {
        let v = self.eval(z)?;
        if v.im.abs() > 1e-12 * (1.0 + v.re.abs()) {
            return Err(EvalError {
                position: self.pos,
                message: format!("expression is not real-valued (imaginary part {:e})", v.im),
            });
        }
        Ok(v.re)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expr(s)
    }
}
