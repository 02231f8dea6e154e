//! Forward-mode evaluation of expression trees in the pair `(z, z̄)`.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use thiserror::Error;

use super::ast::{BinOp, Expr, ExprKind, Func};
use crate::jet::WirtingerJet;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error at offset {position}: {message}")]
pub struct EvalError {
    /// Character offset of the failing node in the source text.
    pub position: usize,
    pub message: String,
}

fn domain(e: &Expr, message: &str) -> EvalError {
    EvalError { position: e.pos, message: message.to_string() }
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub(crate) fn eval_constant(e: &Expr) -> Result<Complex64, EvalError> {
    eval_value(e, zero())
}

/// Value-only evaluation. `abs` at zero is allowed here since no derivative
/// is requested.
pub fn eval_value(e: &Expr, z: Complex64) -> Result<Complex64, EvalError> {
    Ok(match &e.kind {
        ExprKind::Num(x) => Complex64::new(*x, 0.0),
        ExprKind::Var => z,
        ExprKind::ImagUnit => Complex64::i(),
        ExprKind::E => Complex64::new(E, 0.0),
        ExprKind::Pi => Complex64::new(PI, 0.0),
        ExprKind::Neg(a) => -eval_value(a, z)?,
        ExprKind::Binary(op, a, b) => {
            let x = eval_value(a, z)?;
            let y = eval_value(b, z)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == zero() {
                        return Err(domain(e, "division by zero"));
                    }
                    x / y
                }
            }
        }
        ExprKind::PowInt(a, n) => {
            let x = eval_value(a, z)?;
            if *n < 0 && x == zero() {
                return Err(domain(e, "negative power of zero"));
            }
            x.powi(*n)
        }
        ExprKind::Call(f, a) => {
            let x = eval_value(a, z)?;
            match f {
                Func::Conj => x.conj(),
                Func::Re => Complex64::new(x.re, 0.0),
                Func::Im => Complex64::new(x.im, 0.0),
                Func::Abs => Complex64::new(x.norm(), 0.0),
                Func::Log => {
                    if x == zero() {
                        return Err(domain(e, "log of zero"));
                    }
                    x.ln()
                }
                Func::Exp => x.exp(),
            }
        }
        ExprKind::Pow(a, b) => {
            let x = eval_value(a, z)?;
            let c = eval_value(b, z)?;
            if x == zero() {
                return Err(domain(e, "pow of zero"));
            }
            (c * x.ln()).exp()
        }
    })
}

/// Exact jet `(f, f_z, f_z̄)` at `z`.
pub fn eval_jet(e: &Expr, z: Complex64) -> Result<WirtingerJet, EvalError> {
    Ok(match &e.kind {
        ExprKind::Num(_) | ExprKind::ImagUnit | ExprKind::E | ExprKind::Pi => WirtingerJet::constant(eval_value(e, z)?),
        ExprKind::Var => WirtingerJet::variable(z),
        ExprKind::Neg(a) => -eval_jet(a, z)?,
        ExprKind::Binary(op, a, b) => {
            let u = eval_jet(a, z)?;
            let v = eval_jet(b, z)?;
            match op {
                BinOp::Add => u + v,
                BinOp::Sub => u - v,
                BinOp::Mul => u * v,
                BinOp::Div => {
                    if v.value == zero() {
                        return Err(domain(e, "division by zero"));
                    }
                    let q = u.value / v.value;
                    WirtingerJet::new(q, (u.dz - q * v.dz) / v.value, (u.dzbar - q * v.dzbar) / v.value)
                }
            }
        }
        ExprKind::PowInt(a, n) => {
            if let ExprKind::Call(Func::Abs, inner) = &a.kind {
                if *n >= 2 {
                    return Ok(abs_power(&eval_jet(inner, z)?, *n));
                }
            }
            let u = eval_jet(a, z)?;
            if *n == 0 {
                return Ok(WirtingerJet::constant(Complex64::new(1.0, 0.0)));
            }
            if *n < 0 && u.value == zero() {
                return Err(domain(e, "negative power of zero"));
            }
            let lower = u.value.powi(n - 1);
            u.compose_analytic(lower * u.value, lower * (*n as f64))
        }
        ExprKind::Call(f, a) => {
            let u = eval_jet(a, z)?;
            match f {
                Func::Conj => u.conj(),
                Func::Re => (u + u.conj()).scale(Complex64::new(0.5, 0.0)),
                Func::Im => (u - u.conj()).scale(Complex64::new(0.0, -0.5)),
                Func::Abs => {
                    let m = u.value.norm();
                    if m == 0.0 {
                        return Err(domain(e, "abs is not differentiable at zero"));
                    }
                    let w = u.value.conj();
                    WirtingerJet::new(
                        Complex64::new(m, 0.0),
                        (w * u.dz + u.value * u.dzbar.conj()) / (2.0 * m),
                        (w * u.dzbar + u.value * u.dz.conj()) / (2.0 * m),
                    )
                }
                Func::Log => {
                    if u.value == zero() {
                        return Err(domain(e, "log of zero"));
                    }
                    u.compose_analytic(u.value.ln(), u.value.inv())
                }
                Func::Exp => {
                    let x = u.value.exp();
                    u.compose_analytic(x, x)
                }
            }
        }
        ExprKind::Pow(a, b) => {
            let u = eval_jet(a, z)?;
            let c = eval_value(b, z)?;
            if u.value == zero() {
                return Err(domain(e, "pow of zero"));
            }
            let x = (c * u.value.ln()).exp();
            u.compose_analytic(x, c * x / u.value)
        }
    })
}

/// `|u|^n` for `n >= 2`, smooth through `u = 0`.
fn abs_power(u: &WirtingerJet, n: i32) -> WirtingerJet {
    let m2 = u.value.norm_sqr();
    let m = m2.sqrt();
    let value = m.powi(n);
    // d|u|^n = (n/2) |u|^{n-2} d(u ū)
    let scale = 0.5 * n as f64 * m.powi(n - 2);
    let w = u.value.conj();
    WirtingerJet::new(
        Complex64::new(value, 0.0),
        (w * u.dz + u.value * u.dzbar.conj()) * scale,
        (w * u.dzbar + u.value * u.dz.conj()) * scale,
    )
}
