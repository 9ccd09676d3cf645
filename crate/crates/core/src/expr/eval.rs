use thiserror::Error;

use super::ast::{BinOp, Expr, Func};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{func} is undefined at {arg}")]
    Domain { func: &'static str, arg: f64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("variable {0} is not bound")]
    Unbound(String),
    #[error("result is not finite")]
    NonFinite,
}

impl Expr {
    /// Evaluates with IEEE double arithmetic; domain violations are errors,
    /// never NaN.
    pub fn eval(&self, x: &[f64], xdot: Option<&[f64]>) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Const(c) => c.value(),
            Expr::Pos(i) => *x.get(*i).ok_or_else(|| EvalError::Unbound(format!("x{i}")))?,
            Expr::Vel(i) => *xdot
                .and_then(|v| v.get(*i))
                .ok_or_else(|| EvalError::Unbound(format!("xdot{i}")))?,
            Expr::Neg(e) => -e.eval(x, xdot)?,
            Expr::Binary(op, a, b) => {
                let a = a.eval(x, xdot)?;
                let b = b.eval(x, xdot)?;
                binary(*op, a, b)?
            }
            Expr::Call(func, e) => call(*func, e.eval(x, xdot)?)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }
}

fn binary(op: BinOp, a: f64, b: f64) -> Result<f64, EvalError> {
    Ok(match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => {
            if b == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            a / b
        }
        BinOp::Pow => {
            if a == 0.0 && b < 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            if a < 0.0 && b.fract() != 0.0 {
                return Err(EvalError::Domain { func: "^", arg: a });
            }
            if b.fract() == 0.0 && b.abs() <= i32::MAX as f64 {
                a.powi(b as i32)
            } else {
                a.powf(b)
            }
        }
    })
}

fn call(func: Func, a: f64) -> Result<f64, EvalError> {
    Ok(match func {
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
        Func::Tan => a.tan(),
        Func::Exp => a.exp(),
        Func::Log => {
            if a <= 0.0 {
                return Err(EvalError::Domain { func: "log", arg: a });
            }
            a.ln()
        }
        Func::Sqrt => {
            if a < 0.0 {
                return Err(EvalError::Domain { func: "sqrt", arg: a });
            }
            a.sqrt()
        }
        Func::Abs => a.abs(),
    })
}
