//! Stack-machine compilation of expressions for tight numeric loops
//! (grid scans, quadrature, streamline integration).

use super::{powi, EvalError, Expr};
use num_traits::ToPrimitive;

#[derive(Debug, Clone)]
enum Op {
    Const(f64),
    Load(usize),
    Add(usize),
    Mul(usize),
    Pow(i64),
    Sin,
    Cos,
    LogAbs,
}

/// An expression compiled against a fixed symbol order. `eval` takes the
/// symbol values in that order and reports the same domain errors as
/// [`Expr::eval`].
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    ops: Vec<Op>,
}

impl CompiledExpr {
    /// Compile against `symbols`; every free symbol of `e` must appear.
    pub fn compile(e: &Expr, symbols: &[String]) -> Result<CompiledExpr, EvalError> {
        let mut ops = Vec::new();
        emit(e, symbols, &mut ops)?;
        Ok(CompiledExpr { ops })
    }

    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        let mut stack: Vec<f64> = Vec::with_capacity(16);
        for op in &self.ops {
            match op {
                Op::Const(c) => stack.push(*c),
                Op::Load(i) => stack.push(values[*i]),
                Op::Add(n) => {
                    let mut acc = 0.0;
                    for _ in 0..*n {
                        acc += stack.pop().unwrap();
                    }
                    stack.push(acc);
                }
                Op::Mul(n) => {
                    let mut acc = 1.0;
                    for _ in 0..*n {
                        acc *= stack.pop().unwrap();
                    }
                    stack.push(acc);
                }
                Op::Pow(k) => {
                    let base = stack.pop().unwrap();
                    if *k < 0 && base == 0.0 {
                        return Err(EvalError::DivisionByZero);
                    }
                    stack.push(powi(base, *k));
                }
                Op::Sin => {
                    let x = stack.pop().unwrap();
                    stack.push(x.sin());
                }
                Op::Cos => {
                    let x = stack.pop().unwrap();
                    stack.push(x.cos());
                }
                Op::LogAbs => {
                    let x = stack.pop().unwrap();
                    if x == 0.0 {
                        return Err(EvalError::LogDomain);
                    }
                    stack.push(x.abs().ln());
                }
            }
        }
        let v = stack.pop().unwrap();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }
}

fn emit(e: &Expr, symbols: &[String], ops: &mut Vec<Op>) -> Result<(), EvalError> {
    match e {
        Expr::Num(r) => ops.push(Op::Const(r.to_f64().ok_or(EvalError::NonFinite)?)),
        Expr::Pi => ops.push(Op::Const(std::f64::consts::PI)),
        Expr::Sym(s) => {
            let idx = symbols
                .iter()
                .position(|name| name == s)
                .ok_or_else(|| EvalError::UnboundSymbol(s.clone()))?;
            ops.push(Op::Load(idx));
        }
        Expr::Add(ts) => {
            for t in ts {
                emit(t, symbols, ops)?;
            }
            ops.push(Op::Add(ts.len()));
        }
        Expr::Mul(fs) => {
            for f in fs {
                emit(f, symbols, ops)?;
            }
            ops.push(Op::Mul(fs.len()));
        }
        Expr::Pow(b, k) => {
            emit(b, symbols, ops)?;
            ops.push(Op::Pow(*k));
        }
        Expr::Sin(u) => {
            emit(u, symbols, ops)?;
            ops.push(Op::Sin);
        }
        Expr::Cos(u) => {
            emit(u, symbols, ops)?;
            ops.push(Op::Cos);
        }
        Expr::Log(u) => {
            emit(u, symbols, ops)?;
            ops.push(Op::LogAbs);
        }
    }
    Ok(())
}
