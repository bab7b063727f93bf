use super::ast::{ActionSeq, CmpOp, Condition, Expr};
use super::{Env, GuardError};
use crate::value::Value;

pub fn eval_expr(e: &Expr, env: &Env) -> Result<Value, GuardError> {
    match e {
        Expr::Lit(v) => Ok(v.clone()),
        Expr::Var(name) => env.get(name).cloned().ok_or_else(|| GuardError::UnboundVariable(name.clone())),
        Expr::Add(a, b) => arith(e, a, b, env, i64::checked_add),
        Expr::Sub(a, b) => arith(e, a, b, env, i64::checked_sub),
        Expr::Mul(a, b) => arith(e, a, b, env, i64::checked_mul),
    }
}

fn arith(whole: &Expr, a: &Expr, b: &Expr, env: &Env, op: fn(i64, i64) -> Option<i64>) -> Result<Value, GuardError> {
    let (x, y) = (eval_expr(a, env)?, eval_expr(b, env)?);
    match (x, y) {
        (Value::Int(x), Value::Int(y)) => {
            op(x, y).map(Value::Int).ok_or_else(|| GuardError::Overflow(whole.to_string()))
        }
        (x, y) => Err(GuardError::TypeMismatch(format!(
            "arithmetic on {} and {} in `{whole}`",
            x.value_type(),
            y.value_type()
        ))),
    }
}

/// Both operands of `&&`/`||` are always evaluated so that an ill-typed or
/// unbound operand is reported even when the other side decides the result.
pub fn eval_condition(c: &Condition, env: &Env) -> Result<bool, GuardError> {
    match c {
        Condition::Always => Ok(true),
        Condition::Holds(e) => match eval_expr(e, env)? {
            Value::Bool(b) => Ok(b),
            v => Err(GuardError::TypeMismatch(format!("`{e}` is {}, expected bool", v.value_type()))),
        },
        Condition::Compare(a, op, b) => {
            let (x, y) = (eval_expr(a, env)?, eval_expr(b, env)?);
            compare(&x, *op, &y).ok_or_else(|| {
                GuardError::TypeMismatch(format!("cannot compare {} with {} in `{c}`", x.value_type(), y.value_type()))
            })
        }
        Condition::Not(inner) => Ok(!eval_condition(inner, env)?),
        Condition::And(a, b) => {
            let (x, y) = (eval_condition(a, env)?, eval_condition(b, env)?);
            Ok(x && y)
        }
        Condition::Or(a, b) => {
            let (x, y) = (eval_condition(a, env)?, eval_condition(b, env)?);
            Ok(x || y)
        }
    }
}

fn compare(x: &Value, op: CmpOp, y: &Value) -> Option<bool> {
    if x.value_type() != y.value_type() {
        return None;
    }
    match op {
        CmpOp::Eq => Some(x == y),
        CmpOp::Ne => Some(x != y),
        _ => {
            let (a, b) = (x.as_int()?, y.as_int()?);
            Some(match op {
                CmpOp::Lt => a < b,
                CmpOp::Le => a <= b,
                CmpOp::Gt => a > b,
                CmpOp::Ge => a >= b,
                CmpOp::Eq | CmpOp::Ne => unreachable!(),
            })
        }
    }
}

/// Applies the assignments left to right on a copy of `env`.
pub fn eval_action(a: &ActionSeq, env: &Env) -> Result<Env, GuardError> {
    let mut out = env.clone();
    for asg in &a.0 {
        let v = eval_expr(&asg.value, &out)?;
        out.insert(asg.target.clone(), v);
    }
    Ok(out)
}
