use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{ExprError, Func, Node};

/// Values for variables (complex) and parameters (real).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bindings {
    vars: BTreeMap<String, Complex64>,
    params: BTreeMap<String, f64>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_var(mut self, name: &str, value: impl Into<Complex64>) -> Self {
        self.set_var(name, value);
        self
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.set_param(name, value);
        self
    }

    pub fn set_var(&mut self, name: &str, value: impl Into<Complex64>) {
        self.vars.insert(name.to_string(), value.into());
    }

    pub fn set_param(&mut self, name: &str, value: f64) {
        self.params.insert(name.to_string(), value);
    }

    pub fn var(&self, name: &str) -> Option<Complex64> {
        self.vars.get(name).copied()
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    pub fn params(&self) -> impl Iterator<Item = (&str, f64)> {
        self.params.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

struct Env<'a> {
    bindings: &'a Bindings,
    var: Option<(&'a str, Complex64)>,
}

impl Env<'_> {
    fn lookup_var(&self, name: &str) -> Result<Complex64, ExprError> {
        if let Some((v, value)) = self.var {
            if v == name {
                return Ok(value);
            }
        }
        self.bindings.var(name).ok_or_else(|| ExprError::Unbound(name.to_string()))
    }
}

pub(super) fn eval(node: &Node, bindings: &Bindings) -> Result<Complex64, ExprError> {
    go(node, &Env { bindings, var: None })
}

pub(super) fn eval_with(
    node: &Node,
    bindings: &Bindings,
    var: &str,
    value: Complex64,
) -> Result<Complex64, ExprError> {
    go(node, &Env { bindings, var: Some((var, value)) })
}

pub(super) fn touches_kink(node: &Node, bindings: &Bindings, var: &str, value: Complex64) -> bool {
    let env = Env { bindings, var: Some((var, value)) };
    kink(node, &env)
}

fn kink(node: &Node, env: &Env) -> bool {
    match node {
        Node::Const(_) | Node::Var(_) | Node::Param(_) => false,
        Node::Call(Func::Abs | Func::Sgn, a) => {
            kink(a, env) || go(a, env).is_ok_and(|v| v == Complex64::new(0.0, 0.0))
        }
        Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => kink(a, env),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
            kink(a, env) || kink(b, env)
        }
    }
}

fn real_arg(func: Func, v: Complex64) -> Result<f64, ExprError> {
    if v.im == 0.0 {
        Ok(v.re)
    } else {
        Err(ExprError::NonRealArgument { func: func.name(), value: v })
    }
}

fn go(node: &Node, env: &Env) -> Result<Complex64, ExprError> {
    Ok(match node {
        Node::Const(c) => *c,
        Node::Var(name) => env.lookup_var(name)?,
        Node::Param(name) => env
            .bindings
            .param(name)
            .map(|p| Complex64::new(p, 0.0))
            .ok_or_else(|| ExprError::Unbound(name.clone()))?,
        Node::Neg(a) => -go(a, env)?,
        Node::Add(a, b) => go(a, env)? + go(b, env)?,
        Node::Sub(a, b) => go(a, env)? - go(b, env)?,
        Node::Mul(a, b) => go(a, env)? * go(b, env)?,
        Node::Div(a, b) => {
            let den = go(b, env)?;
            if den == Complex64::new(0.0, 0.0) {
                return Err(ExprError::DivisionByZero);
            }
            go(a, env)? / den
        }
        Node::Pow(a, e) => {
            let base = go(a, env)?;
            if e.integer {
                let k = e.value as i32;
                if k < 0 && base == Complex64::new(0.0, 0.0) {
                    return Err(ExprError::DivisionByZero);
                }
                base.powi(k)
            } else if base.im == 0.0 && base.re >= 0.0 {
                Complex64::new(base.re.powf(e.value), 0.0)
            } else {
                base.powf(e.value)
            }
        }
        Node::Call(func, a) => {
            let v = go(a, env)?;
            match func {
                Func::Exp => v.exp(),
                Func::Log => {
                    if v == Complex64::new(0.0, 0.0) {
                        return Err(ExprError::LogOfZero);
                    }
                    v.ln()
                }
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Sqrt => v.sqrt(),
                Func::Abs => Complex64::new(real_arg(*func, v)?.abs(), 0.0),
                Func::Sgn => {
                    let x = real_arg(*func, v)?;
                    let s = if x > 0.0 {
                        1.0
                    } else if x < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    Complex64::new(s, 0.0)
                }
            }
        }
    })
}
