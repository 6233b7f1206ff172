//! Symbolic potentials.
//!
//! A small expression language for complex potentials: arithmetic,
//! real powers, `exp log sin cos sqrt abs sgn`, the imaginary unit `i` and
//! the constant `pi`. Identifiers declared as variables (by default `x`, `y`
//! and `r`) are bound to complex values at evaluation time; every other
//! identifier is a real parameter.
//!
//! ```
//! use truncspec::expr::{Bindings, PotentialExpr};
//! let q = PotentialExpr::parse("i*x^3").unwrap();
//! let v = q.eval(&Bindings::new().with_var("x", 2.0)).unwrap();
//! assert_eq!(v.im, 8.0);
//! ```

mod diff;
mod eval;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

pub use eval::Bindings;

/// Variables recognised by [`PotentialExpr::parse`].
pub const DEFAULT_VARIABLES: [&str; 3] = ["x", "y", "r"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error(
        "`{name}^{exponent}` is ambiguous for negative {name}: \
         write abs({name})^{exponent} or sgn({name})*abs({name})^{exponent}"
    )]
    FractionalPowerOfVariable { name: String, exponent: f64 },
    #[error("exponent at byte {offset} must be a real constant")]
    NonConstantExponent { offset: usize },
    #[error("unbound identifier `{0}`")]
    Unbound(String),
    #[error("{func} needs a real argument, got {value}")]
    NonRealArgument { func: &'static str, value: Complex64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of zero")]
    LogOfZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Abs,
    Sgn,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sgn => "sgn",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sgn" => Func::Sgn,
            _ => return None,
        })
    }
}

/// A real exponent; `integer` is set when the value is a whole number, in
/// which case evaluation uses repeated multiplication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent {
    pub value: f64,
    pub integer: bool,
}

impl Exponent {
    pub fn new(value: f64) -> Self {
        Exponent { value, integer: value.fract() == 0.0 && value.abs() < 1e9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(Complex64),
    Var(String),
    Param(String),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Exponent),
    Call(Func, Box<Node>),
}

impl Node {
    pub fn constant(re: f64, im: f64) -> Node {
        Node::Const(Complex64::new(re, im))
    }

    fn collect(&self, vars: &mut BTreeSet<String>, params: &mut BTreeSet<String>) {
        match self {
            Node::Const(_) => {}
            Node::Var(v) => {
                vars.insert(v.clone());
            }
            Node::Param(p) => {
                params.insert(p.clone());
            }
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.collect(vars, params),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.collect(vars, params);
                b.collect(vars, params);
            }
        }
    }
}

/// A parsed potential together with the names it refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialExpr {
    root: Node,
    variables: BTreeSet<String>,
    parameters: BTreeSet<String>,
}

impl PotentialExpr {
    /// Parses `text`, treating `x`, `y` and `r` as variables.
    pub fn parse(text: &str) -> Result<Self, ExprError> {
        Self::parse_with_variables(text, &DEFAULT_VARIABLES)
    }

    pub fn parse_with_variables(text: &str, variables: &[&str]) -> Result<Self, ExprError> {
        let root = parse::Parser::new(text, variables).parse()?;
        Ok(Self::from_node(root))
    }

    pub fn from_node(root: Node) -> Self {
        let mut variables = BTreeSet::new();
        let mut parameters = BTreeSet::new();
        root.collect(&mut variables, &mut parameters);
        PotentialExpr { root, variables, parameters }
    }

    pub fn constant(value: Complex64) -> Self {
        Self::from_node(Node::Const(value))
    }

    pub fn node(&self) -> &Node {
        &self.root
    }

    /// Variables that occur in the expression.
    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.variables.iter().map(String::as_str)
    }

    /// Parameters that occur in the expression.
    pub fn parameters(&self) -> impl Iterator<Item = &str> {
        self.parameters.iter().map(String::as_str)
    }

    pub fn uses_parameter(&self, name: &str) -> bool {
        self.parameters.contains(name)
    }

    pub fn eval(&self, bindings: &Bindings) -> Result<Complex64, ExprError> {
        eval::eval(&self.root, bindings)
    }

    /// Evaluates with `var` bound to the real value `x`.
    pub fn eval_at(&self, var: &str, x: f64, bindings: &Bindings) -> Result<Complex64, ExprError> {
        eval::eval_with(&self.root, bindings, var, Complex64::new(x, 0.0))
    }

    /// True when some `abs` or `sgn` argument vanishes exactly at `var = x`.
    pub fn touches_kink(&self, var: &str, x: f64, bindings: &Bindings) -> bool {
        eval::touches_kink(&self.root, bindings, var, Complex64::new(x, 0.0))
    }

    /// Derivative with respect to `var`, constant-folded.
    pub fn differentiate(&self, var: &str) -> PotentialExpr {
        Self::from_node(diff::fold(&diff::derivative(&self.root, var)))
    }

    /// Folds constant subexpressions and trivial identities.
    pub fn folded(&self) -> PotentialExpr {
        Self::from_node(diff::fold(&self.root))
    }

    /// Replaces every occurrence of the variable `var` by `replacement`.
    pub fn substitute(&self, var: &str, replacement: &PotentialExpr) -> PotentialExpr {
        Self::from_node(diff::substitute(&self.root, var, &replacement.root))
    }

    pub fn scaled(&self, factor: Complex64) -> PotentialExpr {
        Self::from_node(Node::Mul(Box::new(Node::Const(factor)), Box::new(self.root.clone())))
    }

    pub fn plus(&self, other: &PotentialExpr) -> PotentialExpr {
        Self::from_node(Node::Add(Box::new(self.root.clone()), Box::new(other.root.clone())))
    }

    pub fn minus(&self, other: &PotentialExpr) -> PotentialExpr {
        Self::from_node(Node::Sub(Box::new(self.root.clone()), Box::new(other.root.clone())))
    }
}

impl fmt::Display for PotentialExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => write_const(f, *c),
            Node::Var(name) | Node::Param(name) => write!(f, "{name}"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Pow(a, e) => {
                write!(f, "({a} ^ ")?;
                write_real(f, e.value)?;
                write!(f, ")")
            }
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

fn write_real(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v.is_sign_negative() && v != 0.0 {
        write!(f, "(-{})", -v)
    } else {
        write!(f, "{}", v.abs())
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    if c.im == 0.0 {
        write_real(f, c.re)
    } else if c.re == 0.0 {
        write!(f, "(")?;
        write_real(f, c.im)?;
        write!(f, "*i)")
    } else {
        write!(f, "(")?;
        write_real(f, c.re)?;
        write!(f, " + (")?;
        write_real(f, c.im)?;
        write!(f, "*i))")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parses_imaginary_cubic_structure() {
        let e = PotentialExpr::parse("i*x^3").unwrap();
        let expected = Node::Mul(
            Box::new(Node::Const(c(0.0, 1.0))),
            Box::new(Node::Pow(Box::new(Node::Var("x".into())), Exponent::new(3.0))),
        );
        assert_eq!(e.node(), &expected);
        assert!(matches!(e.node(), Node::Mul(_, b) if matches!(**b, Node::Pow(_, Exponent { integer: true, .. }))));
    }

    #[test]
    fn evaluates_examples() {
        let e = PotentialExpr::parse("i*x^3").unwrap();
        assert_eq!(e.eval(&Bindings::new().with_var("x", 2.0)).unwrap(), c(0.0, 8.0));
        let e = PotentialExpr::parse("sgn(x)*abs(x)^0.5").unwrap();
        let v = e.eval(&Bindings::new().with_var("x", -4.0)).unwrap();
        assert!((v - c(-2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn syntax_error_reports_offset() {
        match PotentialExpr::parse("x +") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            PotentialExpr::parse("foo(x)"),
            Err(ExprError::UnknownFunction { ref name, offset: 0 }) if name == "foo"
        ));
    }

    #[test]
    fn fractional_power_of_variable_is_rejected() {
        let err = PotentialExpr::parse("x^0.5").unwrap_err();
        assert!(matches!(err, ExprError::FractionalPowerOfVariable { .. }));
        assert!(err.to_string().contains("abs(x)^0.5"));
        assert!(PotentialExpr::parse("(1+x)^0.5").is_ok());
        assert!(PotentialExpr::parse("x^-2").is_ok());
    }

    #[test]
    fn precedence() {
        let b = Bindings::new().with_var("x", 3.0);
        let ev = |s: &str| PotentialExpr::parse(s).unwrap().eval(&b).unwrap();
        assert_eq!(ev("-x^2"), c(-9.0, 0.0));
        assert_eq!(ev("2*x^2+1"), c(19.0, 0.0));
        assert_eq!(ev("2^3^2"), c(512.0, 0.0));
        assert_eq!(ev("12/x/2"), c(2.0, 0.0));
        assert_eq!(ev("1-x-1"), c(-3.0, 0.0));
        assert_eq!(ev("-2*-x"), c(6.0, 0.0));
    }

    #[test]
    fn derivative_of_abs_and_power() {
        let e = PotentialExpr::parse("i*x^3").unwrap().differentiate("x");
        let expected = Node::Mul(
            Box::new(Node::Const(c(0.0, 3.0))),
            Box::new(Node::Pow(Box::new(Node::Var("x".into())), Exponent::new(2.0))),
        );
        assert_eq!(e.node(), &expected);
        let d = PotentialExpr::parse("abs(x)").unwrap().differentiate("x");
        assert_eq!(d.to_string(), "sgn(x)");
        let d = PotentialExpr::parse("sgn(x)").unwrap().differentiate("x");
        assert_eq!(d.node(), &Node::Const(c(0.0, 0.0)));
        let d = PotentialExpr::parse("abs(x)^3.15").unwrap().differentiate("x");
        let v = d.eval(&Bindings::new().with_var("x", -2.0)).unwrap();
        assert!((v.re + 3.15 * 2f64.powf(2.15)).abs() < 1e-12);
    }

    #[test]
    fn eval_errors() {
        let b = Bindings::new().with_var("x", 0.0);
        let e = PotentialExpr::parse("1/x").unwrap();
        assert_eq!(e.eval(&b), Err(ExprError::DivisionByZero));
        let e = PotentialExpr::parse("abs(i*x+i)").unwrap();
        assert!(matches!(e.eval(&b), Err(ExprError::NonRealArgument { func: "abs", .. })));
        let e = PotentialExpr::parse("g*x").unwrap();
        assert_eq!(e.eval(&b), Err(ExprError::Unbound("g".into())));
        let e = PotentialExpr::parse("sgn(x)").unwrap();
        assert_eq!(e.eval(&b).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn variables_and_parameters_are_classified() {
        let e = PotentialExpr::parse("x^2 + i*g/(1+abs(x)^3.15)").unwrap();
        assert_eq!(e.variables().collect::<Vec<_>>(), ["x"]);
        assert_eq!(e.parameters().collect::<Vec<_>>(), ["g"]);
        let v = e.eval(&Bindings::new().with_var("x", 1.0).with_param("g", 4.0)).unwrap();
        assert!((v - c(1.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn printing_round_trips() {
        for text in ["i*x^3", "x^2 + i*g/(1+abs(x)^3.15)", "-exp(-x^2)*sin(2.5*x) - 3", "(2-3*i)*x^-2", "sqrt(1+x)^0.5"] {
            let e = PotentialExpr::parse(text).unwrap().folded();
            let again = PotentialExpr::parse(&e.to_string()).unwrap().folded();
            assert_eq!(e, again, "{text} -> {e}");
        }
    }

    #[test]
    fn substitution_composes() {
        let e = PotentialExpr::parse("x^3").unwrap();
        let shifted = e.substitute("x", &PotentialExpr::parse("2-x").unwrap());
        let v = shifted.eval(&Bindings::new().with_var("x", 0.5)).unwrap();
        assert_eq!(v, c(3.375, 0.0));
    }
}
