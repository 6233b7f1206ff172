//! Differentiation, substitution and constant folding.

use num_complex::Complex64;

use super::{eval, Bindings, Exponent, Func, Node};

fn zero() -> Node {
    Node::constant(0.0, 0.0)
}

fn one() -> Node {
    Node::constant(1.0, 0.0)
}

fn b(n: Node) -> Box<Node> {
    Box::new(n)
}

pub(super) fn derivative(node: &Node, var: &str) -> Node {
    match node {
        Node::Const(_) | Node::Param(_) => zero(),
        Node::Var(v) => {
            if v == var {
                one()
            } else {
                zero()
            }
        }
        Node::Neg(a) => Node::Neg(b(derivative(a, var))),
        Node::Add(x, y) => Node::Add(b(derivative(x, var)), b(derivative(y, var))),
        Node::Sub(x, y) => Node::Sub(b(derivative(x, var)), b(derivative(y, var))),
        Node::Mul(x, y) => Node::Add(
            b(Node::Mul(b(derivative(x, var)), y.clone())),
            b(Node::Mul(x.clone(), b(derivative(y, var)))),
        ),
        Node::Div(x, y) => Node::Div(
            b(Node::Sub(
                b(Node::Mul(b(derivative(x, var)), y.clone())),
                b(Node::Mul(x.clone(), b(derivative(y, var)))),
            )),
            b(Node::Pow(y.clone(), Exponent::new(2.0))),
        ),
        Node::Pow(base, e) => Node::Mul(
            b(Node::Mul(
                b(Node::constant(e.value, 0.0)),
                b(Node::Pow(base.clone(), Exponent::new(e.value - 1.0))),
            )),
            b(derivative(base, var)),
        ),
        Node::Call(func, a) => {
            let inner = derivative(a, var);
            let outer = match func {
                Func::Exp => Node::Call(Func::Exp, a.clone()),
                Func::Log => Node::Div(b(one()), a.clone()),
                Func::Sin => Node::Call(Func::Cos, a.clone()),
                Func::Cos => Node::Neg(b(Node::Call(Func::Sin, a.clone()))),
                Func::Sqrt => Node::Div(
                    b(Node::constant(0.5, 0.0)),
                    b(Node::Call(Func::Sqrt, a.clone())),
                ),
                Func::Abs => Node::Call(Func::Sgn, a.clone()),
                Func::Sgn => return zero(),
            };
            Node::Mul(b(outer), b(inner))
        }
    }
}

pub(super) fn substitute(node: &Node, var: &str, replacement: &Node) -> Node {
    let sub = |n: &Node| b(substitute(n, var, replacement));
    match node {
        Node::Var(v) if v == var => replacement.clone(),
        Node::Const(_) | Node::Var(_) | Node::Param(_) => node.clone(),
        Node::Neg(a) => Node::Neg(sub(a)),
        Node::Add(x, y) => Node::Add(sub(x), sub(y)),
        Node::Sub(x, y) => Node::Sub(sub(x), sub(y)),
        Node::Mul(x, y) => Node::Mul(sub(x), sub(y)),
        Node::Div(x, y) => Node::Div(sub(x), sub(y)),
        Node::Pow(a, e) => Node::Pow(sub(a), *e),
        Node::Call(f, a) => Node::Call(*f, sub(a)),
    }
}

fn is_const(n: &Node, value: f64) -> bool {
    matches!(n, Node::Const(c) if *c == Complex64::new(value, 0.0))
}

fn try_const(n: Node) -> Node {
    let mut leaves_constant = true;
    check_leaves(&n, &mut leaves_constant);
    if leaves_constant {
        if let Ok(v) = eval::eval(&n, &Bindings::default()) {
            if v.re.is_finite() && v.im.is_finite() {
                return Node::Const(v);
            }
        }
    }
    n
}

fn check_leaves(n: &Node, ok: &mut bool) {
    match n {
        Node::Const(_) => {}
        Node::Var(_) | Node::Param(_) => *ok = false,
        Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => check_leaves(a, ok),
        Node::Add(x, y) | Node::Sub(x, y) | Node::Mul(x, y) | Node::Div(x, y) => {
            check_leaves(x, ok);
            check_leaves(y, ok);
        }
    }
}

fn fold_neg(a: Node) -> Node {
    match a {
        Node::Const(c) => Node::Const(-c),
        Node::Neg(inner) => *inner,
        other => Node::Neg(b(other)),
    }
}

pub(super) fn fold(node: &Node) -> Node {
    let folded = match node {
        Node::Const(_) | Node::Var(_) | Node::Param(_) => return node.clone(),
        Node::Neg(a) => return fold_neg(fold(a)),
        Node::Add(x, y) => {
            let (x, y) = (fold(x), fold(y));
            if is_const(&x, 0.0) {
                return y;
            }
            if is_const(&y, 0.0) {
                return x;
            }
            Node::Add(b(x), b(y))
        }
        Node::Sub(x, y) => {
            let (x, y) = (fold(x), fold(y));
            if is_const(&y, 0.0) {
                return x;
            }
            if is_const(&x, 0.0) {
                return fold_neg(y);
            }
            Node::Sub(b(x), b(y))
        }
        Node::Mul(x, y) => {
            let (x, y) = (fold(x), fold(y));
            if is_const(&x, 0.0) || is_const(&y, 0.0) {
                return zero();
            }
            if is_const(&x, 1.0) {
                return y;
            }
            if is_const(&y, 1.0) {
                return x;
            }
            match (x, y) {
                (Node::Const(c1), Node::Const(c2)) => Node::Const(c1 * c2),
                (Node::Const(c1), Node::Mul(inner, rest)) if matches!(*inner, Node::Const(_)) => {
                    let Node::Const(c2) = *inner else { unreachable!() };
                    return fold(&Node::Mul(b(Node::Const(c1 * c2)), rest));
                }
                (other, Node::Const(c)) if !matches!(other, Node::Mul(..)) => {
                    return fold(&Node::Mul(b(Node::Const(c)), b(other)));
                }
                (x, y) => Node::Mul(b(x), b(y)),
            }
        }
        Node::Div(x, y) => {
            let (x, y) = (fold(x), fold(y));
            if is_const(&y, 1.0) {
                return x;
            }
            if is_const(&x, 0.0) && !is_const(&y, 0.0) {
                return zero();
            }
            Node::Div(b(x), b(y))
        }
        Node::Pow(a, e) => {
            let a = fold(a);
            if e.value == 1.0 {
                return a;
            }
            if e.value == 0.0 {
                return one();
            }
            Node::Pow(b(a), *e)
        }
        Node::Call(f, a) => Node::Call(*f, b(fold(a))),
    };
    try_const(folded)
}
