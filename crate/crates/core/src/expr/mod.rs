//! Piecewise-smooth scalar expressions.
//!
//! Every expression in this grammar is locally Lipschitz: smooth operations
//! (`*`, `^`) only accept smooth operands, and the nonsmooth atoms are
//! `abs`, `max` and `min`.

mod clarke;
mod parse;

use std::fmt;

pub use clarke::{clarke_subdiff, gradient, DEFAULT_KINK_TOL};
pub use parse::{parse_expr, ParseError};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Sum(Box<Expr>, Box<Expr>),
    Scale(f64, Box<Expr>),
    /// Both factors smooth.
    Product(Box<Expr>, Box<Expr>),
    /// Smooth base, positive exponent.
    Power(Box<Expr>, u32),
    Abs(Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn var(i: usize) -> Self {
        Expr::Var(i)
    }

    pub fn sum(a: Expr, b: Expr) -> Self {
        Expr::Sum(Box::new(a), Box::new(b))
    }

    pub fn scale(c: f64, a: Expr) -> Self {
        Expr::Scale(c, Box::new(a))
    }

    /// `a - b`, encoded as `a + (-1)·b`.
    pub fn difference(a: Expr, b: Expr) -> Self {
        Expr::sum(a, Expr::scale(-1.0, b))
    }

    pub fn abs(a: Expr) -> Self {
        Expr::Abs(Box::new(a))
    }

    pub fn max(a: Expr, b: Expr) -> Self {
        Expr::Max(Box::new(a), Box::new(b))
    }

    pub fn min(a: Expr, b: Expr) -> Self {
        Expr::Min(Box::new(a), Box::new(b))
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => u[*i],
            Expr::Sum(a, b) => a.eval(u) + b.eval(u),
            Expr::Scale(c, a) => c * a.eval(u),
            Expr::Product(a, b) => a.eval(u) * b.eval(u),
            Expr::Power(a, k) => a.eval(u).powi(*k as i32),
            Expr::Abs(a) => a.eval(u).abs(),
            Expr::Max(a, b) => a.eval(u).max(b.eval(u)),
            Expr::Min(a, b) => a.eval(u).min(b.eval(u)),
        }
    }

    /// True iff no `abs`/`max`/`min` node occurs.
    pub fn is_smooth(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => true,
            Expr::Sum(a, b) | Expr::Product(a, b) => a.is_smooth() && b.is_smooth(),
            Expr::Scale(_, a) | Expr::Power(a, _) => a.is_smooth(),
            Expr::Abs(_) | Expr::Max(..) | Expr::Min(..) => false,
        }
    }

    /// Largest variable index plus one (0 for variable-free expressions).
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Scale(_, a) | Expr::Power(a, _) | Expr::Abs(a) => a.arity(),
            Expr::Sum(a, b) | Expr::Product(a, b) | Expr::Max(a, b) | Expr::Min(a, b) => {
                a.arity().max(b.arity())
            }
        }
    }

    pub fn variables(&self) -> Vec<usize> {
        fn walk(e: &Expr, out: &mut Vec<usize>) {
            match e {
                Expr::Const(_) => {}
                Expr::Var(i) => out.push(*i),
                Expr::Scale(_, a) | Expr::Power(a, _) | Expr::Abs(a) => walk(a, out),
                Expr::Sum(a, b) | Expr::Product(a, b) | Expr::Max(a, b) | Expr::Min(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Replaces every variable by either another variable or a constant,
    /// then folds variable-free subtrees into constants.
    pub fn substitute(&self, f: &dyn Fn(usize) -> Substitution) -> Expr {
        let rebuilt = self.map_vars(f);
        rebuilt.fold_constants()
    }

    fn map_vars(&self, f: &dyn Fn(usize) -> Substitution) -> Expr {
        let bx = |e: &Expr| Box::new(e.map_vars(f));
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(i) => match f(*i) {
                Substitution::Var(j) => Expr::Var(j),
                Substitution::Value(v) => Expr::Const(v),
            },
            Expr::Sum(a, b) => Expr::Sum(bx(a), bx(b)),
            Expr::Scale(c, a) => Expr::Scale(*c, bx(a)),
            Expr::Product(a, b) => Expr::Product(bx(a), bx(b)),
            Expr::Power(a, k) => Expr::Power(bx(a), *k),
            Expr::Abs(a) => Expr::Abs(bx(a)),
            Expr::Max(a, b) => Expr::Max(bx(a), bx(b)),
            Expr::Min(a, b) => Expr::Min(bx(a), bx(b)),
        }
    }

    /// Collapses every variable-free subtree into a single constant.
    pub fn fold_constants(&self) -> Expr {
        if self.arity() == 0 {
            return Expr::Const(self.eval(&[]));
        }
        let bx = |e: &Expr| Box::new(e.fold_constants());
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Sum(a, b) => Expr::Sum(bx(a), bx(b)),
            Expr::Scale(c, a) => Expr::Scale(*c, bx(a)),
            Expr::Product(a, b) => Expr::Product(bx(a), bx(b)),
            Expr::Power(a, k) => Expr::Power(bx(a), *k),
            Expr::Abs(a) => Expr::Abs(bx(a)),
            Expr::Max(a, b) => Expr::Max(bx(a), bx(b)),
            Expr::Min(a, b) => Expr::Min(bx(a), bx(b)),
        }
    }
}

/// Target of a variable substitution.
#[derive(Clone, Copy, Debug)]
pub enum Substitution {
    Var(usize),
    Value(f64),
}

fn fmt_number(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c < 0.0 || (c == 0.0 && c.is_sign_negative()) {
        write!(f, "(-{})", -c)
    } else {
        write!(f, "{c}")
    }
}

/// Prints text that parses back to the identical tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => fmt_number(f, *c),
            Expr::Var(i) => write!(f, "u{i}"),
            Expr::Sum(a, b) => write!(f, "({a} + {b})"),
            Expr::Scale(c, a) => {
                fmt_number(f, *c)?;
                write!(f, "*({a})")
            }
            Expr::Product(a, b) => write!(f, "({a})*({b})"),
            Expr::Power(a, k) => write!(f, "({a})^{k}"),
            Expr::Abs(a) => write!(f, "abs({a})"),
            Expr::Max(a, b) => write!(f, "max({a}, {b})"),
            Expr::Min(a, b) => write!(f, "min({a}, {b})"),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn evaluation() {
        let abs = parse_expr("abs(u0)", 1).unwrap();
        assert_eq!(abs.eval(&[-2.0]), 2.0);
        let upper = parse_expr("abs(u0)+1", 1).unwrap();
        assert_eq!(upper.eval(&[2.0]), 3.0);
        let m = parse_expr("max(u0, -2*u0)", 1).unwrap();
        assert_eq!(m.eval(&[1.0]), 1.0);
    }

    #[test]
    fn substitution_folds_opponents() {
        let e = parse_expr("(u0-u1)^2", 2).unwrap();
        let sub = e.substitute(&|i| {
            if i == 0 {
                Substitution::Var(0)
            } else {
                Substitution::Value(0.5)
            }
        });
        let expected = parse_expr("(u0-0.5)^2", 1).unwrap();
        for x in [-1.0, 0.0, 0.3, 2.0] {
            assert_eq!(sub.eval(&[x]), expected.eval(&[x]));
        }
        assert_eq!(sub.arity(), 1);
    }

    fn leaf() -> impl Strategy<Value = Expr> {
        prop_oneof![
            (-8i32..8).prop_map(|k| Expr::Const(k as f64 / 4.0)),
            (0usize..2).prop_map(Expr::Var),
        ]
    }

    fn smooth_expr() -> impl Strategy<Value = Expr> {
        leaf().prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sum(a, b)),
                ((-4i32..4), inner.clone())
                    .prop_map(|(c, a)| Expr::scale(c as f64 / 2.0, a)),
                (inner.clone(), 1u32..3).prop_map(|(a, k)| Expr::Power(Box::new(a), k)),
            ]
        })
    }

    pub(crate) fn any_expr() -> impl Strategy<Value = Expr> {
        smooth_expr().prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sum(a, b)),
                ((-4i32..4), inner.clone())
                    .prop_map(|(c, a)| Expr::scale(c as f64 / 2.0, a)),
                inner.clone().prop_map(Expr::abs),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::max(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::min(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_parses_back(e in any_expr()) {
            let text = e.to_string();
            let back = parse_expr(&text, 2).unwrap();
            for u in [[0.0, 0.0], [0.5, -1.25], [-2.0, 3.0]] {
                prop_assert_eq!(back.eval(&u).to_bits(), e.eval(&u).to_bits());
            }
            prop_assert_eq!(&back, &e);
            prop_assert_eq!(back.to_string(), text);
        }
    }
}
