//! Interval-valued functions given by endpoint expressions.

use crate::error::{Error, Result};
use crate::expr::{clarke_subdiff, Expr};
use crate::interval::Interval;
use crate::polytope::Polytope;

/// `f(u) = [lower(u), upper(u)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct IVFunction {
    lower: Expr,
    upper: Expr,
    dim: usize,
    center: Expr,
    halfwidth: Expr,
}

impl IVFunction {
    pub fn new(lower: Expr, upper: Expr, dim: usize) -> Result<Self> {
        for e in [&lower, &upper] {
            if e.arity() > dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.arity(),
                });
            }
        }
        let center = Expr::scale(0.5, Expr::sum(lower.clone(), upper.clone()));
        let halfwidth = Expr::scale(0.5, Expr::difference(upper.clone(), lower.clone()));
        Ok(IVFunction {
            lower,
            upper,
            dim,
            center,
            halfwidth,
        })
    }

    pub fn lower(&self) -> &Expr {
        &self.lower
    }

    pub fn upper(&self) -> &Expr {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(lower + upper) / 2`.
    pub fn center_expr(&self) -> &Expr {
        &self.center
    }

    /// `(upper - lower) / 2`.
    pub fn halfwidth_expr(&self) -> &Expr {
        &self.halfwidth
    }

    /// Fails when the lower endpoint exceeds the upper one at `u`.
    pub fn eval(&self, u: &[f64]) -> Result<Interval> {
        let lo = self.lower.eval(u);
        let hi = self.upper.eval(u);
        Interval::new(lo, hi).map_err(|_| Error::IvfViolation {
            objective: 0,
            point: u.to_vec(),
            lower: lo,
            upper: hi,
        })
    }

    /// `f^c(u) + f^w(u)`, computed from the endpoints.
    pub fn merit(&self, u: &[f64]) -> f64 {
        let lo = self.lower.eval(u);
        let hi = self.upper.eval(u);
        (lo + hi) / 2.0 + (hi - lo) / 2.0
    }

    /// Weakly generalized gradient `co(∂f^c(u) ∪ ∂f^w(u))`.
    pub fn weak_gen_gradient(&self, u: &[f64], tol: f64) -> Polytope {
        let c = clarke_subdiff(&self.center, u, tol);
        let w = clarke_subdiff(&self.halfwidth, u, tol);
        c.hull_union(&w)
    }

    /// Polytope of `f^c + f^w`, the merit whose level sets drive the
    /// descent and convexity checks.
    pub fn merit_subdiff(&self, u: &[f64], tol: f64) -> Polytope {
        clarke_subdiff(&Expr::sum(self.center.clone(), self.halfwidth.clone()), u, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, DEFAULT_KINK_TOL};
    use proptest::prelude::*;

    fn ivf(lo: &str, hi: &str, dim: usize) -> IVFunction {
        IVFunction::new(parse_expr(lo, dim).unwrap(), parse_expr(hi, dim).unwrap(), dim).unwrap()
    }

    fn sorted(p: &Polytope) -> Vec<Vec<f64>> {
        let mut g = p.extreme_points(1e-12);
        g.sort_by(|a, b| a.partial_cmp(b).unwrap());
        g
    }

    #[test]
    fn worked_example_gradients() {
        let f1 = ivf("abs(u0)", "abs(u0)+1", 1);
        let p = f1.weak_gen_gradient(&[0.0], DEFAULT_KINK_TOL);
        assert_eq!(sorted(&p), vec![vec![-1.0], vec![1.0]]);
        assert!(p.is_exact());
        let f2 = ivf("2*abs(u0)", "2*abs(u0)+2", 1);
        let p = f2.weak_gen_gradient(&[0.0], DEFAULT_KINK_TOL);
        assert_eq!(sorted(&p), vec![vec![-2.0], vec![2.0]]);
        assert!(p.is_exact());
    }

    #[test]
    fn smooth_endpoints_give_segment() {
        let f = ivf("u0^2", "3*u0^2", 1);
        let p = f.weak_gen_gradient(&[0.5], DEFAULT_KINK_TOL);
        assert_eq!(p.as_interval(), Some((1.0, 2.0)));
    }

    #[test]
    fn evaluation_and_violation() {
        let f = ivf("abs(u0)", "abs(u0)+1", 1);
        assert_eq!(f.eval(&[2.0]).unwrap(), Interval::new(2.0, 3.0).unwrap());
        assert_eq!(f.merit(&[2.0]), 3.0);
        let bad = ivf("u0", "0", 1);
        assert!(matches!(bad.eval(&[1.0]), Err(Error::IvfViolation { .. })));
    }

    proptest! {
        #[test]
        fn support_is_max_of_operands(
            lo in crate::expr::tests::any_expr(),
            gap in crate::expr::tests::any_expr(),
            u in prop::collection::vec((-16i32..16).prop_map(|k| k as f64 / 8.0), 2),
            w in prop::collection::vec(-1.0f64..1.0, 2),
        ) {
            let f = IVFunction::new(lo.clone(), Expr::sum(lo, Expr::abs(gap)), 2).unwrap();
            let p = f.weak_gen_gradient(&u, DEFAULT_KINK_TOL);
            let c = clarke_subdiff(f.center_expr(), &u, DEFAULT_KINK_TOL);
            let h = clarke_subdiff(f.halfwidth_expr(), &u, DEFAULT_KINK_TOL);
            prop_assert_eq!(p.support(&w), c.support(&w).max(h.support(&w)));
        }
    }
}
