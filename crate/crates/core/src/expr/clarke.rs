//! Generalized gradients of expressions as finitely generated polytopes.

use super::Expr;
use crate::polytope::Polytope;

/// Absolute tolerance for deciding which branches of `abs`/`max`/`min` are active.
pub const DEFAULT_KINK_TOL: f64 = 1e-9;

/// How much of the calculus is known to hold with equality.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Class {
    Smooth,
    /// Clarke regular: sums and max-rules are equalities.
    Regular,
    /// Negative of a regular function.
    AntiRegular,
    General,
}

impl Class {
    fn flip(self) -> Class {
        match self {
            Class::Regular => Class::AntiRegular,
            Class::AntiRegular => Class::Regular,
            c => c,
        }
    }

    fn scaled(self, c: f64) -> Class {
        if c == 0.0 {
            Class::Smooth
        } else if c < 0.0 {
            self.flip()
        } else {
            self
        }
    }

    fn plus(self, other: Class) -> Class {
        match (self, other) {
            (Class::Smooth, c) | (c, Class::Smooth) => c,
            (a, b) if a == b => a,
            _ => Class::General,
        }
    }
}

/// Gradient of `e` at `u`.
///
/// Exact for smooth expressions. At a kink of `abs`/`max`/`min` the
/// derivative of the first active branch is returned.
pub fn gradient(e: &Expr, u: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; u.len()];
    accumulate_gradient(e, u, 1.0, &mut g);
    g
}

fn accumulate_gradient(e: &Expr, u: &[f64], c: f64, g: &mut [f64]) {
    if c == 0.0 {
        return;
    }
    match e {
        Expr::Const(_) => {}
        Expr::Var(i) => g[*i] += c,
        Expr::Sum(a, b) => {
            accumulate_gradient(a, u, c, g);
            accumulate_gradient(b, u, c, g);
        }
        Expr::Scale(k, a) => accumulate_gradient(a, u, c * k, g),
        Expr::Product(a, b) => {
            accumulate_gradient(a, u, c * b.eval(u), g);
            accumulate_gradient(b, u, c * a.eval(u), g);
        }
        Expr::Power(a, k) => {
            let d = *k as f64 * a.eval(u).powi(*k as i32 - 1);
            accumulate_gradient(a, u, c * d, g);
        }
        Expr::Abs(a) => {
            let s = if a.eval(u) < 0.0 { -1.0 } else { 1.0 };
            accumulate_gradient(a, u, c * s, g);
        }
        Expr::Max(a, b) => {
            let pick = if a.eval(u) >= b.eval(u) { a } else { b };
            accumulate_gradient(pick, u, c, g);
        }
        Expr::Min(a, b) => {
            let pick = if a.eval(u) <= b.eval(u) { a } else { b };
            accumulate_gradient(pick, u, c, g);
        }
    }
}

/// A polytope containing the Clarke generalized gradient of `e` at `u`.
///
/// Sums are flattened into linear combinations of atoms first, so terms that
/// cancel symbolically (`|u| + 1 - |u|`) contribute nothing. The result is
/// flagged exact when the calculus rules used are known to be equalities.
pub fn clarke_subdiff(e: &Expr, u: &[f64], tol: f64) -> Polytope {
    let (generators, class) = subdiff(e, u, tol);
    Polytope::from_parts(u.len(), generators, class != Class::General)
}

type Gens = Vec<Vec<f64>>;

fn subdiff(e: &Expr, u: &[f64], tol: f64) -> (Gens, Class) {
    let n = u.len();
    let mut atoms: Vec<(f64, &Expr)> = Vec::new();
    flatten(e, 1.0, &mut atoms);
    atoms.retain(|(c, _)| *c != 0.0);

    let mut acc: Gens = vec![vec![0.0; n]];
    let mut class = Class::Smooth;
    for (c, atom) in atoms {
        let (gens, cl) = atom_subdiff(atom, u, tol);
        class = class.plus(cl.scaled(c));
        let mut next = Vec::with_capacity(acc.len() * gens.len());
        for a in &acc {
            for g in &gens {
                next.push(a.iter().zip(g).map(|(x, y)| x + c * y).collect());
            }
        }
        acc = dedup(next);
    }
    (acc, class)
}

fn flatten<'a>(e: &'a Expr, c: f64, out: &mut Vec<(f64, &'a Expr)>) {
    match e {
        Expr::Const(_) => {}
        Expr::Sum(a, b) => {
            flatten(a, c, out);
            flatten(b, c, out);
        }
        Expr::Scale(k, a) => flatten(a, c * k, out),
        _ => match out.iter_mut().find(|(_, x)| *x == e) {
            Some(slot) => slot.0 += c,
            None => out.push((c, e)),
        },
    }
}

fn dedup(gens: Gens) -> Gens {
    let mut out: Gens = Vec::with_capacity(gens.len());
    for g in gens {
        if !out.contains(&g) {
            out.push(g);
        }
    }
    out
}

fn negate(gens: &Gens) -> Gens {
    gens.iter()
        .map(|g| g.iter().map(|x| -x).collect())
        .collect()
}

fn union(a: Gens, b: Gens) -> Gens {
    let mut all = a;
    all.extend(b);
    dedup(all)
}

fn atom_subdiff(e: &Expr, u: &[f64], tol: f64) -> (Gens, Class) {
    if e.is_smooth() {
        return (vec![gradient(e, u)], Class::Smooth);
    }
    match e {
        Expr::Abs(a) => {
            let v = a.eval(u);
            let (gens, cl) = subdiff(a, u, tol);
            if 2.0 * v.abs() <= tol {
                let class = if cl == Class::Smooth {
                    Class::Regular
                } else {
                    Class::General
                };
                let neg = negate(&gens);
                (union(gens, neg), class)
            } else if v > 0.0 {
                (gens, cl)
            } else {
                (negate(&gens), cl.flip())
            }
        }
        Expr::Max(a, b) | Expr::Min(a, b) => {
            let is_max = matches!(e, Expr::Max(..));
            let (va, vb) = (a.eval(u), b.eval(u));
            let best = if is_max { va.max(vb) } else { va.min(vb) };
            let active = |v: f64| (v - best).abs() <= tol;
            match (active(va), active(vb)) {
                (true, true) => {
                    let (ga, ca) = subdiff(a, u, tol);
                    let (gb, cb) = subdiff(b, u, tol);
                    let want = if is_max {
                        Class::Regular
                    } else {
                        Class::AntiRegular
                    };
                    let ok = |c: Class| c == Class::Smooth || c == want;
                    let class = if ok(ca) && ok(cb) { want } else { Class::General };
                    (union(ga, gb), class)
                }
                (true, false) => subdiff(a, u, tol),
                _ => subdiff(b, u, tol),
            }
        }
        Expr::Product(a, b) => {
            // product rule, an inclusion only
            let (ga, _) = subdiff(a, u, tol);
            let (gb, _) = subdiff(b, u, tol);
            let (va, vb) = (a.eval(u), b.eval(u));
            let mut out = Vec::new();
            for x in &ga {
                for y in &gb {
                    out.push(x.iter().zip(y).map(|(p, q)| vb * p + va * q).collect());
                }
            }
            (dedup(out), Class::General)
        }
        Expr::Power(a, k) => {
            let d = *k as f64 * a.eval(u).powi(*k as i32 - 1);
            let (ga, _) = subdiff(a, u, tol);
            let out = ga
                .iter()
                .map(|g| g.iter().map(|x| d * x).collect())
                .collect();
            (dedup(out), Class::General)
        }
        Expr::Const(_) | Expr::Var(_) | Expr::Sum(..) | Expr::Scale(..) => {
            subdiff(e, u, tol)
        }
    }
}
