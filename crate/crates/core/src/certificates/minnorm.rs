//! Minimum-norm points of Minkowski sums of simple polytopes.
//!
//! The solver is Wolfe's minimum-norm-point method: a conditional-gradient
//! outer loop whose linear oracle enumerates generators factor by factor,
//! with the iterate re-optimized over the affine hull of the atoms in use.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polytope::{dot, norm, Polytope};

/// One piece of a [`Factor::Hull`]: the points of `gens`, optionally
/// thickened by a Euclidean ball of radius `inflate`.
#[derive(Clone, Debug)]
pub struct Group {
    pub gens: Vec<Vec<f64>>,
    pub inflate: f64,
}

#[derive(Clone, Debug)]
pub enum Factor {
    /// Convex hull of the union of the groups.
    Hull(Vec<Group>),
    /// `{t·v : t ∈ [0, cap], v ∈ co(gens)}`.
    Ray { gens: Vec<Vec<f64>>, cap: f64 },
    /// `co({0} ∪ ⋃ cap_i·gens_i)`: one shared budget across several rays.
    Budget(Vec<(Vec<Vec<f64>>, f64)>),
}

impl Factor {
    fn parts(&self) -> usize {
        match self {
            Factor::Hull(groups) => groups.len(),
            Factor::Ray { .. } => 1,
            Factor::Budget(items) => items.len(),
        }
    }

    fn first_gen(&self, part: usize) -> &[f64] {
        match self {
            Factor::Hull(groups) => &groups[part].gens[0],
            Factor::Ray { gens, .. } => &gens[0],
            Factor::Budget(items) => &items[part].0[0],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Choice {
    Zero,
    Gen { part: usize, gen: usize },
}

#[derive(Clone, Debug)]
struct Atom {
    choices: Vec<Choice>,
    /// Ball contribution, already scaled by the inflation radius.
    ball: Vec<f64>,
    point: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_iter: 100_000,
        }
    }
}

/// How the minimum-norm point splits across factors.
#[derive(Clone, Debug, Serialize)]
pub struct MinNorm {
    pub point: Vec<f64>,
    pub residual: f64,
    /// Certified lower bound on the true minimum norm.
    pub lower_bound: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Per factor, per part: total weight of atoms using that part.
    pub weights: Vec<Vec<f64>>,
    /// Per factor, per part: weighted mean of the generators used (unscaled).
    pub witnesses: Vec<Vec<Vec<f64>>>,
    /// Total contribution of the inflation balls.
    pub ball: Vec<f64>,
}

fn lmo(factors: &[Factor], d: &[f64], dim: usize) -> Atom {
    let dn = norm(d);
    let mut point = vec![0.0; dim];
    let mut ball = vec![0.0; dim];
    let mut choices = Vec::with_capacity(factors.len());
    for f in factors {
        let mut best = (0.0, Choice::Zero);
        let mut first = true;
        let mut consider = |val: f64, c: Choice, best: &mut (f64, Choice)| {
            if first || val < best.0 {
                *best = (val, c);
                first = false;
            }
        };
        match f {
            Factor::Hull(groups) => {
                for (part, g) in groups.iter().enumerate() {
                    for (gen, v) in g.gens.iter().enumerate() {
                        consider(dot(v, d) - g.inflate * dn, Choice::Gen { part, gen }, &mut best);
                    }
                }
            }
            Factor::Ray { gens, cap } => {
                consider(0.0, Choice::Zero, &mut best);
                for (gen, v) in gens.iter().enumerate() {
                    consider(cap * dot(v, d), Choice::Gen { part: 0, gen }, &mut best);
                }
            }
            Factor::Budget(items) => {
                consider(0.0, Choice::Zero, &mut best);
                for (part, (gens, cap)) in items.iter().enumerate() {
                    for (gen, v) in gens.iter().enumerate() {
                        consider(cap * dot(v, d), Choice::Gen { part, gen }, &mut best);
                    }
                }
            }
        }
        if let Choice::Gen { part, gen } = best.1 {
            let (v, scale) = match f {
                Factor::Hull(groups) => {
                    let g = &groups[part];
                    if g.inflate > 0.0 && dn > 0.0 {
                        for (b, di) in ball.iter_mut().zip(d) {
                            *b -= g.inflate * di / dn;
                        }
                    }
                    (&g.gens[gen], 1.0)
                }
                Factor::Ray { gens, cap } => (&gens[gen], *cap),
                Factor::Budget(items) => (&items[part].0[gen], items[part].1),
            };
            for (p, x) in point.iter_mut().zip(v) {
                *p += scale * x;
            }
        }
        choices.push(best.1);
    }
    for (p, b) in point.iter_mut().zip(&ball) {
        *p += b;
    }
    Atom {
        choices,
        ball,
        point,
    }
}

/// Minimizes `‖Σ α_i p_i‖` subject to `Σ α_i = 1`.
fn affine_minimizer(points: &[&[f64]]) -> Option<Vec<f64>> {
    let k = points.len();
    let mut m = DMatrix::<f64>::zeros(k + 1, k + 1);
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] = dot(points[i], points[j]);
        }
        m[(i, k)] = 1.0;
        m[(k, i)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(k + 1);
    rhs[k] = 1.0;
    let scale = m.amax().max(1.0);
    let sol = m.svd(true, true).solve(&rhs, 1e-15 * scale).ok()?;
    let alpha: Vec<f64> = (0..k).map(|i| sol[i]).collect();
    let s: f64 = alpha.iter().sum();
    (s.is_finite() && s.abs() > 0.5).then(|| alpha.iter().map(|a| a / s).collect())
}

fn combine(atoms: &[Atom], w: &[f64], dim: usize) -> Vec<f64> {
    let mut x = vec![0.0; dim];
    for (a, wi) in atoms.iter().zip(w) {
        for (xi, p) in x.iter_mut().zip(&a.point) {
            *xi += wi * p;
        }
    }
    x
}

/// Minimum-norm point of `F_1 + … + F_r`.
pub fn min_norm(factors: &[Factor], dim: usize, opts: &SolverOptions) -> Result<MinNorm> {
    for f in factors {
        let ok = match f {
            Factor::Hull(groups) => {
                !groups.is_empty()
                    && groups
                        .iter()
                        .all(|g| !g.gens.is_empty() && g.gens.iter().all(|v| v.len() == dim))
            }
            Factor::Ray { gens, .. } => !gens.is_empty() && gens.iter().all(|v| v.len() == dim),
            Factor::Budget(items) => items
                .iter()
                .all(|(gens, _)| !gens.is_empty() && gens.iter().all(|v| v.len() == dim)),
        };
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "factor with missing generators or dimension other than {dim}"
            )));
        }
    }

    let mut atoms = vec![lmo(factors, &vec![0.0; dim], dim)];
    let mut w = vec![1.0];
    let mut x = atoms[0].point.clone();
    let mut iterations = 0;
    let mut lower = 0.0;
    let mut converged = false;

    while iterations < opts.max_iter {
        iterations += 1;
        let r = norm(&x);
        let q = lmo(factors, &x, dim);
        lower = if r > 0.0 { (dot(&x, &q.point) / r).max(0.0) } else { 0.0 };
        if r <= f64::MIN_POSITIVE || r - lower <= opts.tol {
            converged = true;
            break;
        }
        if atoms.iter().any(|a| a.point == q.point) {
            break;
        }
        atoms.push(q);
        w.push(0.0);
        let before = dot(&x, &x);

        loop {
            let pts: Vec<&[f64]> = atoms.iter().map(|a| a.point.as_slice()).collect();
            let Some(alpha) = affine_minimizer(&pts) else {
                break;
            };
            if alpha.iter().all(|a| *a > 1e-14) {
                w = alpha;
                break;
            }
            let mut theta = 1.0f64;
            for (wi, ai) in w.iter().zip(&alpha) {
                if *ai <= 1e-14 {
                    let t = wi / (wi - ai);
                    if t.is_finite() {
                        theta = theta.min(t);
                    }
                }
            }
            let theta = theta.clamp(0.0, 1.0);
            for (wi, ai) in w.iter_mut().zip(&alpha) {
                *wi = theta * ai + (1.0 - theta) * *wi;
            }
            let mut keep = Vec::with_capacity(w.len());
            let mut dropped = false;
            for (i, wi) in w.iter().enumerate() {
                if *wi > 1e-14 {
                    keep.push(i);
                } else {
                    dropped = true;
                }
            }
            if !dropped {
                // numerical corner: drop the smallest weight
                let (imin, _) = w
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .unwrap();
                keep.retain(|i| *i != imin);
            }
            atoms = keep.iter().map(|&i| atoms[i].clone()).collect();
            w = keep.iter().map(|&i| w[i]).collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|wi| *wi /= s);
            if atoms.len() <= 1 {
                break;
            }
        }
        x = combine(&atoms, &w, dim);
        if dot(&x, &x) >= before && iterations > 1 {
            break;
        }
    }

    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|wi| *wi /= s);
    x = combine(&atoms, &w, dim);
    let residual = norm(&x);
    let lower_bound = lower.min(residual);
    if !converged && residual - lower_bound <= opts.tol {
        converged = true;
    }

    let mut weights: Vec<Vec<f64>> = factors.iter().map(|f| vec![0.0; f.parts()]).collect();
    let mut sums: Vec<Vec<Vec<f64>>> = factors
        .iter()
        .map(|f| vec![vec![0.0; dim]; f.parts()])
        .collect();
    let mut ball = vec![0.0; dim];
    for (a, wi) in atoms.iter().zip(&w) {
        for (b, ab) in ball.iter_mut().zip(&a.ball) {
            *b += wi * ab;
        }
        for (fi, (f, c)) in factors.iter().zip(&a.choices).enumerate() {
            if let Choice::Gen { part, gen } = c {
                let v = match f {
                    Factor::Hull(groups) => &groups[*part].gens[*gen],
                    Factor::Ray { gens, .. } => &gens[*gen],
                    Factor::Budget(items) => &items[*part].0[*gen],
                };
                weights[fi][*part] += wi;
                for (sacc, vi) in sums[fi][*part].iter_mut().zip(v) {
                    *sacc += wi * vi;
                }
            }
        }
    }
    let witnesses = factors
        .iter()
        .enumerate()
        .map(|(fi, f)| {
            (0..f.parts())
                .map(|p| {
                    let wt = weights[fi][p];
                    if wt > 0.0 {
                        sums[fi][p].iter().map(|s| s / wt).collect()
                    } else {
                        f.first_gen(p).to_vec()
                    }
                })
                .collect()
        })
        .collect();

    Ok(MinNorm {
        point: x,
        residual,
        lower_bound,
        iterations,
        converged,
        weights,
        witnesses,
        ball,
    })
}

/// Euclidean distance from `target` to `co(points)`.
pub fn distance_to_hull(points: &[Vec<f64>], target: &[f64], tol: f64) -> f64 {
    let gens = points
        .iter()
        .map(|p| p.iter().zip(target).map(|(a, b)| a - b).collect())
        .collect();
    let opts = SolverOptions {
        tol,
        ..SolverOptions::default()
    };
    min_norm(&[Factor::Hull(vec![Group { gens, inflate: 0.0 }])], target.len(), &opts)
        .map(|m| m.residual)
        .unwrap_or(f64::INFINITY)
}

/// Outcome of minimizing `‖Σ λ_k w_k + Σ μ_j v_j‖` over simplex `λ`,
/// `μ ∈ [0, μ_max]^p` and subgradients from the given polytopes.
#[derive(Clone, Debug, Serialize)]
pub struct MultiplierSolution {
    /// Norm of the combination rebuilt from `lambda`, `mu` and the witnesses.
    pub residual: f64,
    pub lower_bound: f64,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub objective_witnesses: Vec<Vec<f64>>,
    pub constraint_witnesses: Vec<Vec<f64>>,
    /// Norm of the ball part when objectives are inflated.
    pub ball_norm: f64,
    /// Distance from the origin to the (possibly inflated) set.
    pub solver_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub mu_at_cap: bool,
}

fn check_dims(polys: &[&Polytope], dim: usize) -> Result<()> {
    match polys.iter().find(|p| p.dim() != dim) {
        Some(p) => Err(Error::DimensionMismatch {
            expected: dim,
            found: p.dim(),
        }),
        None => Ok(()),
    }
}

/// Constraint side of a multiplier problem.
#[derive(Clone, Debug)]
pub enum ConstraintTerm {
    /// `μ_j ∈ [0, cap]`.
    Free { poly: Polytope, cap: f64 },
    /// Members of one shared budget `Σ μ_j c_j ≤ budget`; stored as the
    /// per-constraint cap `min(budget / c_j, μ_max)`.
    Budgeted { poly: Polytope, cap: f64 },
}

impl ConstraintTerm {
    fn poly(&self) -> &Polytope {
        match self {
            ConstraintTerm::Free { poly, .. } | ConstraintTerm::Budgeted { poly, .. } => poly,
        }
    }
}

/// Minimum norm over `co(⋃ (P_k + ε_k B)) + Σ_j μ_j ∂g_j`.
pub fn solve_multipliers(
    objectives: &[Polytope],
    inflate: &[f64],
    constraints: &[ConstraintTerm],
    opts: &SolverOptions,
) -> Result<MultiplierSolution> {
    if objectives.is_empty() {
        return Err(Error::InvalidArgument("no objective polytopes".into()));
    }
    let dim = objectives[0].dim();
    let all: Vec<&Polytope> = objectives
        .iter()
        .chain(constraints.iter().map(|c| c.poly()))
        .collect();
    check_dims(&all, dim)?;

    let groups = objectives
        .iter()
        .enumerate()
        .map(|(k, p)| Group {
            gens: p.generators().to_vec(),
            inflate: inflate.get(k).copied().unwrap_or(0.0),
        })
        .collect();
    let mut factors = vec![Factor::Hull(groups)];
    let mut slots = Vec::new();
    let mut budget = Vec::new();
    for (j, c) in constraints.iter().enumerate() {
        match c {
            ConstraintTerm::Free { poly, cap } => {
                slots.push((j, factors.len(), 0));
                factors.push(Factor::Ray {
                    gens: poly.generators().to_vec(),
                    cap: *cap,
                });
            }
            ConstraintTerm::Budgeted { poly, cap } => {
                budget.push((j, (poly.generators().to_vec(), *cap)));
            }
        }
    }
    if !budget.is_empty() {
        let fi = factors.len();
        for (part, (j, _)) in budget.iter().enumerate() {
            slots.push((*j, fi, part));
        }
        factors.push(Factor::Budget(budget.into_iter().map(|(_, b)| b).collect()));
    }

    let sol = min_norm(&factors, dim, opts)?;

    let lambda = sol.weights[0].clone();
    let objective_witnesses = sol.witnesses[0].clone();
    let mut mu = vec![0.0; constraints.len()];
    let mut constraint_witnesses = vec![Vec::new(); constraints.len()];
    let mut mu_at_cap = false;
    for (j, fi, part) in slots {
        let cap = match &constraints[j] {
            ConstraintTerm::Free { cap, .. } | ConstraintTerm::Budgeted { cap, .. } => *cap,
        };
        mu[j] = cap * sol.weights[fi][part];
        constraint_witnesses[j] = sol.witnesses[fi][part].clone();
        if let ConstraintTerm::Free { .. } = constraints[j] {
            if mu[j] >= cap * (1.0 - 1e-9) {
                mu_at_cap = true;
            }
        }
    }
    let residual = combination_norm(
        &lambda,
        &objective_witnesses,
        &mu,
        &constraint_witnesses,
        dim,
    );
    Ok(MultiplierSolution {
        residual,
        lower_bound: sol.lower_bound.min(residual),
        lambda,
        mu,
        objective_witnesses,
        constraint_witnesses,
        ball_norm: norm(&sol.ball),
        solver_residual: sol.residual,
        iterations: sol.iterations,
        converged: sol.converged,
        mu_at_cap,
    })
}

/// `‖Σ λ_k w_k + Σ μ_j v_j‖`.
pub fn combination_norm(
    lambda: &[f64],
    w: &[Vec<f64>],
    mu: &[f64],
    v: &[Vec<f64>],
    dim: usize,
) -> f64 {
    let mut x = vec![0.0; dim];
    for (l, wk) in lambda.iter().zip(w) {
        for (xi, a) in x.iter_mut().zip(wk) {
            *xi += l * a;
        }
    }
    for (m, vj) in mu.iter().zip(v) {
        if *m != 0.0 {
            for (xi, a) in x.iter_mut().zip(vj) {
                *xi += m * a;
            }
        }
    }
    norm(&x)
}

/// The plain multiplier problem: simplex `λ`, each `μ_j ∈ [0, μ_max]`.
pub fn min_norm_over_multipliers(
    objectives: &[Polytope],
    constraints: &[Polytope],
    mu_max: f64,
    opts: &SolverOptions,
) -> Result<MultiplierSolution> {
    if !(mu_max > 0.0) {
        return Err(Error::InvalidArgument(format!("mu_max must be positive, got {mu_max}")));
    }
    let terms: Vec<ConstraintTerm> = constraints
        .iter()
        .map(|p| ConstraintTerm::Free {
            poly: p.clone(),
            cap: mu_max,
        })
        .collect();
    solve_multipliers(objectives, &[], &terms, opts)
}

/// Smallest `‖Σ λ_k w_k + Σ μ_j v_j‖` for fixed multipliers, together with
/// the minimizing witnesses.
pub fn residual_for_multipliers(
    objectives: &[Polytope],
    constraints: &[Polytope],
    lambda: &[f64],
    mu: &[f64],
    opts: &SolverOptions,
) -> Result<(f64, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    if lambda.len() != objectives.len() || mu.len() != constraints.len() {
        return Err(Error::DimensionMismatch {
            expected: objectives.len() + constraints.len(),
            found: lambda.len() + mu.len(),
        });
    }
    let dim = objectives
        .first()
        .or(constraints.first())
        .map(|p| p.dim())
        .ok_or_else(|| Error::InvalidArgument("no polytopes".into()))?;
    let all: Vec<&Polytope> = objectives.iter().chain(constraints).collect();
    check_dims(&all, dim)?;
    let scaled = |p: &Polytope, c: f64| {
        Factor::Hull(vec![Group {
            gens: p
                .generators()
                .iter()
                .map(|g| g.iter().map(|x| c * x).collect())
                .collect(),
            inflate: 0.0,
        }])
    };
    let factors: Vec<Factor> = objectives
        .iter()
        .zip(lambda)
        .chain(constraints.iter().zip(mu))
        .map(|(p, c)| scaled(p, *c))
        .collect();
    let sol = min_norm(&factors, dim, opts)?;
    let m = objectives.len();
    let unscale = |fi: usize, c: f64| -> Vec<f64> {
        if c != 0.0 {
            sol.witnesses[fi][0].iter().map(|x| x / c).collect()
        } else {
            all[fi].generators()[0].clone()
        }
    };
    let w: Vec<Vec<f64>> = (0..m).map(|k| unscale(k, lambda[k])).collect();
    let v: Vec<Vec<f64>> = (0..mu.len()).map(|j| unscale(m + j, mu[j])).collect();
    let residual = combination_norm(lambda, &w, mu, &v, dim);
    Ok((residual, w, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn poly1(points: &[f64]) -> Polytope {
        Polytope::from_parts(1, points.iter().map(|x| vec![*x]).collect(), true)
    }

    #[test]
    fn worked_example_multipliers() {
        let obj = [poly1(&[-1.0, 1.0]), poly1(&[-2.0, 2.0])];
        let con = [poly1(&[-1.0])];
        let sol = min_norm_over_multipliers(&obj, &con, 1e3, &SolverOptions::default()).unwrap();
        assert!(sol.residual <= 1e-9);
        assert!((sol.lambda.iter().sum::<f64>() - 1.0).abs() <= 1e-12);

        let (r, _, _) = residual_for_multipliers(
            &obj,
            &con,
            &[0.5, 0.5],
            &[0.5],
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(r <= 1e-12, "{r}");
    }

    #[test]
    fn segment_projection() {
        let p = Polytope::from_parts(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]], true);
        let sol = min_norm_over_multipliers(&[p], &[], 1e3, &SolverOptions::default()).unwrap();
        assert!((sol.residual - 0.5f64.sqrt()).abs() <= 1e-12);
        assert!((sol.lambda[0] - 1.0).abs() <= 1e-12);
        let w = &sol.objective_witnesses[0];
        assert!((w[0] - 0.5).abs() <= 1e-12 && (w[1] - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn origin_generator() {
        let a = poly1(&[1.0, 2.0]);
        let b = poly1(&[0.0, 3.0]);
        let sol =
            min_norm_over_multipliers(&[a, b], &[], 1e3, &SolverOptions::default()).unwrap();
        assert_eq!(sol.residual, 0.0);
        assert!((sol.lambda[1] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let a = poly1(&[1.0]);
        let b = Polytope::point(vec![1.0, 0.0]);
        assert!(matches!(
            min_norm_over_multipliers(&[a], &[b], 1e3, &SolverOptions::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cap_is_flagged() {
        // needs mu = 5 to cancel, cap 2
        let sol = min_norm_over_multipliers(
            &[poly1(&[5.0])],
            &[poly1(&[-1.0])],
            2.0,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!((sol.residual - 3.0).abs() <= 1e-12);
        assert!(sol.mu_at_cap);
    }

    #[test]
    fn inflation_shrinks_distance() {
        let sol = solve_multipliers(
            &[poly1(&[1.0, 2.0]), poly1(&[3.0])],
            &[0.25, 0.0],
            &[],
            &SolverOptions::default(),
        )
        .unwrap();
        assert!((sol.solver_residual - 0.75).abs() <= 1e-9);
        assert!((sol.residual - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn random_two_dimensional_hulls_recompute() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let k = rng.random_range(1..6);
            let gens: Vec<Vec<f64>> = (0..k)
                .map(|_| vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)])
                .collect();
            let p = Polytope::from_parts(2, gens.clone(), true);
            let cons = vec![Polytope::point(vec![
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ])];
            let sol =
                min_norm_over_multipliers(&[p], &cons, 10.0, &SolverOptions::default()).unwrap();
            assert!(sol.converged);
            assert!((sol.residual - sol.solver_residual).abs() <= 1e-9);
            assert!(sol.lower_bound <= sol.residual);
            assert!(sol.residual - sol.lower_bound <= 1e-8);
            // no generator direction improves on the reported point
            let x = {
                let w = &sol.objective_witnesses[0];
                let v = &cons[0].generators()[0];
                vec![w[0] + sol.mu[0] * v[0], w[1] + sol.mu[0] * v[1]]
            };
            for g in &gens {
                assert!(dot(&x, g) >= dot(&x, &x) - 1e-6);
            }
        }
    }

    fn arb_poly() -> impl proptest::strategy::Strategy<Value = Polytope> {
        use proptest::prelude::*;
        proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 2), 1..4)
            .prop_map(|g| Polytope::from_parts(2, g, true))
    }

    proptest::proptest! {
        #[test]
        fn multipliers_are_admissible_and_recompute(
            objs in proptest::collection::vec(arb_poly(), 1..4),
            cons in proptest::collection::vec(arb_poly(), 0..3),
            cap in 0.5f64..5.0,
            probe in proptest::collection::vec(0.0f64..1.0, 6),
        ) {
            let sol = min_norm_over_multipliers(&objs, &cons, cap, &SolverOptions::default()).unwrap();
            proptest::prop_assert!((sol.lambda.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            proptest::prop_assert!(sol.lambda.iter().all(|l| *l >= 0.0));
            proptest::prop_assert!(sol.mu.iter().all(|m| *m >= 0.0 && *m <= cap + 1e-12));
            let again = combination_norm(&sol.lambda, &sol.objective_witnesses, &sol.mu, &sol.constraint_witnesses, 2);
            proptest::prop_assert!((again - sol.residual).abs() <= 1e-9);
            proptest::prop_assert!(sol.lower_bound <= sol.residual + 1e-12);

            // any admissible combination is at least as long as the lower bound
            let total: f64 = probe[..objs.len()].iter().sum::<f64>() + 1e-9;
            let lambda: Vec<f64> = probe[..objs.len()].iter().map(|p| (p + 1e-9 / objs.len() as f64) / total).collect();
            let mu: Vec<f64> = probe[3..3 + cons.len()].iter().map(|p| p * cap).collect();
            let w: Vec<Vec<f64>> = objs.iter().map(|p| p.generators()[0].clone()).collect();
            let v: Vec<Vec<f64>> = cons.iter().map(|p| p.generators()[0].clone()).collect();
            proptest::prop_assert!(sol.lower_bound <= combination_norm(&lambda, &w, &mu, &v, 2) + 1e-9);
        }
    }
}
