//! Generalized convexity at a point and the sufficiency pipeline built on it.

use rayon::prelude::*;
use serde::Serialize;

use super::kkt::{constraint_polys, kkt_check, objective_polys, CertificateReport, Radius};
use super::minnorm::{min_norm, Factor, Group};
use super::Verdict;
use crate::error::Result;
use crate::polytope::{distance, dot, norm};
use crate::problem::{find_dominator, Candidates, MIOProblem, Shift, Tolerances};

/// Linear system `⟨a_i, v⟩ <= b_i`, `‖v‖ <= r` for one sample `u`.
struct Rows {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    r: f64,
}

impl Rows {
    fn violation(&self, v: &[f64]) -> f64 {
        let lin = self
            .a
            .iter()
            .zip(&self.b)
            .map(|(a, b)| dot(a, v) - b)
            .fold(f64::NEG_INFINITY, f64::max);
        lin.max(norm(v) - self.r)
    }
}

fn rows(problem: &MIOProblem, u0: &[f64], u: &[f64], tol: &Tolerances) -> Result<(Rows, bool)> {
    let obj = objective_polys(problem, u0, tol);
    let all: Vec<usize> = (0..problem.constraints().len()).collect();
    let con = constraint_polys(problem, u0, &all, tol);
    let exact = obj.iter().chain(&con).all(|p| p.is_exact());
    let f0 = problem.values(u0)?;
    let f = problem.values(u)?;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (k, p) in obj.iter().enumerate() {
        let rhs = (f[k].center() - f0[k].center()) + (f[k].width() - f0[k].width());
        for w in p.generators() {
            a.push(w.clone());
            b.push(rhs);
        }
    }
    for (j, p) in con.iter().enumerate() {
        let g = &problem.constraints()[j];
        let rhs = g.eval(u) - g.eval(u0);
        for z in p.generators() {
            a.push(z.clone());
            b.push(rhs);
        }
    }
    Ok((
        Rows {
            a,
            b,
            r: distance(u, u0),
        },
        exact,
    ))
}

/// Largest violation of the defining inequalities by a given `v`.
pub fn convexity_violation(problem: &MIOProblem, u0: &[f64], u: &[f64], v: &[f64], tol: &Tolerances) -> Result<f64> {
    let (rows, _) = rows(problem, u0, u, tol)?;
    Ok(rows.violation(v))
}

enum Solve {
    Feasible,
    Infeasible(f64),
    Stalled(f64),
}

/// Exact minimum of the piecewise-linear violation in one dimension: it
/// sits where two of the lines cross.
fn solve_1d(rows: &Rows) -> (f64, f64) {
    let mut lines: Vec<(f64, f64)> = rows.a.iter().zip(&rows.b).map(|(a, b)| (a[0], -b)).collect();
    lines.push((1.0, -rows.r));
    lines.push((-1.0, -rows.r));
    let phi = |v: f64| lines.iter().map(|(s, c)| s * v + c).fold(f64::NEG_INFINITY, f64::max);
    let mut best = (0.0, phi(0.0));
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (s1, c1) = lines[i];
            let (s2, c2) = lines[j];
            if s1 != s2 {
                let v = (c2 - c1) / (s1 - s2);
                let val = phi(v);
                if val < best.1 {
                    best = (v, val);
                }
            }
        }
    }
    best
}

fn project(v: &mut [f64], r: f64) {
    let n = norm(v);
    if n > r {
        let s = if n > 0.0 { r / n } else { 0.0 };
        v.iter_mut().for_each(|x| *x *= s);
    }
}

fn solve(rows: &Rows, u0: &[f64], u: &[f64], tol: f64) -> Solve {
    let n = u.len();
    if n == 1 {
        let (_, val) = solve_1d(rows);
        return if val <= tol { Solve::Feasible } else { Solve::Infeasible(val) };
    }
    let lin = |v: &[f64]| {
        rows.a
            .iter()
            .zip(&rows.b)
            .map(|(a, b)| dot(a, v) - b)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let d: Vec<f64> = u.iter().zip(u0).map(|(a, b)| a - b).collect();
    let back: Vec<f64> = d.iter().map(|x| -x).collect();
    let mut best = vec![0.0; n];
    let mut best_val = rows.violation(&best);
    for start in [d, back] {
        let val = rows.violation(&start);
        if val < best_val {
            best = start;
            best_val = val;
        }
    }
    if best_val <= tol {
        return Solve::Feasible;
    }

    let mut v = best.clone();
    for t in 0..5000 {
        let (i, _) = rows
            .a
            .iter()
            .zip(&rows.b)
            .enumerate()
            .map(|(i, (a, b))| (i, dot(a, &v) - b))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        let g = &rows.a[i];
        let gn = norm(g);
        if gn == 0.0 {
            break;
        }
        let step = rows.r.max(1e-12) / ((t + 1) as f64).sqrt() / gn;
        v.iter_mut().zip(g).for_each(|(x, gi)| *x -= step * gi);
        project(&mut v, rows.r);
        let val = lin(&v).max(norm(&v) - rows.r);
        if val < best_val {
            best_val = val;
            best.clone_from(&v);
            if best_val <= tol {
                return Solve::Feasible;
            }
        }
    }

    // Any simplex weights y give the lower bound -r‖Σ y_i a_i‖ - Σ y_i b_i.
    let mut lower = f64::NEG_INFINITY;
    for (a, b) in rows.a.iter().zip(&rows.b) {
        lower = lower.max(-rows.r * norm(a) - b);
    }
    let opts = super::minnorm::SolverOptions::default();
    if let Ok(m) = min_norm(
        &[Factor::Hull(
            rows.a
                .iter()
                .map(|a| Group {
                    gens: vec![a.clone()],
                    inflate: 0.0,
                })
                .collect(),
        )],
        n,
        &opts,
    ) {
        let y = &m.weights[0];
        let yb: f64 = y.iter().zip(&rows.b).map(|(a, b)| a * b).sum();
        lower = lower.max(-rows.r * m.residual - yb);
    }
    if lower > tol {
        Solve::Infeasible(lower)
    } else {
        Solve::Stalled(best_val)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleFailure {
    pub point: Vec<f64>,
    /// Smallest achievable violation, or a lower bound for it.
    pub violation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexityReport {
    pub verdict: Verdict,
    pub u0: Vec<f64>,
    pub samples: usize,
    pub infeasible: Vec<SampleFailure>,
    pub stalled: Vec<SampleFailure>,
    pub exact: bool,
}

/// Decides, per sample `u`, whether some `v` with `‖v‖ <= ‖u - u0‖`
/// satisfies `⟨w, v⟩ <= ΔF^c_k + ΔF^w_k` for every generator `w` of
/// `∂F_k(u0)` and `⟨z, v⟩ <= g_j(u) - g_j(u0)` for every generator of
/// `∂g_j(u0)`.
pub fn gen_convexity_check(
    problem: &MIOProblem,
    u0: &[f64],
    samples: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<ConvexityReport> {
    problem.require_feasible(u0, tol.feasibility)?;
    let outcomes: Vec<(Vec<f64>, Solve, bool)> = samples
        .par_iter()
        .map(|u| {
            problem.check_point(u)?;
            let (r, exact) = rows(problem, u0, u, tol)?;
            Ok((u.clone(), solve(&r, u0, u, tol.solver), exact))
        })
        .collect::<Result<_>>()?;
    let exact = outcomes.iter().all(|o| o.2);
    let mut infeasible = Vec::new();
    let mut stalled = Vec::new();
    for (point, s, _) in outcomes {
        match s {
            Solve::Feasible => {}
            Solve::Infeasible(violation) => infeasible.push(SampleFailure { point, violation }),
            Solve::Stalled(violation) => stalled.push(SampleFailure { point, violation }),
        }
    }
    let verdict = if !infeasible.is_empty() {
        Verdict::Fails.soften(exact)
    } else if !stalled.is_empty() {
        Verdict::Inconclusive
    } else {
        Verdict::Holds
    };
    Ok(ConvexityReport {
        verdict,
        u0: u0.to_vec(),
        samples: samples.len(),
        infeasible,
        stalled,
        exact,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SufficiencyVerdict {
    /// Both hypotheses hold and the grid confirms the conclusion.
    Holds,
    HypothesisFailed,
    Inconclusive,
    /// Hypotheses hold yet a grid point contradicts the conclusion.
    Refuted,
}

#[derive(Clone, Debug, Serialize)]
pub struct SufficiencyReport {
    pub verdict: SufficiencyVerdict,
    pub kkt: Option<CertificateReport>,
    pub convexity: Option<ConvexityReport>,
    pub counterexample: Option<Vec<f64>>,
    pub note: Option<String>,
}

/// Multiplier condition with slack `Σ λ_k ε_k` plus generalized convexity
/// over the candidates imply weak ε-quasi-minimality on the candidates.
pub fn sufficiency_thm_4_3(
    problem: &MIOProblem,
    ubar: &[f64],
    eps: &[f64],
    cands: &Candidates,
    tol: &Tolerances,
) -> Result<SufficiencyReport> {
    problem.check_epsilon_nonzero(eps)?;
    problem.require_feasible(ubar, tol.feasibility)?;
    let empty = |verdict, note: &str| SufficiencyReport {
        verdict,
        kkt: None,
        convexity: None,
        counterexample: None,
        note: Some(note.into()),
    };
    let all: Vec<usize> = (0..problem.constraints().len()).collect();
    let exact = objective_polys(problem, ubar, tol)
        .iter()
        .chain(&constraint_polys(problem, ubar, &all, tol))
        .all(|p| p.is_exact());
    if !exact {
        return Ok(empty(
            SufficiencyVerdict::Inconclusive,
            "subdifferentials at the point are over-approximated",
        ));
    }
    let kkt = kkt_check(problem, ubar, &Radius::LambdaWeighted(eps.to_vec()), tol)?;
    match kkt.verdict {
        Verdict::Holds => {}
        v => {
            let verdict = if v == Verdict::Fails {
                SufficiencyVerdict::HypothesisFailed
            } else {
                SufficiencyVerdict::Inconclusive
            };
            return Ok(SufficiencyReport {
                verdict,
                kkt: Some(kkt),
                convexity: None,
                counterexample: None,
                note: Some("multiplier condition".into()),
            });
        }
    }
    let conv = gen_convexity_check(problem, ubar, cands.points(), tol)?;
    let (verdict, counterexample, note) = match conv.verdict {
        Verdict::Fails => (SufficiencyVerdict::HypothesisFailed, None, Some("generalized convexity".into())),
        Verdict::Inconclusive => (SufficiencyVerdict::Inconclusive, None, Some("generalized convexity".into())),
        Verdict::Holds => match find_dominator(problem, ubar, Shift::DistanceScaled(eps), cands)? {
            Some(i) => (
                SufficiencyVerdict::Refuted,
                Some(cands.point(i).to_vec()),
                Some("grid point contradicts the conclusion".into()),
            ),
            None => (SufficiencyVerdict::Holds, None, None),
        },
    };
    Ok(SufficiencyReport {
        verdict,
        kkt: Some(kkt),
        convexity: Some(conv),
        counterexample,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::grid::GridSpec;
    use crate::ivf::IVFunction;

    fn build(dim: usize, objs: &[(&str, &str)], cons: &[&str], lo: f64, hi: f64) -> MIOProblem {
        let objectives = objs
            .iter()
            .map(|(l, u)| IVFunction::new(parse_expr(l, dim).unwrap(), parse_expr(u, dim).unwrap(), dim).unwrap())
            .collect();
        let constraints = cons.iter().map(|g| parse_expr(g, dim).unwrap()).collect();
        MIOProblem::new(dim, objectives, constraints, vec![lo; dim], vec![hi; dim]).unwrap()
    }

    fn def_example() -> MIOProblem {
        build(1, &[("abs(u0)", "abs(u0)+1"), ("2*abs(u0)", "2*abs(u0)+1")], &["-u0"], -2.0, 2.0)
    }

    #[test]
    fn definition_example_holds() {
        let p = def_example();
        let tol = Tolerances::default();
        let g = GridSpec::new(&p, 401).unwrap();
        let samples: Vec<Vec<f64>> = g.points().collect();
        let rep = gen_convexity_check(&p, &[0.0], &samples, &tol).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert!(rep.infeasible.is_empty());
        for u in samples.iter().step_by(40) {
            assert!(convexity_violation(&p, &[0.0], u, u, &tol).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn same_point_needs_zero() {
        let p = def_example();
        let tol = Tolerances::default();
        let rep = gen_convexity_check(&p, &[0.0], &[vec![0.0]], &tol).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
    }

    #[test]
    fn concave_center_fails() {
        let p = build(1, &[("-u0^2", "-u0^2+1")], &[], -2.0, 2.0);
        let tol = Tolerances::default();
        let rep = gen_convexity_check(&p, &[0.0], &[vec![1.0]], &tol).unwrap();
        assert_eq!(rep.verdict, Verdict::Fails);
        assert!((rep.infeasible[0].violation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_dimensional() {
        let tol = Tolerances::default();
        let p = build(2, &[("u0^2+u1^2", "u0^2+u1^2+1")], &["-u0"], -1.0, 1.0);
        let samples: Vec<Vec<f64>> = GridSpec::new(&p, 11).unwrap().points().collect();
        let rep = gen_convexity_check(&p, &[0.0, 0.0], &samples, &tol).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);

        let q = build(2, &[("-u0^2-u1^2", "-u0^2-u1^2+1")], &[], -1.0, 1.0);
        let rep = gen_convexity_check(&q, &[0.0, 0.0], &[vec![0.5, 0.5]], &tol).unwrap();
        assert_eq!(rep.verdict, Verdict::Fails);

        // The width of F_2 is constant, so 0 ∈ ∂F_2 and the row 0 <= -0.5 is hopeless.
        let r = build(2, &[("u0", "u0"), ("-u0", "-u0")], &[], -1.0, 1.0);
        let rep = gen_convexity_check(&r, &[0.0, 0.0], &[vec![0.5, 0.0]], &tol).unwrap();
        assert_eq!(rep.verdict, Verdict::Fails);
    }

    #[test]
    fn subgradient_search_and_dual_bound() {
        let u0 = [0.0, 0.0];
        let u = [1.0, 0.0];
        let rows = |b: f64| Rows {
            a: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            b: vec![b, b],
            r: 1.0,
        };
        assert!(matches!(solve(&rows(-0.3), &u0, &u, 1e-8), Solve::Feasible));
        match solve(&rows(-0.8), &u0, &u, 1e-8) {
            Solve::Infeasible(lb) => assert!((lb - (0.8 - 0.5f64.sqrt())).abs() < 1e-6),
            _ => panic!("expected a certified infeasibility"),
        }
    }

    #[test]
    fn sufficiency_cases() {
        let tol = Tolerances::default();
        let p = def_example();
        let c = GridSpec::new(&p, 401).unwrap().feasible_candidates(&p, 1e-9).unwrap();
        let rep = sufficiency_thm_4_3(&p, &[0.0], &[0.1, 0.1], &c, &tol).unwrap();
        assert_eq!(rep.verdict, SufficiencyVerdict::Holds);

        let q = build(1, &[("u0^2", "3*u0^2")], &["-u0"], -1.0, 1.0);
        let c = GridSpec::new(&q, 401).unwrap().feasible_candidates(&q, 1e-9).unwrap();
        let rep = sufficiency_thm_4_3(&q, &[0.0], &[0.5], &c, &tol).unwrap();
        assert_eq!(rep.verdict, SufficiencyVerdict::Holds);
        let rep = sufficiency_thm_4_3(&q, &[0.5], &[0.1], &c, &tol).unwrap();
        assert_eq!(rep.verdict, SufficiencyVerdict::HypothesisFailed);

        let r = build(1, &[("min(abs(u0),0)", "min(abs(u0),0)+1")], &[], -1.0, 1.0);
        let c = GridSpec::new(&r, 21).unwrap().feasible_candidates(&r, 1e-9).unwrap();
        let rep = sufficiency_thm_4_3(&r, &[0.0], &[0.1], &c, &tol).unwrap();
        assert_eq!(rep.verdict, SufficiencyVerdict::Inconclusive);
    }
}
