//! Multiplier certificates at a point and over grid neighbourhoods.

use rayon::prelude::*;
use serde::Serialize;

use super::minnorm::{combination_norm, residual_for_multipliers, solve_multipliers, ConstraintTerm, MultiplierSolution};
use super::Verdict;
use crate::error::{Error, Result};
use crate::expr::clarke_subdiff;
use crate::interval::Interval;
use crate::polytope::{distance, Polytope};
use crate::problem::{find_dominator, Candidates, MIOProblem, Shift, Tolerances};

/// `0 ∈ Σ λ_k ∂F_k(u) + Σ μ_j ∂g_j(u) + r B` for some admissible multipliers.
#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub verdict: Verdict,
    pub point: Vec<f64>,
    /// `‖Σ λ_k w_k + Σ μ_j v_j‖` rebuilt from the reported witnesses.
    pub residual: f64,
    /// Acceptance level the residual was compared with.
    pub threshold: f64,
    pub lower_bound: f64,
    pub lambda: Vec<f64>,
    /// One entry per constraint.
    pub mu: Vec<f64>,
    pub active_set: Vec<usize>,
    pub objective_witnesses: Vec<Vec<f64>>,
    /// Empty for constraints with `μ_j = 0` off the active set.
    pub constraint_witnesses: Vec<Vec<f64>>,
    pub exact: bool,
    pub iterations: usize,
    pub converged: bool,
    pub mu_at_cap: bool,
    /// Set when acceptance came from the inflated problem.
    pub inflated_distance: Option<f64>,
    pub tolerances: Tolerances,
}

/// Slack on the KKT residual.
#[derive(Clone, Debug, PartialEq)]
pub enum Radius {
    Fixed(f64),
    /// `Σ λ_k ε_k` with the multipliers found.
    LambdaWeighted(Vec<f64>),
}

pub(crate) fn objective_polys(problem: &MIOProblem, u: &[f64], tol: &Tolerances) -> Vec<Polytope> {
    problem
        .objectives()
        .iter()
        .map(|f| f.weak_gen_gradient(u, tol.kink))
        .collect()
}

pub(crate) fn constraint_polys(problem: &MIOProblem, u: &[f64], which: &[usize], tol: &Tolerances) -> Vec<Polytope> {
    which
        .iter()
        .map(|&j| clarke_subdiff(&problem.constraints()[j], u, tol.kink))
        .collect()
}

fn all_exact(polys: &[&[Polytope]]) -> bool {
    polys.iter().all(|ps| ps.iter().all(|p| p.is_exact()))
}

fn scatter(p: usize, which: &[usize], mu: &[f64], v: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut full = vec![0.0; p];
    let mut wit = vec![Vec::new(); p];
    for (i, &j) in which.iter().enumerate() {
        full[j] = mu[i];
        wit[j] = v[i].clone();
    }
    (full, wit)
}

fn report(
    problem: &MIOProblem,
    u: &[f64],
    which: &[usize],
    active_set: Vec<usize>,
    sol: MultiplierSolution,
    accepted: bool,
    inflated_distance: Option<f64>,
    threshold: f64,
    exact: bool,
    tol: &Tolerances,
) -> CertificateReport {
    let verdict = if accepted {
        Verdict::Holds
    } else if !sol.converged {
        Verdict::Inconclusive
    } else {
        Verdict::Fails.soften(exact)
    };
    let (mu, constraint_witnesses) = scatter(problem.constraints().len(), which, &sol.mu, &sol.constraint_witnesses);
    CertificateReport {
        verdict,
        point: u.to_vec(),
        residual: sol.residual,
        threshold,
        lower_bound: sol.lower_bound,
        lambda: sol.lambda,
        mu,
        active_set,
        objective_witnesses: sol.objective_witnesses,
        constraint_witnesses,
        exact,
        iterations: sol.iterations,
        converged: sol.converged,
        mu_at_cap: sol.mu_at_cap,
        inflated_distance,
        tolerances: tol.clone(),
    }
}

/// Multiplier check at `u` with `μ` supported on the active set.
///
/// With [`Radius::LambdaWeighted`] the plain minimizer is tried first; if
/// its residual exceeds `Σ λ_k ε_k + τ`, the set `co ⋃ (∂F_k(u) + ε_k B)`
/// is searched directly and accepted when it comes within `τ` of the origin.
pub fn kkt_check(problem: &MIOProblem, u: &[f64], radius: &Radius, tol: &Tolerances) -> Result<CertificateReport> {
    tol.validate()?;
    problem.require_feasible(u, tol.feasibility)?;
    let active = problem.active_set(u, tol.active);
    let obj = objective_polys(problem, u, tol);
    let con = constraint_polys(problem, u, &active, tol);
    let exact = all_exact(&[&obj, &con]);
    let opts = tol.solver_options();
    let terms: Vec<ConstraintTerm> = con
        .iter()
        .map(|p| ConstraintTerm::Free {
            poly: p.clone(),
            cap: tol.mu_max,
        })
        .collect();
    let sol = solve_multipliers(&obj, &[], &terms, &opts)?;

    match radius {
        Radius::Fixed(r) => {
            if !(*r >= 0.0) {
                return Err(Error::InvalidArgument(format!("radius must be nonnegative, got {r}")));
            }
            let threshold = r + tol.solver;
            let ok = sol.residual <= threshold;
            Ok(report(problem, u, &active, active.clone(), sol, ok, None, threshold, exact, tol))
        }
        Radius::LambdaWeighted(eps) => {
            problem.check_epsilon(eps)?;
            let weighted = |l: &[f64]| l.iter().zip(eps).map(|(a, b)| a * b).sum::<f64>();
            let threshold = weighted(&sol.lambda) + tol.solver;
            if sol.residual <= threshold {
                return Ok(report(problem, u, &active, active.clone(), sol, true, None, threshold, exact, tol));
            }
            let inf = solve_multipliers(&obj, eps, &terms, &opts)?;
            let threshold = weighted(&inf.lambda) + tol.solver;
            let d = inf.solver_residual;
            let ok = d <= tol.solver && inf.residual <= threshold + tol.solver;
            Ok(report(problem, u, &active, active.clone(), inf, ok, Some(d), threshold, exact, tol))
        }
    }
}

/// Smallest residual for the given `λ` and `μ` (length `p`, zero off the
/// active set) over all choices of subgradients.
pub fn check_multipliers(problem: &MIOProblem, u: &[f64], lambda: &[f64], mu: &[f64], tol: &Tolerances) -> Result<f64> {
    problem.require_feasible(u, tol.feasibility)?;
    let p = problem.constraints().len();
    if lambda.len() != problem.num_objectives() || mu.len() != p {
        return Err(Error::DimensionMismatch {
            expected: problem.num_objectives() + p,
            found: lambda.len() + mu.len(),
        });
    }
    if lambda.iter().any(|l| *l < 0.0) || (lambda.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("lambda must lie in the simplex, got {lambda:?}")));
    }
    let active = problem.active_set(u, tol.active);
    if let Some(j) = (0..p).find(|j| mu[*j] < 0.0 || (mu[*j] != 0.0 && !active.contains(j))) {
        return Err(Error::InvalidArgument(format!(
            "mu_{} = {} must be nonnegative and zero off the active set",
            j + 1,
            mu[j]
        )));
    }
    let obj = objective_polys(problem, u, tol);
    let all: Vec<usize> = (0..p).collect();
    let con = constraint_polys(problem, u, &all, tol);
    let (r, _, _) = residual_for_multipliers(&obj, &con, lambda, mu, &tol.solver_options())?;
    Ok(r)
}

#[derive(Clone, Debug, Serialize)]
pub struct BcqReport {
    pub verdict: Verdict,
    pub point: Vec<f64>,
    pub active_set: Vec<usize>,
    /// Distance from the origin to `co ⋃_{j ∈ I(u)} ∂g_j(u)`; absent when
    /// nothing is active.
    pub distance: Option<f64>,
    pub exact: bool,
}

/// Basic constraint qualification. Vacuous when no constraint is active.
pub fn bcq_check(problem: &MIOProblem, u: &[f64], tol: &Tolerances) -> Result<BcqReport> {
    problem.require_feasible(u, tol.feasibility)?;
    let active = problem.active_set(u, tol.active);
    if active.is_empty() {
        return Ok(BcqReport {
            verdict: Verdict::Holds,
            point: u.to_vec(),
            active_set: active,
            distance: None,
            exact: true,
        });
    }
    let con = constraint_polys(problem, u, &active, tol);
    let exact = con.iter().all(|p| p.is_exact());
    let gens: Vec<Vec<f64>> = con.iter().flat_map(|p| p.generators().iter().cloned()).collect();
    let origin = vec![0.0; problem.dim()];
    let d = super::minnorm::distance_to_hull(&gens, &origin, tol.solver);
    let verdict = if d > tol.solver {
        Verdict::Holds
    } else {
        Verdict::Fails.soften(exact)
    };
    Ok(BcqReport {
        verdict,
        point: u.to_vec(),
        active_set: active,
        distance: Some(d),
        exact,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EpsKktOutcome {
    pub verdict: Verdict,
    pub witness: Option<Vec<f64>>,
    pub report: Option<CertificateReport>,
    /// `max_k ε_k / δ`.
    pub radius: f64,
    pub searched: usize,
    /// Grid points in the ball where the qualification fails.
    pub bcq_failures: Vec<Vec<f64>>,
    pub note: Option<String>,
}

/// Searches `grid ∩ B̄(ū, δ)` for a point meeting the multiplier condition
/// with slack `max_k ε_k / δ`. Requires `ū` weak ε-minimal on the grid.
pub fn eps_kkt_thm_4_1(
    problem: &MIOProblem,
    ubar: &[f64],
    eps: &[f64],
    delta: f64,
    cands: &Candidates,
    tol: &Tolerances,
) -> Result<EpsKktOutcome> {
    problem.check_epsilon_nonzero(eps)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    problem.require_feasible(ubar, tol.feasibility)?;
    if let Some(i) = find_dominator(problem, ubar, Shift::Constant(eps), cands)? {
        return Err(Error::premise(
            "the point is not weak epsilon-minimal on the grid",
            Some(cands.point(i).to_vec()),
        ));
    }
    let ball = cands.within_ball(ubar, delta);
    let radius = eps.iter().cloned().fold(0.0, f64::max) / delta;
    let bcq_failures: Vec<Vec<f64>> = ball
        .points()
        .par_iter()
        .filter(|x| matches!(bcq_check(problem, x, tol).map(|r| r.verdict), Ok(Verdict::Fails)))
        .cloned()
        .collect();
    let found = ball.points().par_iter().find_map_first(|x| {
        kkt_check(problem, x, &Radius::Fixed(radius), tol)
            .ok()
            .filter(|r| r.verdict == Verdict::Holds)
    });
    Ok(match found {
        Some(rep) => EpsKktOutcome {
            verdict: Verdict::Holds,
            witness: Some(rep.point.clone()),
            report: Some(rep),
            radius,
            searched: ball.len(),
            bcq_failures,
            note: None,
        },
        None => EpsKktOutcome {
            verdict: Verdict::Inconclusive,
            witness: None,
            report: None,
            radius,
            searched: ball.len(),
            bcq_failures,
            note: Some("not-found-at-resolution".into()),
        },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ModifiedKktOutcome {
    pub verdict: Verdict,
    pub witness: Option<Vec<f64>>,
    pub report: Option<CertificateReport>,
    /// `Σ μ_j g_j(x0)` for the reported multipliers.
    pub sign_value: Option<f64>,
    pub searched: usize,
    pub note: Option<String>,
}

/// Modified ε-KKT search around `x0`.
///
/// A grid point `x` in `B̄(x0, √ϵ)` qualifies when some simplex `λ` and
/// `μ >= 0` give `‖Σ λ_k u_k + Σ μ_j v_j‖ <= √ϵ` with subgradients at `x`
/// and `Σ μ_j g_j(x0) >= -ϵ`. Constraints with `g_j(x0) >= 0` are free up to
/// `μ_max`; the others share the budget `Σ μ_j (-g_j(x0)) <= ϵ`. For `ϵ = 0`
/// this is [`kkt_check`] at `x0`.
pub fn modified_eps_kkt(
    problem: &MIOProblem,
    x0: &[f64],
    eps: f64,
    cands: &Candidates,
    tol: &Tolerances,
) -> Result<ModifiedKktOutcome> {
    tol.validate()?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be nonnegative, got {eps}")));
    }
    problem.require_feasible(x0, tol.feasibility)?;
    if eps == 0.0 {
        let rep = kkt_check(problem, x0, &Radius::Fixed(0.0), tol)?;
        let holds = rep.verdict == Verdict::Holds;
        return Ok(ModifiedKktOutcome {
            verdict: rep.verdict,
            witness: holds.then(|| x0.to_vec()),
            sign_value: Some(0.0),
            report: Some(rep),
            searched: 1,
            note: None,
        });
    }

    let root = eps.sqrt();
    let p = problem.constraints().len();
    let g0: Vec<f64> = problem.constraints().iter().map(|g| g.eval(x0)).collect();
    let all: Vec<usize> = (0..p).collect();
    let capped = g0
        .iter()
        .any(|g| *g < 0.0 && eps / -g > tol.mu_max);
    let ball = cands.within_ball(x0, root);
    let opts = tol.solver_options();

    let attempt = |x: &Vec<f64>| -> Option<(CertificateReport, bool)> {
        let obj = objective_polys(problem, x, tol);
        let con = constraint_polys(problem, x, &all, tol);
        let exact = all_exact(&[&obj, &con]);
        let terms: Vec<ConstraintTerm> = con
            .into_iter()
            .zip(&g0)
            .map(|(poly, g)| {
                if *g >= 0.0 {
                    ConstraintTerm::Free { poly, cap: tol.mu_max }
                } else {
                    ConstraintTerm::Budgeted {
                        poly,
                        cap: (eps / -g).min(tol.mu_max),
                    }
                }
            })
            .collect();
        let sol = solve_multipliers(&obj, &[], &terms, &opts).ok()?;
        let threshold = root + tol.solver;
        let ok = sol.residual <= threshold;
        let rep = report(
            problem,
            x,
            &all,
            problem.active_set(x, tol.active),
            sol,
            ok,
            None,
            threshold,
            exact,
            tol,
        );
        Some((rep, exact))
    };

    let results: Vec<(CertificateReport, bool)> = ball.points().par_iter().filter_map(attempt).collect();
    let sign = |r: &CertificateReport| r.mu.iter().zip(&g0).map(|(m, g)| m * g).sum::<f64>();
    if let Some((rep, _)) = results.iter().find(|(r, _)| r.verdict == Verdict::Holds) {
        return Ok(ModifiedKktOutcome {
            verdict: Verdict::Holds,
            witness: Some(rep.point.clone()),
            sign_value: Some(sign(rep)),
            report: Some(rep.clone()),
            searched: ball.len(),
            note: None,
        });
    }
    let decisive = !ball.is_empty()
        && !capped
        && results.len() == ball.len()
        && results.iter().all(|(r, exact)| *exact && r.converged && r.verdict == Verdict::Fails);
    Ok(ModifiedKktOutcome {
        verdict: if decisive { Verdict::Fails } else { Verdict::Inconclusive },
        witness: None,
        report: results
            .into_iter()
            .min_by(|a, b| a.0.residual.total_cmp(&b.0.residual))
            .map(|(r, _)| r),
        sign_value: None,
        searched: ball.len(),
        note: (!decisive).then(|| "not-found-at-resolution".into()),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SequenceEntry {
    /// One-based position in the tolerance sequence.
    pub i: usize,
    pub eps: f64,
    pub verdict: Verdict,
    /// Zero-based index into the point sequence.
    pub index: Option<usize>,
    pub z: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
    pub residual: Option<f64>,
    pub threshold: f64,
    pub lambda: Option<Vec<f64>>,
    pub mu: Option<Vec<f64>>,
    /// `Σ μ_j g_j(y)`.
    pub complementarity: Option<f64>,
    /// True when only the inflated subgradients reach the threshold.
    pub via_inflation: bool,
    pub searched: usize,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SequenceReport {
    pub verdict: Verdict,
    pub ubar: Vec<f64>,
    pub premise_radius: f64,
    pub entries: Vec<SequenceEntry>,
}

/// Approximate KKT sequence near a local weak minimizer.
///
/// For each `ϵ_i`, `z_i` is the first later member of `xs` whose centers and
/// widths are all within `ϵ_i / 2` of those at `ū`. Then `grid ∩ B̄(z_i, √ϵ_i)`
/// is searched for `y_i` with residual `<= √ϵ_i` and `μ` on `I(y_i)`. With
/// `inflate`, a point also qualifies when `co ⋃ (∂F_k(y) + ε_k B) + Σ μ_j ∂g_j(y)`
/// comes within `√ϵ_i` of the origin.
pub fn approx_kkt_sequence(
    problem: &MIOProblem,
    ubar: &[f64],
    xs: &[Vec<f64>],
    epss: &[f64],
    cands: &Candidates,
    inflate: Option<&[f64]>,
    tol: &Tolerances,
) -> Result<SequenceReport> {
    tol.validate()?;
    problem.require_feasible(ubar, tol.feasibility)?;
    if let Some(e) = epss.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument(format!("tolerances must be positive, got {e}")));
    }
    if let Some(x) = xs.iter().find(|x| x.len() != problem.dim()) {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            found: x.len(),
        });
    }
    if let Some(inf) = inflate {
        problem.check_epsilon(inf)?;
    }

    let fbar = problem.values(ubar)?;
    let close = |v: &[Interval], e: f64| {
        v.iter()
            .zip(&fbar)
            .all(|(a, b)| (a.center() - b.center()).abs() < e / 2.0 && (a.width() - b.width()).abs() < e / 2.0)
    };
    let mut picks: Vec<Option<usize>> = Vec::with_capacity(epss.len());
    let mut next = 0usize;
    for &e in epss {
        let mut hit = None;
        for (n, x) in xs.iter().enumerate().skip(next) {
            if close(&problem.values(x)?, e) {
                hit = Some(n);
                break;
            }
        }
        if let Some(n) = hit {
            next = n + 1;
        } else {
            next = xs.len();
        }
        picks.push(hit);
    }

    let premise_radius = picks
        .iter()
        .zip(epss)
        .filter_map(|(n, e)| n.map(|n| distance(&xs[n], ubar) + e.sqrt()))
        .fold(0.0, f64::max);
    let local = cands.within_ball(ubar, premise_radius);
    if let Some(i) = find_dominator(problem, ubar, Shift::None, &local)? {
        return Err(Error::premise(
            "the point is not locally weak minimal on the grid",
            Some(local.point(i).to_vec()),
        ));
    }

    let opts = tol.solver_options();
    let solve_at = |y: &Vec<f64>, e: f64| -> Option<SequenceEntry> {
        let root = e.sqrt();
        let active = problem.active_set(y, tol.active);
        let obj = objective_polys(problem, y, tol);
        let con = constraint_polys(problem, y, &active, tol);
        let terms: Vec<ConstraintTerm> = con
            .into_iter()
            .map(|poly| ConstraintTerm::Free { poly, cap: tol.mu_max })
            .collect();
        let base = solve_multipliers(&obj, &[], &terms, &opts).ok()?;
        let threshold = root + tol.solver;
        let (sol, via_inflation) = if base.residual <= threshold {
            (base, false)
        } else {
            let inf = solve_multipliers(&obj, inflate?, &terms, &opts).ok()?;
            if inf.solver_residual > threshold {
                return None;
            }
            (inf, true)
        };
        let (mu, _) = scatter(problem.constraints().len(), &active, &sol.mu, &sol.constraint_witnesses);
        let complementarity = mu
            .iter()
            .zip(problem.constraints())
            .map(|(m, g)| if *m == 0.0 { 0.0 } else { m * g.eval(y) })
            .sum();
        Some(SequenceEntry {
            i: 0,
            eps: e,
            verdict: Verdict::Holds,
            index: None,
            z: None,
            y: Some(y.clone()),
            residual: Some(if via_inflation { sol.solver_residual } else { sol.residual }),
            threshold,
            lambda: Some(sol.lambda),
            mu: Some(mu),
            complementarity: Some(complementarity),
            via_inflation,
            searched: 0,
            note: None,
        })
    };

    let mut entries = Vec::with_capacity(epss.len());
    for (i, (&e, pick)) in epss.iter().zip(&picks).enumerate() {
        let blank = SequenceEntry {
            i: i + 1,
            eps: e,
            verdict: Verdict::Inconclusive,
            index: *pick,
            z: pick.map(|n| xs[n].clone()),
            y: None,
            residual: None,
            threshold: e.sqrt() + tol.solver,
            lambda: None,
            mu: None,
            complementarity: None,
            via_inflation: false,
            searched: 0,
            note: None,
        };
        let Some(n) = *pick else {
            entries.push(SequenceEntry {
                note: Some("sequence exhausted before the selection rule was met".into()),
                ..blank
            });
            continue;
        };
        let ball = cands.within_ball(&xs[n], e.sqrt());
        let found = ball.points().par_iter().find_map_first(|y| solve_at(y, e));
        entries.push(match found {
            Some(hit) => SequenceEntry {
                i: i + 1,
                index: Some(n),
                z: Some(xs[n].clone()),
                searched: ball.len(),
                ..hit
            },
            None => SequenceEntry {
                searched: ball.len(),
                note: Some("not-found-at-resolution".into()),
                ..blank
            },
        });
    }
    let verdict = if entries.iter().all(|e| e.verdict == Verdict::Holds) {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    Ok(SequenceReport {
        verdict,
        ubar: ubar.to_vec(),
        premise_radius,
        entries,
    })
}

/// Checks the report invariants: simplex `λ`, `μ >= 0` supported on the
/// active set, and the residual matching the witnesses.
pub fn report_is_consistent(rep: &CertificateReport) -> bool {
    let simplex = rep.lambda.iter().all(|l| *l >= 0.0) && (rep.lambda.iter().sum::<f64>() - 1.0).abs() <= 1e-12;
    let support = rep
        .mu
        .iter()
        .enumerate()
        .all(|(j, m)| *m >= 0.0 && (*m == 0.0 || rep.active_set.contains(&j)));
    let dim = rep.point.len();
    let v: Vec<Vec<f64>> = rep
        .constraint_witnesses
        .iter()
        .map(|w| if w.is_empty() { vec![0.0; dim] } else { w.clone() })
        .collect();
    let r = combination_norm(&rep.lambda, &rep.objective_witnesses, &rep.mu, &v, dim);
    simplex && support && (r - rep.residual).abs() <= 1e-9
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::grid::GridSpec;
    use crate::ivf::IVFunction;

    fn build(objs: &[(&str, &str)], cons: &[&str], lo: f64, hi: f64) -> MIOProblem {
        let objectives = objs
            .iter()
            .map(|(l, u)| IVFunction::new(parse_expr(l, 1).unwrap(), parse_expr(u, 1).unwrap(), 1).unwrap())
            .collect();
        let constraints = cons.iter().map(|g| parse_expr(g, 1).unwrap()).collect();
        MIOProblem::new(1, objectives, constraints, vec![lo], vec![hi]).unwrap()
    }

    fn worked_example() -> MIOProblem {
        build(
            &[("abs(u0)", "abs(u0)+1"), ("2*abs(u0)", "2*abs(u0)+2")],
            &["-u0", "-u0-1"],
            -2.0,
            2.0,
        )
    }

    fn quadratic(cons: &[&str]) -> MIOProblem {
        build(&[("u0^2", "3*u0^2")], cons, -1.0, 1.0)
    }

    fn grid(p: &MIOProblem) -> Candidates {
        GridSpec::new(p, 401).unwrap().feasible_candidates(p, 1e-9).unwrap()
    }

    #[test]
    fn worked_example_kkt() {
        let p = worked_example();
        let tol = Tolerances::default();
        let rep = kkt_check(&p, &[0.0], &Radius::Fixed(0.0), &tol).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert!(rep.residual <= 1e-9);
        assert_eq!(rep.active_set, vec![0]);
        assert_eq!(rep.mu[1], 0.0);
        assert!(report_is_consistent(&rep));
        let r = check_multipliers(&p, &[0.0], &[0.5, 0.5], &[0.5, 0.0], &tol).unwrap();
        assert!(r <= 1e-12);
        assert!(check_multipliers(&p, &[0.0], &[0.5, 0.5], &[0.5, 0.1], &tol).is_err());
        assert_eq!(bcq_check(&p, &[0.0], &tol).unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn smooth_points() {
        let p = quadratic(&["u0-0.75"]);
        let tol = Tolerances::default();
        assert_eq!(kkt_check(&p, &[0.0], &Radius::Fixed(0.0), &tol).unwrap().verdict, Verdict::Holds);
        let rep = kkt_check(&p, &[0.5], &Radius::Fixed(0.0), &tol).unwrap();
        assert_eq!(rep.verdict, Verdict::Fails);
        assert!((rep.residual - 1.0).abs() < 1e-9);
        assert!(report_is_consistent(&rep));
        assert!(matches!(
            kkt_check(&p, &[0.9], &Radius::Fixed(0.0), &tol),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn lambda_weighted_radius() {
        let p = quadratic(&[]);
        let tol = Tolerances::default();
        let rep = kkt_check(&p, &[0.5], &Radius::LambdaWeighted(vec![1.0]), &tol).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        let rep = kkt_check(&p, &[0.5], &Radius::LambdaWeighted(vec![0.9]), &tol).unwrap();
        assert_eq!(rep.verdict, Verdict::Fails);
    }

    #[test]
    fn inflated_fallback_uses_the_cheaper_objective() {
        // ∂F_1 = [1, 2], ∂F_2 = [3, 6]: the plain minimizer puts all weight
        // on F_1 (residual 1) while inflation favours F_2 (3 - 3 = 0).
        let p = build(&[("u0", "3*u0"), ("3*u0", "9*u0")], &[], 0.0, 1.0);
        let tol = Tolerances::default();
        let rep = kkt_check(&p, &[0.0], &Radius::LambdaWeighted(vec![0.5, 3.0]), &tol).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert!(rep.inflated_distance.is_some(), "{rep:?}");
    }

    #[test]
    fn bcq_cases() {
        let tol = Tolerances::default();
        let p = quadratic(&["u0*u0"]);
        assert_eq!(bcq_check(&p, &[0.0], &tol).unwrap().verdict, Verdict::Fails);
        let p = quadratic(&["u0-2"]);
        let r = bcq_check(&p, &[0.0], &tol).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.distance.is_none());
        let p = quadratic(&["u0", "-u0"]);
        assert_eq!(bcq_check(&p, &[0.0], &tol).unwrap().verdict, Verdict::Fails);
    }

    #[test]
    fn eps_kkt_ball_search() {
        let tol = Tolerances::default();
        let p = worked_example();
        let out = eps_kkt_thm_4_1(&p, &[0.0], &[0.25, 0.25], 0.5, &grid(&p), &tol).unwrap();
        assert_eq!(out.verdict, Verdict::Holds);
        assert_eq!(out.witness, Some(vec![0.0]));
        assert_eq!(out.radius, 0.5);

        let q = quadratic(&[]);
        let c = grid(&q);
        let ubar = GridSpec::new(&q, 401).unwrap().nearest(&[0.05]);
        let out = eps_kkt_thm_4_1(&q, &ubar, &[0.1], 0.4, &c, &tol).unwrap();
        assert_eq!(out.verdict, Verdict::Holds);
        assert!(out.report.unwrap().residual <= 0.25);

        assert!(matches!(
            eps_kkt_thm_4_1(&q, &[1.0], &[0.1], 0.4, &c, &tol),
            Err(Error::PremiseViolated { .. })
        ));
    }

    #[test]
    fn modified_kkt_cases() {
        let tol = Tolerances::default();
        let p = quadratic(&["-u0"]);
        let c = grid(&p);
        let out = modified_eps_kkt(&p, &[0.1], 0.04, &c, &tol).unwrap();
        assert_eq!(out.verdict, Verdict::Holds);
        assert_eq!(out.witness, Some(vec![0.0]));
        assert!(out.sign_value.unwrap() >= -0.04);

        let out = modified_eps_kkt(&p, &[0.0], 0.0, &c, &tol).unwrap();
        assert_eq!(out.verdict, Verdict::Holds);
        assert_eq!(out.witness, Some(vec![0.0]));

        let out = modified_eps_kkt(&p, &[0.5], 0.0025, &c, &tol).unwrap();
        assert_eq!(out.verdict, Verdict::Fails);
    }

    #[test]
    fn modified_kkt_budget_binds() {
        // At x0 = 0.5 with g = -u the budget allows μ <= ϵ/0.5; the
        // multiplier term can cancel at most 2ϵ of the gradient hull [1, 2].
        let tol = Tolerances::default();
        let p = build(&[("u0", "3*u0")], &["-u0"], 0.0, 1.0);
        let c = grid(&p);
        let out = modified_eps_kkt(&p, &[0.5], 0.01, &c, &tol).unwrap();
        assert_ne!(out.verdict, Verdict::Holds);
        let out = modified_eps_kkt(&p, &[0.5], 0.49, &c, &tol).unwrap();
        assert_eq!(out.verdict, Verdict::Holds);
        assert!(out.sign_value.unwrap() >= -0.49 - 1e-12);
    }

    #[test]
    fn sequence_on_worked_example() {
        let p = worked_example();
        let c = grid(&p);
        let tol = Tolerances::default();
        let xs: Vec<Vec<f64>> = (1..=2000).map(|i| vec![1.0 / i as f64]).collect();
        let epss: Vec<f64> = (1..=20).map(|i| 1.0 / (i * i) as f64).collect();
        let rep = approx_kkt_sequence(&p, &[0.0], &xs, &epss, &c, None, &tol).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        let mut last = None;
        for e in &rep.entries {
            assert!(distance(e.z.as_ref().unwrap(), e.y.as_ref().unwrap()) <= e.eps.sqrt());
            assert!(e.residual.unwrap() <= e.eps.sqrt() + 1e-8);
            assert!(e.index > last);
            last = e.index;
        }
        let inflated = approx_kkt_sequence(&p, &[0.0], &xs, &epss, &c, Some(&[0.1, 0.1]), &tol).unwrap();
        assert_eq!(inflated.verdict, Verdict::Holds);
    }

    #[test]
    fn short_sequence_is_inconclusive() {
        let p = worked_example();
        let c = grid(&p);
        let tol = Tolerances::default();
        let xs: Vec<Vec<f64>> = (1..=10).map(|i| vec![1.0 / i as f64]).collect();
        let rep = approx_kkt_sequence(&p, &[0.0], &xs, &[0.01], &c, None, &tol).unwrap();
        assert_eq!(rep.verdict, Verdict::Inconclusive);
        assert!(rep.entries[0].index.is_none());
    }
}
