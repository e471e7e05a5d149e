//! Descent constructions run to termination on a finite candidate set: the
//! ε-minimal descent chain and the Ekeland-type fixed-point iterations.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::polytope::distance;
use crate::problem::{find_dominator, merit_of, Candidates, MIOProblem, Shift};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// The descent set of the last iterate is empty on the grid.
    NoDescent,
    /// The last iterate is the only grid point of its own T-set.
    FixedPoint,
}

#[derive(Clone, Debug, Serialize)]
pub struct DescentTrace {
    pub iterates: Vec<Vec<f64>>,
    /// `Σ_k (F^c_k + F^w_k)` at each iterate.
    pub merits: Vec<f64>,
    /// `Σ_k F^w_k` at each iterate.
    pub widths: Vec<f64>,
    pub termination: Termination,
}

impl DescentTrace {
    pub fn steps(&self) -> usize {
        self.iterates.len() - 1
    }

    fn start(problem: &MIOProblem, u: &[f64]) -> Result<Self> {
        let v = problem.values(u)?;
        Ok(DescentTrace {
            iterates: vec![u.to_vec()],
            merits: vec![merit_of(&v)],
            widths: vec![v.iter().map(|q| q.width()).sum()],
            termination: Termination::NoDescent,
        })
    }

    fn push(&mut self, u: &[f64], values: &[Interval]) {
        self.iterates.push(u.to_vec());
        self.merits.push(merit_of(values));
        self.widths.push(values.iter().map(|q| q.width()).sum());
    }
}

/// Per-candidate sums `Σ_k F_k(z)` and merits.
struct Summed {
    sums: Vec<Interval>,
    merits: Vec<f64>,
}

impl Summed {
    fn new(cands: &Candidates) -> Self {
        let sums: Vec<Interval> = cands.values().iter().map(|v| v.iter().copied().sum()).collect();
        let merits = cands.values().iter().map(|v| merit_of(v)).collect();
        Summed { sums, merits }
    }
}

/// Lowest-merit index among those satisfying `keep`, ties to the lowest index.
fn argmin_merit(merits: &[f64], keep: impl Fn(usize) -> bool + Sync) -> Option<usize> {
    (0..merits.len())
        .into_par_iter()
        .filter(|&i| keep(i))
        .min_by(|&a, &b| merits[a].total_cmp(&merits[b]).then(a.cmp(&b)))
}

fn require_grid(cands: &Candidates) -> Result<()> {
    if cands.is_empty() {
        Err(Error::EmptyFeasibleGrid)
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DescentOutcome {
    pub point: Vec<f64>,
    pub trace: DescentTrace,
    /// `2 Σ F^w_k(start) / Σ ε_k + 1`.
    pub iteration_bound: f64,
    pub verified: bool,
}

/// Follows `u_{t+1} ∈ A(u_t)` where
/// `A(u) = {z : Σ F_k(z) + [0, Σ ε_k] ≺ Σ F_k(u)}`, picking the merit
/// minimizer each time, until `A` is empty on the grid.
pub fn descent_eps_minimal(
    problem: &MIOProblem,
    eps: &[f64],
    cands: &Candidates,
    start: &[f64],
    tau_feas: f64,
) -> Result<DescentOutcome> {
    problem.check_epsilon_nonzero(eps)?;
    require_grid(cands)?;
    problem.require_feasible(start, tau_feas)?;
    let total: f64 = eps.iter().sum();
    let s = Summed::new(cands);

    let mut trace = DescentTrace::start(problem, start)?;
    let iteration_bound = 2.0 * trace.widths[0] / total + 1.0;
    let mut current: Interval = problem.values(start)?.into_iter().sum();
    while let Some(i) = argmin_merit(&s.merits, |i| s.sums[i].plus_handicap(total).cw_lt(&current)) {
        current = s.sums[i];
        trace.push(cands.point(i), cands.value(i));
    }
    trace.termination = Termination::NoDescent;
    let point = trace.iterates.last().cloned().unwrap_or_default();
    let verified = find_dominator(problem, &point, Shift::Constant(eps), cands)?.is_none();
    Ok(DescentOutcome {
        point,
        trace,
        iteration_bound,
        verified,
    })
}

/// Grid verification of the three conclusions of an EVP run.
#[derive(Clone, Debug, Serialize)]
pub struct EvpCertificate {
    pub point: Vec<f64>,
    pub trace: DescentTrace,
    /// Counterexample to (a), if any.
    pub a_counterexample: Option<Vec<f64>>,
    pub distance: f64,
    pub distance_bound: f64,
    /// Counterexample to (c), if any.
    pub c_counterexample: Option<Vec<f64>>,
}

impl EvpCertificate {
    pub fn holds(&self) -> bool {
        self.a_counterexample.is_none()
            && self.c_counterexample.is_none()
            && self.distance <= self.distance_bound + 1e-12
    }
}

/// Ekeland-type iteration in the summed order.
///
/// `x0` must admit no `u` with `Σ F_k(u) + [0, Σ ε_k] ≺ Σ F_k(x0)` on the
/// grid; this is checked. Iterates stay in
/// `T(u) = {v ∈ T_0 : Σ F_k(v) + [0, Σ √ε_k ‖v - u‖] ≼ Σ F_k(u)}`.
pub fn evp_descent(
    problem: &MIOProblem,
    eps: &[f64],
    cands: &Candidates,
    x0: &[f64],
    tau_feas: f64,
) -> Result<EvpCertificate> {
    problem.check_epsilon_nonzero(eps)?;
    require_grid(cands)?;
    problem.require_feasible(x0, tau_feas)?;
    let total: f64 = eps.iter().sum();
    let slope: f64 = eps.iter().map(|e| e.sqrt()).sum();
    let s = Summed::new(cands);
    let f0: Interval = problem.values(x0)?.into_iter().sum();

    if let Some(i) = (0..cands.len())
        .into_par_iter()
        .find_first(|&i| s.sums[i].plus_handicap(total).cw_lt(&f0))
    {
        return Err(Error::premise(
            "the start point admits a strict improvement beyond the summed epsilon",
            Some(cands.point(i).to_vec()),
        ));
    }

    let in_t0 = |i: usize| s.sums[i].plus_handicap(slope * distance(cands.point(i), x0)).cw_leq(&f0);
    let mut trace = DescentTrace::start(problem, x0)?;
    let mut u = x0.to_vec();
    let mut fu = f0;
    loop {
        let next = argmin_merit(&s.merits, |i| {
            let v = cands.point(i);
            v != u.as_slice()
                && in_t0(i)
                && s.sums[i].plus_handicap(slope * distance(v, &u)).cw_leq(&fu)
        });
        match next {
            Some(i) => {
                u = cands.point(i).to_vec();
                fu = s.sums[i];
                trace.push(&u, cands.value(i));
            }
            None => break,
        }
    }
    trace.termination = Termination::FixedPoint;

    let a = (0..cands.len())
        .into_par_iter()
        .find_first(|&i| s.sums[i].plus_handicap(total).cw_lt(&fu));
    let c = (0..cands.len())
        .into_par_iter()
        .find_first(|&i| s.sums[i].plus_handicap(slope * distance(cands.point(i), &u)).cw_lt(&fu));
    Ok(EvpCertificate {
        distance: distance(x0, &u),
        distance_bound: total / slope,
        a_counterexample: a.map(|i| cands.point(i).to_vec()),
        c_counterexample: c.map(|i| cands.point(i).to_vec()),
        point: u,
        trace,
    })
}

/// Single-objective case of [`evp_descent`]: `(b)` reads `‖x0 - ū‖ <= √ε`.
pub fn evp_descent_scalar(
    problem: &MIOProblem,
    eps: f64,
    cands: &Candidates,
    x0: &[f64],
    tau_feas: f64,
) -> Result<EvpCertificate> {
    if problem.num_objectives() != 1 {
        return Err(Error::InvalidArgument(format!(
            "scalar EVP needs exactly one objective, the problem has {}",
            problem.num_objectives()
        )));
    }
    evp_descent(problem, &[eps], cands, x0, tau_feas)
}

/// Ekeland-type iteration in the componentwise order with a common `ϵ`.
///
/// Requires `x0 ∈ M(F, grid, (ϵ, …, ϵ))`. Verifies `(a)` weak ϵ-minimality,
/// `(b)` `‖x0 - ū‖ <= √ϵ` and `(c)` weak `√ϵ`-quasi-minimality on the grid.
pub fn evp_descent_vector(
    problem: &MIOProblem,
    eps: f64,
    cands: &Candidates,
    x0: &[f64],
    tau_feas: f64,
) -> Result<EvpCertificate> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")));
    }
    require_grid(cands)?;
    problem.require_feasible(x0, tau_feas)?;
    let m = problem.num_objectives();
    let eps_vec = vec![eps; m];
    let root = eps.sqrt();
    let root_vec = vec![root; m];

    if let Some(i) = find_dominator(problem, x0, Shift::Constant(&eps_vec), cands)? {
        return Err(Error::premise(
            "the start point is not weak epsilon-minimal on the grid",
            Some(cands.point(i).to_vec()),
        ));
    }

    let f0 = problem.values(x0)?;
    let all_leq = |fv: &[Interval], fu: &[Interval], shift: f64| {
        fv.iter().zip(fu).all(|(a, b)| a.plus_handicap(shift).cw_leq(b))
    };
    let in_g0 = |i: usize| all_leq(cands.value(i), &f0, root * distance(cands.point(i), x0));
    let merits: Vec<f64> = cands.values().iter().map(|v| merit_of(v)).collect();

    let mut trace = DescentTrace::start(problem, x0)?;
    let mut u = x0.to_vec();
    let mut fu = f0.clone();
    loop {
        let next = argmin_merit(&merits, |i| {
            let v = cands.point(i);
            v != u.as_slice() && in_g0(i) && all_leq(cands.value(i), &fu, root * distance(v, &u))
        });
        match next {
            Some(i) => {
                u = cands.point(i).to_vec();
                fu = cands.value(i).to_vec();
                trace.push(&u, cands.value(i));
            }
            None => break,
        }
    }
    trace.termination = Termination::FixedPoint;

    let a = find_dominator(problem, &u, Shift::Constant(&eps_vec), cands)?;
    let c = find_dominator(problem, &u, Shift::DistanceScaled(&root_vec), cands)?;
    Ok(EvpCertificate {
        distance: distance(x0, &u),
        distance_bound: root,
        a_counterexample: a.map(|i| cands.point(i).to_vec()),
        c_counterexample: c.map(|i| cands.point(i).to_vec()),
        point: u,
        trace,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct QuasiOutcome {
    pub point: Vec<f64>,
    pub descent: DescentOutcome,
    pub evp: EvpCertificate,
    /// `ū ∈ QM(F, grid, (√ε_1, …, √ε_m))`.
    pub quasi_verified: bool,
    /// For a constant ε: `ū ∈ M(F, B̄(ū, √ε₀) ∩ grid, ε)`.
    pub ball_verified: Option<bool>,
}

impl QuasiOutcome {
    pub fn holds(&self) -> bool {
        self.descent.verified
            && self.evp.holds()
            && self.quasi_verified
            && self.ball_verified != Some(false)
    }
}

/// Descent from the first feasible grid point, then the summed EVP.
pub fn quasi_existence(
    problem: &MIOProblem,
    eps: &[f64],
    cands: &Candidates,
    tau_feas: f64,
) -> Result<QuasiOutcome> {
    problem.check_epsilon_nonzero(eps)?;
    require_grid(cands)?;
    let start = cands.point(0).to_vec();
    let descent = descent_eps_minimal(problem, eps, cands, &start, tau_feas)?;
    let evp = evp_descent(problem, eps, cands, &descent.point, tau_feas)?;
    let ubar = evp.point.clone();
    let roots: Vec<f64> = eps.iter().map(|e| e.sqrt()).collect();
    let quasi_verified =
        find_dominator(problem, &ubar, Shift::DistanceScaled(&roots), cands)?.is_none();
    let ball_verified = if eps.iter().all(|e| *e == eps[0]) {
        let ball = cands.within_ball(&ubar, eps[0].sqrt());
        Some(find_dominator(problem, &ubar, Shift::Constant(eps), &ball)?.is_none())
    } else {
        None
    };
    Ok(QuasiOutcome {
        point: ubar,
        descent,
        evp,
        quasi_verified,
        ball_verified,
    })
}
