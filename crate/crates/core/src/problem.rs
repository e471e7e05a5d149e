//! Problem data, feasibility, active sets and the three weak solution
//! concepts, all relative to an explicit finite candidate set.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::interval::Interval;
use crate::ivf::IVFunction;
use crate::polytope::distance;

/// Numerical settings shared by every check. All are overridable from the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// `g_j(u) <= feasibility` counts as feasible.
    pub feasibility: f64,
    /// `|g_j(u)| <= active` counts as active.
    pub active: f64,
    /// Branch-activity tolerance for `abs`/`max`/`min`.
    pub kink: f64,
    /// Duality-gap target of the min-norm solver, and acceptance slack.
    pub solver: f64,
    pub mu_max: f64,
    pub max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feasibility: 1e-9,
            active: 1e-6,
            kink: crate::expr::DEFAULT_KINK_TOL,
            solver: 1e-8,
            mu_max: 1e3,
            max_iter: 100_000,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("feasibility", self.feasibility),
            ("active", self.active),
            ("kink", self.kink),
            ("solver", self.solver),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "tolerance {name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        if !(self.mu_max > 0.0 && self.mu_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "mu_max must be positive, got {}",
                self.mu_max
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn solver_options(&self) -> crate::certificates::minnorm::SolverOptions {
        crate::certificates::minnorm::SolverOptions {
            tol: self.solver,
            max_iter: self.max_iter,
        }
    }
}

/// Minimize `(F_1, …, F_m)` over `S = {u : g_j(u) <= 0}`, searched inside a box.
#[derive(Clone, Debug, PartialEq)]
pub struct MIOProblem {
    pub name: Option<String>,
    dim: usize,
    objectives: Vec<IVFunction>,
    constraints: Vec<Expr>,
    box_lo: Vec<f64>,
    box_hi: Vec<f64>,
}

impl MIOProblem {
    pub fn new(
        dim: usize,
        objectives: Vec<IVFunction>,
        constraints: Vec<Expr>,
        box_lo: Vec<f64>,
        box_hi: Vec<f64>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidModel("dimension must be at least 1".into()));
        }
        if objectives.is_empty() {
            return Err(Error::InvalidModel("at least one objective is required".into()));
        }
        for f in &objectives {
            if f.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: f.dim(),
                });
            }
        }
        for g in &constraints {
            if g.arity() > dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: g.arity(),
                });
            }
        }
        if box_lo.len() != dim || box_hi.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: box_lo.len().max(box_hi.len()),
            });
        }
        for (i, (lo, hi)) in box_lo.iter().zip(&box_hi).enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "box coordinate {i}: need finite lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(MIOProblem {
            name: None,
            dim,
            objectives,
            constraints,
            box_lo,
            box_hi,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn objectives(&self) -> &[IVFunction] {
        &self.objectives
    }

    pub fn constraints(&self) -> &[Expr] {
        &self.constraints
    }

    pub fn num_objectives(&self) -> usize {
        self.objectives.len()
    }

    pub fn box_lo(&self) -> &[f64] {
        &self.box_lo
    }

    pub fn box_hi(&self) -> &[f64] {
        &self.box_hi
    }

    pub fn check_point(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: u.len(),
            });
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("point {u:?} is not finite")));
        }
        Ok(())
    }

    /// `max_j g_j(u)`, or `-inf` without constraints.
    pub fn max_violation(&self, u: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|g| g.eval(u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn feasible(&self, u: &[f64], tau_feas: f64) -> bool {
        self.constraints.iter().all(|g| g.eval(u) <= tau_feas)
    }

    /// Errors with [`Error::Infeasible`] unless `u` is a feasible point of the right size.
    pub fn require_feasible(&self, u: &[f64], tau_feas: f64) -> Result<()> {
        self.check_point(u)?;
        if self.feasible(u, tau_feas) {
            Ok(())
        } else {
            Err(Error::Infeasible {
                point: u.to_vec(),
                violation: self.max_violation(u),
            })
        }
    }

    /// Zero-based indices `j` with `|g_j(u)| <= tau_act`.
    pub fn active_set(&self, u: &[f64], tau_act: f64) -> Vec<usize> {
        self.constraints
            .iter()
            .enumerate()
            .filter(|(_, g)| g.eval(u).abs() <= tau_act)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn values(&self, u: &[f64]) -> Result<Vec<Interval>> {
        self.objectives
            .iter()
            .enumerate()
            .map(|(k, f)| {
                f.eval(u).map_err(|e| match e {
                    Error::IvfViolation {
                        point,
                        lower,
                        upper,
                        ..
                    } => Error::IvfViolation {
                        objective: k,
                        point,
                        lower,
                        upper,
                    },
                    other => other,
                })
            })
            .collect()
    }

    /// `Σ_k (F^c_k(u) + F^w_k(u))`.
    pub fn merit(&self, u: &[f64]) -> Result<f64> {
        Ok(merit_of(&self.values(u)?))
    }

    pub fn check_epsilon(&self, eps: &[f64]) -> Result<()> {
        if eps.len() != self.objectives.len() {
            return Err(Error::DimensionMismatch {
                expected: self.objectives.len(),
                found: eps.len(),
            });
        }
        if eps.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "epsilon components must be finite and nonnegative, got {eps:?}"
            )));
        }
        Ok(())
    }

    pub fn check_epsilon_nonzero(&self, eps: &[f64]) -> Result<()> {
        self.check_epsilon(eps)?;
        if eps.iter().all(|e| *e == 0.0) {
            return Err(Error::InvalidArgument("epsilon must be nonzero".into()));
        }
        Ok(())
    }
}

pub fn merit_of(values: &[Interval]) -> f64 {
    values.iter().map(|q| q.center() + q.width()).sum()
}

/// Points with their objective values, evaluated once.
#[derive(Clone, Debug)]
pub struct Candidates {
    points: Vec<Vec<f64>>,
    values: Vec<Vec<Interval>>,
}

impl Candidates {
    pub fn new(problem: &MIOProblem, points: Vec<Vec<f64>>) -> Result<Self> {
        let values = points
            .par_iter()
            .map(|p| problem.values(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Candidates { points, values })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[Vec<Interval>] {
        &self.values
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn value(&self, i: usize) -> &[Interval] {
        &self.values[i]
    }

    /// Members of the closed ball `‖z - center‖ <= radius`, order kept.
    pub fn within_ball(&self, center: &[f64], radius: f64) -> Candidates {
        let (points, values) = self
            .points
            .iter()
            .zip(&self.values)
            .filter(|(p, _)| distance(p, center) <= radius)
            .map(|(p, v)| (p.clone(), v.clone()))
            .unzip();
        Candidates { points, values }
    }

    /// Index of an exact coordinate match.
    pub fn index_of(&self, u: &[f64]) -> Option<usize> {
        self.points.iter().position(|p| p.as_slice() == u)
    }
}

/// Handicap added to a competitor before comparing.
#[derive(Clone, Copy, Debug)]
pub enum Shift<'a> {
    None,
    /// `F_k(z) + [0, ε_k]`.
    Constant(&'a [f64]),
    /// `F_k(z) + [0, ε_k ‖z - u‖]`.
    DistanceScaled(&'a [f64]),
}

impl Shift<'_> {
    fn amount(&self, k: usize, z: &[f64], u: &[f64]) -> f64 {
        match self {
            Shift::None => 0.0,
            Shift::Constant(e) => e[k],
            Shift::DistanceScaled(e) => {
                if e[k] == 0.0 {
                    0.0
                } else {
                    e[k] * distance(z, u)
                }
            }
        }
    }
}

/// Does `z` strictly dominate `u` in every objective after the handicap?
pub fn dominates(fz: &[Interval], fu: &[Interval], shift: Shift<'_>, z: &[f64], u: &[f64]) -> bool {
    fz.iter().zip(fu).enumerate().all(|(k, (a, b))| {
        let s = shift.amount(k, z, u);
        a.plus_handicap(s).cw_lt(b)
    })
}

/// First candidate (in candidate order) dominating `u`.
pub fn find_dominator(
    problem: &MIOProblem,
    u: &[f64],
    shift: Shift<'_>,
    candidates: &Candidates,
) -> Result<Option<usize>> {
    let fu = problem.values(u)?;
    Ok(candidates
        .points
        .par_iter()
        .zip(&candidates.values)
        .position_first(|(z, fz)| dominates(fz, &fu, shift, z, u)))
}

pub fn is_weak_minimal(problem: &MIOProblem, u: &[f64], candidates: &Candidates) -> Result<bool> {
    Ok(find_dominator(problem, u, Shift::None, candidates)?.is_none())
}

pub fn is_weak_eps_minimal(
    problem: &MIOProblem,
    u: &[f64],
    eps: &[f64],
    candidates: &Candidates,
) -> Result<bool> {
    problem.check_epsilon(eps)?;
    Ok(find_dominator(problem, u, Shift::Constant(eps), candidates)?.is_none())
}

pub fn is_weak_eps_quasi_minimal(
    problem: &MIOProblem,
    u: &[f64],
    eps: &[f64],
    candidates: &Candidates,
) -> Result<bool> {
    problem.check_epsilon(eps)?;
    Ok(find_dominator(problem, u, Shift::DistanceScaled(eps), candidates)?.is_none())
}
