//! Uniform inclusive grids over the problem box, and brute-force checks of
//! the implications that only need a candidate set.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::{find_dominator, merit_of, Candidates, MIOProblem, Shift};
use crate::polytope::distance;

pub const DEFAULT_POINT_CAP: usize = 10_000_000;

/// Default resolution per dimension.
pub fn default_points_per_dim(dim: usize) -> Result<usize> {
    match dim {
        1 => Ok(401),
        2 => Ok(101),
        3 => Ok(21),
        4 => Ok(11),
        n => Err(Error::DimensionTooHigh(n)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    lo: Vec<f64>,
    hi: Vec<f64>,
    points_per_dim: usize,
}

impl GridSpec {
    pub fn new(problem: &MIOProblem, points_per_dim: usize) -> Result<Self> {
        GridSpec::with_box(
            problem.box_lo().to_vec(),
            problem.box_hi().to_vec(),
            points_per_dim,
        )
    }

    /// Grid at the default resolution for the problem's dimension.
    pub fn default_for(problem: &MIOProblem) -> Result<Self> {
        GridSpec::new(problem, default_points_per_dim(problem.dim())?)
    }

    pub fn with_box(lo: Vec<f64>, hi: Vec<f64>, points_per_dim: usize) -> Result<Self> {
        GridSpec::with_cap(lo, hi, points_per_dim, DEFAULT_POINT_CAP)
    }

    pub fn with_cap(lo: Vec<f64>, hi: Vec<f64>, points_per_dim: usize, cap: usize) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if lo.len() > 4 {
            return Err(Error::DimensionTooHigh(lo.len()));
        }
        if points_per_dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "points_per_dim must be at least 2, got {points_per_dim}"
            )));
        }
        let total = (points_per_dim as f64).powi(lo.len() as i32);
        if total > cap as f64 {
            return Err(Error::GridTooLarge { points: total, cap });
        }
        Ok(GridSpec {
            lo,
            hi,
            points_per_dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn points_per_dim(&self) -> usize {
        self.points_per_dim
    }

    pub fn len(&self) -> usize {
        self.points_per_dim.pow(self.lo.len() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spacing along coordinate `i`.
    pub fn step(&self, i: usize) -> f64 {
        (self.hi[i] - self.lo[i]) / (self.points_per_dim - 1) as f64
    }

    fn coordinate(&self, i: usize, t: usize) -> f64 {
        self.lo[i] + (t as f64 * (self.hi[i] - self.lo[i])) / (self.points_per_dim - 1) as f64
    }

    /// The `index`-th point in lexicographic order (first coordinate slowest).
    pub fn point(&self, index: usize) -> Vec<f64> {
        let n = self.dim();
        let mut u = vec![0.0; n];
        let mut rest = index;
        for i in (0..n).rev() {
            u[i] = self.coordinate(i, rest % self.points_per_dim);
            rest /= self.points_per_dim;
        }
        u
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    /// Grid point nearest to `u` (ties to the lower index).
    pub fn nearest(&self, u: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                let t = ((u[i] - self.lo[i]) / self.step(i))
                    .round()
                    .clamp(0.0, (self.points_per_dim - 1) as f64);
                self.coordinate(i, t as usize)
            })
            .collect()
    }

    /// Feasible grid points, lexicographic order.
    pub fn feasible_points(&self, problem: &MIOProblem, tau_feas: f64) -> Result<Vec<Vec<f64>>> {
        if problem.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: problem.dim(),
                found: self.dim(),
            });
        }
        Ok((0..self.len())
            .into_par_iter()
            .map(|i| self.point(i))
            .filter(|u| problem.feasible(u, tau_feas))
            .collect())
    }

    pub fn feasible_candidates(&self, problem: &MIOProblem, tau_feas: f64) -> Result<Candidates> {
        Candidates::new(problem, self.feasible_points(problem, tau_feas)?)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QuasiBallReport {
    pub eps0: f64,
    pub feasible_points: usize,
    /// Points found in `QM(F, grid, (√ε₀, …))`, each one checked.
    pub checked: usize,
    pub violations: Vec<Vec<f64>>,
}

/// For every grid point that is weak `√ε₀`-quasi-minimal, confirms it is weak
/// `ε₀`-minimal on the grid ball of radius `√ε₀`.
pub fn check_prop_2_1(problem: &MIOProblem, eps0: f64, cands: &Candidates) -> Result<QuasiBallReport> {
    if !(eps0 > 0.0 && eps0.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps0 must be positive, got {eps0}")));
    }
    let m = problem.num_objectives();
    let r = eps0.sqrt();
    let quasi = vec![r; m];
    let eps = vec![eps0; m];
    let results: Vec<(bool, bool)> = (0..cands.len())
        .into_par_iter()
        .map(|i| {
            let u = cands.point(i);
            let qm = find_dominator(problem, u, Shift::DistanceScaled(&quasi), cands)?.is_none();
            if !qm {
                return Ok((false, false));
            }
            let ball = cands.within_ball(u, r);
            let ok = find_dominator(problem, u, Shift::Constant(&eps), &ball)?.is_none();
            Ok((true, !ok))
        })
        .collect::<Result<_>>()?;
    let checked = results.iter().filter(|(q, _)| *q).count();
    let violations = results
        .iter()
        .enumerate()
        .filter(|(_, (_, bad))| *bad)
        .map(|(i, _)| cands.point(i).to_vec())
        .collect();
    Ok(QuasiBallReport {
        eps0,
        feasible_points: cands.len(),
        checked,
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum MeritInequality {
    /// The merit inequality fails at `witness`.
    HypothesisViolated { witness: Vec<f64>, lhs: f64, rhs: f64 },
    /// The inequality holds on the grid; `counterexample` is a grid point
    /// refuting quasi-minimality, which would contradict the theorem.
    Holds {
        conclusion_verified: bool,
        counterexample: Option<Vec<f64>>,
    },
}

/// Checks `Σ(F^c+F^w)(u) + Σε_k‖u-ū‖ ≥ Σ(F^c+F^w)(ū)` on the grid and, when it
/// holds, that `ū` is weak ε-quasi-minimal there.
pub fn check_thm_3_3(
    problem: &MIOProblem,
    ubar: &[f64],
    eps: &[f64],
    cands: &Candidates,
    tau_feas: f64,
) -> Result<MeritInequality> {
    problem.check_epsilon_nonzero(eps)?;
    problem.require_feasible(ubar, tau_feas)?;
    let rhs = problem.merit(ubar)?;
    let total: f64 = eps.iter().sum();
    let failure = (0..cands.len()).into_par_iter().find_first(|&i| {
        let lhs = merit_of(cands.value(i)) + total * distance(cands.point(i), ubar);
        lhs < rhs
    });
    if let Some(i) = failure {
        let u = cands.point(i).to_vec();
        let lhs = merit_of(cands.value(i)) + total * distance(&u, ubar);
        return Ok(MeritInequality::HypothesisViolated { witness: u, lhs, rhs });
    }
    let dom = find_dominator(problem, ubar, Shift::DistanceScaled(eps), cands)?;
    Ok(MeritInequality::Holds {
        conclusion_verified: dom.is_none(),
        counterexample: dom.map(|i| cands.point(i).to_vec()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::ivf::IVFunction;

    fn build(objs: &[(&str, &str)], cons: &[&str], lo: f64, hi: f64) -> MIOProblem {
        let objectives = objs
            .iter()
            .map(|(l, u)| {
                IVFunction::new(parse_expr(l, 1).unwrap(), parse_expr(u, 1).unwrap(), 1).unwrap()
            })
            .collect();
        let constraints = cons.iter().map(|g| parse_expr(g, 1).unwrap()).collect();
        MIOProblem::new(1, objectives, constraints, vec![lo], vec![hi]).unwrap()
    }

    #[test]
    fn feasible_filter() {
        let p = build(&[("u0", "u0")], &["-u0", "u0-1"], -2.0, 2.0);
        let g = GridSpec::new(&p, 5).unwrap();
        assert_eq!(g.feasible_points(&p, 1e-9).unwrap(), vec![vec![0.0], vec![1.0]]);
        let free = build(&[("u0", "u0")], &[], -2.0, 2.0);
        assert_eq!(g.feasible_points(&free, 1e-9).unwrap().len(), 5);
        let none = build(&[("u0", "u0")], &["1"], -2.0, 2.0);
        assert!(g.feasible_points(&none, 1e-9).unwrap().is_empty());
    }

    #[test]
    fn lexicographic_and_exact() {
        let g = GridSpec::with_box(vec![-1.0, 0.0], vec![1.0, 1.0], 3).unwrap();
        let pts: Vec<_> = g.points().collect();
        assert_eq!(pts[0], vec![-1.0, 0.0]);
        assert_eq!(pts[1], vec![-1.0, 0.5]);
        assert_eq!(pts[3], vec![0.0, 0.0]);
        assert_eq!(pts.len(), 9);
        let fine = GridSpec::with_box(vec![-1.0], vec![1.0], 401).unwrap();
        assert_eq!(fine.point(200), vec![0.0]);
        assert_eq!(fine.point(400), vec![1.0]);
        assert_eq!(fine.nearest(&[0.1]), fine.point(220));
    }

    #[test]
    fn limits() {
        assert!(matches!(
            GridSpec::with_box(vec![0.0; 5], vec![1.0; 5], 2),
            Err(Error::DimensionTooHigh(5))
        ));
        assert!(matches!(
            GridSpec::with_box(vec![0.0; 3], vec![1.0; 3], 1000),
            Err(Error::GridTooLarge { .. })
        ));
        assert_eq!(default_points_per_dim(2).unwrap(), 101);
    }

    #[test]
    fn rescan_agrees() {
        let p = build(&[("u0", "u0")], &["u0^2 - 0.5"], -1.0, 1.0);
        let g = GridSpec::new(&p, 401).unwrap();
        let feas = g.feasible_points(&p, 1e-9).unwrap();
        let again: Vec<_> = g.points().filter(|u| p.feasible(u, 1e-9)).collect();
        assert_eq!(feas, again);
        assert_eq!(feas, g.feasible_points(&p, 1e-9).unwrap());
    }

    #[test]
    fn quasi_implies_local_on_quadratic() {
        let p = build(&[("u0^2", "3*u0^2")], &[], -1.0, 1.0);
        let c = GridSpec::new(&p, 401).unwrap().feasible_candidates(&p, 1e-9).unwrap();
        let r = check_prop_2_1(&p, 0.01, &c).unwrap();
        assert!(r.checked > 0);
        assert!(r.violations.is_empty());
        let empty = Candidates::new(&p, vec![]).unwrap();
        assert_eq!(check_prop_2_1(&p, 0.01, &empty).unwrap().checked, 0);
    }

    #[test]
    fn merit_inequality_cases() {
        let p = build(&[("u0^2", "3*u0^2")], &["u0^2-1"], -1.0, 1.0);
        let c = GridSpec::new(&p, 401).unwrap().feasible_candidates(&p, 1e-9).unwrap();
        assert_eq!(
            check_thm_3_3(&p, &[0.0], &[0.3], &c, 1e-9).unwrap(),
            MeritInequality::Holds {
                conclusion_verified: true,
                counterexample: None
            }
        );
        let lin = build(&[("u0", "u0+1")], &[], -1.0, 1.0);
        let c = GridSpec::new(&lin, 401).unwrap().feasible_candidates(&lin, 1e-9).unwrap();
        match check_thm_3_3(&lin, &[0.0], &[0.1], &c, 1e-9).unwrap() {
            MeritInequality::HypothesisViolated { witness, lhs, rhs } => {
                assert!(witness[0] < 0.0);
                assert!(lhs < rhs);
            }
            v => panic!("{v:?}"),
        }
        // huge epsilon at the grid argmin of the merit
        match check_thm_3_3(&lin, &[-1.0], &[1e3], &c, 1e-9).unwrap() {
            MeritInequality::Holds { conclusion_verified, .. } => assert!(conclusion_verified),
            v => panic!("{v:?}"),
        }
    }
}
