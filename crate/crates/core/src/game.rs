//! Noncooperative games with interval-valued losses, checked one player at
//! a time on that player's own grid.

use rayon::prelude::*;
use serde::Serialize;

use crate::certificates::{
    eps_kkt_thm_4_1, kkt_check, sufficiency_thm_4_3, CertificateReport, EpsKktOutcome, Radius, SufficiencyReport,
    SufficiencyVerdict, Verdict,
};
use crate::error::{Error, Result};
use crate::expr::{Expr, Substitution};
use crate::grid::{default_points_per_dim, GridSpec};
use crate::ivf::IVFunction;
use crate::polytope::distance;
use crate::problem::{dominates, merit_of, Candidates, MIOProblem, Shift, Tolerances};

/// One player. Losses are written over the whole profile; constraints use
/// profile indices but may only touch the player's own block.
#[derive(Clone, Debug, PartialEq)]
pub struct Player {
    pub dim: usize,
    pub objectives: Vec<IVFunction>,
    pub constraints: Vec<Expr>,
    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
    pub points_per_dim: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Game {
    pub name: Option<String>,
    players: Vec<Player>,
    offsets: Vec<usize>,
    dim: usize,
}

impl Game {
    pub fn new(players: Vec<Player>) -> Result<Self> {
        if players.len() < 2 {
            return Err(Error::InvalidModel(format!("a game needs at least two players, got {}", players.len())));
        }
        let mut offsets = Vec::with_capacity(players.len());
        let mut dim = 0;
        for p in &players {
            offsets.push(dim);
            dim += p.dim;
        }
        let m = players[0].objectives.len();
        for (i, p) in players.iter().enumerate() {
            let who = i + 1;
            if p.dim == 0 {
                return Err(Error::InvalidModel(format!("player {who} has an empty strategy block")));
            }
            if p.objectives.len() != m || m == 0 {
                return Err(Error::InvalidModel(format!(
                    "every player needs the same positive number of objectives; player {who} has {}",
                    p.objectives.len()
                )));
            }
            if p.box_lo.len() != p.dim || p.box_hi.len() != p.dim {
                return Err(Error::DimensionMismatch {
                    expected: p.dim,
                    found: p.box_lo.len().max(p.box_hi.len()),
                });
            }
            if let Some(f) = p.objectives.iter().find(|f| f.dim() != dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: f.dim(),
                });
            }
            let block = offsets[i]..offsets[i] + p.dim;
            for (j, g) in p.constraints.iter().enumerate() {
                if let Some(v) = g.variables().into_iter().find(|v| !block.contains(v)) {
                    return Err(Error::InvalidModel(format!(
                        "constraint {} of player {who} uses u{v} outside its own block u{}..u{}",
                        j + 1,
                        block.start,
                        block.end - 1
                    )));
                }
            }
        }
        let game = Game {
            name: None,
            players,
            offsets,
            dim,
        };
        for i in 0..game.players.len() {
            let origin = vec![0.0; dim];
            game.fix_opponents(i, &origin)?;
        }
        Ok(game)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn players(&self) -> &[Player] {
        &self.players
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn num_objectives(&self) -> usize {
        self.players[0].objectives.len()
    }

    /// Length of a strategy profile.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i] + self.players[i].dim
    }

    fn check_profile(&self, profile: &[f64]) -> Result<()> {
        if profile.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: profile.len(),
            });
        }
        Ok(())
    }

    /// Player `i`'s problem in its own coordinates, opponents frozen at
    /// `profile`.
    pub fn fix_opponents(&self, i: usize, profile: &[f64]) -> Result<MIOProblem> {
        self.check_profile(profile)?;
        let p = self.players.get(i).ok_or_else(|| {
            Error::InvalidArgument(format!("player {} does not exist; the game has {}", i + 1, self.players.len()))
        })?;
        let block = self.block(i);
        let map = |v: usize| {
            if block.contains(&v) {
                Substitution::Var(v - block.start)
            } else {
                Substitution::Value(profile[v])
            }
        };
        let objectives = p
            .objectives
            .iter()
            .map(|f| IVFunction::new(f.lower().substitute(&map), f.upper().substitute(&map), p.dim))
            .collect::<Result<Vec<_>>>()?;
        let constraints = p.constraints.iter().map(|g| g.substitute(&map)).collect();
        Ok(MIOProblem::new(p.dim, objectives, constraints, p.box_lo.clone(), p.box_hi.clone())?
            .with_name(format!("player {}", i + 1)))
    }

    pub fn grid(&self, i: usize) -> Result<GridSpec> {
        let p = &self.players[i];
        let n = match p.points_per_dim {
            Some(n) => n,
            None => default_points_per_dim(p.dim)?,
        };
        GridSpec::with_box(p.box_lo.clone(), p.box_hi.clone(), n)
    }

    /// Feasible grid points of player `i`, evaluated with opponents at `profile`.
    pub fn candidates(&self, i: usize, profile: &[f64], tau_feas: f64) -> Result<(MIOProblem, Candidates)> {
        let prob = self.fix_opponents(i, profile)?;
        let cands = self.grid(i)?.feasible_candidates(&prob, tau_feas)?;
        Ok((prob, cands))
    }

    pub fn require_feasible(&self, profile: &[f64], tau_feas: f64) -> Result<()> {
        self.check_profile(profile)?;
        for (i, p) in self.players.iter().enumerate() {
            let worst = p.constraints.iter().map(|g| g.eval(profile)).fold(f64::NEG_INFINITY, f64::max);
            if worst > tau_feas {
                return Err(Error::Infeasible {
                    point: profile[self.block(i)].to_vec(),
                    violation: worst,
                });
            }
        }
        Ok(())
    }

    fn own(&self, i: usize, profile: &[f64]) -> Vec<f64> {
        profile[self.block(i)].to_vec()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PlayerCheck {
    /// One-based.
    pub player: usize,
    pub holds: bool,
    /// Lowest-merit profitable unilateral deviation, in the player's own
    /// coordinates.
    pub deviation: Option<Vec<f64>>,
    pub grid_points: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquilibriumReport {
    pub holds: bool,
    pub players: Vec<PlayerCheck>,
}

fn best_deviation(fu: &[crate::interval::Interval], own: &[f64], shift: Shift<'_>, cands: &Candidates) -> Option<usize> {
    (0..cands.len())
        .into_par_iter()
        .filter(|&z| dominates(cands.value(z), fu, shift, cands.point(z), own))
        .min_by(|&a, &b| {
            merit_of(cands.value(a))
                .total_cmp(&merit_of(cands.value(b)))
                .then(a.cmp(&b))
        })
}

fn equilibrium(game: &Game, profile: &[f64], eps: &[f64], quasi: bool, tol: &Tolerances) -> Result<EquilibriumReport> {
    game.require_feasible(profile, tol.feasibility)?;
    if eps.len() != game.num_objectives() || eps.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "epsilon needs {} finite nonnegative components, got {eps:?}",
            game.num_objectives()
        )));
    }
    let players = (0..game.num_players())
        .map(|i| {
            let (prob, cands) = game.candidates(i, profile, tol.feasibility)?;
            let own = game.own(i, profile);
            let fu = prob.values(&own)?;
            let shift = if quasi {
                Shift::DistanceScaled(eps)
            } else {
                Shift::Constant(eps)
            };
            let dev = best_deviation(&fu, &own, shift, &cands);
            Ok(PlayerCheck {
                player: i + 1,
                holds: dev.is_none(),
                deviation: dev.map(|z| cands.point(z).to_vec()),
                grid_points: cands.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EquilibriumReport {
        holds: players.iter().all(|p| p.holds),
        players,
    })
}

/// Weak ε-Nash equilibrium: no player has a grid deviation beating every
/// loss by the margin `[0, ε_k]`.
pub fn is_w_eps_ne(game: &Game, profile: &[f64], eps: &[f64], tol: &Tolerances) -> Result<EquilibriumReport> {
    equilibrium(game, profile, eps, false, tol)
}

/// Weak ε-quasi Nash equilibrium, margin `[0, ε_k ‖ū_i - y_i‖]`.
pub fn is_w_eps_qne(game: &Game, profile: &[f64], eps: &[f64], tol: &Tolerances) -> Result<EquilibriumReport> {
    equilibrium(game, profile, eps, true, tol)
}

/// Same predicate as [`is_w_eps_qne`], evaluated on full profiles without
/// building the per-player problems.
pub fn is_w_eps_qne_direct(game: &Game, profile: &[f64], eps: &[f64], tol: &Tolerances) -> Result<bool> {
    game.require_feasible(profile, tol.feasibility)?;
    for (i, p) in game.players().iter().enumerate() {
        let block = game.block(i);
        let fu: Vec<_> = p
            .objectives
            .iter()
            .map(|f| f.eval(profile))
            .collect::<Result<_>>()?;
        let grid = game.grid(i)?;
        let beaten = (0..grid.len()).into_par_iter().any(|t| {
            let y = grid.point(t);
            let mut q = profile.to_vec();
            q[block.clone()].copy_from_slice(&y);
            if p.constraints.iter().any(|g| g.eval(&q) > tol.feasibility) {
                return false;
            }
            let d = distance(&y, &profile[block.clone()]);
            p.objectives.iter().zip(&fu).zip(eps).all(|((f, b), e)| match f.eval(&q) {
                Ok(a) => a.plus_handicap(if *e == 0.0 { 0.0 } else { e * d }).cw_lt(b),
                Err(_) => false,
            })
        });
        if beaten {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GameKktMode {
    /// Search `B̄(ū_i, δ)` with slack `max_k ε_k / δ`.
    Ball { delta: f64 },
    /// Multiplier condition at `ū_i` with slack `Σ λ_k ε_k`.
    AtPoint,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlayerKkt {
    pub player: usize,
    pub verdict: Verdict,
    /// Counterexample to the player's equilibrium premise, if any.
    pub premise_witness: Option<Vec<f64>>,
    pub report: Option<CertificateReport>,
    pub search: Option<EpsKktOutcome>,
}

/// Per-player multiplier certificates at a profile.
pub fn game_kkt(game: &Game, profile: &[f64], eps: &[f64], mode: GameKktMode, tol: &Tolerances) -> Result<Vec<PlayerKkt>> {
    game.require_feasible(profile, tol.feasibility)?;
    (0..game.num_players())
        .map(|i| {
            let (prob, cands) = game.candidates(i, profile, tol.feasibility)?;
            prob.check_epsilon_nonzero(eps)?;
            let own = game.own(i, profile);
            match mode {
                GameKktMode::Ball { delta } => match eps_kkt_thm_4_1(&prob, &own, eps, delta, &cands, tol) {
                    Ok(out) => Ok(PlayerKkt {
                        player: i + 1,
                        verdict: out.verdict,
                        premise_witness: None,
                        report: out.report.clone(),
                        search: Some(out),
                    }),
                    Err(Error::PremiseViolated { witness, .. }) => Ok(PlayerKkt {
                        player: i + 1,
                        verdict: Verdict::Fails,
                        premise_witness: witness,
                        report: None,
                        search: None,
                    }),
                    Err(e) => Err(e),
                },
                GameKktMode::AtPoint => {
                    let fu = prob.values(&own)?;
                    if let Some(z) = best_deviation(&fu, &own, Shift::DistanceScaled(eps), &cands) {
                        return Ok(PlayerKkt {
                            player: i + 1,
                            verdict: Verdict::Fails,
                            premise_witness: Some(cands.point(z).to_vec()),
                            report: None,
                            search: None,
                        });
                    }
                    let rep = kkt_check(&prob, &own, &Radius::LambdaWeighted(eps.to_vec()), tol)?;
                    Ok(PlayerKkt {
                        player: i + 1,
                        verdict: rep.verdict,
                        premise_witness: None,
                        report: Some(rep),
                        search: None,
                    })
                }
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct GameSufficiency {
    pub verdict: SufficiencyVerdict,
    pub players: Vec<SufficiencyReport>,
}

/// Per-player sufficiency pipeline; the conclusion checked on each grid is
/// the player's part of the quasi equilibrium.
pub fn game_sufficiency(game: &Game, profile: &[f64], eps: &[f64], tol: &Tolerances) -> Result<GameSufficiency> {
    game.require_feasible(profile, tol.feasibility)?;
    let players = (0..game.num_players())
        .map(|i| {
            let (prob, cands) = game.candidates(i, profile, tol.feasibility)?;
            sufficiency_thm_4_3(&prob, &game.own(i, profile), eps, &cands, tol)
        })
        .collect::<Result<Vec<_>>>()?;
    let has = |v| players.iter().any(|p| p.verdict == v);
    let verdict = if has(SufficiencyVerdict::Refuted) {
        SufficiencyVerdict::Refuted
    } else if has(SufficiencyVerdict::HypothesisFailed) {
        SufficiencyVerdict::HypothesisFailed
    } else if has(SufficiencyVerdict::Inconclusive) {
        SufficiencyVerdict::Inconclusive
    } else {
        SufficiencyVerdict::Holds
    };
    Ok(GameSufficiency { verdict, players })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn player(dim: usize, total: usize, objs: &[(&str, &str)], cons: &[&str], lo: f64, hi: f64) -> Player {
        Player {
            dim,
            objectives: objs
                .iter()
                .map(|(l, u)| IVFunction::new(parse_expr(l, total).unwrap(), parse_expr(u, total).unwrap(), total).unwrap())
                .collect(),
            constraints: cons.iter().map(|g| parse_expr(g, total).unwrap()).collect(),
            box_lo: vec![lo; dim],
            box_hi: vec![hi; dim],
            points_per_dim: None,
        }
    }

    fn quadratic_game() -> Game {
        Game::new(vec![
            player(1, 2, &[("(u0-u1)^2", "3*(u0-u1)^2")], &[], 0.0, 1.0),
            player(1, 2, &[("(u1-u0)^2", "3*(u1-u0)^2")], &[], 0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn fixing_opponents() {
        let g = quadratic_game();
        let p = g.fix_opponents(0, &[0.2, 0.5]).unwrap();
        let f = &p.objectives()[0];
        for x in [0.0, 0.3, 1.0] {
            let want = (x - 0.5) * (x - 0.5);
            assert!((f.lower().eval(&[x]) - want).abs() < 1e-15);
            assert!((f.upper().eval(&[x]) - 3.0 * want).abs() < 1e-15);
        }
        assert_eq!(p.dim(), 1);

        let three = Game::new(vec![
            player(1, 3, &[("u0^2+u1+u2", "u0^2+u1+u2+1")], &["-u0"], -1.0, 1.0),
            player(1, 3, &[("u1^2", "u1^2+1")], &[], -1.0, 1.0),
            player(1, 3, &[("u2^2", "u2^2+1")], &[], -1.0, 1.0),
        ])
        .unwrap();
        let p = three.fix_opponents(0, &[0.0, 0.25, 0.5]).unwrap();
        assert_eq!(p.dim(), 1);
        assert_eq!(p.objectives()[0].lower().eval(&[1.0]), 1.75);
        assert_eq!(p.constraints()[0].eval(&[0.5]), -0.5);
    }

    #[test]
    fn shared_constraints_rejected() {
        let bad = Game::new(vec![
            player(1, 2, &[("u0", "u0+1")], &["u0+u1-1"], 0.0, 1.0),
            player(1, 2, &[("u1", "u1+1")], &[], 0.0, 1.0),
        ]);
        assert!(matches!(bad, Err(Error::InvalidModel(_))));
        let lonely = Game::new(vec![player(1, 1, &[("u0", "u0+1")], &[], 0.0, 1.0)]);
        assert!(lonely.is_err());
    }

    #[test]
    fn quadratic_equilibria() {
        let g = quadratic_game();
        let tol = Tolerances::default();
        assert!(is_w_eps_ne(&g, &[0.5, 0.5], &[0.1], &tol).unwrap().holds);
        assert!(is_w_eps_qne(&g, &[0.5, 0.5], &[0.1], &tol).unwrap().holds);
        assert!(is_w_eps_ne(&g, &[0.5, 0.5], &[0.0], &tol).unwrap().holds);

        let rep = is_w_eps_ne(&g, &[0.0, 1.0], &[0.01], &tol).unwrap();
        assert!(!rep.holds);
        assert_eq!(rep.players[0].deviation, Some(vec![1.0]));
        assert!(is_w_eps_ne(&g, &[0.0, 1.0], &[5.0], &tol).unwrap().holds);
    }

    #[test]
    fn kkt_per_player() {
        let g = quadratic_game();
        let tol = Tolerances::default();
        let reps = game_kkt(&g, &[0.5, 0.5], &[0.1], GameKktMode::AtPoint, &tol).unwrap();
        for r in &reps {
            assert_eq!(r.verdict, Verdict::Holds);
            assert!(r.report.as_ref().unwrap().residual <= 1e-8);
        }
        let reps = game_kkt(&g, &[0.5, 0.5], &[0.1], GameKktMode::Ball { delta: 0.2 }, &tol).unwrap();
        assert!(reps.iter().all(|r| r.verdict == Verdict::Holds));
        let reps = game_kkt(&g, &[0.0, 1.0], &[0.01], GameKktMode::AtPoint, &tol).unwrap();
        assert!(reps[0].premise_witness.is_some());
    }

    #[test]
    fn boundary_multiplier() {
        let g = Game::new(vec![
            player(1, 2, &[("u0", "2*u0")], &["-u0"], -1.0, 1.0),
            player(1, 2, &[("u1", "2*u1")], &["-u1"], -1.0, 1.0),
        ])
        .unwrap();
        let tol = Tolerances::default();
        let reps = game_kkt(&g, &[0.0, 0.0], &[0.1], GameKktMode::AtPoint, &tol).unwrap();
        for r in reps {
            let rep = r.report.unwrap();
            assert_eq!(rep.verdict, Verdict::Holds);
            assert!(rep.mu[0] > 0.0);
        }
    }

    #[test]
    fn sufficiency() {
        let tol = Tolerances::default();
        let g = Game::new(vec![
            player(1, 2, &[("abs(u0-0.25)", "abs(u0-0.25)+1")], &["-u0"], -1.0, 1.0),
            player(1, 2, &[("abs(u1-0.5)", "abs(u1-0.5)+1")], &["-u1"], -1.0, 1.0),
        ])
        .unwrap();
        assert_eq!(game_sufficiency(&g, &[0.25, 0.5], &[0.1], &tol).unwrap().verdict, SufficiencyVerdict::Holds);
        let q = quadratic_game();
        assert_eq!(game_sufficiency(&q, &[0.5, 0.5], &[0.1], &tol).unwrap().verdict, SufficiencyVerdict::Holds);
        assert_eq!(
            game_sufficiency(&q, &[0.0, 1.0], &[0.1], &tol).unwrap().verdict,
            SufficiencyVerdict::HypothesisFailed
        );
    }

    #[test]
    fn two_paths_agree() {
        let g = quadratic_game();
        let tol = Tolerances::default();
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let u = vec![rng.random_range(0..=8) as f64 / 8.0, rng.random_range(0..=8) as f64 / 8.0];
            let eps = [rng.random_range(0..=4) as f64 / 8.0];
            let a = is_w_eps_qne(&g, &u, &eps, &tol).unwrap().holds;
            let b = is_w_eps_qne_direct(&g, &u, &eps, &tol).unwrap();
            assert_eq!(a, b, "{u:?} {eps:?}");
        }
    }
}
