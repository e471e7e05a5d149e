//! Command-line front end. `run` parses arguments, dispatches, prints a
//! summary and returns the exit code.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use crate::certificates::{
    approx_kkt_sequence, bcq_check, eps_kkt_thm_4_1, gen_convexity_check, kkt_check, modified_eps_kkt,
    sufficiency_thm_4_3, Radius, SufficiencyVerdict, Verdict,
};
use crate::error::{Error, Result};
use crate::evp::{descent_eps_minimal, evp_descent, evp_descent_scalar, evp_descent_vector, quasi_existence};
use crate::game::{game_kkt, game_sufficiency, is_w_eps_ne, is_w_eps_qne, GameKktMode};
use crate::grid::{check_prop_2_1, check_thm_3_3, GridSpec, MeritInequality};
use crate::io::{load_game, load_problem, write_json, LoadedGame, LoadedProblem};
use crate::problem::{find_dominator, Candidates, MIOProblem, Shift, Tolerances};
use crate::report::{ConfigEcho, RunReport};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Write the run report as JSON.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    /// Grid points per dimension (overrides the file).
    #[arg(long, global = true)]
    pub points_per_dim: Option<usize>,
    /// Feasibility tolerance on g_j(u) <= 0.
    #[arg(long, global = true)]
    pub tau_feas: Option<f64>,
    /// Active-set tolerance |g_j(u)| <= tau.
    #[arg(long, global = true)]
    pub tau_act: Option<f64>,
    /// Branch tolerance for abs, max and min.
    #[arg(long, global = true)]
    pub tau_kink: Option<f64>,
    /// Min-norm solver gap and acceptance slack.
    #[arg(long, global = true)]
    pub tau_solver: Option<f64>,
    /// Cap on each constraint multiplier.
    #[arg(long, global = true)]
    pub mu_max: Option<f64>,
    /// Min-norm solver iteration cap.
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Suppress the text summary.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ProblemArg {
    #[arg(long)]
    pub problem: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct PointArg {
    /// Comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
}

#[derive(Args, Debug, Clone)]
pub struct EpsArg {
    /// Comma-separated, one per objective; defaults to the file's `epsilons`.
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Concept {
    WeakMin,
    EpsMin,
    Quasi,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum EvpMode {
    /// Summed order, ε a vector.
    Summed,
    /// Componentwise order with a common ε.
    Vector,
    /// Single objective.
    Scalar,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GameConcept {
    Ne,
    Qne,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solution-concept membership of a point on the feasible grid.
    Verify {
        #[command(flatten)]
        problem: ProblemArg,
        #[command(flatten)]
        point: PointArg,
        #[arg(long, value_enum, default_value = "weak-min")]
        concept: Concept,
        #[command(flatten)]
        eps: EpsArg,
        /// Restrict competitors to this closed ball around the point.
        #[arg(long)]
        ball: Option<f64>,
    },
    /// ε-minimal point by strict descent in the summed order.
    Exist {
        #[command(flatten)]
        problem: ProblemArg,
        #[command(flatten)]
        eps: EpsArg,
        /// Defaults to the first feasible grid point.
        #[arg(long, allow_hyphen_values = true)]
        start: Option<String>,
    },
    /// Ekeland-type iteration from a start point.
    Evp {
        #[command(flatten)]
        problem: ProblemArg,
        #[command(flatten)]
        point: PointArg,
        #[command(flatten)]
        eps: EpsArg,
        #[arg(long, value_enum, default_value = "summed")]
        mode: EvpMode,
    },
    /// Descent followed by the summed iteration; checks quasi-minimality.
    Quasi {
        #[command(flatten)]
        problem: ProblemArg,
        #[command(flatten)]
        eps: EpsArg,
    },
    /// Merit-inequality hypothesis and its quasi-minimality conclusion.
    Thm33 {
        #[command(flatten)]
        problem: ProblemArg,
        #[command(flatten)]
        point: PointArg,
        #[command(flatten)]
        eps: EpsArg,
    },
    /// Multiplier condition at a point.
    Kkt {
        #[command(flatten)]
        problem: ProblemArg,
        #[command(flatten)]
        point: PointArg,
        /// Fixed slack on the residual.
        #[arg(long, conflicts_with = "eps")]
        radius: Option<f64>,
        /// Slack Σ λ_k ε_k.
        #[command(flatten)]
        eps: EpsArg,
    },
    /// Approximate multiplier point in a grid ball.
    Epskkt {
        #[command(flatten)]
        problem: ProblemArg,
        #[command(flatten)]
        point: PointArg,
        #[command(flatten)]
        eps: EpsArg,
        #[arg(long)]
        delta: f64,
    },
    /// Basic constraint qualification.
    Bcq {
        #[command(flatten)]
        problem: ProblemArg,
        #[command(flatten)]
        point: PointArg,
    },
    /// Generalized convexity at a point, sampled on the grid.
    Genconvex {
        #[command(flatten)]
        problem: ProblemArg,
        #[command(flatten)]
        point: PointArg,
        /// Sample only feasible grid points.
        #[arg(long)]
        feasible_only: bool,
    },
    /// Multiplier condition plus generalized convexity imply quasi-minimality.
    Sufficiency {
        #[command(flatten)]
        problem: ProblemArg,
        #[command(flatten)]
        point: PointArg,
        #[command(flatten)]
        eps: EpsArg,
    },
    /// Modified ε-KKT point near a start point.
    Modkkt {
        #[command(flatten)]
        problem: ProblemArg,
        #[command(flatten)]
        point: PointArg,
        /// Scalar ϵ >= 0.
        #[arg(long)]
        eps: f64,
    },
    /// Approximate multiplier sequence converging to a local minimizer.
    Seqkkt {
        #[command(flatten)]
        problem: ProblemArg,
        #[command(flatten)]
        point: PointArg,
        /// JSON file `{"xs": [[..], ..], "eps": [..]}`.
        #[arg(long, conflicts_with = "terms")]
        sequence: Option<PathBuf>,
        /// Generate `ϵ_i = 1/i²` for `i <= terms` and `x_n = ū + 1/n`.
        #[arg(long)]
        terms: Option<usize>,
        /// Per-objective inflation radii.
        #[arg(long)]
        inflate: Option<String>,
    },
    /// Weak ε-Nash or quasi-Nash equilibrium of a profile.
    GameVerify {
        #[arg(long)]
        game: PathBuf,
        #[command(flatten)]
        point: PointArg,
        #[command(flatten)]
        eps: EpsArg,
        #[arg(long, value_enum, default_value = "ne")]
        concept: GameConcept,
    },
    /// Per-player multiplier certificates.
    GameKkt {
        #[arg(long)]
        game: PathBuf,
        #[command(flatten)]
        point: PointArg,
        #[command(flatten)]
        eps: EpsArg,
        /// Search a ball of this radius instead of checking at the profile.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Per-player sufficiency pipeline.
    GameSufficiency {
        #[arg(long)]
        game: PathBuf,
        #[command(flatten)]
        point: PointArg,
        #[command(flatten)]
        eps: EpsArg,
    },
    /// Quasi-minimality implies local ε-minimality, over the whole grid.
    Prop21 {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long)]
        eps0: f64,
    },
}

#[derive(Parser, Debug)]
#[command(name = "miop", version, about = "Grid-relative verification for multiobjective interval-valued problems")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

pub fn parse_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("{what}: cannot read {:?} as a number", s.trim())))
        })
        .collect()
}

fn tolerances(base: &Tolerances, c: &Common) -> Result<Tolerances> {
    let mut t = base.clone();
    if let Some(v) = c.tau_feas {
        t.feasibility = v;
    }
    if let Some(v) = c.tau_act {
        t.active = v;
    }
    if let Some(v) = c.tau_kink {
        t.kink = v;
    }
    if let Some(v) = c.tau_solver {
        t.solver = v;
    }
    if let Some(v) = c.mu_max {
        t.mu_max = v;
    }
    if let Some(v) = c.max_iter {
        t.max_iter = v;
    }
    t.validate()?;
    Ok(t)
}

struct Ctx {
    problem: MIOProblem,
    tol: Tolerances,
    grid: GridSpec,
    cands: Candidates,
    eps: Option<Vec<f64>>,
}

impl Ctx {
    fn load(path: &PathBuf, c: &Common, slot: &mut Option<ConfigEcho>) -> Result<Self> {
        let LoadedProblem {
            problem,
            points_per_dim,
            tolerances: file_tol,
            epsilons,
            ..
        } = load_problem(path)?;
        let tol = tolerances(&file_tol, c)?;
        let grid = match c.points_per_dim.or(points_per_dim) {
            Some(n) => GridSpec::new(&problem, n)?,
            None => GridSpec::default_for(&problem)?,
        };
        let cands = grid.feasible_candidates(&problem, tol.feasibility)?;
        let ctx = Ctx {
            problem,
            tol,
            grid,
            cands,
            eps: epsilons,
        };
        *slot = Some(ctx.echo());
        Ok(ctx)
    }

    fn point(&self, text: &str) -> Result<Vec<f64>> {
        let u = parse_list(text, "point")?;
        self.problem.check_point(&u)?;
        Ok(u)
    }

    fn eps(&self, arg: &EpsArg) -> Result<Vec<f64>> {
        let e = match (&arg.eps, &self.eps) {
            (Some(t), _) => parse_list(t, "eps")?,
            (None, Some(e)) => e.clone(),
            (None, None) => return Err(Error::InvalidArgument("--eps is required (the file has no epsilons)".into())),
        };
        self.problem.check_epsilon(&e)?;
        Ok(e)
    }

    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            tolerances: self.tol.clone(),
            points_per_dim: vec![self.grid.points_per_dim()],
            feasible_grid_points: vec![self.cands.len()],
            box_lo: self.problem.box_lo().to_vec(),
            box_hi: self.problem.box_hi().to_vec(),
        }
    }
}

struct GameCtx {
    loaded: LoadedGame,
    tol: Tolerances,
}

impl GameCtx {
    fn load(path: &PathBuf, c: &Common) -> Result<Self> {
        let mut loaded = load_game(path)?;
        if let Some(n) = c.points_per_dim {
            let players = loaded
                .game
                .players()
                .iter()
                .cloned()
                .map(|mut p| {
                    p.points_per_dim = Some(n);
                    p
                })
                .collect();
            let name = loaded.game.name.clone();
            loaded.game = crate::game::Game::new(players)?;
            loaded.game.name = name;
        }
        let tol = tolerances(&loaded.tolerances, c)?;
        Ok(GameCtx { loaded, tol })
    }

    fn profile(&self, text: &str) -> Result<Vec<f64>> {
        let u = parse_list(text, "point")?;
        if u.len() != self.loaded.game.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.loaded.game.dim(),
                found: u.len(),
            });
        }
        Ok(u)
    }

    fn eps(&self, arg: &EpsArg) -> Result<Vec<f64>> {
        let e = match (&arg.eps, &self.loaded.epsilons) {
            (Some(t), _) => parse_list(t, "eps")?,
            (None, Some(e)) => e.clone(),
            (None, None) => return Err(Error::InvalidArgument("--eps is required (the file has no epsilons)".into())),
        };
        if e.len() != self.loaded.game.num_objectives() {
            return Err(Error::DimensionMismatch {
                expected: self.loaded.game.num_objectives(),
                found: e.len(),
            });
        }
        Ok(e)
    }

    fn echo(&self, profile: &[f64]) -> Result<ConfigEcho> {
        let g = &self.loaded.game;
        let mut ppd = Vec::new();
        let mut feasible = Vec::new();
        for i in 0..g.num_players() {
            ppd.push(g.grid(i)?.points_per_dim());
            feasible.push(g.candidates(i, profile, self.tol.feasibility)?.1.len());
        }
        Ok(ConfigEcho {
            tolerances: self.tol.clone(),
            points_per_dim: ppd,
            feasible_grid_points: feasible,
            box_lo: g.players().iter().flat_map(|p| p.box_lo.clone()).collect(),
            box_hi: g.players().iter().flat_map(|p| p.box_hi.clone()).collect(),
        })
    }
}

fn code_of(v: Verdict) -> i32 {
    match v {
        Verdict::Holds => EXIT_HOLDS,
        Verdict::Fails => EXIT_FAILS,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn bool_verdict(b: bool) -> Verdict {
    if b {
        Verdict::Holds
    } else {
        Verdict::Fails
    }
}

fn sufficiency_code(v: SufficiencyVerdict) -> (String, i32) {
    match v {
        SufficiencyVerdict::Holds => ("holds".into(), EXIT_HOLDS),
        SufficiencyVerdict::HypothesisFailed => ("hypothesis-failed".into(), EXIT_FAILS),
        SufficiencyVerdict::Refuted => ("refuted".into(), EXIT_FAILS),
        SufficiencyVerdict::Inconclusive => ("inconclusive".into(), EXIT_INCONCLUSIVE),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceFile {
    xs: Vec<Vec<f64>>,
    eps: Vec<f64>,
}

/// Verdict label, exit code, config echo and details of one command.
type Outcome = (String, i32, ConfigEcho, serde_json::Value);

fn dispatch(command: &Command, c: &Common, slot: &mut Option<ConfigEcho>) -> Result<Outcome> {
    let simple = |v: Verdict| (v.to_string(), code_of(v));
    match command {
        Command::Verify {
            problem,
            point,
            concept,
            eps,
            ball,
        } => {
            let ctx = Ctx::load(&problem.problem, c, slot)?;
            let u = ctx.point(&point.point)?;
            ctx.problem.require_feasible(&u, ctx.tol.feasibility)?;
            let pool = match ball {
                Some(r) => ctx.cands.within_ball(&u, *r),
                None => ctx.cands.clone(),
            };
            let m = ctx.problem.num_objectives();
            let e = match concept {
                Concept::WeakMin => vec![0.0; m],
                _ => ctx.eps(eps)?,
            };
            let shift = match concept {
                Concept::WeakMin => Shift::None,
                Concept::EpsMin => Shift::Constant(&e),
                Concept::Quasi => Shift::DistanceScaled(&e),
            };
            let dom = find_dominator(&ctx.problem, &u, shift, &pool)?;
            let (label, code) = simple(bool_verdict(dom.is_none()));
            let details = json!({
                "point": u,
                "eps": e,
                "ball": ball,
                "candidates": pool.len(),
                "dominator": dom.map(|i| pool.point(i).to_vec()),
            });
            Ok((label, code, ctx.echo(), details))
        }
        Command::Exist { problem, eps, start } => {
            let ctx = Ctx::load(&problem.problem, c, slot)?;
            let e = ctx.eps(eps)?;
            let s = match start {
                Some(t) => ctx.point(t)?,
                None => ctx.cands.points().first().cloned().ok_or(Error::EmptyFeasibleGrid)?,
            };
            let out = descent_eps_minimal(&ctx.problem, &e, &ctx.cands, &s, ctx.tol.feasibility)?;
            let ok = out.verified && out.trace.steps() as f64 <= out.iteration_bound;
            let (label, code) = simple(bool_verdict(ok));
            Ok((label, code, ctx.echo(), to_value(&out)))
        }
        Command::Evp {
            problem,
            point,
            eps,
            mode,
        } => {
            let ctx = Ctx::load(&problem.problem, c, slot)?;
            let x0 = ctx.point(&point.point)?;
            let e = ctx.eps(eps)?;
            let cert = match mode {
                EvpMode::Summed => evp_descent(&ctx.problem, &e, &ctx.cands, &x0, ctx.tol.feasibility)?,
                EvpMode::Vector => {
                    if e.iter().any(|x| *x != e[0]) {
                        return Err(Error::InvalidArgument("vector mode needs a common epsilon".into()));
                    }
                    evp_descent_vector(&ctx.problem, e[0], &ctx.cands, &x0, ctx.tol.feasibility)?
                }
                EvpMode::Scalar => evp_descent_scalar(&ctx.problem, e[0], &ctx.cands, &x0, ctx.tol.feasibility)?,
            };
            let (label, code) = simple(bool_verdict(cert.holds()));
            Ok((label, code, ctx.echo(), to_value(&cert)))
        }
        Command::Quasi { problem, eps } => {
            let ctx = Ctx::load(&problem.problem, c, slot)?;
            let e = ctx.eps(eps)?;
            let out = quasi_existence(&ctx.problem, &e, &ctx.cands, ctx.tol.feasibility)?;
            let (label, code) = simple(bool_verdict(out.holds()));
            Ok((label, code, ctx.echo(), to_value(&out)))
        }
        Command::Thm33 { problem, point, eps } => {
            let ctx = Ctx::load(&problem.problem, c, slot)?;
            let u = ctx.point(&point.point)?;
            let e = ctx.eps(eps)?;
            let v = check_thm_3_3(&ctx.problem, &u, &e, &ctx.cands, ctx.tol.feasibility)?;
            let (label, code) = match &v {
                MeritInequality::HypothesisViolated { .. } => ("hypothesis-violated".to_string(), EXIT_FAILS),
                MeritInequality::Holds {
                    conclusion_verified: true,
                    ..
                } => simple(Verdict::Holds),
                MeritInequality::Holds { .. } => ("refuted".to_string(), EXIT_FAILS),
            };
            Ok((label, code, ctx.echo(), to_value(&v)))
        }
        Command::Kkt {
            problem,
            point,
            radius,
            eps,
        } => {
            let ctx = Ctx::load(&problem.problem, c, slot)?;
            let u = ctx.point(&point.point)?;
            let r = match (radius, &eps.eps) {
                (Some(r), _) => Radius::Fixed(*r),
                (None, Some(_)) => Radius::LambdaWeighted(ctx.eps(eps)?),
                (None, None) => Radius::Fixed(0.0),
            };
            let rep = kkt_check(&ctx.problem, &u, &r, &ctx.tol)?;
            let (label, code) = simple(rep.verdict);
            Ok((label, code, ctx.echo(), to_value(&rep)))
        }
        Command::Epskkt {
            problem,
            point,
            eps,
            delta,
        } => {
            let ctx = Ctx::load(&problem.problem, c, slot)?;
            let u = ctx.point(&point.point)?;
            let e = ctx.eps(eps)?;
            let out = eps_kkt_thm_4_1(&ctx.problem, &u, &e, *delta, &ctx.cands, &ctx.tol)?;
            let (label, code) = simple(out.verdict);
            Ok((label, code, ctx.echo(), to_value(&out)))
        }
        Command::Bcq { problem, point } => {
            let ctx = Ctx::load(&problem.problem, c, slot)?;
            let u = ctx.point(&point.point)?;
            let rep = bcq_check(&ctx.problem, &u, &ctx.tol)?;
            let (label, code) = simple(rep.verdict);
            Ok((label, code, ctx.echo(), to_value(&rep)))
        }
        Command::Genconvex {
            problem,
            point,
            feasible_only,
        } => {
            let ctx = Ctx::load(&problem.problem, c, slot)?;
            let u = ctx.point(&point.point)?;
            let samples: Vec<Vec<f64>> = if *feasible_only {
                ctx.cands.points().to_vec()
            } else {
                ctx.grid.points().collect()
            };
            let rep = gen_convexity_check(&ctx.problem, &u, &samples, &ctx.tol)?;
            let (label, code) = simple(rep.verdict);
            Ok((label, code, ctx.echo(), to_value(&rep)))
        }
        Command::Sufficiency { problem, point, eps } => {
            let ctx = Ctx::load(&problem.problem, c, slot)?;
            let u = ctx.point(&point.point)?;
            let e = ctx.eps(eps)?;
            let rep = sufficiency_thm_4_3(&ctx.problem, &u, &e, &ctx.cands, &ctx.tol)?;
            let (label, code) = sufficiency_code(rep.verdict);
            Ok((label, code, ctx.echo(), to_value(&rep)))
        }
        Command::Modkkt { problem, point, eps } => {
            let ctx = Ctx::load(&problem.problem, c, slot)?;
            let u = ctx.point(&point.point)?;
            let out = modified_eps_kkt(&ctx.problem, &u, *eps, &ctx.cands, &ctx.tol)?;
            let (label, code) = simple(out.verdict);
            Ok((label, code, ctx.echo(), to_value(&out)))
        }
        Command::Seqkkt {
            problem,
            point,
            sequence,
            terms,
            inflate,
        } => {
            let ctx = Ctx::load(&problem.problem, c, slot)?;
            let u = ctx.point(&point.point)?;
            let (xs, epss) = match (sequence, terms) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                        path: path.display().to_string(),
                        source,
                    })?;
                    let f: SequenceFile = serde_json::from_str(&text).map_err(|source| Error::Schema {
                        path: path.display().to_string(),
                        source,
                    })?;
                    (f.xs, f.eps)
                }
                (None, Some(n)) => {
                    let len = 8 * n * n + 8;
                    let xs = (1..=len)
                        .map(|k| u.iter().map(|x| x + 1.0 / k as f64).collect())
                        .collect();
                    let epss = (1..=*n).map(|i| 1.0 / (i * i) as f64).collect();
                    (xs, epss)
                }
                (None, None) => {
                    return Err(Error::InvalidArgument("seqkkt needs --sequence or --terms".into()));
                }
            };
            let inf = inflate.as_deref().map(|t| parse_list(t, "inflate")).transpose()?;
            let rep = approx_kkt_sequence(&ctx.problem, &u, &xs, &epss, &ctx.cands, inf.as_deref(), &ctx.tol)?;
            let (label, code) = simple(rep.verdict);
            Ok((label, code, ctx.echo(), to_value(&rep)))
        }
        Command::GameVerify {
            game,
            point,
            eps,
            concept,
        } => {
            let ctx = GameCtx::load(game, c)?;
            let u = ctx.profile(&point.point)?;
            let e = ctx.eps(eps)?;
            let rep = match concept {
                GameConcept::Ne => is_w_eps_ne(&ctx.loaded.game, &u, &e, &ctx.tol)?,
                GameConcept::Qne => is_w_eps_qne(&ctx.loaded.game, &u, &e, &ctx.tol)?,
            };
            let (label, code) = simple(bool_verdict(rep.holds));
            Ok((label, code, ctx.echo(&u)?, to_value(&rep)))
        }
        Command::GameKkt {
            game,
            point,
            eps,
            delta,
        } => {
            let ctx = GameCtx::load(game, c)?;
            let u = ctx.profile(&point.point)?;
            let e = ctx.eps(eps)?;
            let mode = match delta {
                Some(d) => GameKktMode::Ball { delta: *d },
                None => GameKktMode::AtPoint,
            };
            let reps = game_kkt(&ctx.loaded.game, &u, &e, mode, &ctx.tol)?;
            let v = if reps.iter().all(|r| r.verdict == Verdict::Holds) {
                Verdict::Holds
            } else if reps.iter().any(|r| r.verdict == Verdict::Fails) {
                Verdict::Fails
            } else {
                Verdict::Inconclusive
            };
            let (label, code) = simple(v);
            Ok((label, code, ctx.echo(&u)?, to_value(&reps)))
        }
        Command::GameSufficiency { game, point, eps } => {
            let ctx = GameCtx::load(game, c)?;
            let u = ctx.profile(&point.point)?;
            let e = ctx.eps(eps)?;
            let rep = game_sufficiency(&ctx.loaded.game, &u, &e, &ctx.tol)?;
            let (label, code) = sufficiency_code(rep.verdict);
            Ok((label, code, ctx.echo(&u)?, to_value(&rep)))
        }
        Command::Prop21 { problem, eps0 } => {
            let ctx = Ctx::load(&problem.problem, c, slot)?;
            let rep = check_prop_2_1(&ctx.problem, *eps0, &ctx.cands)?;
            let (label, code) = simple(bool_verdict(rep.violations.is_empty()));
            Ok((label, code, ctx.echo(), to_value(&rep)))
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Verify { .. } => "verify",
        Command::Exist { .. } => "exist",
        Command::Evp { .. } => "evp",
        Command::Quasi { .. } => "quasi",
        Command::Thm33 { .. } => "thm33",
        Command::Kkt { .. } => "kkt",
        Command::Epskkt { .. } => "epskkt",
        Command::Bcq { .. } => "bcq",
        Command::Genconvex { .. } => "genconvex",
        Command::Sufficiency { .. } => "sufficiency",
        Command::Modkkt { .. } => "modkkt",
        Command::Seqkkt { .. } => "seqkkt",
        Command::GameVerify { .. } => "game-verify",
        Command::GameKkt { .. } => "game-kkt",
        Command::GameSufficiency { .. } => "game-sufficiency",
        Command::Prop21 { .. } => "prop21",
    }
}

fn summarize(report: &RunReport) -> String {
    let mut out = format!("{}: {}\n", report.command, report.verdict);
    out += &format!(
        "  grid: {:?} points per dim, {:?} feasible\n",
        report.config.points_per_dim, report.config.feasible_grid_points
    );
    if let Some(obj) = report.details.as_object() {
        for (k, v) in obj {
            let text = v.to_string();
            if text.len() <= 120 && !v.is_null() {
                out += &format!("  {k}: {text}\n");
            }
        }
    }
    out
}

/// Full report and exit code for an argument vector (first item is the
/// program name). Usage errors come back as `Err` with the clap message.
pub fn execute<I, T>(args: I) -> std::result::Result<(Option<RunReport>, i32, String), (i32, String)>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let parsed = match Cli::try_parse_from(&args) {
        Ok(p) => p,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion
                | clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_HOLDS,
                _ => EXIT_ERROR,
            };
            return Err((code, e.render().to_string()));
        }
    };
    let started = Instant::now();
    let name = command_name(&parsed.command);
    let mut slot = None;
    let outcome = match dispatch(&parsed.command, &parsed.common, &mut slot) {
        Ok(o) => Ok(o),
        Err(Error::PremiseViolated { what, witness }) => match slot {
            Some(config) => Ok((
                "premise-violated".to_string(),
                EXIT_FAILS,
                config,
                json!({ "premise": what, "witness": witness }),
            )),
            None => Err(Error::PremiseViolated { what, witness }),
        },
        Err(e) => Err(e),
    };
    match outcome {
        Ok((verdict, code, config, details)) => {
            let report = RunReport {
                command: name.into(),
                args: args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
                config,
                verdict,
                details,
                timing_ms: started.elapsed().as_secs_f64() * 1e3,
            };
            if let Some(path) = &parsed.common.json {
                if let Err(e) = write_json(path, &report) {
                    return Ok((Some(report), EXIT_ERROR, format!("error: {e}\n")));
                }
            }
            let text = if parsed.common.quiet { String::new() } else { summarize(&report) };
            Ok((Some(report), code, text))
        }
        Err(Error::PremiseViolated { what, witness }) => {
            let text = format!("{name}: premise-violated\n  {what}\n  witness: {witness:?}\n");
            Ok((None, EXIT_FAILS, text))
        }
        Err(e) => Ok((None, EXIT_ERROR, format!("error: {e}\n"))),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run() -> i32 {
    match execute(std::env::args_os()) {
        Ok((_, code, text)) => {
            if code == EXIT_ERROR {
                eprint!("{text}");
            } else {
                print!("{text}");
            }
            code
        }
        Err((code, text)) => {
            if code == EXIT_HOLDS {
                print!("{text}");
            } else {
                eprint!("{text}");
            }
            code
        }
    }
}
