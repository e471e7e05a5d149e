//! JSON problem and game files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expr};
use crate::game::{Game, Player};
use crate::grid::{default_points_per_dim, GridSpec};
use crate::ivf::IVFunction;
use crate::problem::{MIOProblem, Tolerances};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSpec {
    pub lower: String,
    pub upper: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSettings {
    pub points_per_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dim: usize,
    /// Display names for `u0, u1, …`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variables: Option<Vec<String>>,
    pub objectives: Vec<ObjectiveSpec>,
    #[serde(default)]
    pub constraints: Vec<String>,
    #[serde(rename = "box")]
    pub bounds: BoxSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerSpec {
    pub dim: usize,
    pub objectives: Vec<ObjectiveSpec>,
    #[serde(default)]
    pub constraints: Vec<String>,
    #[serde(rename = "box")]
    pub bounds: BoxSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSettings>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Profile length; must equal the sum of the player dimensions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub players: Vec<PlayerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
}

/// A validated problem plus the settings that travelled with it.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadedProblem {
    pub problem: MIOProblem,
    pub variables: Option<Vec<String>>,
    pub points_per_dim: Option<usize>,
    pub tolerances: Tolerances,
    pub epsilons: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadedGame {
    pub game: Game,
    pub tolerances: Tolerances,
    pub epsilons: Option<Vec<f64>>,
}

fn parse_field(text: &str, dim: usize, field: &str) -> Result<Expr> {
    parse_expr(text, dim).map_err(|e| Error::InvalidModel(format!("{field}: {e}")))
}

fn objectives(specs: &[ObjectiveSpec], dim: usize, prefix: &str) -> Result<Vec<IVFunction>> {
    specs
        .iter()
        .enumerate()
        .map(|(k, o)| {
            let lo = parse_field(&o.lower, dim, &format!("{prefix}objectives[{k}].lower"))?;
            let hi = parse_field(&o.upper, dim, &format!("{prefix}objectives[{k}].upper"))?;
            IVFunction::new(lo, hi, dim)
        })
        .collect()
}

/// Every grid point of `grid` must give `lower <= upper` for every objective.
fn check_ivf(fs: &[IVFunction], grid: &GridSpec, lift: impl Fn(&[f64]) -> Vec<f64>) -> Result<()> {
    for t in 0..grid.len() {
        let u = lift(&grid.point(t));
        for (k, f) in fs.iter().enumerate() {
            let (lo, hi) = (f.lower().eval(&u), f.upper().eval(&u));
            if !(lo <= hi) {
                return Err(Error::IvfViolation {
                    objective: k,
                    point: u,
                    lower: lo,
                    upper: hi,
                });
            }
        }
    }
    Ok(())
}

fn tolerances(t: &Option<Tolerances>) -> Result<Tolerances> {
    let t = t.clone().unwrap_or_default();
    t.validate()?;
    Ok(t)
}

impl ProblemFile {
    pub fn into_model(self) -> Result<LoadedProblem> {
        let dim = self.dim;
        if let Some(v) = &self.variables {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
        }
        let objs = objectives(&self.objectives, dim, "")?;
        let cons = self
            .constraints
            .iter()
            .enumerate()
            .map(|(j, g)| parse_field(g, dim, &format!("constraints[{j}]")))
            .collect::<Result<Vec<_>>>()?;
        let mut problem = MIOProblem::new(dim, objs, cons, self.bounds.lo, self.bounds.hi)?;
        if let Some(name) = self.name {
            problem = problem.with_name(name);
        }
        let points_per_dim = self.grid.map(|g| g.points_per_dim);
        let grid = match points_per_dim {
            Some(n) => GridSpec::new(&problem, n)?,
            None => GridSpec::default_for(&problem)?,
        };
        check_ivf(problem.objectives(), &grid, |u| u.to_vec())?;
        let tolerances = tolerances(&self.tolerances)?;
        if let Some(e) = &self.epsilons {
            problem.check_epsilon(e)?;
        }
        Ok(LoadedProblem {
            problem,
            variables: self.variables,
            points_per_dim,
            tolerances,
            epsilons: self.epsilons,
        })
    }

    pub fn from_model(m: &LoadedProblem) -> Self {
        let p = &m.problem;
        ProblemFile {
            name: p.name.clone(),
            dim: p.dim(),
            variables: m.variables.clone(),
            objectives: p
                .objectives()
                .iter()
                .map(|f| ObjectiveSpec {
                    lower: f.lower().to_string(),
                    upper: f.upper().to_string(),
                })
                .collect(),
            constraints: p.constraints().iter().map(|g| g.to_string()).collect(),
            bounds: BoxSpec {
                lo: p.box_lo().to_vec(),
                hi: p.box_hi().to_vec(),
            },
            grid: m.points_per_dim.map(|n| GridSettings { points_per_dim: n }),
            tolerances: Some(m.tolerances.clone()),
            epsilons: m.epsilons.clone(),
        }
    }
}

impl GameFile {
    pub fn into_model(self) -> Result<LoadedGame> {
        let total: usize = self.players.iter().map(|p| p.dim).sum();
        if let Some(d) = self.dim {
            if d != total {
                return Err(Error::DimensionMismatch {
                    expected: total,
                    found: d,
                });
            }
        }
        let mut players = Vec::with_capacity(self.players.len());
        for (i, p) in self.players.into_iter().enumerate() {
            let prefix = format!("players[{i}].");
            let objectives = objectives(&p.objectives, total, &prefix)?;
            let constraints = p
                .constraints
                .iter()
                .enumerate()
                .map(|(j, g)| parse_field(g, total, &format!("{prefix}constraints[{j}]")))
                .collect::<Result<Vec<_>>>()?;
            players.push(Player {
                dim: p.dim,
                objectives,
                constraints,
                box_lo: p.bounds.lo,
                box_hi: p.bounds.hi,
                points_per_dim: p.grid.map(|g| g.points_per_dim),
            });
        }
        let mut game = Game::new(players)?;
        if let Some(name) = self.name {
            game = game.with_name(name);
        }
        let lo: Vec<f64> = game.players().iter().flat_map(|p| p.box_lo.clone()).collect();
        let hi: Vec<f64> = game.players().iter().flat_map(|p| p.box_hi.clone()).collect();
        let coarse = match game.dim() {
            d if d <= 4 => default_points_per_dim(d)?,
            _ => 3,
        };
        let grid = GridSpec::with_box(lo, hi, coarse)?;
        for p in game.players() {
            check_ivf(&p.objectives, &grid, |u| u.to_vec())?;
        }
        for i in 0..game.num_players() {
            let block = game.block(i);
            let g = game.grid(i)?;
            let mid: Vec<f64> = game
                .players()
                .iter()
                .flat_map(|p| p.box_lo.iter().zip(&p.box_hi).map(|(a, b)| (a + b) / 2.0))
                .collect();
            check_ivf(game.players()[i].objectives.as_slice(), &g, |y| {
                let mut q = mid.clone();
                q[block.clone()].copy_from_slice(y);
                q
            })?;
        }
        let tolerances = tolerances(&self.tolerances)?;
        if let Some(e) = &self.epsilons {
            if e.len() != game.num_objectives() {
                return Err(Error::DimensionMismatch {
                    expected: game.num_objectives(),
                    found: e.len(),
                });
            }
        }
        Ok(LoadedGame {
            game,
            tolerances,
            epsilons: self.epsilons,
        })
    }

    pub fn from_model(m: &LoadedGame) -> Self {
        let g = &m.game;
        GameFile {
            name: g.name.clone(),
            dim: Some(g.dim()),
            players: g
                .players()
                .iter()
                .map(|p| PlayerSpec {
                    dim: p.dim,
                    objectives: p
                        .objectives
                        .iter()
                        .map(|f| ObjectiveSpec {
                            lower: f.lower().to_string(),
                            upper: f.upper().to_string(),
                        })
                        .collect(),
                    constraints: p.constraints.iter().map(|c| c.to_string()).collect(),
                    bounds: BoxSpec {
                        lo: p.box_lo.clone(),
                        hi: p.box_hi.clone(),
                    },
                    grid: p.points_per_dim.map(|n| GridSettings { points_per_dim: n }),
                })
                .collect(),
            tolerances: Some(m.tolerances.clone()),
            epsilons: m.epsilons.clone(),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn decode<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|source| Error::Schema {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<LoadedProblem> {
    let path = path.as_ref();
    decode::<ProblemFile>(path, &read(path)?)?.into_model()
}

pub fn load_game(path: impl AsRef<Path>) -> Result<LoadedGame> {
    let path = path.as_ref();
    decode::<GameFile>(path, &read(path)?)?.into_model()
}

pub fn problem_from_str(text: &str) -> Result<LoadedProblem> {
    decode::<ProblemFile>(Path::new("<input>"), text)?.into_model()
}

pub fn game_from_str(text: &str) -> Result<LoadedGame> {
    decode::<GameFile>(Path::new("<input>"), text)?.into_model()
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(value).map_err(|source| Error::Schema {
        path: path.display().to_string(),
        source,
    })?;
    std::fs::write(path, text + "\n").map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
