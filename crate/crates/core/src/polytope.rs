//! Convex hulls of finitely many points.

use serde::Serialize;

use crate::certificates::minnorm::distance_to_hull;

/// `co(generators)`, plus a flag saying whether it equals the set it stands
/// for or only contains it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polytope {
    dim: usize,
    generators: Vec<Vec<f64>>,
    exact: bool,
}

impl Polytope {
    /// Panics on an empty generator list or a generator of the wrong length.
    pub fn from_parts(dim: usize, generators: Vec<Vec<f64>>, exact: bool) -> Self {
        assert!(!generators.is_empty(), "polytope needs at least one generator");
        assert!(
            generators.iter().all(|g| g.len() == dim),
            "generator dimension differs from {dim}"
        );
        Polytope {
            dim,
            generators,
            exact,
        }
    }

    pub fn point(p: Vec<f64>) -> Self {
        Polytope::from_parts(p.len(), vec![p], true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// `max ⟨g, w⟩` over the generators.
    pub fn support(&self, w: &[f64]) -> f64 {
        self.generators
            .iter()
            .map(|g| dot(g, w))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Hull of the union; exact only if both operands are.
    pub fn hull_union(&self, other: &Polytope) -> Polytope {
        assert_eq!(self.dim, other.dim);
        let mut generators = self.generators.clone();
        for g in &other.generators {
            if !generators.contains(g) {
                generators.push(g.clone());
            }
        }
        Polytope::from_parts(self.dim, generators, self.exact && other.exact)
    }

    /// Generators not lying (within `tol`) in the hull of the others.
    pub fn extreme_points(&self, tol: f64) -> Vec<Vec<f64>> {
        let mut kept: Vec<Vec<f64>> = Vec::new();
        for g in &self.generators {
            if !kept.contains(g) {
                kept.push(g.clone());
            }
        }
        let mut i = 0;
        while i < kept.len() && kept.len() > 1 {
            let others: Vec<Vec<f64>> = kept
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, g)| g.clone())
                .collect();
            if distance_to_hull(&others, &kept[i], tol * 1e-2) <= tol {
                kept.remove(i);
            } else {
                i += 1;
            }
        }
        kept
    }

    /// Interval `[min, max]` of a one-dimensional polytope.
    pub fn as_interval(&self) -> Option<(f64, f64)> {
        (self.dim == 1).then(|| {
            self.generators.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), g| {
                (lo.min(g[0]), hi.max(g[0]))
            })
        })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
