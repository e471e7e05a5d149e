//! KKT-type certificates: constraint qualification, exact and approximate
//! multiplier conditions, generalized convexity and sufficiency.

pub mod convexity;
pub mod kkt;
pub mod minnorm;

use serde::Serialize;

pub use convexity::{convexity_violation, gen_convexity_check, sufficiency_thm_4_3, ConvexityReport, SufficiencyReport, SufficiencyVerdict};
pub use kkt::{
    approx_kkt_sequence, bcq_check, check_multipliers, eps_kkt_thm_4_1, kkt_check, modified_eps_kkt, BcqReport,
    CertificateReport, EpsKktOutcome, ModifiedKktOutcome, Radius, SequenceEntry, SequenceReport,
};
pub use minnorm::{min_norm_over_multipliers, MultiplierSolution, SolverOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    /// `Fails` computed on over-approximated polytopes refutes nothing.
    pub(crate) fn soften(self, exact: bool) -> Self {
        if self == Verdict::Fails && !exact {
            Verdict::Inconclusive
        } else {
            self
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}
