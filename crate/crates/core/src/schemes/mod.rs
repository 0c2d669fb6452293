//! The three commitment schemes, their honest runs and cheating senders.

pub mod orthogonalize;
pub mod pi;
pub mod qcd;
pub mod qsd;
pub mod steering;

use serde::{Deserialize, Serialize};

use crate::linalg::state::DensityMatrix;

pub use orthogonalize::{orthogonalize, Orthogonalized};
pub use pi::{pi_cheat_search, pi_commit, pi_verify, witnessable_eval, PiCommitment, PiSearch, WitnessEval};
pub use qcd::{
    qcd_advice, qcd_round, qcd_round_with_reveal, qcd_single_round_cheat, repetition_bound, repetition_cheat,
    repetition_search, test_pass_prob, RepetitionAdversary,
};
pub use qsd::{qsd_commit, qsd_optimal_cheat, qsd_verify, QsdCommitment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SchemeKind {
    Qsd,
    QcdSwap,
    Pi,
}

/// One commit/reveal execution.
#[derive(Clone, Debug, Serialize)]
pub struct CommitTranscript {
    pub scheme: SchemeKind,
    pub committed_bit: u8,
    /// What the receiver holds after the commit phase.
    pub commit_state: DensityMatrix,
    /// Everything the receiver holds after the reveal phase.
    pub reveal_state: DensityMatrix,
    /// True when the receiver accepts with certainty (probability within 1e-9 of 1).
    pub accepted: bool,
    pub accept_probability: f64,
}

/// Success probabilities of a cheating sender that reveals either bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheatReport {
    pub p_reveal_0: f64,
    pub p_reveal_1: f64,
    pub average: f64,
    pub analytic_bound: f64,
    pub strategy_note: String,
}

impl CheatReport {
    pub fn new(p0: f64, p1: f64, analytic_bound: f64, strategy_note: impl Into<String>) -> Self {
        CheatReport { p_reveal_0: p0, p_reveal_1: p1, average: 0.5 * (p0 + p1), analytic_bound, strategy_note: strategy_note.into() }
    }

    pub fn within_bound(&self, slack: f64) -> bool {
        self.average <= self.analytic_bound + slack
    }
}
