//! Per-episode records and the shared budget accounting.

use serde::{Deserialize, Serialize};

use crate::env::RoundOutcome;

/// One credited round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub outcome: RoundOutcome,
    /// Inclusion probabilities used to draw the arms (randomised policies only).
    pub probabilities: Option<Vec<f64>>,
    /// Budget left after paying for this round.
    pub remaining_budget: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    /// Credited rounds `1..stopping_time`.
    pub rounds: Vec<RoundRecord>,
    /// Sum of rewards over the credited rounds.
    pub gain: f64,
    /// Round at which the episode stopped; that round is neither paid nor
    /// credited.
    pub stopping_time: usize,
    pub budget: f64,
    pub budget_spent: f64,
    /// The round that ended the episode, if it ended on the budget.
    pub terminal: Option<RoundOutcome>,
    /// First round (1-based) of each epoch, for restarting policies.
    pub epoch_starts: Vec<usize>,
}

impl EpisodeTrace {
    pub fn remaining_budget(&self) -> f64 {
        self.budget - self.budget_spent
    }

    /// Number of epochs entered.
    pub fn epochs(&self) -> usize {
        self.epoch_starts.len()
    }
}

/// Remaining-budget bookkeeping shared by every policy and oracle.
///
/// A round whose total cost exceeds what is left ends the episode: it is
/// neither charged nor credited.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetLedger {
    total: f64,
    remaining: f64,
    gain: f64,
}

impl BudgetLedger {
    pub fn new(total: f64) -> Self {
        Self {
            total,
            remaining: total,
            gain: 0.0,
        }
    }

    /// Pays for and credits the round if affordable; `false` means the
    /// episode is over.
    pub fn settle(&mut self, cost: f64, reward: f64) -> bool {
        if cost > self.remaining {
            return false;
        }
        self.remaining -= cost;
        self.gain += reward;
        true
    }

    pub fn remaining(&self) -> f64 {
        self.remaining
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn spent(&self) -> f64 {
        self.total - self.remaining
    }

    pub fn total(&self) -> f64 {
        self.total
    }
}

/// Builder used by the episode loops.
#[derive(Debug, Clone)]
pub(crate) struct TraceRecorder {
    ledger: BudgetLedger,
    rounds: Vec<RoundRecord>,
    epoch_starts: Vec<usize>,
}

impl TraceRecorder {
    pub fn new(budget: f64) -> Self {
        Self {
            ledger: BudgetLedger::new(budget),
            rounds: Vec::new(),
            epoch_starts: Vec::new(),
        }
    }

    /// Current round index (1-based) of the next round to be played.
    pub fn next_round(&self) -> usize {
        self.rounds.len() + 1
    }

    pub fn remaining(&self) -> f64 {
        self.ledger.remaining()
    }

    pub fn mark_epoch(&mut self) {
        let t = self.next_round();
        self.epoch_starts.push(t);
    }

    /// Settles a round. Returns `false` (and records nothing) on termination.
    pub fn settle(&mut self, outcome: &RoundOutcome, probabilities: Option<&[f64]>) -> bool {
        if !self.ledger.settle(outcome.cost_sum(), outcome.reward_sum()) {
            return false;
        }
        self.rounds.push(RoundRecord {
            outcome: outcome.clone(),
            probabilities: probabilities.map(<[f64]>::to_vec),
            remaining_budget: self.ledger.remaining(),
        });
        true
    }

    /// Credits a round without touching the budget (fixed-horizon play).
    pub fn credit(&mut self, outcome: &RoundOutcome, probabilities: Option<&[f64]>) {
        self.ledger.gain += outcome.reward_sum();
        self.rounds.push(RoundRecord {
            outcome: outcome.clone(),
            probabilities: probabilities.map(<[f64]>::to_vec),
            remaining_budget: self.ledger.remaining(),
        });
    }

    pub fn finish(self, terminal: Option<RoundOutcome>) -> EpisodeTrace {
        let stopping_time = self.rounds.len() + 1;
        EpisodeTrace {
            gain: self.ledger.gain(),
            budget: self.ledger.total(),
            budget_spent: self.ledger.spent(),
            stopping_time,
            rounds: self.rounds,
            terminal,
            epoch_starts: self.epoch_starts,
        }
    }
}
