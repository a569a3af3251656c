use crate::problem::DecisionVector;

/// Diagnostics for iterate `x_t`, recorded at iteration `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration index.
    pub iter: usize,
    /// Oracle calls consumed through the end of iteration `t`.
    pub oracle_calls: u64,
    /// Exact `F(x_t)`.
    pub objective: f64,
    /// `||G_K(x_t, grad f(x_t), eta_t)||^2` in the run's geometry; NaN when
    /// the problem has no exact gradient.
    pub stationarity_sq: f64,
    pub eta: f64,
    /// Zero unless wall-clock recording was requested.
    pub wallclock_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    /// The run stopped at iteration `at`; records end at `at - 1`.
    Diverged { at: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub status: RunStatus,
    /// Uniformly drawn output index `R` (1-based).
    pub returned_index: usize,
    pub x_returned: DecisionVector,
    /// Iterate with the lowest recorded objective.
    pub x_best: DecisionVector,
    pub best_objective: f64,
    /// Last iterate produced (`x_{T+1}` for completed runs).
    pub x_final: DecisionVector,
    pub final_objective: f64,
    /// Stationarity of `x_final` with the stepsize the next iteration would
    /// use; NaN for diverged runs or without an exact gradient.
    pub final_stationarity_sq: f64,
    pub oracle_calls: u64,
}

impl RunTrace {
    pub fn is_diverged(&self) -> bool {
        matches!(self.status, RunStatus::Diverged { .. })
    }

    pub fn last_stationarity(&self) -> Option<f64> {
        self.records.last().map(|r| r.stationarity_sq)
    }
}
