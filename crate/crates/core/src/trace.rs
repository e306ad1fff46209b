//! Per-iteration records shared by the iterative solvers.

/// Why an iterative run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// The stopping rule (angle or step change below tolerance) fired.
    Converged,
    /// The iteration budget was exhausted.
    MaxIterations,
    /// An iterate degenerated to the zero vector.
    DegenerateIterate,
    /// The risk exceeded the divergence guard.
    Diverged,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::MaxIterations => "max_iterations",
            StopReason::DegenerateIterate => "degenerate_iterate",
            StopReason::Diverged => "diverged",
        }
    }
}

/// History of an iterative recovery run. `iterates[0]` is the starting
/// point; `errors` holds sign-resolved distances to the planted vector and
/// is either empty (error tracking disabled) or aligned with `iterates`;
/// `risks` is always aligned with `iterates`.
#[derive(Clone, Debug)]
pub struct RecoveryTrace {
    pub iterates: Vec<Vec<f64>>,
    pub errors: Vec<f64>,
    pub risks: Vec<f64>,
    pub converged: bool,
    pub stop_reason: StopReason,
}

impl RecoveryTrace {
    pub(crate) fn new(track_errors: bool) -> Self {
        RecoveryTrace {
            iterates: Vec::new(),
            errors: if track_errors { Vec::new() } else { vec![] },
            risks: Vec::new(),
            converged: false,
            stop_reason: StopReason::MaxIterations,
        }
    }

    pub(crate) fn push(&mut self, iterate: Vec<f64>, error: Option<f64>, risk: f64) {
        self.iterates.push(iterate);
        if let Some(e) = error {
            self.errors.push(e);
        }
        self.risks.push(risk);
    }

    /// Last stored iterate.
    pub fn final_iterate(&self) -> &[f64] {
        self.iterates.last().expect("trace never empty")
    }

    /// Last sign-resolved error, if tracked.
    pub fn final_error(&self) -> Option<f64> {
        self.errors.last().copied()
    }

    /// Number of iterations performed (excludes the starting point).
    pub fn iterations(&self) -> usize {
        self.iterates.len().saturating_sub(1)
    }
}
