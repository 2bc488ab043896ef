use serde::{Deserialize, Serialize};

use crate::parallel::Execution;

/// Absolute tolerance used for feasibility and equality checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Maximum number of candidate supports an exhaustive search may visit.
pub const DEFAULT_WORK_LIMIT: u64 = 10_000_000;

/// Knobs shared by the exhaustive searches in [`crate::mec`] and [`crate::ikea`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub tolerance: f64,
    pub work_limit: u64,
    pub execution: Execution,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { tolerance: DEFAULT_TOLERANCE, work_limit: DEFAULT_WORK_LIMIT, execution: Execution::default() }
    }
}

impl SearchConfig {
    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn with_work_limit(mut self, work_limit: u64) -> Self {
        self.work_limit = work_limit;
        self
    }
}
