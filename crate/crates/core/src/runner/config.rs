//! Episode-run configuration.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Hard cap on steps per episode; generous headroom over typical
    /// successful trajectories.
    pub step_budget: u32,
    /// Corrective re-prompts allowed per malformed turn before the turn
    /// counts as an in-band invalid action.
    pub retry_on_format_error: u32,
    pub parallel_episodes: u32,
    /// Discount for returns; 1.0 keeps reported rewards undiscounted.
    pub gamma: f64,
    /// Score the valid-action candidate set before every action turn.
    pub record_distributions: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            step_budget: 40,
            retry_on_format_error: 1,
            parallel_episodes: 1,
            gamma: 1.0,
            record_distributions: false,
        }
    }
}

impl RunConfig {
    pub fn check(&self) -> Result<(), String> {
        if self.step_budget < 1 {
            return Err("step_budget must be at least 1".to_string());
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err("gamma must lie in [0, 1]".to_string());
        }
        Ok(())
    }
}
