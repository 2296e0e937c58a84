//! Failure-overlap analysis: partition the task universe by exactly which
//! agents failed each task.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OverlapError {
    #[error("result sets cover different task universes: {0}")]
    UniverseMismatch(String),
    #[error("no result sets given")]
    Empty,
}

/// Category key: the sorted set of agent names that failed the task.
/// The empty set is the "none failed" category.
pub type FailureSubset = BTreeSet<String>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub agents: Vec<String>,
    /// Every subset of agents (including the empty one) mapped to the tasks
    /// failed by exactly that subset. Categories partition the universe.
    pub categories: BTreeMap<FailureSubset, BTreeSet<String>>,
    pub universe: BTreeSet<String>,
}

impl OverlapReport {
    /// Human key for a category, e.g. "only react" or "none".
    pub fn category_label(subset: &FailureSubset) -> String {
        match subset.len() {
            0 => "none".to_string(),
            1 => format!("only {}", subset.iter().next().expect("one element")),
            _ => subset.iter().cloned().collect::<Vec<_>>().join("&"),
        }
    }

    /// Whether a named agent fails only where every other agent fails too,
    /// i.e. it introduces no new failure modes.
    pub fn introduces_no_new_failures(&self, agent: &str) -> bool {
        let all: FailureSubset = self.agents.iter().cloned().collect();
        self.categories
            .iter()
            .all(|(subset, tasks)| tasks.is_empty() || !subset.contains(agent) || *subset == all)
    }

    pub fn check_partition(&self) -> Result<(), String> {
        let mut seen: BTreeSet<&String> = BTreeSet::new();
        for tasks in self.categories.values() {
            for t in tasks {
                if !seen.insert(t) {
                    return Err(format!("task {t} in two categories"));
                }
            }
        }
        if seen.len() != self.universe.len() {
            return Err("categories do not cover the universe".to_string());
        }
        Ok(())
    }
}

/// Build the overlap report from per-agent failed-task sets over a common
/// universe.
pub fn failure_overlap(
    universe: &BTreeSet<String>,
    failed_by_agent: &BTreeMap<String, BTreeSet<String>>,
) -> Result<OverlapReport, OverlapError> {
    if failed_by_agent.is_empty() {
        return Err(OverlapError::Empty);
    }
    for (agent, failed) in failed_by_agent {
        if let Some(stray) = failed.difference(universe).next() {
            return Err(OverlapError::UniverseMismatch(format!(
                "agent {agent} failed unknown task {stray}"
            )));
        }
    }

    let agents: Vec<String> = failed_by_agent.keys().cloned().collect();
    let mut categories: BTreeMap<FailureSubset, BTreeSet<String>> = BTreeMap::new();
    // Materialize all 2^k subsets so empty categories are visible.
    let k = agents.len();
    for mask in 0..(1usize << k) {
        let subset: FailureSubset = agents
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, a)| a.clone())
            .collect();
        categories.insert(subset, BTreeSet::new());
    }
    for task in universe {
        let subset: FailureSubset = agents
            .iter()
            .filter(|a| failed_by_agent[*a].contains(task))
            .cloned()
            .collect();
        categories.entry(subset).or_default().insert(task.clone());
    }

    let report = OverlapReport {
        agents,
        categories,
        universe: universe.clone(),
    };
    debug_assert!(report.check_partition().is_ok());
    Ok(report)
}

/// Brute-force oracle used by tests: category of each task by direct
/// set-membership checks, no subset bookkeeping.
pub fn brute_force_category(
    task: &str,
    failed_by_agent: &BTreeMap<String, BTreeSet<String>>,
) -> FailureSubset {
    failed_by_agent
        .iter()
        .filter(|(_, failed)| failed.contains(task))
        .map(|(agent, _)| agent.clone())
        .collect()
}
