//! Python bindings: the text world, task generation, the oracle solver,
//! prompt catalog access, output parsing and the entropy kernel.
//!
//! Build with `cargo build --release -p reflact-py`; the smoke test under
//! `python/` copies the produced cdylib next to itself and imports it.

// The #[pyfunction] wrappers expand to PyErr conversions clippy flags.
#![allow(clippy::useless_conversion)]

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use reflact_core::analytics;
use reflact_core::backbones::{self, Backbone, BackboneKind, CatalogFlavor};
use reflact_core::gateway::{
    ActionDistribution, BackendKind, DistributionEntry, ScoringMethod, ScriptedPolicy,
};
use reflact_core::runner::{
    initial_observation, run_episode, suite_config_hash, trajectory_to_jsonl, BackendFactory,
    RunConfig,
};
use reflact_core::taskgen::{self, TaskSpec};
use reflact_core::world::goal::{evaluate_goal, ProgressReport, TaskType};
use reflact_core::world::state::{EnvFlavor, WorldState};
use reflact_core::world::{parse_action as parse_action_rs, step, step_rejected, valid_actions};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn flavor_from(label: &str) -> PyResult<EnvFlavor> {
    EnvFlavor::from_goal_label(label)
        .or(match label {
            "household" => Some(EnvFlavor::Household),
            "science" => Some(EnvFlavor::Science),
            _ => None,
        })
        .ok_or_else(|| value_err(format!("unknown flavor {label:?}; use binary or dense")))
}

fn task_type_from(label: &str) -> PyResult<TaskType> {
    TaskType::from_label(label).ok_or_else(|| value_err(format!("unknown task type {label:?}")))
}

fn kind_from(label: &str) -> PyResult<BackboneKind> {
    BackboneKind::from_label(label)
        .ok_or_else(|| value_err(format!("unknown backbone kind {label:?}")))
}

/// Generate a task and return its JSON serialization.
#[pyfunction]
#[pyo3(signature = (seed, task_type, flavor = "binary"))]
fn generate_task(seed: u64, task_type: &str, flavor: &str) -> PyResult<String> {
    let task = taskgen::generate(seed, task_type_from(task_type)?, flavor_from(flavor)?)
        .map_err(value_err)?;
    Ok(task.to_json())
}

/// The oracle solver's action texts for a task JSON.
#[pyfunction]
fn oracle_plan(task_json: &str) -> PyResult<Vec<String>> {
    let task = TaskSpec::from_json(task_json).map_err(value_err)?;
    let plan = taskgen::oracle_solve(&task).map_err(value_err)?;
    Ok(plan.action_texts())
}

/// Parse one action line; returns the canonical surface form.
#[pyfunction]
fn parse_action(text: &str) -> PyResult<String> {
    parse_action_rs(text)
        .map(|cmd| cmd.render())
        .map_err(value_err)
}

/// Parse one model response for a backbone; returns
/// (reasoning_text | None, action_text, lenient).
#[pyfunction]
fn parse_output(kind: &str, raw: &str) -> PyResult<(Option<String>, String, bool)> {
    let out = backbones::parse_output(kind_from(kind)?, raw).map_err(value_err)?;
    Ok((out.reasoning_text, out.action_text, out.lenient))
}

/// The verbatim instruction block for (kind, flavor).
#[pyfunction]
fn system_prompt(kind: &str, flavor: &str) -> PyResult<String> {
    let catalog_flavor = match flavor {
        "jericho" => CatalogFlavor::Jericho,
        other => CatalogFlavor::from(flavor_from(other)?),
    };
    backbones::system_prompt(&Backbone::new(kind_from(kind)?), catalog_flavor).map_err(value_err)
}

/// The one-shot example transcript rendered for a backbone.
#[pyfunction]
fn icl_example(kind: &str, flavor: &str, task_type: &str) -> PyResult<String> {
    let catalog_flavor = match flavor {
        "jericho" => CatalogFlavor::Jericho,
        other => CatalogFlavor::from(flavor_from(other)?),
    };
    backbones::render_icl(kind_from(kind)?, catalog_flavor, task_type_from(task_type)?)
        .map_err(value_err)
}

/// Shannon entropy in nats of a probability vector.
#[pyfunction]
fn entropy(probs: Vec<f64>) -> PyResult<f64> {
    let dist = ActionDistribution {
        entries: probs
            .iter()
            .enumerate()
            .map(|(i, p)| DistributionEntry {
                action_text: format!("a{i}"),
                probability: *p,
            })
            .collect(),
        method: ScoringMethod::Scored,
    };
    analytics::entropy(&dist).map_err(value_err)
}

/// Softmax over summed sequence log-probabilities.
#[pyfunction]
fn softmax_from_logprobs(logprobs: Vec<f64>) -> Vec<f64> {
    reflact_core::gateway::softmax_from_logprobs(&logprobs)
}

/// Run one scripted episode and return the trajectory JSONL.
#[pyfunction]
#[pyo3(signature = (task_json, kind = "reflact", policy = "oracle", step_budget = 40))]
fn run_scripted_episode(
    task_json: &str,
    kind: &str,
    policy: &str,
    step_budget: u32,
) -> PyResult<String> {
    let task = TaskSpec::from_json(task_json).map_err(value_err)?;
    let policy = ScriptedPolicy::from_label(policy)
        .ok_or_else(|| value_err(format!("unknown scripted policy {policy:?}")))?;
    let factory = BackendFactory::new(BackendKind::Scripted { policy });
    let cfg = RunConfig {
        step_budget,
        ..RunConfig::default()
    };
    let backbone = Backbone::new(kind_from(kind)?);
    let mut backend = factory.build(&task, backbone.kind, 0).map_err(value_err)?;
    let traj = run_episode(&task, &backbone, backend.as_mut(), &cfg, &[]).map_err(value_err)?;
    let hash = suite_config_hash(&cfg, &factory.descriptor());
    Ok(trajectory_to_jsonl(&task, &cfg, &hash, &traj))
}

/// Generate-solve-replay a seed range; returns (checked, failure_strings).
#[pyfunction]
#[pyo3(signature = (start, end, flavor = "binary"))]
fn verify_seeds(start: u64, end: u64, flavor: &str) -> PyResult<(usize, Vec<String>)> {
    let report = taskgen::verify_solvable(start..end, &TaskType::ALL, flavor_from(flavor)?);
    let failures = report.failures.iter().map(|f| f.reason.clone()).collect();
    Ok((report.checked, failures))
}

/// One interactive episode over a generated task.
#[pyclass]
struct TextWorld {
    task: TaskSpec,
    state: WorldState,
    progress: ProgressReport,
}

#[pymethods]
impl TextWorld {
    #[new]
    #[pyo3(signature = (seed, task_type, flavor = "binary"))]
    fn new(seed: u64, task_type: &str, flavor: &str) -> PyResult<Self> {
        let task = taskgen::generate(seed, task_type_from(task_type)?, flavor_from(flavor)?)
            .map_err(value_err)?;
        let state = task.initial_state.clone();
        Ok(Self {
            task,
            state,
            progress: ProgressReport::zero(),
        })
    }

    /// Build from a task JSON produced by `generate_task`.
    #[staticmethod]
    fn from_task_json(task_json: &str) -> PyResult<Self> {
        let task = TaskSpec::from_json(task_json).map_err(value_err)?;
        let state = task.initial_state.clone();
        Ok(Self {
            task,
            state,
            progress: ProgressReport::zero(),
        })
    }

    #[getter]
    fn task_id(&self) -> String {
        self.task.task_id.clone()
    }

    #[getter]
    fn instruction(&self) -> String {
        self.task.instruction_text.clone()
    }

    /// Scene description plus the task line; also resets the episode.
    fn reset(&mut self) -> String {
        self.state = self.task.initial_state.clone();
        self.progress = ProgressReport::zero();
        initial_observation(&self.task)
    }

    /// Apply one action line. Unparseable or rejected actions fail in-band.
    fn step<'py>(&mut self, py: Python<'py>, action: &str) -> PyResult<Bound<'py, PyDict>> {
        let state = std::mem::replace(
            &mut self.state,
            WorldState::new(self.task.env_flavor(), vec![]),
        );
        let (next, obs) = match parse_action_rs(action) {
            Ok(cmd) => step(state, &cmd),
            Err(_) => step_rejected(state),
        };
        self.state = next;
        self.progress = evaluate_goal(&self.state, &self.task.goal, &self.progress);
        let out = PyDict::new_bound(py);
        out.set_item("observation", &obs.text)?;
        out.set_item("nothing_happened", obs.nothing_happened)?;
        out.set_item("progress", self.progress.progress)?;
        out.set_item("success", self.progress.success)?;
        out.set_item("done", self.progress.success)?;
        Ok(out)
    }

    fn valid_actions(&self) -> Vec<String> {
        valid_actions(&self.state)
            .iter()
            .map(|c| c.render())
            .collect()
    }

    fn render_scene(&self) -> String {
        reflact_core::world::render_scene(&self.state)
    }
}

#[pymodule]
fn reflact_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<TextWorld>()?;
    m.add_function(wrap_pyfunction!(generate_task, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_plan, m)?)?;
    m.add_function(wrap_pyfunction!(parse_action, m)?)?;
    m.add_function(wrap_pyfunction!(parse_output, m)?)?;
    m.add_function(wrap_pyfunction!(system_prompt, m)?)?;
    m.add_function(wrap_pyfunction!(icl_example, m)?)?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(softmax_from_logprobs, m)?)?;
    m.add_function(wrap_pyfunction!(run_scripted_episode, m)?)?;
    m.add_function(wrap_pyfunction!(verify_seeds, m)?)?;
    Ok(())
}
