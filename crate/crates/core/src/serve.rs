//! Environment-as-a-service: newline-delimited JSON requests against one
//! stateful episode, served over stdio or TCP by the CLI.

use serde::{Deserialize, Serialize};

use crate::runner::episode::initial_observation;
use crate::taskgen::generate::{generate, TaskSpec};
use crate::world::goal::{evaluate_goal, ProgressReport, TaskType};
use crate::world::grammar::parse_action;
use crate::world::state::{EnvFlavor, WorldState};
use crate::world::step::{step, step_rejected};

#[derive(Debug, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Request {
    Reset {
        seed: u64,
        task_type: String,
        #[serde(default)]
        flavor: Option<String>,
    },
    Step {
        action: String,
    },
}

#[derive(Debug, Serialize, PartialEq)]
pub struct Response {
    pub observation: String,
    pub progress: f64,
    pub success: bool,
    pub done: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub task_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Response {
    fn error(message: impl Into<String>) -> Self {
        Self {
            observation: String::new(),
            progress: 0.0,
            success: false,
            done: false,
            task_id: None,
            error: Some(message.into()),
        }
    }
}

struct ActiveEpisode {
    task: TaskSpec,
    state: WorldState,
    progress: ProgressReport,
}

/// One client's episode state. Each session owns its world, so many
/// sessions can run concurrently.
#[derive(Default)]
pub struct EnvSession {
    episode: Option<ActiveEpisode>,
}

impl EnvSession {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn handle(&mut self, request: Request) -> Response {
        match request {
            Request::Reset {
                seed,
                task_type,
                flavor,
            } => {
                let Some(task_type) = TaskType::from_label(&task_type) else {
                    return Response::error(format!("unknown task_type {task_type:?}"));
                };
                let flavor = match flavor.as_deref() {
                    None | Some("binary") => EnvFlavor::Household,
                    Some("dense") => EnvFlavor::Science,
                    Some(other) => return Response::error(format!("unknown flavor {other:?}")),
                };
                let task = match generate(seed, task_type, flavor) {
                    Ok(t) => t,
                    Err(e) => return Response::error(e.to_string()),
                };
                let observation = initial_observation(&task);
                let task_id = task.task_id.clone();
                self.episode = Some(ActiveEpisode {
                    state: task.initial_state.clone(),
                    progress: ProgressReport::zero(),
                    task,
                });
                Response {
                    observation,
                    progress: 0.0,
                    success: false,
                    done: false,
                    task_id: Some(task_id),
                    error: None,
                }
            }
            Request::Step { action } => {
                let Some(episode) = self.episode.as_mut() else {
                    return Response::error("no active episode; send a reset first");
                };
                let state = std::mem::replace(
                    &mut episode.state,
                    WorldState::new(episode.task.env_flavor(), vec![]),
                );
                let (next, obs) = match parse_action(&action) {
                    Ok(cmd) => step(state, &cmd),
                    Err(_) => step_rejected(state),
                };
                episode.state = next;
                episode.progress =
                    evaluate_goal(&episode.state, &episode.task.goal, &episode.progress);
                Response {
                    observation: obs.text,
                    progress: episode.progress.progress,
                    success: episode.progress.success,
                    done: episode.progress.success,
                    task_id: None,
                    error: None,
                }
            }
        }
    }

    /// NDJSON entry point: one request line in, one response line out.
    pub fn handle_line(&mut self, line: &str) -> String {
        let response = match serde_json::from_str::<Request>(line) {
            Ok(req) => self.handle(req),
            Err(e) => Response::error(format!("bad request: {e}")),
        };
        serde_json::to_string(&response).expect("response serializes")
    }
}
