//! Deterministic text-world engine: hidden state, the action grammar, the
//! transition function, observation rendering and goal evaluation.

pub mod entity;
pub mod goal;
pub mod grammar;
pub mod render;
pub mod state;
pub mod step;
pub mod valid;

pub use entity::EntityRef;
pub use goal::{
    evaluate_goal, Checkpoint, Condition, GoalFlavor, GoalSpec, Predicate, ProgressReport,
    TaskType, DENSE_SUCCESS_THRESHOLD,
};
pub use grammar::{parse_action, ActionCommand, ParseError};
pub use render::{render_scene, NOTHING_HAPPENS};
pub use state::{AgentLocation, EnvFlavor, ObjectInstance, Receptacle, WorldState};
pub use step::{step, step_rejected, Observation};
pub use valid::{brute_force_valid_actions, valid_actions};
