//! The transition function. Every failing precondition leaves the state
//! unchanged (except the step counter) and yields the canonical rejection
//! observation, so hallucinated actions fail in-band.

use serde::{Deserialize, Serialize};

use super::entity::EntityRef;
use super::grammar::ActionCommand;
use super::render;
use super::state::{AgentLocation, EnvFlavor, WorldState};

/// One rendered environment response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub text: String,
    pub nothing_happened: bool,
    pub step_index: u64,
}

impl Observation {
    fn ok(text: String, step_index: u64) -> Self {
        debug_assert_ne!(text, render::NOTHING_HAPPENS);
        Self {
            text,
            nothing_happened: false,
            step_index,
        }
    }

    fn rejected(step_index: u64) -> Self {
        Self {
            text: render::NOTHING_HAPPENS.to_string(),
            nothing_happened: true,
            step_index,
        }
    }
}

/// Object classes that act as devices for the condition verbs.
pub const CLEANING_DEVICE: &str = "sinkbasin";
pub const HEATING_DEVICE: &str = "microwave";
pub const COOLING_DEVICE: &str = "fridge";
pub const LAMP_CLASS: &str = "desklamp";

/// Apply a command. Pure: the input state is consumed and a new state is
/// returned, with `step_count` bumped exactly once whether or not the
/// action succeeded.
pub fn step(state: WorldState, cmd: &ActionCommand) -> (WorldState, Observation) {
    let mut next = state;
    next.step_count += 1;
    let idx = next.step_count;

    match try_apply(&mut next, cmd) {
        Some(text) => {
            let obs = Observation::ok(text, idx);
            (next, obs)
        }
        None => (next, Observation::rejected(idx)),
    }
}

/// Bump the step counter without touching the world; used when agent output
/// never reached the grammar (format failures, unknown verbs).
pub fn step_rejected(state: WorldState) -> (WorldState, Observation) {
    let mut next = state;
    next.step_count += 1;
    let idx = next.step_count;
    (next, Observation::rejected(idx))
}

/// Returns the success observation, or None when a precondition fails.
/// Mutations only happen on the success path.
fn try_apply(state: &mut WorldState, cmd: &ActionCommand) -> Option<String> {
    match cmd {
        ActionCommand::GoTo { recep } => {
            let key = recep.key();
            let target = state.receptacles.get(&key)?;
            if target.room != state.current_room() {
                return None;
            }
            let text = render::render_arrival(state, target);
            state.agent_location = AgentLocation::AtReceptacle { recep: key };
            Some(text)
        }
        ActionCommand::Take { obj, recep } => {
            let obj_key = obj.key();
            let here = at(state, recep)?;
            if !state.contents_visible(here) || !here.contents.contains(&obj_key) {
                return None;
            }
            if state.inventory.len() >= state.flavor.inventory_cap() {
                return None;
            }
            let recep_key = recep.key();
            let r = state
                .receptacles
                .get_mut(&recep_key)
                .expect("checked above");
            r.contents.retain(|k| k != &obj_key);
            state.inventory.push(obj_key);
            Some(render::render_take(obj, recep))
        }
        ActionCommand::Put { obj, recep } => {
            let obj_key = obj.key();
            if !state.holding(&obj_key) {
                return None;
            }
            let here = at(state, recep)?;
            if !state.contents_visible(here) {
                return None;
            }
            let recep_key = recep.key();
            state.inventory.retain(|k| k != &obj_key);
            state
                .receptacles
                .get_mut(&recep_key)
                .expect("checked above")
                .contents
                .push(obj_key);
            state.normalize();
            Some(render::render_put(obj, recep))
        }
        ActionCommand::Open { recep } => {
            let here = at(state, recep)?;
            if !here.openable || here.is_open {
                return None;
            }
            let recep_key = recep.key();
            state
                .receptacles
                .get_mut(&recep_key)
                .expect("checked above")
                .is_open = true;
            let opened = &state.receptacles[&recep_key];
            Some(render::render_open(state, opened))
        }
        ActionCommand::Close { recep } => {
            let here = at(state, recep)?;
            if !here.openable || !here.is_open {
                return None;
            }
            let recep_key = recep.key();
            state
                .receptacles
                .get_mut(&recep_key)
                .expect("checked above")
                .is_open = false;
            Some(render::render_close(&state.receptacles[&recep_key]))
        }
        ActionCommand::Use { obj } => {
            // Only the desklamp has a use; it must sit where the agent stands.
            if obj.class != LAMP_CLASS {
                return None;
            }
            let obj_key = obj.key();
            let here = state.at_receptacle()?;
            if !here.contents.contains(&obj_key) {
                return None;
            }
            for held in state.inventory.clone() {
                state
                    .objects
                    .get_mut(&held)
                    .expect("held object exists")
                    .examined_under_lamp = true;
            }
            Some(render::render_use(obj))
        }
        ActionCommand::Clean { obj, recep } => {
            condition_action(state, obj, recep, CLEANING_DEVICE, |o| o.clean = true)
                .then(|| render::render_clean(obj, recep))
        }
        ActionCommand::Heat { obj, recep } => {
            // The most recent thermal flag wins; heating clears "cold".
            condition_action(state, obj, recep, HEATING_DEVICE, |o| {
                o.hot = true;
                o.cold = false;
            })
            .then(|| render::render_heat(obj, recep))
        }
        ActionCommand::Cool { obj, recep } => {
            condition_action(state, obj, recep, COOLING_DEVICE, |o| {
                o.cold = true;
                o.hot = false;
            })
            .then(|| render::render_cool(obj, recep))
        }
        ActionCommand::Examine { obj } => {
            if state.flavor != EnvFlavor::Science {
                return None;
            }
            let obj_key = obj.key();
            let visible_here = state
                .at_receptacle()
                .map(|r| state.contents_visible(r) && r.contents.contains(&obj_key))
                .unwrap_or(false);
            if !visible_here && !state.holding(&obj_key) {
                return None;
            }
            Some(render::render_examine(&state.objects[&obj_key]))
        }
        ActionCommand::Look => {
            if state.flavor != EnvFlavor::Science {
                return None;
            }
            Some(match state.at_receptacle() {
                Some(r) => render::render_arrival(state, r),
                None => render::render_scene(state),
            })
        }
        ActionCommand::Teleport { room } => {
            if state.flavor != EnvFlavor::Science || !state.rooms.contains(room) {
                return None;
            }
            state.agent_location = AgentLocation::RoomAnchor { room: room.clone() };
            Some(render::render_teleport(room))
        }
    }
}

/// The receptacle, provided the agent is standing at it.
fn at<'a>(state: &'a WorldState, recep: &EntityRef) -> Option<&'a super::state::Receptacle> {
    let here = state.at_receptacle()?;
    (here.entity == *recep).then_some(here)
}

/// Shared preconditions for clean/heat/cool: holding the object, standing at
/// a receptacle of the device class named in the command. Devices work
/// without being opened.
fn condition_action(
    state: &mut WorldState,
    obj: &EntityRef,
    recep: &EntityRef,
    device_class: &str,
    apply: impl FnOnce(&mut super::state::ObjectInstance),
) -> bool {
    let obj_key = obj.key();
    if !state.holding(&obj_key) || recep.class != device_class {
        return false;
    }
    match state.at_receptacle() {
        Some(here) if here.entity == *recep => {}
        _ => return false,
    }
    apply(state.objects.get_mut(&obj_key).expect("held object exists"));
    true
}
