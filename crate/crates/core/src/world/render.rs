//! Deterministic observation text, following the transcript templates.

use super::entity::{render_entity_list, EntityRef};
use super::state::{Receptacle, WorldState};

/// The canonical in-band rejection string. Transcripts use this exact form.
pub const NOTHING_HAPPENS: &str = "Nothing happens.";

/// Initial scene description for the agent's current room.
///
/// Receptacles are listed class-ascending, index-descending, matching the
/// transcript openings ("a cabinet 4, a cabinet 3, ... a towelholder 1").
pub fn render_scene(state: &WorldState) -> String {
    let room = state.current_room();
    let receps: Vec<EntityRef> = state
        .receptacles
        .values()
        .filter(|r| r.room == room)
        .map(|r| r.entity.clone())
        .collect();
    format!(
        "You are in the middle of a room. Looking quickly around you, you see {}.",
        render_entity_list(&receps)
    )
}

fn contents_entities(state: &WorldState, recep: &Receptacle) -> Vec<EntityRef> {
    recep
        .contents
        .iter()
        .map(|k| state.objects[k].entity.clone())
        .collect()
}

/// What the agent sees on arriving at (or re-examining) a receptacle.
/// A closed receptacle never reveals its contents.
pub fn render_arrival(state: &WorldState, recep: &Receptacle) -> String {
    if recep.openable {
        if recep.is_open {
            format!(
                "The {} is open. In it, you see {}.",
                recep.entity,
                render_entity_list(&contents_entities(state, recep))
            )
        } else {
            format!("The {} is closed.", recep.entity)
        }
    } else {
        format!(
            "On the {}, you see {}.",
            recep.entity,
            render_entity_list(&contents_entities(state, recep))
        )
    }
}

pub fn render_open(state: &WorldState, recep: &Receptacle) -> String {
    format!(
        "You open the {}. The {} is open. In it, you see {}.",
        recep.entity,
        recep.entity,
        render_entity_list(&contents_entities(state, recep))
    )
}

pub fn render_close(recep: &Receptacle) -> String {
    format!("You close the {}.", recep.entity)
}

pub fn render_take(obj: &EntityRef, recep: &EntityRef) -> String {
    format!("You pick up the {obj} from the {recep}.")
}

pub fn render_put(obj: &EntityRef, recep: &EntityRef) -> String {
    format!("You put the {obj} in/on the {recep}.")
}

pub fn render_clean(obj: &EntityRef, recep: &EntityRef) -> String {
    format!("You clean the {obj} using the {recep}.")
}

pub fn render_heat(obj: &EntityRef, recep: &EntityRef) -> String {
    format!("You heat the {obj} using the {recep}.")
}

pub fn render_cool(obj: &EntityRef, recep: &EntityRef) -> String {
    format!("You cool the {obj} using the {recep}.")
}

pub fn render_use(obj: &EntityRef) -> String {
    format!("You turn on the {obj}.")
}

pub fn render_teleport(room: &str) -> String {
    format!("You teleport to the {room}.")
}

pub fn render_examine(obj: &super::state::ObjectInstance) -> String {
    let mut flags = Vec::new();
    if obj.hot {
        flags.push("hot");
    }
    if obj.cold {
        flags.push("cold");
    }
    if obj.clean {
        flags.push("clean");
    }
    if flags.is_empty() {
        format!("This is a normal {}.", obj.entity)
    } else {
        format!("This is a {} {}.", flags.join(", "), obj.entity)
    }
}
