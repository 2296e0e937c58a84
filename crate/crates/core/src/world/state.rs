//! Hidden environment state: rooms, receptacles, objects, the agent.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::entity::EntityRef;

/// Which rule set a world runs under.
///
/// Household worlds have a single room, a one-slot inventory and the nine
/// instruction verbs. Science worlds may span several rooms reachable by
/// teleport, carry a two-slot inventory and accept the look/examine/teleport
/// extensions. Goal evaluation is binary for household and dense for science.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvFlavor {
    Household,
    Science,
}

impl EnvFlavor {
    pub fn inventory_cap(self) -> usize {
        match self {
            EnvFlavor::Household => 1,
            EnvFlavor::Science => 2,
        }
    }

    /// Name used in the prompt catalog directory layout.
    pub fn prompt_dir(self) -> &'static str {
        match self {
            EnvFlavor::Household => "household",
            EnvFlavor::Science => "science",
        }
    }

    /// Goal-flavor label used in task serializations.
    pub fn goal_label(self) -> &'static str {
        match self {
            EnvFlavor::Household => "binary",
            EnvFlavor::Science => "dense",
        }
    }

    pub fn from_goal_label(label: &str) -> Option<Self> {
        match label {
            "binary" => Some(EnvFlavor::Household),
            "dense" => Some(EnvFlavor::Science),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Receptacle {
    pub entity: EntityRef,
    pub room: String,
    pub openable: bool,
    pub is_open: bool,
    /// Object keys, kept in canonical order (class asc, index desc).
    pub contents: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub entity: EntityRef,
    pub hot: bool,
    pub cold: bool,
    pub clean: bool,
    pub examined_under_lamp: bool,
}

impl ObjectInstance {
    pub fn new(entity: EntityRef) -> Self {
        Self {
            entity,
            hot: false,
            cold: false,
            clean: false,
            examined_under_lamp: false,
        }
    }
}

/// Where the agent stands: a receptacle, or the room's unoccupied middle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentLocation {
    RoomAnchor { room: String },
    AtReceptacle { recep: String },
}

/// Full hidden state. Stepping is a pure transformation: each episode owns
/// its state and transitions produce a new value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldState {
    pub flavor: EnvFlavor,
    pub rooms: Vec<String>,
    pub receptacles: BTreeMap<String, Receptacle>,
    pub objects: BTreeMap<String, ObjectInstance>,
    pub agent_location: AgentLocation,
    /// Held object keys; at most `flavor.inventory_cap()`.
    pub inventory: Vec<String>,
    pub step_count: u64,
}

impl WorldState {
    pub fn new(flavor: EnvFlavor, rooms: Vec<String>) -> Self {
        let anchor = rooms.first().cloned().unwrap_or_else(|| "room".to_string());
        Self {
            flavor,
            rooms,
            receptacles: BTreeMap::new(),
            objects: BTreeMap::new(),
            agent_location: AgentLocation::RoomAnchor { room: anchor },
            inventory: Vec::new(),
            step_count: 0,
        }
    }

    pub fn add_receptacle(&mut self, entity: EntityRef, room: &str, openable: bool, is_open: bool) {
        let key = entity.key();
        self.receptacles.insert(
            key,
            Receptacle {
                entity,
                room: room.to_string(),
                openable,
                is_open,
                contents: Vec::new(),
            },
        );
    }

    /// Place a fresh object inside a receptacle.
    pub fn add_object(&mut self, entity: EntityRef, recep_key: &str) {
        let key = entity.key();
        self.objects
            .insert(key.clone(), ObjectInstance::new(entity));
        let recep = self
            .receptacles
            .get_mut(recep_key)
            .unwrap_or_else(|| panic!("unknown receptacle {recep_key}"));
        recep.contents.push(key);
        Self::sort_contents(&mut recep.contents, &self.objects);
    }

    fn sort_contents(contents: &mut [String], objects: &BTreeMap<String, ObjectInstance>) {
        contents.sort_by(|a, b| {
            let ea = &objects[a].entity;
            let eb = &objects[b].entity;
            ea.render_cmp(eb)
        });
    }

    /// Canonicalize content ordering after a mutation.
    pub fn normalize(&mut self) {
        let objects = self.objects.clone();
        for recep in self.receptacles.values_mut() {
            Self::sort_contents(&mut recep.contents, &objects);
        }
    }

    pub fn current_room(&self) -> &str {
        match &self.agent_location {
            AgentLocation::RoomAnchor { room } => room,
            AgentLocation::AtReceptacle { recep } => &self.receptacles[recep].room,
        }
    }

    pub fn at_receptacle(&self) -> Option<&Receptacle> {
        match &self.agent_location {
            AgentLocation::AtReceptacle { recep } => self.receptacles.get(recep),
            AgentLocation::RoomAnchor { .. } => None,
        }
    }

    /// Receptacle containing the object, if it is not held.
    pub fn receptacle_of(&self, obj_key: &str) -> Option<&Receptacle> {
        self.receptacles
            .values()
            .find(|r| r.contents.iter().any(|c| c == obj_key))
    }

    pub fn holding(&self, obj_key: &str) -> bool {
        self.inventory.iter().any(|k| k == obj_key)
    }

    /// Whether the receptacle's contents are visible (open or not openable).
    pub fn contents_visible(&self, recep: &Receptacle) -> bool {
        !recep.openable || recep.is_open
    }

    /// Receptacles in enumeration order (class asc, index asc).
    pub fn receptacles_ordered(&self) -> Vec<&Receptacle> {
        let mut v: Vec<&Receptacle> = self.receptacles.values().collect();
        v.sort_by(|a, b| a.entity.cmp(&b.entity));
        v
    }

    /// Objects in enumeration order.
    pub fn objects_ordered(&self) -> Vec<&ObjectInstance> {
        let mut v: Vec<&ObjectInstance> = self.objects.values().collect();
        v.sort_by(|a, b| a.entity.cmp(&b.entity));
        v
    }

    /// Structural well-formedness per the state invariants. Used by tests
    /// and the generator as a cheap sanity gate.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        for recep in self.receptacles.values() {
            if !self.rooms.contains(&recep.room) {
                return Err(format!(
                    "receptacle {} in unknown room {}",
                    recep.entity, recep.room
                ));
            }
            for obj in &recep.contents {
                *seen.entry(obj.as_str()).or_insert(0) += 1;
                if !self.objects.contains_key(obj) {
                    return Err(format!(
                        "receptacle {} holds unknown object {obj}",
                        recep.entity
                    ));
                }
            }
        }
        for obj in &self.inventory {
            *seen.entry(obj.as_str()).or_insert(0) += 1;
        }
        for key in self.objects.keys() {
            match seen.get(key.as_str()) {
                Some(1) => {}
                Some(n) => return Err(format!("object {key} appears in {n} places")),
                None => return Err(format!("object {key} is nowhere")),
            }
        }
        if self.inventory.len() > self.flavor.inventory_cap() {
            return Err("inventory over capacity".to_string());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objects_live_in_exactly_one_place() {
        let mut state = WorldState::new(EnvFlavor::Household, vec!["bathroom".into()]);
        state.add_receptacle(EntityRef::new("cabinet", 1), "bathroom", true, false);
        state.add_object(EntityRef::new("soapbar", 1), "cabinet 1");
        state.check_invariants().unwrap();

        // Duplicating the object into a second receptacle must trip the check.
        state.add_receptacle(EntityRef::new("countertop", 1), "bathroom", false, true);
        state
            .receptacles
            .get_mut("countertop 1")
            .unwrap()
            .contents
            .push("soapbar 1".into());
        assert!(state.check_invariants().is_err());
    }
}
