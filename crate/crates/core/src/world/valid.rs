//! Enumeration of the commands the current state accepts. This is the
//! candidate set used for action-distribution scoring.

use super::entity::EntityRef;
use super::grammar::ActionCommand;
use super::state::{EnvFlavor, WorldState};
use super::step::{step, CLEANING_DEVICE, COOLING_DEVICE, HEATING_DEVICE, LAMP_CLASS};

/// Every command the transition function would accept from this state, in
/// deterministic order: verb rank first, then argument entities ascending.
///
/// Go-to targets in the agent's room are always included (going to the
/// receptacle you stand at re-renders the arrival view rather than failing,
/// so the set equals the brute-force step filter exactly).
pub fn valid_actions(state: &WorldState) -> Vec<ActionCommand> {
    let mut out = Vec::new();
    let room = state.current_room().to_string();
    let here = state.at_receptacle();

    for recep in state.receptacles_ordered() {
        if recep.room == room {
            out.push(ActionCommand::GoTo {
                recep: recep.entity.clone(),
            });
        }
    }

    if let Some(here) = here {
        let visible = state.contents_visible(here);
        if visible {
            // Take: a free slot and a visible object.
            if state.inventory.len() < state.flavor.inventory_cap() {
                for key in &here.contents {
                    out.push(ActionCommand::Take {
                        obj: state.objects[key].entity.clone(),
                        recep: here.entity.clone(),
                    });
                }
            }
            // Put: anything held can go down here.
            for key in &state.inventory {
                out.push(ActionCommand::Put {
                    obj: state.objects[key].entity.clone(),
                    recep: here.entity.clone(),
                });
            }
        }
        if here.openable && !here.is_open {
            out.push(ActionCommand::Open {
                recep: here.entity.clone(),
            });
        }
        if here.openable && here.is_open {
            out.push(ActionCommand::Close {
                recep: here.entity.clone(),
            });
        }
        if visible {
            for key in &here.contents {
                let obj = &state.objects[key];
                if obj.entity.class == LAMP_CLASS {
                    out.push(ActionCommand::Use {
                        obj: obj.entity.clone(),
                    });
                }
            }
        }
        // Device verbs need the matching device class underfoot.
        for key in &state.inventory {
            let obj = state.objects[key].entity.clone();
            match here.entity.class.as_str() {
                CLEANING_DEVICE => out.push(ActionCommand::Clean {
                    obj,
                    recep: here.entity.clone(),
                }),
                HEATING_DEVICE => out.push(ActionCommand::Heat {
                    obj,
                    recep: here.entity.clone(),
                }),
                COOLING_DEVICE => out.push(ActionCommand::Cool {
                    obj,
                    recep: here.entity.clone(),
                }),
                _ => {}
            }
        }
    }

    if state.flavor == EnvFlavor::Science {
        if let Some(here) = here {
            if state.contents_visible(here) {
                for key in &here.contents {
                    out.push(ActionCommand::Examine {
                        obj: state.objects[key].entity.clone(),
                    });
                }
            }
        }
        for key in &state.inventory {
            out.push(ActionCommand::Examine {
                obj: state.objects[key].entity.clone(),
            });
        }
        out.push(ActionCommand::Look);
        for r in &state.rooms {
            out.push(ActionCommand::Teleport { room: r.clone() });
        }
    }

    out.sort_by_key(|c| c.sort_key());
    out.dedup();
    out
}

/// Test oracle: instantiate the whole grammar over the entities present and
/// keep the commands `step` accepts. Quadratic and only meant for small
/// worlds.
pub fn brute_force_valid_actions(state: &WorldState) -> Vec<ActionCommand> {
    let receps: Vec<EntityRef> = state
        .receptacles_ordered()
        .iter()
        .map(|r| r.entity.clone())
        .collect();
    let objects: Vec<EntityRef> = state
        .objects_ordered()
        .iter()
        .map(|o| o.entity.clone())
        .collect();

    let mut candidates = Vec::new();
    for r in &receps {
        candidates.push(ActionCommand::GoTo { recep: r.clone() });
        candidates.push(ActionCommand::Open { recep: r.clone() });
        candidates.push(ActionCommand::Close { recep: r.clone() });
        for o in &objects {
            candidates.push(ActionCommand::Take {
                obj: o.clone(),
                recep: r.clone(),
            });
            candidates.push(ActionCommand::Put {
                obj: o.clone(),
                recep: r.clone(),
            });
            candidates.push(ActionCommand::Clean {
                obj: o.clone(),
                recep: r.clone(),
            });
            candidates.push(ActionCommand::Heat {
                obj: o.clone(),
                recep: r.clone(),
            });
            candidates.push(ActionCommand::Cool {
                obj: o.clone(),
                recep: r.clone(),
            });
        }
    }
    for o in &objects {
        candidates.push(ActionCommand::Use { obj: o.clone() });
        candidates.push(ActionCommand::Examine { obj: o.clone() });
    }
    candidates.push(ActionCommand::Look);
    for room in &state.rooms {
        candidates.push(ActionCommand::Teleport { room: room.clone() });
    }

    let mut out: Vec<ActionCommand> = candidates
        .into_iter()
        .filter(|cmd| {
            let (_, obs) = step(state.clone(), cmd);
            !obs.nothing_happened
        })
        .collect();
    out.sort_by_key(|c| c.sort_key());
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed_cabinet_world() -> WorldState {
        let mut s = WorldState::new(EnvFlavor::Household, vec!["bathroom".into()]);
        s.add_receptacle(EntityRef::new("cabinet", 2), "bathroom", true, false);
        s.add_receptacle(EntityRef::new("countertop", 1), "bathroom", false, true);
        s.add_object(EntityRef::new("spraybottle", 2), "cabinet 2");
        let (s, _) = step(
            s,
            &ActionCommand::GoTo {
                recep: EntityRef::new("cabinet", 2),
            },
        );
        s
    }

    #[test]
    fn closed_cabinet_offers_open_and_gotos_but_no_take() {
        let s = closed_cabinet_world();
        let actions = valid_actions(&s);
        assert!(actions.contains(&ActionCommand::Open {
            recep: EntityRef::new("cabinet", 2)
        }));
        assert!(actions.contains(&ActionCommand::GoTo {
            recep: EntityRef::new("cabinet", 2)
        }));
        assert!(actions.contains(&ActionCommand::GoTo {
            recep: EntityRef::new("countertop", 1)
        }));
        assert!(!actions
            .iter()
            .any(|a| matches!(a, ActionCommand::Take { .. })));
        assert_eq!(actions, brute_force_valid_actions(&s));
    }

    #[test]
    fn held_object_at_open_fridge_offers_cool_and_put() {
        let mut s = WorldState::new(EnvFlavor::Household, vec!["kitchen".into()]);
        s.add_receptacle(EntityRef::new("fridge", 1), "kitchen", true, true);
        s.add_receptacle(EntityRef::new("countertop", 1), "kitchen", false, true);
        s.add_object(EntityRef::new("lettuce", 1), "countertop 1");
        let (s, _) = step(
            s,
            &ActionCommand::GoTo {
                recep: EntityRef::new("countertop", 1),
            },
        );
        let (s, _) = step(
            s,
            &ActionCommand::Take {
                obj: EntityRef::new("lettuce", 1),
                recep: EntityRef::new("countertop", 1),
            },
        );
        let (s, _) = step(
            s,
            &ActionCommand::GoTo {
                recep: EntityRef::new("fridge", 1),
            },
        );
        let actions = valid_actions(&s);
        assert!(actions.contains(&ActionCommand::Cool {
            obj: EntityRef::new("lettuce", 1),
            recep: EntityRef::new("fridge", 1),
        }));
        assert!(actions.contains(&ActionCommand::Put {
            obj: EntityRef::new("lettuce", 1),
            recep: EntityRef::new("fridge", 1),
        }));
        assert_eq!(actions, brute_force_valid_actions(&s));
    }

    #[test]
    fn empty_world_offers_nothing() {
        let s = WorldState::new(EnvFlavor::Household, vec!["bathroom".into()]);
        assert!(valid_actions(&s).is_empty());
        assert_eq!(valid_actions(&s), brute_force_valid_actions(&s));
    }

    #[test]
    fn grammar_round_trip_over_valid_actions() {
        let s = closed_cabinet_world();
        for cmd in valid_actions(&s) {
            assert_eq!(
                crate::world::grammar::parse_action(&cmd.render()).unwrap(),
                cmd
            );
        }
    }
}
