//! Property tests over reachable world states: the invalid-action identity,
//! the valid-action enumeration against its brute-force oracle, grammar
//! round-trips, container opacity and progress monotonicity.

use proptest::prelude::*;

use reflact_core::taskgen::generate;
use reflact_core::world::goal::{evaluate_goal, ProgressReport, TaskType};
use reflact_core::world::grammar::{parse_action, ActionCommand};
use reflact_core::world::state::{EnvFlavor, WorldState};
use reflact_core::world::step::step;
use reflact_core::world::valid::{brute_force_valid_actions, valid_actions};
use reflact_core::world::EntityRef;

fn task_type_for(index: u8) -> TaskType {
    TaskType::ALL[index as usize % TaskType::ALL.len()]
}

fn flavor_for(flag: bool) -> EnvFlavor {
    if flag {
        EnvFlavor::Science
    } else {
        EnvFlavor::Household
    }
}

/// Walk a generated world along `choices`, mixing valid moves with the
/// occasional junk command, and return the reached state.
fn reachable_state(seed: u64, ty: u8, science: bool, choices: &[u16]) -> WorldState {
    let task = generate(seed, task_type_for(ty), flavor_for(science)).expect("generate");
    let mut state = task.initial_state;
    for &choice in choices {
        let cands = valid_actions(&state);
        let cmd = if cands.is_empty() || choice % 7 == 6 {
            // Junk command, rejected in-band.
            ActionCommand::Take {
                obj: EntityRef::new("ghost", 1),
                recep: EntityRef::new("void", 1),
            }
        } else {
            cands[choice as usize % cands.len()].clone()
        };
        let (next, _) = step(state, &cmd);
        state = next;
    }
    state
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Rejected commands leave everything but the step counter untouched.
    #[test]
    fn invalid_action_identity(
        seed in 0u64..200,
        ty in 0u8..6,
        science in any::<bool>(),
        choices in prop::collection::vec(0u16..512, 0..8),
        probe in 0u16..512,
    ) {
        let state = reachable_state(seed, ty, science, &choices);
        // Probe commands biased toward rejection: nonexistent entities and
        // out-of-place verbs.
        let probes = [
            ActionCommand::Take { obj: EntityRef::new("ghost", 9), recep: EntityRef::new("void", 9) },
            ActionCommand::Open { recep: EntityRef::new("toilet", 1) },
            ActionCommand::Cool { obj: EntityRef::new("lettuce", 1), recep: EntityRef::new("fridge", 1) },
            ActionCommand::GoTo { recep: EntityRef::new("cabinet", 99) },
            ActionCommand::Use { obj: EntityRef::new("spraybottle", 1) },
            ActionCommand::Teleport { room: "nowhere".to_string() },
        ];
        let cmd = probes[probe as usize % probes.len()].clone();
        let before = state.clone();
        let (after, obs) = step(state, &cmd);
        prop_assert_eq!(after.step_count, before.step_count + 1);
        if obs.nothing_happened {
            let mut rewound = after;
            rewound.step_count = before.step_count;
            prop_assert_eq!(rewound, before);
        }
    }

    /// The enumerated candidate set equals the brute-force step filter and
    /// every candidate's surface form parses back to itself.
    #[test]
    fn valid_actions_match_brute_force_and_round_trip(
        seed in 0u64..200,
        ty in 0u8..6,
        science in any::<bool>(),
        choices in prop::collection::vec(0u16..512, 0..6),
    ) {
        let state = reachable_state(seed, ty, science, &choices);
        let fast = valid_actions(&state);
        let slow = brute_force_valid_actions(&state);
        prop_assert_eq!(&fast, &slow);
        for cmd in &fast {
            prop_assert_eq!(&parse_action(&cmd.render()).unwrap(), cmd);
        }
    }

    /// No observation reachable by going to a closed receptacle mentions
    /// anything stored inside it.
    #[test]
    fn closed_containers_are_opaque(
        seed in 0u64..200,
        ty in 0u8..6,
        choices in prop::collection::vec(0u16..512, 0..6),
    ) {
        let state = reachable_state(seed, ty, false, &choices);
        let closed: Vec<(EntityRef, Vec<String>)> = state
            .receptacles
            .values()
            .filter(|r| r.openable && !r.is_open && !r.contents.is_empty())
            .map(|r| (r.entity.clone(), r.contents.clone()))
            .collect();
        for (recep, contents) in closed {
            let (_, obs) = step(state.clone(), &ActionCommand::GoTo { recep });
            for hidden in &contents {
                prop_assert!(
                    !obs.text.contains(hidden.as_str()),
                    "closed receptacle leaked {} in {:?}",
                    hidden,
                    obs.text
                );
            }
        }
    }

    /// Latched progress never decreases along any action sequence.
    #[test]
    fn progress_is_monotone(
        seed in 0u64..200,
        ty in 0u8..6,
        science in any::<bool>(),
        choices in prop::collection::vec(0u16..512, 0..20),
    ) {
        let task = generate(seed, task_type_for(ty), flavor_for(science)).expect("generate");
        let mut state = task.initial_state.clone();
        let mut report = ProgressReport::zero();
        for &choice in &choices {
            let cands = valid_actions(&state);
            if cands.is_empty() { break; }
            let cmd = cands[choice as usize % cands.len()].clone();
            let (next, _) = step(state, &cmd);
            state = next;
            let previous = report.progress;
            report = evaluate_goal(&state, &task.goal, &report);
            prop_assert!(report.progress + 1e-12 >= previous);
        }
    }
}
