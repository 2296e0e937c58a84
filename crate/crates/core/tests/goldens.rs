//! Golden-file pins for every instruction block and one-shot transcript
//! render, plus the strict parse round-trip over every rendered turn.
//!
//! Regenerate with `UPDATE_GOLDENS=1 cargo test -p reflact-core --test
//! goldens` and review the diff before committing.

use std::path::PathBuf;

use reflact_core::backbones::{
    effective_parse_kind, icl_agent_turns, instruction_text, parse_output_strict, render_icl,
    render_output, BackboneKind, CatalogFlavor,
};
use reflact_core::world::goal::TaskType;

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn check_golden(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var("UPDATE_GOLDENS").is_ok() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected =
        std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("missing golden {name}: {e}"));
    assert_eq!(actual, expected, "golden drift in {name}");
}

fn catalog_combinations() -> Vec<(BackboneKind, CatalogFlavor, &'static str)> {
    let mut combos = Vec::new();
    for kind in BackboneKind::ALL {
        combos.push((kind, CatalogFlavor::Household, "household"));
    }
    for kind in [
        BackboneKind::NoThinking,
        BackboneKind::ReAct,
        BackboneKind::ReflAct,
    ] {
        combos.push((kind, CatalogFlavor::Science, "science"));
        combos.push((kind, CatalogFlavor::Jericho, "jericho"));
    }
    combos
}

#[test]
fn instruction_blocks_match_goldens() {
    for (kind, flavor, flavor_name) in catalog_combinations() {
        let text = instruction_text(kind, flavor).unwrap();
        check_golden(
            &format!("instruction_{flavor_name}_{}.txt", kind.label()),
            text,
        );
    }
}

#[test]
fn icl_renders_match_goldens() {
    for task_type in TaskType::ALL {
        for kind in BackboneKind::ALL {
            let text = render_icl(kind, CatalogFlavor::Household, task_type).unwrap();
            check_golden(
                &format!("icl_household_{}_{}.txt", task_type.label(), kind.label()),
                &text,
            );
        }
    }
    for kind in [
        BackboneKind::NoThinking,
        BackboneKind::ReAct,
        BackboneKind::ReflAct,
    ] {
        let science = render_icl(kind, CatalogFlavor::Science, TaskType::Put).unwrap();
        check_golden(&format!("icl_science_{}.txt", kind.label()), &science);
        let jericho = render_icl(kind, CatalogFlavor::Jericho, TaskType::Put).unwrap();
        check_golden(&format!("icl_jericho_{}.txt", kind.label()), &jericho);
    }
}

/// Spot checks against the transcript sources; the goldens pin the full
/// bytes, these pin the load-bearing phrases.
#[test]
fn transcript_and_instruction_fidelity_spot_checks() {
    let reflact = instruction_text(BackboneKind::ReflAct, CatalogFlavor::Household).unwrap();
    assert!(reflact.contains("format:\"Reflection: your reflection.\\n Action: your next action\""));
    assert!(reflact.contains("1. go to {recep}"));
    assert!(reflact.contains("9. cool {obj} with {recep}"));
    assert!(reflact.contains("\"Nothing happened\""));

    let react_put =
        render_icl(BackboneKind::ReAct, CatalogFlavor::Household, TaskType::Put).unwrap();
    assert!(react_put.starts_with("You are in the middle of a room."));
    assert!(react_put.contains("Your task is to: put some spraybottle on toilet."));
    assert!(react_put.contains("Thought: Now I find a spraybottle 2. Next, I need to take it."));
    assert!(react_put.contains("Observation: You pick up the spraybottle 2 from the cabinet 2."));

    let reflact_put = render_icl(
        BackboneKind::ReflAct,
        CatalogFlavor::Household,
        TaskType::Put,
    )
    .unwrap();
    assert!(reflact_put.contains(
        "Reflection: Currently, I am at cabinet 2 and have found a spraybottle 2, which brings me closer to completing the task of placing it on the toilet."
    ));

    let reflact_clean = render_icl(
        BackboneKind::ReflAct,
        CatalogFlavor::Household,
        TaskType::Clean,
    )
    .unwrap();
    assert!(reflact_clean.contains("Your task is to: put a clean lettuce in diningtable."));
    assert!(reflact_clean.contains("Observation: You clean the lettuce 1 using the sinkbasin 1."));

    let sgt = instruction_text(BackboneKind::StateGoalThought, CatalogFlavor::Household).unwrap();
    assert!(sgt.contains(
        "\"Goal: task goal.\\n Current location: your current location.\\n Current Inventory: your current inventory.\\n Thought: your thoughts.\\n Action: your next action\""
    ));
    let sg = instruction_text(BackboneKind::StateGoal, CatalogFlavor::Household).unwrap();
    assert!(sg.contains("\"State: current state, Goal: task goal \\n Action: your next action\""));
}

/// Every rendered turn must parse strictly (no lenient salvage) and
/// re-render to the same bytes.
#[test]
fn every_icl_turn_round_trips_strictly() {
    let mut cases: Vec<(BackboneKind, CatalogFlavor, TaskType)> = Vec::new();
    for task_type in TaskType::ALL {
        for kind in BackboneKind::ALL {
            cases.push((kind, CatalogFlavor::Household, task_type));
        }
    }
    for kind in [
        BackboneKind::NoThinking,
        BackboneKind::ReAct,
        BackboneKind::ReflAct,
    ] {
        cases.push((kind, CatalogFlavor::Science, TaskType::Put));
        cases.push((kind, CatalogFlavor::Jericho, TaskType::Put));
    }

    for (kind, flavor, task_type) in cases {
        let turns = icl_agent_turns(kind, flavor, task_type).unwrap();
        assert!(
            !turns.is_empty(),
            "{kind:?}/{flavor:?}/{task_type:?} has no turns"
        );
        for (i, turn) in turns.iter().enumerate() {
            let t = i as u32 + 1;
            let effective = effective_parse_kind(kind, t);
            let out = parse_output_strict(effective, turn).unwrap_or_else(|e| {
                panic!("{kind:?}/{flavor:?}/{task_type:?} turn {t} fails strict parse: {e}\n{turn}")
            });
            assert!(!out.lenient);
            let rerendered =
                render_output(effective, out.reasoning_text.as_deref(), &out.action_text);
            assert_eq!(
                &rerendered, turn,
                "{kind:?}/{flavor:?}/{task_type:?} turn {t}"
            );
        }
    }
}
