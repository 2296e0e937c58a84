//! Fixed room templates. Household scenes mirror the one-shot transcripts
//! (bathroom for put/clean-soap, kitchen for heat/cool/clean-food, bedroom
//! for examine); science scenes add a second room reachable by teleport.

use crate::world::goal::TaskType;
use crate::world::state::EnvFlavor;

/// A run of receptacles of one class within one room.
pub struct RecepGroup {
    pub room: &'static str,
    pub class: &'static str,
    pub count: u32,
    pub openable: bool,
}

pub struct RoomTemplate {
    pub name: &'static str,
    pub rooms: &'static [&'static str],
    pub receps: &'static [RecepGroup],
    /// Objects pinned to fixed receptacles (e.g. the desklamp on the desk).
    pub fixtures: &'static [(&'static str, &'static str)],
    pub distractor_classes: &'static [&'static str],
}

const fn grp(room: &'static str, class: &'static str, count: u32, openable: bool) -> RecepGroup {
    RecepGroup {
        room,
        class,
        count,
        openable,
    }
}

/// The bathroom scene from the pick-and-place transcript.
pub static BATHROOM: RoomTemplate = RoomTemplate {
    name: "bathroom",
    rooms: &["bathroom"],
    receps: &[
        grp("bathroom", "cabinet", 4, true),
        grp("bathroom", "countertop", 1, false),
        grp("bathroom", "garbagecan", 1, false),
        grp("bathroom", "handtowelholder", 2, false),
        grp("bathroom", "sinkbasin", 2, false),
        grp("bathroom", "toilet", 1, false),
        grp("bathroom", "toiletpaperhanger", 1, false),
        grp("bathroom", "towelholder", 1, false),
    ],
    fixtures: &[],
    distractor_classes: &[
        "candle",
        "cloth",
        "soapbar",
        "soapbottle",
        "spraybottle",
        "toiletpaper",
    ],
};

/// The kitchen scene from the clean-lettuce transcript.
pub static KITCHEN: RoomTemplate = RoomTemplate {
    name: "kitchen",
    rooms: &["kitchen"],
    receps: &[
        grp("kitchen", "cabinet", 13, true),
        grp("kitchen", "coffeemachine", 1, false),
        grp("kitchen", "countertop", 1, false),
        grp("kitchen", "diningtable", 1, false),
        grp("kitchen", "drawer", 1, true),
        grp("kitchen", "fridge", 1, true),
        grp("kitchen", "garbagecan", 1, false),
        grp("kitchen", "microwave", 1, true),
        grp("kitchen", "shelf", 3, false),
        grp("kitchen", "sinkbasin", 1, false),
        grp("kitchen", "stoveburner", 4, false),
        grp("kitchen", "toaster", 1, false),
    ],
    fixtures: &[],
    distractor_classes: &[
        "apple",
        "bread",
        "butterknife",
        "cup",
        "egg",
        "fork",
        "knife",
        "ladle",
        "lettuce",
        "mug",
        "pan",
        "peppershaker",
        "potato",
        "spatula",
        "tomato",
    ],
};

/// The bedroom scene from the examine-with-desklamp case.
pub static BEDROOM: RoomTemplate = RoomTemplate {
    name: "bedroom",
    rooms: &["bedroom"],
    receps: &[
        grp("bedroom", "bed", 1, false),
        grp("bedroom", "desk", 1, false),
        grp("bedroom", "drawer", 6, true),
        grp("bedroom", "garbagecan", 1, false),
        grp("bedroom", "laundryhamper", 1, false),
        grp("bedroom", "shelf", 6, false),
        grp("bedroom", "sidetable", 1, false),
    ],
    fixtures: &[("desklamp", "desk 1")],
    distractor_classes: &[
        "alarmclock",
        "book",
        "cd",
        "cellphone",
        "creditcard",
        "keychain",
        "laptop",
        "mug",
        "pen",
        "pencil",
    ],
};

/// Two-room science kitchen; low class indices stay in the starting room so
/// delivery targets never require a teleport.
pub static SCIENCE_KITCHEN: RoomTemplate = RoomTemplate {
    name: "science-kitchen",
    rooms: &["kitchen", "storage"],
    receps: &[
        grp("kitchen", "cabinet", 3, true),
        grp("kitchen", "countertop", 1, false),
        grp("kitchen", "diningtable", 1, false),
        grp("kitchen", "fridge", 1, true),
        grp("kitchen", "garbagecan", 1, false),
        grp("kitchen", "microwave", 1, true),
        grp("kitchen", "shelf", 1, false),
        grp("kitchen", "sinkbasin", 1, false),
        grp("storage", "cabinet", 3, true),
        grp("storage", "shelf", 2, false),
    ],
    fixtures: &[],
    distractor_classes: &[
        "apple", "bread", "cup", "egg", "lettuce", "mug", "pan", "potato", "tomato",
    ],
};

pub static SCIENCE_BEDROOM: RoomTemplate = RoomTemplate {
    name: "science-bedroom",
    rooms: &["bedroom", "study"],
    receps: &[
        grp("bedroom", "bed", 1, false),
        grp("bedroom", "drawer", 3, true),
        grp("bedroom", "garbagecan", 1, false),
        grp("bedroom", "shelf", 2, false),
        grp("study", "desk", 1, false),
        grp("study", "drawer", 2, true),
        grp("study", "shelf", 2, false),
        grp("study", "sidetable", 1, false),
    ],
    fixtures: &[("desklamp", "desk 1")],
    distractor_classes: &[
        "alarmclock",
        "book",
        "cd",
        "cellphone",
        "creditcard",
        "keychain",
        "laptop",
        "pen",
        "pencil",
    ],
};

/// Target-object classes a task type may ask for.
pub fn target_pool(flavor: EnvFlavor, task_type: TaskType) -> &'static [&'static str] {
    match (flavor, task_type) {
        (EnvFlavor::Household, TaskType::Put) => {
            &["spraybottle", "soapbar", "soapbottle", "candle", "cloth"]
        }
        (EnvFlavor::Household, TaskType::PutTwo) => &[
            "spraybottle",
            "soapbar",
            "soapbottle",
            "candle",
            "cloth",
            "toiletpaper",
        ],
        (EnvFlavor::Household, TaskType::Clean) => &[
            "soapbar", "cloth", "lettuce", "apple", "tomato", "potato", "mug", "cup",
        ],
        (EnvFlavor::Science, TaskType::Put | TaskType::PutTwo) => {
            &["apple", "bread", "cup", "egg", "mug", "tomato"]
        }
        (EnvFlavor::Science, TaskType::Clean) => {
            &["lettuce", "apple", "tomato", "potato", "mug", "cup"]
        }
        (_, TaskType::Heat) => &["apple", "potato", "tomato", "bread", "cup", "mug", "egg"],
        (_, TaskType::Cool) => &[
            "lettuce", "apple", "tomato", "potato", "bread", "cup", "mug",
        ],
        (_, TaskType::Examine) => &[
            "book",
            "alarmclock",
            "cd",
            "creditcard",
            "keychain",
            "cellphone",
            "pen",
            "pencil",
        ],
    }
}

/// Whether a clean target lives in the bathroom pool.
pub fn is_bathroom_clean_target(class: &str) -> bool {
    matches!(class, "soapbar" | "cloth")
}

/// Receptacle classes a task type may deliver to, per template.
pub fn goal_pool(task_type: TaskType, template: &RoomTemplate) -> &'static [&'static str] {
    let bathroom = std::ptr::eq(template, &BATHROOM);
    let science = template.rooms.len() > 1;
    match task_type {
        TaskType::Put | TaskType::PutTwo => {
            if science {
                &[
                    "countertop",
                    "diningtable",
                    "shelf",
                    "cabinet",
                    "garbagecan",
                ]
            } else {
                &["toilet", "countertop", "cabinet", "garbagecan"]
            }
        }
        TaskType::Clean => {
            if bathroom {
                &["cabinet", "countertop", "toilet", "garbagecan"]
            } else {
                &[
                    "diningtable",
                    "countertop",
                    "shelf",
                    "cabinet",
                    "fridge",
                    "garbagecan",
                ]
            }
        }
        TaskType::Heat => &[
            "garbagecan",
            "countertop",
            "diningtable",
            "shelf",
            "cabinet",
            "fridge",
        ],
        TaskType::Cool => &[
            "countertop",
            "diningtable",
            "shelf",
            "cabinet",
            "garbagecan",
        ],
        TaskType::Examine => &[],
    }
}

pub fn template_for(
    flavor: EnvFlavor,
    task_type: TaskType,
    target_class: &str,
) -> &'static RoomTemplate {
    match flavor {
        EnvFlavor::Household => match task_type {
            TaskType::Put | TaskType::PutTwo => &BATHROOM,
            TaskType::Clean => {
                if is_bathroom_clean_target(target_class) {
                    &BATHROOM
                } else {
                    &KITCHEN
                }
            }
            TaskType::Heat | TaskType::Cool => &KITCHEN,
            TaskType::Examine => &BEDROOM,
        },
        EnvFlavor::Science => match task_type {
            TaskType::Examine => &SCIENCE_BEDROOM,
            _ => &SCIENCE_KITCHEN,
        },
    }
}
