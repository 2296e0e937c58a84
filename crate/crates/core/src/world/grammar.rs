//! The action grammar: parsing single-line commands into structured actions
//! and rendering them back to their canonical surface form.
//!
//! Parsing is purely lexical. "take spraybottle 2 from cabinet 2" parses even
//! if no spraybottle exists; existence is checked when the action is applied.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::entity::EntityRef;

/// A parsed executable action.
///
/// The nine household verbs mirror the instruction's action list. `Examine`,
/// `Look` and `Teleport` are the science-flavor extensions; in household
/// worlds they are rejected in-band at step time.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "verb", rename_all = "snake_case")]
pub enum ActionCommand {
    GoTo { recep: EntityRef },
    Take { obj: EntityRef, recep: EntityRef },
    Put { obj: EntityRef, recep: EntityRef },
    Open { recep: EntityRef },
    Close { recep: EntityRef },
    Use { obj: EntityRef },
    Clean { obj: EntityRef, recep: EntityRef },
    Heat { obj: EntityRef, recep: EntityRef },
    Cool { obj: EntityRef, recep: EntityRef },
    Examine { obj: EntityRef },
    Look,
    Teleport { room: String },
}

impl ActionCommand {
    /// Canonical surface form, i.e. what `parse_action` round-trips.
    pub fn render(&self) -> String {
        match self {
            ActionCommand::GoTo { recep } => format!("go to {recep}"),
            ActionCommand::Take { obj, recep } => format!("take {obj} from {recep}"),
            ActionCommand::Put { obj, recep } => format!("put {obj} in/on {recep}"),
            ActionCommand::Open { recep } => format!("open {recep}"),
            ActionCommand::Close { recep } => format!("close {recep}"),
            ActionCommand::Use { obj } => format!("use {obj}"),
            ActionCommand::Clean { obj, recep } => format!("clean {obj} with {recep}"),
            ActionCommand::Heat { obj, recep } => format!("heat {obj} with {recep}"),
            ActionCommand::Cool { obj, recep } => format!("cool {obj} with {recep}"),
            ActionCommand::Examine { obj } => format!("examine {obj}"),
            ActionCommand::Look => "look".to_string(),
            ActionCommand::Teleport { room } => format!("teleport to {room}"),
        }
    }

    /// Rank used for deterministic candidate ordering; follows the
    /// instruction's action list, extensions after.
    pub fn verb_rank(&self) -> u8 {
        match self {
            ActionCommand::GoTo { .. } => 0,
            ActionCommand::Take { .. } => 1,
            ActionCommand::Put { .. } => 2,
            ActionCommand::Open { .. } => 3,
            ActionCommand::Close { .. } => 4,
            ActionCommand::Use { .. } => 5,
            ActionCommand::Clean { .. } => 6,
            ActionCommand::Heat { .. } => 7,
            ActionCommand::Cool { .. } => 8,
            ActionCommand::Examine { .. } => 9,
            ActionCommand::Look => 10,
            ActionCommand::Teleport { .. } => 11,
        }
    }

    /// Sort key: verb rank, then argument entities ascending.
    pub fn sort_key(&self) -> (u8, Vec<(String, u32)>) {
        let args: Vec<(String, u32)> = match self {
            ActionCommand::GoTo { recep }
            | ActionCommand::Open { recep }
            | ActionCommand::Close { recep } => {
                vec![(recep.class.clone(), recep.index)]
            }
            ActionCommand::Take { obj, recep }
            | ActionCommand::Put { obj, recep }
            | ActionCommand::Clean { obj, recep }
            | ActionCommand::Heat { obj, recep }
            | ActionCommand::Cool { obj, recep } => vec![
                (obj.class.clone(), obj.index),
                (recep.class.clone(), recep.index),
            ],
            ActionCommand::Use { obj } | ActionCommand::Examine { obj } => {
                vec![(obj.class.clone(), obj.index)]
            }
            ActionCommand::Look => vec![],
            ActionCommand::Teleport { room } => vec![(room.clone(), 0)],
        };
        (self.verb_rank(), args)
    }
}

/// Why a line failed to parse. The span indexes into the normalized line
/// (trimmed, whitespace collapsed, lowercased).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unknown verb {token:?} at {span:?}")]
    UnknownVerb { token: String, span: (usize, usize) },
    #[error("verb {verb:?} used with the wrong shape (expected \"{expected}\")")]
    BadArity {
        verb: String,
        expected: &'static str,
    },
    #[error("malformed entity reference {token:?} at {span:?}")]
    MalformedEntity { token: String, span: (usize, usize) },
}

/// Normalize an input line: trim, collapse internal whitespace, lowercase.
fn normalize(text: &str) -> String {
    text.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

struct Tokens {
    toks: Vec<String>,
    // byte offset of each token in the normalized line
    offsets: Vec<usize>,
}

impl Tokens {
    fn span(&self, i: usize) -> (usize, usize) {
        let start = self.offsets[i.min(self.offsets.len().saturating_sub(1))];
        (start, start + self.toks.get(i).map_or(0, |t| t.len()))
    }

    fn entity(
        &self,
        at: usize,
        verb: &str,
        expected: &'static str,
    ) -> Result<EntityRef, ParseError> {
        let class = self.toks.get(at).ok_or(ParseError::BadArity {
            verb: verb.to_string(),
            expected,
        })?;
        if class.is_empty() || !class.chars().all(|c| c.is_ascii_alphabetic()) {
            return Err(ParseError::MalformedEntity {
                token: class.clone(),
                span: self.span(at),
            });
        }
        let idx_tok = self.toks.get(at + 1).ok_or(ParseError::MalformedEntity {
            token: class.clone(),
            span: self.span(at),
        })?;
        let index: u32 = idx_tok.parse().map_err(|_| ParseError::MalformedEntity {
            token: idx_tok.clone(),
            span: self.span(at + 1),
        })?;
        Ok(EntityRef::new(class.clone(), index))
    }
}

/// Parse one line of agent output into a structured command.
///
/// The verb and keywords are case-folded and internal whitespace collapsed;
/// a trailing period is tolerated. Entities must have the "class index"
/// shape.
pub fn parse_action(text: &str) -> Result<ActionCommand, ParseError> {
    let mut line = normalize(text);
    while line.ends_with('.') {
        line.pop();
        line = line.trim_end().to_string();
    }

    let mut toks = Vec::new();
    let mut offsets = Vec::new();
    let mut pos = 0usize;
    for tok in line.split(' ') {
        if !tok.is_empty() {
            toks.push(tok.to_string());
            offsets.push(pos);
        }
        pos += tok.len() + 1;
    }
    let t = Tokens { toks, offsets };

    let verb = t.toks.first().cloned().unwrap_or_default();
    match verb.as_str() {
        "go" => {
            if t.toks.get(1).map(String::as_str) != Some("to") {
                return Err(ParseError::BadArity {
                    verb: "go".into(),
                    expected: "go to {recep}",
                });
            }
            expect_len(&t, 4, "go", "go to {recep}")?;
            Ok(ActionCommand::GoTo {
                recep: t.entity(2, "go", "go to {recep}")?,
            })
        }
        "take" => two_arg(&t, "take", "from", "take {obj} from {recep}")
            .map(|(obj, recep)| ActionCommand::Take { obj, recep }),
        "put" => {
            let (obj, recep) =
                two_arg_any(&t, "put", &["in/on", "in", "on"], "put {obj} in/on {recep}")?;
            Ok(ActionCommand::Put { obj, recep })
        }
        "open" => {
            expect_len(&t, 3, "open", "open {recep}")?;
            Ok(ActionCommand::Open {
                recep: t.entity(1, "open", "open {recep}")?,
            })
        }
        "close" => {
            expect_len(&t, 3, "close", "close {recep}")?;
            Ok(ActionCommand::Close {
                recep: t.entity(1, "close", "close {recep}")?,
            })
        }
        "use" => {
            expect_len(&t, 3, "use", "use {obj}")?;
            Ok(ActionCommand::Use {
                obj: t.entity(1, "use", "use {obj}")?,
            })
        }
        "clean" => two_arg(&t, "clean", "with", "clean {obj} with {recep}")
            .map(|(obj, recep)| ActionCommand::Clean { obj, recep }),
        "heat" => two_arg(&t, "heat", "with", "heat {obj} with {recep}")
            .map(|(obj, recep)| ActionCommand::Heat { obj, recep }),
        "cool" => two_arg(&t, "cool", "with", "cool {obj} with {recep}")
            .map(|(obj, recep)| ActionCommand::Cool { obj, recep }),
        "examine" => {
            expect_len(&t, 3, "examine", "examine {obj}")?;
            Ok(ActionCommand::Examine {
                obj: t.entity(1, "examine", "examine {obj}")?,
            })
        }
        "look" => {
            // "look" and "look around" are both accepted.
            if t.toks.len() == 1 || (t.toks.len() == 2 && t.toks[1] == "around") {
                Ok(ActionCommand::Look)
            } else {
                Err(ParseError::BadArity {
                    verb: "look".into(),
                    expected: "look",
                })
            }
        }
        "teleport" => {
            if t.toks.get(1).map(String::as_str) != Some("to") || t.toks.len() < 3 {
                return Err(ParseError::BadArity {
                    verb: "teleport".into(),
                    expected: "teleport to {room}",
                });
            }
            Ok(ActionCommand::Teleport {
                room: t.toks[2..].join(" "),
            })
        }
        "" => Err(ParseError::UnknownVerb {
            token: String::new(),
            span: (0, 0),
        }),
        other => Err(ParseError::UnknownVerb {
            token: other.to_string(),
            span: t.span(0),
        }),
    }
}

fn expect_len(
    t: &Tokens,
    len: usize,
    verb: &str,
    expected: &'static str,
) -> Result<(), ParseError> {
    match t.toks.len().cmp(&len) {
        std::cmp::Ordering::Equal => Ok(()),
        // Too few tokens after a valid keyword shape reads as a broken
        // entity; too many reads as the wrong shape.
        std::cmp::Ordering::Less => Err(ParseError::MalformedEntity {
            token: t.toks.last().cloned().unwrap_or_default(),
            span: t.span(t.toks.len().saturating_sub(1)),
        }),
        std::cmp::Ordering::Greater => Err(ParseError::BadArity {
            verb: verb.to_string(),
            expected,
        }),
    }
}

fn two_arg(
    t: &Tokens,
    verb: &str,
    keyword: &str,
    expected: &'static str,
) -> Result<(EntityRef, EntityRef), ParseError> {
    two_arg_any(t, verb, &[keyword], expected)
}

fn two_arg_any(
    t: &Tokens,
    verb: &str,
    keywords: &[&str],
    expected: &'static str,
) -> Result<(EntityRef, EntityRef), ParseError> {
    let kw_pos = t
        .toks
        .iter()
        .position(|tok| keywords.contains(&tok.as_str()))
        .ok_or(ParseError::BadArity {
            verb: verb.to_string(),
            expected,
        })?;
    if t.toks.len() != 6 || kw_pos != 3 {
        // Keyword present but an entity slot is not "class index"; point at
        // the slot that broke (short object before the keyword, otherwise
        // the receptacle tail).
        if t.toks.len() == 6 {
            return Err(ParseError::BadArity {
                verb: verb.to_string(),
                expected,
            });
        }
        let at = if kw_pos < 3 {
            kw_pos.saturating_sub(1)
        } else {
            t.toks.len() - 1
        };
        return Err(ParseError::MalformedEntity {
            token: t.toks.get(at).cloned().unwrap_or_default(),
            span: t.span(at),
        });
    }
    let obj = t.entity(1, verb, expected)?;
    let recep = t.entity(4, verb, expected)?;
    Ok((obj, recep))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(class: &str, idx: u32) -> EntityRef {
        EntityRef::new(class, idx)
    }

    #[test]
    fn parses_transcript_take() {
        assert_eq!(
            parse_action("take spraybottle 2 from cabinet 2").unwrap(),
            ActionCommand::Take {
                obj: e("spraybottle", 2),
                recep: e("cabinet", 2)
            }
        );
    }

    #[test]
    fn parses_minimal_goto() {
        assert_eq!(
            parse_action("go to cabinet 1").unwrap(),
            ActionCommand::GoTo {
                recep: e("cabinet", 1)
            }
        );
    }

    #[test]
    fn unknown_verb_is_rejected() {
        match parse_action("dance wildly") {
            Err(ParseError::UnknownVerb { token, .. }) => assert_eq!(token, "dance"),
            other => panic!("expected UnknownVerb, got {other:?}"),
        }
    }

    #[test]
    fn verb_case_and_whitespace_are_folded() {
        assert_eq!(
            parse_action("  Go   To  cabinet 1 ").unwrap(),
            ActionCommand::GoTo {
                recep: e("cabinet", 1)
            }
        );
        assert_eq!(
            parse_action("go to cabinet 1.").unwrap(),
            ActionCommand::GoTo {
                recep: e("cabinet", 1)
            }
        );
    }

    #[test]
    fn put_accepts_in_on_and_combined() {
        let want = ActionCommand::Put {
            obj: e("lettuce", 1),
            recep: e("diningtable", 1),
        };
        assert_eq!(
            parse_action("put lettuce 1 in/on diningtable 1").unwrap(),
            want
        );
        assert_eq!(
            parse_action("put lettuce 1 in diningtable 1").unwrap(),
            want
        );
        assert_eq!(
            parse_action("put lettuce 1 on diningtable 1").unwrap(),
            want
        );
    }

    #[test]
    fn missing_keyword_is_bad_arity() {
        match parse_action("take spraybottle 2") {
            Err(ParseError::BadArity { verb, .. }) => assert_eq!(verb, "take"),
            other => panic!("expected BadArity, got {other:?}"),
        }
    }

    #[test]
    fn missing_index_is_malformed_entity() {
        match parse_action("go to cabinet") {
            Err(ParseError::MalformedEntity { token, .. }) => assert_eq!(token, "cabinet"),
            other => panic!("expected MalformedEntity, got {other:?}"),
        }
        match parse_action("open cabinet two") {
            Err(ParseError::MalformedEntity { token, .. }) => assert_eq!(token, "two"),
            other => panic!("expected MalformedEntity, got {other:?}"),
        }
        match parse_action("take spraybottle 2 from cabinet") {
            Err(ParseError::MalformedEntity { token, .. }) => assert_eq!(token, "cabinet"),
            other => panic!("expected MalformedEntity, got {other:?}"),
        }
    }

    #[test]
    fn science_extensions_parse() {
        assert_eq!(parse_action("look around").unwrap(), ActionCommand::Look);
        assert_eq!(
            parse_action("teleport to living room").unwrap(),
            ActionCommand::Teleport {
                room: "living room".into()
            }
        );
        assert_eq!(
            parse_action("examine book 1").unwrap(),
            ActionCommand::Examine { obj: e("book", 1) }
        );
    }

    #[test]
    fn render_round_trips() {
        let cmds = [
            ActionCommand::GoTo {
                recep: e("cabinet", 4),
            },
            ActionCommand::Take {
                obj: e("soapbar", 1),
                recep: e("countertop", 1),
            },
            ActionCommand::Put {
                obj: e("soapbar", 1),
                recep: e("cabinet", 1),
            },
            ActionCommand::Clean {
                obj: e("soapbar", 1),
                recep: e("sinkbasin", 1),
            },
            ActionCommand::Heat {
                obj: e("apple", 1),
                recep: e("microwave", 1),
            },
            ActionCommand::Cool {
                obj: e("lettuce", 1),
                recep: e("fridge", 1),
            },
            ActionCommand::Use {
                obj: e("desklamp", 1),
            },
            ActionCommand::Look,
            ActionCommand::Teleport {
                room: "kitchen".into(),
            },
        ];
        for cmd in cmds {
            assert_eq!(parse_action(&cmd.render()).unwrap(), cmd);
        }
    }
}
