//! A self-contained lab for LLM-agent reasoning backbones: a deterministic
//! household/science text world, seeded task generation with an oracle
//! solver, prompt construction and parsing for the NoThinking / ReAct /
//! Plan-and-Act / ReflAct families, an episode runner with Reflexion trials,
//! and the diagnostic metrics that go with them.

pub mod analytics;
pub mod backbones;
pub mod gateway;
pub mod runner;
pub mod serve;
pub mod taskgen;
pub mod world;
