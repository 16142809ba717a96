//! Agentic fact-checking: claim decomposition, tool use, and verdict synthesis.

pub mod cli;
pub mod credibility;
pub mod eval;
pub mod llm;
pub mod model;
pub mod numeric;
pub mod orchestrator;
pub mod search;
pub mod synthesis;
pub mod text;
