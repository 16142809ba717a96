#![allow(dead_code)]

use std::path::PathBuf;

use factlab::cli::RunConfig;
use factlab::eval::{load_dataset, Dataset, DatasetFormat};
use factlab::llm::LlmGateway;
use factlab::model::{Claim, LabelScheme};
use factlab::orchestrator::{verify_traced, Toolbox, VerificationOutcome};

pub const GOLDEN_CLAIM: &str =
    "A hospital survey found 1,200 of 3,000 nurses quit last year, a 55% resignation rate.";

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn config(rel: &str) -> RunConfig {
    let cfg = RunConfig::load(&fixture(rel)).expect("fixture config loads");
    cfg.validate().expect("fixture config is valid");
    cfg
}

pub fn golden_parts() -> (RunConfig, LlmGateway, Toolbox) {
    let cfg = config("golden/golden.toml");
    let llm = cfg.llm_source().unwrap().gateway_for("g01").unwrap();
    let (tools, _) = cfg.toolbox().unwrap();
    (cfg, llm, tools)
}

/// Runs scenario A with a frozen clock; returns the outcome and the
/// streamed trace bytes.
pub fn run_golden() -> (VerificationOutcome, Vec<u8>) {
    let (cfg, llm, tools) = golden_parts();
    let claim = Claim::new("g01", GOLDEN_CLAIM, LabelScheme::Binary).unwrap();
    let mut trace = Vec::new();
    let out = verify_traced(
        &claim,
        &cfg.agent,
        &llm,
        &tools,
        factlab::orchestrator::Clock::Frozen,
        Some(&mut trace),
    )
    .unwrap();
    (out, trace)
}

pub fn ablation_dataset() -> Dataset {
    load_dataset(&fixture("ablation/claims.jsonl"), DatasetFormat::GenericJsonl).unwrap()
}
