//! Verifies one claim end to end with scripted model replies and recorded
//! search results, then prints the report and the tool trace.

use std::path::PathBuf;

use factlab::cli::RunConfig;
use factlab::model::{Claim, LabelScheme};
use factlab::orchestrator::{verify, Clock};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/golden");
    let cfg = RunConfig::load(&dir.join("golden.toml"))?;
    cfg.validate()?;

    let claim = Claim::new(
        "g01",
        "A hospital survey found 1,200 of 3,000 nurses quit last year, a 55% resignation rate.",
        LabelScheme::Binary,
    )?;
    let llm = cfg.llm_source()?.gateway_for(&claim.id)?;
    let (tools, _) = cfg.toolbox()?;
    let outcome = verify(&claim, &cfg.agent, &llm, &tools, Clock::Frozen)?;

    println!("{}", outcome.report);
    println!("terminated by: {:?}", outcome.terminated_by);
    for call in outcome.log.tool_trace() {
        println!("  step {} {} -> {:?}", call.step_index, call.tool, call.evidence_ids);
    }
    Ok(())
}
