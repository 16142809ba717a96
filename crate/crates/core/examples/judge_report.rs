//! Scores a saved report with three scripted judge runs.

use std::path::PathBuf;

use factlab::eval::judge_report;
use factlab::llm::{LlmGateway, ScriptBook};
use factlab::model::Report;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/golden");
    let report = Report::from_json(&std::fs::read_to_string(dir.join("expected_report.json"))?)?;
    let book = ScriptBook::from_file(&dir.join("judge_script.json"))?;
    let script = book.for_claim(&report.claim.id).cloned().ok_or("no judge script")?;

    let q = judge_report(&report, &LlmGateway::scripted(script))?;
    println!("relevance   {:.3}", q.relevance);
    println!("consistency {:.3} (raw {:.3})", q.consistency, q.consistency_raw);
    println!("diversity   {:.3}", q.diversity);
    Ok(())
}
