//! Runs the five tool ablations over the bundled ten-claim set.

use std::path::PathBuf;

use factlab::cli::RunConfig;
use factlab::eval::{canonical_configs, load_dataset, run_ablation, BatchOptions, DatasetFormat};
use factlab::orchestrator::Clock;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/ablation");
    let cfg = RunConfig::load(&dir.join("ablation.toml"))?;
    let data = load_dataset(&dir.join("claims.jsonl"), DatasetFormat::GenericJsonl)?;
    let source = cfg.llm_source()?;
    let (tools, _) = cfg.toolbox()?;

    let configs = canonical_configs(&cfg.agent);
    let opts = BatchOptions { jobs: 4, clock: Clock::Frozen };
    let table = run_ablation(&configs, &data, &source, &tools, opts)?;
    print!("{}", table.to_csv()?);
    assert!(table.disabled_tool_violations(&configs).is_empty());
    Ok(())
}
