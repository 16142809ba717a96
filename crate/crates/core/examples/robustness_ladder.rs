//! Rewrites the bundled claims at each perturbation level and reports how
//! accuracy holds up.

use std::path::PathBuf;

use factlab::cli::RunConfig;
use factlab::eval::{
    load_dataset, perturb, robustness_csv, run_robustness, BatchOptions, DatasetFormat, FixtureRewriter,
    PerturbationLevel,
};
use factlab::orchestrator::Clock;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/ablation");
    let cfg = RunConfig::load(&dir.join("ablation.toml"))?;
    let data = load_dataset(&dir.join("claims.jsonl"), DatasetFormat::GenericJsonl)?;
    let rewriter = FixtureRewriter::from_file(&dir.join("rewrites.json"))?;

    let first = &data.records[0];
    for level in PerturbationLevel::ALL {
        println!("{level}: {}", perturb(&first.id, &first.text, level, &rewriter)?);
    }

    let source = cfg.llm_source()?;
    let (tools, _) = cfg.toolbox()?;
    let opts = BatchOptions { jobs: 4, clock: Clock::Frozen };
    let rows = run_robustness(&data, &PerturbationLevel::ALL[1..], &rewriter, &cfg.agent, &source, &tools, opts)?;
    print!("{}", robustness_csv(&rows)?);
    Ok(())
}
