//! Verifies a claim against a live chat model and search API.
//!
//! Keys are read from FACTLAB_LLM_API_KEY and FACTLAB_SEARCH_API_KEY.
//!
//! ```text
//! cargo run --example live_verify -- https://search.example/api "Claim text"
//! ```

use std::sync::Arc;
use std::time::Duration;

use factlab::credibility::load_dataset;
use factlab::llm::{LlmGateway, OpenAiCompatible};
use factlab::model::{Claim, LabelScheme};
use factlab::orchestrator::{verify, AgentConfig, Clock, Toolbox};
use factlab::search::HttpSearchProvider;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let (Some(endpoint), Some(text)) = (args.next(), args.next()) else {
        eprintln!("usage: live_verify <search-endpoint> <claim>");
        std::process::exit(2);
    };
    let backend = OpenAiCompatible::from_env("https://api.openai.com/v1", "gpt-4o", Duration::from_secs(60))?;
    let llm = LlmGateway::new(Arc::new(backend));
    let search = HttpSearchProvider::from_env(&endpoint, Duration::from_secs(30))?;
    let reliability = load_dataset(&std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/reliability_sample.csv"))?;
    let tools = Toolbox {
        search: Arc::new(search),
        reliability: Arc::new(reliability),
    };

    let claim = Claim::new("live-1", text, LabelScheme::Binary)?;
    let outcome = verify(&claim, &AgentConfig::default(), &llm, &tools, Clock::System)?;
    println!("{}", outcome.report);
    Ok(())
}
