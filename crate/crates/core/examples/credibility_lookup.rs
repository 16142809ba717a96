//! Rates a few URLs against the bundled source reliability table.

use std::path::PathBuf;

use factlab::credibility::{assess, load_dataset};
use factlab::model::ScoreConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/reliability_sample.csv");
    let ds = load_dataset(&path)?;
    let sc = ScoreConfig::default();
    println!("{} rated domains (version {})", ds.len(), ds.version());

    for url in [
        "https://www.cdc.gov/flu/about/index.html",
        "https://blog.nytimes.com/2024/01/01/story",
        "https://notcdc.gov/health",
        "http://nursetruth.blogspot.com/post",
    ] {
        let a = assess(url, &ds, &sc)?;
        let via = a.matched.as_deref().unwrap_or("-");
        println!("{:<45} {:<8} {:.1}  (matched {via})", url, a.tier.as_str(), a.score);
    }
    Ok(())
}
