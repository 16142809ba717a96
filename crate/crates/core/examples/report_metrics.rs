//! Classification metrics for both label schemes plus the report quality
//! scoring rules.

use factlab::eval::{accuracy_drop, classification_metrics, diversity_score, f1_score, relevance_score};
use factlab::model::LabelScheme;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gold = ["fake", "fake", "real", "real", "fake", "real"];
    let pred = ["fake", "real", "real", "real", "fake", "unverified"];
    let m = classification_metrics(&pred, &gold, LabelScheme::Binary)?;
    println!("binary: acc {:.3} P {:.3} R {:.3} F1 {:.3}", m.accuracy, m.precision, m.recall, m.f1);

    let gold6 = ["true", "mostly_true", "half_true", "false", "pants_fire", "barely_true"];
    let pred6 = ["true", "half_true", "half_true", "false", "false", "barely_true"];
    let m6 = classification_metrics(&pred6, &gold6, LabelScheme::SixLevel)?;
    println!("six-level: acc {:.3} macro F1 {:.3}", m6.accuracy, m6.f1);
    for c in &m6.per_class {
        println!("  {:<12} P {:.2} R {:.2} n={}", c.label, c.precision, c.recall, c.support);
    }

    println!("F1 from P=90.1 R=88.5: {:.2}", f1_score(90.1, 88.5));
    println!("relevance of [1, 0.5, 0, 1]: {}", relevance_score(&[1.0, 0.5, 0.0, 1.0])?);
    println!("diversity of 3 relevant items: {}", diversity_score(3));
    println!("drop 89.7 -> 85.3: {:.1}", accuracy_drop(89.7, 85.3));
    Ok(())
}
