//! Checks arithmetic claims exactly, including a percentage claim at the
//! default tolerance and a sum too large for 64-bit integers.

use factlab::numeric::{evaluate, ClaimKind, Exact, NumericClaim, Quantity, DEFAULT_TOLERANCE};

fn q(s: &str) -> Quantity {
    Quantity::plain(Exact::parse_decimal(s).expect("decimal literal"))
}

fn pct(s: &str) -> Quantity {
    Quantity::new(Exact::parse_decimal(s).expect("decimal literal"), Some("%"))
}

fn claim(kind: ClaimKind, operands: Vec<Quantity>, asserted: Quantity) -> NumericClaim {
    NumericClaim {
        kind,
        operands,
        asserted_value: Some(asserted),
        relation_op: None,
        source_span: [0, 0],
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [
        ("23,196 + 21,417 = 44,613", claim(ClaimKind::Sum, vec![q("23196"), q("21417")], q("44613")), 0.0),
        ("1,200 of 3,000 is 55%", claim(ClaimKind::Ratio, vec![q("1200"), q("3000")], pct("55")), DEFAULT_TOLERANCE),
        ("12% of 250 is 30", claim(ClaimKind::PercentageOf, vec![pct("12"), q("250")], q("30")), DEFAULT_TOLERANCE),
        (
            "huge sum",
            claim(
                ClaimKind::Sum,
                vec![q("9223372036854775807"), q("9223372036854775807")],
                q("18446744073709551614"),
            ),
            0.0,
        ),
    ];
    for (label, c, tol) in cases {
        let v = evaluate(&c, tol)?;
        println!("{label:<28} holds={:?}  {}", v.holds, v.explanation);
    }
    Ok(())
}
