use super::{ClaimKind, Exact, NumericClaim, NumericError, NumericVerdict, Quantity, RelationOp};

/// Relative tolerance absorbing journalistic rounding.
pub const DEFAULT_TOLERANCE: f64 = 0.005;

/// `|computed - asserted| <= tol * max(|computed|, smallest positive f64)`,
/// or exact equality when `tol` is zero.
fn within(computed: &Exact, asserted: &Exact, tol: &Exact) -> bool {
    if tol.is_zero() {
        return computed == asserted;
    }
    let tiny = Exact::from_f64(f64::from_bits(1)).expect("finite");
    let scale = std::cmp::max(computed.abs(), tiny);
    (computed - asserted).abs() <= tol * &scale
}

fn join(qs: &[Quantity], sep: &str) -> String {
    qs.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(sep)
}

fn tolerance_phrase(tolerance: f64) -> String {
    if tolerance == 0.0 {
        "exact comparison".to_string()
    } else {
        format!("relative tolerance {tolerance}")
    }
}

/// Evaluates `claim` with exact rational arithmetic.
///
/// A ratio with a zero denominator yields a verdict with no `holds` value.
pub fn evaluate(claim: &NumericClaim, tolerance: f64) -> Result<NumericVerdict, NumericError> {
    if !tolerance.is_finite() || tolerance < 0.0 {
        return Err(NumericError::InvalidTolerance(tolerance));
    }
    claim.check_well_typed()?;
    let tol = Exact::from_f64(tolerance).expect("finite tolerance");
    let ops = &claim.operands;
    let verdict = |computed: Option<Exact>, holds: Option<bool>, explanation: String| NumericVerdict {
        claim: claim.clone(),
        computed_value: computed,
        holds,
        tolerance_used: tolerance,
        explanation,
    };

    if claim.kind == ClaimKind::Relation {
        let op = claim.relation_op.expect("checked");
        let (a, b) = (&ops[0].value, &ops[1].value);
        let holds = match op {
            RelationOp::Eq => within(a, b, &tol),
            RelationOp::Lt => a < b,
            RelationOp::Gt => a > b,
            RelationOp::Le => a <= b,
            RelationOp::Ge => a >= b,
        };
        let tol_note = if op == RelationOp::Eq {
            format!(" ({})", tolerance_phrase(tolerance))
        } else {
            String::new()
        };
        return Ok(verdict(
            Some(a.clone()),
            Some(holds),
            format!(
                "{} {op} {} is {}{tol_note}",
                ops[0],
                ops[1],
                if holds { "true" } else { "false" }
            ),
        ));
    }

    let asserted = claim.asserted_value.as_ref().expect("checked");
    let (computed, description) = match claim.kind {
        ClaimKind::Sum => {
            let total = ops.iter().skip(1).fold(ops[0].value.clone(), |acc, q| &acc + &q.value);
            (Some(total), format!("sum {}", join(ops, " + ")))
        }
        ClaimKind::Difference => {
            let total = ops.iter().skip(1).fold(ops[0].value.clone(), |acc, q| &acc - &q.value);
            (Some(total), format!("difference {}", join(ops, " - ")))
        }
        ClaimKind::PercentageOf => {
            let hundred = Exact::from_integer(100);
            let rate = (&ops[0].value / &hundred).expect("nonzero");
            (
                Some(&rate * &ops[1].value),
                format!("{} of {}", Quantity::new(ops[0].value.clone(), Some("%")), ops[1]),
            )
        }
        ClaimKind::Ratio => {
            let ratio = &ops[0].value / &ops[1].value;
            let scaled = if asserted.is_percent() {
                ratio.map(|r| &r * &Exact::from_integer(100))
            } else {
                ratio
            };
            (scaled, format!("ratio {} / {}", ops[0], ops[1]))
        }
        ClaimKind::Relation => unreachable!(),
    };

    let Some(computed) = computed else {
        return Ok(verdict(
            None,
            None,
            format!("{description} is undefined (division by zero); asserted {asserted}"),
        ));
    };
    let holds = within(&computed, &asserted.value, &tol);
    let shown = Quantity::new(computed.clone(), asserted.unit.as_deref());
    let explanation = format!(
        "{description} = {shown}; asserted {asserted}; {} under {}",
        if holds { "holds" } else { "does not hold" },
        tolerance_phrase(tolerance)
    );
    Ok(verdict(Some(computed), Some(holds), explanation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn int(n: i64) -> Quantity {
        Quantity::plain(Exact::from_integer(n))
    }

    fn claim(kind: ClaimKind, ops: Vec<Quantity>, asserted: Quantity) -> NumericClaim {
        NumericClaim {
            kind,
            operands: ops,
            asserted_value: Some(asserted),
            relation_op: None,
            source_span: [0, 0],
        }
    }

    #[test]
    fn exact_sum_holds() {
        let c = claim(ClaimKind::Sum, vec![int(23196), int(21417)], int(44613));
        let v = evaluate(&c, 0.0).unwrap();
        assert_eq!(v.holds, Some(true));
        assert_eq!(v.computed_value, Some(Exact::from_integer(44613)));
    }

    #[test]
    fn percentage_outside_tolerance() {
        let pct = Quantity::new(Exact::from_integer(30), Some("%"));
        let c = claim(ClaimKind::PercentageOf, vec![pct, int(200)], int(61));
        let v = evaluate(&c, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(v.computed_value, Some(Exact::from_integer(60)));
        assert_eq!(v.holds, Some(false));
        assert!(v.explanation.contains("60"));
        assert!(v.explanation.contains("61"));
        assert!(v.explanation.contains("0.005"));
    }

    #[test]
    fn percentage_within_tolerance() {
        // 30% of 200 = 60; 60.2 is 0.33% off
        let pct = Quantity::new(Exact::from_integer(30), Some("%"));
        let asserted = Quantity::plain(Exact::parse_decimal("60.2").unwrap());
        let c = claim(ClaimKind::PercentageOf, vec![pct, int(200)], asserted);
        assert_eq!(evaluate(&c, DEFAULT_TOLERANCE).unwrap().holds, Some(true));
        assert_eq!(evaluate(&c, 0.0).unwrap().holds, Some(false));
    }

    #[test]
    fn ratio_by_zero_is_ill_defined() {
        let c = claim(ClaimKind::Ratio, vec![int(5), int(0)], int(1));
        let v = evaluate(&c, 0.0).unwrap();
        assert_eq!(v.holds, None);
        assert_eq!(v.computed_value, None);
        assert!(v.explanation.contains("division by zero"));
    }

    #[test]
    fn ratio_against_percentage() {
        let asserted = Quantity::new(Exact::from_integer(55), Some("%"));
        let c = claim(ClaimKind::Ratio, vec![int(1200), int(3000)], asserted);
        let v = evaluate(&c, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(v.computed_value, Some(Exact::from_integer(40)));
        assert_eq!(v.holds, Some(false));
    }

    #[test]
    fn relations() {
        let mut c = NumericClaim {
            kind: ClaimKind::Relation,
            operands: vec![int(3), int(5)],
            asserted_value: None,
            relation_op: Some(RelationOp::Lt),
            source_span: [0, 0],
        };
        assert_eq!(evaluate(&c, 0.0).unwrap().holds, Some(true));
        c.relation_op = Some(RelationOp::Ge);
        assert_eq!(evaluate(&c, 0.0).unwrap().holds, Some(false));
        c.relation_op = Some(RelationOp::Eq);
        c.operands = vec![int(1000), int(1004)];
        assert_eq!(evaluate(&c, 0.005).unwrap().holds, Some(true));
        assert_eq!(evaluate(&c, 0.0).unwrap().holds, Some(false));
    }

    #[test]
    fn zero_computed_needs_zero_asserted() {
        let c = claim(ClaimKind::Difference, vec![int(5), int(5)], int(0));
        assert_eq!(evaluate(&c, 0.01).unwrap().holds, Some(true));
        let c = claim(ClaimKind::Difference, vec![int(5), int(5)], int(1));
        assert_eq!(evaluate(&c, 0.01).unwrap().holds, Some(false));
    }

    #[test]
    fn bad_inputs() {
        let c = claim(ClaimKind::Sum, vec![int(1)], int(1));
        assert!(matches!(evaluate(&c, 0.0), Err(NumericError::IllTyped(_))));
        let c = claim(ClaimKind::Sum, vec![int(1), int(1)], int(2));
        assert!(evaluate(&c, -0.1).is_err());
        assert!(evaluate(&c, f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn holds_matches_invariant(a in -10_000i64..10_000, b in -10_000i64..10_000,
                                   asserted in -20_000i64..20_000, tol in 0.0f64..0.2) {
            let c = claim(ClaimKind::Sum, vec![int(a), int(b)], int(asserted));
            let v = evaluate(&c, tol).unwrap();
            let computed = (a + b) as f64;
            let lhs = (computed - asserted as f64).abs();
            let rhs = tol * computed.abs().max(f64::from_bits(1));
            // skip razor-edge cases where f64 rounding could disagree with exact math
            prop_assume!((lhs - rhs).abs() > 1e-9);
            prop_assert_eq!(v.holds, Some(lhs <= rhs));
        }
    }
}
