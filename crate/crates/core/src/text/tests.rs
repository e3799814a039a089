use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::gen::{random_model, GenConfig};
use crate::model::{validate_model, BinOp, Expr, Trigger};
use crate::patterns::{apply_both, apply_ceo, apply_twc};
use crate::query::QueryMode;

const LASER: &str = include_str!("../../models/laser.scm");

#[test]
fn laser_has_two_charts_with_three_states_each() {
    let m = parse_model(LASER).unwrap();
    assert_eq!(m.name, "AirwayLaser");
    assert_eq!(m.charts.len(), 2);
    assert!(m.charts.iter().all(|c| c.states.len() == 3));
    assert_eq!((m.charts[0].name.as_str(), m.charts[0].id), ("Laser", 1));
    assert_eq!(m.charts[1].transitions[1].trigger, Some(Trigger::After(1)));
    assert!(validate_model(&m).is_empty());
}

#[test]
fn empty_input_is_an_error_at_the_start() {
    let e = parse_model("").unwrap_err();
    assert_eq!((e.span.line, e.span.column), (1, 1));
}

#[test]
fn truncated_guard_reports_its_line() {
    let text = "model M\nvar SpO: int[0..100] = 100\nchart A priority 1\n  initial X\n  state X\n  transition X -> X if SpO <\n";
    let e = parse_model(text).unwrap_err();
    assert_eq!(e.span.line, 6);
    assert!(e.message.contains("expected"), "{}", e.message);
}

#[test]
fn state_atoms_are_rejected_in_models() {
    let text = "model M\nchart A priority 1\n  initial X\n  state X\n  transition X -> X if A.X\n";
    assert!(parse_model(text).is_err());
}

#[test]
fn query_examples_parse() {
    let q = parse_query("A[] !(Laser.On && Ventilator.On)").unwrap();
    assert_eq!(q.mode, QueryMode::AlwaysGlobally);
    let q = parse_query("E<> Ventilator.Off").unwrap();
    assert_eq!(q.mode, QueryMode::ExistsEventually);
    let q = parse_query("A[] Ventilator.On imply Laser.Off").unwrap();
    assert!(matches!(q.pred, Expr::Binary(BinOp::Imply, ..)));
    let q = parse_query("A[] SpO >= 95").unwrap();
    assert_eq!(q.to_string(), "A[] SpO >= 95");
}

#[test]
fn imply_is_right_associative() {
    let q = parse_query("A[] a imply b imply c").unwrap();
    match q.pred {
        Expr::Binary(BinOp::Imply, l, r) => {
            assert_eq!(*l, Expr::Var("a".into()));
            assert!(matches!(*r, Expr::Binary(BinOp::Imply, ..)));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn query_file_skips_comments_and_keeps_line_numbers() {
    let qs = parse_query_file(include_str!("../../models/laser.q")).unwrap();
    assert_eq!(qs.len(), 2);
    let e = parse_query_file("A[] x > 1\n\nE<> (y\n").unwrap_err();
    assert_eq!(e.span.line, 3);
}

#[test]
fn negative_literals_and_negation_round_trip() {
    for src in ["A[] x - -3 > -(5)", "A[] -x * 2 == 4", "A[] !(a || b) && c"] {
        let q = parse_query(src).unwrap();
        assert_eq!(parse_query(&q.to_string()).unwrap(), q, "{src}");
    }
}

#[test]
fn serialized_laser_parses_back() {
    let m = parse_model(LASER).unwrap();
    assert_eq!(parse_model(&serialize_model(&m)).unwrap(), m);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn parse_inverts_serialize(seed in any::<u64>(), pattern in 0u8..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = random_model(&mut rng, &GenConfig::default());
        let m = match pattern {
            1 => apply_twc(&base).unwrap(),
            2 => apply_ceo(&base, None).unwrap(),
            3 => apply_both(&base, None).unwrap(),
            _ => base,
        };
        let text = serialize_model(&m);
        let back = parse_model(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(serialize_model(&back), text);
    }
}
