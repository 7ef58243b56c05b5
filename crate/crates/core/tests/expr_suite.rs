use std::sync::Arc;

use proptest::prelude::*;
use qweyl_core::expr::{normalize, parse_expression, parse_scalar, ExprError};
use qweyl_core::suite::{run_suite, RunConfig, SuiteError};
use qweyl_core::{CycField, DqAlgebra, PbwElement, TorusEmbedding};

fn diagonal_alg() -> DqAlgebra {
    let f = CycField::new(3).unwrap();
    DqAlgebra::new(f, TorusEmbedding::new(2, vec![vec![1], vec![1]], vec![vec![1]]).unwrap())
}

fn element_strategy() -> impl Strategy<Value = Vec<(i64, i64, i64, [u32; 4])>> {
    prop::collection::vec((-5i64..=5, 1i64..=4, 0i64..3, [0u32..3, 0u32..3, 0u32..3, 0u32..3]), 0..5)
}

fn build(alg: &DqAlgebra, f: &Arc<CycField>, terms: &[(i64, i64, i64, [u32; 4])]) -> PbwElement {
    let mut acc = alg.scalar(f.zero());
    for (num, den, qexp, e) in terms {
        let c = &(&f.from_int(*num) * &f.from_int(*den).inv().unwrap()) * &f.qpow(*qexp);
        let m = alg.monomial(vec![e[0], e[1]], vec![e[2], e[3]]).scale(&c);
        acc = acc.add(&m);
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_normal_forms_reparse(terms in element_strategy()) {
        let alg = diagonal_alg();
        let f = alg.field().clone();
        let e = build(&alg, &f, &terms);
        let printed = e.to_string();
        let back = normalize(&printed, &alg).unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn expression_display_is_a_fixed_point(terms in element_strategy()) {
        let alg = diagonal_alg();
        let f = alg.field().clone();
        let src = build(&alg, &f, &terms).to_string();
        let once = parse_expression(&src, 2).unwrap().to_string();
        let twice = parse_expression(&once, 2).unwrap().to_string();
        prop_assert_eq!(once, twice);
    }
}

#[test]
fn normalizes_the_defining_relation() {
    let alg = diagonal_alg();
    let lhs = normalize("d1*x1", &alg).unwrap();
    let rhs = normalize("q^2*x1*d1 + (q^2 - 1)", &alg).unwrap();
    assert_eq!(lhs, rhs);
    assert_eq!(lhs.to_string(), "(-q - 1)*x1*d1 + (-q - 2)");
    assert_eq!(normalize("a1", &alg).unwrap(), normalize("1 + x1*d1", &alg).unwrap());
}

#[test]
fn parse_errors_carry_positions() {
    assert!(matches!(
        parse_expression("x1 + x5", 2),
        Err(ExprError::IndexOutOfRange { index: 5, n: 2, offset: 5 })
    ));
    assert!(matches!(parse_expression("x1 +", 2), Err(ExprError::Syntax { offset: 4, .. })));
    assert!(matches!(parse_expression("", 2), Err(ExprError::Empty)));
    assert!(matches!(parse_expression("1/0", 2), Err(ExprError::ZeroDenominator { .. })));
    let alg = diagonal_alg();
    assert!(matches!(normalize("x1^-1", &alg), Err(ExprError::NegativePower)));
}

#[test]
fn scalars() {
    let f = CycField::new(5).unwrap();
    assert_eq!(parse_scalar("q^5", &f).unwrap(), f.one());
    assert_eq!(parse_scalar("(q - 1)^-1 * (q - 1)", &f).unwrap(), f.one());
    assert_eq!(parse_scalar("-3/6", &f).unwrap(), &f.from_int(-1) * &f.from_int(2).inv().unwrap());
    assert!(matches!(parse_scalar("x1", &f), Err(ExprError::NotScalar(_))));
}

const CONFIG: &str = r#"{
  "ell": 3,
  "embedding": { "matrix": [[1], [1]], "form": [[1]] },
  "seed": 11,
  "tasks": [
    { "task": "normalize", "exprs": ["d1*x1", "x3"] },
    { "task": "center-check", "max_exp": 3 },
    { "task": "reduce", "eta": [1] },
    { "task": "reduce", "eta": ["q"] },
    { "task": "qmm-check", "samples": 8 }
  ]
}"#;

#[test]
fn reports_are_deterministic() {
    let cfg = RunConfig::from_json(CONFIG).unwrap();
    let a = run_suite(&cfg, None).unwrap().to_json();
    let b = run_suite(&cfg, None).unwrap().to_json();
    assert_eq!(a, b);
    let r = run_suite(&cfg, None).unwrap();
    assert_eq!(r.seed, 11);
    assert_eq!(run_suite(&cfg, Some(99)).unwrap().seed, 99);
    let names: Vec<&str> = r.tasks.iter().map(|t| t["task"].as_str().unwrap()).collect();
    assert_eq!(names, ["normalize", "center-check", "reduce", "reduce", "qmm-check"]);
    // x3 is out of range for n = 2.
    assert_eq!(r.tasks[0]["ok"], false);
    assert!(!r.ok);
    for k in 1..5 {
        assert_eq!(r.tasks[k]["ok"], true, "{}", r.tasks[k]);
    }
}

#[test]
fn inadmissible_eta_is_reported() {
    let cfg = RunConfig::from_json(
        r#"{ "ell": 3, "embedding": { "matrix": [[3]] }, "tasks": [ { "task": "reduce", "eta": ["q^2"] } ] }"#,
    )
    .unwrap();
    let r = run_suite(&cfg, None).unwrap();
    assert_eq!(r.tasks[0]["eta_admissible"], false);
    assert_eq!(r.tasks[0]["ok"], false);
    assert!(!r.ok);
}

#[test]
fn config_validation() {
    let bad = [
        r#"{ "ell": 4, "embedding": { "n": 1 }, "tasks": [] }"#,
        r#"{ "ell": 3, "tasks": [] }"#,
        r#"{ "ell": 3, "embedding": {}, "tasks": [] }"#,
        r#"{ "ell": 3, "embedding": { "n": 1 }, "quiver": { "vertices": 2, "edges": [[1, 2]] }, "tasks": [] }"#,
    ];
    for src in bad {
        assert!(matches!(RunConfig::from_json(src), Err(SuiteError::Config(_))), "{src}");
    }
    assert!(matches!(
        RunConfig::from_json(r#"{ "ell": 3, "embedding": { "n": 1 }, "tasks": [ { "task": "nope" } ] }"#),
        Err(SuiteError::Json(_))
    ));
    assert!(RunConfig::from_json(r#"{ "ell": 5, "embedding": { "n": 1 }, "tasks": [] }"#).is_ok());
}
