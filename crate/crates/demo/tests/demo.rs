use period_lattice_demo::{default_config, outcome_distribution, plan_instance, sample_and_recover, BARS};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn plan_reports_a_table() {
    let v = parse(&plan_instance("").unwrap());
    assert!(v["table"].as_str().unwrap().lines().count() > 3);
    assert!(v["L"].as_str().unwrap().parse::<u128>().unwrap() > 0);
}

#[test]
fn distribution_is_binned_and_bounded_below() {
    let v = parse(&outcome_distribution(&default_config()).unwrap());
    let bins = v["bins"].as_array().unwrap();
    assert!(!bins.is_empty() && bins.len() <= BARS);
    assert!(bins.iter().all(|b| b.as_f64().unwrap() >= 0.0));
    assert_eq!(v["pass"], true);
}

#[test]
fn sample_and_recover_is_reproducible() {
    let cfg = r#"{"q": 400, "seed": 3}"#;
    let a = sample_and_recover(cfg).unwrap();
    assert_eq!(a, sample_and_recover(cfg).unwrap());
    let v = parse(&a);
    assert_eq!(v["outcomes"].as_array().unwrap().len(), 2);
}

#[test]
fn bad_configs_are_rejected() {
    assert!(plan_instance(r#"{"q": 0}"#).is_err());
    assert!(outcome_distribution(r#"{"q": 5000}"#).is_err());
    assert!(sample_and_recover("not json").is_err());
    assert!(plan_instance(r#"{"corners": "0,x"}"#).is_err());
    assert!(sample_and_recover(r#"{"samples": 17}"#).is_err());
    // the recovery range is wider than the distribution range
    assert!(plan_instance(r#"{"q": 17126}"#).is_ok());
}
