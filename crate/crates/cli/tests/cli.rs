use std::process::{Command, Output};

use serde_json::Value;

fn strata(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strata"))
        .args(args)
        .env_remove("STRATA_PRECISION")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

/// `(sequence, e, d, gcd(n, e), e / gcd)` rows of the published catalogue.
const CATALOGUE: [(&str, i64, i64, i64, i64); 8] = [
    ("st4", 4, 0, 1, 4),
    ("st30", 3, 0, 1, 3),
    ("st31", 3, -1, 1, 3),
    ("st20", 2, 0, 1, 2),
    ("st21", 2, -1, 1, 2),
    ("st10", 1, 0, 1, 1),
    ("st11", 1, -1, 1, 1),
    ("st21", 2, -1, 2, 1),
];

#[test]
fn sequences_match_the_catalogue() {
    let out = strata(&["sequences", "--output", "json"]);
    assert!(out.status.success());
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 8);
    for (row, (s, e, d, g, eg)) in rows.iter().zip(CATALOGUE) {
        assert_eq!(row["sequence"], s);
        assert_eq!(row["e"], e);
        assert_eq!(row["d"], d);
        assert_eq!(row["gcd"], g);
        assert_eq!(row["e_over_gcd"], eg);
    }
    let text = strata(&["sequences"]);
    assert_eq!(String::from_utf8_lossy(&text.stdout).lines().count(), 9);
}

#[test]
fn st20_grids_match_reference() {
    let out = strata(&["filtration", "st20", "0..1", "--check", "--output", "json"]);
    assert!(out.status.success());
    let grids = json(&out);
    let grids = grids.as_array().unwrap();
    assert_eq!(grids.len(), 2);
    assert_eq!(grids[0]["shape"], serde_json::json!([[0, 0, 0, 0], [0, 0, 0, 0], [1, 1, 0, 0], [1, 1, 0, 0]]));
    assert!(grids.iter().all(|g| g["matches_reference"] == true));
}

#[test]
fn l1_has_eight_matching_grids() {
    let out = strata(&["filtration", "L1", "0..7", "--check", "--output", "json"]);
    assert!(out.status.success());
    let grids = json(&out);
    assert_eq!(grids.as_array().unwrap().len(), 8);
    assert!(grids.as_array().unwrap().iter().all(|g| g["matches_reference"] == true));
}

#[test]
fn grids_shift_by_one_over_a_period() {
    let out = strata(&["filtration", "st30", "0..3", "--output", "json"]);
    let grids = json(&out);
    let (a, b) = (&grids[0]["shape"], &grids[3]["shape"]);
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(b[i][j].as_i64().unwrap(), a[i][j].as_i64().unwrap() + 1);
        }
    }
}

#[test]
fn unknown_label_is_a_usage_error() {
    assert_eq!(strata(&["filtration", "st99"]).status.code(), Some(2));
    assert_eq!(strata(&["filtration", "st30", "--check"]).status.code(), Some(2));
    assert_eq!(strata(&["verify", "--p", "4"]).status.code(), Some(2));
    assert_eq!(strata(&["verify", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn low_precision_reports_the_requirement() {
    let out = strata(&["verify", "--suite", "duality", "--precision", "5", "--output", "json"]);
    assert_eq!(out.status.code(), Some(2));
    let r = json(&out);
    assert_eq!(r["required_precision"], 14);
    let env = Command::new(env!("CARGO_BIN_EXE_strata"))
        .args(["verify", "--suite", "duality", "--output", "json"])
        .env("STRATA_PRECISION", "5")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic() {
    let args = ["verify", "--suite", "reduction", "--seed", "11", "--output", "json"];
    let a = strata(&args);
    let b = strata(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["config"]["seed"], 11);
}

#[test]
fn hecke_case_c_relations_carry_the_report_schema() {
    let out = strata(&["verify", "--suite", "hecke", "--case", "c", "--m", "1", "--output", "json"]);
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["passed"], true);
    let rels = r["suites"][0]["relations"].as_array().unwrap();
    assert!(!rels.is_empty());
    for key in ["case", "m", "p", "relation_id", "verdict", "witness_count", "max_coeff_diff"] {
        assert!(rels.iter().all(|x| x.get(key).is_some()), "{key}");
    }
    let ids: Vec<&str> = rels.iter().map(|x| x["relation_id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

#[test]
fn gauss_and_duality_pass_at_p5() {
    for suite in ["gauss", "duality", "goldens"] {
        let out = strata(&["verify", "--suite", suite, "--p", "5"]);
        assert!(out.status.success(), "{suite}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn stated_case_d_twist_exits_with_failure() {
    let out = strata(&["verify", "--suite", "hecke", "--case", "d", "--m", "2", "--output", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    let failed: Vec<String> = r["suites"][0]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["id"].as_str().unwrap().to_string())
        .collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|id| id.contains(".twist.s2.") && !id.contains("spread")), "{failed:?}");
}
