use std::path::PathBuf;
use std::process::{Command, Output};

use clap::CommandFactory;
use convexion::{Cli, COVERAGE};
use serde_json::Value;

const OPS: &[&str] = &[
    "delta", "pushforward", "flatten", "convex_combine",
    "quotient_mix", "eq", "induce_map", "hom_combine",
    "join_point", "join_mix", "copair",
    "tensor", "universal_map", "extend_multiconvex", "coherence", "check_biconvex_not_convex_counterexample", "enriched_bridge",
    "is_convex_matrix", "compose", "direct_sum", "permute", "qconv_compose", "algebra_apply",
    "grothendieck", "is_discrete_fibration", "extract_functor", "convex_grothendieck",
    "trivial_structure", "star_alpha", "o_grothendieck", "check_lax",
    "shannon_entropy", "info_loss", "convex_combine_morphisms", "verify_entropy_axioms", "dist_lax_xi",
    "twisted_product", "check_simplicial_distribution", "bundle_tensor", "mu_product", "twist_monoid_structure",
    "run",
];

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn convexion(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_convexion")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn every_operation_has_a_verb() {
    let cmd = Cli::command();
    let verbs: Vec<&str> = cmd.get_subcommands().map(|c| c.get_name()).collect();
    for op in OPS {
        let verb = COVERAGE.iter().find(|(o, _)| o == op).map(|(_, v)| *v);
        let verb = verb.unwrap_or_else(|| panic!("{op} has no verb"));
        assert!(verbs.contains(&verb), "{op} maps to missing verb {verb}");
    }
    assert_eq!(COVERAGE.len(), OPS.len());
}

#[test]
fn eq_reports_a_valid_equal_witness() {
    let out = convexion(&["eq", "--presentation", &fixture("segment.json"), "--lhs", &fixture("lhs.json"), "--rhs", &fixture("rhs.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["command"], "eq");
    assert_eq!(r["result"]["verdict"]["status"], "Equal");
    assert_eq!(r["result"]["witness_valid"], true);
}

#[test]
fn eq_separates_distinct_points() {
    let out = convexion(&["eq", "--presentation", &fixture("segment.json"), "--lhs", &fixture("lhs.json"), "--rhs", &fixture("other.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["verdict"]["status"], "Distinct");
}

#[test]
fn malformed_input_exits_with_two_and_a_position() {
    let out = convexion(&["eq", "--presentation", &fixture("broken.json"), "--lhs", &fixture("lhs.json"), "--rhs", &fixture("rhs.json")]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2 column"), "{err}");
    assert!(convexion(&["prop", "check", "--matrix", &fixture("missing.json")]).status.code() == Some(2));
    assert!(convexion(&["no-such-verb"]).status.code() == Some(2));
}

#[test]
fn failed_checks_exit_with_one_and_still_report() {
    let dir = std::env::temp_dir().join(format!("convexion-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = convexion(&["prop", "check", "--matrix", &fixture("bad_matrix.json"), "--report", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written["passed"], false);
    assert_eq!(written, report(&out));

    let out = convexion(&["tensor", "extend", "--spec", &fixture("spec_bad.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["result"]["multiconvex"], false);
    assert_eq!(convexion(&["entropy", "verify", "--candidate", "squared"]).status.code(), Some(1));
    assert_eq!(convexion(&["tensor", "bridge", "--example", "swap-corrupt"]).status.code(), Some(1));
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        vec!["entropy", "generate", "--seed", "11", "--count", "5"],
        vec!["tensor", "counterexample"],
        vec!["prop", "compose", "--left", "M", "--right", "M"],
    ] {
        let m = fixture("m22.json");
        let args: Vec<&str> = args.iter().map(|a| if *a == "M" { m.as_str() } else { a }).collect();
        let a = convexion(&args);
        let b = convexion(&args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn report_envelope_has_sorted_keys_and_errata() {
    let out = convexion(&["tensor", "counterexample"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let keys: Vec<usize> = ["\"bound\"", "\"command\"", "\"errata\"", "\"passed\"", "\"result\"", "\"version\""]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]));
    let r: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(r["result"]["quoted_value_matches_definitions"], false);
    assert_eq!(r["errata"].as_array().unwrap().len(), 1);
}

#[test]
fn selfcheck_passes() {
    let out = convexion(&["selfcheck"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["passed"], true);
    assert_eq!(r["result"]["prop_law_failures"], Value::Array(vec![]));
}

#[test]
fn join_and_copair() {
    let out = convexion(&[
        "join", "mix", "--x", &fixture("segment.json"), "--y", &fixture("free2.json"),
        "--points", &fixture("points.json"), "--beta", "1/2,1/2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["point"]["alpha"], "3/4");

    let out = convexion(&[
        "join", "copair", "--x", &fixture("segment.json"), "--y", &fixture("free2.json"), "--target", &fixture("free2.json"),
        "--f", &fixture("f.json"), "--g", &fixture("g.json"), "--point", &fixture("point.json"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let w = &report(&out)["result"]["value"]["weights"];
    assert_eq!(w[0]["w"], "1/4");
    assert_eq!(w[1]["w"], "3/4");
}

#[test]
fn grothendieck_round_trips() {
    let out = convexion(&["groth", "--category", &fixture("cat.json"), "--functor", &fixture("functor.json"), "--convex"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out)["result"].clone();
    for key in ["discrete_fibration", "unit_isomorphism", "counit_isomorphism", "convex_round_trip"] {
        assert_eq!(r[key], true, "{key}");
    }
}

#[test]
fn twisted_bundles_add() {
    let out = convexion(&[
        "twist", "--simplicial", &fixture("bz2.json"), "--group", "constant:2",
        "--eta", &fixture("eta.json"), "--other", &fixture("eta.json"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["tensor_is_sum"], true);
    assert_eq!(r["result"]["mu"]["valid"], true);
    // The twisting function has order two.
    let zero: Value = serde_json::from_str(&std::fs::read_to_string(fixture("eta_zero.json")).unwrap()).unwrap();
    assert_eq!(r["result"]["sum"], zero);
}

#[test]
fn prop_and_entropy_values() {
    let out = convexion(&["prop", "qconv", "--outer", "1/2,1/2", "--inner", "1/3,2/3", "--inner", "1"]);
    assert_eq!(report(&out)["result"]["weights"], serde_json::json!(["1/6", "1/3", "1/2"]));
    let out = convexion(&["entropy", "verify", "--candidate", "scaled:2"]);
    assert_eq!(out.status.code(), Some(0));
    let c = report(&out)["result"]["c"].as_f64().unwrap();
    assert!((c - 2.0).abs() < 1e-9);
    assert_eq!(convexion(&["omon", "--functor", "max"]).status.code(), Some(0));
    assert_eq!(convexion(&["dist", "laws"]).status.code(), Some(0));
}
