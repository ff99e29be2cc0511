use std::path::{Path, PathBuf};

use kflag::cases::{self, run_bytes, run_case, CaseError, Render};
use kflag::ratfn::rat;

fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("cases")
}

fn read(name: &str) -> Vec<u8> {
    std::fs::read(dir().join(format!("{name}.case"))).unwrap()
}

const BUNDLED: [&str; 8] = [
    "alpha_f1",
    "beta_p1xp1",
    "family_2_13_S",
    "family_2_16_E",
    "family_2_16_S",
    "family_2_19_S",
    "family_3_6_S",
    "family_3_7_E",
];

#[test]
fn bundled_set_is_exactly_the_eight_cases() {
    let mut names: Vec<String> = std::fs::read_dir(dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "case"))
        .map(|p| p.file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names, BUNDLED);
}

#[test]
fn every_bundled_case_passes() {
    for name in BUNDLED {
        let case = cases::load_case(&read(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(case.name(), name);
        let report = run_case(&case);
        assert!(report.passed(), "{}", report.render_text(Render::default()));
        assert!(!report.expected.is_empty());
        assert!(report.expected.iter().all(|c| !c.source.is_empty()));
    }
}

#[test]
fn quadric_case_has_two_flags() {
    let case = cases::load_case(&read("family_2_16_E")).unwrap();
    assert_eq!(case.flags.len(), 3);
    let s = |i: usize| case.flags[i].surface.curve("s").unwrap().self_intersection.clone();
    assert_eq!(s(0), rat(0, 1));
    assert_eq!(s(1), rat(-2, 1));
}

#[test]
fn empty_input_is_a_parse_error() {
    assert!(matches!(cases::load_case(b""), Err(CaseError::Parse { .. })));
    assert!(matches!(cases::load_case(b"{\"name\": "), Err(CaseError::Parse { .. })));
}

fn edit(name: &str, f: impl FnOnce(&mut serde_json::Value)) -> Vec<u8> {
    let mut v: serde_json::Value = serde_json::from_slice(&read(name)).unwrap();
    f(&mut v);
    serde_json::to_vec(&v).unwrap()
}

#[test]
fn asymmetric_gram_is_a_validation_error() {
    let bytes = edit("beta_p1xp1", |v| v["surface"]["gram"][0][1] = "2".into());
    match cases::load_case(&bytes) {
        Err(CaseError::Validation(msg)) => assert!(msg.contains("(s, f)") || msg.contains("s") && msg.contains("f"), "{msg}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_and_missing_keys_are_schema_errors() {
    let bytes = edit("family_3_6_S", |v| v["ray"]["chambers"][0]["postive"] = serde_json::json!({}));
    match cases::load_case(&bytes) {
        Err(CaseError::Schema { path, .. }) => assert!(path.starts_with("ray.chambers[0]"), "{path}"),
        other => panic!("{other:?}"),
    }
    let bytes = edit("family_3_6_S", |v| {
        v["expected"][0].as_object_mut().unwrap().remove("source");
    });
    match cases::load_case(&bytes) {
        Err(CaseError::Schema { path, .. }) => assert!(path.starts_with("expected[0]"), "{path}"),
        other => panic!("{other:?}"),
    }
    let bytes = edit("family_3_6_S", |v| v["expected"][0]["value"] = serde_json::json!(0.5));
    assert!(matches!(cases::load_case(&bytes), Err(CaseError::Schema { .. })));
}

#[test]
fn serialize_round_trips() {
    for name in BUNDLED {
        let case = cases::load_case(&read(name)).unwrap();
        let again = cases::load_case(cases::serialize(&case).as_bytes()).unwrap();
        assert_eq!(case, again, "{name}");
    }
}

#[test]
fn reports_are_deterministic() {
    for name in BUNDLED {
        let bytes = read(name);
        let opts = Render { traces: true, decimal: Some(6) };
        let a = run_bytes(name, &bytes).unwrap();
        let b = run_bytes(name, &bytes).unwrap();
        assert_eq!(a.render_text(opts), b.render_text(opts));
        assert_eq!(a.to_json(opts).to_string(), b.to_json(opts).to_string());
    }
}

#[test]
fn perturbed_expectation_is_a_single_failure() {
    let bytes = edit("family_2_13_S", |v| {
        let e = v["expected"].as_array_mut().unwrap().iter_mut().find(|e| e["value"] == "41/80").unwrap();
        e["value"] = "42/80".into();
    });
    let report = run_bytes("family_2_13_S", &bytes).unwrap();
    let failed: Vec<_> = report.expected.iter().filter(|c| !c.passed).collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0].computed, Some(rat(41, 80)));
    assert_eq!(failed[0].expected, rat(21, 40));
    let text = report.render_text(Render::default());
    assert!(text.contains("FAIL (expected 21/40, diff -1/80)"), "{text}");
}

#[test]
fn broken_ray_reports_validation_error_without_evaluating() {
    // P + N no longer matches the ray on the second chamber.
    let bytes = edit("family_3_6_S", |v| v["ray"]["chambers"][1]["positive"]["H"] = serde_json::json!(["5", "-1"]));
    let report = run_bytes("family_3_6_S", &bytes).unwrap();
    assert!(report.validation_error.is_some());
    assert!(report.results.is_empty());
    assert!(report.expected.is_empty());
    assert!(!report.passed());
    assert_eq!(report.status(), "VALIDATION_ERROR");
}

#[test]
fn json_report_has_the_five_keys() {
    let report = run_bytes("family_3_6_S", &read("family_3_6_S")).unwrap();
    let v = report.to_json(Render { traces: true, decimal: None });
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, ["case", "expected", "flags", "results", "traces"]);
    assert_eq!(v["expected"][0]["status"], "PASS");
}

#[test]
fn text_report_line() {
    let report = run_bytes("family_3_6_S", &read("family_3_6_S")).unwrap();
    let text = report.render_text(Render::default());
    assert!(text.contains("S_X(S) = 67/88 PASS"), "{text}");
    let text = report.render_text(Render { traces: false, decimal: Some(4) });
    assert!(text.contains("S_X(S) = 67/88 (~0.7614) PASS"), "{text}");
}

#[test]
fn bad_references_are_validation_errors() {
    let bytes = edit("family_2_19_S", |v| v["flags"][1]["curve"] = "L99".into());
    assert!(matches!(cases::load_case(&bytes), Err(CaseError::Validation(_))));
    let bytes = edit("family_2_19_S", |v| v["expected"][0]["flag"] = 9.into());
    assert!(matches!(cases::load_case(&bytes), Err(CaseError::Validation(_))));
}
