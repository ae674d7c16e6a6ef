use std::path::PathBuf;
use std::process::{Command, Output};

use permoment::clt::{BursteinReport, ConfigurationCensus, InterpretationReport, PoissonReport, VarianceCoefficients, VincularReport};
use permoment::reproduce::GoldenReport;
use permoment::FactorialCombination;
use serde_json::Value;

fn permoment(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permoment"))
        .args(args)
        .env_remove(permoment::MAX_N_ENV)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = permoment(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    stdout(&out)
}

fn json(args: &[&str]) -> Value {
    let mut v = args.to_vec();
    v.extend(["--format", "json"]);
    serde_json::from_str(&ok(&v)).unwrap()
}

fn schema(name: &str) -> Value {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "docs", "schemas", &format!("{name}.schema.json")]
        .iter()
        .collect();
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

fn assert_valid(name: &str, doc: &Value) {
    let validator = jsonschema::validator_for(&schema(name)).unwrap();
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}\n{doc:#}");
}

/// Parses back into the library type and serializes again unchanged.
fn round_trip<T: serde::de::DeserializeOwned + serde::Serialize>(doc: &Value) {
    let typed: T = serde_json::from_value(doc.clone()).unwrap();
    assert_eq!(&serde_json::to_value(&typed).unwrap(), doc);
}

#[test]
fn count_example() {
    assert_eq!(ok(&["count", "--pattern", "1324", "--perm", "1324"]).trim(), "1");
}

#[test]
fn fit_drops_example() {
    assert_eq!(ok(&["fit", "--stat", "drops", "--auto"]).trim(), "-1/2*(n+1)! + 1/6*(n+2)!");
}

#[test]
fn burstein_example() {
    let v = json(&["clt", "burstein", "--sigma", "21"]);
    assert_eq!(v["a"], 10);
    assert_eq!(v["bound"], 9);
    assert_eq!(v["holds"], true);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["count", "--pattern", "3[1", "--perm", "312"],
        vec!["count", "--pattern", "12"],
        vec!["no-such-command"],
        vec!["aggregate", "--stat", "nonsense", "--n", "3"],
        vec!["aggregate", "--stat", "descents", "--n", "5..3"],
    ] {
        let out = permoment(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("Usage") || !out.stderr.is_empty());
    }
}

#[test]
fn computation_errors_exit_1_with_structured_cause() {
    let out = permoment(&["aggregate", "--stat", "descents", "--n", "20", "--r", "2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_valid("error", &err);
    assert_eq!(err["error"]["kind"], "cap-exceeded");

    let out = permoment(&["aggregate", "--stat", "descents", "--n", "5", "--r", "2", "--method", "fast"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn max_n_flag_and_env() {
    let out = permoment(&["aggregate", "--stat", "descents", "--n", "6", "--r", "2", "--max-n", "5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(env!("CARGO_BIN_EXE_permoment"))
        .args(["aggregate", "--stat", "descents", "--n", "6", "--r", "2"])
        .env(permoment::MAX_N_ENV, "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(ok(&["aggregate", "--stat", "descents", "--n", "6", "--r", "2"]).trim(), "4920");
}

#[test]
fn json_outputs_match_schemas() {
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("count", vec!["count", "--pattern", "3[12];D={2}", "--perm", "31245"]),
        ("occurrences", vec!["occurrences", "--pattern", "21", "--perm", "3142"]),
        ("moments", vec!["aggregate", "--stat", "peakSqSum", "--n", "3..6", "--r", "2"]),
        ("moments", vec!["expect", "--stat", "drops", "--n", "5", "--decimal", "3"]),
        ("moments", vec!["aggregate", "--stat", "cnt:[21];D=1", "--n", "6", "--r", "2", "--method", "census"]),
        ("variance", vec!["variance", "--stat", "adjacency", "--n", "4..6"]),
        ("fit", vec!["fit", "--stat", "drops", "--auto"]),
        ("census", vec!["census", "--pattern", "[21]", "--r", "3"]),
        ("census", vec!["census", "--pattern", "132", "--pattern", "21"]),
        ("corollary", vec!["corollary", "--pattern", "3[12];D=2", "--r", "2", "--n", "3..8"]),
        ("corollary", vec!["corollary", "--pattern", "21", "--r", "2", "--n", "5", "--literal-factorial"]),
        ("closed-form", vec!["closed-form", "euler", "--r", "2", "--n", "4..6"]),
        ("closed-form", vec!["closed-form", "expected-count", "--pattern", "[12]3", "--n", "7"]),
        ("linearity", vec!["linearity", "--pattern", "[21]", "--q1", "3*y1 + y2", "--n", "3"]),
        ("clt-burstein", vec!["clt", "burstein", "--sigma", "132"]),
        ("clt-mean", vec!["clt", "mean", "--sigma", "21"]),
        ("clt-variance", vec!["clt", "variance", "--pattern", "[21]"]),
        ("clt-vincular", vec!["clt", "vincular", "--pattern", "[132]"]),
        ("clt-conjecture", vec!["clt", "conjecture", "--pattern", "[21]3"]),
        ("clt-poisson", vec!["clt", "poisson", "--n", "10,100"]),
    ];
    for (name, args) in cases {
        let doc = json(&args);
        assert_valid(name, &doc);
        match name {
            "fit" => round_trip::<FactorialCombination>(&doc["combination"]),
            "clt-burstein" => round_trip::<BursteinReport>(&doc),
            "clt-mean" => round_trip::<InterpretationReport>(&doc),
            "clt-variance" => round_trip::<VarianceCoefficients>(&doc),
            "clt-vincular" => round_trip::<VincularReport>(&doc),
            "clt-conjecture" => round_trip::<ConfigurationCensus>(&doc),
            "clt-poisson" => {
                for rep in doc["reports"].as_array().unwrap() {
                    round_trip::<PoissonReport>(rep);
                }
            }
            _ => {}
        }
    }
}

#[test]
fn statistic_and_pattern_inputs_accept_files_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"terms":[{"coef":"1","pattern":"[21]","Q1":"y2 - y1","Q2":"1"}]}"#;
    assert_valid("statistic", &serde_json::from_str(spec).unwrap());
    let path = dir.path().join("drops.json");
    std::fs::write(&path, spec).unwrap();
    let from_file = ok(&["fit", "--stat", path.to_str().unwrap(), "--auto"]);
    let inline = ok(&["fit", "--stat", spec, "--auto"]);
    assert_eq!(from_file, inline);
    assert_eq!(inline.trim(), "-1/2*(n+1)! + 1/6*(n+2)!");

    let pattern = r#"{"perm":[3,1,2],"C":[2],"D":[2]}"#;
    assert_valid("pattern", &serde_json::from_str(pattern).unwrap());
    assert_eq!(
        ok(&["count", "--pattern", pattern, "--perm", "31245"]),
        ok(&["count", "--pattern", "3[12];D={2}", "--perm", "31245"])
    );
}

#[test]
fn fit_from_data_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("drops.csv");
    std::fs::write(&csv, "n,value\n2,1\n3,8\n4,60\n5,480\n").unwrap();
    assert_eq!(
        ok(&["fit", "--data", csv.to_str().unwrap(), "--offsets", "1..2"]).trim(),
        "-1/2*(n+1)! + 1/6*(n+2)!"
    );
    let js = dir.path().join("drops.json");
    std::fs::write(&js, r#"[{"n":2,"value":"1"},{"n":3,"value":8},{"n":4,"value":"60"},{"n":5,"value":"480"}]"#).unwrap();
    assert_eq!(
        ok(&["fit", "--data", js.to_str().unwrap(), "--offsets", "-2..2", "--auto"]).trim(),
        "-1/2*(n+1)! + 1/6*(n+2)!"
    );
    let out = permoment(&["fit", "--data", csv.to_str().unwrap(), "--offsets", "0..2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn threads_do_not_change_json() {
    let runs: Vec<Vec<&str>> = vec![
        vec!["aggregate", "--stat", "peakSqSum", "--n", "8", "--r", "3"],
        vec!["expect", "--stat", "doubleAscents", "--n", "8", "--r", "2"],
        vec!["variance", "--stat", "descents", "--n", "7..8"],
        vec!["fit", "--stat", "cnt:[123]", "--r", "2", "--n", "6..10"],
        vec!["census", "--pattern", "[21]", "--r", "3"],
        vec!["clt", "mean", "--sigma", "132"],
    ];
    for args in runs {
        let outputs: Vec<Vec<u8>> = ["1", "8"]
            .iter()
            .map(|t| {
                let mut v = args.clone();
                v.extend(["--threads", t, "--format", "json"]);
                let out = permoment(&v);
                assert_eq!(out.status.code(), Some(0), "{v:?}");
                out.stdout
            })
            .collect();
        assert_eq!(outputs[0], outputs[1], "{args:?}");
    }
}

#[test]
fn config_file_supplies_flags_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "format = \"json\"\n[aggregate]\nstat = \"descents\"\nr = 2\n[clt.burstein]\nsigma = \"132\"\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let v: Value = serde_json::from_str(&ok(&["--config", c, "aggregate", "--n", "6"])).unwrap();
    assert_eq!(v["results"][0]["value"], "4920");
    assert_eq!(ok(&["--config", c, "aggregate", "--n", "6", "--r", "1", "--format", "text"]).trim(), "1800");
    let v: Value = serde_json::from_str(&ok(&["clt", "burstein", "--config", c])).unwrap();
    assert_eq!(v["a"], 114);

    std::fs::write(&cfg, "[count]\nbogus = 1\n").unwrap();
    let out = permoment(&["count", "--pattern", "1", "--perm", "1", "--config", c]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_and_decimal_rendering() {
    let csv = ok(&["census", "--pattern", "[21]", "--r", "2", "--format", "csv"]);
    assert_eq!(csv, "k,c,d,blocks,count\n2,1,0,1,1\n3,2,0,1,2\n4,2,0,2,12\n");
    let text = ok(&["expect", "--stat", "drops", "--n", "3", "--decimal", "4"]);
    assert_eq!(text.trim(), "4/3 (approx. 1.3333)");
    let v = json(&["expect", "--stat", "drops", "--n", "3", "--decimal", "4"]);
    assert_eq!(v["results"][0]["value"], "4/3");
    assert_eq!(v["results"][0]["valueApprox"], "1.3333");
}

#[test]
fn linearity_example_is_40() {
    assert_eq!(ok(&["linearity", "--pattern", "[21]", "--q1", "3*y1 + y2", "--n", "3"]).trim(), "40");
    let out = permoment(&["linearity", "--pattern", "[21]", "--q1", "y1^2", "--n", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reproduce_paper_subsets_and_literal_variant() {
    let small = permoment(&["reproduce-paper", "--max-n", "5", "--format", "json"]);
    let doc: Value = serde_json::from_slice(&small.stdout).unwrap();
    assert_valid("reproduce", &doc);
    round_trip::<GoldenReport>(&doc);
    assert!(doc["skipped"].as_u64().unwrap() > 0);

    let literal = permoment(&["reproduce-paper", "--max-n", "7", "--literal-factorial", "--format", "json"]);
    assert_eq!(literal.status.code(), Some(1));
    let doc: Value = serde_json::from_slice(&literal.stdout).unwrap();
    let failed: Vec<&str> = doc["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["status"] == "fail")
        .map(|r| r["id"].as_str().unwrap())
        .collect();
    assert!(failed.iter().any(|id| id.starts_with("corollary/")), "{failed:?}");
}
