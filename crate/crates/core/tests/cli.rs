use std::process::{Command, Output};

use ftsmm::search::{c11_mixed_catalog, cross_equations, output_equations, RelationDocument, RelationSet};

fn ftsmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftsmm")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn search_writes_all_catalog_relations() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rel.json");
    let o = ftsmm(&["search", "--scheme", "hybrid_sw", "--k-max", "14", "-o", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("C21: 15 local relations"), "{text}");
    assert!(text.contains("57 distinct"), "{text}");
    let doc: RelationDocument = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let set = RelationSet::from_document(&doc).unwrap();
    for r in output_equations().iter().chain(&cross_equations()).chain(&c11_mixed_catalog()) {
        assert!(set.contains(r), "{}", r.expression(&set.names));
    }
}

#[test]
fn search_single_algorithm_scheme() {
    let o = ftsmm(&["search", "--scheme", "strassen_1copy", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for expr in ["+S1+S4-S5+S7", "+S3+S5", "+S2+S4", "+S1-S2+S3+S6"] {
        assert!(text.contains(expr), "{text}");
    }
    assert!(!text.contains('W'));
}

#[test]
fn analyze_reports_spot_value_and_node_count() {
    let o = ftsmm(&["analyze", "--scheme", "strassen_1copy", "--pe", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("p_f_theory(0.1) = 0.521703"));
    let o = ftsmm(&["analyze", "--scheme", "hybrid_sw_2psmm", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let json: serde_json::Value = serde_json::from_str(&text[text.find('{').unwrap()..]).unwrap();
    assert_eq!(json["schemes"][0]["m"], 16);
}

#[test]
fn analyze_replication_fc_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let fc = dir.path().join("fc.csv");
    let census = dir.path().join("census.csv");
    let o = ftsmm(&[
        "analyze",
        "--scheme",
        "strassen_2copy",
        "-o",
        fc.to_str().unwrap(),
        "--census-output",
        census.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let fc = std::fs::read_to_string(fc).unwrap();
    assert!(fc.contains("strassen_2copy,3,84,364"), "{fc}");
    let census = std::fs::read_to_string(census).unwrap();
    assert!(census.starts_with("scheme,k,total_patterns,undecodable_count\n"));
    assert!(census.contains("strassen_2copy,2,91,7"));
}

#[test]
fn simulate_is_deterministic_with_ordering_footer() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let o = ftsmm(&[
            "simulate",
            "--trials",
            "3000",
            "--seed",
            "7",
            "--pe-grid",
            "0.01:0.3:4",
            "-o",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        (std::fs::read_to_string(path).unwrap(), stdout(&o))
    };
    let (a, footer) = run("a.csv");
    let (b, _) = run("b.csv");
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 1 + 6 * 4);
    assert!(footer.contains("strassen_2copy at every grid point: holds"), "{footer}");
}

#[test]
fn run_examples_and_exit_codes() {
    let o = ftsmm(&["run", "--scheme", "hybrid_sw", "--fail", "S2,S5,W2,W5", "--size", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["decoded"], true);
    assert_eq!(r["verification"]["matches"], true);

    let o = ftsmm(&["run", "--scheme", "hybrid_sw", "--fail", "S3,W5"]);
    assert_eq!(o.status.code(), Some(3));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["decoded"], false);
    let o = ftsmm(&["run", "--scheme", "hybrid_sw", "--fail", "S3,W5", "--allow-undecodable"]);
    assert_eq!(o.status.code(), Some(0));

    let o = ftsmm(&["run", "--scheme", "hybrid_sw_2psmm", "--fail", "S3,W5"]);
    assert_eq!(o.status.code(), Some(0));

    let o = ftsmm(&["run", "--scheme", "hybrid_sw", "--fail", "S2,S5,W2,W5", "--decoder", "peel"]);
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["plan"].as_array().unwrap().len(), 8);
}

#[test]
fn run_is_replayable() {
    let args = ["run", "--scheme", "hybrid_sw_1psmm", "--pe", "0.3", "--seed", "42", "--allow-undecodable"];
    assert_eq!(ftsmm(&args).stdout, ftsmm(&args).stdout);
}

#[test]
fn batch_mode_writes_csv() {
    let o = ftsmm(&[
        "run",
        "--scheme",
        "hybrid_sw_2psmm",
        "--pe",
        "0.1",
        "--trials",
        "200",
        "--size",
        "2",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("trial,pattern_hex,decoded,verified\n"));
    assert_eq!(text.lines().count(), 201);
}

#[test]
fn usage_errors() {
    assert_eq!(ftsmm(&["run", "--scheme", "strassen_4copy"]).status.code(), Some(1));
    assert_eq!(ftsmm(&["run", "--fail", "S9"]).status.code(), Some(1));
    assert_eq!(ftsmm(&["simulate", "--pe-grid", "0.5:0.1"]).status.code(), Some(1));
    assert_eq!(ftsmm(&["analyze", "--pe", "1.5"]).status.code(), Some(1));
    assert_eq!(ftsmm(&["bogus"]).status.code(), Some(1));
    assert_eq!(ftsmm(&["--help"]).status.code(), Some(0));
}
