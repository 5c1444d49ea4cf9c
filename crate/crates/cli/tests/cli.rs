use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bivmap::casestudy;
use bivmap::knowledge_base::KnowledgeBase;
use bivmap::recommender::RecommendationReport;

fn bivmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bivmap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn core_data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn casestudy_bundle_is_complete_and_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let out = bivmap(&["casestudy", "--outdir", s(&a)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(
        text.contains("thematic requirements: {Selective, Ordinal}"),
        "{text}"
    );
    assert!(text.contains("uncertainty requirements: {Ordinal, Dissociative}"));
    assert!(text.contains("pairing requirements: {Separable}"));

    assert!(bivmap(&["casestudy", "--outdir", s(&b)]).status.success());
    let first = snapshot(&a);
    assert_eq!(first, snapshot(&b));
    let svgs: Vec<_> = first
        .keys()
        .filter(|k| k.ends_with(".svg"))
        .cloned()
        .collect();
    assert_eq!(svgs.len(), 6);

    let scheme1: RecommendationReport = RecommendationReport::from_json(
        std::str::from_utf8(&first["report-scheme1.json"]).unwrap(),
    )
    .unwrap();
    assert_eq!(
        serde_json::to_value(&scheme1.request.thematic.binning).unwrap(),
        serde_json::json!({"kind": "Threshold", "edges": [837.0, 2204.0]})
    );
    assert_eq!(
        serde_json::to_value(&scheme1.request.uncertainty.binning).unwrap(),
        serde_json::json!({"kind": "Continuous"})
    );
    let scheme3: RecommendationReport = RecommendationReport::from_json(
        std::str::from_utf8(&first["report-scheme3.json"]).unwrap(),
    )
    .unwrap();
    assert_eq!(
        serde_json::to_value(&scheme3.request.uncertainty.binning).unwrap(),
        serde_json::json!({"kind": "Quantile", "k": 3})
    );
}

#[test]
fn casestudy_unwritable_outdir_is_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("occupied");
    fs::write(&file, "x").unwrap();
    let out = bivmap(&["casestudy", "--outdir", s(&file.join("sub"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn recommend_summary_and_weights() {
    let request = core_data("case_study_request.json");
    let out = bivmap(&["recommend", "--request", &request]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for p in [
        "(Value, Size)",
        "(Value, Blur)",
        "(Size, Transparency)",
        "(Size, Value)",
    ] {
        assert!(text.contains(p), "{p} missing from\n{text}");
    }

    let tmp = tempfile::tempdir().unwrap();
    let report = tmp.path().join("report.json");
    let out = bivmap(&[
        "recommend",
        "--request",
        &request,
        "--weights",
        "0,0,1",
        "--out",
        s(&report),
    ]);
    assert!(out.status.success());
    let parsed = RecommendationReport::from_json(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed.ranked[0].pairing.uncertainty.name(), "Saturation");

    // reruns are byte-identical
    let again = tmp.path().join("again.json");
    bivmap(&[
        "recommend",
        "--request",
        &request,
        "--weights",
        "0,0,1",
        "--out",
        s(&again),
    ]);
    assert_eq!(fs::read(&report).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn recommend_exit_codes() {
    assert_eq!(
        bivmap(&["recommend", "--request", "/nonexistent/request.json"])
            .status
            .code(),
        Some(2)
    );
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    fs::write(
        &bad,
        casestudy::REQUEST_JSON.replacen("\"Locate\"", "\"Peek\"", 1),
    )
    .unwrap();
    let out = bivmap(&["recommend", "--request", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tasks[1].task"));
    let weights = bivmap(&[
        "recommend",
        "--request",
        &core_data("case_study_request.json"),
        "--weights",
        "1,2",
    ]);
    assert_eq!(weights.status.code(), Some(1));
}

#[test]
fn ensemble_renders_all_schemes() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &PathBuf| {
        bivmap(&[
            "ensemble",
            "--data",
            &core_data("case_study_fixture.geojson"),
            "--join-key",
            "subcatchment",
            "--cv",
            "CV=TSS_mean/TSS_sd",
            "--request",
            &core_data("case_study_request.json"),
            "--outdir",
            s(dir),
        ])
    };
    let a = tmp.path().join("a");
    let out = run(&a);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let files = snapshot(&a);
    for name in [
        "scheme1-size-transparency.svg",
        "scheme2-value-size.svg",
        "scheme3-value-blur.svg",
        "scheme3-value-size.svg",
        "scheme3-size-value.svg",
        "manifest.json",
    ] {
        assert!(
            files.contains_key(name),
            "{name} missing: {:?}",
            files.keys()
        );
    }
    assert!(files.keys().filter(|k| k.ends_with(".svg")).count() >= 6);
    let b = tmp.path().join("b");
    assert!(run(&b).status.success());
    assert_eq!(files, snapshot(&b));
}

#[test]
fn ensemble_with_conflict_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let request = tmp.path().join("conflict.json");
    fs::write(
        &request,
        r#"{
            "implantation": "Area",
            "thematic": {"name": "TSS_mean", "binning": {"kind": "Quantile", "k": 3}},
            "uncertainty": {"name": "TSS_sd", "binning": {"kind": "Quantile", "k": 3}},
            "tasks": [
                {"task": "Isolate", "target": "Both"},
                {"task": "Correlate", "target": "Both"}
            ]
        }"#,
    )
    .unwrap();
    let out = bivmap(&[
        "ensemble",
        "--data",
        &core_data("case_study_fixture.geojson"),
        "--request",
        s(&request),
        "--outdir",
        s(&tmp.path().join("out")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("conflict"));
}

#[test]
fn tables_round_trip_and_checksum() {
    let tmp = tempfile::tempdir().unwrap();
    let dumped = tmp.path().join("rules.toml");
    assert!(bivmap(&["tables", "--out", s(&dumped)]).status.success());
    let text = fs::read_to_string(&dumped).unwrap();
    let reloaded = KnowledgeBase::from_toml_str(&text).unwrap();
    assert_eq!(reloaded.checksum(), KnowledgeBase::bundled().checksum());

    // reloading through --rules gives an identical dump
    let second = tmp.path().join("rules2.toml");
    assert!(
        bivmap(&["--rules", s(&dumped), "tables", "--out", s(&second)])
            .status
            .success()
    );
    assert_eq!(text, fs::read_to_string(&second).unwrap());

    // the report checksum follows the table file
    let request = core_data("case_study_request.json");
    let report_with = |rules: &Path, out: &Path| {
        assert!(bivmap(&[
            "--rules",
            s(rules),
            "recommend",
            "--request",
            &request,
            "--out",
            s(out)
        ])
        .status
        .success());
        RecommendationReport::from_json(&fs::read_to_string(out).unwrap())
            .unwrap()
            .knowledge_base_checksum
    };
    let same = report_with(&dumped, &tmp.path().join("r1.json"));
    assert_eq!(same, KnowledgeBase::bundled().checksum());
    let edited = tmp.path().join("edited.toml");
    fs::write(&edited, text.replacen("revision = 1", "revision = 2", 1)).unwrap();
    let changed = report_with(&edited, &tmp.path().join("r2.json"));
    assert_ne!(changed, same);

    let json = bivmap(&["tables", "--table", "tasks"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 15);
    assert_eq!(
        bivmap(&["tables", "--table", "colours"]).status.code(),
        Some(1)
    );
}

#[test]
fn render_with_config_and_legend() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("spec.json");
    fs::write(
        &spec,
        r#"{
            "pairing": {"thematic": "Value", "uncertainty": "Size"},
            "thematic": {"attribute": "TSS_mean", "binning": {"kind": "Quantile", "k": 5}},
            "uncertainty": {"attribute": "CV", "binning": {"kind": "Quantile", "k": 5}},
            "coefficient_of_variation": {"name": "CV", "mean": "TSS_mean", "sd": "TSS_sd"}
        }"#,
    )
    .unwrap();
    let config = tmp.path().join("bivmap.toml");
    fs::write(
        &config,
        "[palette]\nhue = 210.0\n\n[canvas]\nwidth = 800.0\nheight = 500.0\n",
    )
    .unwrap();
    let map = tmp.path().join("map.svg");
    let legend = tmp.path().join("legend.svg");
    let out = bivmap(&[
        "--config",
        s(&config),
        "render",
        "--spec",
        s(&spec),
        "--data",
        &core_data("case_study_fixture.geojson"),
        "--join-key",
        "subcatchment",
        "--out",
        s(&map),
        "--legend",
        s(&legend),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let svg = fs::read_to_string(&map).unwrap();
    assert!(
        svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1100\" height=\"500\""),
        "{}",
        &svg[..120]
    );
    assert_eq!(svg.matches("class=\"feature\"").count(), 40);
    assert_eq!(
        fs::read_to_string(&legend)
            .unwrap()
            .matches("class=\"swatch\"")
            .count(),
        25
    );

    let missing = bivmap(&["render", "--spec", s(&spec), "--out", s(&map)]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn bin_command() {
    let out = bivmap(&[
        "bin",
        "--data",
        &core_data("case_study_fixture.geojson"),
        "--join-key",
        "subcatchment",
        "--attribute",
        "TSS_mean",
        "--scheme",
        "threshold:837,2204",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["classes"]["n_bins"], 3);
    let bad = bivmap(&[
        "bin",
        "--data",
        &core_data("case_study_fixture.geojson"),
        "--attribute",
        "TSS_mean",
        "--scheme",
        "threshold:2204,837",
    ]);
    assert_eq!(bad.status.code(), Some(1));
}
