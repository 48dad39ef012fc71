use std::io::Write;
use std::process::{Command, Output, Stdio};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data");

fn qmon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmon"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data(file: &str) -> String {
    format!("{DATA}/{file}")
}

#[test]
fn plan_reports_capacity() {
    let o = qmon(&["plan"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("capacity: 48 users"));
    let o = qmon(&["plan", "--ans", "4"]);
    assert!(stdout(&o).contains("capacity: 64 users"));
    let o = qmon(&[
        "plan",
        "--plan",
        &data("plan-prototype.json"),
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["capacity"], 48);
    assert_eq!(v["addressable_users"], 44);
}

#[test]
fn overlapping_plan_is_an_input_error() {
    let o = qmon(&[
        "plan",
        "--quantum-band",
        "1280:1400",
        "--service-band",
        "1390:1450",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid plan"));
}

#[test]
fn scenario_budget_totals() {
    for (scenario, q, s) in [
        ("10km,2oadm", "18.3", "17.5"),
        ("15km,3oadm", "24.7", "23.2"),
        ("20km,4oadm", "31.1", "28.9"),
        ("30km,5oadm", "39.1", "35.5"),
    ] {
        let out = stdout(&qmon(&["budget", "--scenario", scenario]));
        assert!(
            out.contains(&format!("total quantum: {q} dB")),
            "{scenario}: {out}"
        );
        assert!(
            out.contains(&format!("total service: {s} dB")),
            "{scenario}: {out}"
        );
    }
}

#[test]
fn budget_csv_header() {
    let out = stdout(&qmon(&[
        "--format",
        "csv",
        "budget",
        "--scenario",
        "15km,3oadm",
    ]));
    assert_eq!(
        out.lines().next(),
        Some("element,kind,band,loss_db,cumulative_db")
    );
}

#[test]
fn prototype_budget_with_measured_catalog() {
    let out = stdout(&qmon(&[
        "--catalog",
        "prototype-measured",
        "budget",
        "--topology",
        "prototype",
    ]));
    assert!(out.contains("total quantum: 23.2 dB"), "{out}");
    assert!(out.contains("total service: 21.0 dB"), "{out}");
    assert!(out.contains("-34.0 dBm"), "{out}");
}

#[test]
fn qber_at_anchor_loads() {
    let row = |args: &[&str]| -> Vec<String> {
        let mut full = vec!["--format", "csv", "qber", "--loss-db", "23.15"];
        full.extend_from_slice(args);
        let out = stdout(&qmon(&full));
        let header: Vec<&str> = out.lines().next().unwrap().split(',').collect();
        let i = header.iter().position(|h| *h == "qber_pct").unwrap();
        out.lines()
            .skip(1)
            .map(|l| l.split(',').nth(i).unwrap().to_string())
            .collect()
    };
    assert_eq!(row(&["--channels", "0"]), ["4.37"]);
    assert_eq!(
        row(&["--channels", "1", "--direction", "counter"]),
        ["5.10"]
    );
    assert_eq!(row(&["--channels", "32"]), ["5.74"]);
}

#[test]
fn qber_sweep_is_monotone() {
    let out = stdout(&qmon(&[
        "--format",
        "csv",
        "qber",
        "--scenario",
        "15km,3oadm",
        "--channels",
        "8",
        "--sweep=-30:2:1",
    ]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 34);
    let i = lines[0].split(',').position(|h| h == "qber_pct").unwrap();
    let q: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(i).unwrap().parse().unwrap())
        .collect();
    assert!(q.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn qber_exit_codes() {
    assert_eq!(
        qmon(&["qber", "--scenario", "15km,3oadm"]).status.code(),
        Some(0)
    );
    assert_eq!(
        qmon(&["qber", "--scenario", "20km,4oadm"]).status.code(),
        Some(1)
    );
    assert_eq!(
        qmon(&["qber", "--scenario", "15km,1oadm"]).status.code(),
        Some(2)
    );
    assert_eq!(
        qmon(&["qber", "--no-default-anchors"]).status.code(),
        Some(3)
    );
}

#[test]
fn validate_reports_conflicts() {
    let run = |file: &str| {
        qmon(&[
            "validate",
            "--topology",
            "three-an-switched",
            "--requests",
            &data(file),
        ])
    };
    assert_eq!(run("requests-simultaneous.json").status.code(), Some(0));
    let o = run("requests-same-receiver.json");
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("channel-collision"));
    let o = run("requests-return.json");
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("return-vs-service"));
}

#[test]
fn validate_reads_requests_from_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_qmon"))
        .args([
            "--format",
            "json",
            "validate",
            "--topology",
            "prototype",
            "--requests",
            "-",
        ])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(br#"[{"emitter": "alice", "receiver": "bob"}]"#)
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["conflicts"].as_array().unwrap().len(), 0);
}

#[test]
fn resolve_errors_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("self.json");
    std::fs::write(
        &path,
        r#"{"requests": [{"emitter": "alice", "receiver": "alice"}]}"#,
    )
    .unwrap();
    let o = qmon(&[
        "resolve",
        "--topology",
        "prototype",
        "--requests",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = qmon(&[
        "resolve",
        "--topology",
        "prototype",
        "--requests",
        "/nonexistent/requests.json",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn resolve_shows_return_contention() {
    let out = stdout(&qmon(&[
        "--format",
        "csv",
        "resolve",
        "--topology",
        "three-an-switched",
        "--requests",
        &data("requests-return.json"),
    ]));
    let mut lines = out.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(col("receiver"), "r2");
    assert_eq!(col("return_contention"), "true");
}

#[test]
fn capacity_reports_plan_capacity() {
    let out = stdout(&qmon(&["capacity"]));
    assert!(out.contains("capacity: 48 users"), "{out}");
}
