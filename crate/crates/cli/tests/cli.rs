use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pqbbh"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn header(text: &str) -> String {
    text.lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .to_owned()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn moments_has_five_rows_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let status = run(&[
        "moments",
        "--n",
        "6",
        "--grid",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(0));
    let text = read(&out);
    assert!(text.starts_with("# config {"));
    assert_eq!(header(&text), "x,y,moment,closed,direct,abs_diff");
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 5 * 5 * 5);
    for row in rows {
        let diff: f64 = row[5].parse().unwrap();
        assert!(diff < 1e-10, "{row:?}");
    }
}

#[test]
fn converge_table_and_surfaces() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = out.to_str().unwrap();
    let status = run(&[
        "converge",
        "--n-list",
        "4,8",
        "--grid",
        "4",
        "--func",
        "e00,e10",
        "--surfaces",
        "--out",
        o,
    ]);
    assert_eq!(
        status.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let text = read(&out);
    assert_eq!(header(&text), "n,p_n,q_n,function,sup_error");
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 4);
    let e00: Vec<f64> = rows
        .iter()
        .filter(|r| r[3] == "e00")
        .map(|r| r[4].parse().unwrap())
        .collect();
    assert!(e00.iter().all(|&e| e <= 1e-12));
    let e10: Vec<f64> = rows
        .iter()
        .filter(|r| r[3] == "e10")
        .map(|r| r[4].parse().unwrap())
        .collect();
    assert!(e10[1] < e10[0]);

    let surfaces = read(&out.with_extension("surfaces.csv"));
    assert_eq!(header(&surfaces), "n,function,x,y,error");
    assert_eq!(data_rows(&surfaces).len(), 2 * 2 * 16);
}

#[test]
fn surfaces_requires_an_output_file() {
    assert_eq!(run(&["converge", "--surfaces"]).status.code(), Some(2));
}

#[test]
fn zero_shift_rate_output_matches_plain() {
    let plain = run(&["rate", "--n", "8", "--grid", "5"]);
    let explicit = run(&[
        "rate", "--n", "8", "--grid", "5", "--gamma1", "0", "--gamma2", "0", "--beta1", "0",
        "--beta2", "0",
    ]);
    assert_eq!(plain.status.code(), Some(0));
    assert_eq!(plain.stdout, explicit.stdout);
}

#[test]
fn rate_on_the_half_line_has_zero_distances() {
    let out = run(&["rate", "--n", "8", "--grid", "5", "--E", "R+", "--M", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let head = header(&text);
    let cols: Vec<&str> = head.split(',').collect();
    let dx = cols.iter().position(|&c| c == "d_x").unwrap();
    let dy = cols.iter().position(|&c| c == "d_y").unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 25);
    for row in rows {
        assert_eq!(row[dx], "0.0");
        assert_eq!(row[dy], "0.0");
    }
    assert!(text
        .lines()
        .last()
        .unwrap()
        .starts_with("# summary function=f_sum_ratios"));
}

#[test]
fn rate_distances_to_an_interval() {
    let out = run(&["rate", "--n", "8", "--grid", "5", "--E", "[1,2]"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = data_rows(&text);
    let dx = header(&text).split(',').position(|c| c == "d_x").unwrap();
    let at_origin = rows.iter().find(|r| r[1] == "0.0").unwrap();
    assert_eq!(at_origin[dx], "1.0");
}

#[test]
fn verify_passes_by_default_and_reports_injected_faults() {
    let ok = run(&["verify", "--exact-trials", "10", "--float-trials", "10"]);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["exact"].as_array().unwrap().len(), 8);

    let bad = run(&[
        "verify",
        "--exact-trials",
        "10",
        "--float-trials",
        "10",
        "--inject-fault",
        "relation16-sign",
    ]);
    assert_eq!(bad.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    let relation = report["exact"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["identity"] == "relation_16")
        .unwrap();
    assert!(relation["failures"].as_u64().unwrap() > 0);
    assert!(relation["witness"]["input"].is_string());
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(&config, r#"{"n": 4, "grid": 3, "func": ["e10"], "M": 2.0}"#).unwrap();
    let c = config.to_str().unwrap();

    let from_file = String::from_utf8(run(&["rate", "--config", c]).stdout).unwrap();
    assert_eq!(data_rows(&from_file).len(), 9);
    assert!(from_file.contains(r#""n":4"#));

    let overridden =
        String::from_utf8(run(&["rate", "--config", c, "--grid", "4"]).stdout).unwrap();
    assert_eq!(data_rows(&overridden).len(), 16);
    assert!(overridden.contains(r#""M":2.0"#));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(&config, r#"{"degree": 4}"#).unwrap();
    assert_eq!(
        run(&["rate", "--config", config.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn exit_codes_for_bad_input() {
    assert_eq!(run(&["moments", "--p", "0.9"]).status.code(), Some(2));
    assert_eq!(
        run(&["moments", "--p", "0.5", "--q", "0.7"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["rate", "--E", "[2,1]"]).status.code(), Some(2));
    assert_eq!(
        run(&["converge", "--n-list", "16,8"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["rate", "--gamma1", "-1"]).status.code(), Some(2));
    assert_eq!(
        run(&["moments", "--config", "/nonexistent/run.json"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        run(&["moments", "--out", "/nonexistent/dir/m.csv"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn shifted_rate_run_holds_its_bound() {
    let out = run(&[
        "rate",
        "--n",
        "16",
        "--grid",
        "9",
        "--func",
        "f_sum_ratios,e20,f_exp_decay",
        "--gamma1",
        "1",
        "--gamma2",
        "1",
        "--beta1",
        "1",
        "--beta2",
        "1",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines()
            .filter(|l| l.starts_with("# summary") && l.contains(" violations=0 "))
            .count(),
        3
    );
}
