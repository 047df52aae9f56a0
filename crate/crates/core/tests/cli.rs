use std::fs;
use std::process::Command;

use bps_core::cli::run;
use serde_json::{json, Value};
use tempfile::TempDir;

struct Outcome {
    code: i32,
    out: String,
    err: String,
}

fn bps(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("bps").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Outcome {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn ok_json(args: &[&str]) -> Value {
    let o = bps(args);
    assert_eq!(o.code, 0, "{args:?}: {}", o.err);
    serde_json::from_str(&o.out).unwrap()
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap().to_string())
        .collect()
}

#[test]
fn yz_csv_rows() {
    let o = bps(&["k3", "yz", "--hmax", "3", "--format", "csv"]);
    assert_eq!(o.code, 0);
    assert_eq!(o.out, "h,r_0h\n0,1\n1,24\n2,324\n3,3200\n");
}

#[test]
fn recompose_then_decompose_through_files() {
    let dir = TempDir::new().unwrap();
    let z = dir.path().join("z.json");
    let z_path = z.to_str().unwrap();
    let o = bps(&[
        "bps",
        "recompose",
        "--g",
        "1",
        "--n",
        "1,-1",
        "--order",
        "4",
        "--out",
        z_path,
    ]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert!(o.out.is_empty());
    let written: Value = serde_json::from_str(&fs::read_to_string(&z).unwrap()).unwrap();
    assert_eq!(written["g"], json!(1));
    assert_eq!(
        strings(&written["series"]["coeffs"]),
        ["-1", "1", "-2", "3", "-4"]
    );

    let v = ok_json(&["bps", "decompose", "--in", z_path]);
    assert_eq!(v, json!({"g": 1, "n": ["1", "-1"]}));
    let report = ok_json(&["bps", "validate", "--in", z_path]);
    assert_eq!(report["pass"], json!(true));
}

#[test]
fn not_bps_form_exits_one() {
    let o = bps(&["bps", "decompose", "--coeffs", "1,1", "--g", "1"]);
    assert_eq!(o.code, 1);
    assert!(o.err.contains("NotBpsForm"), "{}", o.err);
    assert!(o.out.is_empty());
}

#[test]
fn validate_reports_failing_identity() {
    let o = bps(&[
        "bps", "validate", "--coeffs", "1,1", "--g", "1", "--order", "4",
    ]);
    assert_eq!(o.code, 1);
    let report: Value = serde_json::from_str(&o.out).unwrap();
    assert_eq!(report["pass"], json!(false));
    assert_eq!(report["identity_g0"]["first_failure"], json!(2));
    assert!(
        o.err.contains("identity_g0") && o.err.contains("n = 2"),
        "{}",
        o.err
    );

    let r = ok_json(&[
        "bps",
        "validate",
        "--coeffs",
        "1,2,1",
        "--min-exp",
        "-1",
        "--g",
        "2",
    ]);
    assert_eq!(r["pass"], json!(true));
    assert_eq!(r["n0"], json!("0"));
}

#[test]
fn bps_examples() {
    let v = ok_json(&[
        "bps",
        "decompose",
        "--coeffs",
        "1,2,1",
        "--min-exp",
        "-1",
        "--g",
        "2",
    ]);
    assert_eq!(v["n"], json!(["0", "0", "1"]));
    // default genus from the lowest exponent
    let v = ok_json(&["bps", "decompose", "--coeffs", "1,2,1", "--min-exp", "-1"]);
    assert_eq!(v["g"], json!(2));
    let z = ok_json(&["bps", "recompose", "--n", "1", "--order", "4"]);
    assert_eq!(strings(&z["series"]["coeffs"]), ["1", "-2", "3", "-4"]);
    assert_eq!(z["series"]["min_exp"], json!(1));
    let o = bps(&[
        "bps",
        "recompose",
        "--n",
        "1,-1",
        "--order",
        "2",
        "--format",
        "csv",
    ]);
    assert_eq!(o.out, "n,p_n\n0,-1\n1,1\n2,-2\n");
}

#[test]
fn hilbert_examples() {
    let v = ok_json(&[
        "hilb",
        "decompose",
        "--coeffs",
        "1,1,2,3,4,5,6",
        "--g",
        "1",
        "--window",
        "6",
    ]);
    assert_eq!(v["n"], json!(["1", "1"]));
    let v = ok_json(&["hilb", "decompose", "--coeffs", "1,-2,1", "--g", "2"]);
    assert_eq!(v["n"], json!(["0", "0", "1"]));
    let o = bps(&[
        "hilb",
        "decompose",
        "--coeffs",
        "1,1",
        "--g",
        "1",
        "--window",
        "1",
    ]);
    assert_eq!(o.code, 3, "{}", o.err);
}

#[test]
fn curve_examples() {
    let r = ok_json(&[
        "curve",
        "nonsingular",
        "--g",
        "0",
        "--chi",
        "1",
        "--order",
        "4",
    ]);
    assert_eq!(r["bps"]["n"], json!(["1"]));
    assert_eq!(
        strings(&r["series"]["series"]["coeffs"]),
        ["1", "-2", "3", "-4"]
    );

    let v = ok_json(&["curve", "nodal", "--g", "1", "--r", "1", "--chi", "=3;0=-7"]);
    assert_eq!(v["n"], json!(["-7", "-3"]));
    let o = bps(&[
        "curve",
        "nodal",
        "--g",
        "2",
        "--r",
        "2",
        "--chi",
        "=1;0=1;1=1;0,1=1",
        "--format",
        "csv",
    ]);
    assert_eq!(o.out, "r,n_r\n0,1\n1,-2\n2,1\n");

    let z = ok_json(&[
        "curve",
        "nodal-series",
        "--g",
        "1",
        "--r",
        "1",
        "--chi",
        "=1;0=1",
        "--order",
        "3",
    ]);
    assert_eq!(strings(&z["series"]["coeffs"]), ["-1", "1", "-2", "3"]);

    let v = ok_json(&["curve", "qseries", "--germ", "node"]);
    assert_eq!(v["n"], json!(["-1", "1"]));
    let v = ok_json(&["curve", "qseries", "--germ", "smooth"]);
    assert_eq!(v["n"], json!(["1"]));

    let z = ok_json(&[
        "curve", "stratify", "--germ", "node", "--e-c0", "-2", "--g", "2", "--order", "6",
    ]);
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("s.json");
    fs::write(&p, z.to_string()).unwrap();
    let v = ok_json(&["bps", "decompose", "--in", p.to_str().unwrap()]);
    assert_eq!(v["n"], json!(["0", "-1", "1"]));

    let o = bps(&[
        "curve", "stratify", "--germ", "node", "--e-c0", "1", "--g", "1", "--order", "4",
    ]);
    assert_eq!(o.code, 3);
    assert!(o.err.contains("MilnorMismatch"));

    assert_eq!(
        ok_json(&["curve", "sym-euler", "--e", "2", "--k", "3"])["value"],
        json!("4")
    );
    assert_eq!(
        ok_json(&["curve", "milnor", "--g", "1", "--e-c0", "1"])["mu"],
        json!(-1)
    );
}

#[test]
fn curve_inputs_from_files() {
    let dir = TempDir::new().unwrap();
    let c = dir.path().join("c.json");
    fs::write(&c, r#"{"g": 2, "r": 1, "chi": {"": 2, "0": "5"}}"#).unwrap();
    let v = ok_json(&["curve", "nodal", "--in", c.to_str().unwrap()]);
    assert_eq!(v["n"], json!(["0", "-5", "2"]));

    let germ = dir.path().join("germ.json");
    fs::write(
        &germ,
        r#"{"delta": 1, "mu": 0, "q_euler": {"min_exp": 0, "order": 4, "coeffs": [1, 1, 2, 3, 4]}}"#,
    )
    .unwrap();
    let v = ok_json(&["curve", "qseries", "--in", germ.to_str().unwrap()]);
    assert_eq!(v["n"], json!(["-1", "1"]));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"g": 2, "r": 1, "chi": {"": 2}}"#).unwrap();
    assert_eq!(
        bps(&["curve", "nodal", "--in", bad.to_str().unwrap()]).code,
        2
    );
    fs::write(&bad, "not json").unwrap();
    assert_eq!(
        bps(&["curve", "nodal", "--in", bad.to_str().unwrap()]).code,
        2
    );
    assert_eq!(
        bps(&["curve", "nodal", "--in", "/nonexistent/file.json"]).code,
        2
    );
}

#[test]
fn k3_examples() {
    let t = ok_json(&["k3", "kkv", "--hmax", "2"]);
    assert_eq!(t["h_max"], json!(2));
    assert_eq!(t["rows"][2], json!({"g": 1, "h": 1, "r": "-2"}));
    let o = bps(&["k3", "kkv", "--hmax", "1", "--format", "csv"]);
    assert_eq!(o.out, "g,h,r_gh\n0,0,1\n0,1,24\n1,1,-2\n");

    let p = ok_json(&["k3", "kkv-product", "--hmax", "1"]);
    assert_eq!(
        p["coeffs"][1]["terms"],
        json!({"-1": "2", "0": "20", "1": "2"})
    );

    let dir = TempDir::new().unwrap();
    let asym = dir.path().join("asym.json");
    fs::write(
        &asym,
        r#"{"order_q": 1, "coeffs": [{"terms": {"0": 1}}, {"terms": {"1": 2, "0": 20}}]}"#,
    )
    .unwrap();
    let o = bps(&["k3", "kkv", "--in", asym.to_str().unwrap()]);
    assert_eq!(o.code, 1, "{}", o.err);

    let ky = ok_json(&["k3", "ky", "--hmax", "1", "--yorder", "3"]);
    assert_eq!(ky["y_order"], json!(3));
    let o = bps(&[
        "k3", "ky", "--hmax", "0", "--yorder", "3", "--format", "csv",
    ]);
    assert_eq!(o.out, "h,n,e\n0,1,1\n0,2,2\n0,3,3\n");
    assert_eq!(bps(&["k3", "ky", "--hmax", "1", "--yorder", "0"]).code, 3);

    let r = ok_json(&["k3", "signed-check", "--hmax", "3", "--yorder", "10"]);
    assert_eq!(r["pass"], json!(true));
}

#[test]
fn series_utilities() {
    let s = ok_json(&["series", "eta", "--hmax", "3"]);
    assert_eq!(strings(&s["coeffs"]), ["1", "24", "324", "3200"]);
    let s = ok_json(&["series", "eta", "--hmax", "5", "--exponent", "1"]);
    assert_eq!(strings(&s["coeffs"]), ["1", "-1", "-1", "0", "0", "1"]);
    let s = ok_json(&["series", "binom", "--e", "-2", "--order", "3"]);
    assert_eq!(strings(&s["coeffs"]), ["1", "-2", "3", "-4"]);
    let s = ok_json(&[
        "series", "binom", "--e", "2", "--sign", "minus", "--order", "3",
    ]);
    assert_eq!(strings(&s["coeffs"]), ["1", "-2", "1", "0"]);

    let s = ok_json(&["series", "inverse", "--coeffs", "0,1,1", "--order", "3"]);
    assert_eq!(s["min_exp"], json!(-1));
    assert_eq!(strings(&s["coeffs"]), ["1", "-1", "1", "-1", "1"]);
    let o = bps(&["series", "inverse", "--coeffs", "2,1", "--order", "3"]);
    assert_eq!(o.code, 3);

    let s = ok_json(&[
        "series",
        "mul",
        "--coeffs",
        "1,1",
        "--coeffs2",
        "1,-1",
        "--window",
        "3",
    ]);
    assert_eq!(strings(&s["coeffs"]), ["1", "0", "-1", "0"]);
    let s = ok_json(&[
        "series",
        "add",
        "--coeffs",
        "1,1",
        "--coeffs2",
        "1,-1",
        "--min-exp2",
        "-1",
        "--window",
        "2",
    ]);
    assert_eq!(s["min_exp"], json!(-1));
    assert_eq!(strings(&s["coeffs"]), ["1", "0", "1", "0"]);
    let s = ok_json(&["series", "negate", "--coeffs", "1,2,3", "--window", "2"]);
    assert_eq!(strings(&s["coeffs"]), ["1", "-2", "3"]);

    let b = ok_json(&[
        "series",
        "product",
        "--factors",
        "0:-20,1:-2,-1:-2",
        "--order",
        "1",
    ]);
    assert_eq!(
        b["coeffs"][1]["terms"],
        json!({"-1": "2", "0": "20", "1": "2"})
    );
    let i = ok_json(&["series", "involution", "--terms", "1:2,0:20,-1:2"]);
    assert_eq!(i["symmetric"], json!(true));
    let i = ok_json(&["series", "involution", "--terms", "1:2,0:20"]);
    assert_eq!(i["symmetric"], json!(false));

    let o = bps(&["series", "eta", "--hmax", "2", "--format", "csv"]);
    assert_eq!(o.out, "n,coeff\n0,1\n1,24\n2,324\n");
}

#[test]
fn parse_errors_exit_two() {
    assert_eq!(bps(&[]).code, 2);
    assert_eq!(bps(&["bogus"]).code, 2);
    assert_eq!(bps(&["k3", "yz"]).code, 2);
    assert_eq!(bps(&["k3", "yz", "--hmax", "x"]).code, 2);
    assert_eq!(bps(&["bps", "decompose", "--coeffs", "1,a"]).code, 2);
    assert_eq!(bps(&["bps", "decompose"]).code, 2);
    assert_eq!(
        bps(&["bps", "recompose", "--g", "3", "--n", "1,2", "--order", "4"]).code,
        2
    );
    assert_eq!(
        bps(&[
            "k3",
            "signed-check",
            "--hmax",
            "1",
            "--yorder",
            "3",
            "--format",
            "csv"
        ])
        .code,
        2
    );
    assert_eq!(
        bps(&["curve", "nodal", "--g", "1", "--r", "1", "--chi", "=1"]).code,
        2
    );
    let help = bps(&["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.out.contains("Usage"));
}

#[test]
fn precondition_errors_exit_three() {
    let o = bps(&["bps", "recompose", "--n", "1,2,3", "--order", "-3"]);
    assert_eq!(o.code, 3);
    assert!(o.err.contains("InsufficientWindow"), "{}", o.err);
    let o = bps(&[
        "bps",
        "decompose",
        "--coeffs",
        "1",
        "--min-exp",
        "-2",
        "--g",
        "3",
        "--window",
        "-1",
    ]);
    assert_eq!(o.code, 3);
}

#[test]
fn json_output_is_deterministic_and_sorted() {
    let a = bps(&["k3", "kkv", "--hmax", "4"]).out;
    let b = bps(&["k3", "kkv", "--hmax", "4"]).out;
    assert_eq!(a, b);
    let o = bps(&[
        "bps",
        "validate",
        "--coeffs",
        "1,2,1",
        "--min-exp",
        "-1",
        "--g",
        "2",
    ])
    .out;
    let keys: Vec<&str> = o
        .lines()
        .filter(|l| l.starts_with("  \""))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_bps");
    let out = Command::new(exe)
        .args(["k3", "yz", "--hmax", "2", "--format", "csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "h,r_0h\n0,1\n1,24\n2,324\n"
    );
    let out = Command::new(exe)
        .args(["bps", "decompose", "--coeffs", "1,1", "--g", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("NotBpsForm"));
    let out = Command::new(exe).arg("nonsense").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(exe)
        .args([
            "curve", "stratify", "--germ", "node", "--e-c0", "1", "--g", "1", "--order", "3",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}
