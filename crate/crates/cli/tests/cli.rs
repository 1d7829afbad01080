use assert_cmd::Command;
use serde_json::Value;

fn heegner() -> Command {
    Command::cargo_bin("heegner").unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = heegner().args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn trace_report() {
    let v = json(&["trace", "--p", "3", "--d", "3", "--format", "json"]);
    assert_eq!(v["recognized"], "-14");
    assert_eq!(v["crosscheck"], "-14");
    assert_eq!(v["status"], "ok");
}

#[test]
fn twisted_trace_report() {
    let v = json(&["twisted-trace", "--p", "2", "--D", "17", "--d", "4"]);
    assert_eq!(v["recognized"], "-204800");
    assert_eq!(v["inputs"]["D"], 17);
}

#[test]
fn product_reports() {
    let v = json(&["verify", "product", "--p", "2", "--d", "7", "--qtrunc", "15", "--bits", "256"]);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["crosscheck"]["log_q"], "-1");
    let v = json(&["verify", "twisted-product", "--p", "3", "--D", "13", "--d", "3", "--json"]);
    assert_eq!(v["crosscheck"]["exponents"][1], "133056");
}

#[test]
fn csv_columns() {
    let out = heegner().args(["trace", "--p", "2", "--d", "4", "--format", "csv"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "kind,p,d,D,m,beta,bits,numeric,recognized,crosscheck,residual,status");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[8], "-52");
    assert_eq!(row[11], "ok");
}

#[test]
fn classes_text() {
    let out = heegner().args(["classes", "--p", "2", "--d", "16", "--format", "text"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("Q_{16,2,0}/Gamma0(2): 3 classes"));
}

#[test]
fn reproduce_table_passes() {
    let out = heegner().args(["reproduce-paper", "--p", "2", "--format", "text", "--jobs", "2"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("f_{4,2} coefficients"));
    assert!(text.contains("twisted trace (2,8,7)"));
    assert!(text.contains("classes (16,2,0)"));
}

#[test]
fn output_is_deterministic() {
    let run = || heegner().args(["reproduce-paper", "--format", "csv", "--jobs", "1"]).output().unwrap().stdout;
    assert_eq!(run(), run());
}

#[test]
fn usage_errors_exit_2() {
    heegner().args(["trace", "--p", "3", "--d", "3", "--bogus"]).assert().code(2);
    heegner().args(["trace", "--p", "3", "--d", "3", "--bits", "32"]).assert().code(2);
    heegner().args(["twisted-trace", "--p", "2", "--D", "20", "--d", "4"]).assert().code(2);
    heegner().args(["qexp", "--p", "11"]).assert().code(2);
}

#[test]
fn breach_exits_1() {
    // a residual threshold no computation can meet
    heegner().args(["trace", "--p", "3", "--d", "3", "--tolerance", "0"]).assert().code(1);
}
