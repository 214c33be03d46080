use std::path::Path;
use std::process::Command;

fn miniverif(args: &[&str], dir: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_miniverif")).args(args).current_dir(dir).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

// Every guard here is discharged by eva or const.
const PROVABLE: &str = "//@ requires 0 <= k && k < 4;
int main(int k) {
  int a[4];
  int q;
  a[k] = 10 / 5;
  q = 100 / (k + 1);
  //@ assert q >= 25;
  return a[k] + q;
}
";

const UNPROVABLE: &str = "int main(int d) {\n  int q;\n  q = 1 / d;\n  return q;\n}\n";

#[test]
fn everything_provable_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "ok.mc", PROVABLE);
    let (code, out, err) = miniverif(&["-rte", "-eva", "-const", "ok.mc"], dir.path());
    assert_eq!(code, 0, "{err}");
    assert!(out.ends_with("summary: total=5 valid=5 invalid=0 unknown=0 inconsistent=0\n"), "{out}");
    assert!(err.contains("[rte] info:"), "logs go to stderr: {err}");
    assert!(!out.contains("[rte]"));
}

#[test]
fn no_plugins_reports_source_annotations_only() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "ok.mc", PROVABLE);
    let (code, out, _) = miniverif(&["ok.mc"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(out, "ok.mc:7 [Assertion] q >= 25 : Unknown (by none)\nsummary: total=1 valid=0 invalid=0 unknown=1 inconsistent=0\n");
}

#[test]
fn unproved_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.mc", UNPROVABLE);
    let (code, out, _) = miniverif(&["-rte", "-report-unproved-exit", "bad.mc"], dir.path());
    assert_eq!(code, 4);
    assert!(out.contains("d != 0 : Unknown (by rte)"), "{out}");
    let (code, _, _) = miniverif(&["-rte", "bad.mc"], dir.path());
    assert_eq!(code, 0);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = miniverif(&["-nosuch", "x.mc"], dir.path());
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.starts_with("miniverif: unknown option `-nosuch`"), "{err}");
    let (code, _, err) = miniverif(&[], dir.path());
    assert_eq!(code, 1);
    assert!(err.contains("no input files"));
    let (code, _, _) = miniverif(&["-eva-wlevel", "99", "x.mc"], dir.path());
    assert_eq!(code, 1);
}

#[test]
fn load_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "broken.mc", "int main() { return 1 +; }\n");
    let (code, out, err) = miniverif(&["-rte", "broken.mc"], dir.path());
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("broken.mc:1"), "{err}");
    let (code, _, _) = miniverif(&["missing.mc"], dir.path());
    assert_eq!(code, 2);
}

#[test]
fn help_lists_bundled_plugins_sorted() {
    let (code, out, _) = miniverif(&["-help"], Path::new("."));
    assert_eq!(code, 0);
    let pos: Vec<usize> = ["Plugin cg", "Plugin const", "Plugin eva", "Plugin rte"]
        .iter()
        .map(|p| out.find(p).unwrap_or_else(|| panic!("{p} missing")))
        .collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn callgraph_file_and_json_report() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "f.mc",
        "int g(int v) { return v; }\nint h(int v) { return -v; }\nint main(int c) { fnptr f; f = &g; return f(c); }\n",
    );
    let (code, out, err) = miniverif(&["-eva", "-cg", "-report-format", "json", "f.mc"], dir.path());
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["summary"]["total"], 0);
    let dot = std::fs::read_to_string(dir.path().join("callgraph.dot")).unwrap();
    assert!(dot.contains("\"main\" -> \"g\" [label=\"EvaResolved\"];"), "{dot}");
    assert!(!dot.contains("\"main\" -> \"h\""));
}

#[test]
fn library_entry_point_matches_binary() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.mc", UNPROVABLE);
    let path = dir.path().join("bad.mc");
    let path = path.to_str().unwrap();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = driver::run(&["-rte", path], &mut out, &mut err);
    assert_eq!(code, 0);
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("[Assertion] d != 0 : Unknown (by rte)"));
}
