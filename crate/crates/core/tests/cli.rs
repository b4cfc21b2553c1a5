use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn res112(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_res112"))
        .args(args)
        .env_clear()
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("res112-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn fiber_summaries() {
    for (args, want) in [
        (vec!["fiber", "--mu", "0", "--ell", "0", "--h", "0"], "CuspPinchedT3 ×1\n"),
        (vec!["fiber", "--mu", "0", "--ell", "0", "--h", "-1", "--delta", "1.5"], "Empty\n"),
        (vec!["fiber", "--delta", "-1", "--mu", "0", "--ell", "-0.45", "--h", "-0.01"], "Torus3 ×2\n"),
    ] {
        let o = res112(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(stdout(&o), want, "{args:?}");
    }
}

#[test]
fn fiber_json_is_one_line() {
    let o = res112(&["fiber", "--mu", "0.3", "--ell", "0.2", "--h", "0.5", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["summary"], "Torus3 ×1");
}

#[test]
fn generator_monodromy() {
    let o = res112(&["monodromy", "--loop", "gamma2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("vector: (0, 1)"), "{}", stdout(&o));
}

#[test]
fn exit_codes() {
    // validation, including parse errors
    assert_eq!(res112(&["fiber", "--mu", "0", "--ell", "0", "--h", "0", "--kappa", "0"]).status.code(), Some(1));
    assert_eq!(res112(&["fiber", "--mu", "x", "--ell", "0", "--h", "0"]).status.code(), Some(1));
    assert_eq!(res112(&["critvals", "--tol", "1e-9"]).status.code(), Some(1));
    assert_eq!(res112(&["monodromy", "--loop", "gamma4"]).status.code(), Some(1));
    assert_eq!(res112(&["monodromy", "--loop", "0.1,0.2,0.3"]).status.code(), Some(1));
    assert_eq!(res112(&["selfcheck", "--only", "12"]).status.code(), Some(1));
    // at δ = 1.5 only the C12 thread is unstable, so gamma1 has nothing to encircle
    assert_eq!(res112(&["monodromy", "--loop", "gamma1", "--delta", "1.5"]).status.code(), Some(1));
    // output path below a regular file
    let dir = scratch("io");
    std::fs::create_dir_all(&dir).unwrap();
    let blocker = dir.join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let o = res112(&["bifdiag", "--ell", "0", "--grid", "11", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn bifdiag_reruns_are_byte_identical() {
    let (a, b) = (scratch("bif-a"), scratch("bif-b"));
    for d in [&a, &b] {
        let o = res112(&["bifdiag", "--ell", "-1.25,0.125", "--grid", "61", "--out", d.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["bifdiag_slices.csv", "bifdiag_surface.csv"] {
        let x = read(&a, f);
        assert_eq!(x, read(&b, f), "{f}");
        assert!(!x.contains(&b'\r'));
    }
    let slices = String::from_utf8(read(&a, "bifdiag_slices.csv")).unwrap();
    assert!(slices.starts_with("ell_slice,family,kind,provenance,lambda,mu,ell,a,h,kappa\n"));
    assert!(slices.lines().count() > 1);
    let _ = std::fs::remove_dir_all(&a);
    let _ = std::fs::remove_dir_all(&b);
}

#[test]
fn empty_lambda_window_gives_header_only() {
    let d = scratch("bif-empty");
    let o = res112(&["bifdiag", "--ell", "0.3", "--lambda-window", "1,1", "--grid", "11", "--out", d.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let slices = String::from_utf8(read(&d, "bifdiag_slices.csv")).unwrap();
    assert_eq!(slices.lines().count(), 1, "{slices}");
    let _ = std::fs::remove_dir_all(&d);
}

#[test]
fn critvals_jsonl_reruns_are_byte_identical() {
    let (a, b) = (scratch("cv-a"), scratch("cv-b"));
    for d in [&a, &b] {
        let o = res112(&["critvals", "--delta", "-1", "--grid", "21", "--format", "json", "--out", d.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["critvals_sheets.jsonl", "critvals_threads.jsonl", "critvals_loci.jsonl"] {
        let x = read(&a, f);
        assert_eq!(x, read(&b, f), "{f}");
        for line in String::from_utf8(x).unwrap().lines() {
            let _: serde_json::Value = serde_json::from_str(line).unwrap();
        }
    }
    let _ = std::fs::remove_dir_all(&a);
    let _ = std::fs::remove_dir_all(&b);
}

#[test]
fn scale_round_trip() {
    let o = res112(&["scale", "--kappa", "2", "--delta", "0.5", "--mu", "0.25", "--ell", "-0.5", "--h", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let vals: Vec<String> = stdout(&o).lines().map(|l| l.split(" = ").nth(1).unwrap().to_string()).collect();
    let o2 = res112(&[
        "scale", "--kappa", "2", "--from-unit", "--delta", &vals[0], "--mu", &vals[1], "--ell", &vals[2], "--h", &vals[6],
    ]);
    let back = stdout(&o2);
    assert!(back.contains("lambda = 0.5\n") && back.contains("mu = 0.25\n") && back.contains("ell = -0.5\n"), "{back}");
}
