//! Command line behaviour: exit codes, report shape and the result cache.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lowcell"))
}

fn config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name).display().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("lowcell-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&p);
    std::fs::create_dir_all(&p).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn info_report_shape() {
    let v = json(&run(&["--config", &config("a1.toml"), "--task", "info"]));
    let r = &v["info"];
    assert_eq!(r["passed"], true);
    assert_eq!(r["result"]["w0_order"], 2);
    assert_eq!(r["result"]["l_w0"], 1);
    assert_eq!(r["result"]["cell_census"]["sizes"].as_array().unwrap().len(), 2);
    assert_eq!(r["result"]["box"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_subset_by_flag() {
    let v = json(&run(&["--config", &config("a1.toml"), "--task", "verify", "--props", "P1,P7", "--radius", "6"]));
    let rows = v["verify"]["result"].as_array().unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r["property"].as_str().unwrap()).collect();
    assert_eq!(names, ["P1", "P7"]);
    assert!(rows.iter().all(|r| r["verdict"]["status"] == "pass"));
}

#[test]
fn spectra_single_point_shows_rank_drop() {
    let v = json(&run(&["--config", &config("a1.toml"), "--task", "spectra", "--radius", "4", "--q", "2", "--torus", "2"]));
    let r = &v["spectra"]["result"];
    assert_eq!(r["det"], "0");
    assert_eq!(r["dim"], 1);
    assert_eq!(r["attached"], true);
    assert_eq!(r["phi_iso"], false);
    assert_eq!(r["zeta"]["{1}"], "5/2");
}

#[test]
fn spectra_over_a_prime_field() {
    let v = json(&run(&["--config", &config("a1.toml"), "--task", "spectra", "--field", "5", "--q", "2", "--torus", "1;2;3"]));
    let r = &v["spectra"]["result"];
    assert_eq!(r["points"].as_array().unwrap().len(), 3);
    assert_eq!(r["inconsistent"], 0);
}

#[test]
fn table_output() {
    let o = run(&["--config", &config("a1.toml"), "--task", "info", "--table"]);
    assert!(o.status.success());
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.starts_with("== info: pass"), "{s}");
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = scratch("usage");
    let bad = dir.join("bad.toml");
    std::fs::write(&bad, "type = \"C2\"\nradius = 8\ntasks = [\"info\"]\n[weights]\ns0 = 1\ns1 = 1\ns2 = 2\n").unwrap();
    let o = run(&["--config", &bad.display().to_string()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("conjug"), "{}", String::from_utf8_lossy(&o.stderr));

    let o = run(&["--config", &dir.join("missing.toml").display().to_string()]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["--config", &config("a1.toml"), "--task", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["--config", &config("a1.toml"), "--task", "verify", "--radius", "1"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["--config", &config("a1.toml"), "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));

    let unknown = dir.join("unknown.toml");
    std::fs::write(&unknown, "type = \"A1\"\nradius = 4\ncolour = 3\n[weights]\ns0 = 1\ns1 = 1\n").unwrap();
    let o = run(&["--config", &unknown.display().to_string(), "--task", "info"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn cache_hit_is_identical() {
    let dir = scratch("cache");
    let cache = dir.join("c").display().to_string();
    let args = ["--config", &config("a2.toml"), "--task", "info,basedring", "--cache", &cache];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let entries = std::fs::read_dir(dir.join("c")).unwrap().count();
    assert_eq!(entries, 2);
    let fresh = run(&["--config", &config("a2.toml"), "--task", "info,basedring"]);
    assert_eq!(fresh.stdout, a.stdout);
}

#[test]
fn out_directory_gets_one_file_per_task() {
    let dir = scratch("out");
    let o = run(&["--config", &config("a1.toml"), "--task", "info,klbasis", "--radius", "4", "--out", &dir.display().to_string()]);
    assert!(o.status.success());
    for t in ["info", "klbasis"] {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{t}.json"))).unwrap()).unwrap();
        assert_eq!(v["passed"], true);
    }
}
