use std::path::Path;
use std::process::Command;

const SMALL: &str = r#"
schema = "roa/1"

[[experiment]]
name = "nonlinear"
dynamics = { preset = "nonlinear" }
w_values = [1.0, 3.0]

[grid]
nx = 31
ny = 31

[solver]
t_final = 1.0
snapshots = [0.5, 1.0]
"#;

fn roa(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_roa")).args(args).current_dir(dir).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn files(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn sweep_is_reproducible_and_areas_match_masks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    for out in ["a", "b"] {
        let o = roa(&["sweep", "--serial", "--config", &cfg, "--out", out], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b) = (files(&dir.path().join("a")), files(&dir.path().join("b")));
    assert!(!a.is_empty());
    assert_eq!(a, b);

    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a/summary.json")).unwrap()).unwrap();
    let cell = (3.0 / 30.0) * (3.0 / 30.0);
    let run = &summary["experiments"][0]["runs"][1];
    let area = run["snapshots"][1]["area"].as_f64().unwrap();
    let mask = std::fs::read_to_string(dir.path().join("a/nonlinear/w3/mask_T1.csv")).unwrap();
    let inside = mask.lines().skip(1).filter(|l| l.ends_with(",1")).count();
    assert!(inside > 0);
    assert!((area - inside as f64 * cell).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.toml", "schema = \"roa/1\"\nunknown = 3\n");
    assert_eq!(roa(&["sweep", "--config", &bad], dir.path()).status.code(), Some(1));
    assert_eq!(roa(&["sweep", "--config", "missing.toml"], dir.path()).status.code(), Some(1));

    let cert = write_config(
        dir.path(),
        "cert.toml",
        "schema = \"roa/1\"\n\n[[experiment]]\nname = \"linear\"\ndynamics = { preset = \"linear\", beta = 0.5, gamma = 2.0 }\nw_values = [2.0]\n\n[topology]\nkind = \"ring\"\nn = 6\nk = 2\n",
    );
    let o = roa(&["certify", "--config", &cert, "--out", "c"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("c/certificate.json").exists());

    let conv = write_config(dir.path(), "conv.toml", SMALL.replace("[1.0, 3.0]", "[1.0, 3.0, 5.0]").as_str());
    let o = roa(&["convergence", "--check", "--config", &conv, "--out", "v"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let o = roa(&["convergence", "--config", &conv, "--out", "v"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("v/convergence_nonlinear.csv")).unwrap();
    assert!(csv.starts_with("w,time\n") && csv.contains("diverged"));
}
