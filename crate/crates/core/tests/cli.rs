use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chaos-cover"))
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "timing.json")
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn flags_override_config_and_reruns_match() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("c.toml");
    std::fs::write(
        &config,
        "experiment = \"table1\"\nseed = 1\n[tracker]\nkind = \"carpet-squares\"\nlevel = 4\n",
    )
    .unwrap();
    let mut outs = Vec::new();
    for (i, threads) in ["1", "3"].iter().enumerate() {
        let out = tmp.path().join(format!("run{i}"));
        let output = bin()
            .args(["--config", config.to_str().unwrap(), "--experiment", "cover-time"])
            .args(["--seed", "12", "--trials", "30", "--threads", threads])
            .args(["--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(output.status.success());
        outs.push(read_all(&out));
    }
    assert_eq!(outs[0], outs[1]);
    let names: Vec<&str> = outs[0].iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["manifest.json", "summary.json", "trials.csv"]);
    let manifest: serde_json::Value = serde_json::from_slice(&outs[0][0].1).unwrap();
    assert_eq!(manifest["seed"], 12);
    assert_eq!(manifest["config"]["trials"], 30);
    assert_eq!(manifest["experiment"], "cover-time");
    let csv = String::from_utf8(outs[0][2].1.clone()).unwrap();
    assert_eq!(csv.lines().count(), 31);
    assert!(csv.starts_with("trial,seed,steps,provenance\n"));
}

#[test]
fn errors_are_json_records() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("bad.toml");
    std::fs::write(
        &config,
        "experiment = \"dim\"\n[driver]\nkind = \"bernoulli\"\nweights = [0.5, 0.6, 0.1]\n",
    )
    .unwrap();
    let out = bin()
        .args([
            "--config",
            config.to_str().unwrap(),
            "--out",
            tmp.path().join("o").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"], "invalid_input");

    let out = bin().args(["--experiment", "nonsense"]).output().unwrap();
    assert!(!out.status.success());
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"], "config");

    std::fs::write(&config, "experiment = \"dim\"\nunknown_key = 3\n").unwrap();
    let out = bin()
        .args(["--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"], "config");
}

#[test]
fn orbit_dumps_render_to_svg() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("orbit");
    let output = bin()
        .args([
            "--experiment",
            "orbit",
            "--seed",
            "2",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let svg = std::fs::read_to_string(out.join("orbit_0.svg")).unwrap();
    let rendered = tmp.path().join("again.svg");
    chaos_cover::svg::emit_svg_points(&out.join("orbit_0.csv"), &rendered, &Default::default()).unwrap();
    let again = std::fs::read_to_string(rendered).unwrap();
    assert_eq!(svg.matches("<circle").count(), again.matches("<circle").count());
}
