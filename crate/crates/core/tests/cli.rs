use std::fs;
use std::process::Command;

fn simlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_simlab"))
}

#[test]
fn list_names_every_experiment() {
    let out = simlab().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for e in simlab::experiments::ExperimentName::ALL {
        assert!(text.contains(e.as_str()), "{e} missing");
    }
}

#[test]
fn run_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for path in [&a, &b] {
        let st = simlab()
            .args([
                "run",
                "fig4_hamming_alpha",
                "--seed",
                "3",
                "--param",
                "d=50",
                "--out",
            ])
            .arg(path)
            .output()
            .unwrap();
        assert!(st.status.success());
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.starts_with(
        "# experiment=fig4_hamming_alpha seed=3 params=d=50;grid=100\neps,exact,chernoff\n"
    ));
    let manifest = fs::read_to_string(dir.path().join("manifest.csv")).unwrap();
    assert_eq!(manifest.lines().count(), 3);
    assert!(manifest.lines().nth(1).unwrap().ends_with(",100,a.csv"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    fs::write(
        &cfg,
        "# fig 3 at small scale\nd=4\nn=500\nbins=10\nqueries=5\n",
    )
    .unwrap();
    let out = dir.path().join("f3.csv");
    let st = simlab()
        .args(["run", "fig3_pivot_hist", "--param", "bins=7", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(st.status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert!(
        text.starts_with("# experiment=fig3_pivot_hist seed=0 params=bins=7;d=4;n=500;queries=5\n")
    );
    assert_eq!(text.lines().count(), 2 + 7);
    assert!(dir.path().join("f3_bars.csv").exists());
}

#[test]
fn usage_errors() {
    let out = simlab().args(["run", "fig7"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown experiment"));
    let out = simlab()
        .args(["run", "fig4_hamming_alpha", "--param", "colour=red"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn verify_reports_each_check() {
    let out = simlab()
        .args(["verify", "fig4_hamming_alpha"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("exact ≤ chernoff at d = 100: 100/100 grid points [all]: PASS"));
    let out = simlab()
        .args(["verify", "adversary_game"])
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("early-stop runs fooled: 1600/1600 [all]: PASS"));
}
