//! Black-box tests of the `latbench` binary: exit codes, artifact schemas,
//! seed determinism and campaign resume.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use latbench_cli::formats::write_trajectory_csv;
use latbench_cli::provenance::Provenance;
use latbench_core::trajectory::{build_path, DrivingLimits, Segment, Trajectory};

fn latbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latbench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture_trajectory(dir: &Path) -> PathBuf {
    let path = build_path(
        &[Segment::straight(80.0), Segment::arc(40.0, 0.8), Segment::straight(80.0)],
        0.5,
    )
    .unwrap();
    let speed = vec![8.0; path.len()];
    let trajectory = Trajectory {
        path,
        speed,
        limits: DrivingLimits { v_max_kmh: 30.0, a_x_max: 1.5, a_x_min: 2.0, a_y_max: 4.0 },
        purpose: "fixture".to_string(),
    };
    let file = dir.join("fixture.csv");
    write_trajectory_csv(&trajectory, &Provenance::new(0, &[b"fixture"]), &file).unwrap();
    file
}

#[test]
fn simulate_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let r = latbench(&["--out", out.to_str().unwrap(), "simulate", "t1", "nlmpc-1"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));

    let log = std::fs::read_to_string(out.join("log.csv")).unwrap();
    let mut lines = log.lines();
    assert!(lines.next().unwrap().starts_with("# latbench "));
    assert_eq!(lines.next().unwrap(), "t,s,y1,e_psi,vx,kappa_preview,u_ff,u_fb,delta_t,e_y");
    assert!(lines.count() > 1000);

    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    for key in ["iae", "iae_raw", "mle", "m_epsilon", "m_zeta"] {
        assert!(metrics[key].is_number(), "{key} missing or null");
    }
    assert_eq!(metrics["diverged"], serde_json::Value::Bool(false));
    assert!(metrics["provenance"]["config_sha256"].as_str().unwrap().len() == 64);
    assert!(out.join("timings.json").exists());
}

#[test]
fn bad_inputs_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = out.to_str().unwrap();

    // controller file without the preview block names the missing field
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, r#"{"type":"pid","params":{"k_p":1,"k_i":0,"k_d":0.1,"n":5}}"#)
        .unwrap();
    let r = latbench(&["--out", o, "simulate", "t1", broken.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("preview"));

    let r = latbench(&["--out", o, "simulate", "t9", "nlmpc-1"]);
    assert_eq!(r.status.code(), Some(2));

    let r = latbench(&["--out", o, "simulate", "t1", "no-such-setup"]);
    assert_eq!(r.status.code(), Some(2));

    let r = latbench(&["--out", o, "robustness", "missing.csv", "--family", "warp"]);
    assert_eq!(r.status.code(), Some(2));

    let r = latbench(&["--out", o, "plot", "pareto", dir.path().join("nope.csv").to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn simulate_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let read = |name: &str| {
        let out = dir.path().join(name);
        let r = latbench(&["--seed", "7", "--out", out.to_str().unwrap(), "simulate", "t2", "pid-1"]);
        assert!(r.status.success());
        (
            std::fs::read(out.join("log.csv")).unwrap(),
            std::fs::read(out.join("metrics.json")).unwrap(),
        )
    };
    assert_eq!(read("a"), read("b"));
}

#[test]
fn tune_campaign_resumes_to_the_same_archive() {
    let dir = tempfile::tempdir().unwrap();
    let traj = fixture_trajectory(dir.path());
    let campaign = |budget: usize| {
        let file = dir.path().join(format!("c{budget}.json"));
        std::fs::write(
            &file,
            format!(
                "{{\"family\":\"pid\",\"budget\":{budget},\"trajectories\":[\"{}\"]}}",
                traj.display()
            ),
        )
        .unwrap();
        file
    };

    // interrupted-style run: budget 60 first, then 100 in the same directory
    let resumed = dir.path().join("resumed");
    for budget in [60, 100] {
        let r = latbench(&[
            "--out",
            resumed.to_str().unwrap(),
            "tune",
            campaign(budget).to_str().unwrap(),
        ]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    let fresh = dir.path().join("fresh");
    let r = latbench(&["--out", fresh.to_str().unwrap(), "tune", campaign(100).to_str().unwrap()]);
    assert!(r.status.success());

    let archive_resumed = std::fs::read_to_string(resumed.join("archive.csv")).unwrap();
    let archive_fresh = std::fs::read_to_string(fresh.join("archive.csv")).unwrap();
    assert_eq!(archive_resumed, archive_fresh);
    // a campaign always leaves a nonempty nondominated set
    assert!(archive_resumed.lines().count() > 2);
}

#[test]
fn screen_and_select_produce_runnable_setups() {
    let dir = tempfile::tempdir().unwrap();
    let traj = fixture_trajectory(dir.path());
    let campaign = dir.path().join("c.json");
    std::fs::write(
        &campaign,
        format!(
            "{{\"family\":\"pid\",\"budget\":120,\"trajectories\":[\"{}\"]}}",
            traj.display()
        ),
    )
    .unwrap();
    let tune_out = dir.path().join("tune");
    assert!(latbench(&["--out", tune_out.to_str().unwrap(), "tune", campaign.to_str().unwrap()])
        .status
        .success());

    let rob_out = dir.path().join("rob");
    let r = latbench(&[
        "--out",
        rob_out.to_str().unwrap(),
        "robustness",
        tune_out.join("archive.csv").to_str().unwrap(),
        "--family",
        "pid",
        "--trajectory",
        traj.to_str().unwrap(),
        "--draws",
        "10",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let annotated = std::fs::read_to_string(rob_out.join("archive_robust.csv")).unwrap();
    // every data row now carries a robustness percentage
    for line in annotated.lines().skip(2) {
        let pct: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((0.0..=100.0).contains(&pct));
    }

    let sel_out = dir.path().join("sel");
    let r = latbench(&[
        "--out",
        sel_out.to_str().unwrap(),
        "select",
        rob_out.join("archive_robust.csv").to_str().unwrap(),
        "--family",
        "pid",
    ]);
    // the toy campaign may legitimately fail the gate; both outcomes have
    // a defined contract
    if r.status.success() {
        for pick in ["accurate", "balanced", "smooth"] {
            let text = std::fs::read_to_string(sel_out.join(format!("{pick}.json"))).unwrap();
            latbench_cli::formats::parse_controller_json(&text).unwrap();
        }
    } else {
        assert_eq!(r.status.code(), Some(3));
    }
}

#[test]
fn plots_render_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    assert!(latbench(&["--out", sim.to_str().unwrap(), "simulate", "t1", "lqr-1"])
        .status
        .success());
    let log = sim.join("log.csv");
    let metrics = sim.join("metrics.json");

    let render = |out: &str| {
        let out_dir = dir.path().join(out);
        for (kind, input) in [
            ("error-boxplot", &log),
            ("error-vs-curvature", &log),
            ("spider", &metrics),
        ] {
            let r = latbench(&[
                "--out",
                out_dir.to_str().unwrap(),
                "plot",
                kind,
                input.to_str().unwrap(),
                "--name",
                &format!("{kind}.svg"),
            ]);
            assert!(r.status.success(), "{kind}: {}", String::from_utf8_lossy(&r.stderr));
        }
        let mut blobs = Vec::new();
        for kind in ["error-boxplot", "error-vs-curvature", "spider"] {
            let svg = std::fs::read_to_string(out_dir.join(format!("{kind}.svg"))).unwrap();
            assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
            blobs.push(svg);
        }
        blobs
    };
    assert_eq!(render("p1"), render("p2"));
}
