use std::process::{Command, Output};

use approx::assert_abs_diff_eq;

fn duality(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_duality"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_column(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let header: Vec<_> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().parse().unwrap()).collect()
}

#[test]
fn sweeps_are_byte_identical_across_runs() {
    for args in [
        &["sweep-g2auto"][..],
        &["sweep-zeta", "--points", "57"],
        &["hom-dip", "--points", "9"],
    ] {
        let a = duality(args);
        let b = duality(args);
        assert!(a.status.success(), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn g2auto_default_grid() {
    let out = stdout(&duality(&["sweep-g2auto"]));
    assert!(out.starts_with("g2_auto,D2,V2,sqrt_X2,violated\n"));
    assert!(!out.contains('\r'));
    let g = csv_column(&out, "g2_auto");
    assert_eq!(g.len(), 201);
    assert_eq!((g[0], g[200]), (0.01, 100.0));
    for d in csv_column(&out, "D2") {
        assert_abs_diff_eq!(d, 0.6, epsilon = 1e-12);
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("zeta.toml");
    let out = dir.path().join("zeta.csv");
    std::fs::write(
        &cfg,
        format!(
            "scenario = \"sweep-zeta\"\n[grid]\nmin = 1.0\nmax = 3.0\npoints = 5\nspacing = \"linear\"\n[output]\npath = \"{}\"\n",
            out.display()
        ),
    )
    .unwrap();
    let o = duality(&["sweep-zeta", "--config", cfg.to_str().unwrap(), "--points", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv_column(&text, "zeta"), [1.0, 2.0, 3.0]);
    assert_eq!(csv_column(&text, "D2")[1], 0.0);

    let wrong = duality(&["hom-dip", "--config", cfg.to_str().unwrap()]);
    assert_eq!(wrong.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(duality(&["sweep-zeta", "--points", "1"]).status.code(), Some(2));
    assert_eq!(duality(&["sweep-zeta", "--log", "--min", "0"]).status.code(), Some(2));
    assert_eq!(duality(&["hom-dip", "--a", "fock("]).status.code(), Some(2));
    assert_eq!(duality(&["hom-dip", "--a", "coherent(1+0i)"]).status.code(), Some(4));
    assert_eq!(
        duality(&["paper-check", "--perturb-g2ab", "1e-3"]).status.code(),
        Some(3)
    );
    assert_eq!(duality(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn paper_check_perturbation_names_rows() {
    let o = duality(&["paper-check", "--perturb-g2ab", "1e-3"]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("example2.V2@parametric"));
    assert!(err.contains("example2.V2@state"));
    assert!(!err.contains("example2.D2"));
    assert!(stdout(&o)
        .lines()
        .any(|l| l.starts_with("example2.X2") && l.ends_with("FAIL")));
}

#[test]
fn record_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let record = dir.path().join("rec.kv");
    std::fs::write(&record, "order=2\nG1_AA=1\nG2_AA=0.8\nG1_BB=0.5\nG2_BB=0.2\nG2_AB=0.5\nG1p_AB_re=0\nG1p_AB_im=0\nG2p_AB_re=0\nG2p_AB_im=0\n").unwrap();
    let o = duality(&["state-run", "--record", record.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("intensity2_1.X_intensity,1.36\n"));
    assert!(out.contains("intensity2_1.V_HOM,0.5\n"));
    assert!(out.contains("intensity2_1.violated,true\n"));

    let specs = duality(&[
        "state-run",
        "--a",
        "number_diagonal(0.4, 0.2, 0.4)",
        "--b",
        "number_diagonal(0.6, 0.3, 0.1)",
        "--cutoff",
        "4",
    ]);
    assert!(stdout(&specs).contains("intensity2_1.X_intensity,1.36\n"));
}

#[test]
fn kv_format() {
    let out = stdout(&duality(&["sweep-zeta", "--points", "2", "--format", "kv"]));
    assert!(out.starts_with("zeta=0.01\nD2="));
    assert_eq!(out.split("\n\n").count(), 2);
}

#[test]
fn fringe_scan_energy_and_fit() {
    let o = duality(&["fringe-scan", "--a", "coherent(1+0i)", "--b", "coherent(1+0i)"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let pc = csv_column(&out, "P_C");
    let pd = csv_column(&out, "P_D");
    assert_eq!(pc.len(), 65);
    assert_abs_diff_eq!(pc[0], 0.0, epsilon = 1e-9);
    assert_abs_diff_eq!(pc[32], 2.0, epsilon = 1e-9);
    for (c, d) in pc.iter().zip(&pd) {
        assert_abs_diff_eq!(c + d, 2.0, epsilon = 1e-9);
    }
    let err = String::from_utf8_lossy(&o.stderr);
    let fitted: f64 = err
        .split("visibility ")
        .nth(1)
        .unwrap()
        .split(' ')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert_abs_diff_eq!(fitted, 1.0, epsilon = 1e-9);
}
