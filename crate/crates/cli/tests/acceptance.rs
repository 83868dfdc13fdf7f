//! Acceptance criterion 10: any manifest re-run reproduces every CSV
//! bit-for-bit at fixed worker count (and, with the fixed-order reductions
//! used throughout, at any worker count).

use std::path::Path;
use std::process::Command;

fn run(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_varmass"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_all_csv(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().map(|e| e == "csv").unwrap_or(false) {
            out.push((
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            ));
        }
    }
    out.sort();
    out
}

#[test]
fn acceptance_10_manifest_determinism() {
    let started = std::time::Instant::now();
    let base = std::env::temp_dir().join(format!("varmass_acc10_{}", std::process::id()));
    let cfg_path = base.join("config.txt");
    std::fs::create_dir_all(&base).unwrap();
    std::fs::write(
        &cfg_path,
        "scenario = gamma_scan\n\
         seed = 42\n\
         workers = 2\n\
         kernel.shape = gaussian\n\
         kernel.lambda = 1.0\n\
         kernel.radial_nodes = 24\n\
         particle.grid_points = 21\n\
         particle.dt = 0.02\n\
         run.g = 0.5\n\
         run.t_list = 1,2\n\
         run.n_paths = 64\n",
    )
    .unwrap();

    let out1 = base.join("run1");
    let out2 = base.join("run2");
    let out3 = base.join("run3");
    let out4 = base.join("run4");

    let s1 = run(&["run", cfg_path.to_str().unwrap(), "--out", out1.to_str().unwrap()]);
    assert!(s1.status.success(), "{}", String::from_utf8_lossy(&s1.stderr));
    let s2 = run(&["run", cfg_path.to_str().unwrap(), "--out", out2.to_str().unwrap()]);
    assert!(s2.status.success());

    // identical run → identical CSV bytes
    let csv1 = read_all_csv(&out1);
    let csv2 = read_all_csv(&out2);
    assert!(!csv1.is_empty());
    assert_eq!(csv1, csv2, "same config, same workers: CSVs must be identical");

    // re-run from the manifest → identical again
    let manifest = out1.join("manifest.txt");
    let s3 = run(&[
        "run",
        manifest.to_str().unwrap(),
        "--out",
        out3.to_str().unwrap(),
    ]);
    assert!(s3.status.success(), "{}", String::from_utf8_lossy(&s3.stderr));
    let csv3 = read_all_csv(&out3);
    assert_eq!(csv1, csv3, "manifest re-run must be bit-identical");

    // different worker count: fixed-order reductions keep it identical too
    let s4 = run(&[
        "run",
        cfg_path.to_str().unwrap(),
        "--workers",
        "1",
        "--out",
        out4.to_str().unwrap(),
    ]);
    assert!(s4.status.success());
    let csv4 = read_all_csv(&out4);
    assert_eq!(csv1, csv4, "worker count must not change the estimates");

    let _ = std::fs::remove_dir_all(&base);
    println!(
        "ACCEPTANCE 10 determinism: PASS (config, manifest and cross-worker re-runs bit-identical; {:.2}s)",
        started.elapsed().as_secs_f64()
    );
}

#[test]
fn exit_codes_match_contract() {
    // missing config → 3
    let bad = run(&["run", "/nonexistent/definitely_missing.cfg"]);
    assert_eq!(bad.status.code(), Some(3));
    // unknown key → 3
    let base = std::env::temp_dir().join(format!("varmass_exit_{}", std::process::id()));
    std::fs::create_dir_all(&base).unwrap();
    let p = base.join("bad.cfg");
    std::fs::write(&p, "scenario = gamma_scan\nnot.a.key = 1\n").unwrap();
    let bad2 = run(&["run", p.to_str().unwrap()]);
    assert_eq!(bad2.status.code(), Some(3));
    // empty config (no scenario) → 3
    let p2 = base.join("empty.cfg");
    std::fs::write(&p2, "").unwrap();
    let empty = run(&["validate", p2.to_str().unwrap()]);
    assert_eq!(empty.status.code(), Some(3));
    // invariant violations map to 2: a number_scan on an ir-singular cutoff
    let p3 = base.join("singular.cfg");
    std::fs::write(
        &p3,
        "scenario = number_scan\nkernel.shape = gaussian\nrun.n_paths = 8\n",
    )
    .unwrap();
    let viol = run(&["run", p3.to_str().unwrap(), "--out", base.join("o").to_str().unwrap()]);
    assert_eq!(viol.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&base);
}

#[test]
fn gamma_scan_at_zero_coupling_writes_ones() {
    let base = std::env::temp_dir().join(format!("varmass_g0_{}", std::process::id()));
    std::fs::create_dir_all(&base).unwrap();
    let cfg = base.join("g0.cfg");
    std::fs::write(
        &cfg,
        "scenario = gamma_scan\nrun.g = 0\nrun.t_list = 1,2\nrun.n_paths = 16\n\
         particle.grid_points = 21\nkernel.radial_nodes = 16\n",
    )
    .unwrap();
    let out = base.join("out");
    let s = run(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(s.status.success(), "{}", String::from_utf8_lossy(&s.stderr));
    let csv = std::fs::read_to_string(out.join("gamma_scan.csv")).unwrap();
    for line in csv.lines().filter(|l| !l.starts_with('#')) {
        let cols: Vec<&str> = line.split_whitespace().collect();
        let gamma: f64 = cols[1].parse().unwrap();
        assert_eq!(gamma, 1.0, "line: {line}");
    }
    let _ = std::fs::remove_dir_all(&base);
}
