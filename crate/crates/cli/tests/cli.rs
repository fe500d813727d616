use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn kframe(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kframe"))
        .args(args)
        .current_dir(dir)
        .env_remove("KFRAME_TOL")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, contents).unwrap();
    p
}

fn report(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn basics(dir: &Path) {
    write(
        dir,
        "e.json",
        "{\"dim\": 2, \"vectors\": [[[1,0],[0,0]], [[0,0],[1,0]]]}",
    );
    write(dir, "e1.csv", "1,0\n");
    write(
        dir,
        "id.json",
        "{\"rows\": 2, \"cols\": 2, \"data\": [[1,0],[0,0],[0,0],[1,0]]}",
    );
    write(dir, "c.csv", "2,0\n0,3\n");
}

#[test]
fn certify_standard_basis_identity() {
    let dir = tempfile::tempdir().unwrap();
    basics(dir.path());
    let out = kframe(
        dir.path(),
        &[
            "certify-k",
            "--input",
            "e.json",
            "--k",
            "id.json",
            "--lower",
            "1",
            "--upper",
            "1",
            "--out",
            "r.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "r.json");
    assert_eq!(r["verdict"], "Certified");
    assert_eq!(r["result"], "k-frame-operator-criterion");
    assert_eq!(r["tolerance"]["rel_eps"].as_f64(), Some(1e-10));
}

#[test]
fn refuted_report_is_written_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    basics(dir.path());
    // {e1} in C^2 misses e2 entirely
    let out = kframe(
        dir.path(),
        &[
            "certify-k",
            "--input",
            "e1.csv",
            "--k",
            "id.json",
            "--lower",
            "0.5",
            "--upper",
            "1",
            "--out",
            "r.json",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let r = report(dir.path(), "r.json");
    assert_eq!(r["verdict"], "Refuted");
    assert!(r["margin"].as_f64().unwrap() < 0.0);
    let w = r["witness"][1].as_array().unwrap();
    let modulus = w[0].as_f64().unwrap().hypot(w[1].as_f64().unwrap());
    assert!((modulus - 1.0).abs() < 1e-12);
}

#[test]
fn transfer_c2k_diag_two_three() {
    let dir = tempfile::tempdir().unwrap();
    basics(dir.path());
    let out = kframe(
        dir.path(),
        &[
            "transfer",
            "--direction",
            "c2k",
            "--c",
            "c.csv",
            "--lower",
            "1",
            "--upper",
            "1",
            "--out",
            "r.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "r.json");
    assert!((r["bounds"]["lower"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-14);
    assert!((r["bounds"]["upper"].as_f64().unwrap() - 0.5).abs() < 1e-14);

    let out = kframe(
        dir.path(),
        &[
            "transfer",
            "--direction",
            "k2c",
            "--c",
            "c.csv",
            "--lower",
            "1",
            "--upper",
            "1",
            "--out",
            "r.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "r.json");
    assert_eq!(r["bounds"]["lower"].as_f64(), Some(1.0));
    assert!((r["bounds"]["upper"].as_f64().unwrap() - 3.0).abs() < 1e-14);
}

#[test]
fn malformed_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    basics(dir.path());
    write(dir.path(), "bad.csv", "1,0\n0,1,2\n");
    let out = kframe(
        dir.path(),
        &[
            "certify-k",
            "--input",
            "e.json",
            "--k",
            "bad.csv",
            "--lower",
            "1",
            "--upper",
            "1",
            "--out",
            "r.json",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.csv:2"), "{err}");
    assert!(err.contains("--k"), "{err}");
    assert!(!dir.path().join("r.json").exists());

    let out = kframe(dir.path(), &["bounds", "--input", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));

    // K of the wrong size for the frame
    write(dir.path(), "k3.csv", "1,0,0\n0,1,0\n0,0,1\n");
    let out = kframe(
        dir.path(),
        &[
            "certify-k",
            "--input",
            "e.json",
            "--k",
            "k3.csv",
            "--lower",
            "1",
            "--upper",
            "1",
        ],
    );
    assert_eq!(out.status.code(), Some(2));

    let out = kframe(
        dir.path(),
        &[
            "certify-k",
            "--input",
            "e.json",
            "--k",
            "id.json",
            "--lower",
            "0",
            "--upper",
            "1",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("--lower"));

    let out = kframe(dir.path(), &["bounds"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tolerance_from_env_and_flag() {
    let dir = tempfile::tempdir().unwrap();
    basics(dir.path());
    let run = |env: &str, extra: &[&str]| {
        let mut args = vec!["bounds", "--input", "e.json", "--out", "r.json"];
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_kframe"))
            .args(&args)
            .current_dir(dir.path())
            .env("KFRAME_TOL", env)
            .output()
            .unwrap()
    };
    assert_eq!(run("1e-8", &[]).status.code(), Some(0));
    let r = report(dir.path(), "r.json");
    assert_eq!(r["tolerance"]["rel_eps"].as_f64(), Some(1e-8));
    assert_eq!(r["tolerance"]["source"], "env");

    assert_eq!(run("1e-8", &["--tol", "1e-6"]).status.code(), Some(0));
    let r = report(dir.path(), "r.json");
    assert_eq!(r["tolerance"]["rel_eps"].as_f64(), Some(1e-6));
    assert_eq!(r["tolerance"]["source"], "flag");

    let out = run("0.5", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("KFRAME_TOL"));
    assert_eq!(run("1e-8", &["--tol", "-1"]).status.code(), Some(2));
}

#[test]
fn unperturbed_sweep_reproduces_original_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let out = kframe(
        dir.path(),
        &["sweep", "--seeds", "0..50", "--gamma", "0", "--out", "s.csv"],
    );
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_path(dir.path().join("s.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let records: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(records.len(), 51);
    let num = |r: &csv::StringRecord, name: &str| r[col(name)].parse::<f64>().unwrap();
    for (i, r) in records[..50].iter().enumerate() {
        assert_eq!(r[col("seed")].parse::<u64>().unwrap(), i as u64);
        assert_eq!(&r[col("violation")], "false");
        for side in ["lower", "upper"] {
            let (o, e) = (
                num(r, &format!("original_{side}")),
                num(r, &format!("empirical_{side}")),
            );
            assert!(
                (o - e).abs() <= 1e-10 * num(r, "original_upper"),
                "seed {i} {side}: {o} vs {e}"
            );
        }
    }
    let summary = &records[50];
    assert_eq!(&summary[col("seed")], "summary");
    assert_eq!(&summary[col("violation")], "0");
}

#[test]
fn sweep_rejects_bad_ranges() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        ["sweep", "--seeds", "3..3"],
        ["sweep", "--seeds", "9..=2"],
        ["sweep", "--d", "0..=3"],
        ["sweep", "--gamma", "1..0.5"],
    ] {
        let out = kframe(dir.path(), &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn generated_commuting_instance_certifies_at_its_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (kind, file) in [("joint-frame", "f.json"), ("k", "k.json"), ("c", "c.json")] {
        let out = kframe(
            d,
            &[
                "gen", "--kind", kind, "--dim", "4", "--rank", "2", "--seed", "11", "--out", file,
            ],
        );
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let out = kframe(
        d,
        &[
            "bounds", "--input", "f.json", "--k", "k.json", "--c", "c.json", "--out", "b.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let b = report(d, "b.json");
    assert_eq!(b["result"], "optimal-controlled-k-frame-bounds");
    let lower = b["bounds"]["lower"].as_f64().unwrap();
    let upper = b["bounds"]["upper"].as_f64().unwrap();
    let (lo, hi) = (format!("{}", lower * (1.0 - 1e-6)), format!("{}", upper));
    let args = [
        "certify-controlled",
        "--input",
        "f.json",
        "--k",
        "k.json",
        "--c",
        "c.json",
        "--lower",
        &lo,
        "--upper",
        &hi,
    ];
    assert_eq!(kframe(d, &args).status.code(), Some(0));
    let lo = format!("{}", lower * (1.0 + 1e-3));
    let args = [
        "certify-controlled",
        "--input",
        "f.json",
        "--k",
        "k.json",
        "--c",
        "c.json",
        "--lower",
        &lo,
        "--upper",
        &hi,
    ];
    assert_eq!(kframe(d, &args).status.code(), Some(1));
}

#[test]
fn solve_and_perturb_verify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    kframe(
        d,
        &[
            "gen",
            "--kind",
            "graded-frame",
            "--dim",
            "5",
            "--count",
            "8",
            "--seed",
            "3",
            "--out",
            "g.json",
        ],
    );
    kframe(
        d,
        &[
            "gen", "--kind", "frame", "--dim", "5", "--count", "8", "--seed", "3", "--out", "f.json",
        ],
    );
    kframe(
        d,
        &["gen", "--kind", "k", "--dim", "5", "--seed", "3", "--out", "k.json"],
    );
    kframe(
        d,
        &["gen", "--kind", "c", "--dim", "5", "--seed", "3", "--out", "c.json"],
    );

    let out = kframe(d, &["solve", "--input", "g.json", "--c", "jacobi", "--out", "s.json"]);
    assert_eq!(out.status.code(), Some(0));
    let s = report(d, "s.json");
    assert_eq!(s["verdict"], "Converged");
    assert!(
        s["details"]["rate_estimate"].as_f64().unwrap() <= s["details"]["contraction_bound"].as_f64().unwrap() + 1e-6
    );

    let out = kframe(d, &["solve", "--input", "g.json", "--max-iter", "2", "--out", "s.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(d, "s.json")["verdict"], "NotConverged");

    // G = F: zero perturbation
    let out = kframe(
        d,
        &[
            "perturb-verify",
            "--input",
            "f.json",
            "--perturbed",
            "f.json",
            "--k",
            "k.json",
            "--out",
            "p.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let p = report(d, "p.json");
    assert_eq!(p["verdict"], "Certified");
    assert_eq!(p["details"]["condition"]["mode"], "sufficient-certified");

    let out = kframe(
        d,
        &[
            "perturb-verify",
            "--input",
            "f.json",
            "--perturbed",
            "g.json",
            "--k",
            "k.json",
            "--c",
            "c.json",
            "--out",
            "q.json",
        ],
    );
    assert!(out.status.code() == Some(0) || out.status.code() == Some(1));
    let q = report(d, "q.json");
    assert_eq!(q["details"]["bessel_holds"], true);
}

#[test]
fn prediction_gate() {
    let dir = tempfile::tempdir().unwrap();
    basics(dir.path());
    let d = dir.path();
    let out = kframe(
        d,
        &[
            "perturb-predict",
            "--k",
            "id.json",
            "--lower",
            "1",
            "--upper",
            "1",
            "--out",
            "p.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let p = report(d, "p.json");
    assert_eq!(p["bounds"]["lower"].as_f64(), Some(1.0));
    assert_eq!(p["bounds"]["upper"].as_f64(), Some(1.0));

    let args = [
        "perturb-predict",
        "--k",
        "id.json",
        "--lower",
        "1",
        "--upper",
        "1",
        "--gamma",
        "2",
        "--out",
        "p.json",
    ];
    assert_eq!(kframe(d, &args).status.code(), Some(1));
    let p = report(d, "p.json");
    assert_eq!(p["verdict"], "Refuted");
    assert!(p["bounds"].is_null());
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    kframe(
        d,
        &[
            "gen", "--kind", "frame", "--dim", "4", "--count", "7", "--seed", "9", "--out", "f.json",
        ],
    );
    kframe(
        d,
        &[
            "gen", "--kind", "k", "--dim", "4", "--rank", "3", "--seed", "9", "--out", "k.json",
        ],
    );
    for (i, format) in ["json", "csv"].iter().enumerate() {
        let (a, b) = (format!("a{i}"), format!("b{i}"));
        for name in [&a, &b] {
            let args = [
                "bounds", "--input", "f.json", "--k", "k.json", "--format", format, "--out", name,
            ];
            kframe(d, &args);
        }
        assert_eq!(fs::read(d.join(&a)).unwrap(), fs::read(d.join(&b)).unwrap());
    }
    kframe(
        d,
        &[
            "sweep", "--seeds", "0..8", "--gamma", "0..0.2", "--alpha", "0.05", "--out", "s1.csv",
        ],
    );
    kframe(
        d,
        &[
            "sweep", "--seeds", "0..8", "--gamma", "0..0.2", "--alpha", "0.05", "--out", "s2.csv",
        ],
    );
    assert_eq!(fs::read(d.join("s1.csv")).unwrap(), fs::read(d.join("s2.csv")).unwrap());
}
