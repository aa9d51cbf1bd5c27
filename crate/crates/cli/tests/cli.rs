use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rug::Float;
use teichlab::contfrac::{parse_family, write_family, FamilyStatus};

fn teichlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_teichlab"))
        .current_dir(dir)
        .env_remove("TEICHLAB_OUT_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(dir: &Path, rel: &str) -> String {
    fs::read_to_string(dir.join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

#[test]
fn generate_seed_only() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&teichlab(tmp.path(), &["generate", "--set", "levels=0"]));
    let file = parse_family(&read(tmp.path(), "out/family.txt")).unwrap();
    for cf in file.family.expansions() {
        assert_eq!(cf.coeffs(), &[1]);
    }
}

#[test]
fn generate_strict_first_level_and_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let out = teichlab(tmp.path(), &["generate", "--set", "mode=strict", "--set", "levels=1"]);
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("condition iv     ok"));
    let text = read(tmp.path(), "out/family.txt");
    let file = parse_family(&text).unwrap();
    for cf in file.family.expansions() {
        assert_eq!(cf.coeff(2).unwrap(), &2);
    }
    assert_eq!(write_family(&file), text);
    assert!(tmp.path().join("out/generate.log").exists());
}

#[test]
fn budget_overflow_saves_partial_family() {
    let tmp = tempfile::tempdir().unwrap();
    let out = teichlab(tmp.path(), &["generate", "--set", "mode=strict", "--set", "levels=3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeded at level 3"));
    let file = parse_family(&read(tmp.path(), "out/family.txt")).unwrap();
    assert_eq!(file.status, FamilyStatus::Partial(3));
    assert_eq!(file.family.levels(), 2);
}

#[test]
fn output_directory_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_teichlab"))
        .current_dir(tmp.path())
        .env("TEICHLAB_OUT_DIR", "elsewhere")
        .args(["generate", "--set", "levels=1"])
        .output()
        .unwrap();
    ok(&out);
    assert!(tmp.path().join("elsewhere/family.txt").exists());
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn trace_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&teichlab(
        dir,
        &["generate", "--set", "mode=strict", "--set", "levels=2"],
    ));

    fs::write(dir.join("empty.txt"), "# nothing\n").unwrap();
    ok(&teichlab(dir, &["trace", "--curves", "empty.txt"]));
    assert_eq!(
        read(dir, "out/trace.csv"),
        "curve,t,flat,modF,ext,hyp,width,twist_bound,reliable\n"
    );

    fs::write(dir.join("bad.txt"), "T 0 1/0\nB 1\nQ 2 1/1\n").unwrap();
    let out = teichlab(dir, &["trace", "--curves", "bad.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    fs::write(dir.join("curves.txt"), "B 0\nT 1 2/1\nG 2 3/1\n").unwrap();
    let args = [
        "trace",
        "--curves",
        "curves.txt",
        "--times",
        "0,0.5,3.25",
        "--set",
        "print_digits=25",
    ];
    ok(&teichlab(dir, &args));
    let first = read(dir, "out/trace.csv");
    let boundary: Vec<&str> = first.lines().filter(|l| l.starts_with("B 0,")).collect();
    assert_eq!(boundary.len(), 3);
    for (line, t) in boundary.iter().zip([0.0f64, 0.5, 3.25]) {
        let flat = line.split(',').nth(2).unwrap().split('±').next().unwrap();
        let expected = 2.0 * 0.01 * (-t).exp();
        assert!((flat.parse::<f64>().unwrap() / expected - 1.0).abs() < 1e-14, "{line}");
    }
    ok(&teichlab(dir, &args));
    assert_eq!(read(dir, "out/trace.csv"), first);
}

fn cell(s: &str) -> f64 {
    s.split('±').next().unwrap().parse().unwrap()
}

/// Midpoints can exceed the `f64` range; ratios are formed at 256 bits.
fn big(s: &str) -> Float {
    Float::with_val(256, Float::parse(s.split('±').next().unwrap()).unwrap())
}

fn ratio(a: &str, b: &str) -> Float {
    big(a) / big(b)
}

fn rel_gap(x: &Float, y: &Float) -> f64 {
    (Float::with_val(256, x / y) - 1u32).abs().to_f64()
}

#[test]
fn limit_report_summary_matches_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&teichlab(dir, &["generate", "--set", "levels=6"]));
    ok(&teichlab(dir, &["limit-report", "--set", "print_digits=30"]));
    let csv = read(dir, "out/limit.csv");
    let json: serde_json::Value = serde_json::from_str(&read(dir, "out/limit_summary.json")).unwrap();
    let levels = json["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 6);
    for level in levels {
        let n = level["n"].as_u64().unwrap().to_string();
        let row = |curve: &str| -> Vec<String> {
            csv.lines()
                .map(|l| l.split(',').map(str::to_string).collect::<Vec<_>>())
                .find(|r| r[0] == n && r[1] == curve)
                .unwrap()
        };
        let (a, b) = (row("T 0 1/0"), row("T 1 1/0"));
        let lhs = ratio(&a[3], &b[3]);
        let mid = ratio(&a[5], &b[5]);
        let rhs = ratio(&a[6], &b[6]);
        for (key, recomputed) in [
            ("lhs_rhs_gap", rel_gap(&lhs, &rhs)),
            ("lhs_mid_gap", rel_gap(&lhs, &mid)),
            ("mid_rhs_gap", rel_gap(&mid, &rhs)),
        ] {
            let reported = cell(level[key].as_str().unwrap());
            assert!(
                (reported - recomputed).abs() < 1e-13,
                "n={n} {key}: {reported} vs {recomputed}"
            );
        }
    }
    for name in ["lhs_rhs_gap", "collar_gap", "simplex_0_target", "beta_ratio"] {
        let body = read(dir, &format!("out/plots/{name}.dat"));
        let xs: Vec<f64> = body
            .lines()
            .map(|l| l.split(' ').next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(xs.len(), 6);
        assert!(xs.windows(2).all(|w| w[0] < w[1]), "{name}");
    }
}

#[test]
fn limit_report_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&teichlab(dir, &["generate", "--set", "levels=5"]));
    ok(&teichlab(
        dir,
        &["limit-report", "--set", "out_dir=a", "--family", "out/family.txt"],
    ));
    ok(&teichlab(
        dir,
        &["limit-report", "--set", "out_dir=b", "--family", "out/family.txt"],
    ));
    for name in [
        "limit.csv",
        "limit_summary.json",
        "plots/collar_gap.dat",
        "plots/beta_ratio.dat",
    ] {
        assert_eq!(
            read(dir, &format!("a/{name}")),
            read(dir, &format!("b/{name}")),
            "{name}"
        );
    }
}

#[test]
fn single_torus_limit_report_completes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&teichlab(dir, &["generate", "--set", "d=0", "--set", "levels=5"]));
    ok(&teichlab(dir, &["limit-report"]));
    let json: serde_json::Value = serde_json::from_str(&read(dir, "out/limit_summary.json")).unwrap();
    assert_eq!(json["d"], 0);
}

#[test]
fn unreliable_accepted_probe_fails_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&teichlab(
        dir,
        &["generate", "--set", "mode=strict", "--set", "levels=2"],
    ));
    let out = teichlab(dir, &["limit-report"]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("n=[1]"));
    assert!(tmp.path().join("out/limit.csv").exists());
}

#[test]
fn verify_passes_then_catches_a_corrupted_coefficient() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&teichlab(
        dir,
        &["generate", "--set", "mode=strict", "--set", "levels=1"],
    ));
    let out = teichlab(dir, &["verify"]);
    ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout
        .lines()
        .filter(|l| l.contains("[exact]"))
        .all(|l| l.starts_with("PASS")));

    let text = read(dir, "out/family.txt").replace("\n1 3 8\n", "\n1 3 9\n");
    fs::write(dir.join("out/family.txt"), text).unwrap();
    let out = teichlab(dir, &["verify"]);
    assert_eq!(out.status.code(), Some(4));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("FAIL condition-iv ")), "{stdout}");
}

#[test]
fn config_file_and_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(
        dir.join("run.cfg"),
        "d = 1\nmode = strict\nlevels = 1\nout_dir = cfgout\n",
    )
    .unwrap();
    ok(&teichlab(dir, &["generate", "--config", "run.cfg"]));
    let file = parse_family(&read(dir, "cfgout/family.txt")).unwrap();
    assert_eq!(file.family.d(), 1);

    fs::write(dir.join("bad.cfg"), "d = 1\nlevels = many\n").unwrap();
    let out = teichlab(dir, &["generate", "--config", "bad.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}
