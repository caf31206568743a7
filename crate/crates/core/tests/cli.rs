use std::process::{Command, Output};

fn walklab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walklab")).args(args).output().expect("binary runs")
}

#[test]
fn identical_seed_gives_identical_bytes() {
    let args = ["furstenberg", "--seed", "11", "--chains", "300", "--lyapunov-n", "50"];
    let a = walklab(&args);
    let b = walklab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = walklab(&["furstenberg", "--seed", "12", "--chains", "300", "--lyapunov-n", "50"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn worker_count_does_not_change_output() {
    for args in [
        vec!["recur", "--group", "Z3", "--seed", "5", "--N", "200", "--chains", "700"],
        vec!["affine", "--seed", "5", "--mode", "ladder", "--horizon", "200", "--chains", "300", "--trend-range", "5,200"],
        vec!["harmonic", "--seed", "5", "--chains", "2000", "--abel-horizon", "100", "--abel-chains", "100"],
    ] {
        let mut one = args.clone();
        one.extend(["--workers", "1"]);
        let mut four = args.clone();
        four.extend(["--workers", "4"]);
        let (a, b) = (walklab(&one), walklab(&four));
        assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn missing_seed_is_a_usage_error() {
    let o = walklab(&["affine", "--horizon", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--seed"));
}

#[test]
fn hypothesis_violations_exit_2() {
    let o = walklab(&["affine", "--seed", "1", "--a-law", "3,1/2", "--horizon", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("criticality"));
    let o = walklab(&["markov", "--seed", "1", "--a-law", "2,1/2", "--b-law", "0", "--horizon", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("fixed point"));
    let o = walklab(&["spectrum", "--measure", "rotations:8", "--bins", "32"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("# sigma2: unavailable"));
}

#[test]
fn bad_arguments_exit_1() {
    assert_eq!(walklab(&["affine", "--seed", "1", "--field", "padic:4"]).status.code(), Some(1));
    assert_eq!(walklab(&["recur", "--seed", "1", "--chains", "0"]).status.code(), Some(1));
    assert_eq!(walklab(&["nonsense"]).status.code(), Some(1));
    assert_eq!(walklab(&["structure", "eigen"]).status.code(), Some(1));
}

#[test]
fn verify_round_trip_and_config_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.csv");
    let p = path.to_str().unwrap();
    let o = walklab(&["fiber", "--seed", "3", "--horizon", "500", "--chains", "20", "--output", p]);
    assert!(o.status.success() && o.stdout.is_empty());
    let v = walklab(&["verify", p]);
    assert!(v.status.success(), "{}", String::from_utf8_lossy(&v.stderr));
    assert!(String::from_utf8_lossy(&v.stdout).contains(",fiber,sha256:"));

    // The digest covers the recorded config.
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, text.replace("\"chains\":20", "\"chains\":21")).unwrap();
    assert_eq!(walklab(&["verify", p]).status.code(), Some(1));
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"seed": 9, "horizon": 300, "chains": 50, "window": 4}"#).unwrap();
    let a = walklab(&["affine", "--config", cfg.to_str().unwrap()]);
    let b = walklab(&["affine", "--seed", "9", "--horizon", "300", "--chains", "50", "--window", "4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = walklab(&["affine", "--config", cfg.to_str().unwrap(), "--chains", "60"]);
    assert!(String::from_utf8_lossy(&c.stdout).contains("\"chains\":60"));
}

#[test]
fn header_layout() {
    let o = walklab(&["structure", "growth", "--group", "Z3", "--n-max", "6"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# walklab "));
    assert_eq!(lines[1], "# command: structure");
    assert_eq!(lines[2], "# seed: none");
    assert!(lines[3].starts_with("# config: {"));
    assert!(lines[4].starts_with("# digest: sha256:"));
    // |B_n| in ℤ³ for the standard generators: 1, 7, 25, 63, 129, 231, 377.
    let sizes: Vec<&str> = lines.iter().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(sizes, ["1", "7", "25", "63", "129", "231", "377"]);
}
