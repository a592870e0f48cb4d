use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectral_factor::{fixtures, CoefficientFile, LaurentMatrix, LaurentPoly};
use tempfile::TempDir;

fn spfact(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spfact")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, m: &LaurentMatrix) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, CoefficientFile::from_matrix(m).to_json()).unwrap();
    path
}

fn read(path: &Path) -> LaurentMatrix {
    CoefficientFile::from_json(&std::fs::read_to_string(path).unwrap()).unwrap().to_matrix().unwrap()
}

fn residual_line(text: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix("residual "))
        .expect("residual line")
        .parse()
        .unwrap()
}

#[test]
fn identity_round_trip() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "id.json", &LaurentMatrix::identity(3));
    let output = dir.path().join("out.json");
    let report = dir.path().join("report.json");
    let out = spfact(&[
        "factorize",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
        "--order",
        "8",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(residual_line(&stdout(&out)), 0.0);
    assert!(read(&output).approx_eq(&LaurentMatrix::identity(3), 1e-12));
    let diag: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    for key in ["residual", "unitarity_defect", "det_product_defect", "negative_mass", "per_step"] {
        assert!(diag.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn factorize_then_verify() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (s, _) = fixtures::random_round_trip_density(&mut rng, 2, 1, 10);
    let input = write(&dir, "s.json", &s);
    for side in ["left", "right"] {
        let factor = dir.path().join(format!("f-{side}.json"));
        let out = spfact(&[
            "factorize",
            "--input",
            input.to_str().unwrap(),
            "--output",
            factor.to_str().unwrap(),
            "--order",
            "32",
            "--side",
            side,
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(residual_line(&stdout(&out)) <= 1e-6);
        let out = spfact(&[
            "verify",
            "--density",
            input.to_str().unwrap(),
            "--factor",
            factor.to_str().unwrap(),
            "--side",
            side,
        ]);
        assert!(out.status.success(), "{}\n{}", stdout(&out), stderr(&out));
        let text = stdout(&out);
        assert!(text.contains("max_entry_defect") && text.contains("negative_mass"));
    }
}

#[test]
fn verify_rejects_wrong_factor() {
    let dir = TempDir::new().unwrap();
    let two = LaurentMatrix::from_fn(2, 2, |i, j| LaurentPoly::from_real(0, &[if i == j { 2.0 } else { 0.0 }]));
    let density = write(&dir, "two.json", &two);
    let factor = write(&dir, "id.json", &LaurentMatrix::identity(2));
    let out = spfact(&["verify", "--density", density.to_str().unwrap(), "--factor", factor.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    // I I^* - 2I has two entries of magnitude 1 among four.
    assert_eq!(residual_line(&stdout(&out)), 0.5);
    assert!(stderr(&out).starts_with("error kind=tolerance"));
}

#[test]
fn known_density_right_highest_upper() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "known.json", &fixtures::known_factor_density());
    let output = dir.path().join("out.json");
    let out = spfact(&[
        "factorize",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
        "--side",
        "right",
        "--normalize",
        "highest-upper",
        "--order",
        "40",
        "--scalar-grid",
        "262144",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let factor = read(&output);
    let expect = fixtures::known_right_factor();
    for n in 0..=1 {
        let diff = (factor.coefficient(n) - expect.coefficient(n)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff <= 1e-4, "power {n}: {diff:.2e}");
    }
    let out = spfact(&[
        "verify",
        "--density",
        input.to_str().unwrap(),
        "--factor",
        output.to_str().unwrap(),
        "--side",
        "right",
        "--tol",
        "1e-5",
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
}

#[test]
fn bench_rows() {
    // Default seed. About one draw in ten has determinant zeros close enough
    // to the circle that N = 32 stops short of 1e-8.
    let out = spfact(&["bench", "--size", "2", "--degree", "1", "--trials", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2, "{text}");
    let residual: f64 = lines[1].split_whitespace().last().unwrap().parse().unwrap();
    assert!(residual <= 1e-8, "{residual}");

    let out = spfact(&["bench", "--size", "3", "--degree", "1", "--trials", "0"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 1);
}

#[test]
fn bench_is_independent_of_jobs() {
    let run = |jobs: &str| {
        let out = spfact(&["bench", "--size", "2", "--degree", "2", "--trials", "4", "--seed", "1", "--jobs", jobs]);
        assert!(out.status.success());
        stdout(&out)
            .lines()
            .skip(1)
            .map(|l| l.split_whitespace().last().unwrap().to_string())
            .collect::<Vec<_>>()
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn parse_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = dir.path().join("out.json");
    let res = spfact(&["factorize", "--input", bad.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(stderr(&res).starts_with("error kind=parse msg="));
    assert_eq!(stderr(&res).lines().count(), 1);

    let res = spfact(&["factorize", "--bogus"]);
    assert_eq!(res.status.code(), Some(1));
    assert!(stderr(&res).starts_with("error kind=parse"));
}

#[test]
fn precondition_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let rect = LaurentMatrix::from_fn(2, 3, |_, _| LaurentPoly::from_real(0, &[1.0]));
    let input = write(&dir, "rect.json", &rect);
    let out = dir.path().join("out.json");
    let res = spfact(&["factorize", "--input", input.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(stderr(&res).starts_with("error kind=not-square"));

    let mut s = LaurentMatrix::identity(2);
    s.set(1, 0, LaurentPoly::from_real(1, &[1.0]));
    let input = write(&dir, "nh.json", &s);
    let res = spfact(&["factorize", "--input", input.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(stderr(&res).starts_with("error kind=not-hermitian"));
}
