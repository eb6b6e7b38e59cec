use std::path::{Path, PathBuf};
use std::process::Command;

use povmkit::extremality::CertificateDocument;
use povmkit::instances::{coin, computational_pvm, noisy_z, trine};
use povmkit::json::{povm_from_json, povm_to_json};
use povmkit::operator::Tolerances;
use povmkit::povm::Povm;
use povmkit::smearing::SmearingDocument;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
}

impl Run {
    fn value(&self, key: &str) -> Option<&str> {
        self.stdout
            .lines()
            .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
    }
}

fn povm_cmd(args: &[&str], envs: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_povm"));
    cmd.args(args).env_remove("POVM_TOL_EQ");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
    }
}

fn povm(args: &[&str]) -> Run {
    povm_cmd(args, &[])
}

fn write_povm(dir: &TempDir, name: &str, a: &Povm) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, povm_to_json(a)).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_povm(p: &Path) -> Povm {
    povm_from_json(&std::fs::read_to_string(p).unwrap(), &Tolerances::default()).unwrap()
}

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let ok = write_povm(&dir, "coin.json", &coin());
    let r = povm(&["validate", s(&ok)]);
    assert_eq!(r.code, 0);
    assert_eq!(r.value("status"), Some("ok"));

    // effects 0.6 I and 0.6 I sum to 1.2 I
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"dim":2,"outcomes":["a","b"],"effects":[
            [[[0.6,0],[0,0]],[[0,0],[0.6,0]]],
            [[[0.6,0],[0,0]],[[0,0],[0.6,0]]]]}"#,
    )
    .unwrap();
    let r = povm(&["validate", s(&bad)]);
    assert_eq!(r.code, 1);
    assert_eq!(r.value("error"), Some("NotNormalized"));
    let residual: f64 = r.value("residual").unwrap().parse().unwrap();
    assert!((residual - 0.2).abs() < 1e-12);

    let truncated = dir.path().join("trunc.json");
    std::fs::write(&truncated, r#"{"dim":2,"outcomes":["a""#).unwrap();
    let r = povm(&["validate", s(&truncated)]);
    assert_eq!(r.code, 2);
    assert!(r.value("error").unwrap().starts_with("MalformedJson"));

    let missing = dir.path().join("missing.json");
    assert_eq!(povm(&["validate", s(&missing)]).code, 2);
}

#[test]
fn classify_reports_properties() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (
            "pvm.json",
            computational_pvm(3),
            "true",
            "true",
            "true",
            "0",
        ),
        ("trine.json", trine(), "false", "false", "true", "0"),
        ("coin.json", coin(), "false", "true", "false", "4"),
    ];
    for (name, a, pvm, commutative, extreme, kernel) in cases {
        let p = write_povm(&dir, name, &a);
        let r = povm(&["classify", s(&p), "--extremality"]);
        assert_eq!(r.code, 0, "{name}");
        assert_eq!(r.value("pvm"), Some(pvm), "{name}");
        assert_eq!(r.value("commutative"), Some(commutative), "{name}");
        assert_eq!(r.value("extreme"), Some(extreme), "{name}");
        assert_eq!(r.value("kernel_dimension"), Some(kernel), "{name}");
    }
    let p = write_povm(&dir, "plain.json", &coin());
    let r = povm(&["classify", s(&p)]);
    assert_eq!(r.value("extreme"), None);
}

#[test]
fn decompose_writes_certificates() {
    let dir = TempDir::new().unwrap();
    let input = write_povm(&dir, "coin.json", &coin());
    let out = dir.path().join("cert.json");
    let json = dir.path().join("report.json");
    let r = povm(&["decompose", s(&input), "-o", s(&out), "--json", s(&json)]);
    assert_eq!(r.code, 0);
    let cert: CertificateDocument =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(cert.weight, 0.5);
    assert!(cert.residual <= 1e-9);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["command"], "decompose");
    assert!(report["residuals"]["midpoint"].as_f64().unwrap() <= 1e-9);

    let pvm = write_povm(&dir, "pvm.json", &computational_pvm(2));
    let r = povm(&["decompose", s(&pvm), "-o", s(&out)]);
    assert_eq!(r.code, 3);
    assert_eq!(r.value("error"), Some("ExtremeInput"));

    let nz = write_povm(&dir, "noisy.json", &noisy_z(0.7));
    let r = povm(&["decompose", s(&nz), "-o", s(&out), "--witness", "proof1"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.value("pair"), Some("0,1"));
    let midpoint: f64 = r.value("residual.midpoint").unwrap().parse().unwrap();
    assert!(midpoint <= 1e-9);
}

#[test]
fn diagonalize_and_smear() {
    let dir = TempDir::new().unwrap();
    let input = write_povm(&dir, "coin.json", &coin());
    let form = dir.path().join("form.json");
    let r = povm(&["diagonalize", s(&input), "-o", s(&form)]);
    assert_eq!(r.code, 0);
    assert_eq!(r.value("blocks"), Some("1"));
    assert_eq!(r.value("deterministic"), Some("false"));
    let doc: SmearingDocument =
        serde_json::from_str(&std::fs::read_to_string(&form).unwrap()).unwrap();
    assert_eq!(doc.kernel, vec![vec![0.5, 0.5]]);

    let smeared = dir.path().join("smeared.json");
    assert_eq!(povm(&["smear", s(&form), "-o", s(&smeared)]).code, 0);
    assert!(read_povm(&smeared).max_distance(&coin()) <= 1e-9);

    let trine_path = write_povm(&dir, "trine.json", &trine());
    let r = povm(&["diagonalize", s(&trine_path), "-o", s(&form)]);
    assert_eq!(r.code, 4);
    assert_eq!(r.value("error"), Some("NotCommutative"));
}

#[test]
fn smear_with_identity_kernel_returns_the_pvm() {
    let dir = TempDir::new().unwrap();
    let e = computational_pvm(3);
    let form = dir.path().join("form.json");
    std::fs::write(
        &form,
        format!(
            r#"{{"pvm":{},"kernel":[[1,0,0],[0,1,0],[0,0,1]]}}"#,
            povm_to_json(&e)
        ),
    )
    .unwrap();
    let out = dir.path().join("out.json");
    let r = povm(&["smear", s(&form), "-o", s(&out)]);
    assert_eq!(r.code, 0);
    assert_eq!(r.value("pvm"), Some("true"));
    assert!(read_povm(&out).max_distance(&e) == 0.0);
}

#[test]
fn verify_theorem_runs() {
    let dir = TempDir::new().unwrap();
    let dump = dir.path().join("dump.json");
    let r = povm(&[
        "verify-theorem",
        "--trials",
        "200",
        "--dim",
        "4",
        "--outcomes",
        "3",
        "--seed",
        "11",
        "--dump",
        s(&dump),
    ]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.value("passed"), Some("200"));
    assert_eq!(r.value("failed"), Some("0"));
    assert!(!dump.exists());

    // one outcome forces a deterministic kernel, so the single trial is a PVM
    let r = povm(&[
        "verify-theorem",
        "--trials",
        "1",
        "--dim",
        "3",
        "--outcomes",
        "1",
    ]);
    assert_eq!(r.code, 0);
    assert_eq!(r.value("branch.pvm"), Some("1"));

    let r = povm(&[
        "verify-theorem",
        "--trials",
        "0",
        "--dim",
        "2",
        "--outcomes",
        "2",
    ]);
    assert_eq!(r.code, 2);
}

#[test]
fn gen_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for kind in [
        "povm",
        "pvm",
        "commutative",
        "commutative-deterministic",
        "state",
    ] {
        let args = |p: &Path| {
            vec![
                "gen".to_string(),
                "--kind".into(),
                kind.into(),
                "--dim".into(),
                "3".into(),
                "--outcomes".into(),
                "2".into(),
                "--seed".into(),
                "9".into(),
                "-o".into(),
                s(p).to_string(),
            ]
        };
        let ra = povm(&args(&a).iter().map(String::as_str).collect::<Vec<_>>());
        let rb = povm(&args(&b).iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(ra.code, 0, "{kind}");
        assert_eq!(ra.stdout, rb.stdout);
        assert_eq!(
            std::fs::read(&a).unwrap(),
            std::fs::read(&b).unwrap(),
            "{kind}"
        );
    }
    let r = povm(&[
        "gen",
        "--kind",
        "pvm",
        "--dim",
        "2",
        "--outcomes",
        "3",
        "-o",
        s(&a),
    ]);
    assert_eq!(r.code, 2);
    assert_eq!(r.value("error"), Some("BadPartition"));
}

#[test]
fn tolerance_flags_and_environment() {
    let dir = TempDir::new().unwrap();
    // off by 1e-6 on the first diagonal entry
    let p = dir.path().join("near.json");
    std::fs::write(
        &p,
        r#"{"dim":2,"outcomes":["a","b"],"effects":[
            [[[0.500001,0],[0,0]],[[0,0],[0.5,0]]],
            [[[0.5,0],[0,0]],[[0,0],[0.5,0]]]]}"#,
    )
    .unwrap();
    assert_eq!(povm(&["validate", s(&p)]).code, 1);
    let r = povm(&["validate", s(&p), "--tol-eq", "1e-5"]);
    assert_eq!(r.code, 0);
    assert_eq!(
        r.value("tol_eq").map(|v| v.split(' ').next().unwrap()),
        Some("1.000000e-5")
    );
    assert_eq!(
        povm_cmd(&["validate", s(&p)], &[("POVM_TOL_EQ", "1e-5")]).code,
        0
    );
    assert_eq!(povm(&["validate", s(&p), "--tol-rank", "-1"]).code, 2);
}
