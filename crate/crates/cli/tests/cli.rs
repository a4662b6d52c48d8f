use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn examples() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples")
}

fn golden() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden")
}

fn ex(name: &str) -> String {
    examples().join(name).to_string_lossy().into_owned()
}

fn plq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plq"))
        .args(args)
        .output()
        .expect("run plq")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn sat_exit_codes() {
    let cases = [
        ("tiny_sat.plq", 0, "sat"),
        ("one_two.plq", 1, "unsat"),
        ("square.plq", 0, "sat"),
        ("square_bounded.plq", 2, "unknown"),
    ];
    for (name, want, first) in cases {
        let out = plq(&["sat", &ex(name)]);
        assert_eq!(code(&out), want, "{name}");
        assert_eq!(stdout(&out).lines().next(), Some(first), "{name}");
    }
}

#[test]
fn external_verdicts_close_the_open_leaves() {
    let out = plq(&[
        "sat",
        &ex("square_bounded.plq"),
        "--verdicts",
        &ex("square_bounded.verdicts"),
    ]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout(&out).trim(), "unsat");
}

#[test]
fn entailment_and_countermodel() {
    let out = plq(&["entails", &ex("chain.plq")]);
    assert_eq!((code(&out), stdout(&out).trim().to_string()), (0, "entailed".to_string()));
    let out = plq(&["entails", &ex("incompleteness_k1.plq")]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout(&out), "countermodel\np = 1\nq = 2\n");
}

#[test]
fn proof_checking() {
    for name in ["id_weak.proof", "wem.proof", "p9.proof"] {
        let out = plq(&["check-proof", &ex(name)]);
        assert_eq!(code(&out), 0, "{name}: {}", stdout(&out));
        assert!(stdout(&out).starts_with("ok: "));
    }
    let out = plq(&["check-proof", &ex("perm.proof"), "--hyps", &ex("perm.plq")]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let out = plq(&["check-proof", &ex("bad_premise_ref.proof")]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("BadPremiseRef"));
    let out = plq(&["check-proof", &ex("wrong_subst.proof")]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("ConclusionMismatch"));
}

#[test]
fn certificates() {
    let valid = plq(&["verify-cert", &ex("null.plq"), &ex("null.cert")]);
    assert_eq!((code(&valid), stdout(&valid).trim().to_string()), (0, "valid".to_string()));
    let valid2 = plq(&["verify-cert", &ex("null2.plq"), &ex("null2.cert")]);
    assert_eq!(code(&valid2), 0);
    let bad = plq(&["verify-cert", &ex("null.plq"), &ex("null_perturbed.cert")]);
    assert_eq!(code(&bad), 1);
    assert!(stdout(&bad).starts_with("invalid: "));
}

#[test]
fn canon_and_eval() {
    let out = plq(&["canon", "-e", "(bot -o p)"]);
    assert_eq!((code(&out), stdout(&out)), (0, "(0 * I)\n".to_string()));
    let out = plq(&["canon", &ex("formulas.txt")]);
    assert_eq!(stdout(&out).lines().count(), 3);
    let out = plq(&["eval", &ex("model.txt"), "p . q"]);
    assert_eq!(stdout(&out).trim(), "1/2");
    let out = plq(&["eval", &ex("model.txt"), "p |- q"]);
    assert_eq!(code(&out), 1);
    let out = plq(&["eval", &ex("model.txt"), "q |- p"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn emitted_leaves_match_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_string_lossy().into_owned();
    let out = plq(&["emit-etr", &ex("square_bounded.plq"), "--emit-dir", &d]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for leaf in ["L0", "L1"] {
        let got = fs::read_to_string(dir.path().join(format!("{leaf}.smt2"))).unwrap();
        let want = fs::read_to_string(golden().join(format!("square_bounded_{leaf}.smt2"))).unwrap();
        assert_eq!(got, want, "{leaf}");
    }
    let manifest = fs::read_to_string(dir.path().join("manifest.tsv")).unwrap();
    assert_eq!(manifest.lines().count(), 2);
    assert!(manifest.lines().all(|l| l.split('\t').count() == 2));

    let again = tempfile::tempdir().unwrap();
    let d2 = again.path().to_string_lossy().into_owned();
    plq(&["emit-etr", &ex("square_bounded.plq"), "--emit-dir", &d2]);
    for name in ["L0.smt2", "L1.smt2", "manifest.tsv"] {
        assert_eq!(
            fs::read(dir.path().join(name)).unwrap(),
            fs::read(again.path().join(name)).unwrap()
        );
    }
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["sat".to_string(), ex("square.plq"), "--trace".to_string()],
        vec!["entails".to_string(), ex("incompleteness_k1.plq")],
        vec!["audit-rules".to_string(), "--samples".into(), "3".into(), "--models".into(), "3".into()],
    ] {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        assert_eq!(plq(&args).stdout, plq(&args).stdout, "{args:?}");
    }
}

#[test]
fn usage_errors_exit_3() {
    let cases: Vec<Vec<String>> = vec![
        vec![],
        vec!["frobnicate".into()],
        vec!["sat".into(), "--logic".into(), "al".into(), ex("square.plq")],
        vec!["sat".into(), "--logic".into(), "al".into(), "--budget".into(), "2".into(), ex("tiny_sat.plq")],
        vec!["sat".into(), ex("chain.plq")],
        vec!["entails".into(), ex("tiny_sat.plq")],
        vec!["parse".into(), "-e".into(), "p -o".into()],
        vec!["sat".into(), "/nonexistent/problem.plq".into()],
    ];
    for args in cases {
        let a: Vec<&str> = args.iter().map(String::as_str).collect();
        assert_eq!(code(&plq(&a)), 3, "{args:?}");
    }
    assert_eq!(code(&plq(&["--help"])), 0);
}
