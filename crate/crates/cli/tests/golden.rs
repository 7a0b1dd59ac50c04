// Byte-exact reports for one invocation of every subcommand.
// Regenerate with PROJCHAN_BLESS=1 after an intended output change.

use std::path::PathBuf;

use projchan_cli::run;

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn invoke(args: &[String]) -> (u8, Vec<u8>) {
    let mut argv = vec!["projchan".to_string()];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(&argv, &mut out, &mut err);
    (code, out)
}

fn check(name: &str, args: &[&str], want_code: u8) {
    let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    let (code, first) = invoke(&args);
    assert_eq!(code, want_code, "{name}");
    let (_, second) = invoke(&args);
    assert_eq!(first, second, "{name}: repeated run differs");

    let path = golden_dir().join(name);
    if std::env::var_os("PROJCHAN_BLESS").is_some() {
        std::fs::write(&path, &first).unwrap();
        return;
    }
    let want = std::fs::read(&path)
        .unwrap_or_else(|e| panic!("{}: {e}; run with PROJCHAN_BLESS=1", path.display()));
    assert!(
        first == want,
        "{name} differs from golden:\n{}",
        String::from_utf8_lossy(&first)
    );
}

#[test]
fn golden_validate() {
    check("validate_wh3.json", &["validate", "--spec", "wh:d=3"], 0);
    check("validate_not_tp.json", &["validate", "--file", &fixture("not_tp.json")], 2);
}

#[test]
fn golden_zoo() {
    check("zoo_families.json", &["zoo"], 0);
    check("zoo_coarse.json", &["zoo", "--spec", "coarse:n=2,D=2"], 0);
}

#[test]
fn golden_minent() {
    check("minent_wh3.json", &["minent", "--spec", "wh:d=3", "--alpha", "2", "--starts", "4"], 0);
    check("minent_pinch.csv", &["minent", "--spec", "pinch:d=3,blocks=2+1", "--starts", "4", "--format", "csv"], 0);
}

#[test]
fn golden_norm() {
    check("norm_casimir_reducible.json", &["norm", "--spec", "casimir-reducible", "--starts", "4"], 0);
}

#[test]
fn golden_characterize() {
    check(
        "characterize_shiftpinch.json",
        &["characterize", "--spec", "shiftpinch:d=4,K=1,2", "--alphas", "0.5,2", "--starts", "4"],
        0,
    );
}

#[test]
fn golden_additivity() {
    check(
        "additivity_wh3_weyl3.json",
        &["additivity", "--spec", "wh:d=3", "--spec", "weyl:d=3", "--alpha", "2", "--starts", "4", "--check-lemma3", "50"],
        0,
    );
}

#[test]
fn golden_capacity() {
    check("capacity_weyl4.json", &["capacity", "--spec", "weyl:d=4", "--starts", "4", "--chi-trials", "3"], 0);
}

#[test]
fn golden_covariance() {
    check("covariance_stretch.json", &["covariance", "--spec", "stretch:d=3,lambda=0.5"], 0);
}

#[test]
fn golden_eof() {
    check("eof_bell.json", &["eof", "--state", &fixture("bell.json"), "--starts", "2"], 0);
}

#[test]
fn golden_dilate() {
    check("dilate_wh3.csv", &["dilate", "--spec", "wh:d=3", "--format", "csv"], 0);
}
