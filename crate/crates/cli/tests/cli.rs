use sha2::{Digest, Sha256};
use std::path::Path;
use std::process::{Command, Output};

fn symrmt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symrmt"))
        .args(args)
        .current_dir(dir)
        .env_remove("RMT_THREADS")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = symrmt(dir, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn fails_with(dir: &Path, args: &[&str], code: i32) -> String {
    let o = symrmt(dir, args);
    assert_eq!(
        o.status.code(),
        Some(code),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stderr).unwrap()
}

/// Data rows of a CSV with `#` header lines, split on commas.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn col(text: &str, name: &str) -> Vec<f64> {
    let header: Vec<&str> = text.lines().find(|l| !l.starts_with('#')).unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    rows(text).iter().map(|r| r[i].parse().unwrap()).collect()
}

fn note<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    let prefix = format!("# {key}: ");
    text.lines().find_map(|l| l.strip_prefix(prefix.as_str()))
}

#[test]
fn gaussian_sample_shape_and_determinism() {
    let d = tempfile::tempdir().unwrap();
    let args = [
        "sample", "--kind", "gaussian", "--beta", "2", "--n", "100", "--draws", "10", "--seed", "7",
    ];
    let a = ok(d.path(), &args);
    assert_eq!(a, ok(d.path(), &args));
    let r = rows(&a);
    assert_eq!(r.len(), 1000);
    assert_eq!(r[999][0], "9");
    assert_eq!(note(&a, "seed"), Some("7"));
}

#[test]
fn chiral_zero_modes_flagged() {
    let d = tempfile::tempdir().unwrap();
    let out = ok(
        d.path(),
        &[
            "sample", "--kind", "chiral", "--p", "5", "--q", "3", "--beta", "2", "--draws", "4", "--seed", "1",
        ],
    );
    for draw in 0..4 {
        let zeros = rows(&out)
            .iter()
            .filter(|r| r[0] == draw.to_string() && r[3] == "1")
            .count();
        assert_eq!(zeros, 2, "draw {draw}");
    }
}

#[test]
fn bad_beta_names_allowed_set() {
    let d = tempfile::tempdir().unwrap();
    let err = fails_with(
        d.path(),
        &["sample", "--kind", "gaussian", "--beta", "3", "--seed", "1"],
        2,
    );
    assert!(err.contains("1, 2, 4"), "{err}");
}

#[test]
fn stats_schema_errors() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("bad.csv"), "index,value\n0,1.0\n").unwrap();
    let err = fails_with(d.path(), &["stats", "--in", "bad.csv", "--observable", "ps"], 2);
    assert!(err.contains("draw") && err.contains("level"), "{err}");
    std::fs::write(d.path().join("empty.csv"), "# nothing\ndraw,index,level,zero\n").unwrap();
    fails_with(d.path(), &["stats", "--in", "empty.csv", "--observable", "ps"], 2);
    fails_with(d.path(), &["stats", "--in", "missing.csv", "--observable", "ps"], 2);
}

#[test]
fn poisson_surrogate_is_exponential() {
    let d = tempfile::tempdir().unwrap();
    let out = ok(
        d.path(),
        &[
            "stats",
            "--surrogate",
            "poisson",
            "--observable",
            "ps",
            "--bin-width",
            "0.25",
            "--smax",
            "3",
            "--seed",
            "3",
        ],
    );
    let (s, p) = (col(&out, "s"), col(&out, "value"));
    for (s, p) in s.iter().zip(&p) {
        // Bin average of e^{-s} over a 0.25 bin differs from the midpoint value by < 0.3%.
        assert!((p - (-s).exp()).abs() < 0.03, "s={s}: {p}");
    }
}

#[test]
fn goe_number_variance_below_poisson() {
    let d = tempfile::tempdir().unwrap();
    ok(
        d.path(),
        &[
            "sample", "--kind", "gaussian", "--beta", "1", "--n", "200", "--draws", "40", "--seed", "5", "--out",
            "goe.csv",
        ],
    );
    let out = ok(
        d.path(),
        &[
            "stats",
            "--in",
            "goe.csv",
            "--observable",
            "sigma2",
            "--Lmax",
            "10",
            "--unfold",
            "semicircle",
        ],
    );
    let (l, s2) = (col(&out, "L"), col(&out, "value"));
    assert!(s2.windows(2).all(|w| w[1] >= w[0]), "{s2:?}");
    for (l, v) in l.iter().zip(&s2) {
        if *l >= 2.0 {
            assert!(v < l, "L={l}: {v}");
        }
    }
}

#[test]
fn classify_examples() {
    let d = tempfile::tempdir().unwrap();
    let aiii = ok(d.path(), &["classify", "--class", "AIII", "--p", "5", "--q", "3"]);
    assert!(aiii.contains("BC_3, multiplicities (2,1,4)"), "{aiii}");
    let all = ok(d.path(), &["classify", "--all", "--format", "csv"]);
    assert_eq!(rows(&all).len(), 12);
    let ci = ok(d.path(), &["classify", "--class", "CI"]);
    assert!(
        ci.contains("lambda = rho = (m_s+m_l-1)/2 = 0, sigma = (m_l-1)/2 = 0"),
        "{ci}"
    );
    let csv = ok(
        d.path(),
        &["classify", "--class", "BDI", "--p", "4", "--q", "4", "--format", "csv"],
    );
    let r = rows(&csv);
    assert_eq!(r.len(), 3);
    assert_eq!(r[0][3], "D");
    fails_with(d.path(), &["classify", "--class", "EVII"], 2);
}

#[test]
fn dmpk_exact_and_sde_agree() {
    let d = tempfile::tempdir().unwrap();
    let out = ok(
        d.path(),
        &[
            "dmpk",
            "--n",
            "2",
            "--s",
            "2",
            "--method",
            "exact",
            "--compare",
            "sde",
            "--walkers",
            "4000",
            "--seed",
            "9",
        ],
    );
    assert_eq!(
        note(&out, "agreement"),
        Some("all points within 3 combined stderr"),
        "{out}"
    );
}

#[test]
fn dmpk_ballistic_limit() {
    let d = tempfile::tempdir().unwrap();
    let out = ok(
        d.path(),
        &[
            "dmpk",
            "--n",
            "3",
            "--s",
            "0.01",
            "--method",
            "sde",
            "--walkers",
            "500",
            "--seed",
            "2",
        ],
    );
    let g = col(&out, "mean_g")[0];
    assert!((g - 3.0).abs() < 0.05, "{g}");
}

#[test]
fn dmpk_guards() {
    let d = tempfile::tempdir().unwrap();
    let err = fails_with(d.path(), &["dmpk", "--s", "2", "--method", "exact", "--beta", "1"], 2);
    assert!(err.contains("beta = 2"), "{err}");
    fails_with(d.path(), &["dmpk", "--n", "5", "--s", "1", "--method", "exact"], 2);
    fails_with(d.path(), &["dmpk", "--s", "2,1", "--method", "exact"], 2);
}

#[test]
fn cs_check_reports_second_order() {
    let d = tempfile::tempdir().unwrap();
    let out = ok(
        d.path(),
        &["cs-check", "--family", "C", "--rank", "2", "--m-o", "1", "--m-l", "1"],
    );
    let slope: f64 = note(&out, "slope").unwrap().parse().unwrap();
    assert!((slope - 2.0).abs() < 0.3, "{out}");
    assert_eq!(rows(&out).len(), 3);
    // A box touching a wall is a validation error.
    fails_with(
        d.path(),
        &["cs-check", "--family", "B", "--lo", "-0.2", "--hi", "0.5"],
        2,
    );
}

#[test]
fn lie_fixtures_pass() {
    let d = tempfile::tempdir().unwrap();
    let out = ok(d.path(), &["lie-fixtures"]);
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 5);
}

#[test]
fn manifest_digests_match_outputs() {
    let d = tempfile::tempdir().unwrap();
    ok(
        d.path(),
        &[
            "dmpk",
            "--n",
            "2",
            "--s",
            "0.5,1",
            "--walkers",
            "200",
            "--seed",
            "4",
            "--out",
            "g.csv",
        ],
    );
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("g.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 4);
    assert_eq!(m["parameters"]["walkers"], 200);
    let outputs = m["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);
    for o in outputs {
        let bytes = std::fs::read(d.path().join(o["file"].as_str().unwrap())).unwrap();
        assert_eq!(o["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
}

#[test]
fn seed_policy() {
    let d = tempfile::tempdir().unwrap();
    let err = fails_with(d.path(), &["sample", "--kind", "gaussian", "--n", "4", "--strict"], 2);
    assert!(err.contains("--seed"), "{err}");
    // Deterministic commands need no seed even in strict mode.
    ok(d.path(), &["classify", "--all", "--strict"]);
    let o = symrmt(
        d.path(),
        &["sample", "--kind", "gaussian", "--n", "4", "--out", "x.csv"],
    );
    assert!(o.status.success());
    let logged = String::from_utf8(o.stderr).unwrap();
    let seed: u64 = logged.trim().rsplit(' ').next().unwrap().parse().unwrap();
    let m = std::fs::read_to_string(d.path().join("x.csv.manifest.json")).unwrap();
    assert!(m.contains(&format!("\"seed\": {seed}")), "{m}");
}

#[test]
fn config_mirrors_flags_and_flags_win() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(
        d.path().join("run.toml"),
        "seed = 5\n[sample]\nkind = \"gaussian\"\nn = 4\ndraws = 2\n",
    )
    .unwrap();
    let from_config = ok(d.path(), &["sample", "--config", "run.toml"]);
    let from_flags = ok(
        d.path(),
        &[
            "sample", "--kind", "gaussian", "--n", "4", "--draws", "2", "--seed", "5",
        ],
    );
    assert_eq!(from_config, from_flags);
    let overridden = ok(d.path(), &["sample", "--config", "run.toml", "--n", "3"]);
    assert_eq!(rows(&overridden).len(), 6);
    std::fs::write(d.path().join("bad.toml"), "[sample]\nbogus = 1\n").unwrap();
    let err = fails_with(d.path(), &["sample", "--kind", "gaussian", "--config", "bad.toml"], 2);
    assert!(err.contains("bogus"), "{err}");
}

#[test]
fn invalid_thread_cap() {
    let o = Command::new(env!("CARGO_BIN_EXE_symrmt"))
        .args(["lie-fixtures"])
        .env("RMT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
