use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gendermention")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn usage_and_help_exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["bleu", "only-one-file"]).status.code(), Some(1));
}

#[test]
fn extract_counts_sample_corpus() {
    let o = run(&[
        "extract",
        "--occupations",
        path(&data("occupations.txt")),
        "--adjectives",
        path(&data("adjectives.conf")),
        path(&data("sample.conllu")),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.starts_with("occupation,total,male,female,nonbinary\n"));
    assert!(out.contains("nurse,3,1,0,0\n"), "{out}");
    assert!(out.contains("physician,1,0,1,0\n"), "{out}");
    assert!(out.contains("writer,1,0,0,1\n"), "{out}");
}

#[test]
fn extract_with_out_dir_writes_both_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "--out-dir",
        path(tmp.path()),
        "extract",
        "--occupations",
        path(&data("occupations.txt")),
        path(&data("sample.conllu")),
    ]);
    assert!(o.status.success());
    assert!(tmp.path().join("counts.csv").exists());
    let table = fs::read_to_string(tmp.path().join("count_table.csv")).unwrap();
    assert!(table.starts_with("Occupation,Total,Male,Female,Total gendered,Gendered %,Male %,Female %"));
}

#[test]
fn markers_then_correlate() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "--out-dir",
        path(tmp.path()),
        "markers",
        "--occupations",
        path(&data("occupations.txt")),
        "--adjectives",
        path(&data("adjectives.conf")),
        "--counts",
        path(&data("reddit_counts.csv")),
        "--labor",
        path(&data("labor_appendix.csv")),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let markers = tmp.path().join("markers.csv");
    assert!(tmp.path().join("joint.csv").exists());

    let o = run(&["correlate", "--markers", path(&markers), "--permutations", "999", "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("x,y,n,r,slope,intercept,p_perm,permutations,seed"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..3], ["femaleness", "mention_rate", "37"]);
    let r: f64 = row[3].parse().unwrap();
    assert!((r - 0.51).abs() < 0.01, "{r}");
    // same seed, same bytes
    let again = run(&["correlate", "--markers", path(&markers), "--permutations", "999", "--seed", "3"]);
    assert_eq!(again.stdout, o.stdout);
}

#[test]
fn code_groups_from_appendix_mi() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "--out-dir",
        path(tmp.path()),
        "code",
        "--embeddings",
        path(&data("embeddings.txt")),
        "--mi-values",
        path(&data("mi_appendix.csv")),
        "--mi-column",
        "mi_reddit",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let groups = fs::read_to_string(tmp.path().join("group_mi.csv")).unwrap();
    let mut rows = groups.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect::<Vec<_>>());
    let female = rows.next().unwrap();
    let male = rows.next().unwrap();
    assert_eq!(female[0], "female-coded");
    assert_eq!(male[0], "male-coded");
    let (f, m): (f64, f64) = (female[1].parse().unwrap(), male[1].parse().unwrap());
    assert!(f / m >= 3.0, "{f} vs {m}");
}

#[test]
fn bleu_scores_text_files() {
    let tmp = tempfile::tempdir().unwrap();
    let (r, c) = (tmp.path().join("ref.txt"), tmp.path().join("cand.txt"));
    fs::write(&r, "The cat sat on the mat\n").unwrap();
    fs::write(&c, "the cat the cat on the mat").unwrap();
    let o = run(&["bleu", path(&r), path(&c), "--order", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "0.597614\n");

    fs::write(&c, "   ").unwrap();
    assert_eq!(run(&["bleu", path(&r), path(&c)]).status.code(), Some(1));
}

#[test]
fn annotate_stats_and_singular_design() {
    let o = run(&["annotate-stats", path(&data("annotations.csv"))]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.starts_with("gender,occupation,xnor,n,sentiment,offensive,about_gender\n"), "{out}");

    // without male nurses the xnor column equals 1 - gender - occupation
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("three_cells.csv");
    let mut text = String::from("occupation,gender_bit,sentiment,is_offensive,is_about_gender\n");
    for (occ, g) in [("carpenter", 0), ("carpenter", 1), ("nurse", 0)] {
        for i in 0..6 {
            text.push_str(&format!("{occ},{g},0.5,{},{}\n", i % 2, (i / 2) % 2));
        }
    }
    fs::write(&p, text).unwrap();
    let o = run(&["annotate-stats", path(&p), "--ridge", "0"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ridge"));
    assert!(run(&["annotate-stats", path(&p), "--ridge", "1e-6"]).status.success());
}

#[test]
fn synth_is_seeded_and_validates() {
    let spec = data("synth_example.toml");
    let a = run(&["synth", path(&spec), "--seed", "11"]);
    let b = run(&["synth", path(&spec), "--seed", "11"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(run(&["synth", path(&spec), "--seed", "12"]).stdout, a.stdout);
    let exact = run(&["synth", path(&spec), "--exact"]);
    assert!(stdout(&exact).starts_with("occupation,femaleness,genderedness"));

    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(
        &bad,
        "n = 10\nseed = 1\n[[occupation]]\noccupation = \"x\"\nweight = 1.0\nfemaleness = 0.02\nmention_rate = 0.5\nfemale_share = 0.9\n",
    )
    .unwrap();
    let o = run(&["synth", path(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible"));
}

#[test]
fn clean_reddit_writes_json_lines() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("threads.jsonl");
    let tree = r#"{"author":"a","body":"root text","children":[{"author":"b","body":"see https://x.y","children":[{"author":"c","body":"hidden"}]},{"author":"d","body":"kept reply"}]}"#;
    let bot = r#"{"author":"helper_bot","body":"hello","children":[{"author":"e","body":"child"}]}"#;
    fs::write(&input, format!("{tree}\n{bot}\n")).unwrap();
    let o = run(&["clean-reddit", path(&input)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "\"root text\\nkept reply\"\n");
}

#[test]
fn run_config_and_missing_input() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bundle");
    let o = run(&[
        "--out-dir",
        path(&out),
        "run",
        path(&data("appendix_run.toml")),
        "--permutations",
        "200",
        "--resamples",
        "1000",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "complete");
    assert_eq!(manifest["permutations"], 200);

    let cfg = tmp.path().join("cfg.toml");
    let text = fs::read_to_string(data("appendix_run.toml"))
        .unwrap()
        .replace("\"embeddings.txt\"", "\"absent.txt\"")
        .replace("= \"", &format!("= \"{}/", data("").display()));
    fs::write(&cfg, text).unwrap();
    let o = run(&["--out-dir", path(&out), "run", path(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("coding"));
}
