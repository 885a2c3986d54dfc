use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn c2i() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_c2i"));
    cmd.env_remove("C2I_CODEBOOK");
    cmd
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn encode_matches_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let (cb, png, json) = (dir.path().join("cb.txt"), dir.path().join("out.png"), dir.path().join("out.json"));
    let out = run(c2i()
        .arg("encode")
        .arg(fixture("sum_main.c"))
        .arg("--codebook")
        .arg(&cb)
        .arg("--seeds")
        .arg(fixture("seeds.txt"))
        .arg("--png")
        .arg(&png)
        .arg("--json")
        .arg(&json)
        .arg("--verify"));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read(&png).unwrap(), fs::read(fixture("sum_main.png")).unwrap());
    assert_eq!(fs::read(&cb).unwrap(), fs::read(fixture("sum_main.cb.txt")).unwrap());
    assert_eq!(fs::read(&json).unwrap(), fs::read(fixture("sum_main.json")).unwrap());
}

#[test]
fn decode_golden_png_through_env_codebook() {
    let out = run(c2i().arg("decode").arg(fixture("sum_main.png")).env("C2I_CODEBOOK", fixture("sum_main.cb.txt")));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out), fs::read_to_string(fixture("sum_main.json")).unwrap());
}

#[test]
fn raw_output_decodes_and_reencoding_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cb = dir.path().join("cb.txt");
    fs::copy(fixture("sum_main.cb.txt"), &cb).unwrap();
    let raw = dir.path().join("x.c2i");
    let out = run(c2i().arg("encode").arg(fixture("sum_main.json")).arg("--codebook").arg(&cb).arg("--raw").arg(&raw));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read(&cb).unwrap(), fs::read(fixture("sum_main.cb.txt")).unwrap());
    let bytes = fs::read(&raw).unwrap();
    assert_eq!(&bytes[..4], b"C2I1");
    let out = run(c2i().arg("decode").arg(&raw).arg("--codebook").arg(&cb));
    assert_eq!(stdout(&out), fs::read_to_string(fixture("sum_main.json")).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cb = dir.path().join("cb.txt");
    assert_eq!(code(&run(c2i().arg("--help"))), 0);
    assert_eq!(code(&run(c2i().arg("--version"))), 0);
    assert_eq!(code(&run(&mut c2i())), 1);
    assert_eq!(code(&run(c2i().arg("frobnicate"))), 1);
    // no codebook anywhere
    assert_eq!(code(&run(c2i().arg("encode").arg(fixture("sum_main.c")).arg("--png").arg("x.png"))), 1);
    // nothing to write
    assert_eq!(code(&run(c2i().arg("encode").arg(fixture("sum_main.c")).arg("--codebook").arg(&cb))), 1);
    let bad_config = run(c2i()
        .args(["encode", "--box-w", "1", "--png"])
        .arg(dir.path().join("a.png"))
        .arg("--codebook")
        .arg(&cb)
        .arg(fixture("sum_main.c")));
    assert_eq!(code(&bad_config), 1);

    let broken = dir.path().join("broken.c");
    fs::write(&broken, "int main() {\n  int a = ;\n}\n").unwrap();
    let out = run(c2i().arg("encode").arg(&broken).arg("--codebook").arg(&cb).arg("--png").arg(dir.path().join("b.png")));
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("broken.c:2:11"), "{err}");

    let lanes = run(c2i()
        .arg("encode")
        .arg(fixture("sum_main.c"))
        .args(["--fixed-lanes", "1", "--png"])
        .arg(dir.path().join("c.png"))
        .arg("--codebook")
        .arg(&cb));
    assert_eq!(code(&lanes), 2);

    let out = run(c2i().arg("decode").arg(fixture("sum_main.png")).arg("--codebook").arg(fixture("seeds.txt")));
    assert_eq!(code(&out), 2);
}

#[test]
fn eval_prints_report_and_pr_curve() {
    let dir = tempfile::tempdir().unwrap();
    let pr = dir.path().join("pr.csv");
    let out = run(c2i().arg("eval").arg(fixture("scores.csv")).arg(fixture("labels.csv")).arg("--pr").arg(&pr));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let f1 = report["best"]["f1"].as_f64().unwrap();
    let mcc = report["best"]["mcc"].as_f64().unwrap();
    assert!((f1 - 0.8).abs() < 1e-12);
    assert!((mcc - 2.0 / 12f64.sqrt()).abs() < 1e-12);
    assert_eq!(report["best"]["threshold"].as_f64(), Some(0.4));
    // Threshold 0.8 predicts exactly what 0.5 would: F1 0.5, MCC 0.
    let at_half = &report["curve"][1];
    assert_eq!(at_half["f1"].as_f64(), Some(0.5));
    assert_eq!(at_half["mcc"].as_f64(), Some(0.0));
    let csv = fs::read_to_string(&pr).unwrap();
    assert!(csv.starts_with("threshold,precision,recall,f1,mcc\n0.9,1,0.5,"));
    assert_eq!(csv.lines().count(), 5);

    let single = dir.path().join("single.csv");
    fs::write(&single, "id,label\ns1,1\ns2,1\ns3,1\ns4,1\n").unwrap();
    assert_eq!(code(&run(c2i().arg("eval").arg(fixture("scores.csv")).arg(&single))), 2);
}

fn write_corpus(dir: &Path) -> PathBuf {
    let src = dir.join("src");
    fs::create_dir_all(&src).unwrap();
    let bodies = [
        "int f(int x) { return x + 1; }",
        "int g(char *p) { while (p) { p = p + 1; } return 0; }",
        "void h() { int a[4]; a[0] = 1; }",
        "int k() { int i; for (i = 0; i < 3; i++) { k(); } return i; }",
    ];
    let mut manifest = String::new();
    for (i, body) in bodies.iter().enumerate() {
        fs::write(src.join(format!("s{i}.c")), body).unwrap();
        let split = if i < 3 { "train" } else { "test" };
        let pos = i == 0;
        manifest.push_str(&format!(
            "{{\"id\":\"s{i}\",\"split\":\"{split}\",\"labels\":[{pos},false,false,false,false],\"image\":null,\"ast\":\"src/s{i}.c\"}}\n"
        ));
    }
    let path = dir.join("manifest.ndjson");
    fs::write(&path, manifest).unwrap();
    path
}

#[test]
fn corpus_commands_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_corpus(dir.path());
    let cb = dir.path().join("cb.txt");

    // s2 uses an array subscript, which the front end rejects.
    let stats = run(c2i().arg("stats").arg(&manifest).arg("--csv").arg(dir.path().join("stats.csv")));
    assert_eq!(code(&stats), 0);
    let summary: serde_json::Value = serde_json::from_str(&stdout(&stats)).unwrap();
    assert_eq!(summary["samples"], 3);
    assert_eq!(summary["excluded"], 1);
    assert!(String::from_utf8_lossy(&stats.stderr).contains("sample `s2`"));
    let csv = fs::read_to_string(dir.path().join("stats.csv")).unwrap();
    assert!(csv.starts_with("histogram,value,count\ndepth,"));

    let over = dir.path().join("over.ndjson");
    let out = run(c2i().arg("oversample").arg(&manifest).args(["--category", "CWE-119", "--target-ratio", "0.5", "-o"]).arg(&over));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&over).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().last().unwrap().contains("\"copy\":1"));
    let bad_ratio = run(c2i().arg("oversample").arg(&manifest).args(["--category", "119", "--target-ratio", "1.5", "-o"]).arg(&over));
    assert_eq!(code(&bad_ratio), 1);
    let none = run(c2i().arg("oversample").arg(&manifest).args(["--category", "CWE-476", "-o"]).arg(&over));
    assert_eq!(code(&none), 2);

    let encoded = dir.path().join("encoded.ndjson");
    let out = run(c2i()
        .arg("encode")
        .arg("--manifest")
        .arg(&over)
        .arg("--out-dir")
        .arg(dir.path().join("img"))
        .arg("--out-manifest")
        .arg(&encoded)
        .arg("--codebook")
        .arg(&cb)
        .args(["--jobs", "2"]));
    assert_eq!(code(&out), 2, "the unparsable sample is reported");
    let m = fs::read_to_string(&encoded).unwrap();
    assert!(m.starts_with("{\"codebook\":\"cb.txt\"}\n"));
    assert!(m.contains("\"image\":\"img/00000-s0.png\""));
    assert_eq!(m.matches("img/00000-s0.png").count(), 2, "copies share the original image");

    let batches = dir.path().join("batches");
    let out = run(c2i().arg("batch").arg(&encoded).args(["--split", "test", "--batch-size", "2", "--out-dir"]).arg(&batches));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let index = fs::read_to_string(batches.join("batches.ndjson")).unwrap();
    assert_eq!(index.lines().count(), 1);
    let line: serde_json::Value = serde_json::from_str(index.lines().next().unwrap()).unwrap();
    assert_eq!(line["samples"][0]["id"], "s3");
    let tensor = fs::read(batches.join("batch-00000.c2i")).unwrap();
    let (h, w) = (line["height"].as_u64().unwrap() as usize, line["width"].as_u64().unwrap() as usize);
    assert_eq!(tensor.len(), 16 + h * w * 3);
    let out = run(c2i().arg("batch").arg(&encoded).args(["--batch-size", "2", "--out-dir"]).arg(&batches));
    assert_eq!(code(&out), 2, "train sample s2 has no image");
}

#[test]
fn check_reports_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    fs::create_dir_all(corpus.join("nested")).unwrap();
    fs::copy(fixture("sum_main.c"), corpus.join("sum_main.c")).unwrap();
    fs::copy(fixture("sum_main.json"), corpus.join("nested/sum_main.json")).unwrap();
    fs::write(corpus.join("loop.c"), "int s(int n) { int t = 0; while (n > 0) { t += n; n--; } return t; }").unwrap();
    fs::write(corpus.join("notes.txt"), "ignored").unwrap();
    let cb = dir.path().join("cb.txt");
    let first = run(c2i().arg("check").arg(&corpus).arg("--codebook").arg(&cb).args(["--jobs", "3"]));
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let report = stdout(&first);
    assert!(report.ends_with("checked 3: 3 round-tripped, 0 failed, 0 unreadable\n"), "{report}");
    assert!(!cb.exists(), "check leaves the codebook file alone");
    let second = run(c2i().arg("check").arg(&corpus).arg("--codebook").arg(&cb).args(["--jobs", "1", "--collapse-cols"]));
    assert_eq!(code(&second), 0);

    fs::write(corpus.join("zz.json"), "{\"kind\": 3}").unwrap();
    let out = run(c2i().arg("check").arg(&corpus).arg("--codebook").arg(&cb));
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("SKIP"));
}
