//! One line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use c2i_core::corpus::{
    make_batches, oversample, BatchTensor, Category, Confusion, CorpusManifest, Sample, Split,
    evaluate,
};
use c2i_core::cparser::parse_source;
use c2i_core::gen::{random_ast, GenConfig};
use c2i_core::render::{plan_layout, LayoutPlan};
use c2i_core::{compact, decode, Ast, AstNode, ColorCodebook, Encoder, ImageRep};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TREES: usize = 1000;
const TIME_LIMIT: Duration = Duration::from_secs(60);
const METRIC_TOL: f64 = 1e-12;
const SUM_MAIN: &str = include_str!("fixtures/sum_main.c");

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(name: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { name, pass, detail }
}

struct Corpus {
    plans: Vec<LayoutPlan>,
    drawn: Vec<ImageRep>,
    book: ColorCodebook,
}

fn losslessness() -> (Outcome, Corpus) {
    let config = GenConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let asts: Vec<Ast> = (0..TREES).map(|_| random_ast(&mut rng, &config)).collect();
    let encoder = Encoder::default();
    let mut book = ColorCodebook::with_funcdef_red();
    let mut exact = 0;
    let mut plans = Vec::with_capacity(TREES);
    let mut drawn = Vec::with_capacity(TREES);
    let start = Instant::now();
    for ast in &asts {
        book.assign_tree(ast.root()).expect("codebook capacity");
        plans.push(plan_layout(ast, &encoder.render).expect("valid config"));
        let raw = encoder.draw(ast, &book).expect("frozen render");
        let image = compact(&raw).expect("non-white");
        if decode(&image, &book).ok().as_ref() == Some(ast) {
            exact += 1;
        }
        drawn.push(raw);
    }
    let elapsed = start.elapsed();
    let depth = asts.iter().map(Ast::depth).max().unwrap_or(0);
    let width = asts.iter().map(Ast::max_level_width).max().unwrap_or(0);
    let result = outcome(
        "losslessness",
        exact == TREES && elapsed < TIME_LIMIT,
        format!(
            "{exact}/{TREES} exact round trips in {:.2}s (limit {}s; max depth {depth}, max level width {width})",
            elapsed.as_secs_f64(),
            TIME_LIMIT.as_secs()
        ),
    );
    (result, Corpus { plans, drawn, book })
}

fn planarity(corpus: &Corpus) -> Outcome {
    let mut bad = Vec::new();
    let mut pairs = 0usize;
    for (i, plan) in corpus.plans.iter().enumerate() {
        pairs += plan.edges.len() * plan.edges.len().saturating_sub(1) / 2;
        if let Some(v) = common::planarity_violation(plan).or_else(|| common::lane_rule_violation(plan)) {
            bad.push(format!("tree {i}: {v}"));
        }
    }
    outcome(
        "planarity",
        bad.is_empty(),
        format!(
            "{} of {} layouts with forbidden shared points ({pairs} edge pairs checked, exact){}",
            bad.len(),
            corpus.plans.len(),
            bad.first().map(|b| format!("; first: {b}")).unwrap_or_default()
        ),
    )
}

fn compaction(corpus: &Corpus) -> Outcome {
    let mut failures = 0;
    for raw in &corpus.drawn {
        let once = compact(raw).expect("non-white");
        let twice = compact(&once).expect("non-white");
        if !once.same_pixels(&twice) || common::has_adjacent_duplicate_rows(&once) {
            failures += 1;
        }
    }
    let ast = parse_source(SUM_MAIN).expect("fixture parses");
    let mut book = ColorCodebook::with_funcdef_red();
    book.assign_tree(ast.root()).expect("capacity");
    let raw = Encoder::default().draw(&ast, &book).expect("render");
    let small = compact(&raw).expect("non-white");
    let fixed = small.same_pixels(&compact(&small).expect("non-white"));
    let lossless = decode(&small, &book).ok().as_ref() == Some(&ast);
    let pass = failures == 0
        && fixed
        && lossless
        && small.area() < raw.area()
        && !common::has_adjacent_duplicate_rows(&small);
    outcome(
        "compaction",
        pass,
        format!(
            "idempotent without duplicate rows on {}/{} renders; sum_main {}x{} = {} px drawn -> {}x{} = {} px compacted, decodes {}",
            corpus.drawn.len() - failures,
            corpus.drawn.len(),
            raw.width(),
            raw.height(),
            raw.area(),
            small.width(),
            small.height(),
            small.area(),
            if lossless { "exactly" } else { "WRONG" }
        ),
    )
}

fn oversampling() -> Outcome {
    const OVERSAMPLE_COUNTS: [(usize, usize, usize); 5] = [
        (2684, 43409, 14470),
        (5119, 40974, 13658),
        (323, 45770, 15257),
        (1160, 44933, 14978),
        (3294, 42799, 14266),
    ];
    let mut got = Vec::new();
    for (pos, neg, _) in OVERSAMPLE_COUNTS {
        let samples = (0..pos + neg)
            .map(|i| Sample::new(format!("s{i}"), Split::Train, [i < pos, false, false, false, false]))
            .collect();
        let m = CorpusManifest::new(samples).expect("unique ids");
        let out = oversample(&m, Category::Cwe119, 0.25).expect("has positives");
        got.push(out.counts(Split::Train, Category::Cwe119).positive);
    }
    let expected: Vec<usize> = OVERSAMPLE_COUNTS.iter().map(|t| t.2).collect();
    outcome(
        "oversampling",
        got == expected,
        format!("positives {got:?}, expected {expected:?} (zero tolerance)"),
    )
}

fn parser_fidelity() -> Outcome {
    let Ok(ast) = parse_source(SUM_MAIN) else {
        return outcome("parser-fidelity", false, "sum_main fixture failed to parse".into());
    };
    let labels: Vec<String> = ast.bfs().map(|(_, n)| n.to_string()).collect();
    let listing = [
        "(FuncDef)",
        "(Decl: main)",
        "(IdentifierType: int)",
        "(Compound)",
        "(Constant: int, 5)",
        "(FuncCall)",
        "(ID: printf)",
        "(ExprList)",
        "(BinaryOp: +)",
        "(ID: a)",
    ];
    let missing: Vec<&str> = listing.iter().copied().filter(|l| !labels.iter().any(|x| x == l)).collect();
    fn compound(n: &AstNode) -> Option<&AstNode> {
        if n.kind() == "Compound" {
            return Some(n);
        }
        n.children().iter().find_map(compound)
    }
    let kids: Vec<String> = compound(ast.root())
        .map(|c| c.children().iter().map(|k| k.to_string()).collect())
        .unwrap_or_default();
    let parent_ok = kids == ["(Decl: a)", "(Decl: b)", "(FuncCall)"];
    outcome(
        "parser-fidelity",
        missing.is_empty() && parent_ok,
        format!("{}/{} listed tokens found; Compound children {kids:?}", listing.len() - missing.len(), listing.len()),
    )
}

fn metrics() -> Outcome {
    let scores = [0.9, 0.8, 0.4, 0.1];
    let labels = [true, false, true, false];
    let c = Confusion::at_threshold(&scores, &labels, 0.5);
    let (f1, mcc) = (c.f1::<f64>(), c.mcc::<f64>());
    let perfect = evaluate::<f64>(&[0.9, 0.7, 0.3, 0.2], &[true, true, false, false]).expect("two classes");
    let swept = evaluate::<f64>(&scores, &labels).expect("two classes");
    let pass = (c.tp, c.fp, c.fn_, c.tn) == (1, 1, 1, 1)
        && (f1 - 0.5).abs() <= METRIC_TOL
        && mcc.abs() <= METRIC_TOL
        && (perfect.best.f1 - 1.0).abs() <= METRIC_TOL
        && (perfect.best.mcc - 1.0).abs() <= METRIC_TOL
        && (swept.best.f1 - 0.8).abs() <= METRIC_TOL
        && (swept.best.mcc - 2.0 / 12f64.sqrt()).abs() <= METRIC_TOL;
    outcome(
        "metrics",
        pass,
        format!(
            "fixture F1 {f1} MCC {mcc}; perfect F1 {} MCC {}; sweep best F1 {} at {} (tol {METRIC_TOL:e})",
            perfect.best.f1, perfect.best.mcc, swept.best.f1, swept.best.threshold
        ),
    )
}

fn rewrite_hashes<T>(
    dir: &std::path::Path,
    name: &str,
    save: impl Fn(&std::path::Path),
    load: impl Fn(&std::path::Path) -> T,
    resave: impl Fn(&T, &std::path::Path),
) -> bool {
    let path = dir.join(name);
    save(&path);
    let first = common::sha256_hex(&std::fs::read(&path).expect("written"));
    let value = load(&path);
    resave(&value, &path);
    first == common::sha256_hex(&std::fs::read(&path).expect("written"))
}

fn format_round_trips(corpus: &Corpus) -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let book = &corpus.book;
    let codebook_ok = rewrite_hashes(
        dir.path(),
        "cb.txt",
        |p| book.save(p).expect("save"),
        |p| ColorCodebook::load(p).expect("load"),
        |b, p| b.save(p).expect("save"),
    ) && ColorCodebook::load(dir.path().join("cb.txt")).ok().as_ref() == Some(book);

    let samples: Vec<Sample> = (0..40)
        .map(|i| {
            let mut s = Sample::new(format!("s{i}"), Split::Train, [i % 3 == 0, i % 5 == 0, false, true, false]);
            s.image = Some(format!("img/s{i}.png"));
            s.ast = Some(format!("ast/s{i}.json"));
            s
        })
        .collect();
    let mut manifest = oversample(&CorpusManifest::new(samples).expect("unique"), Category::Cwe120, 0.25).expect("positives");
    manifest.codebook = Some("cb.txt".into());
    let manifest_ok = rewrite_hashes(
        dir.path(),
        "m.ndjson",
        |p| manifest.save(p).expect("save"),
        |p| CorpusManifest::load(p).expect("load"),
        |m, p| m.save(p).expect("save"),
    );

    let images: Vec<ImageRep> = corpus.drawn.iter().take(8).map(|r| compact(r).expect("non-white")).collect();
    let tensor = make_batches(&images, 8).expect("batch size").remove(0).tensor;
    let tensor_ok = rewrite_hashes(
        dir.path(),
        "b.c2i",
        |p| c2i_core::corpus::export_tensor(&tensor, p).expect("export"),
        |p| c2i_core::corpus::import_tensor(p).expect("import"),
        |t: &BatchTensor, p| c2i_core::corpus::export_tensor(t, p).expect("export"),
    );
    let verdict = |ok: bool| if ok { "hash-stable" } else { "CHANGED" };
    outcome(
        "format-round-trips",
        codebook_ok && manifest_ok && tensor_ok,
        format!(
            "codebook ({} entries) {}, manifest ({} records) {}, tensor ({} bytes) {}",
            book.len(),
            verdict(codebook_ok),
            manifest.len(),
            verdict(manifest_ok),
            tensor.encoded_len(),
            verdict(tensor_ok)
        ),
    )
}

fn main() {
    let (lossless, corpus) = losslessness();
    let results = [
        lossless,
        planarity(&corpus),
        compaction(&corpus),
        oversampling(),
        parser_fidelity(),
        metrics(),
        format_round_trips(&corpus),
    ];
    let mut failed = 0;
    for r in &results {
        println!("{} {}: {}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.detail);
        failed += usize::from(!r.pass);
    }
    println!("acceptance: {}/{} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
