use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use rayon::prelude::*;
use serde_json::json;

use c2i_core::ast::write_interchange;
use c2i_core::corpus::{self, BatchTensor, Category, CorpusManifest, OversampleError, Split};
use c2i_core::pipeline::{load_ast, RoundTripError};
use c2i_core::{decode as decode_image, Ast, ColorCodebook, Encoder, ImageRep};

use crate::failure::{CmdResult, Failure, OrExit};
use crate::CodebookArgs;

pub struct Outputs {
    pub png: Option<PathBuf>,
    pub raw: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

fn pool(jobs: usize) -> CmdResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::usage(anyhow!("--jobs {jobs}: {e}")))
}

fn open_codebook(args: &CodebookArgs) -> CmdResult<ColorCodebook> {
    let mut book = if args.codebook.exists() {
        ColorCodebook::load(&args.codebook).or_input(format!("codebook {}", args.codebook.display()))?
    } else {
        ColorCodebook::new()
    };
    if let Some(seeds) = &args.seeds {
        let pinned = ColorCodebook::load(seeds).or_input(format!("seeds {}", seeds.display()))?;
        for (key, color, _) in pinned.entries() {
            book.pin(key.clone(), color)
                .or_input(format!("seed {key} from {}", seeds.display()))?;
        }
    }
    Ok(book)
}

fn save_codebook(book: &ColorCodebook, path: &Path) -> CmdResult {
    book.save(path).or_input(format!("writing codebook {}", path.display()))
}

fn read_image(path: &Path) -> CmdResult<ImageRep> {
    let shown = path.display().to_string();
    if path.extension().is_some_and(|e| e == "c2i") {
        let tensor = corpus::import_tensor(path).or_input(shown.clone())?;
        if tensor.len() != 1 {
            return Err(Failure::input(anyhow!("{shown}: holds {} images, expected 1", tensor.len())));
        }
        Ok(tensor.image(0))
    } else {
        ImageRep::read_png(path).or_input(shown)
    }
}

fn write_raw(image: &ImageRep, path: &Path) -> CmdResult {
    let tensor = BatchTensor::new(1, image.height(), image.width(), image.as_bytes().to_vec())
        .or_input("image too large for the tensor format")?;
    corpus::export_tensor(&tensor, path).or_input(format!("writing {}", path.display()))
}

fn write_text(path: Option<&Path>, text: &str) -> CmdResult {
    match path {
        Some(p) => fs::write(p, text).or_input(format!("writing {}", p.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .or_input("writing stdout"),
    }
}

pub fn encode_one(
    input: &Path,
    book_args: &CodebookArgs,
    encoder: Encoder,
    outputs: Outputs,
    compact: bool,
    verify: bool,
) -> CmdResult {
    if outputs.png.is_none() && outputs.raw.is_none() && outputs.json.is_none() {
        return Err(Failure::usage(anyhow!("nothing to write; give --png, --raw or --json")));
    }
    let ast = load_ast(input).map_err(Failure::input)?;
    let mut book = open_codebook(book_args)?;
    book.assign_tree(ast.root()).or_input("assigning colors")?;
    let mut image = if compact {
        encoder.encode_frozen(&ast, &book)
    } else {
        encoder.draw(&ast, &book)
    }
    .or_input(format!("encoding {}", input.display()))?;
    image.meta.source_id = Some(input.display().to_string());
    if verify && decode_image(&image, &book).ok().as_ref() != Some(&ast) {
        return Err(Failure::invariant(anyhow!(
            "{}: decoded image does not reproduce the tree",
            input.display()
        )));
    }
    if let Some(p) = &outputs.png {
        image.write_png(p).or_input(format!("writing {}", p.display()))?;
    }
    if let Some(p) = &outputs.raw {
        write_raw(&image, p)?;
    }
    if let Some(p) = &outputs.json {
        write_text(Some(p), &(write_interchange(&ast) + "\n"))?;
    }
    save_codebook(&book, &book_args.codebook)
}

/// Path written into a manifest at `manifest`, relative to its directory
/// when possible.
fn locator_for(path: &Path, manifest: &Path) -> String {
    let base = manifest.parent().unwrap_or(Path::new(""));
    path.strip_prefix(base).unwrap_or(path).to_string_lossy().into_owned()
}

fn file_stem_for(index: usize, id: &str) -> String {
    let clean: String = id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect();
    format!("{index:05}-{clean}")
}

pub fn encode_manifest(
    manifest_path: &Path,
    book_args: &CodebookArgs,
    encoder: Encoder,
    out_dir: &Path,
    out_manifest: &Path,
    jobs: usize,
) -> CmdResult {
    let manifest = CorpusManifest::load(manifest_path).or_input(manifest_path.display().to_string())?;
    let pool = pool(jobs)?;
    fs::create_dir_all(out_dir).or_input(format!("creating {}", out_dir.display()))?;

    let originals: Vec<usize> = (0..manifest.len()).filter(|&i| manifest.samples[i].copy == 0).collect();
    let loaded: Vec<Result<Ast, String>> = pool.install(|| {
        originals
            .par_iter()
            .map(|&i| {
                let sample = &manifest.samples[i];
                let locator = sample.ast.as_ref().ok_or_else(|| "no ast locator".to_string())?;
                load_ast(&corpus::resolve_locator(manifest_path, locator)).map_err(|e| e.to_string())
            })
            .collect()
    });

    let mut book = open_codebook(book_args)?;
    for ast in loaded.iter().flatten() {
        book.assign_tree(ast.root()).or_input("assigning colors")?;
    }

    let written: Vec<Result<PathBuf, String>> = pool.install(|| {
        originals
            .par_iter()
            .zip(&loaded)
            .enumerate()
            .map(|(n, (&i, ast))| {
                let ast = ast.as_ref().map_err(Clone::clone)?;
                let sample = &manifest.samples[i];
                let mut image = encoder.encode_frozen(ast, &book).map_err(|e| e.to_string())?;
                image.meta.source_id = Some(sample.id.clone());
                let path = out_dir.join(file_stem_for(n, &sample.id) + ".png");
                image.write_png(&path).map_err(|e| e.to_string())?;
                Ok(path)
            })
            .collect()
    });

    let mut images: HashMap<&str, String> = HashMap::new();
    let mut failed = 0;
    for (&i, result) in originals.iter().zip(&written) {
        let id = manifest.samples[i].id.as_str();
        match result {
            Ok(path) => {
                images.insert(id, locator_for(path, out_manifest));
            }
            Err(e) => {
                failed += 1;
                eprintln!("warning: sample `{id}`: {e}");
            }
        }
    }
    let mut out = manifest.clone();
    for sample in &mut out.samples {
        sample.image = images.get(sample.id.as_str()).cloned();
        if let Some(ast) = &sample.ast {
            sample.ast = Some(locator_for(&corpus::resolve_locator(manifest_path, ast), out_manifest));
        }
    }
    out.codebook = Some(locator_for(&book_args.codebook, out_manifest));
    out.save(out_manifest).or_input(format!("writing {}", out_manifest.display()))?;
    save_codebook(&book, &book_args.codebook)?;
    eprintln!("encoded {}/{} samples", originals.len() - failed, originals.len());
    if failed > 0 {
        return Err(Failure::input(anyhow!("{failed} samples could not be encoded")));
    }
    Ok(())
}

pub fn decode(image_path: &Path, codebook: &Path, json: Option<&Path>) -> CmdResult {
    let book = ColorCodebook::load(codebook).or_input(format!("codebook {}", codebook.display()))?;
    let image = read_image(image_path)?;
    let ast = decode_image(&image, &book).or_input(image_path.display().to_string())?;
    write_text(json, &(write_interchange(&ast) + "\n"))
}

pub fn stats(manifest_path: &Path, csv_out: Option<&Path>) -> CmdResult {
    let manifest = CorpusManifest::load(manifest_path).or_input(manifest_path.display().to_string())?;
    let report = corpus::stats(&manifest, manifest_path);
    for w in &report.warnings {
        eprintln!("warning: sample `{}`: {}", w.id, w.message);
    }
    if let Some(path) = csv_out {
        let file = fs::File::create(path).or_input(format!("writing {}", path.display()))?;
        report.write_csv(file).or_input(format!("writing {}", path.display()))?;
    }
    let summary = json!({
        "samples": report.mass(),
        "excluded": report.warnings.len(),
        "depth": report.depth,
        "max_nodes": report.max_nodes,
    });
    write_text(None, &(serde_json::to_string_pretty(&summary).expect("plain json") + "\n"))
}

pub fn oversample(manifest_path: &Path, category: Category, ratio: f64, out: &Path) -> CmdResult {
    let manifest = CorpusManifest::load(manifest_path).or_input(manifest_path.display().to_string())?;
    let result = corpus::oversample(&manifest, category, ratio).map_err(|e| match e {
        OversampleError::BadRatio(_) => Failure::usage(e),
        OversampleError::NoPositives(_) => Failure::input(e),
    })?;
    let before = manifest.counts(Split::Train, category);
    let after = result.counts(Split::Train, category);
    result.save(out).or_input(format!("writing {}", out.display()))?;
    eprintln!(
        "{category}: train positives {} -> {} ({:.2}% of {})",
        before.positive,
        after.positive,
        100.0 * after.positive as f64 / (after.positive + after.negative) as f64,
        after.positive + after.negative
    );
    Ok(())
}

pub fn batch(
    manifest_path: &Path,
    batch_size: usize,
    out_dir: &Path,
    split: Option<Split>,
    sort_by_area: bool,
    jobs: usize,
) -> CmdResult {
    let manifest = CorpusManifest::load(manifest_path).or_input(manifest_path.display().to_string())?;
    let members: Vec<_> = manifest
        .samples
        .iter()
        .filter(|s| split.is_none_or(|sp| s.split == sp))
        .collect();
    let images: Vec<ImageRep> = pool(jobs)?.install(|| {
        members
            .par_iter()
            .map(|s| {
                let locator = s
                    .image
                    .as_ref()
                    .ok_or_else(|| Failure::input(anyhow!("sample `{}` has no image locator", s.id)))?;
                read_image(&corpus::resolve_locator(manifest_path, locator))
            })
            .collect::<CmdResult<Vec<_>>>()
    })?;
    let batches = if sort_by_area {
        corpus::make_batches_by_area(&images, batch_size)
    } else {
        corpus::make_batches(&images, batch_size)
    }
    .map_err(Failure::usage)?;
    fs::create_dir_all(out_dir).or_input(format!("creating {}", out_dir.display()))?;
    let mut index = String::new();
    for (n, b) in batches.iter().enumerate() {
        let file = format!("batch-{n:05}.c2i");
        corpus::export_tensor(&b.tensor, out_dir.join(&file)).or_input(format!("writing {file}"))?;
        let samples: Vec<_> = b
            .members
            .iter()
            .zip(&b.dims)
            .map(|(&m, &(h, w))| {
                let s = members[m];
                json!({"id": s.id, "copy": s.copy, "height": h, "width": w, "labels": s.labels})
            })
            .collect();
        let line = json!({"file": file, "height": b.tensor.height(), "width": b.tensor.width(), "samples": samples});
        index.push_str(&line.to_string());
        index.push('\n');
    }
    let index_path = out_dir.join("batches.ndjson");
    fs::write(&index_path, index).or_input(format!("writing {}", index_path.display()))?;
    eprintln!("{} images in {} batches", images.len(), batches.len());
    Ok(())
}

fn read_column_pairs(path: &Path, value_name: &str) -> CmdResult<Vec<(String, String)>> {
    let shown = path.display().to_string();
    let mut reader = csv::Reader::from_path(path).or_input(shown.clone())?;
    let headers = reader.headers().or_input(shown.clone())?.clone();
    let find = |name: &str, fallback: usize| headers.iter().position(|h| h.trim() == name).unwrap_or(fallback);
    let (id_col, value_col) = (find("id", 0), find(value_name, 1));
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.or_input(shown.clone())?;
        let field = |col: usize| {
            record
                .get(col)
                .map(|v| v.trim().to_string())
                .ok_or_else(|| Failure::input(anyhow!("{shown}: row {} has no column {col}", line + 2)))
        };
        rows.push((field(id_col)?, field(value_col)?));
    }
    Ok(rows)
}

pub fn eval(scores_path: &Path, labels_path: &Path, pr: Option<&Path>) -> CmdResult {
    let mut scores: HashMap<String, f64> = HashMap::new();
    for (id, value) in read_column_pairs(scores_path, "score")? {
        let score: f64 = value
            .parse()
            .map_err(|_| Failure::input(anyhow!("{}: score `{value}` for `{id}` is not a number", scores_path.display())))?;
        if scores.insert(id.clone(), score).is_some() {
            return Err(Failure::input(anyhow!("{}: duplicate id `{id}`", scores_path.display())));
        }
    }
    let mut ordered_scores = Vec::new();
    let mut labels = Vec::new();
    let mut seen = HashSet::new();
    for (id, value) in read_column_pairs(labels_path, "label")? {
        let label = match value.to_ascii_lowercase().as_str() {
            "1" | "true" => true,
            "0" | "false" => false,
            _ => return Err(Failure::input(anyhow!("{}: label `{value}` for `{id}`", labels_path.display()))),
        };
        if !seen.insert(id.clone()) {
            return Err(Failure::input(anyhow!("{}: duplicate id `{id}`", labels_path.display())));
        }
        let score = scores
            .get(&id)
            .ok_or_else(|| Failure::input(anyhow!("no score for labeled sample `{id}`")))?;
        ordered_scores.push(*score);
        labels.push(label);
    }
    if let Some(extra) = scores.keys().filter(|id| !seen.contains(*id)).min() {
        return Err(Failure::input(anyhow!("score for unlabeled sample `{extra}`")));
    }
    let report = corpus::evaluate(&ordered_scores, &labels).map_err(Failure::input)?;
    if let Some(path) = pr {
        let file = fs::File::create(path).or_input(format!("writing {}", path.display()))?;
        corpus::write_pr_csv(&report, file).or_input(format!("writing {}", path.display()))?;
    }
    write_text(None, &(serde_json::to_string_pretty(&report).expect("finite metrics") + "\n"))
}

fn collect_sources(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
    entries.sort();
    for path in entries {
        if path.is_dir() {
            collect_sources(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "c" || e == "json") {
            out.push(path);
        }
    }
    Ok(())
}

pub fn check(dir: &Path, book_args: &CodebookArgs, encoder: Encoder, jobs: usize) -> CmdResult {
    let mut files = Vec::new();
    collect_sources(dir, &mut files).or_input(format!("reading {}", dir.display()))?;
    let pool = pool(jobs)?;
    let loaded: Vec<_> = pool.install(|| files.par_iter().map(|p| load_ast(p)).collect());
    let mut book = open_codebook(book_args)?;
    for ast in loaded.iter().flatten() {
        book.assign_tree(ast.root()).or_input("assigning colors")?;
    }
    let checked: Vec<Option<Result<ImageRep, RoundTripError>>> = pool.install(|| {
        loaded
            .par_iter()
            .map(|ast| ast.as_ref().ok().map(|ast| encoder.check(ast, &book)))
            .collect()
    });

    let (mut passed, mut mismatched, mut unreadable) = (0, 0, 0);
    let mut report = String::new();
    for ((path, ast), result) in files.iter().zip(&loaded).zip(&checked) {
        let line = match (ast, result) {
            (Err(e), _) => {
                unreadable += 1;
                format!("SKIP {}: {e}\n", path.display())
            }
            (Ok(ast), Some(Ok(image))) => {
                passed += 1;
                format!(
                    "ok   {}: {} nodes, {}x{}\n",
                    path.display(),
                    ast.node_count(),
                    image.width(),
                    image.height()
                )
            }
            (Ok(_), Some(Err(e))) => {
                mismatched += 1;
                format!("FAIL {}: {e}\n", path.display())
            }
            (Ok(_), None) => unreachable!("parsed trees are always checked"),
        };
        report.push_str(&line);
    }
    report.push_str(&format!(
        "checked {}: {passed} round-tripped, {mismatched} failed, {unreadable} unreadable\n",
        files.len()
    ));
    write_text(None, &report)?;
    if mismatched > 0 {
        Err(Failure::invariant(anyhow!(
            "{mismatched} of {} files failed the round trip",
            files.len()
        )))
    } else if unreadable > 0 {
        Err(Failure::input(anyhow!(
            "{unreadable} of {} files could not be read",
            files.len()
        )))
    } else {
        Ok(())
    }
}
