//! `c2i`: encode C sources as AST images, decode them back, and prepare
//! labeled image corpora.
//!
//! Exit status: 0 success, 1 usage error, 2 input or parse error,
//! 3 invariant violation (a round trip that did not reproduce its tree).

mod commands;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use c2i_core::corpus::{Category, Split, DEFAULT_TARGET_RATIO};
use c2i_core::render::RenderConfig;
use c2i_core::CompactOptions;

use failure::{CmdResult, Failure};

#[derive(Parser)]
#[command(name = "c2i", version, about = "Lossless AST images for C source code")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CodebookArgs {
    /// Codebook file; created if missing.
    #[arg(long, env = "C2I_CODEBOOK")]
    codebook: PathBuf,
    /// Codebook-format file whose entries are pinned before any allocation.
    #[arg(long)]
    seeds: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct RenderArgs {
    #[arg(long, default_value_t = 8)]
    box_w: usize,
    #[arg(long, default_value_t = 4)]
    box_h: usize,
    #[arg(long, default_value_t = 2)]
    gap_x: usize,
    #[arg(long, default_value_t = 2)]
    lane_pitch: usize,
    #[arg(long, default_value_t = 1)]
    margin_y: usize,
    /// Give every band this many lanes instead of sizing bands per tree.
    #[arg(long, value_name = "N")]
    fixed_lanes: Option<usize>,
    /// Also collapse runs of identical adjacent columns.
    #[arg(long)]
    collapse_cols: bool,
}

impl RenderArgs {
    fn encoder(&self) -> CmdResult<c2i_core::Encoder> {
        let render = RenderConfig {
            box_w: self.box_w,
            box_h: self.box_h,
            gap_x: self.gap_x,
            lane_pitch: self.lane_pitch,
            margin_y: self.margin_y,
            fixed_lanes: self.fixed_lanes,
        };
        render.validate().map_err(Failure::usage)?;
        Ok(c2i_core::Encoder::new(
            render,
            CompactOptions {
                collapse_cols: self.collapse_cols,
            },
        ))
    }
}

#[derive(Args, Clone, Copy)]
struct JobsArgs {
    /// Worker threads for per-sample work; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Render a C file or interchange JSON (or every sample of a manifest) as a compact image.
    Encode {
        /// `.c` source or `.json` interchange document.
        #[arg(required_unless_present = "manifest", conflicts_with = "manifest")]
        input: Option<PathBuf>,
        #[command(flatten)]
        book: CodebookArgs,
        #[command(flatten)]
        render: RenderArgs,
        /// Write the image as PNG.
        #[arg(long, value_name = "OUT")]
        png: Option<PathBuf>,
        /// Write the image as a one-image raw tensor file.
        #[arg(long, value_name = "OUT")]
        raw: Option<PathBuf>,
        /// Write the parsed tree as interchange JSON.
        #[arg(long, value_name = "OUT")]
        json: Option<PathBuf>,
        /// Skip the compacting step.
        #[arg(long)]
        no_compact: bool,
        /// Decode the result and fail with status 3 unless it reproduces the tree.
        #[arg(long)]
        verify: bool,
        /// Encode every original sample of this manifest.
        #[arg(long, requires_all = ["out_dir", "out_manifest"])]
        manifest: Option<PathBuf>,
        /// Directory for per-sample PNGs (manifest mode).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Manifest to write with image locators filled in (manifest mode).
        #[arg(long)]
        out_manifest: Option<PathBuf>,
        #[command(flatten)]
        jobs: JobsArgs,
    },
    /// Rebuild the tree from a PNG or one-image raw tensor.
    Decode {
        image: PathBuf,
        /// Codebook the image was rendered with.
        #[arg(long, env = "C2I_CODEBOOK")]
        codebook: PathBuf,
        /// Write interchange JSON here instead of stdout.
        #[arg(long, value_name = "OUT")]
        json: Option<PathBuf>,
    },
    /// Depth and widest-level histograms over a manifest's ASTs.
    Stats {
        manifest: PathBuf,
        /// Write `histogram,value,count` rows here.
        #[arg(long, value_name = "OUT")]
        csv: Option<PathBuf>,
    },
    /// Duplicate train positives of one category up to a target share.
    Oversample {
        manifest: PathBuf,
        #[arg(long, value_parser = parse_category)]
        category: Category,
        #[arg(long, default_value_t = DEFAULT_TARGET_RATIO)]
        target_ratio: f64,
        /// Output manifest.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Pad a manifest's images into raw tensor batches.
    Batch {
        manifest: PathBuf,
        #[arg(long)]
        batch_size: usize,
        /// Directory for `batch-NNNNN.c2i` files and `batches.ndjson`.
        #[arg(long)]
        out_dir: PathBuf,
        /// Only samples of this split.
        #[arg(long, value_parser = parse_split)]
        split: Option<Split>,
        /// Group images of similar area instead of keeping manifest order.
        #[arg(long)]
        sort_by_area: bool,
        #[command(flatten)]
        jobs: JobsArgs,
    },
    /// Threshold sweep over `id,score` against `id,label`; prints a JSON report.
    Eval {
        scores: PathBuf,
        labels: PathBuf,
        /// Write the precision-recall curve as CSV.
        #[arg(long, value_name = "OUT")]
        pr: Option<PathBuf>,
    },
    /// Render, compact and decode every `.c`/`.json` file under a directory.
    Check {
        dir: PathBuf,
        #[command(flatten)]
        book: CodebookArgs,
        #[command(flatten)]
        render: RenderArgs,
        #[command(flatten)]
        jobs: JobsArgs,
    },
}

fn parse_category(s: &str) -> Result<Category, String> {
    s.parse()
}

fn parse_split(s: &str) -> Result<Split, String> {
    match s {
        "train" => Ok(Split::Train),
        "validation" => Ok(Split::Validation),
        "test" => Ok(Split::Test),
        _ => Err(format!("unknown split `{s}` (train, validation, test)")),
    }
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Encode {
            input,
            book,
            render,
            png,
            raw,
            json,
            no_compact,
            verify,
            manifest,
            out_dir,
            out_manifest,
            jobs,
        } => {
            let encoder = render.encoder()?;
            match (input, manifest, out_dir, out_manifest) {
                (Some(input), None, ..) => commands::encode_one(
                    &input,
                    &book,
                    encoder,
                    commands::Outputs { png, raw, json },
                    !no_compact,
                    verify,
                ),
                (None, Some(manifest), Some(out_dir), Some(out_manifest)) => {
                    commands::encode_manifest(&manifest, &book, encoder, &out_dir, &out_manifest, jobs.jobs)
                }
                _ => Err(Failure::usage(anyhow::anyhow!(
                    "give either INPUT or --manifest with --out-dir and --out-manifest"
                ))),
            }
        }
        Command::Decode { image, codebook, json } => commands::decode(&image, &codebook, json.as_deref()),
        Command::Stats { manifest, csv } => commands::stats(&manifest, csv.as_deref()),
        Command::Oversample {
            manifest,
            category,
            target_ratio,
            out,
        } => commands::oversample(&manifest, category, target_ratio, &out),
        Command::Batch {
            manifest,
            batch_size,
            out_dir,
            split,
            sort_by_area,
            jobs,
        } => commands::batch(&manifest, batch_size, &out_dir, split, sort_by_area, jobs.jobs),
        Command::Eval { scores, labels, pr } => commands::eval(&scores, &labels, pr.as_deref()),
        Command::Check {
            dir,
            book,
            render,
            jobs,
        } => commands::check(&dir, &book, render.encoder()?, jobs.jobs),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { failure::USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
