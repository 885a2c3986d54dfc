//! Depth and widest-level histograms over a corpus of ASTs.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::ast::Ast;
use crate::pipeline::load_ast;

use super::manifest::{resolve_locator, CorpusManifest};

/// A sample left out of the histograms, with the reason.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleWarning {
    pub id: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StatsReport {
    /// Tree depth (root-only = 0) to sample count.
    pub depth: BTreeMap<usize, usize>,
    /// Largest per-level node count to sample count.
    pub max_nodes: BTreeMap<usize, usize>,
    pub warnings: Vec<SampleWarning>,
}

impl StatsReport {
    pub fn add(&mut self, ast: &Ast) {
        *self.depth.entry(ast.depth()).or_default() += 1;
        *self.max_nodes.entry(ast.max_level_width()).or_default() += 1;
    }

    /// Number of samples counted.
    pub fn mass(&self) -> usize {
        self.depth.values().sum()
    }

    pub fn merge(&mut self, other: StatsReport) {
        for (k, v) in other.depth {
            *self.depth.entry(k).or_default() += v;
        }
        for (k, v) in other.max_nodes {
            *self.max_nodes.entry(k).or_default() += v;
        }
        self.warnings.extend(other.warnings);
    }

    /// Rows `histogram,value,count`, depth rows first.
    pub fn write_csv(&self, writer: impl Write) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["histogram", "value", "count"])?;
        for (name, hist) in [("depth", &self.depth), ("max_nodes", &self.max_nodes)] {
            for (value, count) in hist {
                out.write_record([name, &value.to_string(), &count.to_string()])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

pub fn histograms<'a>(asts: impl IntoIterator<Item = &'a Ast>) -> StatsReport {
    let mut report = StatsReport::default();
    for ast in asts {
        report.add(ast);
    }
    report
}

/// Loads every original sample's AST (oversampled copies are skipped) and
/// tallies the histograms. Samples whose AST cannot be loaded become
/// warnings.
pub fn stats(manifest: &CorpusManifest, manifest_path: &Path) -> StatsReport {
    let mut report = StatsReport::default();
    for sample in manifest.samples.iter().filter(|s| s.copy == 0) {
        let Some(locator) = &sample.ast else {
            report.warnings.push(SampleWarning {
                id: sample.id.clone(),
                message: "no ast locator".into(),
            });
            continue;
        };
        match load_ast(&resolve_locator(manifest_path, locator)) {
            Ok(ast) => report.add(&ast),
            Err(e) => report.warnings.push(SampleWarning {
                id: sample.id.clone(),
                message: e.to_string(),
            }),
        }
    }
    report
}
