//! Newline-delimited JSON manifests of labeled samples.
//!
//! One record per line:
//! `{"id":"s1","split":"train","labels":[false,true,false,false,false],"image":"img/s1.png","ast":"src/s1.c"}`.
//! Oversampled duplicates carry an extra `"copy"` index (1, 2, ...). An
//! optional first line `{"codebook":"cb.txt"}` records the codebook used to
//! render the images.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate sample `{id}` (copy {copy})")]
    DuplicateId { line: usize, id: String, copy: u32 },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

/// The five vulnerability categories, in label-vector order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    /// Improper restriction of operations within memory-buffer bounds.
    Cwe119,
    /// Buffer overflow variants (CWE-120/121/122).
    Cwe120,
    /// Pointer subtraction to determine size.
    Cwe469,
    /// NULL pointer dereference.
    Cwe476,
    /// Everything else (CWE-20, 457, 805, ...).
    Other,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Cwe119,
        Category::Cwe120,
        Category::Cwe469,
        Category::Cwe476,
        Category::Other,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Cwe119 => "CWE-119",
            Category::Cwe120 => "CWE-120",
            Category::Cwe469 => "CWE-469",
            Category::Cwe476 => "CWE-476",
            Category::Other => "CWE-other",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let bare = lower
            .strip_prefix("cwe-")
            .or_else(|| lower.strip_prefix("cwe"))
            .unwrap_or(&lower);
        Ok(match bare {
            "119" => Category::Cwe119,
            "120" | "121" | "122" | "120/121/122" => Category::Cwe120,
            "469" => Category::Cwe469,
            "476" => Category::Cwe476,
            "other" | "others" => Category::Other,
            _ => return Err(format!("unknown category `{s}`")),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub split: Split,
    pub labels: [bool; 5],
    pub image: Option<String>,
    pub ast: Option<String>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub copy: u32,
}

fn is_zero(v: &u32) -> bool {
    *v == 0
}

impl Sample {
    pub fn new(id: impl Into<String>, split: Split, labels: [bool; 5]) -> Self {
        Self {
            id: id.into(),
            split,
            labels,
            image: None,
            ast: None,
            copy: 0,
        }
    }

    pub fn label(&self, category: Category) -> bool {
        self.labels[category.index()]
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    codebook: String,
}

/// Positive/negative counts for one category within one split.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub positive: usize,
    pub negative: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CorpusManifest {
    pub samples: Vec<Sample>,
    pub codebook: Option<String>,
}

impl CorpusManifest {
    pub fn new(samples: Vec<Sample>) -> Result<Self, ManifestError> {
        let manifest = Self {
            samples,
            codebook: None,
        };
        manifest.check_unique()?;
        Ok(manifest)
    }

    fn check_unique(&self) -> Result<(), ManifestError> {
        let mut seen = HashSet::new();
        for (i, s) in self.samples.iter().enumerate() {
            if !seen.insert((s.id.as_str(), s.copy)) {
                return Err(ManifestError::DuplicateId {
                    line: i + 1,
                    id: s.id.clone(),
                    copy: s.copy,
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(move |s| s.split == split)
    }

    pub fn counts(&self, split: Split, category: Category) -> ClassCounts {
        let mut counts = ClassCounts::default();
        for s in self.split(split) {
            if s.label(category) {
                counts.positive += 1;
            } else {
                counts.negative += 1;
            }
        }
        counts
    }

    pub fn read_from(reader: impl BufRead) -> Result<Self, ManifestError> {
        let mut samples = Vec::new();
        let mut codebook = None;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let number = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            if number == 1 {
                if let Ok(header) = serde_json::from_str::<Header>(&line) {
                    codebook = Some(header.codebook);
                    continue;
                }
            }
            let sample: Sample = serde_json::from_str(&line).map_err(|e| ManifestError::Malformed {
                line: number,
                message: e.to_string(),
            })?;
            samples.push(sample);
        }
        let manifest = Self { samples, codebook };
        manifest.check_unique()?;
        Ok(manifest)
    }

    pub fn parse(text: &str) -> Result<Self, ManifestError> {
        Self::read_from(text.as_bytes())
    }

    pub fn write_to(&self, mut writer: impl Write) -> Result<(), ManifestError> {
        if let Some(codebook) = &self.codebook {
            let header = Header {
                codebook: codebook.clone(),
            };
            serde_json::to_writer(&mut writer, &header).map_err(std::io::Error::other)?;
            writer.write_all(b"\n")?;
        }
        for s in &self.samples {
            serde_json::to_writer(&mut writer, s).map_err(std::io::Error::other)?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to memory");
        String::from_utf8(out).expect("json is utf-8")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ManifestError> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ManifestError> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut file)?;
        file.flush()?;
        Ok(())
    }
}

/// Resolves a locator relative to the manifest's directory.
pub fn resolve_locator(manifest_path: &Path, locator: &str) -> PathBuf {
    let path = Path::new(locator);
    if path.is_absolute() {
        return path.to_path_buf();
    }
    manifest_path
        .parent()
        .map(|dir| dir.join(path))
        .unwrap_or_else(|| path.to_path_buf())
}
