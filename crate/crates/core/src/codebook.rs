//! Injective token → color mapping shared by every image in a dataset.
//!
//! New keys receive the next free color in linear order, where linear index
//! `v` maps to `(v >> 16, v >> 8, v)` and black/white are never handed out.
//! Entries are never removed or recolored, so a codebook has to be
//! persisted and reused for the colors to stay consistent across a corpus.
//!
//! File format (UTF-8):
//!
//! ```text
//! C2I-CODEBOOK v1
//! # comment
//! FuncDef<TAB><TAB>255,0,0<TAB>seed
//! Decl<TAB>main<TAB>0,0,1
//! Constant<TAB>int\x1f5<TAB>0,0,2
//! ```
//!
//! Params are joined with the unit separator (0x1F). The optional fourth
//! field marks seed entries. Backslash, tab, newline, carriage return and
//! the unit separator are written as `\\`, `\t`, `\n`, `\r` and `\u`.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ast::{validate_token, AstError, AstNode};

pub const HEADER: &str = "C2I-CODEBOOK v1";
const UNIT_SEPARATOR: char = '\x1f';
const SEED_MARK: &str = "seed";

/// Number of allocatable colors: 2^24 minus black and white.
pub const CAPACITY: u32 = (1 << 24) - 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Color {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Color {
    pub const WHITE: Color = Color::new(255, 255, 255);
    pub const BLACK: Color = Color::new(0, 0, 0);

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    pub const fn from_linear(v: u32) -> Self {
        Self::new((v >> 16) as u8, (v >> 8) as u8, v as u8)
    }

    pub const fn linear(self) -> u32 {
        ((self.r as u32) << 16) | ((self.g as u32) << 8) | self.b as u32
    }

    pub const fn to_array(self) -> [u8; 3] {
        [self.r, self.g, self.b]
    }

    pub const fn from_array(px: [u8; 3]) -> Self {
        Self::new(px[0], px[1], px[2])
    }

    pub fn is_reserved(self) -> bool {
        self == Self::WHITE || self == Self::BLACK
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.r, self.g, self.b)
    }
}

/// Token content: kind plus ordered params, compared exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TokenKey {
    kind: String,
    params: Vec<String>,
}

impl TokenKey {
    pub fn new<K, P, S>(kind: K, params: P) -> Result<Self, AstError>
    where
        K: Into<String>,
        P: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let kind = kind.into();
        let params: Vec<String> = params.into_iter().map(Into::into).collect();
        validate_token(&kind, &params)?;
        Ok(Self { kind, params })
    }

    pub fn of(node: &AstNode) -> Self {
        Self {
            kind: node.kind().to_string(),
            params: node.params().to_vec(),
        }
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }
}

impl fmt::Display for TokenKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.kind)?;
        if !self.params.is_empty() {
            write!(f, ": {}", self.params.join(", "))?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodebookError {
    #[error("codebook capacity of {CAPACITY} colors exhausted")]
    Exhausted,
    #[error("color {0} is reserved for background or edges")]
    Reserved(Color),
    #[error("color {0} is not in the codebook")]
    UnknownColor(Color),
    #[error("key {key} is already assigned color {existing}")]
    DuplicateKey { key: TokenKey, existing: Color },
    #[error("color {color} is already assigned to {existing}")]
    DuplicateColor { color: Color, existing: TokenKey },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("i/o error on codebook file: {0}")]
    Io(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Entry {
    key: TokenKey,
    color: Color,
    seed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ColorCodebook {
    entries: Vec<Entry>,
    by_key: HashMap<TokenKey, usize>,
    by_color: HashMap<Color, usize>,
    /// Next linear index to try for sequential allocation.
    cursor: u32,
}

impl ColorCodebook {
    pub fn new() -> Self {
        Self::default()
    }

    /// A book pre-populated with pinned colors.
    pub fn with_seeds<I>(seeds: I) -> Result<Self, CodebookError>
    where
        I: IntoIterator<Item = (TokenKey, Color)>,
    {
        let mut book = Self::new();
        for (key, color) in seeds {
            book.insert(key, color, true)?;
        }
        Ok(book)
    }

    /// Adds a pinned entry. Re-pinning a key to its current color is a no-op.
    pub fn pin(&mut self, key: TokenKey, color: Color) -> Result<(), CodebookError> {
        if self.get(&key) == Some(color) {
            return Ok(());
        }
        self.insert(key, color, true)
    }

    /// Pins `FuncDef` to pure red.
    pub fn with_funcdef_red() -> Self {
        let key = TokenKey::new("FuncDef", Vec::<String>::new()).expect("valid key");
        Self::with_seeds([(key, Color::new(255, 0, 0))]).expect("single seed is valid")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn cursor(&self) -> u32 {
        self.cursor
    }

    /// Entries in insertion order, with their seed flag.
    pub fn entries(&self) -> impl Iterator<Item = (&TokenKey, Color, bool)> {
        self.entries.iter().map(|e| (&e.key, e.color, e.seed))
    }

    pub fn seed_count(&self) -> usize {
        self.entries.iter().filter(|e| e.seed).count()
    }

    pub fn get(&self, key: &TokenKey) -> Option<Color> {
        self.by_key.get(key).map(|&i| self.entries[i].color)
    }

    fn insert(&mut self, key: TokenKey, color: Color, seed: bool) -> Result<(), CodebookError> {
        if color.is_reserved() {
            return Err(CodebookError::Reserved(color));
        }
        if let Some(&i) = self.by_key.get(&key) {
            return Err(CodebookError::DuplicateKey {
                key,
                existing: self.entries[i].color,
            });
        }
        if let Some(&i) = self.by_color.get(&color) {
            return Err(CodebookError::DuplicateColor {
                color,
                existing: self.entries[i].key.clone(),
            });
        }
        let index = self.entries.len();
        self.by_key.insert(key.clone(), index);
        self.by_color.insert(color, index);
        self.entries.push(Entry { key, color, seed });
        if !seed {
            self.cursor = self.cursor.max(color.linear() + 1);
        }
        Ok(())
    }

    pub fn get_or_assign(&mut self, key: &TokenKey) -> Result<Color, CodebookError> {
        if let Some(color) = self.get(key) {
            return Ok(color);
        }
        if self.entries.len() >= CAPACITY as usize {
            return Err(CodebookError::Exhausted);
        }
        let mut v = self.cursor;
        loop {
            if v >= 1 << 24 {
                return Err(CodebookError::Exhausted);
            }
            let color = Color::from_linear(v);
            if !color.is_reserved() && !self.by_color.contains_key(&color) {
                self.insert(key.clone(), color, false)?;
                return Ok(color);
            }
            v += 1;
        }
    }

    /// Assigns colors to every token of `root` in breadth-first order.
    pub fn assign_tree(&mut self, root: &AstNode) -> Result<(), CodebookError> {
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(node) = queue.pop_front() {
            self.get_or_assign(&TokenKey::of(node))?;
            queue.extend(node.children());
        }
        Ok(())
    }

    pub fn lookup(&self, color: Color) -> Result<&TokenKey, CodebookError> {
        if color.is_reserved() {
            return Err(CodebookError::Reserved(color));
        }
        self.by_color
            .get(&color)
            .map(|&i| &self.entries[i].key)
            .ok_or(CodebookError::UnknownColor(color))
    }

    pub fn contains_color(&self, color: Color) -> bool {
        self.by_color.contains_key(&color)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(16 + self.entries.len() * 24);
        out.push_str(HEADER);
        out.push('\n');
        for e in &self.entries {
            out.push_str(&escape(e.key.kind()));
            out.push('\t');
            let params: Vec<String> = e.key.params().iter().map(|p| escape(p)).collect();
            out.push_str(&params.join(&UNIT_SEPARATOR.to_string()));
            out.push('\t');
            out.push_str(&e.color.to_string());
            if e.seed {
                out.push('\t');
                out.push_str(SEED_MARK);
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, CodebookError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, HEADER)) => {}
            Some((line, other)) => {
                return Err(CodebookError::Malformed {
                    line,
                    message: format!("expected header `{HEADER}`, found `{other}`"),
                })
            }
            None => {
                return Err(CodebookError::Malformed {
                    line: 1,
                    message: "empty file".into(),
                })
            }
        }
        let mut book = Self::new();
        for (line, raw) in lines {
            if raw.starts_with('#') || raw.is_empty() {
                continue;
            }
            let malformed = |message: String| CodebookError::Malformed { line, message };
            let fields: Vec<&str> = raw.split('\t').collect();
            let seed = match fields.len() {
                3 => false,
                4 if fields[3] == SEED_MARK => true,
                4 => return Err(malformed(format!("unknown entry flag `{}`", fields[3]))),
                n => return Err(malformed(format!("expected 3 or 4 tab-separated fields, found {n}"))),
            };
            let kind = unescape(fields[0]).map_err(&malformed)?;
            let params = if fields[1].is_empty() {
                Vec::new()
            } else {
                fields[1]
                    .split(UNIT_SEPARATOR)
                    .map(unescape)
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(&malformed)?
            };
            let key = TokenKey::new(kind, params).map_err(|e| malformed(e.to_string()))?;
            let color = parse_color(fields[2]).ok_or_else(|| malformed(format!("bad color `{}`", fields[2])))?;
            book.insert(key, color, seed).map_err(|e| match e {
                CodebookError::Malformed { .. } => e,
                other => CodebookError::Malformed {
                    line,
                    message: other.to_string(),
                },
            })?;
        }
        Ok(book)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CodebookError> {
        std::fs::write(path, self.to_text()).map_err(|e| CodebookError::Io(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CodebookError> {
        let text = std::fs::read_to_string(path).map_err(|e| CodebookError::Io(e.to_string()))?;
        Self::from_text(&text)
    }

    /// Hex SHA-256 of the serialized book; recorded in image metadata.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_text().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn parse_color(field: &str) -> Option<Color> {
    let mut parts = field.split(',');
    let mut channel = || parts.next()?.trim().parse::<u8>().ok();
    let color = Color::new(channel()?, channel()?, channel()?);
    parts.next().is_none().then_some(color)
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            UNIT_SEPARATOR => out.push_str("\\u"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('u') => out.push(UNIT_SEPARATOR),
            other => return Err(format!("bad escape `\\{}`", other.map(String::from).unwrap_or_default())),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(kind: &str, params: &[&str]) -> TokenKey {
        TokenKey::new(kind, params.iter().copied()).unwrap()
    }

    #[test]
    fn seeded_funcdef_is_red() {
        let mut book = ColorCodebook::with_funcdef_red();
        assert_eq!(book.get_or_assign(&key("FuncDef", &[])).unwrap(), Color::new(255, 0, 0));
    }

    #[test]
    fn first_assignment_skips_black() {
        let mut book = ColorCodebook::new();
        assert_eq!(book.get_or_assign(&key("Decl", &["main"])).unwrap(), Color::new(0, 0, 1));
        assert_eq!(book.get_or_assign(&key("Compound", &[])).unwrap(), Color::new(0, 0, 2));
        assert_eq!(book.get_or_assign(&key("Decl", &["main"])).unwrap(), Color::new(0, 0, 1));
    }

    #[test]
    fn allocation_skips_seeded_colors() {
        let seeds = [(key("A", &[]), Color::new(0, 0, 2))];
        let mut book = ColorCodebook::with_seeds(seeds).unwrap();
        assert_eq!(book.get_or_assign(&key("B", &[])).unwrap(), Color::new(0, 0, 1));
        assert_eq!(book.get_or_assign(&key("C", &[])).unwrap(), Color::new(0, 0, 3));
    }

    #[test]
    fn allocation_skips_white_and_exhausts() {
        let mut book = ColorCodebook::new();
        book.cursor = 0xFF_FFFE;
        assert_eq!(book.get_or_assign(&key("A", &[])).unwrap(), Color::new(255, 255, 254));
        assert_eq!(book.get_or_assign(&key("B", &[])), Err(CodebookError::Exhausted));
    }

    #[test]
    fn lookup_inverts_and_rejects() {
        let mut book = ColorCodebook::new();
        let k = key("Constant", &["int", "5"]);
        let c = book.get_or_assign(&k).unwrap();
        assert_eq!(book.lookup(c).unwrap(), &k);
        assert_eq!(book.lookup(Color::WHITE), Err(CodebookError::Reserved(Color::WHITE)));
        assert_eq!(book.lookup(Color::BLACK), Err(CodebookError::Reserved(Color::BLACK)));
        assert_eq!(
            book.lookup(Color::new(9, 9, 9)),
            Err(CodebookError::UnknownColor(Color::new(9, 9, 9)))
        );
    }

    #[test]
    fn seeds_cannot_use_reserved_colors() {
        assert_eq!(
            ColorCodebook::with_seeds([(key("A", &[]), Color::WHITE)]),
            Err(CodebookError::Reserved(Color::WHITE))
        );
    }

    #[test]
    fn text_round_trip_preserves_seed_flags_and_cursor() {
        let mut book = ColorCodebook::with_funcdef_red();
        book.get_or_assign(&key("Decl", &["main"])).unwrap();
        book.get_or_assign(&key("Constant", &["string", "\"a\tb\\\""])).unwrap();
        book.get_or_assign(&key("Compound", &[])).unwrap();
        let text = book.to_text();
        let loaded = ColorCodebook::from_text(&text).unwrap();
        assert_eq!(loaded, book);
        assert_eq!(loaded.cursor(), 4);
        assert_eq!(loaded.seed_count(), 1);
        assert_eq!(loaded.to_text(), text);
    }

    #[test]
    fn empty_book_round_trips() {
        let book = ColorCodebook::new();
        assert_eq!(book.to_text(), "C2I-CODEBOOK v1\n");
        assert_eq!(ColorCodebook::from_text(&book.to_text()).unwrap(), book);
    }

    #[test]
    fn load_rejects_bad_files() {
        let dup_color = "C2I-CODEBOOK v1\nA\t\t0,0,1\nB\t\t0,0,1\n";
        assert!(matches!(
            ColorCodebook::from_text(dup_color),
            Err(CodebookError::Malformed { line: 3, .. })
        ));
        let reserved = "C2I-CODEBOOK v1\nA\t\t255,255,255\n";
        assert!(matches!(ColorCodebook::from_text(reserved), Err(CodebookError::Malformed { line: 2, .. })));
        let dup_key = "C2I-CODEBOOK v1\nA\tx\t0,0,1\nA\tx\t0,0,2\n";
        assert!(matches!(ColorCodebook::from_text(dup_key), Err(CodebookError::Malformed { line: 3, .. })));
        assert!(ColorCodebook::from_text("nope\n").is_err());
        assert!(ColorCodebook::from_text("").is_err());
        assert!(ColorCodebook::from_text("C2I-CODEBOOK v1\nA\t\t1,2\n").is_err());
        assert!(ColorCodebook::from_text("C2I-CODEBOOK v1\nA\t\t1,2,300\n").is_err());
        assert!(ColorCodebook::from_text("C2I-CODEBOOK v1\nA\t\t1,2,3\tpinned\n").is_err());
        assert!(ColorCodebook::from_text("C2I-CODEBOOK v1\n\t\t1,2,3\n").is_err());
    }

    #[test]
    fn comments_are_ignored() {
        let text = "C2I-CODEBOOK v1\n# hello\nA\tp\x1fq\t0,0,7\n";
        let book = ColorCodebook::from_text(text).unwrap();
        assert_eq!(book.lookup(Color::new(0, 0, 7)).unwrap(), &key("A", &["p", "q"]));
        assert_eq!(book.cursor(), 8);
    }
}
