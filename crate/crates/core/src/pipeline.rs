//! Source or AST in, compacted image out, and the round-trip check.

use std::path::Path;

use thiserror::Error;

use crate::ast::{read_interchange, Ast, InterchangeError};
use crate::codebook::{CodebookError, ColorCodebook};
use crate::compact::{compact_with, CompactError, CompactOptions};
use crate::cparser::{parse_source, FrontendError};
use crate::decode::{decode, DecodeError};
use crate::image_rep::ImageRep;
use crate::render::{plan_layout, rasterize_frozen, RenderConfig, RenderError};

#[derive(Debug, Error)]
pub enum AstLoadError {
    #[error("{path}: {error}")]
    Io {
        path: String,
        error: std::io::Error,
    },
    #[error("{path}: {error}")]
    Interchange {
        path: String,
        error: InterchangeError,
    },
    #[error("{path}:{error}")]
    Frontend {
        path: String,
        error: FrontendError,
    },
}

/// Reads an AST from interchange JSON (`.json`) or C source (anything else).
pub fn load_ast(path: &Path) -> Result<Ast, AstLoadError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|error| AstLoadError::Io {
        path: shown.clone(),
        error,
    })?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        read_interchange(&text).map_err(|error| AstLoadError::Interchange { path: shown, error })
    } else {
        parse_source(&text).map_err(|error| AstLoadError::Frontend { path: shown, error })
    }
}

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Codebook(#[from] CodebookError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Compact(#[from] CompactError),
}

#[derive(Debug, Error)]
pub enum RoundTripError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("decoded tree differs from the original")]
    Mismatch,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Encoder {
    pub render: RenderConfig,
    pub compact: CompactOptions,
}

impl Encoder {
    pub fn new(render: RenderConfig, compact: CompactOptions) -> Self {
        Self { render, compact }
    }

    /// Image before compaction.
    pub fn draw(&self, ast: &Ast, book: &ColorCodebook) -> Result<ImageRep, EncodeError> {
        let plan = plan_layout(ast, &self.render)?;
        let mut image = rasterize_frozen(&plan, book)?;
        image.meta.codebook_digest = Some(book.digest());
        image.meta.config = Some(self.render);
        Ok(image)
    }

    /// Renders and compacts against a codebook that already holds every
    /// token of `ast`.
    pub fn encode_frozen(&self, ast: &Ast, book: &ColorCodebook) -> Result<ImageRep, EncodeError> {
        Ok(compact_with(&self.draw(ast, book)?, &self.compact)?)
    }

    /// Assigns colors to unseen tokens in breadth-first order, then encodes.
    pub fn encode(&self, ast: &Ast, book: &mut ColorCodebook) -> Result<ImageRep, EncodeError> {
        book.assign_tree(ast.root())?;
        self.encode_frozen(ast, book)
    }

    pub fn encode_source(
        &self,
        source: &str,
        book: &mut ColorCodebook,
    ) -> Result<(Ast, ImageRep), EncodeError> {
        let ast = parse_source(source)?;
        let image = self.encode(&ast, book)?;
        Ok((ast, image))
    }

    /// Encodes, decodes and compares with the original tree.
    pub fn check(&self, ast: &Ast, book: &ColorCodebook) -> Result<ImageRep, RoundTripError> {
        let image = self.encode_frozen(ast, book)?;
        if decode(&image, book)? != *ast {
            return Err(RoundTripError::Mismatch);
        }
        Ok(image)
    }
}
