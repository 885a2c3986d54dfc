//! Compacting step: collapse runs of identical adjacent rows, then trim
//! all-white rows and columns from the four borders.
//!
//! Only rows are deleted and borders cropped; no pixel value changes.
//! Interior white bands shrink to a single row through the duplicate
//! collapse and are never removed outright.

use thiserror::Error;

use crate::image_rep::ImageRep;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CompactError {
    #[error("cannot compact an image with no non-white pixel")]
    AllWhite,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct CompactOptions {
    /// Also collapse runs of identical adjacent columns.
    pub collapse_cols: bool,
}

fn collapse_rows(image: &ImageRep) -> ImageRep {
    let mut kept: Vec<u8> = Vec::with_capacity(image.as_bytes().len());
    let mut height = 0;
    let mut prev: Option<&[u8]> = None;
    for row in image.rows() {
        if prev != Some(row) {
            kept.extend_from_slice(row);
            height += 1;
        }
        prev = Some(row);
    }
    let mut out = ImageRep::from_raw(height, image.width(), kept).expect("row-aligned buffer");
    out.meta = image.meta.clone();
    out
}

fn column_equal(image: &ImageRep, a: usize, b: usize) -> bool {
    (0..image.height()).all(|y| image.get(a, y) == image.get(b, y))
}

fn collapse_cols(image: &ImageRep) -> ImageRep {
    let keep: Vec<usize> = (0..image.width())
        .filter(|&x| x == 0 || !column_equal(image, x, x - 1))
        .collect();
    select_columns(image, &keep)
}

fn select_columns(image: &ImageRep, columns: &[usize]) -> ImageRep {
    let mut bytes = Vec::with_capacity(image.height() * columns.len() * 3);
    for y in 0..image.height() {
        let row = image.row(y);
        for &x in columns {
            bytes.extend_from_slice(&row[x * 3..x * 3 + 3]);
        }
    }
    let mut out = ImageRep::from_raw(image.height(), columns.len(), bytes).expect("buffer sized");
    out.meta = image.meta.clone();
    out
}

fn trim_borders(image: &ImageRep) -> ImageRep {
    let white_row = |y: usize| image.row(y).iter().all(|&b| b == 255);
    let white_col = |x: usize| (0..image.height()).all(|y| image.get(x, y).to_array() == [255; 3]);
    let top = (0..image.height()).find(|&y| !white_row(y)).expect("non-white image");
    let bottom = (0..image.height()).rev().find(|&y| !white_row(y)).expect("non-white image");
    let left = (0..image.width()).find(|&x| !white_col(x)).expect("non-white image");
    let right = (0..image.width()).rev().find(|&x| !white_col(x)).expect("non-white image");
    if top == 0 && left == 0 && bottom + 1 == image.height() && right + 1 == image.width() {
        return image.clone();
    }
    let width = right - left + 1;
    let mut bytes = Vec::with_capacity((bottom - top + 1) * width * 3);
    for y in top..=bottom {
        bytes.extend_from_slice(&image.row(y)[left * 3..(right + 1) * 3]);
    }
    let mut out = ImageRep::from_raw(bottom - top + 1, width, bytes).expect("buffer sized");
    out.meta = image.meta.clone();
    out
}

pub fn compact_with(image: &ImageRep, options: &CompactOptions) -> Result<ImageRep, CompactError> {
    if image.is_all_white() {
        return Err(CompactError::AllWhite);
    }
    let mut out = collapse_rows(image);
    if options.collapse_cols {
        out = collapse_cols(&out);
    }
    Ok(trim_borders(&out))
}

/// Row-only compaction.
pub fn compact(image: &ImageRep) -> Result<ImageRep, CompactError> {
    compact_with(image, &CompactOptions::default())
}
