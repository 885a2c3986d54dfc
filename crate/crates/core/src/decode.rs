//! Image → AST reconstruction.
//!
//! Boxes are found as maximal same-color 4-connected regions, which must be
//! rectangles. Each black 4-connected component is one parent's edge fan: it
//! touches exactly one box from below (the parent's bottom attachment) and
//! one or more boxes from above (their top attachments). Children are
//! ordered by ascending x-center. Only geometry and color are used.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ast::{Ast, AstNode};
use crate::codebook::{CodebookError, Color, ColorCodebook};
use crate::image_rep::ImageRep;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("pixel ({x}, {y}) has color {color} which is neither background, ink, nor in the codebook")]
    UnknownColor { x: usize, y: usize, color: Color },
    #[error("corrupt image: {0}")]
    Corrupt(Corruption),
    #[error(transparent)]
    Codebook(#[from] CodebookError),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Corruption {
    #[error("image contains no boxes")]
    Empty,
    #[error("region of color {color} at ({x}, {y}) is not a rectangle")]
    NonRectangular { x: usize, y: usize, color: Color },
    #[error("box at ({x}, {y}) touches another region on its side")]
    SideContact { x: usize, y: usize },
    #[error("box at ({x}, {y}) has more than one attachment on its {edge} edge")]
    MultipleAttachments { x: usize, y: usize, edge: &'static str },
    #[error("box at ({x}, {y}) overlaps a level band it does not align with")]
    MisalignedLevel { x: usize, y: usize },
    #[error("edge path at ({x}, {y}) does not end at a parent box")]
    DanglingPath { x: usize, y: usize },
    #[error("edge path at ({x}, {y}) leads from a parent to no child")]
    ChildlessPath { x: usize, y: usize },
    #[error("ink at ({x}, {y}) touches no box")]
    StrayInk { x: usize, y: usize },
    #[error("edge path at ({x}, {y}) reaches {count} parent boxes")]
    MultipleParents { x: usize, y: usize, count: usize },
    #[error("box at ({x}, {y}) has no incoming edge but is not the topmost box")]
    Orphan { x: usize, y: usize },
    #[error("edge from box at ({px}, {py}) skips to a box that is not on the next level")]
    LevelSkip { px: usize, py: usize },
}

fn corrupt<T>(c: Corruption) -> Result<T, DecodeError> {
    Err(DecodeError::Corrupt(c))
}

/// A detected token box. Ranges are inclusive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScannedBox {
    pub x0: usize,
    pub x1: usize,
    pub y0: usize,
    pub y1: usize,
    pub color: Color,
    pub level: usize,
    /// Column of the ink pixel directly above the box, if any.
    pub top_attach: Option<usize>,
    /// Column of the ink pixel directly below the box, if any.
    pub bottom_attach: Option<usize>,
}

impl ScannedBox {
    pub fn center_x(&self) -> usize {
        (self.x0 + self.x1).div_ceil(2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxScan {
    /// Sorted by level, then x.
    pub boxes: Vec<ScannedBox>,
    /// Inclusive row range of each level band.
    pub levels: Vec<(usize, usize)>,
}

const UNLABELED: u32 = u32::MAX;

/// Labels 4-connected regions whose pixels satisfy `pred`, seeded at pixels
/// matching `pred`; neighbors join if they have the same color.
fn label_regions(image: &ImageRep, mut pred: impl FnMut(Color) -> bool) -> (Vec<u32>, Vec<Region>) {
    let (w, h) = (image.width(), image.height());
    let mut labels = vec![UNLABELED; w * h];
    let mut regions = Vec::new();
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if labels[y * w + x] != UNLABELED {
                continue;
            }
            let color = image.get(x, y);
            if !pred(color) {
                continue;
            }
            let id = regions.len() as u32;
            let mut region = Region {
                color,
                x0: x,
                x1: x,
                y0: y,
                y1: y,
                count: 0,
                seed: (x, y),
            };
            labels[y * w + x] = id;
            stack.push((x, y));
            while let Some((cx, cy)) = stack.pop() {
                region.count += 1;
                region.x0 = region.x0.min(cx);
                region.x1 = region.x1.max(cx);
                region.y0 = region.y0.min(cy);
                region.y1 = region.y1.max(cy);
                let mut visit = |nx: usize, ny: usize| {
                    let i = ny * w + nx;
                    if labels[i] == UNLABELED && image.get(nx, ny) == color {
                        labels[i] = id;
                        stack.push((nx, ny));
                    }
                };
                if cx > 0 {
                    visit(cx - 1, cy);
                }
                if cx + 1 < w {
                    visit(cx + 1, cy);
                }
                if cy > 0 {
                    visit(cx, cy - 1);
                }
                if cy + 1 < h {
                    visit(cx, cy + 1);
                }
            }
            regions.push(region);
        }
    }
    (labels, regions)
}

struct Region {
    color: Color,
    x0: usize,
    x1: usize,
    y0: usize,
    y1: usize,
    count: usize,
    seed: (usize, usize),
}

pub fn segment_boxes(image: &ImageRep, book: &ColorCodebook) -> Result<BoxScan, DecodeError> {
    for y in 0..image.height() {
        for x in 0..image.width() {
            let color = image.get(x, y);
            if !color.is_reserved() && !book.contains_color(color) {
                return Err(DecodeError::UnknownColor { x, y, color });
            }
        }
    }
    let (_, regions) = label_regions(image, |c| !c.is_reserved());
    if regions.is_empty() {
        return corrupt(Corruption::Empty);
    }

    let mut boxes = Vec::with_capacity(regions.len());
    for r in &regions {
        let area = (r.x1 - r.x0 + 1) * (r.y1 - r.y0 + 1);
        if r.count != area {
            return corrupt(Corruption::NonRectangular {
                x: r.seed.0,
                y: r.seed.1,
                color: r.color,
            });
        }
        let side_touch = (r.y0..=r.y1).any(|y| {
            (r.x0 > 0 && image.get(r.x0 - 1, y) != Color::WHITE)
                || (r.x1 + 1 < image.width() && image.get(r.x1 + 1, y) != Color::WHITE)
        });
        if side_touch {
            return corrupt(Corruption::SideContact { x: r.x0, y: r.y0 });
        }
        let attach = |row: Option<usize>, edge: &'static str| -> Result<Option<usize>, DecodeError> {
            let Some(row) = row else { return Ok(None) };
            let mut found = None;
            for x in r.x0..=r.x1 {
                match image.get(x, row) {
                    Color::WHITE => {}
                    Color::BLACK if found.is_none() => found = Some(x),
                    Color::BLACK => {
                        return corrupt(Corruption::MultipleAttachments { x: r.x0, y: r.y0, edge })
                    }
                    // Another box directly above or below.
                    _ => return corrupt(Corruption::SideContact { x: r.x0, y: r.y0 }),
                }
            }
            Ok(found)
        };
        let top_attach = attach(r.y0.checked_sub(1), "top")?;
        let bottom_attach = attach((r.y1 + 1 < image.height()).then_some(r.y1 + 1), "bottom")?;
        boxes.push(ScannedBox {
            x0: r.x0,
            x1: r.x1,
            y0: r.y0,
            y1: r.y1,
            color: r.color,
            level: 0,
            top_attach,
            bottom_attach,
        });
    }

    // Level bands: every box in a band spans exactly the same rows.
    let mut bands: BTreeMap<(usize, usize), ()> = BTreeMap::new();
    for b in &boxes {
        bands.insert((b.y0, b.y1), ());
    }
    let levels: Vec<(usize, usize)> = bands.into_keys().collect();
    for pair in levels.windows(2) {
        if pair[1].0 <= pair[0].1 {
            let b = boxes.iter().find(|b| (b.y0, b.y1) == pair[1]).expect("band has a box");
            return corrupt(Corruption::MisalignedLevel { x: b.x0, y: b.y0 });
        }
    }
    for b in &mut boxes {
        b.level = levels.binary_search(&(b.y0, b.y1)).expect("band exists");
    }
    boxes.sort_by_key(|b| (b.level, b.x0));
    Ok(BoxScan { boxes, levels })
}

/// Returns `(parent, child)` index pairs into `scan.boxes`.
pub fn trace_edges(image: &ImageRep, scan: &BoxScan) -> Result<Vec<(usize, usize)>, DecodeError> {
    let w = image.width();
    let (labels, components) = label_regions(image, |c| c == Color::BLACK);
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); components.len()];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); components.len()];
    for (i, b) in scan.boxes.iter().enumerate() {
        if let Some(x) = b.bottom_attach {
            parents[labels[(b.y1 + 1) * w + x] as usize].push(i);
        }
        if let Some(x) = b.top_attach {
            children[labels[(b.y0 - 1) * w + x] as usize].push(i);
        }
    }

    let mut edges = Vec::with_capacity(scan.boxes.len().saturating_sub(1));
    for (c, comp) in components.iter().enumerate() {
        let (x, y) = comp.seed;
        match (parents[c].as_slice(), children[c].is_empty()) {
            ([], true) => return corrupt(Corruption::StrayInk { x, y }),
            ([], false) => {
                let child = &scan.boxes[children[c][0]];
                return corrupt(Corruption::DanglingPath {
                    x: child.top_attach.expect("child attachment"),
                    y: child.y0 - 1,
                });
            }
            ([_], true) => return corrupt(Corruption::ChildlessPath { x, y }),
            ([p], false) => {
                let parent = &scan.boxes[*p];
                for &child in &children[c] {
                    if scan.boxes[child].level != parent.level + 1 {
                        return corrupt(Corruption::LevelSkip {
                            px: parent.x0,
                            py: parent.y0,
                        });
                    }
                    edges.push((*p, child));
                }
            }
            (many, _) => {
                return corrupt(Corruption::MultipleParents {
                    x,
                    y,
                    count: many.len(),
                })
            }
        }
    }

    let mut has_parent = vec![false; scan.boxes.len()];
    for &(_, c) in &edges {
        has_parent[c] = true;
    }
    // Boxes are sorted by level, so a valid root is box 0 and the only box
    // without a parent.
    for (i, b) in scan.boxes.iter().enumerate() {
        if !has_parent[i] && (i != 0 || scan.boxes.get(1).is_some_and(|n| n.level == 0)) {
            return corrupt(Corruption::Orphan { x: b.x0, y: b.y0 });
        }
    }
    Ok(edges)
}

/// Reconstructs the AST drawn in `image`.
pub fn decode(image: &ImageRep, book: &ColorCodebook) -> Result<Ast, DecodeError> {
    let scan = segment_boxes(image, book)?;
    let edges = trace_edges(image, &scan)?;

    let n = scan.boxes.len();
    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (p, c) in edges {
        kids[p].push(c);
    }
    for list in &mut kids {
        list.sort_by_key(|&c| scan.boxes[c].center_x());
    }
    // Deepest boxes first, so children are built before their parents.
    let mut built: Vec<Option<AstNode>> = vec![None; n];
    for i in (0..n).rev() {
        let key = book.lookup(scan.boxes[i].color)?;
        let children = kids[i]
            .iter()
            .map(|&c| built[c].take().expect("child built before parent"))
            .collect();
        let node = AstNode::new(key.kind(), key.params().iter().cloned(), children)
            .expect("codebook keys are valid tokens");
        built[i] = Some(node);
    }
    Ok(Ast::new(built[0].take().expect("root exists")))
}
