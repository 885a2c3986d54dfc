//! Drawing step: tidy layered layout, Manhattan edge routing, rasterization.
//!
//! Layout rules:
//!
//! * Leaves take consecutive slots in depth-first order, `box_w + gap_x`
//!   pixels apart. An internal node is centered on the midpoint of its first
//!   and last child's centers, so it always lies within its subtree's span.
//! * All boxes of a level share a top row. Below each level (except the
//!   deepest) sits a band of `margin_y + lane_pitch * L + margin_y` rows,
//!   where `L` is the largest child count of any parent on that level.
//! * Each parent gives its edges distinct lanes. The child farthest from the
//!   parent's column takes the lane nearest the parent; ties go to the
//!   leftmost child. An edge drops from the parent's bottom center to its
//!   lane, runs horizontally to the child's column and descends to the
//!   child's top center.
//!
//! With these rules edges of different parents never share a pixel, and
//! edges of one parent share only the parent's drop column.

use std::cmp::Reverse;

use thiserror::Error;

use crate::ast::{Ast, AstNode};
use crate::codebook::{CodebookError, Color, ColorCodebook, TokenKey};
use crate::image_rep::ImageRep;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RenderError {
    #[error("invalid render config: {0}")]
    InvalidConfig(String),
    #[error("level {level}: a parent has {needed} children but only {available} fixed lanes exist")]
    LaneOverflow {
        level: usize,
        needed: usize,
        available: usize,
    },
    #[error("token {0} has no color in the frozen codebook")]
    MissingKey(TokenKey),
    #[error(transparent)]
    Codebook(#[from] CodebookError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RenderConfig {
    pub box_w: usize,
    pub box_h: usize,
    pub gap_x: usize,
    pub lane_pitch: usize,
    pub margin_y: usize,
    /// Use this many lanes in every band instead of sizing bands per tree.
    pub fixed_lanes: Option<usize>,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            box_w: 8,
            box_h: 4,
            gap_x: 2,
            lane_pitch: 2,
            margin_y: 1,
            fixed_lanes: None,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<(), RenderError> {
        let fields = [
            ("box_w", self.box_w),
            ("box_h", self.box_h),
            ("gap_x", self.gap_x),
            ("lane_pitch", self.lane_pitch),
            ("margin_y", self.margin_y),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| *v == 0) {
            return Err(RenderError::InvalidConfig(format!("{name} must be at least 1")));
        }
        if self.box_w < 2 {
            return Err(RenderError::InvalidConfig("box_w must be at least 2".into()));
        }
        if self.fixed_lanes == Some(0) {
            return Err(RenderError::InvalidConfig("fixed_lanes must be at least 1".into()));
        }
        Ok(())
    }

    pub fn slot_pitch(&self) -> usize {
        self.box_w + self.gap_x
    }
}

/// Axis-aligned segment with inclusive endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Segment {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Segment {
    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        debug_assert!(x0 == x1 || y0 == y1, "segment must be axis-aligned");
        Self { x0, y0, x1, y1 }
    }

    pub fn x_range(&self) -> (usize, usize) {
        (self.x0.min(self.x1), self.x0.max(self.x1))
    }

    pub fn y_range(&self) -> (usize, usize) {
        (self.y0.min(self.y1), self.y0.max(self.y1))
    }

    /// Pixel count of the segment.
    pub fn pixel_count(&self) -> usize {
        let (xa, xb) = self.x_range();
        let (ya, yb) = self.y_range();
        (xb - xa) + (yb - ya) + 1
    }

    pub fn points(&self) -> impl Iterator<Item = (usize, usize)> {
        let (xa, xb) = self.x_range();
        let (ya, yb) = self.y_range();
        (ya..=yb).flat_map(move |y| (xa..=xb).map(move |x| (x, y)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxPlacement {
    /// Preorder index of the node.
    pub node_id: usize,
    pub key: TokenKey,
    pub level: usize,
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl BoxPlacement {
    pub fn center_x(&self) -> usize {
        self.x0 + self.width / 2
    }

    pub fn bottom(&self) -> usize {
        self.y0 + self.height
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeRoute {
    pub parent_id: usize,
    pub child_id: usize,
    pub lane: usize,
    /// Drop, lane run, rise. The lane run is a single point when the child
    /// sits directly below the parent.
    pub polyline: [Segment; 3],
}

impl EdgeRoute {
    pub fn drop(&self) -> Segment {
        self.polyline[0]
    }

    pub fn lane_run(&self) -> Segment {
        self.polyline[1]
    }

    pub fn rise(&self) -> Segment {
        self.polyline[2]
    }

    pub fn pixel_count(&self) -> usize {
        // Consecutive segments share their joint pixel.
        self.polyline.iter().map(Segment::pixel_count).sum::<usize>() - 2
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayoutPlan {
    /// Indexed by preorder node id.
    pub boxes: Vec<BoxPlacement>,
    pub edges: Vec<EdgeRoute>,
    pub width: usize,
    pub height: usize,
    /// Top row of each level's boxes.
    pub level_tops: Vec<usize>,
    /// Lane count of the band under each level except the deepest.
    pub band_lanes: Vec<usize>,
}

struct FlatNode<'a> {
    node: &'a AstNode,
    level: usize,
    children: Vec<usize>,
}

fn flatten(root: &AstNode) -> Vec<FlatNode<'_>> {
    let mut flat: Vec<FlatNode<'_>> = Vec::new();
    // (node, level, parent id)
    let mut stack = vec![(root, 0usize, None::<usize>)];
    while let Some((node, level, parent)) = stack.pop() {
        let id = flat.len();
        flat.push(FlatNode {
            node,
            level,
            children: Vec::with_capacity(node.children().len()),
        });
        if let Some(p) = parent {
            flat[p].children.push(id);
        }
        for child in node.children().iter().rev() {
            stack.push((child, level + 1, Some(id)));
        }
    }
    flat
}

/// Places boxes and routes edges for `ast`.
pub fn plan_layout(ast: &Ast, config: &RenderConfig) -> Result<LayoutPlan, RenderError> {
    config.validate()?;
    let flat = flatten(ast.root());
    let pitch = config.slot_pitch();

    let mut centers = vec![0usize; flat.len()];
    let mut leaves = 0usize;
    for (id, n) in flat.iter().enumerate() {
        if n.children.is_empty() {
            centers[id] = leaves * pitch + config.box_w / 2;
            leaves += 1;
        }
    }
    // Reverse preorder visits children before parents.
    for id in (0..flat.len()).rev() {
        let children = &flat[id].children;
        if let (Some(&first), Some(&last)) = (children.first(), children.last()) {
            centers[id] = (centers[first] + centers[last]) / 2;
        }
    }

    let depth = ast.depth();
    let mut max_children = vec![0usize; depth + 1];
    for n in &flat {
        max_children[n.level] = max_children[n.level].max(n.children.len());
    }
    let mut band_lanes = Vec::with_capacity(depth);
    for (level, &needed) in max_children.iter().enumerate().take(depth) {
        let lanes = match config.fixed_lanes {
            Some(available) if needed > available => {
                return Err(RenderError::LaneOverflow {
                    level,
                    needed,
                    available,
                })
            }
            Some(available) => available,
            None => needed,
        };
        band_lanes.push(lanes);
    }
    let mut level_tops = Vec::with_capacity(depth + 1);
    level_tops.push(0);
    for lanes in &band_lanes {
        let top = level_tops[level_tops.len() - 1];
        level_tops.push(top + config.box_h + 2 * config.margin_y + config.lane_pitch * lanes);
    }
    let height = level_tops[depth] + config.box_h;
    let width = leaves * pitch - config.gap_x;

    let boxes: Vec<BoxPlacement> = flat
        .iter()
        .enumerate()
        .map(|(id, n)| BoxPlacement {
            node_id: id,
            key: TokenKey::of(n.node),
            level: n.level,
            x0: centers[id] - config.box_w / 2,
            y0: level_tops[n.level],
            width: config.box_w,
            height: config.box_h,
        })
        .collect();

    let mut edges = Vec::with_capacity(flat.len().saturating_sub(1));
    for (parent_id, n) in flat.iter().enumerate() {
        if n.children.is_empty() {
            continue;
        }
        let px = centers[parent_id];
        let drop_top = level_tops[n.level] + config.box_h;
        let first_lane_y = drop_top + config.margin_y;
        let child_top = level_tops[n.level + 1];
        let mut order: Vec<usize> = n.children.clone();
        order.sort_by_key(|&c| (Reverse(centers[c].abs_diff(px)), centers[c]));
        for (lane, child_id) in order.into_iter().enumerate() {
            let cx = centers[child_id];
            let lane_y = first_lane_y + lane * config.lane_pitch;
            edges.push(EdgeRoute {
                parent_id,
                child_id,
                lane,
                polyline: [
                    Segment::new(px, drop_top, px, lane_y),
                    Segment::new(px, lane_y, cx, lane_y),
                    Segment::new(cx, lane_y, cx, child_top - 1),
                ],
            });
        }
    }

    Ok(LayoutPlan {
        boxes,
        edges,
        width,
        height,
        level_tops,
        band_lanes,
    })
}

fn paint(plan: &LayoutPlan, mut color_of: impl FnMut(&TokenKey) -> Result<Color, RenderError>) -> Result<ImageRep, RenderError> {
    let mut image = ImageRep::white(plan.height, plan.width);
    for b in &plan.boxes {
        let color = color_of(&b.key)?;
        image.fill_rect(b.x0, b.y0, b.x0 + b.width, b.y0 + b.height, color);
    }
    for edge in &plan.edges {
        for segment in &edge.polyline {
            for (x, y) in segment.points() {
                image.set(x, y, Color::BLACK);
            }
        }
    }
    Ok(image)
}

/// Paints `plan`, assigning codebook colors to unseen tokens.
pub fn rasterize(plan: &LayoutPlan, book: &mut ColorCodebook) -> Result<ImageRep, RenderError> {
    paint(plan, |key| Ok(book.get_or_assign(key)?))
}

/// Paints `plan` against a codebook that already holds every token.
pub fn rasterize_frozen(plan: &LayoutPlan, book: &ColorCodebook) -> Result<ImageRep, RenderError> {
    paint(plan, |key| book.get(key).ok_or_else(|| RenderError::MissingKey(key.clone())))
}
