//! Oracles shared by the integration tests and the acceptance run.

#![allow(dead_code)]

use c2i_core::render::{EdgeRoute, LayoutPlan, Segment};
use c2i_core::{Color, ImageRep};

/// Points two axis-aligned segments share, as an inclusive rectangle.
fn overlap(a: &Segment, b: &Segment) -> Option<((usize, usize), (usize, usize))> {
    let (ax0, ax1) = a.x_range();
    let (bx0, bx1) = b.x_range();
    let (ay0, ay1) = a.y_range();
    let (by0, by1) = b.y_range();
    let x = (ax0.max(bx0), ax1.min(bx1));
    let y = (ay0.max(by0), ay1.min(by1));
    (x.0 <= x.1 && y.0 <= y.1).then_some((x, y))
}

fn on_segment(s: &Segment, x: usize, y: usize) -> bool {
    let (x0, x1) = s.x_range();
    let (y0, y1) = s.y_range();
    (x0..=x1).contains(&x) && (y0..=y1).contains(&y)
}

/// Every pair of segments across every pair of edges. Returns the first
/// forbidden shared point: any point shared by edges of different parents,
/// or a point shared by siblings outside both drop segments.
pub fn planarity_violation(plan: &LayoutPlan) -> Option<String> {
    let edges = &plan.edges;
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            let (a, b) = (&edges[i], &edges[j]);
            for sa in &a.polyline {
                for sb in &b.polyline {
                    let Some(((x0, x1), (y0, y1))) = overlap(sa, sb) else {
                        continue;
                    };
                    if a.parent_id != b.parent_id {
                        return Some(format!(
                            "edges {}->{} and {}->{} share ({x0},{y0})",
                            a.parent_id, a.child_id, b.parent_id, b.child_id
                        ));
                    }
                    for x in x0..=x1 {
                        for y in y0..=y1 {
                            if !(on_segment(&a.drop(), x, y) && on_segment(&b.drop(), x, y)) {
                                return Some(format!(
                                    "siblings {} and {} share ({x},{y}) off the drop column",
                                    a.child_id, b.child_id
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

/// If edge `j` sits on a lane farther from the parent than edge `i`, child
/// `i`'s column is not strictly between the parent column and child `j`'s.
pub fn lane_rule_violation(plan: &LayoutPlan) -> Option<String> {
    let column = |e: &EdgeRoute| plan.boxes[e.child_id].center_x();
    for a in &plan.edges {
        for b in &plan.edges {
            if a.parent_id != b.parent_id || b.lane <= a.lane {
                continue;
            }
            let px = plan.boxes[a.parent_id].center_x();
            let (ci, cj) = (column(a), column(b));
            if px.min(cj) < ci && ci < px.max(cj) {
                return Some(format!("child {} lies between parent {} and child {}", a.child_id, a.parent_id, b.child_id));
            }
        }
    }
    None
}

/// Pixel discipline, monotone levels and identical box rows on a raw raster.
pub fn raster_violation(plan: &LayoutPlan, image: &ImageRep) -> Option<String> {
    if plan.level_tops.windows(2).any(|w| w[0] >= w[1]) {
        return Some(format!("level tops not increasing: {:?}", plan.level_tops));
    }
    let mut ink = vec![false; image.area()];
    for e in &plan.edges {
        for s in &e.polyline {
            for (x, y) in s.points() {
                ink[y * image.width() + x] = true;
            }
        }
    }
    let mut owner = vec![0u32; image.area()];
    for b in &plan.boxes {
        for y in b.y0..b.y0 + b.height {
            for x in b.x0..b.x0 + b.width {
                owner[y * image.width() + x] += 1;
            }
        }
    }
    for y in 0..image.height() {
        for x in 0..image.width() {
            let i = y * image.width() + x;
            let px = image.get(x, y);
            if px == Color::BLACK && !ink[i] {
                return Some(format!("black pixel ({x},{y}) on no edge"));
            }
            if px != Color::BLACK && px != Color::WHITE && owner[i] != 1 {
                return Some(format!("colored pixel ({x},{y}) in {} boxes", owner[i]));
            }
            if ink[i] && owner[i] != 0 {
                return Some(format!("edge pixel ({x},{y}) inside a box"));
            }
        }
    }
    let box_h = plan.boxes[0].height;
    for &top in &plan.level_tops {
        for y in top + 1..top + box_h {
            if image.row(y) != image.row(top) {
                return Some(format!("box rows {top} and {y} differ"));
            }
        }
    }
    None
}

pub fn has_adjacent_duplicate_rows(image: &ImageRep) -> bool {
    (1..image.height()).any(|y| image.row(y) == image.row(y - 1))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
