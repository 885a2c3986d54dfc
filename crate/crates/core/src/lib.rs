//! Lossless conversion of C abstract syntax trees into compact RGB images,
//! plus the corpus tooling around it.
//!
//! Pipeline: [`cparser`] (or the JSON interchange in [`ast`]) produces an
//! [`Ast`]; [`render`] lays it out and paints it with colors from a
//! [`ColorCodebook`]; [`compact`] removes repeated rows and white borders;
//! [`decode`] inverts the whole thing.

pub mod ast;
pub mod codebook;
pub mod compact;
pub mod corpus;
pub mod cparser;
pub mod decode;
pub mod gen;
pub mod image_rep;
pub mod pipeline;
pub mod render;

pub use ast::{Ast, AstNode};
pub use codebook::{Color, ColorCodebook, TokenKey};
pub use compact::{compact, compact_with, CompactOptions};
pub use decode::decode;
pub use image_rep::ImageRep;
pub use pipeline::Encoder;
pub use render::{plan_layout, rasterize, LayoutPlan, RenderConfig};

pub type MetricsReport64 = corpus::MetricsReport<f64>;
pub type MetricsReport32 = corpus::MetricsReport<f32>;
pub type OperatingPoint64 = corpus::OperatingPoint<f64>;
pub type OperatingPoint32 = corpus::OperatingPoint<f32>;
