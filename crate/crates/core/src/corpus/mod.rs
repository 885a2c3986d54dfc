//! Labeled corpora: manifests, statistics, oversampling, batching, tensor
//! export and score evaluation.

mod batch;
mod manifest;
mod metrics;
mod oversample;
mod stats;

pub use batch::{
    export_tensor, import_tensor, make_batches, make_batches_by_area, BatchError, BatchTensor,
    PaddedBatch, TensorError, TENSOR_HEADER_LEN, TENSOR_MAGIC,
};
pub use manifest::{
    resolve_locator, Category, ClassCounts, CorpusManifest, ManifestError, Sample, Split,
};
pub use metrics::{
    evaluate, sweep, write_pr_csv, Confusion, MetricsError, MetricsReport, OperatingPoint,
};
pub use oversample::{oversample, oversample_target, OversampleError, DEFAULT_TARGET_RATIO};
pub use stats::{histograms, stats, SampleWarning, StatsReport};

use crate::image_rep::{ImageError, ImageRep};

pub fn export_png(image: &ImageRep, path: impl AsRef<std::path::Path>) -> Result<(), ImageError> {
    image.write_png(path)
}
