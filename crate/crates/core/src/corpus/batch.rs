//! White padding into equal-shape batches and the raw tensor file format.
//!
//! Tensor file: `C2I1`, then little-endian `u32` N, H, W, then `N*H*W*3`
//! bytes of row-major RGB.

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::image_rep::ImageRep;

pub const TENSOR_MAGIC: &[u8; 4] = b"C2I1";
pub const TENSOR_HEADER_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("bad magic {0:?}, expected \"C2I1\"")]
    BadMagic([u8; 4]),
    #[error("short read: expected {expected} bytes, got {actual}")]
    ShortRead { expected: usize, actual: usize },
    #[error("{0} bytes after the tensor payload")]
    TrailingBytes(usize),
    #[error("pixel buffer of {actual} bytes does not match {n}x{height}x{width}x3")]
    BufferSize {
        n: usize,
        height: usize,
        width: usize,
        actual: usize,
    },
    #[error("dimension {0} does not fit in 32 bits")]
    TooLarge(usize),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BatchError {
    #[error("batch size must be at least 1")]
    ZeroBatchSize,
}

/// `n` images of identical shape, stored contiguously.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BatchTensor {
    n: usize,
    height: usize,
    width: usize,
    data: Vec<u8>,
}

impl BatchTensor {
    pub fn new(n: usize, height: usize, width: usize, data: Vec<u8>) -> Result<Self, TensorError> {
        if data.len() != n * height * width * 3 {
            return Err(TensorError::BufferSize {
                n,
                height,
                width,
                actual: data.len(),
            });
        }
        for dim in [n, height, width] {
            if u32::try_from(dim).is_err() {
                return Err(TensorError::TooLarge(dim));
            }
        }
        Ok(Self {
            n,
            height,
            width,
            data,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn image(&self, i: usize) -> ImageRep {
        let size = self.height * self.width * 3;
        let bytes = self.data[i * size..(i + 1) * size].to_vec();
        ImageRep::from_raw(self.height, self.width, bytes).expect("slice sized")
    }

    /// Length of the encoded file.
    pub fn encoded_len(&self) -> usize {
        TENSOR_HEADER_LEN + self.data.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        self.write_to(&mut out).expect("writing to memory");
        out
    }

    pub fn write_to(&self, mut writer: impl Write) -> Result<(), TensorError> {
        writer.write_all(TENSOR_MAGIC)?;
        for dim in [self.n, self.height, self.width] {
            writer.write_all(&(dim as u32).to_le_bytes())?;
        }
        writer.write_all(&self.data)?;
        Ok(())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, TensorError> {
        if bytes.len() < TENSOR_HEADER_LEN {
            return Err(TensorError::ShortRead {
                expected: TENSOR_HEADER_LEN,
                actual: bytes.len(),
            });
        }
        let magic: [u8; 4] = bytes[..4].try_into().expect("4 bytes");
        if &magic != TENSOR_MAGIC {
            return Err(TensorError::BadMagic(magic));
        }
        let dim = |i: usize| {
            u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().expect("4 bytes")) as usize
        };
        let (n, height, width) = (dim(0), dim(1), dim(2));
        let payload = n
            .checked_mul(height)
            .and_then(|v| v.checked_mul(width))
            .and_then(|v| v.checked_mul(3))
            .ok_or(TensorError::TooLarge(usize::MAX))?;
        let expected = TENSOR_HEADER_LEN + payload;
        match bytes.len().cmp(&expected) {
            std::cmp::Ordering::Less => Err(TensorError::ShortRead {
                expected,
                actual: bytes.len(),
            }),
            std::cmp::Ordering::Greater => Err(TensorError::TrailingBytes(bytes.len() - expected)),
            std::cmp::Ordering::Equal => Self::new(n, height, width, bytes[TENSOR_HEADER_LEN..].to_vec()),
        }
    }

    pub fn read_from(mut reader: impl Read) -> Result<Self, TensorError> {
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}

pub fn export_tensor(batch: &BatchTensor, path: impl AsRef<Path>) -> Result<(), TensorError> {
    std::fs::write(path, batch.to_bytes())?;
    Ok(())
}

pub fn import_tensor(path: impl AsRef<Path>) -> Result<BatchTensor, TensorError> {
    BatchTensor::from_bytes(&std::fs::read(path)?)
}

/// One padded batch and where its members came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaddedBatch {
    pub tensor: BatchTensor,
    /// Input index of each member.
    pub members: Vec<usize>,
    /// Original `(height, width)` of each member.
    pub dims: Vec<(usize, usize)>,
}

impl PaddedBatch {
    /// Member `i` with its padding removed.
    pub fn crop(&self, i: usize) -> ImageRep {
        let (h, w) = self.dims[i];
        self.tensor.image(i).crop_top_left(h, w)
    }
}

fn pad_group(images: &[ImageRep], members: Vec<usize>) -> PaddedBatch {
    let height = members.iter().map(|&i| images[i].height()).max().unwrap_or(0);
    let width = members.iter().map(|&i| images[i].width()).max().unwrap_or(0);
    let mut data = vec![255u8; members.len() * height * width * 3];
    let size = height * width * 3;
    for (slot, &i) in members.iter().enumerate() {
        let image = &images[i];
        let base = slot * size;
        for y in 0..image.height() {
            let start = base + y * width * 3;
            data[start..start + image.width() * 3].copy_from_slice(image.row(y));
        }
    }
    let dims = members
        .iter()
        .map(|&i| (images[i].height(), images[i].width()))
        .collect();
    PaddedBatch {
        tensor: BatchTensor::new(members.len(), height, width, data).expect("sized buffer"),
        members,
        dims,
    }
}

/// Groups consecutive images, in input order, and pads each group right
/// and down with white to its largest height and width.
pub fn make_batches(images: &[ImageRep], batch_size: usize) -> Result<Vec<PaddedBatch>, BatchError> {
    let order: Vec<usize> = (0..images.len()).collect();
    batches_in_order(images, &order, batch_size)
}

/// Like [`make_batches`] but groups images after a stable sort by area.
pub fn make_batches_by_area(
    images: &[ImageRep],
    batch_size: usize,
) -> Result<Vec<PaddedBatch>, BatchError> {
    let mut order: Vec<usize> = (0..images.len()).collect();
    order.sort_by_key(|&i| images[i].area());
    batches_in_order(images, &order, batch_size)
}

fn batches_in_order(
    images: &[ImageRep],
    order: &[usize],
    batch_size: usize,
) -> Result<Vec<PaddedBatch>, BatchError> {
    if batch_size == 0 {
        return Err(BatchError::ZeroBatchSize);
    }
    Ok(order
        .chunks(batch_size)
        .map(|chunk| pad_group(images, chunk.to_vec()))
        .collect())
}
