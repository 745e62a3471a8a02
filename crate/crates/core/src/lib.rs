//! Embedded zerotree wavelet (EZW) image codec for 8-bit grayscale images.
//!
//! The encoder decomposes an image with an orthonormal 2-D DWT, then emits
//! an embedded stream of dominant-pass symbols and subordinate refinement
//! bits at halving thresholds. Three dominant-pass schedules are available
//! (see [`codec`]); they trade scan work against retained detail.
//!
//! ```
//! use ezw::{codec, imageio::GrayImage, metrics, wavelet::BankId};
//!
//! let img = GrayImage::from_fn(32, 32, |r, c| (r * 7 + c * 3) as u8).unwrap();
//! let cfg = codec::EncoderConfig::new(codec::Scheme::C, 3, 10, 3, BankId::Haar).unwrap();
//! let (stream, _stats) = codec::encode(&img, &cfg).unwrap();
//! let decoded = codec::decode(&stream.to_bytes(), Some(6)).unwrap();
//! assert!(metrics::psnr(&img, &decoded.image).unwrap() > 20.0);
//! ```

pub mod bench;
pub mod bitstream;
pub mod codec;
pub mod error;
pub mod imageio;
pub mod metrics;
pub mod wavelet;
pub mod zerotree;

pub use error::{Error, Result};
