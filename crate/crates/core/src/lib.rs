//! Self-supervised distillation on multi-spectral and SAR raster imagery.
//!
//! A student network is trained to predict a slowly-moving teacher's
//! projection of a second view of the same patch, where views are random
//! band selections across sensor modalities. Includes the synthetic raster
//! store, view sampling policies, the seeded augmentation stack, a small
//! reverse-mode CNN substrate with gradient checking, SGD with cosine warm
//! restarts, the training loop, and frozen-encoder probing.

pub mod augment;
pub mod cli;
pub mod distill;
pub mod error;
pub mod nncore;
pub mod optimsched;
pub mod probe;
pub mod rasterstore;
pub mod rng;
pub mod trainer;
pub mod viewsampler;

pub use error::{Error, Result};
