//! The context-aware transformer: patch embedding, per-component attention,
//! context-informed mixture-of-experts, mean aggregation and projection.
//!
//! Backward passes are hand-written per layer; [`Forecaster::backward`]
//! returns exact gradients for a fixed routing decision.

mod activation;
mod attention;
pub mod checkpoint;
mod config;
mod layers;
mod moe;
mod network;
mod params;

pub use activation::Activation;
pub use attention::AttentionCache;
pub use config::{ModelConfig, Variant};
pub use layers::softmax_rows;
pub use moe::{top_r_gate, RouteTable};
pub use network::{ForwardTrace, Forecaster, Tape};
pub use params::{
    AttentionParams, BlockParams, FeedForward, LayerNormParams, Linear, Mlp, Params, RoutedExperts, Visit,
};
