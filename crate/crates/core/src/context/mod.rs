//! Context anchors: loading embedding files, aligning them into model space,
//! and appending the variable anchor as a token.

mod align;
mod anchors;
mod embedder;

pub(crate) use align::as_row;
pub use align::{align, inject_variable_anchor, AlignWeights};
pub use anchors::{load_anchors, AnchorSet, ContextAnchors, ANCHOR_SCHEMA};
pub use embedder::{describe, offline_anchors, HashEmbedder};
