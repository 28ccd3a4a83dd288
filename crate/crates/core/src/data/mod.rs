//! Dataset loading, splitting, normalization, windowing and error metrics.

mod dataset;
mod metrics;
mod normalize;
mod split;
mod window;

pub use dataset::{load_csv, read_csv, Dataset, Variable};
pub use metrics::{mae, mse};
pub use normalize::{standardize, NormStats, Standardizer};
pub use split::{split, Segments, SplitSpec};
pub use window::{attach_norms, make_windows, window_count, SeriesWindow};
