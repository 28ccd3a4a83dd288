use ndarray::Array3;

use crate::error::{Error, Result};

/// Non-overlapping patches of every component row: shape `(rows, N, P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchGrid {
    pub patches: Array3<f64>,
}

impl PatchGrid {
    pub fn rows(&self) -> usize {
        self.patches.dim().0
    }

    pub fn num_patches(&self) -> usize {
        self.patches.dim().1
    }

    pub fn patch_len(&self) -> usize {
        self.patches.dim().2
    }

    /// Concatenate row `k`'s patches and truncate to `len` samples.
    pub fn unpatch(&self, k: usize, len: usize) -> Vec<f64> {
        self.patches
            .index_axis(ndarray::Axis(0), k)
            .iter()
            .copied()
            .take(len)
            .collect()
    }
}

pub fn num_patches(len: usize, patch_len: usize) -> usize {
    len.div_ceil(patch_len)
}

/// Split each equal-length series into `ceil(L/P)` patches, right-padding the
/// final patch with the series' last value.
pub fn patch(series: &[Vec<f64>], patch_len: usize) -> Result<PatchGrid> {
    if patch_len == 0 {
        return Err(Error::InvalidArgument("patch length must be positive".into()));
    }
    let len = series.first().map_or(0, Vec::len);
    if len == 0 || series.iter().any(|s| s.len() != len) {
        return Err(Error::Shape("patching needs non-empty series of equal length".into()));
    }
    let n = num_patches(len, patch_len);
    let mut grid = Array3::zeros((series.len(), n, patch_len));
    for (k, s) in series.iter().enumerate() {
        let last = s[len - 1];
        for (i, v) in grid
            .index_axis_mut(ndarray::Axis(0), k)
            .iter_mut()
            .enumerate()
        {
            *v = if i < len { s[i] } else { last };
        }
    }
    Ok(PatchGrid { patches: grid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn ninety_six_by_twenty_four() {
        let g = patch(&[vec![0.0; 96]], 24).unwrap();
        assert_eq!(g.num_patches(), 4);
    }

    #[test]
    fn last_value_padding() {
        let g = patch(&[vec![1.0, 2.0, 3.0, 4.0, 5.0]], 2).unwrap();
        assert_eq!(
            g.patches.index_axis(ndarray::Axis(0), 0),
            array![[1.0, 2.0], [3.0, 4.0], [5.0, 5.0]]
        );
        assert_eq!(g.unpatch(0, 5), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn single_patch() {
        let s = vec![3.0, 1.0, 4.0];
        let g = patch(&[s.clone()], 3).unwrap();
        assert_eq!(g.num_patches(), 1);
        assert_eq!(g.unpatch(0, 3), s);
    }

    #[test]
    fn zero_patch_len() {
        assert!(patch(&[vec![1.0]], 0).is_err());
    }
}
