//! Multi-index product grids with optional cyclic axes.

use crate::kinematics::chart::GridAxis;

/// Shape and wrap-around flags of a product grid, with row-major linear
/// indexing (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridShape {
    pub dims: Vec<usize>,
    pub cyclic: Vec<bool>,
}

impl GridShape {
    pub fn from_axes(axes: &[GridAxis]) -> Self {
        Self { dims: axes.iter().map(|a| a.values.len()).collect(), cyclic: axes.iter().map(|a| a.cyclic).collect() }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn unravel(&self, mut lin: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            idx[k] = lin % self.dims[k];
            lin /= self.dims[k];
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| acc * d + i)
    }

    /// Index shifted by `delta` along axis `k`, wrapping on cyclic axes.
    pub fn shift(&self, idx: &[usize], k: usize, delta: isize) -> Option<Vec<usize>> {
        let d = self.dims[k] as isize;
        let mut v = idx[k] as isize + delta;
        if self.cyclic[k] {
            if delta.unsigned_abs() >= self.dims[k] {
                return None;
            }
            v = v.rem_euclid(d);
        } else if v < 0 || v >= d {
            return None;
        }
        let mut out = idx.to_vec();
        out[k] = v as usize;
        Some(out)
    }

    /// Linear indices of the forward neighbours (+1 along each axis), so
    /// each adjacent pair is visited once.
    pub fn forward_neighbors(&self, lin: usize) -> Vec<usize> {
        let idx = self.unravel(lin);
        (0..self.dims.len())
            .filter(|&k| self.dims[k] > 1 && !(self.cyclic[k] && self.dims[k] == 2 && idx[k] == 1))
            .filter_map(|k| self.shift(&idx, k, 1).map(|j| self.ravel(&j)))
            .collect()
    }

    /// All indices whose per-axis offset from `idx` is at most `radius[k]`.
    pub fn box_around(&self, idx: &[usize], radius: &[usize]) -> Vec<usize> {
        let mut ranges: Vec<Vec<usize>> = Vec::with_capacity(self.dims.len());
        for k in 0..self.dims.len() {
            let d = self.dims[k];
            let r = radius[k];
            let vals: Vec<usize> = if self.cyclic[k] {
                if 2 * r + 1 >= d {
                    (0..d).collect()
                } else {
                    (-(r as isize)..=r as isize).map(|o| (idx[k] as isize + o).rem_euclid(d as isize) as usize).collect()
                }
            } else {
                let lo = idx[k].saturating_sub(r);
                let hi = (idx[k] + r).min(d - 1);
                (lo..=hi).collect()
            };
            ranges.push(vals);
        }
        let mut out = vec![0usize];
        for (k, vals) in ranges.iter().enumerate() {
            let d = self.dims[k];
            out = out.iter().flat_map(|&base| vals.iter().map(move |&v| base * d + v)).collect();
        }
        out
    }
}

/// Cartesian product of the axis values, row-major.
pub fn product_values(axes: &[GridAxis]) -> Vec<Vec<f64>> {
    let shape = GridShape::from_axes(axes);
    (0..shape.len())
        .map(|lin| shape.unravel(lin).iter().enumerate().map(|(k, &i)| axes[k].values[i]).collect())
        .collect()
}
