//! Dense mixed-radix indexing over the defect-count grid
//! `{0..N_1} × … × {0..N_m}`.
//!
//! The first axis is the slowest, so ascending flat indices enumerate states
//! in lexicographic order of `(x_1, …, x_m)` — scans and witness searches
//! rely on this.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::ModelSpec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateGrid {
    /// `dims[i] = N_i + 1`.
    dims: Vec<u32>,
    /// Flat-index stride per axis; last axis has stride 1.
    strides: Vec<usize>,
    len: usize,
}

impl StateGrid {
    pub fn new(initial_defects: &[u32]) -> Result<Self> {
        if initial_defects.is_empty() {
            return Err(Error::validation("N", "at least one module is required"));
        }
        let dims: Vec<u32> = initial_defects.iter().map(|&n| n + 1).collect();
        let mut len: usize = 1;
        for &d in &dims {
            len = len
                .checked_mul(d as usize)
                .ok_or(Error::Capacity {
                    required: u128::MAX,
                    limit: usize::MAX as u128,
                })?;
        }
        let mut strides = alloc::vec![0usize; dims.len()];
        let mut acc = 1usize;
        for (axis, &d) in dims.iter().enumerate().rev() {
            strides[axis] = acc;
            acc *= d as usize;
        }
        Ok(Self { dims, strides, len })
    }

    pub fn from_model(model: &ModelSpec) -> Result<Self> {
        Self::new(&model.initial_defects)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of axes (modules).
    pub fn axes(&self) -> usize {
        self.dims.len()
    }

    /// Axis sizes `N_i + 1`.
    pub fn dims(&self) -> &[u32] {
        &self.dims
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    /// Flat index of a state.
    pub fn index_of(&self, state: &[u32]) -> usize {
        debug_assert_eq!(state.len(), self.dims.len());
        state
            .iter()
            .zip(&self.strides)
            .map(|(&x, &s)| x as usize * s)
            .sum()
    }

    /// Coordinate of `index` along `axis`.
    pub fn coordinate(&self, index: usize, axis: usize) -> u32 {
        ((index / self.strides[axis]) % self.dims[axis] as usize) as u32
    }

    /// Decode a flat index into a state vector.
    pub fn state_of(&self, index: usize) -> Vec<u32> {
        let mut out = alloc::vec![0u32; self.dims.len()];
        self.decode_into(index, &mut out);
        out
    }

    pub fn decode_into(&self, index: usize, out: &mut [u32]) {
        for (axis, slot) in out.iter_mut().enumerate() {
            *slot = self.coordinate(index, axis);
        }
    }

    /// Iterate `(flat_index, state)` in lexicographic state order.
    pub fn states(&self) -> impl Iterator<Item = (usize, Vec<u32>)> + '_ {
        (0..self.len).map(move |idx| (idx, self.state_of(idx)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_lex_order() {
        let grid = StateGrid::new(&[1, 2]).unwrap();
        assert_eq!(grid.len(), 6);
        let states: Vec<Vec<u32>> = grid.states().map(|(_, s)| s).collect();
        let expect = [[0, 0], [0, 1], [0, 2], [1, 0], [1, 1], [1, 2]];
        for (got, want) in states.iter().zip(&expect) {
            assert_eq!(got.as_slice(), want.as_slice());
        }
        for (idx, s) in grid.states() {
            assert_eq!(grid.index_of(&s), idx);
            assert_eq!(grid.coordinate(idx, 0), s[0]);
            assert_eq!(grid.coordinate(idx, 1), s[1]);
        }
    }

    #[test]
    fn single_axis() {
        let grid = StateGrid::new(&[4]).unwrap();
        assert_eq!(grid.len(), 5);
        assert_eq!(grid.index_of(&[3]), 3);
    }
}
