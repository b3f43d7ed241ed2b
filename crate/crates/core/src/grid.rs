//! Dense row-major 2-D grids.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// A dense rectangular grid addressed as `(row, col)`.
///
/// Rows index downward (`u`), columns rightward (`v`); this matches the
/// geometry used throughout the crate, where the tomographic symmetry axis is
/// vertical and runs between two columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy> Grid<T> {
    /// Grid filled with a constant value.
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        assert!(rows > 0 && cols > 0, "grid dimensions must be positive");
        Grid { rows, cols, data: vec![value; rows * cols] }
    }

    /// Wraps an existing row-major buffer; `data.len()` must be `rows*cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "buffer of length {} does not fill a {}x{} grid",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Grid { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, u: usize, v: usize) -> T {
        self.data[u * self.cols + v]
    }

    #[inline]
    pub fn set(&mut self, u: usize, v: usize, value: T) {
        self.data[u * self.cols + v] = value;
    }

    /// Row `u` as a contiguous slice.
    #[inline]
    pub fn row(&self, u: usize) -> &[T] {
        &self.data[u * self.cols..(u + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, u: usize) -> &mut [T] {
        &mut self.data[u * self.cols..(u + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Elementwise transformation preserving the shape.
    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Grid<U> {
        Grid { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    /// Elementwise combination of two grids of identical shape.
    pub fn zip_map<U: Copy, V: Copy>(&self, other: &Grid<U>, f: impl Fn(T, U) -> V) -> Result<Grid<V>> {
        if !self.same_shape(other) {
            return Err(Error::invalid(format!(
                "cannot combine {}x{} grid with {}x{} grid",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Grid {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Mirror image about the vertical axis between columns
    /// `cols/2 - 1` and `cols/2`.
    pub fn flip_horizontal(&self) -> Self {
        let mut out = self.clone();
        for u in 0..self.rows {
            out.row_mut(u).reverse();
        }
        out
    }

    pub fn same_shape<U>(&self, other: &Grid<U>) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    /// `(row, col, value)` iterator in row-major order.
    pub fn enumerate(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        let cols = self.cols;
        self.data.iter().enumerate().map(move |(k, &x)| (k / cols, k % cols, x))
    }
}

impl Grid<bool> {
    pub fn count_true(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

impl<T: Copy> Index<(usize, usize)> for Grid<T> {
    type Output = T;

    #[inline]
    fn index(&self, (u, v): (usize, usize)) -> &T {
        &self.data[u * self.cols + v]
    }
}

impl<T: Copy> IndexMut<(usize, usize)> for Grid<T> {
    #[inline]
    fn index_mut(&mut self, (u, v): (usize, usize)) -> &mut T {
        &mut self.data[u * self.cols + v]
    }
}
