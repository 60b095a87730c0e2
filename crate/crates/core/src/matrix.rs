//! Dense symmetric matrix with packed lower-triangle storage.

use nalgebra::DMatrix;

/// Symmetric `n × n` matrix. Only the lower triangle (including the diagonal)
/// is stored, so `get(i, j)` and `get(j, i)` read the same slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    order: usize,
    values: Vec<f64>,
}

#[inline]
fn packed_index(i: usize, j: usize) -> usize {
    let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
    hi * (hi + 1) / 2 + lo
}

impl SymMatrix {
    pub fn zeros(order: usize) -> Self {
        SymMatrix {
            order,
            values: vec![0.0; order * (order + 1) / 2],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds the matrix from `f(i, j)` evaluated for `i >= j` only.
    pub fn from_lower_fn(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(order * (order + 1) / 2);
        for i in 0..order {
            for j in 0..=i {
                values.push(f(i, j));
            }
        }
        SymMatrix { order, values }
    }

    /// Takes the lower triangle of a square dense matrix.
    pub fn from_dense_lower(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "matrix must be square");
        Self::from_lower_fn(m.nrows(), |i, j| m[(i, j)])
    }

    /// Symmetrizes a square dense matrix as `(M + Mᵀ) / 2`.
    pub fn from_dense_symmetrized(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "matrix must be square");
        Self::from_lower_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    /// Builds from a row-major full matrix, checking exact symmetry.
    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        for i in 0..n {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return None;
                }
            }
        }
        Some(Self::from_lower_fn(n, |i, j| rows[i][j]))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.order && j < self.order);
        self.values[packed_index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i < self.order && j < self.order);
        self.values[packed_index(i, j)] = value;
    }

    /// Packed lower-triangle values in row order.
    pub fn packed(&self) -> &[f64] {
        &self.values
    }

    /// Applies `f` to every stored entry.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        SymMatrix {
            order: self.order,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Iterates `(i, j, value)` over the lower triangle, `i >= j`.
    pub fn iter_lower(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.order).flat_map(move |i| (0..=i).map(move |j| (i, j, self.get(i, j))))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.order, self.order, |i, j| self.get(i, j))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Number of nonzero entries in the full (both triangles) matrix.
    pub fn nnz(&self) -> usize {
        self.iter_lower()
            .filter(|&(_, _, v)| v != 0.0)
            .map(|(i, j, _)| if i == j { 1 } else { 2 })
            .sum()
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.order, other.order);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
