//! Solves `(2L + γI) X = B` for a graph Laplacian `L` and many shifts `γ`.
//!
//! `L` is split into the connected components of its off-diagonal pattern.
//! Each component is diagonalized once, so a solve for any `γ > 0` costs two
//! matrix products per component. Isolated nodes have a zero Laplacian row
//! and are solved by scaling.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct Block {
    nodes: Vec<usize>,
    vectors: DMatrix<f64>,
    vectors_t: DMatrix<f64>,
    values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ShiftedLaplacianSolver {
    n: usize,
    blocks: Vec<Block>,
    isolated: Vec<(usize, f64)>,
}

impl ShiftedLaplacianSolver {
    pub fn new(laplacian: &DMatrix<f64>) -> Result<Self> {
        let n = laplacian.nrows();
        if laplacian.ncols() != n {
            return Err(Error::Dimension(format!(
                "Laplacian is {}x{}",
                laplacian.nrows(),
                laplacian.ncols()
            )));
        }
        let mut blocks = Vec::new();
        let mut isolated = Vec::new();
        for nodes in components(laplacian) {
            if nodes.len() == 1 {
                let i = nodes[0];
                isolated.push((i, laplacian[(i, i)]));
                continue;
            }
            let sub = DMatrix::from_fn(nodes.len(), nodes.len(), |a, b| laplacian[(nodes[a], nodes[b])]);
            let eig = SymmetricEigen::new(sub);
            if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric("Laplacian eigendecomposition failed".into()));
            }
            blocks.push(Block {
                nodes,
                vectors_t: eig.eigenvectors.transpose(),
                vectors: eig.eigenvectors,
                values: eig.eigenvalues.iter().copied().collect(),
            });
        }
        Ok(ShiftedLaplacianSolver { n, blocks, isolated })
    }

    /// Solver for `L = 0`, i.e. `X = B / γ`.
    pub fn identity(n: usize) -> Self {
        ShiftedLaplacianSolver {
            n,
            blocks: Vec::new(),
            isolated: (0..n).map(|i| (i, 0.0)).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Sizes of the non-trivial components.
    pub fn component_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.nodes.len()).collect()
    }

    pub fn solve(&self, gamma: f64, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if rhs.nrows() != self.n {
            return Err(Error::Dimension(format!(
                "right-hand side has {} rows for order {}",
                rhs.nrows(),
                self.n
            )));
        }
        if !(gamma > 0.0) {
            return Err(Error::Config(format!("shift must be positive, got {gamma}")));
        }
        let cols = rhs.ncols();
        let mut out = DMatrix::zeros(self.n, cols);
        for &(i, l) in &self.isolated {
            let scale = 1.0 / (2.0 * l + gamma);
            for c in 0..cols {
                out[(i, c)] = rhs[(i, c)] * scale;
            }
        }
        for block in &self.blocks {
            let c = block.nodes.len();
            let gathered = DMatrix::from_fn(c, cols, |a, col| rhs[(block.nodes[a], col)]);
            let mut coeffs = &block.vectors_t * gathered;
            for (a, mut row) in coeffs.row_iter_mut().enumerate() {
                row /= 2.0 * block.values[a] + gamma;
            }
            let x = &block.vectors * coeffs;
            for (a, &node) in block.nodes.iter().enumerate() {
                for col in 0..cols {
                    out[(node, col)] = x[(a, col)];
                }
            }
        }
        Ok(out)
    }
}

/// Connected components of the off-diagonal nonzero pattern, each sorted.
fn components(m: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if !seen[j] && j != i && (m[(i, j)] != 0.0 || m[(j, i)] != 0.0) {
                    seen[j] = true;
                    comp.push(j);
                    stack.push(j);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian() -> DMatrix<f64> {
        // Path 0-1-2 plus an isolated node 3 and an edge 4-5.
        let mut l = DMatrix::zeros(6, 6);
        for &(a, b, w) in &[(0, 1, 1.0), (1, 2, 0.5), (4, 5, 2.0)] {
            l[(a, b)] -= w;
            l[(b, a)] -= w;
            l[(a, a)] += w;
            l[(b, b)] += w;
        }
        l
    }

    #[test]
    fn matches_dense_inverse() {
        let l = path_laplacian();
        let solver = ShiftedLaplacianSolver::new(&l).unwrap();
        assert_eq!(solver.component_sizes(), vec![3, 2]);
        let b = DMatrix::from_fn(6, 4, |i, j| (i as f64 - 2.0 * j as f64).sin());
        for &gamma in &[1e-3, 1.0, 1.1, 7.5, 1e6] {
            let x = solver.solve(gamma, &b).unwrap();
            let a = &l * 2.0 + DMatrix::identity(6, 6) * gamma;
            let expect = a.clone().try_inverse().unwrap() * &b;
            let scale = expect.amax().max(1.0);
            assert!((&x - &expect).amax() < 1e-10 * scale, "gamma {gamma}");
            assert!((a * x - &b).amax() < 1e-9);
        }
    }

    #[test]
    fn identity_solver_scales() {
        let s = ShiftedLaplacianSolver::identity(3);
        let b = DMatrix::from_element(3, 3, 2.0);
        assert_eq!(s.solve(4.0, &b).unwrap(), DMatrix::from_element(3, 3, 0.5));
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = ShiftedLaplacianSolver::identity(3);
        assert!(s.solve(0.0, &DMatrix::zeros(3, 1)).is_err());
        assert!(s.solve(1.0, &DMatrix::zeros(2, 1)).is_err());
        assert!(ShiftedLaplacianSolver::new(&DMatrix::zeros(2, 3)).is_err());
    }
}
