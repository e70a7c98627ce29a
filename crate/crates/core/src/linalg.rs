//! Periodic (cyclic) block-tridiagonal systems.
//!
//! Row `i` reads `L_i x_{i-1} + D_i x_i + U_i x_{i+1} = b_i` with indices
//! taken mod `m`. Node `0` is eliminated by bordering: the remaining block
//! tridiagonal system is solved by block Thomas for the right-hand side and
//! the `n` coupling columns, then a dense `n x n` system fixes `x_0`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense `n x n` LU with partial pivoting, row-major.
#[derive(Debug, Clone)]
struct DenseLu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> DenseLu<T> {
    /// Pivots below `scale * 64 eps` count as singular; `scale` should be the
    /// magnitude of the matrix the block was derived from.
    fn factor(mut a: Vec<T>, n: usize, scale: T) -> Option<Self> {
        let mut perm: Vec<usize> = (0..n).collect();
        let tiny = scale * T::epsilon() * T::lit(64.0);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].abs().partial_cmp(&a[j * n + col].abs()).unwrap_or(std::cmp::Ordering::Equal))
                .expect("non-empty range");
            let pv = a[pivot * n + col];
            if !(pv.abs() > tiny) || !pv.is_finite() {
                return None;
            }
            if pivot != col {
                for c in 0..n {
                    a.swap(pivot * n + c, col * n + c);
                }
                perm.swap(pivot, col);
            }
            for row in col + 1..n {
                let factor = a[row * n + col] / a[col * n + col];
                a[row * n + col] = factor;
                for c in col + 1..n {
                    let v = a[col * n + c];
                    a[row * n + c] -= factor * v;
                }
            }
        }
        Some(Self { n, lu: a, perm })
    }

    /// Solves in place for `cols` right-hand sides stored row-major `n x cols`.
    fn solve_cols(&self, b: &mut [T], cols: usize) {
        let n = self.n;
        let src = b.to_vec();
        for r in 0..n {
            b[r * cols..(r + 1) * cols].copy_from_slice(&src[self.perm[r] * cols..(self.perm[r] + 1) * cols]);
        }
        for r in 0..n {
            for k in 0..r {
                let l = self.lu[r * n + k];
                for c in 0..cols {
                    let v = b[k * cols + c];
                    b[r * cols + c] -= l * v;
                }
            }
        }
        for r in (0..n).rev() {
            for k in r + 1..n {
                let u = self.lu[r * n + k];
                for c in 0..cols {
                    let v = b[k * cols + c];
                    b[r * cols + c] -= u * v;
                }
            }
            let d = self.lu[r * n + r];
            for c in 0..cols {
                b[r * cols + c] /= d;
            }
        }
    }
}

/// `out (n x cols) = A (n x n) * B (n x cols)`.
fn matmul<T: Scalar>(a: &[T], b: &[T], n: usize, cols: usize, out: &mut [T]) {
    for r in 0..n {
        for c in 0..cols {
            let mut s = T::zero();
            for k in 0..n {
                s += a[r * n + k] * b[k * cols + c];
            }
            out[r * cols + c] = s;
        }
    }
}

#[derive(Debug, Clone)]
pub struct CyclicBlockTridiagonal<T> {
    block: usize,
    blocks: usize,
    lower: Vec<T>,
    diag: Vec<T>,
    upper: Vec<T>,
}

impl<T: Scalar> CyclicBlockTridiagonal<T> {
    /// Blocks are row-major `n x n`, stored consecutively per row index.
    pub fn new(block: usize, lower: Vec<T>, diag: Vec<T>, upper: Vec<T>) -> Self {
        let nn = block * block;
        assert!(block > 0 && diag.len() % nn == 0, "block layout");
        assert_eq!(lower.len(), diag.len());
        assert_eq!(upper.len(), diag.len());
        let blocks = diag.len() / nn;
        assert!(blocks >= 3, "cyclic solver needs at least three block rows");
        Self {
            block,
            blocks,
            lower,
            diag,
            upper,
        }
    }

    fn row_scale(&self, i: usize) -> T {
        let nn = self.block * self.block;
        [&self.lower, &self.diag, &self.upper]
            .iter()
            .flat_map(|v| v[i * nn..(i + 1) * nn].iter())
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }

    #[cfg(test)]
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let (n, m) = (self.block, self.blocks);
        let nn = n * n;
        let mut out = vec![T::zero(); n * m];
        for i in 0..m {
            let prev = (i + m - 1) % m;
            let next = (i + 1) % m;
            for r in 0..n {
                let mut s = T::zero();
                for c in 0..n {
                    s += self.lower[i * nn + r * n + c] * x[prev * n + c]
                        + self.diag[i * nn + r * n + c] * x[i * n + c]
                        + self.upper[i * nn + r * n + c] * x[next * n + c];
                }
                out[i * n + r] = s;
            }
        }
        out
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        let (n, m) = (self.block, self.blocks);
        assert_eq!(rhs.len(), n * m);
        let nn = n * n;
        let cols = n + 1;
        let blk = |v: &[T], i: usize| v[i * nn..(i + 1) * nn].to_vec();

        // Rows 1..m-1, each with cols = [b | coupling to x_0].
        let mut rhs_cols = vec![T::zero(); (m - 1) * n * cols];
        for i in 1..m {
            let base = (i - 1) * n * cols;
            for r in 0..n {
                rhs_cols[base + r * cols] = rhs[i * n + r];
            }
        }
        // T Z = -E, E_1 = L_1, E_{m-1} = U_{m-1}.
        for (i, src) in [(1, &self.lower), (m - 1, &self.upper)] {
            let base = (i - 1) * n * cols;
            for r in 0..n {
                for c in 0..n {
                    rhs_cols[base + r * cols + 1 + c] -= src[i * nn + r * n + c];
                }
            }
        }

        // Forward sweep: S_i = D_i - L_i C_{i-1}, C_i = S_i^{-1} U_i, R_i = S_i^{-1}(R_i - L_i R_{i-1}).
        let mut c_mats = vec![T::zero(); (m - 1) * nn];
        let mut tmp_nn = vec![T::zero(); nn];
        let mut tmp_cols = vec![T::zero(); n * cols];
        for i in 1..m {
            let row = i - 1;
            let mut s = blk(&self.diag, i);
            if row > 0 {
                let l = blk(&self.lower, i);
                matmul(&l, &c_mats[(row - 1) * nn..row * nn], n, n, &mut tmp_nn);
                s.iter_mut().zip(&tmp_nn).for_each(|(a, b)| *a -= *b);
                matmul(&l, &rhs_cols[(row - 1) * n * cols..row * n * cols], n, cols, &mut tmp_cols);
                rhs_cols[row * n * cols..(row + 1) * n * cols]
                    .iter_mut()
                    .zip(&tmp_cols)
                    .for_each(|(a, b)| *a -= *b);
            }
            let lu = DenseLu::factor(s, n, self.row_scale(i)).ok_or(Error::Singular { block: i })?;
            lu.solve_cols(&mut rhs_cols[row * n * cols..(row + 1) * n * cols], cols);
            if i < m - 1 {
                let mut u = blk(&self.upper, i);
                lu.solve_cols(&mut u, n);
                c_mats[row * nn..(row + 1) * nn].copy_from_slice(&u);
            }
        }
        // Back substitution: X_i = R_i - C_i X_{i+1}.
        for row in (0..m - 2).rev() {
            let (head, tail) = rhs_cols.split_at_mut((row + 1) * n * cols);
            matmul(&c_mats[row * nn..(row + 1) * nn], &tail[..n * cols], n, cols, &mut tmp_cols);
            head[row * n * cols..]
                .iter_mut()
                .zip(&tmp_cols)
                .for_each(|(a, b)| *a -= *b);
        }

        // (D_0 + U_0 Z_1 + L_0 Z_{m-1}) x_0 = b_0 - U_0 Y_1 - L_0 Y_{m-1}.
        let mut schur = blk(&self.diag, 0);
        let mut rhs0: Vec<T> = rhs[..n].to_vec();
        for (coef, row) in [(blk(&self.upper, 0), 0usize), (blk(&self.lower, 0), m - 2)] {
            let block = &rhs_cols[row * n * cols..(row + 1) * n * cols];
            for r in 0..n {
                for k in 0..n {
                    let a = coef[r * n + k];
                    rhs0[r] -= a * block[k * cols];
                    for c in 0..n {
                        schur[r * n + c] += a * block[k * cols + 1 + c];
                    }
                }
            }
        }
        let lu = DenseLu::factor(schur, n, self.row_scale(0)).ok_or(Error::Singular { block: 0 })?;
        lu.solve_cols(&mut rhs0, 1);

        let mut x = vec![T::zero(); n * m];
        x[..n].copy_from_slice(&rhs0);
        for i in 1..m {
            let block = &rhs_cols[(i - 1) * n * cols..i * n * cols];
            for r in 0..n {
                let mut v = block[r * cols];
                for c in 0..n {
                    v += block[r * cols + 1 + c] * rhs0[c];
                }
                x[i * n + r] = v;
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular { block: 0 });
        }
        Ok(x)
    }
}
