//! Small dense symmetric solvers; enough for weighted normal equations and
//! covariance factorizations, nothing more.

use crate::num::Real;

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix
/// (row-major `dim x dim`). Returns `None` when a pivot is not positive.
pub fn cholesky<T: Real>(a: &[T], dim: usize) -> Option<Vec<T>> {
    assert_eq!(a.len(), dim * dim);
    let mut l = vec![T::zero(); dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = a[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if s <= T::zero() {
                    return None;
                }
                l[i * dim + i] = s.sqrt();
            } else {
                l[i * dim + j] = s / l[j * dim + j];
            }
        }
    }
    Some(l)
}

/// Solves `A x = b` for symmetric positive semi-definite `A` using Cholesky
/// with diagonal pivoting. A pivot below `rel_tol` times the largest initial
/// diagonal entry is treated as rank deficiency; the offending original
/// column index is returned as the error.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // negations catch NaN
pub fn solve_spd_pivoted<T: Real>(
    a: &[T],
    b: &[T],
    dim: usize,
    rel_tol: T,
) -> std::result::Result<Vec<T>, usize> {
    assert_eq!(a.len(), dim * dim);
    assert_eq!(b.len(), dim);
    let mut m = a.to_vec();
    let mut perm: Vec<usize> = (0..dim).collect();

    let mut max_diag = T::zero();
    for i in 0..dim {
        let d = m[i * dim + i];
        if d > max_diag {
            max_diag = d;
        }
    }
    let tol = rel_tol * max_diag;

    for k in 0..dim {
        let mut best = k;
        for j in k + 1..dim {
            if m[j * dim + j] > m[best * dim + best] {
                best = j;
            }
        }
        if best != k {
            swap_sym(&mut m, dim, k, best);
            perm.swap(k, best);
        }
        let pivot = m[k * dim + k];
        if !(pivot > tol) || !pivot.is_finite() {
            return Err(perm[k]);
        }
        let root = pivot.sqrt();
        m[k * dim + k] = root;
        for i in k + 1..dim {
            m[i * dim + k] /= root;
        }
        for i in k + 1..dim {
            let lik = m[i * dim + k];
            for j in k + 1..=i {
                let v = m[i * dim + j] - lik * m[j * dim + k];
                m[i * dim + j] = v;
            }
        }
    }

    // P A P^T = L L^T; solve L y = P b, L^T z = y, x = P^T z.
    let mut y = vec![T::zero(); dim];
    for i in 0..dim {
        let mut s = b[perm[i]];
        for k in 0..i {
            s -= m[i * dim + k] * y[k];
        }
        y[i] = s / m[i * dim + i];
    }
    let mut z = vec![T::zero(); dim];
    for i in (0..dim).rev() {
        let mut s = y[i];
        for k in i + 1..dim {
            s -= m[k * dim + i] * z[k];
        }
        z[i] = s / m[i * dim + i];
    }
    let mut x = vec![T::zero(); dim];
    for i in 0..dim {
        x[perm[i]] = z[i];
    }
    Ok(x)
}

/// Symmetric swap of indices `i < j` using only lower-triangle storage;
/// the upper triangle is stale once elimination has started.
fn swap_sym<T: Real>(m: &mut [T], dim: usize, i: usize, j: usize) {
    debug_assert!(i < j);
    for c in 0..i {
        m.swap(i * dim + c, j * dim + c);
    }
    m.swap(i * dim + i, j * dim + j);
    for t in i + 1..j {
        m.swap(t * dim + i, j * dim + t);
    }
    for r in j + 1..dim {
        m.swap(r * dim + i, r * dim + j);
    }
}

/// `y = A x` for a row-major `rows x cols` matrix.
pub fn mat_vec<T: Real>(a: &[T], rows: usize, cols: usize, x: &[T]) -> Vec<T> {
    assert_eq!(a.len(), rows * cols);
    assert_eq!(x.len(), cols);
    let mut y = vec![T::zero(); rows];
    for r in 0..rows {
        let row = &a[r * cols..(r + 1) * cols];
        let mut s = T::zero();
        for c in 0..cols {
            s += row[c] * x[c];
        }
        y[r] = s;
    }
    y
}
