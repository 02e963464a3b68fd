use super::DenseMatrix;
use crate::error::{Error, Result};

/// LU pivots at or below this times the largest matrix entry are treated as
/// singular. Set at machine epsilon: readouts regularized with strengths
/// around 1e-16 legitimately produce pivots near 1e-14 of the largest entry.
pub const PIVOT_RELATIVE_THRESHOLD: f64 = f64::EPSILON;

/// Solve `A X = B` by LU with partial pivoting. `A` is consumed.
pub fn lu_solve(mut a: DenseMatrix, mut b: DenseMatrix) -> Result<DenseMatrix> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Dimension(format!(
            "lu_solve: {}x{} not square",
            n,
            a.cols()
        )));
    }
    if b.rows() != n {
        return Err(Error::Dimension(format!(
            "lu_solve: rhs has {} rows, expected {n}",
            b.rows()
        )));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::NonFinite("lu_solve operands".into()));
    }
    let threshold = PIVOT_RELATIVE_THRESHOLD * a.max_abs();
    let nrhs = b.cols();
    let ad = a.as_mut_slice();
    let bd = b.as_mut_slice();

    for k in 0..n {
        let (p, pivot_abs) =
            (k..n)
                .map(|i| (i, ad[i * n + k].abs()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if pivot_abs <= threshold || pivot_abs == 0.0 {
            return Err(Error::Singular {
                column: k,
                pivot: pivot_abs,
                threshold,
            });
        }
        if p != k {
            for j in 0..n {
                ad.swap(k * n + j, p * n + j);
            }
            for j in 0..nrhs {
                bd.swap(k * nrhs + j, p * nrhs + j);
            }
        }
        let pivot = ad[k * n + k];
        let (upper, lower) = ad.split_at_mut((k + 1) * n);
        let pivot_row = &upper[k * n + k + 1..k * n + n];
        let (b_upper, b_lower) = bd.split_at_mut((k + 1) * nrhs);
        let b_pivot = &b_upper[k * nrhs..(k + 1) * nrhs];
        for (row, b_row) in lower
            .chunks_exact_mut(n)
            .zip(b_lower.chunks_exact_mut(nrhs))
        {
            let l = row[k] / pivot;
            if l == 0.0 {
                continue;
            }
            row[k] = l;
            for (x, y) in row[k + 1..].iter_mut().zip(pivot_row) {
                *x -= l * y;
            }
            for (x, y) in b_row.iter_mut().zip(b_pivot) {
                *x -= l * y;
            }
        }
    }

    // back substitution, row by row on the rhs block
    let mut x = vec![0.0; n * nrhs];
    for i in (0..n).rev() {
        let mut acc: Vec<f64> = bd[i * nrhs..(i + 1) * nrhs].to_vec();
        for j in (i + 1)..n {
            let u = ad[i * n + j];
            if u != 0.0 {
                let xj = &x[j * nrhs..(j + 1) * nrhs];
                for (a, xv) in acc.iter_mut().zip(xj) {
                    *a -= u * xv;
                }
            }
        }
        let d = ad[i * n + i];
        for (dst, a) in x[i * nrhs..(i + 1) * nrhs].iter_mut().zip(acc) {
            *dst = a / d;
        }
    }
    DenseMatrix::from_vec(n, nrhs, x)
}

/// Return `W` with `W · gram = rhs` for symmetric `gram`.
///
/// `gram` is symmetrized as `(G + Gᵀ)/2` before factorization, so the system
/// solved is `sym(G) · Wᵀ = rhsᵀ`.
pub fn solve_normal_equations(gram: &DenseMatrix, rhs: &DenseMatrix) -> Result<DenseMatrix> {
    if gram.rows() != gram.cols() {
        return Err(Error::Dimension("gram matrix must be square".into()));
    }
    if rhs.cols() != gram.rows() {
        return Err(Error::Dimension(format!(
            "rhs has {} columns, gram is {}x{}",
            rhs.cols(),
            gram.rows(),
            gram.cols()
        )));
    }
    let mut g = gram.clone();
    g.symmetrize();
    Ok(lu_solve(g, rhs.transpose())?.transpose())
}
