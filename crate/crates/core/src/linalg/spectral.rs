use rand::Rng;

use super::{dot, norm2, SparseMatrix};
use crate::error::{Error, Result};
use crate::rng::{substream, Stream};

const START_SEED: u64 = 0x5EED_0FA0;
const STABLE_ITERATIONS: usize = 3;

/// Krylov dimension of the fallback phase.
const KRYLOV_DIM: usize = 24;

/// Magnitude of the largest-magnitude eigenvalue of a square sparse matrix.
///
/// Plain power iteration from a fixed pseudo-random start vector is tried
/// first, using `‖A v‖` as the estimate. If that has not settled within half
/// of `max_iter` (several dominant eigenvalues of equal or nearly equal
/// modulus, e.g. a complex conjugate pair), the remaining budget goes to
/// restarted Arnoldi: a Krylov basis of dimension up to 24 is built from the
/// power iterate, the Ritz values of the Hessenberg projection are computed
/// with shifted QR, and the power iterate advances by the basis length
/// between restarts. For `n <= 24` the Krylov space is the whole space and
/// the result is exact up to rounding.
///
/// Convergence means a relative change below `tol` for three consecutive
/// iterations (or restarts).
pub fn spectral_radius(m: &SparseMatrix, tol: f64, max_iter: usize) -> Result<f64> {
    if m.rows() != m.cols() {
        return Err(Error::Dimension(format!(
            "spectral_radius needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be > 0, got {tol}"
        )));
    }
    let n = m.rows();
    if n == 0 || m.nnz() == 0 {
        return Ok(0.0);
    }

    let mut rng = substream(START_SEED, Stream::PowerIteration, &[n as u64]);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let mut w = vec![0.0; n];
    let mut last = f64::NAN;
    let mut stable = 0;

    // phase 1: plain power iteration
    let phase1 = max_iter / 2;
    for _ in 0..phase1 {
        m.mul_vec_into(&v, &mut w);
        let c = norm2(&w);
        if c == 0.0 {
            return Ok(0.0);
        }
        if converged(last, c, tol) {
            stable += 1;
            if stable >= STABLE_ITERATIONS {
                return Ok(c);
            }
        } else {
            stable = 0;
        }
        last = c;
        v.iter_mut().zip(&w).for_each(|(x, y)| *x = y / c);
    }

    // phase 2: restarted Arnoldi from the power iterate
    let p = KRYLOV_DIM.min(n);
    let mut used = phase1;
    last = f64::NAN;
    stable = 0;
    loop {
        let estimate = arnoldi_radius(m, &v, p);
        used += p;
        if estimate == 0.0 {
            return Ok(0.0);
        }
        if converged(last, estimate, tol) || p == n {
            stable += 1;
            if stable >= STABLE_ITERATIONS || p == n {
                return Ok(estimate);
            }
        } else {
            stable = 0;
        }
        last = estimate;
        for _ in 0..p {
            m.mul_vec_into(&v, &mut w);
            let c = norm2(&w);
            if c == 0.0 {
                return Ok(0.0);
            }
            v.iter_mut().zip(&w).for_each(|(x, y)| *x = y / c);
        }
        used += p;
        if used >= max_iter {
            break;
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        last_estimate: last,
    })
}

fn converged(last: f64, current: f64, tol: f64) -> bool {
    last.is_finite() && (current - last).abs() <= tol * current.abs()
}

/// Largest Ritz modulus of `m` on the Krylov space of `start` of dimension
/// at most `p` (smaller on breakdown, where the space is invariant).
fn arnoldi_radius(m: &SparseMatrix, start: &[f64], p: usize) -> f64 {
    let n = start.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(p + 1);
    let ns = norm2(start);
    basis.push(start.iter().map(|x| x / ns).collect());
    // column-major (p+1) x p Hessenberg coefficients
    let mut h = vec![vec![0.0; p]; p + 1];
    let mut dim = p;
    let mut w = vec![0.0; n];
    for k in 0..p {
        m.mul_vec_into(&basis[k], &mut w);
        let scale = norm2(&w);
        // modified Gram-Schmidt, twice
        for _ in 0..2 {
            for (i, q) in basis.iter().enumerate() {
                let c = dot(q, &w);
                h[i][k] += c;
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let nw = norm2(&w);
        if nw <= 1e-12 * scale.max(f64::MIN_POSITIVE) || k + 1 == p {
            if k + 1 < p {
                dim = k + 1;
            }
            h[k + 1][k] = nw;
            break;
        }
        h[k + 1][k] = nw;
        basis.push(w.iter().map(|x| x / nw).collect());
    }
    let mut a = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            a[i * dim + j] = h[i][j];
        }
    }
    hessenberg_eigenvalues(&mut a, dim)
        .into_iter()
        .map(|(re, im)| re.hypot(im))
        .fold(0.0, f64::max)
}

/// Eigenvalues `(re, im)` of an upper Hessenberg matrix (row-major, `n×n`)
/// by the shifted double-step QR iteration. `a` is destroyed.
fn hessenberg_eigenvalues(a: &mut [f64], n: usize) -> Vec<(f64, f64)> {
    let at = |i: usize, j: usize| i * n + j;
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let anorm: f64 = (0..n)
        .flat_map(|i| (i.saturating_sub(1)..n).map(move |j| (i, j)))
        .map(|(i, j)| a[at(i, j)].abs())
        .sum();
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            // look for a single small subdiagonal element
            let mut l = nn;
            while l >= 1 {
                let (lu, lm) = (l as usize, l as usize - 1);
                let s = a[at(lm, lm)].abs() + a[at(lu, lu)].abs();
                let s = if s == 0.0 { anorm } else { s };
                if a[at(lu, lm)].abs() + s == s {
                    a[at(lu, lm)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let nu = nn as usize;
            let x = a[at(nu, nu)];
            if l == nn {
                out.push((x + t, 0.0));
                nn -= 1;
                break;
            }
            let y = a[at(nu - 1, nu - 1)];
            let w = a[at(nu, nu - 1)] * a[at(nu - 1, nu)];
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                let x = x + t;
                if q >= 0.0 {
                    let z = p + z.copysign(p);
                    let a1 = x + z;
                    let a2 = if z != 0.0 { x - w / z } else { a1 };
                    out.push((a1, 0.0));
                    out.push((a2, 0.0));
                } else {
                    out.push((x + p, z));
                    out.push((x + p, -z));
                }
                nn -= 2;
                break;
            }
            if its == 60 {
                // give up on this block; report its diagonal
                for i in l as usize..=nu {
                    out.push((a[at(i, i)] + t, 0.0));
                }
                nn = l - 1;
                break;
            }
            let (mut x, mut y, mut w) = (x, y, w);
            if its == 10 || its == 20 {
                // exceptional shift
                t += x;
                for i in 0..=nu {
                    a[at(i, i)] -= x;
                }
                let s = a[at(nu, nu - 1)].abs() + a[at(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            // look for two consecutive small subdiagonal elements
            let mut mm = nn - 2;
            let (mut p, mut q, mut r);
            loop {
                let mu = mm as usize;
                let z = a[at(mu, mu)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[at(mu + 1, mu)] + a[at(mu, mu + 1)];
                q = a[at(mu + 1, mu + 1)] - z - rr - ss;
                r = a[at(mu + 2, mu + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if mm == l {
                    break;
                }
                let u = a[at(mu, mu - 1)].abs() * (q.abs() + r.abs());
                let v =
                    p.abs() * (a[at(mu - 1, mu - 1)].abs() + z.abs() + a[at(mu + 1, mu + 1)].abs());
                if u + v == v {
                    break;
                }
                mm -= 1;
            }
            let mu = mm as usize;
            for i in mu + 2..=nu {
                a[at(i, i - 2)] = 0.0;
                if i != mu + 2 {
                    a[at(i, i - 3)] = 0.0;
                }
            }
            // double QR step on rows l..nn and columns mm..nn
            let mut k = mu;
            while k < nu {
                if k != mu {
                    p = a[at(k, k - 1)];
                    q = a[at(k + 1, k - 1)];
                    r = if k + 1 != nu {
                        a[at(k + 2, k - 1)]
                    } else {
                        0.0
                    };
                    let xs = p.abs() + q.abs() + r.abs();
                    if xs != 0.0 {
                        p /= xs;
                        q /= xs;
                        r /= xs;
                    }
                    x = xs;
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == mu {
                        if mm != l {
                            a[at(k, k - 1)] = -a[at(k, k - 1)];
                        }
                    } else {
                        a[at(k, k - 1)] = -s * x;
                    }
                    p += s;
                    let xx = p / s;
                    let yy = q / s;
                    let zz = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = a[at(k, j)] + q * a[at(k + 1, j)];
                        if k + 1 != nu {
                            pp += r * a[at(k + 2, j)];
                            a[at(k + 2, j)] -= pp * zz;
                        }
                        a[at(k + 1, j)] -= pp * yy;
                        a[at(k, j)] -= pp * xx;
                    }
                    let top = nu.min(k + 3);
                    for i in l as usize..=top {
                        let mut pp = xx * a[at(i, k)] + yy * a[at(i, k + 1)];
                        if k + 1 != nu {
                            pp += zz * a[at(i, k + 2)];
                            a[at(i, k + 2)] -= pp * r;
                        }
                        a[at(i, k + 1)] -= pp * q;
                        a[at(i, k)] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    out
}
