//! One-sided Hestenes-Jacobi SVD.
//!
//! Column pairs are rotated until mutually orthogonal; singular values are
//! the resulting column norms. The method attains high relative accuracy on
//! the tiny singular values that matter here and is generic over the scalar.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::CMat;
use crate::numeric::{cabs, cabs2, cscale, Real};

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U·diag(sigma)·V*` with `k = min(rows, cols)` singular triplets.
#[derive(Clone, Debug)]
pub struct Svd<R> {
    pub u: CMat<R>,
    pub sigma: Vec<R>,
    pub v: CMat<R>,
}

pub fn svd<R: Real>(a: &CMat<R>) -> Result<Svd<R>> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    if a.rows() >= a.cols() {
        jacobi_tall(a)
    } else {
        let t = jacobi_tall(&a.adjoint())?;
        Ok(Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        })
    }
}

/// Singular values only, descending.
pub fn singular_values<R: Real>(a: &CMat<R>) -> Result<Vec<R>> {
    svd(a).map(|d| d.sigma)
}

fn jacobi_tall<R: Real>(a: &CMat<R>) -> Result<Svd<R>> {
    let (m, n) = a.shape();
    let zero = Complex::new(R::zero(), R::zero());
    // Column-major working copies.
    let mut cols: Vec<Vec<Complex<R>>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<Complex<R>>> = (0..n)
        .map(|j| {
            let mut e = vec![zero; n];
            e[j] = Complex::new(R::one(), R::zero());
            e
        })
        .collect();

    let tol = R::epsilon() * R::from_usize(m).sqrt();
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = cols[p].iter().fold(R::zero(), |s, z| s + cabs2(*z));
                let beta = cols[q].iter().fold(R::zero(), |s, z| s + cabs2(*z));
                let gamma = cols[p]
                    .iter()
                    .zip(&cols[q])
                    .fold(zero, |s, (x, y)| s + x.conj() * *y);
                let g = cabs(gamma);
                if g == R::zero() || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Phase e^{-iφ} turns the inner product real and positive.
                let phase = Complex::new(gamma.re / g, -gamma.im / g);
                let zeta = (beta - alpha) / (R::from_f64(2.0) * g);
                let t = {
                    let mag = R::one() / (zeta.abs() + (R::one() + zeta * zeta).sqrt());
                    if zeta < R::zero() {
                        -mag
                    } else {
                        mag
                    }
                };
                let c = R::one() / (R::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s, phase);
                rotate(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence);
    }

    let mut sigma: Vec<R> = cols
        .iter()
        .map(|c| c.iter().fold(R::zero(), |s, z| s + cabs2(*z)).sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap_or(std::cmp::Ordering::Equal));

    let smax = sigma[order[0]];
    let floor = smax * R::epsilon() * R::from_usize(m.max(n));
    let mut u_cols: Vec<Vec<Complex<R>>> = Vec::with_capacity(n);
    let mut pending = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        let sj = sigma[j];
        if sj > floor && sj > R::zero() {
            u_cols.push(cols[j].iter().map(|z| cscale(*z, R::one() / sj)).collect());
        } else {
            u_cols.push(vec![zero; m]);
            pending.push(slot);
        }
    }
    for slot in pending {
        u_cols[slot] = complete_basis(&u_cols, slot, m);
    }
    let sorted_sigma: Vec<R> = order.iter().map(|&j| sigma[j]).collect();
    sigma = sorted_sigma;

    let u = CMat::from_fn(m, n, |i, k| u_cols[k][i]);
    let vm = CMat::from_fn(n, n, |i, k| v[order[k]][i]);
    Ok(Svd { u, sigma, v: vm })
}

#[inline]
fn rotate<R: Real>(cols: &mut [Vec<Complex<R>>], p: usize, q: usize, c: R, s: R, phase: Complex<R>) {
    let (lo, hi) = cols.split_at_mut(q);
    let cp = &mut lo[p];
    let cq = &mut hi[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yt = *y * phase;
        let nx = cscale(*x, c) - cscale(yt, s);
        let ny = cscale(*x, s) + cscale(yt, c);
        *x = nx;
        *y = ny;
    }
}

/// Unit vector orthogonal to every nonzero column in `basis` except `slot`.
fn complete_basis<R: Real>(basis: &[Vec<Complex<R>>], slot: usize, m: usize) -> Vec<Complex<R>> {
    let zero = Complex::new(R::zero(), R::zero());
    let mut best = vec![zero; m];
    let mut best_norm = R::zero();
    for e in 0..m {
        let mut w = vec![zero; m];
        w[e] = Complex::new(R::one(), R::zero());
        // Two passes of classical Gram-Schmidt.
        for _ in 0..2 {
            for (k, b) in basis.iter().enumerate() {
                if k == slot {
                    continue;
                }
                let proj = b.iter().zip(&w).fold(zero, |s, (x, y)| s + x.conj() * *y);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= proj * *bi;
                }
            }
        }
        let nrm = w.iter().fold(R::zero(), |s, z| s + cabs2(*z)).sqrt();
        if nrm > best_norm {
            best_norm = nrm;
            best = w;
        }
        if best_norm > R::from_f64(0.5) {
            break;
        }
    }
    best.iter().map(|z| cscale(*z, R::one() / best_norm)).collect()
}
