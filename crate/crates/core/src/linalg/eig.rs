//! Eigenvalues of a general complex matrix: Householder reduction to upper
//! Hessenberg form followed by Wilkinson-shifted QR sweeps with deflation.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::CMat;
use crate::numeric::{cabs, cabs2, cscale, csqrt, Real};

pub fn eigenvalues<R: Real>(a: &CMat<R>) -> Result<Vec<Complex<R>>> {
    let n = a.rows();
    if n != a.cols() {
        return Err(Error::Dimension(format!("eigenvalues of a {}x{} matrix", n, a.cols())));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut h = a.clone();
    hessenberg(&mut h);
    shifted_qr(&mut h)
}

fn hessenberg<R: Real>(h: &mut CMat<R>) {
    let n = h.rows();
    let zero = Complex::new(R::zero(), R::zero());
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<Complex<R>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = v.iter().fold(R::zero(), |s, z| s + cabs2(*z)).sqrt();
        if xnorm == R::zero() {
            continue;
        }
        let x0 = v[0];
        let ax0 = cabs(x0);
        let unit = if ax0 == R::zero() {
            Complex::new(R::one(), R::zero())
        } else {
            cscale(x0, R::one() / ax0)
        };
        // v = x + e^{i arg x0}·‖x‖·e1 avoids cancellation.
        v[0] = x0 + cscale(unit, xnorm);
        let vnorm = v.iter().fold(R::zero(), |s, z| s + cabs2(*z)).sqrt();
        for z in v.iter_mut() {
            *z = cscale(*z, R::one() / vnorm);
        }
        let two = R::from_f64(2.0);
        // H <- (I - 2vv*) H
        for j in 0..n {
            let dot = v
                .iter()
                .enumerate()
                .fold(zero, |s, (t, vi)| s + vi.conj() * h[(k + 1 + t, j)]);
            for (t, vi) in v.iter().enumerate() {
                let upd = cscale(*vi * dot, two);
                h[(k + 1 + t, j)] -= upd;
            }
        }
        // H <- H (I - 2vv*)
        for i in 0..n {
            let dot = v
                .iter()
                .enumerate()
                .fold(zero, |s, (t, vi)| s + h[(i, k + 1 + t)] * *vi);
            for (t, vi) in v.iter().enumerate() {
                let upd = cscale(dot * vi.conj(), two);
                h[(i, k + 1 + t)] -= upd;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = zero;
        }
    }
}

fn givens<R: Real>(x: Complex<R>, y: Complex<R>) -> (R, Complex<R>) {
    let ax = cabs(x);
    let nrm = (cabs2(x) + cabs2(y)).sqrt();
    if nrm == R::zero() {
        return (R::one(), Complex::new(R::zero(), R::zero()));
    }
    if ax == R::zero() {
        return (R::zero(), Complex::new(R::one(), R::zero()));
    }
    let c = ax / nrm;
    let s = cscale(x, R::one() / ax) * y.conj();
    (c, cscale(s, R::one() / nrm))
}

fn shifted_qr<R: Real>(h: &mut CMat<R>) -> Result<Vec<Complex<R>>> {
    let n = h.rows();
    let zero = Complex::new(R::zero(), R::zero());
    let mut out = vec![zero; n];
    if n == 0 {
        return Ok(out);
    }
    let eps = R::epsilon();
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let limit = 60 * n.max(1);
    while hi > 0 {
        // Deflation scan.
        let mut lo = hi;
        while lo > 0 {
            let sub = cabs(h[(lo, lo - 1)]);
            let diag = cabs(h[(lo - 1, lo - 1)]) + cabs(h[(lo, lo)]);
            if sub <= eps * diag || sub == R::zero() {
                h[(lo, lo - 1)] = zero;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            out[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > limit {
            return Err(Error::NoConvergence);
        }
        let mu = if iter % 11 == 0 {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + Complex::new(cabs(h[(hi, hi - 1)]) * R::from_f64(0.75), R::zero())
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        for k in lo..=hi {
            h[(k, k)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let p = h[(k, j)];
                let q = h[(k + 1, j)];
                h[(k, j)] = cscale(p, c) + s * q;
                h[(k + 1, j)] = -(s.conj() * p) + cscale(q, c);
            }
            rots.push((c, s));
        }
        for (t, (c, s)) in rots.into_iter().enumerate() {
            let k = lo + t;
            let top = (k + 2).min(hi);
            for i in lo..=top {
                let p = h[(i, k)];
                let q = h[(i, k + 1)];
                h[(i, k)] = cscale(p, c) + q * s.conj();
                h[(i, k + 1)] = -(p * s) + cscale(q, c);
            }
        }
        for k in lo..=hi {
            h[(k, k)] += mu;
        }
    }
    out[0] = h[(0, 0)];
    Ok(out)
}

/// Eigenvalue of [[a, b], [c, d]] closer to d.
fn wilkinson<R: Real>(a: Complex<R>, b: Complex<R>, c: Complex<R>, d: Complex<R>) -> Complex<R> {
    let half = R::from_f64(0.5);
    let m = cscale(a + d, half);
    let diff = cscale(a - d, half);
    let disc = csqrt(diff * diff + b * c);
    let l1 = m + disc;
    let l2 = m - disc;
    if cabs(l1 - d) <= cabs(l2 - d) {
        l1
    } else {
        l2
    }
}
