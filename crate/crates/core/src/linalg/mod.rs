//! Dense linear algebra over [`Real`](crate::numeric::Real) scalars.

mod eig;
mod svd;

pub use eig::eigenvalues;
pub use svd::{singular_values, svd, Svd};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::CMat;
use crate::numeric::{cabs, Real};

/// LU factorization with partial pivoting, stored compactly.
pub struct Lu<R> {
    lu: CMat<R>,
    perm: Vec<usize>,
}

impl<R: Real> Lu<R> {
    pub fn new(a: &CMat<R>) -> Result<Self> {
        let n = a.rows();
        if n != a.cols() {
            return Err(Error::Dimension(format!("LU of a {}x{} matrix", n, a.cols())));
        }
        if !a.is_finite() {
            return Err(Error::NonFinite);
        }
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, cabs(lu[(i, k)])))
                .fold((k, R::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == R::zero() {
                return Err(Error::Singular);
            }
            if piv != k {
                perm.swap(piv, k);
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = t;
                }
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    let t = f * lu[(k, j)];
                    lu[(i, j)] -= t;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &[Complex<R>]) -> Vec<Complex<R>> {
        let n = self.lu.rows();
        let mut x: Vec<Complex<R>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let t = self.lu[(i, j)] * x[j];
                x[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = self.lu[(i, j)] * x[j];
                x[i] -= t;
            }
            x[i] = x[i] / self.lu[(i, i)];
        }
        x
    }
}

pub fn solve<R: Real>(a: &CMat<R>, b: &[Complex<R>]) -> Result<Vec<Complex<R>>> {
    if b.len() != a.rows() {
        return Err(Error::Dimension(format!("rhs length {} for {} rows", b.len(), a.rows())));
    }
    Ok(Lu::new(a)?.solve(b))
}

pub fn inverse<R: Real>(a: &CMat<R>) -> Result<CMat<R>> {
    let lu = Lu::new(a)?;
    let n = a.rows();
    let zero = Complex::new(R::zero(), R::zero());
    let mut inv = CMat::zeros(n, n);
    for j in 0..n {
        let mut e = vec![zero; n];
        e[j] = Complex::new(R::one(), R::zero());
        for (i, v) in lu.solve(&e).into_iter().enumerate() {
            inv[(i, j)] = v;
        }
    }
    Ok(inv)
}

/// Moore-Penrose pseudoinverse; singular values at or below `rtol·σ_max` are dropped.
pub fn pinv<R: Real>(a: &CMat<R>, rtol: R) -> Result<CMat<R>> {
    let d = svd(a)?;
    let cut = d.sigma.first().copied().unwrap_or(R::zero()) * rtol;
    let k = d.sigma.len();
    let mut out = CMat::zeros(a.cols(), a.rows());
    for t in 0..k {
        let s = d.sigma[t];
        if s <= cut || s == R::zero() {
            continue;
        }
        for i in 0..a.cols() {
            let vi = d.v[(i, t)] / Complex::new(s, R::zero());
            for j in 0..a.rows() {
                out[(i, j)] += vi * d.u[(j, t)].conj();
            }
        }
    }
    Ok(out)
}

/// Least-squares solution of `A x ≈ b` for full column rank `A`.
pub struct LeastSquares<R> {
    pub x: Vec<Complex<R>>,
    /// Euclidean norm of `A x − b`.
    pub residual: R,
    pub sigma_min: R,
    pub sigma_max: R,
}

pub fn lstsq<R: Real>(a: &CMat<R>, b: &[Complex<R>]) -> Result<LeastSquares<R>> {
    if b.len() != a.rows() {
        return Err(Error::Dimension(format!("rhs length {} for {} rows", b.len(), a.rows())));
    }
    if a.rows() < a.cols() {
        return Err(Error::RankDeficientByShape {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let d = svd(a)?;
    let n = a.cols();
    let zero = Complex::new(R::zero(), R::zero());
    let smin = d.sigma[n - 1];
    if smin == R::zero() {
        return Err(Error::Singular);
    }
    let mut x = vec![zero; n];
    for t in 0..n {
        let proj = (0..a.rows()).fold(zero, |s, j| s + d.u[(j, t)].conj() * b[j]) / Complex::new(d.sigma[t], R::zero());
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += d.v[(i, t)] * proj;
        }
    }
    let r: Vec<Complex<R>> = a.matvec(&x).iter().zip(b).map(|(p, q)| *p - *q).collect();
    Ok(LeastSquares {
        residual: crate::numeric::vnorm(&r),
        x,
        sigma_min: smin,
        sigma_max: d.sigma[0],
    })
}
