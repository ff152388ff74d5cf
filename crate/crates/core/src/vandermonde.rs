//! Confluent Vandermonde family and the spectral primitives built on it.
//!
//! Constructors are generic over the scalar so that the same code produces
//! double precision matrices for quick checks and double-double matrices when
//! the smallest singular value falls below the f64 noise floor.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::CMat;
use crate::model::NodeVector;
use crate::numeric::{cabs, carg, cis, cscale, Real};

pub use crate::linalg::{svd, Svd};

fn c<R: Real>(re: R) -> Complex<R> {
    Complex::new(re, R::zero())
}

/// Nodes on the unit circle, checked to be unimodular and pairwise distinct.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitNodes<R = f64> {
    z: Vec<Complex<R>>,
}

impl<R: Real> UnitNodes<R> {
    pub fn new(z: Vec<Complex<R>>) -> Result<Self> {
        let tol = R::from_f64(1e-12);
        for (j, zj) in z.iter().enumerate() {
            if (cabs(*zj) - R::one()).abs() > tol {
                return Err(Error::InvalidNodes(format!("node {j} has modulus {:?}", cabs(*zj))));
            }
        }
        for i in 0..z.len() {
            for j in i + 1..z.len() {
                if z[i] == z[j] {
                    return Err(Error::CoincidentNodes(i, j));
                }
            }
        }
        Ok(Self { z })
    }

    /// `exp(i θ_j)` for the given angles.
    pub fn from_angles(theta: &[R]) -> Result<Self> {
        Self::new(theta.iter().map(|t| cis(*t)).collect())
    }

    pub fn as_slice(&self) -> &[Complex<R>] {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

/// U_N(ξ): columns z_j^k/√(2N) and k·z_j^{k−1}/√(2N), k = 0..2N.
pub fn confluent_rect<R: Real>(xi: &NodeVector, n: usize) -> CMat<R> {
    let angles: Vec<R> = xi.as_slice().iter().map(|t| R::from_f64(*t)).collect();
    confluent_from_angles(&angles, n)
}

/// U_N for arbitrary real angles (not reduced, not checked for distinctness).
pub fn confluent_from_angles<R: Real>(angles: &[R], n: usize) -> CMat<R> {
    let s = angles.len();
    let scale = R::one() / R::from_usize(2 * n).sqrt();
    let mut u = CMat::zeros(2 * n + 1, 2 * s);
    for (j, t) in angles.iter().enumerate() {
        for k in 0..=2 * n {
            let kk = R::from_usize(k);
            u[(k, j)] = cscale(cis(kk * *t), scale);
            if k > 0 {
                let prev = cis(R::from_usize(k - 1) * *t);
                u[(k, s + j)] = cscale(prev, kk * scale);
            }
        }
    }
    u
}

/// U_N(x, Ω) = U_N(xΩ/N).
pub fn confluent_bandlimited<R: Real>(x: &NodeVector, omega: f64, n: usize) -> Result<CMat<R>> {
    let max = 2.0 * n as f64;
    if !(omega > 0.0 && omega <= max) {
        return Err(Error::OmegaOutOfRange { omega, max });
    }
    let k = R::from_f64(omega) / R::from_usize(n);
    let angles: Vec<R> = x.as_slice().iter().map(|t| R::from_f64(*t) * k).collect();
    Ok(confluent_from_angles(&angles, n))
}

/// Square 𝐔_{2s}(z): rows k = 0..2s−1 of [z_j^k | k z_j^{k−1}].
pub fn confluent_square<R: Real>(z: &UnitNodes<R>) -> CMat<R> {
    let z = z.as_slice();
    let s = z.len();
    let mut u = CMat::zeros(2 * s, 2 * s);
    for (j, zj) in z.iter().enumerate() {
        let mut pw = c(R::one());
        for k in 0..2 * s {
            u[(k, j)] = pw;
            if k + 1 < 2 * s {
                u[(k + 1, s + j)] = cscale(pw, R::from_usize(k + 1));
            }
            pw *= *zj;
        }
    }
    u
}

/// ω = ξ/(−2π) + 1/2, mapping (−π, π] onto [0, 1).
pub fn torus_from_angles<R: Real>(xi: &[R]) -> Vec<R> {
    let two_pi = R::pi() * R::from_f64(2.0);
    xi.iter().map(|t| -(*t) / two_pi + R::from_f64(0.5)).collect()
}

/// z_j = exp(−2πiω_j).
pub fn torus_nodes<R: Real>(omega: &[R]) -> Vec<Complex<R>> {
    let two_pi = R::pi() * R::from_f64(2.0);
    omega.iter().map(|w| cis(-two_pi * *w)).collect()
}

/// Φ_M(ω): rows m = 0..M of [z_j^m | m z_j^{m−1}], z_j = exp(−2πiω_j).
pub fn phi_unnormalized<R: Real>(omega: &[R], m: usize) -> CMat<R> {
    let s = omega.len();
    let two_pi = R::pi() * R::from_f64(2.0);
    let mut phi = CMat::zeros(m + 1, 2 * s);
    for (j, w) in omega.iter().enumerate() {
        for k in 0..=m {
            let kk = R::from_usize(k);
            phi[(k, j)] = cis(-two_pi * kk * *w);
            if k > 0 {
                phi[(k, s + j)] = cscale(cis(-two_pi * R::from_usize(k - 1) * *w), kk);
            }
        }
    }
    phi
}

/// V_M(ω): rows m = 0..M of [z_j^m | 2πi m z_j^m].
pub fn pascal_vandermonde<R: Real>(omega: &[R], m: usize) -> CMat<R> {
    let s = omega.len();
    let two_pi = R::pi() * R::from_f64(2.0);
    let mut v = CMat::zeros(m + 1, 2 * s);
    for (j, w) in omega.iter().enumerate() {
        for k in 0..=m {
            let e = cis(-two_pi * R::from_usize(k) * *w);
            v[(k, j)] = e;
            v[(k, s + j)] = e * Complex::new(R::zero(), two_pi * R::from_usize(k));
        }
    }
    v
}

/// H = diag(1,…,1, 2πi z_1,…,2πi z_s), so that V_M = Φ_M·H.
pub fn pascal_factor<R: Real>(omega: &[R]) -> CMat<R> {
    let two_pi = R::pi() * R::from_f64(2.0);
    let mut d = vec![c(R::one()); omega.len()];
    d.extend(torus_nodes(omega).into_iter().map(|z| z * Complex::new(R::zero(), two_pi)));
    CMat::diag(&d)
}

#[derive(Clone, Debug)]
pub struct BlockFactors<R> {
    pub d: CMat<R>,
    pub t: CMat<R>,
    pub p: CMat<R>,
}

/// D(z,m) = diag(1,…,1, m z^{m−1}), T(z,r) = [[z^r, r z^{r−1}], [0, z^r]] blockwise, P = D·T.
pub fn block_factors<R: Real>(z: &UnitNodes<R>, m: usize, r: usize) -> Result<BlockFactors<R>> {
    if m == 0 {
        return Err(Error::ZeroStride);
    }
    let z = z.as_slice();
    let s = z.len();
    let mut dd = vec![c(R::one()); 2 * s];
    let mut t = CMat::zeros(2 * s, 2 * s);
    for (j, zj) in z.iter().enumerate() {
        dd[s + j] = cscale(cpow(*zj, m - 1), R::from_usize(m));
        let zr = cpow(*zj, r);
        t[(j, j)] = zr;
        t[(s + j, s + j)] = zr;
        if r > 0 {
            t[(j, s + j)] = cscale(cpow(*zj, r - 1), R::from_usize(r));
        }
    }
    let d = CMat::diag(&dd);
    let p = d.matmul(&t);
    Ok(BlockFactors { d, t, p })
}

fn cpow<R: Real>(z: Complex<R>, k: usize) -> Complex<R> {
    let mut acc = c(R::one());
    let mut base = z;
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

/// Rows R_k = {k, m+k, …, (2s−1)m+k}.
pub fn decimated_rows(m: usize, k: usize, s: usize) -> Vec<usize> {
    (0..2 * s).map(|j| j * m + k).collect()
}

pub fn row_submatrix<R: Real>(u: &CMat<R>, rows: &[usize]) -> Result<CMat<R>> {
    for (t, &i) in rows.iter().enumerate() {
        if i >= u.rows() {
            return Err(Error::RowOutOfRange { index: i, rows: u.rows() });
        }
        if t > 0 && rows[t - 1] >= i {
            return Err(Error::RowsNotIncreasing);
        }
    }
    Ok(u.select_rows(rows))
}

pub fn sigma_min<R: Real>(a: &CMat<R>) -> Result<R> {
    if a.rows() < a.cols() {
        return Err(Error::RankDeficientByShape {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let sv = linalg::singular_values(a)?;
    Ok(*sv.last().expect("nonempty spectrum"))
}

/// Gautschi's bound on ‖𝐔_{2n}(x)^{-1}‖_∞ for pairwise distinct complex nodes.
pub fn gautschi_inverse_norm_bound<R: Real>(x: &[Complex<R>]) -> Result<R> {
    let n = x.len();
    for i in 0..n {
        for j in i + 1..n {
            if x[i] == x[j] {
                return Err(Error::CoincidentNodes(i, j));
            }
        }
    }
    let one = R::one();
    let two = R::from_f64(2.0);
    let mut best = R::zero();
    for l in 0..n {
        let al = cabs(x[l]);
        let mut inv_sum = R::zero();
        let mut prod = one;
        for v in 0..n {
            if v == l {
                continue;
            }
            let d = cabs(x[v] - x[l]);
            inv_sum += one / d;
            prod *= (one + cabs(x[v])) / d;
        }
        let b = (one + al).max(one + two * (one + al) * inv_sum);
        best = best.max(b * prod * prod);
    }
    Ok(best)
}

/// π^{2(1−s)}/√(2s) · min_j γ_j Π_{k≠j} δ_{j,k}², γ_j = min(1/2, (2/(5π))(Σ_{k≠j} δ_{j,k}^{-1})^{-1}).
pub fn square_sigma_min_lower_bound<R: Real>(z: &UnitNodes<R>) -> R {
    let z = z.as_slice();
    let s = z.len();
    let pi = R::pi();
    let half = R::from_f64(0.5);
    let mut best: Option<R> = None;
    for j in 0..s {
        let mut inv_sum = R::zero();
        let mut prod = R::one();
        for k in 0..s {
            if k == j {
                continue;
            }
            let d = carg(z[j] * z[k].conj()).abs();
            inv_sum += R::one() / d;
            prod *= d * d;
        }
        let gamma = if s == 1 {
            half
        } else {
            half.min(R::from_f64(2.0) / (R::from_f64(5.0) * pi) / inv_sum)
        };
        let v = gamma * prod;
        best = Some(match best {
            Some(b) => b.min(v),
            None => v,
        });
    }
    let lead = pi.powi(2 * (1 - s as i32)) / R::from_usize(2 * s).sqrt();
    lead * best.unwrap_or(R::zero())
}

/// E1 = diag((−1)^k), k = 0..2N, and E2 = diag(1,…,1, −1,…,−1) of size 2s.
pub fn unitary_factors<R: Real>(n: usize, s: usize) -> (CMat<R>, CMat<R>) {
    let e1: Vec<Complex<R>> = (0..=2 * n)
        .map(|k| c(if k % 2 == 0 { R::one() } else { -R::one() }))
        .collect();
    let e2: Vec<Complex<R>> = (0..2 * s).map(|j| c(if j < s { R::one() } else { -R::one() })).collect();
    (CMat::diag(&e1), CMat::diag(&e2))
}

/// C×C Hankel matrix with entry (i, j) = m_{i+j}.
pub fn hankel_from_moments<R: Real>(m: &[Complex<R>], c: usize) -> Result<CMat<R>> {
    hankel_rect(m, c, c)
}

/// rows×cols Hankel matrix with entry (i, j) = m_{i+j}.
pub fn hankel_rect<R: Real>(m: &[Complex<R>], rows: usize, cols: usize) -> Result<CMat<R>> {
    let need = (rows + cols).saturating_sub(1);
    if m.len() < need {
        return Err(Error::InsufficientMoments { need, got: m.len() });
    }
    Ok(CMat::from_fn(rows, cols, |i, j| m[i + j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn rect_small_cases() {
        let u: CMat<f64> = confluent_rect(&NodeVector::new(vec![PI]).unwrap(), 1);
        let r = 1.0 / 2f64.sqrt();
        let want = [[1.0, 0.0], [-1.0, 1.0], [1.0, -2.0]];
        for k in 0..3 {
            for j in 0..2 {
                assert!((u[(k, j)] - Complex64::new(want[k][j] * r, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn square_small_cases() {
        let u = confluent_square(&UnitNodes::new(vec![Complex64::new(0.0, 1.0)]).unwrap());
        assert_eq!(u[(1, 0)], Complex64::new(0.0, 1.0));
        assert_eq!(u[(1, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(u[(0, 1)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn gautschi_hand_values() {
        let one = [Complex64::new(1.0, 0.0)];
        assert_eq!(gautschi_inverse_norm_bound(&one).unwrap(), 2.0);
        let two = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        assert!((gautschi_inverse_norm_bound(&two).unwrap() - 3.0).abs() < 1e-15);
        assert!(gautschi_inverse_norm_bound(&[one[0], one[0]]).is_err());
    }

    #[test]
    fn square_bound_hand_values() {
        let s1 = UnitNodes::new(vec![Complex64::new(1.0, 0.0)]).unwrap();
        assert!((square_sigma_min_lower_bound(&s1) - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
        let s2 = UnitNodes::from_angles(&[0.0, PI]).unwrap();
        assert!((square_sigma_min_lower_bound(&s2) - 0.2).abs() < 1e-14);
    }

    #[test]
    fn hankel_small() {
        let m: Vec<Complex64> = [1.0, 2.0, 3.0].iter().map(|x| Complex64::new(*x, 0.0)).collect();
        let h = hankel_from_moments(&m, 2).unwrap();
        assert_eq!(h[(0, 1)], m[1]);
        assert_eq!(h[(1, 1)], m[2]);
        assert!(hankel_from_moments(&m, 3).is_err());
    }

    #[test]
    fn p_inverse_norm() {
        let z = UnitNodes::new(vec![Complex64::new(1.0, 0.0)]).unwrap();
        let f = block_factors(&z, 3, 3).unwrap();
        let pi = crate::linalg::inverse(&f.p).unwrap();
        assert!((pi.inf_norm() - 2.0).abs() < 1e-14);
        assert!(block_factors(&z, 0, 1).is_err());
    }
}
