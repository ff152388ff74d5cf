//! Upper certificate via the finite-difference test vector u.
//!
//! Everything here lives on the torus [0, 1) with z_j = exp(−2πiω_j). Nodes
//! given as angles ξ are mapped with ω = ξ/(−2π) + 1/2, so a torus separation
//! is the angular one divided by 2π.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::CMat;
use crate::model::{validate_cluster_config, wraparound_distance, ClusterParams, NodeVector, SpikeSignal};
use crate::numeric::{cis, vnorm, Dd, Real};
use crate::vandermonde::{phi_unnormalized, torus_from_angles};

use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FdCoefficients<R = f64> {
    pub tau_vec: Vec<R>,
    pub h: R,
    /// Weights on D_M(ω + h_i).
    pub a: Vec<R>,
    /// Weights on D_M′(ω + h_i).
    pub b: Vec<R>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn factorial_in<R: Real>(n: usize) -> R {
    (1..=n).fold(R::one(), |acc, k| acc * R::from_usize(k))
}

/// Weights A, B with Σ A_i D(ω+h_i) + B_i D′(ω+h_i) = D^{(2ℓ−1)}(ω) + O(h), h_i = τ_i·h.
///
/// Solves the τ-scaled system L·y = (0,…,0,(2ℓ−1)!·h^{1−2ℓ}) with
/// L[k][i] = τ_i^k, L[k][ℓ+i] = k·τ_i^{k−1}, then A = y[..ℓ], B = h·y[ℓ..].
pub fn fd_coefficients<R: Real>(tau_vec: &[R], h: R) -> Result<FdCoefficients<R>> {
    let l = tau_vec.len();
    if l == 0 {
        return Err(Error::Precondition("empty tau vector".into()));
    }
    if tau_vec[0] != R::zero() {
        return Err(Error::Precondition("tau_1 must be 0".into()));
    }
    if h == R::zero() || !h.is_finite() {
        return Err(Error::Precondition("step h must be nonzero".into()));
    }
    for i in 0..l {
        for j in i + 1..l {
            if tau_vec[i] == tau_vec[j] {
                return Err(Error::Singular);
            }
        }
    }
    let n = 2 * l;
    let lmat = CMat::from_fn(n, n, |k, c| {
        let v = if c < l {
            tau_vec[c].powi(k as i32)
        } else if k == 0 {
            R::zero()
        } else {
            R::from_usize(k) * tau_vec[c - l].powi(k as i32 - 1)
        };
        Complex::new(v, R::zero())
    });
    let mut rhs = vec![Complex::new(R::zero(), R::zero()); n];
    rhs[n - 1] = Complex::new(factorial_in::<R>(n - 1) * h.powi(1 - n as i32), R::zero());
    let y = linalg::solve(&lmat, &rhs)?;
    Ok(FdCoefficients {
        tau_vec: tau_vec.to_vec(),
        h,
        a: y[..l].iter().map(|z| z.re).collect(),
        b: y[l..].iter().map(|z| z.re * h).collect(),
    })
}

impl<R: Real> FdCoefficients<R> {
    pub fn ell(&self) -> usize {
        self.a.len()
    }

    /// Largest relative residual of the 2ℓ moment conditions
    /// Σ A_i h_i^k + k B_i h_i^{k−1} = δ_{k,2ℓ−1}(2ℓ−1)!.
    pub fn moment_residual(&self) -> R {
        let l = self.ell();
        let mut worst = R::zero();
        for k in 0..2 * l {
            let rhs = if k == 2 * l - 1 { factorial_in::<R>(k) } else { R::zero() };
            let mut sum = -rhs;
            let mut scale = rhs.abs();
            for i in 0..l {
                let hi = self.tau_vec[i] * self.h;
                let ta = self.a[i] * hi.powi(k as i32);
                sum += ta;
                scale += ta.abs();
                if k > 0 {
                    let tb = R::from_usize(k) * self.b[i] * hi.powi(k as i32 - 1);
                    sum += tb;
                    scale += tb.abs();
                }
            }
            if scale > R::zero() {
                worst = worst.max(sum.abs() / scale);
            }
        }
        worst
    }

    pub fn to_f64(&self) -> FdCoefficients<f64> {
        FdCoefficients {
            tau_vec: self.tau_vec.iter().map(|t| t.to_f64()).collect(),
            h: self.h.to_f64(),
            a: self.a.iter().map(|t| t.to_f64()).collect(),
            b: self.b.iter().map(|t| t.to_f64()).collect(),
        }
    }
}

/// The 2s-vector u of the upper-bound construction for a cluster at ω_j = τ_jα/M.
pub fn u_vector<R: Real>(tau_vec: &[R], alpha: R, m: usize, s: usize) -> Result<Vec<Complex<R>>> {
    let l = tau_vec.len();
    if l > s {
        return Err(Error::Precondition(format!("cluster of {l} nodes exceeds s={s}")));
    }
    let dt = alpha / R::from_usize(m);
    let omega: Vec<R> = tau_vec.iter().map(|t| *t * dt).collect();
    let members: Vec<usize> = (0..l).collect();
    let mut full = vec![R::zero(); s];
    full[..l].copy_from_slice(&omega);
    Ok(u_for_cluster(&full, &members, tau_vec, dt)?.0)
}

/// u placed on `members` of an s-node configuration with torus positions `omega`.
fn u_for_cluster<R: Real>(
    omega: &[R],
    members: &[usize],
    tau_vec: &[R],
    dt: R,
) -> Result<(Vec<Complex<R>>, FdCoefficients<R>)> {
    let s = omega.len();
    let l = members.len();
    let fd = fd_coefficients(tau_vec, -dt)?;
    let scale = dt.powi(2 * l as i32 - 1);
    let two_pi = R::pi() * R::from_f64(2.0);
    let mut u = vec![Complex::new(R::zero(), R::zero()); 2 * s];
    for (t, &j) in members.iter().enumerate() {
        let z = cis(-two_pi * omega[j]);
        u[j] = Complex::new(scale * fd.a[t], R::zero());
        u[s + j] = z * Complex::new(R::zero(), two_pi * scale * fd.b[t]);
    }
    Ok((u, fd))
}

/// D_M^{(q)}(ω) = Σ_{m=0}^{M} (2πim)^q e^{2πimω}.
pub fn dirichlet<R: Real>(m: usize, omega: R, order: u32) -> Complex<R> {
    let two_pi = R::pi() * R::from_f64(2.0);
    let mut acc = Complex::new(R::zero(), R::zero());
    for k in 0..=m {
        let kk = R::from_usize(k);
        let w = Complex::new(R::zero(), two_pi * kk);
        let mut coef = Complex::new(R::one(), R::zero());
        for _ in 0..order {
            coef *= w;
        }
        acc += coef * cis(two_pi * kk * omega);
    }
    acc
}

/// ‖D_M^{(q)}‖_{L²(𝕋)} = (Σ_m (2πm)^{2q})^{1/2} by Parseval.
pub fn dirichlet_l2_norm(m: usize, order: u32) -> f64 {
    (0..=m)
        .map(|k| (2.0 * PI * k as f64).powi(2 * order as i32))
        .sum::<f64>()
        .sqrt()
}

/// Composite trapezoid of ∫_𝕋 |f|² with `points` nodes, returned as an L² norm.
pub fn trapezoid_l2<F: Fn(f64) -> Complex<f64>>(f: F, points: usize) -> f64 {
    let h = 1.0 / points as f64;
    ((0..points).map(|k| f(k as f64 * h).norm_sqr()).sum::<f64>() * h).sqrt()
}

/// Torus Fourier coefficient μ̂(m) = Σ a_j z_j^m + 2πim·b_j z_j^m for a signal
/// whose node positions are read as torus points ω_j.
pub fn torus_fourier_coeff(signal: &SpikeSignal, m: usize) -> Complex<f64> {
    let mut acc = Complex::new(0.0, 0.0);
    for ((w, a), b) in signal.nodes.as_slice().iter().zip(&signal.a).zip(&signal.b) {
        let e = cis(-2.0 * PI * m as f64 * w);
        acc += (a + b * Complex::new(0.0, 2.0 * PI * m as f64)) * e;
    }
    acc
}

/// (Σ_{m=0}^{M} |μ̂(m)|²)^{1/2} for μ on the torus.
pub fn parseval_convolution_norm(signal: &SpikeSignal, m: usize) -> f64 {
    (0..=m).map(|k| torus_fourier_coeff(signal, k).norm_sqr()).sum::<f64>().sqrt()
}

/// ‖μ * D_M‖_{L²(𝕋)} by trapezoidal quadrature with `points` nodes.
pub fn convolution_norm_quadrature(signal: &SpikeSignal, m: usize, points: usize) -> f64 {
    let eval = |w: f64| {
        let mut acc = Complex::new(0.0, 0.0);
        for ((t, a), b) in signal.nodes.as_slice().iter().zip(&signal.a).zip(&signal.b) {
            acc += a * dirichlet(m, w - t, 0) + b * dirichlet(m, w - t, 1);
        }
        acc
    };
    trapezoid_l2(eval, points)
}

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = 0.5 * (1.0 - t);
        w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

const GL_POINTS: usize = 24;

/// Fourier coefficients c_m of R_A and R_B, m = 0..M.
fn remainder_coefficients(fd: &FdCoefficients<f64>, m: usize) -> (Vec<Complex<f64>>, Vec<Complex<f64>>) {
    let l = fd.ell();
    let (gx, gw) = gauss_legendre(GL_POINTS);
    let fa = factorial(2 * l - 1);
    let fb = factorial(2 * l - 2);
    let mut ca = Vec::with_capacity(m + 1);
    let mut cb = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let d = Complex::new(0.0, 2.0 * PI * k as f64).powi(2 * l as i32);
        let mut sa = Complex::new(0.0, 0.0);
        let mut sb = Complex::new(0.0, 0.0);
        for i in 0..l {
            let hi = fd.tau_vec[i] * fd.h;
            if hi == 0.0 {
                continue;
            }
            let mut ia = Complex::new(0.0, 0.0);
            let mut ib = Complex::new(0.0, 0.0);
            for (r, wr) in gx.iter().zip(&gw) {
                let e = cis(2.0 * PI * k as f64 * hi * r);
                let base = hi * (1.0 - r);
                ia += e * (wr * base.powi(2 * l as i32 - 1) * hi);
                ib += e * (wr * base.powi(2 * l as i32 - 2) * hi);
            }
            sa += ia * fd.a[i];
            sb += ib * fd.b[i];
        }
        ca.push(d * sa / fa);
        cb.push(d * sb / fb);
    }
    (ca, cb)
}

/// R_A(ω) and R_B(ω), the integral Taylor remainders of S_{A,B} − D_M^{(2ℓ−1)}.
pub fn remainders_at(fd: &FdCoefficients<f64>, m: usize, omega: &[f64]) -> Vec<(Complex<f64>, Complex<f64>)> {
    let (ca, cb) = remainder_coefficients(fd, m);
    omega
        .iter()
        .map(|w| {
            let mut ra = Complex::new(0.0, 0.0);
            let mut rb = Complex::new(0.0, 0.0);
            for k in 0..=m {
                let e = cis(2.0 * PI * k as f64 * w);
                ra += ca[k] * e;
                rb += cb[k] * e;
            }
            (ra, rb)
        })
        .collect()
}

/// S_{A,B}(ω) − D_M^{(2ℓ−1)}(ω), evaluated in double-double.
pub fn fd_defect(fd: &FdCoefficients<f64>, m: usize, omega: f64) -> Complex<f64> {
    let l = fd.ell();
    let w = Dd::from_f64(omega);
    let mut acc = -dirichlet(m, w, 2 * l as u32 - 1);
    for i in 0..l {
        let x = w + Dd::from_f64(fd.tau_vec[i]) * Dd::from_f64(fd.h);
        acc += dirichlet(m, x, 0) * Dd::from_f64(fd.a[i]) + dirichlet(m, x, 1) * Dd::from_f64(fd.b[i]);
    }
    Complex::new(acc.re.to_f64(), acc.im.to_f64())
}

/// (‖R_A‖_{L²}, ‖R_B‖_{L²}) by trapezoidal quadrature with 64·M points.
pub fn remainder_norms(fd: &FdCoefficients<f64>, m: usize) -> (f64, f64) {
    let points = 64 * m.max(1);
    let grid: Vec<f64> = (0..points).map(|k| k as f64 / points as f64).collect();
    let vals = remainders_at(fd, m, &grid);
    let h = 1.0 / points as f64;
    let na = (vals.iter().map(|v| v.0.norm_sqr()).sum::<f64>() * h).sqrt();
    let nb = (vals.iter().map(|v| v.1.norm_sqr()).sum::<f64>() * h).sqrt();
    (na, nb)
}

/// Bounds on the Taylor remainders:
/// ‖R_A‖ ≤ Δ^{2ℓ}√(M+1)(2πM)^{2ℓ}τ^{2ℓ}/(2ℓ−1)!·Σ|A_i| and
/// ‖R_B‖ ≤ Δ^{2ℓ−1}√(M+1)(2πM)^{2ℓ}τ^{2ℓ−1}/(2ℓ−1)!·Σ|B_i|, with Δ = |h|.
pub fn remainder_bounds(fd: &FdCoefficients<f64>, m: usize, tau: f64) -> (f64, f64) {
    let l = fd.ell() as i32;
    let d = fd.h.abs();
    let base = ((m + 1) as f64).sqrt() * (2.0 * PI * m as f64).powi(2 * l) / factorial(2 * l as usize - 1);
    let sa: f64 = fd.a.iter().map(|x| x.abs()).sum();
    let sb: f64 = fd.b.iter().map(|x| x.abs()).sum();
    (
        d.powi(2 * l) * base * tau.powi(2 * l) * sa,
        d.powi(2 * l - 1) * base * tau.powi(2 * l - 1) * sb,
    )
}

/// Constants of the upper-bound chain for given (ℓ, τ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UpperConstants {
    pub c_v: f64,
    pub c_w: f64,
    pub c_a: f64,
    pub c_b: f64,
    /// C̃ with ‖Φu‖ ≤ √(M+1)(2πα)^{2ℓ−1}(1 + C̃·2πα).
    pub c_tilde: f64,
    /// C̃₃ = (2ℓ−1)!/(4ℓ³τ^{2ℓ−1}), the claimed lower bound on ‖u‖₂.
    pub c3_tilde: f64,
}

impl UpperConstants {
    pub fn new(ell: usize, tau: f64) -> Self {
        let l = ell as i32;
        let f = factorial(2 * ell - 1);
        let c_v = 2.0 * ell as f64 * (1.0 + tau).powi(2 * l - 1);
        let c_w = 2.0 * (1.0 + tau).powi(2 * l - 2);
        let c_a = ell as f64 * f * c_v;
        let c_b = ell as f64 * f * c_w;
        let c_tilde = (tau.powi(2 * l) * c_a + tau.powi(2 * l - 1) * c_b) / f;
        let c3_tilde = f / (4.0 * (ell as f64).powi(3) * tau.powi(2 * l - 1));
        Self {
            c_v,
            c_w,
            c_a,
            c_b,
            c_tilde,
            c3_tilde,
        }
    }

    /// Σ|A_i| ≤ C_A (M/α)^{2ℓ−1}, Σ|B_i| ≤ C_B (M/α)^{2ℓ−2}.
    pub fn coefficient_sum_bounds(&self, ell: usize, alpha_over_m: f64) -> (f64, f64) {
        let l = ell as i32;
        (
            self.c_a * alpha_over_m.powi(1 - 2 * l),
            self.c_b * alpha_over_m.powi(2 - 2 * l),
        )
    }

    /// C₂ such that the normalized quotient ‖Φ̃u‖/‖u‖ ≤ C₂·(2πα)^{2ℓ−1}, with Φ̃ = Φ_M/√M.
    pub fn c2(&self, alpha: f64, m: usize) -> f64 {
        let mf = m as f64;
        ((mf + 1.0) / mf).sqrt() * (1.0 + self.c_tilde * 2.0 * PI * alpha) / self.c3_tilde
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpperCertificate {
    /// Rayleigh quotient ‖Φ̃_{2N}u‖/‖u‖ of the best cluster.
    pub value: f64,
    /// Node indices of the cluster that produced `value`.
    pub cluster: Vec<usize>,
    pub u_norm: f64,
    /// C₂·(2πα)^{2ℓ−1} for the chosen cluster, with α = 2N·Δ/(2π).
    pub c2_bound: f64,
    pub c2: f64,
    /// The vector u of the chosen cluster, in the torus convention of Φ̃_{2N}.
    #[serde(skip)]
    pub u: Vec<Complex<f64>>,
}

/// Rayleigh quotient of the normalized Φ̃_{2N}(ξ/(−2π)+1/2) at the finite-difference vector u.
pub fn upper_bound_certificate(xi: &NodeVector, n: usize, params: &ClusterParams) -> Result<f64> {
    upper_bound_certificate_detail(xi, n, params).map(|c| c.value)
}

pub fn upper_bound_certificate_detail(xi: &NodeVector, n: usize, params: &ClusterParams) -> Result<UpperCertificate> {
    if n as f64 * params.delta > 0.5 {
        return Err(Error::Precondition(format!(
            "need N <= 1/(2 delta), got N={n}, delta={}",
            params.delta
        )));
    }
    let report = validate_cluster_config(xi, params);
    if !report.is_valid() {
        return Err(Error::Precondition("nodes are not a clustered configuration".into()));
    }
    let m = 2 * n;
    let angles: Vec<Dd> = xi.as_slice().iter().map(|t| Dd::from_f64(*t)).collect();
    let omega = torus_from_angles(&angles);
    let phi = phi_unnormalized(&omega, m).scale(Dd::ONE / Dd::from_usize(m).sqrt());
    let dt = Dd::from_f64(params.delta) / (Dd::PI * Dd::from_f64(2.0));

    let mut clusters: Vec<Vec<usize>> = report.memberships.clone();
    clusters.sort();
    clusters.dedup();

    let mut best: Option<UpperCertificate> = None;
    for members in clusters {
        let (ordered, tau_vec) = cluster_offsets(xi, &members, dt);
        let (u, _) = u_for_cluster(&omega, &ordered, &tau_vec, dt)?;
        let un = vnorm(&u);
        let q = (vnorm(&phi.matvec(&u)) / un).to_f64();
        let ell = members.len();
        let alpha = m as f64 * params.delta / (2.0 * PI);
        let consts = UpperConstants::new(ell, params.tau.max(ell as f64 - 1.0));
        let c2 = consts.c2(alpha, m);
        let cand = UpperCertificate {
            value: q,
            cluster: ordered,
            u_norm: un.to_f64(),
            c2_bound: c2 * (2.0 * PI * alpha).powi(2 * ell as i32 - 1),
            c2,
            u: u.iter().map(|z| Complex::new(z.re.to_f64(), z.im.to_f64())).collect(),
        };
        if best.as_ref().is_none_or(|b| cand.value < b.value) {
            best = Some(cand);
        }
    }
    best.ok_or_else(|| Error::Precondition("empty node vector".into()))
}

/// Orders cluster members by increasing torus position and returns τ_j = (ω_j − ω_ref)/Δ_t.
/// Increasing ω is decreasing ξ, so the reference is the member with the largest ξ.
fn cluster_offsets(xi: &NodeVector, members: &[usize], dt: Dd) -> (Vec<usize>, Vec<Dd>) {
    let x = xi.as_slice();
    let anchor = x[members[0]];
    // Signed offsets from the anchor, free of wraparound inside a cluster.
    let off = |j: usize| {
        let d = x[j] - anchor;
        let w = wraparound_distance(d);
        if crate::model::normalize_angle(d) < 0.0 {
            -w
        } else {
            w
        }
    };
    let mut ordered = members.to_vec();
    ordered.sort_by(|&i, &j| off(j).partial_cmp(&off(i)).unwrap());
    let top = ordered[0];
    let tau_vec = ordered
        .iter()
        .map(|&j| {
            let d = Dd::from_f64(x[top]) - Dd::from_f64(x[j]);
            let d = if d.to_f64() < 0.0 { d + Dd::PI * Dd::from_f64(2.0) } else { d };
            d / (Dd::PI * Dd::from_f64(2.0)) / dt
        })
        .collect();
    (ordered, tau_vec)
}
