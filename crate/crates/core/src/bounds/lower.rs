use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{validate_cluster_config, wraparound_distance, ClusterParams, NodeVector};
use crate::numeric::{Dd, Real};
use crate::vandermonde::{confluent_from_angles, decimated_rows, row_submatrix, sigma_min};

use std::f64::consts::PI;

/// Relative slack on the admissibility thresholds, absorbing rounding in λ·x.
const ADMISSIBLE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecimationResult {
    pub m: usize,
    pub lambda: f64,
    /// Smallest dilated distance to a same-cluster node (∞ when there is none).
    pub intra_sep: f64,
    /// Smallest dilated distance to a node of another cluster (∞ when there is none).
    pub inter_sep: f64,
    pub admissible: bool,
    /// Whether (Ω, N) satisfy 4πs/ρ ≤ Ω ≤ πs/(τΔ) and N > 2s³⌈Ω/4s⌉.
    pub in_hypothesis_region: bool,
}

pub fn in_hypothesis_region(params: &ClusterParams, omega: f64, n: usize) -> bool {
    let s = params.s as f64;
    let lo = if params.rho > 0.0 { 4.0 * PI * s / params.rho } else { f64::INFINITY };
    let hi = PI * s / (params.tau * params.delta);
    let need = 2.0 * s.powi(3) * (omega / (4.0 * s)).ceil();
    lo <= omega && omega <= hi && (n as f64) > need
}

/// Scans strides m with λ = mΩ/N ∈ [Ω/2s, Ω/s] for the best-separated dilation.
pub fn decimation_search(x: &NodeVector, params: &ClusterParams, omega: f64, n: usize) -> DecimationResult {
    let s = x.len();
    let sf = s as f64;
    let report = validate_cluster_config(x, params);
    let intra_target = params.delta * omega / (2.0 * sf);
    let inter_target = PI / (2.0 * sf * sf);
    let (lam_lo, lam_hi) = (omega / (2.0 * sf), omega / sf);
    let nodes = x.as_slice();

    let evaluate = |m: usize| -> (f64, f64, f64, f64) {
        let lambda = m as f64 * omega / n as f64;
        let mut intra = f64::INFINITY;
        let mut inter = f64::INFINITY;
        for j in 0..s {
            for k in 0..s {
                if k == j {
                    continue;
                }
                let d = wraparound_distance(lambda * (nodes[k] - nodes[j]));
                if report.memberships[j].contains(&k) {
                    intra = intra.min(d);
                } else {
                    inter = inter.min(d);
                }
            }
        }
        let score = (intra / intra_target).min(inter / inter_target);
        (lambda, intra, inter, score)
    };

    let in_window = |m: usize| {
        let lambda = m as f64 * omega / n as f64;
        lambda >= lam_lo * (1.0 - ADMISSIBLE_SLACK) && lambda <= lam_hi * (1.0 + ADMISSIBLE_SLACK)
    };
    let window: Vec<usize> = (1..=2 * n).filter(|&m| in_window(m)).collect();
    let candidates: Vec<usize> = if window.is_empty() { (1..=2 * n).collect() } else { window.clone() };

    let mut best: Option<(usize, f64, f64, f64, f64)> = None;
    for m in candidates {
        let (lambda, intra, inter, score) = evaluate(m);
        // Strict comparison keeps the smaller m on ties.
        if best.is_none_or(|b| score > b.4) {
            best = Some((m, lambda, intra, inter, score));
        }
    }
    let (m, lambda, intra, inter, _) = best.expect("at least one stride");
    let admissible = !window.is_empty()
        && intra >= intra_target * (1.0 - ADMISSIBLE_SLACK)
        && inter >= inter_target * (1.0 - ADMISSIBLE_SLACK);
    DecimationResult {
        m,
        lambda,
        intra_sep: intra,
        inter_sep: inter,
        admissible,
        in_hypothesis_region: in_hypothesis_region(params, omega, n),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LowerCertificate {
    pub value: f64,
    pub decimation: DecimationResult,
}

/// (Σ_k σ_min(U_{N,R_k})²)^{1/2} over the decimated row blocks.
pub fn certified_lower_bound(x: &NodeVector, params: &ClusterParams, omega: f64, n: usize) -> Result<f64> {
    certified_lower_bound_detail(x, params, omega, n).map(|c| c.value)
}

pub fn certified_lower_bound_detail(
    x: &NodeVector,
    params: &ClusterParams,
    omega: f64,
    n: usize,
) -> Result<LowerCertificate> {
    let dec = decimation_search(x, params, omega, n);
    if !dec.admissible {
        return Err(Error::NoCertificate);
    }
    let s = x.len();
    let m = dec.m;
    if 2 * s * m > 2 * n + 1 {
        return Err(Error::NoCertificate);
    }
    let k = Dd::from_f64(omega) / Dd::from_usize(n);
    let angles: Vec<Dd> = x.as_slice().iter().map(|t| Dd::from_f64(*t) * k).collect();
    let u = confluent_from_angles(&angles, n);
    let mut acc = Dd::ZERO;
    for r in 0..m {
        let block = row_submatrix(&u, &decimated_rows(m, r, s))?;
        let sm = sigma_min(&block)?;
        acc += sm * sm;
    }
    Ok(LowerCertificate {
        value: acc.sqrt().to_f64(),
        decimation: dec,
    })
}

/// κ(s) = 1/(5πs²(1+s²)).
pub fn kappa(s: usize) -> f64 {
    let s = s as f64;
    1.0 / (5.0 * PI * s * s * (1.0 + s * s))
}

/// κ̃(s) = π^{2(1−s)}/√(2s)·κ(s).
pub fn kappa_tilde(s: usize) -> f64 {
    PI.powi(2 * (1 - s as i32)) / (2.0 * s as f64).sqrt() * kappa(s)
}

/// C₁(s) = κ̃(s)/√(16s).
pub fn c1(s: usize) -> f64 {
    kappa_tilde(s) / (16.0 * s as f64).sqrt()
}

/// C₁(s)·(NΔ)^{2ℓ−1}.
pub fn theoretical_lower_bound(s: usize, ell: usize, delta: f64, n: usize) -> f64 {
    c1(s) * (n as f64 * delta).powi(2 * ell as i32 - 1)
}

/// C₁(s)·(ΔΩ)^{2ℓ−1}, the band-limited form with an explicit Ω.
pub fn theoretical_lower_bound_bandlimited(s: usize, ell: usize, delta: f64, omega: f64) -> f64 {
    c1(s) * (omega * delta).powi(2 * ell as i32 - 1)
}
