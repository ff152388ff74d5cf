//! On-grid embedding, Fourier grid matrices and the adversarial pair behind the
//! min-max lower bound.

use num_complex::{Complex, Complex64};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{lstsq, svd};
use crate::matrix::{CMat, ComplexMatrix};
use crate::model::{
    exact_samples, validate_cluster_config, wraparound_distance, ClusterParams, Grid, MeasurementSet, NodeVector,
    SpikeSignal,
};
use crate::numeric::{lower, Dd, Real};
use crate::vandermonde::confluent_rect;

/// A signal on a grid as a vector of length 2G: a_j at the node's grid index i,
/// −i·b_j at i + G.
#[derive(Clone, Debug, PartialEq)]
pub struct GridEmbedding {
    pub grid: Grid,
    pub x_mu: Vec<Complex64>,
    /// Zero-based grid indices of the nodes, in signal order.
    pub support: Vec<usize>,
}

pub fn embed_on_grid(signal: &SpikeSignal, grid: &Grid) -> Result<GridEmbedding> {
    let g = grid.g;
    let mut x = vec![Complex64::new(0.0, 0.0); 2 * g];
    let mut support = Vec::with_capacity(signal.s());
    for (j, &t) in signal.nodes.as_slice().iter().enumerate() {
        let i = grid.locate(t).map_err(|nearest| Error::OffGrid { node: t, nearest })?;
        x[i] = signal.a[j];
        x[i + g] = -Complex64::i() * signal.b[j];
        support.push(i);
    }
    Ok(GridEmbedding {
        grid: grid.clone(),
        x_mu: x,
        support,
    })
}

impl GridEmbedding {
    /// Inverse of [`embed_on_grid`].
    pub fn extract(&self) -> Result<SpikeSignal> {
        let g = self.grid.g;
        let nodes = NodeVector::new(self.support.iter().map(|&i| self.grid.points[i]).collect())?;
        let a = self.support.iter().map(|&i| self.x_mu[i]).collect();
        let b = self.support.iter().map(|&i| Complex64::i() * self.x_mu[i + g]).collect();
        SpikeSignal::new(nodes, a, b)
    }
}

/// Rows k = 0..2N of F_G = [e^{ikt_i}] and F′_G = diag(k)·F_G, and their
/// concatenation F̃ = [F | F′] of size (2N+1)×2G.
pub fn fourier_grid_matrices(grid: &Grid, n: usize) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    if 2 * n > grid.m {
        return Err(Error::GridTooCoarse { two_n: 2 * n, m: grid.m });
    }
    let g = grid.g;
    let f = CMat::from_fn(2 * n + 1, g, |k, i| Complex64::from_polar(1.0, k as f64 * grid.points[i]));
    let fp = CMat::from_fn(2 * n + 1, g, |k, i| f[(k, i)] * k as f64);
    let ft = CMat::from_fn(2 * n + 1, 2 * g, |k, c| if c < g { f[(k, c)] } else { fp[(k, c - g)] });
    Ok((f, fp, ft))
}

/// Coefficient vector w_μ = (a, −i·z∘b) matching the columns of U_N.
pub fn w_vector(signal: &SpikeSignal) -> Vec<Complex64> {
    let mut w = signal.a.clone();
    for (t, b) in signal.nodes.as_slice().iter().zip(&signal.b) {
        w.push(-Complex64::i() * Complex64::from_polar(1.0, *t) * b);
    }
    w
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdversarialPair {
    pub mu1: SpikeSignal,
    pub mu2: SpikeSignal,
    /// Exact samples of μ1; those of μ2 lie within weighted distance ε.
    pub y: MeasurementSet,
    pub epsilon: f64,
    pub sigma_min: f64,
    pub separation: f64,
}

/// Splits every cluster of `t` into its alternate members (sorted along the
/// circle); returns the two index sets.
fn alternate_split(t: &NodeVector, params: &ClusterParams) -> (Vec<usize>, Vec<usize>) {
    let x = t.as_slice();
    let report = validate_cluster_config(t, params);
    let mut seen = vec![false; x.len()];
    let (mut first, mut second) = (Vec::new(), Vec::new());
    for j in 0..x.len() {
        if seen[j] {
            continue;
        }
        let mut members = report.memberships[j].clone();
        let anchor = x[j];
        let signed = |k: usize| {
            let d = crate::model::normalize_angle(x[k] - anchor);
            if d == std::f64::consts::PI {
                -d
            } else {
                d
            }
        };
        members.sort_by(|&p, &q| signed(p).partial_cmp(&signed(q)).unwrap());
        for (pos, &k) in members.iter().enumerate() {
            if seen[k] {
                continue;
            }
            seen[k] = true;
            if pos % 2 == 0 {
                first.push(k);
            } else {
                second.push(k);
            }
        }
    }
    first.sort_unstable();
    second.sort_unstable();
    (first, second)
}

/// Parameters describing each half of a split (Δ, ρ, 2s, 2ℓ, τ) configuration.
pub fn half_params(params: &ClusterParams) -> ClusterParams {
    ClusterParams {
        delta: params.delta,
        rho: params.rho,
        s: params.s.div_ceil(2),
        ell: params.ell.div_ceil(2),
        tau: params.tau,
    }
}

/// Two signals μ1, μ2 with disjoint supports, ‖x₁ − x₂‖₂ = ε/σ_min(U_N(t)) and
/// measurements within weighted distance ε. `params` describes the full
/// configuration `t`; each half must validate under [`half_params`].
pub fn adversarial_pair(t: &NodeVector, n: usize, epsilon: f64, params: &ClusterParams) -> Result<AdversarialPair> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::Precondition(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    if t.len() < 2 {
        return Err(Error::InvalidSplit("need at least two nodes".into()));
    }
    if !validate_cluster_config(t, params).is_valid() {
        return Err(Error::InvalidSplit("full node set is not a clustered configuration".into()));
    }
    let (i1, i2) = alternate_split(t, params);
    let hp = half_params(params);
    let x = t.as_slice();
    let pick = |idx: &[usize]| NodeVector::new(idx.iter().map(|&k| x[k]).collect());
    let (t1, t2) = (pick(&i1)?, pick(&i2)?);
    for half in [&t1, &t2] {
        if !validate_cluster_config(half, &hp).is_valid() {
            return Err(Error::InvalidSplit("a half is not a clustered configuration".into()));
        }
    }

    let s = t.len();
    check_shape(n, s)?;
    let u = confluent_rect::<Dd>(t, n);
    let d = svd(&u)?;
    let sigma = d.sigma[2 * s - 1];
    if sigma == Dd::ZERO {
        return Err(Error::Singular);
    }
    let scale = Dd::from_f64(epsilon) / sigma;
    let w: Vec<Complex64> = (0..2 * s).map(|r| lower(d.v[(r, 2 * s - 1)] * scale)).collect();
    // v = H⁻¹w: a_j = w_j, b_j = i·conj(z_j)·w_{s+j}.
    let a: Vec<Complex64> = w[..s].to_vec();
    let b: Vec<Complex64> = (0..s)
        .map(|j| Complex64::i() * Complex64::from_polar(1.0, -x[j]) * w[s + j])
        .collect();
    let mu1 = SpikeSignal::new(t1, i1.iter().map(|&k| a[k]).collect(), i1.iter().map(|&k| b[k]).collect())?;
    let mu2 = SpikeSignal::new(t2, i2.iter().map(|&k| -a[k]).collect(), i2.iter().map(|&k| -b[k]).collect())?;
    let y = MeasurementSet::new(n, epsilon, exact_samples(&mu1, n))?;
    Ok(AdversarialPair {
        mu1,
        mu2,
        y,
        epsilon,
        sigma_min: sigma.to_f64(),
        separation: scale.to_f64(),
    })
}

/// ε/(2σ_min(U_N(t))).
pub fn minmax_lower_estimate(t: &NodeVector, n: usize, epsilon: f64) -> Result<f64> {
    check_shape(n, t.len())?;
    let u = confluent_rect::<Dd>(t, n);
    let d = svd(&u)?;
    let sigma = d.sigma[2 * t.len() - 1].to_f64();
    if sigma == 0.0 {
        return Err(Error::Singular);
    }
    Ok(epsilon / (2.0 * sigma))
}

fn check_shape(n: usize, s: usize) -> Result<()> {
    if 2 * n + 1 < 2 * s {
        return Err(Error::RankDeficientByShape {
            rows: 2 * n + 1,
            cols: 2 * s,
        });
    }
    Ok(())
}

/// Distance between two signals through their grid embeddings.
pub fn grid_distance(mu: &SpikeSignal, nu: &SpikeSignal, grid: &Grid) -> Result<f64> {
    let x = embed_on_grid(mu, grid)?;
    let y = embed_on_grid(nu, grid)?;
    Ok(x.x_mu.iter().zip(&y.x_mu).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt())
}

/// Exhaustive feasible estimator: over all grid supports of size 1..=s that form
/// a valid configuration under `params`, fits coefficients by least squares and
/// keeps the smallest weighted misfit; ties go to the lexicographically smallest
/// support. Errors when no support reaches misfit ≤ ε.
pub fn brute_force_estimator(
    y: &MeasurementSet,
    grid: &Grid,
    s: usize,
    epsilon: f64,
    params: &ClusterParams,
) -> Result<SpikeSignal> {
    if 2 * y.n > grid.m {
        return Err(Error::GridTooCoarse { two_n: 2 * y.n, m: grid.m });
    }
    let n = y.n;
    let scale = Dd::ONE / Dd::from_usize(2 * n).sqrt();
    let rhs: Vec<Complex<Dd>> = y.y.iter().map(|v| *v * scale).collect();
    let tol = epsilon * (1.0 + 1e-9) + 1e-14;
    let mut best: Option<(f64, SpikeSignal)> = None;
    for k in 1..=s.min(grid.g) {
        let mut support: Vec<usize> = (0..k).collect();
        loop {
            if let Some((res, sig)) = fit_support(&support, grid, params, &rhs, n)? {
                if res <= tol && best.as_ref().is_none_or(|b| res < b.0) {
                    best = Some((res, sig));
                }
            }
            if !next_combination(&mut support, grid.g) {
                break;
            }
        }
    }
    best.map(|b| b.1).ok_or(Error::Infeasible)
}

fn fit_support(
    support: &[usize],
    grid: &Grid,
    params: &ClusterParams,
    rhs: &[Complex<Dd>],
    n: usize,
) -> Result<Option<(f64, SpikeSignal)>> {
    let pts: Vec<f64> = support.iter().map(|&i| grid.points[i]).collect();
    // Endpoints ±MΔ can coincide on the circle.
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if wraparound_distance(pts[i] - pts[j]) < 1e-12 {
                return Ok(None);
            }
        }
    }
    let nodes = NodeVector::new(pts)?;
    if !validate_cluster_config(&nodes, params).is_valid() {
        return Ok(None);
    }
    let u = confluent_rect::<Dd>(&nodes, n);
    let ls = match lstsq(&u, rhs) {
        Ok(ls) => ls,
        Err(Error::Singular) => return Ok(None),
        Err(e) => return Err(e),
    };
    let k = support.len();
    let x = nodes.as_slice();
    let a = (0..k).map(|j| lower(ls.x[j])).collect();
    let b = (0..k)
        .map(|j| Complex64::i() * Complex64::from_polar(1.0, -x[j]) * lower(ls.x[k + j]))
        .collect();
    Ok(Some((ls.residual.to_f64(), SpikeSignal::new(nodes, a, b)?)))
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
