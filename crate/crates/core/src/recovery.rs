//! ESPRIT for nodes of multiplicity two, least-squares amplitudes and error metrics.

use num_complex::{Complex, Complex64};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, lstsq, pinv, svd};
use crate::matrix::complex_pairs;
use crate::model::{normalize_angle, wraparound_distance, Grid, MeasurementSet, NodeVector, SpikeSignal};
use crate::numeric::{cabs, carg, lower, Dd, Real};
use crate::vandermonde::{confluent_rect, hankel_rect};

/// Relative singular-value floor for the numerical rank of noiseless data.
const RANK_RTOL: f64 = 1e-28;
/// Smallest admissible singular value of W↓.
const PINV_BREAKDOWN: f64 = 1e-13;
/// Node pairs closer than this are a degenerate estimate.
const NODE_COINCIDENCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecoveredSignal {
    #[serde(flatten)]
    pub signal: SpikeSignal,
    pub residual: f64,
    #[serde(serialize_with = "complex_pairs::serialize")]
    pub eigenvalues_raw: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EspritOutput {
    pub nodes: NodeVector,
    /// Spectrum of Ψ in the torus convention, where a node ξ sits at −e^{iξ}.
    pub eigenvalues_raw: Vec<Complex64>,
    /// Numerical rank used for the signal subspace.
    pub rank: usize,
}

/// Recovers s nodes from y_k, k = 0..2N, using the (N+1)×(N+1) Hankel matrix of
/// the torus moments m_k = (−1)^k y_k.
pub fn esprit_nodes(y: &MeasurementSet, s: usize) -> Result<EspritOutput> {
    if s == 0 {
        return Err(Error::Precondition("s must be positive".into()));
    }
    let n = y.n;
    if n < 2 * s {
        return Err(Error::InsufficientMoments {
            need: 4 * s + 1,
            got: y.y.len(),
        });
    }
    let moments: Vec<Complex<Dd>> = y
        .y
        .iter()
        .enumerate()
        .map(|(k, v)| if k % 2 == 0 { *v } else { -*v })
        .collect();
    let h = hankel_rect(&moments, n + 1, n + 1)?;
    let d = svd(&h)?;
    let smax = d.sigma[0];
    if smax == Dd::ZERO {
        return Err(Error::ModelOrderMismatch { rank: 0, s });
    }
    let rank = if y.epsilon == 0.0 {
        let cut = smax * Dd::from_f64(RANK_RTOL);
        d.sigma.iter().take(2 * s).filter(|v| **v > cut).count()
    } else {
        2 * s
    };
    if rank < s {
        return Err(Error::ModelOrderMismatch { rank, s });
    }
    let cols: Vec<usize> = (0..rank).collect();
    let w = d.u.select_cols(&cols);
    let down = w.select_rows(&(0..n).collect::<Vec<_>>());
    let up = w.select_rows(&(1..=n).collect::<Vec<_>>());
    let sd = svd(&down)?;
    let smin_down = sd.sigma[rank - 1].to_f64();
    if smin_down < PINV_BREAKDOWN {
        return Err(Error::PinvBreakdown(smin_down));
    }
    let psi = pinv(&down, Dd::from_f64(PINV_BREAKDOWN))?.matmul(&up);
    let eig = eigenvalues(&psi)?;
    let groups = pair_eigenvalues(&eig, s);
    let mut angles = Vec::with_capacity(s);
    for g in &groups {
        let mean = g.iter().fold(Complex::new(Dd::ZERO, Dd::ZERO), |acc, &i| acc + eig[i])
            / Complex::new(Dd::from_usize(g.len()), Dd::ZERO);
        if cabs(mean) == Dd::ZERO {
            return Err(Error::DegenerateNodes);
        }
        angles.push(normalize_angle(carg(-mean).to_f64()));
    }
    let nodes = NodeVector::new(angles).map_err(|_| Error::DegenerateNodes)?;
    Ok(EspritOutput {
        nodes,
        eigenvalues_raw: eig.iter().map(|z| lower(*z)).collect(),
        rank,
    })
}

/// Greedy grouping of eigenvalues into s groups of size at most two by repeatedly
/// merging the closest pair of singletons.
fn pair_eigenvalues(eig: &[Complex<Dd>], s: usize) -> Vec<Vec<usize>> {
    let r = eig.len();
    let mut groups: Vec<Vec<usize>> = (0..r).map(|i| vec![i]).collect();
    for _ in 0..r.saturating_sub(s) {
        let mut best: Option<(usize, usize, Dd)> = None;
        for i in 0..groups.len() {
            if groups[i].len() != 1 {
                continue;
            }
            for j in i + 1..groups.len() {
                if groups[j].len() != 1 {
                    continue;
                }
                let d = cabs(eig[groups[i][0]] - eig[groups[j][0]]);
                if best.is_none_or(|b| d < b.2) {
                    best = Some((i, j, d));
                }
            }
        }
        let Some((i, j, _)) = best else { break };
        let moved = groups.remove(j);
        groups[i].extend(moved);
    }
    groups
}

/// Least-squares amplitudes for fixed nodes: minimizes ‖U_N(ξ)w − y/√(2N)‖ with
/// w = (a, −i·z∘b). Returns (a, b, weighted misfit).
pub fn fit_coefficients(nodes: &NodeVector, y: &MeasurementSet) -> Result<(Vec<Complex64>, Vec<Complex64>, f64)> {
    let x = nodes.as_slice();
    let s = x.len();
    for i in 0..s {
        for j in i + 1..s {
            if wraparound_distance(x[i] - x[j]) < NODE_COINCIDENCE {
                return Err(Error::DegenerateNodes);
            }
        }
    }
    let n = y.n;
    let u = confluent_rect::<Dd>(nodes, n);
    let scale = Dd::ONE / Dd::from_usize(2 * n).sqrt();
    let rhs: Vec<Complex<Dd>> = y.y.iter().map(|v| *v * scale).collect();
    let ls = lstsq(&u, &rhs).map_err(|e| match e {
        Error::Singular => Error::DegenerateNodes,
        other => other,
    })?;
    let mut a = Vec::with_capacity(s);
    let mut b = Vec::with_capacity(s);
    for j in 0..s {
        a.push(lower(ls.x[j]));
        let z = Complex64::from_polar(1.0, x[j]);
        b.push(Complex64::i() * lower(ls.x[s + j]) * z.conj());
    }
    Ok((a, b, ls.residual.to_f64()))
}

/// ESPRIT nodes followed by the amplitude fit.
pub fn esprit(y: &MeasurementSet, s: usize) -> Result<RecoveredSignal> {
    let out = esprit_nodes(y, s)?;
    let (a, b, residual) = fit_coefficients(&out.nodes, y)?;
    Ok(RecoveredSignal {
        signal: SpikeSignal::new(out.nodes, a, b)?,
        residual,
        eigenvalues_raw: out.eigenvalues_raw,
    })
}

/// Moves every node to its nearest grid point.
pub fn snap_to_grid(signal: &SpikeSignal, grid: &Grid) -> Result<SpikeSignal> {
    let snapped = signal
        .nodes
        .as_slice()
        .iter()
        .map(|&t| match grid.locate(t) {
            Ok(i) => grid.points[i],
            Err(p) => p,
        })
        .collect();
    SpikeSignal::new(NodeVector::new(snapped)?, signal.a.clone(), signal.b.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorMetrics {
    pub e_xi: f64,
    pub e_a: f64,
    pub e_b: f64,
    pub e_total: f64,
}

/// Errors under the node permutation minimizing the summed squared wraparound distance.
pub fn match_and_error(truth: &SpikeSignal, estimate: &SpikeSignal) -> Result<ErrorMetrics> {
    let s = truth.s();
    if estimate.s() != s {
        return Err(Error::SizeMismatch {
            truth: s,
            estimate: estimate.s(),
        });
    }
    let t = truth.nodes.as_slice();
    let e = estimate.nodes.as_slice();
    let cost: Vec<Vec<f64>> = (0..s)
        .map(|i| (0..s).map(|j| wraparound_distance(t[i] - e[j]).powi(2)).collect())
        .collect();
    let perm = if s <= 8 { best_permutation(&cost) } else { hungarian(&cost) };
    let mut xi2 = 0.0;
    let mut a2 = 0.0;
    let mut b2 = 0.0;
    for (i, &j) in perm.iter().enumerate() {
        xi2 += cost[i][j];
        a2 += (truth.a[i] - estimate.a[j]).norm_sqr();
        b2 += (truth.b[i] - estimate.b[j]).norm_sqr();
    }
    Ok(ErrorMetrics {
        e_xi: xi2.sqrt(),
        e_a: a2.sqrt(),
        e_b: b2.sqrt(),
        e_total: (a2 + b2).sqrt(),
    })
}

/// Exhaustive search; ties keep the lexicographically first permutation.
fn best_permutation(cost: &[Vec<f64>]) -> Vec<usize> {
    let s = cost.len();
    let mut perm: Vec<usize> = (0..s).collect();
    let mut best = perm.clone();
    let mut best_cost = f64::INFINITY;
    loop {
        let c: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        if c < best_cost {
            best_cost = c;
            best = perm.clone();
        }
        if !next_permutation(&mut perm) {
            return best;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// O(n³) Hungarian algorithm with potentials; returns row → column.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=n {
        out[p[j] - 1] = j - 1;
    }
    out
}
