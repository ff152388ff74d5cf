//! Node configurations, grids, spike signals and their Fourier samples.

use std::f64::consts::PI;

use num_complex::{Complex, Complex64};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::complex_pairs;
use crate::numeric::{cabs2, cis, lift, lower, Dd, Real};

/// Reduce an angle into (−π, π].
pub fn normalize_angle(t: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = t.rem_euclid(two_pi);
    if r > PI {
        r -= two_pi;
    }
    r
}

/// `|Arg exp(it)|`, the distance on the circle.
pub fn wraparound_distance(t: f64) -> f64 {
    normalize_angle(t).abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub delta: f64,
    pub rho: f64,
    pub s: usize,
    pub ell: usize,
    pub tau: f64,
}

impl ClusterParams {
    pub fn new(delta: f64, rho: f64, s: usize, ell: usize, tau: f64) -> Result<Self> {
        let p = Self {
            delta,
            rho,
            s,
            ell,
            tau,
        };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if !(self.rho >= 0.0) {
            return bad(format!("rho must be nonnegative, got {}", self.rho));
        }
        if self.ell < 2 || self.ell > self.s {
            return bad(format!("need 2 <= ell <= s, got ell={} s={}", self.ell, self.s));
        }
        let hi = PI / self.delta;
        if !(self.tau >= self.ell as f64 - 1.0 && self.tau <= hi) {
            return bad(format!(
                "need ell-1 <= tau <= pi/delta, got tau={} (bounds {}, {hi})",
                self.tau,
                self.ell - 1
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct NodeVector {
    nodes: Vec<f64>,
}

impl NodeVector {
    /// Canonicalizes every angle into (−π, π] and rejects coincident nodes.
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        if raw.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidNodes("non-finite angle".into()));
        }
        let nodes: Vec<f64> = raw.into_iter().map(normalize_angle).collect();
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                if wraparound_distance(nodes[i] - nodes[j]) == 0.0 {
                    return Err(Error::CoincidentNodes(i, j));
                }
            }
        }
        Ok(Self { nodes })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

impl<'de> Deserialize<'de> for NodeVector {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<f64>::deserialize(de)?;
        NodeVector::new(raw).map_err(serde::de::Error::custom)
    }
}

pub fn minimal_separation(nodes: &NodeVector) -> Result<f64> {
    let x = nodes.as_slice();
    if x.len() < 2 {
        return Err(Error::SeparationUndefined);
    }
    let mut best = f64::INFINITY;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            best = best.min(wraparound_distance(x[i] - x[j]));
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum Violation {
    /// A cluster neighbour closer than Δ.
    BelowSeparation { other: usize, dist: f64 },
    /// A node farther than τΔ but closer than ρ: it fails both the
    /// in-cluster bound (dist ≤ τΔ) and the out-of-cluster gap (dist ≥ ρ).
    Ambiguous { other: usize, dist: f64 },
    /// More than ℓ nodes within τΔ.
    ClusterTooLarge { size: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterReport {
    /// `memberships[j]` lists the indices in x^(j), including j itself.
    pub memberships: Vec<Vec<usize>>,
    /// First violated condition per node, if any.
    pub violations: Vec<Option<Violation>>,
}

impl ClusterReport {
    pub fn is_valid(&self) -> bool {
        self.violations.iter().all(Option::is_none)
    }
}

/// Relative slack absorbing rounding in node coordinates.
const CLUSTER_SLACK: f64 = 1e-9;

pub fn validate_cluster_config(nodes: &NodeVector, params: &ClusterParams) -> ClusterReport {
    let x = nodes.as_slice();
    let lo = params.delta * (1.0 - CLUSTER_SLACK);
    let reach = params.tau * params.delta * (1.0 + CLUSTER_SLACK);
    let gap = params.rho * (1.0 - CLUSTER_SLACK);
    let mut memberships = Vec::with_capacity(x.len());
    let mut violations = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let mut members = vec![j];
        let mut first: Option<Violation> = None;
        for (k, &y) in x.iter().enumerate() {
            if k == j {
                continue;
            }
            let d = wraparound_distance(y - x[j]);
            if d <= reach {
                members.push(k);
                if d < lo && first.is_none() {
                    first = Some(Violation::BelowSeparation { other: k, dist: d });
                }
            } else if d < gap && first.is_none() {
                first = Some(Violation::Ambiguous { other: k, dist: d });
            }
        }
        members.sort_unstable();
        if members.len() > params.ell && first.is_none() {
            first = Some(Violation::ClusterTooLarge { size: members.len() });
        }
        memberships.push(members);
        violations.push(first);
    }
    ClusterReport {
        memberships,
        violations,
    }
}

/// μ = Σ a_j δ_{t_j} + b_j δ′_{t_j}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikeSignal {
    pub nodes: NodeVector,
    #[serde(with = "complex_pairs")]
    pub a: Vec<Complex64>,
    #[serde(with = "complex_pairs")]
    pub b: Vec<Complex64>,
}

impl SpikeSignal {
    pub fn new(nodes: NodeVector, a: Vec<Complex64>, b: Vec<Complex64>) -> Result<Self> {
        let s = nodes.len();
        if a.len() != s || b.len() != s {
            return Err(Error::Dimension(format!(
                "{} nodes but {} a-coefficients and {} b-coefficients",
                s,
                a.len(),
                b.len()
            )));
        }
        Ok(Self { nodes, a, b })
    }

    pub fn s(&self) -> usize {
        self.nodes.len()
    }

    /// Indices whose amplitude pair vanishes (spurious nodes).
    pub fn spurious(&self) -> Vec<usize> {
        (0..self.s())
            .filter(|&j| self.a[j] == Complex64::new(0.0, 0.0) && self.b[j] == Complex64::new(0.0, 0.0))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub delta: f64,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "G")]
    pub g: usize,
    pub points: Vec<f64>,
}

impl Grid {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParams(format!("grid spacing must be positive, got {delta}")));
        }
        let m = (PI / (2.0 * delta)).floor() as usize;
        let points = (0..=2 * m).map(|i| (i as f64 - m as f64) * delta).collect();
        Ok(Self {
            delta,
            m,
            g: 2 * m + 1,
            points,
        })
    }

    /// Zero-based position of `t` on the grid, or the nearest point when off grid.
    pub fn locate(&self, t: f64) -> std::result::Result<usize, f64> {
        let k = (t / self.delta).round();
        let idx = k + self.m as f64;
        let clamped = idx.clamp(0.0, (self.g - 1) as f64) as usize;
        let nearest = self.points[clamped];
        if idx >= 0.0 && idx <= (self.g - 1) as f64 && (t - nearest).abs() <= 1e-12 {
            Ok(clamped)
        } else {
            Err(nearest)
        }
    }
}

/// Samples y_k, k = 0..2N. Values are held in double-double so that exact
/// data stays exact at the resolutions the recovery kernels work at.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet {
    pub n: usize,
    pub epsilon: f64,
    pub y: Vec<Complex<Dd>>,
}

impl MeasurementSet {
    pub fn new(n: usize, epsilon: f64, y: Vec<Complex<Dd>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("N must be at least 1".into()));
        }
        if y.len() != 2 * n + 1 {
            return Err(Error::Dimension(format!("{} samples for N={n}", y.len())));
        }
        Ok(Self { n, epsilon, y })
    }

    pub fn from_f64(n: usize, epsilon: f64, y: &[Complex64]) -> Result<Self> {
        Self::new(n, epsilon, y.iter().map(|z| lift(*z)).collect())
    }

    pub fn y_f64(&self) -> Vec<Complex64> {
        self.y.iter().map(|z| lower(*z)).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct MeasurementWire {
    #[serde(rename = "N")]
    n: usize,
    epsilon: f64,
    #[serde(with = "complex_pairs")]
    y: Vec<Complex64>,
}

impl Serialize for MeasurementSet {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        MeasurementWire {
            n: self.n,
            epsilon: self.epsilon,
            y: self.y_f64(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for MeasurementSet {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let w = MeasurementWire::deserialize(de)?;
        MeasurementSet::from_f64(w.n, w.epsilon, &w.y).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    None,
    /// Per-sample uniform draws rescaled to weighted norm exactly ε.
    BoundedUniform { epsilon: f64 },
    /// Complex Gaussian with per-component deviation σ, shrunk to weighted norm ε if larger.
    ComplexGaussian { sigma: f64, epsilon: f64 },
}

impl NoiseSpec {
    pub fn epsilon(&self) -> f64 {
        match *self {
            NoiseSpec::None => 0.0,
            NoiseSpec::BoundedUniform { epsilon } | NoiseSpec::ComplexGaussian { epsilon, .. } => epsilon,
        }
    }
}

/// μ̂(ω) = Σ_j (a_j − iω b_j) e^{iωt_j}.
pub fn fourier_coeff(signal: &SpikeSignal, omega: f64) -> Complex64 {
    lower(fourier_coeff_in::<f64>(signal, f64::from_f64(omega)))
}

pub fn fourier_coeff_in<R: Real>(signal: &SpikeSignal, omega: R) -> Complex<R> {
    let mut acc = Complex::new(R::zero(), R::zero());
    for ((t, a), b) in signal.nodes.as_slice().iter().zip(&signal.a).zip(&signal.b) {
        let e = cis(omega * R::from_f64(*t));
        let coef = lift::<R>(*a) - Complex::new(R::zero(), omega) * lift::<R>(*b);
        acc += coef * e;
    }
    acc
}

/// Exact samples μ̂(k), k = 0..2N, in double-double.
pub fn exact_samples(signal: &SpikeSignal, n: usize) -> Vec<Complex<Dd>> {
    (0..=2 * n).map(|k| fourier_coeff_in(signal, Dd::from_f64(k as f64))).collect()
}

pub fn sample_measurements<G: Rng + ?Sized>(
    signal: &SpikeSignal,
    n: usize,
    noise: &NoiseSpec,
    rng: &mut G,
) -> Result<MeasurementSet> {
    if n == 0 {
        return Err(Error::Precondition("N must be at least 1".into()));
    }
    let mut y = exact_samples(signal, n);
    let eta = draw_noise(2 * n + 1, noise, rng)?;
    for (yk, e) in y.iter_mut().zip(&eta) {
        *yk += lift::<Dd>(*e);
    }
    MeasurementSet::new(n, noise.epsilon(), y)
}

fn draw_noise<G: Rng + ?Sized>(len: usize, noise: &NoiseSpec, rng: &mut G) -> Result<Vec<Complex64>> {
    let zero = vec![Complex64::new(0.0, 0.0); len];
    match *noise {
        NoiseSpec::None => Ok(zero),
        NoiseSpec::BoundedUniform { epsilon } => {
            check_level(epsilon)?;
            if epsilon == 0.0 {
                return Ok(zero);
            }
            let raw: Vec<Complex64> = (0..len)
                .map(|_| Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
                .collect();
            Ok(rescale(raw, epsilon, true))
        }
        NoiseSpec::ComplexGaussian { sigma, epsilon } => {
            check_level(epsilon)?;
            check_level(sigma)?;
            let raw: Vec<Complex64> = (0..len)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    Complex64::new(sigma * re, sigma * im)
                })
                .collect();
            Ok(rescale(raw, epsilon, false))
        }
    }
}

fn check_level(x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("noise level must be a nonnegative finite number, got {x}")))
    }
}

/// Scale to weighted norm `eps` (always when `exact`, otherwise only to shrink).
/// The target is approached from below so rounding never overshoots ε.
fn rescale(mut v: Vec<Complex64>, eps: f64, exact: bool) -> Vec<Complex64> {
    let w = weighted_norm(&v);
    if w == 0.0 || (!exact && w <= eps) {
        return v;
    }
    let mut k = eps / w;
    for _ in 0..4 {
        let scaled: Vec<Complex64> = v.iter().map(|z| z * k).collect();
        if weighted_norm(&scaled) <= eps {
            break;
        }
        k *= 1.0 - f64::EPSILON;
    }
    for z in v.iter_mut() {
        *z *= k;
    }
    v
}

/// ((1/2N)·Σ_{k=0}^{2N} |y_k|²)^{1/2} for a vector of length 2N+1.
pub fn weighted_norm(y: &[Complex64]) -> f64 {
    weighted_norm_in(y)
}

pub fn weighted_norm_in<R: Real>(y: &[Complex<R>]) -> R {
    assert!(y.len() >= 3 && y.len() % 2 == 1, "weighted norm needs 2N+1 samples with N >= 1");
    let two_n = R::from_usize(y.len() - 1);
    (y.iter().fold(R::zero(), |s, z| s + cabs2(*z)) / two_n).sqrt()
}

/// (Σ |a_j|² + |b_j|²)^{1/2}.
pub fn signal_l2_norm(signal: &SpikeSignal) -> f64 {
    signal
        .a
        .iter()
        .chain(&signal.b)
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraparound_examples() {
        assert!((wraparound_distance(0.2) - 0.2).abs() < 1e-15);
        assert!(wraparound_distance(2.0 * PI).abs() < 1e-15);
        assert!((wraparound_distance(PI + 0.1) - (PI - 0.1)).abs() < 1e-14);
        assert_eq!(normalize_angle(-PI), PI);
    }

    #[test]
    fn grid_size() {
        let g = Grid::new(0.5).unwrap();
        assert_eq!(g.m, 3);
        assert_eq!(g.g, 7);
        assert!(g.points.iter().all(|p| p.abs() <= PI / 2.0));
        assert_eq!(g.locate(0.5), Ok(4));
        assert!(g.locate(0.3).is_err());
    }

    #[test]
    fn params_invariants() {
        assert!(ClusterParams::new(0.1, 1.0, 3, 2, 1.0).is_ok());
        assert!(ClusterParams::new(0.1, 1.0, 3, 1, 1.0).is_err());
        assert!(ClusterParams::new(0.1, 1.0, 3, 4, 3.0).is_err());
        assert!(ClusterParams::new(0.1, 1.0, 3, 3, 1.5).is_err());
        assert!(ClusterParams::new(0.1, -1.0, 3, 2, 1.0).is_err());
        assert!(ClusterParams::new(1.0, 1.0, 3, 2, 4.0).is_err());
    }
}
