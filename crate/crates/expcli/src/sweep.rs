//! Seeded Monte-Carlo sweeps. Trials run in parallel; output stays in trial order.

use std::f64::consts::PI;

use confsr::bounds::{certify, sigma_min_dd, u_vector, upper_bound_certificate_detail};
use confsr::minmax::minmax_lower_estimate;
use confsr::model::{sample_measurements, signal_l2_norm, NodeVector, NoiseSpec, SpikeSignal};
use confsr::numeric::{vnorm, Dd, Real};
use confsr::recovery::{esprit, match_and_error};
use confsr::vandermonde::{phi_unnormalized, sigma_min};
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{SweepConfig, SweepKind};
use crate::error::{ExpError, Result};
use crate::record::{ExperimentRecord, Status};
use crate::scenario::{generate_scenario, Scenario, ScenarioKind};

/// Seed of trial `index`: the first word of stream `index` of the master generator.
pub fn trial_seed(master: u64, index: usize) -> u64 {
    let mut g = ChaCha8Rng::seed_from_u64(master);
    g.set_stream(index as u64);
    g.next_u64()
}

fn log_uniform<G: Rng>(g: &mut G, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    g.random_range(lo.ln()..hi.ln()).exp()
}

struct Draw {
    scenario: Scenario,
    rng: ChaCha8Rng,
}

fn draw(cfg: &SweepConfig, index: usize) -> Draw {
    let seed = trial_seed(cfg.seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (log_uniform(&mut rng, cfg.n_min as f64, cfg.n_max as f64).round() as usize).clamp(cfg.n_min, cfg.n_max);
    let srf = log_uniform(&mut rng, cfg.srf_min, cfg.srf_max);
    let delta = 1.0 / (n as f64 * srf);
    let scenario = match cfg.kind {
        ScenarioKind::SingleCluster => Scenario::single(cfg.s, cfg.ell, delta, n, seed),
        ScenarioKind::MultiCluster => Scenario::multi(
            cfg.s,
            cfg.ell1.unwrap_or(cfg.ell),
            cfg.ell2.unwrap_or(cfg.ell),
            delta,
            n,
            seed,
        ),
    };
    Draw { scenario, rng }
}

fn blank(index: usize, sc: &Scenario, epsilon: f64) -> ExperimentRecord {
    ExperimentRecord {
        trial: index,
        seed: sc.seed,
        kind: sc.kind,
        s: sc.s,
        ell: sc.ell,
        delta: sc.delta,
        n: sc.n,
        srf: sc.srf(),
        sigma_min: None,
        lower_cert: None,
        upper_cert: None,
        epsilon,
        e_xi: None,
        e_a: None,
        e_b: None,
        e_total: None,
        status: Status::Ok,
    }
}

pub fn run_sweep(kind: SweepKind, cfg: &SweepConfig) -> Vec<ExperimentRecord> {
    (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let Draw { scenario, mut rng } = draw(cfg, i);
            let mut rec = blank(i, &scenario, cfg.epsilon);
            let out = match kind {
                SweepKind::Sigma => sigma_trial(&scenario, &mut rec),
                SweepKind::Rayleigh => rayleigh_trial(&scenario, &mut rec),
                SweepKind::Esprit => esprit_trial(&scenario, cfg, &mut rng, &mut rec),
            };
            if let Err(e) = out {
                rec.status = Status::Failed(e.to_string());
            }
            rec
        })
        .collect()
}

/// σ_min(U_N) with both certificates (lower certificate at Ω = N).
pub fn run_sigma_sweep(cfg: &SweepConfig) -> Vec<ExperimentRecord> {
    run_sweep(SweepKind::Sigma, cfg)
}

/// σ_min(Φ_M) and the Rayleigh quotient of u, M = 2N, ω_j = jΔ/2π.
pub fn run_rayleigh_sweep(cfg: &SweepConfig) -> Vec<ExperimentRecord> {
    run_sweep(SweepKind::Rayleigh, cfg)
}

/// ESPRIT on the worst-case signal built from u, with bounded noise of level ε.
pub fn run_esprit_sweep(cfg: &SweepConfig) -> Vec<ExperimentRecord> {
    run_sweep(SweepKind::Esprit, cfg)
}

fn sigma_trial(sc: &Scenario, rec: &mut ExperimentRecord) -> Result<()> {
    let (x, params) = generate_scenario(sc)?;
    let r = certify(&x, &params, sc.n as f64, sc.n)?;
    rec.sigma_min = Some(r.sigma_min);
    rec.lower_cert = r.lower_certificate;
    rec.upper_cert = r.upper_certificate;
    Ok(())
}

fn rayleigh_trial(sc: &Scenario, rec: &mut ExperimentRecord) -> Result<()> {
    generate_scenario(sc)?;
    let (q, sm) = rayleigh_pair(sc.ell, sc.delta, 2 * sc.n)?;
    rec.sigma_min = Some(sm);
    rec.upper_cert = Some(q);
    Ok(())
}

/// (‖Φ_M u‖/‖u‖, σ_min(Φ_M)) for the equispaced cluster ω_j = jΔ/2π, j < ℓ.
pub fn rayleigh_pair(ell: usize, delta: f64, m: usize) -> Result<(f64, f64)> {
    let two_pi = Dd::PI * Dd::from_f64(2.0);
    let dt = Dd::from_f64(delta) / two_pi;
    let tau: Vec<Dd> = (0..ell).map(Dd::from_usize).collect();
    let omega: Vec<Dd> = tau.iter().map(|t| *t * dt).collect();
    let u = u_vector(&tau, dt * Dd::from_usize(m), m, ell)?;
    let phi = phi_unnormalized(&omega, m);
    let q = vnorm(&phi.matvec(&u)) / vnorm(&u);
    Ok((q.to_f64(), sigma_min(&phi)?.to_f64()))
}

/// The spike signal whose coefficient vector is u, normalized to unit ℓ² norm.
///
/// With Φ̃_{2N} = E₁U_N E₂, the U_N weights are w = E₂u = (a, −i z∘b), z = e^{iξ}.
pub fn worst_case_signal(x: &NodeVector, u: &[Complex64]) -> Result<SpikeSignal> {
    let s = x.len();
    if u.len() != 2 * s {
        return Err(confsr::Error::Dimension(format!("u has {} entries for {s} nodes", u.len())).into());
    }
    let a: Vec<Complex64> = u[..s].to_vec();
    let b: Vec<Complex64> = x
        .as_slice()
        .iter()
        .zip(&u[s..])
        .map(|(t, wb)| Complex64::i() * Complex64::from_polar(1.0, -t) * (-wb))
        .collect();
    let sig = SpikeSignal::new(x.clone(), a, b)?;
    let norm = signal_l2_norm(&sig);
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(ExpError::Infeasible(format!("worst-case signal has norm {norm}")));
    }
    let scale = |v: &[Complex64]| v.iter().map(|z| z / norm).collect();
    Ok(SpikeSignal::new(x.clone(), scale(&sig.a), scale(&sig.b))?)
}

fn esprit_trial(sc: &Scenario, cfg: &SweepConfig, rng: &mut ChaCha8Rng, rec: &mut ExperimentRecord) -> Result<()> {
    let (x, params) = generate_scenario(sc)?;
    let cert = upper_bound_certificate_detail(&x, sc.n, &params)?;
    rec.upper_cert = Some(cert.value);
    rec.sigma_min = Some(sigma_min_dd(&x, sc.n)?);
    let signal = worst_case_signal(&x, &cert.u)?;
    let noise = if cfg.epsilon > 0.0 {
        NoiseSpec::BoundedUniform { epsilon: cfg.epsilon }
    } else {
        NoiseSpec::None
    };
    let y = sample_measurements(&signal, sc.n, &noise, rng)?;
    let Ok(est) = esprit(&y, sc.s) else {
        rec.status = Status::Breakdown;
        return Ok(());
    };
    let m = match_and_error(&signal, &est.signal)?;
    let finite = [m.e_xi, m.e_a, m.e_b, m.e_total].iter().all(|v| v.is_finite());
    if finite {
        rec.e_xi = Some(m.e_xi);
        rec.e_a = Some(m.e_a);
        rec.e_b = Some(m.e_b);
        rec.e_total = Some(m.e_total);
    }
    if !finite || m.e_total >= cfg.breakdown {
        rec.status = Status::Breakdown;
    }
    Ok(())
}

/// ε/(2σ_min(U_N(t))) for t the equispaced 2ℓ-node cluster at the record's Δ: the
/// min-max floor for recovering an ℓ-node cluster.
pub fn minmax_floor(rec: &ExperimentRecord) -> Result<f64> {
    let t = NodeVector::new((0..2 * rec.ell).map(|k| -PI / 2.0 + k as f64 * rec.delta).collect())?;
    Ok(minmax_lower_estimate(&t, rec.n, rec.epsilon)?)
}
