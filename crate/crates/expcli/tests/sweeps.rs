use confsr::model::{signal_l2_norm, validate_cluster_config};
use confsr_exp::config::{ConfigFile, SweepConfig, SweepKind};
use confsr_exp::sweep::{minmax_floor, rayleigh_pair, worst_case_signal};
use confsr_exp::{generate_scenario, loglog_slope, run_sweep, Scenario, ScenarioKind, Status};

fn cfg(kind: SweepKind, set: &[&str]) -> SweepConfig {
    let set: Vec<String> = set.iter().map(|s| s.to_string()).collect();
    SweepConfig::resolve(kind, &ConfigFile::parse("", &set).unwrap()).unwrap()
}

#[test]
fn sigma_records_sandwich_and_revalidate() {
    let recs = run_sweep(SweepKind::Sigma, &cfg(SweepKind::Sigma, &["trials=40", "seed=5", "s=4", "ell=2"]));
    for r in &recs {
        assert_eq!(r.status, Status::Ok);
        assert!(r.srf >= 10.0 * (1.0 - 1e-12) && r.srf <= 1000.0 * (1.0 + 1e-12));
        assert!((r.srf * r.n as f64 * r.delta - 1.0).abs() < 1e-12);
        let sc = Scenario::single(r.s, r.ell, r.delta, r.n, r.seed);
        let (x, p) = generate_scenario(&sc).unwrap();
        assert!(validate_cluster_config(&x, &p).is_valid());
        let sm = r.sigma_min.unwrap();
        if let Some(lc) = r.lower_cert {
            assert!(lc <= sm * (1.0 + 1e-9));
        }
        assert!(sm <= r.upper_cert.unwrap() * (1.0 + 1e-9));
    }
}

#[test]
fn multi_cluster_sweep_runs() {
    let c = cfg(SweepKind::Sigma, &["trials=20", "kind=multi_cluster", "ell1=2", "ell2=3", "s=6"]);
    let recs = run_sweep(SweepKind::Sigma, &c);
    assert!(recs.iter().all(|r| r.status == Status::Ok && r.kind == ScenarioKind::MultiCluster && r.ell == 3));
    for r in &recs {
        assert!(r.sigma_min.unwrap() <= r.upper_cert.unwrap() * (1.0 + 1e-9));
    }
    // The larger cluster governs the decay.
    let slope = loglog_slope(&recs, |r| r.sigma_min).unwrap();
    assert!((slope + 5.0).abs() < 0.3, "slope {slope}");
}

#[test]
fn infeasible_trials_are_flagged() {
    let c = cfg(SweepKind::Sigma, &["trials=6", "s=6", "srf_min=0.02", "srf_max=0.05", "N_max=16"]);
    let recs = run_sweep(SweepKind::Sigma, &c);
    assert!(recs.iter().all(|r| r.status.is_failure() && r.sigma_min.is_none()));
    assert!(recs[0].status.to_string().starts_with("failed: infeasible scenario"));
}

#[test]
fn rayleigh_quotient_tracks_sigma() {
    let recs = run_sweep(SweepKind::Rayleigh, &cfg(SweepKind::Rayleigh, &["trials=60", "seed=2"]));
    let ratios: Vec<f64> = recs.iter().map(|r| r.upper_cert.unwrap() / r.sigma_min.unwrap()).collect();
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(lo >= 1.0 - 1e-12, "{lo}");
    assert!(hi / lo <= 1e2, "{hi}/{lo}");
}

#[test]
fn rayleigh_pair_small_cases() {
    let (q, sm) = rayleigh_pair(2, 0.01, 40).unwrap();
    // The quotient sits a constant factor (about 19.5 for ℓ = 2) above σ_min.
    assert!(q >= sm && q / sm < 30.0);
    let (q3, sm3) = rayleigh_pair(3, 0.01, 40).unwrap();
    assert!(q3 >= sm3 && sm3 < sm);
}

#[test]
fn worst_case_signal_is_unit_and_small_in_data() {
    let sc = Scenario::single(2, 2, 1.0 / (32.0 * 4.0), 32, 0);
    let (x, p) = generate_scenario(&sc).unwrap();
    let c = confsr::bounds::upper_bound_certificate_detail(&x, 32, &p).unwrap();
    let sig = worst_case_signal(&x, &c.u).unwrap();
    assert!((signal_l2_norm(&sig) - 1.0).abs() < 1e-14);
    // The data norm of the normalized signal equals the certificate value.
    let y: Vec<_> = confsr::model::exact_samples(&sig, 32).iter().map(|z| confsr::numeric::lower(*z)).collect();
    let data = confsr::model::weighted_norm(&y);
    assert!((data - c.value).abs() <= 1e-9 * c.value, "{data} vs {}", c.value);
    assert!(worst_case_signal(&x, &c.u[..2]).is_err());
}

#[test]
fn esprit_noiseless_round_trip() {
    let recs = run_sweep(SweepKind::Esprit, &cfg(SweepKind::Esprit, &["trials=30", "epsilon=0", "srf_max=100"]));
    for r in &recs {
        assert_eq!(r.status, Status::Ok);
        assert!(r.e_total.unwrap() <= 1e-6, "srf={} E={:?}", r.srf, r.e_total);
    }
}

#[test]
fn esprit_errors_track_minmax_floor() {
    let recs = run_sweep(SweepKind::Esprit, &cfg(SweepKind::Esprit, &["trials=40", "seed=3"]));
    let mut ratios = Vec::new();
    for r in recs.iter().filter(|r| r.status == Status::Ok) {
        let floor = minmax_floor(r).unwrap();
        ratios.push(r.e_total.unwrap() / floor);
    }
    assert!(ratios.len() >= 30);
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!(ratios[0] >= 1e-2 && ratios[ratios.len() - 1] <= 1e2, "{ratios:?}");
    assert!(ratios[ratios.len() / 2] >= 1.0);
}

#[test]
fn esprit_breakdown_is_flagged() {
    let recs = run_sweep(SweepKind::Esprit, &cfg(SweepKind::Esprit, &["trials=10", "srf_min=30", "srf_max=60"]));
    assert!(recs.iter().all(|r| r.status == Status::Breakdown));
    assert!(loglog_slope(&recs, |r| r.e_total).is_none());
}

