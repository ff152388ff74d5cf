mod common;

use common::*;
use confsr::bounds::*;
use confsr::model::{validate_cluster_config, wraparound_distance, ClusterParams, NodeVector, SpikeSignal};
use confsr::numeric::Dd;
use confsr::vandermonde::{confluent_rect, phi_unnormalized, sigma_min};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use std::f64::consts::PI;

fn ols_slope(pts: &[(f64, f64)]) -> f64 {
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[test]
fn constants_by_hand() {
    assert!((kappa(1) - 1.0 / (10.0 * PI)).abs() < 1e-17);
    assert!((kappa(2) - 1.0 / (100.0 * PI)).abs() < 1e-17);
    let kt = PI.powi(-2) / 2.0 * kappa(2);
    assert!((kappa_tilde(2) - kt).abs() < 1e-18);
    assert!((c1(2) - kt / 32f64.sqrt()).abs() < 1e-18);
    for s in 1..6 {
        assert!(theoretical_lower_bound(s + 1, 2, 0.01, 10) < theoretical_lower_bound(s, 2, 0.01, 10));
    }
}

#[test]
fn decimation_single_node_is_vacuous() {
    let x = NodeVector::new(vec![1.0]).unwrap();
    let p = ClusterParams {
        delta: 0.1,
        rho: PI,
        s: 1,
        ell: 1,
        tau: 1.0,
    };
    let d = decimation_search(&x, &p, 12.0, 12);
    assert!(d.admissible);
    assert!(d.lambda >= 6.0 && d.lambda <= 12.0);
}

#[test]
fn decimation_pair_in_hypothesis_region() {
    let delta = 0.01;
    let x = cluster(0.0, 2, delta);
    let p = single_cluster_params(delta, 2);
    let (omega, n) = (8.0, 17);
    assert!(in_hypothesis_region(&p, omega, n));
    let d = decimation_search(&x, &p, omega, n);
    assert!(d.admissible && d.in_hypothesis_region);
    let lam = d.m as f64 * omega / n as f64;
    let brute = wraparound_distance(lam * delta);
    assert!((brute - d.intra_sep).abs() < 1e-14);
    assert!(d.intra_sep >= delta * omega / 4.0);
}

#[test]
fn decimation_recheck_by_brute_force() {
    let mut g = rng(11);
    for _ in 0..50 {
        let s = g.random_range(2..5);
        let x = spread_nodes(&mut g, s, 0.3);
        let p = ClusterParams {
            delta: 0.3,
            rho: 0.3,
            s,
            ell: 1,
            tau: 0.5,
        };
        let n = g.random_range(4..30);
        let omega = n as f64;
        let d = decimation_search(&x, &p, omega, n);
        assert!(d.m <= 2 * n);
        let lam = d.m as f64 * omega / n as f64;
        let mut inter = f64::INFINITY;
        for i in 0..s {
            for j in 0..s {
                if i != j {
                    inter = inter.min(wraparound_distance(lam * (x.as_slice()[i] - x.as_slice()[j])));
                }
            }
        }
        assert!((inter - d.inter_sep).abs() < 1e-12);
        if d.admissible {
            assert!(d.inter_sep >= PI / (2.0 * (s * s) as f64) * (1.0 - 1e-12));
        }
    }
}

#[test]
fn lower_certificate_single_node_ratio() {
    let mut g = rng(12);
    for _ in 0..30 {
        let x = NodeVector::new(vec![g.random_range(-3.0..3.0)]).unwrap();
        let p = ClusterParams {
            delta: 0.1,
            rho: PI,
            s: 1,
            ell: 1,
            tau: 1.0,
        };
        let n = g.random_range(2..40);
        let lc = certified_lower_bound(&x, &p, n as f64, n).unwrap();
        let sm = sigma_min_dd(&x, n).unwrap();
        assert!(lc <= sm * (1.0 + 1e-9));
        assert!(lc / sm >= 0.1, "ratio {}", lc / sm);
    }
}

#[test]
fn lower_certificate_below_sigma_for_pair_cluster() {
    let mut g = rng(13);
    let mut checked = 0;
    for _ in 0..100 {
        let n = g.random_range(8..64);
        let srf = 10f64.powf(g.random_range(0.5..2.5));
        let delta = 1.0 / (n as f64 * srf);
        let x = cluster(g.random_range(-3.0..3.0), 2, delta);
        let p = single_cluster_params(delta, 2);
        let sm = sigma_min_dd(&x, n).unwrap();
        match certified_lower_bound(&x, &p, n as f64, n) {
            Ok(lc) => {
                assert!(lc <= sm * (1.0 + 1e-9), "{lc} > {sm}");
                checked += 1;
            }
            Err(e) => assert_eq!(e, confsr::Error::NoCertificate),
        }
    }
    assert!(checked > 50);
}

#[test]
fn lower_certificate_vs_theoretical_bound_in_region() {
    // s = 2 pair with Ω and N inside the hypothesis region.
    for delta in [0.02, 0.01, 0.005] {
        let x = cluster(0.4, 2, delta);
        let p = single_cluster_params(delta, 2);
        let omega = 8.0;
        for n in [17, 24, 40] {
            assert!(in_hypothesis_region(&p, omega, n));
            let c = certified_lower_bound_detail(&x, &p, omega, n).unwrap();
            let th = theoretical_lower_bound_bandlimited(2, 2, delta, omega);
            assert!(c.value >= th, "delta={delta} N={n}: {} < {th}", c.value);
        }
    }
}

#[test]
fn fd_trivial_and_pair() {
    let fd = fd_coefficients(&[0.0], 0.7).unwrap();
    assert_eq!(fd.a, vec![0.0]);
    assert!((fd.b[0] - 1.0).abs() < 1e-15);
    let delta = 1e-3;
    let fd = fd_coefficients(&[0.0, 1.0], -delta).unwrap();
    assert!(fd.moment_residual() <= 1e-9);
    // τ = (0, 1): y = 6h⁻³·(2, −2, 1, 1), so A = (12, −12)h⁻³ and B = (6, 6)h⁻².
    let h: f64 = -delta;
    assert!(rel_close(fd.a[0], 12.0 / h.powi(3), 1e-12));
    assert!(rel_close(fd.a[1], -12.0 / h.powi(3), 1e-12));
    assert!(rel_close(fd.b[0], 6.0 / h.powi(2), 1e-12));
    assert!(rel_close(fd.b[1], 6.0 / h.powi(2), 1e-12));
    assert!(fd_coefficients(&[0.0, 1.0, 1.0], 0.1).is_err());
    assert!(fd_coefficients(&[0.5, 1.0], 0.1).is_err());
    assert!(fd_coefficients(&[0.0, 1.0], 0.0).is_err());
}

#[test]
fn fd_moment_residuals() {
    let mut g = rng(14);
    for ell in 1..=3 {
        for random in [false, true] {
            for _ in 0..20 {
                let mut tv: Vec<f64> = (0..ell).map(|k| k as f64).collect();
                if random {
                    for t in tv.iter_mut().skip(1) {
                        *t += g.random_range(-0.4..0.4);
                    }
                }
                let h = -10f64.powf(g.random_range(-4.0..-1.0));
                let fd = fd_coefficients(&tv, h).unwrap();
                assert!(fd.moment_residual() <= 1e-9, "ell={ell} {:?}", fd.moment_residual());
                let fdd = fd_coefficients(&tv.iter().map(|t| Dd::from_f64(*t)).collect::<Vec<_>>(), Dd::from_f64(h)).unwrap();
                assert!(fdd.moment_residual().to_f64() <= 1e-25);
            }
        }
    }
}

#[test]
fn fd_coefficient_sum_bounds() {
    let mut g = rng(15);
    for _ in 0..200 {
        let ell = g.random_range(2..4);
        let tau = if g.random_bool(0.5) { ell as f64 - 1.0 } else { 2.0 * ell as f64 };
        let mut tv: Vec<f64> = vec![0.0];
        while tv.len() < ell - 1 {
            let t = g.random_range(0.5..tau - 0.5);
            if tv.iter().all(|u| (u - t).abs() > 0.3) {
                tv.push(t);
            }
        }
        tv.push(tau);
        tv.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let m = g.random_range(8..200);
        let alpha = g.random_range(0.01..0.5);
        let dt = alpha / m as f64;
        let fd = fd_coefficients(&tv, -dt).unwrap();
        let c = UpperConstants::new(ell, tau);
        let (ba, bb) = c.coefficient_sum_bounds(ell, dt);
        let sa: f64 = fd.a.iter().map(|x| x.abs()).sum();
        let sb: f64 = fd.b.iter().map(|x| x.abs()).sum();
        assert!(sa <= ba * (1.0 + 1e-9), "ΣA {sa} > {ba} for {tv:?}");
        assert!(sb <= bb * (1.0 + 1e-9), "ΣB {sb} > {bb} for {tv:?}");
    }
}

#[test]
fn u_vector_padding_and_norm_bound() {
    let u = u_vector(&[0.0, 1.0], 0.2, 40, 4).unwrap();
    assert_eq!(u.len(), 8);
    for j in [2, 3, 6, 7] {
        assert_eq!(u[j], Complex64::new(0.0, 0.0));
    }
    assert!(u_vector(&[0.0, 1.0, 2.0], 0.2, 40, 2).is_err());

    let mut g = rng(16);
    for ell in [2usize, 3] {
        for tau in [ell as f64 - 1.0, 2.0 * ell as f64] {
            for _ in 0..50 {
                let mut tv: Vec<f64> = (0..ell - 1).map(|k| k as f64 * tau / (ell - 1) as f64).collect();
                for t in tv.iter_mut().skip(1) {
                    *t += g.random_range(-0.2..0.2) * tau / ell as f64;
                }
                tv.push(tau);
                let m = g.random_range(4..128);
                let alpha = g.random_range(1e-3..0.9);
                let u = u_vector(&tv, alpha, m, ell).unwrap();
                let un = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                let c3 = UpperConstants::new(ell, tau).c3_tilde;
                let want = factorial(2 * ell - 1) / (4.0 * (ell as f64).powi(3) * tau.powi(2 * ell as i32 - 1));
                assert!((c3 - want).abs() < 1e-15 * want);
                assert!(un >= c3, "‖u‖ = {un} < {c3}");
            }
        }
    }
}

#[test]
fn rayleigh_quotient_dominates_sigma_min() {
    let mut g = rng(17);
    for _ in 0..50 {
        let ell = g.random_range(1..4);
        let tv: Vec<f64> = (0..ell).map(|k| k as f64).collect();
        let m = g.random_range(2 * ell..60);
        let alpha = g.random_range(0.01..0.5);
        let omega: Vec<Dd> = tv.iter().map(|t| Dd::from_f64(t * alpha / m as f64)).collect();
        let tvd: Vec<Dd> = tv.iter().map(|t| Dd::from_f64(*t)).collect();
        let u = u_vector(&tvd, Dd::from_f64(alpha), m, ell).unwrap();
        let phi = phi_unnormalized(&omega, m);
        let q = confsr::numeric::vnorm(&phi.matvec(&u)) / confsr::numeric::vnorm(&u);
        let sm = sigma_min(&phi).unwrap();
        assert!(q >= sm * Dd::from_f64(1.0 - 1e-12));
    }
}

#[test]
fn dirichlet_values_and_norms() {
    assert_eq!(dirichlet(9, 0.0, 0), Complex64::new(10.0, 0.0));
    for m in [5usize, 16] {
        let q0 = trapezoid_l2(|w| dirichlet(m, w, 0), 64 * m);
        assert!(rel_close(q0, ((m + 1) as f64).sqrt(), 1e-12));
        for q in 1..=3u32 {
            let num = trapezoid_l2(|w| dirichlet(m, w, q), 64 * m);
            assert!(rel_close(num, dirichlet_l2_norm(m, q), 1e-10));
            let bern = (2.0 * PI * m as f64).powi(q as i32) * ((m + 1) as f64).sqrt();
            assert!(num <= bern);
        }
    }
}

fn torus_signal(omega: Vec<f64>, a: Vec<Complex64>, b: Vec<Complex64>) -> SpikeSignal {
    // Torus positions are stored as plain reals in [0, 1).
    SpikeSignal::new(NodeVector::new(omega).unwrap(), a, b).unwrap()
}

#[test]
fn parseval_single_and_derivative_spikes() {
    let m = 20;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let d = torus_signal(vec![0.3], vec![one], vec![zero]);
    assert!(rel_close(parseval_convolution_norm(&d, m), ((m + 1) as f64).sqrt(), 1e-14));
    let bd = torus_signal(vec![0.3], vec![zero], vec![one]);
    let mf = m as f64;
    let closed = (4.0 * PI * PI * mf * (mf + 1.0) * (2.0 * mf + 1.0) / 6.0).sqrt();
    assert!(rel_close(parseval_convolution_norm(&bd, m), closed, 1e-13));
}

#[test]
fn parseval_matches_quadrature() {
    let mut g = rng(18);
    for _ in 0..10 {
        let m = g.random_range(4..40);
        let w0 = g.random_range(0.0..0.9);
        let dw = g.random_range(1e-3..0.05);
        let sig = torus_signal(
            vec![w0, w0 + dw],
            vec![rand_c(&mut g), rand_c(&mut g)],
            vec![rand_c(&mut g), rand_c(&mut g)],
        );
        let p = parseval_convolution_norm(&sig, m);
        let q = convolution_norm_quadrature(&sig, m, 10_000);
        assert!(rel_close(p, q, 1e-6), "{p} vs {q}");
    }
}

#[test]
fn taylor_remainder_identity() {
    let mut g = rng(19);
    for ell in 1..=3 {
        for _ in 0..5 {
            let mut tv: Vec<f64> = (0..ell).map(|k| k as f64).collect();
            for t in tv.iter_mut().skip(1) {
                *t += g.random_range(-0.3..0.3);
            }
            let m = g.random_range(8..48);
            let dt = g.random_range(0.01..0.3) / m as f64;
            let fd = fd_coefficients(&tv, -dt).unwrap();
            let ws: Vec<f64> = (0..16).map(|_| g.random_range(0.0..1.0)).collect();
            let rem = remainders_at(&fd, m, &ws);
            let defects: Vec<Complex64> = ws.iter().map(|w| fd_defect(&fd, m, *w)).collect();
            let rms = (defects.iter().map(|d| d.norm_sqr()).sum::<f64>() / ws.len() as f64).sqrt();
            for (d, r) in defects.iter().zip(&rem) {
                assert!((d - r.0 - r.1).norm() <= 1e-6 * rms, "ell={ell}");
            }
        }
    }
}

#[test]
fn remainder_bounds_hold() {
    let mut g = rng(20);
    for _ in 0..50 {
        let ell = g.random_range(2..4);
        let tau = ell as f64 - 1.0 + g.random_range(0.0..2.0);
        let mut tv: Vec<f64> = (0..ell - 1).map(|k| k as f64 * tau / (ell - 1) as f64).collect();
        tv.push(tau);
        let m = g.random_range(8..40);
        let alpha = g.random_range(0.01..0.3);
        let fd = fd_coefficients(&tv, -alpha / m as f64).unwrap();
        let (na, nb) = remainder_norms(&fd, m);
        let (ba, bb) = remainder_bounds(&fd, m, tau);
        assert!(na <= ba, "R_A {na} > {ba}");
        assert!(nb <= bb, "R_B {nb} > {bb}");
    }
}

#[test]
fn upper_certificate_dominates_sigma_min() {
    let mut g = rng(21);
    let mut done = 0;
    while done < 40 {
        let n = g.random_range(8..48);
        let srf = 10f64.powf(g.random_range(0.5..2.5));
        let delta = 1.0 / (n as f64 * srf);
        let ell = g.random_range(2..4);
        let mut raw: Vec<f64> = cluster(0.2, ell, delta).as_slice().to_vec();
        let extra = g.random_range(0..2);
        for k in 0..extra {
            raw.push(-2.0 + k as f64);
        }
        let x = NodeVector::new(raw).unwrap();
        let p = ClusterParams {
            delta,
            rho: 0.9,
            s: x.len(),
            ell,
            tau: ell as f64 - 1.0,
        };
        assert!(validate_cluster_config(&x, &p).is_valid());
        let c = upper_bound_certificate_detail(&x, n, &p).unwrap();
        let sm = sigma_min_dd(&x, n).unwrap();
        assert!(c.value >= sm * (1.0 - 1e-9), "{} < {sm}", c.value);
        assert!(c.value <= c.c2_bound, "{} > {}", c.value, c.c2_bound);
        done += 1;
    }
}

#[test]
fn upper_certificate_preconditions() {
    let x = cluster(0.0, 2, 0.1);
    let p = single_cluster_params(0.1, 2);
    assert!(upper_bound_certificate(&x, 6, &p).is_err());
    let bad = ClusterParams { tau: 0.5, ..p };
    assert!(upper_bound_certificate(&x, 2, &bad).is_err());
    assert!(upper_bound_certificate(&x, 2, &p).is_ok());
}

#[test]
fn upper_certificate_slope_in_srf() {
    let n = 32;
    let pts: Vec<(f64, f64)> = (0..=20)
        .map(|k| {
            let srf = 10f64.powf(1.0 + k as f64 / 10.0);
            let delta = 1.0 / (n as f64 * srf);
            let x = cluster(0.7, 2, delta);
            let c = upper_bound_certificate(&x, n, &single_cluster_params(delta, 2)).unwrap();
            (srf.ln(), c.ln())
        })
        .collect();
    let slope = ols_slope(&pts);
    assert!((slope + 3.0).abs() <= 0.1, "slope {slope}");
}

#[test]
fn sandwich_on_cluster_sweep() {
    let mut g = rng(22);
    for _ in 0..40 {
        let ell = g.random_range(2..4);
        let n = g.random_range(16..64);
        let srf = 10f64.powf(g.random_range(1.0..3.0));
        let delta = 1.0 / (n as f64 * srf);
        let x = cluster(g.random_range(-3.0..3.0), ell, delta);
        let p = single_cluster_params(delta, ell);
        let r = certify(&x, &p, n as f64, n).unwrap();
        if let Some(lc) = r.lower_certificate {
            assert!(lc <= r.sigma_min * (1.0 + 1e-9));
        }
        let uc = r.upper_certificate.unwrap();
        assert!(r.sigma_min <= uc * (1.0 + 1e-9));
    }
}

#[test]
fn certificate_report_json() {
    let x = cluster(0.1, 2, 0.01);
    let r = certify(&x, &single_cluster_params(0.01, 2), 20.0, 20).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    for key in ["sigma_min", "lower_certificate", "upper_certificate", "m", "lambda", "admissible"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let c = &v["constants"];
    assert!(c["kappa"].is_number() && c["C1"].is_number() && c["C2"].is_number());
    let u: confsr::CMat<Dd> = confluent_rect(&x, 20);
    assert!((sigma_min(&u).unwrap().to_f64() - r.sigma_min).abs() < 1e-20);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn prop_decimation_invariants(seed in 0u64..10_000, n in 4usize..40) {
        let mut g = rng(seed);
        let s = g.random_range(1..4);
        let x = spread_nodes(&mut g, s, 0.2);
        let p = ClusterParams { delta: 0.2, rho: 0.2, s, ell: 1, tau: 0.5 };
        let d = decimation_search(&x, &p, n as f64, n);
        prop_assert!(d.m <= 2 * n);
        if d.admissible {
            prop_assert!(d.intra_sep >= 0.2 * n as f64 / (2.0 * s as f64) * (1.0 - 1e-12));
            prop_assert!(d.inter_sep >= PI / (2.0 * (s * s) as f64) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn prop_fd_moments(t2 in 0.2f64..3.0, t3 in 3.2f64..6.0, e in -5.0f64..-1.0) {
        let fd = fd_coefficients(&[0.0, t2, t3], -10f64.powf(e)).unwrap();
        prop_assert!(fd.moment_residual() <= 1e-9);
    }

    #[test]
    fn prop_sandwich_pair(n in 8usize..40, logsrf in 0.5f64..2.5, start in -3.0f64..3.0) {
        let delta = 1.0 / (n as f64 * 10f64.powf(logsrf));
        let x = cluster(start, 2, delta);
        let r = certify(&x, &single_cluster_params(delta, 2), n as f64, n).unwrap();
        if let Some(lc) = r.lower_certificate {
            prop_assert!(lc <= r.sigma_min * (1.0 + 1e-9));
        }
        prop_assert!(r.sigma_min <= r.upper_certificate.unwrap() * (1.0 + 1e-9));
    }
}
