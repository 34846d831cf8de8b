use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pae_core::circuit_sim::sample_with;
use pae_core::rpe::*;

fn exact_freqs(phi: f64, k_max: u32) -> Vec<(f64, f64)> {
    (1..=k_max)
        .map(|k| {
            let x = 2f64.powi(k as i32 - 1) * phi;
            (0.5 * (1.0 + x.cos()), 0.5 * (1.0 + x.sin()))
        })
        .collect()
}

#[test]
fn sqrt2_trajectory() {
    let est = estimate_from_frequencies(&exact_freqs(2f64.sqrt(), 5)).unwrap();
    assert!((est.trajectory[4] - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn ideal_frequencies_at_phi_two() {
    let (fp, fi) = exact_freqs(2.0, 1)[0];
    assert!((fp - 0.2919).abs() < 1e-4 && (fi - 0.9546).abs() < 1e-4);
    assert!((step_phase_from(fp, fi) - 2.0).abs() < 1e-12);
}

#[test]
fn observation_contract() {
    assert!(StepObservation::new(1, 8, 3, 7).is_err());
    assert!(StepObservation::new(0, 1, 1, 7).is_err());
    let o = StepObservation::new(3, 7, 0, 7).unwrap();
    assert_eq!((o.multiplier(), o.f_plus(), o.f_i()), (4.0, 1.0, 0.0));
    assert!((step_phase(&o) - 1.75 * PI).abs() < 1e-15);
}

#[test]
fn bound_near_robustness_limit() {
    let k = 6;
    let b = mse_bound(k, &[3; 6], BETA_MAX - 1e-6).unwrap();
    let steps: f64 = (1..=k).map(|j| 4f64.powi(4 - j as i32)).sum();
    let want = (TAU / 3.0).powi(2) * (4f64.powi(-(k as i32)) + steps);
    assert!((b / want - 1.0).abs() < 1e-9);
    assert!(mse_bound(2, &[1], 0.0).is_err());
}

/// Sample MSE with frequencies biased by up to β stays under the bound.
#[test]
fn empirical_mse_under_bound() {
    let beta = 0.05;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for k_max in [3u32, 5, 7] {
        let nu: Vec<u64> = (1..=k_max)
            .map(|k| schedule_nu(k_max, k, NuVariant::Theoretical { beta }))
            .collect();
        let bound = mse_bound(k_max, &nu, beta).unwrap();
        let trials = 1000;
        let mut sq = Vec::with_capacity(trials);
        for _ in 0..trials {
            let phi = rng.random_range(-2.0..2.0);
            let freqs: Vec<(f64, f64)> = exact_freqs(phi, k_max)
                .into_iter()
                .zip(&nu)
                .map(|((p, q), &n)| {
                    let p = (p + rng.random_range(-beta..beta)).clamp(0.0, 1.0);
                    let q = (q + rng.random_range(-beta..beta)).clamp(0.0, 1.0);
                    let hp = sample_with(p, n, &mut rng) as f64 / n as f64;
                    let hq = sample_with(q, n, &mut rng) as f64 / n as f64;
                    (hp, hq)
                })
                .collect();
            let est = estimate_from_frequencies(&freqs).unwrap();
            let e = wrap_phase(est.phi_hat - phi);
            let ea = est.a_hat - (2.0 - phi) / 4.0;
            assert!(ea.abs() <= e.abs() / 4.0 + 1e-12);
            sq.push(e * e);
        }
        let n = trials as f64;
        let mse = sq.iter().sum::<f64>() / n;
        let sd = (sq.iter().map(|v| (v - mse).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(
            mse - 3.0 * sd / n.sqrt() <= bound,
            "K={k_max}: {mse} vs {bound}"
        );
    }
}

proptest! {
    #[test]
    fn noiseless_recovers_phase(phi in -2.0f64..=2.0, k_max in 1u32..=12) {
        let est = estimate_from_frequencies(&exact_freqs(phi, k_max)).unwrap();
        prop_assert!(wrap_phase(est.phi_hat - phi).abs() <= PI * 2f64.powi(-(k_max as i32)));
        prop_assert!((-PI..PI).contains(&est.phi_hat));
    }

    #[test]
    fn candidate_within_half_width(k in 2u32..=14, raw in 0.0f64..TAU, prev in 0.0f64..TAU) {
        let cur = unwrap_step(k, raw, Some(prev));
        prop_assert!((cur - prev).abs() <= PI / 2f64.powi(k as i32 - 1) + 1e-12);
    }

    #[test]
    fn step_phase_in_range(fp in 0.0f64..=1.0, fi in 0.0f64..=1.0) {
        let v = step_phase_from(fp, fi);
        prop_assert!((0.0..TAU).contains(&v));
    }

    #[test]
    fn a_hat_clamped(p in -10.0f64..10.0) {
        let e = finalize(vec![p]);
        prop_assert!((0.0..=1.0).contains(&e.a_hat));
        prop_assert!((-PI..PI).contains(&e.phi_hat));
    }

    #[test]
    fn schedules_positive_and_monotone(k_max in 1u32..=15, beta in 0.001f64..0.3, nu_k in 1u64..30) {
        for k in 1..k_max {
            let t = |k| schedule_nu(k_max, k, NuVariant::Theoretical { beta });
            let o = |k| schedule_nu(k_max, k, NuVariant::Optimized { nu_k });
            prop_assert!(t(k) >= t(k + 1) && o(k) >= o(k + 1));
        }
        prop_assert_eq!(schedule_nu(k_max, k_max, NuVariant::Theoretical { beta }), 1);
    }
}
