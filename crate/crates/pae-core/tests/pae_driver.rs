use std::f64::consts::PI;

use proptest::prelude::{prop, prop_assert, prop_assert_eq, prop_assume, proptest};

use pae_core::make_instance;
use pae_core::pae_driver::*;
use pae_core::rpe::{NuVariant, BETA_MAX};
use pae_core::PaeError;

fn opts(strategy: Strategy, l_mode: LMode) -> ScheduleOptions {
    ScheduleOptions::new(strategy, NuVariant::Optimized { nu_k: 7 }, l_mode)
}

#[test]
fn proof_mode_k() {
    let s = build_schedule(1e-2, &opts(Strategy::FullSequential, LMode::Empirical)).unwrap();
    assert_eq!(s.k_max, 13);
    assert!(matches!(
        build_schedule(0.0, &opts(Strategy::FullSequential, LMode::Empirical)),
        Err(PaeError::Domain(_))
    ));
}

#[test]
fn s5_table_depths() {
    for (k, depth) in [(7, 18), (9, 20)] {
        let s = build_schedule_k(k, &opts(Strategy::FullParallel, LMode::S5)).unwrap();
        assert_eq!(resources(s.steps.iter(), 2).oracle_depth, depth);
    }
    assert!(build_schedule_k(10, &opts(Strategy::FullParallel, LMode::S5)).is_err());
}

#[test]
fn certified_lengths_cover_parallel_bias() {
    let s = build_schedule_k(
        5,
        &opts(Strategy::FullParallel, LMode::Certified { beta: 0.05 }),
    )
    .unwrap();
    for st in &s.steps {
        let eps = 0.05 / (2f64.sqrt() * (st.p * st.s) as f64);
        let raw = std::f64::consts::E.powi(2) * st.t as f64 + 4.0 * (1.0 / eps).ln() + 10.0;
        assert!(st.l as f64 >= raw && (st.l as f64) < raw + 2.0 && st.l % 2 == 0);
    }
}

#[test]
fn bad_strategies_rejected() {
    for p in [0, 3, 6, 1 << 10] {
        let e = build_schedule_k(6, &opts(Strategy::General { p }, LMode::Empirical));
        assert!(matches!(e, Err(PaeError::Config(_))), "P={p}");
    }
    let o = ScheduleOptions::new(
        Strategy::FullParallel,
        NuVariant::Theoretical { beta: BETA_MAX },
        LMode::Empirical,
    );
    assert!(build_schedule_k(3, &o).is_err());
    let odd = build_schedule_k(2, &opts(Strategy::FullParallel, LMode::Table(vec![10, 11])));
    assert!(odd.is_err());
}

#[test]
fn half_amplitude_exact() {
    let cache = ShifterCache::new();
    let inst = make_instance(0.5, 2).unwrap();
    for backend in [Backend::Ideal, Backend::Analytic] {
        let s = build_schedule_k(6, &opts(Strategy::FullParallel, LMode::S5)).unwrap();
        let est = run_exact(&inst, &s, backend, &cache).unwrap();
        assert!((est.a_hat - 0.5).abs() < 1e-9, "{backend:?}: {}", est.a_hat);
    }
}

#[test]
fn strategies_agree_on_ideal_backend() {
    let cache = ShifterCache::new();
    let inst = make_instance(0.3, 2).unwrap();
    let par = build_schedule_k(6, &opts(Strategy::FullParallel, LMode::Empirical)).unwrap();
    let seq = build_schedule_k(6, &opts(Strategy::FullSequential, LMode::Empirical)).unwrap();
    let gen = build_schedule_k(6, &opts(Strategy::General { p: 4 }, LMode::Empirical)).unwrap();
    for seed in 0..5 {
        let a = run(&inst, &par, Backend::Ideal, seed, &cache).unwrap();
        let b = run(&inst, &seq, Backend::Ideal, seed, &cache).unwrap();
        let c = run(&inst, &gen, Backend::Ideal, seed, &cache).unwrap();
        for ((x, y), z) in a.records.iter().zip(&b.records).zip(&c.records) {
            assert!((x.p_plus - y.p_plus).abs() < 1e-12 && (x.p_i - z.p_i).abs() < 1e-12);
        }
    }
}

#[test]
fn run_is_deterministic_and_counts_queries() {
    let cache = ShifterCache::new();
    let inst = make_instance(0.2, 2).unwrap();
    let s = build_schedule_k(4, &opts(Strategy::FullParallel, LMode::S5)).unwrap();
    let a = run(&inst, &s, Backend::Analytic, 3, &cache).unwrap();
    let b = run(&inst, &s, Backend::Analytic, 3, &cache).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.report.n, s.total_queries());
    assert_eq!(a.report, ResourceReport::from_records(&a.records, 2));
}

#[test]
fn statevector_capacity_propagates() {
    let cache = ShifterCache::new();
    let inst = make_instance(0.2, 2).unwrap();
    let s = build_schedule_k(5, &opts(Strategy::FullParallel, LMode::S5)).unwrap();
    let e = run(
        &inst,
        &s,
        Backend::Statevector(pae_core::OracleStyle::Canonical),
        1,
        &cache,
    );
    assert!(matches!(e, Err(PaeError::Capacity(_))));
}

#[test]
fn theorem_resource_limits() {
    let seq = theorem_resources(0.1, 1, 0.05, LMode::Empirical).unwrap();
    let top = 1u64 << (seq.k_max - 1);
    assert_eq!(seq.oracle_depth, select_l(top));
    let par = theorem_resources(0.1, top, 0.05, LMode::Empirical).unwrap();
    assert_eq!(par.oracle_depth, 10);
    assert_eq!(par.depth, 10 + seq.k_max as u64 - 1);
    assert!(par.n > seq.n);
}

fn select_l(t: u64) -> u64 {
    pae_core::qsp_synthesis::select_l_empirical(t as f64) as u64
}

#[test]
fn hl_reference_monotone() {
    let mut last = f64::INFINITY;
    for n in [2u64, 10, 1001, 1 << 20] {
        let e = hl_reference(n).unwrap();
        assert!(e < last);
        last = e;
    }
    assert!((hl_reference(1001).unwrap() - PI / 2000.0).abs() < 1e-18);
}

proptest! {
    #[test]
    fn schedules_satisfy_product_rule(k in 1u32..=20, log_p in 0u32..20, cap in prop::option::of(0u32..5)) {
        prop_assume!(log_p < k);
        let mut o = opts(Strategy::General { p: 1 << log_p }, LMode::Empirical);
        o.t_cap = cap.map(|c| 1u64 << c);
        let s = build_schedule_k(k, &o).unwrap();
        prop_assert!(s.check().is_ok());
        for st in &s.steps {
            prop_assert_eq!(st.p * st.t * st.s, 1u64 << (st.k - 1));
            prop_assert!(st.p <= 1 << log_p);
            if let Some(c) = o.t_cap { prop_assert!(st.t <= c); }
            // P_k = 1 exactly while 2^k <= 2^K / P.
            prop_assert_eq!(st.p == 1, st.k + log_p <= k);
        }
    }
}
