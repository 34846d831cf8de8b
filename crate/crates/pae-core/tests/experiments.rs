use std::f64::consts::PI;

use proptest::prelude::{any, prop, prop_assert_eq, prop_oneof, proptest, Just};
use proptest::strategy::Strategy as _;

use pae_core::experiments::*;
use pae_core::pae_driver::{
    build_schedule_k, hl_reference, Backend, LMode, ScheduleOptions, ShifterCache, Strategy,
};
use pae_core::rpe::NuVariant;
use pae_core::OracleStyle;

fn small_rmse() -> ExperimentConfig {
    ExperimentConfig {
        amplitudes: vec![0.1, 0.7],
        k_min: 2,
        k_max: 4,
        strategies: vec![Strategy::FullParallel, Strategy::General { p: 2 }],
        l_mode: LMode::S5,
        trials: 20,
        seed: 5,
        ..Default::default()
    }
}

#[test]
fn csv_is_reproducible() {
    let a = execute(&small_rmse()).unwrap();
    let b = execute(&small_rmse()).unwrap();
    assert_eq!(a, b);
    let text = &a.csv[0].1;
    assert!(text.starts_with("a,K,strategy,N,oracle_depth,width,rmse,trials,seed\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 3 * 2);
    let other = execute(&ExperimentConfig {
        seed: 6,
        ..small_rmse()
    })
    .unwrap();
    assert_ne!(a.csv, other.csv);
}

#[test]
fn empty_table_is_header_only() {
    assert_eq!(csv("x,y", &[]), "x,y\n");
}

#[test]
fn svg_has_one_polyline_per_series() {
    let rows = run_rmse_sweep(&small_rmse()).unwrap();
    let plot = render::rmse_plot(&rows, XAxis::Queries);
    // 2 strategies × 2 amplitudes, plus the HL reference.
    assert_eq!(plot.series.len(), 5);
    assert!(plot.series.last().unwrap().dashed);
    let text = svg(&plot);
    assert_eq!(text.matches("<polyline").count(), 5);
    assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
    let depth = render::rmse_plot(&rows, XAxis::Depth);
    assert_eq!(depth.series.len(), 4);
}

#[test]
fn hl_line_value() {
    assert!((hl_reference(1001).unwrap() - PI / 2000.0).abs() < 1e-18);
    assert!(hl_reference(1).is_err());
}

#[test]
fn ideal_backend_has_no_bias() {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::BiasSweep,
        amplitudes: (0..=20).map(|i| i as f64 / 20.0).collect(),
        k_min: 1,
        k_max: 5,
        strategies: vec![Strategy::FullParallel],
        backend: Backend::Ideal,
        ..Default::default()
    };
    for r in run_bias_sweep(&cfg).unwrap() {
        assert!(r.beta_plus < 1e-12 && r.beta_i < 1e-12, "{r:?}");
    }
}

#[test]
fn exact_bias_shrinks_with_length() {
    let cache = ShifterCache::new();
    let opts = ScheduleOptions::new(
        Strategy::FullParallel,
        NuVariant::Optimized { nu_k: 7 },
        LMode::Empirical,
    );
    let sched = build_schedule_k(4, &opts).unwrap();
    let step = &sched.steps[3];
    let amps: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let mut last = f64::INFINITY;
    for l in [8, 12, 16] {
        let r = exact_bias(step, l, l, &amps, 2, Backend::Analytic, &cache).unwrap();
        let b = r.beta_plus.max(r.beta_i);
        assert!(b < last, "L={l}: {b} vs {last}");
        last = b;
    }
}

#[test]
fn sampled_bias_matches_statevector_backend() {
    let cache = ShifterCache::new();
    let opts = ScheduleOptions::new(
        Strategy::FullParallel,
        NuVariant::Optimized { nu_k: 7 },
        LMode::Empirical,
    );
    let step = build_schedule_k(2, &opts).unwrap().steps[1];
    let amps = [0.2, 0.6];
    let a = exact_bias(&step, 10, 10, &amps, 2, Backend::Analytic, &cache).unwrap();
    let b = exact_bias(
        &step,
        10,
        10,
        &amps,
        2,
        Backend::Statevector(OracleStyle::Canonical),
        &cache,
    )
    .unwrap();
    assert!((a.beta_plus - b.beta_plus).abs() < 1e-10 && (a.beta_i - b.beta_i).abs() < 1e-10);
}

#[test]
fn tl_rows() {
    let r = tl_row(0.1);
    assert!(r.l_even <= 6 && r.l_even.is_multiple_of(2));
    assert!(r.l_strict >= r.l_even);
    let rows = run_tl_curve(&ExperimentConfig::default());
    assert!(rows.windows(2).all(|w| w[0].l_even <= w[1].l_even));
    let (m, c) = tl_fit(&rows, 10.0, 100.0).unwrap();
    assert!((m - 2.72).abs() < 0.14 && (c - 13.64).abs() < 0.7);
    assert!(tl_fit(&rows, 500.0, 600.0).is_err());
}

#[test]
fn linear_fit_recovers_line() {
    let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0 * i as f64 - 2.0)).collect();
    let (m, c) = linear_fit(&pts).unwrap();
    assert!((m - 3.0).abs() < 1e-12 && (c + 2.0).abs() < 1e-12);
    assert!(linear_fit(&[(1.0, 1.0)]).is_none());
}

#[test]
fn tl_curve_artifacts() {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::TlCurve,
        ..Default::default()
    };
    let art = execute(&cfg).unwrap();
    let names: Vec<&str> = art.csv.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["tl_curve", "tl_curve_fit"]);
    let dir = tempfile::tempdir().unwrap();
    let written = write_artifacts(dir.path(), &art).unwrap();
    assert_eq!(written.len(), 3);
    assert_eq!(std::fs::read_to_string(&written[0]).unwrap(), art.csv[0].1);
}

#[test]
fn single_run_records_every_step() {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::SingleRun,
        amplitudes: vec![0.3],
        k_max: 5,
        strategies: vec![Strategy::FullSequential],
        ..Default::default()
    };
    let art = execute(&cfg).unwrap();
    assert_eq!(art.csv[0].1.lines().count(), 1 + 5);
    assert!(art.svg.is_empty());
}

#[test]
fn config_errors_carry_location() {
    let e = parse("experiment = tl_curve\nk_max = nine\n")
        .unwrap_err()
        .to_string();
    assert!(e.contains("line 2") && e.contains("k_max"), "{e}");
    assert!(parse("k_max = 4\n").is_err());
    assert!(parse("experiment = tl_curve\nseed = 1\nseed = 2\n").is_err());
}

fn arb_strategy() -> impl proptest::strategy::Strategy<Value = Strategy> {
    prop_oneof![
        Just(Strategy::FullParallel),
        Just(Strategy::FullSequential),
        (0u32..3).prop_map(|e| Strategy::General { p: 1 << e }),
    ]
}

fn arb_config() -> impl proptest::strategy::Strategy<Value = ExperimentConfig> {
    let kind = prop_oneof![
        Just(ExperimentKind::RmseVsQueries),
        Just(ExperimentKind::RmseVsDepth),
        Just(ExperimentKind::BiasSweep),
        Just(ExperimentKind::TlCurve),
        Just(ExperimentKind::SingleRun),
    ];
    let nu = prop_oneof![
        (1u64..20).prop_map(|nu_k| NuVariant::Optimized { nu_k }),
        (0.001f64..0.3).prop_map(|beta| NuVariant::Theoretical { beta }),
    ];
    let l_mode = prop_oneof![
        Just(LMode::Empirical),
        Just(LMode::S5),
        (0.001f64..0.3).prop_map(|beta| LMode::Certified { beta }),
        prop::collection::vec((1usize..20).prop_map(|l| 2 * l), 9).prop_map(LMode::Table),
    ];
    let t_cap = prop_oneof![
        Just(TCap::Auto),
        Just(TCap::Off),
        (0u32..4).prop_map(|e| TCap::Cap(1 << e))
    ];
    let backend = prop_oneof![
        Just(Backend::Analytic),
        Just(Backend::Ideal),
        Just(Backend::Statevector(OracleStyle::Canonical)),
        any::<u64>().prop_map(|s| Backend::Statevector(OracleStyle::Random(s))),
    ];
    (
        (
            kind,
            prop::collection::vec(0.0f64..=1.0, 1..5),
            3u32..=9,
            prop::collection::vec(arb_strategy(), 1..3),
        ),
        (nu, l_mode, t_cap, backend),
        (
            1u32..500,
            1u64..1_000_000,
            any::<u64>(),
            prop::collection::vec(0.01f64..100.0, 0..4),
        ),
    )
        .prop_map(
            |(
                (kind, amplitudes, k_max, strategies),
                (nu, l_mode, t_cap, backend),
                (trials, shots, seed, t_values),
            )| {
                ExperimentConfig {
                    kind,
                    amplitudes,
                    k_min: 1,
                    k_max,
                    strategies,
                    nu,
                    l_mode,
                    t_cap,
                    trials,
                    backend,
                    shots,
                    t_values,
                    seed,
                    l_values: vec![4, 8],
                    ..Default::default()
                }
            },
        )
}

proptest! {
    #[test]
    fn config_round_trip(cfg in arb_config()) {
        prop_assert_eq!(parse(&serialize(&cfg)).unwrap(), cfg);
    }
}
