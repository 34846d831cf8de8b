//! Fast deterministic invariant suite behind `pae verify`.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{parse, serialize, ExperimentConfig};
use super::sweeps::{run_tl_curve, tl_fit};
use crate::circuit_sim::{
    setting_probability, statevector_probability, MeasurementSetting, ParallelCircuit, Shifter,
};
use crate::core_model::{make_instance, OracleStyle};
use crate::pae_driver::{
    build_schedule_k, resources, run_exact, Backend, LMode, ScheduleOptions, ShifterCache, Strategy,
};
use crate::qsp_synthesis::{delta_bound, grid::cheb_grid, realized, PhaseShifterSpec};
use crate::rpe::NuVariant;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        name,
        passed,
        detail,
    }
}

/// Worst |U₀₀(x) − e^{−iT sin x}| on the 4096-point grid, and δ(T, L).
pub fn certification_error(spec: &PhaseShifterSpec) -> (f64, f64) {
    let worst = cheb_grid(4096)
        .into_iter()
        .map(|x| {
            (realized(&spec.angles.xi, x)[(0, 0)] - C64::new(0.0, -spec.t * x.sin()).exp()).norm()
        })
        .fold(0.0, f64::max);
    (worst, delta_bound(spec.t, spec.l))
}

pub fn qsp_certification(cache: &ShifterCache) -> Check {
    let mut worst_ratio: f64 = 0.0;
    let mut detail = String::new();
    for (t, l) in [(1u64, 10usize), (2, 14), (4, 22), (8, 34)] {
        match cache.get(t, l) {
            Ok(spec) => {
                let (err, delta) = certification_error(&spec);
                worst_ratio = worst_ratio.max(err / delta);
                detail.push_str(&format!("T={t} L={l} err={err:.2e} δ={delta:.2e}; "));
            }
            Err(e) => return check("qsp certification", false, e.to_string()),
        }
    }
    check(
        "qsp certification",
        worst_ratio <= 8.0,
        format!("{detail}worst err/δ = {worst_ratio:.3}"),
    )
}

pub fn backend_equivalence(cache: &ShifterCache) -> Check {
    let spec = match cache.get(1, 10) {
        Ok(s) => s,
        Err(e) => return check("backend equivalence", false, e.to_string()),
    };
    let amps = [
        0.0,
        0.25,
        (std::f64::consts::PI / 8.0).sin().powi(2),
        0.5,
        1.0,
    ];
    let mut worst: f64 = 0.0;
    for p in 1..=3 {
        for &a in &amps {
            let inst = make_instance(a, 2).expect("valid amplitude");
            let c = ParallelCircuit::new(p, Shifter::Synthesized(spec.clone()), 1, inst);
            for s in MeasurementSetting::BOTH {
                match statevector_probability(&c, s, OracleStyle::Canonical) {
                    Ok(sv) => worst = worst.max((sv - setting_probability(&c, s)).abs()),
                    Err(e) => return check("backend equivalence", false, e.to_string()),
                }
            }
        }
    }
    check(
        "backend equivalence",
        worst <= 1e-10,
        format!("max |Δp| = {worst:.2e}"),
    )
}

pub fn parity_identity() -> Check {
    let mut worst: f64 = 0.0;
    for i in 0..=10 {
        let inst = make_instance(i as f64 / 10.0, 2).expect("valid amplitude");
        for m in 1..=64usize {
            // Alternate how M splits between P and T.
            let p = if m % 2 == 0 { 2 } else { 1 };
            let c = ParallelCircuit::new(p, Shifter::Ideal { t: (m / p) as f64 }, 1, inst);
            let mp = m as f64 * inst.phi;
            worst = worst
                .max(
                    (setting_probability(&c, MeasurementSetting::Plus) - 0.5 * (1.0 + mp.cos()))
                        .abs(),
                )
                .max(
                    (setting_probability(&c, MeasurementSetting::PlusI) - 0.5 * (1.0 + mp.sin()))
                        .abs(),
                );
        }
    }
    check(
        "parity identity",
        worst <= 1e-12,
        format!("max deviation = {worst:.2e}"),
    )
}

pub fn rpe_exactness(cache: &ShifterCache) -> Check {
    let k = 9;
    let opts = ScheduleOptions::new(
        Strategy::FullSequential,
        NuVariant::Optimized { nu_k: 7 },
        LMode::Empirical,
    );
    let sched = build_schedule_k(k, &opts).expect("valid schedule");
    let tol = std::f64::consts::PI / 2f64.powi(k as i32);
    let mut worst: f64 = 0.0;
    for i in 0..=100 {
        let inst = make_instance(i as f64 / 100.0, 2).expect("valid amplitude");
        let est = run_exact(&inst, &sched, Backend::Ideal, cache).expect("ideal backend");
        worst = worst.max((est.phi_hat - inst.phi).abs());
    }
    check(
        "rpe noiseless exactness",
        worst <= tol,
        format!("max |φ̂−φ| = {worst:.2e}, tol {tol:.2e}"),
    )
}

pub fn accounting() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..20 {
        let k = rng.random_range(1..=9u32);
        let strategy = match rng.random_range(0..3) {
            0 => Strategy::FullParallel,
            1 => Strategy::FullSequential,
            _ => Strategy::General {
                p: 1 << rng.random_range(0..k),
            },
        };
        let nu = NuVariant::Optimized {
            nu_k: rng.random_range(1..20),
        };
        let table: Vec<usize> = (0..k).map(|_| 2 * rng.random_range(1..20usize)).collect();
        let sched =
            match build_schedule_k(k, &ScheduleOptions::new(strategy, nu, LMode::Table(table))) {
                Ok(s) => s,
                Err(e) => return check("accounting", false, e.to_string()),
            };
        let n: u64 = sched
            .steps
            .iter()
            .map(|s| 2 * s.nu * s.p * s.s * s.l as u64)
            .sum();
        if resources(sched.steps.iter(), 2).n != n || sched.check().is_err() {
            return check(
                "accounting",
                false,
                format!("mismatch for {strategy:?} K={k}"),
            );
        }
    }
    let one = build_schedule_k(
        1,
        &ScheduleOptions::new(
            Strategy::FullParallel,
            NuVariant::Optimized { nu_k: 7 },
            LMode::Table(vec![10]),
        ),
    )
    .expect("valid schedule");
    let n1 = resources(one.steps.iter(), 2).n;
    check(
        "accounting",
        n1 == 140,
        format!("20 random schedules consistent; K=1 N = {n1}"),
    )
}

pub fn tl_table() -> Check {
    let cfg = ExperimentConfig {
        t_values: vec![1.0, 2.0, 4.0, 8.0],
        ..Default::default()
    };
    let ls: Vec<usize> = run_tl_curve(&cfg).iter().map(|r| r.l_even).collect();
    let rows = run_tl_curve(&ExperimentConfig::default());
    let (m, c) = tl_fit(&rows, 10.0, 100.0).unwrap_or((f64::NAN, f64::NAN));
    let ok =
        ls == [10, 14, 22, 34] && (m / 2.72 - 1.0).abs() <= 0.05 && (c / 13.64 - 1.0).abs() <= 0.05;
    check(
        "T-L table",
        ok,
        format!("L = {ls:?}, fit L = {m:.4}T + {c:.3}"),
    )
}

pub fn depth_claim() -> Check {
    let opts = ScheduleOptions::new(
        Strategy::FullParallel,
        NuVariant::Optimized { nu_k: 7 },
        LMode::S5,
    );
    let sched = build_schedule_k(7, &opts).expect("valid schedule");
    let r = resources(sched.steps.iter(), 2);
    check(
        "full-parallel depth",
        r.oracle_depth == 18 && r.ghz_layers == 6 && r.width == 192,
        format!(
            "depth {} ghz {} width {}",
            r.oracle_depth, r.ghz_layers, r.width
        ),
    )
}

pub fn config_round_trip() -> Check {
    let cfg = ExperimentConfig::default();
    let ok = parse(&serialize(&cfg)).map(|c| c == cfg).unwrap_or(false);
    check("config round trip", ok, String::new())
}

pub fn run_all() -> Vec<Check> {
    let cache = ShifterCache::new();
    vec![
        qsp_certification(&cache),
        backend_equivalence(&cache),
        parity_identity(),
        rpe_exactness(&cache),
        accounting(),
        tl_table(),
        depth_claim(),
        config_round_trip(),
    ]
}
