//! RMSE, bias and T-L sweeps.

use rayon::prelude::*;

use super::config::{strategy_name, ExperimentConfig};
use crate::circuit_sim::sample_counts;
use crate::core_model::make_instance;
use crate::error::{PaeError, Result};
use crate::pae_driver::{
    build_schedule_k, mix_seed, run, step_probabilities, Backend, LMode, RunOutput, ShifterCache,
    StepPlan, Strategy, S5_PLUS_I_TABLE, S5_PLUS_TABLE,
};
use crate::qsp_synthesis::{l_star, min_l_for_delta, EMPIRICAL_DELTA};

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub a: f64,
    pub k: u32,
    pub strategy: Strategy,
    pub n: u64,
    pub oracle_depth: u64,
    pub width: u64,
    pub rmse: f64,
    pub trials: u32,
    pub seed: u64,
}

/// Seed of one trial: base ⊕ hash(a, K, trial).
pub fn trial_seed(base: u64, a: f64, k: u32, trial: u32) -> u64 {
    base ^ mix_seed(0, &[a.to_bits(), k as u64, trial as u64])
}

/// All trials of one (a, K, strategy) point.
pub fn run_point(
    cfg: &ExperimentConfig,
    a: f64,
    k: u32,
    strategy: Strategy,
    cache: &ShifterCache,
) -> Result<(ResultRow, Vec<RunOutput>)> {
    let inst = make_instance(a, cfg.n)?;
    let sched = build_schedule_k(k, &cfg.schedule_options(strategy))?;
    let runs = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            run(
                &inst,
                &sched,
                cfg.backend,
                trial_seed(cfg.seed, a, k, t),
                cache,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mse = runs
        .iter()
        .map(|r| (r.estimate.a_hat - a).powi(2))
        .sum::<f64>()
        / runs.len() as f64;
    let rep = runs[0].report;
    let row = ResultRow {
        a,
        k,
        strategy,
        n: rep.n,
        oracle_depth: rep.oracle_depth,
        width: rep.width,
        rmse: mse.sqrt(),
        trials: cfg.trials,
        seed: cfg.seed,
    };
    Ok((row, runs))
}

/// Rows ordered by strategy, then a, then K.
pub fn run_rmse_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let cache = ShifterCache::new();
    let mut rows = Vec::new();
    for &strategy in &cfg.strategies {
        for &a in &cfg.amplitudes {
            for k in cfg.k_min..=cfg.k_max {
                rows.push(run_point(cfg, a, k, strategy, &cache)?.0);
            }
        }
    }
    Ok(rows)
}

pub fn rows_header() -> &'static str {
    "a,K,strategy,N,oracle_depth,width,rmse,trials,seed"
}

pub fn row_fields(r: &ResultRow) -> Vec<String> {
    vec![
        r.a.to_string(),
        r.k.to_string(),
        strategy_name(r.strategy),
        r.n.to_string(),
        r.oracle_depth.to_string(),
        r.width.to_string(),
        r.rmse.to_string(),
        r.trials.to_string(),
        r.seed.to_string(),
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiasRow {
    pub k: u32,
    pub p: u64,
    pub t: u64,
    pub l_plus: usize,
    pub l_i: usize,
    pub beta_plus: f64,
    pub a_plus: f64,
    pub beta_i: f64,
    pub a_i: f64,
    pub shots: u64,
}

/// Ideal (PLUS, PLUS_I) probabilities (1 + cos Mφ)/2, (1 + sin Mφ)/2.
pub fn ideal_probabilities(m: f64, phi: f64) -> (f64, f64) {
    let (s, c) = (m * phi).sin_cos();
    (0.5 * (1.0 + c), 0.5 * (1.0 + s))
}

/// Largest |f − p_ideal| over the amplitude grid for one step, with the
/// PLUS and PLUS_I shifters of length `l_plus` and `l_i`.
#[allow(clippy::too_many_arguments)]
pub fn measure_bias(
    step: &StepPlan,
    l_plus: usize,
    l_i: usize,
    amps: &[f64],
    n: usize,
    shots: u64,
    backend: Backend,
    seed: u64,
    cache: &ShifterCache,
) -> Result<BiasRow> {
    bias_scan(
        step,
        l_plus,
        l_i,
        amps,
        n,
        Some((shots, seed)),
        backend,
        cache,
    )
}

/// Same scan on exact probabilities (no shot noise); `shots` is reported as 0.
pub fn exact_bias(
    step: &StepPlan,
    l_plus: usize,
    l_i: usize,
    amps: &[f64],
    n: usize,
    backend: Backend,
    cache: &ShifterCache,
) -> Result<BiasRow> {
    bias_scan(step, l_plus, l_i, amps, n, None, backend, cache)
}

#[allow(clippy::too_many_arguments)]
fn bias_scan(
    step: &StepPlan,
    l_plus: usize,
    l_i: usize,
    amps: &[f64],
    n: usize,
    sampling: Option<(u64, u64)>,
    backend: Backend,
    cache: &ShifterCache,
) -> Result<BiasRow> {
    let per_a = amps
        .par_iter()
        .map(|&a| {
            let inst = make_instance(a, n)?;
            let (ip, ii) = ideal_probabilities(step.m as f64, inst.phi);
            let pp = step_probabilities(&StepPlan { l: l_plus, ..*step }, &inst, backend, cache)?.0;
            let pi = step_probabilities(&StepPlan { l: l_i, ..*step }, &inst, backend, cache)?.1;
            let (fp, fi) = match sampling {
                None => (pp, pi),
                Some(_) if matches!(backend, Backend::Ideal) => (pp, pi),
                Some((shots, seed)) => {
                    let s0 = mix_seed(seed, &[a.to_bits(), step.k as u64, l_plus as u64, 0]);
                    let s1 = mix_seed(seed, &[a.to_bits(), step.k as u64, l_i as u64, 1]);
                    (
                        sample_counts(pp, shots, s0) as f64 / shots as f64,
                        sample_counts(pi, shots, s1) as f64 / shots as f64,
                    )
                }
            };
            Ok((a, (fp - ip).abs(), (fi - ii).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut row = BiasRow {
        k: step.k,
        p: step.p,
        t: step.t * step.s,
        l_plus,
        l_i,
        beta_plus: 0.0,
        a_plus: f64::NAN,
        beta_i: 0.0,
        a_i: f64::NAN,
        shots: sampling.map_or(0, |s| s.0),
    };
    for (a, bp, bi) in per_a {
        if !(bp <= row.beta_plus) {
            row.beta_plus = bp;
            row.a_plus = a;
        }
        if !(bi <= row.beta_i) {
            row.beta_i = bi;
            row.a_i = a;
        }
    }
    Ok(row)
}

/// One row per (k, L). With no `l_values`, the schedule's L is used; the S5
/// mode then takes each setting's own calibrated table.
pub fn run_bias_sweep(cfg: &ExperimentConfig) -> Result<Vec<BiasRow>> {
    cfg.validate()?;
    let cache = ShifterCache::new();
    let strategy = cfg.strategies[0];
    let sched = build_schedule_k(cfg.k_max, &cfg.schedule_options(strategy))?;
    let mut rows = Vec::new();
    for step in sched.steps.iter().filter(|s| s.k >= cfg.k_min) {
        let pairs: Vec<(usize, usize)> = if cfg.l_values.is_empty() {
            let i = (step.k - 1) as usize;
            match cfg.l_mode {
                LMode::S5 => vec![(S5_PLUS_TABLE[i], S5_PLUS_I_TABLE[i])],
                _ => vec![(step.l, step.l)],
            }
        } else {
            cfg.l_values.iter().map(|&l| (l, l)).collect()
        };
        for (lp, li) in pairs {
            rows.push(measure_bias(
                step,
                lp,
                li,
                &cfg.amplitudes,
                cfg.n,
                cfg.shots,
                cfg.backend,
                cfg.seed,
                &cache,
            )?);
        }
    }
    Ok(rows)
}

pub fn bias_header() -> &'static str {
    "k,P,T,L_plus,L_i,beta_plus,a_plus,beta_i,a_i,shots"
}

pub fn bias_fields(r: &BiasRow) -> Vec<String> {
    vec![
        r.k.to_string(),
        r.p.to_string(),
        r.t.to_string(),
        r.l_plus.to_string(),
        r.l_i.to_string(),
        r.beta_plus.to_string(),
        r.a_plus.to_string(),
        r.beta_i.to_string(),
        r.a_i.to_string(),
        r.shots.to_string(),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TlRow {
    pub t: f64,
    /// Continuous crossing of the factorial bound with the bias threshold.
    pub l_star: f64,
    /// Nearest even integer to l_star (at least 2).
    pub l_even: usize,
    /// Smallest even L strictly below the threshold.
    pub l_strict: usize,
}

/// T = 1, 2, 4, 8 and every integer from 10 to 100.
pub fn default_t_values() -> Vec<f64> {
    [1.0, 2.0, 4.0, 8.0]
        .into_iter()
        .chain((10..=100).map(f64::from))
        .collect()
}

pub fn tl_row(t: f64) -> TlRow {
    let ls = l_star(t, EMPIRICAL_DELTA);
    TlRow {
        t,
        l_star: ls,
        l_even: (2 * (0.5 * ls).round() as usize).max(2),
        l_strict: min_l_for_delta(t, EMPIRICAL_DELTA),
    }
}

pub fn run_tl_curve(cfg: &ExperimentConfig) -> Vec<TlRow> {
    let ts = if cfg.t_values.is_empty() {
        default_t_values()
    } else {
        cfg.t_values.clone()
    };
    ts.into_iter().map(tl_row).collect()
}

/// Least-squares line through (T, L*) for T in [lo, hi]: (slope, intercept).
pub fn tl_fit(rows: &[TlRow], lo: f64, hi: f64) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.t >= lo && r.t <= hi)
        .map(|r| (r.t, r.l_star))
        .collect();
    linear_fit(&pts)
        .ok_or_else(|| PaeError::Domain(format!("fewer than two T values in [{lo}, {hi}]")))
}

pub fn linear_fit(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

pub fn tl_header() -> &'static str {
    "T,L_star,L_even,L_strict"
}

pub fn tl_fields(r: &TlRow) -> Vec<String> {
    vec![
        r.t.to_string(),
        r.l_star.to_string(),
        r.l_even.to_string(),
        r.l_strict.to_string(),
    ]
}
