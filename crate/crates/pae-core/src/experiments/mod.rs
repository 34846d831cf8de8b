//! Declarative experiments: config files, sweeps and their CSV/SVG output.

pub mod config;
pub mod render;
pub mod sweeps;
pub mod verify;

use std::path::{Path, PathBuf};

pub use config::{parse, serialize, strategy_name, ExperimentConfig, ExperimentKind, TCap};
pub use render::{csv, svg, Plot, Scale, Series, XAxis};
pub use sweeps::{
    exact_bias, ideal_probabilities, linear_fit, measure_bias, run_bias_sweep, run_point,
    run_rmse_sweep, run_tl_curve, tl_fit, tl_row, trial_seed, BiasRow, ResultRow, TlRow,
};

use crate::core_model::make_instance;
use crate::error::Result;
use crate::pae_driver::{build_schedule_k, run, ShifterCache};

/// Text artifacts of one experiment, keyed by file stem.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifacts {
    pub csv: Vec<(String, String)>,
    pub svg: Vec<(String, String)>,
}

/// Runs the experiment and renders its outputs without touching disk.
pub fn execute(cfg: &ExperimentConfig) -> Result<Artifacts> {
    cfg.validate()?;
    let stem = cfg.kind.name().to_string();
    match cfg.kind {
        ExperimentKind::RmseVsQueries | ExperimentKind::RmseVsDepth => {
            let rows = run_rmse_sweep(cfg)?;
            let body: Vec<Vec<String>> = rows.iter().map(sweeps::row_fields).collect();
            let x = if cfg.kind == ExperimentKind::RmseVsQueries {
                XAxis::Queries
            } else {
                XAxis::Depth
            };
            Ok(Artifacts {
                csv: vec![(stem.clone(), csv(sweeps::rows_header(), &body))],
                svg: vec![(stem, svg(&render::rmse_plot(&rows, x)))],
            })
        }
        ExperimentKind::BiasSweep => {
            let rows = run_bias_sweep(cfg)?;
            let body: Vec<Vec<String>> = rows.iter().map(sweeps::bias_fields).collect();
            Ok(Artifacts {
                csv: vec![(stem.clone(), csv(sweeps::bias_header(), &body))],
                svg: vec![(stem, svg(&render::bias_plot(&rows)))],
            })
        }
        ExperimentKind::TlCurve => {
            let rows = run_tl_curve(cfg);
            let fit = tl_fit(&rows, 10.0, 100.0).ok();
            let body: Vec<Vec<String>> = rows.iter().map(sweeps::tl_fields).collect();
            let mut csvs = vec![(stem.clone(), csv(sweeps::tl_header(), &body))];
            if let Some((m, c)) = fit {
                csvs.push((
                    format!("{stem}_fit"),
                    csv(
                        "slope,intercept,t_min,t_max",
                        &[vec![
                            m.to_string(),
                            c.to_string(),
                            "10".into(),
                            "100".into(),
                        ]],
                    ),
                ));
            }
            Ok(Artifacts {
                csv: csvs,
                svg: vec![(stem, svg(&render::tl_plot(&rows, fit)))],
            })
        }
        ExperimentKind::SingleRun => single_run(cfg),
    }
}

/// One trial per (strategy, a, K) with per-step records.
fn single_run(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let cache = ShifterCache::new();
    let mut body = Vec::new();
    for &strategy in &cfg.strategies {
        for &a in &cfg.amplitudes {
            let inst = make_instance(a, cfg.n)?;
            let sched = build_schedule_k(cfg.k_max, &cfg.schedule_options(strategy))?;
            let out = run(
                &inst,
                &sched,
                cfg.backend,
                trial_seed(cfg.seed, a, cfg.k_max, 0),
                &cache,
            )?;
            for r in &out.records {
                let p = &r.plan;
                body.push(vec![
                    strategy_name(strategy),
                    a.to_string(),
                    p.k.to_string(),
                    p.p.to_string(),
                    p.t.to_string(),
                    p.s.to_string(),
                    p.l.to_string(),
                    p.nu.to_string(),
                    r.p_plus.to_string(),
                    r.p_i.to_string(),
                    r.h_plus.to_string(),
                    r.h_i.to_string(),
                    out.estimate.trajectory[(p.k - 1) as usize].to_string(),
                    out.estimate.a_hat.to_string(),
                    out.report.n.to_string(),
                ]);
            }
        }
    }
    let header = "strategy,a,k,P,T,S,L,nu,p_plus,p_i,h_plus,h_i,phi_prime,a_hat,N";
    Ok(Artifacts {
        csv: vec![("single_run".into(), csv(header, &body))],
        svg: Vec::new(),
    })
}

/// Writes every artifact under `dir`; returns the paths written.
pub fn write_artifacts(dir: &Path, art: &Artifacts) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for (stem, text) in &art.csv {
        let p = dir.join(format!("{stem}.csv"));
        std::fs::write(&p, text)?;
        out.push(p);
    }
    for (stem, text) in &art.svg {
        let p = dir.join(format!("{stem}.svg"));
        std::fs::write(&p, text)?;
        out.push(p);
    }
    Ok(out)
}
