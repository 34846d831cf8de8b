//! Robust phase estimation post-processing: per-step phase recovery,
//! unwrapping against the previous step, and the final map to â.

use std::f64::consts::{PI, TAU};

use crate::error::{PaeError, Result};

/// Robustness limit on the probability bias.
pub const BETA_MAX: f64 = 0.306_186_217_847_897_24; // √6/8

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepObservation {
    pub k: u32,
    pub h_plus: u64,
    pub h_i: u64,
    pub nu: u64,
}

impl StepObservation {
    pub fn new(k: u32, h_plus: u64, h_i: u64, nu: u64) -> Result<Self> {
        if k == 0 || nu == 0 || h_plus > nu || h_i > nu {
            return Err(PaeError::Contract(format!(
                "invalid observation k={k} h+={h_plus} hi={h_i} nu={nu}"
            )));
        }
        Ok(StepObservation { k, h_plus, h_i, nu })
    }

    /// M_k = 2^{k-1}.
    pub fn multiplier(&self) -> f64 {
        (2f64).powi(self.k as i32 - 1)
    }

    pub fn f_plus(&self) -> f64 {
        self.h_plus as f64 / self.nu as f64
    }

    pub fn f_i(&self) -> f64 {
        self.h_i as f64 / self.nu as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseEstimate {
    pub phi_hat: f64,
    pub trajectory: Vec<f64>,
    pub a_hat: f64,
}

/// atan2(2f_i − 1, 2f_+ − 1) moved to [0, 2π). Both arguments zero gives 0.
pub fn step_phase_from(f_plus: f64, f_i: f64) -> f64 {
    let (y, x) = (2.0 * f_i - 1.0, 2.0 * f_plus - 1.0);
    if y == 0.0 && x == 0.0 {
        return 0.0;
    }
    let v = y.atan2(x);
    if v < 0.0 {
        // v + 2π can round up to exactly 2π for tiny negative v.
        let w = v + TAU;
        if w >= TAU {
            0.0
        } else {
            w
        }
    } else {
        v
    }
}

pub fn step_phase(obs: &StepObservation) -> f64 {
    step_phase_from(obs.f_plus(), obs.f_i())
}

/// One unwrapping step. `phi_step` is the raw step phase in [0, 2π).
pub fn unwrap_step(k: u32, phi_step: f64, prev: Option<f64>) -> f64 {
    let m = (2f64).powi(k as i32 - 1);
    let base = phi_step / m;
    let prev = match (k, prev) {
        (1, _) | (_, None) => return base,
        (_, Some(p)) => p,
    };
    let width = PI / (2f64).powi(k as i32 - 2);
    let half = PI / (2f64).powi(k as i32 - 1);
    let eta = (prev / width).floor();
    let lower = base + (eta - 1.0) * width;
    let upper = base + (eta + 1.0) * width;
    if prev - lower <= half {
        lower
    } else if upper - prev < half {
        upper
    } else {
        base + eta * width
    }
}

/// Maps a phase to [−π, π).
pub fn wrap_phase(phi: f64) -> f64 {
    phi - TAU * ((phi + PI) / TAU).floor()
}

pub fn finalize(trajectory: Vec<f64>) -> PhaseEstimate {
    let last = *trajectory.last().expect("at least one step");
    let phi_hat = wrap_phase(last);
    let a_hat = ((2.0 - phi_hat) / 4.0).clamp(0.0, 1.0);
    PhaseEstimate {
        phi_hat,
        trajectory,
        a_hat,
    }
}

/// Full post-processing over steps 1..K in order.
pub fn estimate(obs: &[StepObservation]) -> Result<PhaseEstimate> {
    estimate_from_frequencies(
        &obs.iter()
            .map(|o| (o.f_plus(), o.f_i()))
            .collect::<Vec<_>>(),
    )
}

/// Same as [`estimate`] on raw (f_+, f_i) pairs, step k = index + 1.
pub fn estimate_from_frequencies(freqs: &[(f64, f64)]) -> Result<PhaseEstimate> {
    if freqs.is_empty() {
        return Err(PaeError::Contract("no RPE steps".into()));
    }
    let mut traj = Vec::with_capacity(freqs.len());
    let mut prev = None;
    for (i, &(fp, fi)) in freqs.iter().enumerate() {
        let cur = unwrap_step(i as u32 + 1, step_phase_from(fp, fi), prev);
        traj.push(cur);
        prev = Some(cur);
    }
    Ok(finalize(traj))
}

/// (2π/3)² (4^{−K} + Σ_k e^{−2ν_k(√6/8−β)²} / 4^{k−4}).
pub fn mse_bound(k_max: u32, nu: &[u64], beta: f64) -> Result<f64> {
    if !(beta < BETA_MAX) || beta < 0.0 {
        return Err(PaeError::Domain(format!("beta = {beta} outside [0, √6/8)")));
    }
    if nu.len() != k_max as usize {
        return Err(PaeError::Contract(format!(
            "{} shot counts for K = {k_max}",
            nu.len()
        )));
    }
    let g = (BETA_MAX - beta).powi(2);
    let sum: f64 = nu
        .iter()
        .enumerate()
        .map(|(i, &v)| (-2.0 * v as f64 * g).exp() / 4f64.powi(i as i32 + 1 - 4))
        .sum();
    Ok((TAU / 3.0).powi(2) * (4f64.powi(-(k_max as i32)) + sum))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NuVariant {
    /// 1 + ⌈ln6·(K−k)/(2(√6/8−β)²)⌉.
    Theoretical { beta: f64 },
    /// round-half-even(4.0835(K−k) + ν_K).
    Optimized { nu_k: u64 },
}

pub fn schedule_nu(k_max: u32, k: u32, variant: NuVariant) -> u64 {
    let d = (k_max - k) as f64;
    match variant {
        NuVariant::Theoretical { beta } => {
            let g = (BETA_MAX - beta).powi(2);
            1 + (6f64.ln() * d / (2.0 * g)).ceil() as u64
        }
        NuVariant::Optimized { nu_k } => (4.0835 * d + nu_k as f64).round_ties_even() as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_max_value() {
        assert_eq!(BETA_MAX, 6f64.sqrt() / 8.0);
    }

    #[test]
    fn step_phase_examples() {
        assert_eq!(step_phase_from(1.0, 0.5), 0.0);
        assert!((step_phase_from(0.5, 1.0) - PI / 2.0).abs() < 1e-15);
        assert!((step_phase_from(0.2919, 0.9546) - 2.0).abs() < 1e-3);
        assert_eq!(step_phase_from(0.5, 0.5), 0.0);
        assert!((step_phase_from(0.5, 0.0) - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn finalize_boundaries() {
        let e = finalize(vec![0.0]);
        assert_eq!((e.phi_hat, e.a_hat), (0.0, 0.5));
        let e = finalize(vec![2.0]);
        assert_eq!((e.phi_hat, e.a_hat), (2.0, 0.0));
        let e = finalize(vec![TAU - 2.0]);
        assert!((e.phi_hat + 2.0).abs() < 1e-15);
        assert_eq!(e.a_hat, 1.0);
    }

    #[test]
    fn unwrap_lower_branch() {
        // prev = 0, η = 0: the η−1 candidate π − 0.01 − π lies within π/2.
        let r = unwrap_step(2, 2.0 * (PI - 0.01), Some(0.0));
        assert!((r + 0.01).abs() < 1e-12);
    }

    #[test]
    fn schedules() {
        assert_eq!(schedule_nu(9, 9, NuVariant::Theoretical { beta: 0.05 }), 1);
        assert_eq!(
            schedule_nu(9, 1, NuVariant::Theoretical { beta: 0.05 }),
            111
        );
        assert_eq!(schedule_nu(9, 9, NuVariant::Optimized { nu_k: 7 }), 7);
        assert_eq!(schedule_nu(9, 8, NuVariant::Optimized { nu_k: 7 }), 11);
    }

    #[test]
    fn bound_limits() {
        let b = mse_bound(1, &[u64::MAX], 0.0).unwrap();
        assert!((b - (TAU / 3.0).powi(2) / 4.0).abs() < 1e-15);
        assert!(mse_bound(1, &[1], BETA_MAX).is_err());
        let k = 10;
        let nu: Vec<u64> = (1..=k)
            .map(|j| schedule_nu(k, j, NuVariant::Theoretical { beta: 0.0 }))
            .collect();
        assert!(mse_bound(k, &nu, 0.0).unwrap() < 1e-2);
    }
}
