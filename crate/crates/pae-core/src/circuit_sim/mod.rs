//! GHZ-parallel PAE circuit: exact even-parity probabilities by contracting
//! each branch over its Grover-plane index, shot sampling, and a dense
//! statevector backend for cross-checks.

mod statevector;

use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::core_model::AmplitudeInstance;
use crate::qsp_synthesis::{ideal_branch_unitary, PhaseShifterSpec};

pub use statevector::{
    explicit_shifter, ghz_depth, statevector_probability, statevector_run, MAX_STATEVECTOR_QUBITS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasurementSetting {
    /// X-parity.
    Plus,
    /// X-parity after e^{iπZ/4} on the first ancilla.
    PlusI,
}

impl MeasurementSetting {
    pub const BOTH: [MeasurementSetting; 2] = [MeasurementSetting::Plus, MeasurementSetting::PlusI];
}

/// What each branch applies: a synthesized QSP shifter or the exact Ṽ.
#[derive(Clone, Debug)]
pub enum Shifter {
    Synthesized(Arc<PhaseShifterSpec>),
    Ideal { t: f64 },
}

impl Shifter {
    pub fn t(&self) -> f64 {
        match self {
            Shifter::Synthesized(s) => s.t,
            Shifter::Ideal { t } => *t,
        }
    }

    /// Queries to U_a/U_a† per application (0 for the ideal stand-in).
    pub fn queries(&self) -> usize {
        match self {
            Shifter::Synthesized(s) => s.queries(),
            Shifter::Ideal { .. } => 0,
        }
    }

    pub fn unitary(&self, inst: &AmplitudeInstance) -> Matrix4<C64> {
        match self {
            Shifter::Synthesized(s) => s.branch_unitary(inst.theta),
            Shifter::Ideal { t } => ideal_branch_unitary(*t, inst.phi),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ParallelCircuit {
    pub p: usize,
    pub shifter: Shifter,
    pub s: u32,
    pub instance: AmplitudeInstance,
}

impl ParallelCircuit {
    pub fn new(p: usize, shifter: Shifter, s: u32, instance: AmplitudeInstance) -> Self {
        assert!(p >= 1 && s >= 1, "P and S must be positive");
        ParallelCircuit {
            p,
            shifter,
            s,
            instance,
        }
    }

    /// M = P·T·S.
    pub fn multiplier(&self) -> f64 {
        self.p as f64 * self.shifter.t() * self.s as f64
    }

    /// Per-branch unitary V^S on ancilla ⊗ Grover plane.
    pub fn branch_unitary(&self) -> Matrix4<C64> {
        self.shifter.unitary(&self.instance).pow(self.s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchState {
    pub phi0: Vector4<C64>,
    pub phi1: Vector4<C64>,
}

/// Φʲ = V^S |j⟩ ⊗ |0̄⟩, where |0̄⟩ = (|Q+⟩ + |Q−⟩)/√2 is plane index 0.
pub fn branch_states(circuit: &ParallelCircuit) -> BranchState {
    let u = circuit.branch_unitary();
    BranchState {
        phi0: u.column(0).into_owned(),
        phi1: u.column(2).into_owned(),
    }
}

/// ⟨a|X ⊗ I|b⟩ on ancilla ⊗ plane.
fn x_overlap(a: &Vector4<C64>, b: &Vector4<C64>) -> C64 {
    a[0].conj() * b[2] + a[1].conj() * b[3] + a[2].conj() * b[0] + a[3].conj() * b[1]
}

/// e^{iπZ/4} on the ancilla.
fn phase_ancilla(v: &Vector4<C64>) -> Vector4<C64> {
    let e = C64::new(0.0, FRAC_PI_4).exp();
    Vector4::new(v[0] * e, v[1] * e, v[2] * e.conj(), v[3] * e.conj())
}

/// Exact probability of even X-parity over the P ancillas:
/// ½ + ¼ Σ_{j,j'} Π_b ⟨Φʲ_b|X⊗I|Φʲ'_b⟩, with the PlusI phase on branch 0.
pub fn setting_probability(circuit: &ParallelCircuit, setting: MeasurementSetting) -> f64 {
    parity_probability(&branch_states(circuit), circuit.p, setting)
}

pub fn parity_probability(bs: &BranchState, p: usize, setting: MeasurementSetting) -> f64 {
    let first = match setting {
        MeasurementSetting::Plus => bs.clone(),
        MeasurementSetting::PlusI => BranchState {
            phi0: phase_ancilla(&bs.phi0),
            phi1: phase_ancilla(&bs.phi1),
        },
    };
    let rest = (p - 1) as u32;
    let phis = [&bs.phi0, &bs.phi1];
    let firsts = [&first.phi0, &first.phi1];
    let mut total = C64::new(0.0, 0.0);
    for j in 0..2 {
        for k in 0..2 {
            total += x_overlap(firsts[j], firsts[k]) * x_overlap(phis[j], phis[k]).powu(rest);
        }
    }
    (0.5 + 0.25 * total.re).clamp(0.0, 1.0)
}

/// Even-parity count out of `shots`, one Bernoulli(p) per shot (drawn as a
/// single binomial variate).
pub fn sample_counts(probability: f64, shots: u64, seed: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(probability, shots, &mut rng)
}

pub fn sample_with(probability: f64, shots: u64, rng: &mut ChaCha8Rng) -> u64 {
    let p = probability.clamp(0.0, 1.0);
    Binomial::new(shots, p)
        .expect("probability clamped to [0, 1]")
        .sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_model::make_instance;

    #[test]
    fn ideal_single_branch_at_phi_zero() {
        let c = ParallelCircuit::new(
            1,
            Shifter::Ideal { t: 1.0 },
            1,
            make_instance(0.5, 2).unwrap(),
        );
        assert!((setting_probability(&c, MeasurementSetting::Plus) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ideal_two_branches_a0() {
        let c = ParallelCircuit::new(
            2,
            Shifter::Ideal { t: 1.0 },
            1,
            make_instance(0.0, 2).unwrap(),
        );
        let p = setting_probability(&c, MeasurementSetting::Plus);
        assert!((p - (1.0 + 4f64.cos()) / 2.0).abs() < 1e-12);
        assert!((p - 0.173_178_189_568_194_7).abs() < 1e-12);
    }

    #[test]
    fn sampling_extremes() {
        assert_eq!(sample_counts(1.0, 1000, 3), 1000);
        assert_eq!(sample_counts(0.0, 1000, 3), 0);
        let h = sample_counts(0.5, 100_000, 11) as i64;
        assert!((h - 50_000).abs() <= 790);
        assert_eq!(sample_counts(0.3, 5000, 9), sample_counts(0.3, 5000, 9));
    }
}
