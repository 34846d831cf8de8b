//! Dense statevector simulation of the full (n+1)·P-qubit circuit.
//!
//! Qubit layout is big-endian in blocks: branch b occupies qubits
//! b(n+1) (its ancilla) through b(n+1)+n (its oracle register, flag last).

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::{sample_counts, MeasurementSetting, ParallelCircuit, Shifter};
use crate::core_model::{build_explicit_oracle, build_grover_unitary, OracleStyle};
use crate::error::{PaeError, Result};
use crate::qsp_synthesis::gammas;

pub const MAX_STATEVECTOR_QUBITS: usize = 22;

/// Entangling layers of the CNOT fan-out ladder preparing |GHZ_P⟩.
pub fn ghz_depth(p: usize) -> u32 {
    assert!(p >= 1);
    usize::BITS - (p - 1).leading_zeros()
}

fn rx(gamma: f64) -> DMatrix<C64> {
    let (s, c) = (0.5 * gamma).sin_cos();
    DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(c, 0.0),
            C64::new(0.0, -s),
            C64::new(0.0, -s),
            C64::new(c, 0.0),
        ],
    )
}

/// V on ancilla ⊗ n-qubit register: Π_j (R_x(γ_j)⊗I) W_j (R_x(−γ_j)⊗I) with
/// W_Q = cQ·(R_z(π/2)⊗I) on even j and W_Q† on odd j (1-indexed).
pub fn explicit_shifter(shifter: &Shifter, q: &DMatrix<C64>, phi: f64) -> DMatrix<C64> {
    let dim = q.nrows();
    let id = DMatrix::<C64>::identity(dim, dim);
    match shifter {
        Shifter::Ideal { t } => {
            let e = C64::new(0.0, -0.5 * t * phi).exp();
            let d = DMatrix::from_diagonal(&DVector::from_vec(vec![e, e.conj()]));
            d.kronecker(&id)
        }
        Shifter::Synthesized(spec) => {
            let em = C64::new(0.0, -FRAC_PI_4).exp();
            let mut w = DMatrix::<C64>::zeros(2 * dim, 2 * dim);
            for i in 0..dim {
                w[(i, i)] = em;
            }
            let qp = q * em.conj();
            w.view_mut((dim, dim), (dim, dim)).copy_from(&qp);
            let wd = w.adjoint();
            let mut v = DMatrix::<C64>::identity(2 * dim, 2 * dim);
            for (j, &g) in gammas(&spec.angles.xi).iter().enumerate() {
                let r = rx(g).kronecker(&id);
                let rinv = rx(-g).kronecker(&id);
                let wj = if j % 2 == 0 { &wd } else { &w };
                v = v * r * wj * rinv;
            }
            v
        }
    }
}

struct State {
    amp: Vec<C64>,
    nq: usize,
}

impl State {
    fn new(nq: usize) -> Self {
        let mut amp = vec![C64::new(0.0, 0.0); 1 << nq];
        amp[0] = C64::new(1.0, 0.0);
        State { amp, nq }
    }

    fn bit(&self, q: usize) -> usize {
        1 << (self.nq - 1 - q)
    }

    fn apply_1q(&mut self, q: usize, u: [[C64; 2]; 2]) {
        let m = self.bit(q);
        for i in 0..self.amp.len() {
            if i & m == 0 {
                let (a, b) = (self.amp[i], self.amp[i | m]);
                self.amp[i] = u[0][0] * a + u[0][1] * b;
                self.amp[i | m] = u[1][0] * a + u[1][1] * b;
            }
        }
    }

    fn cnot(&mut self, c: usize, t: usize) {
        let (mc, mt) = (self.bit(c), self.bit(t));
        for i in 0..self.amp.len() {
            if i & mc != 0 && i & mt == 0 {
                self.amp.swap(i, i | mt);
            }
        }
    }

    /// Applies a dense operator to `width` contiguous qubits starting at `first`.
    fn apply_block(&mut self, first: usize, width: usize, op: &DMatrix<C64>) {
        let low = self.nq - first - width;
        let bdim = 1usize << width;
        let lo_n = 1usize << low;
        let hi_n = self.amp.len() / (bdim * lo_n);
        let mut buf = vec![C64::new(0.0, 0.0); bdim];
        for hi in 0..hi_n {
            for lo in 0..lo_n {
                let idx = |k: usize| (hi * bdim + k) * lo_n + lo;
                for (k, b) in buf.iter_mut().enumerate() {
                    *b = self.amp[idx(k)];
                }
                for r in 0..bdim {
                    let mut acc = C64::new(0.0, 0.0);
                    for (k, b) in buf.iter().enumerate() {
                        acc += op[(r, k)] * b;
                    }
                    self.amp[idx(r)] = acc;
                }
            }
        }
    }
}

/// Exact even-parity probability from the full statevector.
pub fn statevector_probability(
    circuit: &ParallelCircuit,
    setting: MeasurementSetting,
    style: OracleStyle,
) -> Result<f64> {
    let n = circuit.instance.n;
    let p = circuit.p;
    let width = n + 1;
    let nq = width * p;
    if nq > MAX_STATEVECTOR_QUBITS {
        return Err(PaeError::Capacity(format!(
            "{nq} qubits exceed the statevector limit of {MAX_STATEVECTOR_QUBITS}"
        )));
    }
    let oracle = build_explicit_oracle(&circuit.instance, style);
    let q = build_grover_unitary(&oracle);
    let mut v = explicit_shifter(&circuit.shifter, &q, circuit.instance.phi);
    if circuit.s > 1 {
        let one = v.clone();
        for _ in 1..circuit.s {
            v = &v * &one;
        }
    }

    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let hadamard = [[h, h], [h, -h]];
    let anc = |b: usize| b * width;
    let mut st = State::new(nq);
    st.apply_1q(anc(0), hadamard);
    let mut have = 1;
    while have < p {
        for i in 0..have.min(p - have) {
            st.cnot(anc(i), anc(i + have));
        }
        have *= 2;
    }
    for b in 0..p {
        st.apply_block(anc(b), width, &v);
    }
    if setting == MeasurementSetting::PlusI {
        let e = C64::new(0.0, FRAC_PI_4).exp();
        let zero = C64::new(0.0, 0.0);
        st.apply_1q(anc(0), [[e, zero], [zero, e.conj()]]);
    }
    for b in 0..p {
        st.apply_1q(anc(b), hadamard);
    }
    let masks: Vec<usize> = (0..p).map(|b| st.bit(anc(b))).collect();
    let even: f64 = st
        .amp
        .iter()
        .enumerate()
        .filter(|(i, _)| masks.iter().filter(|&&m| i & m != 0).count() % 2 == 0)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    Ok(even.clamp(0.0, 1.0))
}

/// Even-parity count from the statevector probability, sampled exactly as
/// the analytic backend samples.
pub fn statevector_run(
    circuit: &ParallelCircuit,
    setting: MeasurementSetting,
    shots: u64,
    seed: u64,
    style: OracleStyle,
) -> Result<u64> {
    let p = statevector_probability(circuit, setting, style)?;
    Ok(sample_counts(p, shots, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ghz_layers() {
        assert_eq!(ghz_depth(1), 0);
        assert_eq!(ghz_depth(2), 1);
        assert_eq!(ghz_depth(3), 2);
        assert_eq!(ghz_depth(64), 6);
        assert_eq!(ghz_depth(65), 7);
    }
}
