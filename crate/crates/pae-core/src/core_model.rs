//! Problem instance, Grover operator on its invariant plane, and the explicit
//! n-qubit oracle used by the statevector backend.
//!
//! Qubit order is big-endian: qubit 0 is the most significant bit of a basis
//! index and the flag qubit is the last (least significant) one.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{PaeError, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplitudeInstance {
    pub a: f64,
    pub theta: f64,
    pub phi: f64,
    pub n: usize,
}

impl AmplitudeInstance {
    /// Phase the shifter imprints per unit of T: φ = 2cos2θ.
    pub fn phase(&self) -> f64 {
        self.phi
    }
}

pub fn make_instance(a: f64, n: usize) -> Result<AmplitudeInstance> {
    if !(0.0..=1.0).contains(&a) || a.is_nan() {
        return Err(PaeError::Domain(format!("amplitude {a} outside [0, 1]")));
    }
    if n < 2 {
        return Err(PaeError::Domain(format!(
            "oracle needs n >= 2 qubits, got {n}"
        )));
    }
    let theta = a.sqrt().asin();
    Ok(AmplitudeInstance {
        a,
        theta,
        phi: 2.0 * (1.0 - 2.0 * a),
        n,
    })
}

/// Q restricted to span{|0…0⟩, |ψ⟩}.
#[derive(Clone, Debug)]
pub struct GroverPlaneOperator {
    pub matrix: Matrix2<C64>,
    /// Eigenphases attached to |Q+⟩ and |Q−⟩ respectively.
    pub eigenphases: (f64, f64),
}

impl GroverPlaneOperator {
    /// |Q±⟩ = (|0…0⟩ ± i|ψ⟩)/√2 in plane coordinates.
    pub fn eigenvector(sign: f64) -> Vector2<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Vector2::new(C64::new(s, 0.0), C64::new(0.0, sign * s))
    }
}

pub fn grover_plane(inst: &AmplitudeInstance) -> GroverPlaneOperator {
    let (s, c) = (2.0 * inst.theta).sin_cos();
    let matrix = Matrix2::new(
        C64::new(c, 0.0),
        C64::new(-s, 0.0),
        C64::new(s, 0.0),
        C64::new(c, 0.0),
    );
    GroverPlaneOperator {
        matrix,
        eigenphases: (-2.0 * inst.theta, 2.0 * inst.theta),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleStyle {
    Canonical,
    Random(u64),
}

#[derive(Clone, Debug)]
pub struct ExplicitOracle {
    pub n: usize,
    pub inst: AmplitudeInstance,
    pub u_a: DMatrix<C64>,
    pub psi0: DVector<C64>,
    pub psi1: DVector<C64>,
}

/// Haar-random unitary via QR of a complex Ginibre matrix with the R-diagonal
/// phases divided out.
pub fn haar_unitary(dim: usize, seed: u64) -> DMatrix<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= ph;
        }
    }
    q
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

pub fn build_explicit_oracle(inst: &AmplitudeInstance, style: OracleStyle) -> ExplicitOracle {
    let n = inst.n;
    let reg = 1usize << (n - 1);
    let (s, c) = inst.theta.sin_cos();
    let ry = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(c, 0.0),
            C64::new(-s, 0.0),
            C64::new(s, 0.0),
            C64::new(c, 0.0),
        ],
    );
    let canonical = kron(&DMatrix::identity(reg, reg), &ry);
    let w = match style {
        OracleStyle::Canonical => DMatrix::identity(reg, reg),
        OracleStyle::Random(seed) => haar_unitary(reg, seed),
    };
    let u_a = kron(&w, &DMatrix::identity(2, 2)) * canonical;
    let psi = w.column(0).into_owned();
    ExplicitOracle {
        n,
        inst: *inst,
        u_a,
        psi0: psi.clone(),
        psi1: psi,
    }
}

pub fn zero_state(dim: usize) -> DVector<C64> {
    let mut v = DVector::from_element(dim, ZERO);
    v[0] = ONE;
    v
}

/// Q = U₀ U_a† U_f U_a with U₀ = 2|0⟩⟨0| − I and U_f = 2 I⊗|0⟩⟨0| − I.
pub fn build_grover_unitary(oracle: &ExplicitOracle) -> DMatrix<C64> {
    let dim = 1usize << oracle.n;
    let ua = &oracle.u_a;
    // U_f is diagonal: +1 when the flag bit is 0.
    let mut uf_ua = ua.clone();
    for i in 0..dim {
        if i & 1 == 1 {
            for j in 0..dim {
                uf_ua[(i, j)] = -uf_ua[(i, j)];
            }
        }
    }
    let mut q = ua.adjoint() * uf_ua;
    // U₀ = 2|0⟩⟨0| − I: negate every row, then add twice row 0 back.
    for v in q.iter_mut() {
        *v = -*v;
    }
    for j in 0..dim {
        q[(0, j)] = -q[(0, j)];
    }
    q
}

/// Orthonormal pair (|0…0⟩, |ψ⟩) spanning the Grover plane, with
/// |ψ⟩ = U_a†(−sinθ|ψ₀,0⟩ + cosθ|ψ₁,1⟩).
pub fn grover_plane_basis(oracle: &ExplicitOracle) -> (DVector<C64>, DVector<C64>) {
    let dim = 1usize << oracle.n;
    let (s, c) = oracle.inst.theta.sin_cos();
    let mut v = DVector::from_element(dim, ZERO);
    for r in 0..dim / 2 {
        v[2 * r] = oracle.psi0[r] * (-s);
        v[2 * r + 1] = oracle.psi1[r] * c;
    }
    (zero_state(dim), oracle.u_a.adjoint() * v)
}

/// Max-entry absolute difference.
pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn unitarity_error(u: &DMatrix<C64>) -> f64 {
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &DMatrix::identity(n, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_boundaries() {
        let i0 = make_instance(0.0, 2).unwrap();
        assert_eq!((i0.theta, i0.phi), (0.0, 2.0));
        let i1 = make_instance(1.0, 2).unwrap();
        assert!((i1.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(i1.phi, -2.0);
        let s = (std::f64::consts::PI / 8.0).sin().powi(2);
        let i = make_instance(s, 3).unwrap();
        assert!((i.theta - std::f64::consts::PI / 8.0).abs() < 1e-12);
        assert!((i.phi - 2f64.sqrt()).abs() < 1e-12);
        assert!(make_instance(1.2, 2).is_err());
        assert!(make_instance(0.3, 1).is_err());
    }

    #[test]
    fn plane_matrices() {
        let q = grover_plane(&make_instance(0.25, 2).unwrap()).matrix;
        let h = 3f64.sqrt() / 2.0;
        let want = [[0.5, -h], [h, 0.5]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((q[(i, j)] - C64::new(want[i][j], 0.0)).norm() < 1e-12);
            }
        }
        let q = grover_plane(&make_instance(0.5, 2).unwrap()).matrix;
        assert!((q[(0, 1)] + ONE).norm() < 1e-12 && q[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn canonical_a1_maps_to_flag() {
        let o = build_explicit_oracle(&make_instance(1.0, 2).unwrap(), OracleStyle::Canonical);
        let out = &o.u_a * zero_state(4);
        assert!((out[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_oracle_flag_weight() {
        let o = build_explicit_oracle(&make_instance(0.3, 3).unwrap(), OracleStyle::Random(7));
        let out = &o.u_a * zero_state(8);
        let w: f64 = (0..4).map(|r| out[2 * r + 1].norm_sqr()).sum();
        assert!((w - 0.3).abs() < 1e-12);
        assert!(unitarity_error(&o.u_a) < 1e-12);
    }

    #[test]
    fn grover_overlap_random() {
        let o = build_explicit_oracle(&make_instance(0.25, 3).unwrap(), OracleStyle::Random(7));
        let q = build_grover_unitary(&o);
        assert!((q[(0, 0)] - C64::new(0.5, 0.0)).norm() < 1e-12);
    }
}
