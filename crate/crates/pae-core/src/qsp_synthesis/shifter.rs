//! The engineered phase shifter V_{φ,T} on ancilla ⊗ Grover plane.

use std::f64::consts::{E, FRAC_PI_2, PI};

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64 as C64;
use statrs::function::gamma::ln_gamma;

use super::complete::{complete_target, delta_bound, truncate_target, DELTA_FLOOR};
use super::solve::{realized, solve_angles, AngleSequence, SolveMethod};
use crate::core_model::{AmplitudeInstance, GroverPlaneOperator};
use crate::error::{PaeError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseShifterSpec {
    pub t: f64,
    pub l: usize,
    pub angles: AngleSequence,
    /// Certified per-application state error, 17√δ at the synthesized degree.
    pub eps_oc: f64,
}

/// Largest even L' ≤ L with δ(T, L') ≥ DELTA_FLOOR (at least 2).
pub fn synthesis_degree(t: f64, l: usize) -> usize {
    let mut le = l;
    while le > 2 && delta_bound(t, le) < DELTA_FLOOR {
        le -= 2;
    }
    le
}

impl PhaseShifterSpec {
    /// Synthesizes V_{φ,T} with query length L. Degrees whose truncation
    /// error is below DELTA_FLOOR are solved at the largest degree above it
    /// and padded with identity layer pairs.
    pub fn synthesize(t: f64, l: usize, method: &SolveMethod) -> Result<Self> {
        let le = synthesis_degree(t, l);
        let target = truncate_target(t, le)?;
        let completed = complete_target(&target)?;
        let mut angles = solve_angles(&completed, method)?;
        for _ in 0..(l - le) / 2 {
            angles.xi.extend_from_slice(&[-PI, 0.0]);
        }
        Ok(Self::from_angles(t, angles))
    }

    pub fn from_angles(t: f64, angles: AngleSequence) -> Self {
        let l = angles.len();
        let delta = delta_bound(t, synthesis_degree(t, l)).max(DELTA_FLOOR);
        PhaseShifterSpec {
            t,
            l,
            angles,
            eps_oc: 17.0 * delta.sqrt(),
        }
    }

    /// Calls to U_a or U_a† per application: each W_Q contributes one after
    /// the adjacent U_a† U_a pairs cancel.
    pub fn queries(&self) -> usize {
        self.l
    }

    pub fn branch_unitary(&self, theta: f64) -> Matrix4<C64> {
        build_branch_unitary(self, theta)
    }
}

/// Kronecker product of an ancilla 2×2 with a Grover-plane 2×2.
pub fn kron2(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    Matrix4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

/// Σ_± U(θ_{Q±}) ⊗ |Q±⟩⟨Q±| with θ_{Q±} = ∓2θ + π/2, basis index 2·ancilla + plane.
pub fn build_branch_unitary(spec: &PhaseShifterSpec, theta: f64) -> Matrix4<C64> {
    let mut out = Matrix4::zeros();
    for s in [1.0, -1.0] {
        let x = -s * 2.0 * theta + FRAC_PI_2;
        let u = realized(&spec.angles.xi, x);
        let v = GroverPlaneOperator::eigenvector(s);
        out += kron2(&u, &(v * v.adjoint()));
    }
    out
}

/// diag(e^{−iTφ/2}, e^{iTφ/2}) ⊗ I.
pub fn ideal_branch_unitary(t: f64, phi: f64) -> Matrix4<C64> {
    let e = C64::new(0.0, -0.5 * t * phi).exp();
    Matrix4::from_diagonal(&Vector4::new(e, e, e.conj(), e.conj()))
}

/// max_j ‖(V^S − Ṽ^S)|j⟩|0̄⟩‖ at the given instance.
pub fn shifter_state_error(spec: &PhaseShifterSpec, inst: &AmplitudeInstance, s: u32) -> f64 {
    let v = spec.branch_unitary(inst.theta).pow(s);
    let ideal = ideal_branch_unitary(spec.t, inst.phi).pow(s);
    let diff = v - ideal;
    // |j⟩|0̄⟩ is basis column 2j.
    (0..2)
        .map(|j| diff.column(2 * j).norm())
        .fold(0.0, f64::max)
}

/// Smallest even integer ≥ e²T + 4 ln(1/ε) + 10.
pub fn select_l(t: f64, eps_oc: f64) -> Result<usize> {
    if !(eps_oc > 0.0 && eps_oc < 1.0) {
        return Err(PaeError::Domain(format!(
            "eps_oc = {eps_oc} outside (0, 1)"
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(PaeError::Domain(format!("T = {t} must be non-negative")));
    }
    Ok(ceil_even(E * E * t + 4.0 * (1.0 / eps_oc).ln() + 10.0))
}

/// Smallest even integer ≥ v, ignoring excess below 1e-12 relative.
fn ceil_even(v: f64) -> usize {
    let c = (v - 1e-12 * v.abs().max(1.0)).ceil() as usize;
    c + c % 2
}

/// Bias threshold on δ used to read off the empirical T-L table.
pub const EMPIRICAL_DELTA: f64 = 3.813e-5;

/// Continuous L solving 4T^{L/2+1}/(2^{L/2+1}Γ(L/2+2)) = δ; 0 if the bound
/// is already below δ at L = 0.
pub fn l_star(t: f64, delta: f64) -> f64 {
    let g = |l: f64| {
        4f64.ln() + (0.5 * l + 1.0) * (0.5 * t).ln() - ln_gamma(0.5 * l + 2.0) - delta.ln()
    };
    if !(t > 0.0) || g(0.0) <= 0.0 {
        return 0.0;
    }
    let mut hi = 2.0;
    while g(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Nearest even L to the equality curve for T < 10, linear fit beyond.
pub fn select_l_empirical(t: f64) -> usize {
    if t >= 10.0 {
        return 2 * ((2.72 * t + 13.64) / 2.0).ceil() as usize;
    }
    (2 * (0.5 * l_star(t, EMPIRICAL_DELTA)).round() as usize).max(2)
}

/// Smallest even L with δ(T, L) < delta.
pub fn min_l_for_delta(t: f64, delta: f64) -> usize {
    let mut l = 2;
    while delta_bound(t, l) >= delta {
        l += 2;
    }
    l
}

pub fn sequential_error_budget(eps_oc: f64, s: u32) -> f64 {
    s as f64 * eps_oc
}

/// Writes the angle file: header `T L convention residual`, then one angle
/// per line with 17 significant digits.
pub fn format_angles(spec: &PhaseShifterSpec) -> String {
    let mut out = format!(
        "{:e} {} {} {:e}\n",
        spec.t,
        spec.l,
        spec.angles.convention.as_str(),
        spec.angles.residual
    );
    for x in &spec.angles.xi {
        out.push_str(&format!("{x:.16e}\n"));
    }
    out
}

pub fn parse_angles(text: &str) -> Result<PhaseShifterSpec> {
    let bad = |m: &str| PaeError::Config(format!("angle file: {m}"));
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| bad("empty file"))?;
    let f: Vec<&str> = header.split_whitespace().collect();
    if f.len() != 4 {
        return Err(bad("header must be `T L convention residual`"));
    }
    let t: f64 = f[0].parse().map_err(|_| bad("bad T"))?;
    let l: usize = f[1].parse().map_err(|_| bad("bad L"))?;
    if f[2] != "Wz" {
        return Err(bad(&format!("unknown convention {}", f[2])));
    }
    let residual: f64 = f[3].parse().map_err(|_| bad("bad residual"))?;
    let xi = lines
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| bad(&format!("bad angle `{s}`")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if xi.len() != l {
        return Err(bad(&format!("expected {l} angles, found {}", xi.len())));
    }
    let angles = AngleSequence {
        xi,
        convention: super::solve::Convention::Wz,
        residual,
    };
    Ok(PhaseShifterSpec::from_angles(t, angles))
}
