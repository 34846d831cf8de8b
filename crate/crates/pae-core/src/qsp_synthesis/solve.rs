//! Angle sequences: the realized SU(2) product, layer peeling and a
//! Levenberg-Marquardt refinement of the grid objective.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64 as C64;

use super::complete::{eval_h, CompletedTarget};
use super::grid::{cheb_grid, SOLVE_GRID};
use crate::error::{PaeError, Result};

const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    /// Signal operator e^{i s x Z/2} sandwiched by R_x rotations.
    Wz,
}

impl Convention {
    pub fn as_str(&self) -> &'static str {
        "Wz"
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AngleSequence {
    pub xi: Vec<f64>,
    pub convention: Convention,
    /// Max deviation of the realized U₀₀ from the target on the solve grid.
    pub residual: f64,
}

impl AngleSequence {
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OptimizeStart {
    Zero,
    /// Layer-peel angles, each shifted by a seeded uniform draw in ±jitter.
    LayerPeel {
        jitter: f64,
        seed: u64,
    },
    Given(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveMethod {
    LayerPeel,
    Optimize(OptimizeStart),
}

/// γ_j = ξ_j + π for odd j (1-indexed), ξ_j otherwise.
pub fn gammas(xi: &[f64]) -> Vec<f64> {
    xi.iter()
        .enumerate()
        .map(|(j, &x)| if j % 2 == 0 { x + PI } else { x })
        .collect()
}

fn sign(j: usize) -> f64 {
    if j.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// R_x(γ) e^{i s x Z/2} R_x(−γ) written as e^{isx/2}Π + e^{−isx/2}(I − Π)
/// with Π projecting on R_x(γ)|0⟩.
pub fn layer(gamma: f64, s: f64, x: f64) -> Matrix2<C64> {
    let (sn, cs) = (0.5 * gamma).sin_cos();
    let p00 = cs * cs;
    let p11 = sn * sn;
    let p01 = I * (cs * sn);
    let e = C64::new(0.0, 0.5 * s * x).exp();
    let ec = e.conj();
    let d = e - ec;
    Matrix2::new(ec + d * p00, d * p01, -d * p01, ec + d * p11)
}

/// Realized 2×2 product G_1 G_2 ⋯ G_L at signal phase x.
pub fn realized(xi: &[f64], x: f64) -> Matrix2<C64> {
    let g = gammas(xi);
    let mut u = Matrix2::identity();
    for (j, &gj) in g.iter().enumerate() {
        u *= layer(gj, sign(j), x);
    }
    u
}

/// Realized (A, B, C, D) with U = [[A+iC, iB−D], [iB+D, A−iC]].
pub fn realized_abcd(xi: &[f64], x: f64) -> [f64; 4] {
    let u = realized(xi, x);
    [u[(0, 0)].re, u[(1, 0)].im, u[(0, 0)].im, u[(1, 0)].re]
}

/// Max over an N-point Chebyshev grid of |U₀₀(x) − (A + iC)(x)|.
pub fn verify_angles(xi: &[f64], a: &[f64], c: &[f64], n: usize) -> f64 {
    cheb_grid(n)
        .iter()
        .map(|&x| (realized(xi, x)[(0, 0)] - eval_h(a, c, x)).norm())
        .fold(0.0, f64::max)
}

pub fn solve_angles(target: &CompletedTarget, method: &SolveMethod) -> Result<AngleSequence> {
    let l = target.l;
    if l % 2 == 1 || l == 0 {
        return Err(PaeError::Contract(format!(
            "query length L = {l} must be even and >= 2"
        )));
    }
    let xi = match method {
        SolveMethod::LayerPeel => layer_peel(&target.a, &target.c, l)?,
        SolveMethod::Optimize(start) => {
            let init = match start {
                OptimizeStart::Zero => vec![0.0; l],
                OptimizeStart::Given(v) => {
                    if v.len() != l {
                        return Err(PaeError::Contract(format!(
                            "initial angles have length {}, expected {l}",
                            v.len()
                        )));
                    }
                    v.clone()
                }
                OptimizeStart::LayerPeel { jitter, seed } => {
                    use rand::{Rng, SeedableRng};
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
                    layer_peel(&target.a, &target.c, l)?
                        .into_iter()
                        .map(|v| v + jitter * (2.0 * rng.random::<f64>() - 1.0))
                        .collect()
                }
            };
            optimize(&target.a, &target.c, init, 200)
        }
    };
    let residual = verify_angles(&xi, &target.a, &target.c, SOLVE_GRID);
    if !(residual <= 1e-8) {
        return Err(PaeError::Synthesis {
            msg: format!(
                "angle solver did not reach 1e-8 for T = {}, L = {l}",
                target.t
            ),
            at: f64::NAN,
            value: residual,
        });
    }
    Ok(AngleSequence {
        xi,
        convention: Convention::Wz,
        residual,
    })
}

fn wrap(v: f64) -> f64 {
    v - 2.0 * PI * ((v + PI) / (2.0 * PI)).floor()
}

// ---------------------------------------------------------------- layer peel

/// Laurent coefficients of P on z = e^{ix}, powers −m..=m (all real).
pub(crate) fn p_coeffs(a: &[f64], c: &[f64]) -> Vec<f64> {
    let m = a.len() - 1;
    let mut p = vec![0.0; 2 * m + 1];
    p[m] = a[0];
    for l in 1..=m {
        p[m + l] = 0.5 * (a[l] + c[l]);
        p[m - l] = 0.5 * (a[l] - c[l]);
    }
    p
}

pub(crate) fn convolve(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len() + y.len() - 1];
    for (i, a) in x.iter().enumerate() {
        for (j, b) in y.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Divides a polynomial (highest power first) by (z − 1).
fn deflate_one(p: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(p.len() - 1);
    let mut acc = 0.0;
    for &v in &p[..p.len() - 1] {
        acc += v;
        out.push(acc);
    }
    out
}

/// Uniform-grid size for the cepstral factorization.
const CEPSTRUM_GRID: usize = 1 << 16;

/// Real coefficients g_0..g_{2m} (ascending) with g(z)g(1/z) = 1 − P(z)P(1/z).
///
/// The double zero of 1 − |P|² at z = 1 is divided out, the positive
/// remainder s is factored as |h|² through the causal part of its cepstrum,
/// and g = (z − 1)h.
pub(crate) fn complement(p: &[f64]) -> Vec<f64> {
    use rustfft::FftPlanner;

    let m = (p.len() - 1) / 2;
    let rev: Vec<f64> = p.iter().rev().copied().collect();
    let mut r: Vec<f64> = convolve(p, &rev).iter().map(|v| -v).collect();
    r[2 * m] += 1.0;
    let rmax = r.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if rmax < 1e-14 {
        return vec![0.0; 2 * m + 1];
    }
    let q = deflate_one(&deflate_one(&r));
    let n = CEPSTRUM_GRID.max(8 * q.len().next_power_of_two());
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    // s(x) = −e^{i(1−2m)x} q(e^{ix}); the forward FFT gives Σ q_k e^{−ikx}.
    let mut buf: Vec<C64> = (0..n)
        .map(|k| C64::new(if k < q.len() { q[k] } else { 0.0 }, 0.0))
        .collect();
    fwd.process(&mut buf);
    let floor = f64::MIN_POSITIVE;
    for (k, v) in buf.iter_mut().enumerate() {
        let x = 2.0 * PI * k as f64 / n as f64;
        let s = -(C64::new(0.0, (1.0 - 2.0 * m as f64) * x).exp() * v.conj()).re;
        *v = C64::new(s.max(floor).ln(), 0.0);
    }
    // Cepstrum c_k with log s = Σ c_k e^{ikx}.
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    let mut hlog = vec![C64::new(0.0, 0.0); n];
    hlog[0] = buf[0] * (0.5 * scale);
    for k in 1..n / 2 {
        hlog[k] = buf[k] * scale;
    }
    // h on the circle, then its Taylor coefficients.
    inv.process(&mut hlog);
    for v in hlog.iter_mut() {
        *v = v.exp();
    }
    fwd.process(&mut hlog);
    let h: Vec<f64> = hlog[..2 * m].iter().map(|v| v.re * scale).collect();
    let mut g = vec![0.0; 2 * m + 1];
    for (k, &hk) in h.iter().enumerate() {
        g[k] -= hk;
        g[k + 1] += hk;
    }
    g
}

/// Peels one layer per step from the Laurent expansion of the full SU(2)
/// target [[P, −Q*], [Q, P*]] with Q = i z^{−m} g(z).
pub fn layer_peel(a: &[f64], c: &[f64], l: usize) -> Result<Vec<f64>> {
    let m = l / 2;
    if a.len() != m + 1 || c.len() != m + 1 {
        return Err(PaeError::Contract(
            "coefficient length must be L/2 + 1".into(),
        ));
    }
    let p = p_coeffs(a, c);
    let g = complement(&p);
    let q: Vec<C64> = g.iter().map(|&v| I * v).collect();
    // Powers of w = e^{ix/2}: index off + power, power in −L..=L.
    let off = l as isize;
    let width = 2 * l + 1;
    let idx = |pw: isize| (off + pw) as usize;
    let mut mats = vec![Matrix2::<C64>::zeros(); width];
    for k in -(m as isize)..=(m as isize) {
        let km = (k + m as isize) as usize;
        let nkm = (m as isize - k) as usize;
        let e = &mut mats[idx(2 * k)];
        e[(0, 0)] += p[km];
        e[(1, 1)] += p[nkm];
        e[(1, 0)] += q[km];
        e[(0, 1)] -= q[nkm].conj();
    }
    let mut gam = vec![0.0; l];
    let mut deg = l as isize;
    for (j, gj) in gam.iter_mut().enumerate() {
        let top = mats[idx(deg)];
        let bot = mats[idx(-deg)];
        let pick = |mm: &Matrix2<C64>| -> Vector2<C64> {
            let c0 = mm.column(0).into_owned();
            let c1 = mm.column(1).into_owned();
            if c0.norm() >= c1.norm() {
                c0
            } else {
                c1
            }
        };
        let tc = pick(&top);
        let bc = pick(&bot);
        let v = if tc.norm() >= bc.norm() {
            tc
        } else {
            Vector2::new(-bc[1].conj(), bc[0].conj())
        };
        let v = if v.norm() < 1e-300 {
            // Both ends vanish: any projector works, the pair cancels later.
            Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0))
        } else {
            let ph = if v[0].norm() > 1e-300 {
                v[0] / v[0].norm()
            } else {
                -I * v[1] / v[1].norm()
            };
            let v = v / ph;
            v.unscale(v.norm())
        };
        let mut ang = 2.0 * (-v[1].im).atan2(v[0].re);
        if sign(j) < 0.0 {
            ang -= PI;
        }
        *gj = ang;
        let pi = v * v.adjoint();
        let pb = Matrix2::identity() - pi;
        let mut next = vec![Matrix2::<C64>::zeros(); width];
        for pw in -deg..=deg {
            let mk = mats[idx(pw)];
            if pw > -off {
                next[idx(pw - 1)] += pi * mk;
            }
            if pw < off {
                next[idx(pw + 1)] += pb * mk;
            }
        }
        mats = next;
        deg -= 1;
    }
    Ok(gam
        .iter()
        .enumerate()
        .map(|(j, &g)| wrap(if j % 2 == 0 { g - PI } else { g }))
        .collect())
}

/// max |g(z)g(1/z) − (1 − P(z)P(1/z))| over Laurent coefficients.
pub fn complement_error(a: &[f64], c: &[f64]) -> f64 {
    let p = p_coeffs(a, c);
    let m = (p.len() - 1) / 2;
    let g = complement(&p);
    let rev: Vec<f64> = p.iter().rev().copied().collect();
    let mut r: Vec<f64> = convolve(&p, &rev).iter().map(|v| -v).collect();
    r[2 * m] += 1.0;
    let grev: Vec<f64> = g.iter().rev().copied().collect();
    convolve(&g, &grev)
        .iter()
        .zip(&r)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

// ------------------------------------------------------------------ optimize

/// Levenberg-Marquardt on Σ|U₀₀(x_i) − H(x_i)|² over the solve grid with
/// analytic layer derivatives dG/dγ = −(i/2)[X, G].
pub fn optimize(a: &[f64], c: &[f64], init: Vec<f64>, max_iter: usize) -> Vec<f64> {
    let l = init.len();
    let xs = cheb_grid(SOLVE_GRID);
    let n = xs.len();
    let h: Vec<C64> = xs.iter().map(|&x| eval_h(a, c, x)).collect();
    let x_mat = Matrix2::new(
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
    );
    let cost = |xi: &[f64]| -> f64 {
        xs.iter()
            .zip(&h)
            .map(|(&x, &hx)| (realized(xi, x)[(0, 0)] - hx).norm_sqr())
            .sum()
    };
    let mut xi = init;
    let mut f = cost(&xi);
    let mut lambda = 1e-3;
    for _ in 0..max_iter {
        if (f / n as f64).sqrt() < 1e-15 {
            break;
        }
        let g = gammas(&xi);
        let mut jac = DMatrix::<f64>::zeros(2 * n, l);
        let mut res = DVector::<f64>::zeros(2 * n);
        for (i, &x) in xs.iter().enumerate() {
            let layers: Vec<Matrix2<C64>> = g
                .iter()
                .enumerate()
                .map(|(j, &gj)| layer(gj, sign(j), x))
                .collect();
            let mut pre = Vec::with_capacity(l + 1);
            pre.push(Matrix2::<C64>::identity());
            for lay in &layers {
                let last = *pre.last().unwrap();
                pre.push(last * lay);
            }
            let mut suf = vec![Matrix2::<C64>::identity(); l + 1];
            for j in (0..l).rev() {
                suf[j] = layers[j] * suf[j + 1];
            }
            let r = pre[l][(0, 0)] - h[i];
            res[i] = r.re;
            res[n + i] = r.im;
            for j in 0..l {
                let dg = (x_mat * layers[j] - layers[j] * x_mat) * C64::new(0.0, -0.5);
                let d = (pre[j] * dg * suf[j + 1])[(0, 0)];
                jac[(i, j)] = d.re;
                jac[(n + i, j)] = d.im;
            }
        }
        let jt = jac.transpose();
        let hess = &jt * &jac;
        let grad = &jt * &res;
        let mut improved = false;
        while lambda < 1e12 {
            let mut damped = hess.clone();
            for k in 0..l {
                damped[(k, k)] += lambda * (hess[(k, k)] + 1e-12);
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 4.0;
                continue;
            };
            let step = chol.solve(&(-&grad));
            let cand: Vec<f64> = xi.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let f2 = cost(&cand);
            if f2 < f {
                xi = cand;
                f = f2;
                lambda = (lambda / 5.0).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    xi.into_iter().map(wrap).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_angles_give_power_of_signal() {
        // ξ = 0 yields U₀₀ = cos(mx) − i sin(mx) for L = 2m.
        let x = 0.37;
        let u = realized(&[0.0; 6], x);
        assert!((u[(0, 0)] - C64::new((3.0 * x).cos(), -(3.0 * x).sin())).norm() < 1e-14);
    }

    #[test]
    fn identity_angles() {
        for &x in &[0.0, 0.7, 2.0, 5.5] {
            let u = realized(&[-PI, 0.0], x);
            assert!((u - Matrix2::identity()).norm() < 1e-14);
        }
    }

    #[test]
    fn deflation_by_unit_root() {
        // (z − 1)²(z + 2) = z³ − 3z + 2
        let q = deflate_one(&deflate_one(&[1.0, 0.0, -3.0, 2.0]));
        assert_eq!(q.len(), 2);
        assert!((q[0] - 1.0).abs() < 1e-15 && (q[1] - 2.0).abs() < 1e-15);
    }
}
