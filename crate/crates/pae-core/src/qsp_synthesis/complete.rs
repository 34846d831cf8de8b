//! Truncated Jacobi-Anger target and its completion to an achievable pair.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::bessel::bessel_j_all;
use super::grid::{cheb_grid, CERT_GRID};
use crate::error::{PaeError, Result};

/// Real Fourier coefficients of the truncated e^{−iT sin x}:
/// A(x) = Σ a_l cos(lx), C(x) = Σ c_l sin(lx), l = 0..=L/2.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedTarget {
    pub t: f64,
    pub l: usize,
    pub a: Vec<f64>,
    pub c: Vec<f64>,
    pub delta: f64,
}

/// 4T^{m+1}/(2^{m+1}(m+1)!) with m = L/2.
pub fn delta_bound(t: f64, l: usize) -> f64 {
    let m = l / 2;
    let mut v = 4.0;
    for k in 1..=m + 1 {
        v *= t / (2.0 * k as f64);
    }
    v
}

pub fn truncate_target(t: f64, l: usize) -> Result<TruncatedTarget> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(PaeError::Domain(format!(
            "evolution strength T = {t} must be positive"
        )));
    }
    if l < 2 || l % 2 == 1 {
        return Err(PaeError::Contract(format!(
            "query length L = {l} must be even and >= 2"
        )));
    }
    let m = l / 2;
    let j = bessel_j_all(m, t);
    let mut a = vec![0.0; m + 1];
    let mut c = vec![0.0; m + 1];
    a[0] = j[0];
    for k in 1..=m {
        if k % 2 == 0 {
            a[k] = 2.0 * j[k];
        } else {
            c[k] = -2.0 * j[k];
        }
    }
    Ok(TruncatedTarget {
        t,
        l,
        a,
        c,
        delta: delta_bound(t, l),
    })
}

pub fn eval_h(a: &[f64], c: &[f64], x: f64) -> C64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for l in 0..a.len() {
        let (s, co) = (l as f64 * x).sin_cos();
        re += a[l] * co;
        im += c[l] * s;
    }
    C64::new(re, im)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompletionMethod {
    /// Truncation was already achievable.
    Unchanged,
    RescaleShift,
    PenaltyGaussNewton,
}

#[derive(Clone, Debug)]
pub struct CompletedTarget {
    pub t: f64,
    pub l: usize,
    pub a: Vec<f64>,
    pub c: Vec<f64>,
    pub delta: f64,
    /// Sup-norm distance to the truncated pair on the certification grid.
    pub deviation: f64,
    /// Sup-norm distance to e^{−iT sin x} on the certification grid.
    pub exact_error: f64,
    /// max(A² + C² − 1) on the certification grid.
    pub max_excess: f64,
    pub method: CompletionMethod,
}

/// Rounding slack allowed when certifying A² + C² ≤ 1 on the grid.
pub const FEASIBILITY_TOL: f64 = 1e-12;
/// Excess tolerated when the truncation or its rescaling is accepted as is;
/// anything above rounding makes 1 − |A + iC|² negative somewhere.
const STRICT_TOL: f64 = 1e-15;
/// Truncation errors below this are not resolvable in double precision: the
/// complement 1 − |A + iC|² drowns in rounding. Budgets use max(δ, floor).
pub const DELTA_FLOOR: f64 = 1e-10;

struct Basis {
    x: Vec<f64>,
    cos: DMatrix<f64>,
    sin: DMatrix<f64>,
}

impl Basis {
    fn new(m: usize) -> Self {
        let x = cheb_grid(CERT_GRID);
        let cos = DMatrix::from_fn(x.len(), m + 1, |i, l| (l as f64 * x[i]).cos());
        let sin = DMatrix::from_fn(x.len(), m + 1, |i, l| (l as f64 * x[i]).sin());
        Basis { x, cos, sin }
    }

    fn eval(&self, a: &[f64], c: &[f64]) -> (DVector<f64>, DVector<f64>) {
        (
            &self.cos * DVector::from_column_slice(a),
            &self.sin * DVector::from_column_slice(c),
        )
    }
}

struct Report {
    deviation: f64,
    exact_error: f64,
    max_excess: f64,
    /// max(A² + C² − 1 + δ/2·sin²(x/2)); positive means no factorization margin.
    margin_excess: f64,
    worst_x: f64,
}

fn margin(delta: f64, x: f64) -> f64 {
    0.5 * delta * (0.5 * x).sin().powi(2)
}

fn report(b: &Basis, t: &TruncatedTarget, a: &[f64], c: &[f64]) -> Report {
    let (ar, cr) = b.eval(a, c);
    let (at, ct) = b.eval(&t.a, &t.c);
    let mut r = Report {
        deviation: 0.0,
        exact_error: 0.0,
        max_excess: f64::NEG_INFINITY,
        margin_excess: f64::NEG_INFINITY,
        worst_x: 0.0,
    };
    for i in 0..b.x.len() {
        let h = C64::new(ar[i], cr[i]);
        r.deviation = r.deviation.max((h - C64::new(at[i], ct[i])).norm());
        r.exact_error = r
            .exact_error
            .max((h - C64::new(0.0, -t.t * b.x[i].sin()).exp()).norm());
        let ex = h.norm_sqr() - 1.0;
        r.margin_excess = r.margin_excess.max(ex + margin(t.delta, b.x[i]));
        if ex > r.max_excess {
            r.max_excess = ex;
            r.worst_x = b.x[i];
        }
    }
    r
}

fn a_at_zero(a: &[f64]) -> f64 {
    a.iter().sum()
}

/// Completes the truncated pair so that A(0) = 1 exactly, A² + C² ≤ 1 on the
/// certification grid, and the sup-norm change stays within 8δ. Shortcut
/// completions are accepted only with the δ/2·sin²(x/2) margin the spectral
/// factorization needs.
pub fn complete_target(t: &TruncatedTarget) -> Result<CompletedTarget> {
    if t.delta >= 1.0 {
        return Err(PaeError::Domain(format!(
            "delta = {} must be below 1",
            t.delta
        )));
    }
    let m = t.l / 2;
    let basis = Basis::new(m);
    let budget = 8.0 * t.delta.max(DELTA_FLOOR);
    let finish = |a: Vec<f64>, c: Vec<f64>, method| {
        let r = report(&basis, t, &a, &c);
        CompletedTarget {
            t: t.t,
            l: t.l,
            a,
            c,
            delta: t.delta,
            deviation: r.deviation,
            exact_error: r.exact_error,
            max_excess: r.max_excess,
            method,
        }
    };
    let accept = |a: &[f64], c: &[f64]| {
        let r = report(&basis, t, a, c);
        r.margin_excess <= STRICT_TOL
            && r.deviation <= budget
            && (a_at_zero(a) - 1.0).abs() <= 1e-15
    };

    if accept(&t.a, &t.c) {
        return Ok(finish(
            t.a.clone(),
            t.c.clone(),
            CompletionMethod::Unchanged,
        ));
    }

    // Rescale by 1/(1+m) and shift a_0 so A(0) = 1, widening the margin in
    // 1e-12 steps.
    let base = report(&basis, t, &t.a, &t.c).max_excess.max(0.0);
    for retry in 0..=10 {
        let s = 1.0 / (1.0 + base + retry as f64 * 1e-12);
        let mut a: Vec<f64> = t.a.iter().map(|v| v * s).collect();
        let c: Vec<f64> = t.c.iter().map(|v| v * s).collect();
        a[0] = 1.0 - a[1..].iter().sum::<f64>();
        if accept(&a, &c) {
            return Ok(finish(a, c, CompletionMethod::RescaleShift));
        }
    }

    let (a, c) = penalty_gauss_newton(&basis, t);
    let r = report(&basis, t, &a, &c);
    if r.max_excess > FEASIBILITY_TOL {
        return Err(PaeError::Synthesis {
            msg: format!(
                "completion leaves A^2 + C^2 > 1 for T = {}, L = {}",
                t.t, t.l
            ),
            at: r.worst_x,
            value: r.max_excess,
        });
    }
    if r.deviation > budget {
        return Err(PaeError::Synthesis {
            msg: format!("completion deviation exceeds 8 delta = {budget:.3e}"),
            at: r.worst_x,
            value: r.deviation,
        });
    }
    Ok(finish(a, c, CompletionMethod::PenaltyGaussNewton))
}

/// Minimises mean|H − E|² + μ·mean(relu(|H|² − 1 + δ/2·sin²(x/2))²) over
/// a_1..a_m, c_1..c_m with a_0 = 1 − Σa_l, raising μ until the margin holds.
fn penalty_gauss_newton(b: &Basis, t: &TruncatedTarget) -> (Vec<f64>, Vec<f64>) {
    let m = t.l / 2;
    let n = b.x.len();
    let e: Vec<C64> =
        b.x.iter()
            .map(|x| C64::new(0.0, -t.t * x.sin()).exp())
            .collect();
    let margin: Vec<f64> = b.x.iter().map(|&x| margin(t.delta, x)).collect();
    // Columns: cos(lx) − 1 (real part) for l=1..m, then sin(lx) (imag part).
    let bre = DMatrix::from_fn(n, m, |i, l| b.cos[(i, l + 1)] - 1.0);
    let bim = DMatrix::from_fn(n, m, |i, l| b.sin[(i, l + 1)]);
    let h_of = |v: &DVector<f64>| -> (DVector<f64>, DVector<f64>) {
        let re = &bre * v.rows(0, m) + DVector::from_element(n, 1.0);
        let im = &bim * v.rows(m, m);
        (re, im)
    };
    let objective = |v: &DVector<f64>, mu: f64| -> f64 {
        let (re, im) = h_of(v);
        let mut fit = 0.0;
        let mut pen = 0.0;
        for i in 0..n {
            fit += (re[i] - e[i].re).powi(2) + (im[i] - e[i].im).powi(2);
            let viol = re[i] * re[i] + im[i] * im[i] - 1.0 + margin[i];
            if viol > 0.0 {
                pen += viol * viol;
            }
        }
        (fit + mu * pen) / n as f64
    };
    let mut v = DVector::zeros(2 * m);
    for l in 1..=m {
        v[l - 1] = t.a[l];
        v[m + l - 1] = t.c[l];
    }
    let mut mu: f64 = 1.0;
    while mu < 1e16 {
        for _ in 0..50 {
            let (re, im) = h_of(&v);
            let active: Vec<usize> = (0..n)
                .filter(|&i| re[i] * re[i] + im[i] * im[i] - 1.0 + margin[i] > 0.0)
                .collect();
            let rows = 2 * n + active.len();
            let w = mu.sqrt();
            let mut jac = DMatrix::zeros(rows, 2 * m);
            let mut res = DVector::zeros(rows);
            for i in 0..n {
                for l in 0..m {
                    jac[(i, l)] = bre[(i, l)];
                    jac[(n + i, m + l)] = bim[(i, l)];
                }
                res[i] = re[i] - e[i].re;
                res[n + i] = im[i] - e[i].im;
            }
            for (r, &i) in active.iter().enumerate() {
                let row = 2 * n + r;
                res[row] = w * (re[i] * re[i] + im[i] * im[i] - 1.0 + margin[i]);
                for l in 0..m {
                    jac[(row, l)] = w * 2.0 * re[i] * bre[(i, l)];
                    jac[(row, m + l)] = w * 2.0 * im[i] * bim[(i, l)];
                }
            }
            let Some(step) = least_squares(jac, -res) else {
                break;
            };
            let f0 = objective(&v, mu);
            let mut s = 1.0;
            while objective(&(&v + &step * s), mu) > f0 && s > 1e-10 {
                s *= 0.5;
            }
            v += &step * s;
            if (&step * s).amax() < 1e-15 {
                break;
            }
        }
        let (re, im) = h_of(&v);
        if (0..n).all(|i| re[i] * re[i] + im[i] * im[i] - 1.0 + margin[i] <= 0.0) {
            break;
        }
        mu *= 10.0;
    }
    let mut a = vec![0.0; m + 1];
    let mut c = vec![0.0; m + 1];
    for l in 1..=m {
        a[l] = v[l - 1];
        c[l] = v[m + l - 1];
    }
    a[0] = 1.0 - a[1..].iter().sum::<f64>();
    (a, c)
}

/// Solves min‖Jx − r‖ through a thin Householder QR.
fn least_squares(jac: DMatrix<f64>, rhs: DVector<f64>) -> Option<DVector<f64>> {
    let qr = jac.qr();
    let qtb = qr.q().transpose() * rhs;
    qr.r().solve_upper_triangular(&qtb)
}
