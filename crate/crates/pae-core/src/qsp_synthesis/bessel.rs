//! Bessel functions of the first kind J_0..J_nmax at one argument.

/// Returns [J_0(x), …, J_nmax(x)] for x ≥ 0.
///
/// Power series for small x, Miller's backward recurrence normalised by
/// J_0 + 2ΣJ_{2k} = 1 otherwise.
pub fn bessel_j_all(nmax: usize, x: f64) -> Vec<f64> {
    assert!(
        x >= 0.0 && x.is_finite(),
        "bessel argument must be finite and non-negative"
    );
    if x <= 2.0 {
        return (0..=nmax).map(|n| series(n, x)).collect();
    }
    let top = nmax.max(x.ceil() as usize);
    let mut start = top + 20 + (40.0 * top as f64).sqrt() as usize;
    start += start % 2;
    let mut out = vec![0.0; nmax + 1];
    let (mut jp1, mut j) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        if k - 1 <= nmax {
            out[k - 1] = j;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += j;
    out.iter().map(|v| v / norm).collect()
}

fn series(n: usize, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut lead = 1.0;
    for k in 1..=n {
        lead *= h / k as f64;
    }
    if lead == 0.0 {
        return 0.0;
    }
    let (mut term, mut sum) = (lead, lead);
    for k in 1..60 {
        term *= -h * h / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let j = bessel_j_all(5, 1.0);
        assert!((j[0] - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j[1] - 0.440_050_585_744_933_5).abs() < 1e-15);
        let j = bessel_j_all(5, 10.0);
        assert!((j[0] + 0.245_935_764_451_348_3).abs() < 1e-14);
        assert!((j[5] + 0.234_061_528_186_793_6).abs() < 1e-14);
        let j = bessel_j_all(2, 0.0);
        assert_eq!(j, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn series_and_recurrence_agree_near_switch() {
        let a = bessel_j_all(12, 2.0);
        let b: Vec<f64> = (0..=12).map(|n| series(n, 2.0)).collect();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
        let c = bessel_j_all(12, 2.000001);
        for (x, y) in c.iter().zip(&b) {
            assert!((x - y).abs() < 1e-5);
        }
    }
}
