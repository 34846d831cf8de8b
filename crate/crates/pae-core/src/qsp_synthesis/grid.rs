/// Certification grid size.
pub const CERT_GRID: usize = 4096;
/// Grid size used while solving for angles.
pub const SOLVE_GRID: usize = 1024;

/// Chebyshev-distributed points x_j = π − π cos(π(2j+1)/(2N)) on (0, 2π).
pub fn cheb_grid(n: usize) -> Vec<f64> {
    use std::f64::consts::PI;
    (0..n)
        .map(|j| PI - PI * (PI * (2 * j + 1) as f64 / (2 * n) as f64).cos())
        .collect()
}
