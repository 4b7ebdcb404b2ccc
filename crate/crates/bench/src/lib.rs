//! Shared inputs for the benchmarks.

use oplip::{rng, CMatrix, ScalarFunction};

/// Complex Ginibre matrix from a fixed stream.
pub fn ginibre(n: usize, seed: u64) -> CMatrix {
    rng::gaussian_matrix(&mut rng::stream(seed, n as u64), n, n)
}

/// Divided differences of `exp(2 pi i t)` on `j + 1/4` against `k`.
pub fn periodic_divided_difference(n: usize) -> CMatrix {
    let lambda: Vec<f64> = (0..n).map(|j| j as f64 + 0.25).collect();
    let mu: Vec<f64> = (0..n).map(|k| k as f64).collect();
    oplip::divided_difference_matrix(&ScalarFunction::exp_2pi_i(), &lambda, &mu, None)
        .expect("separated nodes")
        .entries
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_have_requested_shape() {
        assert_eq!(ginibre(5, 1).shape(), (5, 5));
        assert_eq!(periodic_divided_difference(6).shape(), (6, 6));
    }
}
