//! Meyer wavelet synthesis from its closed-form spectrum.
//!
//! `psi(x) = (1/pi) * int_0^inf B(xi) cos(xi (x - 1/2)) d xi` where `B` is the
//! Meyer spectral window built from the degree-7 smoothstep
//! `nu(a) = a^4 (35 - 84 a + 70 a^2 - 20 a^3)`. The derivative is obtained by
//! differentiating under the integral sign. Both integrals are evaluated by
//! composite Gauss-Legendre quadrature on the two bands where `B` is smooth.

use std::f64::consts::PI;

use super::table::TabulatedWavelet;

/// Auxiliary smoothstep: `nu(a) = 0` for `a <= 0`, `1` for `a >= 1`, and
/// `nu(a) + nu(1 - a) = 1`.
pub fn smoothstep(a: f64) -> f64 {
    if a <= 0.0 {
        0.0
    } else if a >= 1.0 {
        1.0
    } else {
        a.powi(4) * (35.0 - 84.0 * a + 70.0 * a * a - 20.0 * a * a * a)
    }
}

/// `|psi_hat(xi)|` for `xi >= 0`.
pub fn spectrum(xi: f64) -> f64 {
    let xi = xi.abs();
    if (2.0 * PI / 3.0..=4.0 * PI / 3.0).contains(&xi) {
        (0.5 * PI * smoothstep(3.0 * xi / (2.0 * PI) - 1.0)).sin()
    } else if (4.0 * PI / 3.0..=8.0 * PI / 3.0).contains(&xi) {
        (0.5 * PI * smoothstep(3.0 * xi / (4.0 * PI) - 1.0)).cos()
    } else {
        0.0
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * z * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Quadrature rule `(xi_i, w_i B(xi_i))` over the Meyer band.
fn band_rule(panels_per_unit: usize, order: usize) -> Vec<(f64, f64)> {
    let (gl_x, gl_w) = gauss_legendre(order);
    let breaks = [2.0 * PI / 3.0, 4.0 * PI / 3.0, 8.0 * PI / 3.0];
    let mut rule = Vec::new();
    for band in breaks.windows(2) {
        let (a, b) = (band[0], band[1]);
        let panels = ((b - a) * panels_per_unit as f64).ceil() as usize;
        let width = (b - a) / panels as f64;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * width;
            for (x, w) in gl_x.iter().zip(&gl_w) {
                let xi = mid + 0.5 * width * x;
                rule.push((xi, 0.5 * width * w * spectrum(xi)));
            }
        }
    }
    rule
}

/// `(psi(x), psi'(x))` by direct quadrature, used as the reference for the table.
pub fn evaluate(x: f64) -> (f64, f64) {
    let rule = band_rule(8, 16);
    evaluate_with(&rule, x - 0.5)
}

fn evaluate_with(rule: &[(f64, f64)], u: f64) -> (f64, f64) {
    let (mut v, mut d) = (0.0, 0.0);
    for &(xi, w) in rule {
        let (s, c) = (xi * u).sin_cos();
        v += w * c;
        d -= w * xi * s;
    }
    (v / PI, d / PI)
}

/// Tabulates the Meyer wavelet on `[-radius, radius]` with `2^-log2_inv_step`
/// spacing. The endpoint samples are pinned to zero (value and slope) so that
/// the interpolant is `C^1` across the edge of its support.
pub fn tabulate(radius: u32, log2_inv_step: u32) -> TabulatedWavelet {
    let step = (-(log2_inv_step as f64)).exp2();
    let per_unit = 1usize << log2_inv_step;
    let count = 2 * radius as usize * per_unit + 1;
    let start = -(radius as f64);
    // psi is even and psi' odd about x = 1/2, which sits on the grid.
    let center = (radius as usize) * per_unit + per_unit / 2;
    let half = center.max(count - 1 - center);
    let rule = band_rule(8, 16);
    let mut psi = vec![0.0; count];
    let mut dpsi = vec![0.0; count];
    for offset in 0..=half {
        let (v, d) = evaluate_with(&rule, offset as f64 * step);
        if center + offset < count {
            psi[center + offset] = v;
            dpsi[center + offset] = d;
        }
        if offset <= center {
            psi[center - offset] = v;
            dpsi[center - offset] = -d;
        }
    }
    psi[0] = 0.0;
    dpsi[0] = 0.0;
    psi[count - 1] = 0.0;
    dpsi[count - 1] = 0.0;
    TabulatedWavelet::from_samples("meyer", start, step, psi, dpsi)
        .expect("synthesized Meyer table satisfies its own certificates")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_symmetry() {
        for i in 0..=20 {
            let a = i as f64 / 20.0;
            assert!((smoothstep(a) + smoothstep(1.0 - a) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn spectrum_partition_of_unity() {
        // |B(xi)|^2 + |B(2 xi)|^2 = 1 on the low band.
        for i in 0..=50 {
            let xi = 2.0 * PI / 3.0 + i as f64 / 50.0 * (2.0 * PI / 3.0);
            let s = spectrum(xi).powi(2) + spectrum(2.0 * xi).powi(2);
            assert!((s - 1.0).abs() < 1e-14, "xi = {xi}: {s}");
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((integral - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn unit_energy_from_spectrum() {
        let rule = band_rule(8, 16);
        let energy: f64 = rule.iter().map(|&(xi, wb)| wb * spectrum(xi)).sum::<f64>() / PI;
        assert!((energy - 1.0).abs() < 1e-13, "{energy}");
    }
}
