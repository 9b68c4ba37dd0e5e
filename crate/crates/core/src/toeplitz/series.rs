//! `L^q` norms of power series on the unit disk.
//!
//! A function `S(u) = Σ_m c_m u^m` is evaluated on each circle `|u| = ρ` by
//! one inverse FFT of `(c_m ρ^m)`, the circle means of `|S|^q` are taken for
//! all requested exponents at once, and the radial integral uses panels graded
//! toward the boundary.

use std::sync::OnceLock;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::quadrature::{graded_toward_right, GaussLegendre};

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// `∫_D |S(u)|^{q_i} W(|u|) dv(u)` for each `q_i`, with `dv` normalized.
///
/// `finest` is the width of the last radial panel at `ρ = 1`; it should be a
/// fraction of the distance from the disk to the nearest singularity of `S`.
pub fn series_lq<W: Fn(f64) -> f64>(coeffs: &[Complex64], qs: &[f64], weight: W, finest: f64) -> Vec<f64> {
    let n = (2 * coeffs.len()).max(64).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(n);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut out = vec![0.0; qs.len()];
    for (a, b) in graded_toward_right(0.0, 1.0, finest) {
        for (rho, w) in rule().on(a, b) {
            let radial = 2.0 * rho * weight(rho) * w;
            if radial == 0.0 {
                continue;
            }
            let mut pow = 1.0;
            for (slot, c) in buf.iter_mut().zip(coeffs) {
                *slot = c * pow;
                pow *= rho;
            }
            for slot in buf[coeffs.len()..].iter_mut() {
                *slot = Complex64::new(0.0, 0.0);
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            let logs: Vec<f64> = buf.iter().map(|v| v.norm().ln()).collect();
            for (acc, &q) in out.iter_mut().zip(qs) {
                let mean = logs.iter().map(|l| (q * l).exp()).sum::<f64>() / n as f64;
                *acc += radial * mean;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_norms() {
        // S = 1 + u: ∫|S|² = 1 + 1/2
        let c = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        let v = series_lq(&c, &[2.0], |_| 1.0, 1e-3);
        assert!((v[0] - 1.5).abs() < 1e-13);
        // weight |u|^2: ∫|u|²(1 + |u|²) = 1/2 + 1/3
        let v = series_lq(&c, &[2.0], |r| r * r, 1e-3);
        assert!((v[0] - 5.0 / 6.0).abs() < 1e-13);
    }

    #[test]
    fn kernel_bump_matches_closed_form() {
        // S = (1 − ωu)^{−2} = Σ (m+1) ω^m u^m, and ∫|S|² dv = 1/(1 − ω²)²
        let omega: f64 = 0.99;
        let m = (45.0 / (1.0 - omega)) as usize;
        let c: Vec<Complex64> = (0..m).map(|k| Complex64::new((k as f64 + 1.0) * omega.powi(k as i32), 0.0)).collect();
        let v = series_lq(&c, &[2.0, 1.5], |_| 1.0, (1.0 - omega) / 8.0);
        assert!((v[0] * (1.0 - omega * omega).powi(2) - 1.0).abs() < 1e-9, "{}", v[0]);
        let want = crate::estimates::disk_lhs(1.5, 0.0, 0.0, omega);
        assert!((v[1] / want - 1.0).abs() < 1e-8, "{} vs {want}", v[1]);
    }
}
