use super::*;
use crate::sampling::grid_pi;

fn q(a: i64, b: i64) -> Q {
    Q::new(a, b)
}

fn spec121() -> DomainSpec {
    DomainSpec::new(&[1], 2, 1).unwrap()
}

#[test]
fn verdict_examples() {
    let s = spec121();
    let v = predicted_verdict(&s, q(2, 1), q(2, 1), q(0, 1));
    assert_eq!((v.regime, v.bounded), (Regime::Two, true));
    let v = predicted_verdict(&s, q(4, 1), q(4, 1), q(0, 1));
    assert_eq!((v.regime, v.bounded, v.boundary_case), (Regime::One, false, true));
    let v = predicted_verdict(&s, q(6, 5), q(6, 5), q(1, 6));
    assert_eq!((v.regime, v.bounded, v.boundary_case), (Regime::Three, false, true));
    let s2 = DomainSpec::new(&[1], 2, 2).unwrap();
    let v = predicted_verdict(&s2, q(2, 1), q(2, 1), q(0, 1));
    assert!(v.bounded);
    let v = predicted_verdict(&s, q(3, 1), q(2, 1), q(0, 1));
    assert_eq!(v.regime, Regime::NotApplicable);
    assert!(v.thresholds.is_none());
}

#[test]
fn multipliers_are_one_at_zero() {
    for m in 0..20 {
        assert!((disk_multiplier(3, m, 0.0) - 1.0).abs() < 1e-12);
        assert!((ball_multiplier(2, m as usize, 0.0) - 1.0).abs() < 1e-12);
    }
    assert_eq!(disk_multiplier(3, -4, 0.5), 0.0);
}

#[test]
fn witness_constant_half() {
    assert!((witness_constant(&spec121(), 0.0) - 0.5).abs() < 1e-14);
}

#[test]
fn membership_flips() {
    let s = spec121();
    let w = MultiIndex::witness(&s);
    assert!(membership_lq(&s, &w, q(39, 10)).unwrap());
    assert!(!membership_lq(&s, &w, q(4, 1)).unwrap());
    let s2 = DomainSpec::new(&[1], 2, 2).unwrap();
    let w2 = MultiIndex::witness(&s2);
    assert!(membership_lq(&s2, &w2, q(29, 10)).unwrap());
    assert!(!membership_lq(&s2, &w2, q(3, 1)).unwrap());
}

#[test]
fn separable_matches_general_application() {
    let s = spec121();
    let grid = grid_pi(&s, 24, 32).unwrap();
    let z = &probe_points(&s)[1];
    let f = |w: &CPoint| w.coords[1].conj() + w.coords[0] * 0.5;
    let general = apply_toeplitz(&s, 0.3, f, z, &grid).unwrap();
    // the same input split as a sum of two separable pieces
    let a = apply_toeplitz_separable(&s, 0.3, &grid, |f, x| if f.kind == FactorKind::Disk { x[0].conj() } else { Complex64::new(1.0, 0.0) }, z).unwrap();
    let b = apply_toeplitz_separable(&s, 0.3, &grid, |f, x| if f.kind == FactorKind::Disk { x[0] } else { x[0] * 0.5 }, z).unwrap();
    assert!((general - a - b).norm() < 1e-9 * general.norm().max(1.0), "{general} vs {}", a + b);
}

#[test]
fn multiplier_matches_quadrature() {
    let s = spec121();
    let grid = grid_pi(&s, 24, 32).unwrap();
    let z = &probe_points(&s)[3];
    let t = 1.0;
    let beta = [2i64, 1];
    let tz = apply_toeplitz_separable(&s, t, &grid, |f, x| x[0].powi(beta[f.offset] as i32), z).unwrap();
    let eta = s.psi_forward(z).unwrap();
    let want = eta.coords[0].powi(2) * eta.coords[1] * monomial_multiplier(&s, &beta, t);
    assert!((tz - want).norm() < 1e-6 * want.norm(), "{tz} vs {want}");
}

#[test]
fn regime1_witness_passes() {
    let s = spec121();
    let grid = grid_pi(&s, 24, 32).unwrap();
    let r = witness_regime1(&s, q(5, 1), q(0, 1), 3, &grid, 1e-10).unwrap();
    assert!(r.pass, "{r:?}");
    assert!(r.constants.iter().all(|c| (c - 0.5).abs() < 1e-4), "{:?}", r.constants);
    assert!(witness_regime1(&s, q(3, 1), q(0, 1), 3, &grid, 1e-10).is_err());
}

#[test]
fn first_shell_is_one_annulus() {
    let s = spec121();
    let r = witness_sequence_fj(&s, 1, q(3, 2), q(3, 2), q(0, 1)).unwrap();
    // f_1 lives on 1/4 < |z_n| ≤ 1: ‖f_1‖_p^p = (2/p)(1 − 4^{−p})
    let p = 1.5f64;
    let want = (2.0 / p * (1.0 - 4f64.powf(-p))).powf(1.0 / p);
    assert!((r.norm_p - want).abs() < 1e-12);
    // proxy = ∫_{1/4}^1 2ρ^E dρ with E = 2 + 1 − (4/3)·2
    let e = 3.0 - 8.0 / 3.0;
    let want = 2.0 * (1.0 - 0.25f64.powf(e + 1.0)) / (e + 1.0);
    assert!((r.proxy - want).abs() < 1e-12, "{} vs {want}", r.proxy);
}

#[test]
fn shell_sequence_blows_up_in_regime_three() {
    let s = spec121();
    let a = witness_sequence_fj(&s, 4, q(6, 5), q(6, 5), q(0, 1)).unwrap();
    let b = witness_sequence_fj(&s, 16, q(6, 5), q(6, 5), q(0, 1)).unwrap();
    assert!(b.proxy / a.proxy > 2.0);
    let c = witness_sequence_fj(&s, 16, q(6, 5), q(6, 5), q(1, 2)).unwrap();
    let d = witness_sequence_fj(&s, 4, q(6, 5), q(6, 5), q(1, 2)).unwrap();
    assert!(c.t_norm_q / c.norm_p < 1.5 * d.t_norm_q / d.norm_p);
}

#[test]
fn necessity_indicator_blows_up() {
    let s = spec121();
    let mut last = 0.0;
    for r in [0.5, 0.9, 0.99] {
        let w = CPoint::h(s.g_raw(&[Complex64::new(0.1, 0.0), Complex64::new(r, 0.0)]));
        let rep = necessity_probe_gw(&s, q(2, 1), q(3, 1), q(0, 1), &w, 1.0, 16, 24).unwrap();
        assert!(rep.indicator > last);
        assert!(rep.lower <= rep.upper * (1.0 + 1e-9), "{rep:?}");
        last = rep.indicator;
    }
}

#[test]
fn lq_ball_series_matches_closed_form() {
    // t = 0: T g_w = g_w, so the series norm equals the direct integral
    let s = spec121();
    let f = s.factors()[0];
    let om = [Complex64::new(0.8, 0.0)];
    let got = lq_factor_series(&f, &om, 0.0, &[1.5])[0];
    let want = ball_lhs(1, 1.5, 0.0, 0.8);
    assert!((got / want - 1.0).abs() < 1e-8, "{got} vs {want}");
}
