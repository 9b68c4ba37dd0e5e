use hartogs::basis::MultiIndex;
use hartogs::domain::{CPoint, DomainSpec, Q};
use hartogs::sampling::grid_pi;
use hartogs::toeplitz::*;
use num_complex::Complex64;

fn spec(n: usize, b: i64) -> DomainSpec {
    DomainSpec::new(&[1], n, b).unwrap()
}

fn q(a: i64, b: i64) -> Q {
    Q::new(a, b)
}

fn h(a: f64, b: f64) -> CPoint {
    CPoint::h(vec![Complex64::new(a, 0.0), Complex64::new(b, 0.0)])
}

#[test]
fn projection_examples() {
    let s = spec(2, 1);
    let grid = grid_pi(&s, 24, 48).unwrap();
    let z = h(0.1, 0.5);
    let one = apply_toeplitz(&s, 0.0, |_| Complex64::new(1.0, 0.0), &z, &grid).unwrap();
    assert!((one - 1.0).norm() < 1e-10);
    let mono = |w: &CPoint| w.coords[0] * w.coords[1].powi(-1);
    let got = apply_toeplitz(&s, 0.0, mono, &z, &grid).unwrap();
    assert!((got - mono(&z)).norm() < 1e-8 * mono(&z).norm());
}

#[test]
fn conjugate_coordinate_maps_to_the_witness_monomial() {
    let s = spec(2, 1);
    let grid = grid_pi(&s, 24, 48).unwrap();
    let f = |w: &CPoint| w.coords[1].conj();
    let c: Vec<f64> = [0.5, 0.7]
        .iter()
        .map(|&r| (apply_toeplitz(&s, 0.0, f, &h(0.0, r), &grid).unwrap() * r).re)
        .collect();
    assert!((c[0] - c[1]).abs() < 1e-6 && (c[0] - 0.5).abs() < 1e-6, "{c:?}");
}

#[test]
fn regime1_witness_examples() {
    let s = spec(2, 1);
    let grid = grid_pi(&s, 24, 48).unwrap();
    let r = witness_regime1(&s, q(4, 1), q(0, 1), 3, &grid, 1e-8).unwrap();
    assert!(r.pass, "{r:?}");
    assert_eq!(r.witness_index, "(0,-1)");
    assert!(!r.in_lq);

    let s2 = spec(2, 2);
    let grid = grid_pi(&s2, 24, 48).unwrap();
    let r = witness_regime1(&s2, q(3, 1), q(1, 2), 3, &grid, 1e-8).unwrap();
    assert!(r.pass, "{r:?}");
    assert_eq!(r.witness_index, "(0,-2)");
    assert!(!membership_lq(&s2, &MultiIndex(vec![0, -2]), q(3, 1)).unwrap());
}

#[test]
fn shell_sequence_examples() {
    let s = spec(2, 1);
    // shell l contributes at most (2l/p) a_l^{p/l} = (2l/p) l^{−p}
    let mut last_proxy = 0.0;
    let mut bound = 0.0;
    for j in 1..=16 {
        bound += 1.0 / j as f64;
        let r = witness_sequence_fj(&s, j, q(2, 1), q(2, 1), q(0, 1)).unwrap();
        assert!(r.norm_p.powi(2) <= bound * (1.0 + 1e-12), "{j}: {}", r.norm_p);
        assert!(r.proxy >= last_proxy);
        last_proxy = r.proxy;
    }
    let r = witness_sequence_fj(&s, 1, q(2, 1), q(2, 1), q(0, 1)).unwrap();
    assert!(r.norm_p.is_finite() && r.proxy.is_finite());
    assert!(witness_sequence_fj(&s, 0, q(2, 1), q(2, 1), q(0, 1)).is_err());
}

#[test]
fn necessity_indicator_examples() {
    let s = spec(2, 1);
    let radii = [0.5, 0.9, 0.99, 0.999];
    let ind = |t: Q| -> Vec<f64> {
        radii.iter().map(|&r| necessity_probe_gw(&s, q(2, 1), q(3, 1), t, &h(0.0, r), 0.5, 12, 16).unwrap().indicator).collect()
    };
    let grows = ind(q(0, 1));
    assert!(grows.windows(2).all(|w| w[1] > 1.5 * w[0]), "{grows:?}");
    // at t = t2 the indicator is r^{7/3} ≤ 1
    let flat = ind(q(1, 6));
    for (v, r) in flat.iter().zip(radii) {
        assert!((v / r.powf(7.0 / 3.0) - 1.0).abs() < 1e-9, "{flat:?}");
    }
}

#[test]
fn classical_scan_signatures() {
    let s = spec(2, 1);
    let recs = phase_scan(&s, &ScanConfig::default()).unwrap();
    assert_eq!(recs.len(), 5 * 5 * 3);
    for r in &recs {
        assert!(r.error.is_none(), "{r:?}");
        if r.verdict.regime == Regime::One {
            assert!(r.slope > 0.05, "{r:?}");
        }
    }
    assert!(agreement_fraction(&recs).unwrap() >= 0.9);
}

#[test]
fn diagonal_scan_on_camber_one() {
    let s = spec(2, 2);
    for (p, bounded) in [(q(7, 5), false), (q(2, 1), true), (q(29, 10), true), (q(31, 10), false)] {
        let cfg = ScanConfig { ps: vec![p], qs: vec![p], ts: vec![q(0, 1)], ..ScanConfig::default() };
        let recs = phase_scan(&s, &cfg).unwrap();
        assert_eq!(recs[0].verdict.bounded, bounded);
        assert!(recs[0].agree, "{:?}", recs[0]);
    }
}

#[test]
fn empty_and_reversed_grids() {
    let s = spec(2, 1);
    let cfg = ScanConfig { ps: vec![], ..ScanConfig::default() };
    assert!(phase_scan(&s, &cfg).unwrap().is_empty());
    let cfg = ScanConfig { ps: vec![q(3, 1)], qs: vec![q(2, 1)], ..ScanConfig::default() };
    assert!(phase_scan(&s, &cfg).unwrap().is_empty());
    assert_eq!(agreement_fraction(&[]), None);
}

#[test]
fn boundary_cell_is_flagged_and_excluded() {
    let s = spec(2, 1);
    let cfg = ScanConfig { ps: vec![q(6, 5)], qs: vec![q(6, 5)], ts: vec![q(1, 6)], ..ScanConfig::default() };
    let recs = phase_scan(&s, &cfg).unwrap();
    assert!(recs[0].verdict.boundary_case);
    assert_eq!(agreement_fraction(&recs), None);
}

#[test]
fn phase_csv_rows_carry_the_fingerprint() {
    let s = spec(2, 1);
    let cfg = ScanConfig { ps: vec![q(2, 1)], qs: vec![q(2, 1), q(5, 1)], ts: vec![q(0, 1)], ..ScanConfig::default() };
    let recs = phase_scan(&s, &cfg).unwrap();
    let mut buf = Vec::new();
    write_phase_csv(&s, &recs, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("fingerprint,p,q,t"));
    assert!(lines[1..].iter().all(|l| l.starts_with("n=2;k=1;b=1,")));
}
