//! One PASS/FAIL line per acceptance criterion. Exits non-zero when a
//! criterion fails unless it is listed in `KNOWN_RED`.

use std::time::Instant;

use hartogs::basis::{check_orthogonality, enumerate_basis, MultiIndex};
use hartogs::domain::{CPoint, DomainSpec, Q};
use hartogs::estimates::{ball_estimate, disk_estimate, DEFAULT_RADII, DEFAULT_SLOPE_TOL};
use hartogs::kernel::{bergman_diag, check_comparability, check_herbort_blocki, kernel_series, sublevel_grid};
use hartogs::sampling::grid_pi_capped;
use hartogs::schur::{feasible_params, verify_schur, SufficiencyRegime};
use hartogs::toeplitz::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria expected to fail, with the failing sub-check.
const KNOWN_RED: &[(u32, &str)] = &[(6, "‖f_j‖_p varies < 5% from j=4 to j=8")];

fn q(a: i64, b: i64) -> Q {
    Q::new(a, b)
}

fn spec(part: &[usize], n: usize, b: i64) -> DomainSpec {
    DomainSpec::new(part, n, b).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(ok: bool, detail: String) -> Outcome {
    Outcome { pass: ok, detail }
}

/// Random point of `H` whose pulled-back factor norms lie in `[lo, hi]`.
fn interior_point(s: &DomainSpec, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> CPoint {
    let mut eta = Vec::with_capacity(s.n());
    for f in s.factors() {
        let r = rng.gen_range(lo..hi);
        let v: Vec<Complex64> = (0..f.dim).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        eta.extend(v.into_iter().map(|c| c * (r / norm)));
    }
    s.psi_inverse(&CPoint::pi(eta)).unwrap()
}

fn criterion1() -> Outcome {
    let mut fails = Vec::new();
    let mut cases = 0;
    let mut expect = |s: DomainSpec, lo: Q, hi: Q| {
        cases += 1;
        if s.diagonal_interval() != (lo, hi) {
            fails.push(format!("{} interval {:?}", s.fingerprint(), s.diagonal_interval()));
        }
        // the diagonal verdict at t = 0 is bounded exactly inside the interval
        let eps = q(1, 1000);
        let zero = Q::from_integer(0);
        for (p, want) in [(lo, false), (hi, false), (lo + eps, true), (hi - eps, true), ((lo + hi) / 2, true), (lo - eps, false), (hi + eps, false)] {
            if p > Q::from_integer(1) && predicted_verdict(&s, p, p, zero).bounded != want {
                fails.push(format!("{} p={p}", s.fingerprint()));
            }
        }
    };
    expect(spec(&[1], 2, 1), q(4, 3), q(4, 1));
    expect(spec(&[1], 2, 2), q(3, 2), q(3, 1));
    for (part, ns) in [(vec![1], 2..7), (vec![2], 3..7), (vec![1, 1], 3..7), (vec![2, 1], 4..7), (vec![3], 4..7)] {
        for n in ns {
            let ni = n as i64;
            expect(spec(&part, n, 1), q(2 * ni, ni + 1), q(2 * ni, ni - 1));
        }
    }
    for np in 1..=5usize {
        for b in 1..=6i64 {
            let m = np as i64 * b;
            expect(spec(&[np], np + 1, b), q(2 * m + 2, m + 2), q(2 * m + 2, m));
        }
    }
    check(fails.is_empty(), format!("{cases} domains, mismatches {fails:?}"))
}

fn criterion2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for s in [spec(&[1], 2, 1), spec(&[1], 2, 2)] {
        for _ in 0..20 {
            let z = interior_point(&s, &mut rng, 0.05, 0.6);
            let exact = bergman_diag(&s, &z).unwrap();
            let series = kernel_series(&s, &z, &z, 60).unwrap().value;
            worst = worst.max((series - exact).norm() / exact);
        }
    }
    check(worst < 1e-6, format!("max relative error {worst:.3e} (tol 1e-6)"))
}

fn criterion3() -> Outcome {
    let (mut off, mut diag, mut size) = (0.0f64, 0.0f64, 0);
    for s in [spec(&[1], 2, 1), spec(&[1], 2, 2), spec(&[1], 3, 1), spec(&[1], 3, 2), spec(&[2], 3, 1), spec(&[1, 1], 3, 1)] {
        let g = grid_pi_capped(&s, 16, 32, usize::MAX).unwrap();
        let rep = check_orthogonality(&s, 3, &g).unwrap();
        off = off.max(rep.max_off_diagonal);
        diag = diag.max(rep.max_diagonal_rel_error);
        size += rep.basis_size;
    }
    check(off < 1e-8 && diag < 1e-6, format!("{size} monomials, off-diagonal {off:.3e} (tol 1e-8), norm error {diag:.3e} (tol 1e-6)"))
}

fn criterion4() -> Outcome {
    let mut fails = Vec::new();
    let mut worst_off: f64 = 0.0;
    let mut worst_spread: f64 = 0.0;
    for (s, qv, t) in [
        (spec(&[1], 2, 1), q(4, 1), q(0, 1)),
        (spec(&[1], 2, 1), q(5, 1), q(1, 2)),
        (spec(&[1], 2, 2), q(3, 1), q(1, 2)),
        (spec(&[1], 3, 1), q(3, 1), q(0, 1)),
        (spec(&[2], 3, 1), q(4, 1), q(1, 4)),
    ] {
        let g = grid_pi_capped(&s, 24, 48, usize::MAX).unwrap();
        let r = witness_regime1(&s, qv, t, 3, &g, 1e-8).unwrap();
        worst_off = worst_off.max(r.max_off_witness);
        worst_spread = worst_spread.max(r.constant_spread);
        if !r.pass {
            fails.push(format!("{} q={qv} t={t}", s.fingerprint()));
        }
    }
    let eps = q(1, 1_000_000);
    for s in [spec(&[1], 2, 1), spec(&[1], 2, 2), spec(&[1], 3, 1), spec(&[2], 3, 2), spec(&[1, 1], 4, 3)] {
        let w = MultiIndex::witness(&s);
        let q1 = s.q1();
        let flips = membership_lq(&s, &w, q1 - eps).unwrap() && !membership_lq(&s, &w, q1).unwrap() && !membership_lq(&s, &w, q1 + eps).unwrap();
        if !flips {
            fails.push(format!("{} membership at q1={q1}", s.fingerprint()));
        }
    }
    check(
        fails.is_empty(),
        format!("off-witness max {worst_off:.3e} (tol 1e-8), constant spread {worst_spread:.1e}, failures {fails:?}"),
    )
}

fn criterion5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let specs = [spec(&[1], 2, 1), spec(&[1], 2, 2), spec(&[1], 3, 1), spec(&[2], 3, 1)];
    let mut min_hb = f64::INFINITY;
    for i in 0..50 {
        let s = &specs[i % specs.len()];
        let basis = enumerate_basis(s, 2);
        let alpha = &basis[rng.gen_range(0..basis.len())];
        let w = interior_point(s, &mut rng, 0.1, 0.8);
        let depth = rng.gen_range(0.2..2.0);
        let g = sublevel_grid(s, &w, depth, 16, 32).unwrap();
        min_hb = min_hb.min(check_herbort_blocki(s, alpha, &w, depth, &g).unwrap().ratio);
    }
    let mut envelope_ok = 0;
    for i in 0..50 {
        let s = &specs[i % specs.len()];
        let w = interior_point(s, &mut rng, 0.1, 0.9);
        let depth = rng.gen_range(0.2..3.0);
        if check_comparability(s, &w, depth, 500, i as u64).unwrap().within() {
            envelope_ok += 1;
        }
    }
    let mut max_slope = f64::NEG_INFINITY;
    for (a, u, c) in [(1.0, -0.5, 0.0), (2.0, -0.25, 1.0)] {
        max_slope = max_slope.max(disk_estimate(a, u, c, &DEFAULT_RADII).unwrap().trend_slope);
    }
    let mut all_bounded = true;
    for (k, a, u) in [(1, 1.0, -0.5), (2, 1.0, -0.5), (2, 1.5, -0.3)] {
        let rep = ball_estimate(k, a, u, &DEFAULT_RADII).unwrap();
        max_slope = max_slope.max(rep.trend_slope);
        all_bounded &= rep.bounded(DEFAULT_SLOPE_TOL);
    }
    let ok = min_hb >= 1.0 - 1e-3 && envelope_ok == 50 && max_slope <= DEFAULT_SLOPE_TOL && all_bounded;
    check(
        ok,
        format!("Herbort-Błocki min ratio {min_hb:.6} (tol 0.999), envelope {envelope_ok}/50, estimate max slope {max_slope:.3e} (tol {DEFAULT_SLOPE_TOL})"),
    )
}

fn criterion6() -> (Outcome, Vec<String>) {
    let s = spec(&[1], 2, 1);
    let cfg = ScanConfig {
        ps: vec![q(11, 10), q(6, 5), q(7, 5), q(3, 2), q(7, 4)],
        qs: vec![q(6, 5), q(13, 10), q(2, 1), q(3, 1), q(5, 1)],
        ts: vec![q(0, 1), q(1, 5), q(1, 1)],
        ..ScanConfig::default()
    };
    let recs = phase_scan(&s, &cfg).unwrap();
    let boundary = recs.iter().filter(|r| r.verdict.boundary_case).count();
    let errors = recs.iter().filter(|r| r.error.is_some()).count();
    let mut regimes = [0usize; 3];
    for r in &recs {
        match r.verdict.regime {
            Regime::One => regimes[0] += 1,
            Regime::Two => regimes[1] += 1,
            Regime::Three => regimes[2] += 1,
            Regime::NotApplicable => {}
        }
    }
    let agreement = agreement_fraction(&recs).unwrap_or(0.0);

    let (p, qq, t) = (q(6, 5), q(6, 5), q(0, 1));
    let v = predicted_verdict(&s, p, qq, t);
    let f4 = witness_sequence_fj(&s, 4, p, qq, t).unwrap();
    let f8 = witness_sequence_fj(&s, 8, p, qq, t).unwrap();
    let growth = f8.proxy / f4.proxy;
    let variation = (f8.norm_p / f4.norm_p - 1.0).abs();

    let rest = boundary == 0 && errors == 0 && agreement >= 0.9 && v.regime == Regime::Three && !v.bounded && growth >= 2.0;
    let steady = variation < 0.05;
    // the known red only excuses the failure when everything else holds
    let red = if rest && !steady { vec![KNOWN_RED[0].1.to_string()] } else { Vec::new() };
    let ok = rest && steady;
    let detail = format!(
        "{} cells (regimes {regimes:?}, boundary {boundary}, errors {errors}), agreement {agreement:.3} (tol 0.9); \
         cell p=q=6/5 t=0: proxy growth {growth:.3} (tol 2), ‖f_j‖_p variation {:.1}% (tol 5%)",
        recs.len(),
        100.0 * variation
    );
    (check(ok, detail), red)
}

fn criterion7() -> Outcome {
    let s = spec(&[1], 2, 1);
    let triples = [
        (q(2, 1), q(2, 1), q(0, 1), SufficiencyRegime::Two),
        (q(3, 2), q(2, 1), q(1, 6), SufficiencyRegime::Two),
        (q(2, 1), q(3, 1), q(1, 6), SufficiencyRegime::Two),
        (q(3, 2), q(3, 1), q(1, 3), SufficiencyRegime::Two),
        (q(5, 4), q(5, 2), q(2, 5), SufficiencyRegime::Two),
        (q(7, 4), q(2, 1), q(1, 10), SufficiencyRegime::Two),
        (q(6, 5), q(6, 5), q(1, 2), SufficiencyRegime::Three),
        (q(11, 10), q(11, 10), q(1, 2), SufficiencyRegime::Three),
        (q(6, 5), q(7, 5), q(1, 2), SufficiencyRegime::Three),
        (q(5, 4), q(5, 4), q(1, 2), SufficiencyRegime::Three),
    ];
    let mut fails = Vec::new();
    let (mut worst_refine, mut min_margin) = (0.0f64, f64::INFINITY);
    for (p, qq, t, regime) in triples {
        let Some(w) = feasible_params(&s, p, qq, t, regime).witness().cloned() else {
            fails.push(format!("({p},{qq},{t}) infeasible"));
            continue;
        };
        let rep = verify_schur(&s, &w, t, 24).unwrap();
        let refine = rep.refinement_ratio();
        worst_refine = worst_refine.max(refine);
        let cfg = ScanConfig { ps: vec![p], qs: vec![qq], ts: vec![t], ..ScanConfig::default() };
        let cell = &phase_scan(&s, &cfg).unwrap()[0];
        let measured = cell
            .families
            .iter()
            .flat_map(|f| f.log_ratios.iter().copied())
            .fold(f64::NEG_INFINITY, f64::max)
            .exp();
        min_margin = min_margin.min(rep.norm_bound / measured);
        if !rep.finite() || refine >= 1.1 || rep.norm_bound < measured {
            fails.push(format!("({p},{qq},{t}) refine {refine:.4} bound {:.3e} measured {measured:.3e}", rep.norm_bound));
        }
    }
    check(
        fails.is_empty(),
        format!("10 triples, worst refinement ratio {worst_refine:.4} (tol 1.1), min bound/measured {min_margin:.3}, failures {fails:?}"),
    )
}

fn main() {
    let mut unexpected = Vec::new();
    let mut report = |id: u32, name: &str, start: Instant, out: Outcome, red: &[String]| {
        let status = if out.pass { "PASS" } else { "FAIL" };
        let known = !out.pass && !red.is_empty() && red.iter().all(|r| KNOWN_RED.iter().any(|(i, k)| *i == id && k == r));
        let tag = if known { format!(" [known red: {}]", red.join("; ")) } else { String::new() };
        println!("{status} criterion {id} ({name}): {} [{:.1}s]{tag}", out.detail, start.elapsed().as_secs_f64());
        if !out.pass && !known {
            unexpected.push(id);
        }
    };
    let t = Instant::now();
    report(1, "exact thresholds", t, criterion1(), &[]);
    let t = Instant::now();
    report(2, "kernel identity", t, criterion2(), &[]);
    let t = Instant::now();
    report(3, "basis suite", t, criterion3(), &[]);
    let t = Instant::now();
    report(4, "witness suite", t, criterion4(), &[]);
    let t = Instant::now();
    report(5, "inequality suites", t, criterion5(), &[]);
    let t = Instant::now();
    let (out, red) = criterion6();
    report(6, "phase agreement", t, out, &red);
    let t = Instant::now();
    report(7, "Schur sufficiency", t, criterion7(), &[]);
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
