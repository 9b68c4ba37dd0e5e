//! `hartogs verify`: basis, kernel, Green-function and integral-estimate suites.

use anyhow::Result;
use hartogs::basis::{check_orthogonality, enumerate_basis, write_basis_csv};
use hartogs::domain::{CPoint, DomainSpec};
use hartogs::estimates::{ball_estimate, disk_estimate, EstimateReport};
use hartogs::kernel::{bergman_diag, bergman_kernel, check_comparability, check_herbort_blocki, kernel_series, sublevel_grid};
use hartogs::sampling::grid_pi_capped;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{fmt_f, fmt_point, Outputs};

#[derive(Debug, Serialize)]
pub struct SuiteSummary {
    pub suite: &'static str,
    pub pass: bool,
    pub worst: f64,
    pub tolerance: f64,
    pub file: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Random point of `H` whose pulled-back factor norms lie in `[lo, hi)`.
pub fn interior_point(spec: &DomainSpec, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Result<CPoint> {
    let mut eta = Vec::with_capacity(spec.n());
    for f in spec.factors() {
        let r = rng.gen_range(lo..hi);
        let v: Vec<Complex64> = (0..f.dim).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt().max(1e-12);
        eta.extend(v.into_iter().map(|c| c * (r / norm)));
    }
    Ok(spec.psi_inverse(&CPoint::pi(eta))?)
}

fn failed(suite: &'static str, file: &'static str, tolerance: f64, e: anyhow::Error) -> SuiteSummary {
    SuiteSummary { suite, pass: false, worst: f64::NAN, tolerance, file, error: Some(format!("{e:#}")) }
}

fn orthogonality(spec: &DomainSpec, cfg: &RunConfig, out: &mut Outputs) -> Result<(SuiteSummary, SuiteSummary)> {
    let v = &cfg.verify;
    let grid = grid_pi_capped(spec, v.radial, v.angular, usize::MAX)?;
    let rep = check_orthogonality(spec, v.basis_bound, &grid)?;
    let fp = spec.fingerprint();
    out.csv(
        "orthogonality.csv",
        &["fingerprint", "basis_bound", "basis_size", "max_off_diagonal", "max_diagonal_rel_error"],
        [[fp, v.basis_bound.to_string(), rep.basis_size.to_string(), fmt_f(rep.max_off_diagonal), fmt_f(rep.max_diagonal_rel_error)]],
    )?;
    let mut basis = Vec::new();
    write_basis_csv(spec, &enumerate_basis(spec, v.basis_bound), &mut basis)?;
    out.raw("basis.csv", basis);
    let (to, tn) = (cfg.tolerance("orthogonality"), cfg.tolerance("norms"));
    Ok((
        SuiteSummary { suite: "orthogonality", pass: rep.max_off_diagonal < to, worst: rep.max_off_diagonal, tolerance: to, file: "orthogonality.csv", error: None },
        SuiteSummary { suite: "norms", pass: rep.max_diagonal_rel_error < tn, worst: rep.max_diagonal_rel_error, tolerance: tn, file: "orthogonality.csv", error: None },
    ))
}

fn diagonal(spec: &DomainSpec, cfg: &RunConfig, out: &mut Outputs) -> Result<SuiteSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let fp = spec.fingerprint();
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.verify.points {
        let z = interior_point(spec, &mut rng, 0.05, 0.95)?;
        let d = bergman_diag(spec, &z)?;
        let k = bergman_kernel(spec, &z, &z)?.value;
        let err = (k - d).norm() / d;
        worst = worst.max(err);
        rows.push([fp.clone(), fmt_point(&z), fmt_f(d), fmt_f(k.re), fmt_f(k.im), fmt_f(err)]);
    }
    out.csv("diagonal.csv", &["fingerprint", "z", "diagonal", "kernel_re", "kernel_im", "rel_error"], rows)?;
    let tol = cfg.tolerance("diagonal");
    Ok(SuiteSummary { suite: "diagonal", pass: worst < tol, worst, tolerance: tol, file: "diagonal.csv", error: None })
}

fn series(spec: &DomainSpec, cfg: &RunConfig, out: &mut Outputs) -> Result<SuiteSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let fp = spec.fingerprint();
    let bound = cfg.verify.series_bound;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.verify.points {
        let z = interior_point(spec, &mut rng, 0.05, 0.6)?;
        let d = bergman_diag(spec, &z)?;
        let s = kernel_series(spec, &z, &z, bound)?.value;
        let err = (s - d).norm() / d;
        worst = worst.max(err);
        rows.push([fp.clone(), fmt_point(&z), bound.to_string(), fmt_f(d), fmt_f(s.re), fmt_f(err)]);
    }
    out.csv("series.csv", &["fingerprint", "z", "bound", "closed_form", "series", "rel_error"], rows)?;
    let tol = cfg.tolerance("series");
    Ok(SuiteSummary { suite: "series", pass: worst < tol, worst, tolerance: tol, file: "series.csv", error: None })
}

fn herbort_blocki(spec: &DomainSpec, cfg: &RunConfig, out: &mut Outputs) -> Result<SuiteSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));
    let fp = spec.fingerprint();
    let basis = enumerate_basis(spec, 2);
    let mut rows = Vec::new();
    let mut worst = f64::INFINITY;
    for _ in 0..cfg.verify.triples {
        let alpha = &basis[rng.gen_range(0..basis.len())];
        let w = interior_point(spec, &mut rng, 0.1, 0.8)?;
        let s = rng.gen_range(0.2..2.0);
        let grid = sublevel_grid(spec, &w, s, 16, 32)?;
        let hb = check_herbort_blocki(spec, alpha, &w, s, &grid)?;
        worst = worst.min(hb.ratio);
        rows.push([fp.clone(), alpha.to_string(), fmt_point(&w), fmt_f(s), fmt_f(hb.lhs), fmt_f(hb.rhs), fmt_f(hb.ratio)]);
    }
    out.csv("herbort_blocki.csv", &["fingerprint", "alpha", "w", "s", "lhs", "rhs", "ratio"], rows)?;
    let tol = cfg.tolerance("herbort_blocki");
    Ok(SuiteSummary { suite: "herbort_blocki", pass: worst >= 1.0 - tol, worst, tolerance: tol, file: "herbort_blocki.csv", error: None })
}

fn comparability(spec: &DomainSpec, cfg: &RunConfig, out: &mut Outputs) -> Result<SuiteSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(3));
    let fp = spec.fingerprint();
    let tol = cfg.tolerance("comparability");
    let mut rows = Vec::new();
    // worst excess over the envelope, as a relative amount
    let mut worst = f64::NEG_INFINITY;
    for i in 0..cfg.verify.triples {
        let w = interior_point(spec, &mut rng, 0.1, 0.9)?;
        let s = rng.gen_range(0.2..3.0);
        let c = check_comparability(spec, &w, s, cfg.verify.comparability_samples, cfg.seed.wrapping_add(i as u64))?;
        let excess = (c.lower_bound / c.min - 1.0).max(c.max / c.upper_bound - 1.0);
        worst = worst.max(excess);
        rows.push([fp.clone(), fmt_point(&w), fmt_f(s), fmt_f(c.min), fmt_f(c.max), fmt_f(c.lower_bound), fmt_f(c.upper_bound), c.within().to_string()]);
    }
    out.csv("comparability.csv", &["fingerprint", "w", "s", "min", "max", "lower_bound", "upper_bound", "within"], rows)?;
    Ok(SuiteSummary { suite: "comparability", pass: worst <= tol, worst, tolerance: tol, file: "comparability.csv", error: None })
}

fn estimates(spec: &DomainSpec, cfg: &RunConfig, out: &mut Outputs) -> Result<SuiteSummary> {
    let radii = &cfg.verify.radii;
    let mut reports: Vec<(String, EstimateReport)> = Vec::new();
    for (a, u, c) in [(1.0, -0.5, 0.0), (2.0, -0.25, 1.0)] {
        reports.push((format!("disk a={a} u={u} c={c}"), disk_estimate(a, u, c, radii)?));
    }
    for (k, a, u) in [(1, 1.0, -0.5), (2, 1.0, -0.5), (2, 1.5, -0.3)] {
        reports.push((format!("ball k={k} a={a} u={u}"), ball_estimate(k, a, u, radii)?));
    }
    let tol = cfg.tolerance("estimates");
    let fp = spec.fingerprint();
    let mut rows = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    let mut pass = true;
    for (name, rep) in &reports {
        worst = worst.max(rep.trend_slope);
        pass &= rep.bounded(tol);
        for i in 0..rep.radii.len() {
            rows.push([fp.clone(), name.clone(), fmt_f(rep.radii[i]), fmt_f(rep.lhs[i]), fmt_f(rep.rhs[i]), fmt_f(rep.ratios[i]), fmt_f(rep.trend_slope)]);
        }
    }
    out.csv("estimates.csv", &["fingerprint", "estimate", "radius", "lhs", "rhs", "ratio", "trend_slope"], rows)?;
    Ok(SuiteSummary { suite: "estimates", pass, worst, tolerance: tol, file: "estimates.csv", error: None })
}

/// Run every suite; `Ok(true)` when all pass.
pub fn run(spec: &DomainSpec, cfg: &RunConfig, out: &mut Outputs) -> Result<bool> {
    let mut suites = Vec::new();
    match orthogonality(spec, cfg, out) {
        Ok((a, b)) => suites.extend([a, b]),
        Err(e) => suites.push(failed("orthogonality", "orthogonality.csv", cfg.tolerance("orthogonality"), e)),
    }
    type Suite = fn(&DomainSpec, &RunConfig, &mut Outputs) -> Result<SuiteSummary>;
    let rest: [(&'static str, &'static str, Suite); 5] = [
        ("diagonal", "diagonal.csv", diagonal),
        ("series", "series.csv", series),
        ("herbort_blocki", "herbort_blocki.csv", herbort_blocki),
        ("comparability", "comparability.csv", comparability),
        ("estimates", "estimates.csv", estimates),
    ];
    for (name, file, suite) in rest {
        suites.push(suite(spec, cfg, out).unwrap_or_else(|e| failed(name, file, cfg.tolerance(name), e)));
    }
    let pass = suites.iter().all(|s| s.pass);
    for s in &suites {
        println!("{} {:<15} worst {:.3e} (tolerance {:e})", if s.pass { "PASS" } else { "FAIL" }, s.suite, s.worst, s.tolerance);
    }
    let (lo, hi) = spec.diagonal_interval();
    out.json(
        "summary.json",
        "verify",
        &serde_json::json!({
            "fingerprint": spec.fingerprint(),
            "domain": {"partition": spec.partition(), "n": spec.n(), "b": spec.b()},
            "seed": cfg.seed,
            "diagonal_interval": [lo.to_string(), hi.to_string()],
            "q1": spec.q1().to_string(),
            "pass": pass,
            "suites": suites,
        }),
    )?;
    Ok(pass)
}
