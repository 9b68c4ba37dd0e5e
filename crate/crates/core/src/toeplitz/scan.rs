//! Empirical boundedness over a `(p, q, t)` grid.
//!
//! Each probe family produces a sequence of ratios `‖T f‖_q / ‖f‖_p` along a
//! growth parameter `x`. The slope of `ln ratio` against `x`, fitted over the
//! last three levels, is the family's growth rate; a cell is empirically
//! unbounded when the largest rate exceeds the tolerance.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{ball_multiplier, disk_multiplier, monomial_multiplier, predicted_verdict, series_lq, witness_constant, witness_sequence_fj, Regime, Verdict};
use crate::domain::{q_to_f64, DomainSpec, FactorKind, Q};
use crate::error::{Error, Result};
use crate::estimates::{disk_lhs, DEFAULT_SLOPE_TOL};
use crate::quadrature::ls_slope;
use crate::sampling::{grid_pi, SampleSet};

const TAIL: usize = 3;
const MAX_NODES: usize = 4_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ProbeFamily {
    /// `z̄_n^{d_n}`, with `T f` cut off near `z_n = 0`.
    Witness,
    /// Kernel bumps `(1 − z_n ω)^{−2}` with `ω → 1`.
    KernelBump,
    /// The shell sequence `f_j`.
    Shells,
    /// Random holomorphic polynomials in the product coordinates.
    Random,
}

impl ProbeFamily {
    pub const ALL: [ProbeFamily; 4] = [ProbeFamily::Witness, ProbeFamily::KernelBump, ProbeFamily::Shells, ProbeFamily::Random];

    pub fn label(&self) -> &'static str {
        match self {
            ProbeFamily::Witness => "witness",
            ProbeFamily::KernelBump => "kernel-bump",
            ProbeFamily::Shells => "shells",
            ProbeFamily::Random => "random",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilySlope {
    pub family: ProbeFamily,
    pub xs: Vec<f64>,
    pub log_ratios: Vec<f64>,
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseRecord {
    pub p: Q,
    pub q: Q,
    pub t: Q,
    pub verdict: Verdict,
    pub families: Vec<FamilySlope>,
    /// Largest family slope.
    pub slope: f64,
    pub empirically_bounded: bool,
    pub agree: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanConfig {
    pub ps: Vec<Q>,
    pub qs: Vec<Q>,
    pub ts: Vec<Q>,
    pub families: Vec<ProbeFamily>,
    pub slope_tol: f64,
    /// Levels of the witness and kernel-bump families.
    pub levels: usize,
    /// Length of the shell sequence.
    pub shells: usize,
    pub random_polys: usize,
    pub seed: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        let r = |a, b| Q::new(a, b);
        ScanConfig {
            ps: vec![r(11, 10), r(6, 5), r(5, 4), r(3, 2), r(7, 4)],
            qs: vec![r(2, 1), r(5, 2), r(3, 1), r(5, 1), r(6, 1)],
            ts: vec![r(0, 1), r(1, 10), r(1, 1)],
            families: ProbeFamily::ALL.to_vec(),
            slope_tol: DEFAULT_SLOPE_TOL,
            levels: 8,
            shells: 24,
            random_polys: 2,
            seed: 7,
        }
    }
}

fn tail_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let s = xs.len().saturating_sub(TAIL);
    ls_slope(&xs[s..], &ys[s..])
}

/// Product of `1/(d_i + 1)` over the disks before the last one.
fn inner_disk_mass(spec: &DomainSpec) -> f64 {
    spec.factors()
        .iter()
        .filter(|f| f.kind == FactorKind::Disk && f.offset + 1 < spec.n())
        .map(|f| 1.0 / (f.d as f64 + 1.0))
        .product()
}

/// `ln ∫_ε^1 2ρ^{g−1} dρ` for `g = γ + 2`.
fn ln_radial_tail(g: f64, ln_eps: f64) -> f64 {
    if g == 0.0 {
        (-2.0 * ln_eps).ln()
    } else if g > 0.0 {
        (2.0 / g).ln() + (-(g * ln_eps).exp()).ln_1p()
    } else {
        (2.0 / -g).ln() + g * ln_eps + (-(-g * ln_eps).exp()).ln_1p()
    }
}

fn witness_family(spec: &DomainSpec, p: f64, q: f64, t: f64, levels: usize) -> FamilySlope {
    let d = spec.d_n() as f64;
    let mass = inner_disk_mass(spec).ln();
    let ln_f = (mass - ((p + 2.0) * d / 2.0 + 1.0).ln()) / p;
    let ln_c = witness_constant(spec, t).ln();
    let g = (2.0 - q) * d + 2.0;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for l in 1..=levels {
        let ln_eps = -2.0 * l as f64 * std::f64::consts::LN_10;
        xs.push(-ln_eps);
        ys.push(ln_c + (mass + ln_radial_tail(g, ln_eps)) / q - ln_f);
    }
    let slope = tail_slope(&xs, &ys);
    FamilySlope { family: ProbeFamily::Witness, xs, log_ratios: ys, slope }
}

/// `ln ‖T f‖_q` per level and `q`, for one `t`.
fn kernel_bump_t(spec: &DomainSpec, qs: &[f64], t: f64, levels: usize) -> Vec<Vec<f64>> {
    let d = spec.d_n();
    let mass = inner_disk_mass(spec);
    let konst: f64 = spec
        .factors()
        .iter()
        .filter(|f| f.offset + 1 < spec.n())
        .map(|f| match f.kind {
            FactorKind::Ball => ball_multiplier(f.dim, 0, t),
            FactorKind::Disk => disk_multiplier(f.d, 0, t),
        })
        .product();
    (1..=levels)
        .map(|l| {
            let eps = 0.5f64.powi(l as i32);
            let omega = 1.0 - eps;
            let m = (45.0 / eps) as usize + 64;
            let coeffs: Vec<Complex64> = (0..m)
                .map(|k| Complex64::new((k as f64 + 1.0) * omega.powi(k as i32) * disk_multiplier(d, k as i64, t), 0.0))
                .collect();
            let norms = series_lq(&coeffs, qs, |r| r.powi(2 * d as i32), eps / 8.0);
            qs.iter().zip(norms).map(|(q, v)| konst.ln() + (mass * v).ln() / q).collect()
        })
        .collect()
}

/// `ln ‖f‖_p` per level for one `p`.
fn kernel_bump_f(spec: &DomainSpec, p: f64, levels: usize) -> Vec<f64> {
    let d = spec.d_n() as f64;
    let mass = inner_disk_mass(spec);
    (1..=levels).map(|l| (mass * disk_lhs(p, 0.0, 2.0 * d, 1.0 - 0.5f64.powi(l as i32))).ln() / p).collect()
}

fn kernel_bump_family(tq: &[Vec<f64>], qi: usize, fp: &[f64]) -> FamilySlope {
    let xs: Vec<f64> = (1..=fp.len()).map(|l| l as f64 * std::f64::consts::LN_2).collect();
    let ys: Vec<f64> = tq.iter().zip(fp).map(|(t, f)| t[qi] - f).collect();
    let slope = tail_slope(&xs, &ys);
    FamilySlope { family: ProbeFamily::KernelBump, xs, log_ratios: ys, slope }
}

fn shells_family(spec: &DomainSpec, p: Q, q: Q, t: Q, len: usize) -> Result<FamilySlope> {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for j in 1..=len {
        let r = witness_sequence_fj(spec, j, p, q, t)?;
        let jf = (j + 1) as f64;
        xs.push(jf * jf.ln());
        ys.push(r.t_norm_q.ln() - r.norm_p.ln());
    }
    let slope = tail_slope(&xs, &ys);
    Ok(FamilySlope { family: ProbeFamily::Shells, xs, log_ratios: ys, slope })
}

/// Sparse holomorphic polynomial `Σ c_β η^β` in the product coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomPoly {
    pub terms: Vec<(Vec<i64>, Complex64)>,
}

impl RandomPoly {
    pub fn sample<R: Rng>(spec: &DomainSpec, rng: &mut R) -> Self {
        let count = rng.gen_range(1..=6);
        let terms = (0..count)
            .map(|_| {
                let beta: Vec<i64> = (0..spec.n()).map(|_| rng.gen_range(0..=3)).collect();
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                (beta, c)
            })
            .collect();
        RandomPoly { terms }
    }

    pub fn eval(&self, eta: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(beta, c)| eta.iter().zip(beta).fold(*c, |acc, (x, &b)| acc * x.powi(b as i32)))
            .sum()
    }

    /// `T` applied term by term.
    pub fn toeplitz(&self, spec: &DomainSpec, t: f64) -> Self {
        let terms = self.terms.iter().map(|(beta, c)| (beta.clone(), c * monomial_multiplier(spec, beta, t))).collect();
        RandomPoly { terms }
    }
}

const RADIAL: [usize; 4] = [6, 10, 16, 24];
const ANGULAR: [usize; 4] = [8, 12, 20, 32];

fn random_grids(spec: &DomainSpec) -> Result<Vec<SampleSet>> {
    let mut out = Vec::new();
    for (&r, &a) in RADIAL.iter().zip(&ANGULAR) {
        let g = grid_pi(spec, r, a)?;
        if g.len() > MAX_NODES {
            break;
        }
        out.push(g);
    }
    Ok(out)
}

/// `ln (∫ |f|^e dv)^{1/e}` on a grid for every exponent `e`.
fn grid_log_norms(spec: &DomainSpec, grid: &SampleSet, f: &RandomPoly, exps: &[f64]) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; exps.len()];
    for i in 0..grid.len() {
        let (eta, w) = grid.node(i);
        let v = f.eval(&eta).norm();
        let jw = w * spec.jacobian_raw(&eta).norm_sqr();
        for (a, e) in acc.iter_mut().zip(exps) {
            *a += v.powf(*e) * jw;
        }
    }
    acc.iter().zip(exps).map(|(a, e)| if a.is_finite() && *a > 0.0 { Ok(a.ln() / e) } else { Err(Error::NonFiniteIntegrand) }).collect()
}

fn random_family(xs: &[f64], tq: &[Vec<Vec<f64>>], fp: &[Vec<Vec<f64>>], qi: usize, pi: usize) -> FamilySlope {
    let mut best: Option<FamilySlope> = None;
    for (t_poly, f_poly) in tq.iter().zip(fp) {
        let ys: Vec<f64> = t_poly.iter().zip(f_poly).map(|(t, f)| t[qi] - f[pi]).collect();
        let slope = tail_slope(xs, &ys);
        if best.as_ref().map_or(true, |b| slope > b.slope) {
            best = Some(FamilySlope { family: ProbeFamily::Random, xs: xs.to_vec(), log_ratios: ys, slope });
        }
    }
    best.unwrap_or(FamilySlope { family: ProbeFamily::Random, xs: Vec::new(), log_ratios: Vec::new(), slope: 0.0 })
}

/// Quantities shared by many cells.
struct Tables {
    bump_t: Vec<Vec<Vec<f64>>>,
    bump_f: Vec<Vec<f64>>,
    rand_x: Vec<f64>,
    /// `[t][poly][level][q]`
    rand_t: Vec<Vec<Vec<Vec<f64>>>>,
    /// `[poly][level][p]`
    rand_f: Vec<Vec<Vec<f64>>>,
}

fn build_tables(spec: &DomainSpec, cfg: &ScanConfig) -> Result<Tables> {
    let qs: Vec<f64> = cfg.qs.iter().map(|&q| q_to_f64(q)).collect();
    let ps: Vec<f64> = cfg.ps.iter().map(|&p| q_to_f64(p)).collect();
    let ts: Vec<f64> = cfg.ts.iter().map(|&t| q_to_f64(t)).collect();
    let want = |f: ProbeFamily| cfg.families.contains(&f);
    let (mut tables, levels) = (Tables { bump_t: Vec::new(), bump_f: Vec::new(), rand_x: Vec::new(), rand_t: Vec::new(), rand_f: Vec::new() }, cfg.levels);
    if want(ProbeFamily::KernelBump) {
        tables.bump_t = ts.par_iter().map(|&t| kernel_bump_t(spec, &qs, t, levels)).collect();
        tables.bump_f = ps.par_iter().map(|&p| kernel_bump_f(spec, p, levels)).collect();
    }
    if want(ProbeFamily::Random) && cfg.random_polys > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let polys: Vec<RandomPoly> = (0..cfg.random_polys).map(|_| RandomPoly::sample(spec, &mut rng)).collect();
        let grids = random_grids(spec)?;
        tables.rand_x = grids.iter().map(|g| (g.len() as f64).ln()).collect();
        let norms = |f: &RandomPoly, exps: &[f64]| -> Result<Vec<Vec<f64>>> { grids.par_iter().map(|g| grid_log_norms(spec, g, f, exps)).collect() };
        tables.rand_f = polys.iter().map(|f| norms(f, &ps)).collect::<Result<_>>()?;
        tables.rand_t = ts
            .iter()
            .map(|&t| polys.iter().map(|f| norms(&f.toeplitz(spec, t), &qs)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
    }
    Ok(tables)
}

fn scan_cell(spec: &DomainSpec, cfg: &ScanConfig, tables: &Tables, (pi, qi, ti): (usize, usize, usize)) -> PhaseRecord {
    let (p, q, t) = (cfg.ps[pi], cfg.qs[qi], cfg.ts[ti]);
    let verdict = predicted_verdict(spec, p, q, t);
    let (pf, qf, tf) = (q_to_f64(p), q_to_f64(q), q_to_f64(t));
    let mut families = Vec::new();
    let mut error = None;
    for fam in &cfg.families {
        let r = match fam {
            ProbeFamily::Witness => Ok(witness_family(spec, pf, qf, tf, cfg.levels)),
            ProbeFamily::KernelBump => Ok(kernel_bump_family(&tables.bump_t[ti], qi, &tables.bump_f[pi])),
            ProbeFamily::Shells if q >= spec.q1() => continue,
            ProbeFamily::Shells => shells_family(spec, p, q, t, cfg.shells),
            ProbeFamily::Random if tables.rand_t.is_empty() => continue,
            ProbeFamily::Random => Ok(random_family(&tables.rand_x, &tables.rand_t[ti], &tables.rand_f, qi, pi)),
        };
        match r {
            Ok(f) if f.slope.is_finite() => families.push(f),
            Ok(f) => error = Some(format!("{} produced a non-finite slope", f.family.label())),
            Err(e) => error = Some(format!("{}: {e}", fam.label())),
        }
    }
    let slope = families.iter().map(|f| f.slope).fold(f64::NEG_INFINITY, f64::max);
    let empirically_bounded = error.is_none() && slope <= cfg.slope_tol;
    let agree = error.is_none() && verdict.regime != Regime::NotApplicable && empirically_bounded == verdict.bounded;
    PhaseRecord { p, q, t, verdict, families, slope, empirically_bounded, agree, error }
}

/// Scan every `(p, q, t)` cell with `1 < p ≤ q` and `t ≥ 0`.
pub fn phase_scan(spec: &DomainSpec, cfg: &ScanConfig) -> Result<Vec<PhaseRecord>> {
    let one = Q::from_integer(1);
    let zero = Q::from_integer(0);
    let mut cells = Vec::new();
    for (pi, &p) in cfg.ps.iter().enumerate() {
        for (qi, &q) in cfg.qs.iter().enumerate() {
            for (ti, &t) in cfg.ts.iter().enumerate() {
                if p > one && p <= q && t >= zero {
                    cells.push((pi, qi, ti));
                }
            }
        }
    }
    if cells.is_empty() {
        return Ok(Vec::new());
    }
    let tables = build_tables(spec, cfg)?;
    Ok(cells.par_iter().map(|&c| scan_cell(spec, cfg, &tables, c)).collect())
}
/// Share of cells where the scan agrees with the exact verdict, ignoring
/// boundary cells and cells that failed. `None` when nothing is left.
pub fn agreement_fraction(records: &[PhaseRecord]) -> Option<f64> {
    let counted: Vec<&PhaseRecord> = records
        .iter()
        .filter(|r| r.error.is_none() && !r.verdict.boundary_case && r.verdict.regime != Regime::NotApplicable)
        .collect();
    if counted.is_empty() {
        return None;
    }
    Some(counted.iter().filter(|r| r.agree).count() as f64 / counted.len() as f64)
}

/// One row per cell, tagged with the domain fingerprint.
pub fn write_phase_csv<W: Write>(spec: &DomainSpec, records: &[PhaseRecord], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["fingerprint", "p", "q", "t", "regime", "predicted_bounded", "boundary_case", "slope", "empirically_bounded", "agree", "error"])?;
    let fp = spec.fingerprint();
    for r in records {
        w.write_record([
            fp.clone(),
            r.p.to_string(),
            r.q.to_string(),
            r.t.to_string(),
            r.verdict.regime.label().to_string(),
            r.verdict.bounded.to_string(),
            r.verdict.boundary_case.to_string(),
            format!("{:.6}", r.slope),
            r.empirically_bounded.to_string(),
            r.agree.to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
