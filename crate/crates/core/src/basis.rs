//! The orthogonal monomial basis `{z^α}` of the Bergman space of `H`.
//!
//! Substituting `z = G(η)` turns `z^α · det G′(η)` into the single monomial
//! `∏ η̃_j^{α̃_j} ∏_{i>k} η_i^{e_i}` with
//! `e_i = Σ_{j≤i} α_j + (b − 1) Σ_{j≤k} α_j + (i − 1 + C)`,
//! so norms are products of ball moments and disk moments `1/(e_i + 1)`.

use std::cmp::Ordering;
use std::io::Write;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::domain::{DomainSpec, Factor, FactorKind};
use crate::error::{Error, Result};
use crate::sampling::{integrate_h_separable, SampleSet};

/// Exponent vector `α ∈ N^k × Z^{n−k}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<i64>);

impl MultiIndex {
    pub fn new(entries: Vec<i64>) -> Self {
        MultiIndex(entries)
    }
    pub fn entries(&self) -> &[i64] {
        &self.0
    }
    /// `Σ |α_j|`.
    pub fn weight(&self) -> i64 {
        self.0.iter().map(|a| a.abs()).sum()
    }
    /// The witness index `(0, …, 0, 1 − n − C)`.
    pub fn witness(spec: &DomainSpec) -> Self {
        let mut v = vec![0; spec.n()];
        v[spec.n() - 1] = -spec.d_n();
        MultiIndex(v)
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Graded order: total weight `Σ|α_j|`, then lexicographic.
fn graded_cmp(a: &MultiIndex, b: &MultiIndex) -> Ordering {
    a.weight().cmp(&b.weight()).then_with(|| a.0.cmp(&b.0))
}

fn check_index(spec: &DomainSpec, alpha: &MultiIndex) -> Result<()> {
    if alpha.0.len() != spec.n() {
        return Err(Error::MalformedIndex(format!("{alpha} has {} entries, expected {}", alpha.0.len(), spec.n())));
    }
    if alpha.0[..spec.k()].iter().any(|&a| a < 0) {
        return Err(Error::MalformedIndex(format!("{alpha} has a negative ball entry")));
    }
    Ok(())
}

/// Monomial structure of `z^α ∘ G`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pullback {
    /// Exponent of `η_i` in `z^α ∘ G` for each disk coordinate.
    pub powers: Vec<i64>,
    /// Same with the Jacobian power added: `e_i = powers_i + d_i`.
    pub exponents: Vec<i64>,
}

/// Exponent bookkeeping for `z^α ∘ G` and `(z^α ∘ G) · det G′`.
pub fn pullback(spec: &DomainSpec, alpha: &MultiIndex) -> Result<Pullback> {
    check_index(spec, alpha)?;
    let k = spec.k();
    let ball_sum: i64 = alpha.0[..k].iter().sum();
    let mut acc = spec.b() as i64 * ball_sum;
    let mut powers = Vec::with_capacity(spec.n() - k);
    let mut exponents = Vec::with_capacity(spec.n() - k);
    for i in k..spec.n() {
        acc += alpha.0[i];
        powers.push(acc);
        exponents.push(acc + spec.disk_d(i));
    }
    Ok(Pullback { powers, exponents })
}

/// Square integrability of `z^α` on `H`:
/// `Σ_{j≤m} α_j + (b − 1) Σ_{j≤k} α_j > (1 − b)k − m` for `m = k+1, …, n`.
pub fn is_admissible(spec: &DomainSpec, alpha: &MultiIndex) -> Result<bool> {
    check_index(spec, alpha)?;
    let k = spec.k() as i64;
    let b = spec.b() as i64;
    let ball_sum: i64 = alpha.0[..spec.k()].iter().sum();
    let mut prefix = ball_sum;
    for m in (k + 1)..=(spec.n() as i64) {
        prefix += alpha.0[(m - 1) as usize];
        if prefix + (b - 1) * ball_sum <= (1 - b) * k - m {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All admissible `α` with `|α_j| ≤ bound`, in graded order.
pub fn enumerate_basis(spec: &DomainSpec, bound: u32) -> Vec<MultiIndex> {
    let bound = bound as i64;
    let n = spec.n();
    let k = spec.k();
    let lo: Vec<i64> = (0..n).map(|j| if j < k { 0 } else { -bound }).collect();
    let mut cur = lo.clone();
    let mut out = Vec::new();
    loop {
        let alpha = MultiIndex(cur.clone());
        if is_admissible(spec, &alpha).unwrap_or(false) {
            out.push(alpha);
        }
        let mut j = n;
        loop {
            if j == 0 {
                out.sort_by(graded_cmp);
                return out;
            }
            j -= 1;
            if cur[j] < bound {
                cur[j] += 1;
                break;
            }
            cur[j] = lo[j];
        }
    }
}

/// Exact and floating value of `‖z^α‖²`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormSq {
    pub exact: BigRational,
    pub value: f64,
}

/// `∫_{B^k} |w^β|² dv = k! β! / (k + |β|)!` under the normalized measure.
pub fn ball_moment(k: usize, beta: &[i64]) -> BigRational {
    let fact = |m: i64| -> BigInt { (1..=m).fold(BigInt::one(), |acc, i| acc * BigInt::from(i)) };
    let total: i64 = beta.iter().sum();
    let num = beta.iter().fold(fact(k as i64), |acc, &b| acc * fact(b));
    BigRational::new(num, fact(k as i64 + total))
}

/// Floating version of [`ball_moment`], via log-gamma.
pub fn ball_moment_f64(k: usize, beta: &[i64]) -> f64 {
    let total: i64 = beta.iter().sum();
    let lg = ln_gamma(k as f64 + 1.0) + beta.iter().map(|&b| ln_gamma(b as f64 + 1.0)).sum::<f64>()
        - ln_gamma((k as i64 + total) as f64 + 1.0);
    lg.exp()
}

/// `‖z^α‖²_{L²(H)}` in closed form.
pub fn monomial_norm_sq(spec: &DomainSpec, alpha: &MultiIndex) -> Result<NormSq> {
    let pb = pullback(spec, alpha)?;
    if pb.exponents.iter().any(|&e| e < 0) {
        return Err(Error::NotAdmissible(alpha.0.clone()));
    }
    let mut exact = BigRational::one();
    for f in spec.factors().iter().filter(|f| f.kind == FactorKind::Ball) {
        exact *= ball_moment(f.dim, &alpha.0[f.offset..f.offset + f.dim]);
    }
    for e in &pb.exponents {
        exact /= BigRational::from_integer(BigInt::from(e + 1));
    }
    let value = exact.to_f64().unwrap_or_else(|| norm_sq_f64_unchecked(spec, alpha, &pb.exponents));
    Ok(NormSq { exact, value })
}

/// Floating `‖z^α‖²` without building big rationals; for long series.
pub fn monomial_norm_sq_f64(spec: &DomainSpec, alpha: &MultiIndex) -> Result<f64> {
    let pb = pullback(spec, alpha)?;
    if pb.exponents.iter().any(|&e| e < 0) {
        return Err(Error::NotAdmissible(alpha.0.clone()));
    }
    Ok(norm_sq_f64_unchecked(spec, alpha, &pb.exponents))
}

fn norm_sq_f64_unchecked(spec: &DomainSpec, alpha: &MultiIndex, exponents: &[i64]) -> f64 {
    let balls: f64 = spec
        .factors()
        .iter()
        .filter(|f| f.kind == FactorKind::Ball)
        .map(|f| ball_moment_f64(f.dim, &alpha.0[f.offset..f.offset + f.dim]))
        .product();
    balls / exponents.iter().map(|&e| (e + 1) as f64).product::<f64>()
}

/// Per-factor value of `z^α ∘ G` (Jacobian not included).
pub(crate) fn monomial_factor(f: &Factor, alpha: &MultiIndex, pb: &Pullback, k: usize, x: &[Complex64]) -> Complex64 {
    match f.kind {
        FactorKind::Ball => x
            .iter()
            .zip(&alpha.0[f.offset..f.offset + f.dim])
            .map(|(c, &a)| c.powi(a as i32))
            .product(),
        FactorKind::Disk => x[0].powi(pb.powers[f.offset - k] as i32),
    }
}

/// Outcome of the orthogonality sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrthoReport {
    pub basis_size: usize,
    pub max_off_diagonal: f64,
    pub max_diagonal_rel_error: f64,
}

/// Gram matrix of `{z^α : |α_j| ≤ bound}` by quadrature.
pub fn check_orthogonality(spec: &DomainSpec, bound: u32, samples: &SampleSet) -> Result<OrthoReport> {
    let basis = enumerate_basis(spec, bound);
    let pbs: Vec<Pullback> = basis.iter().map(|a| pullback(spec, a)).collect::<Result<_>>()?;
    let k = spec.k();
    let inner = |i: usize, j: usize| -> Result<Complex64> {
        integrate_h_separable(spec, samples, |f, x| {
            monomial_factor(f, &basis[i], &pbs[i], k, x) * monomial_factor(f, &basis[j], &pbs[j], k, x).conj()
        })
    };
    let rows: Vec<Result<(f64, f64)>> = (0..basis.len())
        .into_par_iter()
        .map(|i| {
            let mut off: f64 = 0.0;
            for j in (i + 1)..basis.len() {
                off = off.max(inner(i, j)?.norm());
            }
            let exact = monomial_norm_sq(spec, &basis[i])?.value;
            let diag = inner(i, i)?;
            Ok((off, ((diag.re - exact) / exact).abs().max(diag.im.abs() / exact)))
        })
        .collect();
    let mut report = OrthoReport { basis_size: basis.len(), max_off_diagonal: 0.0, max_diagonal_rel_error: 0.0 };
    for r in rows {
        let (off, diag) = r?;
        report.max_off_diagonal = report.max_off_diagonal.max(off);
        report.max_diagonal_rel_error = report.max_diagonal_rel_error.max(diag);
    }
    Ok(report)
}

/// Basis dump: entries, admissibility, exact norm and float norm per row.
pub fn write_basis_csv<W: Write>(spec: &DomainSpec, indices: &[MultiIndex], out: W) -> std::result::Result<(), csv::Error> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    wtr.write_record(["domain", "alpha", "admissible", "norm_num", "norm_den", "norm"])?;
    for a in indices {
        let admissible = is_admissible(spec, a).unwrap_or(false);
        let (num, den, val) = match monomial_norm_sq(spec, a) {
            Ok(ns) => (ns.exact.numer().to_string(), ns.exact.denom().to_string(), format!("{:e}", ns.value)),
            Err(_) => (String::new(), String::new(), "inf".to_string()),
        };
        let entries: Vec<String> = a.0.iter().map(i64::to_string).collect();
        wtr.write_record([spec.fingerprint(), entries.join(";"), admissible.to_string(), num, den, val])?;
    }
    wtr.flush()?;
    Ok(())
}
