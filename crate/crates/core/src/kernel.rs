//! Bergman kernel of `H`, its monomial series, the pluricomplex Green
//! function and the two kernel inequalities used in the necessity argument.
//!
//! With `K̂` the product of the ball kernels `(1 − ⟨η, ζ⟩)^{−(k_j+1)}` and the
//! disk kernels `(1 − η ζ̄)^{−2}`, the kernel of `H` is
//! `K(z, w) = K̂(Ψz, Ψw) det Ψ′(z) conj(det Ψ′(w))`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::basis::{enumerate_basis, is_admissible, monomial_factor, monomial_norm_sq_f64, pullback, MultiIndex};
use crate::domain::{block_norm, block_norm_sqr, hermitian, CPoint, DomainSpec, Factor};
use crate::error::{Error, Result};
use crate::sampling::{integrate_h_separable, uniform_ball, FactorRule, SampleKind, SampleSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum KernelMethod {
    ClosedForm,
    Series(u32),
}

/// A kernel value together with where and how it was computed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: Complex64,
    pub at: (CPoint, CPoint),
    pub method: KernelMethod,
}

/// Kernel of one factor at a pair of blocks.
pub(crate) fn factor_kernel(f: &Factor, eta: &[Complex64], zeta: &[Complex64]) -> Result<Complex64> {
    let base = Complex64::new(1.0, 0.0) - hermitian(eta, zeta);
    if base.norm() == 0.0 {
        return Err(Error::SingularPair);
    }
    Ok(base.powi(-(f.kernel_exponent() as i32)))
}

/// `K̂(η, ζ)` on `Π` (the puncture is removable, so `η_j = 0` is allowed).
pub fn product_kernel(spec: &DomainSpec, eta: &CPoint, zeta: &CPoint) -> Result<Complex64> {
    if eta.len() != spec.n() || zeta.len() != spec.n() {
        return Err(Error::ParameterOutOfRange("point length differs from n".into()));
    }
    let mut acc = Complex64::new(1.0, 0.0);
    for f in spec.factors() {
        let r = f.offset..f.offset + f.dim;
        acc *= factor_kernel(&f, &eta.coords[r.clone()], &zeta.coords[r])?;
    }
    Ok(acc)
}

/// `K̂(η, η)`, real and positive.
pub(crate) fn product_diag_raw(spec: &DomainSpec, eta: &[Complex64]) -> f64 {
    spec.factors()
        .iter()
        .map(|f| (1.0 - block_norm_sqr(&eta[f.offset..f.offset + f.dim])).powi(-(f.kernel_exponent() as i32)))
        .product()
}

/// Closed-form kernel of `H` by the transformation rule.
pub fn bergman_kernel(spec: &DomainSpec, z: &CPoint, w: &CPoint) -> Result<KernelValue> {
    let eta = spec.psi_forward(z)?;
    let zeta = spec.psi_forward(w)?;
    let k = product_kernel(spec, &eta, &zeta)?;
    let value = k / (spec.jacobian_raw(&eta.coords) * spec.jacobian_raw(&zeta.coords).conj());
    Ok(KernelValue { value, at: (z.clone(), w.clone()), method: KernelMethod::ClosedForm })
}

/// `K(z, z) = 1 / (|det G′(η)|² ∏ (1 − ‖η̃_j‖²)^{k_j+1} ∏ (1 − |η_j|²)²)`.
pub fn bergman_diag(spec: &DomainSpec, z: &CPoint) -> Result<f64> {
    let eta = spec.psi_forward(z)?;
    Ok(product_diag_raw(spec, &eta.coords) / spec.jacobian_raw(&eta.coords).norm_sqr())
}

/// Truncated series `Σ z^α conj(w^α) / ‖z^α‖²` with basis and norms cached.
#[derive(Clone, Debug)]
pub struct KernelSeries {
    spec: DomainSpec,
    bound: u32,
    terms: Vec<(MultiIndex, f64)>,
}

impl KernelSeries {
    pub fn new(spec: &DomainSpec, bound: u32) -> Self {
        let terms = enumerate_basis(spec, bound)
            .into_iter()
            .map(|a| {
                let norm = monomial_norm_sq_f64(spec, &a).expect("enumerated indices are admissible");
                (a, norm)
            })
            .collect();
        KernelSeries { spec: spec.clone(), bound, terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, z: &CPoint, w: &CPoint) -> Result<KernelValue> {
        for p in [z, w] {
            if !self.spec.contains_h(p) {
                return Err(Error::DomainViolation("the Hartogs domain"));
            }
        }
        let value = self
            .terms
            .iter()
            .map(|(a, norm)| {
                let term: Complex64 = a
                    .0
                    .iter()
                    .zip(z.coords.iter().zip(&w.coords))
                    .map(|(&e, (x, y))| x.powi(e as i32) * y.powi(e as i32).conj())
                    .product();
                term / norm
            })
            .sum();
        Ok(KernelValue { value, at: (z.clone(), w.clone()), method: KernelMethod::Series(self.bound) })
    }
}

/// Partial sum of the kernel series over `enumerate_basis(spec, bound)`.
pub fn kernel_series(spec: &DomainSpec, z: &CPoint, w: &CPoint, bound: u32) -> Result<KernelValue> {
    KernelSeries::new(spec, bound).eval(z, w)
}

/// Involutive automorphism of the unit ball swapping `a` and `0`:
/// `φ_a(z) = (a − P_a z − √(1 − |a|²) Q_a z) / (1 − ⟨z, a⟩)`.
/// On the disk this is `(a − z)/(1 − ā z)`.
pub fn ball_automorphism(a: &[Complex64], z: &[Complex64]) -> Vec<Complex64> {
    let aa = block_norm_sqr(a);
    if aa == 0.0 {
        return z.iter().map(|c| -c).collect();
    }
    let za = hermitian(z, a);
    let denom = Complex64::new(1.0, 0.0) - za;
    let s = (1.0 - aa).sqrt();
    let t = za / aa;
    a.iter()
        .zip(z)
        .map(|(ai, zi)| {
            let p = ai * t;
            (ai - p - (zi - p) * s) / denom
        })
        .collect()
}

/// Real Jacobian of `φ_a` at `z`: `((1 − |a|²) / |1 − ⟨z, a⟩|²)^{k+1}`.
pub fn automorphism_jacobian(a: &[Complex64], z: &[Complex64]) -> f64 {
    let aa = block_norm_sqr(a);
    let d = (Complex64::new(1.0, 0.0) - hermitian(z, a)).norm_sqr();
    ((1.0 - aa) / d).powi(a.len() as i32 + 1)
}

/// Per-factor `log ‖φ_ω(η)‖`, maximized over factors.
fn green_raw(spec: &DomainSpec, eta: &[Complex64], omega: &[Complex64]) -> f64 {
    spec.factors()
        .iter()
        .map(|f| {
            let r = f.offset..f.offset + f.dim;
            block_norm(&ball_automorphism(&omega[r.clone()], &eta[r])).ln()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Pluricomplex Green function of `H` with pole at `w`.
pub fn green_function(spec: &DomainSpec, z: &CPoint, w: &CPoint) -> Result<f64> {
    let eta = spec.psi_forward(z)?;
    let omega = spec.psi_forward(w)?;
    if z.coords == w.coords {
        return Err(Error::PoleCoincidence);
    }
    Ok(green_raw(spec, &eta.coords, &omega.coords))
}

/// Tensor rule on the sublevel set `{G(·, w) < −s}`, seen in `Π`.
///
/// The set is the product of the Möbius images `φ_ω(e^{−s} B)` with
/// `ω = Ψ(w)`; each factor is the image of a scaled ball rule and its weights
/// carry the real Jacobian of `φ_ω`.
pub fn sublevel_grid(spec: &DomainSpec, w: &CPoint, s: f64, radial: usize, angular: usize) -> Result<SampleSet> {
    if !(s > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("sublevel depth s = {s} must be positive")));
    }
    let omega = spec.psi_forward(w)?;
    let r = (-s).exp();
    let rules = spec
        .factors()
        .iter()
        .map(|f| {
            let a = &omega.coords[f.offset..f.offset + f.dim];
            let scale = r.powi(2 * f.dim as i32);
            FactorRule::ball(f.dim, radial, angular).push_forward(
                |x| {
                    let xi: Vec<Complex64> = x.iter().map(|c| c * r).collect();
                    ball_automorphism(a, &xi)
                },
                |x| {
                    let xi: Vec<Complex64> = x.iter().map(|c| c * r).collect();
                    scale * automorphism_jacobian(a, &xi)
                },
            )
        })
        .collect();
    Ok(SampleSet::tensor(SampleKind::Grid, rules))
}

/// Both sides of the Herbort–Błocki inequality for `f = z^α`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HerbortBlocki {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `∫_{G(·,w) < −s} |z^α|² dv` against `e^{−2ns} |w^α|² / K(w, w)`.
///
/// Nodes of `samples` outside the sublevel set are dropped. On tensor sets the
/// filter and the integrand both split over factors.
pub fn check_herbort_blocki(
    spec: &DomainSpec,
    alpha: &MultiIndex,
    w: &CPoint,
    s: f64,
    samples: &SampleSet,
) -> Result<HerbortBlocki> {
    if !(s > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("sublevel depth s = {s} must be positive")));
    }
    if !is_admissible(spec, alpha)? {
        return Err(Error::NotAdmissible(alpha.0.clone()));
    }
    let omega = spec.psi_forward(w)?;
    let level = (-s).exp();
    let pb = pullback(spec, alpha)?;
    let k = spec.k();
    let inside = |f: &Factor, x: &[Complex64]| {
        block_norm(&ball_automorphism(&omega.coords[f.offset..f.offset + f.dim], x)) < level
    };
    let integrand = |f: &Factor, x: &[Complex64]| Complex64::new(monomial_factor(f, alpha, &pb, k, x).norm_sqr(), 0.0);

    let lhs = match samples.factors() {
        Some(rules) => {
            let kept: Vec<FactorRule> =
                spec.factors().iter().zip(rules).map(|(f, rule)| rule.filter(|x| inside(f, x))).collect();
            if kept.iter().any(FactorRule::is_empty) {
                return Err(Error::EmptySublevel);
            }
            integrate_h_separable(spec, &SampleSet::tensor(samples.kind(), kept), integrand)?.re
        }
        None => {
            let factors = spec.factors();
            let mut points = Vec::new();
            let mut weights = Vec::new();
            for i in 0..samples.len() {
                let (eta, wt) = samples.node(i);
                if factors.iter().all(|f| inside(f, &eta[f.offset..f.offset + f.dim])) {
                    points.push(CPoint::pi(eta));
                    weights.push(wt);
                }
            }
            if points.is_empty() {
                return Err(Error::EmptySublevel);
            }
            integrate_h_separable(spec, &SampleSet::scattered(samples.kind(), points, weights), integrand)?.re
        }
    };

    let wa: Complex64 = alpha.0.iter().zip(&w.coords).map(|(&e, c)| c.powi(e as i32)).product();
    let rhs = (-2.0 * spec.n() as f64 * s).exp() * wa.norm_sqr() / bergman_diag(spec, w)?;
    Ok(HerbortBlocki { lhs, rhs, ratio: lhs / rhs })
}

/// Extremes of `[K(z,z)/K(w,w)] / |det Ψ′(z)/det Ψ′(w)|²` over a sublevel set,
/// with the envelope `C_1(s)^{±D}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparability {
    pub min: f64,
    pub max: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

impl Comparability {
    pub fn within(&self) -> bool {
        self.min >= self.lower_bound && self.max <= self.upper_bound
    }
}

/// Sample `n_samples` points of `{G(·, w) < −s}` and report the ratio extremes.
pub fn check_comparability(spec: &DomainSpec, w: &CPoint, s: f64, n_samples: usize, seed: u64) -> Result<Comparability> {
    if !(s > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("sublevel depth s = {s} must be positive")));
    }
    if n_samples == 0 {
        return Err(Error::EmptySublevel);
    }
    let omega = spec.psi_forward(w)?;
    let kw = bergman_diag(spec, w)?;
    let jw = spec.jacobian_psi(w)?.norm_sqr();
    let r = (-s).exp();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors = spec.factors();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut used = 0;
    for _ in 0..n_samples {
        let mut eta = Vec::with_capacity(spec.n());
        for f in &factors {
            let xi: Vec<Complex64> = uniform_ball(&mut rng, f.dim).into_iter().map(|c| c * r).collect();
            eta.extend(ball_automorphism(&omega.coords[f.offset..f.offset + f.dim], &xi));
        }
        let eta = CPoint::pi(eta);
        if !spec.contains_pi(&eta) {
            continue;
        }
        let z = spec.psi_inverse(&eta)?;
        let Ok(kz) = bergman_diag(spec, &z) else { continue };
        let jz = spec.jacobian_psi(&z)?.norm_sqr();
        let ratio = (kz / kw) / (jz / jw);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        used += 1;
    }
    if used == 0 {
        return Err(Error::EmptySublevel);
    }
    let c1 = (1.0 + r) / (1.0 - r);
    let d = spec.kernel_degree() as i32;
    Ok(Comparability { min: lo, max: hi, lower_bound: c1.powi(-d), upper_bound: c1.powi(d) })
}
