//! Weighted point sets on `Π` and integration over `H` by pullback through `G`.
//!
//! Every factor carries its normalized volume measure, so a rule on `Π` has
//! total weight one and `∫_H f dv = ∫_Π f(G(η)) |det G′(η)|² dv(η)`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};
use rayon::prelude::*;

use crate::domain::{CPoint, DomainSpec, Factor, FactorKind};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Largest tensor grid `grid_pi` will build unless told otherwise.
pub const DEFAULT_NODE_CAP: usize = 1 << 26;

const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleKind {
    Grid,
    MonteCarlo,
}

/// Quadrature rule on one factor (a ball `B^k` or the punctured disk).
#[derive(Clone, Debug, PartialEq)]
pub struct FactorRule {
    dim: usize,
    coords: Vec<Complex64>,
    weights: Vec<f64>,
}

impl FactorRule {
    pub fn new(dim: usize, coords: Vec<Complex64>, weights: Vec<f64>) -> Self {
        assert_eq!(coords.len(), dim * weights.len());
        FactorRule { dim, coords, weights }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn len(&self) -> usize {
        self.weights.len()
    }
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
    pub fn point(&self, i: usize) -> &[Complex64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }
    pub fn iter(&self) -> impl Iterator<Item = (&[Complex64], f64)> {
        self.coords.chunks(self.dim).zip(self.weights.iter().copied())
    }
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ w_i f(x_i)` over the rule.
    pub fn sum<F: Fn(&[Complex64]) -> Complex64>(&self, f: F) -> Complex64 {
        self.iter().map(|(x, w)| f(x) * w).sum()
    }

    /// Keep only the nodes satisfying `keep`.
    pub fn filter<F: Fn(&[Complex64]) -> bool>(&self, keep: F) -> FactorRule {
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        for (x, w) in self.iter() {
            if keep(x) {
                coords.extend_from_slice(x);
                weights.push(w);
            }
        }
        FactorRule { dim: self.dim, coords, weights }
    }

    /// Map every node through `f`, multiplying its weight by `jac` at the old node.
    pub fn push_forward<F, J>(&self, f: F, jac: J) -> FactorRule
    where
        F: Fn(&[Complex64]) -> Vec<Complex64>,
        J: Fn(&[Complex64]) -> f64,
    {
        let mut coords = Vec::with_capacity(self.coords.len());
        let mut weights = Vec::with_capacity(self.len());
        for (x, w) in self.iter() {
            coords.extend(f(x));
            weights.push(w * jac(x));
        }
        FactorRule { dim: self.dim, coords, weights }
    }

    /// Normalized polar rule on the unit disk: Gauss–Legendre in `r` against
    /// `2r dr` times `angular` equispaced angles.
    pub fn disk(radial: usize, angular: usize) -> Self {
        let gl = GaussLegendre::new(radial);
        let mut coords = Vec::with_capacity(radial * angular);
        let mut weights = Vec::with_capacity(radial * angular);
        for (r, w) in gl.on(0.0, 1.0) {
            for j in 0..angular {
                let theta = 2.0 * PI * j as f64 / angular as f64;
                coords.push(Complex64::from_polar(r, theta));
                weights.push(2.0 * r * w / angular as f64);
            }
        }
        FactorRule { dim: 1, coords, weights }
    }

    /// Normalized rule on `B^k`.
    ///
    /// Writing `w_i = √x_i e^{iθ_i}`, the normalized measure is `k! dx` on the
    /// solid simplex times uniform angles. The simplex is collapsed to the unit
    /// cube (`x_i = u_i ∏_{j<i} (1 − u_j)`) and each axis gets `radial`
    /// Gauss–Legendre nodes. For `k = 1` this is the disk rule.
    pub fn ball(k: usize, radial: usize, angular: usize) -> Self {
        if k == 1 {
            return FactorRule::disk(radial, angular);
        }
        let gl = GaussLegendre::new(radial);
        let axis: Vec<(f64, f64)> = gl.on(0.0, 1.0).collect();
        let kfact: f64 = (1..=k).map(|i| i as f64).product();
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        let mut simplex = vec![0usize; k];
        loop {
            let mut x = vec![0.0; k];
            let mut rest = 1.0;
            let mut w = kfact;
            for i in 0..k {
                let (u, wu) = axis[simplex[i]];
                x[i] = rest * u;
                w *= wu * rest;
                rest *= 1.0 - u;
            }
            let mut angles = vec![0usize; k];
            loop {
                for i in 0..k {
                    let theta = 2.0 * PI * angles[i] as f64 / angular as f64;
                    coords.push(Complex64::from_polar(x[i].sqrt(), theta));
                }
                weights.push(w / (angular as f64).powi(k as i32));
                if !advance(&mut angles, angular) {
                    break;
                }
            }
            if !advance(&mut simplex, radial) {
                break;
            }
        }
        FactorRule { dim: k, coords, weights }
    }
}

/// Odometer increment; false once every digit wrapped.
fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

#[derive(Clone, Debug, PartialEq)]
enum Layout {
    Tensor(Vec<FactorRule>),
    Scattered { n: usize, coords: Vec<Complex64>, weights: Vec<f64> },
}

/// A weighted point cloud on `Π`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    kind: SampleKind,
    layout: Layout,
}

impl SampleSet {
    /// Tensor product of per-factor rules, in factor order.
    pub fn tensor(kind: SampleKind, factors: Vec<FactorRule>) -> Self {
        SampleSet { kind, layout: Layout::Tensor(factors) }
    }

    /// Explicit points (each of length `n`) with weights.
    pub fn scattered(kind: SampleKind, points: Vec<CPoint>, weights: Vec<f64>) -> Self {
        let n = points.first().map_or(0, CPoint::len);
        let coords = points.into_iter().flat_map(|p| p.coords).collect();
        SampleSet { kind, layout: Layout::Scattered { n, coords, weights } }
    }

    pub fn kind(&self) -> SampleKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        match &self.layout {
            Layout::Tensor(f) => f.iter().map(FactorRule::len).product(),
            Layout::Scattered { weights, .. } => weights.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-factor rules when the set is a tensor product.
    pub fn factors(&self) -> Option<&[FactorRule]> {
        match &self.layout {
            Layout::Tensor(f) => Some(f),
            Layout::Scattered { .. } => None,
        }
    }

    /// Sum of all weights.
    pub fn measure_total(&self) -> f64 {
        match &self.layout {
            Layout::Tensor(f) => f.iter().map(FactorRule::total_weight).product(),
            Layout::Scattered { weights, .. } => weights.iter().sum(),
        }
    }

    /// Coordinates and weight of the `i`-th node (last factor varies fastest).
    pub fn node(&self, mut i: usize) -> (Vec<Complex64>, f64) {
        match &self.layout {
            Layout::Tensor(factors) => {
                let dim: usize = factors.iter().map(FactorRule::dim).sum();
                let mut coords = vec![Complex64::new(0.0, 0.0); dim];
                let mut w = 1.0;
                let mut end = dim;
                for f in factors.iter().rev() {
                    let j = i % f.len();
                    i /= f.len();
                    coords[end - f.dim..end].copy_from_slice(f.point(j));
                    end -= f.dim;
                    w *= f.weight(j);
                }
                (coords, w)
            }
            Layout::Scattered { n, coords, weights } => (coords[i * n..(i + 1) * n].to_vec(), weights[i]),
        }
    }

    pub fn point(&self, i: usize) -> CPoint {
        CPoint::pi(self.node(i).0)
    }

    /// Export one row per node: `re_1,im_1,…,re_n,im_n,weight`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::result::Result<(), csv::Error> {
        let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let n = if self.is_empty() { 0 } else { self.node(0).0.len() };
        let mut header: Vec<String> = (1..=n).flat_map(|i| [format!("re_{i}"), format!("im_{i}")]).collect();
        header.push("weight".into());
        wtr.write_record(&header)?;
        for i in 0..self.len() {
            let (c, w) = self.node(i);
            let mut row: Vec<String> = c.iter().flat_map(|z| [format!("{:e}", z.re), format!("{:e}", z.im)]).collect();
            row.push(format!("{w:e}"));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Tensor grid on `Π` with the default node cap.
pub fn grid_pi(spec: &DomainSpec, radial: usize, angular: usize) -> Result<SampleSet> {
    grid_pi_capped(spec, radial, angular, DEFAULT_NODE_CAP)
}

/// Tensor grid on `Π`, failing with `ResourceLimit` above `cap` nodes.
pub fn grid_pi_capped(spec: &DomainSpec, radial: usize, angular: usize, cap: usize) -> Result<SampleSet> {
    if radial < 2 || angular < 4 {
        return Err(Error::ParameterOutOfRange(format!(
            "grid needs radial >= 2 and angular >= 4, got {radial} and {angular}"
        )));
    }
    let mut requested: usize = 1;
    for f in spec.factors() {
        let per = (radial * angular).checked_pow(f.dim as u32).unwrap_or(usize::MAX);
        requested = requested.saturating_mul(per);
    }
    if requested > cap {
        return Err(Error::ResourceLimit { requested, cap });
    }
    let rules = spec
        .factors()
        .iter()
        .map(|f| match f.kind {
            FactorKind::Ball => FactorRule::ball(f.dim, radial, angular),
            FactorKind::Disk => FactorRule::disk(radial, angular),
        })
        .collect();
    Ok(SampleSet::tensor(SampleKind::Grid, rules))
}

/// Uniform random point of the normalized ball `B^k`.
pub(crate) fn uniform_ball<R: Rng>(rng: &mut R, k: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..k)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = crate::domain::block_norm(&v);
    let u: f64 = rng.sample(Open01);
    let radius = u.powf(1.0 / (2 * k) as f64);
    for c in &mut v {
        *c *= radius / norm;
    }
    v
}

/// `n_samples` i.i.d. uniform points of `Π`, weight `1/n_samples` each.
pub fn montecarlo_pi(spec: &DomainSpec, n_samples: usize, seed: u64) -> Result<SampleSet> {
    if n_samples == 0 {
        return Err(Error::ParameterOutOfRange("n_samples must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors = spec.factors();
    let n = spec.n();
    let mut coords = Vec::with_capacity(n * n_samples);
    for _ in 0..n_samples {
        for f in &factors {
            match f.kind {
                FactorKind::Disk => {
                    let u: f64 = rng.sample(Open01);
                    let theta = 2.0 * PI * rng.gen::<f64>();
                    coords.push(Complex64::from_polar(u.sqrt(), theta));
                }
                FactorKind::Ball => coords.extend(uniform_ball(&mut rng, f.dim)),
            }
        }
    }
    let weights = vec![1.0 / n_samples as f64; n_samples];
    Ok(SampleSet { kind: SampleKind::MonteCarlo, layout: Layout::Scattered { n, coords, weights } })
}

/// Chunked parallel sum whose result does not depend on the thread count.
pub(crate) fn ordered_sum<F>(len: usize, term: F) -> Result<Complex64>
where
    F: Fn(usize) -> Result<Complex64> + Sync,
{
    let chunks: Vec<Result<Complex64>> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in c * CHUNK..((c + 1) * CHUNK).min(len) {
                acc += term(i)?;
            }
            Ok(acc)
        })
        .collect();
    chunks.into_iter().sum()
}

fn finite(v: Complex64) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteIntegrand)
    }
}

/// `Σ w_i f(η_i)` over `Π`.
pub fn integrate_pi<F>(samples: &SampleSet, f: F) -> Result<Complex64>
where
    F: Fn(&CPoint) -> Complex64 + Sync,
{
    ordered_sum(samples.len(), |i| {
        let (c, w) = samples.node(i);
        finite(f(&CPoint::pi(c)) * w)
    })
}

/// `∫_H f dv ≈ Σ w_i f(G(η_i)) |det G′(η_i)|²`.
pub fn integrate_h<F>(spec: &DomainSpec, f: F, samples: &SampleSet) -> Result<Complex64>
where
    F: Fn(&CPoint) -> Complex64 + Sync,
{
    ordered_sum(samples.len(), |i| {
        let (eta, w) = samples.node(i);
        let jac = spec.jacobian_raw(&eta).norm_sqr();
        let z = CPoint::h(spec.g_raw(&eta));
        finite(f(&z) * (w * jac))
    })
}

/// `∫_H f dv` for an integrand whose pullback splits as `f(G(η)) = ∏ f_j(η_j)`.
///
/// `factor(j, block)` returns the `j`-th factor; the Jacobian weight
/// `|η_j|^{2d_j}` of each disk factor is applied here. On a tensor grid this
/// costs the sum of the factor sizes instead of their product.
pub fn integrate_h_separable<F>(spec: &DomainSpec, samples: &SampleSet, factor: F) -> Result<Complex64>
where
    F: Fn(&Factor, &[Complex64]) -> Complex64 + Sync,
{
    let factors = spec.factors();
    let weighted = |f: &Factor, x: &[Complex64]| -> Complex64 {
        let v = factor(f, x);
        match f.kind {
            FactorKind::Disk => v * x[0].norm().powi(2 * f.d as i32),
            FactorKind::Ball => v,
        }
    };
    match samples.factors() {
        Some(rules) if rules.len() == factors.len() => {
            let mut total = Complex64::new(1.0, 0.0);
            for (f, rule) in factors.iter().zip(rules) {
                total *= finite(rule.sum(|x| weighted(f, x)))?;
            }
            Ok(total)
        }
        _ => ordered_sum(samples.len(), |i| {
            let (eta, w) = samples.node(i);
            let v: Complex64 = factors.iter().map(|f| weighted(f, &eta[f.offset..f.offset + f.dim])).product();
            finite(v * w)
        }),
    }
}
