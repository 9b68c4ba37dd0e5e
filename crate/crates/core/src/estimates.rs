//! The two weighted integral estimates on the disk and the ball, evaluated by
//! quadrature along the positive real axis, plus exact moment oracles.
//!
//! Disk: `∫_D (1 − |w|²)^u |w|^c |1 − z w̄|^{−2a} dv(w) ≲ (1 − |z|²)^{−2a+u+2}`.
//! Ball: `∫_B (1 − ‖w‖²)^u |1 − ⟨z, w⟩|^{−(k+1)a} dv(w) ≲ (1 − ‖z‖²)^{u+(k+1)(1−a)}`.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::basis::ball_moment;
use crate::domain::Q;
use crate::error::{Error, Result};
use crate::quadrature::{graded_toward_left, jacobi_integral, ls_slope, GaussLegendre};

/// Default tolerance on the log-log trend slope of the ratio.
pub const DEFAULT_SLOPE_TOL: f64 = 0.05;

/// Probe radii used when none are given.
pub const DEFAULT_RADII: [f64; 6] = [0.5, 0.9, 0.99, 0.999, 0.9999, 0.99999];

/// Number of outermost probes entering the trend fit.
const TAIL: usize = 3;

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// `J(a, y) = (1/π) ∫_0^π (1 − 2y cos θ + y²)^{−a} dθ`, the angular mean of
/// `|1 − y e^{iθ}|^{−2a}`.
pub(crate) fn angular_mean(a: f64, y: f64) -> f64 {
    if y == 0.0 {
        return 1.0;
    }
    let finest = (0.05 * (1.0 - y)).max(1e-14);
    let panels = graded_toward_left(0.0, PI, finest);
    rule().integrate_panels(&panels, |th| {
        let h = (0.5 * th).sin();
        let d = (1.0 - y) * (1.0 - y) + 4.0 * y * h * h;
        d.powf(-a)
    }) / PI
}

fn finest_for(r: f64) -> f64 {
    (1e-2 * (1.0 - r) * (1.0 - r)).clamp(1e-14, 1e-4)
}

/// Left side of the disk estimate at `z = r`.
///
/// In polar form with `x = |w|²` this is `∫_0^1 x^{c/2} (1 − x)^u J(a, r√x) dx`.
/// Returns `+∞` when the weight is not integrable (`u ≤ −1` or `c ≤ −2`).
pub fn disk_lhs(a: f64, u: f64, c: f64, r: f64) -> f64 {
    if u <= -1.0 || c <= -2.0 {
        return f64::INFINITY;
    }
    if r == 0.0 {
        return beta(c / 2.0 + 1.0, u + 1.0);
    }
    jacobi_integral(rule(), c / 2.0, u, finest_for(r), |x| angular_mean(a, r * x.sqrt()))
}

/// Left side of the ball estimate at `z = (r, 0, …, 0)`.
///
/// Integrating out `w′ = (w_2, …, w_k)` leaves a disk integral:
/// `k! Γ(u+1)/Γ(k+u) ∫_D (1 − |w_1|²)^{u+k−1} |1 − r w̄_1|^{−(k+1)a} dv(w_1)`.
pub fn ball_lhs(k: usize, a: f64, u: f64, r: f64) -> f64 {
    if u <= -1.0 {
        return f64::INFINITY;
    }
    let kf = k as f64;
    let scale = (ln_gamma(kf + 1.0) + ln_gamma(u + 1.0) - ln_gamma(kf + u)).exp();
    scale * disk_lhs((kf + 1.0) * a / 2.0, u + kf - 1.0, 0.0, r)
}

fn beta(x: f64, y: f64) -> f64 {
    statrs::function::beta::beta(x, y)
}

/// Which estimate a report belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimateParams {
    Disk { a: f64, u: f64, c: f64 },
    Ball { k: usize, a: f64, u: f64 },
}

impl EstimateParams {
    /// Exponent of `(1 − r²)` on the right-hand side.
    pub fn rhs_exponent(&self) -> f64 {
        match *self {
            EstimateParams::Disk { a, u, .. } => -2.0 * a + u + 2.0,
            EstimateParams::Ball { k, a, u } => u + (k as f64 + 1.0) * (1.0 - a),
        }
    }

    pub fn lhs(&self, r: f64) -> f64 {
        match *self {
            EstimateParams::Disk { a, u, c } => disk_lhs(a, u, c, r),
            EstimateParams::Ball { k, a, u } => ball_lhs(k, a, u, r),
        }
    }

    fn validate(&self) -> Result<()> {
        let (a, u) = match *self {
            EstimateParams::Disk { a, u, c } => {
                if !(c > -2.0) {
                    return Err(Error::ParameterOutOfRange(format!("c = {c} must exceed -2")));
                }
                (a, u)
            }
            EstimateParams::Ball { k, a, u } => {
                if k == 0 {
                    return Err(Error::ParameterOutOfRange("ball dimension must be at least 1".into()));
                }
                (a, u)
            }
        };
        if !(a >= 1.0) {
            return Err(Error::ParameterOutOfRange(format!("a = {a} must be at least 1")));
        }
        if !(u > -1.0 && u < 0.0) {
            return Err(Error::ParameterOutOfRange(format!("u = {u} must lie in (-1, 0)")));
        }
        Ok(())
    }
}

/// LHS, RHS and their ratio along a list of probe radii.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub params: EstimateParams,
    /// Added to the RHS exponent; zero for the estimate itself.
    pub exponent_shift: f64,
    pub radii: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    /// Ratio at the probe radius closest to 0.9.
    pub reference_ratio: f64,
    /// Least-squares slope of `log ratio` against `−log(1 − r²)` over the
    /// three outermost probes.
    pub trend_slope: f64,
}

impl EstimateReport {
    /// Max ratio at most twice the reference ratio and no upward trend beyond `slope_tol`.
    pub fn bounded(&self, slope_tol: f64) -> bool {
        self.max_ratio <= 2.0 * self.reference_ratio && self.trend_slope <= slope_tol
    }

    /// One row per radius: `radius,lhs,rhs,ratio`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::result::Result<(), csv::Error> {
        let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        wtr.write_record(["radius", "lhs", "rhs", "ratio"])?;
        for i in 0..self.radii.len() {
            wtr.serialize((self.radii[i], self.lhs[i], self.rhs[i], self.ratios[i]))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn run(params: EstimateParams, radii: &[f64], shift: f64) -> Result<EstimateReport> {
    params.validate()?;
    if radii.is_empty() || radii.iter().any(|&r| !(0.0..1.0).contains(&r)) {
        return Err(Error::ParameterOutOfRange("probe radii must be a nonempty subset of [0, 1)".into()));
    }
    let e = params.rhs_exponent() + shift;
    let lhs: Vec<f64> = radii.par_iter().map(|&r| params.lhs(r)).collect();
    let rhs: Vec<f64> = radii.iter().map(|&r| (1.0 - r * r).powf(e)).collect();
    let ratios: Vec<f64> = lhs.iter().zip(&rhs).map(|(l, r)| l / r).collect();
    if ratios.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(Error::NonFiniteIntegrand);
    }
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let nearest = (0..radii.len())
        .min_by(|&i, &j| (radii[i] - 0.9).abs().total_cmp(&(radii[j] - 0.9).abs()))
        .unwrap();
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|&i, &j| radii[i].total_cmp(&radii[j]));
    let (xs, ys): (Vec<f64>, Vec<f64>) = order[order.len().saturating_sub(TAIL)..]
        .iter()
        .map(|&i| (-(1.0 - radii[i] * radii[i]).ln(), ratios[i].ln()))
        .unzip();
    Ok(EstimateReport {
        params,
        exponent_shift: shift,
        radii: radii.to_vec(),
        lhs,
        rhs,
        ratios: ratios.clone(),
        max_ratio,
        reference_ratio: ratios[nearest],
        trend_slope: ls_slope(&xs, &ys),
    })
}

/// Disk estimate at `z = r` for each probe radius.
pub fn disk_estimate(a: f64, u: f64, c: f64, radii: &[f64]) -> Result<EstimateReport> {
    run(EstimateParams::Disk { a, u, c }, radii, 0.0)
}

/// Ball estimate at `z = (r, 0, …, 0)` for each probe radius.
pub fn ball_estimate(k: usize, a: f64, u: f64, radii: &[f64]) -> Result<EstimateReport> {
    run(EstimateParams::Ball { k, a, u }, radii, 0.0)
}

/// Same as the plain estimate but with the RHS exponent raised by `shift`.
/// A positive shift makes the RHS smaller near the boundary, so a sharp
/// estimate shows an upward trend of about `shift`.
pub fn sharpness_probe(params: EstimateParams, radii: &[f64], shift: f64) -> Result<EstimateReport> {
    run(params, radii, shift)
}

/// Normalized-measure moments.
#[derive(Clone, Debug, PartialEq)]
pub enum Moment {
    /// `∫_D |w|^{2e} dv`.
    DiskRadial(Q),
    /// `∫_{B^k} |w^β|² dv`.
    BallMonomial { k: usize, beta: Vec<i64> },
}

/// Exact value of a moment.
pub fn moment_oracle(m: &Moment) -> Result<BigRational> {
    match m {
        Moment::DiskRadial(e) => {
            if *e <= Q::from_integer(-1) {
                return Err(Error::Divergent(format!("disk moment with exponent {e}")));
            }
            let v = (e + Q::from_integer(1)).recip();
            Ok(BigRational::new(BigInt::from(*v.numer()), BigInt::from(*v.denom())))
        }
        Moment::BallMonomial { k, beta } => {
            if beta.len() != *k || beta.iter().any(|&b| b < 0) {
                return Err(Error::MalformedIndex(format!("{beta:?} for a ball of dimension {k}")));
            }
            Ok(ball_moment(*k, beta))
        }
    }
}
