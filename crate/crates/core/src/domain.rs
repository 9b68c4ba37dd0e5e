//! Geometry of the generalized Hartogs triangle
//! `H = { max_j ‖z̃_j‖ < |z_{k+1}|^b < … < |z_n|^b < 1 }`
//! and of the product domain `Π = B^{k_1} × … × B^{k_l} × D* × … × D*`.
//!
//! Coordinates are ordered `(z̃_1, …, z̃_l, z_{k+1}, …, z_n)`: the ball blocks
//! first, then the `n − k` scalar coordinates.

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational used for every threshold.
pub type Q = Ratio<i64>;

/// Nearest `f64` to a rational.
pub fn q_to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// The data `(n, k_1..k_l, b)` that fixes a domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct DomainSpec {
    n: usize,
    partition: Vec<usize>,
    b: u32,
    k: usize,
    c: i64,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    partition: Vec<usize>,
    n: usize,
    b: i64,
}

impl TryFrom<RawSpec> for DomainSpec {
    type Error = Error;
    fn try_from(raw: RawSpec) -> Result<Self> {
        DomainSpec::new(&raw.partition, raw.n, raw.b)
    }
}

impl From<DomainSpec> for RawSpec {
    fn from(spec: DomainSpec) -> Self {
        RawSpec { partition: spec.partition, n: spec.n, b: spec.b as i64 }
    }
}

/// Which kind of factor of `Π` a block of coordinates belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorKind {
    Ball,
    Disk,
}

/// One factor of the product domain.
///
/// `d` is the power of this coordinate in `det G′`; it is zero for ball blocks
/// and `j − 1 + C` for the disk coordinate `η_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Factor {
    pub kind: FactorKind,
    pub offset: usize,
    pub dim: usize,
    pub d: i64,
}

impl Factor {
    /// Power of `(1 − ⟨η, ζ⟩)^{-1}` in the factor kernel.
    pub fn kernel_exponent(&self) -> i64 {
        match self.kind {
            FactorKind::Ball => self.dim as i64 + 1,
            FactorKind::Disk => 2,
        }
    }
}

impl DomainSpec {
    /// Build a spec, rejecting `Σ k_j ≥ n`, empty or zero blocks and `b < 1`.
    pub fn new(partition: &[usize], n: usize, b: i64) -> Result<Self> {
        if b < 1 {
            return Err(Error::InvalidExponent(b));
        }
        if partition.is_empty() || partition.contains(&0) {
            return Err(Error::InvalidPartition(format!(
                "blocks must be positive, got {partition:?}"
            )));
        }
        let k: usize = partition.iter().sum();
        if k >= n {
            return Err(Error::InvalidPartition(format!(
                "sum of blocks {k} must be smaller than n = {n}"
            )));
        }
        let b = u32::try_from(b).map_err(|_| Error::InvalidExponent(b))?;
        Ok(DomainSpec { n, partition: partition.to_vec(), b, k, c: k as i64 * (b as i64 - 1) })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn partition(&self) -> &[usize] {
        &self.partition
    }
    pub fn b(&self) -> u32 {
        self.b
    }
    pub fn k(&self) -> usize {
        self.k
    }
    /// `C = k(b − 1)`.
    pub fn c(&self) -> i64 {
        self.c
    }

    /// Short fingerprint such as `n=2;k=1;b=1`, used to tag report rows.
    pub fn fingerprint(&self) -> String {
        let parts: Vec<String> = self.partition.iter().map(|k| k.to_string()).collect();
        format!("n={};k={};b={}", self.n, parts.join("+"), self.b)
    }

    /// Same partition and dimension with a different exponent.
    pub fn with_b(&self, b: i64) -> Result<Self> {
        DomainSpec::new(&self.partition, self.n, b)
    }

    /// Factors of `Π` in coordinate order.
    pub fn factors(&self) -> Vec<Factor> {
        let mut out = Vec::with_capacity(self.partition.len() + self.n - self.k);
        let mut offset = 0;
        for &kj in &self.partition {
            out.push(Factor { kind: FactorKind::Ball, offset, dim: kj, d: 0 });
            offset += kj;
        }
        for j in self.k..self.n {
            out.push(Factor { kind: FactorKind::Disk, offset: j, dim: 1, d: self.disk_d(j) });
        }
        out
    }

    /// Exponent `j − 1 + C` of `η_j` in `det G′` (`j` zero-based, `j ≥ k`).
    pub fn disk_d(&self, j: usize) -> i64 {
        debug_assert!(j >= self.k && j < self.n);
        j as i64 + self.c
    }

    /// Exponent of the outermost coordinate, `n − 1 + C`.
    pub fn d_n(&self) -> i64 {
        self.disk_d(self.n - 1)
    }

    /// Sum of the kernel exponents over all factors, `Σ (k_j + 1) + 2(n − k)`.
    pub fn kernel_degree(&self) -> i64 {
        self.factors().iter().map(Factor::kernel_exponent).sum()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::ParameterOutOfRange(format!(
                "point has {len} coordinates, expected {}",
                self.n
            )));
        }
        Ok(())
    }

    // ---- thresholds -------------------------------------------------------

    /// Upper regime-1 threshold `(2n + 2C)/(n − 1 + C)`.
    pub fn q1(&self) -> Q {
        let n = self.n as i64;
        Q::new(2 * n + 2 * self.c, n - 1 + self.c)
    }

    /// Regime-2/3 boundary `2(n − 1 + C)/(n + 1 + C − 2/p)`.
    pub fn q23(&self, p: Q) -> Q {
        let n = self.n as i64;
        Q::from_integer(2 * (n - 1 + self.c)) / (Q::from_integer(n + 1 + self.c) - Q::from_integer(2) / p)
    }

    /// Regime-3 threshold `1/(2p) + ((1 − p)/(2p))·(n + 1 + C)/(n − 1 + C)`.
    pub fn t3(&self, p: Q) -> Q {
        let n = self.n as i64;
        let one = Q::from_integer(1);
        let two_p = p * 2;
        one / two_p + (one - p) / two_p * Q::new(n + 1 + self.c, n - 1 + self.c)
    }

    /// Open interval of `p` for which `P` is bounded on `L^p`:
    /// `((2n + 2C)/(n + 1 + C), (2n + 2C)/(n − 1 + C))`.
    pub fn diagonal_interval(&self) -> (Q, Q) {
        let n = self.n as i64;
        (Q::new(2 * n + 2 * self.c, n + 1 + self.c), self.q1())
    }

    // ---- membership ---------------------------------------------------------

    /// Strict membership in `H`; boundary points are outside.
    pub fn contains_h(&self, z: &CPoint) -> bool {
        if z.coords.len() != self.n || z.frame != Frame::H {
            return false;
        }
        let b = self.b as i32;
        let lead = z.coords[self.k].norm().powi(b);
        let mut offset = 0;
        for &kj in &self.partition {
            if block_norm(&z.coords[offset..offset + kj]) >= lead {
                return false;
            }
            offset += kj;
        }
        for j in self.k..self.n - 1 {
            if z.coords[j].norm() >= z.coords[j + 1].norm() {
                return false;
            }
        }
        let last = z.coords[self.n - 1].norm();
        last < 1.0 && lead > 0.0 && lead.is_finite()
    }

    /// Membership in `Π`: unit balls and punctured unit disks.
    pub fn contains_pi(&self, eta: &CPoint) -> bool {
        if eta.coords.len() != self.n || eta.frame != Frame::Pi {
            return false;
        }
        self.factors().iter().all(|f| {
            let block = &eta.coords[f.offset..f.offset + f.dim];
            match f.kind {
                FactorKind::Ball => block_norm(block) < 1.0,
                FactorKind::Disk => {
                    let r = block[0].norm();
                    r > 0.0 && r < 1.0
                }
            }
        })
    }

    // ---- coordinate maps ----------------------------------------------------

    /// `Ψ(z) = (z̃_j / z_{k+1}^b, z_m / z_{m+1}, z_n)`.
    pub fn psi_forward(&self, z: &CPoint) -> Result<CPoint> {
        self.check_len(z.coords.len())?;
        if !self.contains_h(z) {
            return Err(Error::DomainViolation("the Hartogs domain"));
        }
        Ok(CPoint::pi(self.psi_raw(&z.coords)))
    }

    /// `G = Ψ^{-1}`: `z_m = η_m ⋯ η_n` and `z̃_j = η̃_j (η_{k+1} ⋯ η_n)^b`.
    pub fn psi_inverse(&self, eta: &CPoint) -> Result<CPoint> {
        self.check_len(eta.coords.len())?;
        if !self.contains_pi(eta) {
            return Err(Error::DomainViolation("the product domain"));
        }
        Ok(CPoint::h(self.g_raw(&eta.coords)))
    }

    /// `det G′(η) = ∏_{j>k} η_j^{j−1+C}`.
    pub fn jacobian_g(&self, eta: &CPoint) -> Result<Complex64> {
        self.check_len(eta.coords.len())?;
        if !self.contains_pi(eta) {
            return Err(Error::DomainViolation("the product domain"));
        }
        Ok(self.jacobian_raw(&eta.coords))
    }

    /// `det Ψ′(z) = 1 / det G′(Ψ(z))`.
    pub fn jacobian_psi(&self, z: &CPoint) -> Result<Complex64> {
        let eta = self.psi_forward(z)?;
        Ok(self.jacobian_raw(&eta.coords).inv())
    }

    /// `Θ(z) = (z̃_j z_{k+1}^{1−b}, z_{k+1}, …, z_n)`, landing in the `b = 1` domain.
    pub fn theta_map(&self, z: &CPoint) -> Result<CPoint> {
        if !self.contains_h(z) {
            return Err(Error::DomainViolation("the Hartogs domain"));
        }
        let scale = z.coords[self.k].powi(1 - self.b as i32);
        let mut out = z.coords.clone();
        for c in &mut out[..self.k] {
            *c *= scale;
        }
        Ok(CPoint::h(out))
    }

    pub(crate) fn psi_raw(&self, z: &[Complex64]) -> Vec<Complex64> {
        let lead = z[self.k].powi(self.b as i32);
        let mut out = Vec::with_capacity(self.n);
        out.extend(z[..self.k].iter().map(|c| c / lead));
        for j in self.k..self.n - 1 {
            out.push(z[j] / z[j + 1]);
        }
        out.push(z[self.n - 1]);
        out
    }

    pub(crate) fn g_raw(&self, eta: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        let mut acc = Complex64::new(1.0, 0.0);
        for j in (self.k..self.n).rev() {
            acc *= eta[j];
            out[j] = acc;
        }
        let lead = acc.powi(self.b as i32);
        for j in 0..self.k {
            out[j] = eta[j] * lead;
        }
        out
    }

    pub(crate) fn jacobian_raw(&self, eta: &[Complex64]) -> Complex64 {
        (self.k..self.n).fold(Complex64::new(1.0, 0.0), |acc, j| acc * eta[j].powi(self.disk_d(j) as i32))
    }

    /// `ρ(G(η)) = ∏ (1 − ‖η̃_j‖²) ∏ (1 − |η_j|²)`.
    pub(crate) fn rho_raw(&self, eta: &[Complex64]) -> f64 {
        self.factors()
            .iter()
            .map(|f| 1.0 - block_norm_sqr(&eta[f.offset..f.offset + f.dim]))
            .product()
    }
}

/// Which coordinate system a point is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Frame {
    H,
    Pi,
}

/// A point of `C^n` tagged with its frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CPoint {
    pub coords: Vec<Complex64>,
    pub frame: Frame,
}

impl CPoint {
    pub fn h(coords: Vec<Complex64>) -> Self {
        CPoint { coords, frame: Frame::H }
    }
    pub fn pi(coords: Vec<Complex64>) -> Self {
        CPoint { coords, frame: Frame::Pi }
    }
    /// Frame-`H` point with real coordinates.
    pub fn h_real(xs: &[f64]) -> Self {
        CPoint::h(xs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }
    /// Frame-`Π` point with real coordinates.
    pub fn pi_real(xs: &[f64]) -> Self {
        CPoint::pi(xs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }
    pub fn len(&self) -> usize {
        self.coords.len()
    }
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

pub(crate) fn block_norm_sqr(block: &[Complex64]) -> f64 {
    block.iter().map(|c| c.norm_sqr()).sum()
}

pub(crate) fn block_norm(block: &[Complex64]) -> f64 {
    block_norm_sqr(block).sqrt()
}

/// Hermitian product `⟨a, b⟩ = Σ a_i conj(b_i)`.
pub(crate) fn hermitian(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(part: &[usize], n: usize, b: i64) -> DomainSpec {
        DomainSpec::new(part, n, b).unwrap()
    }

    fn close(a: &CPoint, b: &[f64]) -> bool {
        a.coords.iter().zip(b).all(|(x, y)| (x - Complex64::new(*y, 0.0)).norm() < 1e-14)
    }

    #[test]
    fn make_domain_examples() {
        let s = spec(&[1], 2, 1);
        assert_eq!((s.k(), s.c()), (1, 0));
        assert_eq!(spec(&[1], 2, 2).c(), 1);
        let s = spec(&[2, 1], 5, 3);
        assert_eq!((s.k(), s.c()), (3, 6));
        assert!(matches!(DomainSpec::new(&[2], 2, 1), Err(Error::InvalidPartition(_))));
        assert!(matches!(DomainSpec::new(&[1, 0], 3, 1), Err(Error::InvalidPartition(_))));
        assert!(matches!(DomainSpec::new(&[1], 2, 0), Err(Error::InvalidExponent(0))));
    }

    #[test]
    fn membership_examples() {
        assert!(spec(&[1], 2, 1).contains_h(&CPoint::h_real(&[0.25, 0.5])));
        assert!(!spec(&[1], 2, 2).contains_h(&CPoint::h_real(&[0.25, 0.5])));
        assert!(spec(&[1], 2, 2).contains_h(&CPoint::h_real(&[0.2, 0.5])));

        let s = spec(&[1], 2, 1);
        assert!(s.contains_pi(&CPoint::pi_real(&[0.5, 0.5])));
        assert!(!s.contains_pi(&CPoint::pi_real(&[0.5, 0.0])));
        let s = spec(&[2, 1], 4, 1);
        assert!(s.contains_pi(&CPoint::pi_real(&[0.6, 0.7, 0.5, 0.5])));
        assert!(!s.contains_pi(&CPoint::pi_real(&[0.8, 0.7, 0.5, 0.5])));
    }

    #[test]
    fn map_examples() {
        let s = spec(&[1], 2, 1);
        assert!(close(&s.psi_forward(&CPoint::h_real(&[0.25, 0.5])).unwrap(), &[0.5, 0.5]));
        assert!(close(&s.psi_inverse(&CPoint::pi_real(&[0.5, 0.5])).unwrap(), &[0.25, 0.5]));
        let s = spec(&[1], 2, 2);
        assert!(close(&s.psi_forward(&CPoint::h_real(&[0.2, 0.5])).unwrap(), &[0.8, 0.5]));
        assert!(close(&s.psi_inverse(&CPoint::pi_real(&[0.8, 0.5])).unwrap(), &[0.2, 0.5]));
        let s = spec(&[1], 3, 1);
        assert!(close(&s.psi_forward(&CPoint::h_real(&[0.1, 0.4, 0.8])).unwrap(), &[0.25, 0.5, 0.8]));
        assert!(close(&s.psi_inverse(&CPoint::pi_real(&[0.25, 0.5, 0.8])).unwrap(), &[0.1, 0.4, 0.8]));
        assert!(matches!(
            s.psi_forward(&CPoint::h_real(&[0.5, 0.4, 0.8])),
            Err(Error::DomainViolation(_))
        ));
    }

    #[test]
    fn jacobian_examples() {
        let j = spec(&[1], 2, 1).jacobian_g(&CPoint::pi_real(&[0.5, 0.5])).unwrap();
        assert!((j - 0.5).norm() < 1e-15);
        let j = spec(&[1], 2, 2).jacobian_g(&CPoint::pi_real(&[0.8, 0.5])).unwrap();
        assert!((j - 0.25).norm() < 1e-15);
        let s = spec(&[2, 1], 6, 3);
        let ones = vec![Complex64::new(1.0, 0.0); 6];
        assert_eq!(s.jacobian_raw(&ones), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn theta_examples() {
        let z = CPoint::h_real(&[0.1, 0.3]);
        assert_eq!(spec(&[1], 2, 1).theta_map(&z).unwrap(), z);
        let s = spec(&[1], 2, 2);
        let t = s.theta_map(&CPoint::h_real(&[0.2, 0.5])).unwrap();
        assert!(close(&t, &[0.4, 0.5]));
        assert!(s.with_b(1).unwrap().contains_h(&t));
        let t = spec(&[1], 2, 3).theta_map(&CPoint::h_real(&[0.1, 0.5])).unwrap();
        assert!(close(&t, &[0.4, 0.5]));
    }

    #[test]
    fn thresholds() {
        assert_eq!(spec(&[1], 2, 1).diagonal_interval(), (Q::new(4, 3), Q::new(4, 1)));
        assert_eq!(spec(&[1], 2, 2).diagonal_interval(), (Q::new(3, 2), Q::new(3, 1)));
        let s = spec(&[1], 2, 1);
        assert_eq!(s.q23(Q::new(6, 5)), Q::new(3, 2));
        assert_eq!(s.t3(Q::new(6, 5)), Q::new(1, 6));
        assert_eq!(s.q23(Q::from_integer(2)), Q::from_integer(1));
    }

    #[test]
    fn serde_round_trip() {
        let s = spec(&[2, 1], 5, 3);
        let raw = RawSpec::from(s.clone());
        assert_eq!(DomainSpec::try_from(raw).unwrap(), s);
        assert!(DomainSpec::try_from(RawSpec { partition: vec![3], n: 3, b: 1 }).is_err());
    }
}
