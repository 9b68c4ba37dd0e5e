//! Run configuration: a JSON file merged with command-line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use hartogs::domain::{DomainSpec, Q};
use hartogs::estimates::DEFAULT_SLOPE_TOL;
use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

/// Exact rational read from `"11/10"`, `"1.2"`, `"3"` or a JSON number.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rat(pub Q);

impl FromStr for Rat {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let (n, d): (i64, i64) = (num.trim().parse()?, den.trim().parse()?);
            if d == 0 {
                bail!("zero denominator in {s:?}");
            }
            return Ok(Rat(Q::new(n, d)));
        }
        let (sign, digits) = match s.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, s),
        };
        let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
        if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            bail!("not a rational number: {s:?}");
        }
        let den = 10i64.checked_pow(frac.len() as u32).context("too many decimals")?;
        let num: i64 = format!("{int}{frac}").trim_start_matches('0').parse().unwrap_or(0);
        Ok(Rat(Q::new(sign * num, den)))
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Rat;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational as a string or number")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rat, E> {
                v.parse().map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Rat, E> {
                Ok(Rat(Q::from_integer(v)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rat, E> {
                i64::try_from(v).map(|v| Rat(Q::from_integer(v))).map_err(E::custom)
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Rat, E> {
                // shortest decimal form, so 1.2 means 6/5 and not its binary neighbour
                v.to_string().parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub partition: Vec<usize>,
    pub n: usize,
    pub b: i64,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig { partition: vec![1], n: 2, b: 1 }
    }
}

impl DomainConfig {
    pub fn build(&self) -> Result<DomainSpec> {
        Ok(DomainSpec::new(&self.partition, self.n, self.b)?)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub basis_bound: u32,
    pub radial: usize,
    pub angular: usize,
    pub points: usize,
    pub series_bound: u32,
    pub triples: usize,
    pub comparability_samples: usize,
    pub radii: Vec<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            basis_bound: 3,
            radial: 16,
            angular: 32,
            points: 20,
            series_bound: 60,
            triples: 50,
            comparability_samples: 500,
            radii: hartogs::estimates::DEFAULT_RADII.to_vec(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub ps: Vec<Rat>,
    pub qs: Vec<Rat>,
    pub ts: Vec<Rat>,
    pub families: Vec<String>,
    pub agreement: f64,
    pub levels: usize,
    pub shells: usize,
    pub random_polys: usize,
}

impl Default for ScanSection {
    fn default() -> Self {
        let d = hartogs::toeplitz::ScanConfig::default();
        let wrap = |v: Vec<Q>| v.into_iter().map(Rat).collect();
        ScanSection {
            ps: wrap(d.ps),
            qs: wrap(d.qs),
            ts: wrap(d.ts),
            families: d.families.iter().map(|f| f.label().to_string()).collect(),
            agreement: 0.9,
            levels: d.levels,
            shells: d.shells,
            random_polys: d.random_polys,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WitnessSection {
    pub regime: String,
    pub p: Rat,
    pub q: Rat,
    pub t: Rat,
    pub bound: u32,
    pub j_max: usize,
    pub radial: usize,
    pub angular: usize,
}

impl Default for WitnessSection {
    fn default() -> Self {
        WitnessSection {
            regime: "1".into(),
            p: Rat(Q::new(6, 5)),
            q: Rat(Q::from_integer(4)),
            t: Rat(Q::from_integer(0)),
            bound: 3,
            j_max: 8,
            radial: 24,
            angular: 48,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub verify: VerifyConfig,
    pub phase_scan: ScanSection,
    pub witness: WitnessSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: DomainConfig::default(),
            seed: 7,
            tolerances: BTreeMap::new(),
            verify: VerifyConfig::default(),
            phase_scan: ScanSection::default(),
            witness: WitnessSection::default(),
        }
    }
}

/// Default tolerance per suite.
pub const TOLERANCES: &[(&str, f64)] = &[
    ("orthogonality", 1e-8),
    ("norms", 1e-6),
    ("diagonal", 1e-10),
    ("series", 1e-6),
    ("herbort_blocki", 1e-3),
    ("comparability", 1e-12),
    ("estimates", DEFAULT_SLOPE_TOL),
    ("phase", DEFAULT_SLOPE_TOL),
    ("witness", 1e-8),
];

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
            }
            None => Ok(RunConfig::default()),
        }
    }

    /// Apply `suite=value` overrides and check every tolerance is a known,
    /// positive, finite number.
    pub fn apply_tolerances(&mut self, overrides: &[String]) -> Result<()> {
        for o in overrides {
            let (k, v) = o.split_once('=').with_context(|| format!("tolerance override {o:?} is not suite=value"))?;
            let v: f64 = v.trim().parse().with_context(|| format!("tolerance {o:?}"))?;
            self.tolerances.insert(k.trim().to_string(), v);
        }
        for (k, v) in &self.tolerances {
            if !TOLERANCES.iter().any(|(name, _)| name == k) {
                bail!("unknown tolerance suite {k:?}");
            }
            if !(v.is_finite() && *v > 0.0) {
                bail!("tolerance {k} = {v} must be positive");
            }
        }
        Ok(())
    }

    pub fn tolerance(&self, suite: &str) -> f64 {
        self.tolerances
            .get(suite)
            .copied()
            .or_else(|| TOLERANCES.iter().find(|(k, _)| *k == suite).map(|(_, v)| *v))
            .expect("known suite")
    }
}
