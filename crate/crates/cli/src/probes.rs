//! `hartogs kernel` and `hartogs samples`.

use anyhow::{bail, Context, Result};
use hartogs::domain::{CPoint, DomainSpec};
use hartogs::kernel::{bergman_kernel, kernel_series};
use hartogs::sampling::{grid_pi, montecarlo_pi};
use num_complex::Complex64;
use serde_json::json;

use crate::output::{fmt_point, with_fingerprint, Outputs};

/// `"0.1,0.5"` or `"0.1+0.2i,-0.3i"`: one complex number per coordinate.
pub fn parse_point(s: &str) -> Result<CPoint> {
    let coords = s
        .split(',')
        .map(|c| c.trim().parse::<Complex64>().with_context(|| format!("bad coordinate {c:?}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(CPoint::h(coords))
}

pub fn kernel(spec: &DomainSpec, z: &str, w: Option<&str>, bound: u32, out: &mut Outputs) -> Result<bool> {
    let z = parse_point(z)?;
    let w = match w {
        Some(w) => parse_point(w)?,
        None => z.clone(),
    };
    for p in [&z, &w] {
        if p.len() != spec.n() {
            bail!("point {} has {} coordinates, the domain has {}", fmt_point(p), p.len(), spec.n());
        }
        if !spec.contains_h(p) {
            bail!("point {} lies outside the domain", fmt_point(p));
        }
    }
    let exact = bergman_kernel(spec, &z, &w)?.value;
    let series = kernel_series(spec, &z, &w, bound)?.value;
    let rel = (series - exact).norm() / exact.norm();
    out.json(
        "kernel.json",
        "kernel",
        &json!({
            "fingerprint": spec.fingerprint(),
            "z": fmt_point(&z),
            "w": fmt_point(&w),
            "closed_form": {"re": exact.re, "im": exact.im},
            "series": {"re": series.re, "im": series.im, "bound": bound},
            "rel_error": rel,
        }),
    )?;
    println!("K(z, w) = {:e} {:+e}i (series to bound {bound}: relative error {rel:.3e})", exact.re, exact.im);
    Ok(true)
}

pub fn samples(spec: &DomainSpec, kind: &str, radial: usize, angular: usize, count: usize, seed: u64, out: &mut Outputs) -> Result<bool> {
    let set = match kind {
        "grid" => grid_pi(spec, radial, angular)?,
        "montecarlo" => montecarlo_pi(spec, count, seed)?,
        other => bail!("unknown sample kind {other:?}, expected grid or montecarlo"),
    };
    let mut table = Vec::new();
    set.write_csv(&mut table)?;
    out.raw("samples.csv", with_fingerprint(&table, &spec.fingerprint())?);
    println!("{} {kind} nodes, total weight {:.12}", set.len(), set.measure_total());
    Ok(true)
}
