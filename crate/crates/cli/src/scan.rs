//! `hartogs phase-scan`: the phase table, a JSON summary and a pivot with the
//! exact regime boundaries.

use anyhow::{bail, Result};
use hartogs::domain::{DomainSpec, Q};
use hartogs::toeplitz::{agreement_fraction, phase_scan, write_phase_csv, PhaseRecord, ProbeFamily, Regime, ScanConfig};
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{fmt_f, Outputs};

pub fn scan_config(cfg: &RunConfig) -> Result<ScanConfig> {
    let s = &cfg.phase_scan;
    let mut families = Vec::new();
    for name in &s.families {
        match ProbeFamily::ALL.iter().find(|f| f.label() == name) {
            Some(f) => families.push(*f),
            None => bail!("unknown probe family {name:?}"),
        }
    }
    if families.is_empty() {
        bail!("no probe family selected");
    }
    if !(0.0..=1.0).contains(&s.agreement) {
        bail!("agreement threshold {} is outside [0, 1]", s.agreement);
    }
    if s.levels < 3 || s.shells < 3 {
        bail!("levels and shells need at least 3 points for a tail slope");
    }
    Ok(ScanConfig {
        ps: s.ps.iter().map(|r| r.0).collect(),
        qs: s.qs.iter().map(|r| r.0).collect(),
        ts: s.ts.iter().map(|r| r.0).collect(),
        families,
        slope_tol: cfg.tolerance("phase"),
        levels: s.levels,
        shells: s.shells,
        random_polys: s.random_polys,
        seed: cfg.seed,
    })
}

fn record_json(r: &PhaseRecord) -> serde_json::Value {
    let th = r.verdict.thresholds.map(|t| {
        json!({"q1": t.q1.to_string(), "q23": t.q23.to_string(), "t2": t.t2.to_string(), "t3": t.t3.to_string()})
    });
    json!({
        "p": r.p.to_string(),
        "q": r.q.to_string(),
        "t": r.t.to_string(),
        "regime": r.verdict.regime.label(),
        "predicted_bounded": r.verdict.bounded,
        "boundary_case": r.verdict.boundary_case,
        "thresholds": th,
        "slope": r.slope,
        "empirically_bounded": r.empirically_bounded,
        "agree": r.agree,
        "families": r.families.iter().map(|f| json!({"family": f.family.label(), "slope": f.slope})).collect::<Vec<_>>(),
        "error": r.error,
    })
}

/// Cell rows grouped by `p`, each group followed by its boundary rows:
/// `q1` and `q23` as `q` values, `t3` as a `t` value, and `t2 = 1/p − 1/q`
/// at every grid `q` inside regime 2.
pub fn pivot_rows(spec: &DomainSpec, records: &[PhaseRecord], qs: &[Q]) -> Vec<[String; 9]> {
    let fp = spec.fingerprint();
    let mut ps: Vec<Q> = records.iter().map(|r| r.p).collect();
    ps.sort();
    ps.dedup();
    let mut rows = Vec::new();
    let one = Q::from_integer(1);
    for p in ps {
        let mut cells: Vec<&PhaseRecord> = records.iter().filter(|r| r.p == p).collect();
        cells.sort_by(|a, b| (a.q, a.t).cmp(&(b.q, b.t)));
        for r in cells {
            rows.push([
                fp.clone(),
                p.to_string(),
                "cell".into(),
                r.q.to_string(),
                r.t.to_string(),
                r.verdict.regime.label().into(),
                r.verdict.bounded.to_string(),
                r.empirically_bounded.to_string(),
                fmt_f(r.slope),
            ]);
        }
        let boundary = |name: &str, q: String, t: String| [fp.clone(), p.to_string(), format!("boundary:{name}"), q, t, String::new(), String::new(), String::new(), String::new()];
        let (q1, q23, t3) = (spec.q1(), spec.q23(p), spec.t3(p));
        rows.push(boundary("q1", q1.to_string(), String::new()));
        if q23 >= p {
            rows.push(boundary("q23", q23.to_string(), String::new()));
            rows.push(boundary("t3", String::new(), t3.to_string()));
        }
        let mut grid: Vec<Q> = qs.to_vec();
        grid.sort();
        grid.dedup();
        for q in grid.into_iter().filter(|&q| q >= p && q > q23 && q < q1) {
            rows.push(boundary("t2", q.to_string(), (one / p - one / q).to_string()));
        }
    }
    rows
}

pub fn run(spec: &DomainSpec, cfg: &RunConfig, out: &mut Outputs) -> Result<bool> {
    let sc = scan_config(cfg)?;
    let records = phase_scan(spec, &sc)?;
    let agreement = agreement_fraction(&records);
    let threshold = cfg.phase_scan.agreement;
    let pass = agreement.map_or(true, |a| a >= threshold);

    let mut table = Vec::new();
    write_phase_csv(spec, &records, &mut table)?;
    out.raw("phase.csv", table);
    out.csv(
        "pivot.csv",
        &["fingerprint", "p", "row", "q", "t", "regime", "predicted_bounded", "empirically_bounded", "slope"],
        pivot_rows(spec, &records, &sc.qs),
    )?;
    let counted = records.iter().filter(|r| !r.verdict.boundary_case && r.error.is_none()).count();
    let regimes: Vec<(&str, usize)> = [Regime::One, Regime::Two, Regime::Three]
        .iter()
        .map(|g| (g.label(), records.iter().filter(|r| r.verdict.regime == *g).count()))
        .collect();
    out.json(
        "phase.json",
        "phase-scan",
        &json!({
            "fingerprint": spec.fingerprint(),
            "seed": cfg.seed,
            "slope_tolerance": sc.slope_tol,
            "agreement": agreement,
            "agreement_threshold": threshold,
            "counted_cells": counted,
            "regime_counts": regimes.iter().map(|(l, c)| json!({"regime": l, "cells": c})).collect::<Vec<_>>(),
            "pass": pass,
            "records": records.iter().map(record_json).collect::<Vec<_>>(),
        }),
    )?;
    match agreement {
        Some(a) => println!("{} agreement {a:.3} over {counted} of {} cells (threshold {threshold})", if pass { "PASS" } else { "FAIL" }, records.len()),
        None => println!("PASS no comparable cells among {} scanned", records.len()),
    }
    Ok(pass)
}
