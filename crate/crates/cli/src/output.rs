//! Artifact writers: CSV curves, JSON results, run manifests.

use anyhow::Result;
use mupolab_core::contfrac::{CfTail, ContinuedFraction};
use mupolab_core::geometry::BoundaryModel;
use mupolab_core::montecarlo::SurvivalCurve;
use mupolab_core::mupo::{GeneralOrbit, Mupo, StickinessClass, SufficientCondition};
use serde_json::{json, Value};
use std::fs;
use std::path::Path;

pub fn geometry_summary(model: &BoundaryModel) -> Value {
    json!({
        "perimeter": model.perimeter,
        "area": model.area,
        "stem_area": model.stem_area,
        "rho": model.rho(),
        "zeta": model.zeta(),
    })
}

pub fn mupo_json(m: &Mupo) -> Value {
    json!({
        "s": m.s,
        "j": m.j,
        "lambda": m.lambda,
        "alpha_sj": m.alpha_sj,
        "beta_sj": m.beta_sj,
        "theta_sj": m.theta_sj,
        "boundary": m.boundary,
        "margin": m.margin,
    })
}

pub fn general_orbit_json(g: &GeneralOrbit) -> Value {
    let (s, j) = g.to_simple();
    json!({ "q": g.q, "p": g.p, "s": s, "j": j, "boundary": g.boundary })
}

pub fn cf_json(cf: &ContinuedFraction) -> Value {
    let kind = match cf.tail() {
        CfTail::Terminated => "terminated",
        CfTail::Periodic => "periodic",
        CfTail::TruncatedAtDepth(_) => "truncated",
    };
    json!({
        "a0": cf.pre_period()[0].to_string(),
        "pre_period": cf.pre_period()[1..].iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        "period": cf.period().iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        "kind": kind,
        "rendered": cf.render(),
    })
}

pub fn stickiness_json(class: &StickinessClass) -> Value {
    match class {
        StickinessClass::MupoFreeCertified {
            checked_to,
            sufficient_condition,
        } => json!({
            "class": "mupo-free-certified",
            "checked_to": checked_to,
            "sufficient_condition": match sufficient_condition {
                SufficientCondition::Eq15EvenQuotientBound => "even-quotient-bound",
                SufficientCondition::ConvergentCertificate => "convergent-certificate",
            },
        }),
        StickinessClass::FinitelySticky { set } => json!({
            "class": "finitely-sticky",
            "set": set.iter().map(general_orbit_json).collect::<Vec<_>>(),
        }),
        StickinessClass::InfinitelySticky { witness, found } => json!({
            "class": "infinitely-sticky",
            "witness": witness,
            "found": found.iter().map(general_orbit_json).collect::<Vec<_>>(),
        }),
        StickinessClass::UndecidedUpTo { q, found } => json!({
            "class": "undecided",
            "checked_to": q,
            "found": found.iter().map(general_orbit_json).collect::<Vec<_>>(),
        }),
    }
}

/// Write the per-run manifest next to the primary output.
pub fn write_manifest(
    out_path: &Path,
    command: &str,
    config: Value,
    geometry: Option<Value>,
    params: Value,
) -> Result<()> {
    let manifest = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "geometry": geometry,
        "params": params,
        "outputs": [out_path.to_string_lossy()],
    });
    let path = out_path.with_extension(match out_path.extension() {
        Some(e) => format!("{}.manifest.json", e.to_string_lossy()),
        None => "manifest.json".to_string(),
    });
    fs::write(path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

pub fn write_survival_csv(path: &Path, curve: &SurvivalCurve, header_json: &Value) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(vec![]);
    w.write_record(["t_lo", "t_hi", "survivors", "fraction", "stderr"])?;
    for i in 0..curve.edges.len() {
        let t_lo = if i == 0 { 0.0 } else { curve.edges[i - 1] };
        w.write_record([
            format!("{t_lo}"),
            format!("{}", curve.edges[i]),
            format!("{}", curve.survivors[i]),
            format!("{}", curve.fraction(i)),
            format!("{}", curve.stderr(i)),
        ])?;
    }
    let body = String::from_utf8(w.into_inner()?)?;
    let text = format!("# {}\n{}", serde_json::to_string(header_json)?, body);
    fs::write(path, text)?;
    Ok(())
}

pub fn write_prediction_csv(
    path: &Path,
    rows: &[(f64, f64, f64, f64)],
    header_json: &Value,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(vec![]);
    w.write_record(["t", "Pe_exponential", "Pe_powerlaw", "Pe_total"])?;
    for (t, e, p, total) in rows {
        w.write_record([
            format!("{t}"),
            format!("{e}"),
            format!("{p}"),
            format!("{total}"),
        ])?;
    }
    let body = String::from_utf8(w.into_inner()?)?;
    fs::write(path, format!("# {}\n{}", serde_json::to_string(header_json)?, body))?;
    Ok(())
}

pub fn write_phase_csv(path: &Path, pts: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(vec![]);
    w.write_record(["phi", "sin_theta"])?;
    for (phi, st) in pts {
        w.write_record([format!("{phi}"), format!("{st}")])?;
    }
    fs::write(path, String::from_utf8(w.into_inner()?)?)?;
    Ok(())
}
