//! The acceptance suite: every closed-form claim of the library checked
//! against exact values, independent oracles and full Monte Carlo runs,
//! one pass/fail line per criterion.

use crate::parallel::survival_curve_parallel;
use crate::predict::{crossover_time, predict};
use anyhow::Result;
use mupolab_core::contfrac::expand;
use mupolab_core::geometry::{build_boundary, BoundaryModel, HoleSpec, HoleWall, MushroomSpec, StemKind};
use mupolab_core::hat;
use mupolab_core::montecarlo::{diagnostics, survival_curve_range, survivor_phase_map, SurvivalCurve};
use mupolab_core::mupo::{
    classify, enumerate_mupos, eq15_threshold, intermediate_k, k_bound, k_bound_min_q,
    odd_convergent_k, r2_hat, HatFraction, RhoSpec, StickinessClass,
};
use mupolab_core::stem::{self, StemCase};
use mupolab_core::QuadraticSurd;
use std::f64::consts::PI;
use std::time::Instant;

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
    pub seconds: f64,
}

pub struct VerifyOptions {
    /// Reduced particle counts for quick iteration; the published tolerances
    /// assume the full counts, so quick mode is advisory only.
    pub quick: bool,
    pub criteria: Option<Vec<u32>>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            quick: false,
            criteria: None,
        }
    }
}

pub fn run(opts: &VerifyOptions) -> Vec<CriterionResult> {
    let all: Vec<(u32, &'static str, fn(bool) -> Result<(bool, String)>)> = vec![
        (1, "MUPO enumeration at rho = 0.815", c1),
        (2, "MUPO enumeration and classification at theta* = 871/2500", c2),
        (3, "MUPO-free certification of the worked surd", c3),
        (4, "even-quotient sufficient-condition threshold", c4),
        (5, "stadium limit of the stem constant", c5),
        (6, "closed form vs seven sums vs polygon shoelace", c6),
        (7, "Taylor remainder bound validity", c7),
        (8, "Monte Carlo vs analytics, sticky hat", c8),
        (9, "Monte Carlo vs analytics, sticky stem", c9),
        (10, "no-plateau test for the MUPO-free mushroom", c10),
        (11, "phase-map survivor bands inside analytic quadrilaterals", c11),
        (12, "property suite: measure, mean free path, determinism", c12),
    ];
    let mut out = Vec::new();
    for (id, name, f) in all {
        if let Some(sel) = &opts.criteria {
            if !sel.contains(&id) {
                continue;
            }
        }
        let start = Instant::now();
        let (passed, details) = match f(opts.quick) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        out.push(CriterionResult {
            id,
            name,
            passed,
            details,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    out
}

fn keys(set: &[mupolab_core::Mupo]) -> Vec<(u64, u64)> {
    set.iter().map(|m| m.key()).collect()
}

fn c1(_quick: bool) -> Result<(bool, String)> {
    let t0 = Instant::now();
    let set919 = enumerate_mupos(&RhoSpec::Plain(0.815), 919)?;
    let set920 = enumerate_mupos(&RhoSpec::Plain(0.815), 920)?;
    let elapsed = t0.elapsed().as_secs_f64();
    let ok919 = keys(&set919) == vec![(4, 1), (5, 1), (66, 13)];
    let ok920 = keys(&set920) == vec![(4, 1), (5, 1), (66, 13), (920, 181)];
    let fast = elapsed < 1.0;
    Ok((
        ok919 && ok920 && fast,
        format!(
            "s<=919: {:?}; s=920 adds (920,181): {}; runtime {:.3}s",
            keys(&set919),
            ok920,
            elapsed
        ),
    ))
}

fn c2(_quick: bool) -> Result<(bool, String)> {
    let theta = QuadraticSurd::parse("871/2500").unwrap();
    let set = enumerate_mupos(&RhoSpec::ThetaStar(theta.clone()), 5000)?;
    let interior: Vec<_> = set.iter().filter(|m| !m.boundary).map(|m| m.key()).collect();
    let boundary: Vec<_> = set.iter().filter(|m| m.boundary).map(|m| m.key()).collect();
    let ok_set = interior == vec![(20, 7), (66, 23), (376, 131)];
    // exact tangency: cos(871 pi/2500) = rho precisely; the published set
    // omits this measure-boundary family, which we report explicitly
    let ok_boundary = boundary == vec![(2500, 871)];
    let class = classify(&theta, HatFraction::HALF, 95)?;
    let ok_class = match &class {
        StickinessClass::FinitelySticky { set } => {
            let mut simple: Vec<_> = set.iter().map(|g| g.to_simple()).collect();
            simple.sort_unstable();
            simple == vec![(20, 7), (66, 23), (376, 131), (2500, 871)]
        }
        _ => false,
    };
    Ok((
        ok_set && ok_boundary && ok_class,
        format!(
            "interior set {:?}; boundary-tangent orbit {:?} flagged; classify finitely sticky: {}",
            interior, boundary, ok_class
        ),
    ))
}

fn c3(_quick: bool) -> Result<(bool, String)> {
    let theta = QuadraticSurd::parse("(5+sqrt(2))/23").unwrap();
    let rho = RhoSpec::ThetaStar(theta.clone()).rho();
    let class = classify(&theta, HatFraction::HALF, 95)?;
    let certified = matches!(class, StickinessClass::MupoFreeCertified { .. });
    let k95 = k_bound(rho, 0.5, 95.0, 95.0)?;
    let xi = QuadraticSurd::parse("(10+2*sqrt(2))/23").unwrap();
    let cf = expand(&xi, 512)?;
    let k5 = odd_convergent_k(&cf, 5)?.to_f64();
    let kbar = intermediate_k(&cf, 5, 1)?.to_f64();
    let ok = certified && k95 < 0.6549 && (k5 - 0.706).abs() < 5e-4 && (kbar - 1.237).abs() < 5e-4;
    Ok((
        ok,
        format!("certified: {certified}; K(95,95) = {k95:.6}; K_5 = {k5:.6}; Kbar_5(1) = {kbar:.6}"),
    ))
}

fn c4(_quick: bool) -> Result<(bool, String)> {
    let t = eq15_threshold(0.5, 1);
    Ok((
        (t - 0.390683).abs() < 5e-7,
        format!("threshold rho = {t:.7} (target 0.390683)"),
    ))
}

fn c5(_quick: bool) -> Result<(bool, String)> {
    let case = StemCase::new(1.0 - 1e-12, 1.0, 1.0, 0.28, 0.3).unwrap();
    let got = stem::stem_core_c(&case).map_err(|e| anyhow::anyhow!("{e}"))?;
    let lh2 = 0.49;
    let expect = lh2 * (3.0 * 3.0f64.ln() + 2.0) / 4.0;
    let rel = (got / expect - 1.0).abs();
    Ok((rel < 1e-6, format!("core C = {got:.9} vs (L-h+)^2 (3 ln 3 + 2)/4 = {expect:.9}, rel {rel:.2e}")))
}

fn c6(_quick: bool) -> Result<(bool, String)> {
    // 50-point grid avoiding the degenerate 1/zeta set and the hat/tilde
    // transition set (where the chains coincide)
    let mut worst_1e5 = 0.0f64;
    let mut c0 = 0.0f64;
    let mut sum_vs_closed = 0.0f64;
    let mut count = 0;
    let mut i = 0;
    while count < 50 {
        i += 1;
        let mut rho = 0.15 + 0.8 * (i as f64) / 52.0;
        let zeta = (1.0 / rho).ceil();
        if (rho * zeta - 1.0).abs() < 5e-3 {
            rho += 6e-3;
        }
        let zr = 2.0 * zeta * rho - 1.0;
        if (zr * zr - (2.0 * rho + 1.0)).abs() < 5e-3 {
            rho += 6e-3;
        }
        let case = match StemCase::new(rho, 1.0, 1.0, 0.28, 0.3) {
            Ok(c) => c,
            Err(_) => continue,
        };
        if case.is_degenerate() {
            continue;
        }
        count += 1;
        for t in [1e4, 1e5] {
            let th = stem::corner_thresholds(t, &case).map_err(|e| anyhow::anyhow!("{e}"))?;
            let sums: f64 = stem::seven_sums(&case, t, th.ordering)
                .map_err(|e| anyhow::anyhow!("{e}"))?
                .iter()
                .sum();
            let closed = stem::stem_core_c(&case).map_err(|e| anyhow::anyhow!("{e}"))? / t;
            let shoe = stem::polygon_survivor_sum(&case, t);
            let rel = ((closed - shoe) / shoe).abs();
            c0 = c0.max(rel * t);
            sum_vs_closed = sum_vs_closed.max(((sums - closed) / closed).abs());
            if t == 1e5 {
                worst_1e5 = worst_1e5.max(rel);
            }
        }
    }
    let ok = worst_1e5 < 1e-3 && sum_vs_closed < 1e-9;
    Ok((
        ok,
        format!(
            "max rel error at t=1e5: {worst_1e5:.2e} (fit C0 = {c0:.2}); seven-sum vs closed: {sum_vs_closed:.2e}"
        ),
    ))
}

fn c7(_quick: bool) -> Result<(bool, String)> {
    let mut state = 0xc0ffee123456789u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / 9007199254740992.0
    };
    let mut tested = 0;
    let mut worst_margin = f64::INFINITY;
    while tested < 1000 {
        let alpha = 0.05 + 0.45 * next();
        let big_q = 50.0 + 200.0 * next();
        let q = (big_q + 9.0 * big_q * next()).floor();
        let p = (1.0 + (q / (2.0 * alpha) * 0.9 - 1.0) * next()).floor();
        let c = (alpha * p * PI / q).cos();
        if c <= 0.05 {
            continue;
        }
        let eps = c * (1.0 / (alpha * PI / q).cos() - 1.0);
        if c + eps >= 1.0 {
            continue;
        }
        let rho = c + 0.5 * eps;
        if big_q <= k_bound_min_q(rho, alpha) {
            continue;
        }
        let t_true = (alpha * p * PI / q - (c + eps).acos()) / (alpha * PI);
        let r2_true = q * q * t_true - alpha * PI * rho / (2.0 * (1.0 - rho * rho).sqrt());
        let bound = r2_hat(rho, alpha, q, big_q);
        if r2_true > bound {
            return Ok((false, format!("violation: alpha={alpha} rho={rho} q={q} Q={big_q}")));
        }
        worst_margin = worst_margin.min(bound - r2_true);
        tested += 1;
    }
    Ok((true, format!("1000 samples, min slack {worst_margin:.2e}")))
}

fn fig9_left_model(eps: f64) -> (BoundaryModel, RhoSpec) {
    let theta = QuadraticSurd::parse("871/2500").unwrap();
    let rho_spec = RhoSpec::ThetaStar(theta);
    let rho = rho_spec.rho();
    let edge = (rho * rho + 1.0f64).sqrt();
    let spec = MushroomSpec {
        hat_radius: 1.0,
        stem_half_width: rho,
        hat_fraction: 0.5,
        stem: StemKind::Triangular { depth: 1.0 },
        hole: Some(HoleSpec {
            wall: HoleWall::TriangularStemEdge,
            lo: 0.5 * (edge - eps),
            hi: 0.5 * (edge + eps),
        }),
    };
    (build_boundary(&spec).unwrap(), rho_spec)
}

/// Inverse-variance-weighted plateau of `t P_e(t)` over `[t_lo, t_hi]`.
fn plateau_estimate(curve: &SurvivalCurve, t_lo: f64, t_hi: f64) -> (f64, f64) {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, t) in curve.edges.iter().enumerate() {
        if *t < t_lo || *t > t_hi {
            continue;
        }
        let f = curve.fraction(i);
        let var = (t * t * f * (1.0 - f) / curve.n as f64).max(1e-300);
        let w = 1.0 / var;
        num += w * t * f;
        den += w;
    }
    if den == 0.0 {
        return (0.0, f64::INFINITY);
    }
    (num / den, (1.0 / den).sqrt())
}

fn c8(quick: bool) -> Result<(bool, String)> {
    let (model, rho_spec) = fig9_left_model(0.048);
    let pred = predict(&model, &rho_spec, 1e4)?;
    let c = pred.hat_c;
    let gamma = pred.survival.gamma_bar;
    let t_cross = crossover_time(gamma, c);
    let t_max = 10.3 * t_cross;
    let particles = if quick { 1_000_000 } else { 10_000_000 };
    let edges = SurvivalCurve::new_edges(1.0, t_max, 160);
    let curve = survival_curve_parallel(&model, particles, &edges, t_max, 20_260_810);
    let (plateau, _) = plateau_estimate(&curve, t_cross, 10.0 * t_cross);
    let rel = (plateau / c - 1.0).abs();
    Ok((
        rel <= 0.15,
        format!(
            "hat C = {c:.5}, gamma = {gamma:.5}, window [{t_cross:.0}, {:.0}], plateau {plateau:.5}, rel {rel:.3}",
            10.0 * t_cross
        ),
    ))
}

fn c9(quick: bool) -> Result<(bool, String)> {
    let theta = QuadraticSurd::parse("(5+sqrt(2))/23").unwrap();
    let rho_spec = RhoSpec::ThetaStar(theta);
    let rho = rho_spec.rho();
    let spec = MushroomSpec {
        hat_radius: 1.0,
        stem_half_width: rho,
        hat_fraction: 0.5,
        stem: StemKind::Rectangular { length: 1.0 },
        hole: Some(HoleSpec {
            wall: HoleWall::RectStemRightWall,
            lo: 0.28,
            hi: 0.30,
        }),
    };
    let model = build_boundary(&spec).unwrap();
    let pred = predict(&model, &rho_spec, 1e4)?;
    let c = pred.survival.c_coefficient; // direct + bouncing-ball core (hat is MUPO-free)
    let gamma = pred.survival.gamma_bar;
    let tau = hat::mean_free_path(&model);
    let t_cross = crossover_time(gamma, c);
    let t_max = 10.3 * t_cross;
    let particles = if quick { 1_000_000 } else { 10_000_000 };
    let edges = SurvivalCurve::new_edges(0.5, t_max, 200);
    let curve = survival_curve_parallel(&model, particles, &edges, t_max, 20_260_811);
    // exponential slope over (2 tau, 0.5 / gamma)
    let (mut sx, mut sy, mut sxx, mut sxy, mut nn) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, t) in curve.edges.iter().enumerate() {
        if *t < 2.0 * tau || *t > 0.5 / gamma {
            continue;
        }
        let f = curve.fraction(i);
        if f <= 0.0 {
            continue;
        }
        let y = f.ln();
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        nn += 1.0;
    }
    let slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    let rate = -slope;
    let rate_rel = (rate / gamma - 1.0).abs();
    let (plateau, _) = plateau_estimate(&curve, t_cross, 10.0 * t_cross);
    let plateau_rel = (plateau / c - 1.0).abs();
    Ok((
        rate_rel <= 0.05 && plateau_rel <= 0.15,
        format!(
            "gamma = {gamma:.6} vs fitted {rate:.6} (rel {rate_rel:.3}); C = {c:.5} vs plateau {plateau:.5} (rel {plateau_rel:.3})"
        ),
    ))
}

fn c10(quick: bool) -> Result<(bool, String)> {
    // the MUPO-free rho of the worked example with a triangular stem: no
    // power-law plateau should be resolvable
    let theta = QuadraticSurd::parse("(5+sqrt(2))/23").unwrap();
    let rho_spec = RhoSpec::ThetaStar(theta);
    let rho = rho_spec.rho();
    let eps = 0.0371;
    let edge = (rho * rho + 1.0f64).sqrt();
    let spec = MushroomSpec {
        hat_radius: 1.0,
        stem_half_width: rho,
        hat_fraction: 0.5,
        stem: StemKind::Triangular { depth: 1.0 },
        hole: Some(HoleSpec {
            wall: HoleWall::TriangularStemEdge,
            lo: 0.5 * (edge - eps),
            hi: 0.5 * (edge + eps),
        }),
    };
    let model = build_boundary(&spec).unwrap();
    let pred = predict(&model, &rho_spec, 1e4)?;
    let gamma = pred.survival.gamma_bar;
    if pred.hat_c != 0.0 {
        return Ok((false, format!("expected an empty MUPO set, hat C = {}", pred.hat_c)));
    }
    let t_max = 40.0 / gamma;
    let particles = if quick { 300_000 } else { 1_000_000 };
    let edges = SurvivalCurve::new_edges(1.0, t_max, 120);
    let curve = survival_curve_parallel(&model, particles, &edges, t_max, 20_260_812);
    // late-time estimate of t P_e with its binomial CI
    let i_last = curve.edges.len() - 1;
    let t = curve.edges[i_last];
    let est = t * curve.fraction(i_last);
    let ci = 1.96 * t * curve.stderr(i_last);
    let survivors = curve.survivors[i_last];
    Ok((
        est - ci <= 0.0,
        format!(
            "t = {t:.0}: {survivors} survivors, t Pe = {est:.2e} +- {ci:.2e} (95% CI contains 0: {})",
            est - ci <= 0.0
        ),
    ))
}

fn c11(_quick: bool) -> Result<(bool, String)> {
    let rho = 0.815;
    let n_coll = 200u64;
    let pts = survivor_phase_map(rho, n_coll, 300_000, 4242);
    let set = enumerate_mupos(&RhoSpec::Plain(rho), 10)?;
    let mut report = String::new();
    let mut ok = true;
    for key in [(4u64, 1u64), (5u64, 1u64)] {
        let m = set.iter().find(|m| m.key() == key).unwrap();
        let quads: Vec<_> = (0..(m.lambda as u32 * m.s as u32))
            .map(|k| hat::band_quadrilateral(m, rho, k, n_coll as f64).unwrap())
            .collect();
        // theta extent of the band
        let eta_max = quads[0]
            .iter()
            .map(|(_, t)| (t - m.theta_sj).abs())
            .fold(0.0f64, f64::max);
        let mut band_mass = 0u64;
        let mut inside = 0u64;
        for (phi, sin_theta) in &pts {
            let theta = sin_theta.asin();
            if (theta - m.theta_sj).abs() > 1.3 * eta_max {
                continue;
            }
            band_mass += 1;
            if quads
                .iter()
                .any(|q| hat::in_band_quadrilateral(q, *phi, theta))
            {
                inside += 1;
            }
        }
        let frac = inside as f64 / band_mass.max(1) as f64;
        ok &= frac >= 0.95 && band_mass > 200;
        report.push_str(&format!("({},{}): {band_mass} band points, {frac:.3} inside; ", key.0, key.1));
    }
    Ok((ok, report))
}

fn c12(quick: bool) -> Result<(bool, String)> {
    let spec = MushroomSpec {
        hat_radius: 1.0,
        stem_half_width: 0.5,
        hat_fraction: 0.5,
        stem: StemKind::Rectangular { length: 0.5 },
        hole: None,
    };
    let model = build_boundary(&spec).unwrap();
    let n_coll = if quick { 1_000_000 } else { 10_000_000 };
    let d = diagnostics(&model, n_coll, 7);
    let tau_expect = hat::mean_free_path(&model);
    let tau_rel = (d.mean_free_path / tau_expect - 1.0).abs();
    let ks_ok = d.ks_z < 0.005 && d.ks_sin_theta < 0.005;
    // determinism: serial whole-range vs parallel chunked runs
    let hole_spec = MushroomSpec {
        hole: Some(HoleSpec {
            wall: HoleWall::RectStemRightWall,
            lo: 0.2,
            hi: 0.25,
        }),
        ..spec
    };
    let open_model = build_boundary(&hole_spec).unwrap();
    let edges = SurvivalCurve::new_edges(1.0, 500.0, 40);
    let serial = survival_curve_range(&open_model, 99, 0, 100_000, &edges, 500.0);
    let par1 = survival_curve_parallel(&open_model, 100_000, &edges, 500.0, 99);
    let par2 = survival_curve_parallel(&open_model, 100_000, &edges, 500.0, 99);
    let deterministic = serial.survivors == par1.survivors && par1.survivors == par2.survivors;
    let ok = tau_rel < 0.01 && ks_ok && deterministic;
    Ok((
        ok,
        format!(
            "mean free path rel err {tau_rel:.4}; KS_z = {:.4}, KS_sin = {:.4}; deterministic: {deterministic}; corners: {}",
            d.ks_z, d.ks_sin_theta, d.corner_events
        ),
    ))
}
