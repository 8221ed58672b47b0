//! Assemble the closed-form survival prediction for a configured billiard:
//! island measure, escape rate and the algebraic constant from whichever
//! stickiness sources the geometry carries (hat MUPO families, rectangular
//! stem bouncing balls, or both).

use anyhow::{anyhow, Result};
use mupolab_core::geometry::{BoundaryModel, StemKind};
use mupolab_core::hat::{self, Ordering, PredictionSource, SurvivalPrediction};
use mupolab_core::mupo::{enumerate_mupos, Mupo, RhoSpec};
use mupolab_core::stem::{self, StemCase};

pub struct Prediction {
    pub survival: SurvivalPrediction,
    pub mupos: Vec<Mupo>,
    pub hat_c: f64,
    pub stem_c: f64,
    pub thresholds: Option<stem::CornerThresholds>,
}

/// Default enumeration depth for the hat constant; the tail beyond is
/// checked against the half-depth value.
pub const DEFAULT_S_MAX: u64 = 5000;

pub fn predict(model: &BoundaryModel, rho_spec: &RhoSpec, t_ref: f64) -> Result<Prediction> {
    let set = enumerate_mupos(rho_spec, DEFAULT_S_MAX).map_err(|e| anyhow!("{e}"))?;
    let hat_c = hat::hat_c(model, &set);
    let (stem_c, ordering, zeta, thresholds) = match model.spec.stem {
        StemKind::Triangular { .. } => (0.0, None, None, None),
        StemKind::Rectangular { .. } => {
            let case = StemCase::from_model(model).map_err(|e| anyhow!("{e}"))?;
            let b = hat::ergodic_fraction(model);
            let c = stem::stem_c(&case, model.perimeter, b).map_err(|e| anyhow!("{e}"))?;
            let th = stem::corner_thresholds(t_ref, &case).map_err(|e| anyhow!("{e}"))?;
            (c, Some(th.ordering), Some(case.zeta), Some(th))
        }
    };
    let source = match (hat_c > 0.0, stem_c > 0.0) {
        (true, true) => PredictionSource::Combined,
        (false, true) => PredictionSource::StemBouncingBalls,
        _ => PredictionSource::HatMupos,
    };
    let a = hat::island_measure(model);
    let gamma = hat::escape_rate(model).map_err(|e| anyhow!("{e}"))?;
    Ok(Prediction {
        survival: SurvivalPrediction {
            island_a: a,
            ergodic_b: 1.0 - a,
            gamma_bar: gamma,
            c_coefficient: hat_c + stem_c,
            source,
            ordering: ordering.map(|o| match o {
                Ordering::Hat => Ordering::Hat,
                Ordering::Tilde => Ordering::Tilde,
            }),
            zeta,
        },
        mupos: set,
        hat_c,
        stem_c,
        thresholds,
    })
}

/// Time at which the exponential has decayed to 1% of the power law:
/// `exp(-gamma t) = 0.01 C / t`, solved by bisection. The plateau window
/// used by the verification suite is the decade following it.
pub fn crossover_time(gamma: f64, c: f64) -> f64 {
    let f = |t: f64| (-gamma * t).exp() * t - 0.01 * c;
    let mut lo = 1.0 / gamma;
    let mut hi = 1e4 / gamma;
    debug_assert!(f(lo) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
