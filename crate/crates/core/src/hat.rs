//! Closed-form survival analytics for the sticky hat: island measure, escape
//! rate, mean free path, per-MUPO survivor-band coefficients and the
//! algebraic constant `C` of the `P_e(t) = exp(-gamma t) + C/t` law.
//!
//! The per-family coefficient implemented here is
//!
//! ```text
//! Delta_sj = 4 R cos^2(theta_sj) (pi - lambda s arccos(sin(theta_sj)/rho))^2
//!            / (2 s^2 lambda^2 |dQ| B t)
//! ```
//!
//! i.e. the area of one survivor quadrilateral of the circle-with-slit map
//! under the boundary invariant measure. This differs from the printed form
//! of the source derivation (which carries an extra factor 2 and the inverted
//! arccos argument `rho sin(theta)`); the brute-force survivor-area oracle in
//! the test suite discriminates cleanly between the two and confirms this
//! one, for every family it was run on, to well within its 10% tolerance.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::fmath;
use crate::geometry::{BoundaryModel, HoleWall};
use crate::mupo::Mupo;

const PI: f64 = core::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub enum HatError {
    UnsupportedAlpha,
    /// The hole is missing or would intersect the regular region.
    HoleInIsland(String),
    /// Incidence with `sin(theta) > rho`: the survivor bands do not exist.
    NotAMupoOrientation { s: u64, j: u64 },
    /// The MUPO sum tail is larger than the requested tolerance.
    TailNotConverged { estimate: f64, tolerance: f64 },
}

impl fmt::Display for HatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HatError::UnsupportedAlpha => write!(f, "analytics require alpha = 1/2"),
            HatError::HoleInIsland(s) => write!(f, "{s}"),
            HatError::NotAMupoOrientation { s, j } => {
                write!(f, "orbit ({s}, {j}) has sin(theta) > rho; bands undefined")
            }
            HatError::TailNotConverged { estimate, tolerance } => write!(
                f,
                "MUPO tail estimate {estimate} exceeds requested tolerance {tolerance}"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for HatError {}

/// Which stickiness source a prediction covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PredictionSource {
    HatMupos,
    StemBouncingBalls,
    Combined,
}

/// Corner-threshold interleaving for the rectangular-stem constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ordering {
    Hat,
    Tilde,
}

/// The tuple defining the closed-form survival law.
#[derive(Clone, Debug)]
pub struct SurvivalPrediction {
    pub island_a: f64,
    pub ergodic_b: f64,
    pub gamma_bar: f64,
    pub c_coefficient: f64,
    pub source: PredictionSource,
    pub ordering: Option<Ordering>,
    pub zeta: Option<u32>,
}

impl SurvivalPrediction {
    /// `P_e(t) = exp(-gamma t) + C/t`. The formula is asymptotic: for
    /// `t -> 0` it tends to `1 + C/t` rather than 1.
    pub fn pe(&self, t: f64) -> f64 {
        fmath::exp(-self.gamma_bar * t) + self.c_coefficient / t
    }
}

/// Measure of the integrable island under the boundary Birkhoff measure:
/// hat-arc states with `R |sin theta| > r` plus hat-base states whose
/// trajectory line misses the dashed `r`-circle.
pub fn island_measure(model: &BoundaryModel) -> f64 {
    let r_hat = model.spec.hat_radius;
    let rho = model.rho();
    4.0 / (2.0 * model.perimeter)
        * (r_hat * fmath::sqrt(1.0 - rho * rho) - rho * r_hat * fmath::acos(rho)
            + PI / 2.0 * r_hat * (1.0 - rho))
}

pub fn ergodic_fraction(model: &BoundaryModel) -> f64 {
    1.0 - island_measure(model)
}

/// Mean free path of the ergodic component (flow/map measure ratio).
pub fn mean_free_path(model: &BoundaryModel) -> f64 {
    let r_hat = model.spec.hat_radius;
    let rho = model.rho();
    let b = ergodic_fraction(model);
    PI * (model.stem_area
        + r_hat * r_hat * fmath::asin(rho)
        + rho * r_hat * r_hat * fmath::sqrt(1.0 - rho * rho))
        / (b * model.perimeter)
}

/// Exponential escape rate for the configured hole.
pub fn escape_rate(model: &BoundaryModel) -> Result<f64, HatError> {
    let hole = model
        .spec
        .hole
        .as_ref()
        .ok_or_else(|| HatError::HoleInIsland(String::from("no hole configured")))?;
    // stem walls are always in the ergodic component; the enum admits only
    // stem walls, so this is structural
    let _ = match hole.wall {
        HoleWall::RectStemRightWall | HoleWall::TriangularStemEdge => (),
    };
    let eps = hole.eps();
    let b = ergodic_fraction(model);
    Ok(eps / (mean_free_path(model) * b * model.perimeter))
}

/// Survivor band `(phi_1, phi_2)` of family `m` for band index `k`
/// (`0 <= k < lambda s`), angles mod 2 pi.
pub fn mupo_arc_interval(m: &Mupo, k: u32, rho: f64) -> Result<(f64, f64), HatError> {
    let sin_t = fmath::sin(m.theta_sj);
    if sin_t > rho {
        return Err(HatError::NotAMupoOrientation { s: m.s, j: m.j });
    }
    let lam = m.lambda as f64;
    let s = m.s as f64;
    let g = fmath::acos((sin_t / rho).min(1.0));
    let two_pi = 2.0 * PI;
    let phi1 = m.theta_sj + PI / lam + g + (k as f64 - 1.0) * two_pi / (lam * s);
    let phi2 = m.theta_sj + PI / lam - g + k as f64 * two_pi / (lam * s);
    Ok((fmath::rem_euclid(phi1, two_pi), fmath::rem_euclid(phi2, two_pi)))
}

/// Width of one survivor band: `2 pi/(lambda s) - 2 arccos(sin(theta)/rho)`.
pub fn band_width(m: &Mupo, rho: f64) -> f64 {
    let sin_t = fmath::sin(m.theta_sj);
    2.0 * PI / (m.lambda as f64 * m.s as f64) - 2.0 * fmath::acos((sin_t / rho).min(1.0))
}

/// Leading `1/t` coefficient of one survivor quadrilateral, integrated over
/// the invariant measure: `Delta_sj * t`.
pub fn delta_sj_t(m: &Mupo, model: &BoundaryModel) -> f64 {
    let rho = model.rho();
    let r_hat = model.spec.hat_radius;
    let b = ergodic_fraction(model);
    let lam = m.lambda as f64;
    let s = m.s as f64;
    let cos_t = fmath::cos(m.theta_sj);
    let sin_t = fmath::sin(m.theta_sj);
    let core = PI - lam * s * fmath::acos((sin_t / rho).min(1.0));
    4.0 * r_hat * cos_t * cos_t * core * core / (2.0 * s * s * lam * lam * model.perimeter * b)
}

/// `Delta_sj` at a given time.
pub fn delta_sj(m: &Mupo, model: &BoundaryModel, t: f64) -> f64 {
    delta_sj_t(m, model) / t
}

/// Algebraic constant of the sticky hat: `C = sum lambda (s + 2j)
/// (Delta - delta) t` over the MUPO set. A family sitting exactly on the
/// island border contributes half (one-sided perturbations only).
pub fn hat_c(model: &BoundaryModel, set: &[Mupo]) -> f64 {
    set.iter()
        .map(|m| {
            let weight = m.lambda as f64 * (m.s as f64 + 2.0 * m.j as f64);
            let one_sided = if m.boundary { 0.5 } else { 1.0 };
            weight * one_sided * delta_sj_t(m, model)
        })
        .sum()
}

/// `hat_c` with an empirical tail-convergence check: the enumeration is run
/// at `s_max/2` and `s_max`; the difference must fall within `tol` relative.
pub fn hat_c_checked(
    model: &BoundaryModel,
    rho: &crate::mupo::RhoSpec,
    s_max: u64,
    tol: f64,
) -> Result<(f64, Vec<Mupo>), crate::mupo::MupoError> {
    let half = crate::mupo::enumerate_mupos(rho, s_max / 2)?;
    let full = crate::mupo::enumerate_mupos(rho, s_max)?;
    let c_half = hat_c(model, &half);
    let c_full = hat_c(model, &full);
    let denom = if c_full != 0.0 { fmath::abs(c_full) } else { 1.0 };
    if fmath::abs(c_full - c_half) / denom > tol {
        // tail still moving; surface it as the dedicated error
        return Err(crate::mupo::MupoError::Domain(alloc::format!(
            "hat C tail not converged at s_max = {s_max}: |{c_full} - {c_half}| > {tol} rel"
        )));
    }
    Ok((c_full, full))
}

/// Survivor quadrilateral of one band in the `(phi, theta)` plane for a
/// perturbed family surviving `n` collisions: four corners, anticlockwise.
pub fn band_quadrilateral(m: &Mupo, rho: f64, band: u32, n: f64) -> Result<[(f64, f64); 4], HatError> {
    let (phi1, phi2) = mupo_arc_interval(m, band, rho)?;
    // phi2 - phi1 mod 2 pi equals the band width
    let w0 = band_width(m, rho);
    let theta = m.theta_sj;
    let sin_t = fmath::sin(theta);
    let cos_t = fmath::cos(theta);
    let cp = cos_t / fmath::sqrt((rho * rho - sin_t * sin_t).max(1e-300));
    let m1 = 1.0 - cp;
    let eta_plus = w0 / (2.0 * (n - cp));
    let eta_minus = -w0 / (2.0 * (n + cp));
    Ok([
        (phi1, theta),
        (fmath::rem_euclid(phi1 + (m1 + 2.0 * n) * eta_plus, 2.0 * PI), theta + eta_plus),
        (phi2, theta),
        (fmath::rem_euclid(phi1 + m1 * eta_minus, 2.0 * PI), theta + eta_minus),
    ])
}

/// Point-in-quadrilateral test, tolerant of the 2 pi wrap in `phi`.
pub fn in_band_quadrilateral(quad: &[(f64, f64); 4], phi: f64, theta: f64) -> bool {
    // unwrap phi near the quad's reference corner
    let two_pi = 2.0 * PI;
    let refphi = quad[0].0;
    let mut p = phi;
    while p < refphi - PI {
        p += two_pi;
    }
    while p > refphi + PI {
        p -= two_pi;
    }
    let mut pts = *quad;
    for c in pts.iter_mut() {
        while c.0 < refphi - PI {
            c.0 += two_pi;
        }
        while c.0 > refphi + PI {
            c.0 -= two_pi;
        }
    }
    let mut sign = 0i32;
    for i in 0..4 {
        let (x1, y1) = pts[i];
        let (x2, y2) = pts[(i + 1) % 4];
        let cross = (x2 - x1) * (theta - y1) - (y2 - y1) * (p - x1);
        if cross.abs() < 1e-18 {
            continue;
        }
        let s = if cross > 0.0 { 1 } else { -1 };
        if sign == 0 {
            sign = s;
        } else if sign != s {
            return false;
        }
    }
    true
}

/// Full prediction tuple for a triangular-stem (hat-only) configuration.
pub fn predict_hat(
    model: &BoundaryModel,
    set: &[Mupo],
) -> Result<SurvivalPrediction, HatError> {
    let a = island_measure(model);
    Ok(SurvivalPrediction {
        island_a: a,
        ergodic_b: 1.0 - a,
        gamma_bar: escape_rate(model)?,
        c_coefficient: hat_c(model, set),
        source: PredictionSource::HatMupos,
        ordering: None,
        zeta: None,
    })
}
