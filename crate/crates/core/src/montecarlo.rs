//! Escape-simulation kernels: ergodic initial conditions, hole absorption,
//! the circle-with-slit map, survival histograms and long-orbit diagnostics.
//!
//! Everything here is serial and deterministic; each particle's randomness
//! comes from its own counter-derived ChaCha stream keyed by `(seed, index)`,
//! so any parallel partitioning of the index range reproduces identical
//! results. The `mupolab` binary drives these kernels across threads.

use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fmath;
use crate::geometry::{BirkhoffCoord, BoundaryModel, GeomError};

const PI: f64 = core::f64::consts::PI;

/// Uniform f64 in [0, 1) from the top 53 bits.
#[inline]
fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Independent stream for one particle.
pub fn particle_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform draw from the ergodic component of the boundary measure
/// `(2 |dQ|)^-1 dz d sin(theta)`, via rejection on the regular region.
/// Acceptance rate equals the ergodic fraction `B`.
pub fn sample_ergodic_ic(rng: &mut impl RngCore, model: &BoundaryModel) -> BirkhoffCoord {
    loop {
        let z = uniform(rng) * model.perimeter;
        let sin_theta = 2.0 * uniform(rng) - 1.0;
        let coord = BirkhoffCoord { z, sin_theta };
        if !model.in_regular_region(&coord) {
            return coord;
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EscapeRecord {
    pub escaped: bool,
    /// Escape time, or `t_max` for censored records.
    pub time: f64,
    pub collisions: u64,
    /// Trajectory hit a segment junction and was abandoned (measure zero);
    /// excluded from survival statistics.
    pub corner: bool,
}

/// Follow one trajectory until it escapes through the hole or reaches
/// `t_max` (censored).
pub fn evolve_until_escape(
    model: &BoundaryModel,
    ic: &BirkhoffCoord,
    t_max: f64,
) -> EscapeRecord {
    let mut state = model.from_birkhoff(ic);
    let mut collisions = 0u64;
    loop {
        match model.next_collision(&state) {
            Ok(hit) => {
                if hit.state.time > t_max {
                    return EscapeRecord {
                        escaped: false,
                        time: t_max,
                        collisions,
                        corner: false,
                    };
                }
                collisions += 1;
                if model.in_hole(hit.segment, hit.param) {
                    return EscapeRecord {
                        escaped: true,
                        time: hit.state.time,
                        collisions,
                        corner: false,
                    };
                }
                state = hit.state;
            }
            Err(GeomError::CornerHit { time, .. }) => {
                return EscapeRecord {
                    escaped: false,
                    time,
                    collisions,
                    corner: true,
                }
            }
            Err(_) => {
                // numerical stall: treat like a corner event (tallied, excluded)
                return EscapeRecord {
                    escaped: false,
                    time: state.time,
                    collisions,
                    corner: true,
                }
            }
        }
    }
}

/// Survival histogram on log-spaced bin edges.
#[derive(Clone, Debug)]
pub struct SurvivalCurve {
    /// Bin edges, ascending, log-spaced in `(t_min, t_max)`.
    pub edges: Vec<f64>,
    /// Number of (non-corner) particles with escape time `> edges[i]`.
    pub survivors: Vec<u64>,
    /// Particles contributing to the statistics.
    pub n: u64,
    /// Corner-flagged trajectories (excluded from `n`).
    pub corner_events: u64,
    /// Particles still inside at `t_max`.
    pub censored: u64,
    pub seed: u64,
    pub t_max: f64,
}

impl SurvivalCurve {
    pub fn new_edges(t_min: f64, t_max: f64, bins: usize) -> Vec<f64> {
        let l0 = fmath::ln(t_min);
        let l1 = fmath::ln(t_max);
        (0..bins)
            .map(|i| fmath::exp(l0 + (l1 - l0) * i as f64 / (bins - 1) as f64))
            .collect()
    }

    pub fn empty(edges: Vec<f64>, seed: u64, t_max: f64) -> Self {
        let k = edges.len();
        SurvivalCurve {
            edges,
            survivors: alloc::vec![0; k],
            n: 0,
            corner_events: 0,
            censored: 0,
            seed,
            t_max,
        }
    }

    pub fn record(&mut self, rec: &EscapeRecord) {
        if rec.corner {
            self.corner_events += 1;
            return;
        }
        self.n += 1;
        if !rec.escaped {
            self.censored += 1;
        }
        for (i, e) in self.edges.iter().enumerate() {
            if rec.time > *e {
                self.survivors[i] += 1;
            } else {
                break;
            }
        }
    }

    /// Deterministic merge of disjoint particle ranges.
    pub fn merge(&mut self, other: &SurvivalCurve) {
        debug_assert_eq!(self.edges.len(), other.edges.len());
        for (a, b) in self.survivors.iter_mut().zip(&other.survivors) {
            *a += *b;
        }
        self.n += other.n;
        self.corner_events += other.corner_events;
        self.censored += other.censored;
    }

    /// Survivor fraction at `edges[i]`.
    pub fn fraction(&self, i: usize) -> f64 {
        self.survivors[i] as f64 / self.n as f64
    }

    /// Binomial standard error of `fraction(i)`.
    pub fn stderr(&self, i: usize) -> f64 {
        let f = self.fraction(i);
        fmath::sqrt((f * (1.0 - f) / self.n as f64).max(0.0))
    }
}

/// Serial kernel over the particle index range `[first, first + count)`.
pub fn survival_curve_range(
    model: &BoundaryModel,
    seed: u64,
    first: u64,
    count: u64,
    edges: &[f64],
    t_max: f64,
) -> SurvivalCurve {
    let mut curve = SurvivalCurve::empty(edges.to_vec(), seed, t_max);
    for idx in first..first + count {
        let mut rng = particle_rng(seed, idx);
        let ic = sample_ergodic_ic(&mut rng, model);
        let rec = evolve_until_escape(model, &ic, t_max);
        curve.record(&rec);
    }
    curve
}

// ---------------------------------------------------------------------------
// circle-with-slit map (image-reconstruction picture of the hat)
// ---------------------------------------------------------------------------

/// Does the chord from angle `phi` to `phi'` cross the open slit
/// `{ y = 0, |x| < rho }` of the unit circle?
#[inline]
pub fn chord_crosses_slit(rho: f64, phi: f64, phi_next: f64) -> bool {
    let (y1, y2) = (fmath::sin(phi), fmath::sin(phi_next));
    if y1 * y2 >= 0.0 {
        // endpoint exactly on the base line: measure zero; count a crossing
        // only if the endpoint sits inside the stem opening
        if y1 == 0.0 && fmath::abs(fmath::cos(phi)) < rho {
            return true;
        }
        if y2 == 0.0 && fmath::abs(fmath::cos(phi_next)) < rho {
            return true;
        }
        return false;
    }
    let (x1, x2) = (fmath::cos(phi), fmath::cos(phi_next));
    let s = y1 / (y1 - y2);
    let xc = x1 + s * (x2 - x1);
    fmath::abs(xc) < rho
}

/// Survive at least `n` collisions of the circle map with slit absorption?
pub fn slit_survives(rho: f64, phi0: f64, theta: f64, n: u64) -> bool {
    let mut phi = phi0;
    let step = PI - 2.0 * theta;
    for _ in 0..n {
        let next = phi + step;
        if chord_crosses_slit(rho, phi, next) {
            return false;
        }
        phi = fmath::rem_euclid(next, 2.0 * PI);
    }
    true
}

/// Initial conditions near the island boundary (`phi` uniform in `(0, 2 pi)`,
/// `theta` uniform in `(0, arcsin rho)`) surviving at least `n` collisions.
/// Returns `(phi, sin_theta)` pairs.
pub fn survivor_phase_map(rho: f64, n: u64, samples: u64, seed: u64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let theta_max = fmath::asin(rho);
    for idx in 0..samples {
        let mut rng = particle_rng(seed, idx);
        let phi = uniform(&mut rng) * 2.0 * PI;
        let theta = uniform(&mut rng) * theta_max;
        if slit_survives(rho, phi, theta, n) {
            out.push((phi, fmath::sin(theta)));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// long-orbit diagnostics
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Diagnostics {
    pub mean_free_path: f64,
    /// Kolmogorov-Smirnov distance of the empirical z marginal against the
    /// ergodic-component invariant measure.
    pub ks_z: f64,
    /// Same for the sin(theta) marginal.
    pub ks_sin_theta: f64,
    pub collisions: u64,
    pub corner_events: u64,
}

/// Analytic CDF of the `z` marginal of the ergodic invariant measure.
fn z_marginal_cdf(model: &BoundaryModel, z: f64) -> f64 {
    let r_hat = model.spec.hat_radius;
    let r = model.spec.stem_half_width;
    let rho = model.rho();
    // un-normalised cumulative mass up to arclength z
    let mut acc = 0.0;
    let mut total = 0.0;
    for seg in &model.segments {
        let take = (z - seg.z0).clamp(0.0, seg.len);
        use crate::geometry::SegmentRole::*;
        let (m_take, m_full) = match seg.role {
            HatArc => (2.0 * rho * take, 2.0 * rho * seg.len),
            HatBaseLeft | HatBaseRight => {
                // density 2 (1 - sqrt(1 - r^2/x^2)) at centre distance x;
                // integral: 2 [x - (sqrt(x^2-r^2) - r arccos(r/x))]
                let anti = |x: f64| {
                    let x = x.max(r);
                    2.0 * (x - (fmath::sqrt((x * x - r * r).max(0.0))
                        - r * fmath::acos((r / x).clamp(-1.0, 1.0))))
                };
                // both base segments run from centre distance r_hat down to r
                // or r up to r_hat; local arclength maps linearly to x
                let (x0, x1) = match seg.role {
                    HatBaseLeft => (r_hat, r_hat - seg.len), // |x| decreasing
                    _ => (r, r + seg.len),
                };
                let x_take = x0 + (x1 - x0) * take / seg.len;
                let f = |a: f64, b: f64| fmath::abs(anti(b.max(a.min(b))) - anti(a.min(b).min(b))).max(0.0);
                let _ = f;
                let m_t = fmath::abs(anti(x_take) - anti(x0));
                let m_f = fmath::abs(anti(x1) - anti(x0));
                (m_t, m_f)
            }
            _ => (2.0 * take, 2.0 * seg.len),
        };
        acc += m_take;
        total += m_full;
    }
    acc / total
}

/// Analytic CDF of the `sin(theta)` marginal of the ergodic measure.
fn sin_theta_marginal_cdf(model: &BoundaryModel, sigma: f64) -> f64 {
    let r_hat = model.spec.hat_radius;
    let r = model.spec.stem_half_width;
    let rho = model.rho();
    let stem_len: f64 = model
        .segments
        .iter()
        .filter(|s| !s.role.is_hat())
        .map(|s| s.len)
        .sum();
    // density h(s) = stem_len + pi R [|s| <= rho] + 2 (min(R, r/sqrt(1-s^2)) - r)+
    // integrate from -1 to sigma
    let anti = |s: f64| {
        // antiderivative of the base term 2*(min(R, r/sqrt(1-s^2)) - r)
        // pieces: |s| >= sqrt(1-rho^2): 2 (R - r); else 2 (r/sqrt(1-s^2) - r)
        let s_c = fmath::sqrt(1.0 - rho * rho);
        let f_inner = |x: f64| 2.0 * (r * fmath::asin(x) - r * x);
        if s <= -s_c {
            2.0 * (r_hat - r) * (s + 1.0)
        } else if s < s_c {
            2.0 * (r_hat - r) * (1.0 - s_c) + f_inner(s) - f_inner(-s_c)
        } else {
            2.0 * (r_hat - r) * (1.0 - s_c)
                + f_inner(s_c) - f_inner(-s_c)
                + 2.0 * (r_hat - r) * (s - s_c)
        }
    };
    let arc = |s: f64| PI * r_hat * ((s.clamp(-rho, rho)) + rho);
    let stem = |s: f64| stem_len * (s + 1.0);
    let total = stem(1.0) + arc(1.0) + anti(1.0);
    (stem(sigma) + arc(sigma) + anti(sigma)) / total
}

fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut worst = 0.0f64;
    for (i, x) in samples.iter().enumerate() {
        let f = cdf(*x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        worst = worst.max(fmath::abs(f - lo)).max(fmath::abs(hi - f));
    }
    worst
}

/// Follow one chaotic orbit for `n_collisions` and report the empirical mean
/// free path plus KS distances of both Birkhoff marginals against the
/// analytic ergodic measure.
pub fn diagnostics(model: &BoundaryModel, n_collisions: u64, seed: u64) -> Diagnostics {
    let mut rng = particle_rng(seed, 0);
    let ic = sample_ergodic_ic(&mut rng, model);
    let mut state = model.from_birkhoff(&ic);
    let mut zs: Vec<f64> = Vec::with_capacity(n_collisions as usize);
    let mut sines: Vec<f64> = Vec::with_capacity(n_collisions as usize);
    let mut total_time = 0.0;
    let mut corners = 0u64;
    let mut done = 0u64;
    while done < n_collisions {
        match model.next_collision(&state) {
            Ok(hit) => {
                total_time += hit.flight_time;
                let seg = &model.segments[hit.segment];
                let (_, (tx, ty)) = seg.point_tangent(hit.param);
                // record the incoming state's Birkhoff coordinates
                let sin_theta = hit.state.dx * tx + hit.state.dy * ty;
                zs.push(seg.z0 + hit.param);
                sines.push(sin_theta);
                state = hit.state;
                done += 1;
            }
            Err(_) => {
                // corner: restart from a fresh ergodic draw, keep counting
                corners += 1;
                state = model.from_birkhoff(&sample_ergodic_ic(&mut rng, model));
            }
        }
    }
    let ks_z = ks_distance(&mut zs, |z| z_marginal_cdf(model, z));
    let ks_s = ks_distance(&mut sines, |s| sin_theta_marginal_cdf(model, s));
    Diagnostics {
        mean_free_path: total_time / n_collisions as f64,
        ks_z,
        ks_sin_theta: ks_s,
        collisions: n_collisions,
        corner_events: corners,
    }
}
