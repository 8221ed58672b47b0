//! MUPO enumeration and stickiness classification.
//!
//! An orbit family `(s, j)` (period `s >= 3`, rotation number `j` coprime to
//! `s`) is marginally unstable exactly when
//!
//! ```text
//! alpha_sj = cos(j pi / s)  <=  rho  <  cos(j pi / s) / cos(pi / (lambda s)) = beta_sj
//! ```
//!
//! with `lambda = 1` for even `s` and `2` for odd `s`. Membership is always
//! decided through this exact inequality; the truncated quadratic-shrinkage
//! form is used only to prune candidates. Near-boundary cases escalate from
//! `f64` to double-double and, when the input is an exact `theta* =
//! arccos(rho)/pi`, to exact integer arithmetic, so nothing within 1e-15 of
//! an interval endpoint is classified silently.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use crate::contfrac::{self, CfError, CfTail, ContinuedFraction, QuadraticSurd, Rational};
use crate::dd::{self, Dd};
use crate::fmath;

const PI: f64 = core::f64::consts::PI;
/// Escalate from f64 to double-double below this margin.
const F64_MARGIN: f64 = 1e-12;
/// Below this double-double margin only exact arithmetic may decide.
const DD_MARGIN: f64 = 1e-25;

#[derive(Clone, Debug, PartialEq)]
pub enum MupoError {
    /// `k_bound` precondition on `Q` (or `q >= Q`) violated.
    Domain(String),
    /// A membership margin below certified precision with no exact input.
    NearBoundary { s: u64, j: u64 },
    Cf(CfError),
    UnsupportedAlpha,
}

impl fmt::Display for MupoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MupoError::Domain(s) => write!(f, "domain error: {s}"),
            MupoError::NearBoundary { s, j } => write!(
                f,
                "orbit ({s}, {j}) is within uncertified distance of its interval endpoint"
            ),
            MupoError::Cf(e) => write!(f, "{e}"),
            MupoError::UnsupportedAlpha => write!(f, "operation requires alpha = 1/2"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for MupoError {}

impl From<CfError> for MupoError {
    fn from(e: CfError) -> Self {
        MupoError::Cf(e)
    }
}

/// Control parameter, either a plain double or an exact `theta*`.
///
/// The paper's exact examples always specify `theta* = arccos(rho)/pi`
/// (rational or quadratic surd), never `rho` itself: `arccos` of a surd is
/// generically transcendental, so exactness lives on the `theta*` side.
#[derive(Clone, Debug)]
pub enum RhoSpec {
    Plain(f64),
    /// `theta*` as an exact rational or quadratic surd in `(0, 1/2)`.
    ThetaStar(QuadraticSurd),
}

impl RhoSpec {
    pub fn theta_star_exact(&self) -> Option<&QuadraticSurd> {
        match self {
            RhoSpec::Plain(_) => None,
            RhoSpec::ThetaStar(t) => Some(t),
        }
    }

    pub fn rho_dd(&self) -> Dd {
        match self {
            RhoSpec::Plain(r) => Dd::from_f64(*r),
            RhoSpec::ThetaStar(t) => match t.as_rational() {
                Some(r) => dd::cos_pi_ratio(&r),
                None => dd::cos_pi_dd(t.to_dd()),
            },
        }
    }

    pub fn rho(&self) -> f64 {
        self.rho_dd().to_f64()
    }
}

/// Hat angular fraction `alpha` as an exact small rational.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HatFraction {
    pub num: u32,
    pub den: u32,
}

impl HatFraction {
    pub const HALF: HatFraction = HatFraction { num: 1, den: 2 };

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_half(&self) -> bool {
        2 * self.num == self.den
    }
}

/// One marginally unstable periodic-orbit family of the semicircular hat.
#[derive(Clone, Debug, PartialEq)]
pub struct Mupo {
    pub s: u64,
    pub j: u64,
    /// 1 for even `s`, 2 for odd `s`.
    pub lambda: u8,
    pub alpha_sj: f64,
    pub beta_sj: f64,
    /// Incidence angle `pi/2 - j pi / s`.
    pub theta_sj: f64,
    /// `cos(j pi / s) = rho` exactly: the orbit sits on the island border
    /// and can only be perturbed from one side.
    pub boundary: bool,
    /// Smaller of the certified distances to the two interval endpoints.
    pub margin: f64,
}

impl Mupo {
    pub fn key(&self) -> (u64, u64) {
        (self.s, self.j)
    }
}

/// One solution of the generalized (variable hat size) condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralOrbit {
    pub q: u64,
    pub p: u64,
    pub boundary: bool,
}

impl GeneralOrbit {
    /// Map a generalized `alpha = 1/2` orbit back to the simple-mushroom
    /// `(s, j)` labels: `p/q = 2j/s` in lowest terms.
    pub fn to_simple(&self) -> (u64, u64) {
        if self.p % 2 == 0 {
            (self.q, self.p / 2) // odd q
        } else {
            (2 * self.q, self.p)
        }
    }
}

fn lambda_of(s: u64) -> u8 {
    if s % 2 == 0 {
        1
    } else {
        2
    }
}

fn j_max(s: u64) -> u64 {
    if s % 2 == 0 {
        s / 2 - 1
    } else {
        (s - 1) / 2
    }
}

enum Membership {
    Out,
    In { boundary: bool, margin: f64 },
}

/// Exact-inequality membership test with staged precision.
fn membership(
    rho_dd: Dd,
    num: u64,
    den: u64,
    gap: (u64, u64),
    exact_theta: Option<&QuadraticSurd>,
) -> Result<Membership, MupoError> {
    // interval: cos(pi num/den) <= rho < cos(pi num/den)/cos(pi gnum/gden)
    let a = fmath::cos(PI * num as f64 / den as f64);
    let b = a / fmath::cos(PI * gap.0 as f64 / gap.1 as f64);
    let rho_f = rho_dd.to_f64();
    let ml = rho_f - a;
    let mr = b - rho_f;
    if ml > F64_MARGIN && mr > F64_MARGIN {
        return Ok(Membership::In {
            boundary: false,
            margin: ml.min(mr),
        });
    }
    if ml < -F64_MARGIN || mr < -F64_MARGIN {
        return Ok(Membership::Out);
    }
    // double-double pass
    let a_dd = dd::cos_pi_frac(num, den);
    let b_dd = a_dd.div(dd::cos_pi_frac(gap.0, gap.1));
    let ml_dd = rho_dd.sub(a_dd).to_f64();
    let mr_dd = b_dd.sub(rho_dd).to_f64();
    if ml_dd > DD_MARGIN && mr_dd > DD_MARGIN {
        return Ok(Membership::In {
            boundary: false,
            margin: ml_dd.min(mr_dd),
        });
    }
    if ml_dd < -DD_MARGIN || mr_dd < -DD_MARGIN {
        return Ok(Membership::Out);
    }
    // only the left endpoint can genuinely tie: cos(pi num/den) = rho
    // iff num/den = theta* (exactly decidable for exact inputs)
    if fmath::abs(ml_dd) <= DD_MARGIN {
        if let Some(theta) = exact_theta {
            let frac = Ratio::new(BigInt::from(num), BigInt::from(den));
            return Ok(match theta.cmp_rational(&frac) {
                Ordering::Equal => Membership::In {
                    boundary: true,
                    margin: 0.0,
                },
                // rho < alpha_sj exactly
                Ordering::Greater => Membership::Out,
                Ordering::Less => Membership::In {
                    boundary: false,
                    margin: ml_dd.max(0.0),
                },
            });
        }
        // inexact input equal to the endpoint at dd precision: call it the
        // boundary orbit rather than misclassifying either way
        return Ok(Membership::In {
            boundary: true,
            margin: 0.0,
        });
    }
    // right endpoint tie without exact input
    Err(MupoError::NearBoundary { s: den, j: num })
}

/// All MUPOs `(s, j)` with `s <= s_max`, sorted by `s` then `j`.
pub fn enumerate_mupos(rho: &RhoSpec, s_max: u64) -> Result<Vec<Mupo>, MupoError> {
    let rho_dd = rho.rho_dd();
    let rho_f = rho_dd.to_f64();
    if !(rho_f > 0.0 && rho_f < 1.0) {
        return Err(MupoError::Domain(format!("rho = {rho_f} outside (0, 1)")));
    }
    let theta_star = fmath::acos(rho_f) / PI;
    // theta*(pi/den) as exact value for endpoint ties: here we compare j/s
    // against theta* itself
    let exact = rho.theta_star_exact();
    let mut out = Vec::new();
    for s in 3..=s_max {
        let lam = lambda_of(s) as u64;
        let jm = j_max(s);
        // the interval is ~ pi cot / (2 lam^2 s^2) wide, so j must sit just
        // above s theta*; keep a generous pruning window
        let centre = s as f64 * theta_star;
        let j_lo = (fmath::floor(centre) as i64 - 1).max(1) as u64;
        let j_hi = (fmath::ceil(centre) as u64 + 2).min(jm);
        for j in j_lo..=j_hi {
            if j > jm || s.gcd(&j) != 1 {
                continue;
            }
            match membership(rho_dd, j, s, (1, lam * s), exact)? {
                Membership::Out => {}
                Membership::In { boundary, margin } => {
                    let theta = PI / 2.0 - j as f64 * PI / s as f64;
                    let a = fmath::cos(j as f64 * PI / s as f64);
                    out.push(Mupo {
                        s,
                        j,
                        lambda: lambda_of(s),
                        alpha_sj: a,
                        beta_sj: a / fmath::cos(PI / (lam * s) as f64),
                        theta_sj: theta,
                        boundary,
                        margin,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Generalized-mushroom MUPO condition (hat fraction `alpha`), Eq-(6)-style:
/// coprime `(p, q)` with `cos(alpha p pi / q) <= rho < cos(alpha p pi / q) /
/// cos(alpha pi / q)`, `q <= q_max`.
pub fn enumerate_mupos_generalized(
    rho: &RhoSpec,
    alpha: HatFraction,
    q_max: u64,
) -> Result<Vec<GeneralOrbit>, MupoError> {
    let rho_dd = rho.rho_dd();
    let rho_f = rho_dd.to_f64();
    if !(rho_f > 0.0 && rho_f < 1.0) {
        return Err(MupoError::Domain(format!("rho = {rho_f} outside (0, 1)")));
    }
    let av = alpha.value();
    let theta_star = fmath::acos(rho_f) / PI;
    let xi = theta_star / av; // p/q approximates this from above
    // the left-endpoint tie cos(alpha p pi / q) = rho is exactly
    // alpha p / q = theta*
    let exact_theta = rho.theta_star_exact();
    let mut out = Vec::new();
    for q in 2..=q_max {
        let centre = q as f64 * xi;
        let j_lo = (fmath::floor(centre) as i64 - 1).max(1) as u64;
        let j_hi = fmath::ceil(centre) as u64 + 2;
        for p in j_lo..=j_hi {
            // need a positive incidence angle: alpha p / q < 1/2
            if 2 * alpha.num as u64 * p >= alpha.den as u64 * q {
                continue;
            }
            if q.gcd(&p) != 1 {
                continue;
            }
            // cos(alpha p pi / q): rational multiple of pi
            let num = alpha.num as u64 * p;
            let den = alpha.den as u64 * q;
            let g = num.gcd(&den);
            let gnum = alpha.num as u64;
            let gden = alpha.den as u64 * q;
            let gg = gnum.gcd(&gden);
            match membership(rho_dd, num / g, den / g, (gnum / gg, gden / gg), exact_theta)? {
                Membership::Out => {}
                Membership::In { boundary, .. } => out.push(GeneralOrbit { q, p, boundary }),
            }
        }
    }
    Ok(out)
}

/// Rigorous one-sided tolerance bound `K(q, Q)`: main term plus the Taylor
/// remainder bound `R2_hat(q, Q)`; valid for `q >= Q` with `Q` above the
/// stated threshold. Monotone nonincreasing in `q`.
pub fn k_bound(rho: f64, alpha: f64, q: f64, big_q: f64) -> Result<f64, MupoError> {
    let q_min = k_bound_min_q(rho, alpha);
    if !(big_q > q_min) {
        return Err(MupoError::Domain(format!(
            "Q = {big_q} must exceed max(alpha pi, (alpha pi / cos 1) sqrt(rho/(1-rho))) = {q_min}"
        )));
    }
    if q < big_q {
        return Err(MupoError::Domain(format!("q = {q} must be >= Q = {big_q}")));
    }
    Ok(k_main_term(rho, alpha) + r2_hat(rho, alpha, q, big_q))
}

/// Leading term `alpha pi rho / (2 sqrt(1 - rho^2))` (the `q -> inf` limit).
pub fn k_main_term(rho: f64, alpha: f64) -> f64 {
    alpha * PI * rho / (2.0 * fmath::sqrt(1.0 - rho * rho))
}

/// Lower threshold on `Q` for the remainder bound to be valid.
pub fn k_bound_min_q(rho: f64, alpha: f64) -> f64 {
    let a = alpha * PI;
    let b = a / fmath::cos(1.0) * fmath::sqrt(rho / (1.0 - rho));
    a.max(b)
}

/// Taylor-remainder bound `R2_hat(q, Q)`.
pub fn r2_hat(rho: f64, alpha: f64, q: f64, big_q: f64) -> f64 {
    let ap = alpha * PI;
    let cq = fmath::cos(ap / big_q);
    let cq2 = cq * cq;
    let tq = fmath::tan(ap / big_q);
    let rho2 = rho * rho;
    let s = fmath::sqrt(1.0 - rho2);
    let pref = ap * ap / (cq2 * q * q);
    let t1 = (tq * tq + 4.0 / 3.0) * rho / s;
    let t2 = rho2 * rho / (2.0 * s * s * s);
    let inner = 1.0 + ap * ap / (cq2 * q * q);
    let t3 = (1.0 + ap * ap / (cq2 * big_q * big_q)) * rho2 * rho
        / (2.0 * cq2 * fmath::sqrt(fmath::powi(1.0 - rho2 * inner * inner, 3).max(0.0)));
    pref * (t1 + t2 + t3)
}

/// Root of the Eq-(15) sufficient condition `K = 1/(wp + 2)` in the
/// `Q -> inf` limit: the largest `rho` certified MUPO-free by bounded even
/// partial quotients `max(a_{2n}) = wp`.
pub fn eq15_threshold(alpha: f64, wp: u64) -> f64 {
    let x = 2.0 / ((wp as f64 + 2.0) * alpha * PI);
    x / fmath::sqrt(1.0 + x * x)
}

/// Eq-(15) sufficient condition: `K(Q, Q) < 1/(max(a_{2n}) + 2)` together
/// with exhaustive emptiness up to `Q`.
///
/// Note: for `alpha <= 1/2` this test never fires. Bounded even quotients
/// `wp` force `xi = theta*/alpha` below `(wp+1)/(wp+2)`, which keeps the
/// main term above `(pi^2/8)/(wp+2) > 1/(wp+2)`; the condition is strictly
/// weaker than the convergent certificate used by `classify`. It is kept
/// for contract fidelity and for exploring other parameter ranges.
pub fn mupo_free_sufficient(
    xi_cf: &ContinuedFraction,
    rho: &RhoSpec,
    alpha: HatFraction,
    big_q: u64,
) -> Result<bool, MupoError> {
    let wp = xi_cf.max_even_quotient()?;
    let rho_f = rho.rho();
    let k = k_bound(rho_f, alpha.value(), big_q as f64, big_q as f64)?;
    let wp_f = match wp.to_f64() {
        Some(v) => v,
        None => return Ok(false), // astronomically large quotient defeats the bound
    };
    if !(k < 1.0 / (wp_f + 2.0)) {
        return Ok(false);
    }
    Ok(enumerate_mupos_generalized(rho, alpha, big_q)?.is_empty())
}

/// Exact `K_n = (zeta_{n+1} + B_{n-1}/B_n)^{-1}` for odd `n`; satisfies
/// `B_n^2 (A_n/B_n - xi) = K_n` exactly.
pub fn odd_convergent_k(cf: &ContinuedFraction, n: usize) -> Result<QuadraticSurd, CfError> {
    if n % 2 == 0 || n == 0 {
        return Err(CfError::IndexOutOfRange);
    }
    let pairs = cf.convergent_pairs(n)?;
    let (_, bn) = &pairs[n];
    let (_, bn1) = &pairs[n - 1];
    let zeta = cf.complete_quotient(n + 1)?;
    let sum = zeta.add_rational(&Ratio::new(bn1.clone(), bn.clone()));
    sum.recip()
}

/// Exact `Kbar_n(c) = (zeta_{n+2} - c)(c + B_n/B_{n+1}) / (zeta_{n+2} +
/// B_n/B_{n+1})` for odd `n` and `1 <= c < a_{n+2}`.
pub fn intermediate_k(cf: &ContinuedFraction, n: usize, c: u64) -> Result<QuadraticSurd, CfError> {
    if n % 2 == 0 {
        return Err(CfError::IndexOutOfRange);
    }
    let a_next = cf.partial_quotient(n + 2)?;
    if c < 1 || BigInt::from(c) >= a_next {
        return Err(CfError::InvalidC);
    }
    let pairs = cf.convergent_pairs(n + 1)?;
    let (_, bn) = &pairs[n];
    let (_, bn1) = &pairs[n + 1];
    let y = Ratio::new(bn.clone(), bn1.clone());
    let zeta = cf.complete_quotient(n + 2)?;
    let cr = Ratio::from_integer(BigInt::from(c));
    let num = zeta
        .add_rational(&-cr.clone())
        .mul_rational(&(cr + &y));
    num.div(&zeta.add_rational(&y))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SufficientCondition {
    /// Bounded even partial quotients, Eq-(15) style.
    Eq15EvenQuotientBound,
    /// Worked convergent/intermediate-convergent certificate.
    ConvergentCertificate,
}

/// Outcome of the stickiness classification for one `(theta*, alpha)`.
#[derive(Clone, Debug)]
pub enum StickinessClass {
    MupoFreeCertified {
        checked_to: u64,
        sufficient_condition: SufficientCondition,
    },
    FinitelySticky {
        set: Vec<GeneralOrbit>,
    },
    InfinitelySticky {
        witness: String,
        found: Vec<GeneralOrbit>,
    },
    UndecidedUpTo {
        q: u64,
        found: Vec<GeneralOrbit>,
    },
}

/// Classify the stickiness of the hat for an exact `theta*`.
///
/// Rational `theta*/alpha` always yields `FinitelySticky` with the complete
/// solution set. Surd inputs run the convergent/intermediate-convergent
/// certification beyond the exhaustive scan range `Q`.
pub fn classify(
    theta_star: &QuadraticSurd,
    alpha: HatFraction,
    big_q: u64,
) -> Result<StickinessClass, MupoError> {
    let rho_spec = RhoSpec::ThetaStar(theta_star.clone());
    let rho_f = rho_spec.rho();
    if !(rho_f > 0.0 && rho_f < 1.0) {
        return Err(MupoError::Domain(format!("rho = {rho_f} outside (0, 1)")));
    }
    let av = alpha.value();
    let kqq = k_bound(rho_f, av, big_q as f64, big_q as f64)?;
    let xi = theta_star.mul_rational(&Ratio::new(
        BigInt::from(alpha.den),
        BigInt::from(alpha.num),
    ));
    let found = enumerate_mupos_generalized(&rho_spec, alpha, big_q)?;

    if let Some(xi_rat) = xi.as_rational() {
        // complete set: beyond q* = max(Q, b, K(Q,Q) b) the gap 1/(q b)
        // exceeds the window K/q^2 and only p/q = xi itself could qualify
        let b = xi_rat.denom().to_u64().ok_or_else(|| {
            MupoError::Domain(String::from("theta* denominator exceeds u64 range"))
        })?;
        let q_star = (b.max(big_q)).max(fmath::ceil(kqq * b as f64) as u64 + 1);
        let set = enumerate_mupos_generalized(&rho_spec, alpha, q_star)?;
        return Ok(StickinessClass::FinitelySticky { set });
    }

    let cf = contfrac::expand(&xi, 4096)?;
    debug_assert_eq!(*cf.tail(), CfTail::Periodic);
    match certify_beyond(&cf, &xi, rho_f, alpha, big_q)? {
        TailOutcome::AllExcluded => {
            if found.is_empty() {
                let cond = if mupo_free_sufficient(&cf, &rho_spec, alpha, big_q).unwrap_or(false) {
                    SufficientCondition::Eq15EvenQuotientBound
                } else {
                    SufficientCondition::ConvergentCertificate
                };
                Ok(StickinessClass::MupoFreeCertified {
                    checked_to: big_q,
                    sufficient_condition: cond,
                })
            } else {
                Ok(StickinessClass::FinitelySticky { set: found })
            }
        }
        TailOutcome::InfinitelyMany(witness) => {
            Ok(StickinessClass::InfinitelySticky { witness, found })
        }
        TailOutcome::Unknown => Ok(StickinessClass::UndecidedUpTo { q: big_q, found }),
    }
}

enum TailOutcome {
    AllExcluded,
    InfinitelyMany(String),
    Unknown,
}

/// Certify whether any odd-side convergent or intermediate convergent with
/// denominator `> Q` can satisfy the one-sided window, automating the
/// worked-example argument: exact `K_n`/`Kbar_n(c)` values for moderate `n`,
/// then residue-class limits (exact surds) with rigorous cylinder bounds for
/// the tail.
fn certify_beyond(
    cf: &ContinuedFraction,
    xi: &QuadraticSurd,
    rho: f64,
    alpha_frac: HatFraction,
    big_q: u64,
) -> Result<TailOutcome, MupoError> {
    let alpha = alpha_frac.value();
    let main = k_main_term(rho, alpha);
    let pre_len = cf.pre_period().len();
    let period = cf.period().to_vec();
    let plen = period.len();

    // walk odd n until B_n is far beyond Q and every residue class has
    // stabilised; collect exact checks along the way
    let mut n_examined = 0usize;
    let b_cap = BigInt::from(big_q) * BigInt::from(1_000_000u64);
    let mut pairs = cf.convergent_pairs(3)?;
    let mut n = 1usize;
    let big_q_big = BigInt::from(big_q);
    loop {
        if n + 2 >= pairs.len() {
            pairs = cf.convergent_pairs(n + 8)?;
        }
        let (an, bn) = pairs[n].clone();
        if bn > big_q_big {
            // exact K_n versus K(B_n, Q)
            let kn = odd_convergent_k(cf, n)?;
            let bnf = dd::ratio_to_f64(&Ratio::from_integer(bn.clone()));
            let kbound = k_bound(rho, alpha, bnf, big_q as f64)?;
            if !surd_exceeds(&kn, kbound) {
                // candidate: verify the true inequality at (q, p) = (B_n, A_n)
                if true_solution(xi, rho, alpha_frac, &an, &bn) {
                    return Ok(TailOutcome::InfinitelyMany(format!(
                        "odd convergent A_{n}/B_{n} = {an}/{bn} satisfies the window"
                    )));
                }
                // excluded by the exact inequality but not by K; keep going
            }
            // intermediates anchored at this n
            let a_next = cf.partial_quotient(n + 2)?;
            if a_next > BigInt::one() {
                let (an1, bn1) = pairs[n + 1].clone();
                let mut c = BigInt::one();
                while c < a_next {
                    if let Some(cu) = c.to_u64() {
                        let q_int = &c * &bn1 + &bn;
                        if q_int > big_q_big {
                            let kb = intermediate_k(cf, n, cu)?;
                            let qf = dd::ratio_to_f64(&Ratio::from_integer(q_int.clone()));
                            let kbound = k_bound(rho, alpha, qf, big_q as f64)?;
                            if !surd_exceeds(&kb, kbound) {
                                let p_int = &c * &an1 + &an;
                                if true_solution(xi, rho, alpha_frac, &p_int, &q_int) {
                                    return Ok(TailOutcome::InfinitelyMany(format!(
                                        "intermediate convergent at n = {n}, c = {c}"
                                    )));
                                }
                            }
                        }
                    }
                    c += 1u8;
                }
            }
            n_examined += 1;
        }
        if bn > b_cap && n_examined >= 2 * plen + 4 {
            break;
        }
        n += 2;
        if n > 4000 {
            return Ok(TailOutcome::Unknown);
        }
    }

    // residue-class tail: for odd m > n the ratio B_{m-1}/B_m lies within
    // delta of the reversed-period limit x_res; K_m >= 1/(zeta + x_res + delta)
    let n_stab = n;
    let (_, b_stab) = pairs[n_stab].clone();
    let b_stab_f = dd::ratio_to_f64(&Ratio::from_integer(b_stab));
    let k_tail_bound = k_bound(rho, alpha, b_stab_f, big_q as f64)?;
    let shared = n_stab.saturating_sub(pre_len + plen).max(2);
    let delta = fibonacci_cylinder_halfwidth(shared);
    for r in 0..plen {
        // an odd index in this residue class beyond n_stab
        let m = match first_odd_index_in_class(pre_len, plen, r, n_stab) {
            Some(m) => m,
            None => continue, // class never carries odd convergents
        };
        let zeta = cf.complete_quotient(m + 1)?;
        let x_res = reversed_period_limit(&period, pre_len, m)?;
        let lower = zeta
            .add(&x_res)?
            .add_rational(&delta)
            .recip()
            .map_err(MupoError::Cf)?;
        if !surd_exceeds(&lower, k_tail_bound) {
            // limit comparison: below the main term means infinitely many
            // true solutions; inside [main, K] stays undecided
            let limit = zeta.add(&x_res)?.recip().map_err(MupoError::Cf)?;
            if !surd_exceeds(&limit, main - 1e-15) {
                return Ok(TailOutcome::InfinitelyMany(format!(
                    "limit K for residue {r} falls below the main term {main}"
                )));
            }
            return Ok(TailOutcome::Unknown);
        }
        // intermediates: concave in c, so endpoints c = 1 and a_{n+2}-1
        let a_next = cf.partial_quotient(m + 2)?;
        if a_next > BigInt::one() {
            let y_res = reversed_period_limit(&period, pre_len, m + 1)?;
            let y_lo = y_res.add_rational(&-delta.clone());
            let a_next_u = a_next.to_u64().unwrap_or(u64::MAX);
            for c in [1u64, a_next_u - 1] {
                let zeta2 = cf.complete_quotient(m + 2)?;
                let cr = Ratio::from_integer(BigInt::from(c));
                let kbar_lo = zeta2
                    .add_rational(&-cr.clone())
                    .mul(&y_lo.add_rational(&cr))?
                    .div(&zeta2.add(&y_lo)?)
                    .map_err(MupoError::Cf)?;
                if !surd_exceeds(&kbar_lo, k_tail_bound) {
                    let limit = zeta2
                        .add_rational(&-Ratio::from_integer(BigInt::from(c)))
                        .mul(&y_res.add_rational(&Ratio::from_integer(BigInt::from(c))))?
                        .div(&zeta2.add(&y_res)?)
                        .map_err(MupoError::Cf)?;
                    if !surd_exceeds(&limit, main - 1e-15) {
                        return Ok(TailOutcome::InfinitelyMany(format!(
                            "limit Kbar(c = {c}) for residue {r} falls below the main term"
                        )));
                    }
                    return Ok(TailOutcome::Unknown);
                }
            }
        }
    }
    Ok(TailOutcome::AllExcluded)
}

/// Does the exact surd strictly exceed the float bound (double-double
/// comparison with a safety margin)?
fn surd_exceeds(value: &QuadraticSurd, bound: f64) -> bool {
    value.to_dd().sub(Dd::from_f64(bound)).to_f64() > 1e-22
}

/// Exact check of the generalized inequality at a specific fraction `p/q`.
fn true_solution(xi: &QuadraticSurd, rho: f64, alpha: HatFraction, p: &BigInt, q: &BigInt) -> bool {
    // left side exact: p/q >= xi
    let frac = Ratio::new(p.clone(), q.clone());
    if xi.cmp_rational(&frac) == Ordering::Greater {
        return false;
    }
    // right side in double-double: rho < cos(alpha p pi / q)/cos(alpha pi / q)
    let alpha_rat = Ratio::new(BigInt::from(alpha.num), BigInt::from(alpha.den));
    let apq = Ratio::new(p.clone(), q.clone()) * &alpha_rat;
    let a = dd::cos_pi_ratio(&apq);
    let gap = dd::cos_pi_ratio(&(alpha_rat / Ratio::from_integer(q.clone())));
    let beta = a.div(gap);
    beta.sub(Dd::from_f64(rho)).to_f64() > 0.0
}

/// Smallest odd index `m > after` with `(m - pre_len) % plen == r`, or `None`
/// when that residue class only ever occurs at even indices.
fn first_odd_index_in_class(pre_len: usize, plen: usize, r: usize, after: usize) -> Option<usize> {
    let mut m = pre_len + r;
    while m <= after {
        m += plen;
    }
    if m % 2 == 1 {
        return Some(m);
    }
    if plen % 2 == 1 {
        return Some(m + plen);
    }
    None
}

/// Value of the infinite reversed-period continued fraction approached by
/// `B_{m-1}/B_m` for indices `m` in a fixed residue class.
fn reversed_period_limit(
    period: &[BigInt],
    pre_len: usize,
    m: usize,
) -> Result<QuadraticSurd, CfError> {
    let plen = period.len();
    // digits c_i = a_{m - i} for i = 0, 1, ...: periodic with cycle
    // period[(m - pre_len - i) mod plen]
    let off = (m - pre_len) % plen;
    let mut cycle = Vec::with_capacity(plen);
    for i in 0..plen {
        let idx = (off + plen - (i % plen)) % plen;
        cycle.push(period[idx].clone());
    }
    // x = [0; {cycle}] = 1 / Y with Y = [{cycle}] purely periodic: with the
    // cycle's continuants h, k the fixed point satisfies
    // Y = (h_cur Y + h_prev)/(k_cur Y + k_prev)
    let (mut h_prev, mut h_cur) = (BigInt::one(), cycle[0].clone());
    let (mut k_prev, mut k_cur) = (BigInt::zero(), BigInt::one());
    for a in &cycle[1..] {
        let h_next = a * &h_cur + &h_prev;
        let k_next = a * &k_cur + &k_prev;
        h_prev = core::mem::replace(&mut h_cur, h_next);
        k_prev = core::mem::replace(&mut k_cur, k_next);
    }
    // k_cur Y^2 + (k_prev - h_cur) Y - h_prev = 0, positive root
    let diff = &h_cur - &k_prev;
    let disc = &diff * &diff + BigInt::from(4) * &h_prev * &k_cur;
    let y = QuadraticSurd::new(diff, BigInt::one(), disc, BigInt::from(2) * &k_cur)?;
    y.recip()
}

/// Rigorous half-width of a rank-`shared` cylinder: two continued fractions
/// agreeing in their first `shared` partial quotients differ by at most
/// `1/Btilde^2` where `Btilde` is the continuant of the shared digits; the
/// all-ones continuant (Fibonacci) is the worst case over any digits.
fn fibonacci_cylinder_halfwidth(shared: usize) -> Rational {
    let mut b_prev = BigInt::zero();
    let mut b_cur = BigInt::one();
    for _ in 0..shared {
        let b_next = &b_cur + &b_prev;
        b_prev = core::mem::replace(&mut b_cur, b_next);
    }
    Ratio::new(BigInt::one(), &b_cur * &b_cur)
}
