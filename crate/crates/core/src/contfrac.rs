//! Exact continued fractions for rationals and real quadratic surds.
//!
//! Everything in this module is bit-exact big-integer arithmetic: partial
//! quotients, convergents, complete quotients and the one-sided Diophantine
//! oracle. Floating point appears only in explicitly named `to_f64`/`to_dd`
//! conversions.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::dd::{self, Dd};

pub type Rational = Ratio<BigInt>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CfError {
    /// No termination or period was found within the requested depth.
    DepthExceeded,
    /// Denominator zero or negative radicand.
    InvalidSurd(String),
    /// Comparison/arithmetic between surds over different radicands.
    MixedRadicand,
    /// Operation needs an index the expansion does not reach.
    IndexOutOfRange,
    /// `c` outside `1 <= c < a_{n+2}`.
    InvalidC,
    /// Truncated expansion: boundedness of even partial quotients unknown.
    UnboundedEvenQuotients,
}

impl fmt::Display for CfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CfError::DepthExceeded => write!(f, "continued fraction depth exceeded"),
            CfError::InvalidSurd(s) => write!(f, "invalid quadratic surd: {s}"),
            CfError::MixedRadicand => write!(f, "operands have different radicands"),
            CfError::IndexOutOfRange => write!(f, "index beyond available expansion depth"),
            CfError::InvalidC => write!(f, "intermediate-convergent index c out of range"),
            CfError::UnboundedEvenQuotients => {
                write!(f, "cannot certify boundedness of even partial quotients")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CfError {}

fn isqrt(n: &BigInt) -> BigInt {
    n.sqrt()
}

/// Square part of `d` by bounded trial division: `(s, d0)` with `d = s^2 d0`
/// and `d0` free of square factors below 10^6.
fn extract_square_part(d: u64) -> (u64, u64) {
    let mut s = 1u64;
    let mut rest = d;
    let mut f = 2u64;
    while f * f <= rest && f <= 1000 {
        while rest % (f * f) == 0 {
            rest /= f * f;
            s *= f;
        }
        f += 1;
    }
    (s, rest)
}

fn is_perfect_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = isqrt(n);
    &r * &r == *n
}

/// Exact real of the form `(p + q sqrt(d)) / m`.
///
/// Canonical form: `m > 0`, `gcd(p, q, m) = 1`, and `q = 0 <=> d = 0`
/// (perfect-square radicands are folded into the rational part).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticSurd {
    p: BigInt,
    q: BigInt,
    d: BigInt,
    m: BigInt,
}

impl QuadraticSurd {
    pub fn new(p: BigInt, q: BigInt, d: BigInt, m: BigInt) -> Result<Self, CfError> {
        if m.is_zero() {
            return Err(CfError::InvalidSurd(String::from("zero denominator")));
        }
        if d.is_negative() {
            return Err(CfError::InvalidSurd(String::from("negative radicand")));
        }
        let mut s = QuadraticSurd { p, q, d, m };
        s.canonicalize();
        Ok(s)
    }

    pub fn from_rational(r: Rational) -> Self {
        let (p, m) = r.into();
        QuadraticSurd::new(p, BigInt::zero(), BigInt::zero(), m).expect("nonzero denominator")
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(Ratio::from_integer(BigInt::from(n)))
    }

    /// `sqrt(d)` for a nonnegative integer radicand.
    pub fn sqrt_int(d: i64) -> Result<Self, CfError> {
        QuadraticSurd::new(BigInt::zero(), BigInt::one(), BigInt::from(d), BigInt::one())
    }

    fn canonicalize(&mut self) {
        if self.q.is_zero() || self.d.is_zero() {
            self.q = BigInt::zero();
            self.d = BigInt::zero();
        } else if is_perfect_square(&self.d) {
            self.p += &self.q * isqrt(&self.d);
            self.q = BigInt::zero();
            self.d = BigInt::zero();
        } else {
            // pull square factors out of the radicand so equal values get
            // equal radicands (trial division; radicands here stay small)
            if let Some(d_small) = self.d.to_u64() {
                let (s, d0) = extract_square_part(d_small);
                if s > 1 {
                    self.q *= BigInt::from(s);
                    self.d = BigInt::from(d0);
                }
            }
        }
        if self.m.is_negative() {
            self.p = -core::mem::take(&mut self.p);
            self.q = -core::mem::take(&mut self.q);
            self.m = -core::mem::take(&mut self.m);
        }
        let g = self.p.gcd(&self.q).gcd(&self.m);
        if !g.is_one() && !g.is_zero() {
            self.p /= &g;
            self.q /= &g;
            self.m /= &g;
        }
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    pub fn as_rational(&self) -> Option<Rational> {
        self.is_rational()
            .then(|| Ratio::new(self.p.clone(), self.m.clone()))
    }

    pub fn radicand(&self) -> &BigInt {
        &self.d
    }

    /// Exact sign of the value.
    pub fn signum(&self) -> i32 {
        // sign of p + q sqrt(d) (m > 0)
        if self.q.is_zero() {
            return sign_to_i32(self.p.sign());
        }
        if self.p.is_zero() {
            return sign_to_i32(self.q.sign());
        }
        let sp = self.p.is_positive();
        let sq = self.q.is_positive();
        if sp && sq {
            return 1;
        }
        if !sp && !sq {
            return -1;
        }
        // opposite signs: compare p^2 with q^2 d
        let p2 = &self.p * &self.p;
        let q2d = &self.q * &self.q * &self.d;
        match p2.cmp(&q2d) {
            Ordering::Equal => 0,
            Ordering::Greater => {
                if sp {
                    1
                } else {
                    -1
                }
            }
            Ordering::Less => {
                if sq {
                    1
                } else {
                    -1
                }
            }
        }
    }

    pub fn is_zero_val(&self) -> bool {
        self.signum() == 0
    }

    fn check_same_radicand(&self, other: &Self) -> Result<BigInt, CfError> {
        if self.is_rational() {
            return Ok(other.d.clone());
        }
        if other.is_rational() {
            return Ok(self.d.clone());
        }
        // allow e.g. sqrt(8) vs sqrt(2) only when the radicands literally match
        if self.d == other.d {
            Ok(self.d.clone())
        } else {
            Err(CfError::MixedRadicand)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, CfError> {
        let d = self.check_same_radicand(other)?;
        QuadraticSurd::new(
            &self.p * &other.m + &other.p * &self.m,
            &self.q * &other.m + &other.q * &self.m,
            d,
            &self.m * &other.m,
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self, CfError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        QuadraticSurd {
            p: -self.p.clone(),
            q: -self.q.clone(),
            d: self.d.clone(),
            m: self.m.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, CfError> {
        let d = self.check_same_radicand(other)?;
        // (p1 + q1 s)(p2 + q2 s) = p1 p2 + q1 q2 d + (p1 q2 + p2 q1) s
        QuadraticSurd::new(
            &self.p * &other.p + &self.q * &other.q * &d,
            &self.p * &other.q + &other.p * &self.q,
            d,
            &self.m * &other.m,
        )
    }

    pub fn recip(&self) -> Result<Self, CfError> {
        if self.is_zero_val() {
            return Err(CfError::InvalidSurd(String::from("reciprocal of zero")));
        }
        // m / (p + q sqrt(d)) = m (p - q sqrt(d)) / (p^2 - q^2 d)
        QuadraticSurd::new(
            &self.m * &self.p,
            -(&self.m * &self.q),
            self.d.clone(),
            &self.p * &self.p - &self.q * &self.q * &self.d,
        )
    }

    pub fn div(&self, other: &Self) -> Result<Self, CfError> {
        self.mul(&other.recip()?)
    }

    pub fn add_rational(&self, r: &Rational) -> Self {
        QuadraticSurd::new(
            &self.p * r.denom() + r.numer() * &self.m,
            &self.q * r.denom(),
            self.d.clone(),
            &self.m * r.denom(),
        )
        .expect("denominators nonzero")
    }

    pub fn mul_rational(&self, r: &Rational) -> Self {
        QuadraticSurd::new(
            &self.p * r.numer(),
            &self.q * r.numer(),
            self.d.clone(),
            &self.m * r.denom(),
        )
        .expect("denominators nonzero")
    }

    pub fn cmp_exact(&self, other: &Self) -> Result<Ordering, CfError> {
        let diff = self.sub(other)?;
        Ok(match diff.signum() {
            0 => Ordering::Equal,
            s if s > 0 => Ordering::Greater,
            _ => Ordering::Less,
        })
    }

    pub fn cmp_rational(&self, r: &Rational) -> Ordering {
        let diff = self.add_rational(&-r.clone());
        match diff.signum() {
            0 => Ordering::Equal,
            s if s > 0 => Ordering::Greater,
            _ => Ordering::Less,
        }
    }

    /// Exact floor.
    pub fn floor(&self) -> BigInt {
        if self.q.is_zero() {
            return Ratio::new(self.p.clone(), self.m.clone()).floor().to_integer();
        }
        // floor((p + q sqrt(d))/m), m > 0
        let q2d = &self.q * &self.q * &self.d;
        let r = isqrt(&q2d);
        // q sqrt(d) in [lo, lo+1) with lo = r if q > 0 else -(r+1) (or -r when exact)
        let lo = if self.q.is_positive() {
            r
        } else if (&r * &r) == q2d {
            -r
        } else {
            -(r + 1u8)
        };
        Ratio::new(&self.p + lo, self.m.clone()).floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        let f = self.floor();
        if self.cmp_rational(&Ratio::from_integer(f.clone())) == Ordering::Equal {
            f
        } else {
            f + 1u8
        }
    }

    pub fn to_dd(&self) -> Dd {
        let p = dd::dd_from_ratio(&Ratio::from_integer(self.p.clone()));
        let q = dd::dd_from_ratio(&Ratio::from_integer(self.q.clone()));
        let d = dd::dd_from_ratio(&Ratio::from_integer(self.d.clone()));
        let m = dd::dd_from_ratio(&Ratio::from_integer(self.m.clone()));
        p.add(q.mul(d.sqrt())).div(m)
    }

    pub fn to_f64(&self) -> f64 {
        self.to_dd().to_f64()
    }

    /// Parse `"(a+b*sqrt(d))/m"`-style input; accepts plain rationals
    /// (`"871/2500"`) and forms like `"(5+sqrt(2))/23"`.
    pub fn parse(s: &str) -> Result<Self, CfError> {
        parse_surd(s)
    }
}

fn sign_to_i32(s: num_bigint::Sign) -> i32 {
    match s {
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => 0,
        num_bigint::Sign::Plus => 1,
    }
}

impl fmt::Display for QuadraticSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            if self.m.is_one() {
                write!(f, "{}", self.p)
            } else {
                write!(f, "{}/{}", self.p, self.m)
            }
        } else if self.m.is_one() {
            write!(f, "{}+{}*sqrt({})", self.p, self.q, self.d)
        } else {
            write!(f, "({}+{}*sqrt({}))/{}", self.p, self.q, self.d, self.m)
        }
    }
}

fn parse_surd(s: &str) -> Result<QuadraticSurd, CfError> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = |m: &str| CfError::InvalidSurd(String::from(m));
    // split "(num)/den" or "num/den" at the top-level slash
    let (num_part, den_part) = match top_level_slash(&s) {
        Some(i) => (&s[..i], &s[i + 1..]),
        None => (&s[..], "1"),
    };
    let den: BigInt = den_part.parse().map_err(|_| bad("denominator"))?;
    let core = num_part.trim_start_matches('(').trim_end_matches(')');
    // split core into rational part and k*sqrt(d) part
    let mut p = BigInt::zero();
    let mut q = BigInt::zero();
    let mut d = BigInt::zero();
    for term in split_signed_terms(core) {
        if let Some(idx) = term.find("sqrt(") {
            let coef_str = &term[..idx];
            let coef: BigInt = match coef_str {
                "" | "+" => BigInt::one(),
                "-" => -BigInt::one(),
                c => c.trim_end_matches('*').parse().map_err(|_| bad("surd coefficient"))?,
            };
            let rad = term[idx + 5..].trim_end_matches(')');
            let rad: BigInt = rad.parse().map_err(|_| bad("radicand"))?;
            if !q.is_zero() && d != rad {
                return Err(CfError::MixedRadicand);
            }
            d = rad;
            q += coef;
        } else {
            let v: BigInt = term.parse().map_err(|_| bad("integer term"))?;
            p += v;
        }
    }
    QuadraticSurd::new(p, q, d, den)
}

fn top_level_slash(s: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            '/' if depth == 0 => return Some(i),
            _ => {}
        }
    }
    None
}

fn split_signed_terms(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            '+' | '-' if depth == 0 && i > 0 => {
                out.push(core::mem::take(&mut cur));
                if c == '-' {
                    cur.push('-');
                }
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    out.push(cur);
    out.retain(|t| !t.is_empty() && t != "+");
    out
}

/// Tail of a continued-fraction expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CfTail {
    /// Rational input; the listed quotients are the whole expansion.
    Terminated,
    /// Quadratic surd; the stored period repeats forever.
    Periodic,
    /// Inexact (float) input, stopped once the residual hit noise level.
    TruncatedAtDepth(usize),
}

/// Simple continued fraction `[a0; a1, a2, ...]` with optional periodic tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuedFraction {
    /// `a0, a1, ..` up to (excluding) the periodic block.
    quotients: Vec<BigInt>,
    /// Minimal periodic block, empty unless `tail == Periodic`.
    period: Vec<BigInt>,
    tail: CfTail,
    /// Complete quotients aligned with the emitted partial quotients
    /// (pre-period followed by one full period when periodic).
    states: Vec<QuadraticSurd>,
}

impl ContinuedFraction {
    pub fn tail(&self) -> &CfTail {
        &self.tail
    }

    pub fn pre_period(&self) -> &[BigInt] {
        &self.quotients
    }

    pub fn period(&self) -> &[BigInt] {
        &self.period
    }

    pub fn a0(&self) -> &BigInt {
        &self.quotients[0]
    }

    /// Partial quotient `a_k`, unrolling the periodic tail if needed.
    pub fn partial_quotient(&self, k: usize) -> Result<BigInt, CfError> {
        if k < self.quotients.len() {
            return Ok(self.quotients[k].clone());
        }
        match self.tail {
            CfTail::Periodic => {
                let off = (k - self.quotients.len()) % self.period.len();
                Ok(self.period[off].clone())
            }
            _ => Err(CfError::DepthExceeded),
        }
    }

    /// Convergents `A_k/B_k` for `k = 0..=n`, each in lowest terms.
    pub fn convergents(&self, n: usize) -> Result<Vec<Rational>, CfError> {
        let mut out = Vec::with_capacity(n + 1);
        // seeds A_{-2} = 0, B_{-2} = 1; A_{-1} = 1, B_{-1} = 0
        let (mut a_prev, mut b_prev) = (BigInt::zero(), BigInt::one());
        let (mut a_cur, mut b_cur) = (BigInt::one(), BigInt::zero());
        for k in 0..=n {
            let q = self.partial_quotient(k)?;
            let a_next = &q * &a_cur + &a_prev;
            let b_next = &q * &b_cur + &b_prev;
            a_prev = core::mem::replace(&mut a_cur, a_next);
            b_prev = core::mem::replace(&mut b_cur, b_next);
            out.push(Ratio::new(a_cur.clone(), b_cur.clone()));
        }
        Ok(out)
    }

    /// `(A_n, B_n)` numerator/denominator pairs up to `n` inclusive.
    pub fn convergent_pairs(&self, n: usize) -> Result<Vec<(BigInt, BigInt)>, CfError> {
        Ok(self
            .convergents(n)?
            .into_iter()
            .map(|r| r.into())
            .collect())
    }

    /// Exact complete quotient `zeta_n = [a_n; a_{n+1}, ...]`.
    pub fn complete_quotient(&self, n: usize) -> Result<QuadraticSurd, CfError> {
        if n < self.states.len() {
            return Ok(self.states[n].clone());
        }
        match self.tail {
            CfTail::Periodic => {
                let pre = self.quotients.len();
                let off = pre + (n - pre) % self.period.len();
                Ok(self.states[off].clone())
            }
            _ => Err(CfError::DepthExceeded),
        }
    }

    /// Intermediate convergents `(c A_{n+1} + A_n)/(c B_{n+1} + B_n)` for
    /// `1 <= c < a_{n+2}`; empty when `a_{n+2} = 1`.
    pub fn intermediate_convergents(&self, n: usize) -> Result<Vec<Rational>, CfError> {
        let pairs = self.convergent_pairs(n + 1)?;
        let (an, bn) = &pairs[n];
        let (an1, bn1) = &pairs[n + 1];
        let a_next = self.partial_quotient(n + 2)?;
        let mut out = Vec::new();
        let mut c = BigInt::one();
        while c < a_next {
            out.push(Ratio::new(&c * an1 + an, &c * bn1 + bn));
            c += 1u8;
        }
        Ok(out)
    }

    /// Value as an exact surd/rational (periodic and terminated tails only).
    pub fn value(&self) -> Result<QuadraticSurd, CfError> {
        match self.tail {
            CfTail::TruncatedAtDepth(_) => Err(CfError::DepthExceeded),
            _ => Ok(self.states[0].clone()),
        }
    }

    /// Largest even-indexed partial quotient `max(a_{2n})`, `n >= 1`.
    ///
    /// Defined only when the expansion is terminated or periodic; a truncated
    /// tail cannot certify boundedness.
    pub fn max_even_quotient(&self) -> Result<BigInt, CfError> {
        match self.tail {
            CfTail::TruncatedAtDepth(_) => Err(CfError::UnboundedEvenQuotients),
            CfTail::Terminated => {
                let mut best = BigInt::zero();
                for k in (2..self.quotients.len()).step_by(2) {
                    best = best.max(self.quotients[k].clone());
                }
                Ok(best)
            }
            CfTail::Periodic => {
                // walk far enough to hit every residue of the period on even
                // indices: pre + 2*period covers both parities
                let horizon = self.quotients.len() + 2 * self.period.len();
                let mut best = BigInt::zero();
                let mut k = 2;
                while k <= horizon {
                    best = best.max(self.partial_quotient(k)?);
                    k += 2;
                }
                Ok(best)
            }
        }
    }

    pub fn render(&self) -> String {
        use core::fmt::Write;
        let mut s = String::new();
        let _ = write!(s, "[{}", self.quotients[0]);
        if self.quotients.len() > 1 || !self.period.is_empty() {
            let _ = write!(s, "; ");
            let rest: Vec<String> = self.quotients[1..]
                .iter()
                .map(|a| alloc::format!("{a}"))
                .collect();
            let _ = write!(s, "{}", rest.join(", "));
            if !self.period.is_empty() {
                if self.quotients.len() > 1 {
                    let _ = write!(s, ", ");
                }
                let blk: Vec<String> = self.period.iter().map(|a| alloc::format!("{a}")).collect();
                let _ = write!(s, "{{{}}}", blk.join(", "));
            }
        }
        if let CfTail::TruncatedAtDepth(n) = self.tail {
            let _ = write!(s, ", ...(truncated@{n})");
        }
        s.push(']');
        s
    }
}

impl fmt::Display for ContinuedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Expand a positive rational or quadratic surd.
///
/// Rational inputs terminate; surds are expanded with the `(P + sqrt(D))/Q`
/// state machine and the (minimal) period is detected by state recurrence.
pub fn expand(x: &QuadraticSurd, max_depth: usize) -> Result<ContinuedFraction, CfError> {
    if x.signum() <= 0 {
        return Err(CfError::InvalidSurd(String::from("expand needs x > 0")));
    }
    if x.is_rational() {
        return expand_rational(x.as_rational().expect("rational"), max_depth);
    }
    // bring x to (P + sqrt(D)) / Q with Q | D - P^2
    // x = (p + q sqrt(d))/m, q may be negative
    let (mut pp, mut qq, dd0, mut mm) =
        (x.p.clone(), x.q.clone(), x.d.clone(), x.m.clone());
    if qq.is_negative() {
        // (p - |q| sqrt(d))/m = (p·(-1) + |q| sqrt(d))/(-m) — flip all signs
        pp = -pp;
        qq = -qq;
        mm = -mm;
    }
    let mut big_p = pp;
    let mut mult = qq; // sqrt(D) = mult * sqrt(d0)
    let mut big_d = &mult * &mult * &dd0;
    let mut big_q = mm;
    let rem = (&big_d - &big_p * &big_p) % &big_q;
    if !rem.is_zero() {
        let scale = big_q.abs();
        big_p *= &scale;
        big_d *= &scale * &scale;
        mult *= &scale;
        big_q *= &scale;
    }

    let mut quotients: Vec<BigInt> = Vec::new();
    let mut states: Vec<QuadraticSurd> = Vec::new();
    let mut seen: Vec<(BigInt, BigInt, usize)> = Vec::new();
    for step in 0..max_depth {
        let state = QuadraticSurd::new(big_p.clone(), mult.clone(), dd0.clone(), big_q.clone())?;
        // period detection on the (P, Q) machine state
        if step > 0 {
            if let Some(&(_, _, start)) = seen
                .iter()
                .find(|(sp, sq, _)| *sp == big_p && *sq == big_q)
            {
                let period = quotients.split_off(start);
                states.truncate(start + period.len());
                return Ok(ContinuedFraction {
                    quotients,
                    period,
                    tail: CfTail::Periodic,
                    states,
                });
            }
        }
        seen.push((big_p.clone(), big_q.clone(), step));
        let a = state.floor();
        quotients.push(a.clone());
        states.push(state);
        let p_next = &a * &big_q - &big_p;
        let q_next = (&big_d - &p_next * &p_next) / &big_q;
        if q_next.is_zero() {
            return Err(CfError::InvalidSurd(String::from(
                "radicand became a perfect square mid-expansion",
            )));
        }
        big_p = p_next;
        big_q = q_next;
    }
    Err(CfError::DepthExceeded)
}

fn expand_rational(x: Rational, max_depth: usize) -> Result<ContinuedFraction, CfError> {
    let mut quotients = Vec::new();
    let mut states = Vec::new();
    let mut cur = x;
    for _ in 0..max_depth {
        states.push(QuadraticSurd::from_rational(cur.clone()));
        let a = cur.floor().to_integer();
        quotients.push(a.clone());
        let frac = &cur - Ratio::from_integer(a);
        if frac.is_zero() {
            return Ok(ContinuedFraction {
                quotients,
                period: Vec::new(),
                tail: CfTail::Terminated,
                states,
            });
        }
        cur = frac.recip();
    }
    Err(CfError::DepthExceeded)
}

/// Expansion of an inexact `f64`, stopped when the next remainder is below
/// the noise floor of the accumulated computation (1e3 x unit roundoff).
pub fn expand_f64(x: f64, max_depth: usize) -> Result<ContinuedFraction, CfError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(CfError::InvalidSurd(String::from("expand_f64 needs finite x > 0")));
    }
    let mut quotients = Vec::new();
    let mut cur = Dd::from_f64(x);
    let mut b_prev = 0.0f64;
    let mut b_cur = 1.0f64;
    for depth in 0..max_depth {
        let a = crate::fmath::floor(cur.to_f64());
        quotients.push(BigInt::from(a as i64));
        let frac = cur.sub(Dd::from_f64(a));
        let b_next = a * b_cur + b_prev;
        b_prev = core::mem::replace(&mut b_cur, b_next);
        // |x - A_k/B_k| < 1/B_k^2; once that is below the noise floor the
        // remaining quotients are garbage
        if frac.to_f64() < 1e3 * f64::EPSILON * (1.0 + crate::fmath::abs(x)) * b_cur * b_cur
            || frac.to_f64() <= 0.0
        {
            return Ok(ContinuedFraction {
                quotients,
                period: Vec::new(),
                tail: CfTail::TruncatedAtDepth(depth + 1),
                states: Vec::new(),
            });
        }
        cur = Dd::ONE.div(frac);
    }
    Err(CfError::DepthExceeded)
}

/// Brute-force one-sided Diophantine oracle: all coprime `p/q`, `q <= q_max`,
/// with `0 <= p/q - xi < K(q)/q^2`.
///
/// For each `q` the only candidate is `p = ceil(q xi)`; membership is decided
/// exactly at the `p/q = xi` endpoint and in double-double elsewhere.
pub fn one_sided_solutions<F>(xi: &QuadraticSurd, k: F, q_max: u64) -> Vec<Rational>
where
    F: Fn(u64) -> f64,
{
    let mut out = Vec::new();
    for q in 1..=q_max {
        let qr = Ratio::from_integer(BigInt::from(q));
        let qxi = xi.mul_rational(&qr);
        let p = qxi.ceil();
        if p.is_negative() || p.is_zero() {
            continue;
        }
        if p.gcd(&BigInt::from(q)) != BigInt::one() {
            continue;
        }
        let frac = Ratio::new(p.clone(), BigInt::from(q));
        let diff = xi.neg().add_rational(&frac); // p/q - xi >= 0
        let bound = k(q);
        if bound <= 0.0 {
            continue;
        }
        if diff.is_zero_val() {
            out.push(frac);
            continue;
        }
        // compare diff < K(q)/q^2 in double-double
        let lhs = diff.to_dd().mul_f64((q * q) as f64);
        if lhs.to_f64() < bound {
            out.push(frac);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn expand_rational_half() {
        let x = QuadraticSurd::from_rational(Ratio::new(big(1), big(2)));
        let cf = expand(&x, 64).unwrap();
        assert_eq!(cf.pre_period(), &[big(0), big(2)]);
        assert_eq!(*cf.tail(), CfTail::Terminated);
        assert_eq!(cf.render(), "[0; 2]");
    }

    #[test]
    fn expand_worked_surd() {
        // 2 theta* = 2(5+sqrt(2))/23 = [0; 1, 1, 3, {1, 4}]
        let xi = QuadraticSurd::new(big(10), big(2), big(2), big(23)).unwrap();
        let cf = expand(&xi, 256).unwrap();
        assert_eq!(cf.pre_period(), &[big(0), big(1), big(1), big(3)]);
        assert_eq!(cf.period(), &[big(1), big(4)]);
        assert_eq!(cf.render(), "[0; 1, 1, 3, {1, 4}]");
    }

    #[test]
    fn convergents_of_worked_surd() {
        let xi = QuadraticSurd::new(big(10), big(2), big(2), big(23)).unwrap();
        let cf = expand(&xi, 256).unwrap();
        let conv = cf.convergents(5).unwrap();
        let expect = vec![(0, 1), (1, 1), (1, 2), (4, 7), (5, 9), (24, 43)];
        for (c, (a, b)) in conv.iter().zip(expect) {
            assert_eq!(*c, Ratio::new(big(a), big(b)));
        }
    }

    #[test]
    fn complete_quotients_match_paper_values() {
        let xi = QuadraticSurd::new(big(10), big(2), big(2), big(23)).unwrap();
        let cf = expand(&xi, 256).unwrap();
        // zeta_6 = [1; 4, {1,4}] = (1 + sqrt(2))/2
        let z6 = cf.complete_quotient(6).unwrap();
        let expect = QuadraticSurd::new(big(1), big(1), big(2), big(2)).unwrap();
        assert_eq!(z6.cmp_exact(&expect).unwrap(), Ordering::Equal);
        // zeta_7 = [4; 1, {4,1}] = 2 + 2 sqrt(2)
        let z7 = cf.complete_quotient(7).unwrap();
        let expect = QuadraticSurd::new(big(2), big(2), big(2), big(1)).unwrap();
        assert_eq!(z7.cmp_exact(&expect).unwrap(), Ordering::Equal);
    }

    #[test]
    fn complete_quotient_reconstructs_value() {
        // xi = (zeta_{n+1} A_n + A_{n-1}) / (zeta_{n+1} B_n + B_{n-1})
        let xi = QuadraticSurd::new(big(10), big(2), big(2), big(23)).unwrap();
        let cf = expand(&xi, 256).unwrap();
        for n in 1..12usize {
            let pairs = cf.convergent_pairs(n).unwrap();
            let (an, bn) = pairs[n].clone();
            let (am, bm) = pairs[n - 1].clone();
            let z = cf.complete_quotient(n + 1).unwrap();
            let num = z.mul_rational(&Ratio::from_integer(an)).add_rational(&Ratio::from_integer(am));
            let den = z.mul_rational(&Ratio::from_integer(bn)).add_rational(&Ratio::from_integer(bm));
            let back = num.div(&den).unwrap();
            assert_eq!(back.cmp_exact(&xi).unwrap(), Ordering::Equal);
        }
    }

    #[test]
    fn eq21_family_value() {
        // [0; 1, {1, m}] = (m - 2 + sqrt(m^2 + 4m)) / (4m - 2) for m = 10.
        // (Solving the periodic tail exactly; consistent with the companion
        // K_1 = 2m/(3m + sqrt(m(4+m))) since K_1 = 1/(zeta_2 + 1).)
        let m = 10i64;
        let target = QuadraticSurd::new(big(m - 2), big(1), big(m * m + 4 * m), big(4 * m - 2)).unwrap();
        let cf = expand(&target, 256).unwrap();
        assert_eq!(cf.pre_period(), &[big(0), big(1)]);
        assert_eq!(cf.period(), &[big(1), big(m)]);
        // round-trip through the stored state
        assert_eq!(cf.value().unwrap().cmp_exact(&target).unwrap(), Ordering::Equal);
    }

    #[test]
    fn intermediate_convergents_counts() {
        let xi = QuadraticSurd::new(big(10), big(2), big(2), big(23)).unwrap();
        let cf = expand(&xi, 256).unwrap();
        // a_7 = 4 -> three intermediates at n = 5
        let inter = cf.intermediate_convergents(5).unwrap();
        assert_eq!(inter.len(), 3);
        assert_eq!(inter[0], Ratio::new(big(53), big(95)));
        // a_6 = 1 -> empty at n = 4
        assert!(cf.intermediate_convergents(4).unwrap().is_empty());
    }

    #[test]
    fn one_sided_oracle_includes_equality() {
        let third = QuadraticSurd::from_rational(Ratio::new(big(1), big(3)));
        let sols = one_sided_solutions(&third, |_| 0.5, 10);
        assert!(sols.contains(&Ratio::new(big(1), big(3))));
    }

    #[test]
    fn golden_ratio_odd_convergents_appear() {
        // xi = (sqrt(5)-1)/2; with K = 1 every odd-side convergent qualifies
        let xi = QuadraticSurd::new(big(-1), big(1), big(5), big(2)).unwrap();
        let cf = expand(&xi, 128).unwrap();
        let sols = one_sided_solutions(&xi, |_| 1.0, 50);
        let pairs = cf.convergent_pairs(12).unwrap();
        for (n, (a, b)) in pairs.iter().enumerate() {
            if n % 2 == 1 && b.to_u64().unwrap_or(u64::MAX) <= 50 {
                assert!(
                    sols.contains(&Ratio::new(a.clone(), b.clone())),
                    "missing odd convergent {a}/{b}"
                );
            }
        }
    }

    #[test]
    fn float_expansion_truncates() {
        let cf = expand_f64(core::f64::consts::PI, 64).unwrap();
        assert!(matches!(cf.tail(), CfTail::TruncatedAtDepth(_)));
        assert_eq!(cf.pre_period()[0], big(3));
        assert_eq!(cf.pre_period()[1], big(7));
        assert_eq!(cf.pre_period()[2], big(15));
        assert_eq!(cf.pre_period()[3], big(1));
    }

    #[test]
    fn surd_floor_and_ceil() {
        let s = QuadraticSurd::new(big(0), big(1), big(2), big(1)).unwrap(); // sqrt(2)
        assert_eq!(s.floor(), big(1));
        assert_eq!(s.ceil(), big(2));
        let neg = s.neg(); // -sqrt(2)
        assert_eq!(neg.floor(), big(-2));
        let r = QuadraticSurd::from_rational(Ratio::new(big(6), big(3)));
        assert_eq!(r.ceil(), big(2));
    }

    #[test]
    fn parse_forms() {
        let a = QuadraticSurd::parse("871/2500").unwrap();
        assert_eq!(a.as_rational().unwrap(), Ratio::new(big(871), big(2500)));
        let b = QuadraticSurd::parse("(5+sqrt(2))/23").unwrap();
        let expect = QuadraticSurd::new(big(5), big(1), big(2), big(23)).unwrap();
        assert_eq!(b.cmp_exact(&expect).unwrap(), Ordering::Equal);
        let c = QuadraticSurd::parse("(10+2*sqrt(2))/23").unwrap();
        let expect2 = QuadraticSurd::new(big(10), big(2), big(2), big(23)).unwrap();
        assert_eq!(c.cmp_exact(&expect2).unwrap(), Ordering::Equal);
    }
}
