//! Constructive reals.
//!
//! A [`CReal`] is a procedure `k -> x_k` returning rational approximations
//! that satisfy the Cauchy promise `|x_k - x_{k+n}| < 2^-k` for every `n`.
//! Consequently the limit `x` satisfies `|x - x_k| <= 2^-k`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::ratcore::{Precision, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CRealError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("sequence index overflow at precision {0}")]
    IndexOverflow(u32),
}

type ApproxFn = dyn Fn(Precision) -> Result<Rational, CRealError> + Send + Sync;

struct Inner {
    approximant: Box<ApproxFn>,
    memo: Mutex<HashMap<u32, Rational>>,
    label: String,
    exact: Option<Rational>,
}

/// A constructive real number. Cloning shares the approximation memo.
#[derive(Clone)]
pub struct CReal {
    inner: Arc<Inner>,
}

impl fmt::Debug for CReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CReal")
            .field("label", &self.inner.label)
            .finish()
    }
}

impl CReal {
    /// Wraps an approximation procedure. The caller is responsible for the
    /// Cauchy promise.
    pub fn from_fn<F>(label: impl Into<String>, approximant: F) -> Self
    where
        F: Fn(Precision) -> Result<Rational, CRealError> + Send + Sync + 'static,
    {
        Self::build(label.into(), Box::new(approximant), None)
    }

    fn build(label: String, approximant: Box<ApproxFn>, exact: Option<Rational>) -> Self {
        CReal {
            inner: Arc::new(Inner {
                approximant,
                memo: Mutex::new(HashMap::new()),
                label,
                exact,
            }),
        }
    }

    pub fn from_rational(q: Rational) -> Self {
        let label = q.to_string();
        let value = q.clone();
        Self::build(label, Box::new(move |_| Ok(value.clone())), Some(q))
    }

    /// `sqrt(2)` with `x_k = isqrt(2 * 4^k) / 2^k`, so `x_k` lies in
    /// `(sqrt2 - 2^-k, sqrt2]`.
    pub fn sqrt2() -> Self {
        Self::from_fn("sqrt2", |k| {
            let scale = BigInt::one() << k.get();
            let s = (BigInt::from(2) * &scale * &scale).sqrt();
            Ok(Rational::new(s, scale).expect("nonzero scale"))
        })
    }

    pub fn label(&self) -> &str {
        &self.inner.label
    }

    /// The exact value when this real was built from a rational.
    pub fn exact(&self) -> Option<&Rational> {
        self.inner.exact.as_ref()
    }

    /// The approximant `x_k`. Results are memoized, so repeated queries return
    /// identical rationals.
    pub fn approx(&self, k: Precision) -> Result<Rational, CRealError> {
        if let Some(q) = self.inner.memo.lock().expect("memo poisoned").get(&k.get()) {
            return Ok(q.clone());
        }
        let value = (self.inner.approximant)(k)?;
        let mut memo = self.inner.memo.lock().expect("memo poisoned");
        Ok(memo.entry(k.get()).or_insert(value).clone())
    }

    pub fn neg(&self) -> CReal {
        if let Some(q) = self.exact() {
            return CReal::from_rational(-q);
        }
        let x = self.clone();
        CReal::from_fn(format!("-({})", self.label()), move |k| Ok(-x.approx(k)?))
    }

    /// `z_k = x_{k+1} + y_{k+1}`.
    pub fn add(&self, other: &CReal) -> CReal {
        if let (Some(p), Some(q)) = (self.exact(), other.exact()) {
            return CReal::from_rational(p + q);
        }
        let (x, y) = (self.clone(), other.clone());
        CReal::from_fn(
            format!("({} + {})", self.label(), other.label()),
            move |k| Ok(x.approx(k.shift(1))? + y.approx(k.shift(1))?),
        )
    }

    pub fn sub(&self, other: &CReal) -> CReal {
        if let (Some(p), Some(q)) = (self.exact(), other.exact()) {
            return CReal::from_rational(p - q);
        }
        let (x, y) = (self.clone(), other.clone());
        CReal::from_fn(
            format!("({} - {})", self.label(), other.label()),
            move |k| Ok(x.approx(k.shift(1))? - y.approx(k.shift(1))?),
        )
    }

    /// `z_k = x_{k+s} * y_{k+s}` with `s = 1 + ceil(log2 B)` and
    /// `B = max(|x_0| + 1, |y_0| + 1)`, which bounds every approximant.
    pub fn mul(&self, other: &CReal) -> CReal {
        if let (Some(p), Some(q)) = (self.exact(), other.exact()) {
            return CReal::from_rational(p * q);
        }
        let (x, y) = (self.clone(), other.clone());
        CReal::from_fn(
            format!("({} * {})", self.label(), other.label()),
            move |k| {
                let shift = mul_shift(&x, &y)?;
                Ok(x.approx(k.shift(shift))? * y.approx(k.shift(shift))?)
            },
        )
    }

    /// Three-valued comparison at precision `k`. Never answers `Less` or
    /// `Greater` wrongly; answers one of them whenever `|x - y| > 2^-k`.
    pub fn compare(&self, other: &CReal, k: Precision) -> Result<Comparison3, CRealError> {
        let xa = self.approx(k.shift(2))?;
        let ya = other.approx(k.shift(2))?;
        let margin = Rational::pow2_neg(k.get() + 1);
        let verdict = if &xa + &margin < ya {
            Verdict3::Less
        } else if &ya + &margin < xa {
            Verdict3::Greater
        } else {
            Verdict3::Undetermined
        };
        Ok(Comparison3 {
            verdict,
            at_precision: k,
        })
    }

    /// Decimal rendering rounded to `places` digits. A trailing `±` marks a
    /// last digit that is only known to within one unit.
    pub fn render(&self, places: u32) -> Result<String, CRealError> {
        let scale = Rational::from_integer(num_traits::pow(BigInt::from(10), places as usize));
        if let Some(q) = self.exact() {
            return Ok(format_scaled(
                &round_half_away(&(q * &scale)),
                places,
                false,
            ));
        }
        // 16^-p < 10^-p, so the query interval is a small fraction of one ulp.
        let k = Precision(4 * places + 4);
        let center = self.approx(k)?;
        let eps = k.eps();
        let lo = round_half_away(&(&(&center - &eps) * &scale));
        let hi = round_half_away(&(&(&center + &eps) * &scale));
        let digits = round_half_away(&(&center * &scale));
        Ok(format_scaled(&digits, places, lo != hi))
    }

    pub fn sample_json(&self, k: Precision) -> Result<serde_json::Value, CRealError> {
        Ok(serde_json::json!({
            "k": k.get(),
            "approx": self.approx(k)?.to_json(),
            "label": self.label(),
        }))
    }
}

fn mul_shift(x: &CReal, y: &CReal) -> Result<u32, CRealError> {
    let bx = x.approx(Precision(0))?.abs() + Rational::one();
    let by = y.approx(Precision(0))?.abs() + Rational::one();
    Ok(1 + bx.max(by).ceil_log2())
}

fn round_half_away(v: &Rational) -> BigInt {
    let half = Rational::new(1, 2).expect("nonzero");
    if v.is_negative() {
        -(&(-v) + &half).floor()
    } else {
        (v + &half).floor()
    }
}

fn format_scaled(digits: &BigInt, places: u32, uncertain: bool) -> String {
    let mut out = String::new();
    if digits.is_negative() {
        out.push('-');
    }
    let mag = digits.abs().to_string();
    let places = places as usize;
    if places == 0 {
        out.push_str(&mag);
    } else {
        let padded = format!("{:0>width$}", mag, width = places + 1);
        let (int, frac) = padded.split_at(padded.len() - places);
        out.push_str(int);
        out.push('.');
        out.push_str(frac);
    }
    if uncertain {
        out.push('±');
    }
    if digits.is_zero() && out.starts_with('-') {
        out.remove(0);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict3 {
    Less,
    Greater,
    Undetermined,
}

impl fmt::Display for Verdict3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict3::Less => "less",
            Verdict3::Greater => "greater",
            Verdict3::Undetermined => "undetermined",
        })
    }
}

/// Outcome of a bounded-precision comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Comparison3 {
    pub verdict: Verdict3,
    pub at_precision: Precision,
}

/// Result of checking `|sqrt2 - m/n| >= 1/(3n^2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiouvilleGap {
    pub bound: Rational,
    pub verified: bool,
    /// Precision at which the inequality was decided.
    pub precision: Precision,
}

const LIOUVILLE_MIN_PRECISION: u32 = 40;
const LIOUVILLE_MAX_ROUNDS: u32 = 64;

/// Decides `|sqrt2 - m/n| >= 1/(3n^2)` for `0 < m/n <= 3/2`.
pub fn liouville_gap(m: u64, n: u64) -> Result<LiouvilleGap, CRealError> {
    liouville_gap_with(&CReal::sqrt2(), m, n)
}

/// As [`liouville_gap`], reusing a shared `sqrt2` so its memo is hit across a
/// sweep.
pub fn liouville_gap_with(sqrt2: &CReal, m: u64, n: u64) -> Result<LiouvilleGap, CRealError> {
    if m == 0 || n == 0 {
        return Err(CRealError::Domain(format!(
            "m and n must be positive, got {m}/{n}"
        )));
    }
    let q = Rational::new(m, n).expect("n > 0");
    if q > Rational::new(3, 2).expect("nonzero") {
        return Err(CRealError::Domain(format!("{m}/{n} exceeds 3/2")));
    }
    let bound = Rational::new(1, 3 * u128::from(n) * u128::from(n)).expect("n > 0");
    // smallest k with 2^-k < bound/4
    let quarter = &bound * &Rational::new(1, 4).expect("nonzero");
    let mut k = quarter.recip().expect("positive").ceil_log2() + 1;
    k = k.max(LIOUVILLE_MIN_PRECISION);
    for _ in 0..LIOUVILLE_MAX_ROUNDS {
        let precision = Precision(k);
        let dist = (sqrt2.approx(precision)? - &q).abs();
        let eps = precision.eps();
        if &dist - &eps >= bound {
            return Ok(LiouvilleGap {
                bound,
                verified: true,
                precision,
            });
        }
        if &dist + &eps < bound {
            return Ok(LiouvilleGap {
                bound,
                verified: false,
                precision,
            });
        }
        k += 16;
    }
    Err(CRealError::Domain(format!(
        "could not decide the gap for {m}/{n}"
    )))
}

/// One line of a denominator sweep: every reduced `m/n` in `(0, 3/2]` was
/// checked; `closest_m` is the numerator nearest to `sqrt2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRow {
    pub n: u64,
    pub closest_m: u64,
    pub bound: Rational,
    pub checked: usize,
    pub all_verified: bool,
}

pub fn liouville_sweep(max_den: u64) -> Result<Vec<SweepRow>, CRealError> {
    let sqrt2 = CReal::sqrt2();
    let reference = sqrt2.approx(Precision(LIOUVILLE_MIN_PRECISION))?;
    let mut rows = Vec::new();
    for n in 1..=max_den {
        let mut checked = 0;
        let mut all_verified = true;
        let mut closest: Option<(Rational, u64)> = None;
        for m in 1..=(3 * n / 2) {
            if num_integer::gcd(m, n) != 1 {
                continue;
            }
            let gap = liouville_gap_with(&sqrt2, m, n)?;
            checked += 1;
            all_verified &= gap.verified;
            let dist = (&reference - &Rational::new(m, n).expect("n > 0")).abs();
            if closest.as_ref().is_none_or(|(d, _)| &dist < d) {
                closest = Some((dist, m));
            }
        }
        let bound = Rational::new(1, 3 * u128::from(n) * u128::from(n)).expect("n > 0");
        rows.push(SweepRow {
            n,
            closest_m: closest.map(|(_, m)| m).unwrap_or(0),
            bound,
            checked,
            all_verified,
        });
    }
    Ok(rows)
}
