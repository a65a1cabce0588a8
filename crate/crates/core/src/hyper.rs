//! Hyperreals as sequence representatives.
//!
//! No non-principal ultrafilter is computable, so verdicts here are of two
//! kinds. Exact ones come from tags whose tail behaviour is known and hold on
//! a cofinite index set, hence in every non-principal ultrapower. Everything
//! else is reported as `ObservedOnly` together with the inspected horizon.
//! Sign questions whose answer splits along even and odd indices are reported
//! as `UltrafilterDependent`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::creal::{CReal, CRealError};
use crate::funcspace::UniformFn;
use crate::ratcore::{Precision, Rational};
use crate::supengine::{grid_size, ResourceCap, SupCertificate, SupError, UniquenessModulus};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HyperError {
    #[error("sequence is provably unlimited; it has no standard part")]
    NotLimited,
    #[error("no convergence modulus; the standard part cannot be extracted")]
    NoModulus,
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Sup(#[from] SupError),
    #[error(transparent)]
    CReal(#[from] CRealError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqOp {
    Add,
    Sub,
    Mul,
    Neg,
}

impl fmt::Display for SeqOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeqOp::Add => "add",
            SeqOp::Sub => "sub",
            SeqOp::Mul => "mul",
            SeqOp::Neg => "neg",
        })
    }
}

/// Declared tail behaviour of a closed-form sequence. Flags are checked on
/// sampled windows but never used to issue exact verdicts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TailFlags {
    pub nonincreasing: bool,
    pub nondecreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeqTag {
    Constant(Rational),
    /// `1/n`
    Harmonic,
    /// `(-1)^n / n`
    AltHarmonic,
    /// `n`, the unlimited hypernatural `H`
    Identity,
    ClosedForm {
        name: String,
        flags: TailFlags,
    },
    Composite {
        op: SeqOp,
        children: Vec<SeqTag>,
    },
    /// `base` with its first `prefix_len` terms replaced.
    Cofinite {
        base: Box<SeqTag>,
        prefix_len: u64,
    },
}

impl fmt::Display for SeqTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqTag::Constant(q) => write!(f, "const:{q}"),
            SeqTag::Harmonic => f.write_str("harmonic"),
            SeqTag::AltHarmonic => f.write_str("altharmonic"),
            SeqTag::Identity => f.write_str("identity"),
            SeqTag::ClosedForm { name, .. } => write!(f, "closed-form:{name}"),
            SeqTag::Composite { op, children } => {
                write!(f, "{op}(")?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
            SeqTag::Cofinite { base, prefix_len } => write!(f, "cofinite({base},{prefix_len})"),
        }
    }
}

/// Sign pattern holding on a cofinite set of indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SignPattern {
    Positive,
    Negative,
    Zero,
    Alternating { negative_on_odd: bool },
    Unknown,
}

impl SignPattern {
    fn neg(self) -> Self {
        match self {
            SignPattern::Positive => SignPattern::Negative,
            SignPattern::Negative => SignPattern::Positive,
            SignPattern::Alternating { negative_on_odd } => SignPattern::Alternating {
                negative_on_odd: !negative_on_odd,
            },
            s => s,
        }
    }

    fn add(self, other: Self) -> Self {
        use SignPattern::*;
        match (self, other) {
            (Zero, s) | (s, Zero) => s,
            (a, b) if a == b => a,
            _ => Unknown,
        }
    }

    fn mul(self, other: Self) -> Self {
        use SignPattern::*;
        match (self, other) {
            (Zero, _) | (_, Zero) => Zero,
            (Unknown, _) | (_, Unknown) => Unknown,
            (Positive, s) | (s, Positive) => s,
            (Negative, s) | (s, Negative) => s.neg(),
            (Alternating { negative_on_odd: a }, Alternating { negative_on_odd: b }) => {
                if a == b {
                    Positive
                } else {
                    Negative
                }
            }
        }
    }
}

/// Order-of-magnitude class holding on a cofinite set of indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Magnitude {
    Infinitesimal,
    /// limited and bounded away from zero
    Appreciable,
    /// limited, possibly infinitesimal
    Limited,
    Unlimited,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Profile {
    magnitude: Magnitude,
    sign: SignPattern,
}

fn profile(tag: &SeqTag) -> Profile {
    use Magnitude::*;
    match tag {
        SeqTag::Constant(q) if q.is_zero() => Profile {
            magnitude: Infinitesimal,
            sign: SignPattern::Zero,
        },
        SeqTag::Constant(q) => Profile {
            magnitude: Appreciable,
            sign: if q.is_positive() {
                SignPattern::Positive
            } else {
                SignPattern::Negative
            },
        },
        SeqTag::Harmonic => Profile {
            magnitude: Infinitesimal,
            sign: SignPattern::Positive,
        },
        SeqTag::AltHarmonic => Profile {
            magnitude: Infinitesimal,
            sign: SignPattern::Alternating {
                negative_on_odd: true,
            },
        },
        SeqTag::Identity => Profile {
            magnitude: Unlimited,
            sign: SignPattern::Positive,
        },
        SeqTag::ClosedForm { .. } => Profile {
            magnitude: Unknown,
            sign: SignPattern::Unknown,
        },
        SeqTag::Cofinite { base, .. } => profile(base),
        SeqTag::Composite { op, children } => {
            let ps: Vec<Profile> = children.iter().map(profile).collect();
            match (op, ps.as_slice()) {
                (SeqOp::Neg, [p]) => Profile {
                    magnitude: p.magnitude,
                    sign: p.sign.neg(),
                },
                (SeqOp::Add, [p, q]) => add_profile(*p, *q),
                (SeqOp::Sub, [p, q]) => add_profile(
                    *p,
                    Profile {
                        magnitude: q.magnitude,
                        sign: q.sign.neg(),
                    },
                ),
                (SeqOp::Mul, [p, q]) => mul_profile(*p, *q),
                _ => Profile {
                    magnitude: Unknown,
                    sign: SignPattern::Unknown,
                },
            }
        }
    }
}

fn add_profile(p: Profile, q: Profile) -> Profile {
    use Magnitude::*;
    let sign = p.sign.add(q.sign);
    let magnitude = match (p.magnitude, q.magnitude) {
        (Unknown, _) | (_, Unknown) => Unknown,
        (Infinitesimal, m) | (m, Infinitesimal) => m,
        (Unlimited, Unlimited) => {
            if sign == SignPattern::Positive || sign == SignPattern::Negative {
                Unlimited
            } else {
                Unknown
            }
        }
        (Unlimited, _) | (_, Unlimited) => Unlimited,
        (Appreciable, Appreciable)
            if matches!(sign, SignPattern::Positive | SignPattern::Negative) =>
        {
            Appreciable
        }
        _ => Limited,
    };
    Profile { magnitude, sign }
}

fn mul_profile(p: Profile, q: Profile) -> Profile {
    use Magnitude::*;
    let sign = p.sign.mul(q.sign);
    if sign == SignPattern::Zero {
        return Profile {
            magnitude: Infinitesimal,
            sign,
        };
    }
    let magnitude = match (p.magnitude, q.magnitude) {
        (Unknown, _) | (_, Unknown) => Unknown,
        (Infinitesimal, Unlimited) | (Unlimited, Infinitesimal) => Unknown,
        (Limited, Unlimited) | (Unlimited, Limited) => Unknown,
        (Unlimited, _) | (_, Unlimited) => Unlimited,
        (Infinitesimal, _) | (_, Infinitesimal) => Infinitesimal,
        (Appreciable, Appreciable) => Appreciable,
        _ => Limited,
    };
    Profile { magnitude, sign }
}

type Generator = Arc<dyn Fn(u64) -> Rational + Send + Sync>;
type ConvModulus = Arc<dyn Fn(Precision) -> Option<u64> + Send + Sync>;

/// A representative `<u_n : n >= 1>` of a hyperreal.
#[derive(Clone)]
pub struct HSeq {
    generator: Generator,
    tag: SeqTag,
    conv_modulus: Option<ConvModulus>,
}

impl fmt::Debug for HSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HSeq")
            .field("tag", &self.tag.to_string())
            .field("conv_modulus", &self.conv_modulus.is_some())
            .finish()
    }
}

fn pow2(k: u32) -> Option<u64> {
    1u64.checked_shl(k).filter(|_| k < 64)
}

impl HSeq {
    pub fn constant(q: Rational) -> HSeq {
        let value = q.clone();
        HSeq {
            generator: Arc::new(move |_| value.clone()),
            tag: SeqTag::Constant(q),
            conv_modulus: Some(Arc::new(|_| Some(1))),
        }
    }

    /// `1/n`, with `N(k) = 2^k`.
    pub fn harmonic() -> HSeq {
        HSeq {
            generator: Arc::new(|n| Rational::new(1, n).expect("n >= 1")),
            tag: SeqTag::Harmonic,
            conv_modulus: Some(Arc::new(|k| pow2(k.get()))),
        }
    }

    /// `(-1)^n / n`, with `N(k) = 2^(k+1) + 1` since `|u_n - u_m| <= 2/min(n, m)`.
    pub fn alt_harmonic() -> HSeq {
        HSeq {
            generator: Arc::new(|n| {
                let q = Rational::new(1, n).expect("n >= 1");
                if n % 2 == 1 {
                    -q
                } else {
                    q
                }
            }),
            tag: SeqTag::AltHarmonic,
            conv_modulus: Some(Arc::new(|k| pow2(k.get() + 1)?.checked_add(1))),
        }
    }

    /// `n`.
    pub fn identity() -> HSeq {
        HSeq {
            generator: Arc::new(Rational::from),
            tag: SeqTag::Identity,
            conv_modulus: None,
        }
    }

    pub fn closed_form<F>(name: impl Into<String>, flags: TailFlags, generator: F) -> HSeq
    where
        F: Fn(u64) -> Rational + Send + Sync + 'static,
    {
        HSeq {
            generator: Arc::new(generator),
            tag: SeqTag::ClosedForm {
                name: name.into(),
                flags,
            },
            conv_modulus: None,
        }
    }

    /// Attaches a convergence modulus: `|u_n - u_m| < 2^-k` for
    /// `n, m >= N(k)`. `None` from `N` signals index overflow.
    pub fn with_conv_modulus<F>(mut self, modulus: F) -> HSeq
    where
        F: Fn(Precision) -> Option<u64> + Send + Sync + 'static,
    {
        self.conv_modulus = Some(Arc::new(modulus));
        self
    }

    /// Replaces the first terms; the result represents the same hyperreal.
    pub fn with_prefix(&self, prefix: Vec<Rational>) -> HSeq {
        let len = prefix.len() as u64;
        let base = self.generator.clone();
        let conv_modulus = self
            .conv_modulus
            .clone()
            .map(|m| -> ConvModulus { Arc::new(move |k| m(k).map(|n| n.max(len + 1))) });
        HSeq {
            generator: Arc::new(move |n| match prefix.get((n as usize).wrapping_sub(1)) {
                Some(q) if n >= 1 => q.clone(),
                _ => base(n),
            }),
            tag: SeqTag::Cofinite {
                base: Box::new(self.tag.clone()),
                prefix_len: len,
            },
            conv_modulus,
        }
    }

    pub fn tag(&self) -> &SeqTag {
        &self.tag
    }

    pub fn has_conv_modulus(&self) -> bool {
        self.conv_modulus.is_some()
    }

    /// `u_n` for `n >= 1`.
    pub fn term(&self, n: u64) -> Rational {
        (self.generator)(n)
    }

    pub fn conv_modulus(&self, k: Precision) -> Option<u64> {
        self.conv_modulus.as_ref().and_then(|m| m(k))
    }

    fn composite(
        op: SeqOp,
        children: &[&HSeq],
        generator: Generator,
        conv_modulus: Option<ConvModulus>,
    ) -> HSeq {
        HSeq {
            generator,
            tag: SeqTag::Composite {
                op,
                children: children.iter().map(|c| c.tag.clone()).collect(),
            },
            conv_modulus,
        }
    }

    pub fn neg(&self) -> HSeq {
        let g = self.generator.clone();
        Self::composite(
            SeqOp::Neg,
            &[self],
            Arc::new(move |n| -g(n)),
            self.conv_modulus.clone(),
        )
    }

    pub fn add(&self, other: &HSeq) -> HSeq {
        self.additive(other, SeqOp::Add)
    }

    pub fn sub(&self, other: &HSeq) -> HSeq {
        self.additive(other, SeqOp::Sub)
    }

    fn additive(&self, other: &HSeq, op: SeqOp) -> HSeq {
        let (g, h) = (self.generator.clone(), other.generator.clone());
        let generator: Generator = if op == SeqOp::Add {
            Arc::new(move |n| g(n) + h(n))
        } else {
            Arc::new(move |n| g(n) - h(n))
        };
        let modulus = match (&self.conv_modulus, &other.conv_modulus) {
            (Some(mu), Some(mv)) => {
                let (mu, mv) = (mu.clone(), mv.clone());
                Some(
                    Arc::new(move |k: Precision| Some(mu(k.shift(1))?.max(mv(k.shift(1))?)))
                        as ConvModulus,
                )
            }
            _ => None,
        };
        Self::composite(op, &[self, other], generator, modulus)
    }

    /// Pointwise product. The combined modulus uses `|u_n| < |u_{N(0)}| + 1`
    /// for `n >= N(0)`.
    pub fn mul(&self, other: &HSeq) -> HSeq {
        let (g, h) = (self.generator.clone(), other.generator.clone());
        let generator: Generator = Arc::new(move |n| g(n) * h(n));
        let modulus = match (&self.conv_modulus, &other.conv_modulus) {
            (Some(mu), Some(mv)) => {
                let (mu, mv) = (mu.clone(), mv.clone());
                let (gu, gv) = (self.generator.clone(), other.generator.clone());
                Some(Arc::new(move |k: Precision| {
                    let (nu0, nv0) = (mu(Precision(0))?, mv(Precision(0))?);
                    let bu = gu(nu0).abs() + Rational::one();
                    let bv = gv(nv0).abs() + Rational::one();
                    let shift = 1 + bu.max(bv).ceil_log2();
                    let n = mu(k.shift(shift))?.max(mv(k.shift(shift))?);
                    Some(n.max(nu0).max(nv0))
                }) as ConvModulus)
            }
            _ => None,
        };
        Self::composite(SeqOp::Mul, &[self, other], generator, modulus)
    }

    pub fn samples(&self, indices: impl IntoIterator<Item = u64>) -> Vec<(u64, Rational)> {
        indices.into_iter().map(|n| (n, self.term(n))).collect()
    }

    /// `{"tag", "samples": [[n, q], ...], "horizon"}` with samples `1..=horizon`.
    pub fn to_json(&self, horizon: u64) -> serde_json::Value {
        samples_json(&self.tag, &self.samples(1..=horizon), horizon)
    }

    /// Whether the generator matches what the tag claims, on `1..=horizon`
    /// for named sequences and on the window `[horizon/2, horizon]` for tail
    /// properties.
    pub fn tag_consistent(&self, horizon: u64) -> bool {
        let start = match &self.tag {
            SeqTag::Cofinite { prefix_len, .. } => prefix_len + 1,
            _ => 1,
        };
        let named_ok = (start..=horizon).all(|n| match named_term(&self.tag, n) {
            Some(q) => q == self.term(n),
            None => true,
        });
        let window: Vec<(u64, Rational)> = self.samples(window(horizon).filter(|n| *n >= start));
        let sign_ok = match profile(&self.tag).sign {
            SignPattern::Positive => window.iter().all(|(_, q)| q.is_positive()),
            SignPattern::Negative => window.iter().all(|(_, q)| q.is_negative()),
            SignPattern::Zero => window.iter().all(|(_, q)| q.is_zero()),
            SignPattern::Alternating { negative_on_odd } => window.iter().all(|(n, q)| {
                if (n % 2 == 1) == negative_on_odd {
                    q.is_negative()
                } else {
                    q.is_positive()
                }
            }),
            SignPattern::Unknown => true,
        };
        let flags_ok = match &self.tag {
            SeqTag::ClosedForm { flags, .. } => window.windows(2).all(|w| {
                (!flags.nonincreasing || w[1].1 <= w[0].1)
                    && (!flags.nondecreasing || w[1].1 >= w[0].1)
            }),
            _ => true,
        };
        named_ok && sign_ok && flags_ok
    }
}

fn named_term(tag: &SeqTag, n: u64) -> Option<Rational> {
    match tag {
        SeqTag::Constant(q) => Some(q.clone()),
        SeqTag::Harmonic => Some(Rational::new(1, n).ok()?),
        SeqTag::AltHarmonic => {
            let q = Rational::new(1, n).ok()?;
            Some(if n % 2 == 1 { -q } else { q })
        }
        SeqTag::Identity => Some(Rational::from(n)),
        SeqTag::Cofinite { base, .. } => named_term(base, n),
        _ => None,
    }
}

fn samples_json(tag: &SeqTag, samples: &[(u64, Rational)], horizon: u64) -> serde_json::Value {
    let samples: Vec<serde_json::Value> = samples
        .iter()
        .map(|(n, q)| serde_json::json!([n, q.to_json()]))
        .collect();
    serde_json::json!({
        "tag": tag.to_string(),
        "samples": samples,
        "horizon": horizon,
    })
}

fn window(horizon: u64) -> std::ops::RangeInclusive<u64> {
    horizon.div_ceil(2).max(1)..=horizon
}

/// Looks up one of the named sequences `const:q`, `harmonic`,
/// `altharmonic`, `identity`.
pub fn named_sequence(name: &str) -> Result<HSeq, HyperError> {
    match name.trim() {
        "harmonic" => Ok(HSeq::harmonic()),
        "altharmonic" => Ok(HSeq::alt_harmonic()),
        "identity" => Ok(HSeq::identity()),
        other => match other.strip_prefix("const:") {
            Some(q) => q
                .parse::<Rational>()
                .map(HSeq::constant)
                .map_err(|e| HyperError::Domain(e.to_string())),
            None => Err(HyperError::Domain(format!(
                "unknown sequence {other:?}; expected const:q, harmonic, altharmonic or identity"
            ))),
        },
    }
}

// ---------------------------------------------------------------------------
// classification

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictValue {
    True,
    False,
    UltrafilterDependent,
    ObservedOnly { holds_on_window: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterVerdict {
    pub value: VerdictValue,
    pub horizon: u64,
}

impl FilterVerdict {
    pub fn is_exact(&self) -> bool {
        !matches!(self.value, VerdictValue::ObservedOnly { .. })
    }
}

impl fmt::Display for FilterVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value {
            VerdictValue::True => f.write_str("true"),
            VerdictValue::False => f.write_str("false"),
            VerdictValue::UltrafilterDependent => f.write_str("ultrafilter-dependent"),
            VerdictValue::ObservedOnly { holds_on_window } => {
                write!(
                    f,
                    "observed-only ({} up to n = {})",
                    holds_on_window, self.horizon
                )
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservedSign {
    Positive,
    Negative,
    Zero,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignVerdict {
    Positive,
    Negative,
    Zero,
    UltrafilterDependent,
    ObservedOnly(ObservedSign),
}

impl fmt::Display for SignVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignVerdict::Positive => f.write_str("positive"),
            SignVerdict::Negative => f.write_str("negative"),
            SignVerdict::Zero => f.write_str("zero"),
            SignVerdict::UltrafilterDependent => f.write_str("ultrafilter-dependent"),
            SignVerdict::ObservedOnly(s) => {
                write!(f, "observed-only ({})", format!("{s:?}").to_lowercase())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub infinitesimal: FilterVerdict,
    pub limited: FilterVerdict,
    pub sign: SignVerdict,
}

impl Classification {
    pub fn to_json(&self) -> serde_json::Value {
        let verdict = |v: &FilterVerdict| match v.value {
            VerdictValue::True => serde_json::json!({"value": "true", "horizon": v.horizon}),
            VerdictValue::False => serde_json::json!({"value": "false", "horizon": v.horizon}),
            VerdictValue::UltrafilterDependent => {
                serde_json::json!({"value": "ultrafilter-dependent", "horizon": v.horizon})
            }
            VerdictValue::ObservedOnly { holds_on_window } => serde_json::json!({
                "value": "observed-only",
                "holds_on_window": holds_on_window,
                "horizon": v.horizon,
            }),
        };
        serde_json::json!({
            "infinitesimal": verdict(&self.infinitesimal),
            "limited": verdict(&self.limited),
            "sign": self.sign.to_string(),
        })
    }
}

/// Tag-derived verdicts where the tail behaviour is known; window inspection
/// up to `horizon` otherwise.
///
/// On the window `[horizon/2, horizon]` a sequence is observed infinitesimal
/// when every `|u_n| <= 2^-floor(log2(horizon)/2)`; it is observed limited
/// when every `|u_n|`, `n <= horizon`, is at most the reciprocal of that.
pub fn classify(u: &HSeq, horizon: u64) -> Result<Classification, HyperError> {
    if horizon < 8 {
        return Err(HyperError::Domain(format!(
            "horizon must be at least 8, got {horizon}"
        )));
    }
    let p = profile(&u.tag);
    let exponent = (63 - horizon.leading_zeros()) / 2;
    let small = Rational::pow2_neg(exponent);
    let large = Rational::pow2(exponent);
    let tail = u.samples(window(horizon));
    let verdict = |value| FilterVerdict { value, horizon };

    let infinitesimal = match p.magnitude {
        Magnitude::Infinitesimal => verdict(VerdictValue::True),
        Magnitude::Appreciable | Magnitude::Unlimited => verdict(VerdictValue::False),
        Magnitude::Limited | Magnitude::Unknown => verdict(VerdictValue::ObservedOnly {
            holds_on_window: tail.iter().all(|(_, q)| q.abs() <= small),
        }),
    };
    let limited = match p.magnitude {
        Magnitude::Infinitesimal | Magnitude::Appreciable | Magnitude::Limited => {
            verdict(VerdictValue::True)
        }
        Magnitude::Unlimited => verdict(VerdictValue::False),
        Magnitude::Unknown => verdict(VerdictValue::ObservedOnly {
            holds_on_window: (1..=horizon).all(|n| u.term(n).abs() <= large),
        }),
    };
    let sign = match p.sign {
        SignPattern::Positive => SignVerdict::Positive,
        SignPattern::Negative => SignVerdict::Negative,
        SignPattern::Zero => SignVerdict::Zero,
        SignPattern::Alternating { .. } => SignVerdict::UltrafilterDependent,
        SignPattern::Unknown => {
            let observed = if tail.iter().all(|(_, q)| q.is_positive()) {
                ObservedSign::Positive
            } else if tail.iter().all(|(_, q)| q.is_negative()) {
                ObservedSign::Negative
            } else if tail.iter().all(|(_, q)| q.is_zero()) {
                ObservedSign::Zero
            } else {
                ObservedSign::Mixed
            };
            SignVerdict::ObservedOnly(observed)
        }
    };
    Ok(Classification {
        infinitesimal,
        limited,
        sign,
    })
}

/// The standard part as a constructive real: `x_k = u_{N'(k+1)}` where
/// `N'(j) = max(N(0), ..., N(j))`.
pub fn standard_part(u: &HSeq) -> Result<CReal, HyperError> {
    if profile(&u.tag).magnitude == Magnitude::Unlimited {
        return Err(HyperError::NotLimited);
    }
    let modulus = u.conv_modulus.clone().ok_or(HyperError::NoModulus)?;
    let generator = u.generator.clone();
    Ok(CReal::from_fn(format!("st({})", u.tag), move |k| {
        let mut index = 1u64;
        for j in 0..=k.get() + 1 {
            index = index.max(modulus(Precision(j)).ok_or(CRealError::IndexOverflow(k.get()))?);
        }
        Ok(generator(index))
    }))
}

// ---------------------------------------------------------------------------
// hyperfinite grid

fn partition_point(f: &UniformFn, h: u64, i: u64) -> Rational {
    let width = f.b() - f.a();
    f.a() + &(&width * &Rational::new(i, h).expect("h >= 1"))
}

/// First index maximizing `f` over `x_i = a + i(b-a)/h` for `i` in `indices`,
/// found by a left-to-right pass with exact evaluation.
fn first_max(f: &UniformFn, h: u64, indices: impl Iterator<Item = u64>) -> Option<(u64, Rational)> {
    let mut best: Option<(u64, Rational)> = None;
    for i in indices {
        let v = f.eval(&partition_point(f, h, i));
        if best.as_ref().is_none_or(|(_, b)| &v > b) {
            best = Some((i, v));
        }
    }
    best
}

/// The grid argmax at the finite stand-in `H = n` for an unlimited
/// hypernatural, with `n` the same grid size the constructive certificate
/// uses at precision `k`.
pub fn evt_grid_argmax(
    f: &UniformFn,
    k: Precision,
    cap: ResourceCap,
) -> Result<SupCertificate, HyperError> {
    let h = grid_size(f, k, cap)?;
    let (i0, value) = first_max(f, h, 0..=h).expect("nonempty partition");
    Ok(SupCertificate {
        k,
        n: h,
        i0,
        point: partition_point(f, h, i0),
        value,
    })
}

#[derive(Debug, Clone)]
pub struct ArgmaxSequence {
    pub sequence: HSeq,
    pub samples: Vec<(u64, Rational)>,
}

impl ArgmaxSequence {
    pub fn to_json(&self) -> serde_json::Value {
        let horizon = self.samples.last().map(|(n, _)| *n).unwrap_or(0);
        samples_json(self.sequence.tag(), &self.samples, horizon)
    }
}

fn argmax_seq(f: &UniformFn, levels: &[u64]) -> Result<HSeq, HyperError> {
    if levels.is_empty() || levels[0] == 0 || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HyperError::Domain(
            "levels must be positive and strictly increasing".into(),
        ));
    }
    let g = f.clone();
    Ok(HSeq::closed_form(
        format!("argmax({})", f.body()),
        TailFlags::default(),
        move |n| {
            let (i0, _) = first_max(&g, n, 0..=n).expect("nonempty partition");
            partition_point(&g, n, i0)
        },
    ))
}

/// `<x_{i0(n)}>`: the leftmost argmax of the `(n+1)`-point grid. No
/// convergence modulus is attached; the location need not converge.
pub fn evt_argmax_sequence(f: &UniformFn, levels: &[u64]) -> Result<ArgmaxSequence, HyperError> {
    let sequence = argmax_seq(f, levels)?;
    let samples = sequence.samples(levels.iter().copied());
    Ok(ArgmaxSequence { sequence, samples })
}

/// As [`evt_argmax_sequence`], with the modulus that a uniqueness modulus
/// `u` for `f` provides: at level `n >= L(b-a) / (2 delta(k+1))` the grid
/// argmax is `delta(k+1)`-near optimal and so within `2^-(k+1)` of the
/// maximizer.
pub fn evt_argmax_sequence_unique(
    f: &UniformFn,
    levels: &[u64],
    u: &UniquenessModulus,
) -> Result<ArgmaxSequence, HyperError> {
    let base = argmax_seq(f, levels)?;
    let spread = f.lipschitz() * &(f.b() - f.a());
    let u = u.clone();
    let sequence = base.with_conv_modulus(move |k| {
        let delta = u.delta(k.shift(1));
        let need = spread.checked_div(&(&delta * &Rational::from(2u64))).ok()?;
        need.ceil().max(BigInt::one()).to_u64()
    });
    let samples = sequence.samples(levels.iter().copied());
    Ok(ArgmaxSequence { sequence, samples })
}

// ---------------------------------------------------------------------------
// finite transfer instances

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferFormula {
    /// `(forall x in [0,1]) (exists i < n) (i/n <= x < (i+1)/n)`
    PartitionExists,
    /// `(exists i0 < n) (forall i < n) (f(x_i0) >= f(x_i))`
    FiniteMaxExists,
}

impl fmt::Display for TransferFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransferFormula::PartitionExists => "PartitionExists",
            TransferFormula::FiniteMaxExists => "FiniteMaxExists",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// `i/n <= x < (i+1)/n` throughout
    Strict,
    /// the last subinterval is closed: `(n-1)/n <= x <= 1`
    ClosedLast,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Strict => "strict",
            Convention::ClosedLast => "closed-last",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransferWitness {
    Partition {
        x: Rational,
        i: Option<u64>,
        convention: Convention,
    },
    Max {
        i0: u64,
        point: Rational,
        value: Rational,
    },
}

impl TransferWitness {
    fn to_json(&self) -> serde_json::Value {
        match self {
            TransferWitness::Partition { x, i, convention } => serde_json::json!({
                "x": x.to_json(),
                "i": i,
                "convention": convention.to_string(),
            }),
            TransferWitness::Max { i0, point, value } => serde_json::json!({
                "i0": i0,
                "point": point.to_json(),
                "value": value.to_json(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferReport {
    pub formula: TransferFormula,
    pub n: u64,
    pub witnesses: Vec<TransferWitness>,
    pub holds: bool,
    pub convention: Convention,
    /// Samples with no witness under the strict form.
    pub strict_discrepancies: Vec<Rational>,
}

impl TransferReport {
    pub fn to_json(&self) -> serde_json::Value {
        let discrepancies: Vec<serde_json::Value> = self
            .strict_discrepancies
            .iter()
            .map(Rational::to_json)
            .collect();
        serde_json::json!({
            "formula": self.formula.to_string(),
            "n": self.n,
            "witnesses": self.witnesses.iter().map(TransferWitness::to_json).collect::<Vec<_>>(),
            "holds": self.holds,
            "convention": self.convention.to_string(),
            "strict_discrepancies": discrepancies,
        })
    }
}

/// Checks one bounded-quantifier instance at level `n` by exhaustive search.
pub fn finite_transfer_check(
    formula: TransferFormula,
    n: u64,
    f: Option<&UniformFn>,
    samples: &[Rational],
) -> Result<TransferReport, HyperError> {
    if n == 0 {
        return Err(HyperError::Domain("n must be at least 1".into()));
    }
    match formula {
        TransferFormula::PartitionExists => partition_instance(n, samples),
        TransferFormula::FiniteMaxExists => {
            let f =
                f.ok_or_else(|| HyperError::Domain("FiniteMaxExists needs a function".into()))?;
            let (i0, value) = first_max(f, n, 0..n).expect("n >= 1");
            let holds = (0..n).all(|i| value >= f.eval(&partition_point(f, n, i)));
            Ok(TransferReport {
                formula,
                n,
                witnesses: vec![TransferWitness::Max {
                    i0,
                    point: partition_point(f, n, i0),
                    value,
                }],
                holds,
                convention: Convention::Strict,
                strict_discrepancies: Vec::new(),
            })
        }
    }
}

fn partition_instance(n: u64, samples: &[Rational]) -> Result<TransferReport, HyperError> {
    let (zero, one) = (Rational::zero(), Rational::one());
    let mut seen = BTreeSet::new();
    let mut witnesses = Vec::new();
    let mut discrepancies = Vec::new();
    let mut holds = true;
    let cell = |i: u64| Rational::new(i, n).expect("n >= 1");
    for x in samples {
        if x < &zero || x > &one {
            return Err(HyperError::Domain(format!(
                "sample {x} lies outside [0, 1]"
            )));
        }
        if !seen.insert(x.clone()) {
            continue;
        }
        let strict = (0..n).find(|&i| &cell(i) <= x && x < &cell(i + 1));
        let witness = match strict {
            Some(i) => TransferWitness::Partition {
                x: x.clone(),
                i: Some(i),
                convention: Convention::Strict,
            },
            None => {
                discrepancies.push(x.clone());
                let closed = (0..n)
                    .find(|&i| &cell(i) <= x && (x < &cell(i + 1) || (i == n - 1 && x <= &one)));
                holds &= closed.is_some();
                TransferWitness::Partition {
                    x: x.clone(),
                    i: closed,
                    convention: Convention::ClosedLast,
                }
            }
        };
        witnesses.push(witness);
    }
    let convention = if discrepancies.is_empty() {
        Convention::Strict
    } else {
        Convention::ClosedLast
    };
    Ok(TransferReport {
        formula: TransferFormula::PartitionExists,
        n,
        witnesses,
        holds,
        convention,
        strict_discrepancies: discrepancies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::creal::Verdict3;
    use crate::funcspace::{parse, Expr};
    use crate::supengine::sup_at;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn unit(src: &str) -> UniformFn {
        UniformFn::unit(parse(src).unwrap())
    }

    fn assert_promise(x: &CReal, max_k: u32) {
        for k in 0..=max_k {
            let xk = x.approx(Precision(k)).unwrap();
            for n in 0..=4 {
                let xkn = x.approx(Precision(k + n)).unwrap();
                assert!(
                    (&xk - &xkn).abs() < Precision(k).eps(),
                    "{} k={k} n={n}",
                    x.label()
                );
            }
        }
    }

    #[test]
    fn arithmetic_examples() {
        let h = HSeq::harmonic();
        let s = h.add(&h);
        for n in 1..=50 {
            assert_eq!(s.term(n), Rational::new(2, n).unwrap());
        }
        let c = classify(&s, 64).unwrap();
        assert_eq!(c.infinitesimal.value, VerdictValue::True);

        let one = HSeq::identity().mul(&HSeq::harmonic());
        assert!((1..=100).all(|n| one.term(n) == r("1")));

        let alt = HSeq::alt_harmonic();
        let twice = alt.add(&alt);
        for n in 1..=100u64 {
            let expected = Rational::new(if n % 2 == 0 { 2i64 } else { -2 }, n as i64).unwrap();
            assert_eq!(twice.term(n), expected);
        }
        assert_eq!(
            classify(&twice, 64).unwrap().sign,
            SignVerdict::UltrafilterDependent
        );
        assert!(twice.tag_consistent(100));
    }

    #[test]
    fn classify_examples() {
        let c = classify(&HSeq::alt_harmonic(), 64).unwrap();
        assert_eq!(c.infinitesimal.value, VerdictValue::True);
        assert_eq!(c.sign, SignVerdict::UltrafilterDependent);
        let c = classify(&HSeq::harmonic(), 64).unwrap();
        assert_eq!(c.infinitesimal.value, VerdictValue::True);
        assert_eq!(c.sign, SignVerdict::Positive);
        let c = classify(&HSeq::identity(), 64).unwrap();
        assert_eq!(c.limited.value, VerdictValue::False);
        assert_eq!(c.infinitesimal.value, VerdictValue::False);
        let c = classify(&HSeq::constant(r("0")), 8).unwrap();
        assert_eq!(
            (c.infinitesimal.value, c.sign),
            (VerdictValue::True, SignVerdict::Zero)
        );
        let c = classify(&HSeq::constant(r("-2/3")), 8).unwrap();
        assert_eq!(
            (c.infinitesimal.value, c.sign),
            (VerdictValue::False, SignVerdict::Negative)
        );
        assert!(matches!(
            classify(&HSeq::harmonic(), 7),
            Err(HyperError::Domain(_))
        ));
    }

    #[test]
    fn alt_harmonic_sign_never_decided() {
        for horizon in [8, 9, 64, 1000, 4097] {
            let c = classify(&HSeq::alt_harmonic(), horizon).unwrap();
            assert_eq!(c.sign, SignVerdict::UltrafilterDependent);
            assert_eq!(c.infinitesimal.horizon, horizon);
        }
    }

    #[test]
    fn undecided_tags_stay_observed() {
        // n * (1/n) is constantly 1 but the tags cannot prove it
        let c = classify(&HSeq::identity().mul(&HSeq::harmonic()), 64).unwrap();
        assert_eq!(
            c.infinitesimal.value,
            VerdictValue::ObservedOnly {
                holds_on_window: false
            }
        );
        assert_eq!(
            c.limited.value,
            VerdictValue::ObservedOnly {
                holds_on_window: true
            }
        );
        assert_eq!(c.sign, SignVerdict::Positive);

        let sq = HSeq::closed_form(
            "1/n^2",
            TailFlags {
                nonincreasing: true,
                nondecreasing: false,
            },
            |n| Rational::new(1, n * n).unwrap(),
        );
        assert!(sq.tag_consistent(64));
        let c = classify(&sq, 64).unwrap();
        assert!(!c.infinitesimal.is_exact());
        assert_eq!(
            c.infinitesimal.value,
            VerdictValue::ObservedOnly {
                holds_on_window: true
            }
        );
        let lying = HSeq::closed_form(
            "n",
            TailFlags {
                nonincreasing: true,
                nondecreasing: false,
            },
            Rational::from,
        );
        assert!(!lying.tag_consistent(64));

        // harmonic minus harmonic cancels, which sign patterns cannot see
        let c = classify(&HSeq::harmonic().sub(&HSeq::harmonic()), 64).unwrap();
        assert_eq!(c.infinitesimal.value, VerdictValue::True);
        assert_eq!(c.sign, SignVerdict::ObservedOnly(ObservedSign::Zero));
    }

    #[test]
    fn composite_tags() {
        let three_plus = HSeq::constant(r("3")).add(&HSeq::harmonic());
        let c = classify(&three_plus, 64).unwrap();
        assert_eq!(c.infinitesimal.value, VerdictValue::False);
        assert_eq!(c.limited.value, VerdictValue::True);
        assert_eq!(c.sign, SignVerdict::Positive);
        let h2 = HSeq::identity().add(&HSeq::identity());
        assert_eq!(
            classify(&h2, 64).unwrap().limited.value,
            VerdictValue::False
        );
        let hm = HSeq::identity().mul(&HSeq::constant(r("-1/2")));
        let c = classify(&hm, 64).unwrap();
        assert_eq!(
            (c.limited.value, c.sign),
            (VerdictValue::False, SignVerdict::Negative)
        );
        let sq = HSeq::alt_harmonic().mul(&HSeq::alt_harmonic());
        assert_eq!(classify(&sq, 64).unwrap().sign, SignVerdict::Positive);
        assert!(sq.tag_consistent(64));
        let flipped = HSeq::alt_harmonic().mul(&HSeq::alt_harmonic().neg());
        assert_eq!(classify(&flipped, 64).unwrap().sign, SignVerdict::Negative);
        assert_eq!(
            HSeq::alt_harmonic()
                .add(&HSeq::harmonic())
                .tag()
                .to_string(),
            "add(altharmonic,harmonic)"
        );
    }

    #[test]
    fn standard_part_examples() {
        let u = HSeq::constant(r("3")).add(&HSeq::harmonic());
        let st = standard_part(&u).unwrap();
        assert_promise(&st, 12);
        let three = CReal::from_rational(r("3"));
        for k in 0..=12 {
            assert!((st.approx(Precision(k)).unwrap() - r("3")).abs() <= Precision(k).eps());
            assert_eq!(
                st.compare(&three, Precision(k)).unwrap().verdict,
                Verdict3::Undetermined
            );
        }
        let st = standard_part(&HSeq::alt_harmonic()).unwrap();
        assert_promise(&st, 12);
        for k in 0..=12 {
            assert!(st.approx(Precision(k)).unwrap().abs() <= Precision(k).eps());
        }
        assert_eq!(
            standard_part(&HSeq::identity()).unwrap_err(),
            HyperError::NotLimited
        );
        let bare = HSeq::closed_form("1/n", TailFlags::default(), |n| {
            Rational::new(1, n).unwrap()
        });
        assert_eq!(standard_part(&bare).unwrap_err(), HyperError::NoModulus);
        let st = standard_part(&bare.with_conv_modulus(|k| Some(1u64 << k.get()))).unwrap();
        assert!(st.approx(Precision(10)).unwrap() <= Precision(10).eps());
    }

    #[test]
    fn alt_harmonic_modulus_keeps_promise() {
        let u = HSeq::alt_harmonic();
        for k in 0..10u32 {
            let n0 = u.conv_modulus(Precision(k)).unwrap();
            for n in n0..n0 + 40 {
                for m in n0..n0 + 40 {
                    assert!((u.term(n) - u.term(m)).abs() < Precision(k).eps());
                }
            }
        }
    }

    #[test]
    fn standard_part_is_additive() {
        let pairs = [
            (
                HSeq::constant(r("1/3")).add(&HSeq::harmonic()),
                HSeq::alt_harmonic(),
            ),
            (
                HSeq::harmonic().mul(&HSeq::constant(r("5"))),
                HSeq::constant(r("-2/7")),
            ),
            (
                HSeq::alt_harmonic().mul(&HSeq::harmonic()),
                HSeq::constant(r("2")).sub(&HSeq::harmonic()),
            ),
        ];
        for (u, v) in pairs {
            let lhs = standard_part(&u.add(&v)).unwrap();
            let rhs = standard_part(&u).unwrap().add(&standard_part(&v).unwrap());
            assert_promise(&lhs, 10);
            for k in 0..=12 {
                assert_eq!(
                    lhs.compare(&rhs, Precision(k)).unwrap().verdict,
                    Verdict3::Undetermined
                );
            }
            let prod = standard_part(&u.mul(&v)).unwrap();
            assert_promise(&prod, 10);
            let rprod = standard_part(&u).unwrap().mul(&standard_part(&v).unwrap());
            for k in 0..=12 {
                assert_eq!(
                    prod.compare(&rprod, Precision(k)).unwrap().verdict,
                    Verdict3::Undetermined
                );
            }
        }
    }

    #[test]
    fn cofinite_changes_are_invisible() {
        let base = HSeq::harmonic();
        let altered = base.with_prefix(vec![r("100"), r("-7"), r("0")]);
        assert_eq!(altered.term(2), r("-7"));
        assert_eq!(altered.term(4), r("1/4"));
        assert!(altered.tag_consistent(64));
        assert_eq!(
            classify(&base, 64).unwrap(),
            classify(&altered, 64).unwrap()
        );
        let (sb, sa) = (
            standard_part(&base).unwrap(),
            standard_part(&altered).unwrap(),
        );
        for k in 2..=12 {
            assert_eq!(
                sb.approx(Precision(k)).unwrap(),
                sa.approx(Precision(k)).unwrap()
            );
        }
        let other = HSeq::alt_harmonic();
        let (x, y) = (base.add(&other), altered.add(&other));
        for n in 4..=64 {
            assert_eq!(x.term(n), y.term(n));
        }
        assert_eq!(classify(&x, 64).unwrap(), classify(&y, 64).unwrap());
        assert_eq!(
            classify(&HSeq::identity().with_prefix(vec![r("0"); 10]), 64)
                .unwrap()
                .limited
                .value,
            VerdictValue::False
        );
    }

    #[test]
    fn named_sequences() {
        assert_eq!(named_sequence("const:3/4").unwrap().term(9), r("3/4"));
        assert_eq!(named_sequence("altharmonic").unwrap().term(3), r("-1/3"));
        assert!(named_sequence("fibonacci").is_err());
        assert!(named_sequence("const:1/0").is_err());
        let v = named_sequence("harmonic").unwrap().to_json(8);
        assert_eq!(v["tag"], "harmonic");
        assert_eq!(v["horizon"], 8);
        assert_eq!(v["samples"].as_array().unwrap().len(), 8);
        assert_eq!(v["samples"][1][0], 2);
        assert_eq!(v["samples"][1][1]["den"], "2");
    }

    #[test]
    fn grid_argmax_examples() {
        let cap = ResourceCap::default();
        let f = unit("x*(1-x)");
        let c = evt_grid_argmax(&f, Precision(12), cap).unwrap();
        assert!((&c.point - &r("1/2")).abs() <= Rational::pow2_neg(11));
        assert!((&c.value - &r("1/4")).abs() <= Rational::pow2_neg(12));
        assert_eq!(c, sup_at(&f, Precision(12), cap).unwrap());
        let c = evt_grid_argmax(&unit("x"), Precision(5), cap).unwrap();
        assert_eq!((c.point, c.value), (r("1"), r("1")));
    }

    #[test]
    fn argmax_sequence_examples() {
        let f = unit("x*(1-x)");
        let levels: Vec<u64> = (1..=40).collect();
        let seq = evt_argmax_sequence(&f, &levels).unwrap();
        assert!(!seq.sequence.has_conv_modulus());
        for (n, p) in &seq.samples {
            if n % 2 == 0 {
                assert_eq!(p, &r("1/2"));
            }
        }
        assert_eq!(
            standard_part(&seq.sequence).unwrap_err(),
            HyperError::NoModulus
        );

        let u: UniquenessModulus = "1/4/4^k".parse().unwrap();
        let seq = evt_argmax_sequence_unique(&f, &levels, &u).unwrap();
        let st = standard_part(&seq.sequence).unwrap();
        for k in 0..=5 {
            assert!((st.approx(Precision(k)).unwrap() - r("1/2")).abs() <= Precision(k).eps());
        }

        let c = UniformFn::parse("2/3", r("-1"), r("1")).unwrap();
        let seq = evt_argmax_sequence(&c, &[1, 2, 5, 9]).unwrap();
        assert!(seq.samples.iter().all(|(_, p)| p == &r("-1")));

        let tiny = Rational::pow2_neg(20);
        let up =
            evt_argmax_sequence(&UniformFn::unit(Expr::linear(tiny.clone())), &levels).unwrap();
        let down = evt_argmax_sequence(&UniformFn::unit(Expr::linear(-tiny)), &levels).unwrap();
        for ((_, p), (_, q)) in up.samples.iter().zip(&down.samples) {
            assert_eq!((p, q), (&r("1"), &r("0")));
        }
        assert!(evt_argmax_sequence(&f, &[3, 3]).is_err());
        assert!(evt_argmax_sequence(&f, &[0, 3]).is_err());
        assert!(evt_argmax_sequence(&f, &[]).is_err());
        let v = up.to_json();
        assert_eq!(v["horizon"], 40);
        assert!(v["tag"]
            .as_str()
            .unwrap()
            .starts_with("closed-form:argmax("));
    }

    #[test]
    fn transfer_examples() {
        let rep = finite_transfer_check(TransferFormula::PartitionExists, 10, None, &[r("37/100")])
            .unwrap();
        assert_eq!(
            rep.witnesses,
            vec![TransferWitness::Partition {
                x: r("37/100"),
                i: Some(3),
                convention: Convention::Strict
            }]
        );
        assert!(rep.holds);
        assert_eq!(rep.convention, Convention::Strict);

        let rep = finite_transfer_check(
            TransferFormula::PartitionExists,
            10,
            None,
            &[r("1"), r("1"), r("0")],
        )
        .unwrap();
        assert_eq!(rep.strict_discrepancies, vec![r("1")]);
        assert_eq!(
            rep.witnesses[0],
            TransferWitness::Partition {
                x: r("1"),
                i: Some(9),
                convention: Convention::ClosedLast
            }
        );
        assert_eq!(rep.witnesses.len(), 2);
        assert!(rep.holds);
        assert_eq!(rep.to_json()["convention"], "closed-last");

        let f = unit("x");
        let rep =
            finite_transfer_check(TransferFormula::FiniteMaxExists, 4, Some(&f), &[]).unwrap();
        assert_eq!(
            rep.witnesses,
            vec![TransferWitness::Max {
                i0: 3,
                point: r("3/4"),
                value: r("3/4")
            }]
        );
        assert!(rep.holds);

        assert!(finite_transfer_check(TransferFormula::FiniteMaxExists, 4, None, &[]).is_err());
        assert!(finite_transfer_check(TransferFormula::PartitionExists, 0, None, &[]).is_err());
        assert!(
            finite_transfer_check(TransferFormula::PartitionExists, 3, None, &[r("3/2")]).is_err()
        );
    }
}
