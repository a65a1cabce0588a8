//! Certified suprema from finite grids.
//!
//! For `f` with modulus `alpha`, the grid `x_i = a + i*(b-a)/n`, `i = 0..=n`,
//! with `n = w * 2^alpha(k) + 1` and `w = max(1, ceil(b - a))` puts every
//! point of `[a, b]` closer than `2^-alpha(k)` to a grid point. The grid
//! maximum `v` therefore satisfies `v <= sup f <= v + 2^-k`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;
use thiserror::Error;

use crate::creal::{CReal, CRealError, Comparison3, Verdict3};
use crate::funcspace::{Expr, GridProgram, Scaled, UniformFn};
use crate::ratcore::{Precision, Rational};

pub const DEFAULT_CAP_LOG2: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SupError {
    #[error("grid of {required} points exceeds the cap of 2^{cap_log2}")]
    ResourceLimit { required: String, cap_log2: u32 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid uniqueness modulus: {0}")]
    InvalidModulus(String),
}

impl From<SupError> for CRealError {
    fn from(e: SupError) -> Self {
        match e {
            SupError::ResourceLimit { .. } => CRealError::ResourceLimit(e.to_string()),
            other => CRealError::Domain(other.to_string()),
        }
    }
}

/// Largest grid (in points) any single certificate may evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceCap {
    pub log2: u32,
}

impl Default for ResourceCap {
    fn default() -> Self {
        ResourceCap {
            log2: DEFAULT_CAP_LOG2,
        }
    }
}

impl ResourceCap {
    pub fn new(log2: u32) -> Self {
        ResourceCap { log2 }
    }
}

/// Number of subintervals used at precision `k`.
pub fn grid_size(f: &UniformFn, k: Precision, cap: ResourceCap) -> Result<u64, SupError> {
    let width = (f.b() - f.a()).ceil().max(BigInt::one());
    let alpha = f.modulus(k);
    let n: BigInt = (width << alpha) + 1;
    // points are 0..=n
    if n.bits() > 64 || &n + BigInt::one() > BigInt::one() << cap.log2 {
        return Err(SupError::ResourceLimit {
            required: (n + BigInt::one()).to_string(),
            cap_log2: cap.log2,
        });
    }
    Ok(u64::try_from(n).expect("checked above"))
}

fn step(f: &UniformFn, n: u64) -> Rational {
    (f.b() - f.a())
        .checked_div(&Rational::from(n))
        .expect("n >= 1")
}

pub fn grid_point(f: &UniformFn, n: u64, i: u64) -> Rational {
    f.a() + &(&step(f, n) * &Rational::from(i))
}

/// A partition of `[a, b]` into `n` equal pieces with exact values at the
/// `n + 1` partition points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub n: u64,
    pub points: Vec<Rational>,
    pub values: Vec<Rational>,
}

impl Grid {
    /// Smallest index attaining the maximum value.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate().skip(1) {
            if v > &self.values[best] {
                best = i;
            }
        }
        best
    }
}

/// The grid whose values are `2^-k`-dense in the range of `f`.
pub fn total_bound(f: &UniformFn, k: Precision, cap: ResourceCap) -> Result<Grid, SupError> {
    let n = grid_size(f, k, cap)?;
    let h = step(f, n);
    let prog = GridProgram::compile(f.body(), f.a(), &h);
    let values: Vec<Rational> = (0..n + 1)
        .into_par_iter()
        .map_init(Vec::new, |stack, i| prog.to_rational(&prog.eval(i, stack)))
        .collect();
    let points = (0..=n)
        .map(|i| f.a() + &(&h * &Rational::from(i)))
        .collect();
    Ok(Grid { n, points, values })
}

const CHUNK: u64 = 1 << 14;

/// Runs `work` over consecutive index ranges covering `0..total`, in
/// parallel, returning per-range results in index order.
fn chunked<T: Send>(total: u64, work: impl Fn(std::ops::Range<u64>) -> T + Sync) -> Vec<T> {
    let chunks = usize::try_from(total.div_ceil(CHUNK)).expect("grid fits in memory");
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c as u64 * CHUNK;
            work(start..(start + CHUNK).min(total))
        })
        .collect()
}

fn better(a: Option<(Scaled, u64)>, b: Option<(Scaled, u64)>) -> Option<(Scaled, u64)> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => Some(match a.0.cmp(&b.0) {
            std::cmp::Ordering::Greater => a,
            std::cmp::Ordering::Less => b,
            std::cmp::Ordering::Equal => {
                if a.1 <= b.1 {
                    a
                } else {
                    b
                }
            }
        }),
    }
}

/// Maximum over the `n + 1` grid points with the smallest maximizing index.
/// The reduction is order independent, so the result does not depend on how
/// the work is split across threads.
fn scan_argmax(f: &UniformFn, n: u64) -> (u64, Rational) {
    let prog = GridProgram::compile(f.body(), f.a(), &step(f, n));
    let best = chunked(n + 1, |range| {
        let mut stack = Vec::new();
        range.fold(None, |best, i| {
            better(best, Some((prog.eval(i, &mut stack), i)))
        })
    })
    .into_iter()
    .fold(None, better)
    .expect("grid is nonempty");
    (best.1, prog.to_rational(&best.0))
}

/// A machine-checkable bracket `[value, value + 2^-k]` for `sup f`, with the
/// grid witness that attains `value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupCertificate {
    pub k: Precision,
    pub n: u64,
    pub i0: u64,
    pub point: Rational,
    pub value: Rational,
}

impl SupCertificate {
    pub fn bracket(&self) -> (Rational, Rational) {
        (self.value.clone(), &self.value + &self.k.eps())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "k": self.k.get(),
            "n": self.n,
            "i0": self.i0,
            "point": self.point.to_json(),
            "value": self.value.to_json(),
            "bracket_width_log2": -i64::from(self.k.get()),
        })
    }
}

impl fmt::Display for SupCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.bracket();
        writeln!(f, "k        {}", self.k.get())?;
        writeln!(f, "n        {}", self.n)?;
        writeln!(f, "i0       {}", self.i0)?;
        writeln!(f, "point    {}", self.point)?;
        writeln!(f, "value    {}", self.value)?;
        write!(f, "bracket  [{lo}, {hi}]")
    }
}

pub fn sup_at(f: &UniformFn, k: Precision, cap: ResourceCap) -> Result<SupCertificate, SupError> {
    let n = grid_size(f, k, cap)?;
    let (i0, value) = scan_argmax(f, n);
    Ok(SupCertificate {
        k,
        n,
        i0,
        point: grid_point(f, n, i0),
        value,
    })
}

/// `sup f` as a constructive real with `x_k = sup_at(f, k + 1).value`.
///
/// Both `x_{k+1}` and `x_{k+1+n}` lie in `[sup - 2^-(k+1), sup]`, so the
/// Cauchy promise holds.
pub fn sup_as_creal(f: &UniformFn, cap: ResourceCap) -> Result<CReal, SupError> {
    sup_at(f, Precision(1), cap)?;
    let g = f.clone();
    Ok(CReal::from_fn(format!("sup({})", f.body()), move |k| {
        Ok(sup_at(&g, k.shift(1), cap)?.value)
    }))
}

// ---------------------------------------------------------------------------
// argmax instability

/// Side-by-side run on `f(x) = 2^-m x` and `f(x) = -2^-m x` over `[0, 1]`.
#[derive(Debug, Clone)]
pub struct CounterexampleReport {
    pub m: u32,
    pub k: Precision,
    pub slope: Rational,
    pub plus: SupCertificate,
    pub minus: SupCertificate,
    pub sup_gap: Rational,
    pub witness_gap: Rational,
    pub slope_comparison: Comparison3,
}

impl CounterexampleReport {
    /// Whether the two slopes are not separated at precision `k`.
    pub fn indistinguishable(&self) -> bool {
        self.slope_comparison.verdict == Verdict3::Undetermined
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "m": self.m,
            "k": self.k.get(),
            "slope_plus": self.slope.to_json(),
            "slope_minus": (-&self.slope).to_json(),
            "sup_plus": self.plus.value.to_json(),
            "sup_minus": self.minus.value.to_json(),
            "witness_plus": self.plus.point.to_json(),
            "witness_minus": self.minus.point.to_json(),
            "sup_gap": self.sup_gap.to_json(),
            "witness_gap": self.witness_gap.to_json(),
            "slope_comparison": self.slope_comparison.verdict.to_string(),
            "indistinguishable": self.indistinguishable(),
        })
    }
}

impl fmt::Display for CounterexampleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "slopes        a = +2^-{0} and a = -2^-{0}", self.m)?;
        writeln!(
            f,
            "sup (a > 0)   {} at x = {}",
            self.plus.value, self.plus.point
        )?;
        writeln!(
            f,
            "sup (a < 0)   {} at x = {}",
            self.minus.value, self.minus.point
        )?;
        writeln!(f, "sup gap       {}", self.sup_gap)?;
        writeln!(f, "witness gap   {}", self.witness_gap)?;
        write!(
            f,
            "compare(a+, a-) at 2^-{}: {}{}",
            self.k.get(),
            self.slope_comparison.verdict,
            if self.indistinguishable() {
                " (the slopes cannot be told apart at this precision)"
            } else {
                ""
            }
        )
    }
}

pub fn counterexample_demo(
    m: u32,
    k: Precision,
    cap: ResourceCap,
) -> Result<CounterexampleReport, SupError> {
    if m <= k.get() {
        return Err(SupError::Domain(format!(
            "need m > k, got m = {m}, k = {}",
            k.get()
        )));
    }
    let slope = Rational::pow2_neg(m);
    let plus = sup_at(&UniformFn::unit(Expr::linear(slope.clone())), k, cap)?;
    let minus = sup_at(&UniformFn::unit(Expr::linear(-&slope)), k, cap)?;
    let slope_comparison = CReal::from_rational(slope.clone())
        .compare(&CReal::from_rational(-&slope), k)
        .map_err(|e| SupError::Domain(e.to_string()))?;
    Ok(CounterexampleReport {
        m,
        k,
        sup_gap: (&plus.value - &minus.value).abs(),
        witness_gap: (&plus.point - &minus.point).abs(),
        slope,
        plus,
        minus,
        slope_comparison,
    })
}

// ---------------------------------------------------------------------------
// localization under a uniqueness modulus

/// `delta` such that `f(x) >= sup - delta(k)` and `f(y) >= sup - delta(k)`
/// imply `|x - y| < 2^-k`.
#[derive(Clone)]
pub struct UniquenessModulus {
    delta: Arc<dyn Fn(Precision) -> Rational + Send + Sync>,
    label: String,
}

impl fmt::Debug for UniquenessModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("UniquenessModulus")
            .field(&self.label)
            .finish()
    }
}

impl UniquenessModulus {
    pub fn from_fn<F>(label: impl Into<String>, delta: F) -> Self
    where
        F: Fn(Precision) -> Rational + Send + Sync + 'static,
    {
        UniquenessModulus {
            delta: Arc::new(delta),
            label: label.into(),
        }
    }

    /// `delta(k) = c / base^k`.
    pub fn geometric(c: Rational, base: u32) -> Self {
        let label = format!("{c}/{base}^k");
        Self::from_fn(label, move |k| {
            let denom = num_traits::pow(BigInt::from(base), k.get() as usize);
            c.checked_div(&Rational::from(denom)).expect("base >= 1")
        })
    }

    pub fn delta(&self, k: Precision) -> Rational {
        (self.delta)(k)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Parses `c/B^k` (for example `1/4/4^k`, meaning `4^-(k+1)`).
impl FromStr for UniquenessModulus {
    type Err = SupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SupError::Domain(format!("expected a modulus of the form c/B^k, got {s:?}"));
        let body = s.trim().strip_suffix("^k").ok_or_else(bad)?;
        let (c, base) = body.rsplit_once('/').ok_or_else(bad)?;
        let c: Rational = c.trim().parse().map_err(|_| bad())?;
        let base: u32 = base.trim().parse().map_err(|_| bad())?;
        if !c.is_positive() || base < 2 {
            return Err(bad());
        }
        Ok(UniquenessModulus::geometric(c, base))
    }
}

#[derive(Debug, Clone)]
pub struct LocatedMax {
    pub point: Rational,
    /// The point is within `2^-k` of the maximizer.
    pub k: Precision,
    /// Precision of the certificate the point was extracted from.
    pub inner: SupCertificate,
}

impl LocatedMax {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "k": self.k.get(),
            "point": self.point.to_json(),
            "radius_log2": -i64::from(self.k.get()),
            "inner_k": self.inner.k.get(),
            "certificate": self.inner.to_json(),
        })
    }
}

/// Locates the maximizer to within `2^-k`.
///
/// With `2^-k' <= delta(k)` the grid witness at precision `k'` has value at
/// least `sup - delta(k)`, as does the maximizer itself, so the two are
/// closer than `2^-k`. Before answering, the grid is searched for points that
/// are provably near-optimal yet far apart, for every level `j <= k`.
pub fn locate_unique_max(
    f: &UniformFn,
    u: &UniquenessModulus,
    k: Precision,
    cap: ResourceCap,
) -> Result<LocatedMax, SupError> {
    let deltas: Vec<Rational> = (0..=k.get()).map(|j| u.delta(Precision(j))).collect();
    for (j, d) in deltas.iter().enumerate() {
        if !d.is_positive() {
            return Err(SupError::InvalidModulus(format!(
                "delta({j}) = {d} is not positive"
            )));
        }
        if j > 0 && d > &deltas[j - 1] {
            return Err(SupError::InvalidModulus(format!(
                "delta increases at k = {j}"
            )));
        }
    }
    let target = &deltas[k.get() as usize];
    let inner_k = Precision(target.recip().expect("positive").ceil_log2());
    let n = match grid_size(f, inner_k, cap) {
        Ok(n) => n,
        Err(SupError::ResourceLimit { required, cap_log2 }) => {
            return Err(SupError::Domain(format!(
                "delta({}) = {target} needs precision 2^-{} ({required} grid points), beyond the cap 2^{cap_log2}",
                k.get(),
                inner_k.get()
            )))
        }
        Err(e) => return Err(e),
    };
    let (i0, value) = scan_argmax(f, n);
    validate_uniqueness(f, n, &value, inner_k, &deltas)?;
    let inner = SupCertificate {
        k: inner_k,
        n,
        i0,
        point: grid_point(f, n, i0),
        value,
    };
    Ok(LocatedMax {
        point: inner.point.clone(),
        k,
        inner,
    })
}

/// Grid points with `f(x_i) >= v + 2^-k' - delta(j)` are `delta(j)`-near
/// optimal for certain; they must span less than `2^-j`.
fn validate_uniqueness(
    f: &UniformFn,
    n: u64,
    value: &Rational,
    inner_k: Precision,
    deltas: &[Rational],
) -> Result<(), SupError> {
    let h = step(f, n);
    let prog = GridProgram::compile(f.body(), f.a(), &h);
    let scale = Rational::from(prog.scale().clone());
    let upper = value + &inner_k.eps();
    let thresholds: Vec<Scaled> = deltas
        .iter()
        .map(|d| {
            let t = (&(&upper - d) * &scale).ceil();
            match i128::try_from(&t) {
                Ok(small) => Scaled::Small(small),
                Err(_) => Scaled::Big(t),
            }
        })
        .collect();
    let levels = thresholds.len();
    let merge = |a: Option<(u64, u64)>, b: Option<(u64, u64)>| match (a, b) {
        (None, s) | (s, None) => s,
        (Some((a0, a1)), Some((b0, b1))) => Some((a0.min(b0), a1.max(b1))),
    };
    let spans = chunked(n + 1, |range| {
        let mut stack = Vec::new();
        let mut spans = vec![None::<(u64, u64)>; levels];
        for i in range {
            let v = prog.eval(i, &mut stack);
            for (t, span) in thresholds.iter().zip(spans.iter_mut()) {
                if &v >= t {
                    *span = merge(*span, Some((i, i)));
                }
            }
        }
        spans
    })
    .into_iter()
    .fold(vec![None; levels], |acc, part| {
        acc.into_iter()
            .zip(part)
            .map(|(a, b)| merge(a, b))
            .collect()
    });
    for (j, span) in spans.iter().enumerate() {
        if let Some((lo, hi)) = span {
            let width = &h * &Rational::from(hi - lo);
            if width >= Rational::pow2_neg(j as u32) {
                return Err(SupError::InvalidModulus(format!(
                    "points {} and {} are both within delta({j}) = {} of the supremum but {} apart",
                    grid_point(f, n, *lo),
                    grid_point(f, n, *hi),
                    deltas[j],
                    width
                )));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// grid traces

/// Leading rows `(i, x_i, f(x_i))` of the certificate grid.
#[derive(Debug, Clone)]
pub struct GridTrace {
    pub n: u64,
    pub rows: Vec<(u64, Rational, Rational)>,
    pub truncated: bool,
}

pub fn grid_trace(
    f: &UniformFn,
    k: Precision,
    cap: ResourceCap,
    max_rows: usize,
) -> Result<GridTrace, SupError> {
    let n = grid_size(f, k, cap)?;
    let h = step(f, n);
    let prog = GridProgram::compile(f.body(), f.a(), &h);
    let total = n + 1;
    let shown = total.min(max_rows as u64);
    let mut stack = Vec::new();
    let rows = (0..shown)
        .map(|i| {
            let x = f.a() + &(&h * &Rational::from(i));
            (i, x, prog.to_rational(&prog.eval(i, &mut stack)))
        })
        .collect();
    Ok(GridTrace {
        n,
        rows,
        truncated: shown < total,
    })
}
