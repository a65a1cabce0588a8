//! The function language: piecewise-polynomial expressions in one variable
//! `x`, a text parser and printer, exact evaluation, and a Lipschitz-based
//! modulus of uniform continuity.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ratcore::{big_gcd, big_lcm, Precision, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Rational),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Abs(Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    PowNat(Box<Expr>, u32),
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn constant(q: Rational) -> Expr {
        Expr::Const(q)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }

    pub fn abs(a: Expr) -> Expr {
        Expr::Abs(Box::new(a))
    }

    pub fn min(a: Expr, b: Expr) -> Expr {
        Expr::Min(Box::new(a), Box::new(b))
    }

    pub fn max(a: Expr, b: Expr) -> Expr {
        Expr::Max(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, m: u32) -> Expr {
        Expr::PowNat(Box::new(a), m)
    }

    /// `slope * x`.
    pub fn linear(slope: Rational) -> Expr {
        Expr::mul(Expr::Const(slope), Expr::Var)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        eval_exact(self, x)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Const(q) if q.is_negative() => 3,
            Expr::PowNat(..) => 4,
            _ => 5,
        }
    }
}

/// Exact evaluation by structural recursion.
pub fn eval_exact(e: &Expr, x: &Rational) -> Rational {
    match e {
        Expr::Const(q) => q.clone(),
        Expr::Var => x.clone(),
        Expr::Add(a, b) => eval_exact(a, x) + eval_exact(b, x),
        Expr::Sub(a, b) => eval_exact(a, x) - eval_exact(b, x),
        Expr::Mul(a, b) => eval_exact(a, x) * eval_exact(b, x),
        Expr::Neg(a) => -eval_exact(a, x),
        Expr::Abs(a) => eval_exact(a, x).abs(),
        Expr::Min(a, b) => eval_exact(a, x).min(eval_exact(b, x)),
        Expr::Max(a, b) => eval_exact(a, x).max(eval_exact(b, x)),
        Expr::PowNat(a, m) => eval_exact(a, x).pow(*m),
    }
}

// ---------------------------------------------------------------------------
// printing

/// Minimal-parenthesis printing; `parse` of the output rebuilds the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_expr(self))
    }
}

fn wrap(e: &Expr, parens: bool) -> String {
    if parens {
        format!("({})", print_expr(e))
    } else {
        print_expr(e)
    }
}

fn print_expr(e: &Expr) -> String {
    match e {
        Expr::Const(q) => q.to_string(),
        Expr::Var => "x".to_string(),
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let op = if matches!(e, Expr::Add(..)) { "+" } else { "-" };
            format!(
                "{} {} {}",
                wrap(a, a.precedence() < 1),
                op,
                wrap(b, b.precedence() <= 1)
            )
        }
        Expr::Mul(a, b) => {
            format!(
                "{}*{}",
                wrap(a, a.precedence() < 2),
                wrap(b, b.precedence() <= 2)
            )
        }
        Expr::Neg(a) => {
            let inner = print_expr(a);
            let parens = a.precedence() < 3 || inner.starts_with(|c: char| c.is_ascii_digit());
            if parens {
                format!("-({inner})")
            } else {
                format!("-{inner}")
            }
        }
        Expr::Abs(a) => format!("abs({})", print_expr(a)),
        Expr::Min(a, b) => format!("min({}, {})", print_expr(a), print_expr(b)),
        Expr::Max(a, b) => format!("max({}, {})", print_expr(a), print_expr(b)),
        Expr::PowNat(a, m) => format!("{}^{}", wrap(a, a.precedence() < 4), m),
    }
}

// ---------------------------------------------------------------------------
// parsing

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {offset}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

/// Grammar:
///
/// ```text
/// expr   := term (('+' | '-') term)*
/// term   := factor ('*' factor)*
/// factor := '-' factor | power
/// power  := atom ('^' nat)*
/// atom   := rational | 'x' | '(' expr ')' | func '(' args ')'
/// func   := 'abs' | 'min' | 'max'
/// ```
///
/// A `-` directly followed by a numeric literal produces a negative constant
/// rather than a negation node.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.pos == p.src.len() {
        return Err(p.error(&["expression"]));
    }
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error(&["'+'", "'-'", "'*'", "'^'", "end of input"]));
    }
    Ok(e)
}

pub const GRAMMAR: &str = "\
expr   := term (('+'|'-') term)*
term   := factor ('*' factor)*
factor := '-' factor | atom ('^' nat)*
atom   := rational | 'x' | '(' expr ')' | abs(expr) | min(expr, expr) | max(expr, expr)
rational := integer | integer '/' integer | integer '.' digits";

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        let found = match self.src.get(self.pos) {
            None => "end of input".to_string(),
            Some(_) => {
                let rest = String::from_utf8_lossy(&self.src[self.pos..]);
                format!("{:?}", rest.chars().next().unwrap_or(' '))
            }
        };
        ParseError {
            offset: self.pos,
            expected: expected.to_vec(),
            found,
        }
    }

    fn expect(&mut self, byte: u8, name: &'static str) -> Result<(), ParseError> {
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::add(lhs, self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            lhs = Expr::mul(lhs, self.factor()?);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            if self.src.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
                let q = self.number()?;
                return self.powers(Expr::Const(-q));
            }
            return Ok(Expr::neg(self.factor()?));
        }
        let atom = self.atom()?;
        self.powers(atom)
    }

    fn powers(&mut self, mut base: Expr) -> Result<Expr, ParseError> {
        while self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.error(&["natural exponent"]));
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
            let m = text.parse::<u32>().map_err(|_| ParseError {
                offset: start,
                expected: vec!["exponent below 2^32"],
                found: text.to_string(),
            })?;
            base = Expr::pow(base, m);
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<Rational, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos > s
        };
        if !digits(self) {
            return Err(self.error(&["number"]));
        }
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            if !digits(self) {
                return Err(self.error(&["digit"]));
            }
        } else {
            let save = self.pos;
            if self.peek() == Some(b'/') {
                self.pos += 1;
                self.skip_ws();
                if !digits(self) {
                    return Err(self.error(&["denominator"]));
                }
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<Rational>().map_err(|_| ParseError {
            offset: start,
            expected: vec!["nonzero denominator"],
            found: text.to_string(),
        })
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        const ATOM: &[&str] = &["number", "'x'", "'('", "'-'", "abs", "min", "max"];
        match self.peek() {
            Some(b) if b.is_ascii_digit() => Ok(Expr::Const(self.number()?)),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')', "')'")?;
                Ok(e)
            }
            Some(b) if b.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let word = &self.src[start..self.pos];
                match word {
                    b"x" => Ok(Expr::Var),
                    b"abs" => {
                        self.expect(b'(', "'('")?;
                        let a = self.expr()?;
                        self.expect(b')', "')'")?;
                        Ok(Expr::abs(a))
                    }
                    b"min" | b"max" => {
                        self.expect(b'(', "'('")?;
                        let a = self.expr()?;
                        self.expect(b',', "','")?;
                        let b = self.expr()?;
                        self.expect(b')', "')'")?;
                        Ok(if word == b"min" {
                            Expr::min(a, b)
                        } else {
                            Expr::max(a, b)
                        })
                    }
                    _ => {
                        self.pos = start;
                        Err(self.error(ATOM))
                    }
                }
            }
            _ => Err(self.error(ATOM)),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

// ---------------------------------------------------------------------------
// modulus of continuity

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FuncError {
    #[error("empty domain: a = {a} > b = {b}")]
    EmptyDomain { a: Rational, b: Rational },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone)]
struct Range {
    lo: Rational,
    hi: Rational,
}

impl Range {
    fn point(q: &Rational) -> Range {
        Range {
            lo: q.clone(),
            hi: q.clone(),
        }
    }

    fn magnitude(&self) -> Rational {
        self.lo.abs().max(self.hi.abs())
    }

    fn hull(values: [Rational; 4]) -> Range {
        let [a, b, c, d] = values;
        Range {
            lo: a.clone().min(b.clone()).min(c.clone()).min(d.clone()),
            hi: a.max(b).max(c).max(d),
        }
    }
}

/// Value range and Lipschitz bound of `e` over `[a, b]`.
fn analyse(e: &Expr, dom: &Range) -> (Range, Rational) {
    match e {
        Expr::Const(q) => (Range::point(q), Rational::zero()),
        Expr::Var => (dom.clone(), Rational::one()),
        Expr::Add(a, b) => {
            let ((ra, la), (rb, lb)) = (analyse(a, dom), analyse(b, dom));
            (
                Range {
                    lo: &ra.lo + &rb.lo,
                    hi: &ra.hi + &rb.hi,
                },
                la + lb,
            )
        }
        Expr::Sub(a, b) => {
            let ((ra, la), (rb, lb)) = (analyse(a, dom), analyse(b, dom));
            (
                Range {
                    lo: &ra.lo - &rb.hi,
                    hi: &ra.hi - &rb.lo,
                },
                la + lb,
            )
        }
        Expr::Mul(a, b) => {
            let ((ra, la), (rb, lb)) = (analyse(a, dom), analyse(b, dom));
            let lip = &la * &rb.magnitude() + &lb * &ra.magnitude();
            let range = Range::hull([
                &ra.lo * &rb.lo,
                &ra.lo * &rb.hi,
                &ra.hi * &rb.lo,
                &ra.hi * &rb.hi,
            ]);
            (range, lip)
        }
        Expr::Neg(a) => {
            let (ra, la) = analyse(a, dom);
            (
                Range {
                    lo: -ra.hi,
                    hi: -ra.lo,
                },
                la,
            )
        }
        Expr::Abs(a) => {
            let (ra, la) = analyse(a, dom);
            let range = if !ra.lo.is_negative() {
                ra
            } else if !ra.hi.is_positive() {
                Range {
                    lo: -ra.hi,
                    hi: -ra.lo,
                }
            } else {
                Range {
                    lo: Rational::zero(),
                    hi: ra.magnitude(),
                }
            };
            (range, la)
        }
        Expr::Min(a, b) | Expr::Max(a, b) => {
            let ((ra, la), (rb, lb)) = (analyse(a, dom), analyse(b, dom));
            let range = if matches!(e, Expr::Min(..)) {
                Range {
                    lo: ra.lo.min(rb.lo),
                    hi: ra.hi.min(rb.hi),
                }
            } else {
                Range {
                    lo: ra.lo.max(rb.lo),
                    hi: ra.hi.max(rb.hi),
                }
            };
            (range, la.max(lb))
        }
        Expr::PowNat(a, m) => {
            let (ra, la) = analyse(a, dom);
            if *m == 0 {
                return (Range::point(&Rational::one()), Rational::zero());
            }
            let mag = ra.magnitude();
            let lip = Rational::from(u64::from(*m)) * mag.pow(m - 1) * la;
            let (plo, phi) = (ra.lo.pow(*m), ra.hi.pow(*m));
            let range = if m % 2 == 1 || !ra.lo.is_negative() {
                Range { lo: plo, hi: phi }
            } else if !ra.hi.is_positive() {
                Range { lo: phi, hi: plo }
            } else {
                Range {
                    lo: Rational::zero(),
                    hi: mag.pow(*m),
                }
            };
            (range, lip)
        }
    }
}

/// An expression on `[a, b]` together with a Lipschitz bound `L` and the
/// modulus `alpha(k) = k + ceil(log2 max(L, 1))`: `|x - y| < 2^-alpha(k)`
/// implies `|f(x) - f(y)| < 2^-k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformFn {
    body: Expr,
    a: Rational,
    b: Rational,
    lipschitz: Rational,
    modulus_shift: u32,
}

/// Builds a [`UniformFn`] for `e` on `[a, b]`.
pub fn derive_modulus(e: Expr, a: Rational, b: Rational) -> Result<UniformFn, FuncError> {
    if a > b {
        return Err(FuncError::EmptyDomain { a, b });
    }
    let dom = Range {
        lo: a.clone(),
        hi: b.clone(),
    };
    let (_, lipschitz) = analyse(&e, &dom);
    let modulus_shift = lipschitz.clone().max(Rational::one()).ceil_log2();
    Ok(UniformFn {
        body: e,
        a,
        b,
        lipschitz,
        modulus_shift,
    })
}

impl UniformFn {
    /// Parses `src` and derives its modulus on `[a, b]`.
    pub fn parse(src: &str, a: Rational, b: Rational) -> Result<UniformFn, FuncError> {
        derive_modulus(parse(src)?, a, b)
    }

    /// On the unit interval.
    pub fn unit(e: Expr) -> UniformFn {
        derive_modulus(e, Rational::zero(), Rational::one()).expect("0 <= 1")
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn lipschitz(&self) -> &Rational {
        &self.lipschitz
    }

    /// `alpha(k)`.
    pub fn modulus(&self, k: Precision) -> u32 {
        k.get() + self.modulus_shift
    }

    pub fn modulus_shift(&self) -> u32 {
        self.modulus_shift
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        eval_exact(&self.body, x)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "expr": self.body.to_string(),
            "a": self.a.to_json(),
            "b": self.b.to_json(),
            "lipschitz": self.lipschitz.to_json(),
        })
    }
}

impl Serialize for UniformFn {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

/// Reads `{"expr", "a", "b", ...}`; the Lipschitz bound is always rederived.
impl<'de> Deserialize<'de> for UniformFn {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            expr: String,
            a: Rational,
            b: Rational,
        }
        let w = Wire::deserialize(deserializer)?;
        UniformFn::parse(&w.expr, w.a, w.b).map_err(de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// grid evaluation

/// Value of the expression at a grid point scaled by the program's common
/// denominator. All points of one grid share the scale, so these compare
/// like the rational values they stand for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scaled {
    Small(i128),
    Big(BigInt),
}

impl Scaled {
    pub fn to_big(&self) -> BigInt {
        match self {
            Scaled::Small(v) => BigInt::from(*v),
            Scaled::Big(v) => v.clone(),
        }
    }
}

impl PartialOrd for Scaled {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scaled {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (Scaled::Small(a), Scaled::Small(b)) => a.cmp(b),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

#[derive(Debug, Clone)]
struct Factor {
    big: BigInt,
    small: Option<i128>,
}

impl Factor {
    fn new(big: BigInt) -> Factor {
        let small = big.to_i128();
        Factor { big, small }
    }
}

#[derive(Debug, Clone)]
enum Instr {
    Const(Factor),
    Var,
    Add(Factor, Factor),
    Sub(Factor, Factor),
    Mul,
    Neg,
    Abs,
    Min(Factor, Factor),
    Max(Factor, Factor),
    Pow(u32),
}

/// A compiled evaluator for the points `x_i = a + i*h` of one grid.
///
/// Every node value is carried as an integer over a fixed per-node scale, so
/// no gcd is computed per point. Arithmetic runs on `i128` and falls back to
/// big integers for a point whose intermediate values overflow.
#[derive(Debug, Clone)]
pub struct GridProgram {
    code: Vec<Instr>,
    x0: BigInt,
    xstep: BigInt,
    small_x: Option<(i128, i128)>,
    scale: BigInt,
}

impl GridProgram {
    /// Points `x_i = start + i * step`.
    pub fn compile(e: &Expr, start: &Rational, step: &Rational) -> GridProgram {
        // x_i = (x0 + i*xstep) / d
        let d0 = start.denom() * step.denom();
        let x0 = start.numer() * step.denom();
        let xs = step.numer() * start.denom();
        let g = big_gcd(&big_gcd(&d0, &x0), &xs);
        let g = if g.is_zero() { BigInt::one() } else { g };
        let (x0, xstep, d) = (&x0 / &g, &xs / &g, &d0 / &g);
        let mut code = Vec::new();
        let scale = emit(e, &d, &mut code);
        let small_x = x0.to_i128().zip(xstep.to_i128());
        GridProgram {
            code,
            x0,
            xstep,
            small_x,
            scale,
        }
    }

    /// Common positive denominator of every result.
    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    pub fn eval(&self, i: u64, stack: &mut Vec<i128>) -> Scaled {
        match self.eval_small(i, stack) {
            Some(v) => Scaled::Small(v),
            None => Scaled::Big(self.eval_big(i)),
        }
    }

    pub fn to_rational(&self, v: &Scaled) -> Rational {
        Rational::new(v.to_big(), self.scale.clone()).expect("positive scale")
    }

    fn eval_small(&self, i: u64, stack: &mut Vec<i128>) -> Option<i128> {
        let (x0, xs) = self.small_x?;
        let x = xs.checked_mul(i128::from(i))?.checked_add(x0)?;
        stack.clear();
        for ins in &self.code {
            match ins {
                Instr::Const(c) => stack.push(c.small?),
                Instr::Var => stack.push(x),
                Instr::Neg => {
                    let v = stack.pop()?;
                    stack.push(v.checked_neg()?);
                }
                Instr::Abs => {
                    let v = stack.pop()?;
                    stack.push(v.checked_abs()?);
                }
                Instr::Pow(m) => {
                    let v = stack.pop()?;
                    stack.push(v.checked_pow(*m)?);
                }
                Instr::Mul => {
                    let r = stack.pop()?;
                    let l = stack.pop()?;
                    stack.push(l.checked_mul(r)?);
                }
                Instr::Add(fl, fr)
                | Instr::Sub(fl, fr)
                | Instr::Min(fl, fr)
                | Instr::Max(fl, fr) => {
                    let r = stack.pop()?.checked_mul(fr.small?)?;
                    let l = stack.pop()?.checked_mul(fl.small?)?;
                    stack.push(match ins {
                        Instr::Add(..) => l.checked_add(r)?,
                        Instr::Sub(..) => l.checked_sub(r)?,
                        Instr::Min(..) => l.min(r),
                        _ => l.max(r),
                    });
                }
            }
        }
        stack.pop()
    }

    fn eval_big(&self, i: u64) -> BigInt {
        let x = &self.xstep * BigInt::from(i) + &self.x0;
        let mut stack: Vec<BigInt> = Vec::with_capacity(self.code.len());
        for ins in &self.code {
            match ins {
                Instr::Const(c) => stack.push(c.big.clone()),
                Instr::Var => stack.push(x.clone()),
                Instr::Neg => {
                    let v = stack.pop().expect("stack");
                    stack.push(-v);
                }
                Instr::Abs => {
                    let v = stack.pop().expect("stack");
                    stack.push(v.abs());
                }
                Instr::Pow(m) => {
                    let v = stack.pop().expect("stack");
                    stack.push(num_traits::pow(v, *m as usize));
                }
                Instr::Mul => {
                    let r = stack.pop().expect("stack");
                    let l = stack.pop().expect("stack");
                    stack.push(l * r);
                }
                Instr::Add(fl, fr)
                | Instr::Sub(fl, fr)
                | Instr::Min(fl, fr)
                | Instr::Max(fl, fr) => {
                    let r = stack.pop().expect("stack") * &fr.big;
                    let l = stack.pop().expect("stack") * &fl.big;
                    stack.push(match ins {
                        Instr::Add(..) => l + r,
                        Instr::Sub(..) => l - r,
                        Instr::Min(..) => l.min(r),
                        _ => l.max(r),
                    });
                }
            }
        }
        stack.pop().expect("stack")
    }
}

/// Emits postfix code for `e`; returns the node's scale.
fn emit(e: &Expr, d: &BigInt, code: &mut Vec<Instr>) -> BigInt {
    let binary = |a: &Expr, b: &Expr, code: &mut Vec<Instr>| {
        let sa = emit(a, d, code);
        let sb = emit(b, d, code);
        let s = big_lcm(&sa, &sb);
        let fa = Factor::new(&s / &sa);
        let fb = Factor::new(&s / &sb);
        (s, fa, fb)
    };
    match e {
        Expr::Const(q) => {
            code.push(Instr::Const(Factor::new(q.numer().clone())));
            q.denom().clone()
        }
        Expr::Var => {
            code.push(Instr::Var);
            d.clone()
        }
        Expr::Add(a, b) => {
            let (s, fa, fb) = binary(a, b, code);
            code.push(Instr::Add(fa, fb));
            s
        }
        Expr::Sub(a, b) => {
            let (s, fa, fb) = binary(a, b, code);
            code.push(Instr::Sub(fa, fb));
            s
        }
        Expr::Min(a, b) => {
            let (s, fa, fb) = binary(a, b, code);
            code.push(Instr::Min(fa, fb));
            s
        }
        Expr::Max(a, b) => {
            let (s, fa, fb) = binary(a, b, code);
            code.push(Instr::Max(fa, fb));
            s
        }
        Expr::Mul(a, b) => {
            let sa = emit(a, d, code);
            let sb = emit(b, d, code);
            code.push(Instr::Mul);
            sa * sb
        }
        Expr::Neg(a) => {
            let s = emit(a, d, code);
            code.push(Instr::Neg);
            s
        }
        Expr::Abs(a) => {
            let s = emit(a, d, code);
            code.push(Instr::Abs);
            s
        }
        Expr::PowNat(a, m) => {
            let s = emit(a, d, code);
            code.push(Instr::Pow(*m));
            num_traits::pow(s, *m as usize)
        }
    }
}
