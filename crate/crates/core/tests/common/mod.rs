//! Shared test corpus.

#![allow(dead_code)]

use evtlab_core::{Expr, Rational, UniformFn};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn r(s: &str) -> Rational {
    s.parse().unwrap()
}

/// Twenty functions with Lipschitz bound at most 2 on their domains, so the
/// certificate grid at precision `k` has at most `2^(k+1) + 1` points.
pub const CORPUS: [(&str, &str, &str); 20] = [
    ("x*(1-x)", "0", "1"),
    ("x", "0", "1"),
    ("-x", "0", "1"),
    ("1/3", "0", "1"),
    ("abs(x - 1/3)", "0", "1"),
    ("-abs(x - 1/3)", "0", "1"),
    ("min(x, 1 - x)", "0", "1"),
    ("max(x, 1 - x)", "0", "1"),
    ("x^2", "0", "1"),
    ("1 - x^2", "-1/2", "1/2"),
    ("1/2*x + 1/7", "0", "1"),
    ("max(1/4 - x, x - 3/4)", "0", "1"),
    ("min(abs(x - 1/5), abs(x - 4/5))", "0", "1"),
    ("-(x - 2/3)^2", "0", "1"),
    ("x^3 - x", "-1/2", "1/2"),
    ("min(x^2, 1/4)", "0", "1"),
    ("max(-x, 1/3*x)", "-1/2", "1/2"),
    ("1/2 - abs(abs(x - 1/2) - 1/4)", "0", "1"),
    ("2/3 - 1/5*x", "-1/3", "2/3"),
    ("1/2*x*(1 - x) - 1/2*abs(x - 0.3)", "0", "1"),
];

pub fn corpus() -> Vec<UniformFn> {
    CORPUS
        .iter()
        .map(|(src, a, b)| UniformFn::parse(src, r(a), r(b)).unwrap())
        .collect()
}

/// Random rational `p/q` with `0 <= p/q < 1` and `q <= 1000`.
pub fn unit_rational(rng: &mut ChaCha8Rng) -> Rational {
    let q: u64 = rng.gen_range(1..=1000);
    Rational::new(rng.gen_range(0..q), q).unwrap()
}

fn constant(rng: &mut ChaCha8Rng) -> Rational {
    let q: i64 = rng.gen_range(1..=12);
    Rational::new(rng.gen_range(-20..=20), q).unwrap()
}

/// Random expression over the whole grammar, at most `depth` levels deep.
pub fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_ratio(1, 4) {
        return if rng.gen_bool(0.5) {
            Expr::Var
        } else {
            Expr::constant(constant(rng))
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..8) {
        0 => Expr::add(random_expr(rng, d), random_expr(rng, d)),
        1 => Expr::sub(random_expr(rng, d), random_expr(rng, d)),
        2 => Expr::mul(random_expr(rng, d), random_expr(rng, d)),
        3 => Expr::neg(random_expr(rng, d)),
        4 => Expr::abs(random_expr(rng, d)),
        5 => Expr::min(random_expr(rng, d), random_expr(rng, d)),
        6 => Expr::max(random_expr(rng, d), random_expr(rng, d)),
        _ => Expr::pow(random_expr(rng, d), rng.gen_range(1..=4)),
    }
}
