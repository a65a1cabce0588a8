//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each, and
//! exits non-zero if any fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use common::{corpus, r, random_expr, unit_rational, CORPUS};
use evtlab_core::creal::liouville_sweep;
use evtlab_core::hyper::{SignVerdict, TransferFormula, VerdictValue};
use evtlab_core::{
    classify, counterexample_demo, eval_exact, evt_grid_argmax, finite_transfer_check,
    locate_unique_max, parse, standard_part, sup_as_creal, sup_at, CReal, Expr, HSeq, HyperError,
    Precision, Rational, ResourceCap, UniformFn, UniquenessModulus, Verdict3,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cauchy_promise() -> Outcome {
    // x_22 needs sup_at at precision 23, a grid of about 2^24 points
    let cap = ResourceCap::new(26);
    let s2 = CReal::sqrt2();
    let third = CReal::from_rational(r("1/3"));
    let mut reals = vec![
        s2.clone(),
        s2.add(&third),
        s2.sub(&third.mul(&s2)),
        s2.mul(&s2),
        s2.neg().mul(&CReal::from_rational(r("-7/5"))),
    ];
    for f in corpus() {
        reals.push(sup_as_creal(&f, cap).map_err(|e| format!("{}: {e}", f.body()))?);
    }
    // sup(x) + sqrt2 queries the sup one level deeper, still within the cap
    reals.push(reals[6].add(&s2));
    let mut checks = 0;
    for x in &reals {
        for k in 0..=14u32 {
            let xk = x.approx(Precision(k)).map_err(|e| e.to_string())?;
            for n in 0..=8 {
                let xkn = x.approx(Precision(k + n)).map_err(|e| e.to_string())?;
                ensure((&xk - &xkn).abs() < Precision(k).eps(), || {
                    format!("{} breaks the promise at k = {k}, n = {n}", x.label())
                })?;
                checks += 1;
            }
        }
    }
    Ok(format!("{} reals, {checks} pairs", reals.len()))
}

/// Maximum over the `8n + 1` point grid, which refines the certificate grid.
fn oracle_max(f: &UniformFn, n: u64) -> Rational {
    let fine = 8 * n;
    let width = f.b() - f.a();
    (0..=fine)
        .map(|i| {
            let x = f.a() + &(&width * &Rational::new(i, fine).unwrap());
            eval_exact(f.body(), &x)
        })
        .max()
        .unwrap()
}

fn sup_bracket() -> Outcome {
    let mut cases = 0;
    for f in corpus() {
        for k in 0..=12 {
            let c = sup_at(&f, Precision(k), ResourceCap::default()).map_err(|e| e.to_string())?;
            let m = oracle_max(&f, c.n);
            let (lo, hi) = c.bracket();
            ensure(lo <= m && m <= hi, || {
                format!("{} at k = {k}: oracle {m} outside [{lo}, {hi}]", f.body())
            })?;
            cases += 1;
        }
    }
    Ok(format!("{cases}/{cases} brackets contain the oracle"))
}

fn max_zero_law() -> Outcome {
    let k = Precision(12);
    let mut slopes = vec![Rational::zero()];
    for j in 0..=20 {
        slopes.push(Rational::pow2_neg(j));
        slopes.push(-Rational::pow2_neg(j));
    }
    for a in &slopes {
        let f = UniformFn::unit(Expr::linear(a.clone()));
        let c = sup_at(&f, k, ResourceCap::default()).map_err(|e| e.to_string())?;
        let expected = a.clone().max(Rational::zero());
        ensure((&c.value - &expected).abs() <= k.eps(), || {
            format!("a = {a}: value {}", c.value)
        })?;
        if !a.is_positive() {
            ensure(c.value.is_zero() && c.i0 == 0, || {
                format!("a = {a}: expected exact 0 at i0 = 0")
            })?;
        }
    }
    Ok(format!("{} slopes", slopes.len()))
}

fn argmax_instability() -> Outcome {
    let rep = counterexample_demo(20, Precision(10), ResourceCap::default())
        .map_err(|e| e.to_string())?;
    ensure(rep.witness_gap >= r("1/2"), || {
        format!("witness gap {}", rep.witness_gap)
    })?;
    ensure(rep.sup_gap <= Rational::pow2_neg(10), || {
        format!("sup gap {}", rep.sup_gap)
    })?;
    ensure(
        rep.slope_comparison.verdict == Verdict3::Undetermined,
        || format!("slopes compared {}", rep.slope_comparison.verdict),
    )?;
    Ok(format!(
        "witness gap {}, sup gap {}, compare undetermined",
        rep.witness_gap, rep.sup_gap
    ))
}

fn irrationality() -> Outcome {
    let rows = liouville_sweep(500).map_err(|e| e.to_string())?;
    ensure(rows.len() == 500, || format!("{} rows", rows.len()))?;
    let bad: Vec<u64> = rows
        .iter()
        .filter(|r| !r.all_verified)
        .map(|r| r.n)
        .collect();
    ensure(bad.is_empty(), || {
        format!("unverified denominators {bad:?}")
    })?;
    let checked: usize = rows.iter().map(|r| r.checked).sum();
    Ok(format!("{checked} reduced fractions verified"))
}

fn classification() -> Outcome {
    let alt = classify(&HSeq::alt_harmonic(), 64).map_err(|e| e.to_string())?;
    ensure(alt.infinitesimal.value == VerdictValue::True, || {
        format!("altharmonic infinitesimal: {}", alt.infinitesimal)
    })?;
    ensure(alt.sign == SignVerdict::UltrafilterDependent, || {
        format!("altharmonic sign: {}", alt.sign)
    })?;
    let h = classify(&HSeq::harmonic(), 64).map_err(|e| e.to_string())?;
    ensure(
        h.infinitesimal.value == VerdictValue::True && h.sign == SignVerdict::Positive,
        || format!("harmonic: {} / {}", h.infinitesimal, h.sign),
    )?;
    ensure(
        matches!(
            standard_part(&HSeq::identity()),
            Err(HyperError::NotLimited)
        ),
        || "identity has a standard part".into(),
    )?;
    Ok("altharmonic, harmonic, identity as expected".into())
}

fn cross_framework() -> Outcome {
    let cap = ResourceCap::default();
    let mut cases = 0;
    for f in corpus() {
        for k in 0..=12 {
            let a = sup_at(&f, Precision(k), cap).map_err(|e| e.to_string())?;
            let b = evt_grid_argmax(&f, Precision(k), cap).map_err(|e| e.to_string())?;
            ensure(a == b, || {
                format!("{} at k = {k}: {} vs {}", f.body(), a.value, b.value)
            })?;
            cases += 1;
        }
    }
    let f = UniformFn::parse("x*(1-x)", r("0"), r("1")).unwrap();
    let u: UniquenessModulus = "1/4/4^k".parse().unwrap();
    let loc = locate_unique_max(&f, &u, Precision(8), cap).map_err(|e| e.to_string())?;
    ensure(
        (&loc.point - &r("1/2")).abs() <= Rational::pow2_neg(8),
        || format!("located {}", loc.point),
    )?;
    Ok(format!(
        "{cases} identical certificates; maximizer located at {}",
        loc.point
    ))
}

fn transfer() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7EA5);
    let mut samples = vec![r("0"), r("1")];
    samples.extend((0..50).map(|_| unit_rational(&mut rng)));
    samples.push(r("1"));
    let fs = corpus();
    for n in 1..=200u64 {
        let rep = finite_transfer_check(TransferFormula::PartitionExists, n, None, &samples)
            .map_err(|e| e.to_string())?;
        ensure(rep.holds, || format!("partition fails at n = {n}"))?;
        ensure(rep.strict_discrepancies == vec![r("1")], || {
            format!(
                "n = {n}: strict discrepancies {:?}",
                rep.strict_discrepancies
            )
        })?;
        for f in &fs {
            let rep = finite_transfer_check(TransferFormula::FiniteMaxExists, n, Some(f), &[])
                .map_err(|e| e.to_string())?;
            ensure(rep.holds, || {
                format!("finite max fails for {} at n = {n}", f.body())
            })?;
        }
    }
    Ok(format!(
        "n <= 200, {} samples, {} functions",
        samples.len(),
        fs.len()
    ))
}

fn parser_roundtrip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE4A1);
    for _ in 0..200 {
        let e = random_expr(&mut rng, 5);
        let printed = e.to_string();
        let back = parse(&printed).map_err(|err| format!("{printed:?}: {err}"))?;
        ensure(back == e, || format!("{printed:?} reparsed differently"))?;
    }
    let malformed = [("x**", 2), ("min(x 1)", 6), ("(x + 1", 6)];
    for (src, offset) in malformed {
        match parse(src) {
            Err(e) if e.offset == offset => {}
            other => return Err(format!("{src:?}: {other:?}")),
        }
    }
    Ok("200 expressions round-trip; 3 malformed inputs rejected with offsets".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("Cauchy promise", cauchy_promise),
        ("sup bracket vs oracle", sup_bracket),
        ("max(0, a) law", max_zero_law),
        ("argmax instability", argmax_instability),
        ("irrationality bound", irrationality),
        ("hyperreal classification", classification),
        ("cross-framework agreement", cross_framework),
        ("transfer instances", transfer),
        ("parser round-trip", parser_roundtrip),
    ];
    assert_eq!(CORPUS.len(), 20);
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {}. {name}: {detail} ({secs:.1} s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {}. {name}: {why} ({secs:.1} s)", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
