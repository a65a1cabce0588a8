use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use evtlab_core::creal::liouville_sweep;
use evtlab_core::funcspace::GRAMMAR;
use evtlab_core::hyper::{evt_argmax_sequence, evt_argmax_sequence_unique, TransferFormula};
use evtlab_core::supengine::{grid_trace, locate_unique_max, DEFAULT_CAP_LOG2};
use evtlab_core::{
    classify, counterexample_demo, evt_grid_argmax, finite_transfer_check, named_sequence,
    standard_part, sup_as_creal, sup_at, CRealError, FuncError, HyperError, Precision, Rational,
    ResourceCap, SupError, UniformFn, UniquenessModulus,
};

const MAX_CSV_ROWS: usize = 100_000;

#[derive(Parser, Debug)]
#[command(
    name = "evtlab",
    version,
    about = "Certified suprema and hyperfinite grids for piecewise polynomials"
)]
struct Cli {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    /// Largest grid is 2^N points
    #[arg(long, env = "EVTLAB_RESOURCE_CAP_LOG2", default_value_t = DEFAULT_CAP_LOG2, global = true)]
    resource_cap_log2: u32,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certified supremum at precision 2^-k
    Sup {
        #[command(flatten)]
        func: FnArgs,
        #[arg(long, default_value_t = 12)]
        k: u32,
    },
    /// Hyperfinite grid argmax and the argmax sequence
    HyperEvt {
        #[command(flatten)]
        func: FnArgs,
        #[arg(long, default_value_t = 12)]
        k: u32,
        /// Comma-separated, strictly increasing grid levels
        #[arg(long, default_value = "8,16,32,64")]
        levels: String,
        /// Uniqueness modulus such as "1/4/4^k"; enables the standard part
        #[arg(long)]
        delta: Option<String>,
        /// Precision of the reported standard part
        #[arg(long, default_value_t = 4)]
        st_k: u32,
    },
    /// Slopes +2^-m and -2^-m compared at precision 2^-k
    Counterexample {
        #[arg(long, default_value_t = 20)]
        m: u32,
        #[arg(long, default_value_t = 10)]
        k: u32,
    },
    /// Locate a unique maximizer to within 2^-k
    Locate {
        #[command(flatten)]
        func: FnArgs,
        #[arg(long, default_value_t = 6)]
        k: u32,
        /// Uniqueness modulus such as "1/4/4^k"
        #[arg(long)]
        delta: String,
    },
    /// Check |sqrt2 - m/n| >= 1/(3n^2) for every denominator up to max-den
    Irrational {
        #[arg(long, default_value_t = 10)]
        max_den: u64,
    },
    /// Classify a named sequence: const:q, harmonic, altharmonic, identity
    Classify {
        #[arg(long)]
        seq: String,
        #[arg(long, default_value_t = 64)]
        horizon: u64,
    },
    /// Check a bounded-quantifier instance at a finite level n
    Transfer {
        #[arg(long, value_enum)]
        formula: FormulaArg,
        #[arg(long)]
        n: u64,
        /// Comma-separated sample points in [0, 1]
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        samples: String,
        #[arg(long = "fn", allow_hyphen_values = true)]
        fn_src: Option<String>,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        a: String,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        b: String,
    },
    /// Parse a function and print it back
    Parse {
        #[command(flatten)]
        func: FnArgs,
    },
}

#[derive(Args, Debug)]
struct FnArgs {
    /// Function of x, e.g. "x*(1-x)"
    #[arg(long = "fn", allow_hyphen_values = true)]
    fn_src: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    a: String,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    b: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormulaArg {
    #[value(name = "partition", alias = "PartitionExists")]
    Partition,
    #[value(name = "finite-max", alias = "FiniteMaxExists")]
    FiniteMax,
}

enum Failure {
    Usage(String),
    Domain(String),
    Resource(String),
}

impl From<SupError> for Failure {
    fn from(e: SupError) -> Self {
        match e {
            SupError::ResourceLimit { .. } => Failure::Resource(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

impl From<CRealError> for Failure {
    fn from(e: CRealError) -> Self {
        match e {
            CRealError::ResourceLimit(_) | CRealError::IndexOverflow(_) => {
                Failure::Resource(e.to_string())
            }
            CRealError::Domain(_) => Failure::Domain(e.to_string()),
        }
    }
}

impl From<HyperError> for Failure {
    fn from(e: HyperError) -> Self {
        match e {
            HyperError::Sup(e) => e.into(),
            HyperError::CReal(e) => e.into(),
            e => Failure::Domain(e.to_string()),
        }
    }
}

impl From<FuncError> for Failure {
    fn from(e: FuncError) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn rational(name: &str, src: &str) -> Result<Rational, Failure> {
    src.trim()
        .parse()
        .map_err(|e| Failure::Usage(format!("--{name}: {e}")))
}

fn function(src: &str, a: &str, b: &str) -> Result<UniformFn, Failure> {
    Ok(UniformFn::parse(src, rational("a", a)?, rational("b", b)?)?)
}

fn modulus(src: &str) -> Result<UniquenessModulus, Failure> {
    src.parse()
        .map_err(|e: SupError| Failure::Usage(format!("--delta: {e}")))
}

fn list<T: std::str::FromStr>(name: &str, src: &str) -> Result<Vec<T>, Failure>
where
    T::Err: std::fmt::Display,
{
    src.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|e| Failure::Usage(format!("--{name}: {s:?}: {e}")))
        })
        .collect()
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn no_csv(format: Format, command: &str) -> Result<(), Failure> {
    if format == Format::Csv {
        return Err(Failure::Usage(format!("{command} has no CSV output")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<String, Failure> {
    let cap = ResourceCap::new(cli.resource_cap_log2);
    let format = cli.format;
    let mut out = String::new();
    match cli.command {
        Command::Sup { func, k } => {
            let f = function(&func.fn_src, &func.a, &func.b)?;
            let k = Precision(k);
            if format == Format::Csv {
                let trace = grid_trace(&f, k, cap, MAX_CSV_ROWS)?;
                out.push_str("i,x_i,f(x_i)\n");
                for (i, x, y) in &trace.rows {
                    let _ = writeln!(out, "{i},{x},{y}");
                }
                if trace.truncated {
                    let _ = writeln!(
                        out,
                        "# truncated after {} of {} rows",
                        trace.rows.len(),
                        trace.n + 1
                    );
                }
                return Ok(out);
            }
            let cert = sup_at(&f, k, cap)?;
            let places = k.get().saturating_sub(4) / 4;
            let decimal = sup_as_creal(&f, cap)?.render(places)?;
            match format {
                Format::Json => {
                    let mut v = cert.to_json();
                    v["decimal"] = json!(decimal);
                    out = pretty(&v);
                }
                _ => {
                    let _ = writeln!(out, "f        {} on [{}, {}]", f.body(), f.a(), f.b());
                    let _ = writeln!(out, "{cert}");
                    let _ = writeln!(out, "sup      {decimal}");
                }
            }
        }
        Command::HyperEvt {
            func,
            k,
            levels,
            delta,
            st_k,
        } => {
            let f = function(&func.fn_src, &func.a, &func.b)?;
            let levels: Vec<u64> = list("levels", &levels)?;
            let cert = evt_grid_argmax(&f, Precision(k), cap)?;
            let seq = match &delta {
                Some(d) => evt_argmax_sequence_unique(&f, &levels, &modulus(d)?)?,
                None => evt_argmax_sequence(&f, &levels)?,
            };
            let st = match delta {
                Some(_) => Some(standard_part(&seq.sequence)?.approx(Precision(st_k))?),
                None => None,
            };
            match format {
                Format::Csv => {
                    out.push_str("n,x_argmax\n");
                    for (n, x) in &seq.samples {
                        let _ = writeln!(out, "{n},{x}");
                    }
                }
                Format::Json => {
                    let mut v = json!({
                        "grid_argmax": cert.to_json(),
                        "sequence": seq.to_json(),
                    });
                    if let Some(st) = &st {
                        v["standard_part"] = json!({"k": st_k, "approx": st.to_json()});
                    }
                    out = pretty(&v);
                }
                Format::Text => {
                    let _ = writeln!(out, "f        {} on [{}, {}]", f.body(), f.a(), f.b());
                    let _ = writeln!(out, "{cert}");
                    let _ = writeln!(out, "argmax sequence");
                    for (n, x) in &seq.samples {
                        let _ = writeln!(out, "  n = {n:<8} x = {x}");
                    }
                    match &st {
                        Some(st) => {
                            let _ = writeln!(out, "standard part at 2^-{st_k}: {st}");
                        }
                        None => {
                            let _ = writeln!(
                                out,
                                "standard part: needs a uniqueness modulus (--delta)"
                            );
                        }
                    }
                }
            }
        }
        Command::Counterexample { m, k } => {
            no_csv(format, "counterexample")?;
            let report = counterexample_demo(m, Precision(k), cap)?;
            out = match format {
                Format::Json => pretty(&report.to_json()),
                _ => format!("{report}\n"),
            };
        }
        Command::Locate { func, k, delta } => {
            no_csv(format, "locate")?;
            let f = function(&func.fn_src, &func.a, &func.b)?;
            let located = locate_unique_max(&f, &modulus(&delta)?, Precision(k), cap)?;
            out = match format {
                Format::Json => pretty(&located.to_json()),
                _ => format!(
                    "maximizer within 2^-{} of {}\n(from the grid certificate at k = {}, n = {})\n",
                    located.k.get(),
                    located.point,
                    located.inner.k.get(),
                    located.inner.n
                ),
            };
        }
        Command::Irrational { max_den } => {
            if max_den == 0 {
                return Err(Failure::Domain("--max-den must be at least 1".into()));
            }
            let rows = liouville_sweep(max_den)?;
            match format {
                Format::Json => {
                    let rows: Vec<Value> = rows
                        .iter()
                        .map(|r| {
                            json!({
                                "n": r.n,
                                "m": r.closest_m,
                                "bound": r.bound.to_json(),
                                "checked": r.checked,
                                "verified": r.all_verified,
                            })
                        })
                        .collect();
                    out = pretty(&Value::Array(rows));
                }
                Format::Csv => {
                    out.push_str("m,n,bound,checked,verified\n");
                    for r in &rows {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{}",
                            r.closest_m, r.n, r.bound, r.checked, r.all_verified
                        );
                    }
                }
                Format::Text => {
                    for r in &rows {
                        let status = if r.all_verified { "verified" } else { "FAILED" };
                        let _ = writeln!(
                            out,
                            "({}, {})  bound {}  {status}  checked {}",
                            r.closest_m, r.n, r.bound, r.checked
                        );
                    }
                }
            }
        }
        Command::Classify { seq, horizon } => {
            no_csv(format, "classify")?;
            let u = named_sequence(&seq)?;
            let c = classify(&u, horizon)?;
            match format {
                Format::Json => {
                    let mut v = c.to_json();
                    v["tag"] = json!(u.tag().to_string());
                    v["horizon"] = json!(horizon);
                    out = pretty(&v);
                }
                _ => {
                    let _ = writeln!(out, "sequence: {}", u.tag());
                    let _ = writeln!(out, "infinitesimal: {}", c.infinitesimal);
                    let _ = writeln!(out, "limited: {}", c.limited);
                    let _ = writeln!(out, "sign: {}", c.sign);
                }
            }
        }
        Command::Transfer {
            formula,
            n,
            samples,
            fn_src,
            a,
            b,
        } => {
            no_csv(format, "transfer")?;
            let f = fn_src.as_deref().map(|s| function(s, &a, &b)).transpose()?;
            let samples: Vec<Rational> = list("samples", &samples)?;
            let formula = match formula {
                FormulaArg::Partition => TransferFormula::PartitionExists,
                FormulaArg::FiniteMax => TransferFormula::FiniteMaxExists,
            };
            let report = finite_transfer_check(formula, n, f.as_ref(), &samples)?;
            match format {
                Format::Json => out = pretty(&report.to_json()),
                _ => {
                    let _ = writeln!(
                        out,
                        "{} at n = {}: {}",
                        report.formula,
                        report.n,
                        if report.holds { "holds" } else { "fails" }
                    );
                    for w in &report.witnesses {
                        let _ = writeln!(out, "  {}", witness_text(w));
                    }
                    let _ = writeln!(out, "convention: {}", report.convention);
                    for x in &report.strict_discrepancies {
                        let _ = writeln!(out, "note: x = {x} has no cell under the strict form; the last cell is closed");
                    }
                }
            }
        }
        Command::Parse { func } => {
            no_csv(format, "parse")?;
            let f = function(&func.fn_src, &func.a, &func.b)?;
            out = match format {
                Format::Json => pretty(&f.to_json()),
                _ => format!("{}\n", f.body()),
            };
        }
    }
    Ok(out)
}

fn witness_text(w: &evtlab_core::hyper::TransferWitness) -> String {
    use evtlab_core::hyper::TransferWitness;
    match w {
        TransferWitness::Partition {
            x,
            i: Some(i),
            convention,
        } => format!("x = {x}: i = {i} ({convention})"),
        TransferWitness::Partition { x, i: None, .. } => format!("x = {x}: no witness"),
        TransferWitness::Max { i0, point, value } => format!("i0 = {i0}, x = {point}, f = {value}"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            eprintln!("\nfunction grammar:\n{GRAMMAR}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nfunction grammar:\n{GRAMMAR}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Resource(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from([
            "evtlab", "sup", "--fn", "x", "--a", "-1", "--k", "3", "--format", "json",
        ])
        .unwrap();
        assert_eq!(cli.format, Format::Json);
        assert!(matches!(cli.command, Command::Sup { k: 3, .. }));
    }
}
