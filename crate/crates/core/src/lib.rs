//! Two routes to the extreme value theorem over exact rationals.
//!
//! * [`creal`] and [`supengine`]: constructive reals with explicit Cauchy
//!   moduli, and a supremum certified to within `2^-k` from a finite grid.
//! * [`hyper`]: sequence representatives of hyperreals under the cofinite
//!   filter, standard part, and the hyperfinite-grid argmax.
//!
//! Functions come from the small piecewise-polynomial language in
//! [`funcspace`], which makes every grid value exact.

pub mod creal;
pub mod funcspace;
pub mod hyper;
pub mod ratcore;
pub mod supengine;

pub use creal::{CReal, CRealError, Comparison3, Verdict3};
pub use funcspace::{derive_modulus, eval_exact, parse, Expr, FuncError, ParseError, UniformFn};
pub use hyper::{
    classify, evt_argmax_sequence, evt_argmax_sequence_unique, evt_grid_argmax,
    finite_transfer_check, named_sequence, standard_part, Classification, HSeq, HyperError, SeqTag,
    TransferFormula, TransferReport,
};
pub use ratcore::{Precision, RatError, Rational};
pub use supengine::{
    counterexample_demo, locate_unique_max, sup_as_creal, sup_at, total_bound, ResourceCap,
    SupCertificate, SupError, UniquenessModulus,
};
