//! Common meadows: fields extended with an absorptive error element `⊥` and
//! a total division with `x/0 = ⊥`.
//!
//! The crate covers the full pipeline from concrete syntax to a decision
//! procedure for the equations valid in every common meadow:
//!
//! * [`terms`]: term syntax, parser and printer
//! * [`semantics`]: evaluation over `ℚ` and `F_p`, brute-force and sampled checkers
//! * [`polyalg`]: exact multivariate polynomials, gcd and squarefree parts
//! * [`normalize`]: reduction of `⊥`-ring terms to quasi-polynomial sumterms,
//!   and the axiom tables with a traced rewriting engine
//! * [`flatten`]: fracterm flattening into a single `p/q`
//! * [`decide`]: the decision procedure and countermodel search
//! * [`harness`]: random generation and differential testing

pub mod decide;
pub mod flatten;
pub mod harness;
pub mod normalize;
pub mod polyalg;
pub mod semantics;
pub mod terms;

pub use decide::{canonicalize, decide, decide_with, find_countermodel, Budget, CanonicalFracterm, Condition, Verdict};
pub use flatten::{denominator_annex_shift, flatten, FlatFracterm};
pub use normalize::{reduce_wcr, wcr_equal, QuasiPoly};
pub use polyalg::Poly;
pub use semantics::{eval, CarrierSpec, MeadowValue, Prime, Valuation};
pub use terms::{parse, parse_equation, Equation, SignatureTag, Term};
