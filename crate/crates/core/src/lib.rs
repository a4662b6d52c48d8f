//! Evaluation, canonical forms, proof checking and decision procedures for
//! affine and polynomial Lawvere logic.

pub mod arith;
pub mod canonical;
pub mod decide;
pub mod error;
pub mod gen;
pub mod numeric;
pub mod poly;
pub mod proofs;
pub mod reduction;
pub mod semantics;
pub mod syntax;

pub use canonical::{canonicalize, classify, to_poly, FormClass};
pub use error::ParseError;
pub use numeric::{ExtValue, Rat};
pub use poly::Poly;
pub use semantics::{eval, satisfies, satisfies_all, Model};
pub use syntax::{Formula, Judgement, Problem, PropLetter};
