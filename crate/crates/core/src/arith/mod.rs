//! Arithmetic back ends: exact LP, polynomial systems and certificates.

pub mod cert;
pub mod lp;
pub mod polysys;

pub use cert::{check_certificate, parse_certificate, CertError, CertVariant, CertVerdict, Certificate, ConeTerm};
pub use lp::{lin_feasible, lin_feasible_stats, LinResult, LinRow, LinSystem, LpStats, Rel};
pub use polysys::{emit_etr, poly_feasible, Budget, PolyResult, PolySystem};
