//! Rome: a row-type calculus with complements, evidence, and extensible
//! recursion. The pipeline is parse -> resolve -> kind-check -> normalize
//! -> type-check (with implicit evidence) -> evaluate.

pub mod entail;
pub mod eval;
pub mod kind;
pub mod norm;
pub mod pretty;
pub mod prelude;
pub mod program;
pub mod resolve;
pub mod surface;
pub mod syntax;
pub mod check;
