//! Streams defined by cons, `zip_k` and projections: parsing and validation,
//! rewrite semantics, productivity and solution enumeration, observation
//! graphs with decidable bisimulation, conversions to and from automata with
//! output (including state-dependent-alphabet automata and their variadic
//! numeration), a propositional dynamic logic over observation graphs, and
//! the Fractran reduction showing where equivalence stops being decidable.

mod intern;

pub mod analysis;
pub mod automata;
pub mod fractran;
pub mod graph;
pub mod pdl;
pub mod semantics;
pub mod spec;
pub mod term;
pub mod transform;

pub use spec::{Dialect, SpecError, ZipSpec};
pub use term::{Symbol, Term, TermNode, VarId};
