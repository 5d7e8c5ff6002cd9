//! rsfkit-core: two kernel reactive stream languages and the machinery
//! connecting them.
//!
//! The crate is organized around a small host-language universe
//! ([`host`]) shared by both languages:
//!
//! * [`yampa`] — pure stream transformers (`arr`/`comp`/`first`/`loop`),
//!   with stepwise and stream semantics, a `Loop v (Arr f)` normal form,
//!   and bounded bisimulation checking.
//! * [`molholes`] — resource-effectful stream transformers (`get`/`set`
//!   against a cell memory), with program-level `init`/`pull`/`push`/`run`
//!   semantics.
//! * [`memory`] — the concrete resource memory with access-right tracking.
//! * [`typecheck`] — the abstract semantics deciding resource
//!   well-typedness (inputs read exactly once, outputs written exactly
//!   once).
//! * [`rewrite`] — equational normalization of effectful terms into
//!   `Get* ; Arr f ; Set*` shape, resource collapse, and the translation
//!   into pure stream transformers.
//! * [`equiv`] — the differential-testing harness: sampled observational
//!   equivalence and the executable catalog of equational laws.
//! * [`gen`] — seeded random generation of values, functions, terms,
//!   memories, and well-typed programs, shared by the harness and tests.

pub mod equiv;
pub mod gen;
pub mod host;
pub mod memory;
pub mod molholes;
pub mod path;
pub mod programs;
pub mod rewrite;
pub mod typecheck;
pub mod yampa;

pub use host::{HostFn, Prim, Ty, Val};
pub use memory::{Cell, Memory, Status};
pub use molholes::{Program, Ref, RsfTerm};
pub use rewrite::NormalForm;
pub use typecheck::AbsMemory;
pub use yampa::SfTerm;
