//! Resource-effectful stream transformers and program-level semantics.
//!
//! Terms thread a [`Memory`] through each step. A program fixes the
//! resource layout — identifiers `[0, k_in)` are inputs, then internals,
//! then outputs — and its stream semantics installs fresh input/output
//! cells before every step (`pull`) and harvests the written outputs
//! after it (`push`).

use std::fmt;

use thiserror::Error;

use crate::host::{HostFn, ShapeMismatch, Ty, Val};
use crate::memory::{self, Cell, MemError, Memory};
use crate::path::TermPath;

/// A typed resource identifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ref {
    pub ty: Ty,
    pub id: u32,
}

impl Ref {
    pub fn new(ty: Ty, id: u32) -> Ref {
        Ref { ty, id }
    }
}

impl fmt::Display for Ref {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.ty, self.id)
    }
}

/// Terms of the resource-effectful language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RsfTerm {
    Arr(HostFn),
    First(Box<RsfTerm>),
    Comp(Box<RsfTerm>, Box<RsfTerm>),
    /// `x -> (x, value of r)`
    Get(Ref),
    /// `(x, y) -> x`, writing `y` to `r`.
    Set(Ref),
}

/// A term-level typing failure, located by subterm path.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("ill-typed term at {path}: {reason}")]
pub struct TermTypeError {
    pub path: TermPath,
    pub reason: String,
}

impl TermTypeError {
    pub(crate) fn new(path: TermPath, reason: impl Into<String>) -> Self {
        TermTypeError {
            path,
            reason: reason.into(),
        }
    }
}

impl RsfTerm {
    pub fn comp(first: RsfTerm, second: RsfTerm) -> RsfTerm {
        RsfTerm::Comp(Box::new(first), Box::new(second))
    }

    pub fn first(inner: RsfTerm) -> RsfTerm {
        RsfTerm::First(Box::new(inner))
    }

    /// Chain a sequence of terms left to right. Panics on an empty slice.
    pub fn chain(parts: Vec<RsfTerm>) -> RsfTerm {
        let mut iter = parts.into_iter().rev();
        let last = iter.next().expect("chain of at least one term");
        iter.fold(last, |acc, t| RsfTerm::comp(t, acc))
    }

    /// Value-level output type at the given input type.
    pub fn infer(&self, input: &Ty) -> Result<Ty, TermTypeError> {
        self.infer_at(input, &TermPath::root())
    }

    fn infer_at(&self, input: &Ty, path: &TermPath) -> Result<Ty, TermTypeError> {
        match self {
            RsfTerm::Arr(f) => f
                .infer(input)
                .map_err(|e| TermTypeError::new(path.clone(), e.to_string())),
            RsfTerm::First(inner) => match input.as_prod() {
                Some((a, c)) => {
                    let b = inner.infer_at(a, &path.child(0))?;
                    Ok(Ty::prod(b, c.clone()))
                }
                None => Err(TermTypeError::new(
                    path.clone(),
                    format!("first requires a product input, got {input}"),
                )),
            },
            RsfTerm::Comp(t1, t2) => {
                let mid = t1.infer_at(input, &path.child(0))?;
                t2.infer_at(&mid, &path.child(1))
            }
            RsfTerm::Get(r) => Ok(Ty::prod(input.clone(), r.ty.clone())),
            RsfTerm::Set(r) => match input.as_prod() {
                Some((a, b)) if *b == r.ty => Ok(a.clone()),
                _ => Err(TermTypeError::new(
                    path.clone(),
                    format!("set {} requires input (_ x {}), got {input}", r.id, r.ty),
                )),
            },
        }
    }
}

impl fmt::Display for RsfTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RsfTerm::Arr(fun) => write!(f, "(arr {fun})"),
            RsfTerm::First(inner) => write!(f, "(first {inner})"),
            RsfTerm::Comp(t1, t2) => write!(f, "(comp {t1} {t2})"),
            RsfTerm::Get(r) => write!(f, "(get {})", r.id),
            RsfTerm::Set(r) => write!(f, "(set {})", r.id),
        }
    }
}

/// A stepwise evaluation failure: a resource-discipline violation or an
/// ill-shaped value. Unreachable for well-typed programs.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error(transparent)]
    Memory(#[from] MemError),
    #[error(transparent)]
    Shape(#[from] ShapeMismatch),
}

/// One synchronous step of a term: consume `a`, thread the memory.
pub fn step(t: &RsfTerm, a: &Val, mem: &Memory) -> Result<(Val, Memory), StepError> {
    match t {
        RsfTerm::Arr(f) => Ok((f.eval(a)?, mem.clone())),
        RsfTerm::First(inner) => match a {
            Val::P(x, c) => {
                let (y, next) = step(inner, x, mem)?;
                Ok((Val::pair(y, (**c).clone()), next))
            }
            _ => Err(ShapeMismatch {
                combinator: "first",
                value: a.clone(),
            }
            .into()),
        },
        RsfTerm::Comp(t1, t2) => {
            let (b, m1) = step(t1, a, mem)?;
            step(t2, &b, &m1)
        }
        RsfTerm::Get(r) => {
            let (v, next) = memory::read(r, mem)?;
            Ok((Val::pair(a.clone(), v), next))
        }
        RsfTerm::Set(r) => match a {
            Val::P(x, y) => {
                let next = memory::write(r, mem, (**y).clone())?;
                Ok(((**x).clone(), next))
            }
            _ => Err(ShapeMismatch {
                combinator: "set",
                value: a.clone(),
            }
            .into()),
        },
    }
}

/// Which region of the resource layout an identifier falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResourceKind {
    Input,
    Internal,
    Output,
}

/// A complete program: resource declarations plus a `unit -> unit` term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub inputs: Vec<Ty>,
    pub internals: Vec<(Val, Ty)>,
    pub outputs: Vec<Ty>,
    pub term: RsfTerm,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("row has {got} values but the program declares {expected} inputs")]
    ArityMismatch { expected: usize, got: usize },
    #[error("row value {index} has type {got}, expected {expected}")]
    ValueTypeMismatch {
        index: usize,
        expected: Ty,
        got: Ty,
    },
    #[error("output resource {0} was never written")]
    OutputMissing(u32),
    #[error("internal {index} initial value has type {got}, expected {expected}")]
    BadInternal {
        index: usize,
        expected: Ty,
        got: Ty,
    },
    #[error("resource {id} at {path} is outside the declared layout")]
    RefOutOfRange { id: u32, path: TermPath },
    #[error("resource {id} at {path} has type {got}, but the layout declares {expected}")]
    RefTypeMismatch {
        id: u32,
        path: TermPath,
        expected: Ty,
        got: Ty,
    },
}

/// Errors surfaced by running a program.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error(transparent)]
    Step(#[from] StepError),
}

impl Program {
    pub fn k_in(&self) -> u32 {
        self.inputs.len() as u32
    }

    pub fn k_internal(&self) -> u32 {
        self.internals.len() as u32
    }

    pub fn k_out(&self) -> u32 {
        self.outputs.len() as u32
    }

    pub fn resource_count(&self) -> u32 {
        self.k_in() + self.k_internal() + self.k_out()
    }

    pub fn kind_of(&self, id: u32) -> Option<ResourceKind> {
        if id < self.k_in() {
            Some(ResourceKind::Input)
        } else if id < self.k_in() + self.k_internal() {
            Some(ResourceKind::Internal)
        } else if id < self.resource_count() {
            Some(ResourceKind::Output)
        } else {
            None
        }
    }

    /// The declared type at a layout position.
    pub fn layout_ty(&self, id: u32) -> Option<&Ty> {
        match self.kind_of(id)? {
            ResourceKind::Input => self.inputs.get(id as usize),
            ResourceKind::Internal => self
                .internals
                .get((id - self.k_in()) as usize)
                .map(|(_, t)| t),
            ResourceKind::Output => self
                .outputs
                .get((id - self.k_in() - self.k_internal()) as usize),
        }
    }

    /// Check the structural invariants: internal initial values are
    /// well-typed, and every reference in the term matches the layout.
    pub fn validate(&self) -> Result<(), ProgramError> {
        for (index, (v, ty)) in self.internals.iter().enumerate() {
            if v.ty() != *ty {
                return Err(ProgramError::BadInternal {
                    index,
                    expected: ty.clone(),
                    got: v.ty(),
                });
            }
        }
        self.validate_refs(&self.term, &TermPath::root())
    }

    fn validate_refs(&self, t: &RsfTerm, path: &TermPath) -> Result<(), ProgramError> {
        match t {
            RsfTerm::Arr(_) => Ok(()),
            RsfTerm::First(inner) => self.validate_refs(inner, &path.child(0)),
            RsfTerm::Comp(t1, t2) => {
                self.validate_refs(t1, &path.child(0))?;
                self.validate_refs(t2, &path.child(1))
            }
            RsfTerm::Get(r) | RsfTerm::Set(r) => match self.layout_ty(r.id) {
                None => Err(ProgramError::RefOutOfRange {
                    id: r.id,
                    path: path.clone(),
                }),
                Some(ty) if *ty != r.ty => Err(ProgramError::RefTypeMismatch {
                    id: r.id,
                    path: path.clone(),
                    expected: ty.clone(),
                    got: r.ty.clone(),
                }),
                Some(_) => Ok(()),
            },
        }
    }

    /// The initial memory: exactly the internal cells, with their
    /// declared initial values.
    pub fn init(&self) -> Memory {
        self.internals
            .iter()
            .enumerate()
            .map(|(i, (v, ty))| {
                (
                    self.k_in() + i as u32,
                    Cell::internal(ty.clone(), v.clone()),
                )
            })
            .collect()
    }

    /// Install fresh input cells carrying `row` and fresh output cells;
    /// all other identifiers are copied from `mem`.
    pub fn pull(&self, mem: &Memory, row: &[Val]) -> Result<Memory, ProgramError> {
        if row.len() != self.inputs.len() {
            return Err(ProgramError::ArityMismatch {
                expected: self.inputs.len(),
                got: row.len(),
            });
        }
        for (index, (v, ty)) in row.iter().zip(&self.inputs).enumerate() {
            if v.ty() != *ty {
                return Err(ProgramError::ValueTypeMismatch {
                    index,
                    expected: ty.clone(),
                    got: v.ty(),
                });
            }
        }
        let mut next = mem.clone();
        for (i, (v, ty)) in row.iter().zip(&self.inputs).enumerate() {
            next.insert(i as u32, Cell::input_fresh(ty.clone(), v.clone()));
        }
        let out_base = self.k_in() + self.k_internal();
        for (i, ty) in self.outputs.iter().enumerate() {
            next.insert(out_base + i as u32, Cell::output_fresh(ty.clone()));
        }
        Ok(next)
    }

    /// Harvest the written output cells in increasing identifier order.
    pub fn push(&self, mem: &Memory) -> Result<Vec<Val>, ProgramError> {
        let out_base = self.k_in() + self.k_internal();
        let mut row = Vec::with_capacity(self.outputs.len());
        for (i, ty) in self.outputs.iter().enumerate() {
            let id = out_base + i as u32;
            match mem.get(id) {
                Some(Cell {
                    status: crate::memory::Status::Output(false),
                    ty: cell_ty,
                    val: Some(v),
                }) if cell_ty == ty => row.push(v.clone()),
                _ => return Err(ProgramError::OutputMissing(id)),
            }
        }
        Ok(row)
    }

    /// Run the program over a finite prefix of the input stream, one
    /// output row per input row. Internals persist between steps.
    pub fn run(&self, rows: &[Vec<Val>]) -> Result<Vec<Vec<Val>>, RunError> {
        let mut mem = self.init();
        let mut out = Vec::with_capacity(rows.len());
        for row in rows {
            let pulled = self.pull(&mem, row)?;
            let (_, next) = step(&self.term, &Val::Tt, &pulled)?;
            out.push(self.push(&next)?);
            mem = next;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memory::Status;

    use crate::programs::{delay, naturals};

    fn nat_ref(id: u32) -> Ref {
        Ref::new(Ty::Nat, id)
    }

    #[test]
    fn infer_get_and_set() {
        let get = RsfTerm::Get(nat_ref(0));
        assert_eq!(
            get.infer(&Ty::Unit).unwrap(),
            Ty::prod(Ty::Unit, Ty::Nat)
        );
        let set = RsfTerm::Set(nat_ref(2));
        assert_eq!(
            set.infer(&Ty::prod(Ty::Unit, Ty::Nat)).unwrap(),
            Ty::Unit
        );
        assert!(set.infer(&Ty::Nat).is_err());
    }

    #[test]
    fn step_get_pairs_with_resource_value() {
        let mem: Memory = [(1, Cell::internal(Ty::Nat, Val::nat(3)))]
            .into_iter()
            .collect();
        let (v, next) = step(&RsfTerm::Get(nat_ref(1)), &Val::nat(7), &mem).unwrap();
        assert_eq!(v, Val::pair(Val::nat(7), Val::nat(3)));
        assert_eq!(next, mem);
    }

    #[test]
    fn step_set_writes_and_forwards() {
        let mem: Memory = [(1, Cell::internal(Ty::Nat, Val::nat(3)))]
            .into_iter()
            .collect();
        let input = Val::pair(Val::nat(7), Val::nat(9));
        let (v, next) = step(&RsfTerm::Set(nat_ref(1)), &input, &mem).unwrap();
        assert_eq!(v, Val::nat(7));
        assert_eq!(next.get(1).unwrap().val, Some(Val::nat(9)));
    }

    #[test]
    fn step_rejects_spent_input() {
        let mem: Memory = [(0, Cell::input_spent(Ty::Nat))].into_iter().collect();
        assert_eq!(
            step(&RsfTerm::Get(nat_ref(0)), &Val::nat(7), &mem),
            Err(StepError::Memory(MemError::NotReadable(0)))
        );
    }

    #[test]
    fn init_places_internals_after_inputs() {
        let m = naturals().init();
        assert_eq!(m.len(), 1);
        assert_eq!(m.get(0), Some(&Cell::internal(Ty::Nat, Val::nat(0))));

        let m = delay().init();
        assert_eq!(m.len(), 1);
        assert_eq!(m.get(1), Some(&Cell::internal(Ty::Nat, Val::nat(0))));

        let empty = Program {
            inputs: vec![],
            internals: vec![],
            outputs: vec![],
            term: RsfTerm::Arr(HostFn::Id),
        };
        assert!(empty.init().is_empty());
    }

    #[test]
    fn pull_installs_fresh_io_cells() {
        let p = delay();
        let m = p.pull(&p.init(), &[Val::nat(5)]).unwrap();
        assert_eq!(m.get(0), Some(&Cell::input_fresh(Ty::Nat, Val::nat(5))));
        assert_eq!(m.get(1), Some(&Cell::internal(Ty::Nat, Val::nat(0))));
        assert_eq!(m.get(2), Some(&Cell::output_fresh(Ty::Nat)));

        let p = naturals();
        let m = p.pull(&p.init(), &[]).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.get(1), Some(&Cell::output_fresh(Ty::Nat)));

        assert!(matches!(
            delay().pull(&delay().init(), &[Val::B(true)]),
            Err(ProgramError::ValueTypeMismatch { .. })
        ));
    }

    #[test]
    fn push_collects_written_outputs() {
        let p = naturals();
        let mem: Memory = [(1, Cell::output_written(Ty::Nat, Val::nat(4)))]
            .into_iter()
            .collect();
        assert_eq!(p.push(&mem).unwrap(), vec![Val::nat(4)]);

        let unwritten: Memory = [(1, Cell::output_fresh(Ty::Nat))].into_iter().collect();
        assert_eq!(p.push(&unwritten), Err(ProgramError::OutputMissing(1)));

        let no_outputs = Program {
            outputs: vec![],
            ..naturals()
        };
        assert_eq!(no_outputs.push(&Memory::new()).unwrap(), Vec::<Val>::new());
    }

    #[test]
    fn naturals_counts_from_zero() {
        let rows: Vec<Vec<Val>> = (0..4).map(|_| vec![]).collect();
        let out = naturals().run(&rows).unwrap();
        let expected: Vec<Vec<Val>> = (0..4u64).map(|i| vec![Val::nat(i)]).collect();
        assert_eq!(out, expected);
    }

    #[test]
    fn delay_shifts_by_one() {
        let rows = vec![vec![Val::nat(5)], vec![Val::nat(7)], vec![Val::nat(9)]];
        let out = delay().run(&rows).unwrap();
        assert_eq!(
            out,
            vec![vec![Val::nat(0)], vec![Val::nat(5)], vec![Val::nat(7)]]
        );
    }

    #[test]
    fn run_of_empty_stream_is_empty() {
        assert_eq!(naturals().run(&[]).unwrap(), Vec::<Vec<Val>>::new());
    }

    #[test]
    fn internals_persist_between_steps() {
        let p = naturals();
        let mut mem = p.init();
        for expected in 0..3u64 {
            let pulled = p.pull(&mem, &[]).unwrap();
            let (_, next) = step(&p.term, &Val::Tt, &pulled).unwrap();
            assert_eq!(next.get(0).unwrap().val, Some(Val::nat(expected + 1)));
            assert_eq!(next.get(0).unwrap().status, Status::Internal);
            mem = next;
        }
    }

    /// A step changes only the cells its term names with Get/Set, and
    /// identical runs produce identical results.
    #[test]
    fn step_touches_only_named_cells_fuzz() {
        use crate::gen::Gen;
        use crate::memory::Cell;
        let mut gen = Gen::new(0x51e9);
        for _ in 0..150 {
            let input = gen.ty(1);
            let pool = gen.ref_pool(3);
            let (t, _) = gen.rsf_any(&input, &pool, 3);
            let (gets, sets) = crate::rewrite::refs_accessed(&t);
            let named: Vec<u32> = gets.iter().chain(&sets).map(|r| r.id).collect();
            let mut mem: Memory = pool
                .iter()
                .map(|r| {
                    let v = gen.val(&r.ty);
                    (r.id, Cell::internal(r.ty.clone(), v))
                })
                .collect();
            mem.insert(97, Cell::internal(Ty::Bool, Val::B(true)));
            let a = gen.val(&input);
            let out = step(&t, &a, &mem).expect("internal memory grants everything");
            assert_eq!(step(&t, &a, &mem).unwrap(), out);
            let (_, next) = out;
            for (id, cell) in mem.iter() {
                if !named.contains(&id) {
                    assert_eq!(next.get(id), Some(cell), "cell {id} changed");
                }
            }
        }
    }

    #[test]
    fn validate_catches_layout_violations() {
        let mut p = naturals();
        assert!(p.validate().is_ok());
        p.term = RsfTerm::Get(nat_ref(9));
        assert!(matches!(
            p.validate(),
            Err(ProgramError::RefOutOfRange { id: 9, .. })
        ));
        let mut p = naturals();
        p.term = RsfTerm::Get(Ref::new(Ty::Bool, 0));
        assert!(matches!(
            p.validate(),
            Err(ProgramError::RefTypeMismatch { id: 0, .. })
        ));
        let mut p = naturals();
        p.internals = vec![(Val::B(true), Ty::Nat)];
        assert!(matches!(
            p.validate(),
            Err(ProgramError::BadInternal { .. })
        ));
    }
}
