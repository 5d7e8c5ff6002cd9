//! Concrete resource memory: a finite map from resource identifiers to
//! cells carrying an access-right status, a type, and an optional value.
//!
//! Accessing an input spends it (the value slot empties); writing an
//! output seals it; internal cells can be read and written at any time.
//! Operations return new memories, so a memory value is an immutable
//! snapshot.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::host::{Ty, Val};
use crate::molholes::Ref;

/// Accessibility of a resource cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Internal,
    /// Readable while the flag is true; reading flips it.
    Input(bool),
    /// Writable while the flag is true; writing flips it.
    Output(bool),
}

impl Status {
    /// Statuses whose cell must hold a value.
    pub fn is_defined(self) -> bool {
        matches!(
            self,
            Status::Internal | Status::Input(true) | Status::Output(false)
        )
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Internal => write!(f, "internal"),
            Status::Input(b) => write!(f, "input({b})"),
            Status::Output(b) => write!(f, "output({b})"),
        }
    }
}

/// A single resource cell.
///
/// Invariant: `val` is present exactly when `status.is_defined()`, and a
/// present value has type `ty`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub status: Status,
    pub ty: Ty,
    pub val: Option<Val>,
}

impl Cell {
    pub fn internal(ty: Ty, val: Val) -> Cell {
        Cell {
            status: Status::Internal,
            ty,
            val: Some(val),
        }
    }

    pub fn input_fresh(ty: Ty, val: Val) -> Cell {
        Cell {
            status: Status::Input(true),
            ty,
            val: Some(val),
        }
    }

    pub fn input_spent(ty: Ty) -> Cell {
        Cell {
            status: Status::Input(false),
            ty,
            val: None,
        }
    }

    pub fn output_fresh(ty: Ty) -> Cell {
        Cell {
            status: Status::Output(true),
            ty,
            val: None,
        }
    }

    pub fn output_written(ty: Ty, val: Val) -> Cell {
        Cell {
            status: Status::Output(false),
            ty,
            val: Some(val),
        }
    }

    pub fn is_well_formed(&self) -> bool {
        match &self.val {
            Some(v) => self.status.is_defined() && v.ty() == self.ty,
            None => !self.status.is_defined(),
        }
    }
}

/// A finite map from resource identifiers to cells.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Memory {
    cells: BTreeMap<u32, Cell>,
}

impl Memory {
    pub fn new() -> Memory {
        Memory::default()
    }

    pub fn insert(&mut self, id: u32, cell: Cell) {
        self.cells.insert(id, cell);
    }

    pub fn get(&self, id: u32) -> Option<&Cell> {
        self.cells.get(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &Cell)> {
        self.cells.iter().map(|(id, c)| (*id, c))
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.cells.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

impl FromIterator<(u32, Cell)> for Memory {
    fn from_iter<I: IntoIterator<Item = (u32, Cell)>>(iter: I) -> Memory {
        Memory {
            cells: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MemError {
    #[error("resource {0} is not readable (spent, wrong kind, wrong type, or absent)")]
    NotReadable(u32),
    #[error("resource {0} is not writable (already written, wrong kind, wrong type, or absent)")]
    NotWritable(u32),
}

/// True iff `r` names an internal cell, or a fresh input cell, holding a
/// value of `r`'s type. Total: a missing identifier is simply not
/// readable.
pub fn readable(r: &Ref, mem: &Memory) -> bool {
    match mem.get(r.id) {
        Some(cell) => {
            let has_typed_val = matches!(&cell.val, Some(v) if v.ty() == r.ty);
            cell.ty == r.ty
                && has_typed_val
                && matches!(cell.status, Status::Internal | Status::Input(true))
        }
        None => false,
    }
}

/// Dual of [`readable`]: an internal cell, or a fresh output cell with an
/// empty value slot.
pub fn writable(r: &Ref, mem: &Memory) -> bool {
    match mem.get(r.id) {
        Some(cell) => match cell.status {
            Status::Internal => {
                cell.ty == r.ty && matches!(&cell.val, Some(v) if v.ty() == r.ty)
            }
            Status::Output(true) => cell.ty == r.ty && cell.val.is_none(),
            _ => false,
        },
        None => false,
    }
}

/// Read `r` from `mem`. Internal cells are untouched; a fresh input cell
/// is spent (its value slot emptied).
pub fn read(r: &Ref, mem: &Memory) -> Result<(Val, Memory), MemError> {
    if !readable(r, mem) {
        return Err(MemError::NotReadable(r.id));
    }
    let cell = mem.get(r.id).expect("readable implies present");
    let v = cell.val.clone().expect("readable implies defined");
    match cell.status {
        Status::Internal => Ok((v, mem.clone())),
        Status::Input(true) => {
            let mut next = mem.clone();
            next.insert(r.id, Cell::input_spent(r.ty.clone()));
            Ok((v, next))
        }
        _ => unreachable!("readable excludes other statuses"),
    }
}

/// Write `v` to `r` in `mem`. Internal cells are overwritten; a fresh
/// output cell is sealed with the value.
pub fn write(r: &Ref, mem: &Memory, v: Val) -> Result<Memory, MemError> {
    if !writable(r, mem) || v.ty() != r.ty {
        return Err(MemError::NotWritable(r.id));
    }
    let cell = mem.get(r.id).expect("writable implies present");
    let mut next = mem.clone();
    match cell.status {
        Status::Internal => next.insert(r.id, Cell::internal(r.ty.clone(), v)),
        Status::Output(true) => next.insert(r.id, Cell::output_written(r.ty.clone(), v)),
        _ => unreachable!("writable excludes other statuses"),
    }
    Ok(next)
}
