//! Abstract semantics deciding resource well-typedness: each input is
//! read exactly once, each output is written exactly once, internals are
//! unconstrained.
//!
//! The abstract memory keeps only each cell's tag (status and type);
//! running a term over it mirrors the concrete access-right updates
//! without values.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::host::Ty;
use crate::memory::{Memory, Status};
use crate::molholes::{Program, Ref, RsfTerm};
use crate::path::TermPath;

/// A finite map from resource identifiers to `(status, type)` tags.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AbsMemory {
    cells: BTreeMap<u32, (Status, Ty)>,
}

impl AbsMemory {
    pub fn new() -> AbsMemory {
        AbsMemory::default()
    }

    pub fn insert(&mut self, id: u32, status: Status, ty: Ty) {
        self.cells.insert(id, (status, ty));
    }

    pub fn get(&self, id: u32) -> Option<&(Status, Ty)> {
        self.cells.get(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &(Status, Ty))> {
        self.cells.iter().map(|(id, tag)| (*id, tag))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

impl FromIterator<(u32, (Status, Ty))> for AbsMemory {
    fn from_iter<I: IntoIterator<Item = (u32, (Status, Ty))>>(iter: I) -> AbsMemory {
        AbsMemory {
            cells: iter.into_iter().collect(),
        }
    }
}

/// True iff the concrete memory is a model of the abstract one: same
/// domain, matching tags, and a value of the tag's type wherever the
/// status requires one.
pub fn models(mem: &Memory, abs: &AbsMemory) -> bool {
    if mem.len() != abs.len() {
        return false;
    }
    abs.iter().all(|(id, (status, ty))| match mem.get(id) {
        Some(cell) => {
            cell.status == *status
                && cell.ty == *ty
                && (!status.is_defined() || matches!(&cell.val, Some(v) if v.ty() == *ty))
        }
        None => false,
    })
}

pub fn readable_abs(r: &Ref, abs: &AbsMemory) -> bool {
    matches!(abs.get(r.id),
        Some((Status::Internal | Status::Input(true), ty)) if *ty == r.ty)
}

pub fn writable_abs(r: &Ref, abs: &AbsMemory) -> bool {
    matches!(abs.get(r.id),
        Some((Status::Internal | Status::Output(true), ty)) if *ty == r.ty)
}

/// An abstract access failure, located by subterm path when raised from
/// [`abs_step`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AbsError {
    #[error("resource {id} is not readable at {path} (found {found})")]
    NotReadable {
        id: u32,
        path: TermPath,
        found: String,
    },
    #[error("resource {id} is not writable at {path} (found {found})")]
    NotWritable {
        id: u32,
        path: TermPath,
        found: String,
    },
}

fn describe(abs: &AbsMemory, id: u32) -> String {
    match abs.get(id) {
        Some((status, ty)) => format!("{status} of type {ty}"),
        None => "no cell".to_string(),
    }
}

/// Abstract read: internal tags are untouched; a fresh input flips to
/// spent.
pub fn abs_read(r: &Ref, abs: &AbsMemory) -> Result<AbsMemory, AbsError> {
    abs_read_at(r, abs, &TermPath::root())
}

fn abs_read_at(r: &Ref, abs: &AbsMemory, path: &TermPath) -> Result<AbsMemory, AbsError> {
    if !readable_abs(r, abs) {
        return Err(AbsError::NotReadable {
            id: r.id,
            path: path.clone(),
            found: describe(abs, r.id),
        });
    }
    match abs.get(r.id) {
        Some((Status::Input(true), ty)) => {
            let mut next = abs.clone();
            next.insert(r.id, Status::Input(false), ty.clone());
            Ok(next)
        }
        _ => Ok(abs.clone()),
    }
}

/// Abstract write: internal tags are untouched; a fresh output flips to
/// written.
pub fn abs_write(r: &Ref, abs: &AbsMemory) -> Result<AbsMemory, AbsError> {
    abs_write_at(r, abs, &TermPath::root())
}

fn abs_write_at(r: &Ref, abs: &AbsMemory, path: &TermPath) -> Result<AbsMemory, AbsError> {
    if !writable_abs(r, abs) {
        return Err(AbsError::NotWritable {
            id: r.id,
            path: path.clone(),
            found: describe(abs, r.id),
        });
    }
    match abs.get(r.id) {
        Some((Status::Output(true), ty)) => {
            let mut next = abs.clone();
            next.insert(r.id, Status::Output(false), ty.clone());
            Ok(next)
        }
        _ => Ok(abs.clone()),
    }
}

/// Run a term over an abstract memory, propagating tag changes.
pub fn abs_step(t: &RsfTerm, abs: &AbsMemory) -> Result<AbsMemory, AbsError> {
    abs_step_at(t, abs, &TermPath::root())
}

fn abs_step_at(t: &RsfTerm, abs: &AbsMemory, path: &TermPath) -> Result<AbsMemory, AbsError> {
    match t {
        RsfTerm::Arr(_) => Ok(abs.clone()),
        RsfTerm::First(inner) => abs_step_at(inner, abs, &path.child(0)),
        RsfTerm::Comp(t1, t2) => {
            let mid = abs_step_at(t1, abs, &path.child(0))?;
            abs_step_at(t2, &mid, &path.child(1))
        }
        RsfTerm::Get(r) => abs_read_at(r, abs, path),
        RsfTerm::Set(r) => abs_write_at(r, abs, path),
    }
}

/// The initial abstract memory of a program: fresh inputs, internals,
/// fresh outputs, laid out by identifier ranges.
pub fn abs_init(p: &Program) -> AbsMemory {
    let mut abs = AbsMemory::new();
    for (i, ty) in p.inputs.iter().enumerate() {
        abs.insert(i as u32, Status::Input(true), ty.clone());
    }
    for (i, (_, ty)) in p.internals.iter().enumerate() {
        abs.insert(p.k_in() + i as u32, Status::Internal, ty.clone());
    }
    let out_base = p.k_in() + p.k_internal();
    for (i, ty) in p.outputs.iter().enumerate() {
        abs.insert(out_base + i as u32, Status::Output(true), ty.clone());
    }
    abs
}

/// The verdict of the checker, with human-readable diagnostics naming
/// the first violated clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeReport {
    pub ok: bool,
    pub diagnostics: Vec<String>,
}

impl TypeReport {
    fn ok() -> TypeReport {
        TypeReport {
            ok: true,
            diagnostics: vec![],
        }
    }

    fn fail(diag: String) -> TypeReport {
        TypeReport {
            ok: false,
            diagnostics: vec![diag],
        }
    }
}

/// Decide well-typedness:
///
/// * clause (a): the term maps `unit` to `unit` at the value level;
/// * clause (b): the abstract run from [`abs_init`] succeeds;
/// * clause (c): afterwards every input is spent and every output
///   written (the must-consume-all-inputs half included).
pub fn well_typed(p: &Program) -> TypeReport {
    if let Err(e) = p.validate() {
        return TypeReport::fail(format!("layout: {e}"));
    }
    match p.term.infer(&Ty::Unit) {
        Ok(Ty::Unit) => {}
        Ok(other) => {
            return TypeReport::fail(format!(
                "clause (a): program term has output type {other}, expected unit"
            ));
        }
        Err(e) => {
            return TypeReport::fail(format!("clause (a): {e}"));
        }
    }
    let after = match abs_step(&p.term, &abs_init(p)) {
        Ok(after) => after,
        Err(e) => return TypeReport::fail(format!("clause (b): {e}")),
    };
    for id in 0..p.k_in() {
        if !matches!(after.get(id), Some((Status::Input(false), _))) {
            return TypeReport::fail(format!("clause (c): input {id} is never read"));
        }
    }
    let out_base = p.k_in() + p.k_internal();
    for id in out_base..out_base + p.k_out() {
        if !matches!(after.get(id), Some((Status::Output(false), _))) {
            return TypeReport::fail(format!("clause (c): output {id} is never written"));
        }
    }
    TypeReport::ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::host::{HostFn, Val};
    use crate::memory::Cell;
    use crate::programs::{delay, naturals};

    fn nat_ref(id: u32) -> Ref {
        Ref::new(Ty::Nat, id)
    }

    #[test]
    fn models_checks_tags_and_defined_values() {
        let mem: Memory = [(0, Cell::internal(Ty::Nat, Val::nat(5)))]
            .into_iter()
            .collect();
        let abs: AbsMemory = [(0, (Status::Internal, Ty::Nat))].into_iter().collect();
        assert!(models(&mem, &abs));

        let empty_cell: Memory = [(0, Cell::input_spent(Ty::Nat))].into_iter().collect();
        let fresh: AbsMemory = [(0, (Status::Input(true), Ty::Nat))].into_iter().collect();
        assert!(!models(&empty_cell, &fresh));

        assert!(models(&Memory::new(), &AbsMemory::new()));
    }

    #[test]
    fn abs_read_spends_inputs_only() {
        let abs: AbsMemory = [(0, (Status::Input(true), Ty::Nat))].into_iter().collect();
        let next = abs_read(&nat_ref(0), &abs).unwrap();
        assert_eq!(next.get(0), Some(&(Status::Input(false), Ty::Nat)));

        let internal: AbsMemory = [(1, (Status::Internal, Ty::Nat))].into_iter().collect();
        assert_eq!(abs_read(&nat_ref(1), &internal).unwrap(), internal);

        let spent: AbsMemory = [(0, (Status::Input(false), Ty::Nat))].into_iter().collect();
        assert!(matches!(
            abs_read(&nat_ref(0), &spent),
            Err(AbsError::NotReadable { id: 0, .. })
        ));
    }

    #[test]
    fn abs_write_seals_outputs_only() {
        let abs: AbsMemory = [(2, (Status::Output(true), Ty::Nat))].into_iter().collect();
        let next = abs_write(&nat_ref(2), &abs).unwrap();
        assert_eq!(next.get(2), Some(&(Status::Output(false), Ty::Nat)));

        let internal: AbsMemory = [(1, (Status::Internal, Ty::Nat))].into_iter().collect();
        assert_eq!(abs_write(&nat_ref(1), &internal).unwrap(), internal);

        let sealed: AbsMemory = [(2, (Status::Output(false), Ty::Nat))].into_iter().collect();
        assert!(matches!(
            abs_write(&nat_ref(2), &sealed),
            Err(AbsError::NotWritable { id: 2, .. })
        ));
    }

    #[test]
    fn abs_step_base_cases() {
        let abs: AbsMemory = [(2, (Status::Output(true), Ty::Nat))].into_iter().collect();
        assert_eq!(abs_step(&RsfTerm::Arr(HostFn::Id), &abs).unwrap(), abs);
        let sealed = abs_step(&RsfTerm::Set(nat_ref(2)), &abs).unwrap();
        assert_eq!(sealed.get(2), Some(&(Status::Output(false), Ty::Nat)));
    }

    #[test]
    fn abs_step_locates_the_second_read() {
        let abs: AbsMemory = [(0, (Status::Input(true), Ty::Nat))].into_iter().collect();
        let t = RsfTerm::comp(RsfTerm::Get(nat_ref(0)), RsfTerm::Get(nat_ref(0)));
        let err = abs_step(&t, &abs).unwrap_err();
        match err {
            AbsError::NotReadable { id, path, .. } => {
                assert_eq!(id, 0);
                assert_eq!(path, TermPath::root().child(1));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn abs_init_follows_the_layout() {
        let abs = abs_init(&naturals());
        assert_eq!(abs.get(0), Some(&(Status::Internal, Ty::Nat)));
        assert_eq!(abs.get(1), Some(&(Status::Output(true), Ty::Nat)));

        let abs = abs_init(&delay());
        assert_eq!(abs.get(0), Some(&(Status::Input(true), Ty::Nat)));
        assert_eq!(abs.get(1), Some(&(Status::Internal, Ty::Nat)));
        assert_eq!(abs.get(2), Some(&(Status::Output(true), Ty::Nat)));

        let empty = Program {
            inputs: vec![],
            internals: vec![],
            outputs: vec![],
            term: RsfTerm::Arr(HostFn::Id),
        };
        assert!(abs_init(&empty).is_empty());
    }

    #[test]
    fn accepts_the_example_programs() {
        assert!(well_typed(&naturals()).ok);
        assert!(well_typed(&delay()).ok);
    }

    #[test]
    fn rejects_unwritten_output() {
        let p = Program {
            inputs: vec![],
            internals: vec![],
            outputs: vec![Ty::Nat],
            term: RsfTerm::Arr(HostFn::Id),
        };
        let report = well_typed(&p);
        assert!(!report.ok);
        assert!(report.diagnostics[0].contains("clause (c)"));
        assert!(report.diagnostics[0].contains("never written"));
    }

    #[test]
    fn rejects_double_input_read() {
        // get 0 ; arr fst ; get 0 ; arr fst ; pair with tt ; set 2
        let p = Program {
            inputs: vec![Ty::Nat],
            internals: vec![],
            outputs: vec![Ty::Nat],
            term: RsfTerm::chain(vec![
                RsfTerm::Get(nat_ref(0)),
                RsfTerm::Arr(HostFn::Snd),
                RsfTerm::Get(nat_ref(0)),
                RsfTerm::Arr(HostFn::pairing(HostFn::Const(Val::Tt), HostFn::Snd)),
                RsfTerm::Set(nat_ref(1)),
            ]),
        };
        let report = well_typed(&p);
        assert!(!report.ok);
        assert!(report.diagnostics[0].contains("clause (b)"));
        assert!(report.diagnostics[0].contains("not readable"));
    }

    /// Preservation: on modeled memories, a successful abstract access
    /// implies the concrete access succeeds and the results stay
    /// related.
    #[test]
    fn access_preservation_fuzz() {
        use crate::gen::Gen;
        use crate::memory;
        let mut gen = Gen::new(0xabc1);
        for _ in 0..400 {
            let abs = gen.abs_memory(4);
            let mem = gen.memory_modeling(&abs);
            assert!(models(&mem, &abs));
            let ids: Vec<u32> = abs.iter().map(|(id, _)| id).collect();
            if ids.is_empty() {
                continue;
            }
            let id = ids[gen.range(0, ids.len() as u64) as usize];
            let ty = abs.get(id).unwrap().1.clone();
            let r = Ref::new(ty.clone(), id);
            if let Ok(abs_next) = abs_read(&r, &abs) {
                let (v, mem_next) = memory::read(&r, &mem).expect("concrete read must succeed");
                assert_eq!(v.ty(), ty);
                assert!(models(&mem_next, &abs_next));
            }
            if let Ok(abs_next) = abs_write(&r, &abs) {
                let v = gen.val(&ty);
                let mem_next =
                    memory::write(&r, &mem, v).expect("concrete write must succeed");
                assert!(models(&mem_next, &abs_next));
            }
        }
    }

    /// Soundness at program scale: well-typed programs never fail at
    /// run time and always produce full output rows.
    #[test]
    fn well_typed_programs_run_clean_fuzz() {
        use crate::gen::Gen;
        let mut gen = Gen::new(0xabc2);
        for _ in 0..60 {
            let p = gen.program();
            assert!(well_typed(&p).ok, "generator must produce well-typed programs");
            let rows: Vec<Vec<Val>> = (0..10)
                .map(|_| p.inputs.iter().map(|ty| gen.val(ty)).collect())
                .collect();
            let out = p.run(&rows).expect("well-typed program must not fail");
            assert!(out.iter().all(|row| row.len() == p.outputs.len()));
        }
    }
}
