//! Seeded random generation of values, functions, terms, memories, and
//! well-typed programs.
//!
//! Everything is driven by an explicit ChaCha stream so identical seeds
//! reproduce identical artifacts byte for byte. Generation is
//! type-directed: `*_at` constructors hit a requested type exactly,
//! `*_any` constructors pick the output type as they go.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::host::{HostFn, Prim, Ty, Val};
use crate::memory::{Cell, Memory, Status};
use crate::molholes::{Program, Ref, RsfTerm};
use crate::typecheck::{self, AbsMemory};
use crate::yampa::SfTerm;

/// A deterministic source of random artifacts.
pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Fork an independent generator; used to give each law suite its
    /// own stream.
    pub fn split(&mut self) -> Gen {
        Gen::new(self.rng.gen())
    }

    /// Uniform integer in `[lo, hi)`.
    pub fn range(&mut self, lo: u64, hi: u64) -> u64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn coin(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn pick_index(&mut self, len: usize) -> usize {
        self.range(0, len as u64) as usize
    }

    /// A random type of bounded depth.
    pub fn ty(&mut self, depth: u32) -> Ty {
        if depth > 0 && self.coin(0.3) {
            Ty::prod(self.ty(depth - 1), self.ty(depth - 1))
        } else {
            match self.range(0, 3) {
                0 => Ty::Unit,
                1 => Ty::Bool,
                _ => Ty::Nat,
            }
        }
    }

    /// A random value of the given type. Naturals stay small so law
    /// failures print readably.
    pub fn val(&mut self, ty: &Ty) -> Val {
        match ty {
            Ty::Unit => Val::Tt,
            Ty::Bool => Val::B(self.coin(0.5)),
            Ty::Nat => Val::nat(self.range(0, 13)),
            Ty::Prod(a, b) => Val::pair(self.val(a), self.val(b)),
        }
    }

    /// A random pure function of exactly the given type.
    pub fn host_fn(&mut self, input: &Ty, output: &Ty, depth: u32) -> HostFn {
        #[derive(Clone, Copy)]
        enum C {
            ConstV,
            Id,
            Fst,
            Snd,
            Swap,
            SDup,
            Dup,
            Assoc,
            Unassoc,
            Perm,
            PrimF(Prim),
            Pairing,
            ProdF,
            Comp,
        }
        let mut cands = vec![C::ConstV];
        if input == output {
            cands.push(C::Id);
        }
        if *output == Ty::prod(input.clone(), input.clone()) {
            cands.push(C::Dup);
        }
        if let Some((a, b)) = input.as_prod() {
            if a == output {
                cands.push(C::Fst);
            }
            if b == output {
                cands.push(C::Snd);
            }
            if *output == Ty::prod(b.clone(), a.clone()) {
                cands.push(C::Swap);
            }
            if *output == Ty::prod(input.clone(), b.clone()) {
                cands.push(C::SDup);
            }
            if let Some((x, y)) = a.as_prod() {
                if *output == Ty::prod(x.clone(), Ty::prod(y.clone(), b.clone())) {
                    cands.push(C::Assoc);
                }
                if *output == Ty::prod(Ty::prod(x.clone(), b.clone()), y.clone()) {
                    cands.push(C::Perm);
                }
            }
            if let Some((y, z)) = b.as_prod() {
                if *output == Ty::prod(Ty::prod(a.clone(), y.clone()), z.clone()) {
                    cands.push(C::Unassoc);
                }
            }
            if *a == Ty::Nat && *b == Ty::Nat && *output == Ty::Nat {
                cands.push(C::PrimF(Prim::Add));
            }
        }
        if *input == Ty::Nat && *output == Ty::Nat {
            cands.push(C::PrimF(Prim::Inc));
            cands.push(C::PrimF(Prim::Dec));
        }
        if *input == Ty::Nat && *output == Ty::Bool {
            cands.push(C::PrimF(Prim::IsZero));
        }
        if depth > 0 {
            if output.as_prod().is_some() {
                cands.push(C::Pairing);
                cands.push(C::Pairing);
            }
            if input.as_prod().is_some() && output.as_prod().is_some() {
                cands.push(C::ProdF);
            }
            cands.push(C::Comp);
        }
        match cands[self.pick_index(cands.len())] {
            C::ConstV => HostFn::Const(self.val(output)),
            C::Id => HostFn::Id,
            C::Fst => HostFn::Fst,
            C::Snd => HostFn::Snd,
            C::Swap => HostFn::Swap,
            C::SDup => HostFn::SDup,
            C::Dup => HostFn::Dup,
            C::Assoc => HostFn::Assoc,
            C::Unassoc => HostFn::Unassoc,
            C::Perm => HostFn::Perm,
            C::PrimF(p) => HostFn::Prim(p),
            C::Pairing => {
                let (x, y) = output.as_prod().expect("guarded");
                let (x, y) = (x.clone(), y.clone());
                HostFn::pairing(
                    self.host_fn(input, &x, depth - 1),
                    self.host_fn(input, &y, depth - 1),
                )
            }
            C::ProdF => {
                let (a, b) = input.as_prod().expect("guarded");
                let (x, y) = output.as_prod().expect("guarded");
                let (a, b, x, y) = (a.clone(), b.clone(), x.clone(), y.clone());
                HostFn::prod(
                    self.host_fn(&a, &x, depth - 1),
                    self.host_fn(&b, &y, depth - 1),
                )
            }
            C::Comp => {
                let mid = match self.range(0, 3) {
                    0 => input.clone(),
                    1 => output.clone(),
                    _ => self.ty(1),
                };
                HostFn::comp(
                    self.host_fn(&mid, output, depth - 1),
                    self.host_fn(input, &mid, depth - 1),
                )
            }
        }
    }

    /// A random pure function from the given input, output type free.
    pub fn host_fn_any(&mut self, input: &Ty, depth: u32) -> (HostFn, Ty) {
        if depth == 0 || self.coin(0.4) {
            let out = if self.coin(0.5) {
                input.clone()
            } else {
                self.ty(1)
            };
            let f = self.host_fn(input, &out, depth.min(1));
            return (f, out);
        }
        let out = self.ty(2);
        (self.host_fn(input, &out, depth), out)
    }

    /// A random pure stream term of exactly the given type.
    pub fn sf_at(&mut self, input: &Ty, output: &Ty, depth: u32) -> SfTerm {
        if depth == 0 {
            return SfTerm::Arr(self.host_fn(input, output, 2));
        }
        let mut cands = vec![0u8, 1, 1, 3, 3];
        if let (Some((_, c1)), Some((_, c2))) = (input.as_prod(), output.as_prod()) {
            if c1 == c2 {
                cands.push(2);
                cands.push(2);
            }
        }
        match cands[self.pick_index(cands.len())] {
            0 => SfTerm::Arr(self.host_fn(input, output, 2)),
            1 => {
                let mid = self.ty(1);
                SfTerm::comp(
                    self.sf_at(input, &mid, depth - 1),
                    self.sf_at(&mid, output, depth - 1),
                )
            }
            2 => {
                let (a, _) = input.as_prod().expect("guarded");
                let (b, _) = output.as_prod().expect("guarded");
                let (a, b) = (a.clone(), b.clone());
                SfTerm::first(self.sf_at(&a, &b, depth - 1))
            }
            _ => {
                let state_ty = self.ty(1);
                let state = self.val(&state_ty);
                let body = self.sf_at(
                    &Ty::prod(input.clone(), state_ty.clone()),
                    &Ty::prod(output.clone(), state_ty),
                    depth - 1,
                );
                SfTerm::feedback(state, body)
            }
        }
    }

    /// A random pure stream term from the given input, output type free.
    pub fn sf_any(&mut self, input: &Ty, depth: u32) -> (SfTerm, Ty) {
        if depth == 0 {
            let (f, out) = self.host_fn_any(input, 2);
            return (SfTerm::Arr(f), out);
        }
        let mut cands = vec![0u8, 1, 1, 3];
        if input.as_prod().is_some() {
            cands.push(2);
        }
        match cands[self.pick_index(cands.len())] {
            0 => {
                let (f, out) = self.host_fn_any(input, 2);
                (SfTerm::Arr(f), out)
            }
            1 => {
                let (t1, mid) = self.sf_any(input, depth - 1);
                let (t2, out) = self.sf_any(&mid, depth - 1);
                (SfTerm::comp(t1, t2), out)
            }
            2 => {
                let (a, c) = input.as_prod().expect("guarded");
                let (a, c) = (a.clone(), c.clone());
                let (t, b) = self.sf_any(&a, depth - 1);
                (SfTerm::first(t), Ty::prod(b, c))
            }
            _ => {
                let state_ty = self.ty(1);
                let state = self.val(&state_ty);
                let out = self.ty(1);
                let body = self.sf_at(
                    &Ty::prod(input.clone(), state_ty.clone()),
                    &Ty::prod(out.clone(), state_ty),
                    depth - 1,
                );
                (SfTerm::feedback(state, body), out)
            }
        }
    }

    /// A pool of resources with distinct identifiers and fixed types.
    pub fn ref_pool(&mut self, n: usize) -> Vec<Ref> {
        (0..n as u32).map(|id| Ref::new(self.ty(1), id)).collect()
    }

    /// A random effectful term over the pool, output type free. Access
    /// repetition is allowed, so the same resource may be read or
    /// written several times.
    pub fn rsf_any(&mut self, input: &Ty, pool: &[Ref], depth: u32) -> (RsfTerm, Ty) {
        if depth == 0 {
            let (f, out) = self.host_fn_any(input, 2);
            return (RsfTerm::Arr(f), out);
        }
        let mut cands = vec![0u8, 1, 1];
        if input.as_prod().is_some() {
            cands.push(2);
        }
        if !pool.is_empty() {
            cands.push(3);
            cands.push(3);
        }
        let settable: Vec<&Ref> = match input.as_prod() {
            Some((_, b)) => pool.iter().filter(|r| r.ty == *b).collect(),
            None => vec![],
        };
        if !settable.is_empty() {
            cands.push(4);
            cands.push(4);
        }
        match cands[self.pick_index(cands.len())] {
            0 => {
                let (f, out) = self.host_fn_any(input, 2);
                (RsfTerm::Arr(f), out)
            }
            1 => {
                let (t1, mid) = self.rsf_any(input, pool, depth - 1);
                let (t2, out) = self.rsf_any(&mid, pool, depth - 1);
                (RsfTerm::comp(t1, t2), out)
            }
            2 => {
                let (a, c) = input.as_prod().expect("guarded");
                let (a, c) = (a.clone(), c.clone());
                let (t, b) = self.rsf_any(&a, pool, depth - 1);
                (RsfTerm::first(t), Ty::prod(b, c))
            }
            3 => {
                let r = pool[self.pick_index(pool.len())].clone();
                let out = Ty::prod(input.clone(), r.ty.clone());
                (RsfTerm::Get(r), out)
            }
            _ => {
                let r = settable[self.pick_index(settable.len())].clone();
                let out = input.as_prod().expect("guarded").0.clone();
                (RsfTerm::Set(r), out)
            }
        }
    }

    /// A random effectful term of exactly the given type, adapting with
    /// a final pure stage when needed.
    pub fn rsf_at(&mut self, input: &Ty, output: &Ty, pool: &[Ref], depth: u32) -> RsfTerm {
        let (t, out) = self.rsf_any(input, pool, depth.saturating_sub(1));
        if out == *output {
            t
        } else {
            RsfTerm::comp(t, RsfTerm::Arr(self.host_fn(&out, output, 2)))
        }
    }

    /// A random abstract memory over identifiers `0..n` with mixed
    /// statuses.
    pub fn abs_memory(&mut self, max_cells: u32) -> AbsMemory {
        let n = self.range(0, max_cells as u64 + 1) as u32;
        (0..n)
            .map(|id| {
                let status = match self.range(0, 5) {
                    0 => Status::Internal,
                    1 => Status::Input(true),
                    2 => Status::Input(false),
                    3 => Status::Output(true),
                    _ => Status::Output(false),
                };
                (id, (status, self.ty(1)))
            })
            .collect()
    }

    /// A concrete model of the abstract memory: defined statuses carry a
    /// random value of the declared type.
    pub fn memory_modeling(&mut self, abs: &AbsMemory) -> Memory {
        abs.iter()
            .map(|(id, (status, ty))| {
                let val = status.is_defined().then(|| self.val(ty));
                (
                    id,
                    Cell {
                        status: *status,
                        ty: ty.clone(),
                        val,
                    },
                )
            })
            .collect()
    }

    /// A random well-formed memory, unconstrained by any program layout.
    pub fn arbitrary_memory(&mut self, max_cells: u32) -> Memory {
        let abs = self.abs_memory(max_cells);
        self.memory_modeling(&abs)
    }

    fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.pick_index(i + 1);
            items.swap(i, j);
        }
    }

    /// Combine term parts into a randomly associated composition tree.
    fn comp_tree(&mut self, mut parts: Vec<RsfTerm>) -> RsfTerm {
        assert!(!parts.is_empty());
        while parts.len() > 1 {
            let i = self.pick_index(parts.len() - 1);
            let right = parts.remove(i + 1);
            let left = std::mem::replace(&mut parts[i], RsfTerm::Arr(HostFn::Id));
            parts[i] = RsfTerm::comp(left, right);
        }
        parts.pop().expect("non-empty")
    }

    /// A random well-typed program: every input is read exactly once,
    /// every output is written exactly once, internals are accessed
    /// freely, and the composition tree is randomly associated.
    pub fn program(&mut self) -> Program {
        #[derive(Clone, Copy)]
        enum Seg {
            ReadInput(u32),
            WriteOutput(u32),
            GetInternal(u32),
            SetInternal(u32),
            Pure,
        }
        let k_in = self.range(0, 3) as u32;
        let k = self.range(0, 3) as u32;
        let k_out = self.range(0, 3) as u32;
        let inputs: Vec<Ty> = (0..k_in).map(|_| self.ty(1)).collect();
        let internals: Vec<(Val, Ty)> = (0..k)
            .map(|_| {
                let ty = self.ty(1);
                (self.val(&ty), ty)
            })
            .collect();
        let outputs: Vec<Ty> = (0..k_out).map(|_| self.ty(1)).collect();

        let internal_pool: Vec<Ref> = internals
            .iter()
            .enumerate()
            .map(|(i, (_, ty))| Ref::new(ty.clone(), k_in + i as u32))
            .collect();

        let mut segs: Vec<Seg> = Vec::new();
        segs.extend((0..k_in).map(Seg::ReadInput));
        segs.extend((0..k_out).map(Seg::WriteOutput));
        if k > 0 {
            for _ in 0..self.range(0, 4) {
                let j = self.range(0, k as u64) as u32;
                segs.push(if self.coin(0.5) {
                    Seg::GetInternal(j)
                } else {
                    Seg::SetInternal(j)
                });
            }
        }
        for _ in 0..self.range(0, 3) {
            segs.push(Seg::Pure);
        }
        self.shuffle(&mut segs);

        let mut cur = Ty::Unit;
        let mut parts: Vec<RsfTerm> = Vec::new();
        for seg in segs {
            match seg {
                Seg::ReadInput(i) => {
                    let ty = inputs[i as usize].clone();
                    parts.push(RsfTerm::Get(Ref::new(ty.clone(), i)));
                    cur = Ty::prod(cur, ty);
                }
                Seg::GetInternal(j) => {
                    let r = internal_pool[j as usize].clone();
                    let ty = r.ty.clone();
                    parts.push(RsfTerm::Get(r));
                    cur = Ty::prod(cur, ty);
                }
                Seg::WriteOutput(o) => {
                    let ty = outputs[o as usize].clone();
                    let id = k_in + k + o;
                    let feed = self.host_fn(&cur, &ty, 2);
                    parts.push(RsfTerm::Arr(HostFn::pairing(HostFn::Id, feed)));
                    parts.push(RsfTerm::Set(Ref::new(ty, id)));
                }
                Seg::SetInternal(j) => {
                    let r = internal_pool[j as usize].clone();
                    let feed = self.host_fn(&cur, &r.ty, 2);
                    parts.push(RsfTerm::Arr(HostFn::pairing(HostFn::Id, feed)));
                    parts.push(RsfTerm::Set(r));
                }
                Seg::Pure => {
                    let split = cur.as_prod().map(|(a, c)| (a.clone(), c.clone()));
                    if let Some((a, c)) = split {
                        if self.coin(0.4) {
                            // Effectful or pure stage under a First,
                            // touching internals only.
                            let (t, b) = self.rsf_any(&a, &internal_pool, 2);
                            parts.push(RsfTerm::first(t));
                            cur = Ty::prod(b, c);
                            continue;
                        }
                    }
                    let (f, out) = self.host_fn_any(&cur, 2);
                    parts.push(RsfTerm::Arr(f));
                    cur = out;
                }
            }
        }
        let closer = self.host_fn(&cur, &Ty::Unit, 1);
        parts.push(RsfTerm::Arr(closer));

        let program = Program {
            inputs,
            internals,
            outputs,
            term: self.comp_tree(parts),
        };
        debug_assert!(
            typecheck::well_typed(&program).ok,
            "generator produced an ill-typed program: {program:?}"
        );
        program
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_seeds_reproduce_artifacts() {
        let mut a = Gen::new(99);
        let mut b = Gen::new(99);
        for _ in 0..20 {
            assert_eq!(a.program(), b.program());
            let ty = a.ty(2);
            assert_eq!(ty, b.ty(2));
            assert_eq!(a.val(&ty), b.val(&ty));
        }
    }

    #[test]
    fn generated_functions_type_check() {
        let mut gen = Gen::new(5);
        for _ in 0..200 {
            let input = gen.ty(2);
            let output = gen.ty(2);
            let f = gen.host_fn(&input, &output, 3);
            assert_eq!(f.infer(&input).unwrap(), output);
        }
    }

    #[test]
    fn generated_sf_terms_type_check() {
        let mut gen = Gen::new(6);
        for _ in 0..100 {
            let input = gen.ty(1);
            let output = gen.ty(1);
            let t = gen.sf_at(&input, &output, 4);
            assert_eq!(t.infer(&input).unwrap(), output);
            let (t, out) = gen.sf_any(&input, 4);
            assert_eq!(t.infer(&input).unwrap(), out);
        }
    }

    #[test]
    fn generated_rsf_terms_type_check() {
        let mut gen = Gen::new(7);
        for _ in 0..100 {
            let input = gen.ty(1);
            let pool = gen.ref_pool(3);
            let (t, out) = gen.rsf_any(&input, &pool, 4);
            assert_eq!(t.infer(&input).unwrap(), out);
        }
    }

    #[test]
    fn generated_programs_are_well_typed() {
        let mut gen = Gen::new(8);
        for _ in 0..100 {
            let p = gen.program();
            assert!(p.validate().is_ok());
            assert!(typecheck::well_typed(&p).ok);
        }
    }

    #[test]
    fn modeled_memories_model() {
        let mut gen = Gen::new(9);
        for _ in 0..100 {
            let abs = gen.abs_memory(5);
            let mem = gen.memory_modeling(&abs);
            assert!(typecheck::models(&mem, &abs));
        }
    }
}
