//! Equational normalization of effectful terms, resource collapse, and
//! translation into pure stream transformers.
//!
//! A normal form reads all its resources first, applies one pure
//! function, and writes all its resources last, each resource accessed
//! at most once per direction. Composite cores are built from
//! projections and pairings only, staged so every sub-core appears
//! exactly once.

use thiserror::Error;

use crate::host::{HostFn, Ty, Val};
use crate::molholes::{Program, Ref, RsfTerm};
use crate::path::TermPath;
use crate::typecheck;
use crate::yampa::SfTerm;

/// `Get r_0 ; ... ; Arr core ; Set r'_0 ; ...` as data: the resource
/// lists are strictly increasing in identifier and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    pub gets: Vec<Ref>,
    pub core: HostFn,
    pub sets: Vec<Ref>,
}

impl NormalForm {
    pub fn invariants_hold(&self) -> bool {
        strictly_increasing(&self.gets) && strictly_increasing(&self.sets)
    }
}

fn strictly_increasing(refs: &[Ref]) -> bool {
    refs.windows(2).all(|w| w[0].id < w[1].id)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("term is not effect-free: resource access at {0}")]
    NotEffectFree(TermPath),
    #[error("program is not well-typed: {0}")]
    NotWellTyped(String),
    #[error("program is not in collapsed shape: {0}")]
    NotCollapsed(String),
}

/// Expand a normal form into the term it denotes: the get chain, the
/// core, then the set chain, in increasing identifier order.
pub fn nf_to_term(nf: &NormalForm) -> RsfTerm {
    let mut parts: Vec<RsfTerm> = Vec::with_capacity(nf.gets.len() + nf.sets.len() + 1);
    parts.extend(nf.gets.iter().cloned().map(RsfTerm::Get));
    parts.push(RsfTerm::Arr(nf.core.clone()));
    parts.extend(nf.sets.iter().cloned().map(RsfTerm::Set));
    RsfTerm::chain(parts)
}

/// The resources a term reads and writes, as identifier-sorted,
/// duplicate-free lists.
pub fn refs_accessed(t: &RsfTerm) -> (Vec<Ref>, Vec<Ref>) {
    fn walk(t: &RsfTerm, gets: &mut Vec<Ref>, sets: &mut Vec<Ref>) {
        match t {
            RsfTerm::Arr(_) => {}
            RsfTerm::First(inner) => walk(inner, gets, sets),
            RsfTerm::Comp(t1, t2) => {
                walk(t1, gets, sets);
                walk(t2, gets, sets);
            }
            RsfTerm::Get(r) => gets.push(r.clone()),
            RsfTerm::Set(r) => sets.push(r.clone()),
        }
    }
    let (mut gets, mut sets) = (Vec::new(), Vec::new());
    walk(t, &mut gets, &mut sets);
    gets.sort_by_key(|r| r.id);
    gets.dedup_by_key(|r| r.id);
    sets.sort_by_key(|r| r.id);
    sets.dedup_by_key(|r| r.id);
    (gets, sets)
}

/// Contract an effect-free term to the single function it computes.
pub fn contract(t: &RsfTerm) -> Result<HostFn, RewriteError> {
    contract_at(t, &TermPath::root())
}

fn contract_at(t: &RsfTerm, path: &TermPath) -> Result<HostFn, RewriteError> {
    match t {
        RsfTerm::Arr(f) => Ok(f.clone()),
        RsfTerm::Comp(t1, t2) => {
            let f1 = contract_at(t1, &path.child(0))?;
            let f2 = contract_at(t2, &path.child(1))?;
            Ok(HostFn::comp(f2, f1))
        }
        RsfTerm::First(inner) => Ok(HostFn::prod(
            contract_at(inner, &path.child(0))?,
            HostFn::Id,
        )),
        RsfTerm::Get(_) | RsfTerm::Set(_) => Err(RewriteError::NotEffectFree(path.clone())),
    }
}

/// `First` applied `n` times.
fn stack(n: usize, t: RsfTerm) -> RsfTerm {
    (0..n).fold(t, |acc, _| RsfTerm::first(acc))
}

/// Permutation stack moving a bystander component inward past `n` reads:
/// `stack(n-1, arr perm) ; ... ; stack(0, arr perm) ; t`.
fn perm_before(n: usize, t: RsfTerm) -> RsfTerm {
    let mut parts: Vec<RsfTerm> = (0..n)
        .rev()
        .map(|k| stack(k, RsfTerm::Arr(HostFn::Perm)))
        .collect();
    parts.push(t);
    RsfTerm::chain(parts)
}

/// Dual stack moving the bystander back out past `n` writes:
/// `t ; stack(0, arr perm) ; ... ; stack(n-1, arr perm)`.
fn perm_after(n: usize, t: RsfTerm) -> RsfTerm {
    let mut parts = vec![t];
    parts.extend((0..n).map(|k| stack(k, RsfTerm::Arr(HostFn::Perm))));
    RsfTerm::chain(parts)
}

/// Normal form of `First` applied to a normal form: same resources, the
/// core wrapped in the permutation stacks that route the bystander
/// component around the accesses, contracted back to one function.
pub fn nf_first(nf: &NormalForm) -> NormalForm {
    let ng = nf.gets.len();
    let ns = nf.sets.len();
    let mid = perm_after(ns, perm_before(ng, RsfTerm::first(RsfTerm::Arr(nf.core.clone()))));
    let core = contract(&mid).expect("permutation stacks are effect-free");
    NormalForm {
        gets: nf.gets.clone(),
        core,
        sets: nf.sets.clone(),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Proj {
    F,
    S,
}

/// Projection along a path: `proj([F, S])` extracts `x.fst.snd`.
fn proj(path: &[Proj]) -> HostFn {
    let mut steps = path.iter().map(|p| match p {
        Proj::F => HostFn::Fst,
        Proj::S => HostFn::Snd,
    });
    match steps.next() {
        None => HostFn::Id,
        Some(first) => steps.fold(first, |acc, s| HostFn::comp(s, acc)),
    }
}

/// Left-nested pairing of a base with successive components:
/// `((base, c_0), c_1) ...`.
fn nest(base: HostFn, components: Vec<HostFn>) -> HostFn {
    components
        .into_iter()
        .fold(base, HostFn::pairing)
}

/// Left-nested packing of a list of element builders; the empty list
/// packs to `tt` and a singleton to the element itself.
fn pack_fn(mut elems: Vec<HostFn>) -> HostFn {
    if elems.is_empty() {
        return HostFn::Const(Val::Tt);
    }
    let first = elems.remove(0);
    nest(first, elems)
}

fn fst_n(n: usize) -> Vec<Proj> {
    vec![Proj::F; n]
}

fn position(refs: &[Ref], id: u32) -> Option<usize> {
    refs.iter().position(|r| r.id == id)
}

/// Merge two sorted duplicate-free ref lists; on a shared identifier the
/// left list's entry survives when `keep_left`, the right one otherwise.
fn merge_refs(left: &[Ref], right: &[Ref], keep_left: bool) -> Vec<Ref> {
    let mut out: Vec<Ref> = left.to_vec();
    for r in right {
        match position(&out, r.id) {
            Some(i) => {
                if !keep_left {
                    out[i] = r.clone();
                }
            }
            None => out.push(r.clone()),
        }
    }
    out.sort_by_key(|r| r.id);
    out
}

/// Normal form of the composition of two normal forms.
///
/// Reads surviving from the right side are those not already written by
/// the left side (a read of a just-written resource is replaced by
/// forwarding the written value); writes merge with the rightmost write
/// winning. The combined core is staged so each sub-core is applied
/// once:
///
/// ```text
/// x -> (y1, x) -> (y2, (y1, x)) -> output
/// ```
///
/// with every other value routed by projections.
pub fn nf_comp(nf1: &NormalForm, nf2: &NormalForm) -> NormalForm {
    let s1 = &nf1.sets;
    let g2_surviving: Vec<Ref> = nf2
        .gets
        .iter()
        .filter(|g| position(s1, g.id).is_none())
        .cloned()
        .collect();
    let gets = merge_refs(&nf1.gets, &g2_surviving, true);
    let sets = merge_refs(&nf1.sets, &nf2.sets, false);

    let ng = gets.len();
    let ns1 = nf1.sets.len();
    let ns2 = nf2.sets.len();

    // Paths inside the combined core input
    //   x = ((...(a, v[gets[0]]), ...), v[gets[ng-1]]).
    let a_path = fst_n(ng);
    let get_path = |k: usize| {
        let mut p = fst_n(ng - 1 - k);
        p.push(Proj::S);
        p
    };

    // Stage 1: x -> (y1, x) where y1 = core1 applied to its own nested
    // input, rebuilt from x by projection.
    let x1_components: Vec<HostFn> = nf1
        .gets
        .iter()
        .map(|g| proj(&get_path(position(&gets, g.id).expect("left gets survive"))))
        .collect();
    let build_x1 = nest(proj(&a_path), x1_components);
    let stage1 = HostFn::pairing(HostFn::comp(nf1.core.clone(), build_x1), HostFn::Id);

    // Paths inside ctx1 = (y1, x):
    //   y1 = ((...(b1, w1[ns1-1]), ...), w1[0]).
    let b1_path: Vec<Proj> = [Proj::F].into_iter().chain(fst_n(ns1)).collect();
    let w1_path = |j: usize| -> Vec<Proj> {
        let mut p = vec![Proj::F];
        p.extend(fst_n(j));
        p.push(Proj::S);
        p
    };

    // Stage 2: ctx1 -> (y2, ctx1); reads of resources written by the
    // left side forward the written value, the rest project out of x.
    let x2_components: Vec<HostFn> = nf2
        .gets
        .iter()
        .map(|g| match position(s1, g.id) {
            Some(j) => proj(&w1_path(j)),
            None => {
                let mut p = vec![Proj::S];
                p.extend(get_path(position(&gets, g.id).expect("surviving gets")));
                proj(&p)
            }
        })
        .collect();
    let build_x2 = nest(proj(&b1_path), x2_components);
    let stage2 = HostFn::pairing(HostFn::comp(nf2.core.clone(), build_x2), HostFn::Id);

    // Paths inside ctx2 = (y2, (y1, x)).
    let b2_path: Vec<Proj> = [Proj::F].into_iter().chain(fst_n(ns2)).collect();
    let w2_path = |j: usize| -> Vec<Proj> {
        let mut p = vec![Proj::F];
        p.extend(fst_n(j));
        p.push(Proj::S);
        p
    };
    let w1_late_path = |j: usize| -> Vec<Proj> {
        let mut p = vec![Proj::S, Proj::F];
        p.extend(fst_n(j));
        p.push(Proj::S);
        p
    };

    // Output (( ...(b2, w[sets[ns-1]]), ...), w[sets[0]]): the rightmost
    // write of each resource wins.
    let out_components: Vec<HostFn> = sets
        .iter()
        .rev()
        .map(|s| match position(&nf2.sets, s.id) {
            Some(j2) => proj(&w2_path(j2)),
            None => proj(&w1_late_path(position(s1, s.id).expect("set came from somewhere"))),
        })
        .collect();
    let build_out = nest(proj(&b2_path), out_components);

    let core = HostFn::comp(build_out, HostFn::comp(stage2, stage1));
    NormalForm { gets, core, sets }
}

/// Transform any term into normal form by structural induction.
pub fn normalize(t: &RsfTerm) -> NormalForm {
    match t {
        RsfTerm::Arr(f) => NormalForm {
            gets: vec![],
            core: f.clone(),
            sets: vec![],
        },
        RsfTerm::Get(r) => NormalForm {
            gets: vec![r.clone()],
            core: HostFn::Id,
            sets: vec![],
        },
        RsfTerm::Set(r) => NormalForm {
            gets: vec![],
            core: HostFn::Id,
            sets: vec![r.clone()],
        },
        RsfTerm::First(inner) => nf_first(&normalize(inner)),
        RsfTerm::Comp(t1, t2) => nf_comp(&normalize(t1), &normalize(t2)),
    }
}

/// Left-nested product of a list of types; `unit` when empty, the
/// single type when a singleton.
pub fn pack_tys(tys: &[Ty]) -> Ty {
    match tys.split_first() {
        None => Ty::Unit,
        Some((first, rest)) => rest
            .iter()
            .fold(first.clone(), |acc, t| Ty::prod(acc, t.clone())),
    }
}

/// Left-nested packing of a row of values, mirroring [`pack_tys`].
pub fn pack_vals(vals: &[Val]) -> Val {
    match vals.split_first() {
        None => Val::Tt,
        Some((first, rest)) => rest
            .iter()
            .fold(first.clone(), |acc, v| Val::pair(acc, v.clone())),
    }
}

/// Split a packed value back into `n` row values.
pub fn unpack_vals(v: &Val, n: usize) -> Option<Vec<Val>> {
    match n {
        0 => (*v == Val::Tt).then(Vec::new),
        1 => Some(vec![v.clone()]),
        _ => {
            let (rest, last) = v.as_pair()?;
            let mut row = unpack_vals(rest, n - 1)?;
            row.push(last.clone());
            Some(row)
        }
    }
}

/// Path of element `j` inside a left-nested pack of `n` elements.
fn elem_path(j: usize, n: usize) -> Vec<Proj> {
    assert!(j < n);
    if n == 1 {
        vec![]
    } else if j == n - 1 {
        vec![Proj::S]
    } else {
        let mut p = vec![Proj::F];
        p.extend(elem_path(j, n - 1));
        p
    }
}

/// Collapse a well-typed program so each resource kind becomes a single
/// tuple-typed resource (a synthetic `unit` resource when the kind is
/// empty), with the term in the uniform shape
/// `Get in ; Get state ; Arr f ; Set state ; Set out`.
pub fn collapse(p: &Program) -> Result<Program, RewriteError> {
    let report = typecheck::well_typed(p);
    if !report.ok {
        return Err(RewriteError::NotWellTyped(report.diagnostics.join("; ")));
    }
    let nf = normalize(&p.term);

    let k_in = p.k_in();
    let k = p.k_internal();
    let k_out = p.k_out();
    let in_ty = pack_tys(&p.inputs);
    let int_tys: Vec<Ty> = p.internals.iter().map(|(_, t)| t.clone()).collect();
    let state_ty = pack_tys(&int_tys);
    let out_ty = pack_tys(&p.outputs);
    let state0 = pack_vals(&p.internals.iter().map(|(v, _)| v.clone()).collect::<Vec<_>>());

    // The collapsed core receives z = ((tt, in), state).
    let read_path = |g: &Ref| -> Vec<Proj> {
        if g.id < k_in {
            let mut path = vec![Proj::F, Proj::S];
            path.extend(elem_path(g.id as usize, k_in as usize));
            path
        } else {
            let mut path = vec![Proj::S];
            path.extend(elem_path((g.id - k_in) as usize, k as usize));
            path
        }
    };
    let base: Vec<Proj> = vec![Proj::F, Proj::F];
    let x_components: Vec<HostFn> = nf.gets.iter().map(|g| proj(&read_path(g))).collect();
    let build_x = nest(proj(&base), x_components);
    let stage = HostFn::pairing(HostFn::comp(nf.core.clone(), build_x), HostFn::Id);

    // Inside (y, z): the value written to nf.sets[j] sits at y
    // projected j times left, then right.
    let written_path = |id: u32| -> Option<Vec<Proj>> {
        position(&nf.sets, id).map(|j| {
            let mut path = vec![Proj::F];
            path.extend(fst_n(j));
            path.push(Proj::S);
            path
        })
    };
    let out_elems: Vec<HostFn> = (0..k_out)
        .map(|q| {
            let id = k_in + k + q;
            proj(&written_path(id).expect("well-typed programs write every output"))
        })
        .collect();
    let state_elems: Vec<HostFn> = (0..k)
        .map(|q| {
            let id = k_in + q;
            match written_path(id) {
                Some(path) => proj(&path),
                None => {
                    // Untouched internal: pass the old state through.
                    let mut path = vec![Proj::S, Proj::S];
                    path.extend(elem_path(q as usize, k as usize));
                    proj(&path)
                }
            }
        })
        .collect();
    let build_out = HostFn::pairing(
        HostFn::pairing(HostFn::Const(Val::Tt), pack_fn(out_elems)),
        pack_fn(state_elems),
    );
    let core = HostFn::comp(build_out, stage);

    let term = RsfTerm::chain(vec![
        RsfTerm::Get(Ref::new(in_ty.clone(), 0)),
        RsfTerm::Get(Ref::new(state_ty.clone(), 1)),
        RsfTerm::Arr(core),
        RsfTerm::Set(Ref::new(state_ty.clone(), 1)),
        RsfTerm::Set(Ref::new(out_ty.clone(), 2)),
    ]);
    Ok(Program {
        inputs: vec![in_ty],
        internals: vec![(state0, state_ty)],
        outputs: vec![out_ty],
        term,
    })
}

fn flatten_comp<'a>(t: &'a RsfTerm, out: &mut Vec<&'a RsfTerm>) {
    match t {
        RsfTerm::Comp(t1, t2) => {
            flatten_comp(t1, out);
            flatten_comp(t2, out);
        }
        other => out.push(other),
    }
}

/// Translate a collapsed program into a pure stream transformer
/// `Arr pack ; Loop state (Arr f) ; Arr snd` from packed inputs to
/// packed outputs.
pub fn translate(p: &Program) -> Result<SfTerm, RewriteError> {
    let shape_err = |msg: &str| RewriteError::NotCollapsed(msg.to_string());
    if p.inputs.len() != 1 || p.internals.len() != 1 || p.outputs.len() != 1 {
        return Err(shape_err("expected exactly one resource per kind"));
    }
    let in_ty = &p.inputs[0];
    let (state0, state_ty) = &p.internals[0];
    let out_ty = &p.outputs[0];

    let mut atoms = Vec::new();
    flatten_comp(&p.term, &mut atoms);
    let core = match atoms.as_slice() {
        [RsfTerm::Get(r_in), RsfTerm::Get(r_state), RsfTerm::Arr(f), RsfTerm::Set(w_state), RsfTerm::Set(w_out)]
            if r_in.id == 0
                && r_in.ty == *in_ty
                && r_state.id == 1
                && r_state.ty == *state_ty
                && w_state.id == 1
                && w_state.ty == *state_ty
                && w_out.id == 2
                && w_out.ty == *out_ty =>
        {
            (*f).clone()
        }
        _ => return Err(shape_err("term is not Get in ; Get state ; Arr f ; Set state ; Set out")),
    };

    let pack = HostFn::pairing(HostFn::Const(Val::Tt), HostFn::Id);
    Ok(SfTerm::comp(
        SfTerm::Arr(pack),
        SfTerm::comp(
            SfTerm::feedback(state0.clone(), SfTerm::Arr(core)),
            SfTerm::Arr(HostFn::Snd),
        ),
    ))
}
