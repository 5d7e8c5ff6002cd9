//! Differential and property-testing harness: sampled observational
//! equivalence for effectful terms, the executable catalog of equational
//! laws, and the end-to-end translation cross-check.
//!
//! Every law is exercised on freshly generated instances; each law forks
//! its own random stream from the suite seed, so reports are reproducible
//! byte for byte and independent of suite ordering. Failures carry the
//! complete instance (terms, inputs, memories), so any counterexample can
//! be replayed standalone.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::gen::Gen;
use crate::host::{HostFn, Ty, Val};
use crate::memory::{self, Memory, Status};
use crate::molholes::{step, Program, Ref, RsfTerm};
use crate::rewrite::{collapse, pack_vals, translate, unpack_vals};
use crate::typecheck::{self, AbsMemory};
use crate::yampa::SfTerm;

/// Number of synchronous steps per sampled input sequence in the
/// stream-level law checks.
pub const SF_LAW_STEPS: usize = 50;

pub type StepOutcome = Result<(Val, Memory), String>;
pub type StreamOutcome = Result<Vec<Vec<Val>>, String>;

/// A replayable witness that a law instance failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CounterExample {
    /// Two effectful terms disagreed on one step.
    Rsf {
        lhs: RsfTerm,
        rhs: RsfTerm,
        input: Val,
        memory: Memory,
        left: StepOutcome,
        right: StepOutcome,
    },
    /// Two stream terms disagreed on an input sequence.
    Sf {
        lhs: SfTerm,
        rhs: SfTerm,
        inputs: Vec<Val>,
        step: usize,
        left: Val,
        right: Val,
    },
    /// A monad- or state-level law disagreed on stored artifacts.
    State {
        law: String,
        refs: Vec<Ref>,
        values: Vec<Val>,
        kleisli: Vec<RsfTerm>,
        memory: Memory,
        left: StepOutcome,
        right: StepOutcome,
    },
    /// A program and its translation produced different streams.
    Prog {
        program: Program,
        rows: Vec<Vec<Val>>,
        left: StreamOutcome,
        right: StreamOutcome,
    },
    /// An instance violated the harness preconditions.
    Precondition {
        lhs: RsfTerm,
        rhs: RsfTerm,
        input: Ty,
        detail: String,
    },
}

/// Outcome of one law suite: pass iff no failures were recorded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawReport {
    pub law: String,
    pub tried: usize,
    pub failures: Vec<CounterExample>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// The one-line rendering used by the command line front end.
    pub fn line(&self) -> String {
        format!(
            "LAW {} {} tried={} failures={}",
            self.law,
            if self.passed() { "PASS" } else { "FAIL" },
            self.tried,
            self.failures.len()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error("program is not well-typed: {0}")]
    NotWellTyped(String),
}

fn outcome(t: &RsfTerm, a: &Val, mem: &Memory) -> StepOutcome {
    step(t, a, mem).map_err(|e| e.to_string())
}

/// Re-run a counterexample; true iff the recorded failure reproduces.
pub fn replay(ce: &CounterExample) -> bool {
    match ce {
        CounterExample::Rsf {
            lhs,
            rhs,
            input,
            memory,
            left,
            right,
        } => {
            let l = outcome(lhs, input, memory);
            let r = outcome(rhs, input, memory);
            l == *left && r == *right && l != r
        }
        CounterExample::Sf {
            lhs,
            rhs,
            inputs,
            step: at,
            left,
            right,
        } => match (lhs.run(inputs), rhs.run(inputs)) {
            (Ok(l), Ok(r)) => l.get(*at) == Some(left) && r.get(*at) == Some(right),
            _ => false,
        },
        CounterExample::State {
            law,
            refs,
            values,
            kleisli,
            memory,
            left,
            right,
        } => match state_law_outcomes(law, refs, values, kleisli, memory) {
            Some((l, r)) => l == *left && r == *right && l != r,
            None => false,
        },
        CounterExample::Prog {
            program,
            rows,
            left,
            right,
        } => {
            let (l, r) = cross_check_outcomes(program, rows);
            l == *left && r == *right && l != r
        }
        CounterExample::Precondition {
            lhs, rhs, input, ..
        } => lhs.infer(input).is_err() || rhs.infer(input).is_err(),
    }
}

/// Sampled observational equivalence of two effectful terms: for each
/// sample, draw a memory modeling `abs` and a random input, then compare
/// outputs and final memories exactly. A definitive counterexample is
/// recorded on any mismatch; agreement is evidence, not proof.
pub fn obs_equiv_rsf(
    t1: &RsfTerm,
    t2: &RsfTerm,
    input: &Ty,
    abs: &AbsMemory,
    samples: usize,
    seed: u64,
) -> LawReport {
    obs_equiv_named("obs-equiv", t1, t2, input, abs, samples, &mut Gen::new(seed))
}

fn obs_equiv_named(
    law: &str,
    t1: &RsfTerm,
    t2: &RsfTerm,
    input: &Ty,
    abs: &AbsMemory,
    samples: usize,
    gen: &mut Gen,
) -> LawReport {
    let mut report = LawReport {
        law: law.to_string(),
        tried: 0,
        failures: vec![],
    };
    for t in [t1, t2] {
        if let Err(e) = t.infer(input) {
            report.failures.push(CounterExample::Precondition {
                lhs: t1.clone(),
                rhs: t2.clone(),
                input: input.clone(),
                detail: e.to_string(),
            });
            return report;
        }
    }
    for _ in 0..samples {
        report.tried += 1;
        let mem = gen.memory_modeling(abs);
        let a = gen.val(input);
        let left = outcome(t1, &a, &mem);
        let right = outcome(t2, &a, &mem);
        if left != right {
            report.failures.push(CounterExample::Rsf {
                lhs: t1.clone(),
                rhs: t2.clone(),
                input: a,
                memory: mem,
                left,
                right,
            });
        }
    }
    report
}

/// The identifiers of every law in the catalog, in report order.
/// Entries containing `-neg-` are negative tests: they instantiate an
/// internal-only law on a non-internal resource and are expected to
/// fail with at least one recorded counterexample.
pub fn law_ids() -> Vec<&'static str> {
    vec![
        "monad-3a",
        "monad-3b",
        "monad-3c",
        "arrow-5a",
        "arrow-5b",
        "arrow-5c",
        "arrow-5d",
        "arrow-5e",
        "arrow-5f",
        "arrow-5g",
        "arrow-5h",
        "arrow-5i",
        "loop-6a",
        "loop-6b",
        "loop-6c",
        "state-10a",
        "state-10b",
        "state-10c",
        "state-10d",
        "state-10e",
        "state-10f",
        "state-10g",
        "state-10h",
        "state-10i",
        "rsf-12a",
        "rsf-12b",
        "rsf-12c",
        "rsf-12d",
        "rsf-12e",
        "rsf-13a",
        "rsf-13b",
        "rsf-13c",
        "rsf-13d",
        "rsf-13e",
        "rsf-14a",
        "rsf-14b",
        "rsf-14c",
        "rsf-12e-neg-input",
        "rsf-13e-neg-output",
        "rsf-14b-neg-output",
        "rsf-14c-neg-input",
    ]
}

/// True for catalog entries that assert the *failure* of an
/// internal-only law on input/output resources.
pub fn is_negative(law: &str) -> bool {
    law.contains("-neg-")
}

fn law_seed(seed: u64, law: &str) -> u64 {
    // FNV-1a over the law id, mixed with the suite seed.
    let mut h: u64 = 0xcbf29ce484222325;
    for b in law.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h ^ seed
}

/// Run the whole catalog. Each law gets `samples` fresh instances and a
/// random stream forked from `seed` by law id.
pub fn law_suite(samples: usize, seed: u64) -> Vec<LawReport> {
    law_ids()
        .into_iter()
        .map(|law| run_law(law, samples, seed))
        .collect()
}

/// Run a single catalog entry.
pub fn run_law(law: &str, samples: usize, seed: u64) -> LawReport {
    let mut gen = Gen::new(law_seed(seed, law));
    match law {
        "monad-3a" | "monad-3b" | "monad-3c" | "state-10a" | "state-10b" | "state-10c"
        | "state-10d" | "state-10e" | "state-10f" | "state-10g" | "state-10h" | "state-10i" => {
            run_state_law(law, samples, &mut gen)
        }
        law if law.starts_with("arrow-") || law.starts_with("loop-") => {
            run_sf_law(law, samples, &mut gen)
        }
        law if law.starts_with("rsf-") => run_rsf_law(law, samples, &mut gen),
        other => panic!("unknown law id {other}"),
    }
}

// ---------------------------------------------------------------------
// Stream-level laws (arrow and loop groups), checked over SF_LAW_STEPS
// steps per sample.
// ---------------------------------------------------------------------

fn run_sf_law(law: &str, samples: usize, gen: &mut Gen) -> LawReport {
    let mut report = LawReport {
        law: law.to_string(),
        tried: 0,
        failures: vec![],
    };
    for _ in 0..samples {
        report.tried += 1;
        let (lhs, rhs, input) = sf_law_instance(law, gen);
        debug_assert!(lhs.infer(&input).is_ok(), "lhs of {law} ill-typed");
        debug_assert!(rhs.infer(&input).is_ok(), "rhs of {law} ill-typed");
        let inputs: Vec<Val> = (0..SF_LAW_STEPS).map(|_| gen.val(&input)).collect();
        let l = lhs.run(&inputs).expect("law instances are well-typed");
        let r = rhs.run(&inputs).expect("law instances are well-typed");
        if let Some(at) = (0..inputs.len()).find(|i| l[*i] != r[*i]) {
            report.failures.push(CounterExample::Sf {
                lhs,
                rhs,
                inputs,
                step: at,
                left: l[at].clone(),
                right: r[at].clone(),
            });
        }
    }
    report
}

fn sf_law_instance(law: &str, gen: &mut Gen) -> (SfTerm, SfTerm, Ty) {
    let depth = 3;
    match law {
        // arr id ; a  ==  a
        "arrow-5a" => {
            let a_ty = gen.ty(1);
            let (a, _) = gen.sf_any(&a_ty, depth);
            let lhs = SfTerm::comp(SfTerm::Arr(HostFn::Id), a.clone());
            (lhs, a, a_ty)
        }
        // a ; arr id  ==  a
        "arrow-5b" => {
            let a_ty = gen.ty(1);
            let (a, _) = gen.sf_any(&a_ty, depth);
            let lhs = SfTerm::comp(a.clone(), SfTerm::Arr(HostFn::Id));
            (lhs, a, a_ty)
        }
        // (a ; b) ; c  ==  a ; (b ; c)
        "arrow-5c" => {
            let a_ty = gen.ty(1);
            let (a, b_ty) = gen.sf_any(&a_ty, depth);
            let (b, c_ty) = gen.sf_any(&b_ty, depth);
            let (c, _) = gen.sf_any(&c_ty, depth);
            let lhs = SfTerm::comp(SfTerm::comp(a.clone(), b.clone()), c.clone());
            let rhs = SfTerm::comp(a, SfTerm::comp(b, c));
            (lhs, rhs, a_ty)
        }
        // arr (g . f)  ==  arr f ; arr g
        "arrow-5d" => {
            let a_ty = gen.ty(1);
            let (f, mid) = gen.host_fn_any(&a_ty, 2);
            let (g, _) = gen.host_fn_any(&mid, 2);
            let lhs = SfTerm::Arr(HostFn::comp(g.clone(), f.clone()));
            let rhs = SfTerm::comp(SfTerm::Arr(f), SfTerm::Arr(g));
            (lhs, rhs, a_ty)
        }
        // first a ; arr fst  ==  arr fst ; a
        "arrow-5e" => {
            let a_ty = gen.ty(1);
            let c_ty = gen.ty(1);
            let (a, _) = gen.sf_any(&a_ty, depth);
            let lhs = SfTerm::comp(SfTerm::first(a.clone()), SfTerm::Arr(HostFn::Fst));
            let rhs = SfTerm::comp(SfTerm::Arr(HostFn::Fst), a);
            (lhs, rhs, Ty::prod(a_ty, c_ty))
        }
        // first a ; arr (id x f)  ==  arr (id x f) ; first a
        "arrow-5f" => {
            let a_ty = gen.ty(1);
            let c_ty = gen.ty(1);
            let (a, _) = gen.sf_any(&a_ty, depth);
            let (f, _) = gen.host_fn_any(&c_ty, 2);
            let side = SfTerm::Arr(HostFn::prod(HostFn::Id, f));
            let lhs = SfTerm::comp(SfTerm::first(a.clone()), side.clone());
            let rhs = SfTerm::comp(side, SfTerm::first(a));
            (lhs, rhs, Ty::prod(a_ty, c_ty))
        }
        // first (first a) ; arr assoc  ==  arr assoc ; first a
        "arrow-5g" => {
            let a_ty = gen.ty(1);
            let c1 = gen.ty(1);
            let c2 = gen.ty(1);
            let (a, _) = gen.sf_any(&a_ty, depth);
            let lhs = SfTerm::comp(
                SfTerm::first(SfTerm::first(a.clone())),
                SfTerm::Arr(HostFn::Assoc),
            );
            let rhs = SfTerm::comp(SfTerm::Arr(HostFn::Assoc), SfTerm::first(a));
            (lhs, rhs, Ty::prod(Ty::prod(a_ty, c1), c2))
        }
        // first (arr f)  ==  arr (f x id)
        "arrow-5h" => {
            let a_ty = gen.ty(1);
            let c_ty = gen.ty(1);
            let (f, _) = gen.host_fn_any(&a_ty, 2);
            let lhs = SfTerm::first(SfTerm::Arr(f.clone()));
            let rhs = SfTerm::Arr(HostFn::prod(f, HostFn::Id));
            (lhs, rhs, Ty::prod(a_ty, c_ty))
        }
        // first (a ; b)  ==  first a ; first b
        "arrow-5i" => {
            let a_ty = gen.ty(1);
            let d_ty = gen.ty(1);
            let (a, b_ty) = gen.sf_any(&a_ty, depth);
            let (b, _) = gen.sf_any(&b_ty, depth);
            let lhs = SfTerm::first(SfTerm::comp(a.clone(), b.clone()));
            let rhs = SfTerm::comp(SfTerm::first(a), SfTerm::first(b));
            (lhs, rhs, Ty::prod(a_ty, d_ty))
        }
        // loop c (first a ; b)  ==  a ; loop c b
        "loop-6a" => {
            let a_ty = gen.ty(1);
            let state_ty = gen.ty(1);
            let out_ty = gen.ty(1);
            let state = gen.val(&state_ty);
            let (a, b_ty) = gen.sf_any(&a_ty, depth);
            let b = gen.sf_at(
                &Ty::prod(b_ty, state_ty.clone()),
                &Ty::prod(out_ty, state_ty),
                depth,
            );
            let lhs = SfTerm::feedback(
                state.clone(),
                SfTerm::comp(SfTerm::first(a.clone()), b.clone()),
            );
            let rhs = SfTerm::comp(a, SfTerm::feedback(state, b));
            (lhs, rhs, a_ty)
        }
        // loop c (a ; first b)  ==  loop c a ; b
        "loop-6b" => {
            let a_ty = gen.ty(1);
            let state_ty = gen.ty(1);
            let mid_ty = gen.ty(1);
            let state = gen.val(&state_ty);
            let a = gen.sf_at(
                &Ty::prod(a_ty.clone(), state_ty.clone()),
                &Ty::prod(mid_ty.clone(), state_ty.clone()),
                depth,
            );
            let (b, _) = gen.sf_any(&mid_ty, depth);
            let lhs = SfTerm::feedback(
                state.clone(),
                SfTerm::comp(a.clone(), SfTerm::first(b.clone())),
            );
            let rhs = SfTerm::comp(SfTerm::feedback(state, a), b);
            (lhs, rhs, a_ty)
        }
        // loop c (loop d a)  ==  loop (c,d) (arr unassoc ; a ; arr assoc)
        "loop-6c" => {
            let a_ty = gen.ty(1);
            let out_ty = gen.ty(1);
            let c_ty = gen.ty(1);
            let d_ty = gen.ty(1);
            let c = gen.val(&c_ty);
            let d = gen.val(&d_ty);
            let a = gen.sf_at(
                &Ty::prod(Ty::prod(a_ty.clone(), c_ty.clone()), d_ty.clone()),
                &Ty::prod(Ty::prod(out_ty, c_ty), d_ty),
                depth,
            );
            let lhs = SfTerm::feedback(c.clone(), SfTerm::feedback(d.clone(), a.clone()));
            let body = SfTerm::comp(
                SfTerm::Arr(HostFn::Unassoc),
                SfTerm::comp(a, SfTerm::Arr(HostFn::Assoc)),
            );
            let rhs = SfTerm::feedback(Val::pair(c, d), body);
            (lhs, rhs, a_ty)
        }
        other => panic!("unknown stream law {other}"),
    }
}

// ---------------------------------------------------------------------
// Effectful term laws (get and set rewrite groups).
// ---------------------------------------------------------------------

struct RsfInstance {
    lhs: RsfTerm,
    rhs: RsfTerm,
    input: Ty,
    /// Statuses forced by the law's side condition, by resource id.
    forced: Vec<(u32, Status)>,
}

fn run_rsf_law(law: &str, samples: usize, gen: &mut Gen) -> LawReport {
    let mut report = LawReport {
        law: law.to_string(),
        tried: 0,
        failures: vec![],
    };
    for _ in 0..samples {
        let inst = rsf_law_instance(law, gen);
        let abs = rights_granting_abs(&[&inst.lhs, &inst.rhs], &inst.forced, gen);
        let sub = obs_equiv_named(law, &inst.lhs, &inst.rhs, &inst.input, &abs, 1, gen);
        report.tried += sub.tried;
        report.failures.extend(sub.failures);
    }
    report
}

/// Syntactic access counts per resource id (every Get/Set node executes
/// exactly once per step, so syntactic counts are exact).
fn access_counts(t: &RsfTerm, counts: &mut BTreeMap<u32, (usize, usize, Ty)>) {
    match t {
        RsfTerm::Arr(_) => {}
        RsfTerm::First(inner) => access_counts(inner, counts),
        RsfTerm::Comp(t1, t2) => {
            access_counts(t1, counts);
            access_counts(t2, counts);
        }
        RsfTerm::Get(r) => {
            counts
                .entry(r.id)
                .or_insert((0, 0, r.ty.clone()))
                .0 += 1;
        }
        RsfTerm::Set(r) => {
            counts
                .entry(r.id)
                .or_insert((0, 0, r.ty.clone()))
                .1 += 1;
        }
    }
}

/// An abstract memory granting every access both sides need: a resource
/// read or written more than once on either side, or both read and
/// written, must be internal; single pure reads may be fresh inputs and
/// single writes fresh outputs, sampled to exercise those statuses.
pub fn rights_granting_abs(
    terms: &[&RsfTerm],
    forced: &[(u32, Status)],
    gen: &mut Gen,
) -> AbsMemory {
    let mut merged: BTreeMap<u32, (usize, usize, Ty)> = BTreeMap::new();
    for t in terms {
        let mut counts = BTreeMap::new();
        access_counts(t, &mut counts);
        for (id, (reads, writes, ty)) in counts {
            let entry = merged.entry(id).or_insert((0, 0, ty));
            entry.0 = entry.0.max(reads);
            entry.1 = entry.1.max(writes);
        }
    }
    let mut abs = AbsMemory::new();
    for (id, (reads, writes, ty)) in merged {
        let status = match forced.iter().find(|(fid, _)| *fid == id) {
            Some((_, status)) => *status,
            None => {
                if reads <= 1 && writes == 0 && gen.coin(0.5) {
                    Status::Input(true)
                } else if writes <= 1 && reads == 0 && gen.coin(0.5) {
                    Status::Output(true)
                } else {
                    Status::Internal
                }
            }
        };
        abs.insert(id, status, ty);
    }
    abs
}

fn rsf_law_instance(law: &str, gen: &mut Gen) -> RsfInstance {
    use RsfTerm::{Arr, Get, Set};
    let pool = gen.ref_pool(3);
    let r = pool[gen.range(0, 3) as usize].clone();
    let r2 = {
        let others: Vec<&Ref> = pool.iter().filter(|p| p.id != r.id).collect();
        others[gen.range(0, others.len() as u64) as usize].clone()
    };
    let a_ty = gen.ty(1);
    let t_ty = gen.ty(1);
    let internal_only = |r: &Ref| vec![(r.id, Status::Internal)];
    match law {
        // arr f ; get r  ==  get r ; first (arr f)
        "rsf-12a" => {
            let (f, _) = gen.host_fn_any(&a_ty, 2);
            RsfInstance {
                lhs: RsfTerm::comp(Arr(f.clone()), Get(r.clone())),
                rhs: RsfTerm::comp(Get(r.clone()), RsfTerm::first(Arr(f))),
                input: a_ty,
                forced: vec![],
            }
        }
        // first (get r ; t)  ==  get r ; arr perm ; first t
        "rsf-12b" => {
            let (t, _) = gen.rsf_any(&Ty::prod(a_ty.clone(), r.ty.clone()), &pool, 2);
            RsfInstance {
                lhs: RsfTerm::first(RsfTerm::comp(Get(r.clone()), t.clone())),
                rhs: RsfTerm::chain(vec![Get(r.clone()), Arr(HostFn::Perm), RsfTerm::first(t)]),
                input: Ty::prod(a_ty, t_ty),
                forced: vec![],
            }
        }
        // first t ; get r  ==  first (t ; get r) ; arr perm
        "rsf-12c" => {
            let (t, _) = gen.rsf_any(&a_ty, &pool, 2);
            RsfInstance {
                lhs: RsfTerm::comp(RsfTerm::first(t.clone()), Get(r.clone())),
                rhs: RsfTerm::comp(
                    RsfTerm::first(RsfTerm::comp(t, Get(r.clone()))),
                    Arr(HostFn::Perm),
                ),
                input: Ty::prod(a_ty, t_ty),
                forced: vec![],
            }
        }
        // get r ; get r'  ==  get r' ; get r ; arr perm
        "rsf-12d" => RsfInstance {
            lhs: RsfTerm::comp(Get(r.clone()), Get(r2.clone())),
            rhs: RsfTerm::chain(vec![Get(r2), Get(r), Arr(HostFn::Perm)]),
            input: a_ty,
            forced: vec![],
        },
        // get r ; get r  ==  get r ; arr sdup   (internal only)
        "rsf-12e" | "rsf-12e-neg-input" => {
            let forced = if law == "rsf-12e" {
                internal_only(&r)
            } else {
                vec![(r.id, Status::Input(true))]
            };
            RsfInstance {
                lhs: RsfTerm::comp(Get(r.clone()), Get(r.clone())),
                rhs: RsfTerm::comp(Get(r), Arr(HostFn::SDup)),
                input: a_ty,
                forced,
            }
        }
        // set r ; arr f  ==  first (arr f) ; set r
        "rsf-13a" => {
            let (f, _) = gen.host_fn_any(&a_ty, 2);
            RsfInstance {
                lhs: RsfTerm::comp(Set(r.clone()), Arr(f.clone())),
                rhs: RsfTerm::comp(RsfTerm::first(Arr(f)), Set(r.clone())),
                input: Ty::prod(a_ty, r.ty.clone()),
                forced: vec![],
            }
        }
        // first (t ; set r)  ==  first t ; arr perm ; set r
        "rsf-13b" => {
            let mid = Ty::prod(gen.ty(1), r.ty.clone());
            let t = gen.rsf_at(&a_ty, &mid, &pool, 3);
            RsfInstance {
                lhs: RsfTerm::first(RsfTerm::comp(t.clone(), Set(r.clone()))),
                rhs: RsfTerm::chain(vec![
                    RsfTerm::first(t),
                    Arr(HostFn::Perm),
                    Set(r.clone()),
                ]),
                input: Ty::prod(a_ty, t_ty),
                forced: vec![],
            }
        }
        // set r ; first t  ==  arr perm ; first (set r ; t)
        "rsf-13c" => {
            let (t, _) = gen.rsf_any(&a_ty, &pool, 2);
            RsfInstance {
                lhs: RsfTerm::comp(Set(r.clone()), RsfTerm::first(t.clone())),
                rhs: RsfTerm::comp(
                    Arr(HostFn::Perm),
                    RsfTerm::first(RsfTerm::comp(Set(r.clone()), t)),
                ),
                input: Ty::prod(Ty::prod(a_ty, t_ty), r.ty.clone()),
                forced: vec![],
            }
        }
        // set r ; set r'  ==  arr perm ; set r' ; set r
        "rsf-13d" => RsfInstance {
            lhs: RsfTerm::comp(Set(r.clone()), Set(r2.clone())),
            rhs: RsfTerm::chain(vec![Arr(HostFn::Perm), Set(r2.clone()), Set(r.clone())]),
            input: Ty::prod(Ty::prod(a_ty, r2.ty.clone()), r.ty.clone()),
            forced: vec![],
        },
        // set r ; set r  ==  arr fst ; set r   (internal only)
        "rsf-13e" | "rsf-13e-neg-output" => {
            let forced = if law == "rsf-13e" {
                internal_only(&r)
            } else {
                vec![(r.id, Status::Output(true))]
            };
            RsfInstance {
                lhs: RsfTerm::comp(Set(r.clone()), Set(r.clone())),
                rhs: RsfTerm::comp(Arr(HostFn::Fst), Set(r.clone())),
                input: Ty::prod(Ty::prod(a_ty, r.ty.clone()), r.ty.clone()),
                forced,
            }
        }
        // set r ; get r'  ==  get r' ; arr perm ; set r
        "rsf-14a" => RsfInstance {
            lhs: RsfTerm::comp(Set(r.clone()), Get(r2.clone())),
            rhs: RsfTerm::chain(vec![Get(r2), Arr(HostFn::Perm), Set(r.clone())]),
            input: Ty::prod(a_ty, r.ty.clone()),
            forced: vec![],
        },
        // set r ; get r  ==  arr sdup ; set r   (internal only)
        "rsf-14b" | "rsf-14b-neg-output" => {
            let forced = if law == "rsf-14b" {
                internal_only(&r)
            } else {
                vec![(r.id, Status::Output(true))]
            };
            RsfInstance {
                lhs: RsfTerm::comp(Set(r.clone()), Get(r.clone())),
                rhs: RsfTerm::comp(Arr(HostFn::SDup), Set(r.clone())),
                input: Ty::prod(a_ty, r.ty.clone()),
                forced,
            }
        }
        // get r ; set r  ==  arr id   (internal only)
        "rsf-14c" | "rsf-14c-neg-input" => {
            let forced = if law == "rsf-14c" {
                internal_only(&r)
            } else {
                vec![(r.id, Status::Input(true))]
            };
            RsfInstance {
                lhs: RsfTerm::comp(Get(r.clone()), Set(r)),
                rhs: Arr(HostFn::Id),
                input: a_ty,
                forced,
            }
        }
        other => panic!("unknown rsf law {other}"),
    }
}

// ---------------------------------------------------------------------
// Monad and state-monad laws, run directly against the memory domain
// through explicit threading (the realization of the state monad here).
// ---------------------------------------------------------------------

fn st_get(r: &Ref, mem: &Memory) -> StepOutcome {
    memory::read(r, mem).map_err(|e| e.to_string())
}

fn st_set(r: &Ref, v: &Val, mem: &Memory) -> StepOutcome {
    memory::write(r, mem, v.clone())
        .map(|m| (Val::Tt, m))
        .map_err(|e| e.to_string())
}

fn st_bind(m: StepOutcome, f: impl FnOnce(&Val, &Memory) -> StepOutcome) -> StepOutcome {
    m.and_then(|(v, mem)| f(&v, &mem))
}

/// Evaluate both sides of a monad/state law on stored artifacts.
/// Returns `None` for an unknown law id.
fn state_law_outcomes(
    law: &str,
    refs: &[Ref],
    values: &[Val],
    kleisli: &[RsfTerm],
    mem: &Memory,
) -> Option<(StepOutcome, StepOutcome)> {
    let run = |t: &RsfTerm, a: &Val, m: &Memory| outcome(t, a, m);
    match law {
        // bind (return a) f  ==  f a
        "monad-3a" => {
            let (a, f) = (&values[0], &kleisli[0]);
            let lhs = st_bind(Ok((a.clone(), mem.clone())), |v, m| run(f, v, m));
            let rhs = run(f, a, mem);
            Some((lhs, rhs))
        }
        // bind m return  ==  m
        "monad-3b" => {
            let (a, f) = (&values[0], &kleisli[0]);
            let m = run(f, a, mem);
            let lhs = st_bind(m.clone(), |v, mm| Ok((v.clone(), mm.clone())));
            Some((lhs, m))
        }
        // bind (bind m g) h  ==  bind m (\x -> bind (g x) h)
        "monad-3c" => {
            let (a, f, g, h) = (&values[0], &kleisli[0], &kleisli[1], &kleisli[2]);
            let m = run(f, a, mem);
            let lhs = st_bind(st_bind(m.clone(), |v, mm| run(g, v, mm)), |v, mm| {
                run(h, v, mm)
            });
            let rhs = st_bind(m, |v, mm| st_bind(run(g, v, mm), |w, mmm| run(h, w, mmm)));
            Some((lhs, rhs))
        }
        // bind (get r) (\_ -> get r)  ==  get r
        "state-10a" => {
            let r = &refs[0];
            let lhs = st_bind(st_get(r, mem), |_, m| st_get(r, m));
            Some((lhs, st_get(r, mem)))
        }
        // bind (get r) (set r)  ==  return tt
        "state-10b" => {
            let r = &refs[0];
            let lhs = st_bind(st_get(r, mem), |v, m| st_set(r, v, m));
            Some((lhs, Ok((Val::Tt, mem.clone()))))
        }
        // bind (set r x) (\_ -> get r)  ==  bind (set r x) (\_ -> return x)
        "state-10c" => {
            let (r, x) = (&refs[0], &values[0]);
            let lhs = st_bind(st_set(r, x, mem), |_, m| st_get(r, m));
            let rhs = st_bind(st_set(r, x, mem), |_, m| Ok((x.clone(), m.clone())));
            Some((lhs, rhs))
        }
        // bind (set r x) (\_ -> set r y)  ==  set r y
        "state-10d" => {
            let (r, x, y) = (&refs[0], &values[0], &values[1]);
            let lhs = st_bind(st_set(r, x, mem), |_, m| st_set(r, y, m));
            Some((lhs, st_set(r, y, mem)))
        }
        // bind (get r) (\_ -> return x)  ==  return x
        "state-10e" => {
            let (r, x) = (&refs[0], &values[0]);
            let lhs = st_bind(st_get(r, mem), |_, m| Ok((x.clone(), m.clone())));
            Some((lhs, Ok((x.clone(), mem.clone()))))
        }
        // reads of distinct resources commute
        "state-10f" => {
            let (r, r2) = (&refs[0], &refs[1]);
            let lhs = st_bind(st_get(r, mem), |_, m| st_get(r2, m));
            let rhs = st_bind(st_get(r2, mem), |x, m| {
                let x = x.clone();
                st_bind(st_get(r, m), move |_, mm| Ok((x.clone(), mm.clone())))
            });
            Some((lhs, rhs))
        }
        // a read commutes with a write to a distinct resource
        "state-10g" => {
            let (r, r2, y) = (&refs[0], &refs[1], &values[0]);
            let lhs = st_bind(st_get(r, mem), |_, m| {
                st_bind(st_set(r2, y, m), |_, mm| Ok((Val::Tt, mm.clone())))
            });
            let rhs = st_bind(st_set(r2, y, mem), |_, m| {
                st_bind(st_get(r, m), |_, mm| Ok((Val::Tt, mm.clone())))
            });
            Some((lhs, rhs))
        }
        // a write commutes with a read of a distinct resource
        "state-10h" => {
            let (r, r2, x) = (&refs[0], &refs[1], &values[0]);
            let lhs = st_bind(st_set(r, x, mem), |_, m| st_get(r2, m));
            let rhs = st_bind(st_get(r2, mem), |y, m| {
                let y = y.clone();
                st_bind(st_set(r, x, m), move |_, mm| Ok((y.clone(), mm.clone())))
            });
            Some((lhs, rhs))
        }
        // writes to distinct resources commute
        "state-10i" => {
            let (r, r2, x, y) = (&refs[0], &refs[1], &values[0], &values[1]);
            let lhs = st_bind(st_set(r, x, mem), |_, m| st_set(r2, y, m));
            let rhs = st_bind(st_set(r2, y, mem), |_, m| st_set(r, x, m));
            Some((lhs, rhs))
        }
        _ => None,
    }
}

fn run_state_law(law: &str, samples: usize, gen: &mut Gen) -> LawReport {
    let mut report = LawReport {
        law: law.to_string(),
        tried: 0,
        failures: vec![],
    };
    for _ in 0..samples {
        report.tried += 1;
        let (refs, values, kleisli, mem) = state_law_artifacts(law, gen);
        let (left, right) =
            state_law_outcomes(law, &refs, &values, &kleisli, &mem).expect("known law");
        if left != right {
            report.failures.push(CounterExample::State {
                law: law.to_string(),
                refs,
                values,
                kleisli,
                memory: mem,
                left,
                right,
            });
        }
    }
    report
}

/// Generate the artifacts a monad/state law consumes, with statuses
/// satisfying its side condition: the laws that may drop or duplicate an
/// access run on internal resources only, the commutation laws draw any
/// status granting the access.
fn state_law_artifacts(law: &str, gen: &mut Gen) -> (Vec<Ref>, Vec<Val>, Vec<RsfTerm>, Memory) {
    let readable_status = |gen: &mut Gen| {
        if gen.coin(0.5) {
            Status::Internal
        } else {
            Status::Input(true)
        }
    };
    let writable_status = |gen: &mut Gen| {
        if gen.coin(0.5) {
            Status::Internal
        } else {
            Status::Output(true)
        }
    };
    match law {
        "monad-3a" | "monad-3b" | "monad-3c" => {
            let input = gen.ty(1);
            let pool = gen.ref_pool(3);
            let (f, f_out) = gen.rsf_any(&input, &pool, 2);
            let (g, g_out) = gen.rsf_any(&f_out, &pool, 2);
            let (h, _) = gen.rsf_any(&g_out, &pool, 2);
            let kleisli = vec![f.clone(), g.clone(), h.clone()];
            // The three stages run in sequence on both sides, so count
            // their accesses as one combined term.
            let seq = RsfTerm::comp(f, RsfTerm::comp(g, h));
            let abs = rights_granting_abs(&[&seq], &[], gen);
            let mem = gen.memory_modeling(&abs);
            let a = gen.val(&input);
            (pool, vec![a], kleisli, mem)
        }
        "state-10a" | "state-10b" => {
            let r = Ref::new(gen.ty(1), 0);
            let mem = internal_memory(&[&r], gen);
            (vec![r], vec![], vec![], mem)
        }
        "state-10c" | "state-10d" | "state-10e" => {
            let r = Ref::new(gen.ty(1), 0);
            let mem = internal_memory(&[&r], gen);
            let x = gen.val(&r.ty);
            let y = gen.val(&r.ty);
            (vec![r], vec![x, y], vec![], mem)
        }
        "state-10f" => {
            let r = Ref::new(gen.ty(1), 0);
            let r2 = Ref::new(gen.ty(1), 1);
            let abs: AbsMemory = [
                (0, (readable_status(gen), r.ty.clone())),
                (1, (readable_status(gen), r2.ty.clone())),
            ]
            .into_iter()
            .collect();
            let mem = gen.memory_modeling(&abs);
            (vec![r, r2], vec![], vec![], mem)
        }
        "state-10g" => {
            let r = Ref::new(gen.ty(1), 0);
            let r2 = Ref::new(gen.ty(1), 1);
            let abs: AbsMemory = [
                (0, (readable_status(gen), r.ty.clone())),
                (1, (writable_status(gen), r2.ty.clone())),
            ]
            .into_iter()
            .collect();
            let mem = gen.memory_modeling(&abs);
            let y = gen.val(&r2.ty);
            (vec![r, r2], vec![y], vec![], mem)
        }
        "state-10h" => {
            let r = Ref::new(gen.ty(1), 0);
            let r2 = Ref::new(gen.ty(1), 1);
            let abs: AbsMemory = [
                (0, (writable_status(gen), r.ty.clone())),
                (1, (readable_status(gen), r2.ty.clone())),
            ]
            .into_iter()
            .collect();
            let mem = gen.memory_modeling(&abs);
            let x = gen.val(&r.ty);
            (vec![r, r2], vec![x], vec![], mem)
        }
        "state-10i" => {
            let r = Ref::new(gen.ty(1), 0);
            let r2 = Ref::new(gen.ty(1), 1);
            let abs: AbsMemory = [
                (0, (writable_status(gen), r.ty.clone())),
                (1, (writable_status(gen), r2.ty.clone())),
            ]
            .into_iter()
            .collect();
            let mem = gen.memory_modeling(&abs);
            let x = gen.val(&r.ty);
            let y = gen.val(&r2.ty);
            (vec![r, r2], vec![x, y], vec![], mem)
        }
        other => panic!("unknown state law {other}"),
    }
}

/// An all-internal memory covering the given resources; internal cells
/// grant every access, which is exactly the side condition of the
/// single-resource state laws.
fn internal_memory(refs: &[&Ref], gen: &mut Gen) -> Memory {
    refs.iter()
        .map(|r| {
            let v = gen.val(&r.ty);
            (r.id, crate::memory::Cell::internal(r.ty.clone(), v))
        })
        .collect()
}

// ---------------------------------------------------------------------
// End-to-end cross-check.
// ---------------------------------------------------------------------

fn cross_check_outcomes(p: &Program, rows: &[Vec<Val>]) -> (StreamOutcome, StreamOutcome) {
    let lhs = p.run(rows).map_err(|e| e.to_string());
    let rhs = collapse(p)
        .and_then(|c| translate(&c))
        .map_err(|e| e.to_string())
        .and_then(|t| {
            let packed: Vec<Val> = rows.iter().map(|row| pack_vals(row)).collect();
            let out = t.run(&packed).map_err(|e| e.to_string())?;
            out.iter()
                .map(|v| {
                    unpack_vals(v, p.outputs.len())
                        .ok_or_else(|| format!("output {v} does not unpack"))
                })
                .collect()
        });
    (lhs, rhs)
}

/// Compare a program's stream semantics against its translated pure
/// stream transformer over random input streams.
pub fn cross_check(
    p: &Program,
    steps: usize,
    samples: usize,
    seed: u64,
) -> Result<LawReport, EquivError> {
    let report = typecheck::well_typed(p);
    if !report.ok {
        return Err(EquivError::NotWellTyped(report.diagnostics.join("; ")));
    }
    let mut gen = Gen::new(seed);
    let mut out = LawReport {
        law: "crosscheck".to_string(),
        tried: 0,
        failures: vec![],
    };
    for _ in 0..samples {
        out.tried += 1;
        let rows: Vec<Vec<Val>> = (0..steps)
            .map(|_| p.inputs.iter().map(|ty| gen.val(ty)).collect())
            .collect();
        let (left, right) = cross_check_outcomes(p, &rows);
        if left != right {
            out.failures.push(CounterExample::Prog {
                program: p.clone(),
                rows,
                left,
                right,
            });
        }
    }
    Ok(out)
}
