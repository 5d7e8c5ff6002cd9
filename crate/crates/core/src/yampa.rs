//! Pure stream transformers: term algebra, stepwise and stream
//! semantics, the `Loop v (Arr f)` normal form, and bounded bisimulation
//! checking.
//!
//! Stepping a term returns a successor term that is structurally
//! identical except for updated `Loop` states, which keeps terms cheap to
//! compare and serialize.

use crate::gen::Gen;
use crate::host::{HostFn, ShapeMismatch, Ty, Val};
use crate::molholes::TermTypeError;
use crate::path::TermPath;

/// Terms of the pure stream language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SfTerm {
    Arr(HostFn),
    Comp(Box<SfTerm>, Box<SfTerm>),
    First(Box<SfTerm>),
    /// `Loop(state, body)`: the body maps `(input, state)` to
    /// `(output, new state)`.
    Loop(Val, Box<SfTerm>),
}

impl SfTerm {
    pub fn comp(first: SfTerm, second: SfTerm) -> SfTerm {
        SfTerm::Comp(Box::new(first), Box::new(second))
    }

    pub fn first(inner: SfTerm) -> SfTerm {
        SfTerm::First(Box::new(inner))
    }

    pub fn feedback(state: Val, body: SfTerm) -> SfTerm {
        SfTerm::Loop(state, Box::new(body))
    }

    /// Value-level output type at the given input type.
    pub fn infer(&self, input: &Ty) -> Result<Ty, TermTypeError> {
        self.infer_at(input, &TermPath::root())
    }

    fn infer_at(&self, input: &Ty, path: &TermPath) -> Result<Ty, TermTypeError> {
        match self {
            SfTerm::Arr(f) => f
                .infer(input)
                .map_err(|e| TermTypeError::new(path.clone(), e.to_string())),
            SfTerm::Comp(t1, t2) => {
                let mid = t1.infer_at(input, &path.child(0))?;
                t2.infer_at(&mid, &path.child(1))
            }
            SfTerm::First(inner) => match input.as_prod() {
                Some((a, c)) => {
                    let b = inner.infer_at(a, &path.child(0))?;
                    Ok(Ty::prod(b, c.clone()))
                }
                None => Err(TermTypeError::new(
                    path.clone(),
                    format!("first requires a product input, got {input}"),
                )),
            },
            SfTerm::Loop(state, body) => {
                let state_ty = state.ty();
                let body_out = body.infer_at(&Ty::prod(input.clone(), state_ty.clone()), &path.child(0))?;
                match body_out.as_prod() {
                    Some((b, c)) if *c == state_ty => Ok(b.clone()),
                    _ => Err(TermTypeError::new(
                        path.clone(),
                        format!(
                            "loop body must return (_ x {state_ty}), got {body_out}"
                        ),
                    )),
                }
            }
        }
    }

    /// One synchronous step: consume one input value, produce one output
    /// value and the successor term.
    pub fn step(&self, a: &Val) -> Result<(Val, SfTerm), ShapeMismatch> {
        match self {
            SfTerm::Arr(f) => Ok((f.eval(a)?, self.clone())),
            SfTerm::Comp(t1, t2) => {
                let (b, t1_next) = t1.step(a)?;
                let (c, t2_next) = t2.step(&b)?;
                Ok((c, SfTerm::comp(t1_next, t2_next)))
            }
            SfTerm::First(inner) => match a {
                Val::P(x, z) => {
                    let (y, next) = inner.step(x)?;
                    Ok((Val::pair(y, (**z).clone()), SfTerm::first(next)))
                }
                _ => Err(ShapeMismatch {
                    combinator: "first",
                    value: a.clone(),
                }),
            },
            SfTerm::Loop(state, body) => {
                let (out, body_next) = body.step(&Val::pair(a.clone(), state.clone()))?;
                match out {
                    Val::P(y, state_next) => {
                        Ok(((*y).clone(), SfTerm::Loop(*state_next, Box::new(body_next))))
                    }
                    other => Err(ShapeMismatch {
                        combinator: "loop",
                        value: other,
                    }),
                }
            }
        }
    }

    /// Lift the stepwise semantics over a finite input prefix.
    pub fn run(&self, inputs: &[Val]) -> Result<Vec<Val>, ShapeMismatch> {
        let mut term = self.clone();
        let mut out = Vec::with_capacity(inputs.len());
        for a in inputs {
            let (b, next) = term.step(a)?;
            out.push(b);
            term = next;
        }
        Ok(out)
    }

    /// The term with every `Loop` state replaced by `tt`; two terms have
    /// the same shape iff their erasures are equal.
    pub fn erase_states(&self) -> SfTerm {
        match self {
            SfTerm::Arr(f) => SfTerm::Arr(f.clone()),
            SfTerm::Comp(t1, t2) => SfTerm::comp(t1.erase_states(), t2.erase_states()),
            SfTerm::First(inner) => SfTerm::first(inner.erase_states()),
            SfTerm::Loop(_, body) => SfTerm::Loop(Val::Tt, Box::new(body.erase_states())),
        }
    }
}

impl std::fmt::Display for SfTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SfTerm::Arr(fun) => write!(f, "(arr {fun})"),
            SfTerm::Comp(t1, t2) => write!(f, "(comp {t1} {t2})"),
            SfTerm::First(inner) => write!(f, "(first {inner})"),
            SfTerm::Loop(v, body) => write!(f, "(loop {v} {body})"),
        }
    }
}

/// Transform a term into its `Loop v (Arr f)` normal form, returning the
/// state `v` and the combinator-built function `f`.
///
/// The construction is structural; each case wires the sub-results
/// together with projections and pairings so every sub-function appears
/// exactly once in the output.
pub fn normalize(t: &SfTerm) -> (Val, HostFn) {
    use HostFn::{Fst, Snd};
    let p = HostFn::pairing;
    let c = HostFn::comp;
    match t {
        // Arr f  ==  Loop tt (Arr ((x, _) -> (f x, tt)))
        SfTerm::Arr(f) => (
            Val::Tt,
            p(c(f.clone(), Fst), HostFn::Const(Val::Tt)),
        ),
        // First (Loop v (Arr f))  ==  Loop v (Arr g)
        // g ((a, d), c) = ((b, d), c')  where (b, c') = f (a, c)
        SfTerm::First(inner) => {
            let (v, f) = normalize(inner);
            // stage: ((a, d), c) -> ((b, c'), d); reshape: -> ((b, d), c')
            let apply = c(f, p(c(Fst, Fst), Snd));
            let stage = p(apply, c(Snd, Fst));
            let reshape = p(p(c(Fst, Fst), Snd), c(Snd, Fst));
            (v, c(reshape, stage))
        }
        // Comp (Loop d (Arr f1)) (Loop e (Arr f2))  ==  Loop (d, e) (Arr g)
        // g (a, (c1, c2)) = (c, (c1', c2'))
        //   where (b, c1') = f1 (a, c1) and (c, c2') = f2 (b, c2)
        SfTerm::Comp(t1, t2) => {
            let (d, f1) = normalize(t1);
            let (e, f2) = normalize(t2);
            let stage1 = p(c(f1, p(Fst, c(Fst, Snd))), c(Snd, Snd));
            let stage2 = p(c(f2, p(c(Fst, Fst), Snd)), c(Snd, Fst));
            let assemble = p(c(Fst, Fst), p(Snd, c(Snd, Fst)));
            (Val::pair(d, e), c(assemble, c(stage2, stage1)))
        }
        // Loop v0 (Loop d (Arr f))  ==  Loop (v0, d) (Arr g)
        // g (a, (c, d)) = (b, (c', d'))  where ((b, c'), d') = f ((a, c), d)
        SfTerm::Loop(v0, body) => {
            let (d, f) = normalize(body);
            let apply = c(f, p(p(Fst, c(Fst, Snd)), c(Snd, Snd)));
            let reshape = p(c(Fst, Fst), p(c(Snd, Fst), Snd));
            (Val::pair(v0.clone(), d), c(reshape, apply))
        }
    }
}

/// A definitive witness that two terms differ: the input sequence and
/// the first step at which the outputs disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub inputs: Vec<Val>,
    pub step: usize,
    pub left: Val,
    pub right: Val,
}

/// Bounded observational-equivalence check: run both terms on `samples`
/// random input sequences of length `steps` and compare outputs
/// pointwise.
///
/// `Ok(None)` is evidence of bisimilarity, not proof; `Ok(Some(_))` is a
/// definitive counterexample. An evaluation error on either side also
/// counts as a counterexample (reported with the raw outputs seen so
/// far replaced by `tt`).
pub fn bisim_report(
    t1: &SfTerm,
    t2: &SfTerm,
    input: &Ty,
    steps: usize,
    samples: usize,
    seed: u64,
) -> Result<Option<Counterexample>, TermTypeError> {
    t1.infer(input)?;
    t2.infer(input)?;
    let mut gen = Gen::new(seed);
    for _ in 0..samples {
        let inputs: Vec<Val> = (0..steps).map(|_| gen.val(input)).collect();
        let mut left = t1.clone();
        let mut right = t2.clone();
        for (i, a) in inputs.iter().enumerate() {
            let l = left.step(a);
            let r = right.step(a);
            match (l, r) {
                (Ok((lv, ln)), Ok((rv, rn))) => {
                    if lv != rv {
                        return Ok(Some(Counterexample {
                            inputs,
                            step: i,
                            left: lv,
                            right: rv,
                        }));
                    }
                    left = ln;
                    right = rn;
                }
                (l, r) => {
                    let as_val = |x: Result<(Val, SfTerm), ShapeMismatch>| {
                        x.map(|(v, _)| v).unwrap_or(Val::Tt)
                    };
                    return Ok(Some(Counterexample {
                        inputs,
                        step: i,
                        left: as_val(l),
                        right: as_val(r),
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Convenience wrapper around [`bisim_report`].
pub fn bisim(
    t1: &SfTerm,
    t2: &SfTerm,
    input: &Ty,
    steps: usize,
    samples: usize,
    seed: u64,
) -> Result<bool, TermTypeError> {
    bisim_report(t1, t2, input, steps, samples, seed).map(|ce| ce.is_none())
}
