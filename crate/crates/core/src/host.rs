//! The host-language universe: first-order types, values, and a pure
//! combinator language of functions between them.
//!
//! Rewrites need to construct new host functions symbolically (composites
//! of projections, pairings, and permutations), so functions are term
//! values rather than Rust closures. [`HostFn::Opaque`] is the escape
//! hatch for an arbitrary pure map; everything the rewriters build uses
//! only the named combinators.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use thiserror::Error;

/// Types of the host value universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ty {
    Unit,
    Bool,
    Nat,
    Prod(Box<Ty>, Box<Ty>),
}

impl Ty {
    pub fn prod(left: Ty, right: Ty) -> Ty {
        Ty::Prod(Box::new(left), Box::new(right))
    }

    pub fn as_prod(&self) -> Option<(&Ty, &Ty)> {
        match self {
            Ty::Prod(a, b) => Some((a, b)),
            _ => None,
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Unit => write!(f, "unit"),
            Ty::Bool => write!(f, "bool"),
            Ty::Nat => write!(f, "nat"),
            Ty::Prod(a, b) => write!(f, "(prod {a} {b})"),
        }
    }
}

/// Values. Naturals are unbounded so long-running counters never wrap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Val {
    Tt,
    B(bool),
    N(BigUint),
    P(Box<Val>, Box<Val>),
}

impl Val {
    pub fn pair(fst: Val, snd: Val) -> Val {
        Val::P(Box::new(fst), Box::new(snd))
    }

    pub fn nat(n: u64) -> Val {
        Val::N(BigUint::from(n))
    }

    pub fn as_pair(&self) -> Option<(&Val, &Val)> {
        match self {
            Val::P(a, b) => Some((a, b)),
            _ => None,
        }
    }

    /// The type of a value; total by construction.
    pub fn ty(&self) -> Ty {
        match self {
            Val::Tt => Ty::Unit,
            Val::B(_) => Ty::Bool,
            Val::N(_) => Ty::Nat,
            Val::P(a, b) => Ty::prod(a.ty(), b.ty()),
        }
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Tt => write!(f, "tt"),
            Val::B(b) => write!(f, "{b}"),
            Val::N(n) => write!(f, "{n}"),
            // No inner spaces: pair values stay single whitespace-free
            // tokens in row files.
            Val::P(a, b) => write!(f, "({a},{b})"),
        }
    }
}

/// Primitive arithmetic on naturals. `Dec` is truncated at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prim {
    Inc,
    Add,
    Dec,
    IsZero,
}

impl Prim {
    pub fn name(self) -> &'static str {
        match self {
            Prim::Inc => "inc",
            Prim::Add => "add",
            Prim::Dec => "dec",
            Prim::IsZero => "isZero",
        }
    }

    pub fn from_name(name: &str) -> Option<Prim> {
        match name {
            "inc" => Some(Prim::Inc),
            "add" => Some(Prim::Add),
            "dec" => Some(Prim::Dec),
            "isZero" => Some(Prim::IsZero),
            _ => None,
        }
    }
}

type OpaqueImpl = Arc<dyn Fn(&Val) -> Option<Val> + Send + Sync>;

/// An abstract pure map with a declared type, compared by tag.
#[derive(Clone)]
pub struct OpaqueFn {
    pub tag: String,
    pub input: Ty,
    pub output: Ty,
    func: OpaqueImpl,
}

impl OpaqueFn {
    pub fn new(
        tag: impl Into<String>,
        input: Ty,
        output: Ty,
        func: impl Fn(&Val) -> Option<Val> + Send + Sync + 'static,
    ) -> Self {
        OpaqueFn {
            tag: tag.into(),
            input,
            output,
            func: Arc::new(func),
        }
    }

    pub fn apply(&self, v: &Val) -> Option<Val> {
        (self.func)(v)
    }
}

impl fmt::Debug for OpaqueFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OpaqueFn")
            .field("tag", &self.tag)
            .field("input", &self.input)
            .field("output", &self.output)
            .finish_non_exhaustive()
    }
}

impl PartialEq for OpaqueFn {
    fn eq(&self, other: &Self) -> bool {
        self.tag == other.tag && self.input == other.input && self.output == other.output
    }
}

impl Eq for OpaqueFn {}

/// Pure first-order host functions as a combinator algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HostFn {
    Id,
    /// Ignores its input and returns the carried value.
    Const(Val),
    Fst,
    Snd,
    /// `x -> (x, x)`
    Dup,
    /// `(x, y) -> ((x, y), y)`
    SDup,
    /// `(x, y) -> (y, x)`
    Swap,
    /// `((x, y), z) -> (x, (y, z))`
    Assoc,
    /// `(x, (y, z)) -> ((x, y), z)`
    Unassoc,
    /// `((x, y), z) -> ((x, z), y)`
    Perm,
    /// `x -> (f x, g x)`
    Pairing(Box<HostFn>, Box<HostFn>),
    /// `(x, y) -> (f x, g y)`
    ProdF(Box<HostFn>, Box<HostFn>),
    /// `Comp(g, f)` applies `f` first, then `g`.
    Comp(Box<HostFn>, Box<HostFn>),
    Prim(Prim),
    Opaque(OpaqueFn),
}

/// Evaluation failure: a combinator met a value of the wrong shape.
/// Unreachable from well-typed terms; it signals an ill-typed
/// construction upstream.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("shape mismatch: {combinator} applied to {value}")]
pub struct ShapeMismatch {
    pub combinator: &'static str,
    pub value: Val,
}

/// Type inference failure for a host function.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("type mismatch: {combinator} cannot accept {input}")]
pub struct FnTypeError {
    pub combinator: &'static str,
    pub input: Ty,
}

impl HostFn {
    pub fn comp(after: HostFn, before: HostFn) -> HostFn {
        HostFn::Comp(Box::new(after), Box::new(before))
    }

    pub fn pairing(f: HostFn, g: HostFn) -> HostFn {
        HostFn::Pairing(Box::new(f), Box::new(g))
    }

    pub fn prod(f: HostFn, g: HostFn) -> HostFn {
        HostFn::ProdF(Box::new(f), Box::new(g))
    }

    pub fn constant(v: Val) -> HostFn {
        HostFn::Const(v)
    }

    fn mismatch(combinator: &'static str, v: &Val) -> ShapeMismatch {
        ShapeMismatch {
            combinator,
            value: v.clone(),
        }
    }

    /// Apply the function to a value.
    pub fn eval(&self, v: &Val) -> Result<Val, ShapeMismatch> {
        match self {
            HostFn::Id => Ok(v.clone()),
            HostFn::Const(c) => Ok(c.clone()),
            HostFn::Fst => match v {
                Val::P(a, _) => Ok((**a).clone()),
                _ => Err(Self::mismatch("fst", v)),
            },
            HostFn::Snd => match v {
                Val::P(_, b) => Ok((**b).clone()),
                _ => Err(Self::mismatch("snd", v)),
            },
            HostFn::Dup => Ok(Val::pair(v.clone(), v.clone())),
            HostFn::SDup => match v {
                Val::P(_, y) => {
                    let y = (**y).clone();
                    Ok(Val::pair(v.clone(), y))
                }
                _ => Err(Self::mismatch("sdup", v)),
            },
            HostFn::Swap => match v {
                Val::P(x, y) => Ok(Val::pair((**y).clone(), (**x).clone())),
                _ => Err(Self::mismatch("swap", v)),
            },
            HostFn::Assoc => match v {
                Val::P(xy, z) => match &**xy {
                    Val::P(x, y) => Ok(Val::pair(
                        (**x).clone(),
                        Val::pair((**y).clone(), (**z).clone()),
                    )),
                    _ => Err(Self::mismatch("assoc", v)),
                },
                _ => Err(Self::mismatch("assoc", v)),
            },
            HostFn::Unassoc => match v {
                Val::P(x, yz) => match &**yz {
                    Val::P(y, z) => Ok(Val::pair(
                        Val::pair((**x).clone(), (**y).clone()),
                        (**z).clone(),
                    )),
                    _ => Err(Self::mismatch("unassoc", v)),
                },
                _ => Err(Self::mismatch("unassoc", v)),
            },
            HostFn::Perm => match v {
                Val::P(xy, z) => match &**xy {
                    Val::P(x, y) => Ok(Val::pair(
                        Val::pair((**x).clone(), (**z).clone()),
                        (**y).clone(),
                    )),
                    _ => Err(Self::mismatch("perm", v)),
                },
                _ => Err(Self::mismatch("perm", v)),
            },
            HostFn::Pairing(f, g) => Ok(Val::pair(f.eval(v)?, g.eval(v)?)),
            HostFn::ProdF(f, g) => match v {
                Val::P(x, y) => Ok(Val::pair(f.eval(x)?, g.eval(y)?)),
                _ => Err(Self::mismatch("prod", v)),
            },
            HostFn::Comp(after, before) => after.eval(&before.eval(v)?),
            HostFn::Prim(p) => p.eval(v),
            HostFn::Opaque(o) => o.apply(v).ok_or_else(|| Self::mismatch("opaque", v)),
        }
    }

    /// The output type when applied to `input`, such that evaluation
    /// preserves typing.
    pub fn infer(&self, input: &Ty) -> Result<Ty, FnTypeError> {
        let bad = |combinator: &'static str| FnTypeError {
            combinator,
            input: input.clone(),
        };
        match self {
            HostFn::Id => Ok(input.clone()),
            HostFn::Const(c) => Ok(c.ty()),
            HostFn::Fst => match input.as_prod() {
                Some((a, _)) => Ok(a.clone()),
                None => Err(bad("fst")),
            },
            HostFn::Snd => match input.as_prod() {
                Some((_, b)) => Ok(b.clone()),
                None => Err(bad("snd")),
            },
            HostFn::Dup => Ok(Ty::prod(input.clone(), input.clone())),
            HostFn::SDup => match input.as_prod() {
                Some((_, b)) => Ok(Ty::prod(input.clone(), b.clone())),
                None => Err(bad("sdup")),
            },
            HostFn::Swap => match input.as_prod() {
                Some((a, b)) => Ok(Ty::prod(b.clone(), a.clone())),
                None => Err(bad("swap")),
            },
            HostFn::Assoc => match input.as_prod() {
                Some((ab, c)) => match ab.as_prod() {
                    Some((a, b)) => Ok(Ty::prod(a.clone(), Ty::prod(b.clone(), c.clone()))),
                    None => Err(bad("assoc")),
                },
                None => Err(bad("assoc")),
            },
            HostFn::Unassoc => match input.as_prod() {
                Some((a, bc)) => match bc.as_prod() {
                    Some((b, c)) => Ok(Ty::prod(Ty::prod(a.clone(), b.clone()), c.clone())),
                    None => Err(bad("unassoc")),
                },
                None => Err(bad("unassoc")),
            },
            HostFn::Perm => match input.as_prod() {
                Some((ab, c)) => match ab.as_prod() {
                    Some((a, b)) => Ok(Ty::prod(Ty::prod(a.clone(), c.clone()), b.clone())),
                    None => Err(bad("perm")),
                },
                None => Err(bad("perm")),
            },
            HostFn::Pairing(f, g) => Ok(Ty::prod(f.infer(input)?, g.infer(input)?)),
            HostFn::ProdF(f, g) => match input.as_prod() {
                Some((a, b)) => Ok(Ty::prod(f.infer(a)?, g.infer(b)?)),
                None => Err(bad("prod")),
            },
            HostFn::Comp(after, before) => after.infer(&before.infer(input)?),
            HostFn::Prim(p) => p.infer(input),
            HostFn::Opaque(o) => {
                if *input == o.input {
                    Ok(o.output.clone())
                } else {
                    Err(bad("opaque"))
                }
            }
        }
    }
}

impl Prim {
    fn eval(self, v: &Val) -> Result<Val, ShapeMismatch> {
        let mismatch = ShapeMismatch {
            combinator: self.name(),
            value: v.clone(),
        };
        match (self, v) {
            (Prim::Inc, Val::N(n)) => Ok(Val::N(n + 1u32)),
            (Prim::Dec, Val::N(n)) => {
                if n == &BigUint::from(0u32) {
                    Ok(Val::nat(0))
                } else {
                    Ok(Val::N(n - 1u32))
                }
            }
            (Prim::IsZero, Val::N(n)) => Ok(Val::B(n == &BigUint::from(0u32))),
            (Prim::Add, Val::P(x, y)) => match (&**x, &**y) {
                (Val::N(a), Val::N(b)) => Ok(Val::N(a + b)),
                _ => Err(mismatch),
            },
            _ => Err(mismatch),
        }
    }

    fn infer(self, input: &Ty) -> Result<Ty, FnTypeError> {
        let bad = FnTypeError {
            combinator: self.name(),
            input: input.clone(),
        };
        match (self, input) {
            (Prim::Inc | Prim::Dec, Ty::Nat) => Ok(Ty::Nat),
            (Prim::IsZero, Ty::Nat) => Ok(Ty::Bool),
            (Prim::Add, Ty::Prod(a, b)) if **a == Ty::Nat && **b == Ty::Nat => Ok(Ty::Nat),
            _ => Err(bad),
        }
    }
}

impl fmt::Display for HostFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HostFn::Id => write!(f, "id"),
            HostFn::Const(v) => write!(f, "const({v})"),
            HostFn::Fst => write!(f, "fst"),
            HostFn::Snd => write!(f, "snd"),
            HostFn::Dup => write!(f, "dup"),
            HostFn::SDup => write!(f, "sdup"),
            HostFn::Swap => write!(f, "swap"),
            HostFn::Assoc => write!(f, "assoc"),
            HostFn::Unassoc => write!(f, "unassoc"),
            HostFn::Perm => write!(f, "perm"),
            HostFn::Pairing(a, b) => write!(f, "pair({a},{b})"),
            HostFn::ProdF(a, b) => write!(f, "prod({a},{b})"),
            HostFn::Comp(a, b) => write!(f, "comp({a},{b})"),
            HostFn::Prim(p) => write!(f, "prim({})", p.name()),
            HostFn::Opaque(o) => write!(f, "opaque({})", o.tag),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::Gen;

    fn n(x: u64) -> Val {
        Val::nat(x)
    }

    #[test]
    fn swap_exchanges_components() {
        let v = Val::pair(n(1), n(2));
        assert_eq!(HostFn::Swap.eval(&v).unwrap(), Val::pair(n(2), n(1)));
    }

    #[test]
    fn perm_exchanges_inner_and_outer() {
        let v = Val::pair(Val::pair(n(1), n(2)), n(3));
        assert_eq!(
            HostFn::Perm.eval(&v).unwrap(),
            Val::pair(Val::pair(n(1), n(3)), n(2))
        );
    }

    #[test]
    fn fst_after_dup_is_identity() {
        let f = HostFn::comp(HostFn::Fst, HostFn::Dup);
        assert_eq!(f.eval(&n(5)).unwrap(), n(5));
    }

    #[test]
    fn dec_truncates_at_zero() {
        assert_eq!(HostFn::Prim(Prim::Dec).eval(&n(0)).unwrap(), n(0));
        assert_eq!(HostFn::Prim(Prim::Dec).eval(&n(3)).unwrap(), n(2));
    }

    #[test]
    fn infer_dup_and_assoc() {
        assert_eq!(
            HostFn::Dup.infer(&Ty::Nat).unwrap(),
            Ty::prod(Ty::Nat, Ty::Nat)
        );
        let input = Ty::prod(Ty::prod(Ty::Unit, Ty::Bool), Ty::Nat);
        assert_eq!(
            HostFn::Assoc.infer(&input).unwrap(),
            Ty::prod(Ty::Unit, Ty::prod(Ty::Bool, Ty::Nat))
        );
    }

    #[test]
    fn infer_rejects_projection_of_non_pair() {
        assert!(HostFn::Fst.infer(&Ty::Nat).is_err());
    }

    #[test]
    fn eval_rejects_projection_of_non_pair() {
        let err = HostFn::Fst.eval(&n(7)).unwrap_err();
        assert_eq!(err.combinator, "fst");
    }

    #[test]
    fn opaque_uses_declared_types_and_tag_equality() {
        let o = HostFn::Opaque(OpaqueFn::new("triple", Ty::Nat, Ty::Nat, |v| match v {
            Val::N(n) => Some(Val::N(n * 3u32)),
            _ => None,
        }));
        assert_eq!(o.infer(&Ty::Nat).unwrap(), Ty::Nat);
        assert!(o.infer(&Ty::Bool).is_err());
        assert_eq!(o.eval(&n(4)).unwrap(), n(12));
        let same = HostFn::Opaque(OpaqueFn::new("triple", Ty::Nat, Ty::Nat, |_| None));
        assert_eq!(o, same);
    }

    /// Evaluation preserves typing: if `infer(f, t) = t'` and `v : t`,
    /// then `eval(f, v)` succeeds with a value of type `t'`.
    #[test]
    fn type_preservation_fuzz() {
        let mut gen = Gen::new(0x7057);
        for _ in 0..500 {
            let input = gen.ty(2);
            let output = gen.ty(2);
            let f = gen.host_fn(&input, &output, 3);
            let inferred = f.infer(&input).expect("generated function must type");
            assert_eq!(inferred, output);
            let v = gen.val(&input);
            let w = f.eval(&v).expect("well-typed application must not fail");
            assert_eq!(w.ty(), output);
        }
    }

    /// Identity and associativity of composition, checked pointwise.
    #[test]
    fn composition_identities_fuzz() {
        let mut gen = Gen::new(0x7058);
        for _ in 0..300 {
            let a = gen.ty(2);
            let b = gen.ty(2);
            let c = gen.ty(2);
            let d = gen.ty(2);
            let f = gen.host_fn(&a, &b, 2);
            let g = gen.host_fn(&b, &c, 2);
            let h = gen.host_fn(&c, &d, 2);
            let v = gen.val(&a);
            let fv = f.eval(&v).unwrap();
            assert_eq!(HostFn::comp(f.clone(), HostFn::Id).eval(&v).unwrap(), fv);
            assert_eq!(HostFn::comp(HostFn::Id, f.clone()).eval(&v).unwrap(), fv);
            let left = HostFn::comp(h.clone(), HostFn::comp(g.clone(), f.clone()));
            let right = HostFn::comp(HostFn::comp(h, g), f);
            assert_eq!(left.eval(&v).unwrap(), right.eval(&v).unwrap());
        }
    }

    /// Projections cancel pairings: `fst . <f,g> = f` and `snd . <f,g> = g`.
    #[test]
    fn projection_laws_fuzz() {
        let mut gen = Gen::new(0x7059);
        for _ in 0..300 {
            let a = gen.ty(2);
            let b = gen.ty(2);
            let c = gen.ty(2);
            let f = gen.host_fn(&a, &b, 2);
            let g = gen.host_fn(&a, &c, 2);
            let v = gen.val(&a);
            let paired = HostFn::pairing(f.clone(), g.clone());
            assert_eq!(
                HostFn::comp(HostFn::Fst, paired.clone()).eval(&v).unwrap(),
                f.eval(&v).unwrap()
            );
            assert_eq!(
                HostFn::comp(HostFn::Snd, paired).eval(&v).unwrap(),
                g.eval(&v).unwrap()
            );
        }
    }
}
