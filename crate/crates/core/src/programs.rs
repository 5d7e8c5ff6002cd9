//! Ready-made example programs used across tests, benches, and docs.

use crate::host::{HostFn, Prim, Ty, Val};
use crate::molholes::{Program, Ref, RsfTerm};

fn nat_ref(id: u32) -> Ref {
    Ref::new(Ty::Nat, id)
}

/// The counter program: no inputs, one internal cell starting at 0, one
/// output. Each step emits the current count and stores its successor,
/// so the output stream is 0, 1, 2, ...
pub fn naturals() -> Program {
    // (get 0) ; arr pair(id, inc . snd) ; (set 0) ; (set 1)
    let grow = HostFn::pairing(
        HostFn::Id,
        HostFn::comp(HostFn::Prim(Prim::Inc), HostFn::Snd),
    );
    Program {
        inputs: vec![],
        internals: vec![(Val::nat(0), Ty::Nat)],
        outputs: vec![Ty::Nat],
        term: RsfTerm::chain(vec![
            RsfTerm::Get(nat_ref(0)),
            RsfTerm::Arr(grow),
            RsfTerm::Set(nat_ref(0)),
            RsfTerm::Set(nat_ref(1)),
        ]),
    }
}

/// The unit-delay program: one input, one internal cell starting at 0,
/// one output. Each step emits the stored value and stores the input,
/// so the output stream is the input stream shifted by one.
pub fn delay() -> Program {
    Program {
        inputs: vec![Ty::Nat],
        internals: vec![(Val::nat(0), Ty::Nat)],
        outputs: vec![Ty::Nat],
        term: RsfTerm::chain(vec![
            RsfTerm::Get(nat_ref(0)),
            RsfTerm::Arr(HostFn::Snd),
            RsfTerm::Get(nat_ref(1)),
            RsfTerm::Arr(HostFn::Swap),
            RsfTerm::Set(nat_ref(1)),
            RsfTerm::Arr(HostFn::pairing(HostFn::Const(Val::Tt), HostFn::Id)),
            RsfTerm::Set(nat_ref(2)),
        ]),
    }
}

/// A single-wire relay: one input copied verbatim to one output.
pub fn relay() -> Program {
    Program {
        inputs: vec![Ty::Nat],
        internals: vec![],
        outputs: vec![Ty::Nat],
        term: RsfTerm::chain(vec![
            RsfTerm::Get(nat_ref(0)),
            RsfTerm::Set(nat_ref(1)),
        ]),
    }
}
