use std::cell::Cell;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ScalarProfile;

/// Tally of arithmetic operations by hardware class.
///
/// Additions and subtractions share one class. Doublings and halvings are
/// both shifts but are tallied separately so a kernel that halves can be told
/// apart from one that only doubles.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpCountLedger {
    pub mul: u64,
    pub square: u64,
    pub addsub: u64,
    pub double: u64,
    #[serde(default)]
    pub halve: u64,
}

impl OpCountLedger {
    pub const fn new(mul: u64, square: u64, addsub: u64, double: u64) -> Self {
        Self {
            mul,
            square,
            addsub,
            double,
            halve: 0,
        }
    }

    pub fn total(&self) -> u64 {
        self.mul + self.square + self.addsub + self.double + self.halve
    }
}

impl fmt::Display for OpCountLedger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mul={} square={} addsub={} double={} halve={}",
            self.mul, self.square, self.addsub, self.double, self.halve
        )
    }
}

/// A profile that delegates every operation to `base` and records it.
#[derive(Debug)]
pub struct Counted<P> {
    base: P,
    ledger: Cell<OpCountLedger>,
}

pub fn counted<P: ScalarProfile>(base: P) -> Counted<P> {
    Counted {
        base,
        ledger: Cell::new(OpCountLedger::default()),
    }
}

impl<P> Counted<P> {
    pub fn ledger(&self) -> OpCountLedger {
        self.ledger.get()
    }

    pub fn reset(&self) {
        self.ledger.set(OpCountLedger::default());
    }

    pub fn base(&self) -> &P {
        &self.base
    }

    pub fn into_inner(self) -> (P, OpCountLedger) {
        let ledger = self.ledger.get();
        (self.base, ledger)
    }

    fn bump(&self, f: impl FnOnce(&mut OpCountLedger)) {
        let mut l = self.ledger.get();
        f(&mut l);
        self.ledger.set(l);
    }
}

impl<P: ScalarProfile> ScalarProfile for Counted<P> {
    type Value = P::Value;

    fn zero(&self) -> P::Value {
        self.base.zero()
    }
    fn one(&self) -> P::Value {
        self.base.one()
    }
    fn add(&self, a: &P::Value, b: &P::Value) -> P::Value {
        self.bump(|l| l.addsub += 1);
        self.base.add(a, b)
    }
    fn sub(&self, a: &P::Value, b: &P::Value) -> P::Value {
        self.bump(|l| l.addsub += 1);
        self.base.sub(a, b)
    }
    fn mul(&self, a: &P::Value, b: &P::Value) -> P::Value {
        self.bump(|l| l.mul += 1);
        self.base.mul(a, b)
    }
    fn square(&self, a: &P::Value) -> P::Value {
        self.bump(|l| l.square += 1);
        self.base.square(a)
    }
    fn double(&self, a: &P::Value) -> P::Value {
        self.bump(|l| l.double += 1);
        self.base.double(a)
    }
    fn halve(&self, a: &P::Value) -> P::Value {
        self.bump(|l| l.halve += 1);
        self.base.halve(a)
    }
}
