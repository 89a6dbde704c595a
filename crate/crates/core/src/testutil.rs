//! Shared fixtures for unit tests.

use std::sync::OnceLock;

use crate::action::TableSet;
use crate::fiber::{full_fiber, FiberOptions, LabeledFiber};
use crate::lift::{Embedding, LiftOptions};
use crate::reference::Reference;

pub fn fiber(n: usize) -> &'static LabeledFiber {
    static F2: OnceLock<LabeledFiber> = OnceLock::new();
    static F3: OnceLock<LabeledFiber> = OnceLock::new();
    let cell = if n == 2 { &F2 } else { &F3 };
    cell.get_or_init(|| {
        let r = Reference::for_n(n).unwrap();
        full_fiber(&r.base(), &FiberOptions::default(), Some(&r)).unwrap()
    })
}

pub fn tables(n: usize) -> &'static TableSet {
    static T2: OnceLock<TableSet> = OnceLock::new();
    static T3: OnceLock<TableSet> = OnceLock::new();
    let cell = if n == 2 { &T2 } else { &T3 };
    cell.get_or_init(|| TableSet::build(fiber(n), Embedding::Roots, &LiftOptions::default()).unwrap())
}
