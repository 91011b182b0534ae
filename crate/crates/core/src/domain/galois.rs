use super::state::{normalize, AbstractState, Universe};
use crate::concrete::ConcreteState;

/// Statements witnessed by some state, restricted to the universe.
pub fn alpha_rc<'s>(states: impl IntoIterator<Item = &'s ConcreteState>, u: &dyn Universe) -> AbstractState {
    let mut reach = std::collections::BTreeSet::new();
    let mut cyclic = std::collections::BTreeSet::new();
    for s in states {
        let (r, c) = s.witnessed();
        reach.extend(r);
        cyclic.extend(c);
    }
    normalize(reach, cyclic, u)
}

/// Whether `s` is described by `i`: every path between variables is licensed
/// by a reach statement and every variable leading to a cycle is licensed by
/// a cyclicity statement.
pub fn gamma_contains(i: &AbstractState, s: &ConcreteState) -> bool {
    let (r, c) = s.witnessed();
    r.is_subset(&i.reach) && c.is_subset(&i.cyclic)
}
