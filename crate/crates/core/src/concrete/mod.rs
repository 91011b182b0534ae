//! Concrete states, the bounded interpreter and small-heap enumeration.

mod enumerate;
mod interp;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write};

pub use enumerate::{enumerate_states, for_each_state, random_state, EnumConfig};
pub use interp::{ExecOutcome, Fault, Interp, Observer, DEFAULT_BUDGET};

pub type Loc = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Null,
    Loc(Loc),
}

impl Value {
    pub fn loc(self) -> Option<Loc> {
        match self {
            Value::Loc(l) => Some(l),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Null => f.write_str("null"),
            Value::Loc(l) => write!(f, "ℓ{l}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Object {
    pub class: String,
    pub fields: BTreeMap<String, Value>,
}

pub type Frame = BTreeMap<String, Value>;
pub type Heap = Vec<Object>;

/// A frame and a heap; locations index the heap vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ConcreteState {
    pub frame: Frame,
    pub heap: Heap,
}

/// Locations reachable from `l` by paths of length ≥ 1.
pub fn reachable_locations(heap: &Heap, l: Loc) -> BTreeSet<Loc> {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<Loc> = successors(heap, l).collect();
    while let Some(x) = stack.pop() {
        if seen.insert(x) {
            stack.extend(successors(heap, x));
        }
    }
    seen
}

/// Locations reachable from `l` by paths of length ≥ 0.
pub fn reachable_locations_eps(heap: &Heap, l: Loc) -> BTreeSet<Loc> {
    let mut r = reachable_locations(heap, l);
    r.insert(l);
    r
}

fn successors(heap: &Heap, l: Loc) -> impl Iterator<Item = Loc> + '_ {
    heap[l].fields.values().filter_map(|v| v.loc())
}

/// Memoized reachability over one heap, used by the oracle checks.
pub struct HeapReach {
    reach: Vec<BTreeSet<Loc>>,
}

impl HeapReach {
    pub fn new(heap: &Heap) -> Self {
        HeapReach {
            reach: (0..heap.len()).map(|l| reachable_locations(heap, l)).collect(),
        }
    }

    pub fn reaches(&self, a: Loc, b: Loc) -> bool {
        self.reach[a].contains(&b)
    }

    pub fn on_cycle(&self, a: Loc) -> bool {
        self.reach[a].contains(&a)
    }

    pub fn cyclic_from(&self, a: Loc) -> bool {
        self.on_cycle(a) || self.reach[a].iter().any(|&l| self.on_cycle(l))
    }

    pub fn share(&self, a: Loc, b: Loc) -> bool {
        a == b || self.reaches(a, b) || self.reaches(b, a) || self.reach[a].iter().any(|l| self.reach[b].contains(l))
    }
}

impl ConcreteState {
    fn loc_of(&self, v: &str) -> Option<Loc> {
        self.frame.get(v).and_then(|x| x.loc())
    }

    pub fn reaches_in(&self, v: &str, w: &str) -> bool {
        match (self.loc_of(v), self.loc_of(w)) {
            (Some(a), Some(b)) => reachable_locations(&self.heap, a).contains(&b),
            _ => false,
        }
    }

    pub fn cyclic_in(&self, v: &str) -> bool {
        let Some(a) = self.loc_of(v) else { return false };
        reachable_locations_eps(&self.heap, a)
            .into_iter()
            .any(|l| reachable_locations(&self.heap, l).contains(&l))
    }

    pub fn shares_in(&self, v: &str, w: &str) -> bool {
        match (self.loc_of(v), self.loc_of(w)) {
            (Some(a), Some(b)) => {
                let ra = reachable_locations_eps(&self.heap, a);
                reachable_locations_eps(&self.heap, b).iter().any(|l| ra.contains(l))
            }
            _ => false,
        }
    }

    pub fn aliases_in(&self, v: &str, w: &str) -> bool {
        matches!((self.loc_of(v), self.loc_of(w)), (Some(a), Some(b)) if a == b)
    }

    /// Reach pairs and cyclic variables actually exhibited by this state.
    pub fn witnessed(&self) -> (BTreeSet<(String, String)>, BTreeSet<String>) {
        let hr = HeapReach::new(&self.heap);
        let locs: Vec<(&String, Loc)> = self
            .frame
            .iter()
            .filter_map(|(v, x)| x.loc().map(|l| (v, l)))
            .collect();
        let mut reach = BTreeSet::new();
        let mut cyclic = BTreeSet::new();
        for &(v, a) in &locs {
            if hr.cyclic_from(a) {
                cyclic.insert(v.clone());
            }
            for &(w, b) in &locs {
                if hr.reaches(a, b) {
                    reach.insert((v.clone(), w.clone()));
                }
            }
        }
        (reach, cyclic)
    }

    /// `ℓi: C {f: ℓj|null|n}` lines, preceded by the frame.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (v, x) in &self.frame {
            writeln!(out, "{v} = {x}").unwrap();
        }
        for (l, o) in self.heap.iter().enumerate() {
            let fields: Vec<String> = o.fields.iter().map(|(f, x)| format!("{f}: {x}")).collect();
            writeln!(out, "ℓ{l}: {} {{{}}}", o.class, fields.join(", ")).unwrap();
        }
        out
    }

    /// Frame and heap closure conditions: every location mentioned exists.
    pub fn is_closed(&self) -> bool {
        let ok = |x: &Value| x.loc().is_none_or(|l| l < self.heap.len());
        self.frame.values().all(ok) && self.heap.iter().all(|o| o.fields.values().all(ok))
    }
}
