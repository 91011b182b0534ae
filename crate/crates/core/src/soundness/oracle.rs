use std::collections::BTreeSet;

use crate::aux::FactTable;
use crate::concrete::{reachable_locations_eps, ConcreteState, Frame, Heap, HeapReach, Observer, Value};
use crate::domain::RHO;
use crate::frontend::{Command, MethodDecl, Pos};

/// Checks the auxiliary facts against a concrete execution: sharing and
/// aliasing before each command and after its expression, and purity on
/// method exit.
pub struct AuxOracle<'a> {
    facts: &'a FactTable,
    known: BTreeSet<(String, Pos)>,
    /// Reachability of the last heap seen; loops mostly leave the heap alone.
    cache: Option<(Heap, HeapReach)>,
    pub checks: usize,
    pub violations: Vec<String>,
}

impl<'a> AuxOracle<'a> {
    pub fn new(facts: &'a FactTable) -> Self {
        AuxOracle {
            facts,
            known: facts.points().map(|(k, _)| k.clone()).collect(),
            cache: None,
            checks: 0,
            violations: Vec::new(),
        }
    }

    fn reach(&mut self, heap: &Heap) -> &HeapReach {
        if self.cache.as_ref().is_none_or(|(h, _)| h != heap) {
            self.cache = Some((heap.clone(), HeapReach::new(heap)));
        }
        &self.cache.as_ref().unwrap().1
    }

    fn locs(frame: &Frame) -> Vec<(&String, usize)> {
        frame.iter().filter_map(|(v, x)| x.loc().map(|l| (v, l))).collect()
    }
}

impl Observer for AuxOracle<'_> {
    fn before(&mut self, m: &MethodDecl, c: &Command, frame: &Frame, heap: &Heap) {
        let sig = m.sig();
        if !self.known.contains(&(sig.clone(), c.pos)) {
            return;
        }
        let facts = self.facts;
        let pre = &facts.point(&sig, c.pos).pre;
        let hr = self.reach(heap);
        let mut bad = Vec::new();
        let locs = Self::locs(frame);
        for (i, &(v, a)) in locs.iter().enumerate() {
            for &(w, b) in &locs[i + 1..] {
                if a == b && !pre.aliases(v, w) {
                    bad.push(format!("{sig} @ {}: al({v},{w}) missing", c.pos));
                } else if hr.share(a, b) && !pre.shares(v, w) {
                    bad.push(format!("{sig} @ {}: sh({v},{w}) missing", c.pos));
                }
            }
        }
        self.checks += locs.len() * locs.len().saturating_sub(1) / 2;
        self.violations.extend(bad);
    }

    fn after_exp(&mut self, m: &MethodDecl, c: &Command, frame: &Frame, heap: &Heap, rho: Value) {
        let sig = m.sig();
        let Some(r) = rho.loc() else { return };
        if !self.known.contains(&(sig.clone(), c.pos)) {
            return;
        }
        let facts = self.facts;
        let exp = &facts.point(&sig, c.pos).exp;
        let locs = Self::locs(frame);
        let hr = self.reach(heap);
        let mut bad = Vec::new();
        for &(w, b) in &locs {
            if r == b && !exp.aliases(RHO, w) {
                bad.push(format!("{sig} @ {}: al(ρ,{w}) missing", c.pos));
            } else if hr.share(r, b) && !exp.shares(RHO, w) {
                bad.push(format!("{sig} @ {}: sh(ρ,{w}) missing", c.pos));
            }
        }
        self.checks += locs.len();
        self.violations.extend(bad);
    }

    fn wants_exit(&self) -> bool {
        true
    }

    /// Every pre-existing object the call changed must lie below some
    /// argument marked non-pure. An argument that aliases a non-pure one is
    /// covered by it; the call rule reaches it through the sharing facts.
    fn on_exit(&mut self, m: &MethodDecl, entry: &ConcreteState, exit_heap: &Heap) {
        let sig = m.sig();
        let nonpure = self.facts.nonpure(&sig);
        let mut inputs = vec![(0, "this".to_string())];
        inputs.extend(m.params.iter().enumerate().map(|(i, p)| (i + 1, p.name.clone())));
        let mut covered = BTreeSet::new();
        let mut below_args = BTreeSet::new();
        for (idx, v) in &inputs {
            let Some(l) = entry.frame.get(v).and_then(|x| x.loc()) else { continue };
            let r = reachable_locations_eps(&entry.heap, l);
            if nonpure.contains(idx) {
                covered.extend(r.iter().copied());
            }
            below_args.extend(r);
        }
        for o in below_args {
            self.checks += 1;
            if entry.heap[o].fields != exit_heap[o].fields && !covered.contains(&o) {
                self.violations.push(format!("{sig}: ℓ{o} below an argument updated, no non-pure argument reaches it"));
            }
        }
    }
}
