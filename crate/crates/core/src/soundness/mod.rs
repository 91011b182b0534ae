//! Differential check of the abstract semantics against the interpreter.
//!
//! For a method `m` and an input state σ1, the summary of `m` at α(σ1) must
//! describe the state that binds the inputs to their entry values and `out`
//! to the result, over the final heap.

mod gen;
mod oracle;

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use gen::{random_program, GenConfig};
pub use oracle::AuxOracle;

use crate::concrete::{for_each_state, random_state, ConcreteState, EnumConfig, Fault, Interp, DEFAULT_BUDGET};
use crate::domain::{alpha_rc, gamma_contains, AbstractState};
use crate::frontend::{TypeEnv, TypedProgram};
use crate::semantics::Options;
use crate::session::Session;

#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub heap_bound: usize,
    /// Inputs per method: all enumerated states if there are at most this
    /// many, otherwise this many random ones.
    pub states_per_method: usize,
    pub budget: u64,
    pub opts: Options,
    /// Also check the auxiliary facts during each run.
    pub check_aux: bool,
    /// Fan work out over threads (needs the `parallel` feature).
    pub parallel: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            heap_bound: 3,
            states_per_method: 2000,
            budget: DEFAULT_BUDGET,
            opts: Options::default(),
            check_aux: true,
            parallel: cfg!(feature = "parallel"),
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Violation {
    pub method: String,
    pub input: String,
    pub abstract_input: String,
    pub summary: String,
    pub observed: String,
}

#[derive(Debug, Clone, Default, Serialize, PartialEq, Eq)]
pub struct CheckReport {
    pub programs: usize,
    /// Runs that terminated normally and were checked.
    pub samples: usize,
    /// Runs that exhausted the step budget or call depth.
    pub skipped: usize,
    /// Runs that dereferenced null.
    pub faults: usize,
    pub violations: Vec<Violation>,
    pub aux_checks: usize,
    pub aux_violations: Vec<String>,
}

impl CheckReport {
    pub fn merge(mut self, o: CheckReport) -> CheckReport {
        self.programs += o.programs;
        self.samples += o.samples;
        self.skipped += o.skipped;
        self.faults += o.faults;
        self.violations.extend(o.violations);
        self.aux_checks += o.aux_checks;
        self.aux_violations.extend(o.aux_violations);
        self
    }

    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.aux_violations.is_empty()
    }
}

fn input_env(tp: &TypedProgram, sig: &str) -> TypeEnv {
    let m = tp.method(sig).expect("known method");
    let env = tp.env(sig);
    m.inputs().into_iter().map(|v| (v.clone(), env[&v].clone())).collect()
}

/// Input states for `sig`, with `this` bound to an object.
fn inputs_for(tp: &TypedProgram, sig: &str, cfg: &CheckConfig, rng: &mut impl Rng) -> Vec<ConcreteState> {
    let env = input_env(tp, sig);
    let ecfg = EnumConfig {
        max_locations: cfg.heap_bound,
        ..EnumConfig::default()
    };
    let has_this = |s: &ConcreteState| s.frame.get("this").and_then(|v| v.loc()).is_some();
    let mut all = Vec::new();
    let mut overflow = false;
    for_each_state(tp, &env, &ecfg, |s| {
        if has_this(&s) {
            all.push(s);
        }
        if all.len() > cfg.states_per_method {
            overflow = true;
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    if !overflow {
        return all;
    }
    let mut out = Vec::with_capacity(cfg.states_per_method);
    let mut tries = 0;
    while out.len() < cfg.states_per_method && tries < cfg.states_per_method * 20 {
        tries += 1;
        let s = random_state(tp, &env, &ecfg, rng);
        if has_this(&s) {
            out.push(s);
        }
    }
    out
}

/// Checks one method over the given inputs.
fn check_method(s: &Session, sig: &str, inputs: &[ConcreteState], cfg: &CheckConfig) -> CheckReport {
    let mut report = CheckReport::default();
    let mut an = s.analyzer(cfg.opts);
    let io = an.io_scope(sig);
    let abs: Vec<AbstractState> = inputs.iter().map(|st| alpha_rc([st], &io)).collect();
    let mut requests: Vec<(String, AbstractState)> = abs.iter().map(|a| (sig.to_string(), a.clone())).collect();
    requests.sort();
    requests.dedup();
    an.solve(&requests);
    let summaries: BTreeMap<AbstractState, AbstractState> =
        requests.into_iter().map(|(_, a)| (a.clone(), an.lookup(sig, &a))).collect();

    for (st, a) in inputs.iter().zip(&abs) {
        let mut oracle = AuxOracle::new(&s.facts);
        let mut interp = Interp::new(&s.tp).with_budget(cfg.budget).with_input([3, 1, 2]);
        if cfg.check_aux {
            interp = interp.with_observer(&mut oracle);
        }
        let outcome = interp.run(sig, st);
        report.aux_checks += oracle.checks;
        report.aux_violations.extend(oracle.violations);
        match outcome {
            Err(Fault::NullDeref(_)) => report.faults += 1,
            Err(_) => report.skipped += 1,
            Ok(o) => {
                report.samples += 1;
                let merged = o.merged_state();
                let summary = &summaries[a];
                if !gamma_contains(summary, &merged) {
                    report.violations.push(Violation {
                        method: sig.to_string(),
                        input: st.dump(),
                        abstract_input: a.to_string(),
                        summary: summary.to_string(),
                        observed: alpha_rc([&merged], &io).to_string(),
                    });
                }
            }
        }
    }
    report
}

fn map_reduce<T: Sync, F>(items: &[T], parallel: bool, f: F) -> CheckReport
where
    F: Fn(&T) -> CheckReport + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return items
            .par_iter()
            .map(&f)
            .reduce(CheckReport::default, CheckReport::merge);
    }
    let _ = parallel;
    items.iter().map(f).fold(CheckReport::default(), CheckReport::merge)
}

/// Every method of a loaded program, each from its own input states.
pub fn check_session(s: &Session, cfg: &CheckConfig, seed: u64) -> CheckReport {
    let sigs: Vec<String> = s.tp.methods().map(|m| m.sig()).collect();
    let mut r = map_reduce(&sigs, cfg.parallel, |sig| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inputs = inputs_for(&s.tp, sig, cfg, &mut rng);
        check_method(s, sig, &inputs, cfg)
    });
    r.programs = 1;
    r
}

/// `n` random programs generated from `seed`; program `i` only depends on
/// `seed` and `i`, so the result does not depend on scheduling.
pub fn check_random(n: usize, seed: u64, gen: &GenConfig, cfg: &CheckConfig) -> CheckReport {
    let ids: Vec<u64> = (0..n as u64).collect();
    map_reduce(&ids, cfg.parallel, |&i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i));
        let src = random_program(&mut rng, gen);
        let s = Session::new(&src).unwrap_or_else(|e| panic!("generated program does not type check: {e}\n{src}"));
        let inner = CheckConfig {
            parallel: false,
            ..cfg.clone()
        };
        let sigs: Vec<String> = s.tp.methods().map(|m| m.sig()).collect();
        let mut r = CheckReport {
            programs: 1,
            ..CheckReport::default()
        };
        for sig in sigs {
            let inputs = inputs_for(&s.tp, &sig, &inner, &mut rng);
            let mut one = check_method(&s, &sig, &inputs, &inner);
            for v in &mut one.violations {
                v.method = format!("{}\n--- program ---\n{src}", v.method);
            }
            r = r.merge(one);
        }
        r
    })
}
