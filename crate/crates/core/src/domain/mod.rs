//! The reachability/cyclicity reduced product.

mod galois;
mod state;

pub use galois::{alpha_rc, gamma_contains};
pub use state::{normalize, AbstractState, shallow, unshallow, Scope, Universe, RHO};
