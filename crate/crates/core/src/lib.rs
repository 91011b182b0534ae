pub mod aux;
pub mod class_graph;
pub mod concrete;
pub mod domain;
pub mod frontend;
pub mod report;
pub mod semantics;
pub mod session;
pub mod soundness;
