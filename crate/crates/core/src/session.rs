//! One loaded program with its class graph and auxiliary facts.

use std::path::Path;

use crate::aux::{analyze_aux, load_fact_overrides, parse_overrides, FactTable, FactsError};
use crate::class_graph::{build_class_graph, ClassGraph};
use crate::frontend::{load, FrontendError, TypedProgram};
use crate::semantics::{Analyzer, Options};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{file}:{err}")]
    Frontend { file: String, err: FrontendError },
    #[error("{0}")]
    Facts(#[from] FactsError),
    #[error("{file}: {err}")]
    Io { file: String, err: std::io::Error },
}

pub struct Session {
    pub tp: TypedProgram,
    pub graph: ClassGraph,
    pub facts: FactTable,
}

impl Session {
    /// Parses, type checks and runs the built-in auxiliary analyses.
    pub fn new(src: &str) -> Result<Session, FrontendError> {
        let tp = load(src)?;
        let graph = build_class_graph(&tp);
        let facts = analyze_aux(&tp, &graph);
        Ok(Session { tp, graph, facts })
    }

    pub fn from_file(path: &Path) -> Result<Session, LoadError> {
        let file = path.display().to_string();
        let src = std::fs::read_to_string(path).map_err(|err| LoadError::Io { file: file.clone(), err })?;
        Session::new(&src).map_err(|err| LoadError::Frontend { file, err })
    }

    pub fn apply_facts_file(&mut self, path: &Path) -> Result<(), FactsError> {
        let ov = load_fact_overrides(path)?;
        self.facts.apply_overrides(&self.tp, &ov)
    }

    pub fn apply_facts_text(&mut self, name: &str, text: &str) -> Result<(), FactsError> {
        let ov = parse_overrides(name, text)?;
        self.facts.apply_overrides(&self.tp, &ov)
    }

    /// `Class.name` or a bare method name that is unique in the program.
    pub fn resolve(&self, name: &str) -> Result<String, String> {
        match self.tp.find_method(name).as_slice() {
            [m] => Ok(m.sig()),
            [] => Err(format!("unknown method `{name}`")),
            _ => Err(format!("ambiguous method `{name}`; use Class.name")),
        }
    }

    pub fn analyzer(&self, opts: Options) -> Analyzer<'_> {
        Analyzer::new(&self.tp, &self.graph, &self.facts, opts)
    }
}
