use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cyclescope::concrete::{ConcreteState, Interp, Object, Value};
use cyclescope::report::{render_json, render_text};
use cyclescope::semantics::Options;
use cyclescope::session::Session;
use cyclescope::soundness::{check_random, check_session, CheckConfig, CheckReport, GenConfig};

#[derive(Parser)]
#[command(name = "cyclescope", version, about = "Reachability and cyclicity analysis for .oo programs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Clone, Copy, ValueEnum)]
enum InputKind {
    /// Every admissible statement, cycles included.
    Top,
    /// Every admissible reach statement between distinct inputs, no cycles.
    Acyclic,
    /// Disjoint acyclic inputs.
    Empty,
}

#[derive(Subcommand)]
enum Cmd {
    /// Per-line reach and cyclicity facts.
    Analyze {
        file: PathBuf,
        /// Override file for sharing, aliasing and purity facts.
        #[arg(long)]
        facts: Option<PathBuf>,
        /// Analyze only this method (and its callees); `Class.name` or a unique name.
        #[arg(long)]
        entry: Option<String>,
        #[arg(long)]
        no_single_field_opt: bool,
        /// Diagnostic mode without shallow copies of the formals (unsound).
        #[arg(long)]
        no_shallow: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Input state for the analyzed methods.
        #[arg(long, value_enum, default_value = "acyclic")]
        input: InputKind,
    },
    /// Runs a method from an all-null/zero state and dumps the result.
    Run {
        file: PathBuf,
        #[arg(long)]
        entry: String,
        /// Values returned by successive `read()` calls.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        inputs: Vec<i64>,
    },
    /// Compares summaries against concrete runs on small input heaps.
    CheckSoundness {
        /// Program to check; every method is run from enumerated inputs.
        #[arg(required_unless_present = "random", conflicts_with = "random")]
        file: Option<PathBuf>,
        /// Check this many random programs instead.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 3)]
        heap_bound: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Input states per method when enumeration would exceed it.
        #[arg(long, default_value_t = 2000)]
        states: usize,
        /// Run on the calling thread only.
        #[arg(long)]
        sequential: bool,
    },
    /// Class graph edges (`A -f-> B`) and cyclic classes.
    DumpClassGraph { file: PathBuf },
}

fn load(file: &Path) -> Result<Session, ExitCode> {
    Session::from_file(file).map_err(|e| {
        eprintln!("{e}");
        ExitCode::from(1)
    })
}

fn resolve(s: &Session, file: &Path, name: &str) -> Result<String, ExitCode> {
    s.resolve(name).map_err(|e| {
        eprintln!("{}: {e}", file.display());
        ExitCode::from(1)
    })
}

fn analyze(
    file: &Path,
    facts: Option<&Path>,
    entry: Option<&str>,
    opts: Options,
    format: Format,
    input: InputKind,
) -> Result<(), ExitCode> {
    let mut s = load(file)?;
    if let Some(f) = facts {
        s.apply_facts_file(f).map_err(|e| {
            eprintln!("{e}");
            ExitCode::from(1)
        })?;
    }
    let sigs = match entry {
        Some(m) => vec![resolve(&s, file, m)?],
        None => s.tp.methods().map(|m| m.sig()).collect(),
    };
    let mut an = s.analyzer(opts);
    let requests: Vec<_> = sigs
        .into_iter()
        .map(|sig| {
            let i = match input {
                InputKind::Top => an.most_general_input(&sig, true),
                InputKind::Acyclic => an.most_general_input(&sig, false),
                InputKind::Empty => Default::default(),
            };
            (sig, i)
        })
        .collect();
    an.solve(&requests);
    let r = an.result();
    match format {
        Format::Text => print!("{}", render_text(&r)),
        Format::Structured => println!("{:#}", render_json(&r)),
    }
    Ok(())
}

fn run(file: &Path, entry: &str, inputs: &[i64]) -> Result<(), ExitCode> {
    let s = load(file)?;
    let sig = resolve(&s, file, entry)?;
    let m = s.tp.method(&sig).expect("resolved");
    // a fresh receiver; everything else null or zero
    let mut st = ConcreteState::default();
    st.heap.push(Object {
        class: m.class.clone(),
        fields: s
            .tp
            .all_fields(&m.class)
            .iter()
            .map(|f| (f.name.clone(), if f.ty.is_ref() { Value::Null } else { Value::Int(0) }))
            .collect(),
    });
    st.frame.insert("this".into(), Value::Loc(0));
    match Interp::new(&s.tp).with_input(inputs.iter().copied()).run(&sig, &st) {
        Ok(o) => {
            print!("{}", o.final_state().dump());
            Ok(())
        }
        Err(e) => {
            eprintln!("{}: {e}", file.display());
            Err(ExitCode::from(1))
        }
    }
}

fn print_check(r: &CheckReport) {
    println!("programs: {}", r.programs);
    println!("samples: {}", r.samples);
    println!("skipped (nonterminating): {}", r.skipped);
    println!("faults (null dereference): {}", r.faults);
    println!("violations: {}", r.violations.len());
    println!("aux checks: {}", r.aux_checks);
    println!("aux violations: {}", r.aux_violations.len());
    for v in &r.violations {
        println!("--- violation in {}", v.method);
        println!("input state:\n{}", v.input.trim_end());
        println!("abstract input: {}", v.abstract_input);
        println!("summary: {}", v.summary);
        println!("observed: {}", v.observed);
    }
    for v in &r.aux_violations {
        println!("--- aux violation: {v}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Analyze {
            file,
            facts,
            entry,
            no_single_field_opt,
            no_shallow,
            format,
            input,
        } => {
            let opts = Options {
                single_field_opt: !no_single_field_opt,
                shallow: !no_shallow,
            };
            analyze(&file, facts.as_deref(), entry.as_deref(), opts, format, input)
        }
        Cmd::Run { file, entry, inputs } => run(&file, &entry, &inputs),
        Cmd::CheckSoundness {
            file,
            random,
            heap_bound,
            seed,
            states,
            sequential,
        } => {
            let cfg = CheckConfig {
                heap_bound,
                states_per_method: states,
                parallel: !sequential && cfg!(feature = "parallel"),
                ..CheckConfig::default()
            };
            let report = match (file, random) {
                (_, Some(n)) => Ok(check_random(n, seed, &GenConfig::default(), &cfg)),
                (Some(f), None) => load(&f).map(|s| check_session(&s, &cfg, seed)),
                (None, None) => unreachable!("clap requires one of them"),
            };
            report.and_then(|r| {
                print_check(&r);
                if r.ok() {
                    Ok(())
                } else {
                    Err(ExitCode::from(2))
                }
            })
        }
        Cmd::DumpClassGraph { file } => load(&file).map(|s| print!("{}", s.graph.dump())),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(c) => c,
    }
}
