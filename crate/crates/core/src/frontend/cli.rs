//! The `cak` command line.
//!
//! Exit codes: 0 when the property holds, 1 when it fails, 2 on bad input
//! (including an empty language), 3 when the solver exceeds its node budget.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::agreement::{admits_agreement, is_safe, liable, mpc, AgreementError, Liability};
use crate::automaton::{a_product, product, ContractAutomaton};
use crate::logic::{ill_honoured, pcl_entails_lambda, pcl_weak_entails, LogicError};
use crate::weak::{
    admits_weak_agreement, is_weakly_safe, weakly_liable, WeakError, WeakOptions, WeakVerdict,
};

use super::document::{render_dot, AutomatonDocument};
use super::dsl::parse_principal;
use super::formula::{parse_gamma, parse_pcl, parse_z};
use super::report::{actions, Blame, Flagged, Principal, Report, Value};

#[derive(Parser, Debug)]
#[command(name = "cak", version, about = "Analyse contract automata")]
struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compose automata; principal names are concatenated.
    Compose {
        #[arg(long, value_enum, default_value_t = Op::Product)]
        op: Op,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Extract the i-th principal (1-based).
    Project {
        #[arg(short)]
        i: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
        file: PathBuf,
    },
    /// Synthesise the most permissive controller; fails when it is empty.
    Mpc {
        #[arg(short, long)]
        output: Option<PathBuf>,
        file: PathBuf,
    },
    /// Decide agreement, safety or their weak variants.
    Check {
        #[arg(value_enum)]
        property: Property,
        file: PathBuf,
        /// Bound on the uses of each transition, for the weak properties.
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Liable principals; fails when there are any.
    Liable { file: PathBuf },
    /// Weakly liable transitions and principals; fails when there are any.
    WeakLiable {
        #[arg(long)]
        cap: Option<u64>,
        file: PathBuf,
    },
    /// Entailment of every atom of a propositional contract formula.
    Pcl {
        #[arg(value_enum)]
        mode: PclMode,
        formula: String,
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Whether a multiset of linear Horn clauses proves Z with no debt left.
    Ill {
        #[arg(value_enum)]
        mode: IllMode,
        gamma: String,
        #[arg(default_value = "")]
        z: String,
    },
    /// Accepted traces up to a length.
    Traces {
        #[arg(long)]
        max_len: usize,
        file: PathBuf,
    },
    /// Graphviz rendering.
    Dot { file: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Op {
    Product,
    Aproduct,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Property {
    Agreement,
    Safety,
    WeakSafety,
    WeakAgreement,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PclMode {
    Entails,
    WeakEntails,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum IllMode {
    Honoured,
}

enum Failure {
    Input(String),
    Cap(u64),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

fn weak_failure(e: WeakError) -> Failure {
    match e {
        WeakError::CapExceeded { nodes } => Failure::Cap(nodes),
        e => Failure::Input(e.to_string()),
    }
}

fn logic_failure(e: LogicError) -> Failure {
    match e {
        LogicError::Weak(e) => weak_failure(e),
        e => Failure::Input(e.to_string()),
    }
}

struct Loaded {
    automaton: ContractAutomaton,
    names: Vec<String>,
}

/// JSON documents by extension; anything else is a principal expression
/// named after the file.
fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let context = |e: &dyn std::fmt::Display| Failure::Input(format!("{}: {e}", path.display()));
    if path.extension().is_some_and(|e| e == "json") {
        let doc = AutomatonDocument::from_json(&text).map_err(|e| context(&e))?;
        let automaton = doc.to_automaton().map_err(|e| context(&e))?;
        Ok(Loaded { automaton, names: doc.names() })
    } else {
        let automaton = parse_principal(text.trim()).map_err(|e| context(&e))?;
        let stem = path.file_stem().map_or("1".into(), |s| s.to_string_lossy().into_owned());
        Ok(Loaded { automaton, names: vec![stem] })
    }
}

fn nonempty(l: &Loaded) -> Result<(), Failure> {
    if l.automaton.language_is_empty() {
        return Err(Failure::Input("the automaton accepts no trace".into()));
    }
    Ok(())
}

fn emit(report: &mut Report, a: &ContractAutomaton, names: Vec<String>, output: Option<PathBuf>) -> Result<(), Failure> {
    let doc = AutomatonDocument::from_automaton(a, Some(names));
    match output {
        Some(path) => {
            std::fs::write(&path, doc.to_json() + "\n")?;
        }
        None => report.automaton = Some(doc),
    }
    Ok(())
}

fn blame(report: &mut Report, l: &Liability, names: &[String]) {
    report.liable = Some(l.principals.iter().map(|&i| Principal::new(i, names)).collect());
    report.blame = l
        .witnesses
        .iter()
        .map(|(&i, w)| Blame {
            principal: Principal::new(i, names),
            prefix: actions(&w.prefix),
            state: w.state.to_string(),
            action: w.action.to_string(),
        })
        .collect();
}

fn weak_report(report: &mut Report, v: &WeakVerdict) {
    report.holds = Some(v.holds);
    report.gamma = Some(Value::from(&v.gamma));
    report.action = v.name.clone();
    report.cap = Some(v.cap);
    report.witness = Some(actions(&v.witness_trace));
}

fn code(holds: bool) -> i32 {
    if holds {
        0
    } else {
        1
    }
}

fn execute(command: Command, report: &mut Report) -> Result<i32, Failure> {
    let agreement = |e: AgreementError| Failure::Input(e.to_string());
    match command {
        Command::Compose { op, output, files } => {
            let loaded = files.iter().map(|f| load(f)).collect::<Result<Vec<_>, _>>()?;
            let refs: Vec<&ContractAutomaton> = loaded.iter().map(|l| &l.automaton).collect();
            let a = match op {
                Op::Product => product(&refs)?,
                Op::Aproduct => a_product(&refs)?,
            };
            let names = loaded.into_iter().flat_map(|l| l.names).collect();
            emit(report, &a, names, output)?;
            Ok(0)
        }
        Command::Project { i, output, file } => {
            let l = load(&file)?;
            let a = l.automaton.projection(i)?;
            let name = l.names.get(i - 1).cloned().unwrap_or_else(|| i.to_string());
            emit(report, &a, vec![name], output)?;
            Ok(0)
        }
        Command::Mpc { output, file } => {
            let l = load(&file)?;
            let m = mpc(&l.automaton);
            let holds = !m.is_empty();
            report.holds = Some(holds);
            let reach = l.automaton.reachable();
            report.hanged = Some(
                m.hanged
                    .iter()
                    .filter(|s| l.automaton.state_index(s).is_some_and(|q| reach[q]))
                    .map(|s| s.to_string())
                    .collect(),
            );
            emit(report, &m.controller.trim(), l.names, output)?;
            Ok(code(holds))
        }
        Command::Check { property, file, cap } => {
            let l = load(&file)?;
            nonempty(&l)?;
            let options = WeakOptions { cap, ..Default::default() };
            let holds = match property {
                Property::Agreement => {
                    let v = admits_agreement(&l.automaton).map_err(agreement)?;
                    report.witness = v.witness.as_ref().map(actions);
                    v.holds
                }
                Property::Safety => {
                    let v = is_safe(&l.automaton).map_err(agreement)?;
                    report.counterexample = v.counterexample.as_ref().map(actions);
                    if !v.holds {
                        blame(report, &liable(&l.automaton).map_err(agreement)?, &l.names);
                    }
                    v.holds
                }
                Property::WeakSafety => {
                    let v = is_weakly_safe(&l.automaton, &options).map_err(weak_failure)?;
                    weak_report(report, &v);
                    v.holds
                }
                Property::WeakAgreement => {
                    let v = admits_weak_agreement(&l.automaton, &options).map_err(weak_failure)?;
                    weak_report(report, &v);
                    v.holds
                }
            };
            report.holds = Some(holds);
            Ok(code(holds))
        }
        Command::Liable { file } => {
            let l = load(&file)?;
            nonempty(&l)?;
            let lia = liable(&l.automaton).map_err(agreement)?;
            blame(report, &lia, &l.names);
            let holds = lia.principals.is_empty();
            report.holds = Some(holds);
            Ok(code(holds))
        }
        Command::WeakLiable { cap, file } => {
            let l = load(&file)?;
            let w = weakly_liable(&l.automaton, &WeakOptions { cap, ..Default::default() })
                .map_err(weak_failure)?;
            report.cap = Some(w.cap);
            report.liable = Some(w.principals.iter().map(|&i| Principal::new(i, &l.names)).collect());
            report.flagged = w
                .flagged
                .iter()
                .map(|f| Flagged {
                    from: f.from.to_string(),
                    label: f.label.to_string(),
                    to: f.to.to_string(),
                    gamma: Value::from(&f.gamma),
                    principals: f.principals.iter().map(|&i| Principal::new(i, &l.names)).collect(),
                    prefix: actions(&f.prefix),
                })
                .collect();
            let holds = w.flagged.is_empty();
            report.holds = Some(holds);
            Ok(code(holds))
        }
        Command::Pcl { mode, formula, cap } => {
            let p = parse_pcl(&formula)?;
            let holds = match mode {
                PclMode::Entails => {
                    let v = pcl_entails_lambda(&p).map_err(logic_failure)?;
                    report.witness = v.witness.as_ref().map(actions);
                    v.holds
                }
                PclMode::WeakEntails => {
                    let options = WeakOptions { cap, ..Default::default() };
                    let v = pcl_weak_entails(&p, &options).map_err(logic_failure)?;
                    weak_report(report, &v);
                    v.holds
                }
            };
            report.holds = Some(holds);
            Ok(code(holds))
        }
        Command::Ill { mode: IllMode::Honoured, gamma, z } => {
            let h = ill_honoured(&parse_gamma(&gamma)?, &parse_z(&z)?).map_err(logic_failure)?;
            report.holds = Some(h.holds);
            report.witness = h.witness.as_ref().map(actions);
            Ok(code(h.holds))
        }
        Command::Traces { max_len, file } => {
            let l = load(&file)?;
            report.traces = Some(l.automaton.enumerate_traces(max_len).iter().map(actions).collect());
            Ok(0)
        }
        Command::Dot { file } => {
            report.dot = Some(render_dot(&load(&file)?.automaton));
            Ok(0)
        }
    }
}

fn operation(command: &Command) -> String {
    match command {
        Command::Compose { op: Op::Product, .. } => "compose product".into(),
        Command::Compose { op: Op::Aproduct, .. } => "compose aproduct".into(),
        Command::Project { i, .. } => format!("project {i}"),
        Command::Mpc { .. } => "mpc".into(),
        Command::Check { property, .. } => {
            format!("check {}", property.to_possible_value().expect("no skipped values").get_name())
        }
        Command::Liable { .. } => "liable".into(),
        Command::WeakLiable { .. } => "weak-liable".into(),
        Command::Pcl { mode, .. } => format!("pcl {}", mode.to_possible_value().expect("no skipped values").get_name()),
        Command::Ill { .. } => "ill honoured".into(),
        Command::Traces { .. } => "traces".into(),
        Command::Dot { .. } => "dot".into(),
    }
}

/// Runs one command and returns its exit code. The report goes to `out`,
/// diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let mut report = Report::new(operation(&cli.command));
    let status = match execute(cli.command, &mut report) {
        Ok(code) => code,
        Err(Failure::Input(message)) => {
            report.error = Some(message);
            2
        }
        Err(Failure::Cap(nodes)) => {
            report.error = Some(format!(
                "branch and bound gave up after {nodes} nodes; raise CAK_NODE_BUDGET or lower --cap"
            ));
            3
        }
    };
    let text = if cli.json { report.to_json() + "\n" } else { report.to_text() };
    let sink: &mut dyn Write = if status >= 2 && !cli.json { err } else { out };
    let _ = sink.write_all(text.as_bytes());
    status
}
