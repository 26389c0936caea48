//! Command-line front end for the reduction toolkit.
//!
//! Exit codes: 0 success / yes, 1 no, 2 budget exhausted, 3 usage errors,
//! 4 file or format errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use sbt_core::blocks::{assemble, behavior_graph, BlockKind};
use sbt_core::emit::{emit_permutation, is_three_permutation};
use sbt_core::perm::Permutation;
use sbt_core::sat::{
    extract_assignment, guided_collapse, normalize, parse_dimacs, parse_meta, reduce, write_meta,
    Assignment, ReductionOutput,
};
use sbt_core::search::{
    bfs_distance_oracle, collapse_search, db3_sort_decision, exact_distance, read_trace,
    replay_on_instance, replay_on_permutation, write_trace, SearchConfig, SearchError, StepTrace,
};
use sbt_core::TdtInstance;

const EXIT_YES: u8 = 0;
const EXIT_NO: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_USAGE: u8 = 3;
const EXIT_FORMAT: u8 = 4;

#[derive(Parser)]
#[command(name = "sbt3dt", version, about = "Sorting-by-transpositions reduction pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SearchOpts {
    /// Worker threads for the collapse search.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Cap on memoized dead states before giving up.
    #[arg(long, default_value_t = 10_000_000)]
    budget: usize,
}

impl SearchOpts {
    fn config(&self) -> SearchConfig {
        SearchConfig {
            memo_capacity: self.budget,
            worker_count: self.jobs,
            ..SearchConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compile a DIMACS CNF formula into a 3DT-instance.
    Reduce {
        cnf: PathBuf,
        /// Output 3DT file.
        #[arg(short, long)]
        output: PathBuf,
        /// Metadata sidecar recording blocks and wiring.
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Emit the permutation equivalent to an assembled 3DT-instance.
    EmitPerm {
        tdt: PathBuf,
        /// Metadata sidecar written by `reduce`.
        #[arg(long)]
        meta: PathBuf,
        /// Output permutation file.
        #[arg(short, long)]
        output: PathBuf,
        /// Optional layout report file.
        #[arg(long)]
        layout: Option<PathBuf>,
    },
    /// Decide whether a 3DT-instance collapses to the empty instance.
    Collapse {
        tdt: PathBuf,
        /// Write the witness trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        search: SearchOpts,
    },
    /// Compute or decide the transposition distance of a permutation.
    Sort {
        perm: PathBuf,
        #[arg(long, value_enum)]
        mode: SortMode,
        /// Depth cap for the exact solver.
        #[arg(long, default_value_t = 32)]
        max_depth: usize,
        #[command(flatten)]
        search: SearchOpts,
    },
    /// Check a permutation and a 3DT-instance for equivalence.
    CheckEquiv { tdt: PathBuf, perm: PathBuf },
    /// Export the behavior graph of a gadget block kind as DOT.
    Behavior {
        /// One of: copy, and, or, var.
        kind: String,
        #[arg(long)]
        dot: PathBuf,
    },
    /// Run the full pipeline on a formula and cross-check every step.
    Verify {
        cnf: PathBuf,
        /// Truth assignment as 0/1 bits for the original variables.
        #[arg(long)]
        assignment: Option<String>,
        #[command(flatten)]
        search: SearchOpts,
    },
    /// Replay a trace file against a 3DT-instance or a permutation.
    Replay { trace: PathBuf, target: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum SortMode {
    /// Iterative deepening to the exact distance.
    Exact,
    /// Is the distance exactly one third of the breakpoint count?
    Decision,
    /// Brute-force breadth-first oracle (small spans only).
    Oracle,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_FORMAT)
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<(), String> {
    fs::write(path, contents).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_instance(path: &Path) -> Result<TdtInstance, String> {
    TdtInstance::parse(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_permutation(path: &Path) -> Result<Permutation, String> {
    read(path)?
        .parse()
        .map_err(|e| format!("{}: {e}", path.display()))
}

fn run(command: Command) -> Result<u8, String> {
    match command {
        Command::Reduce { cnf, output, meta } => {
            let formula = parse_dimacs(&read(&cnf)?).map_err(|e| e.to_string())?;
            let normalized = normalize(&formula).map_err(|e| e.to_string())?;
            let out = reduce(&normalized).map_err(|e| e.to_string())?;
            write(&output, &out.assembling.instance.serialize())?;
            if let Some(meta_path) = meta {
                write(&meta_path, &write_meta(&out))?;
            }
            println!(
                "reduced: {} blocks, span {}, {} triples",
                out.assembling.specs.len(),
                out.assembling.instance.span(),
                out.assembling.instance.triple_count()
            );
            Ok(EXIT_YES)
        }
        Command::EmitPerm {
            tdt,
            meta,
            output,
            layout,
        } => {
            let instance = load_instance(&tdt)?;
            let specs = parse_meta(&read(&meta)?).map_err(|e| e.to_string())?;
            let assembling = assemble(specs).map_err(|e| e.to_string())?;
            if assembling.instance.canonical_key() != instance.canonical_key() {
                return Err("metadata does not rebuild the given instance".to_string());
            }
            let emitted = emit_permutation(&assembling).map_err(|e| e.to_string())?;
            write(&output, &format!("{}\n", emitted.permutation))?;
            if let Some(layout_path) = layout {
                write(&layout_path, &emitted.layout.report())?;
            }
            println!(
                "emitted: span {}, breakpoints {}, 3-permutation {}",
                emitted.permutation.span(),
                emitted.permutation.breakpoints().count(),
                is_three_permutation(&emitted.permutation)
            );
            Ok(EXIT_YES)
        }
        Command::Collapse { tdt, trace, search } => {
            let instance = load_instance(&tdt)?;
            match collapse_search(&instance, &search.config()) {
                Ok(Some(found)) => {
                    println!("collapsible in {} steps", found.len());
                    if let Some(trace_path) = trace {
                        let text = write_trace(&instance, &found).map_err(|e| e.to_string())?;
                        write(&trace_path, &text)?;
                    }
                    Ok(EXIT_YES)
                }
                Ok(None) => {
                    println!("not collapsible");
                    Ok(EXIT_NO)
                }
                Err(err) => {
                    println!("{err}");
                    Ok(EXIT_BUDGET)
                }
            }
        }
        Command::Sort {
            perm,
            mode,
            max_depth,
            search,
        } => {
            let p = load_permutation(&perm)?;
            match mode {
                SortMode::Exact => match exact_distance(&p, max_depth) {
                    Ok(d) => {
                        println!("distance {d}");
                        Ok(EXIT_YES)
                    }
                    Err(err) => {
                        println!("{err}");
                        Ok(EXIT_BUDGET)
                    }
                },
                SortMode::Decision => match db3_sort_decision(&p, &search.config()) {
                    Ok(Some(witness)) => {
                        println!(
                            "yes: sorted by {} transpositions removing three breakpoints each",
                            witness.len()
                        );
                        Ok(EXIT_YES)
                    }
                    Ok(None) => {
                        println!("no");
                        Ok(EXIT_NO)
                    }
                    Err(err) => {
                        println!("{err}");
                        Ok(EXIT_BUDGET)
                    }
                },
                SortMode::Oracle => {
                    let d = bfs_distance_oracle(&p).map_err(|e| e.to_string())?;
                    println!("distance {d}");
                    Ok(EXIT_YES)
                }
            }
        }
        Command::CheckEquiv { tdt, perm } => {
            let instance = load_instance(&tdt)?;
            let p = load_permutation(&perm)?;
            if instance.is_equivalent(&p).map_err(|e| e.to_string())? {
                println!("equivalent");
                Ok(EXIT_YES)
            } else {
                println!("not equivalent");
                Ok(EXIT_NO)
            }
        }
        Command::Behavior { kind, dot } => {
            let kind: BlockKind = kind.parse().map_err(|e| format!("{e}"))?;
            let graph = behavior_graph(kind).map_err(|e| e.to_string())?;
            write(&dot, &graph.to_dot())?;
            println!(
                "behavior graph of {kind}: {} states, {} steps",
                graph.nodes.len(),
                graph.edges.len()
            );
            Ok(EXIT_YES)
        }
        Command::Verify {
            cnf,
            assignment,
            search,
        } => verify(&cnf, assignment.as_deref(), &search.config()),
        Command::Replay { trace, target } => {
            let records = read_trace(&read(&trace)?).map_err(|e| e.to_string())?;
            let text = read(&target)?;
            if text.trim_start().starts_with("span ") {
                let instance =
                    TdtInstance::parse(&text).map_err(|e| format!("{}: {e}", target.display()))?;
                let end = replay_on_instance(&instance, &records).map_err(|e| e.to_string())?;
                println!("replayed {} steps; final word:", records.len());
                println!("{}", end.serialize());
            } else {
                let p: Permutation =
                    text.parse().map_err(|e| format!("{}: {e}", target.display()))?;
                let end = replay_on_permutation(&p, &records).map_err(|e| e.to_string())?;
                println!("replayed {} moves; final permutation:", records.len());
                println!("{end}");
            }
            Ok(EXIT_YES)
        }
    }
}

fn parse_assignment(bits: &str, num_vars: usize) -> Result<Assignment, String> {
    if bits.len() != num_vars {
        return Err(format!(
            "assignment has {} bits, formula has {num_vars} variables",
            bits.len()
        ));
    }
    let mut values = Vec::with_capacity(num_vars);
    for ch in bits.chars() {
        match ch {
            '0' => values.push(false),
            '1' => values.push(true),
            other => return Err(format!("assignment bit {other:?} is not 0 or 1")),
        }
    }
    Ok(Assignment::from_bits(&values))
}

struct Check {
    name: &'static str,
    passed: bool,
}

/// Runs the whole pipeline on one formula and cross-checks both directions
/// of the equivalence. Exit status is nonzero exactly when a check fails.
fn verify(cnf: &Path, assignment: Option<&str>, cfg: &SearchConfig) -> Result<u8, String> {
    let started = Instant::now();
    let formula = parse_dimacs(&read(cnf)?).map_err(|e| e.to_string())?;
    let normalized = normalize(&formula).map_err(|e| e.to_string())?;
    let out = reduce(&normalized).map_err(|e| e.to_string())?;
    let n = out.assembling.instance.span();
    println!("formula: {} variables, {} clauses", formula.num_vars, formula.gamma());
    println!(
        "normalized: {} variables, {} clauses",
        normalized.num_vars,
        normalized.gamma()
    );
    println!(
        "instance: {} blocks, span {n}, {} triples",
        out.assembling.specs.len(),
        out.assembling.instance.triple_count()
    );

    let model = match assignment {
        Some(bits) => {
            let given = parse_assignment(bits, formula.num_vars)?;
            if !given.satisfies(&normalized) {
                println!("given assignment does not satisfy the formula");
                return Ok(EXIT_NO);
            }
            Some(given)
        }
        None => normalized.satisfiable(),
    };
    println!(
        "satisfiable: {}",
        if model.is_some() { "yes" } else { "no" }
    );

    let emitted = emit_permutation(&out.assembling).map_err(|e| e.to_string())?;
    println!("permutation: span {}, d_b {}", n, emitted.permutation.breakpoints().count());

    let mut checks = vec![
        Check {
            name: "emitted permutation is equivalent to the instance",
            passed: out
                .assembling
                .instance
                .is_equivalent(&emitted.permutation)
                .map_err(|e| e.to_string())?,
        },
        Check {
            name: "emitted permutation has a breakpoint at every position",
            passed: emitted.permutation.breakpoints().count() == n,
        },
        Check {
            name: "emitted permutation splits into 3-cycles",
            passed: is_three_permutation(&emitted.permutation),
        },
    ];

    let collapse = collapse_search(&out.assembling.instance, cfg);
    let decision = db3_sort_decision(&emitted.permutation, cfg);
    if matches!(collapse, Err(SearchError::BudgetExhausted { .. }))
        || matches!(decision, Err(SearchError::BudgetExhausted { .. }))
    {
        println!("outcome: budget-exhausted");
        return Ok(EXIT_BUDGET);
    }
    let collapse = collapse.map_err(|e| e.to_string())?;
    let decision = decision.map_err(|e| e.to_string())?;
    println!(
        "collapse search: {}",
        match &collapse {
            Some(trace) => format!("yes ({} steps)", trace.len()),
            None => "no".to_string(),
        }
    );
    println!(
        "d_b/3 sorting: {}",
        match &decision {
            Some(moves) => format!("yes ({} moves)", moves.len()),
            None => "no".to_string(),
        }
    );

    checks.push(Check {
        name: "instance collapses exactly when the formula is satisfiable",
        passed: collapse.is_some() == model.is_some(),
    });
    checks.push(Check {
        name: "permutation sorts in d_b/3 moves exactly when satisfiable",
        passed: decision.is_some() == model.is_some(),
    });

    if let Some(model) = &model {
        match guided_collapse(&out, model) {
            Ok(trace) => {
                checks.push(Check {
                    name: "guided collapse visits every triple once",
                    passed: trace.len() == n / 3,
                });
                checks.push(Check {
                    name: "guided trace sorts the emitted permutation",
                    passed: trace_sorts(&emitted.permutation, &trace),
                });
                checks.push(Check {
                    name: "extracted assignment satisfies the formula",
                    passed: extract_assignment(&out, &trace)
                        .map(|a| a.satisfies(&normalized))
                        .unwrap_or(false),
                });
            }
            Err(e) => {
                checks.push(Check {
                    name: "guided collapse succeeds on a model",
                    passed: false,
                });
                println!("guided collapse failed: {e}");
            }
        }
        if let Some(trace) = &collapse {
            checks.push(Check {
                name: "searched trace yields a satisfying assignment",
                passed: searched_assignment_satisfies(&out, trace),
            });
        }
    }

    let mut all_passed = true;
    for check in &checks {
        let verdict = if check.passed { "ok" } else { "FAIL" };
        println!("  [{verdict}] {}", check.name);
        all_passed &= check.passed;
    }
    println!(
        "outcome: {} in {:.2?}",
        if all_passed { "verified" } else { "FAILED" },
        started.elapsed()
    );
    Ok(if all_passed { EXIT_YES } else { EXIT_NO })
}

fn trace_sorts(p: &Permutation, trace: &StepTrace) -> bool {
    let mut p = p.clone();
    for (_, tau) in &trace.steps {
        match p.apply(tau) {
            Ok(next) => p = next,
            Err(_) => return false,
        }
    }
    p.is_identity()
}

fn searched_assignment_satisfies(out: &ReductionOutput, trace: &StepTrace) -> bool {
    extract_assignment(out, trace)
        .map(|a| a.satisfies(&out.formula))
        .unwrap_or(false)
}
