//! CNF formulas and their compilation into assemblings of gadget blocks,
//! with constructive witnesses in both directions: a guided collapse for a
//! satisfying assignment, and assignment extraction from any collapse trace.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::blocks::{assemble, Assembling, BlockError, BlockKind, BlockSpec};
use crate::search::StepTrace;
use crate::tdt::{TdtError, TdtInstance, Triple};

#[derive(Debug, Error)]
pub enum SatError {
    #[error("formula has no clauses")]
    EmptyFormula,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("literal {literal} references a variable outside 1..={num_vars}")]
    BadLiteral { literal: i64, num_vars: usize },
    #[error("formula is not normalized: {0}")]
    NotNormalized(String),
    #[error("assignment does not satisfy the formula")]
    Unsatisfied,
    #[error("trace is not a complete collapse: {0}")]
    IncompleteTrace(String),
    #[error("no collapse follows the guided order; the reduction is inconsistent")]
    GuidedCollapseFailed,
    #[error("metadata: {0}")]
    Meta(String),
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error(transparent)]
    Tdt(#[from] TdtError),
}

/// A literal: variable index in `1..=num_vars`, possibly negated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lit {
    pub var: usize,
    pub negated: bool,
}

impl Lit {
    pub fn pos(var: usize) -> Lit {
        Lit { var, negated: false }
    }

    pub fn neg(var: usize) -> Lit {
        Lit { var, negated: true }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "-{}", self.var)
        } else {
            write!(f, "{}", self.var)
        }
    }
}

/// A CNF formula over variables `1..=num_vars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<Lit>>) -> Result<Self, SatError> {
        if clauses.is_empty() {
            return Err(SatError::EmptyFormula);
        }
        for clause in &clauses {
            for lit in clause {
                if lit.var == 0 || lit.var > num_vars {
                    return Err(SatError::BadLiteral {
                        literal: if lit.negated {
                            -(lit.var as i64)
                        } else {
                            lit.var as i64
                        },
                        num_vars,
                    });
                }
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    /// Clause count.
    pub fn gamma(&self) -> usize {
        self.clauses.len()
    }

    /// Occurrence counts `(positive, negative)` indexed by variable (entry 0
    /// unused).
    pub fn occurrences(&self) -> (Vec<usize>, Vec<usize>) {
        let mut pos = vec![0; self.num_vars + 1];
        let mut neg = vec![0; self.num_vars + 1];
        for clause in &self.clauses {
            for lit in clause {
                if lit.negated {
                    neg[lit.var] += 1;
                } else {
                    pos[lit.var] += 1;
                }
            }
        }
        (pos, neg)
    }

    /// Normalized means: at least two variables, at least two clauses, every
    /// clause has at least two literals, and every variable occurs at least
    /// twice in each polarity.
    pub fn is_normalized(&self) -> bool {
        self.normalization_defect().is_none()
    }

    fn normalization_defect(&self) -> Option<String> {
        if self.num_vars < 2 {
            return Some("needs at least two variables".to_string());
        }
        if self.gamma() < 2 {
            return Some("needs at least two clauses".to_string());
        }
        if let Some(c) = self.clauses.iter().position(|c| c.len() < 2) {
            return Some(format!("clause {} has fewer than two literals", c + 1));
        }
        let (pos, neg) = self.occurrences();
        for v in 1..=self.num_vars {
            if pos[v] < 2 || neg[v] < 2 {
                return Some(format!("variable {v} needs two occurrences per polarity"));
            }
        }
        None
    }

    /// Naive backtracking satisfiability check; corpus scale only.
    pub fn satisfiable(&self) -> Option<Assignment> {
        fn rec(f: &CnfFormula, values: &mut Vec<Option<bool>>, var: usize) -> bool {
            let undecided = f.clauses.iter().any(|clause| {
                let satisfied = clause
                    .iter()
                    .any(|l| values[l.var] == Some(!l.negated));
                let open = clause.iter().any(|l| values[l.var].is_none());
                !satisfied && !open
            });
            if undecided {
                return false;
            }
            if var > f.num_vars {
                return f.clauses.iter().all(|clause| {
                    clause.iter().any(|l| values[l.var] == Some(!l.negated))
                });
            }
            for value in [true, false] {
                values[var] = Some(value);
                if rec(f, values, var + 1) {
                    return true;
                }
            }
            values[var] = None;
            false
        }

        let mut values = vec![None; self.num_vars + 1];
        if rec(self, &mut values, 1) {
            let true_vars = (1..=self.num_vars)
                .filter(|&v| values[v] == Some(true))
                .collect();
            Some(Assignment { true_vars })
        } else {
            None
        }
    }
}

/// A truth assignment given by its set of true variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub true_vars: BTreeSet<usize>,
}

impl Assignment {
    pub fn from_bits(bits: &[bool]) -> Assignment {
        let true_vars = bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i + 1)
            .collect();
        Assignment { true_vars }
    }

    pub fn value(&self, var: usize) -> bool {
        self.true_vars.contains(&var)
    }

    pub fn satisfies_lit(&self, lit: &Lit) -> bool {
        self.value(lit.var) != lit.negated
    }

    pub fn satisfies(&self, f: &CnfFormula) -> bool {
        f.clauses
            .iter()
            .all(|clause| clause.iter().any(|l| self.satisfies_lit(l)))
    }
}

/// DIMACS CNF: `c` comment lines, a `p cnf <vars> <clauses>` header, then
/// zero-terminated clauses.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, SatError> {
    let mut num_vars = None;
    let mut declared_clauses = 0usize;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| SatError::Parse {
            line: line_no,
            message,
        };
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            if num_vars.is_some() {
                return Err(err("duplicate problem header".to_string()));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[1] != "cnf" {
                return Err(err("expected 'p cnf <vars> <clauses>'".to_string()));
            }
            num_vars = Some(
                fields[2]
                    .parse::<usize>()
                    .map_err(|_| err(format!("bad variable count {:?}", fields[2])))?,
            );
            declared_clauses = fields[3]
                .parse::<usize>()
                .map_err(|_| err(format!("bad clause count {:?}", fields[3])))?;
            continue;
        }
        let Some(n) = num_vars else {
            return Err(err("clause before the problem header".to_string()));
        };
        for token in line.split_whitespace() {
            let value: i64 = token
                .parse()
                .map_err(|_| err(format!("bad literal {token:?}")))?;
            if value == 0 {
                if current.is_empty() {
                    return Err(err("empty clause".to_string()));
                }
                clauses.push(std::mem::take(&mut current));
            } else {
                let var = value.unsigned_abs() as usize;
                if var > n {
                    return Err(SatError::BadLiteral {
                        literal: value,
                        num_vars: n,
                    });
                }
                current.push(Lit {
                    var,
                    negated: value < 0,
                });
            }
        }
    }
    if !current.is_empty() {
        return Err(SatError::Parse {
            line: text.lines().count(),
            message: "last clause is not zero-terminated".to_string(),
        });
    }
    let n = num_vars.ok_or(SatError::Parse {
        line: 0,
        message: "missing problem header".to_string(),
    })?;
    if clauses.len() != declared_clauses {
        return Err(SatError::Parse {
            line: 0,
            message: format!(
                "header declares {declared_clauses} clauses, found {}",
                clauses.len()
            ),
        });
    }
    CnfFormula::new(n, clauses)
}

pub fn to_dimacs(f: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", f.num_vars, f.gamma());
    for clause in &f.clauses {
        for lit in clause {
            out.push_str(&lit.to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}

/// Rewrites the formula so that every clause has two or more literals, every
/// variable occurs at least twice per polarity, and there are at least two
/// variables and two clauses. Satisfiability over the original variables is
/// preserved; idempotent on normalized input.
pub fn normalize(f: &CnfFormula) -> Result<CnfFormula, SatError> {
    if f.clauses.is_empty() {
        return Err(SatError::EmptyFormula);
    }
    let mut num_vars = f.num_vars;
    // Singleton clauses get their literal duplicated.
    let mut clauses: Vec<Vec<Lit>> = f
        .clauses
        .iter()
        .map(|clause| {
            if clause.len() == 1 {
                vec![clause[0], clause[0]]
            } else {
                clause.clone()
            }
        })
        .collect();
    // Tautological clauses raise each polarity count to two.
    loop {
        let trial = CnfFormula {
            num_vars,
            clauses: clauses.clone(),
        };
        let (pos, neg) = trial.occurrences();
        match (1..=num_vars).find(|&v| pos[v] < 2 || neg[v] < 2) {
            Some(v) => clauses.push(vec![Lit::pos(v), Lit::neg(v)]),
            None => break,
        }
    }
    // A second variable, when missing, comes with its own two tautologies.
    if num_vars < 2 {
        num_vars = 2;
        clauses.push(vec![Lit::pos(2), Lit::neg(2)]);
        clauses.push(vec![Lit::pos(2), Lit::neg(2)]);
    }
    while clauses.len() < 2 {
        clauses.push(vec![Lit::pos(1), Lit::neg(1)]);
    }
    let out = CnfFormula { num_vars, clauses };
    debug_assert!(out.is_normalized());
    Ok(out)
}

// ---------------------------------------------------------------------------
// Naming of the construction's variables.

fn lit_side_name(prefix: &str, var: usize, negated: bool) -> String {
    if negated {
        format!("{prefix}b_{var}")
    } else {
        format!("{prefix}_{var}")
    }
}

fn x_name(var: usize, negated: bool) -> String {
    lit_side_name("X", var, negated)
}

fn occ_name(var: usize, negated: bool, j: usize) -> String {
    format!("{}^{j}", x_name(var, negated))
}

fn u_name(var: usize, negated: bool, j: usize) -> String {
    format!("{}^{j}", lit_side_name("U", var, negated))
}

fn gamma_name(c: usize) -> String {
    format!("Gamma_{c}")
}

fn v_name(c: usize, p: usize) -> String {
    format!("V_{c}^{p}")
}

const A_PHI: &str = "A_phi";

fn a_phi_copy(i: usize) -> String {
    format!("A_phi^{i}")
}

/// Provenance of one block of the reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockGroup {
    /// Literal side of boolean variable `i`: its var block and copy chains.
    Literals(usize),
    /// The or-chain of clause `c`.
    Clause(usize),
    /// The and-chain combining all clauses into A_phi.
    Conjunction,
    /// The copy chain duplicating A_phi for every boolean variable.
    Duplication,
}

impl fmt::Display for BlockGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockGroup::Literals(i) => write!(f, "literals:{i}"),
            BlockGroup::Clause(c) => write!(f, "clause:{c}"),
            BlockGroup::Conjunction => f.write_str("conjunction"),
            BlockGroup::Duplication => f.write_str("duplication"),
        }
    }
}

/// The compiled formula: the assembled instance, the provenance of every
/// block, and the gadget variable standing for each clause position.
#[derive(Debug, Clone)]
pub struct ReductionOutput {
    pub formula: CnfFormula,
    pub assembling: Assembling,
    pub groups: Vec<BlockGroup>,
    /// `literal_map[c][p]` is the occurrence variable of position `p` of
    /// clause `c` (both 0-based).
    pub literal_map: Vec<Vec<String>>,
}

/// One copy chain turning `input` into outputs `out(1) .. out(q)`; `q >= 2`.
fn copy_chain(
    specs: &mut Vec<BlockSpec>,
    input: String,
    q: usize,
    out: impl Fn(usize) -> String,
    mid: impl Fn(usize) -> String,
) {
    if q == 2 {
        specs.push(BlockSpec::new(BlockKind::Copy, vec![input], vec![out(1), out(2)]));
        return;
    }
    specs.push(BlockSpec::new(
        BlockKind::Copy,
        vec![input],
        vec![out(1), mid(2)],
    ));
    for j in 2..=q - 2 {
        specs.push(BlockSpec::new(
            BlockKind::Copy,
            vec![mid(j)],
            vec![out(j), mid(j + 1)],
        ));
    }
    specs.push(BlockSpec::new(
        BlockKind::Copy,
        vec![mid(q - 1)],
        vec![out(q - 1), out(q)],
    ));
}

/// Compiles a normalized formula into its assembling. The instance is
/// collapsible exactly when the formula is satisfiable.
pub fn reduce(f: &CnfFormula) -> Result<ReductionOutput, SatError> {
    if let Some(defect) = f.normalization_defect() {
        return Err(SatError::NotNormalized(defect));
    }
    let m = f.num_vars;
    let gamma = f.gamma();
    let (pos, neg) = f.occurrences();

    let mut specs = Vec::new();
    let mut groups = Vec::new();
    let push = |specs: &mut Vec<BlockSpec>, groups: &mut Vec<BlockGroup>, start: usize, g: BlockGroup| {
        groups.extend(std::iter::repeat_n(g, specs.len() - start));
    };

    // Literal side: one var block per boolean variable, then a copy chain
    // per polarity fanning X_i out to its occurrences.
    for i in 1..=m {
        let start = specs.len();
        specs.push(BlockSpec::new(
            BlockKind::Var,
            vec![a_phi_copy(i)],
            vec![x_name(i, false), x_name(i, true)],
        ));
        for negated in [false, true] {
            let q = if negated { neg[i] } else { pos[i] };
            copy_chain(
                &mut specs,
                x_name(i, negated),
                q,
                |j| occ_name(i, negated, j),
                |j| u_name(i, negated, j),
            );
        }
        push(&mut specs, &mut groups, start, BlockGroup::Literals(i));
    }

    // Clause side: occurrence variables feed an or-chain ending in Gamma_c.
    let mut occ_counter: HashMap<(usize, bool), usize> = HashMap::new();
    let mut literal_map = Vec::with_capacity(gamma);
    for (c0, clause) in f.clauses.iter().enumerate() {
        let c = c0 + 1;
        let start = specs.len();
        let lits: Vec<String> = clause
            .iter()
            .map(|l| {
                let j = occ_counter.entry((l.var, l.negated)).or_insert(0);
                *j += 1;
                occ_name(l.var, l.negated, *j)
            })
            .collect();
        let k = lits.len();
        if k == 2 {
            specs.push(BlockSpec::new(
                BlockKind::Or,
                vec![lits[0].clone(), lits[1].clone()],
                vec![gamma_name(c)],
            ));
        } else {
            specs.push(BlockSpec::new(
                BlockKind::Or,
                vec![lits[0].clone(), lits[1].clone()],
                vec![v_name(c, 2)],
            ));
            for p in 3..=k - 1 {
                specs.push(BlockSpec::new(
                    BlockKind::Or,
                    vec![v_name(c, p - 1), lits[p - 1].clone()],
                    vec![v_name(c, p)],
                ));
            }
            specs.push(BlockSpec::new(
                BlockKind::Or,
                vec![v_name(c, k - 1), lits[k - 1].clone()],
                vec![gamma_name(c)],
            ));
        }
        literal_map.push(lits);
        push(&mut specs, &mut groups, start, BlockGroup::Clause(c));
    }

    // Conjunction: an and-chain over all Gamma_c ending in A_phi.
    {
        let start = specs.len();
        let w = |l: usize| format!("W_{l}");
        if gamma == 2 {
            specs.push(BlockSpec::new(
                BlockKind::And,
                vec![gamma_name(1), gamma_name(2)],
                vec![A_PHI.to_string()],
            ));
        } else {
            specs.push(BlockSpec::new(
                BlockKind::And,
                vec![gamma_name(1), gamma_name(2)],
                vec![w(2)],
            ));
            for l in 3..=gamma - 1 {
                specs.push(BlockSpec::new(
                    BlockKind::And,
                    vec![w(l - 1), gamma_name(l)],
                    vec![w(l)],
                ));
            }
            specs.push(BlockSpec::new(
                BlockKind::And,
                vec![w(gamma - 1), gamma_name(gamma)],
                vec![A_PHI.to_string()],
            ));
        }
        push(&mut specs, &mut groups, start, BlockGroup::Conjunction);
    }

    // Duplication: A_phi copied once per boolean variable.
    {
        let start = specs.len();
        copy_chain(&mut specs, A_PHI.to_string(), m, a_phi_copy, |j| {
            format!("Y_{j}")
        });
        push(&mut specs, &mut groups, start, BlockGroup::Duplication);
    }

    let assembling = assemble(specs)?;
    Ok(ReductionOutput {
        formula: f.clone(),
        assembling,
        groups,
        literal_map,
    })
}

// ---------------------------------------------------------------------------
// Guided collapse and assignment extraction.

/// Activation order realizing a satisfying assignment: the chosen literal
/// side of each boolean variable, the clause chains from their first true
/// literal, the conjunction, the A_phi copies, then everything left.
fn build_agenda(out: &ReductionOutput, a: &Assignment) -> Vec<String> {
    let f = &out.formula;
    let m = f.num_vars;
    let gamma = f.gamma();
    let (pos, neg) = f.occurrences();
    let mut agenda = Vec::new();

    let push_side = |agenda: &mut Vec<String>, i: usize, negated: bool| {
        let q = if negated { neg[i] } else { pos[i] };
        agenda.push(x_name(i, negated));
        for j in 2..=q.saturating_sub(1) {
            agenda.push(u_name(i, negated, j));
        }
        for j in 1..=q {
            agenda.push(occ_name(i, negated, j));
        }
    };

    for i in 1..=m {
        push_side(&mut agenda, i, !a.value(i));
    }

    // first_true[c] is 1-based; every clause has one since a satisfies f.
    let first_true: Vec<usize> = f
        .clauses
        .iter()
        .map(|clause| {
            clause
                .iter()
                .position(|l| a.satisfies_lit(l))
                .expect("assignment satisfies every clause")
                + 1
        })
        .collect();
    for (c0, clause) in f.clauses.iter().enumerate() {
        let (c, k, p0) = (c0 + 1, clause.len(), first_true[c0]);
        for p in p0.max(2)..=k - 1 {
            agenda.push(v_name(c, p));
        }
        agenda.push(gamma_name(c));
    }

    for l in 2..=gamma - 1 {
        agenda.push(format!("W_{l}"));
    }
    agenda.push(A_PHI.to_string());

    for j in 2..=m - 1 {
        agenda.push(format!("Y_{j}"));
    }
    for j in 1..=m {
        agenda.push(a_phi_copy(j));
    }

    for i in 1..=m {
        push_side(&mut agenda, i, a.value(i));
    }
    for (c0, &first) in first_true.iter().enumerate() {
        let c = c0 + 1;
        for p in 2..first {
            agenda.push(v_name(c, p));
        }
    }

    debug_assert_eq!(agenda.len(), out.assembling.registry.len());
    agenda
}

/// Collapses the reduced instance to the empty instance along the order a
/// satisfying assignment dictates. Non-activation steps are interleaved
/// freely by a backtracking search.
pub fn guided_collapse(out: &ReductionOutput, a: &Assignment) -> Result<StepTrace, SatError> {
    if !a.satisfies(&out.formula) {
        return Err(SatError::Unsatisfied);
    }
    let agenda = build_agenda(out, a);

    fn dfs(
        ctx: &ReductionOutput,
        state: &TdtInstance,
        next: usize,
        agenda: &[String],
        steps: &mut Vec<(Triple, crate::perm::Transposition)>,
        dead: &mut HashSet<Vec<u8>>,
    ) -> bool {
        if state.is_empty() {
            return next == agenda.len();
        }
        let key = state.canonical_key();
        if dead.contains(&key) {
            return false;
        }
        // Agenda activations first; free steps narrowest first, so deletion
        // triples fire while their symbols are still close together.
        let mut moves = Vec::new();
        for t in state.enabled_triples() {
            let tau = state.step_transposition(&t).expect("enabled triple");
            match ctx.assembling.activation_of(&t) {
                Some(decl) => {
                    if next < agenda.len() && decl.id == agenda[next] {
                        moves.push((t, tau, true));
                    }
                }
                None => moves.push((t, tau, false)),
            }
        }
        moves.sort_by_key(|(_, tau, is_activation)| {
            let width = (tau.j() - tau.i()).min(tau.k() - tau.j());
            (!is_activation, width, tau.i())
        });
        for (t, tau, is_activation) in moves {
            let child = state.apply_step(&t).expect("enabled triple");
            steps.push((t, tau));
            let advanced = next + usize::from(is_activation);
            if dfs(ctx, &child, advanced, agenda, steps, dead) {
                return true;
            }
            steps.pop();
        }
        dead.insert(key);
        false
    }

    let mut steps = Vec::new();
    let mut dead = HashSet::new();
    let inst = &out.assembling.instance;
    if dfs(out, inst, 0, &agenda, &mut steps, &mut dead) {
        Ok(StepTrace {
            initial_key: inst.canonical_key(),
            steps,
        })
    } else {
        Err(SatError::GuidedCollapseFailed)
    }
}

/// Reads a satisfying assignment off a complete collapse trace: variable `i`
/// is true exactly when `X_i` is activated before `A_phi`.
pub fn extract_assignment(out: &ReductionOutput, tr: &StepTrace) -> Result<Assignment, SatError> {
    let mut state = out.assembling.instance.clone();
    let mut activations = Vec::new();
    for (triple, _) in &tr.steps {
        if let Some(decl) = out.assembling.activation_of(triple) {
            activations.push(decl.id.clone());
        }
        state = state.apply_step(triple)?;
    }
    if !state.is_empty() {
        return Err(SatError::IncompleteTrace(
            "instance is non-empty after the trace".to_string(),
        ));
    }
    let a_phi_at = activations
        .iter()
        .position(|id| id == A_PHI)
        .ok_or_else(|| SatError::IncompleteTrace("A_phi is never activated".to_string()))?;
    let before: HashSet<&String> = activations[..a_phi_at].iter().collect();
    let true_vars = (1..=out.formula.num_vars)
        .filter(|&i| before.contains(&x_name(i, false)))
        .collect();
    Ok(Assignment { true_vars })
}

// ---------------------------------------------------------------------------
// Metadata sidecar.

/// Structured text recording each block's kind, boundaries, provenance and
/// wiring; enough to rebuild the assembling next to a 3DT file.
pub fn write_meta(out: &ReductionOutput) -> String {
    let mut text = String::new();
    text.push_str(&format!("blocks {}\n", out.assembling.specs.len()));
    for (h0, spec) in out.assembling.specs.iter().enumerate() {
        let h = h0 + 1;
        let dec = &out.assembling.decomposition;
        text.push_str(&format!(
            "block {h} kind={} s={} t={} group={} in={} out={}\n",
            spec.kind,
            dec.s(h),
            dec.t(h),
            out.groups[h0],
            spec.inputs.join(","),
            spec.outputs.join(","),
        ));
    }
    text
}

/// Rebuilds the block list of a metadata sidecar; `assemble` then restores
/// the full instance.
pub fn parse_meta(text: &str) -> Result<Vec<BlockSpec>, SatError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| SatError::Meta("empty file".to_string()))?;
    let count: usize = header
        .strip_prefix("blocks ")
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| SatError::Meta("expected 'blocks <count>' header".to_string()))?;
    let mut specs = Vec::with_capacity(count);
    for line in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 8 || fields[0] != "block" {
            return Err(SatError::Meta(format!("malformed block line {line:?}")));
        }
        let value = |field: &str, prefix: &str| -> Result<String, SatError> {
            field
                .strip_prefix(prefix)
                .map(str::to_string)
                .ok_or_else(|| SatError::Meta(format!("expected {prefix}... in {line:?}")))
        };
        let kind: BlockKind = value(fields[2], "kind=")?
            .parse()
            .map_err(|e: BlockError| SatError::Meta(e.to_string()))?;
        let split = |s: String| -> Vec<String> {
            if s.is_empty() {
                Vec::new()
            } else {
                s.split(',').map(str::to_string).collect()
            }
        };
        let inputs = split(value(fields[6], "in=")?);
        let outputs = split(value(fields[7], "out=")?);
        specs.push(BlockSpec {
            kind,
            inputs,
            outputs,
        });
    }
    if specs.len() != count {
        return Err(SatError::Meta(format!(
            "header declares {count} blocks, found {}",
            specs.len()
        )));
    }
    Ok(specs)
}
