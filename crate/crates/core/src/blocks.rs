//! Gadget blocks: block decompositions of 3DT-instances, variables wiring a
//! source block to a target block, the four basic block kinds, assembled
//! instances, and harness-based verification of activation orders.
//!
//! A variable `A = [(a,b,c),(x,y,z)]` owns two triples. Its source block
//! holds `b`, `x`, `y`; its target block holds `a`, `c`, `z`. The step on
//! `(x,y,z)` is the activation of `A`; it moves `b` into the target block.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::perm::Transposition;
use crate::tdt::{TdtError, TdtInstance, Triple};

#[derive(Debug, Error)]
pub enum BlockError {
    #[error("block {index} ({kind}) takes {expected_in} inputs and {expected_out} outputs, got {got_in} and {got_out}")]
    ArityMismatch {
        index: usize,
        kind: BlockKind,
        expected_in: usize,
        expected_out: usize,
        got_in: usize,
        got_out: usize,
    },
    #[error("variable {0} is produced by more than one block")]
    DuplicateProducer(String),
    #[error("variable {0} is consumed by more than one block")]
    DuplicateConsumer(String),
    #[error("variable {0} has no producing block")]
    MissingProducer(String),
    #[error("variable {0} has no consuming block")]
    MissingConsumer(String),
    #[error("variable {id} violates a validity condition: {detail}")]
    InvalidVariable { id: String, detail: String },
    #[error("decomposition boundaries must start at 0, increase and stay below the span")]
    BadDecomposition,
    #[error("the remapped block decomposition is undefined for this step")]
    UndefinedDecomposition,
    #[error("{0} blocks appear only in test harnesses")]
    NonBasicBlock(BlockKind),
    #[error("unknown block kind {0:?}")]
    UnknownKind(String),
    #[error(transparent)]
    Tdt(#[from] TdtError),
}

/// Slot of a symbol inside a variable's two triples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRole {
    A,
    B,
    C,
    X,
    Y,
    Z,
}

impl VarRole {
    pub fn suffix(self) -> &'static str {
        match self {
            VarRole::A => "a",
            VarRole::B => "b",
            VarRole::C => "c",
            VarRole::X => "x",
            VarRole::Y => "y",
            VarRole::Z => "z",
        }
    }
}

/// One position of a block word template.
#[derive(Debug, Clone, Copy)]
enum Sym {
    /// Symbol of the n-th input variable.
    In(usize, VarRole),
    /// Symbol of the n-th output variable.
    Out(usize, VarRole),
    /// Block-internal symbol.
    Int(&'static str),
}

use Sym::{In, Int, Out};
use VarRole::{A, B, C, X, Y, Z};

const COPY_WORD: &[Sym] = &[
    In(0, A),
    Out(0, Y),
    Int("e"),
    In(0, Z),
    Int("d"),
    Out(1, Y),
    Out(0, X),
    Out(0, B),
    In(0, C),
    Out(1, X),
    Out(1, B),
    Int("f"),
];
const COPY_INTERNALS: &[[&str; 3]] = &[["d", "e", "f"]];

const AND_WORD: &[Sym] = &[
    In(0, A),
    Int("e"),
    In(0, Z),
    In(1, A),
    In(0, C),
    In(1, Z),
    Int("d"),
    Out(0, Y),
    In(1, C),
    Out(0, X),
    Out(0, B),
    Int("f"),
];
const AND_INTERNALS: &[[&str; 3]] = &[["d", "e", "f"]];

const OR_WORD: &[Sym] = &[
    In(0, A),
    Int("b'"),
    In(0, Z),
    In(1, A),
    Int("d"),
    Out(0, Y),
    Int("a'"),
    Out(0, X),
    Out(0, B),
    Int("f"),
    In(1, Z),
    In(0, C),
    Int("e"),
    Int("c'"),
    In(1, C),
];
const OR_INTERNALS: &[[&str; 3]] = &[["a'", "b'", "c'"], ["d", "e", "f"]];

const VAR_WORD: &[Sym] = &[
    Int("d1"),
    Out(0, Y),
    In(0, A),
    Int("d2"),
    Out(1, Y),
    Int("e1"),
    Int("a'"),
    Int("e2"),
    Out(0, X),
    Out(0, B),
    Int("f1"),
    Int("c'"),
    In(0, Z),
    Int("b'"),
    In(0, C),
    Out(1, X),
    Out(1, B),
    Int("f2"),
];
const VAR_INTERNALS: &[[&str; 3]] = &[
    ["d1", "e1", "f1"],
    ["d2", "e2", "f2"],
    ["a'", "b'", "c'"],
];

// Test-only harness blocks: a driver is a minimal source, a sink a minimal
// target.
const DRIVER_WORD: &[Sym] = &[Out(0, X), Out(0, B), Out(0, Y)];
const SINK_WORD: &[Sym] = &[In(0, A), In(0, Z), In(0, C)];

/// The four basic block kinds plus the two test-only harness kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockKind {
    Copy,
    And,
    Or,
    Var,
    Driver,
    Sink,
}

impl BlockKind {
    pub const BASIC: [BlockKind; 4] =
        [BlockKind::Copy, BlockKind::And, BlockKind::Or, BlockKind::Var];

    pub fn is_basic(self) -> bool {
        !matches!(self, BlockKind::Driver | BlockKind::Sink)
    }

    /// `(inputs, outputs)` arity.
    pub fn arity(self) -> (usize, usize) {
        match self {
            BlockKind::Copy | BlockKind::Var => (1, 2),
            BlockKind::And | BlockKind::Or => (2, 1),
            BlockKind::Driver => (0, 1),
            BlockKind::Sink => (1, 0),
        }
    }

    pub fn word_len(self) -> usize {
        self.word_template().len()
    }

    fn word_template(self) -> &'static [Sym] {
        match self {
            BlockKind::Copy => COPY_WORD,
            BlockKind::And => AND_WORD,
            BlockKind::Or => OR_WORD,
            BlockKind::Var => VAR_WORD,
            BlockKind::Driver => DRIVER_WORD,
            BlockKind::Sink => SINK_WORD,
        }
    }

    fn internal_triples(self) -> &'static [[&'static str; 3]] {
        match self {
            BlockKind::Copy => COPY_INTERNALS,
            BlockKind::And => AND_INTERNALS,
            BlockKind::Or => OR_INTERNALS,
            BlockKind::Var => VAR_INTERNALS,
            BlockKind::Driver | BlockKind::Sink => &[],
        }
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockKind::Copy => "copy",
            BlockKind::And => "and",
            BlockKind::Or => "or",
            BlockKind::Var => "var",
            BlockKind::Driver => "driver",
            BlockKind::Sink => "sink",
        })
    }
}

impl FromStr for BlockKind {
    type Err = BlockError;

    fn from_str(s: &str) -> Result<Self, BlockError> {
        match s {
            "copy" => Ok(BlockKind::Copy),
            "and" => Ok(BlockKind::And),
            "or" => Ok(BlockKind::Or),
            "var" => Ok(BlockKind::Var),
            "driver" => Ok(BlockKind::Driver),
            "sink" => Ok(BlockKind::Sink),
            other => Err(BlockError::UnknownKind(other.to_string())),
        }
    }
}

/// One block of an assembling: its kind and the ids of the variables it
/// consumes and produces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSpec {
    pub kind: BlockKind,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl BlockSpec {
    pub fn new(
        kind: BlockKind,
        inputs: Vec<impl Into<String>>,
        outputs: Vec<impl Into<String>>,
    ) -> Self {
        BlockSpec {
            kind,
            inputs: inputs.into_iter().map(Into::into).collect(),
            outputs: outputs.into_iter().map(Into::into).collect(),
        }
    }
}

/// Partition of the word `[1..n]` into consecutive intervals. Block `h`
/// (1-based) covers positions `s_h + 1 ..= t_h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDecomposition {
    starts: Vec<usize>,
    span: usize,
}

impl BlockDecomposition {
    pub fn new(starts: Vec<usize>, span: usize) -> Result<Self, BlockError> {
        let increasing = starts.windows(2).all(|w| w[0] < w[1]);
        if starts.first() != Some(&0) || !increasing || *starts.last().unwrap() >= span {
            return Err(BlockError::BadDecomposition);
        }
        Ok(BlockDecomposition { starts, span })
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn starts(&self) -> &[usize] {
        &self.starts
    }

    pub fn span(&self) -> usize {
        self.span
    }

    /// `s_h`, 1-based block index.
    pub fn s(&self, h: usize) -> usize {
        self.starts[h - 1]
    }

    /// `t_h`, 1-based block index.
    pub fn t(&self, h: usize) -> usize {
        if h == self.starts.len() {
            self.span
        } else {
            self.starts[h]
        }
    }

    /// Block containing position `pos` in `[1..n]`.
    pub fn block_of(&self, pos: usize) -> usize {
        debug_assert!(pos >= 1 && pos <= self.span);
        self.starts.partition_point(|&s| s < pos)
    }

    /// The interval of block `h`, dots included.
    pub fn full_block<'i>(&self, inst: &'i TdtInstance, h: usize) -> Vec<Option<&'i str>> {
        let tokens = inst.word_tokens();
        tokens[self.s(h)..self.t(h)].to_vec()
    }

    /// The dot-free projection of block `h`.
    pub fn block<'i>(&self, inst: &'i TdtInstance, h: usize) -> Vec<&'i str> {
        self.full_block(inst, h).into_iter().flatten().collect()
    }

    /// Boundaries after applying `tau^{-1}` to the word, or `None` when the
    /// images of the boundaries are no longer increasing.
    pub fn remap(&self, tau: &Transposition) -> Option<BlockDecomposition> {
        let starts: Vec<usize> = self.starts.iter().map(|&s| tau.preimage(s)).collect();
        if starts.windows(2).all(|w| w[0] < w[1]) {
            Some(BlockDecomposition {
                starts,
                span: self.span,
            })
        } else {
            None
        }
    }
}

/// A variable `[(a,b,c),(x,y,z)]` with its source and target block indices
/// (1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableDecl {
    pub id: String,
    pub abc: Triple,
    pub xyz: Triple,
    pub source: usize,
    pub target: usize,
}

impl VariableDecl {
    fn new(id: &str, source: usize, target: usize) -> Self {
        let sym = |r: VarRole| format!("{id}.{}", r.suffix());
        VariableDecl {
            id: id.to_string(),
            abc: Triple::new(sym(A), sym(B), sym(C)).expect("distinct symbols"),
            xyz: Triple::new(sym(X), sym(Y), sym(Z)).expect("distinct symbols"),
            source,
            target,
        }
    }
}

/// An assembled instance: the block list, the variable registry, the
/// resulting 3DT-instance and its block decomposition.
#[derive(Debug, Clone)]
pub struct Assembling {
    pub specs: Vec<BlockSpec>,
    pub registry: BTreeMap<String, VariableDecl>,
    pub instance: TdtInstance,
    pub decomposition: BlockDecomposition,
}

/// The word and internal triples of one block, symbols namespaced by
/// variable id and block index.
pub fn instantiate_block(spec: &BlockSpec, block_index: usize) -> (Vec<String>, Vec<Triple>) {
    let internal = |name: &str| format!("B{block_index}.{name}");
    let word = spec
        .kind
        .word_template()
        .iter()
        .map(|sym| match sym {
            In(n, role) => format!("{}.{}", spec.inputs[*n], role.suffix()),
            Out(n, role) => format!("{}.{}", spec.outputs[*n], role.suffix()),
            Int(name) => internal(name),
        })
        .collect();
    let triples = spec
        .kind
        .internal_triples()
        .iter()
        .map(|[a, b, c]| {
            Triple::new(internal(a), internal(b), internal(c)).expect("distinct symbols")
        })
        .collect();
    (word, triples)
}

/// Concatenates the instantiated blocks and wires the variables. Checks that
/// every variable is produced by exactly one block and consumed by exactly
/// one other, and that all variable validity conditions hold.
pub fn assemble(specs: Vec<BlockSpec>) -> Result<Assembling, BlockError> {
    for (index, spec) in specs.iter().enumerate() {
        let (expected_in, expected_out) = spec.kind.arity();
        if spec.inputs.len() != expected_in || spec.outputs.len() != expected_out {
            return Err(BlockError::ArityMismatch {
                index: index + 1,
                kind: spec.kind,
                expected_in,
                expected_out,
                got_in: spec.inputs.len(),
                got_out: spec.outputs.len(),
            });
        }
    }

    let mut sources: BTreeMap<String, usize> = BTreeMap::new();
    let mut targets: BTreeMap<String, usize> = BTreeMap::new();
    for (index, spec) in specs.iter().enumerate() {
        for id in &spec.outputs {
            if sources.insert(id.clone(), index + 1).is_some() {
                return Err(BlockError::DuplicateProducer(id.clone()));
            }
        }
        for id in &spec.inputs {
            if targets.insert(id.clone(), index + 1).is_some() {
                return Err(BlockError::DuplicateConsumer(id.clone()));
            }
        }
    }
    for id in targets.keys() {
        if !sources.contains_key(id) {
            return Err(BlockError::MissingProducer(id.clone()));
        }
    }
    for id in sources.keys() {
        if !targets.contains_key(id) {
            return Err(BlockError::MissingConsumer(id.clone()));
        }
    }

    let mut registry = BTreeMap::new();
    for (id, &source) in &sources {
        registry.insert(id.clone(), VariableDecl::new(id, source, targets[id]));
    }

    let mut word: Vec<Option<String>> = Vec::new();
    let mut starts = Vec::with_capacity(specs.len());
    let mut triples = Vec::new();
    for (index, spec) in specs.iter().enumerate() {
        starts.push(word.len());
        let (block_word, internals) = instantiate_block(spec, index + 1);
        word.extend(block_word.into_iter().map(Some));
        triples.extend(internals);
        for id in &spec.outputs {
            let decl = &registry[id];
            triples.push(decl.xyz.clone());
            triples.push(decl.abc.clone());
        }
    }
    let span = word.len();
    let instance = TdtInstance::new(span, word, triples)?;
    let decomposition = BlockDecomposition::new(starts, span)?;

    let out = Assembling {
        specs,
        registry,
        instance,
        decomposition,
    };
    out.check_variables()?;
    Ok(out)
}

impl Assembling {
    /// Variable validity: source holds b, x, y; target holds a, c, z in a
    /// different block; x, b, y are consecutive whenever x precedes y; and
    /// a precedes z precedes c.
    fn check_variables(&self) -> Result<(), BlockError> {
        let pos = |sym: &str| self.instance.position(sym).expect("registered symbol");
        let fail = |id: &str, detail: &str| {
            Err(BlockError::InvalidVariable {
                id: id.to_string(),
                detail: detail.to_string(),
            })
        };
        for (id, decl) in &self.registry {
            let block = |sym: &str| self.decomposition.block_of(pos(sym));
            let (a, b, c) = (&decl.abc.a, &decl.abc.b, &decl.abc.c);
            let (x, y, z) = (&decl.xyz.a, &decl.xyz.b, &decl.xyz.c);
            if block(b) != decl.source || block(x) != decl.source || block(y) != decl.source {
                return fail(id, "b, x, y must share the source block");
            }
            if block(a) != decl.target || block(c) != decl.target || block(z) != decl.target {
                return fail(id, "a, c, z must share the target block");
            }
            if decl.source == decl.target {
                return fail(id, "source and target blocks must differ");
            }
            if pos(x) < pos(y) && (pos(b) != pos(x) + 1 || pos(y) != pos(x) + 2) {
                return fail(id, "x, b, y must be consecutive when x precedes y");
            }
            if !(pos(a) < pos(z) && pos(z) < pos(c)) {
                return fail(id, "a, z, c must appear in that order");
            }
        }
        Ok(())
    }

    /// The variable whose activation triple `(x,y,z)` this is, if any.
    pub fn activation_of(&self, t: &Triple) -> Option<&VariableDecl> {
        let id = t.a.strip_suffix(".x")?;
        self.registry.get(id).filter(|decl| decl.xyz == *t)
    }
}

/// Applies a 3DT-step and remaps the block boundaries through the inverse of
/// the step's transposition. Internal steps leave the boundaries unchanged;
/// an activation moves `b` into the target block.
pub fn step_with_blocks(
    ctx: (&TdtInstance, &BlockDecomposition),
    t: &Triple,
) -> Result<(TdtInstance, BlockDecomposition), BlockError> {
    let (inst, dec) = ctx;
    let tau = inst.step_transposition(t)?;
    let next = inst.apply_step(t)?;
    let dec = dec.remap(&tau).ok_or(BlockError::UndefinedDecomposition)?;
    Ok((next, dec))
}

/// Wraps one block of the given basic kind in a minimal valid context: a
/// driver block per input variable and a sink block per output variable.
pub fn make_harness(kind: BlockKind) -> Result<Assembling, BlockError> {
    if !kind.is_basic() {
        return Err(BlockError::NonBasicBlock(kind));
    }
    let (num_in, num_out) = kind.arity();
    let names = |n: usize| -> Vec<String> {
        if n == 1 {
            vec!["A".to_string()]
        } else {
            (1..=n).map(|i| format!("A{i}")).collect()
        }
    };
    let inputs = names(num_in);
    let outputs = names(num_out);
    let mut specs = Vec::new();
    for id in &inputs {
        specs.push(BlockSpec::new(BlockKind::Driver, Vec::<String>::new(), vec![id.clone()]));
    }
    specs.push(BlockSpec {
        kind,
        inputs: inputs.clone(),
        outputs: outputs.clone(),
    });
    for id in &outputs {
        specs.push(BlockSpec::new(BlockKind::Sink, vec![id.clone()], Vec::<String>::new()));
    }
    assemble(specs)
}

/// Every order in which the variables of the context can be activated across
/// the complete collapses of its instance.
pub fn activation_orders(ctx: &Assembling) -> BTreeSet<Vec<String>> {
    fn explore(
        ctx: &Assembling,
        state: &TdtInstance,
        prefix: &mut Vec<String>,
        out: &mut BTreeSet<Vec<String>>,
    ) {
        if state.is_empty() {
            out.insert(prefix.clone());
            return;
        }
        for t in state.enabled_triples() {
            let next = state.apply_step(&t).expect("enabled triple");
            let activated = ctx.activation_of(&t).map(|decl| decl.id.clone());
            if let Some(id) = &activated {
                prefix.push(id.clone());
            }
            explore(ctx, &next, prefix, out);
            if activated.is_some() {
                prefix.pop();
            }
        }
    }

    let mut out = BTreeSet::new();
    let mut prefix = Vec::new();
    explore(ctx, &ctx.instance, &mut prefix, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Behavior graphs.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeStyle {
    /// Internal step or a deletion step on some (a,b,c).
    Plain,
    /// Activation of an input variable of the block under test.
    InputActivation,
    /// Activation of an output variable of the block under test.
    OutputActivation,
}

#[derive(Debug, Clone)]
pub struct BehaviorNode {
    /// Dot-free projection of the block under test.
    pub label: String,
    pub terminal: bool,
}

#[derive(Debug, Clone)]
pub struct BehaviorEdge {
    pub from: usize,
    pub to: usize,
    pub triple: Triple,
    pub style: EdgeStyle,
}

/// Exploration graph of one harnessed block: nodes are reachable states
/// labeled by the projected word of the block under test, edges are
/// 3DT-steps.
#[derive(Debug, Clone)]
pub struct BehaviorGraph {
    pub kind: BlockKind,
    pub nodes: Vec<BehaviorNode>,
    pub edges: Vec<BehaviorEdge>,
}

pub fn behavior_graph(kind: BlockKind) -> Result<BehaviorGraph, BlockError> {
    let ctx = make_harness(kind)?;
    let tested = ctx
        .specs
        .iter()
        .position(|s| s.kind == kind)
        .expect("harness contains the tested block")
        + 1;
    let tested_spec = ctx.specs[tested - 1].clone();

    let label_of = |inst: &TdtInstance, dec: &BlockDecomposition| -> String {
        let projected = dec.block(inst, tested);
        if projected.is_empty() {
            "(empty)".to_string()
        } else {
            projected.join(" ")
        }
    };
    let style_of = |t: &Triple| -> EdgeStyle {
        match ctx.activation_of(t) {
            Some(decl) if tested_spec.inputs.contains(&decl.id) => EdgeStyle::InputActivation,
            Some(decl) if tested_spec.outputs.contains(&decl.id) => EdgeStyle::OutputActivation,
            _ => EdgeStyle::Plain,
        }
    };
    let key_of = |inst: &TdtInstance, dec: &BlockDecomposition| -> Vec<u8> {
        let mut key = inst.canonical_key();
        for &s in dec.starts() {
            key.extend_from_slice(&(s as u16).to_le_bytes());
        }
        key
    };

    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut ids: HashMap<Vec<u8>, usize> = HashMap::new();
    let root = (ctx.instance.clone(), ctx.decomposition.clone());
    ids.insert(key_of(&root.0, &root.1), 0);
    nodes.push(BehaviorNode {
        label: label_of(&root.0, &root.1),
        terminal: root.0.is_empty(),
    });
    let mut queue = vec![(root, 0usize)];
    while let Some(((inst, dec), from)) = queue.pop() {
        for t in inst.enabled_triples() {
            let (next, next_dec) = step_with_blocks((&inst, &dec), &t)?;
            let key = key_of(&next, &next_dec);
            let to = match ids.get(&key) {
                Some(&id) => id,
                None => {
                    let id = nodes.len();
                    ids.insert(key, id);
                    nodes.push(BehaviorNode {
                        label: label_of(&next, &next_dec),
                        terminal: next.is_empty(),
                    });
                    queue.push(((next, next_dec), id));
                    id
                }
            };
            edges.push(BehaviorEdge {
                from,
                to,
                triple: t.clone(),
                style: style_of(&t),
            });
        }
    }

    let graph = BehaviorGraph { kind, nodes, edges };
    graph.validate()?;
    Ok(graph)
}

impl BehaviorGraph {
    /// Edges always reduce the triple count, so the graph is acyclic by
    /// construction; this checks the single-terminal shape instead.
    fn validate(&self) -> Result<(), BlockError> {
        let mut has_out = vec![false; self.nodes.len()];
        for e in &self.edges {
            has_out[e.from] = true;
        }
        let terminals: Vec<usize> = (0..self.nodes.len()).filter(|&i| !has_out[i]).collect();
        let ok = terminals.len() == 1 && self.nodes[terminals[0]].terminal;
        if !ok {
            return Err(BlockError::InvalidVariable {
                id: self.kind.to_string(),
                detail: "behavior graph must have a single empty terminal node".to_string(),
            });
        }
        Ok(())
    }

    /// Graphviz rendering. Input activations are drawn thick, output
    /// activations doubled, all other steps plain.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        out.push_str("digraph behavior {\n");
        out.push_str("  rankdir=TB;\n  node [shape=box, fontname=\"monospace\"];\n");
        for (id, node) in self.nodes.iter().enumerate() {
            let shape = if node.terminal { ", peripheries=2" } else { "" };
            out.push_str(&format!("  n{id} [label=\"{}\"{shape}];\n", node.label));
        }
        for e in &self.edges {
            let attrs = match e.style {
                EdgeStyle::Plain => String::new(),
                EdgeStyle::InputActivation => ", penwidth=3".to_string(),
                EdgeStyle::OutputActivation => {
                    ", color=\"black:invis:black\"".to_string()
                }
            };
            out.push_str(&format!(
                "  n{} -> n{} [label=\"{}\"{attrs}];\n",
                e.from, e.to, e.triple
            ));
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(ids: &[&str]) -> Vec<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn block_word_templates_have_expected_shape() {
        assert_eq!(BlockKind::Copy.word_len(), 12);
        assert_eq!(BlockKind::And.word_len(), 12);
        assert_eq!(BlockKind::Or.word_len(), 15);
        assert_eq!(BlockKind::Var.word_len(), 18);
        for kind in BlockKind::BASIC {
            let (num_in, num_out) = kind.arity();
            let internals = kind.internal_triples().len();
            assert_eq!(kind.word_len(), 3 * (num_in + num_out + internals));
        }
    }

    #[test]
    fn micro_context_activation_moves_b_to_the_target_block() {
        let ctx = assemble(vec![
            BlockSpec::new(BlockKind::Driver, Vec::<String>::new(), vec!["A"]),
            BlockSpec::new(BlockKind::Sink, vec!["A"], Vec::<String>::new()),
        ])
        .unwrap();
        assert_eq!(ctx.decomposition.starts(), &[0, 3]);
        assert_eq!(
            ctx.instance.word_tokens(),
            vec![
                Some("A.x"),
                Some("A.b"),
                Some("A.y"),
                Some("A.a"),
                Some("A.z"),
                Some("A.c")
            ]
        );

        let activation = ctx.registry["A"].xyz.clone();
        let tau = ctx.instance.step_transposition(&activation).unwrap();
        assert_eq!(tau, Transposition::new(1, 3, 5).unwrap());
        let (next, dec) =
            step_with_blocks((&ctx.instance, &ctx.decomposition), &activation).unwrap();
        assert_eq!(
            next.word_tokens(),
            vec![None, Some("A.a"), None, Some("A.b"), None, Some("A.c")]
        );
        assert_eq!(dec.starts(), &[0, 1]);
        assert_eq!(dec.block_of(next.position("A.b").unwrap()), 2);

        // (a,b,c) is now the only enabled triple and finishes the collapse.
        let abc = ctx.registry["A"].abc.clone();
        assert_eq!(next.enabled_triples(), vec![abc.clone()]);
        let (end, _) = step_with_blocks((&next, &dec), &abc).unwrap();
        assert!(end.is_empty());
    }

    #[test]
    fn two_block_assembling_has_expected_span_and_decomposition() {
        let ctx = assemble(vec![
            BlockSpec::new(BlockKind::Var, vec!["Y"], vec!["X1", "X2"]),
            BlockSpec::new(BlockKind::Or, vec!["X1", "X2"], vec!["Y"]),
        ])
        .unwrap();
        assert_eq!(ctx.instance.span(), 33);
        assert_eq!(ctx.decomposition.starts(), &[0, 18]);
        assert_eq!(ctx.instance.triple_count(), 11);
        assert_eq!(ctx.registry.len(), 3);
    }

    #[test]
    fn assemble_rejects_bad_wirings() {
        assert!(matches!(
            assemble(vec![BlockSpec::new(
                BlockKind::Copy,
                vec!["A"],
                vec!["A1"]
            )]),
            Err(BlockError::ArityMismatch { .. })
        ));
        let dangling = assemble(vec![
            BlockSpec::new(BlockKind::Driver, Vec::<String>::new(), vec!["A"]),
        ]);
        assert!(matches!(dangling, Err(BlockError::MissingConsumer(_))));
        let doubled = assemble(vec![
            BlockSpec::new(BlockKind::Driver, Vec::<String>::new(), vec!["A"]),
            BlockSpec::new(BlockKind::Driver, Vec::<String>::new(), vec!["A"]),
            BlockSpec::new(BlockKind::Sink, vec!["A"], Vec::<String>::new()),
        ]);
        assert!(matches!(doubled, Err(BlockError::DuplicateProducer(_))));
    }

    #[test]
    fn harness_shapes() {
        let copy = make_harness(BlockKind::Copy).unwrap();
        assert_eq!(copy.specs.len(), 4); // driver, copy, two sinks
        let and = make_harness(BlockKind::And).unwrap();
        assert_eq!(and.specs.len(), 4); // two drivers, and, sink
        let var = make_harness(BlockKind::Var).unwrap();
        assert_eq!(var.specs.len(), 4);
        assert!(matches!(
            make_harness(BlockKind::Driver),
            Err(BlockError::NonBasicBlock(_))
        ));
    }

    #[test]
    fn activation_orders_of_copy_and_and() {
        let copy = activation_orders(&make_harness(BlockKind::Copy).unwrap());
        let expected: BTreeSet<Vec<String>> =
            [order(&["A", "A1", "A2"]), order(&["A", "A2", "A1"])]
                .into_iter()
                .collect();
        assert_eq!(copy, expected);

        let and = activation_orders(&make_harness(BlockKind::And).unwrap());
        let expected: BTreeSet<Vec<String>> =
            [order(&["A1", "A2", "A"]), order(&["A2", "A1", "A"])]
                .into_iter()
                .collect();
        assert_eq!(and, expected);
    }

    #[test]
    fn activation_orders_of_or_and_var() {
        let or = activation_orders(&make_harness(BlockKind::Or).unwrap());
        let expected: BTreeSet<Vec<String>> = [
            order(&["A1", "A", "A2"]),
            order(&["A2", "A", "A1"]),
            order(&["A1", "A2", "A"]),
            order(&["A2", "A1", "A"]),
        ]
        .into_iter()
        .collect();
        assert_eq!(or, expected);

        let var = activation_orders(&make_harness(BlockKind::Var).unwrap());
        let expected: BTreeSet<Vec<String>> = [
            order(&["A1", "A", "A2"]),
            order(&["A2", "A", "A1"]),
            order(&["A", "A1", "A2"]),
            order(&["A", "A2", "A1"]),
        ]
        .into_iter()
        .collect();
        assert_eq!(var, expected);
    }

    #[test]
    fn behavior_graphs_are_well_formed() {
        for kind in BlockKind::BASIC {
            let graph = behavior_graph(kind).unwrap();
            let dot = graph.to_dot();
            assert!(dot.starts_with("digraph"));
            assert!(graph.nodes.iter().filter(|n| n.terminal).count() == 1);
        }
    }
}
