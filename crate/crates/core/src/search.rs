//! Collapsibility search over 3DT-instances and exact / decision solvers for
//! the transposition distance.
//!
//! Both decision searches are depth-first with a memoized dead-state set
//! keyed by canonical state keys. "Not collapsible" (resp. "no") is reported
//! only when the exhaustive search completes within budget; running out of
//! budget is a distinct outcome.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;

use dashmap::DashSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perm::{PermError, Permutation, Transposition};
use crate::tdt::{TdtError, TdtInstance, Triple};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("search budget exhausted after {explored} states")]
    BudgetExhausted { explored: u64 },
    #[error("distance exceeds the maximum depth {max_depth}")]
    DepthExceeded { max_depth: usize },
    #[error("span {span} exceeds the oracle guard {max}")]
    SpanTooLarge { span: usize, max: usize },
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("step {index}: {source}")]
    Step {
        index: usize,
        #[source]
        source: TdtError,
    },
    #[error("step {index}: recorded transposition {recorded} does not match {actual}")]
    TranspositionMismatch {
        index: usize,
        recorded: Transposition,
        actual: Transposition,
    },
    #[error("step {index}: recorded word does not match the replayed state")]
    WordMismatch { index: usize },
    #[error("step {index}: {source}")]
    Perm {
        index: usize,
        #[source]
        source: PermError,
    },
    #[error("bad trace record: {0}")]
    Format(String),
}

/// Rule used to order the candidate moves of a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MoveOrder {
    /// Prefer steps whose triple's minimum position is smallest; ties broken
    /// by triple index. Deterministic, reproducible traces.
    #[default]
    MinPosition,
    /// Keep the instance's triple-list order.
    ListOrder,
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Maximum number of dead states kept in the memo table. Exceeding it is
    /// reported as budget exhaustion.
    pub memo_capacity: usize,
    /// Optional cutoff on expanded states, also reported as exhaustion.
    pub node_budget: Option<u64>,
    pub order: MoveOrder,
    /// Number of DFS workers. Results are deterministic only for 1.
    pub worker_count: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            memo_capacity: 10_000_000,
            node_budget: None,
            order: MoveOrder::MinPosition,
            worker_count: 1,
        }
    }
}

/// A witness sequence of 3DT-steps with the transposition fired at each
/// state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepTrace {
    pub initial_key: Vec<u8>,
    pub steps: Vec<(Triple, Transposition)>,
}

impl StepTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// One line of a trace file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub index: usize,
    pub triple: [String; 3],
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub word_after: String,
}

// ---------------------------------------------------------------------------
// Generic memoized DFS engine.

trait Space: Sync {
    type State: Clone + Send + Sync;
    type Move: Clone + Send + Sync;

    fn is_goal(&self, state: &Self::State) -> bool;
    fn key(&self, state: &Self::State) -> Vec<u8>;
    /// Candidate moves, already deterministically ordered.
    fn moves(&self, state: &Self::State) -> Vec<Self::Move>;
    fn step(&self, state: &Self::State, mv: &Self::Move) -> Self::State;
}

struct Shared {
    dead: DashSet<Vec<u8>>,
    memo_capacity: usize,
    node_budget: Option<u64>,
    expanded: AtomicU64,
    out_of_budget: AtomicBool,
    stop: AtomicBool,
}

enum Dfs<M> {
    Found(Vec<M>),
    Dead,
    Aborted,
}

fn dfs<S: Space>(space: &S, state: &S::State, shared: &Shared) -> Dfs<S::Move> {
    if space.is_goal(state) {
        return Dfs::Found(Vec::new());
    }
    if shared.stop.load(Ordering::Relaxed) {
        return Dfs::Aborted;
    }
    let key = space.key(state);
    if shared.dead.contains(&key) {
        return Dfs::Dead;
    }
    let expanded = shared.expanded.fetch_add(1, Ordering::Relaxed) + 1;
    if shared.node_budget.is_some_and(|b| expanded > b) {
        shared.out_of_budget.store(true, Ordering::Relaxed);
        shared.stop.store(true, Ordering::Relaxed);
        return Dfs::Aborted;
    }
    for mv in space.moves(state) {
        let next = space.step(state, &mv);
        match dfs(space, &next, shared) {
            Dfs::Found(mut path) => {
                path.push(mv);
                return Dfs::Found(path);
            }
            Dfs::Dead => {}
            Dfs::Aborted => return Dfs::Aborted,
        }
    }
    if shared.dead.len() >= shared.memo_capacity {
        shared.out_of_budget.store(true, Ordering::Relaxed);
        shared.stop.store(true, Ordering::Relaxed);
        return Dfs::Aborted;
    }
    shared.dead.insert(key);
    Dfs::Dead
}

/// Exhaustive reachability search; `Ok(Some(path))` on success, `Ok(None)`
/// for a definite negative, `Err(BudgetExhausted)` otherwise. The returned
/// path is in application order.
fn engine_search<S: Space>(
    space: &S,
    root: &S::State,
    cfg: &SearchConfig,
) -> Result<Option<Vec<S::Move>>, SearchError> {
    let shared = Shared {
        dead: DashSet::new(),
        memo_capacity: cfg.memo_capacity,
        node_budget: cfg.node_budget,
        expanded: AtomicU64::new(0),
        out_of_budget: AtomicBool::new(false),
        stop: AtomicBool::new(false),
    };

    let outcome = if cfg.worker_count <= 1 {
        dfs(space, root, &shared)
    } else {
        parallel_root(space, root, cfg.worker_count, &shared)
    };

    match outcome {
        Dfs::Found(mut path) => {
            path.reverse();
            Ok(Some(path))
        }
        Dfs::Dead => Ok(None),
        Dfs::Aborted => Err(SearchError::BudgetExhausted {
            explored: shared.expanded.load(Ordering::Relaxed),
        }),
    }
}

/// Fans the root branches out to workers over a shared dead-state set.
fn parallel_root<S: Space>(
    space: &S,
    root: &S::State,
    workers: usize,
    shared: &Shared,
) -> Dfs<S::Move> {
    if space.is_goal(root) {
        return Dfs::Found(Vec::new());
    }
    let moves = space.moves(root);
    let next_move = AtomicUsize::new(0);
    let found: Mutex<Option<Vec<S::Move>>> = Mutex::new(None);
    let aborted = AtomicBool::new(false);

    std::thread::scope(|scope| {
        for _ in 0..workers.min(moves.len()).max(1) {
            scope.spawn(|| loop {
                let idx = next_move.fetch_add(1, Ordering::Relaxed);
                if idx >= moves.len() || shared.stop.load(Ordering::Relaxed) {
                    break;
                }
                let mv = moves[idx].clone();
                let child = space.step(root, &mv);
                match dfs(space, &child, shared) {
                    Dfs::Found(mut path) => {
                        path.push(mv);
                        *found.lock().unwrap() = Some(path);
                        shared.stop.store(true, Ordering::Relaxed);
                        break;
                    }
                    Dfs::Dead => {}
                    Dfs::Aborted => {
                        aborted.store(true, Ordering::Relaxed);
                        break;
                    }
                }
            });
        }
    });

    let found = found.into_inner().unwrap();
    if let Some(path) = found {
        Dfs::Found(path)
    } else if aborted.load(Ordering::Relaxed) {
        Dfs::Aborted
    } else {
        Dfs::Dead
    }
}

// ---------------------------------------------------------------------------
// Collapsibility of 3DT-instances.

struct TdtSpace {
    order: MoveOrder,
}

impl Space for TdtSpace {
    type State = TdtInstance;
    type Move = (Triple, Transposition);

    fn is_goal(&self, state: &TdtInstance) -> bool {
        state.is_empty()
    }

    fn key(&self, state: &TdtInstance) -> Vec<u8> {
        state.canonical_key()
    }

    fn moves(&self, state: &TdtInstance) -> Vec<Self::Move> {
        let mut moves: Vec<(Triple, Transposition)> = state
            .enabled_triples()
            .into_iter()
            .map(|t| {
                let tau = state.step_transposition(&t).expect("enabled triple");
                (t, tau)
            })
            .collect();
        if self.order == MoveOrder::MinPosition {
            moves.sort_by_key(|(_, tau)| tau.i());
        }
        moves
    }

    fn step(&self, state: &TdtInstance, mv: &Self::Move) -> TdtInstance {
        state.apply_step(&mv.0).expect("enabled triple")
    }
}

/// Searches for a sequence of 3DT-steps collapsing the instance to the empty
/// instance. `Ok(None)` means definitely not collapsible.
pub fn collapse_search(
    inst: &TdtInstance,
    cfg: &SearchConfig,
) -> Result<Option<StepTrace>, SearchError> {
    let space = TdtSpace { order: cfg.order };
    let steps = engine_search(&space, inst, cfg)?;
    Ok(steps.map(|steps| StepTrace {
        initial_key: inst.canonical_key(),
        steps,
    }))
}

// ---------------------------------------------------------------------------
// Sorting with d_b / 3 transpositions.

struct ThreeBpSpace;

impl Space for ThreeBpSpace {
    type State = Permutation;
    type Move = Transposition;

    fn is_goal(&self, state: &Permutation) -> bool {
        state.is_identity()
    }

    fn key(&self, state: &Permutation) -> Vec<u8> {
        state.state_key()
    }

    fn moves(&self, state: &Permutation) -> Vec<Transposition> {
        // three_bp_moves scans candidate minimum positions in increasing
        // order, so the list is already sorted by i.
        state.three_bp_moves()
    }

    fn step(&self, state: &Permutation, mv: &Transposition) -> Permutation {
        state.apply(mv).expect("k <= n")
    }
}

/// Can the permutation be sorted with exactly `d_b / 3` transpositions?
/// Searches only moves removing three breakpoints, which is complete for
/// this decision. Returns a witness scenario on success; `Ok(None)` is a
/// definite "no".
pub fn db3_sort_decision(
    p: &Permutation,
    cfg: &SearchConfig,
) -> Result<Option<Vec<Transposition>>, SearchError> {
    if !p.breakpoints().count().is_multiple_of(3) {
        return Ok(None);
    }
    engine_search(&ThreeBpSpace, p, cfg)
}

// ---------------------------------------------------------------------------
// Exact distance.

/// All transpositions over `[0..n]`.
pub fn all_transpositions(n: usize) -> Vec<Transposition> {
    let mut out = Vec::new();
    for i in 1..n {
        for j in (i + 1)..n {
            for k in (j + 1)..=n {
                out.push(Transposition::new(i, j, k).unwrap());
            }
        }
    }
    out
}

/// Exact transposition distance by iterative deepening over all
/// transpositions, pruned with the breakpoint lower bound.
pub fn exact_distance(p: &Permutation, max_depth: usize) -> Result<usize, SearchError> {
    fn bounded(p: &Permutation, limit: usize) -> bool {
        if p.is_identity() {
            return true;
        }
        let lb = p.breakpoint_lower_bound();
        if lb > limit {
            return false;
        }
        // Try breakpoint-reducing moves first; they reach the bound fastest.
        let mut children: Vec<Permutation> = all_transpositions(p.span())
            .iter()
            .map(|t| p.apply(t).unwrap())
            .collect();
        children.sort_by_key(|c| c.breakpoints().count());
        children.into_iter().any(|c| bounded(&c, limit - 1))
    }

    let lb = p.breakpoint_lower_bound();
    for limit in lb..=max_depth {
        if bounded(p, limit) {
            return Ok(limit);
        }
    }
    Err(SearchError::DepthExceeded { max_depth })
}

/// Independent brute-force oracle: breadth-first search over all reachable
/// permutations. Guarded to spans `<= 10`.
pub fn bfs_distance_oracle(p: &Permutation) -> Result<usize, SearchError> {
    const MAX_SPAN: usize = 10;
    if p.span() > MAX_SPAN {
        return Err(SearchError::SpanTooLarge {
            span: p.span(),
            max: MAX_SPAN,
        });
    }
    let moves = all_transpositions(p.span());
    let mut seen = std::collections::HashSet::new();
    seen.insert(p.state_key());
    let mut frontier = vec![p.clone()];
    let mut dist = 0;
    loop {
        if frontier.iter().any(Permutation::is_identity) {
            return Ok(dist);
        }
        let mut next = Vec::new();
        for state in &frontier {
            for t in &moves {
                let child = state.apply(t).unwrap();
                if seen.insert(child.state_key()) {
                    next.push(child);
                }
            }
        }
        frontier = next;
        dist += 1;
        debug_assert!(!frontier.is_empty(), "identity is always reachable");
    }
}

/// Exact distances of every permutation of `[0..n]` with fixed endpoints,
/// via one breadth-first sweep from the identity (the move set is closed
/// under inversion). Keys are permutation state keys.
pub fn distance_table_from_identity(
    n: usize,
) -> std::collections::HashMap<Vec<u8>, usize> {
    let moves = all_transpositions(n);
    let id = Permutation::identity(n);
    let mut table = std::collections::HashMap::new();
    table.insert(id.state_key(), 0);
    let mut frontier = vec![id];
    let mut dist = 0;
    while !frontier.is_empty() {
        dist += 1;
        let mut next = Vec::new();
        for state in &frontier {
            for t in &moves {
                let child = state.apply(t).unwrap();
                if let std::collections::hash_map::Entry::Vacant(slot) =
                    table.entry(child.state_key())
                {
                    slot.insert(dist);
                    next.push(child);
                }
            }
        }
        frontier = next;
    }
    table
}

// ---------------------------------------------------------------------------
// Trace files and replay.

/// Renders the trace as line-oriented JSON records, replaying the steps to
/// record the word after each one.
pub fn write_trace(inst: &TdtInstance, trace: &StepTrace) -> Result<String, ReplayError> {
    let mut out = String::new();
    let mut state = inst.clone();
    for (index, (triple, tau)) in trace.steps.iter().enumerate() {
        state = state
            .apply_step(triple)
            .map_err(|source| ReplayError::Step { index, source })?;
        let word = state
            .word_tokens()
            .iter()
            .map(|t| t.unwrap_or("."))
            .collect::<Vec<_>>()
            .join(" ");
        let record = TraceRecord {
            index,
            triple: [triple.a.clone(), triple.b.clone(), triple.c.clone()],
            i: tau.i(),
            j: tau.j(),
            k: tau.k(),
            word_after: word,
        };
        out.push_str(&serde_json::to_string(&record).expect("trace record is serializable"));
        out.push('\n');
    }
    Ok(out)
}

pub fn read_trace(text: &str) -> Result<Vec<TraceRecord>, ReplayError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| ReplayError::Format(e.to_string())))
        .collect()
}

/// Replays trace records against an instance, checking each recorded
/// transposition and word.
pub fn replay_on_instance(
    inst: &TdtInstance,
    records: &[TraceRecord],
) -> Result<TdtInstance, ReplayError> {
    let mut state = inst.clone();
    for record in records {
        let index = record.index;
        let triple = Triple::new(
            record.triple[0].clone(),
            record.triple[1].clone(),
            record.triple[2].clone(),
        )
        .map_err(|source| ReplayError::Step { index, source })?;
        let tau = state
            .step_transposition(&triple)
            .map_err(|source| ReplayError::Step { index, source })?;
        let recorded = Transposition::new(record.i, record.j, record.k)
            .map_err(|source| ReplayError::Perm { index, source })?;
        if tau != recorded {
            return Err(ReplayError::TranspositionMismatch {
                index,
                recorded,
                actual: tau,
            });
        }
        state = state
            .apply_step(&triple)
            .map_err(|source| ReplayError::Step { index, source })?;
        let word = state
            .word_tokens()
            .iter()
            .map(|t| t.unwrap_or("."))
            .collect::<Vec<_>>()
            .join(" ");
        if word != record.word_after {
            return Err(ReplayError::WordMismatch { index });
        }
    }
    Ok(state)
}

/// Replays the transpositions of a trace against a permutation.
pub fn replay_on_permutation(
    p: &Permutation,
    records: &[TraceRecord],
) -> Result<Permutation, ReplayError> {
    let mut state = p.clone();
    for record in records {
        let index = record.index;
        let tau = Transposition::new(record.i, record.j, record.k)
            .map_err(|source| ReplayError::Perm { index, source })?;
        state = state
            .apply(&tau)
            .map_err(|source| ReplayError::Perm { index, source })?;
    }
    Ok(state)
}

/// Replays a step trace, checking legality at each state.
pub fn replay_trace(inst: &TdtInstance, trace: &StepTrace) -> Result<TdtInstance, ReplayError> {
    let mut state = inst.clone();
    for (index, (triple, tau)) in trace.steps.iter().enumerate() {
        let actual = state
            .step_transposition(triple)
            .map_err(|source| ReplayError::Step { index, source })?;
        if actual != *tau {
            return Err(ReplayError::TranspositionMismatch {
                index,
                recorded: *tau,
                actual,
            });
        }
        state = state
            .apply_step(triple)
            .map_err(|source| ReplayError::Step { index, source })?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nested_instance() -> TdtInstance {
        TdtInstance::parse(
            "span 9\nword a1 e a2 b1 d b2 c1 f c2\n\
             triple a1 b1 c1\ntriple a2 b2 c2\ntriple d e f\n",
        )
        .unwrap()
    }

    #[test]
    fn collapse_search_finds_nested_path() {
        let inst = nested_instance();
        let trace = collapse_search(&inst, &SearchConfig::default())
            .unwrap()
            .expect("nested instance is collapsible");
        assert_eq!(trace.len(), 3);
        assert!(replay_trace(&inst, &trace).unwrap().is_empty());
    }

    #[test]
    fn collapse_search_detects_dead_instance() {
        let inst =
            TdtInstance::parse("span 3\nword b a c\ntriple a b c\n").unwrap();
        assert_eq!(collapse_search(&inst, &SearchConfig::default()).unwrap(), None);
    }

    #[test]
    fn collapse_search_reports_budget_exhaustion() {
        let inst = nested_instance();
        let cfg = SearchConfig {
            node_budget: Some(1),
            // force the dead-set cap as well
            memo_capacity: 0,
            ..SearchConfig::default()
        };
        // A root with enabled moves but no budget must not report "no".
        let tight = SearchConfig {
            node_budget: Some(0),
            ..SearchConfig::default()
        };
        assert!(matches!(
            collapse_search(&inst, &tight),
            Err(SearchError::BudgetExhausted { .. })
        ));
        assert!(matches!(
            collapse_search(&inst, &cfg),
            Err(SearchError::BudgetExhausted { .. })
        ));
    }

    #[test]
    fn parallel_collapse_agrees() {
        let inst = nested_instance();
        let cfg = SearchConfig {
            worker_count: 4,
            ..SearchConfig::default()
        };
        let trace = collapse_search(&inst, &cfg).unwrap().unwrap();
        assert!(replay_trace(&inst, &trace).unwrap().is_empty());
    }

    #[test]
    fn exact_distance_small_cases() {
        let p: Permutation = "0 2 4 3 1 5".parse().unwrap();
        assert_eq!(exact_distance(&p, 8).unwrap(), 2);
        assert_eq!(bfs_distance_oracle(&p).unwrap(), 2);
        assert_eq!(exact_distance(&Permutation::identity(9), 8).unwrap(), 0);
        let p: Permutation = "0 2 1 3".parse().unwrap();
        assert_eq!(exact_distance(&p, 8).unwrap(), 1);
        assert_eq!(
            exact_distance(&"0 2 4 3 1 5".parse().unwrap(), 1),
            Err(SearchError::DepthExceeded { max_depth: 1 })
        );
    }

    #[test]
    fn oracle_guards_large_spans() {
        assert!(matches!(
            bfs_distance_oracle(&Permutation::identity(11)),
            Err(SearchError::SpanTooLarge { .. })
        ));
        assert_eq!(bfs_distance_oracle(&Permutation::identity(5)).unwrap(), 0);
    }

    #[test]
    fn db3_decision_rejects_non_multiples_of_three() {
        let p: Permutation = "0 2 4 3 1 5".parse().unwrap();
        assert_eq!(db3_sort_decision(&p, &SearchConfig::default()).unwrap(), None);
    }

    #[test]
    fn trace_files_roundtrip_and_replay() {
        let inst = nested_instance();
        let trace = collapse_search(&inst, &SearchConfig::default())
            .unwrap()
            .unwrap();
        let text = write_trace(&inst, &trace).unwrap();
        let records = read_trace(&text).unwrap();
        assert_eq!(records.len(), trace.len());
        let end = replay_on_instance(&inst, &records).unwrap();
        assert!(end.is_empty());
    }
}
