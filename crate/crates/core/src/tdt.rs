//! 3DT-instances: a span-`n` word of pairwise-distinct symbols and dots,
//! together with a set of ordered triples partitioning those symbols.
//!
//! The successor function cycles the positions of each triple
//! (`psi(a) -> psi(b) -> psi(c) -> psi(a)`). A triple is well-ordered when
//! `i < succ(i) < succ(succ(i))` for its minimum position `i`; firing a
//! 3DT-step on it deletes the triple and applies the corresponding
//! transposition to the remaining positions.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perm::{Permutation, Transposition};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TdtError {
    #[error("duplicate symbol {0:?}")]
    DuplicateSymbol(String),
    #[error("symbol {0:?} does not appear in both the word and a triple")]
    TripleWordMismatch(String),
    #[error("word has {len} tokens but span is {span}")]
    BadSpan { span: usize, len: usize },
    #[error("triple ({0}, {1}, {2}) must have three distinct symbols")]
    DegenerateTriple(String, String, String),
    #[error("triple {0} is not part of this instance")]
    UnknownTriple(Triple),
    #[error("triple {0} is not well-ordered")]
    NotWellOrdered(Triple),
    #[error("span mismatch: instance has span {instance}, permutation {permutation}")]
    SpanMismatch { instance: usize, permutation: usize },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// An ordered triple of symbol names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub a: String,
    pub b: String,
    pub c: String,
}

impl Triple {
    pub fn new(
        a: impl Into<String>,
        b: impl Into<String>,
        c: impl Into<String>,
    ) -> Result<Self, TdtError> {
        let (a, b, c) = (a.into(), b.into(), c.into());
        if a == b || b == c || a == c {
            return Err(TdtError::DegenerateTriple(a, b, c));
        }
        Ok(Triple { a, b, c })
    }

    pub fn symbols(&self) -> [&str; 3] {
        [&self.a, &self.b, &self.c]
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

#[derive(Debug)]
struct Alphabet {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

/// A 3DT-instance. Positions are 1-based; `psi` is stored implicitly as the
/// word itself. Immutable: [`TdtInstance::apply_step`] returns a new value.
#[derive(Debug, Clone)]
pub struct TdtInstance {
    span: usize,
    /// `word[p - 1]` is the symbol at position `p`, or `None` for a dot.
    word: Vec<Option<u32>>,
    triples: Vec<[u32; 3]>,
    alphabet: Arc<Alphabet>,
}

impl TdtInstance {
    pub fn new(
        span: usize,
        word: Vec<Option<String>>,
        triples: Vec<Triple>,
    ) -> Result<Self, TdtError> {
        if word.len() != span {
            return Err(TdtError::BadSpan {
                span,
                len: word.len(),
            });
        }
        let mut names = Vec::new();
        let mut index = HashMap::new();
        let mut intern = |name: &str| -> u32 {
            *index.entry(name.to_string()).or_insert_with(|| {
                names.push(name.to_string());
                (names.len() - 1) as u32
            })
        };

        let mut word_syms = HashSet::new();
        let word: Vec<Option<u32>> = word
            .iter()
            .map(|tok| tok.as_deref().map(&mut intern))
            .collect();
        for sym in word.iter().flatten() {
            if !word_syms.insert(*sym) {
                return Err(TdtError::DuplicateSymbol(names[*sym as usize].clone()));
            }
        }

        let mut triple_syms = HashSet::new();
        let triples: Vec<[u32; 3]> = triples
            .iter()
            .map(|t| {
                [
                    intern(&t.a),
                    intern(&t.b),
                    intern(&t.c),
                ]
            })
            .collect();
        for t in &triples {
            for &sym in t {
                if !triple_syms.insert(sym) {
                    return Err(TdtError::DuplicateSymbol(names[sym as usize].clone()));
                }
            }
        }

        // The triples must partition exactly the symbols of the word.
        if let Some(&sym) = word_syms.symmetric_difference(&triple_syms).next() {
            return Err(TdtError::TripleWordMismatch(names[sym as usize].clone()));
        }

        Ok(TdtInstance {
            span,
            word,
            triples,
            alphabet: Arc::new(Alphabet { names, index }),
        })
    }

    /// The empty instance of the given span: a word of dots, no triples.
    pub fn empty(span: usize) -> Self {
        TdtInstance {
            span,
            word: vec![None; span],
            triples: Vec::new(),
            alphabet: Arc::new(Alphabet {
                names: Vec::new(),
                index: HashMap::new(),
            }),
        }
    }

    pub fn span(&self) -> usize {
        self.span
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    /// Emptiness is having no symbols, regardless of span.
    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn triples(&self) -> Vec<Triple> {
        self.triples.iter().map(|t| self.resolve(t)).collect()
    }

    fn resolve(&self, t: &[u32; 3]) -> Triple {
        Triple {
            a: self.name(t[0]).to_string(),
            b: self.name(t[1]).to_string(),
            c: self.name(t[2]).to_string(),
        }
    }

    fn name(&self, sym: u32) -> &str {
        &self.alphabet.names[sym as usize]
    }

    /// Tokens of the word representation, `None` for dots.
    pub fn word_tokens(&self) -> Vec<Option<&str>> {
        self.word
            .iter()
            .map(|s| s.map(|sym| self.name(sym)))
            .collect()
    }

    /// Dot-free word.
    pub fn symbols_in_order(&self) -> Vec<&str> {
        self.word
            .iter()
            .flatten()
            .map(|&sym| self.name(sym))
            .collect()
    }

    /// `psi(name)`: the 1-based position of the symbol, if placed.
    pub fn position(&self, name: &str) -> Option<usize> {
        let sym = *self.alphabet.index.get(name)?;
        self.word
            .iter()
            .position(|&s| s == Some(sym))
            .map(|idx| idx + 1)
    }

    fn position_table(&self) -> HashMap<u32, usize> {
        let mut table = HashMap::with_capacity(self.triples.len() * 3);
        for (idx, &sym) in self.word.iter().enumerate() {
            if let Some(sym) = sym {
                table.insert(sym, idx + 1);
            }
        }
        table
    }

    fn find_triple(&self, t: &Triple) -> Result<usize, TdtError> {
        let lookup = |name: &str| self.alphabet.index.get(name).copied();
        let key = [lookup(&t.a), lookup(&t.b), lookup(&t.c)];
        self.triples
            .iter()
            .position(|tr| key == [Some(tr[0]), Some(tr[1]), Some(tr[2])])
            .ok_or_else(|| TdtError::UnknownTriple(t.clone()))
    }

    /// The successor function over the domain: `psi(a) -> psi(b) -> psi(c)
    /// -> psi(a)` for every triple.
    pub fn succ_map(&self) -> SuccMap {
        let pos = self.position_table();
        let mut map = BTreeMap::new();
        for t in &self.triples {
            let [pa, pb, pc] = [pos[&t[0]], pos[&t[1]], pos[&t[2]]];
            map.insert(pa, pb);
            map.insert(pb, pc);
            map.insert(pc, pa);
        }
        SuccMap { map }
    }

    fn step_indices(&self, triple_idx: usize) -> Option<(usize, usize, usize)> {
        let pos = self.position_table();
        let t = &self.triples[triple_idx];
        let [pa, pb, pc] = [pos[&t[0]], pos[&t[1]], pos[&t[2]]];
        // i = min position, j = succ(i), k = succ(j); well-ordered iff i < j < k.
        let (i, j, k) = if pa < pb && pa < pc {
            (pa, pb, pc)
        } else if pb < pc {
            (pb, pc, pa)
        } else {
            (pc, pa, pb)
        };
        (i < j && j < k).then_some((i, j, k))
    }

    /// The well-ordered triples, in triple-list order.
    pub fn enabled_triples(&self) -> Vec<Triple> {
        (0..self.triples.len())
            .filter(|&idx| self.step_indices(idx).is_some())
            .map(|idx| self.resolve(&self.triples[idx]))
            .collect()
    }

    /// `tau[a,b,c,psi]` for a well-ordered triple.
    pub fn step_transposition(&self, t: &Triple) -> Result<Transposition, TdtError> {
        let idx = self.find_triple(t)?;
        let (i, j, k) = self
            .step_indices(idx)
            .ok_or_else(|| TdtError::NotWellOrdered(t.clone()))?;
        Ok(Transposition::new(i, j, k).expect("0 < i < j < k <= n"))
    }

    /// The 3DT-step of parameter `t`: deletes the triple and remaps the
    /// remaining positions by `tau^{-1}`.
    pub fn apply_step(&self, t: &Triple) -> Result<TdtInstance, TdtError> {
        let idx = self.find_triple(t)?;
        let (i, j, k) = self
            .step_indices(idx)
            .ok_or_else(|| TdtError::NotWellOrdered(t.clone()))?;
        let tau = Transposition::new(i, j, k).unwrap();
        let removed = self.triples[idx];
        let mut word = vec![None; self.span];
        for (pos0, &sym) in self.word.iter().enumerate() {
            if let Some(sym) = sym {
                if removed.contains(&sym) {
                    continue;
                }
                word[tau.preimage(pos0 + 1) - 1] = Some(sym);
            }
        }
        let mut triples = self.triples.clone();
        triples.remove(idx);
        Ok(TdtInstance {
            span: self.span,
            word,
            triples,
            alphabet: Arc::clone(&self.alphabet),
        })
    }

    /// Equivalence with a permutation (the `I ~ pi` relation): `pi(0) = 0`,
    /// `pi(v) = pi(v-1)+1` off the domain, and `pi(v) = pi(succ^{-1}(v)-1)+1`
    /// on it.
    pub fn is_equivalent(&self, p: &Permutation) -> Result<bool, TdtError> {
        if p.span() != self.span {
            return Err(TdtError::SpanMismatch {
                instance: self.span,
                permutation: p.span(),
            });
        }
        let succ = self.succ_map();
        let pred = succ.inverse();
        for v in 1..=self.span {
            let expected = match pred.get(&v) {
                Some(&u) => p.image(u - 1) + 1,
                None => p.image(v - 1) + 1,
            };
            if p.image(v) != expected {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Canonical memoization key: each position encoded as its triple index
    /// and role letter, dots kept. Invariant under symbol renaming.
    pub fn canonical_key(&self) -> Vec<u8> {
        let pos = self.position_table();
        let mut ordered: Vec<&[u32; 3]> = self.triples.iter().collect();
        ordered.sort_by_key(|t| t.iter().map(|s| pos[s]).min());
        let mut code = HashMap::with_capacity(self.triples.len() * 3);
        for (idx, t) in ordered.iter().enumerate() {
            for (role, &sym) in t.iter().enumerate() {
                code.insert(sym, 1 + 3 * idx as u16 + role as u16);
            }
        }
        let mut key = Vec::with_capacity(self.span * 2);
        for &sym in &self.word {
            let v = sym.map_or(0, |s| code[&s]);
            key.extend_from_slice(&v.to_le_bytes());
        }
        key
    }

    /// Canonical text serialization: `span`, `word`, then `triple` lines in
    /// first-occurrence order.
    pub fn serialize(&self) -> String {
        let mut out = format!("span {}\n", self.span);
        out.push_str("word");
        for tok in &self.word {
            out.push(' ');
            match tok {
                Some(sym) => out.push_str(self.name(*sym)),
                None => out.push('.'),
            }
        }
        out.push('\n');
        let pos = self.position_table();
        let mut ordered: Vec<&[u32; 3]> = self.triples.iter().collect();
        ordered.sort_by_key(|t| t.iter().map(|s| pos[s]).min());
        for t in ordered {
            out.push_str(&format!(
                "triple {} {} {}\n",
                self.name(t[0]),
                self.name(t[1]),
                self.name(t[2])
            ));
        }
        out
    }

    /// Parses the 3DT text format. Any non-dot token is a symbol name.
    pub fn parse(text: &str) -> Result<Self, TdtError> {
        let mut span = None;
        let mut word = None;
        let mut triples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| TdtError::Parse {
                line: lineno + 1,
                message: message.to_string(),
            };
            let mut tokens = line.split_whitespace();
            match tokens.next() {
                Some("span") => {
                    let value = tokens
                        .next()
                        .and_then(|t| t.parse::<usize>().ok())
                        .ok_or_else(|| err("expected `span N`"))?;
                    span = Some(value);
                }
                Some("word") => {
                    word = Some(
                        tokens
                            .map(|tok| (tok != ".").then(|| tok.to_string()))
                            .collect::<Vec<_>>(),
                    );
                }
                Some("triple") => {
                    let syms: Vec<&str> = tokens.collect();
                    if syms.len() != 3 {
                        return Err(err("expected `triple A B C`"));
                    }
                    triples.push(Triple::new(syms[0], syms[1], syms[2])?);
                }
                _ => return Err(err("expected `span`, `word` or `triple`")),
            }
        }
        let span = span.ok_or(TdtError::Parse {
            line: 0,
            message: "missing `span` line".to_string(),
        })?;
        let word = word.ok_or(TdtError::Parse {
            line: 0,
            message: "missing `word` line".to_string(),
        })?;
        TdtInstance::new(span, word, triples)
    }
}

impl PartialEq for TdtInstance {
    fn eq(&self, other: &Self) -> bool {
        self.span == other.span
            && self.word_tokens() == other.word_tokens()
            && self.triples() == other.triples()
    }
}

impl Eq for TdtInstance {}

/// The successor bijection over the domain of an instance: fixed-point-free
/// with `succ . succ . succ = id`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuccMap {
    map: BTreeMap<usize, usize>,
}

impl SuccMap {
    pub fn get(&self, pos: &usize) -> Option<&usize> {
        self.map.get(pos)
    }

    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.map.keys().copied()
    }

    pub fn pairs(&self) -> &BTreeMap<usize, usize> {
        &self.map
    }

    pub fn inverse(&self) -> BTreeMap<usize, usize> {
        self.map.iter().map(|(&u, &v)| (v, u)).collect()
    }

    pub fn is_fixed_point_free_order_three(&self) -> bool {
        self.map.iter().all(|(&u, &v)| {
            u != v && self.map.get(&v).and_then(|w| self.map.get(w)) == Some(&u)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// I = a1 c2 b1 b2 c1 a2 with triples (a1,b1,c1), (a2,b2,c2).
    pub(crate) fn two_triple_instance() -> TdtInstance {
        TdtInstance::parse(
            "span 6\nword a1 c2 b1 b2 c1 a2\ntriple a1 b1 c1\ntriple a2 b2 c2\n",
        )
        .unwrap()
    }

    fn two_triple_instance_after_step() -> TdtInstance {
        TdtInstance::parse("span 6\nword . b2 . c2 . a2\ntriple a2 b2 c2\n").unwrap()
    }

    #[test]
    fn validates_instance_invariants() {
        assert!(matches!(
            TdtInstance::parse("span 3\nword a a b\ntriple a a b"),
            Err(TdtError::DegenerateTriple(..))
        ));
        assert!(matches!(
            TdtInstance::parse("span 4\nword a b a .\ntriple a b c"),
            Err(TdtError::DuplicateSymbol(_))
        ));
        assert!(matches!(
            TdtInstance::parse("span 4\nword a b c d\ntriple a b c"),
            Err(TdtError::TripleWordMismatch(_))
        ));
        assert!(matches!(
            TdtInstance::parse("span 5\nword a b c\ntriple a b c"),
            Err(TdtError::BadSpan { .. })
        ));
    }

    #[test]
    fn succ_map_of_interleaved_triples() {
        let succ = two_triple_instance().succ_map();
        let expected: BTreeMap<usize, usize> =
            [(1, 3), (2, 6), (3, 5), (4, 2), (5, 1), (6, 4)].into();
        assert_eq!(succ.pairs(), &expected);
        assert!(succ.is_fixed_point_free_order_three());

        let succ = two_triple_instance_after_step().succ_map();
        let expected: BTreeMap<usize, usize> = [(2, 4), (4, 6), (6, 2)].into();
        assert_eq!(succ.pairs(), &expected);

        assert!(TdtInstance::empty(6).succ_map().pairs().is_empty());
    }

    #[test]
    fn enabled_triples_and_step_transpositions() {
        let i = two_triple_instance();
        assert_eq!(
            i.enabled_triples(),
            vec![Triple::new("a1", "b1", "c1").unwrap()]
        );
        assert_eq!(
            i.step_transposition(&Triple::new("a1", "b1", "c1").unwrap())
                .unwrap(),
            Transposition::new(1, 3, 5).unwrap()
        );
        assert!(matches!(
            i.step_transposition(&Triple::new("a2", "b2", "c2").unwrap()),
            Err(TdtError::NotWellOrdered(_))
        ));

        let ip = two_triple_instance_after_step();
        assert_eq!(
            ip.enabled_triples(),
            vec![Triple::new("a2", "b2", "c2").unwrap()]
        );
        assert_eq!(
            ip.step_transposition(&Triple::new("a2", "b2", "c2").unwrap())
                .unwrap(),
            Transposition::new(2, 4, 6).unwrap()
        );
    }

    #[test]
    fn apply_step_rewrites_word_and_drops_triple() {
        let i = two_triple_instance();
        let next = i.apply_step(&Triple::new("a1", "b1", "c1").unwrap()).unwrap();
        assert_eq!(next, two_triple_instance_after_step());
        assert_eq!(next.triple_count(), i.triple_count() - 1);
        let end = next
            .apply_step(&Triple::new("a2", "b2", "c2").unwrap())
            .unwrap();
        assert!(end.is_empty());
        assert_eq!(end.serialize(), "span 6\nword . . . . . .\n");
    }

    #[test]
    fn equivalence_definition() {
        // The empty instance is equivalent to the identity.
        let eps = TdtInstance::empty(6);
        assert!(eps.is_equivalent(&Permutation::identity(6)).unwrap());
        // The two-triple instance is not equivalent to Id_6 (d_b mismatch).
        assert!(!two_triple_instance().is_equivalent(&Permutation::identity(6)).unwrap());
        assert!(matches!(
            two_triple_instance().is_equivalent(&Permutation::identity(5)),
            Err(TdtError::SpanMismatch { .. })
        ));
    }

    #[test]
    fn canonical_key_ignores_symbol_names() {
        let i = two_triple_instance();
        let renamed = TdtInstance::parse(
            "span 6\nword p r q s t u\ntriple p q t\ntriple u s r\n",
        )
        .unwrap();
        assert_eq!(i.canonical_key(), renamed.canonical_key());
        let other = two_triple_instance_after_step();
        assert_ne!(i.canonical_key(), other.canonical_key());
    }

    #[test]
    fn parse_serialize_is_identity_on_canonical_files() {
        let text = "span 6\nword a1 c2 b1 b2 c1 a2\ntriple a1 b1 c1\ntriple a2 b2 c2\n";
        let inst = TdtInstance::parse(text).unwrap();
        assert_eq!(inst.serialize(), text);
        let eps = "span 6\nword . . . . . .\n";
        assert_eq!(TdtInstance::parse(eps).unwrap().serialize(), eps);
    }
}
