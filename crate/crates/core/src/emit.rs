//! Emission of a permutation equivalent to an assembled instance, via
//! per-block image tables, plus the 3-permutation check.
//!
//! The emitted permutation has d_b = n and is built so that sorting it with
//! n/3 transpositions is exactly collapsing the instance.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::blocks::{Assembling, BlockKind};
use crate::perm::Permutation;
use crate::tdt::TdtError;

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("layout is defined only for the four basic block kinds, not {0}")]
    NonBasic(BlockKind),
    #[error("emitted permutation fails a self-check: {0}")]
    SelfCheck(String),
    #[error(transparent)]
    Tdt(#[from] TdtError),
}

/// Position bookkeeping of an emission: the image interval `(p_h, q_h]` of
/// each block, the two anchors `alpha`, `beta` of each variable, and the
/// image set `P_h` each block maps onto.
#[derive(Debug, Clone)]
pub struct Layout {
    pub p: Vec<usize>,
    pub q: Vec<usize>,
    pub alpha: BTreeMap<String, usize>,
    pub beta: BTreeMap<String, usize>,
    pub position_sets: Vec<BTreeSet<usize>>,
}

impl Layout {
    /// Structured text report of the p/q and alpha/beta tables.
    pub fn report(&self) -> String {
        let mut out = String::new();
        for h in 0..self.p.len() {
            let _ = writeln!(out, "block {} p={} q={}", h + 1, self.p[h], self.q[h]);
        }
        for (id, &alpha) in &self.alpha {
            let _ = writeln!(out, "variable {id} alpha={alpha} beta={}", self.beta[id]);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct EmittedPermutation {
    pub permutation: Permutation,
    pub layout: Layout,
}

/// `(alpha, beta)` offsets from `p_h` for each input slot of a block kind.
fn anchor_offsets(kind: BlockKind) -> &'static [(usize, usize)] {
    match kind {
        BlockKind::Copy => &[(0, 4)],
        BlockKind::And => &[(0, 7), (3, 9)],
        BlockKind::Or => &[(0, 13), (3, 16)],
        BlockKind::Var => &[(5, 9)],
        BlockKind::Driver | BlockKind::Sink => unreachable!("rejected earlier"),
    }
}

/// One entry of a block's image table: an offset from `p_h` or from an
/// output variable's anchors.
#[derive(Debug, Clone, Copy)]
enum Img {
    P(usize),
    /// `alpha` of the n-th output variable, plus offset.
    OutA(usize, usize),
    /// `beta` of the n-th output variable, plus offset.
    OutB(usize, usize),
}

use Img::{OutA, OutB, P};

const COPY_IMAGES: &[Img] = &[
    OutA(0, 2),
    P(8),
    P(4),
    P(3),
    OutA(1, 2),
    P(7),
    OutB(0, 1),
    OutA(0, 1),
    P(6),
    OutB(1, 1),
    OutA(1, 1),
    P(9),
];

const AND_IMAGES: &[Img] = &[
    P(14),
    P(7),
    P(3),
    P(13),
    P(9),
    P(6),
    OutA(0, 2),
    P(12),
    P(11),
    OutB(0, 1),
    OutA(0, 1),
    P(15),
];

const OR_IMAGES: &[Img] = &[
    P(7),
    P(13),
    P(3),
    P(9),
    OutA(0, 2),
    P(12),
    P(11),
    OutB(0, 1),
    OutA(0, 1),
    P(16),
    P(6),
    P(15),
    P(10),
    P(8),
    P(18),
];

const VAR_IMAGES: &[Img] = &[
    OutA(0, 2),
    P(5),
    P(3),
    OutA(1, 2),
    P(12),
    P(1),
    P(14),
    P(4),
    OutB(0, 1),
    OutA(0, 1),
    P(13),
    P(9),
    P(8),
    P(2),
    P(11),
    OutB(1, 1),
    OutA(1, 1),
    P(15),
];

fn image_table(kind: BlockKind) -> &'static [Img] {
    match kind {
        BlockKind::Copy => COPY_IMAGES,
        BlockKind::And => AND_IMAGES,
        BlockKind::Or => OR_IMAGES,
        BlockKind::Var => VAR_IMAGES,
        BlockKind::Driver | BlockKind::Sink => unreachable!("rejected earlier"),
    }
}

/// Computes the p/q chain, the variable anchors, and the image partition.
/// Rejects assemblings containing harness blocks.
pub fn compute_layout(a: &Assembling) -> Result<Layout, EmitError> {
    if let Some(spec) = a.specs.iter().find(|s| !s.kind.is_basic()) {
        return Err(EmitError::NonBasic(spec.kind));
    }
    let n = a.instance.span();
    let blocks = a.specs.len();
    let mut p = Vec::with_capacity(blocks);
    let mut q = Vec::with_capacity(blocks);
    let mut alpha = BTreeMap::new();
    let mut beta = BTreeMap::new();
    let mut cursor = 0;
    for (h0, spec) in a.specs.iter().enumerate() {
        let h = h0 + 1;
        let (num_in, num_out) = spec.kind.arity();
        p.push(cursor);
        for (slot, id) in spec.inputs.iter().enumerate() {
            let (da, db) = anchor_offsets(spec.kind)[slot];
            alpha.insert(id.clone(), cursor + da);
            beta.insert(id.clone(), cursor + db);
        }
        let len = a.decomposition.t(h) - a.decomposition.s(h);
        cursor = cursor + len + 3 * num_in - 3 * num_out;
        q.push(cursor);
    }
    if cursor != n {
        return Err(EmitError::SelfCheck(format!(
            "q of the last block is {cursor}, expected the span {n}"
        )));
    }

    let mut position_sets = Vec::with_capacity(blocks);
    for (h0, spec) in a.specs.iter().enumerate() {
        let mut set: BTreeSet<usize> = (p[h0] + 1..=q[h0]).collect();
        for id in &spec.outputs {
            set.extend([alpha[id] + 1, alpha[id] + 2, beta[id] + 1]);
        }
        for id in &spec.inputs {
            for v in [alpha[id] + 1, alpha[id] + 2, beta[id] + 1] {
                if !set.remove(&v) {
                    return Err(EmitError::SelfCheck(format!(
                        "image {v} of input {id} missing from its block interval"
                    )));
                }
            }
        }
        let h = h0 + 1;
        if set.len() != a.decomposition.t(h) - a.decomposition.s(h) {
            return Err(EmitError::SelfCheck(format!(
                "image set of block {h} has size {}, expected {}",
                set.len(),
                a.decomposition.t(h) - a.decomposition.s(h)
            )));
        }
        position_sets.push(set);
    }
    let mut union = BTreeSet::new();
    for set in &position_sets {
        union.extend(set.iter().copied());
    }
    if union.len() != n || union.last() != Some(&n) || union.first() != Some(&1) {
        return Err(EmitError::SelfCheck(
            "image sets do not partition 1..=n".to_string(),
        ));
    }

    Ok(Layout {
        p,
        q,
        alpha,
        beta,
        position_sets,
    })
}

/// Emits the permutation equivalent to the assembling, block by block from
/// the literal image tables, then re-verifies the defining rules, the
/// per-block bijections, and equivalence with the instance.
pub fn emit_permutation(a: &Assembling) -> Result<EmittedPermutation, EmitError> {
    let layout = compute_layout(a)?;
    let n = a.instance.span();
    let mut images = vec![0; n + 1];
    for (h0, spec) in a.specs.iter().enumerate() {
        let s = a.decomposition.s(h0 + 1);
        for (r, entry) in image_table(spec.kind).iter().enumerate() {
            images[s + 1 + r] = match *entry {
                P(k) => layout.p[h0] + k,
                OutA(slot, off) => layout.alpha[&spec.outputs[slot]] + off,
                OutB(slot, off) => layout.beta[&spec.outputs[slot]] + off,
            };
        }
    }
    let permutation = Permutation::new(images)
        .map_err(|e| EmitError::SelfCheck(format!("images are not a permutation: {e}")))?;

    check_emission(a, &layout, &permutation)?;
    Ok(EmittedPermutation {
        permutation,
        layout,
    })
}

/// Independent re-derivation of the emission's contract: boundary images,
/// per-block bijections onto the image sets, the four anchor rules and four
/// anchor properties per variable, the successor rule everywhere else, and
/// equivalence with the instance.
fn check_emission(a: &Assembling, layout: &Layout, pi: &Permutation) -> Result<(), EmitError> {
    let fail = |msg: String| Err(EmitError::SelfCheck(msg));
    for h in 1..=a.specs.len() {
        let (s, t) = (a.decomposition.s(h), a.decomposition.t(h));
        if pi.image(s) != layout.p[h - 1] || pi.image(t) != layout.q[h - 1] {
            return fail(format!("block {h} boundary images are off"));
        }
        let block_images: BTreeSet<usize> = (s + 1..=t).map(|x| pi.image(x)).collect();
        if block_images != layout.position_sets[h - 1] {
            return fail(format!("block {h} is not a bijection onto its image set"));
        }
    }

    let pos = |sym: &str| a.instance.position(sym).expect("registered symbol");
    let mut anchored = BTreeSet::new();
    for (id, decl) in &a.registry {
        let (alpha, beta) = (layout.alpha[id], layout.beta[id]);
        let (va, vb, vc) = (pos(&decl.abc.a), pos(&decl.abc.b), pos(&decl.abc.c));
        let (vx, vy, vz) = (pos(&decl.xyz.a), pos(&decl.xyz.b), pos(&decl.xyz.c));
        let rules = [
            (pi.image(vz), alpha + 3, "z"),
            (pi.image(vc), beta + 2, "c"),
            (pi.image(vx), beta + 1, "x"),
            (pi.image(vb), alpha + 1, "b"),
            (pi.image(va - 1), alpha, "before a"),
            (pi.image(vz - 1), beta, "before z"),
            (pi.image(vy - 1), alpha + 2, "before y"),
            (pi.image(vb - 1), beta + 1, "before b"),
        ];
        for (got, want, what) in rules {
            if got != want {
                return fail(format!("variable {id}: image {what} is {got}, want {want}"));
            }
        }
        anchored.extend([vb, vc, vx, vz]);
    }

    // Everywhere else the image continues its predecessor in triple order.
    let succ_inv = a.instance.succ_map().inverse();
    for u in 1..=a.instance.span() {
        if anchored.contains(&u) {
            continue;
        }
        let prev = *succ_inv.get(&u).expect("full word");
        if pi.image(u) != pi.image(prev - 1) + 1 {
            return fail(format!("successor rule fails at position {u}"));
        }
    }

    match a.instance.is_equivalent(pi) {
        Ok(true) => Ok(()),
        Ok(false) => fail("emitted permutation is not equivalent to the instance".to_string()),
        Err(e) => fail(e.to_string()),
    }
}

/// Does `succ(u) = pi^{-1}(pi(u-1)+1)` over `[1..n]` have no fixed point and
/// order three? Holds exactly when the cycle graph splits into 3-cycles.
pub fn is_three_permutation(pi: &Permutation) -> bool {
    let n = pi.span();
    if n == 0 {
        return true;
    }
    let inv = pi.inverse_table();
    let succ = |u: usize| inv[pi.image(u - 1) + 1];
    (1..=n).all(|u| {
        let s1 = succ(u);
        s1 != u && succ(succ(s1)) == u
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::{assemble, make_harness, BlockSpec};

    fn toy_assembling() -> Assembling {
        assemble(vec![
            BlockSpec::new(BlockKind::Var, vec!["Y"], vec!["X1", "X2"]),
            BlockSpec::new(BlockKind::Or, vec!["X1", "X2"], vec!["Y"]),
        ])
        .unwrap()
    }

    #[test]
    fn layout_of_toy_assembling() {
        let layout = compute_layout(&toy_assembling()).unwrap();
        assert_eq!(layout.p, vec![0, 15]);
        assert_eq!(layout.q, vec![15, 33]);
        assert_eq!(layout.alpha["Y"], 5);
        assert_eq!(layout.beta["Y"], 9);
        assert_eq!(layout.alpha["X1"], 15);
        assert_eq!(layout.beta["X1"], 28);
        assert_eq!(layout.alpha["X2"], 18);
        assert_eq!(layout.beta["X2"], 31);
        assert_eq!(layout.position_sets[0].len(), 18);
        assert_eq!(layout.position_sets[1].len(), 15);
        assert!(layout.report().contains("variable Y alpha=5 beta=9"));
    }

    #[test]
    fn layout_rejects_harness_blocks() {
        let harness = make_harness(BlockKind::Copy).unwrap();
        assert!(matches!(
            compute_layout(&harness),
            Err(EmitError::NonBasic(_))
        ));
    }

    #[test]
    fn emitted_toy_permutation_matches_reference_images() {
        let a = toy_assembling();
        let emitted = emit_permutation(&a).unwrap();
        let expected: Permutation =
            "0 17 5 3 20 12 1 14 4 29 16 13 9 8 2 11 32 19 15 22 28 18 24 7 27 26 10 6 31 21 30 25 23 33"
                .parse()
                .unwrap();
        assert_eq!(emitted.permutation, expected);
        assert!(a.instance.is_equivalent(&emitted.permutation).unwrap());
        // Every adjacency is broken.
        assert_eq!(emitted.permutation.breakpoints().count(), 33);
    }

    #[test]
    fn three_permutation_check() {
        let emitted = emit_permutation(&toy_assembling()).unwrap();
        assert!(is_three_permutation(&emitted.permutation));
        assert!(!is_three_permutation(&Permutation::identity(6)));
        assert!(!is_three_permutation(&"0 2 4 3 1 5".parse().unwrap()));
    }
}
