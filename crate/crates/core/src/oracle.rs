//! Independent brute-force machinery used to cross-check the main
//! algorithms: Nielsen reduction (rank of a subgroup from a generating
//! tuple), bounded membership enumeration, and image-collision search.
//!
//! Everything here is deliberately simple and slow; these functions are the
//! second route in every dual-route check, so they must not share code with
//! the folding implementation.

use std::collections::btree_map::Entry as BTreeEntry;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::cmp::Reverse;

use crate::endo::Endomorphism;
use crate::error::{Error, Result};
use crate::words::{Letter, Rank, Word};

/// One elementary Nielsen transformation. Indices refer to the tuple as it
/// is at the time the move applies (a `Drop` shifts later indices down).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NielsenMove {
    Swap(usize, usize),
    Invert(usize),
    /// `tuple[slot] := tuple[other]^e · tuple[slot]` when `from_left`, else
    /// `tuple[slot] := tuple[slot] · tuple[other]^e`, with `e = -1` iff
    /// `invert_other`.
    Multiply { slot: usize, other: usize, invert_other: bool, from_left: bool },
    /// Remove `tuple[slot]`; only ever applied to an identity entry.
    Drop(usize),
}

/// Outcome of Nielsen reduction: the reduced tuple, the moves that produce
/// it, and an expression of each surviving entry over the original tuple
/// (a word in symbols `1..=s` where `s` is the input length).
#[derive(Debug, Clone)]
pub struct NielsenHistory {
    pub reduced_tuple: Vec<Word>,
    pub moves: Vec<NielsenMove>,
    pub expressions: Vec<Word>,
}

struct Slot {
    word: Word,
    expr: Word,
}

/// Cancellation length in the product `u · v`: the number of letter pairs
/// that die at the junction.
fn cancellation(u: &Word, v: &Word) -> usize {
    let (a, b) = (u.letters(), v.letters());
    let mut c = 0;
    while c < a.len() && c < b.len() && a[a.len() - 1 - c].cancels(b[c]) {
        c += 1;
    }
    c
}

/// Orientation key: length, half-prefix of the word, half-prefix of its
/// inverse, then the full letter sequence. Each N2 repair strictly lowers
/// the multiset of these keys, which is what makes the reduction terminate.
fn orientation_key(w: &Word) -> (usize, Vec<Letter>, Vec<Letter>, Vec<Letter>) {
    let half = w.len() / 2;
    let fwd = w.letters()[..half].to_vec();
    let inv_word = w.inverse();
    let bwd = inv_word.letters()[..half].to_vec();
    (w.len(), fwd, bwd, w.letters().to_vec())
}

impl Slot {
    /// Store the orientation with the smaller key; returns true if flipped.
    fn normalize(&mut self) -> bool {
        let inv = self.word.inverse();
        if orientation_key(&inv) < orientation_key(&self.word) {
            self.word = inv;
            self.expr = self.expr.inverse();
            true
        } else {
            false
        }
    }
}

/// Nielsen-reduce a generating tuple. The reduced tuple is a basis of the
/// subgroup the input generates, so its length is the subgroup's rank.
pub fn nielsen_reduce(generators: &[Word]) -> Result<NielsenHistory> {
    if let Some(first) = generators.first() {
        for g in generators {
            if g.rank() != first.rank() {
                return Err(Error::RankMismatch { left: first.rank().0, right: g.rank().0 });
            }
        }
    }

    let symbol_rank = Rank(generators.len());
    let mut slots: Vec<Slot> = Vec::with_capacity(generators.len());
    let mut moves: Vec<NielsenMove> = Vec::new();

    for (i, g) in generators.iter().enumerate() {
        let mut slot = Slot {
            word: g.clone(),
            expr: Word::generator(symbol_rank, i + 1)?,
        };
        if slot.normalize() {
            moves.push(NielsenMove::Invert(i));
        }
        slots.push(slot);
    }

    'outer: loop {
        // N0: drop identity entries.
        let mut i = 0;
        while i < slots.len() {
            if slots[i].word.is_identity() {
                slots.remove(i);
                moves.push(NielsenMove::Drop(i));
            } else {
                i += 1;
            }
        }

        // N1: any product of an entry with another entry (either side,
        // either sign) that is strictly shorter replaces the entry.
        for i in 0..slots.len() {
            for j in 0..slots.len() {
                if i == j {
                    continue;
                }
                for invert_other in [false, true] {
                    for from_left in [false, true] {
                        let other = if invert_other {
                            slots[j].word.inverse()
                        } else {
                            slots[j].word.clone()
                        };
                        let product = if from_left {
                            other.concat(&slots[i].word)?
                        } else {
                            slots[i].word.concat(&other)?
                        };
                        if product.len() < slots[i].word.len() {
                            let expr_other = if invert_other {
                                slots[j].expr.inverse()
                            } else {
                                slots[j].expr.clone()
                            };
                            slots[i].expr = if from_left {
                                expr_other.concat(&slots[i].expr)?
                            } else {
                                slots[i].expr.concat(&expr_other)?
                            };
                            slots[i].word = product;
                            moves.push(NielsenMove::Multiply {
                                slot: i,
                                other: j,
                                invert_other,
                                from_left,
                            });
                            if slots[i].normalize() {
                                moves.push(NielsenMove::Invert(i));
                            }
                            continue 'outer;
                        }
                    }
                }
            }
        }

        // N2: a degenerate triple v·w·x in which both halves of w cancel
        // into its neighbors hides a relation that no pairwise product
        // reveals ({aB, bc, CA} is the minimal example). Repair with an
        // equal-length multiplication on whichever side lowers the
        // orientation key; length descent then resumes.
        if let Some(mv) = find_degenerate_repair(&slots)? {
            let NielsenMove::Multiply { slot, other, invert_other, from_left } = mv else {
                unreachable!("repair is always a multiplication");
            };
            let other_word = if invert_other {
                slots[other].word.inverse()
            } else {
                slots[other].word.clone()
            };
            let other_expr = if invert_other {
                slots[other].expr.inverse()
            } else {
                slots[other].expr.clone()
            };
            if from_left {
                slots[slot].word = other_word.concat(&slots[slot].word)?;
                slots[slot].expr = other_expr.concat(&slots[slot].expr)?;
            } else {
                slots[slot].word = slots[slot].word.concat(&other_word)?;
                slots[slot].expr = slots[slot].expr.concat(&other_expr)?;
            }
            moves.push(mv);
            if slots[slot].normalize() {
                moves.push(NielsenMove::Invert(slot));
            }
            continue 'outer;
        }

        break;
    }

    // Canonical output order (selection sort so every exchange is recorded).
    for i in 0..slots.len() {
        let mut min = i;
        for j in i + 1..slots.len() {
            if orientation_key(&slots[j].word) < orientation_key(&slots[min].word) {
                min = j;
            }
        }
        if min != i {
            slots.swap(i, min);
            moves.push(NielsenMove::Swap(i, min));
        }
    }

    Ok(NielsenHistory {
        reduced_tuple: slots.iter().map(|s| s.word.clone()).collect(),
        moves,
        expressions: slots.iter().map(|s| s.expr.clone()).collect(),
    })
}

/// Scan for a degenerate triple and return the repairing multiplication.
fn find_degenerate_repair(slots: &[Slot]) -> Result<Option<NielsenMove>> {
    let element = |i: usize, inv: bool| -> Word {
        if inv { slots[i].word.inverse() } else { slots[i].word.clone() }
    };
    for j in 0..slots.len() {
        for w_inv in [false, true] {
            let w = element(j, w_inv);
            if w.len() < 2 || w.len() % 2 != 0 {
                continue;
            }
            let half = w.len() / 2;
            let p = &w.letters()[..half];
            let q = &w.letters()[half..];

            let mut v_hit: Option<(usize, bool)> = None;
            let mut x_hit: Option<(usize, bool)> = None;
            for i in 0..slots.len() {
                for inv in [false, true] {
                    if i == j && inv != w_inv {
                        continue; // v or x equal to w^-1 is not a pinch
                    }
                    let e = element(i, inv);
                    if v_hit.is_none() && cancellation(&e, &w) == half {
                        v_hit = Some((i, inv));
                    }
                    if x_hit.is_none() && cancellation(&w, &e) == half {
                        x_hit = Some((i, inv));
                    }
                }
            }
            let (Some(v), Some(x)) = (v_hit, x_hit) else { continue };

            // Exactly one side strictly lowers its key: compare p against
            // q^-1 (they differ because w is reduced).
            let q_inv: Vec<Letter> = q.iter().rev().map(|l| l.inverse()).collect();
            if q_inv.as_slice() < p {
                // v := v · w, phrased on v's stored orientation
                let (slot, inv) = v;
                return Ok(Some(if inv {
                    NielsenMove::Multiply { slot, other: j, invert_other: !w_inv, from_left: true }
                } else {
                    NielsenMove::Multiply { slot, other: j, invert_other: w_inv, from_left: false }
                }));
            } else {
                // x := w · x
                let (slot, inv) = x;
                return Ok(Some(if inv {
                    NielsenMove::Multiply { slot, other: j, invert_other: !w_inv, from_left: false }
                } else {
                    NielsenMove::Multiply { slot, other: j, invert_other: w_inv, from_left: true }
                }));
            }
        }
    }
    Ok(None)
}

/// Rank of the subgroup generated by a tuple, with the move history that
/// witnesses it.
pub fn nielsen_rank(generators: &[Word]) -> Result<(usize, NielsenHistory)> {
    let history = nielsen_reduce(generators)?;
    Ok((history.reduced_tuple.len(), history))
}

/// Replay a move list against a tuple; used to validate histories.
pub fn replay(original: &[Word], moves: &[NielsenMove]) -> Result<Vec<Word>> {
    let mut tuple: Vec<Word> = original.to_vec();
    for mv in moves {
        match *mv {
            NielsenMove::Swap(i, j) => tuple.swap(i, j),
            NielsenMove::Invert(i) => tuple[i] = tuple[i].inverse(),
            NielsenMove::Multiply { slot, other, invert_other, from_left } => {
                let o = if invert_other { tuple[other].inverse() } else { tuple[other].clone() };
                tuple[slot] = if from_left {
                    o.concat(&tuple[slot])?
                } else {
                    tuple[slot].concat(&o)?
                };
            }
            NielsenMove::Drop(i) => {
                if !tuple[i].is_identity() {
                    return Err(Error::Internal(format!(
                        "drop of non-identity entry {i} during replay"
                    )));
                }
                tuple.remove(i);
            }
        }
    }
    Ok(tuple)
}

/// Answer of the bounded membership search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    /// In the subgroup, with a factor word over the generator symbols.
    Yes(Word),
    /// Search budget exhausted; says nothing about non-membership.
    Unknown,
}

/// Breadth-first search over products of at most `max_factors` generators
/// or inverses. Finds `target` if it is such a product; cannot refute.
pub fn enum_membership(generators: &[Word], target: &Word, max_factors: usize) -> Result<Membership> {
    let ambient = target.rank();
    for g in generators {
        if g.rank() != ambient {
            return Err(Error::RankMismatch { left: ambient.0, right: g.rank().0 });
        }
    }
    let symbol_rank = Rank(generators.len());
    if target.is_identity() {
        return Ok(Membership::Yes(Word::identity(symbol_rank)));
    }

    let mut paths: HashMap<Word, Word> = HashMap::new();
    paths.insert(Word::identity(ambient), Word::identity(symbol_rank));
    let mut frontier: Vec<Word> = vec![Word::identity(ambient)];

    for _ in 0..max_factors {
        let mut next = Vec::new();
        for elem in &frontier {
            for (idx, g) in generators.iter().enumerate() {
                if g.is_identity() {
                    continue;
                }
                for inverse in [false, true] {
                    let factor = if inverse { g.inverse() } else { g.clone() };
                    let product = elem.concat(&factor)?;
                    if paths.contains_key(&product) {
                        continue;
                    }
                    let mut sym = paths[elem].clone();
                    sym = sym.concat(&Word::reduce(
                        symbol_rank,
                        [Letter::new(idx + 1, inverse)],
                    )?)?;
                    if product == *target {
                        return Ok(Membership::Yes(sym));
                    }
                    paths.insert(product.clone(), sym);
                    next.push(product);
                }
            }
        }
        frontier = next;
    }
    Ok(Membership::Unknown)
}

/// Express `target` over a Nielsen-reduced tuple by stripping leading
/// factors without ever letting the remainder grow. Complete when the tuple
/// is a Nielsen basis (every member admits a non-increasing factorization);
/// `None` means the node budget ran out.
pub fn express_over_nielsen_reduced(
    tuple: &[Word],
    target: &Word,
    node_cap: usize,
) -> Result<Option<Word>> {
    let symbol_rank = Rank(tuple.len());
    if target.is_identity() {
        return Ok(Some(Word::identity(symbol_rank)));
    }

    // Dijkstra by remainder length; parent links recover the factor list.
    let mut seen: HashMap<Word, (Word, Letter)> = HashMap::new();
    let mut heap: BinaryHeap<Reverse<(usize, u64, Word)>> = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Reverse((target.len(), seq, target.clone())));
    let mut expanded = 0usize;

    while let Some(Reverse((_, _, current))) = heap.pop() {
        if expanded >= node_cap {
            return Ok(None);
        }
        expanded += 1;
        for (idx, t) in tuple.iter().enumerate() {
            for inverse in [false, true] {
                let factor_inv = if inverse { t.clone() } else { t.inverse() };
                let rest = factor_inv.concat(&current)?;
                if rest.len() > current.len() {
                    continue;
                }
                let symbol = Letter::new(idx + 1, inverse);
                if rest.is_identity() {
                    // Walk the parent chain back to the target.
                    let mut symbols = vec![symbol];
                    let mut node = current.clone();
                    while node != *target {
                        let (parent, sym) = seen[&node].clone();
                        symbols.push(sym);
                        node = parent;
                    }
                    symbols.reverse();
                    return Ok(Some(Word::reduce(symbol_rank, symbols)?));
                }
                if seen.contains_key(&rest) || rest == *target {
                    continue;
                }
                seen.insert(rest.clone(), (current.clone(), symbol));
                seq += 1;
                heap.push(Reverse((rest.len(), seq, rest)));
            }
        }
    }
    Ok(None)
}

/// All pairs of distinct reduced words of length at most `max_len` with the
/// same image under `phi^k`. Every pair yields the kernel element
/// `u · v^-1`.
pub fn image_collisions(
    phi: &Endomorphism,
    k: usize,
    max_len: usize,
) -> Result<Vec<(Word, Word)>> {
    let mut buckets: BTreeMap<Word, Vec<Word>> = BTreeMap::new();
    for u in crate::words::enumerate_reduced(phi.rank(), max_len) {
        let image = phi.apply_power(k, &u)?;
        match buckets.entry(image) {
            BTreeEntry::Vacant(e) => {
                e.insert(vec![u]);
            }
            BTreeEntry::Occupied(mut e) => e.get_mut().push(u),
        }
    }
    let mut pairs = Vec::new();
    for group in buckets.values() {
        for j in 1..group.len() {
            for i in 0..j {
                pairs.push((group[i].clone(), group[j].clone()));
            }
        }
    }
    Ok(pairs)
}

// re-exported for the evaluation-based round-trip checks in tests
pub use crate::words::evaluate as evaluate_symbols;
