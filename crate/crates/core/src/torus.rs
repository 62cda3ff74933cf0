//! The injectivization pipeline: find the least power at which the image
//! ranks of an endomorphism stabilize, extract a basis of that stable image
//! `F1`, restrict to an injective endomorphism `psi` of `F1` expressed in
//! the basis alphabet, and expose the quotient map onto `F1`.
//!
//! The collapsed normal subgroup `N = ker(phi^k)` is infinitely generated
//! in general and is never materialized: it is represented operationally by
//! [`Endomorphism::in_power_kernel`] and by the witnesses found here.

use std::collections::{BTreeMap, HashSet};

use crate::endo::Endomorphism;
use crate::error::{Error, Result};
use crate::folding::{extract_basis, StallingsGraph, SubgroupBasis};
use crate::words::{enumerate_reduced, Rank, Word};

/// Default cap on the total image length of iterated powers.
pub const DEFAULT_LETTER_BUDGET: usize = 1_000_000;

/// The rank of `phi^n(F)` for `n = 0, 1, ..., k+1`. Non-increasing, and the
/// last two entries are equal — that equality is the stabilization witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizationTrace {
    pub ranks: Vec<usize>,
}

/// Everything the pipeline certifies about one endomorphism.
#[derive(Debug, Clone)]
pub struct InjectivizationResult {
    /// Least `n >= 0` with `rank(phi^n(F)) = rank(phi^(n+1)(F))`.
    pub k: usize,
    pub trace: StabilizationTrace,
    /// Basis of `F1 = phi^k(F)` as words inside `F`.
    pub f1_basis: SubgroupBasis,
    /// The injective endomorphism of `F1`, written in the basis alphabet.
    pub psi: Endomorphism,
    /// Graph of `psi(F1)` inside the rank-`m` group `F1`. Its rank equaling
    /// `m` is the injectivity certificate.
    pub psi_image_graph: StallingsGraph,
}

impl InjectivizationResult {
    pub fn f1_rank(&self) -> usize {
        self.f1_basis.rank()
    }
}

fn stabilize(
    phi: &Endomorphism,
    letter_budget: usize,
) -> Result<(usize, StabilizationTrace, Endomorphism)> {
    let rank = phi.rank();
    let mut current = Endomorphism::identity(rank);
    let mut previous: Option<Endomorphism> = None;
    let mut ranks: Vec<usize> = Vec::new();
    loop {
        let graph = StallingsGraph::build(current.images(), rank)?;
        ranks.push(graph.rank());
        let n = ranks.len() - 1;
        if n >= 1 && ranks[n] == ranks[n - 1] {
            let k = n - 1;
            return Ok((k, StabilizationTrace { ranks }, previous.expect("n >= 1")));
        }
        if n > rank.0 {
            // ranks strictly decrease until they stabilize, so the index is
            // bounded by the ambient rank
            return Err(Error::Internal("rank sequence failed to stabilize".into()));
        }
        previous = Some(current.clone());
        current = phi.compose(&current)?;
        let needed = current.total_letters();
        if needed > letter_budget {
            return Err(Error::BudgetExceeded { needed, budget: letter_budget });
        }
    }
}

/// The least `k >= 0` with `rank(phi^k(F)) = rank(phi^(k+1)(F))`, plus the
/// witnessing rank sequence. By Hopficity of free groups the rank equality
/// makes `phi` injective on `phi^k(F)`, so `ker(phi^k) = ker(phi^n)` for
/// all `n >= k`.
pub fn stabilization_index(
    phi: &Endomorphism,
    letter_budget: usize,
) -> Result<(usize, StabilizationTrace)> {
    let (k, trace, _) = stabilize(phi, letter_budget)?;
    Ok((k, trace))
}

/// Run the whole construction: compute `k`, a basis of `F1 = phi^k(F)`, the
/// restriction `psi` in basis coordinates, and its injectivity certificate.
pub fn injectivize(phi: &Endomorphism, letter_budget: usize) -> Result<InjectivizationResult> {
    let (k, trace, phi_k) = stabilize(phi, letter_budget)?;
    let graph_k = StallingsGraph::build(phi_k.images(), phi.rank())?;
    let f1_basis = extract_basis(&graph_k);
    let m = f1_basis.rank();

    // psi(x_j) = the image of the j-th basis word, rewritten in basis
    // coordinates. phi(phi^k(F)) lies inside phi^k(F), so the rewrite
    // cannot fail on correct folding.
    let mut psi_images = Vec::with_capacity(m);
    for b in f1_basis.words() {
        let image = phi.apply(b)?;
        let rewritten = f1_basis.rewrite(&image).map_err(|_| {
            Error::Internal("image of a basis word left the stable image subgroup".into())
        })?;
        psi_images.push(rewritten);
    }
    let psi = Endomorphism::new(Rank(m), psi_images)?;

    let psi_image_graph = StallingsGraph::build(psi.images(), Rank(m))?;
    if psi_image_graph.rank() != m {
        return Err(Error::Internal(format!(
            "injectivity certificate failed: rank {} != {}",
            psi_image_graph.rank(),
            m
        )));
    }

    Ok(InjectivizationResult { k, trace, f1_basis, psi, psi_image_graph })
}

/// The quotient map onto `F1`: `f` maps to `phi^k(f)` rewritten in the
/// basis alphabet. It kills exactly `ker(phi^k)` and is a homomorphism.
pub fn quotient_image(
    result: &InjectivizationResult,
    phi: &Endomorphism,
    f: &Word,
) -> Result<Word> {
    let image = phi.apply_power(result.k, f)?;
    result
        .f1_basis
        .rewrite(&image)
        .map_err(|_| Error::Internal("phi^k(f) left the stable image subgroup".into()))
}

/// Nontrivial elements of `ker(phi^k)`, found by enumerating short words
/// grouped by their `phi^k`-image and combining colliding pairs into
/// `v · u^-1`. The empty result is valid (an injective map has none).
pub fn kernel_witnesses(
    phi: &Endomorphism,
    k: usize,
    max_len: usize,
    max_count: usize,
) -> Result<Vec<Word>> {
    let mut buckets: BTreeMap<Word, Vec<Word>> = BTreeMap::new();
    for u in enumerate_reduced(phi.rank(), max_len / 2) {
        let image = phi.apply_power(k, &u)?;
        buckets.entry(image).or_default().push(u);
    }
    let mut out: Vec<Word> = Vec::new();
    let mut seen: HashSet<Word> = HashSet::new();
    for group in buckets.values() {
        for j in 1..group.len() {
            for i in 0..j {
                if out.len() >= max_count {
                    return Ok(out);
                }
                let witness = group[j].concat(&group[i].inverse())?;
                if !witness.is_identity()
                    && witness.len() <= max_len
                    && seen.insert(witness.clone())
                {
                    out.push(witness);
                }
            }
        }
    }
    Ok(out)
}
