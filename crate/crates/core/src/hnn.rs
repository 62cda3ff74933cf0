//! Mapping-torus presentations `< F, t | t^-1 g t = phi(g) >` and the word
//! problem for the ascending case via Britton reduction.
//!
//! A presentation is only a display object unless it carries an injectivity
//! certificate (the rank of the image subgroup equals the base rank); the
//! solver operations refuse uncertified presentations. Britton's lemma then
//! decides triviality: a pinch-free word containing the stable letter is
//! never trivial, and a pinch-free base word is trivial exactly when it is
//! the empty word.

use std::fmt;

use crate::endo::Endomorphism;
use crate::error::{Error, Result};
use crate::folding::{
    express_in_generators, extract_basis, ExpressBudget, ExpressionResult, StallingsGraph,
    SubgroupBasis,
};
use crate::torus::{kernel_witnesses, quotient_image, InjectivizationResult};
use crate::words::{Letter, Rank, Word};

/// One block of a mixed word: a nonempty base word or a nonzero power of
/// the stable letter. Adjacent blocks of the same kind never survive
/// normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Block {
    Base(Word),
    Stable(i64),
}

/// An element of a mapping torus: an alternating sequence of base words and
/// stable-letter powers, kept normalized (same-kind neighbors merged, empty
/// base words dropped so that the flanking powers merge).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedWord {
    base_rank: Rank,
    blocks: Vec<Block>,
}

impl MixedWord {
    pub fn identity(base_rank: Rank) -> Self {
        MixedWord { base_rank, blocks: Vec::new() }
    }

    pub fn from_base(w: &Word) -> Self {
        let mut out = MixedWord::identity(w.rank());
        out.push_base(w);
        out
    }

    pub fn stable_power(base_rank: Rank, e: i64) -> Self {
        let mut out = MixedWord::identity(base_rank);
        out.push_stable(e);
        out
    }

    /// Normalizing constructor from raw blocks.
    pub fn from_blocks(base_rank: Rank, blocks: impl IntoIterator<Item = Block>) -> Result<Self> {
        let mut out = MixedWord::identity(base_rank);
        for b in blocks {
            match b {
                Block::Base(w) => {
                    if w.rank() != base_rank {
                        return Err(Error::RankMismatch { left: base_rank.0, right: w.rank().0 });
                    }
                    out.push_base(&w);
                }
                Block::Stable(e) => out.push_stable(e),
            }
        }
        Ok(out)
    }

    fn push_base(&mut self, w: &Word) {
        if w.is_identity() {
            return;
        }
        if let Some(Block::Base(last)) = self.blocks.last_mut() {
            let merged = last.concat(w).expect("rank checked on entry");
            if merged.is_identity() {
                self.blocks.pop();
                // a vanished base word exposes two stable blocks; remerge
                if let Some(Block::Stable(e)) = self.blocks.pop() {
                    self.push_stable(e);
                }
            } else {
                *last = merged;
            }
        } else {
            self.blocks.push(Block::Base(w.clone()));
        }
    }

    fn push_stable(&mut self, e: i64) {
        if e == 0 {
            return;
        }
        if let Some(Block::Stable(last)) = self.blocks.last_mut() {
            *last += e;
            if *last == 0 {
                self.blocks.pop();
                if let Some(Block::Base(w)) = self.blocks.pop() {
                    self.push_base(&w);
                }
            }
        } else {
            self.blocks.push(Block::Stable(e));
        }
    }

    pub fn concat(&self, other: &MixedWord) -> Result<MixedWord> {
        if self.base_rank != other.base_rank {
            return Err(Error::RankMismatch { left: self.base_rank.0, right: other.base_rank.0 });
        }
        let mut out = self.clone();
        for b in &other.blocks {
            match b {
                Block::Base(w) => out.push_base(w),
                Block::Stable(e) => out.push_stable(*e),
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> MixedWord {
        let mut out = MixedWord::identity(self.base_rank);
        for b in self.blocks.iter().rev() {
            match b {
                Block::Base(w) => out.push_base(&w.inverse()),
                Block::Stable(e) => out.push_stable(-e),
            }
        }
        out
    }

    pub fn base_rank(&self) -> Rank {
        self.base_rank
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn is_identity(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Signed sum of stable-letter exponents; invariant under Britton
    /// reduction, so a nonzero sum certifies nontriviality.
    pub fn t_exponent_sum(&self) -> i64 {
        self.blocks
            .iter()
            .map(|b| match b {
                Block::Stable(e) => *e,
                Block::Base(_) => 0,
            })
            .sum()
    }

    /// Number of stable letters counted without sign.
    pub fn t_letter_count(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| match b {
                Block::Stable(e) => e.unsigned_abs() as usize,
                Block::Base(_) => 0,
            })
            .sum()
    }

    /// Parse the compact syntax: base letters `a..z` / `A..Z`, stable
    /// letter `t` (`T` for its inverse), `1` or the empty string for the
    /// identity. The characters `t`/`T` always mean the stable letter, so
    /// base generator 20 cannot be written in this syntax.
    pub fn parse(base_rank: Rank, text: &str) -> Result<Self> {
        let text = text.trim();
        let mut out = MixedWord::identity(base_rank);
        if text.is_empty() || text == "1" {
            return Ok(out);
        }
        for c in text.chars() {
            match c {
                ' ' => continue,
                't' => out.push_stable(1),
                'T' => out.push_stable(-1),
                'a'..='z' | 'A'..='Z' => {
                    let (index, inverse) = if c.is_ascii_lowercase() {
                        (c as usize - 'a' as usize + 1, false)
                    } else {
                        (c as usize - 'A' as usize + 1, true)
                    };
                    if index > base_rank.0 {
                        return Err(Error::IndexOutOfRange { index, rank: base_rank.0 });
                    }
                    let w = Word::reduce(base_rank, [Letter::new(index, inverse)])?;
                    out.push_base(&w);
                }
                _ => return Err(Error::Parse(format!("invalid mixed-word character {c:?}"))),
            }
        }
        Ok(out)
    }
}

impl fmt::Display for MixedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "1");
        }
        for b in &self.blocks {
            match b {
                Block::Base(w) => write!(f, "{}", w.to_text())?,
                Block::Stable(e) => {
                    let c = if *e > 0 { 't' } else { 'T' };
                    for _ in 0..e.unsigned_abs() {
                        write!(f, "{c}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// How to print the base generators of a presentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorNaming {
    /// `a, b, c, ...` (requires rank <= 26)
    Letters,
    /// `x1, x2, ...`
    Indexed,
}

fn letter_token(l: Letter, naming: GeneratorNaming) -> String {
    match naming {
        GeneratorNaming::Letters => {
            let base = if l.is_inverse() { b'A' } else { b'a' };
            ((base + (l.index() - 1) as u8) as char).to_string()
        }
        GeneratorNaming::Indexed => {
            format!("{}{}", if l.is_inverse() { 'X' } else { 'x' }, l.index())
        }
    }
}

fn word_tokens(w: &Word, naming: GeneratorNaming) -> String {
    if w.is_identity() {
        return "1".to_string();
    }
    w.letters()
        .iter()
        .map(|&l| letter_token(l, naming))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Mapping-torus data: base rank, the edge endomorphism, and (when the
/// rank certificate holds) a cached solver for Britton reduction.
#[derive(Debug, Clone)]
pub struct HnnPresentation {
    base_rank: Rank,
    map: Endomorphism,
    injective: bool,
    stable_letter: char,
    solver: Option<BrittonSolver>,
}

/// Cache for computing `psi^-1` on the image subgroup: membership goes
/// through the image graph, and preimages go through the extracted basis
/// composed with per-basis-word preimages.
#[derive(Debug, Clone)]
struct BrittonSolver {
    image_graph: StallingsGraph,
    image_basis: SubgroupBasis,
    /// Sends the `j`-th extracted-basis letter to a word `u` with
    /// `map(u)` equal to the `j`-th basis word.
    basis_preimages: Endomorphism,
}

impl BrittonSolver {
    fn psi_inverse(&self, map: &Endomorphism, g: &Word) -> Result<Option<Word>> {
        if !self.image_graph.contains(g) {
            return Ok(None);
        }
        let over_basis = self.image_basis.rewrite(g)?;
        let preimage = self.basis_preimages.apply(&over_basis)?;
        if map.apply(&preimage)? != *g {
            return Err(Error::Internal("psi^-1 failed to section psi".into()));
        }
        Ok(Some(preimage))
    }
}

/// The mapping torus of an endomorphism, with relators
/// `t^-1 g t = map(g)` for each base generator `g`. The injective flag is
/// set only when the rank certificate `rank(map images) = base rank` holds.
pub fn present_mapping_torus(map: &Endomorphism) -> Result<HnnPresentation> {
    let base_rank = map.rank();
    let image_graph = StallingsGraph::build(map.images(), base_rank)?;
    let injective = image_graph.rank() == base_rank.0;

    let solver = if injective {
        let image_basis = extract_basis(&image_graph);
        let budget = ExpressBudget { max_factors: 8, node_cap: 2_000_000 };
        let mut preimages = Vec::with_capacity(image_basis.rank());
        for b in image_basis.words() {
            match express_in_generators(map.images(), b, &budget)? {
                ExpressionResult::Expressed(sym) => preimages.push(sym),
                ExpressionResult::Unknown => {
                    return Err(Error::Internal(
                        "failed to express an image-basis word over the map images".into(),
                    ))
                }
            }
        }
        let basis_preimages = Endomorphism::new(base_rank, preimages)?;
        let solver = BrittonSolver { image_graph, image_basis, basis_preimages };

        // Certify the section on the generators: psi^-1(psi(x_i)) = x_i.
        for i in 1..=base_rank.0 {
            let x = Word::generator(base_rank, i)?;
            let back = solver
                .psi_inverse(map, map.image(i))?
                .ok_or_else(|| Error::Internal("psi image escaped its own graph".into()))?;
            if back != x {
                return Err(Error::Internal("psi^-1 certificate failed on a generator".into()));
            }
        }
        Some(solver)
    } else {
        None
    };

    Ok(HnnPresentation { base_rank, map: map.clone(), injective, stable_letter: 't', solver })
}

impl HnnPresentation {
    pub fn base_rank(&self) -> Rank {
        self.base_rank
    }

    pub fn map(&self) -> &Endomorphism {
        &self.map
    }

    pub fn is_injective(&self) -> bool {
        self.injective
    }

    /// Render as `< a, t | T a t = a a >`; indexed naming prints the base
    /// generators as `x1, x2, ...`.
    pub fn display_with(&self, naming: GeneratorNaming) -> String {
        let t = self.stable_letter;
        let t_inv = t.to_ascii_uppercase();
        let mut names: Vec<String> = (1..=self.base_rank.0)
            .map(|i| letter_token(Letter::positive(i), naming))
            .collect();
        names.push(t.to_string());
        let relators: Vec<String> = (1..=self.base_rank.0)
            .map(|i| {
                format!(
                    "{t_inv} {} {t} = {}",
                    letter_token(Letter::positive(i), naming),
                    word_tokens(self.map.image(i), naming)
                )
            })
            .collect();
        if relators.is_empty() {
            format!("< {} | >", names.join(", "))
        } else {
            format!("< {} | {} >", names.join(", "), relators.join(", "))
        }
    }

    /// Remove every pinch `t^-1 g t` (always rewritable to `map(g)`) and
    /// `t g t^-1` with `g` in the image (rewritable to `psi^-1(g)`). Each
    /// step deletes exactly two stable letters, so at most half the stable
    /// letter count many rounds run. Requires the injectivity certificate.
    pub fn britton_reduce(&self, w: &MixedWord) -> Result<MixedWord> {
        if w.base_rank != self.base_rank {
            return Err(Error::RankMismatch { left: self.base_rank.0, right: w.base_rank.0 });
        }
        let solver = self.solver.as_ref().ok_or(Error::NotInjective)?;

        let max_steps = w.t_letter_count() / 2;
        let mut steps = 0;
        let mut current = w.clone();
        'outer: loop {
            let blocks = current.blocks();
            for i in 0..blocks.len().saturating_sub(2) {
                let (Block::Stable(e), Block::Base(g), Block::Stable(f)) =
                    (&blocks[i], &blocks[i + 1], &blocks[i + 2])
                else {
                    continue;
                };
                let (e, f) = (*e, *f);
                let replacement = if e < 0 && f > 0 {
                    Some(self.map.apply(g)?)
                } else if e > 0 && f < 0 {
                    solver.psi_inverse(&self.map, g)?
                } else {
                    None
                };
                let Some(g2) = replacement else { continue };
                let shift = if e < 0 { 1 } else { -1 };
                let mut rebuilt = MixedWord::identity(self.base_rank);
                for b in &blocks[..i] {
                    match b {
                        Block::Base(w) => rebuilt.push_base(w),
                        Block::Stable(p) => rebuilt.push_stable(*p),
                    }
                }
                rebuilt.push_stable(e + shift);
                rebuilt.push_base(&g2);
                rebuilt.push_stable(f - shift);
                for b in &blocks[i + 3..] {
                    match b {
                        Block::Base(w) => rebuilt.push_base(w),
                        Block::Stable(p) => rebuilt.push_stable(*p),
                    }
                }
                steps += 1;
                if steps > max_steps {
                    return Err(Error::Internal(
                        "Britton reduction exceeded its step bound".into(),
                    ));
                }
                current = rebuilt;
                continue 'outer;
            }
            return Ok(current);
        }
    }

    /// Word problem: `w` represents the identity iff its Britton reduction
    /// is the empty word.
    pub fn is_trivial(&self, w: &MixedWord) -> Result<bool> {
        Ok(self.britton_reduce(w)?.is_identity())
    }
}

impl fmt::Display for HnnPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(GeneratorNaming::Letters))
    }
}

/// Knobs for [`verify_isomorphism`].
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Kernel-witness search length.
    pub max_witness_len: usize,
    /// Cap on reported kernel witnesses.
    pub max_witness_count: usize,
    /// Whether to compute surjectivity witnesses (budgeted, may be Unknown).
    pub surjectivity: bool,
    pub express_budget: ExpressBudget,
    /// Budget for recomputing `phi^k`.
    pub letter_budget: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            max_witness_len: 6,
            max_witness_count: 20,
            surjectivity: true,
            express_budget: ExpressBudget::default(),
            letter_budget: crate::torus::DEFAULT_LETTER_BUDGET,
        }
    }
}

/// Machine-checked evidence that the torus of `phi` and the torus of `psi`
/// present the same group: relator images collapse, kernel elements
/// collapse, and every generator of the target is hit.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    /// rank(psi image) = rank(F1), recomputed here.
    pub injectivity_certificate: bool,
    /// Per generator `x_i` of `F`: the image of the defining relator,
    /// `t^-1 Phi(x_i) t Phi(phi(x_i))^-1`, is trivial in the psi torus.
    pub relators_trivial: Vec<bool>,
    /// Kernel witnesses that were checked.
    pub kernel_witnesses: Vec<Word>,
    /// Per witness: its image under the quotient map is the identity.
    pub kernel_collapsed: Vec<bool>,
    /// Per basis word of `F1`: an expression over the `phi^k` images (the
    /// stable letter witnesses itself). `None` when skipped.
    pub surjectivity: Option<Vec<ExpressionResult>>,
}

impl VerificationReport {
    /// True when nothing failed; `Unknown` surjectivity entries do not
    /// count as failures.
    pub fn all_pass(&self) -> bool {
        self.injectivity_certificate
            && self.relators_trivial.iter().all(|&b| b)
            && self.kernel_collapsed.iter().all(|&b| b)
    }
}

/// Check the construction behind an [`InjectivizationResult`]: every
/// relator of the phi torus maps to a trivial word of the psi torus, every
/// discovered kernel element dies under the quotient map, and each basis
/// word of `F1` is reachable from the phi side.
pub fn verify_isomorphism(
    phi: &Endomorphism,
    result: &InjectivizationResult,
    options: &VerifyOptions,
) -> Result<VerificationReport> {
    let psi_torus = present_mapping_torus(&result.psi)?;
    let injectivity_certificate = psi_torus.is_injective();

    let mut relators_trivial = Vec::with_capacity(phi.rank().0);
    for i in 1..=phi.rank().0 {
        let x = Word::generator(phi.rank(), i)?;
        let lhs = quotient_image(result, phi, &x)?;
        let rhs = quotient_image(result, phi, phi.image(i))?;
        let relator_image = MixedWord::from_blocks(
            result.psi.rank(),
            [
                Block::Stable(-1),
                Block::Base(lhs),
                Block::Stable(1),
                Block::Base(rhs.inverse()),
            ],
        )?;
        relators_trivial.push(psi_torus.is_trivial(&relator_image)?);
    }

    let kernel_witnesses =
        kernel_witnesses(phi, result.k, options.max_witness_len, options.max_witness_count)?;
    let mut kernel_collapsed = Vec::with_capacity(kernel_witnesses.len());
    for w in &kernel_witnesses {
        kernel_collapsed.push(quotient_image(result, phi, w)?.is_identity());
    }

    let surjectivity = if options.surjectivity {
        let phi_k = phi.power_within(result.k, options.letter_budget)?;
        let mut outcomes = Vec::with_capacity(result.f1_basis.rank());
        for b in result.f1_basis.words() {
            outcomes.push(express_in_generators(phi_k.images(), b, &options.express_budget)?);
        }
        Some(outcomes)
    } else {
        None
    };

    Ok(VerificationReport {
        injectivity_certificate,
        relators_trivial,
        kernel_witnesses,
        kernel_collapsed,
        surjectivity,
    })
}
