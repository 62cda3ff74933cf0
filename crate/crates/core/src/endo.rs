//! Endomorphisms of free groups: application, composition, powers, and the
//! kernel membership predicate for `ker(phi^k)`.
//!
//! An endomorphism is determined by the images of the generators. The kernel
//! of a power is never materialized as a subgroup (it is infinitely generated
//! in general); it exists only through [`Endomorphism::in_power_kernel`].

use std::fmt;

use crate::error::{Error, Result};
use crate::words::{push_reduced, Letter, Rank, Word};

/// A self-map of the free group of rank `r`, given by generator images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endomorphism {
    rank: Rank,
    images: Vec<Word>,
}

impl Endomorphism {
    /// Build from generator images; every image must be a word over the same
    /// rank.
    pub fn new(rank: Rank, images: Vec<Word>) -> Result<Self> {
        if images.len() != rank.0 {
            return Err(Error::RankMismatch { left: rank.0, right: images.len() });
        }
        for img in &images {
            if img.rank() != rank {
                return Err(Error::RankMismatch { left: rank.0, right: img.rank().0 });
            }
        }
        Ok(Endomorphism { rank, images })
    }

    pub fn identity(rank: Rank) -> Self {
        let images = (1..=rank.0)
            .map(|i| Word::generator(rank, i).expect("index within rank"))
            .collect();
        Endomorphism { rank, images }
    }

    /// Parse images given in the compact word syntax, in generator order.
    pub fn parse(rank: Rank, images: &[&str]) -> Result<Self> {
        let images = images
            .iter()
            .map(|s| Word::parse(rank, s))
            .collect::<Result<Vec<_>>>()?;
        Endomorphism::new(rank, images)
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    /// Image of generator `index` (1-based).
    pub fn image(&self, index: usize) -> &Word {
        &self.images[index - 1]
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    /// Total letter count across all images; the quantity the pipeline
    /// budgets against.
    pub fn total_letters(&self) -> usize {
        self.images.iter().map(Word::len).sum()
    }

    pub fn is_identity(&self) -> bool {
        *self == Endomorphism::identity(self.rank)
    }

    /// Homomorphic substitution followed by free reduction.
    pub fn apply(&self, w: &Word) -> Result<Word> {
        if w.rank() != self.rank {
            return Err(Error::RankMismatch { left: self.rank.0, right: w.rank().0 });
        }
        let mut out: Vec<Letter> = Vec::new();
        for &l in w.letters() {
            let img = self.image(l.index());
            if l.is_inverse() {
                for &m in img.letters().iter().rev() {
                    push_reduced(&mut out, m.inverse());
                }
            } else {
                for &m in img.letters() {
                    push_reduced(&mut out, m);
                }
            }
        }
        Word::reduce(self.rank, out)
    }

    /// Composition `self ∘ other`: the result sends `g` to
    /// `self(other(g))`.
    pub fn compose(&self, other: &Endomorphism) -> Result<Endomorphism> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch { left: self.rank.0, right: other.rank.0 });
        }
        let images = other
            .images
            .iter()
            .map(|img| self.apply(img))
            .collect::<Result<Vec<_>>>()?;
        Endomorphism::new(self.rank, images)
    }

    /// `phi^n`, with `phi^0` the identity.
    pub fn power(&self, n: usize) -> Result<Endomorphism> {
        self.power_within(n, usize::MAX)
    }

    /// `phi^n`, failing once the total image length exceeds `letter_budget`.
    /// Image growth is unbounded in general (`a -> aa` doubles per step), so
    /// callers that iterate must bound it.
    pub fn power_within(&self, n: usize, letter_budget: usize) -> Result<Endomorphism> {
        let mut acc = Endomorphism::identity(self.rank);
        for _ in 0..n {
            acc = self.compose(&acc)?;
            let needed = acc.total_letters();
            if needed > letter_budget {
                return Err(Error::BudgetExceeded { needed, budget: letter_budget });
            }
        }
        Ok(acc)
    }

    /// `phi^n(w)` by applying `phi` iteratively, which is far cheaper than
    /// materializing `phi^n` when the images grow.
    pub fn apply_power(&self, n: usize, w: &Word) -> Result<Word> {
        let mut out = w.clone();
        for _ in 0..n {
            out = self.apply(&out)?;
        }
        Ok(out)
    }

    /// Membership predicate for `N = ker(phi^k)`: true iff `phi^k(w) = 1`.
    pub fn in_power_kernel(&self, k: usize, w: &Word) -> Result<bool> {
        Ok(self.apply_power(k, w)?.is_identity())
    }
}

impl fmt::Display for Endomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = (1..=self.rank.0)
            .map(|i| {
                format!(
                    "{} -> {}",
                    Word::generator(self.rank, i).expect("index within rank"),
                    self.image(i)
                )
            })
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(rank: usize, s: &str) -> Word {
        Word::parse(Rank(rank), s).unwrap()
    }

    fn endo(rank: usize, images: &[&str]) -> Endomorphism {
        Endomorphism::parse(Rank(rank), images).unwrap()
    }

    #[test]
    fn apply_substitutes_and_reduces() {
        let phi = endo(2, &["ab", "B"]);
        assert_eq!(phi.apply(&w(2, "ab")).unwrap(), w(2, "a"));

        let id = Endomorphism::identity(Rank(2));
        for s in ["", "a", "abAB"] {
            assert_eq!(id.apply(&w(2, s)).unwrap(), w(2, s));
        }

        let shift = endo(3, &["b", "c", "c"]);
        assert_eq!(shift.apply(&w(3, "aC")).unwrap(), w(3, "bC"));
    }

    #[test]
    fn compose_convention_is_left_application() {
        let phi = endo(3, &["b", "c", "c"]);
        let id = Endomorphism::identity(Rank(3));
        assert_eq!(id.compose(&phi).unwrap(), phi);
        assert_eq!(phi.compose(&id).unwrap(), phi);
        assert_eq!(phi.compose(&phi).unwrap(), endo(3, &["c", "c", "c"]));
    }

    #[test]
    fn power_examples() {
        let phi = endo(3, &["b", "c", "c"]);
        assert_eq!(phi.power(0).unwrap(), Endomorphism::identity(Rank(3)));
        assert_eq!(phi.power(1).unwrap(), phi);
        assert_eq!(phi.power(2).unwrap(), endo(3, &["c", "c", "c"]));
    }

    #[test]
    fn power_budget_is_enforced() {
        let doubling = endo(1, &["aa"]);
        assert!(doubling.power_within(3, 8).is_ok());
        let err = doubling.power_within(4, 8).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { needed: 16, budget: 8 }));
    }

    #[test]
    fn kernel_membership() {
        let collapse = endo(2, &["a", ""]);
        assert!(collapse.in_power_kernel(1, &w(2, "b")).unwrap());
        assert!(collapse.in_power_kernel(1, &w(2, "")).unwrap());
        assert!(!collapse.in_power_kernel(1, &w(2, "a")).unwrap());

        // phi(bbA) = a * a * a^-2 = 1
        let phi = endo(2, &["aa", "a"]);
        assert_eq!(phi.apply(&w(2, "bbA")).unwrap(), w(2, ""));
        assert!(phi.in_power_kernel(1, &w(2, "bbA")).unwrap());
    }
}
