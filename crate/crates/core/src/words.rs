//! Free-group word algebra: letters, free reduction, concatenation, inversion.
//!
//! A free group of rank `r` has generators indexed `1..=r`. Words are kept
//! freely reduced at all times: no letter is ever adjacent to its inverse.
//! The empty word is the identity element.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Number of free generators of an ambient free group. Rank 0 is the trivial
/// group, which shows up when an endomorphism kills everything.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rank(pub usize);

impl Rank {
    /// The generators `x_1, ..., x_r` as positive letters.
    pub fn generators(self) -> impl Iterator<Item = Letter> {
        (1..=self.0).map(Letter::positive)
    }

    /// All `2r` letters in canonical order: `x_1, x_1^-1, x_2, x_2^-1, ...`.
    pub fn letters(self) -> impl Iterator<Item = Letter> {
        (1..=self.0).flat_map(|i| [Letter::positive(i), Letter::positive(i).inverse()])
    }

    pub fn contains(self, letter: Letter) -> bool {
        letter.index() >= 1 && letter.index() <= self.0
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A signed generator: `x_i` or `x_i^-1`. Stored as a nonzero integer whose
/// magnitude is the 1-based generator index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter(i32);

impl Letter {
    pub fn positive(index: usize) -> Self {
        assert!(index >= 1, "letter index is 1-based");
        Letter(index as i32)
    }

    pub fn new(index: usize, inverse: bool) -> Self {
        let l = Self::positive(index);
        if inverse { l.inverse() } else { l }
    }

    /// 1-based generator index.
    pub fn index(self) -> usize {
        self.0.unsigned_abs() as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }

    pub fn cancels(self, other: Letter) -> bool {
        self.0 == -other.0
    }
}

/// Canonical letter order: by generator index, positive before inverse
/// (`a < A < b < B < ...`). This order fixes every enumeration and
/// tie-break in the crate.
impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.index(), self.is_inverse()).cmp(&(other.index(), other.is_inverse()))
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A freely reduced word over a free group of known rank. Immutable after
/// construction; every operation returns a fresh value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    rank: Rank,
    letters: Vec<Letter>,
}

impl Word {
    /// The identity element.
    pub fn identity(rank: Rank) -> Self {
        Word { rank, letters: Vec::new() }
    }

    /// Freely reduce a raw letter sequence. Rejects letters outside the rank.
    pub fn reduce(rank: Rank, raw: impl IntoIterator<Item = Letter>) -> Result<Self> {
        let mut letters: Vec<Letter> = Vec::new();
        for l in raw {
            if !rank.contains(l) {
                return Err(Error::IndexOutOfRange { index: l.index(), rank: rank.0 });
            }
            push_reduced(&mut letters, l);
        }
        Ok(Word { rank, letters })
    }

    /// Single-generator word `x_i`.
    pub fn generator(rank: Rank, index: usize) -> Result<Self> {
        Self::reduce(rank, [Letter::positive(index)])
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Reduced product `self · other`.
    pub fn concat(&self, other: &Word) -> Result<Word> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch { left: self.rank.0, right: other.rank.0 });
        }
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            push_reduced(&mut letters, l);
        }
        Ok(Word { rank: self.rank, letters })
    }

    pub fn inverse(&self) -> Word {
        // Reversing and inverting a reduced word keeps it reduced.
        let letters = self.letters.iter().rev().map(|l| l.inverse()).collect();
        Word { rank: self.rank, letters }
    }

    /// Exponent sum of generator `index` (signed letter count).
    pub fn exponent_sum(&self, index: usize) -> i64 {
        self.letters
            .iter()
            .filter(|l| l.index() == index)
            .map(|l| if l.is_inverse() { -1 } else { 1 })
            .sum()
    }

    /// Parse the compact text syntax: `a..z` are generators 1..26, `A..Z`
    /// their inverses, and `"1"` or the empty string is the identity.
    pub fn parse(rank: Rank, text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() || text == "1" {
            return Ok(Word::identity(rank));
        }
        let mut raw = Vec::with_capacity(text.len());
        for c in text.chars() {
            let letter = match c {
                'a'..='z' => Letter::new(c as usize - 'a' as usize + 1, false),
                'A'..='Z' => Letter::new(c as usize - 'A' as usize + 1, true),
                _ => return Err(Error::Parse(format!("invalid word character {c:?}"))),
            };
            if !rank.contains(letter) {
                return Err(Error::IndexOutOfRange { index: letter.index(), rank: rank.0 });
            }
            raw.push(letter);
        }
        Word::reduce(rank, raw)
    }

    /// Compact machine text: letters for ranks up to 26, indexed tokens
    /// (`x3 X5`) beyond; the identity is the empty string.
    pub fn to_text(&self) -> String {
        if self.rank.0 <= 26 {
            self.letters
                .iter()
                .map(|l| {
                    let base = if l.is_inverse() { b'A' } else { b'a' };
                    (base + (l.index() - 1) as u8) as char
                })
                .collect()
        } else {
            self.to_indexed_text()
        }
    }

    /// Indexed machine text: `x1 X2` with uppercase `X` marking inverses;
    /// the identity is the empty string.
    pub fn to_indexed_text(&self) -> String {
        self.letters
            .iter()
            .map(|l| format!("{}{}", if l.is_inverse() { 'X' } else { 'x' }, l.index()))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Human-readable indexed form; the identity prints as `1`.
    pub fn display_indexed(&self) -> String {
        if self.is_identity() { "1".to_string() } else { self.to_indexed_text() }
    }
}

/// Length-lexicographic order (shorter first, then letter order). Used to
/// make enumerations and reported witnesses reproducible.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            write!(f, "1")
        } else {
            write!(f, "{}", self.to_text())
        }
    }
}

/// Push a letter onto a reduced stack, cancelling an inverse pair.
pub(crate) fn push_reduced(stack: &mut Vec<Letter>, letter: Letter) {
    if stack.last().is_some_and(|top| top.cancels(letter)) {
        stack.pop();
    } else {
        stack.push(letter);
    }
}

/// Substitute `images[i-1]` for every letter `x_i` of `w` and reduce. This
/// evaluates a word over one alphabet (symbols `1..=images.len()`) inside
/// the group the images live in.
pub fn evaluate(w: &Word, images: &[Word], target_rank: Rank) -> Result<Word> {
    if w.rank().0 != images.len() {
        return Err(Error::RankMismatch { left: w.rank().0, right: images.len() });
    }
    let mut out: Vec<Letter> = Vec::new();
    for &l in w.letters() {
        let img = &images[l.index() - 1];
        if img.rank() != target_rank {
            return Err(Error::RankMismatch { left: target_rank.0, right: img.rank().0 });
        }
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
    Word::reduce(target_rank, out)
}

/// All freely reduced words of length at most `max_len`, in
/// length-lexicographic order starting from the identity.
pub fn enumerate_reduced(rank: Rank, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::identity(rank)];
    let mut frontier: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for prefix in &frontier {
            for l in rank.letters() {
                if prefix.last().is_some_and(|top| top.cancels(l)) {
                    continue;
                }
                let mut w = prefix.clone();
                w.push(l);
                next.push(w);
            }
        }
        for letters in &next {
            out.push(Word { rank, letters: letters.clone() });
        }
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(rank: usize, s: &str) -> Word {
        Word::parse(Rank(rank), s).unwrap()
    }

    /// Independent reducer: repeatedly scan for any adjacent inverse pair
    /// and delete it, until none remains. Quadratic, but obviously correct.
    fn naive_reduce(mut raw: Vec<Letter>) -> Vec<Letter> {
        loop {
            let mut cancelled = false;
            let mut i = 0;
            while i + 1 < raw.len() {
                if raw[i].cancels(raw[i + 1]) {
                    raw.drain(i..i + 2);
                    cancelled = true;
                } else {
                    i += 1;
                }
            }
            if !cancelled {
                return raw;
            }
        }
    }

    fn raw(s: &str) -> Vec<Letter> {
        s.chars()
            .map(|c| match c {
                'a'..='z' => Letter::new(c as usize - 'a' as usize + 1, false),
                'A'..='Z' => Letter::new(c as usize - 'A' as usize + 1, true),
                _ => panic!("bad test letter"),
            })
            .collect()
    }

    #[test]
    fn reduce_cancels_inverse_pairs() {
        assert!(w(2, "aA").is_identity());
        assert!(w(2, "abBA").is_identity());
    }

    #[test]
    fn reduce_agrees_with_naive_oracle() {
        // The only cancellation in abAa is the Aa pair.
        let oracle = naive_reduce(raw("abAa"));
        assert_eq!(oracle, raw("ab"));
        assert_eq!(w(2, "abAa").letters(), oracle.as_slice());

        for s in ["abAa", "aAbB", "abcCBA", "aabBAA", "bAab"] {
            let ours = Word::reduce(Rank(3), raw(s)).unwrap();
            assert_eq!(ours.letters(), naive_reduce(raw(s)).as_slice(), "case {s}");
        }
    }

    #[test]
    fn reduce_rejects_out_of_range() {
        assert_eq!(
            Word::parse(Rank(1), "ab").unwrap_err(),
            Error::IndexOutOfRange { index: 2, rank: 1 }
        );
    }

    #[test]
    fn concat_examples() {
        assert!(w(2, "ab").concat(&w(2, "BA")).unwrap().is_identity());
        assert_eq!(w(2, "a").concat(&Word::identity(Rank(2))).unwrap(), w(2, "a"));
        assert_eq!(w(3, "ab").concat(&w(3, "Bc")).unwrap(), w(3, "ac"));
        assert!(w(1, "a").concat(&w(2, "a")).is_err());
    }

    #[test]
    fn invert_examples() {
        assert_eq!(w(2, "ab").inverse(), w(2, "BA"));
        assert_eq!(Word::identity(Rank(2)).inverse(), Word::identity(Rank(2)));
        assert_eq!(w(2, "aBa").inverse(), w(2, "AbA"));
    }

    #[test]
    fn display_and_parse_round_trip() {
        for s in ["", "1", "a", "abA", "aBBa"] {
            let word = w(2, s);
            assert_eq!(Word::parse(Rank(2), &word.to_text()).unwrap(), word);
        }
        assert_eq!(w(2, "").to_string(), "1");
        assert_eq!(w(2, "abA").to_string(), "abA");
        assert_eq!(w(2, "aB").to_indexed_text(), "x1 X2");
    }

    #[test]
    fn letter_order_is_index_then_sign() {
        let seq = ["a", "A", "b", "B"].map(|s| w(2, s).letters()[0]);
        let mut sorted = seq;
        sorted.sort();
        assert_eq!(seq, sorted);
    }

    #[test]
    fn enumeration_is_length_lex() {
        let all = enumerate_reduced(Rank(2), 2);
        let texts: Vec<String> = all.iter().map(|v| v.to_text()).collect();
        assert_eq!(
            texts,
            ["", "a", "A", "b", "B", "aa", "ab", "aB", "AA", "Ab", "AB", "ba", "bA", "bb", "Ba", "BA", "BB"]
                .map(String::from)
        );
    }
}
