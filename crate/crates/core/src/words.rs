//! Reduced words and conjugacy classes of the free group `F_k`.
//!
//! Letters are numbered `g1 < g1^-1 < g2 < g2^-1 < ...`, i.e. letter `2i` is
//! the generator `i` and `2i + 1` its inverse. Conjugacy classes are stored as
//! the lexicographically least rotation of a cyclically reduced word.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::repgen::Representation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u8);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Letter((2 * generator + inverse as usize) as u8)
    }

    pub fn from_index(index: usize) -> Self {
        Letter(index as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn generator(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }
}

/// All `2k` letters in canonical order.
pub fn alphabet(k: usize) -> impl Iterator<Item = Letter> {
    (0..2 * k).map(Letter::from_index)
}

/// A freely reduced word.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Wraps letters already known to be reduced.
    pub(crate) fn from_reduced(letters: Vec<Letter>) -> Self {
        debug_assert!(letters.windows(2).all(|p| p[1] != p[0].inverse()));
        Word(letters)
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Free product `self * other`.
    pub fn concat(&self, other: &Word) -> Self {
        reduce(self.0.iter().chain(&other.0).copied())
    }

    /// Cyclic shift by `j` letters (as a raw letter sequence; reduced if the
    /// word is cyclically reduced).
    pub fn rotate(&self, j: usize) -> Word {
        if self.0.is_empty() {
            return self.clone();
        }
        let j = j % self.0.len();
        let mut letters = self.0[j..].to_vec();
        letters.extend_from_slice(&self.0[..j]);
        reduce(letters)
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(f), Some(l)) => self.0.len() == 1 || *l != f.inverse(),
            _ => true,
        }
    }

    /// Renders with the given generator labels, inverses as `x^-1`.
    pub fn display<'a>(&'a self, labels: &'a [String]) -> impl fmt::Display + 'a {
        WordDisplay { word: self, labels }
    }
}

struct WordDisplay<'a> {
    word: &'a Word,
    labels: &'a [String],
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return f.write_str("e");
        }
        for (i, l) in self.word.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(&self.labels[l.generator()])?;
            if l.is_inverse() {
                f.write_str("^-1")?;
            }
        }
        Ok(())
    }
}

/// Parses whitespace-separated tokens such as `a b^-1 c⁻¹` against `labels`.
pub fn parse_letters(text: &str, labels: &[String]) -> Result<Vec<Letter>> {
    text.split_whitespace()
        .map(|token| {
            let (name, inverse) = if let Some(base) = token.strip_suffix("^-1") {
                (base, true)
            } else if let Some(base) = token.strip_suffix("⁻¹") {
                (base, true)
            } else {
                (token, false)
            };
            labels
                .iter()
                .position(|l| l == name)
                .map(|g| Letter::new(g, inverse))
                .ok_or_else(|| Error::InvalidInput(format!("unknown letter {token:?}")))
        })
        .collect()
}

/// Free reduction by a single left-to-right stack pass.
pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> Word {
    let mut out: Vec<Letter> = Vec::new();
    for l in letters {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    Word(out)
}

/// Parses and reduces, checking letters against `labels`.
pub fn parse_word(text: &str, labels: &[String]) -> Result<Word> {
    Ok(reduce(parse_letters(text, labels)?))
}

/// Number of reduced words of length exactly `n` in `F_k`.
pub fn word_count(k: usize, n: usize) -> u64 {
    if n == 0 {
        1
    } else {
        2 * k as u64 * (2 * k as u64 - 1).pow(n as u32 - 1)
    }
}

/// Number of cyclically reduced words of length `n >= 1` in `F_k`.
pub fn cyclic_word_count(k: usize, n: usize) -> u64 {
    let q = 2 * k as u64 - 1;
    let even = if n % 2 == 0 { 2 } else { 0 };
    q.pow(n as u32) + 1 + (k as u64 - 1) * even
}

/// Depth-first walk over the reduced words starting with `first`, up to
/// length `max_len`, carrying a state per prefix (one `step` per node).
///
/// `allow(prefix, next)` prunes children; `visit` sees every node, in
/// lexicographic order.
pub fn walk_shard<S, St, Al, Vi>(
    k: usize,
    first: Letter,
    max_len: usize,
    root: &S,
    step: &St,
    allow: &Al,
    visit: &mut Vi,
) where
    St: Fn(&S, Letter) -> S,
    Al: Fn(&[Letter], Letter) -> bool,
    Vi: FnMut(&[Letter], &S),
{
    if max_len == 0 {
        return;
    }
    let mut prefix = Vec::with_capacity(max_len);
    prefix.push(first);
    let state = step(root, first);
    walk_rec(k, max_len, &mut prefix, &state, step, allow, visit);
}

fn walk_rec<S, St, Al, Vi>(
    k: usize,
    max_len: usize,
    prefix: &mut Vec<Letter>,
    state: &S,
    step: &St,
    allow: &Al,
    visit: &mut Vi,
) where
    St: Fn(&S, Letter) -> S,
    Al: Fn(&[Letter], Letter) -> bool,
    Vi: FnMut(&[Letter], &S),
{
    visit(prefix, state);
    if prefix.len() == max_len {
        return;
    }
    let last = *prefix.last().expect("non-empty prefix");
    for next in alphabet(k) {
        if next == last.inverse() || !allow(prefix, next) {
            continue;
        }
        let child = step(state, next);
        prefix.push(next);
        walk_rec(k, max_len, prefix, &child, step, allow, visit);
        prefix.pop();
    }
}

/// All reduced words of length exactly `n`, in lexicographic order.
pub fn enumerate_words(k: usize, n: usize) -> Vec<Word> {
    if n == 0 {
        return vec![Word::empty()];
    }
    let mut out = Vec::with_capacity(word_count(k, n) as usize);
    for first in alphabet(k) {
        walk_shard(k, first, n, &(), &|_, _| (), &|_, _| true, &mut |prefix, _| {
            if prefix.len() == n {
                out.push(Word(prefix.to_vec()));
            }
        });
    }
    out
}

/// Index of the least rotation of `letters` (Booth's algorithm).
pub(crate) fn least_rotation(letters: &[Letter]) -> usize {
    let n = letters.len();
    if n == 0 {
        return 0;
    }
    let s: Vec<Letter> = letters.iter().chain(letters).copied().collect();
    let mut f = vec![usize::MAX; 2 * n];
    let mut k = 0usize;
    for j in 1..2 * n {
        let sj = s[j];
        let mut i = f[j - k - 1];
        while i != usize::MAX && sj != s[k + i + 1] {
            if sj < s[k + i + 1] {
                k = j - i - 1;
            }
            i = f[i];
        }
        if i == usize::MAX && sj != s[k] {
            if sj < s[k] {
                k = j;
            }
            f[j - k] = usize::MAX;
        } else {
            f[j - k] = if i == usize::MAX { 0 } else { i + 1 };
        }
    }
    k
}

pub(crate) fn is_least_rotation(letters: &[Letter]) -> bool {
    let n = letters.len();
    (1..n).all(|j| {
        let rotated = letters[j..].iter().chain(&letters[..j]);
        letters.iter().cmp(rotated) != std::cmp::Ordering::Greater
    })
}

/// Smallest `p` such that rotating by `p` fixes the word.
pub(crate) fn rotation_period(letters: &[Letter]) -> usize {
    let n = letters.len();
    (1..=n)
        .find(|p| n % p == 0 && (0..n).all(|i| letters[i] == letters[(i + p) % n]))
        .unwrap_or(n)
}

/// A conjugacy class of `F_k`, i.e. a periodic orbit of the symbolic flow.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConjugacyClass {
    word: Word,
    period: usize,
}

impl ConjugacyClass {
    /// Canonical cyclic word.
    pub fn word(&self) -> &Word {
        &self.word
    }

    /// Cyclic length.
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// Number of distinct rotations of the cyclic word; equals the length for
    /// primitive classes and `len / m` for an `m`-th power.
    pub fn period(&self) -> usize {
        self.period
    }

    pub fn is_primitive(&self) -> bool {
        self.period == self.word.len()
    }

    pub(crate) fn from_canonical(letters: Vec<Letter>) -> Self {
        let period = rotation_period(&letters);
        ConjugacyClass {
            word: Word(letters),
            period,
        }
    }
}

/// Cyclically reduces `w` and returns its least rotation.
pub fn canonical_conj(w: &Word) -> Result<ConjugacyClass> {
    if w.is_empty() {
        return Err(Error::InvalidInput("the trivial word has no cyclic form".into()));
    }
    let letters = w.letters();
    let (mut lo, mut hi) = (0, letters.len());
    while hi - lo >= 2 && letters[hi - 1] == letters[lo].inverse() {
        lo += 1;
        hi -= 1;
    }
    let core = &letters[lo..hi];
    if core.is_empty() {
        return Err(Error::InvalidInput("word is trivial".into()));
    }
    let start = least_rotation(core);
    let mut canon = core[start..].to_vec();
    canon.extend_from_slice(&core[..start]);
    Ok(ConjugacyClass::from_canonical(canon))
}

/// Walks the canonical cyclic words of length `n` starting with `first`.
///
/// The least rotation starts with the minimal letter of the word, so later
/// letters are never smaller than `first`.
pub fn walk_class_shard<S, St, Vi>(
    k: usize,
    first: Letter,
    n: usize,
    root: &S,
    step: &St,
    visit: &mut Vi,
) where
    St: Fn(&S, Letter) -> S,
    Vi: FnMut(&[Letter], &S),
{
    walk_shard(k, first, n, root, step, &|_, next| next >= first, &mut |prefix, state| {
        if prefix.len() == n
            && (n == 1 || prefix[n - 1] != prefix[0].inverse())
            && is_least_rotation(prefix)
        {
            visit(prefix, state);
        }
    });
}

/// All conjugacy classes of cyclic length exactly `n`, sharded by first letter
/// and concatenated in letter order.
pub fn enumerate_conj_classes(k: usize, n: usize) -> Vec<ConjugacyClass> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    for first in alphabet(k) {
        walk_class_shard(k, first, n, &(), &|_, _| (), &mut |prefix, _| {
            out.push(ConjugacyClass::from_canonical(prefix.to_vec()));
        });
    }
    out
}

/// Matrix of a single letter under `rep`.
pub fn letter_matrix(rep: &Representation, l: Letter) -> DMatrix<f64> {
    let g = rep.generator(l.generator());
    if l.is_inverse() {
        g.clone().try_inverse().expect("generators are invertible")
    } else {
        g.clone()
    }
}

/// Letter matrices indexed by [`Letter::index`].
pub fn letter_matrices(rep: &Representation) -> Vec<DMatrix<f64>> {
    alphabet(rep.rank()).map(|l| letter_matrix(rep, l)).collect()
}

/// `rho(w)`, the product of letter matrices in word order.
pub fn evaluate(rep: &Representation, w: &Word) -> Result<DMatrix<f64>> {
    if let Some(l) = w.letters().iter().find(|l| l.generator() >= rep.rank()) {
        return Err(Error::InvalidInput(format!(
            "letter {} outside a rank-{} alphabet",
            l.index(),
            rep.rank()
        )));
    }
    let mats = letter_matrices(rep);
    Ok(w
        .letters()
        .iter()
        .fold(DMatrix::identity(rep.dim(), rep.dim()), |acc, l| acc * &mats[l.index()]))
}

/// Evaluates all reduced words of length `1..=max_len` with a prefix cache
/// (one matrix product per word), in lexicographic order per length-first walk.
pub fn evaluate_all(rep: &Representation, max_len: usize) -> Vec<(Word, DMatrix<f64>)> {
    let mats = letter_matrices(rep);
    let id = DMatrix::identity(rep.dim(), rep.dim());
    let mut out = Vec::new();
    for first in alphabet(rep.rank()) {
        walk_shard(
            rep.rank(),
            first,
            max_len,
            &id,
            &|m: &DMatrix<f64>, l: Letter| m * &mats[l.index()],
            &|_, _| true,
            &mut |prefix, m| out.push((Word(prefix.to_vec()), m.clone())),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repgen::{make_schottky, perturb, sym_power_embed};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::{BTreeSet, HashSet};

    fn labels2() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    /// Independent oracle: repeatedly delete the first cancelling pair.
    fn reduce_oracle(mut v: Vec<Letter>) -> Vec<Letter> {
        loop {
            match (0..v.len().saturating_sub(1)).find(|&i| v[i + 1] == v[i].inverse()) {
                Some(i) => {
                    v.drain(i..i + 2);
                }
                None => return v,
            }
        }
    }

    fn random_letters(rng: &mut ChaCha8Rng, k: usize, n: usize) -> Vec<Letter> {
        (0..n).map(|_| Letter::from_index(rng.gen_range(0..2 * k))).collect()
    }

    fn random_reduced(rng: &mut ChaCha8Rng, k: usize, n: usize) -> Word {
        let mut out: Vec<Letter> = Vec::new();
        while out.len() < n {
            let l = Letter::from_index(rng.gen_range(0..2 * k));
            if out.last() != Some(&l.inverse()) {
                out.push(l);
            }
        }
        Word(out)
    }

    #[test]
    fn reduce_examples() {
        let l = labels2();
        assert!(parse_word("a a^-1", &l).unwrap().is_empty());
        assert_eq!(parse_word("a b b⁻¹ a", &l).unwrap(), parse_word("a a", &l).unwrap());
        assert!(matches!(parse_word("a c", &l), Err(Error::InvalidInput(_))));
        let w = parse_word("a b^-1 a^-1", &l).unwrap();
        assert_eq!(w.display(&l).to_string(), "a b^-1 a^-1");
    }

    #[test]
    fn reduce_matches_stack_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let raw = random_letters(&mut rng, 2, 20);
            let w = reduce(raw.clone());
            assert_eq!(w.letters(), reduce_oracle(raw).as_slice());
            assert_eq!(reduce(w.letters().to_vec()), w);
        }
    }

    #[test]
    fn word_counts() {
        assert_eq!(enumerate_words(2, 1).len(), 4);
        assert_eq!(enumerate_words(2, 3).len(), 36);
        let five = enumerate_words(2, 5);
        assert_eq!(five.len(), 324);
        assert_eq!(five.iter().collect::<HashSet<_>>().len(), 324);
        assert!(five.windows(2).all(|p| p[0] < p[1]), "lexicographic order");
        // brute force: all 4^5 raw strings that are already reduced
        let brute: BTreeSet<Vec<Letter>> = (0..4usize.pow(5))
            .map(|mut c| {
                (0..5)
                    .map(|_| {
                        let l = Letter::from_index(c % 4);
                        c /= 4;
                        l
                    })
                    .collect::<Vec<_>>()
            })
            .filter(|v| reduce(v.clone()).len() == 5)
            .collect();
        let ours: BTreeSet<Vec<Letter>> = five.iter().map(|w| w.letters().to_vec()).collect();
        assert_eq!(ours, brute);
        for k in 2..=3 {
            for n in 0..=10 {
                if k == 3 && n > 8 {
                    continue;
                }
                assert_eq!(enumerate_words(k, n).len() as u64, word_count(k, n), "k={k} n={n}");
            }
        }
    }

    /// Brute-force oracle: canonicalize every cyclically reduced word.
    fn brute_classes(k: usize, n: usize) -> BTreeSet<Vec<Letter>> {
        enumerate_words(k, n)
            .into_iter()
            .filter(|w| w.is_cyclically_reduced())
            .map(|w| {
                let v = w.letters().to_vec();
                (0..n)
                    .map(|j| {
                        let mut r = v[j..].to_vec();
                        r.extend_from_slice(&v[..j]);
                        r
                    })
                    .min()
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn class_counts_match_brute_force() {
        assert_eq!(enumerate_conj_classes(2, 1).len(), 4);
        // 12 cyclically reduced words of length 2; rotation leaves 8 orbits
        assert_eq!(cyclic_word_count(2, 2), 12);
        assert_eq!(enumerate_conj_classes(2, 2).len(), 8);
        for (k, n) in [(2, 2), (2, 3), (2, 4), (2, 6), (2, 7), (3, 4), (3, 5)] {
            let ours: Vec<_> = enumerate_conj_classes(k, n)
                .into_iter()
                .map(|c| c.word().letters().to_vec())
                .collect();
            let set: BTreeSet<_> = ours.iter().cloned().collect();
            assert_eq!(set.len(), ours.len(), "duplicates at k={k} n={n}");
            assert_eq!(set, brute_classes(k, n), "k={k} n={n}");
        }
    }

    #[test]
    fn periods_sum_to_cyclic_word_count() {
        for k in 2..=3 {
            for n in 1..=7 {
                let total: u64 = enumerate_conj_classes(k, n).iter().map(|c| c.period() as u64).sum();
                assert_eq!(total, cyclic_word_count(k, n), "k={k} n={n}");
            }
        }
        let classes = enumerate_conj_classes(2, 4);
        let aaaa = classes.iter().find(|c| c.word().letters() == [Letter(0); 4]).unwrap();
        assert_eq!(aaaa.period(), 1);
        assert!(!aaaa.is_primitive());
    }

    #[test]
    fn canonical_examples() {
        let l = labels2();
        let c = canonical_conj(&parse_word("b a b^-1", &l).unwrap()).unwrap();
        assert_eq!(c, canonical_conj(&parse_word("a", &l).unwrap()).unwrap());
        let ab = canonical_conj(&parse_word("a b", &l).unwrap()).unwrap();
        let ba = canonical_conj(&parse_word("b a", &l).unwrap()).unwrap();
        assert_eq!(ab, ba);
        assert!(canonical_conj(&Word::empty()).is_err());
    }

    #[test]
    fn canonical_constant_on_conjugates() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let n = rng.gen_range(1..9);
            let w = random_reduced(&mut rng, 2, n);
            let len = rng.gen_range(0..6);
            let u = random_reduced(&mut rng, 2, len);
            let conj = u.concat(&w).concat(&u.inverse());
            assert_eq!(canonical_conj(&w).unwrap(), canonical_conj(&conj).unwrap());
        }
    }

    #[test]
    fn least_rotation_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..300 {
            let n = rng.gen_range(1..12);
            let v: Vec<Letter> = (0..n).map(|_| Letter::from_index(rng.gen_range(0..3))).collect();
            let naive = (0..n)
                .map(|j| {
                    let mut r = v[j..].to_vec();
                    r.extend_from_slice(&v[..j]);
                    r
                })
                .min()
                .unwrap();
            let k = least_rotation(&v);
            let mut r = v[k..].to_vec();
            r.extend_from_slice(&v[..k]);
            assert_eq!(r, naive);
        }
    }

    #[test]
    fn evaluate_examples() {
        let rep = perturb(
            &sym_power_embed(&make_schottky(&[2.0, 2.0], &[0.0, 1.3]).unwrap(), 3).unwrap(),
            0.05,
            3,
        )
        .unwrap();
        let l = rep.labels().to_vec();
        assert_eq!(evaluate(&rep, &Word::empty()).unwrap(), DMatrix::identity(3, 3));
        let a = evaluate(&rep, &parse_word("a a^-1 a", &l).unwrap()).unwrap();
        assert!((a - rep.generator(0)).amax() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = random_reduced(&mut rng, 2, 10);
        let naive = w.letters().iter().fold(DMatrix::identity(3, 3), |acc, l| {
            let g = rep.generator(l.generator()).clone();
            acc * if l.is_inverse() { g.try_inverse().unwrap() } else { g }
        });
        let ours = evaluate(&rep, &w).unwrap();
        assert!((&ours - &naive).amax() <= 1e-12 * naive.amax().max(1.0));

        let bad = Word(vec![Letter::new(2, false)]);
        assert!(evaluate(&rep, &bad).is_err());
    }

    #[test]
    fn prefix_cached_evaluation_agrees() {
        let rep = make_schottky(&[2.0, 2.0], &[0.0, 1.0]).unwrap();
        let all = evaluate_all(&rep, 5);
        let expected: u64 = (1..=5).map(|n| word_count(2, n)).sum();
        assert_eq!(all.len() as u64, expected);
        for (w, m) in all.iter().step_by(17) {
            let direct = evaluate(&rep, w).unwrap();
            assert!((m - &direct).amax() < 1e-10 * direct.amax());
        }
    }

    proptest! {
        #[test]
        fn rotation_invariance(seed in 0u64..10_000, n in 1usize..12, j in 0usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = random_reduced(&mut rng, 3, n);
            let c = canonical_conj(&w);
            prop_assume!(c.is_ok());
            let c = c.unwrap();
            let core = c.word().clone();
            prop_assert_eq!(canonical_conj(&core.rotate(j)).unwrap(), c.clone());
            prop_assert!(c.word().is_cyclically_reduced());
        }

        #[test]
        fn reduce_idempotent(seed in 0u64..10_000, n in 0usize..30) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let raw = random_letters(&mut rng, 2, n);
            let w = reduce(raw);
            prop_assert_eq!(reduce(w.letters().to_vec()), w);
        }
    }
}
