//! Spectral tables over enumerated words and conjugacy classes.
//!
//! Every downstream estimator consumes one of two tables: Jordan projections
//! of all conjugacy classes up to a cyclic length (the periodic-orbit data),
//! or Cartan projections of all reduced words up to a length. Tables can also
//! be built from an arbitrary per-word vector, which is how the word-length
//! oracle enters without touching matrix code.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::repgen::Representation;
use crate::spectra::{cartan_from_compounds, compounds, jordan_from_compounds, CartanVector};
use crate::words::{alphabet, is_least_rotation, letter_matrices, rotation_period, walk_shard, Letter};

/// Conjugacy classes of a single cyclic length.
#[derive(Clone, Debug, Default)]
pub struct ClassLevel {
    n: usize,
    dim: usize,
    letters: Vec<Letter>,
    periods: Vec<u32>,
    jordan: Vec<f64>,
    cartan: Option<Vec<f64>>,
}

impl ClassLevel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    /// Canonical cyclic word of class `i`.
    pub fn word(&self, i: usize) -> &[Letter] {
        &self.letters[i * self.n..(i + 1) * self.n]
    }

    /// Number of distinct rotations, i.e. periodic points on the orbit.
    pub fn period(&self, i: usize) -> usize {
        self.periods[i] as usize
    }

    pub fn jordan(&self, i: usize) -> &[f64] {
        &self.jordan[i * self.dim..(i + 1) * self.dim]
    }

    /// Cartan projection of the canonical representative, when built from matrices.
    pub fn cartan(&self, i: usize) -> Option<&[f64]> {
        self.cartan.as_ref().map(|c| &c[i * self.dim..(i + 1) * self.dim])
    }

    pub fn jordans(&self) -> impl Iterator<Item = &[f64]> {
        self.jordan.chunks_exact(self.dim)
    }

    fn append(&mut self, mut other: ClassLevel) {
        self.letters.append(&mut other.letters);
        self.periods.append(&mut other.periods);
        self.jordan.append(&mut other.jordan);
        if let (Some(a), Some(b)) = (self.cartan.as_mut(), other.cartan.as_mut()) {
            a.append(b);
        }
    }
}

/// Jordan projections of all conjugacy classes of cyclic length `1..=n_max`.
#[derive(Clone, Debug)]
pub struct PeriodData {
    rank: usize,
    dim: usize,
    levels: Vec<ClassLevel>,
    source: String,
}

fn empty_levels(n_max: usize, dim: usize, with_cartan: bool) -> Vec<ClassLevel> {
    (1..=n_max)
        .map(|n| ClassLevel {
            n,
            dim,
            cartan: with_cartan.then(Vec::new),
            ..Default::default()
        })
        .collect()
}

/// Walks canonical cyclic words of every length up to `n_max` whose least
/// letter is `first`, handing each to `visit` together with its prefix state.
fn walk_classes<S, St, Vi>(k: usize, first: Letter, n_max: usize, root: &S, step: &St, visit: &mut Vi)
where
    St: Fn(&S, Letter) -> S,
    Vi: FnMut(&[Letter], &S),
{
    walk_shard(k, first, n_max, root, step, &|_, next| next >= first, &mut |prefix, state| {
        let n = prefix.len();
        if (n == 1 || prefix[n - 1] != prefix[0].inverse()) && is_least_rotation(prefix) {
            visit(prefix, state);
        }
    });
}

fn merge_shards(mut shards: Vec<Vec<ClassLevel>>) -> Vec<ClassLevel> {
    let mut levels = shards.remove(0);
    for shard in shards {
        for (level, part) in levels.iter_mut().zip(shard) {
            level.append(part);
        }
    }
    levels
}

impl PeriodData {
    /// Jordan projections of `rho(w)` for every class, computed through
    /// products of compound matrices so long words keep their full spectrum.
    pub fn from_rep(rep: &Representation, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidParameter("cyclic length cap must be >= 1".into()));
        }
        let (k, d) = (rep.rank(), rep.dim());
        let lc: Vec<Vec<DMatrix<f64>>> = letter_matrices(rep).iter().map(compounds).collect();
        let root = compounds(&DMatrix::identity(d, d));
        let letters: Vec<Letter> = alphabet(k).collect();
        let shards = letters
            .par_iter()
            .map(|&first| {
                let mut levels = empty_levels(n_max, d, true);
                let mut failure = None;
                let step = |s: &Vec<DMatrix<f64>>, l: Letter| -> Vec<DMatrix<f64>> {
                    s.iter().zip(&lc[l.index()]).map(|(a, b)| a * b).collect()
                };
                walk_classes(k, first, n_max, &root, &step, &mut |prefix, state| {
                    if failure.is_some() {
                        return;
                    }
                    let spectra = jordan_from_compounds(state, 0.0)
                        .and_then(|l| Ok((l, cartan_from_compounds(state, 0.0)?)));
                    match spectra {
                        Ok((l, a)) => {
                            let level = &mut levels[prefix.len() - 1];
                            level.letters.extend_from_slice(prefix);
                            level.periods.push(rotation_period(prefix) as u32);
                            level.jordan.extend_from_slice(l.coords());
                            level.cartan.as_mut().unwrap().extend_from_slice(a.coords());
                        }
                        Err(e) => failure = Some(e),
                    }
                });
                match failure {
                    Some(e) => Err(e),
                    None => Ok(levels),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            rank: k,
            dim: d,
            levels: merge_shards(shards),
            source: "jordan projection".into(),
        })
    }

    /// Classes carrying an arbitrary vector computed from the canonical word.
    pub fn from_fn<F>(k: usize, n_max: usize, dim: usize, source: &str, f: F) -> Self
    where
        F: Fn(&[Letter]) -> Vec<f64> + Sync,
    {
        let letters: Vec<Letter> = alphabet(k).collect();
        let shards = letters
            .par_iter()
            .map(|&first| {
                let mut levels = empty_levels(n_max, dim, false);
                walk_classes(k, first, n_max, &(), &|_, _| (), &mut |prefix, _| {
                    let v = f(prefix);
                    assert_eq!(v.len(), dim, "vector length must equal dim");
                    let level = &mut levels[prefix.len() - 1];
                    level.letters.extend_from_slice(prefix);
                    level.periods.push(rotation_period(prefix) as u32);
                    level.jordan.extend(v);
                });
                levels
            })
            .collect();
        Self {
            rank: k,
            dim,
            levels: merge_shards(shards),
            source: source.into(),
        }
    }

    /// The word-length oracle: class `w` gets the vector `|w| (1/2, -1/2)`, so
    /// the root functional `(1, -1)` weighs every letter by one.
    pub fn word_length(k: usize, n_max: usize) -> Self {
        Self::from_fn(k, n_max, 2, "word length", |w| {
            let h = w.len() as f64 / 2.0;
            vec![h, -h]
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_max(&self) -> usize {
        self.levels.len()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Classes of cyclic length `n` (`1 <= n <= n_max`).
    pub fn level(&self, n: usize) -> &ClassLevel {
        &self.levels[n - 1]
    }

    pub fn levels(&self) -> &[ClassLevel] {
        &self.levels
    }

    /// All class vectors of cyclic length at most `n`, with their length.
    pub fn vectors_up_to(&self, n: usize) -> impl Iterator<Item = (usize, &[f64])> {
        self.levels[..n.min(self.levels.len())]
            .iter()
            .flat_map(|lv| lv.jordans().map(move |v| (lv.n, v)))
    }
}

/// Cartan projections of all reduced words of length `1..=n_max`, grouped by length.
#[derive(Clone, Debug)]
pub struct ElementData {
    rank: usize,
    dim: usize,
    levels: Vec<Vec<f64>>,
    source: String,
}

impl ElementData {
    pub fn from_rep(rep: &Representation, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidParameter("word length cap must be >= 1".into()));
        }
        let (k, d) = (rep.rank(), rep.dim());
        let lc: Vec<Vec<DMatrix<f64>>> = letter_matrices(rep).iter().map(compounds).collect();
        let root = compounds(&DMatrix::identity(d, d));
        let letters: Vec<Letter> = alphabet(k).collect();
        let shards = letters
            .par_iter()
            .map(|&first| {
                let mut levels = vec![Vec::new(); n_max];
                let mut failure = None;
                let step = |s: &Vec<DMatrix<f64>>, l: Letter| -> Vec<DMatrix<f64>> {
                    s.iter().zip(&lc[l.index()]).map(|(a, b)| a * b).collect()
                };
                walk_shard(k, first, n_max, &root, &step, &|_, _| true, &mut |prefix, state| {
                    if failure.is_some() {
                        return;
                    }
                    match cartan_from_compounds(state, 0.0) {
                        Ok(a) => levels[prefix.len() - 1].extend_from_slice(a.coords()),
                        Err(e) => failure = Some(e),
                    }
                });
                match failure {
                    Some(e) => Err(e),
                    None => Ok(levels),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::merge(k, d, shards, "cartan projection"))
    }

    pub fn from_fn<F>(k: usize, n_max: usize, dim: usize, source: &str, f: F) -> Self
    where
        F: Fn(&[Letter]) -> Vec<f64> + Sync,
    {
        let letters: Vec<Letter> = alphabet(k).collect();
        let shards = letters
            .par_iter()
            .map(|&first| {
                let mut levels = vec![Vec::new(); n_max];
                walk_shard(k, first, n_max, &(), &|_, _| (), &|_, _| true, &mut |prefix, _| {
                    let v = f(prefix);
                    assert_eq!(v.len(), dim, "vector length must equal dim");
                    levels[prefix.len() - 1].extend(v);
                });
                levels
            })
            .collect();
        Self::merge(k, dim, shards, source)
    }

    /// Same convention as [`PeriodData::word_length`].
    pub fn word_length(k: usize, n_max: usize) -> Self {
        Self::from_fn(k, n_max, 2, "word length", |w| {
            let h = w.len() as f64 / 2.0;
            vec![h, -h]
        })
    }

    fn merge(k: usize, dim: usize, shards: Vec<Vec<Vec<f64>>>, source: &str) -> Self {
        let mut levels = vec![Vec::new(); shards.first().map_or(0, Vec::len)];
        for shard in shards {
            for (level, mut part) in levels.iter_mut().zip(shard) {
                level.append(&mut part);
            }
        }
        Self {
            rank: k,
            dim,
            levels,
            source: source.into(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_max(&self) -> usize {
        self.levels.len()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Cartan vectors of the words of length exactly `n`.
    pub fn level(&self, n: usize) -> impl Iterator<Item = &[f64]> {
        self.levels[n - 1].chunks_exact(self.dim)
    }

    pub fn vectors_up_to(&self, n: usize) -> impl Iterator<Item = (usize, &[f64])> {
        let d = self.dim;
        self.levels[..n.min(self.levels.len())]
            .iter()
            .enumerate()
            .flat_map(move |(i, lv)| lv.chunks_exact(d).map(move |v| (i + 1, v)))
    }
}

/// Cartan and Jordan projections of one reduced word.
#[derive(Clone, Debug)]
pub struct WordSpectrum {
    pub word: Vec<Letter>,
    pub cartan: CartanVector,
    pub jordan: CartanVector,
}

/// Spectra of all reduced words of length `1..=max_len`, ordered by length
/// and then lexicographically.
pub fn word_spectra(rep: &Representation, max_len: usize) -> Result<Vec<WordSpectrum>> {
    if max_len == 0 {
        return Err(Error::InvalidParameter("word length cap must be >= 1".into()));
    }
    let (k, d) = (rep.rank(), rep.dim());
    let lc: Vec<Vec<DMatrix<f64>>> = letter_matrices(rep).iter().map(compounds).collect();
    let root = compounds(&DMatrix::identity(d, d));
    let letters: Vec<Letter> = alphabet(k).collect();
    let shards = letters
        .par_iter()
        .map(|&first| {
            let mut levels: Vec<Vec<WordSpectrum>> = (0..max_len).map(|_| Vec::new()).collect();
            let mut failure = None;
            let step = |s: &Vec<DMatrix<f64>>, l: Letter| -> Vec<DMatrix<f64>> {
                s.iter().zip(&lc[l.index()]).map(|(a, b)| a * b).collect()
            };
            walk_shard(k, first, max_len, &root, &step, &|_, _| true, &mut |prefix, state| {
                if failure.is_some() {
                    return;
                }
                let spectrum = cartan_from_compounds(state, 0.0)
                    .and_then(|a| Ok((a, jordan_from_compounds(state, 0.0)?)));
                match spectrum {
                    Ok((cartan, jordan)) => levels[prefix.len() - 1].push(WordSpectrum {
                        word: prefix.to_vec(),
                        cartan,
                        jordan,
                    }),
                    Err(e) => failure = Some(e),
                }
            });
            match failure {
                Some(e) => Err(e),
                None => Ok(levels),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut levels: Vec<Vec<WordSpectrum>> = (0..max_len).map(|_| Vec::new()).collect();
    for shard in shards {
        for (level, mut part) in levels.iter_mut().zip(shard) {
            level.append(&mut part);
        }
    }
    Ok(levels.into_iter().flatten().collect())
}
