//! Example representations of free groups into `SL(d, R)`: Schottky pairs,
//! symmetric-power embeddings, seeded deformations and duals, plus the
//! text/JSON representation file format.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest tolerated `|det - 1|` once a generator has been normalized.
pub const DET_TOLERANCE: f64 = 1e-9;

/// A homomorphism from the free group `F_k` to `SL(d, R)`, given by the
/// images of the free generators. Inverses are implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    dim: usize,
    labels: Vec<String>,
    generators: Vec<DMatrix<f64>>,
}

impl Representation {
    /// Builds a representation, rescaling every generator to determinant one.
    pub fn new(labels: Vec<String>, generators: Vec<DMatrix<f64>>) -> Result<Self> {
        if generators.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least two generators, got {}",
                generators.len()
            )));
        }
        if labels.len() != generators.len() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} generators",
                labels.len(),
                generators.len()
            )));
        }
        let dim = generators[0].nrows();
        if dim < 2 {
            return Err(Error::InvalidParameter("dimension must be at least 2".into()));
        }
        let mut seen = HashSet::new();
        for label in &labels {
            if label.is_empty() || label.chars().any(char::is_whitespace) {
                return Err(Error::InvalidInput(format!("bad generator label {label:?}")));
            }
            if !seen.insert(label.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate generator label {label:?}")));
            }
        }
        let generators = generators
            .into_iter()
            .map(|g| {
                if g.nrows() != dim || g.ncols() != dim {
                    return Err(Error::InvalidInput(format!(
                        "generator of shape {}x{} in a {dim}-dimensional representation",
                        g.nrows(),
                        g.ncols()
                    )));
                }
                if g.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidInput("non-finite matrix entry".into()));
                }
                normalize_det(g).map_err(|e| match e {
                    Error::PerturbationFailed(m) => Error::InvalidInput(m),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, labels, generators })
    }

    /// Same as [`Representation::new`] with labels `a, b, c, ...`.
    pub fn with_default_labels(generators: Vec<DMatrix<f64>>) -> Result<Self> {
        let labels = default_labels(generators.len());
        Self::new(labels, generators)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of free generators `k`.
    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn generators(&self) -> &[DMatrix<f64>] {
        &self.generators
    }

    pub fn generator(&self, i: usize) -> &DMatrix<f64> {
        &self.generators[i]
    }

    /// Serializes to the line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("dim={} gens={}\n", self.dim, self.rank());
        for (label, g) in self.labels.iter().zip(&self.generators) {
            out.push_str(label);
            for i in 0..self.dim {
                for j in 0..self.dim {
                    let _ = write!(out, " {}", fmt_f64(g[(i, j)]));
                }
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text format (`dim=<d> gens=<k>` header, then one line per
    /// generator: label followed by `d*d` row-major entries).
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty representation file".into()))?;
        let mut dim = None;
        let mut gens = None;
        for field in header.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field {field:?}")))?;
            let value: usize = value
                .parse()
                .map_err(|_| Error::Parse(format!("bad header value {field:?}")))?;
            match key {
                "dim" => dim = Some(value),
                "gens" => gens = Some(value),
                _ => return Err(Error::Parse(format!("unknown header key {key:?}"))),
            }
        }
        let dim = dim.ok_or_else(|| Error::Parse("header is missing dim=".into()))?;
        let gens = gens.ok_or_else(|| Error::Parse("header is missing gens=".into()))?;
        let mut labels = Vec::with_capacity(gens);
        let mut generators = Vec::with_capacity(gens);
        for line in lines {
            let mut tokens = line.split_whitespace();
            let label = tokens.next().unwrap_or_default().to_string();
            let entries = tokens
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad matrix entry {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if entries.len() != dim * dim {
                return Err(Error::Parse(format!(
                    "generator {label:?} has {} entries, expected {}",
                    entries.len(),
                    dim * dim
                )));
            }
            labels.push(label);
            generators.push(DMatrix::from_row_slice(dim, dim, &entries));
        }
        if generators.len() != gens {
            return Err(Error::Parse(format!(
                "header announces {gens} generators, found {}",
                generators.len()
            )));
        }
        Self::new(labels, generators)
    }

    pub fn to_json(&self) -> String {
        let file = RepresentationFile {
            dim: self.dim,
            labels: self.labels.clone(),
            generators: self
                .generators
                .iter()
                .map(|g| (0..self.dim).map(|i| g.row(i).iter().copied().collect()).collect())
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("representation serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: RepresentationFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut generators = Vec::with_capacity(file.generators.len());
        for (label, rows) in file.labels.iter().zip(&file.generators) {
            if rows.len() != file.dim || rows.iter().any(|r| r.len() != file.dim) {
                return Err(Error::Parse(format!(
                    "generator {label:?} is not {0}x{0}",
                    file.dim
                )));
            }
            let flat: Vec<f64> = rows.iter().flatten().copied().collect();
            generators.push(DMatrix::from_row_slice(file.dim, file.dim, &flat));
        }
        if file.labels.len() != file.generators.len() {
            return Err(Error::Parse("labels and generators differ in length".into()));
        }
        Self::new(file.labels, generators)
    }

    /// Parses either accepted form, detected by the first non-blank character.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::from_text(text)
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let body = if path.extension().is_some_and(|e| e == "json") {
            self.to_json()
        } else {
            self.to_text()
        };
        std::fs::write(path, body)?;
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct RepresentationFile {
    dim: usize,
    labels: Vec<String>,
    generators: Vec<Vec<Vec<f64>>>,
}

/// 17 significant digits, round-trips every `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn default_labels(k: usize) -> Vec<String> {
    (0..k)
        .map(|i| {
            if i < 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("g{}", i + 1)
            }
        })
        .collect()
}

/// Divides by the real `d`-th root of the determinant.
fn normalize_det(g: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = g.nrows();
    let det = g.determinant();
    if !det.is_finite() || det == 0.0 {
        return Err(Error::PerturbationFailed("singular generator".into()));
    }
    let scale = if det > 0.0 {
        det.powf(1.0 / d as f64)
    } else if d % 2 == 1 {
        -(-det).powf(1.0 / d as f64)
    } else {
        return Err(Error::PerturbationFailed(format!(
            "negative determinant {det:e} in even dimension {d}"
        )));
    };
    // already unimodular up to rounding: keep entries bit-exact
    let g = if (det - 1.0).abs() < 1e-12 { g } else { g / scale };
    let det = g.determinant();
    if (det - 1.0).abs() >= DET_TOLERANCE {
        return Err(Error::PerturbationFailed(format!(
            "determinant {det} after normalization"
        )));
    }
    Ok(g)
}

fn rotation(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

/// Hyperbolic generators in `SL(2, R)` with translation length `l_i` along a
/// geodesic through the disk centre at angle `theta_i`.
///
/// The generator is `K diag(e^{l/2}, e^{-l/2}) K^T` where `K` is the rotation
/// by `theta/2`, which turns the hyperbolic disk by `theta`. Axes at angles
/// differing by `pi` coincide, hence the distinctness requirement mod `pi`.
pub fn make_schottky(translation_lengths: &[f64], axis_angles: &[f64]) -> Result<Representation> {
    let k = translation_lengths.len();
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need k >= 2 generators, got {k}")));
    }
    if axis_angles.len() != k {
        return Err(Error::InvalidParameter(format!(
            "{k} lengths but {} angles",
            axis_angles.len()
        )));
    }
    if let Some(l) = translation_lengths.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
        return Err(Error::InvalidParameter(format!("translation length {l} is not positive")));
    }
    for i in 0..k {
        for j in i + 1..k {
            let delta = (axis_angles[i] - axis_angles[j]).rem_euclid(PI);
            if delta.min(PI - delta) < 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "axes {i} and {j} coincide (angles equal mod pi)"
                )));
            }
        }
    }
    let generators = translation_lengths
        .iter()
        .zip(axis_angles)
        .map(|(&l, &theta)| {
            let k = rotation(theta / 2.0);
            let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                (l / 2.0).exp(),
                (-l / 2.0).exp(),
            ]));
            &k * d * k.transpose()
        })
        .collect();
    Representation::with_default_labels(generators)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Action of a 2x2 matrix on binary forms of degree `d - 1`.
///
/// Row `j` holds the coefficients of the image of `x^{d-1-j} y^j` under
/// `x -> g11 x + g12 y`, `y -> g21 x + g22 y`; with this convention the map
/// is multiplicative.
pub fn sym_power_matrix(g: &DMatrix<f64>, d: usize) -> DMatrix<f64> {
    assert_eq!(g.shape(), (2, 2), "symmetric powers of 2x2 matrices only");
    let deg = d - 1;
    let (a, b, c, e) = (g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]);
    let mut out = DMatrix::zeros(d, d);
    for j in 0..d {
        // (a x + b y)^{deg-j} (c x + e y)^j
        let p = deg - j;
        for r in 0..=p {
            // choose r factors of y from the first power
            let first = binomial(p, r) * a.powi((p - r) as i32) * b.powi(r as i32);
            for s in 0..=j {
                let second = binomial(j, s) * c.powi((j - s) as i32) * e.powi(s as i32);
                out[(j, r + s)] += first * second;
            }
        }
    }
    out
}

/// Composes a two-dimensional representation with the irreducible
/// `SL(2) -> SL(d)` action.
pub fn sym_power_embed(rep2: &Representation, d: usize) -> Result<Representation> {
    if rep2.dim() != 2 {
        return Err(Error::InvalidParameter(format!(
            "symmetric power needs a 2-dimensional representation, got {}",
            rep2.dim()
        )));
    }
    if d < 2 {
        return Err(Error::InvalidParameter(format!("target dimension {d} < 2")));
    }
    let generators = rep2.generators().iter().map(|g| sym_power_matrix(g, d)).collect();
    Representation::new(rep2.labels().to_vec(), generators)
}

/// Adds independent uniform noise in `[-epsilon, epsilon]` to every entry and
/// rescales back to determinant one. Deterministic in `seed`.
pub fn perturb(rep: &Representation, epsilon: f64, seed: u64) -> Result<Representation> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} must be >= 0")));
    }
    if epsilon == 0.0 {
        return Ok(rep.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rep.dim();
    let generators = rep
        .generators()
        .iter()
        .map(|g| {
            let mut m = g.clone();
            // row-major draw order, fixed for reproducibility
            for i in 0..d {
                for j in 0..d {
                    m[(i, j)] += rng.gen_range(-epsilon..=epsilon);
                }
            }
            normalize_det(m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Representation {
        dim: d,
        labels: rep.labels.clone(),
        generators,
    })
}

/// Contragredient representation: every generator replaced by its inverse transpose.
pub fn dual_rep(rep: &Representation) -> Result<Representation> {
    let generators = rep
        .generators()
        .iter()
        .map(|g| {
            g.clone()
                .try_inverse()
                .map(|inv| inv.transpose())
                .ok_or_else(|| Error::SpectralFailure("singular generator".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Representation::new(rep.labels.clone(), generators)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
        a.shape() == b.shape() && (a - b).amax() <= tol
    }

    #[test]
    fn schottky_traces() {
        let rep = make_schottky(&[2.0, 2.0], &[0.0, PI / 2.0]).unwrap();
        // trace of a conjugate of diag(e, 1/e)
        let expected = 2.0 * 1f64.cosh();
        for g in rep.generators() {
            assert!((g.trace() - expected).abs() < 1e-12);
            assert!((g.determinant() - 1.0).abs() < 1e-12);
        }
        assert!((expected - 3.0862).abs() < 1e-4);
        // perpendicular axes: b is the symmetric matrix [[ch, sh], [sh, ch]]
        let b = rep.generator(1);
        assert!((b[(0, 1)] - 1f64.sinh()).abs() < 1e-12);
        assert!((b[(0, 0)] - 1f64.cosh()).abs() < 1e-12);
    }

    #[test]
    fn schottky_preconditions() {
        assert!(matches!(make_schottky(&[2.0], &[0.0]), Err(Error::InvalidParameter(_))));
        assert!(matches!(
            make_schottky(&[2.0, 2.0], &[0.0, 0.0]),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            make_schottky(&[2.0, 2.0], &[0.0, PI]),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            make_schottky(&[2.0, -1.0], &[0.0, 1.0]),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            make_schottky(&[2.0, 0.0], &[0.0, 1.0]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn sym_power_examples() {
        let diag = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let s = sym_power_matrix(&diag, 3);
        let expected = DMatrix::from_row_slice(3, 3, &[4.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.25]);
        assert!(close(&s, &expected, 1e-15));

        let unipotent = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let s = sym_power_matrix(&unipotent, 3);
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0]);
        assert!(close(&s, &expected, 1e-15));

        for d in 2..7 {
            let id = sym_power_matrix(&DMatrix::identity(2, 2), d);
            assert!(close(&id, &DMatrix::identity(d, d), 1e-15));
        }
        // d = 2 is the identity embedding
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        assert!(close(&sym_power_matrix(&g, 2), &g, 1e-15));
    }

    #[test]
    fn sym_power_is_multiplicative() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let h = DMatrix::from_row_slice(2, 2, &[0.3, -1.2, 0.7, 0.5]);
        for d in 2..6 {
            let lhs = sym_power_matrix(&(&g * &h), d);
            let rhs = sym_power_matrix(&g, d) * sym_power_matrix(&h, d);
            assert!(close(&lhs, &rhs, 1e-12), "d = {d}");
        }
    }

    #[test]
    fn sym_power_rejects_wrong_dimension() {
        let rep = make_schottky(&[2.0, 2.0], &[0.0, 1.0]).unwrap();
        let rep3 = sym_power_embed(&rep, 3).unwrap();
        assert!(matches!(sym_power_embed(&rep3, 3), Err(Error::InvalidParameter(_))));
        assert!(matches!(sym_power_embed(&rep, 1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn perturb_zero_and_determinism() {
        let rep = sym_power_embed(&make_schottky(&[2.0, 2.0], &[0.0, PI / 2.0]).unwrap(), 3).unwrap();
        assert_eq!(perturb(&rep, 0.0, 7).unwrap(), rep);
        let a = perturb(&rep, 1e-3, 1).unwrap();
        let b = perturb(&rep, 1e-3, 1).unwrap();
        let c = perturb(&rep, 1e-3, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        for g in a.generators() {
            assert!((g.determinant() - 1.0).abs() < DET_TOLERANCE);
        }
        assert!(matches!(perturb(&rep, -1.0, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn perturb_failure_in_even_dimension() {
        // near-singular generator whose determinant flips sign under noise
        let g = DMatrix::from_row_slice(2, 2, &[1e-3, 0.0, 0.0, 1e3]);
        let h = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let rep = Representation::with_default_labels(vec![g, h]).unwrap();
        let failures = (0..50)
            .filter(|s| matches!(perturb(&rep, 0.5, *s), Err(Error::PerturbationFailed(_))))
            .count();
        assert!(failures > 0);
    }

    #[test]
    fn dual_examples() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let rep = Representation::with_default_labels(vec![g.clone(), DMatrix::identity(2, 2)]).unwrap();
        let dual = dual_rep(&rep).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 2.0]);
        assert!(close(dual.generator(0), &expected, 1e-14));
        assert!(close(dual.generator(1), &DMatrix::identity(2, 2), 0.0));
        let back = dual_rep(&dual).unwrap();
        assert!(close(back.generator(0), &g, 1e-14));

        let d3 = DMatrix::from_row_slice(3, 3, &[4.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.25]);
        let rep = Representation::with_default_labels(vec![d3.clone(), d3]).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[0.25, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 4.0]);
        assert!(close(dual_rep(&rep).unwrap().generator(0), &expected, 1e-15));
    }

    #[test]
    fn invariants_enforced() {
        let id = DMatrix::<f64>::identity(2, 2);
        assert!(Representation::with_default_labels(vec![id.clone()]).is_err());
        assert!(Representation::new(vec!["a".into(), "a".into()], vec![id.clone(), id.clone()]).is_err());
        let mut bad = id.clone();
        bad[(0, 0)] = f64::NAN;
        assert!(Representation::with_default_labels(vec![bad, id.clone()]).is_err());
        let scaled = &id * 3.0;
        let rep = Representation::with_default_labels(vec![scaled, id]).unwrap();
        assert!((rep.generator(0).determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn text_and_json_round_trip() {
        let rep = perturb(
            &sym_power_embed(&make_schottky(&[2.0, 2.0], &[0.0, PI / 2.0]).unwrap(), 3).unwrap(),
            0.05,
            1,
        )
        .unwrap();
        let text = rep.to_text();
        assert!(text.starts_with("dim=3 gens=2\n"));
        assert_eq!(Representation::parse(&text).unwrap(), rep);
        assert_eq!(Representation::parse(&rep.to_json()).unwrap(), rep);
        assert!(matches!(Representation::parse("dim=2\n"), Err(Error::Parse(_))));
        assert!(matches!(
            Representation::parse("dim=2 gens=2\na 1 0 0 1\nb 1 0 0\n"),
            Err(Error::Parse(_))
        ));
    }
}
