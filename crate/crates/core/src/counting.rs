//! Direct estimators: critical exponents by counting, limit and asymptotic
//! cones, the growth indicator by cone counting, and the orbit-count ratio.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use directions::unit_functionals;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::repgen::{fmt_f64, Representation};
use crate::sample::{ElementData, PeriodData};
use crate::spectra::{plane, CartanVector, Functional};
use crate::stats::linear_fit;

/// Thresholds in each counting grid.
pub const GRID_POINTS: usize = 64;
/// Fraction of the grid dropped at the small end.
pub const TRANSIENT_FRACTION: f64 = 0.2;
/// Jordan vectors shorter than this are treated as elliptic.
pub const ELLIPTIC_NORM: f64 = 1e-6;
/// Arcs narrower than this are reported as a single direction.
pub const DEGENERATE_WIDTH: f64 = 1e-6;
/// Support directions used for hulls in dimension above three.
pub const SUPPORT_DIRECTIONS: usize = 64;

/// Which periods feed the exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// `phi(lambda)` over conjugacy classes.
    Conjugacy,
    /// `phi(a)` over group elements.
    Element,
}

/// A counting function on a threshold grid and its fitted exponent.
#[derive(Clone, Debug, Serialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub std_error: f64,
    pub thresholds: Vec<f64>,
    pub counts: Vec<u64>,
    /// First grid index used by the regression.
    pub fit_start: usize,
    /// Largest threshold covered by every word of the length cap.
    pub s_max: f64,
    pub mode: Mode,
}

impl ExponentFit {
    /// `threshold,count,log_count` rows for the whole grid.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,count,log_count\n");
        for (s, c) in self.thresholds.iter().zip(&self.counts) {
            let log = if *c > 0 { fmt_f64((*c as f64).ln()) } else { "-inf".into() };
            let _ = writeln!(out, "{},{},{}", fmt_f64(*s), c, log);
        }
        out
    }
}

/// Fits the growth rate of a counting function on a uniform grid in `(0, s_max]`.
///
/// `values` holds `(r, mass)` pairs; the regression is of `log sum_{r <= s} mass`
/// against `s`, while the reported counts are plain `#{r <= s}`.
fn fit_counts(mut values: Vec<(f64, f64)>, s_max: f64, mode: Mode) -> Result<ExponentFit> {
    if !(s_max > 0.0) || !s_max.is_finite() {
        return Err(Error::InsufficientData(format!("no complete threshold range (s_max = {s_max})")));
    }
    values.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cumulative = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (_, m) in &values {
        acc += m;
        cumulative.push(acc);
    }
    let thresholds: Vec<f64> = (1..=GRID_POINTS).map(|j| s_max * j as f64 / GRID_POINTS as f64).collect();
    let counts: Vec<u64> = thresholds
        .iter()
        .map(|&s| values.partition_point(|v| v.0 <= s) as u64)
        .collect();
    let fit_start = (TRANSIENT_FRACTION * GRID_POINTS as f64).ceil() as usize;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (&s, &c) in thresholds.iter().zip(&counts).skip(fit_start) {
        if c > 0 {
            x.push(s);
            y.push(cumulative[c as usize - 1].ln());
        }
    }
    let fit = linear_fit(&x, &y).ok_or_else(|| {
        Error::InsufficientData(format!("{} usable thresholds, need 3", x.len()))
    })?;
    Ok(ExponentFit {
        exponent: fit.slope,
        std_error: fit.slope_se,
        thresholds,
        counts,
        fit_start,
        s_max,
        mode,
    })
}

fn check_functional(phi: &Functional, dim: usize) -> Result<()> {
    if phi.dim() != dim {
        return Err(Error::InvalidParameter(format!(
            "functional has {} coefficients, representation dimension is {dim}",
            phi.dim()
        )));
    }
    Ok(())
}

fn check_cap(n: usize, available: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidParameter(format!("length cap {n} below {min}")));
    }
    if n > available {
        return Err(Error::InvalidParameter(format!("length cap {n} exceeds table length {available}")));
    }
    Ok(())
}

/// Growth rate of `#{[w] : phi(lambda(w)) <= s}` over classes of cyclic length `<= n`.
///
/// Classes are counted with their primitive period as mass (a Chebyshev sum,
/// asymptotic to `e^{hs}/h`), which removes the `1/s` prefactor of the plain
/// class count and with it most of the finite-range bias.
pub fn exponent_from_classes(data: &PeriodData, phi: &Functional, n: usize) -> Result<ExponentFit> {
    check_functional(phi, data.dim())?;
    check_cap(n, data.n_max(), 6)?;
    let mut values = Vec::new();
    for level in &data.levels()[..n] {
        for (i, v) in level.jordans().enumerate() {
            let r = phi.eval_coords(v);
            if r <= 0.0 {
                return Err(Error::NotInDualCone(format!(
                    "non-positive period {r:e} on a class of length {}",
                    level.n()
                )));
            }
            let multiplicity = (level.n() / level.period(i)) as f64;
            values.push((r, r / multiplicity));
        }
    }
    let s_max = data.level(n).jordans().map(|v| phi.eval_coords(v)).fold(f64::INFINITY, f64::min);
    fit_counts(values, s_max, Mode::Conjugacy)
}

/// Growth rate of `#{w : phi(a(w)) <= s}` over reduced words of length `<= n`.
pub fn exponent_from_elements(data: &ElementData, phi: &Functional, n: usize) -> Result<ExponentFit> {
    check_functional(phi, data.dim())?;
    check_cap(n, data.n_max(), 6)?;
    let values: Vec<(f64, f64)> = data.vectors_up_to(n).map(|(_, v)| (phi.eval_coords(v), 1.0)).collect();
    let s_max = data.level(n).map(|v| phi.eval_coords(v)).fold(f64::INFINITY, f64::min);
    fit_counts(values, s_max, Mode::Element)
}

/// Critical exponent of `phi` by direct counting up to length `n`.
pub fn critical_exponent_direct(rep: &Representation, phi: &Functional, n: usize, mode: Mode) -> Result<ExponentFit> {
    check_cap(n, n, 6)?;
    match mode {
        Mode::Conjugacy => exponent_from_classes(&PeriodData::from_rep(rep, n)?, phi, n),
        Mode::Element => exponent_from_elements(&ElementData::from_rep(rep, n)?, phi, n),
    }
}

/// Shape of a projectivized cone.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HullShape {
    /// Rank one: the chamber is a single ray.
    Ray,
    /// Rank two: angular interval in the chart of [`plane`].
    Arc { min: f64, max: f64 },
    /// Higher rank: support values along fixed unit directions.
    Support { values: Vec<f64> },
}

/// The cone generated by a set of chamber vectors, stored through its
/// extreme directions.
#[derive(Clone, Debug, Serialize)]
pub struct ConeHull {
    dim: usize,
    /// Unit directions that are extreme in the hull.
    extreme: Vec<CartanVector>,
    shape: HullShape,
    sample_count: usize,
    max_norm_used: f64,
}

/// Unit functionals for support sampling, fixed for reproducibility.
mod directions {
    use super::*;
    use rand::Rng;

    pub fn unit_functionals(d: usize, count: usize) -> Vec<Functional> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        (0..count)
            .map(|_| loop {
                // Box-Muller normals, rejection-free up to a zero draw
                let v: Vec<f64> = (0..d)
                    .map(|_| {
                        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                        let u2: f64 = rng.gen::<f64>();
                        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
                    })
                    .collect();
                let f = Functional::new(v);
                let norm = f.norm();
                if norm > 1e-6 {
                    break f.scaled(1.0 / norm);
                }
            })
            .collect()
    }
}

impl ConeHull {
    /// Hull of the directions of `vectors` (each `dim` long); vectors with
    /// norm below `floor` are skipped.
    pub fn from_vectors<'a>(dim: usize, vectors: impl Iterator<Item = &'a [f64]>, floor: f64) -> Option<Self> {
        let mut count = 0usize;
        let mut max_norm: f64 = 0.0;
        match dim {
            2 => {
                for v in vectors {
                    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
                    if n >= floor {
                        count += 1;
                        max_norm = max_norm.max(n);
                    }
                }
                (count > 0).then(|| Self {
                    dim,
                    extreme: vec![CartanVector::projected(vec![1.0, -1.0]).normalized().unwrap()],
                    shape: HullShape::Ray,
                    sample_count: count,
                    max_norm_used: max_norm,
                })
            }
            3 => {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for v in vectors {
                    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                    if n >= floor {
                        let t = plane::angle(v);
                        lo = lo.min(t);
                        hi = hi.max(t);
                        count += 1;
                        max_norm = max_norm.max(n);
                    }
                }
                (count > 0).then(|| Self::arc(lo, hi, count, max_norm))
            }
            _ => {
                let dirs = unit_functionals(dim, SUPPORT_DIRECTIONS);
                let mut best = vec![(f64::NEG_INFINITY, Vec::new()); dirs.len()];
                for v in vectors {
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if n < floor {
                        continue;
                    }
                    count += 1;
                    max_norm = max_norm.max(n);
                    for (u, b) in dirs.iter().zip(best.iter_mut()) {
                        let s = u.eval_coords(v) / n;
                        if s > b.0 {
                            *b = (s, v.iter().map(|x| x / n).collect());
                        }
                    }
                }
                if count == 0 {
                    return None;
                }
                let mut extreme: Vec<CartanVector> = Vec::new();
                for (_, v) in &best {
                    let c = CartanVector::projected(v.clone());
                    if !extreme.iter().any(|e| e.angle_to(&c) < DEGENERATE_WIDTH) {
                        extreme.push(c);
                    }
                }
                Some(Self {
                    dim,
                    extreme,
                    shape: HullShape::Support {
                        values: best.into_iter().map(|b| b.0).collect(),
                    },
                    sample_count: count,
                    max_norm_used: max_norm,
                })
            }
        }
    }

    fn arc(lo: f64, hi: f64, count: usize, max_norm: f64) -> Self {
        let extreme = if hi - lo < DEGENERATE_WIDTH {
            vec![plane::unit_vector(0.5 * (lo + hi))]
        } else {
            vec![plane::unit_vector(lo), plane::unit_vector(hi)]
        };
        Self {
            dim: 3,
            extreme,
            shape: HullShape::Arc { min: lo, max: hi },
            sample_count: count,
            max_norm_used: max_norm,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extreme_directions(&self) -> &[CartanVector] {
        &self.extreme
    }

    pub fn shape(&self) -> &HullShape {
        &self.shape
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn max_norm_used(&self) -> f64 {
        self.max_norm_used
    }

    /// Angular width for rank two, zero for rank one.
    pub fn width(&self) -> f64 {
        match &self.shape {
            HullShape::Arc { min, max } => max - min,
            _ => 0.0,
        }
    }

    /// Area of the slice `{v in hull : |v| <= 1}` spanned by the extreme
    /// unit directions (rank two; zero otherwise).
    pub fn area(&self) -> f64 {
        0.5 * self.width().sin()
    }

    pub fn is_degenerate(&self) -> bool {
        match &self.shape {
            HullShape::Ray => true,
            HullShape::Arc { .. } => self.width() < DEGENERATE_WIDTH,
            HullShape::Support { .. } => self.extreme.len() < 2,
        }
    }

    /// Angular Hausdorff distance between projectivized hulls.
    pub fn hausdorff(&self, other: &ConeHull) -> Result<f64> {
        match (&self.shape, &other.shape) {
            (HullShape::Ray, HullShape::Ray) => Ok(0.0),
            (HullShape::Arc { min: a, max: b }, HullShape::Arc { min: c, max: d }) => {
                Ok((a - c).abs().max((b - d).abs()))
            }
            (HullShape::Support { values: a }, HullShape::Support { values: b }) if a.len() == b.len() => {
                Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
            }
            _ => Err(Error::InvalidInput("hulls of different dimension".into())),
        }
    }

    /// True when `other` lies inside this hull up to `tol`.
    pub fn contains(&self, other: &ConeHull, tol: f64) -> bool {
        match (&self.shape, &other.shape) {
            (HullShape::Ray, HullShape::Ray) => true,
            (HullShape::Arc { min: a, max: b }, HullShape::Arc { min: c, max: d }) => {
                *c >= a - tol && *d <= b + tol
            }
            (HullShape::Support { values: a }, HullShape::Support { values: b }) => {
                a.iter().zip(b).all(|(x, y)| *y <= x + tol)
            }
            _ => false,
        }
    }

    /// Angle by which the direction of `v` lies outside the hull (zero inside).
    pub fn angle_outside(&self, v: &CartanVector) -> f64 {
        match &self.shape {
            HullShape::Ray => self.extreme[0].angle_to(v),
            HullShape::Arc { min, max } => {
                let t = plane::angle(v.coords());
                (min - t).max(t - max).max(0.0)
            }
            HullShape::Support { .. } => self
                .extreme
                .iter()
                .map(|e| e.angle_to(v))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Smallest simple-root ratio `(v_i - v_{i+1})/|v|` over the extreme
    /// directions, per root.
    pub fn wall_margins(&self) -> Vec<f64> {
        (1..self.dim)
            .map(|i| {
                self.extreme
                    .iter()
                    .map(|e| (e.coords()[i - 1] - e.coords()[i]) / e.norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }
}

/// Hull of `lambda` over classes of cyclic length `<= n`.
pub fn limit_cone_from(data: &PeriodData, n: usize) -> Result<ConeHull> {
    check_cap(n, data.n_max(), 1)?;
    ConeHull::from_vectors(data.dim(), data.vectors_up_to(n).map(|(_, v)| v), ELLIPTIC_NORM)
        .ok_or_else(|| Error::DegenerateCone("every class is elliptic".into()))
}

/// Hull of `a` over words of length `<= n` with `|a| >= norm_floor`.
pub fn asymptotic_cone_from(data: &ElementData, n: usize, norm_floor: f64) -> Result<ConeHull> {
    if !(norm_floor > 0.0) {
        return Err(Error::InvalidParameter("norm floor must be positive".into()));
    }
    check_cap(n, data.n_max(), 1)?;
    ConeHull::from_vectors(data.dim(), data.vectors_up_to(n).map(|(_, v)| v), norm_floor)
        .ok_or_else(|| Error::InsufficientData(format!("no Cartan vector reaches norm {norm_floor}")))
}

pub fn limit_cone(rep: &Representation, n: usize) -> Result<ConeHull> {
    check_cap(n, n, 4)?;
    limit_cone_from(&PeriodData::from_rep(rep, n)?, n)
}

pub fn asymptotic_cone(rep: &Representation, n: usize, norm_floor: f64) -> Result<ConeHull> {
    check_cap(n, n, 4)?;
    asymptotic_cone_from(&ElementData::from_rep(rep, n)?, n, norm_floor)
}

/// Smallest `(lambda_i - lambda_{i+1}) / |lambda|` over all classes up to length `n`.
pub fn wall_margins(data: &PeriodData, n: usize) -> Vec<f64> {
    let d = data.dim();
    let mut out = vec![f64::INFINITY; d - 1];
    for (_, v) in data.vectors_up_to(n) {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for i in 0..d - 1 {
            out[i] = out[i].min((v[i] - v[i + 1]) / norm);
        }
    }
    out
}

/// Range of `phi(lambda(w)) / |w|` over classes up to length `n`.
pub fn period_ratio_bounds(data: &PeriodData, phi: &Functional, n: usize) -> (f64, f64) {
    data.vectors_up_to(n)
        .map(|(len, v)| phi.eval_coords(v) / len as f64)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)))
}

/// A growth-indicator value: finite, or the explicit `-inf` marker.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Psi {
    Value(f64),
    NegInfinity,
    /// Minimum attained at an end of the traced window; not trusted.
    EdgeFlagged(f64),
}

impl Psi {
    pub fn value(self) -> Option<f64> {
        match self {
            Psi::Value(v) => Some(v),
            _ => None,
        }
    }

    pub fn scaled(self, c: f64) -> Psi {
        match self {
            Psi::Value(v) => Psi::Value(c * v),
            Psi::EdgeFlagged(v) => Psi::EdgeFlagged(c * v),
            Psi::NegInfinity => Psi::NegInfinity,
        }
    }

    pub fn to_field(self) -> String {
        match self {
            Psi::Value(v) | Psi::EdgeFlagged(v) => fmt_f64(v),
            Psi::NegInfinity => "-inf".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiMethod {
    DirectCount,
    Duality,
}

impl PsiMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            PsiMethod::DirectCount => "direct-count",
            PsiMethod::Duality => "duality",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthIndicatorSample {
    pub direction: CartanVector,
    pub value: Psi,
    pub method: PsiMethod,
    pub word_cap: usize,
    pub half_angle: f64,
    /// Regression standard error (zero for duality values).
    pub std_error: f64,
}

/// Growth rate of `#{w : a(w) within half_angle of v, |a(w)| <= s}`.
pub fn growth_indicator_from(data: &ElementData, v: &CartanVector, half_angle: f64, n: usize) -> Result<GrowthIndicatorSample> {
    if v.dim() != data.dim() || (v.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter("direction must be a unit vector of matching dimension".into()));
    }
    if !(half_angle > 0.0 && half_angle <= std::f64::consts::FRAC_PI_4) {
        return Err(Error::InvalidParameter(format!("half angle {half_angle} outside (0, pi/4]")));
    }
    check_cap(n, data.n_max(), 6)?;
    let cos_max = half_angle.cos();
    let mut values = Vec::new();
    for (_, a) in data.vectors_up_to(n) {
        let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 && v.coords().iter().zip(a).map(|(p, q)| p * q).sum::<f64>() >= cos_max * norm {
            values.push((norm, 1.0));
        }
    }
    let mut sample = GrowthIndicatorSample {
        direction: v.clone(),
        value: Psi::NegInfinity,
        method: PsiMethod::DirectCount,
        word_cap: n,
        half_angle,
        std_error: 0.0,
    };
    if values.is_empty() {
        return Ok(sample);
    }
    let s_max = data
        .level(n)
        .map(|a| a.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(f64::INFINITY, f64::min);
    let fit = fit_counts(values, s_max, Mode::Element)?;
    sample.value = Psi::Value(fit.exponent);
    sample.std_error = fit.std_error;
    Ok(sample)
}

pub fn growth_indicator_direct(rep: &Representation, v: &CartanVector, half_angle: f64, n: usize) -> Result<GrowthIndicatorSample> {
    check_cap(n, n, 6)?;
    growth_indicator_from(&ElementData::from_rep(rep, n)?, v, half_angle, n)
}

/// One row of the orbit-count table.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RatioRow {
    pub t: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitRatio {
    pub h: f64,
    pub rows: Vec<RatioRow>,
}

impl OrbitRatio {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,ratio\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{}", fmt_f64(r.t), fmt_f64(r.ratio));
        }
        out
    }

    /// Mean `|ratio - 1|` over the first and last thirds of the table.
    pub fn third_deviations(&self) -> (f64, f64) {
        let m = self.rows.len() / 3;
        let dev = |rows: &[RatioRow]| rows.iter().map(|r| (r.ratio - 1.0).abs()).sum::<f64>() / rows.len() as f64;
        if m == 0 {
            return (f64::NAN, f64::NAN);
        }
        (dev(&self.rows[..m]), dev(&self.rows[self.rows.len() - m..]))
    }
}

/// `h t e^{-h t} N_i(t)` with `N_i(t) = #{[w] : lambda_i - lambda_{i+1} <= t}`.
pub fn orbit_count_ratio_from(data: &PeriodData, i: usize, n: usize) -> Result<OrbitRatio> {
    let phi = Functional::simple_root(data.dim(), i)?;
    let fit = exponent_from_classes(data, &phi, n)?;
    let h = fit.exponent;
    let rows = fit
        .thresholds
        .iter()
        .zip(&fit.counts)
        .filter(|(_, &c)| c > 0)
        .map(|(&t, &c)| RatioRow {
            t,
            ratio: h * t * (-h * t).exp() * c as f64,
        })
        .collect();
    Ok(OrbitRatio { h, rows })
}

pub fn orbit_count_ratio(rep: &Representation, i: usize, n: usize) -> Result<OrbitRatio> {
    Functional::simple_root(rep.dim(), i)?;
    check_cap(n, n, 6)?;
    orbit_count_ratio_from(&PeriodData::from_rep(rep, n)?, i, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repgen::{make_schottky, perturb, sym_power_embed};
    use std::f64::consts::PI;

    fn s2() -> Representation {
        make_schottky(&[2.0, 2.0], &[0.0, PI / 2.0]).unwrap()
    }

    #[test]
    fn word_length_exponent_is_log3() {
        let phi = Functional::new(vec![1.0, -1.0]);
        let classes = exponent_from_classes(&PeriodData::word_length(2, 12), &phi, 12).unwrap();
        assert!((classes.exponent - 3f64.ln()).abs() < 0.05, "{}", classes.exponent);
        let elements = exponent_from_elements(&ElementData::word_length(2, 12), &phi, 12).unwrap();
        assert!((elements.exponent - 3f64.ln()).abs() < 0.05, "{}", elements.exponent);
    }

    #[test]
    fn exponent_homogeneity() {
        let data = PeriodData::from_rep(&s2(), 10).unwrap();
        let phi = Functional::new(vec![1.0, -1.0]);
        let a = exponent_from_classes(&data, &phi, 10).unwrap();
        let b = exponent_from_classes(&data, &phi.scaled(2.0), 10).unwrap();
        assert_eq!(a.counts, b.counts);
        assert!((a.exponent - 2.0 * b.exponent).abs() < 1e-12);
    }

    #[test]
    fn conjugacy_and_element_modes_agree() {
        let phi = Functional::new(vec![1.0, -1.0]);
        let c = critical_exponent_direct(&s2(), &phi, 12, Mode::Conjugacy).unwrap();
        let e = critical_exponent_direct(&s2(), &phi, 12, Mode::Element).unwrap();
        assert!((c.exponent - e.exponent).abs() < 0.1 * e.exponent, "{} {}", c.exponent, e.exponent);
    }

    #[test]
    fn exponent_preconditions() {
        let data = PeriodData::word_length(2, 8);
        assert!(matches!(
            exponent_from_classes(&data, &Functional::new(vec![-1.0, 1.0]), 8),
            Err(Error::NotInDualCone(_))
        ));
        assert!(exponent_from_classes(&data, &Functional::new(vec![1.0, -1.0]), 5).is_err());
        let csv = exponent_from_classes(&data, &Functional::new(vec![1.0, -1.0]), 8).unwrap().to_csv();
        assert!(csv.starts_with("threshold,count,log_count\n"));
        assert_eq!(csv.lines().count(), GRID_POINTS + 1);
    }

    #[test]
    fn fuchsian_cones_degenerate() {
        let f3 = sym_power_embed(&s2(), 3).unwrap();
        let lc = limit_cone(&f3, 8).unwrap();
        assert!(lc.is_degenerate());
        assert_eq!(lc.extreme_directions().len(), 1);
        let target = CartanVector::projected(vec![1.0, 0.0, -1.0]).normalized().unwrap();
        assert!(lc.extreme_directions()[0].angle_to(&target) < 1e-6);
        // the monomial basis is not orthonormal, so Cartan directions of the
        // Fuchsian image approach the ray only like 1/|a|
        let ac = asymptotic_cone(&f3, 12, 25.0).unwrap();
        for e in ac.extreme_directions() {
            assert!(e.angle_to(&target) < 0.02);
        }
        let id = Representation::with_default_labels(vec![nalgebra::DMatrix::identity(3, 3); 2]).unwrap();
        assert!(matches!(limit_cone(&id, 4), Err(Error::DegenerateCone(_))));
        assert!(matches!(asymptotic_cone(&f3, 4, 1e6), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn perturbed_cone_has_interior_and_grows() {
        let p3 = perturb(&sym_power_embed(&s2(), 3).unwrap(), 0.05, 1).unwrap();
        let data = PeriodData::from_rep(&p3, 8).unwrap();
        let mut prev = limit_cone_from(&data, 4).unwrap();
        for n in 5..=8 {
            let hull = limit_cone_from(&data, n).unwrap();
            assert!(hull.contains(&prev, 1e-9));
            prev = hull;
        }
        assert!(prev.area() > 0.0 && !prev.is_degenerate());
        assert!(prev.wall_margins().iter().all(|&m| m > 0.0));
    }

    #[test]
    fn schottky_rank_one_cones_coincide() {
        let lc = limit_cone(&s2(), 12).unwrap();
        let ac = asymptotic_cone(&s2(), 12, 1.0).unwrap();
        assert!(lc.hausdorff(&ac).unwrap() < 0.05);
    }

    #[test]
    fn support_hull_in_rank_three() {
        let f4 = perturb(&sym_power_embed(&s2(), 4).unwrap(), 0.05, 2).unwrap();
        let data = PeriodData::from_rep(&f4, 6).unwrap();
        let a = limit_cone_from(&data, 5).unwrap();
        let b = limit_cone_from(&data, 6).unwrap();
        assert!(b.contains(&a, 1e-9));
        assert!(a.hausdorff(&a).unwrap() == 0.0);
        assert!(matches!(b.shape(), HullShape::Support { values } if values.len() == SUPPORT_DIRECTIONS));
    }

    #[test]
    fn ledrappier_ratio_bounds_stable() {
        let data = PeriodData::from_rep(&s2(), 10).unwrap();
        let phi = Functional::new(vec![1.0, -1.0]);
        let (lo8, hi8) = period_ratio_bounds(&data, &phi, 8);
        let (lo10, hi10) = period_ratio_bounds(&data, &phi, 10);
        assert!(lo10 > 0.0 && hi10.is_finite());
        assert!(lo10 <= lo8 && hi10 >= hi8);
        assert!(lo10 > 0.9 * lo8 && hi10 < 1.1 * hi8);
    }

    #[test]
    fn indicator_on_rank_one_matches_exponent() {
        let data = ElementData::from_rep(&s2(), 12).unwrap();
        let v = CartanVector::projected(vec![1.0, -1.0]).normalized().unwrap();
        let psi = growth_indicator_from(&data, &v, 0.1, 12).unwrap();
        // psi is measured against |a| = (a_1 - a_2)/sqrt 2
        let h = exponent_from_elements(&data, &Functional::new(vec![1.0, -1.0]), 12).unwrap();
        let expected = h.exponent * 2f64.sqrt();
        assert!((psi.value.value().unwrap() - expected).abs() < 0.05 * expected);
        // the opposite direction is outside the chamber
        let out = growth_indicator_from(&data, &v.scaled(-1.0), 0.1, 12).unwrap();
        assert_eq!(out.value, Psi::NegInfinity);
        assert!(growth_indicator_from(&data, &v, 1.0, 12).is_err());
    }

    #[test]
    fn orbit_ratio_table() {
        let r = orbit_count_ratio(&s2(), 1, 10).unwrap();
        assert!(r.h > 0.0 && !r.rows.is_empty());
        assert!(r.to_csv().starts_with("t,ratio\n"));
        assert!(orbit_count_ratio(&s2(), 2, 10).is_err());
    }
}
