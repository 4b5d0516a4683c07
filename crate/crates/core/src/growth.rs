//! The dual body `D = {phi : critical exponent of phi <= 1}` and the growth
//! indicator recovered from it.
//!
//! Boundary functionals are found by scaling a direction `u` to `s* u` where
//! `s*` is the pressure root of `u`. The growth indicator is the lower
//! envelope `psi(v) = min_phi phi(v)` over the traced boundary, and the Gibbs
//! average attached to each boundary point is the direction where that
//! functional touches the envelope.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::counting::{limit_cone_from, ConeHull, HullShape, Psi, DEGENERATE_WIDTH};
use crate::error::{Error, Result};
use crate::pressure::{extrapolated_gibbs_mean, pressure_root_from};
use crate::repgen::{fmt_f64, perturb, Representation};
use crate::sample::PeriodData;
use crate::spectra::{plane, CartanVector, Functional};
use crate::stats::spearman;

/// Fraction of the dual-cone window left out at each end.
pub const ANGULAR_INSET: f64 = 0.05;
/// Largest tolerated fraction of failed directions in a traced curve.
pub const MAX_GAP_FRACTION: f64 = 0.2;
/// Default root tolerance for boundary points.
pub const ROOT_TOL: f64 = 1e-9;

/// A functional on the boundary of the dual body and its tangency data.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryPoint {
    /// `phi = s_star * direction`, with critical exponent one.
    pub functional: Functional,
    /// Unit direction that was scaled onto the boundary.
    pub direction: Functional,
    pub s_star: f64,
    /// Unit Gibbs direction.
    pub gibbs_dir: CartanVector,
    /// Norm of the Gibbs average per unit symbolic time.
    pub gibbs_scale: f64,
    /// `phi` applied to the (unnormalized) Gibbs average.
    pub entropy: f64,
    pub n_used: usize,
}

impl BoundaryPoint {
    /// The Gibbs average itself, `gibbs_scale * gibbs_dir`.
    pub fn gibbs_mean(&self) -> CartanVector {
        self.gibbs_dir.scaled(self.gibbs_scale)
    }

    /// Chart angle of the direction (rank two only).
    pub fn angle(&self) -> f64 {
        plane::angle(self.direction.coeffs())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "direction": self.direction.coeffs(),
            "s_star": self.s_star,
            "gibbs_dir": self.gibbs_dir.coords(),
            "entropy": self.entropy,
        })
    }
}

/// Scales the direction of `u` onto the boundary of the dual body.
pub fn boundary_point_from(data: &PeriodData, u: &Functional, tol: f64) -> Result<BoundaryPoint> {
    let norm = u.norm();
    if !(norm > 0.0) {
        return Err(Error::InvalidParameter("zero direction".into()));
    }
    let direction = u.scaled(1.0 / norm);
    let s_star = pressure_root_from(data, &direction, tol)?.root;
    let functional = direction.scaled(s_star);
    let mean = extrapolated_gibbs_mean(data, &functional)?;
    let gibbs_scale = mean.norm();
    let gibbs_dir = mean
        .normalized()
        .ok_or_else(|| Error::SpectralFailure("vanishing Gibbs average".into()))?;
    Ok(BoundaryPoint {
        entropy: functional.eval(&mean),
        functional,
        direction,
        s_star,
        gibbs_dir,
        gibbs_scale,
        n_used: data.n_max(),
    })
}

pub fn boundary_point(rep: &Representation, u: &Functional, tol: f64, n_max: usize) -> Result<BoundaryPoint> {
    boundary_point_from(&PeriodData::from_rep(rep, n_max)?, u, tol)
}

/// Traced boundary of the dual body, ordered by chart angle.
#[derive(Clone, Debug, Serialize)]
pub struct DualBody {
    dim: usize,
    boundary: Vec<BoundaryPoint>,
    /// Extreme rays of the estimated dual cone (unit functionals).
    dual_cone_rays: Vec<Functional>,
    /// Angles that failed, recorded as gaps.
    gaps: Vec<f64>,
    /// Sampled window of chart angles.
    window: (f64, f64),
}

impl DualBody {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boundary(&self) -> &[BoundaryPoint] {
        &self.boundary
    }

    pub fn dual_cone_rays(&self) -> &[Functional] {
        &self.dual_cone_rays
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn to_json(&self) -> String {
        let points: Vec<_> = self.boundary.iter().map(BoundaryPoint::to_json).collect();
        serde_json::to_string_pretty(&points).expect("serializable")
    }

    /// Largest radial excess of a boundary point over the chord through its
    /// neighbours. The body is convex and misses the origin, so every chord
    /// lies in the body and the excess should vanish.
    pub fn convexity_defect(&self) -> f64 {
        if self.dim != 3 {
            return 0.0;
        }
        let xy = |p: &BoundaryPoint| plane::to_xy(p.functional.coeffs());
        self.boundary
            .windows(3)
            .map(|w| {
                let (a, b, c) = (xy(&w[0]), xy(&w[1]), xy(&w[2]));
                // ray t * b meets the line a + u (c - a)
                let (dx, dy) = (c.0 - a.0, c.1 - a.1);
                let denom = b.0 * dy - b.1 * dx;
                let t = (a.0 * dy - a.1 * dx) / denom;
                (w[1].s_star * (1.0 - t)).max(0.0)
            })
            .fold(0.0, f64::max)
    }
}

/// `(min_j phi_j(v), argmin)`.
fn psi_envelope(points: &[BoundaryPoint], v: &CartanVector) -> (f64, usize) {
    points
        .iter()
        .enumerate()
        .map(|(j, p)| (p.functional.eval(v), j))
        .fold((f64::INFINITY, 0), |best, cur| if cur.0 < best.0 { cur } else { best })
}

/// Sampled angles of the dual-cone window for a rank-two limit cone.
fn dual_window(cone: &ConeHull) -> Result<(f64, f64, Vec<Functional>)> {
    match cone.shape() {
        HullShape::Arc { min, max } => {
            let lo = max - FRAC_PI_2;
            let hi = min + FRAC_PI_2;
            let inset = ANGULAR_INSET * (hi - lo);
            Ok((
                lo + inset,
                hi - inset,
                vec![plane::unit_functional(lo), plane::unit_functional(hi)],
            ))
        }
        _ => Err(Error::InvalidParameter("angular windows need rank two".into())),
    }
}

/// Traces the boundary at `resolution` directions.
///
/// Rank one gives the single boundary point; rank two samples the dual-cone
/// window by angle, endpoints included. A degenerate limit cone has a dual
/// cone without interior, so every sampled direction counts as a gap.
pub fn boundary_curve_from(data: &PeriodData, resolution: usize) -> Result<DualBody> {
    match data.dim() {
        2 => {
            let u = Functional::new(vec![1.0, -1.0]);
            let p = boundary_point_from(data, &u, ROOT_TOL)?;
            Ok(DualBody {
                dim: 2,
                dual_cone_rays: vec![p.direction.clone()],
                boundary: vec![p],
                gaps: Vec::new(),
                window: (0.0, 0.0),
            })
        }
        3 => {
            if resolution < 8 {
                return Err(Error::InvalidParameter(format!("resolution {resolution} below 8")));
            }
            let cone = limit_cone_from(data, data.n_max())?;
            if cone.width() < DEGENERATE_WIDTH {
                return Err(Error::DegenerateCone(format!(
                    "limit cone width {:e}: the dual cone has empty interior, all {resolution} directions are gaps",
                    cone.width()
                )));
            }
            let (lo, hi, rays) = dual_window(&cone)?;
            let angles: Vec<f64> = (0..resolution)
                .map(|j| lo + (hi - lo) * j as f64 / (resolution - 1) as f64)
                .collect();
            let results: Vec<Result<BoundaryPoint>> = angles
                .par_iter()
                .map(|&t| boundary_point_from(data, &plane::unit_functional(t), ROOT_TOL))
                .collect();
            let mut boundary = Vec::new();
            let mut gaps = Vec::new();
            let mut first_error = None;
            for (t, r) in angles.iter().zip(results) {
                match r {
                    Ok(p) => boundary.push(p),
                    Err(e) => {
                        gaps.push(*t);
                        first_error.get_or_insert(e);
                    }
                }
            }
            if gaps.len() as f64 > MAX_GAP_FRACTION * resolution as f64 {
                return Err(first_error.expect("gaps carry an error"));
            }
            Ok(DualBody {
                dim: 3,
                boundary,
                dual_cone_rays: rays,
                gaps,
                window: (lo, hi),
            })
        }
        d => Err(Error::InvalidParameter(format!(
            "boundary curves are traced for d = 2, 3 (got {d}); use boundary_point in higher rank"
        ))),
    }
}

pub fn boundary_curve(rep: &Representation, resolution: usize, n_max: usize) -> Result<DualBody> {
    boundary_curve_from(&PeriodData::from_rep(rep, n_max)?, resolution)
}

/// `min_phi phi(v)` over the traced boundary.
///
/// Directions on which some dual-cone ray is negative lie outside the limit
/// cone and get the `-inf` marker; a minimum attained at either end of the
/// traced window is returned flagged.
pub fn psi_from_duality(body: &DualBody, v: &CartanVector) -> Psi {
    if body.boundary.is_empty() {
        return Psi::NegInfinity;
    }
    if body.dual_cone_rays.iter().any(|u| u.eval(v) < 0.0) {
        return Psi::NegInfinity;
    }
    let (value, j) = psi_envelope(&body.boundary, v);
    if body.dim == 3 && (j == 0 || j + 1 == body.boundary.len()) {
        Psi::EdgeFlagged(value)
    } else {
        Psi::Value(value)
    }
}

/// Maximum of the functional distance between the coarse curve and the
/// cubic interpolation of the fine curve at the coarse angles.
pub fn refinement_error(coarse: &DualBody, fine: &DualBody) -> Result<f64> {
    if coarse.dim != 3 || fine.dim != 3 {
        return Ok(0.0);
    }
    let nodes: Vec<(f64, f64)> = fine.boundary.iter().map(|p| (p.angle(), p.s_star)).collect();
    if nodes.len() < 4 {
        return Err(Error::InsufficientData("fine curve has fewer than 4 points".into()));
    }
    let mut worst: f64 = 0.0;
    for p in &coarse.boundary {
        let t = p.angle();
        let k = nodes.partition_point(|n| n.0 < t);
        let start = k.saturating_sub(2).min(nodes.len() - 4);
        let stencil = &nodes[start..start + 4];
        let s: f64 = stencil
            .iter()
            .enumerate()
            .map(|(i, (ti, si))| {
                let basis: f64 = stencil
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, (tj, _))| (t - tj) / (ti - tj))
                    .product();
                si * basis
            })
            .sum();
        // same direction, so the functional distance is the radial gap
        worst = worst.max((p.s_star - s).abs());
    }
    Ok(worst)
}

/// Growth form, its norm and the growth direction.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthForm {
    pub theta: Functional,
    /// `min |phi|` over the boundary, the exponent of the Euclidean norm.
    pub h: f64,
    pub tau: CartanVector,
    /// Angle between `tau` and the Gibbs direction of the nearest boundary point.
    pub gibbs_gap: f64,
}

/// Minimum-norm point of the boundary, refined by a parabola through the
/// three samples around the discrete minimum.
pub fn growth_form(body: &DualBody) -> Result<GrowthForm> {
    let pts = &body.boundary;
    if pts.is_empty() {
        return Err(Error::InsufficientData("empty dual body".into()));
    }
    let mut j = 0;
    for (i, p) in pts.iter().enumerate() {
        if p.s_star < pts[j].s_star {
            j = i;
        }
    }
    let (theta, h) = if body.dim == 3 && j > 0 && j + 1 < pts.len() {
        let (t0, t1, t2) = (pts[j - 1].angle(), pts[j].angle(), pts[j + 1].angle());
        let (s0, s1, s2) = (pts[j - 1].s_star, pts[j].s_star, pts[j + 1].s_star);
        let denom = (t0 - t1) * (t0 - t2) * (t1 - t2);
        let a = (t2 * (s1 - s0) + t1 * (s0 - s2) + t0 * (s2 - s1)) / denom;
        let b = (t2 * t2 * (s0 - s1) + t1 * t1 * (s2 - s0) + t0 * t0 * (s1 - s2)) / denom;
        if a > 0.0 {
            let tv = (-b / (2.0 * a)).clamp(t0, t2);
            let c = s1 - a * t1 * t1 - b * t1;
            let hv = (a * tv * tv + b * tv + c).min(s1);
            (plane::unit_functional(tv).scaled(hv), hv)
        } else {
            (pts[j].functional.clone(), s1)
        }
    } else {
        (pts[j].functional.clone(), pts[j].s_star)
    };
    let tau = theta
        .dual_vector()
        .ok_or_else(|| Error::SpectralFailure("zero growth form".into()))?;
    let gibbs_gap = tau.angle_to(&pts[j].gibbs_dir);
    Ok(GrowthForm { theta, h, tau, gibbs_gap })
}

/// Outcome of the concavity checks on the recovered growth indicator.
#[derive(Clone, Debug, Serialize)]
pub struct ConcavityReport {
    pub pairs: usize,
    pub violations: usize,
    /// Pairs whose smallest concavity margin over `t` is positive.
    pub strict_pairs: usize,
    pub min_margin: f64,
    /// `|psi(t v + (1-t) v) - psi(v)|` for collinear pairs.
    pub collinear_defect: f64,
    /// `|d psi / d theta|` between consecutive Gibbs directions, moving
    /// outward from the growth direction towards each end.
    pub edge_slopes: [Vec<f64>; 2],
    pub vertical_tangent_trend: bool,
    pub passed: bool,
}

impl ConcavityReport {
    pub fn strict_fraction(&self) -> f64 {
        if self.pairs == 0 {
            1.0
        } else {
            self.strict_pairs as f64 / self.pairs as f64
        }
    }
}

/// Concavity of `psi` on sampled pairs inside the span of the Gibbs
/// directions, plus the slope trend towards the cone boundary.
pub fn concavity_audit(body: &DualBody, samples: usize) -> Result<ConcavityReport> {
    if samples < 16 {
        return Err(Error::InvalidParameter(format!("{samples} samples, need 16")));
    }
    if body.dim != 3 {
        return Ok(ConcavityReport {
            pairs: 0,
            violations: 0,
            strict_pairs: 0,
            min_margin: 0.0,
            collinear_defect: 0.0,
            edge_slopes: [Vec::new(), Vec::new()],
            vertical_tangent_trend: true,
            passed: true,
        });
    }
    // interior: between the Gibbs directions of the second and penultimate
    // points, where the envelope is not attained at an end of the curve
    let mut angles: Vec<f64> = body.boundary.iter().map(|p| plane::angle(p.gibbs_dir.coords())).collect();
    if angles.len() < 4 {
        return Err(Error::InsufficientData(format!("{} boundary points, need 4", angles.len())));
    }
    angles.sort_by(f64::total_cmp);
    let (lo, hi) = (angles[1], angles[angles.len() - 2]);
    let dirs: Vec<CartanVector> = (0..samples)
        .map(|j| plane::unit_vector(lo + (hi - lo) * (j as f64 + 0.5) / samples as f64))
        .collect();
    let psi = |v: &CartanVector| psi_envelope(&body.boundary, v).0;
    let values: Vec<f64> = dirs.iter().map(psi).collect();
    let (mut pairs, mut violations, mut strict) = (0, 0, 0);
    let mut min_margin = f64::INFINITY;
    for i in 0..samples {
        for j in i + 1..samples {
            pairs += 1;
            let mut pair_min = f64::INFINITY;
            for t in [0.25, 0.5, 0.75] {
                let mix = CartanVector::projected(
                    dirs[i]
                        .coords()
                        .iter()
                        .zip(dirs[j].coords())
                        .map(|(a, b)| t * a + (1.0 - t) * b)
                        .collect(),
                );
                let margin = psi(&mix) - (t * values[i] + (1.0 - t) * values[j]);
                pair_min = pair_min.min(margin);
            }
            min_margin = min_margin.min(pair_min);
            if pair_min < -1e-6 {
                violations += 1;
            }
            if pair_min > 1e-12 * (1.0 + values[i].abs() + values[j].abs()) {
                strict += 1;
            }
        }
    }
    let mut collinear_defect: f64 = 0.0;
    for (v, &pv) in dirs.iter().zip(&values) {
        for c in [0.5, 2.0] {
            let w = v.scaled(c);
            let mix = CartanVector::projected(
                v.coords().iter().zip(w.coords()).map(|(a, b)| 0.5 * a + 0.5 * b).collect(),
            );
            collinear_defect = collinear_defect.max((psi(&mix) - 0.5 * (pv + c * pv)).abs());
        }
    }
    // psi on the unit circle sampled at the Gibbs directions
    let mut graph: Vec<(f64, f64)> = body
        .boundary
        .iter()
        .map(|p| {
            let v = &p.gibbs_dir;
            (plane::angle(v.coords()), psi(v))
        })
        .collect();
    graph.sort_by(|a, b| a.0.total_cmp(&b.0));
    let peak = graph
        .iter()
        .enumerate()
        .fold(0, |best, (i, g)| if g.1 > graph[best].1 { i } else { best });
    let slope = |a: (f64, f64), b: (f64, f64)| ((b.1 - a.1) / (b.0 - a.0)).abs();
    let upper: Vec<f64> = graph[peak..].windows(2).map(|w| slope(w[0], w[1])).collect();
    let lower: Vec<f64> = graph[..=peak].windows(2).rev().map(|w| slope(w[0], w[1])).collect();
    let trend = |s: &[f64]| s.len() < 3 || s[s.len() - 3..].windows(2).all(|w| w[1] > w[0]);
    let vertical_tangent_trend = trend(&upper) && trend(&lower);
    Ok(ConcavityReport {
        pairs,
        violations,
        strict_pairs: strict,
        min_margin,
        collinear_defect,
        passed: violations == 0 && collinear_defect < 1e-6,
        edge_slopes: [lower, upper],
        vertical_tangent_trend,
    })
}

/// One row of a continuity scan.
#[derive(Clone, Debug, Serialize)]
pub struct ContinuityRow {
    pub epsilon: f64,
    pub hausdorff: f64,
    pub dpsi_max: f64,
    pub dh: f64,
    /// Distance between growth forms.
    pub dtheta: f64,
    /// Set when this epsilon could not be evaluated.
    pub error: Option<String>,
}

impl ContinuityRow {
    /// Sum of the three reported deltas.
    pub fn aggregate(&self) -> f64 {
        self.hausdorff + self.dpsi_max + self.dh
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuityTable {
    pub seed: u64,
    pub rows: Vec<ContinuityRow>,
}

impl ContinuityTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,hausdorff,dpsi_max,dh\n");
        for r in &self.rows {
            if r.error.is_some() {
                let _ = writeln!(out, "{},nan,nan,nan", fmt_f64(r.epsilon));
            } else {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_f64(r.epsilon),
                    fmt_f64(r.hausdorff),
                    fmt_f64(r.dpsi_max),
                    fmt_f64(r.dh)
                );
            }
        }
        out
    }
}

/// Spearman correlation between epsilon and the aggregate delta, pooled over tables.
pub fn continuity_trend(tables: &[ContinuityTable]) -> Option<f64> {
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for t in tables {
        for r in t.rows.iter().filter(|r| r.error.is_none()) {
            x.push(r.epsilon);
            y.push(r.aggregate());
        }
    }
    spearman(&x, &y)
}

/// Everything a continuity scan compares between deformations.
struct Snapshot {
    cone: ConeHull,
    psi: Vec<f64>,
    h: f64,
    theta: Functional,
}

fn snapshot(rep: &Representation, probes: &[CartanVector], resolution: usize, n_max: usize) -> Result<Snapshot> {
    let data = PeriodData::from_rep(rep, n_max)?;
    let cone = limit_cone_from(&data, n_max)?;
    if rep.dim() == 3 && cone.width() < DEGENERATE_WIDTH {
        // a single ray: psi vanishes off it and equals the exponent of the
        // unit functional dual to the ray on it
        let ray = cone.extreme_directions()[0].clone();
        let u = Functional::new(ray.coords().to_vec());
        let h = pressure_root_from(&data, &u, ROOT_TOL)?.root;
        let psi = probes
            .iter()
            .map(|p| if p.angle_to(&ray) < 1e-6 { h * p.norm() } else { 0.0 })
            .collect();
        return Ok(Snapshot {
            cone,
            psi,
            h,
            theta: u.scaled(h),
        });
    }
    let body = boundary_curve_from(&data, resolution)?;
    let form = growth_form(&body)?;
    let psi = probes
        .iter()
        .map(|p| match psi_from_duality(&body, p) {
            Psi::Value(v) | Psi::EdgeFlagged(v) => v,
            Psi::NegInfinity => f64::NEG_INFINITY,
        })
        .collect();
    Ok(Snapshot {
        cone,
        psi,
        h: form.h,
        theta: form.theta,
    })
}

/// Recomputes cone, growth indicator at the probes and growth form on
/// `perturb(rep, epsilon, seed)` for each epsilon and reports the changes.
pub fn continuity_scan(
    rep: &Representation,
    epsilons: &[f64],
    seed: u64,
    probes: &[CartanVector],
    resolution: usize,
    n_max: usize,
) -> Result<ContinuityTable> {
    if probes.is_empty() {
        return Err(Error::InvalidParameter("no probe directions".into()));
    }
    let base = snapshot(rep, probes, resolution, n_max)?;
    for p in probes {
        let outside = base.cone.angle_outside(p);
        if outside > 0.0 {
            return Err(Error::InvalidParameter(format!(
                "probe lies {outside:e} rad outside the limit cone"
            )));
        }
    }
    let rows = epsilons
        .iter()
        .map(|&eps| {
            let row = |s: &Snapshot| -> Result<ContinuityRow> {
                Ok(ContinuityRow {
                    epsilon: eps,
                    hausdorff: base.cone.hausdorff(&s.cone)?,
                    dpsi_max: base
                        .psi
                        .iter()
                        .zip(&s.psi)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max),
                    dh: (base.h - s.h).abs(),
                    dtheta: base.theta.distance(&s.theta),
                    error: None,
                })
            };
            let result = if eps == 0.0 {
                row(&base)
            } else {
                perturb(rep, eps, seed)
                    .and_then(|r| snapshot(&r, probes, resolution, n_max))
                    .and_then(|s| row(&s))
            };
            result.unwrap_or_else(|e| ContinuityRow {
                epsilon: eps,
                hausdorff: f64::NAN,
                dpsi_max: f64::NAN,
                dh: f64::NAN,
                dtheta: f64::NAN,
                error: Some(e.to_string()),
            })
        })
        .collect();
    Ok(ContinuityTable { seed, rows })
}
