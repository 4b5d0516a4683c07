//! Periodic-orbit pressure.
//!
//! For a weight `r([w]) = phi(lambda(w))` the level-`n` pressure is
//! `P_n(t) = (1/n) log sum_{[w], |w| = n} exp(-t r(w))`. Limits are taken
//! through the periodic-point sums `Z_n(t) = sum_{[w]} p(w) exp(-t r(w))`,
//! where `p(w)` counts the distinct rotations of `w`: the ratio
//! `Z_n / Z_{n-1}` converges exponentially fast, while the class sums carry a
//! `-log(n)/n` term that no finite difference removes.
//!
//! All sums are reduced over fixed-size chunks and merged in chunk order, so
//! values do not depend on the size of the worker pool.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::repgen::{fmt_f64, Representation};
use crate::sample::{ClassLevel, PeriodData};
use crate::spectra::{CartanVector, Functional};

/// Elements per reduction chunk.
const CHUNK: usize = 4096;
/// Upper end of the root bracket.
pub const T_MAX: f64 = 1e3;
/// Bracket width at which bisection hands over to the secant steps.
const BISECTION_WIDTH: f64 = 1e-3;
/// Tolerance on `|root - 1|` certifying a functional on the boundary.
pub const BOUNDARY_TOL: f64 = 1e-3;

/// Weights and periodic-point multiplicities of one level under a functional.
#[derive(Clone, Debug)]
struct LevelWeights {
    n: usize,
    r: Vec<f64>,
    mass: Vec<f64>,
}

impl LevelWeights {
    fn new(level: &ClassLevel, phi: &Functional) -> Self {
        let r = level.jordans().map(|v| phi.eval_coords(v)).collect();
        let mass = (0..level.len()).map(|i| level.period(i) as f64).collect();
        Self { n: level.n(), r, mass }
    }

    fn unit_mass(level: &ClassLevel, phi: &Functional) -> Self {
        let mut w = Self::new(level, phi);
        w.mass.iter_mut().for_each(|m| *m = 1.0);
        w
    }
}

/// `log sum_i mass_i exp(-t r_i)`, two-pass max-shifted and chunk-deterministic.
fn log_sum_exp(w: &LevelWeights, t: f64) -> f64 {
    let exponent = |i: usize| w.mass[i].ln() - t * w.r[i];
    let idx: Vec<usize> = (0..w.r.len()).collect();
    let shift = idx
        .par_chunks(CHUNK)
        .map(|c| c.iter().map(|&i| exponent(i)).fold(f64::NEG_INFINITY, f64::max))
        .reduce(|| f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return shift;
    }
    let partial: Vec<f64> = idx
        .par_chunks(CHUNK)
        .map(|c| c.iter().map(|&i| (exponent(i) - shift).exp()).sum::<f64>())
        .collect();
    shift + partial.iter().sum::<f64>().ln()
}

/// Weighted mean of the class vectors with weights `mass exp(-r)`.
fn gibbs_mean(level: &ClassLevel, w: &LevelWeights) -> Vec<f64> {
    let d = level.jordan(0).len();
    let shift = (0..w.r.len())
        .map(|i| w.mass[i].ln() - w.r[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let idx: Vec<usize> = (0..w.r.len()).collect();
    let partial: Vec<(f64, Vec<f64>)> = idx
        .par_chunks(CHUNK)
        .map(|c| {
            let mut z = 0.0;
            let mut acc = vec![0.0; d];
            for &i in c {
                let e = (w.mass[i].ln() - w.r[i] - shift).exp();
                z += e;
                for (a, x) in acc.iter_mut().zip(level.jordan(i)) {
                    *a += e * x;
                }
            }
            (z, acc)
        })
        .collect();
    let mut z = 0.0;
    let mut acc = vec![0.0; d];
    for (pz, pa) in partial {
        z += pz;
        acc.iter_mut().zip(pa).for_each(|(a, b)| *a += b);
    }
    acc.into_iter().map(|a| a / z).collect()
}

fn check_phi(data: &PeriodData, phi: &Functional) -> Result<()> {
    if phi.dim() != data.dim() {
        return Err(Error::InvalidParameter(format!(
            "functional has {} coefficients, data dimension is {}",
            phi.dim(),
            data.dim()
        )));
    }
    Ok(())
}

fn check_level(data: &PeriodData, n: usize, min: usize) -> Result<()> {
    if n < min || n > data.n_max() {
        return Err(Error::InvalidParameter(format!(
            "level {n} outside {min}..={}",
            data.n_max()
        )));
    }
    Ok(())
}

/// Rejects functionals that are not positive on every class.
pub fn check_dual_cone(data: &PeriodData, phi: &Functional) -> Result<()> {
    check_phi(data, phi)?;
    for (len, v) in data.vectors_up_to(data.n_max()) {
        let r = phi.eval_coords(v);
        if !(r > 0.0) {
            return Err(Error::NotInDualCone(format!(
                "period {r:e} on a class of length {len}"
            )));
        }
    }
    Ok(())
}

/// `P_n(t)` over the classes of cyclic length `n`.
pub fn level_pressure_from(data: &PeriodData, phi: &Functional, t: f64, n: usize) -> Result<f64> {
    check_phi(data, phi)?;
    check_level(data, n, 2)?;
    let w = LevelWeights::unit_mass(data.level(n), phi);
    Ok(log_sum_exp(&w, t) / n as f64)
}

pub fn level_pressure(rep: &Representation, phi: &Functional, t: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter("level must be >= 2".into()));
    }
    level_pressure_from(&PeriodData::from_rep(rep, n)?, phi, t, n)
}

/// The limit estimate of the pressure and whether the scheme fell back.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Extrapolation {
    pub value: f64,
    /// Set when the level differences oscillate; the value is then
    /// `(1/n) log Z_n` at the top level.
    pub fallback: bool,
}

/// Extrapolated pressure from consecutive levels of log periodic-point sums,
/// the last one being level `n_top`.
///
/// The estimate is the last difference `log Z_n - log Z_{n-1}`. When the
/// differences oscillate (their increments change sign anywhere in the
/// window) it falls back to `(1/n) log Z_n`, which is convex in the weight.
/// Short classes and their powers make the oscillation periodic with the
/// class length, so no amplitude test can tell a decaying wiggle apart.
fn extrapolate(logs: &[f64], n_top: usize) -> Extrapolation {
    let m = logs.len();
    let diff = |j: usize| logs[j] - logs[j - 1];
    let top = diff(m - 1);
    let floor = 1e-12 * (1.0 + top.abs());
    let sign = |x: f64| if x.abs() <= floor { 0.0 } else { x.signum() };
    let increments: Vec<f64> = (2..m).map(|j| sign(diff(j) - diff(j - 1))).collect();
    if increments.windows(2).any(|w| w[0] * w[1] < 0.0) {
        return Extrapolation {
            value: logs[m - 1] / n_top as f64,
            fallback: true,
        };
    }
    Extrapolation {
        value: top,
        fallback: false,
    }
}

/// Precomputed weights of the levels used by the extrapolation.
struct Extrapolator {
    levels: Vec<LevelWeights>,
}

impl Extrapolator {
    fn new(data: &PeriodData, phi: &Functional) -> Result<Self> {
        check_phi(data, phi)?;
        let n = data.n_max();
        if n < 2 {
            return Err(Error::InvalidParameter("extrapolation needs n_max >= 2".into()));
        }
        let lo = n.saturating_sub(4).max(1);
        Ok(Self {
            levels: (lo..=n).map(|k| LevelWeights::new(data.level(k), phi)).collect(),
        })
    }

    fn eval(&self, t: f64) -> Extrapolation {
        let logs: Vec<f64> = self.levels.iter().map(|w| log_sum_exp(w, t)).collect();
        extrapolate(&logs, self.levels[logs.len() - 1].n)
    }
}

/// Extrapolated pressure of `t phi`.
pub fn extrapolated_pressure(data: &PeriodData, phi: &Functional, t: f64) -> Result<Extrapolation> {
    Ok(Extrapolator::new(data, phi)?.eval(t))
}

/// Pressure at every level together with its extrapolation.
#[derive(Clone, Debug, Serialize)]
pub struct PressureTable {
    pub weight_id: String,
    pub phi: Vec<f64>,
    pub t: f64,
    /// `(n, P_n(t))` for `2 <= n <= n_max`.
    pub levels: Vec<(usize, f64)>,
    pub extrapolated: f64,
    pub extrapolation_flag: bool,
    pub n_max: usize,
}

impl PressureTable {
    pub fn build(data: &PeriodData, phi: &Functional, t: f64) -> Result<Self> {
        check_phi(data, phi)?;
        let levels = (2..=data.n_max())
            .map(|n| Ok((n, level_pressure_from(data, phi, t, n)?)))
            .collect::<Result<Vec<_>>>()?;
        let e = extrapolated_pressure(data, phi, t)?;
        Ok(Self {
            weight_id: format!("phi o {}", data.source()),
            phi: phi.coeffs().to_vec(),
            t,
            levels,
            extrapolated: e.value,
            extrapolation_flag: e.fallback,
            n_max: data.n_max(),
        })
    }

    /// `n,t,P_n` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,t,P_n\n");
        for (n, p) in &self.levels {
            let _ = writeln!(out, "{},{},{}", n, fmt_f64(self.t), fmt_f64(*p));
        }
        out
    }

    /// `|D_n - extrapolated|` for the last three level differences
    /// `D_n = n P_n - (n-1) P_{n-1}` of the class sums.
    pub fn level_stability(&self) -> Vec<f64> {
        let np: Vec<f64> = self.levels.iter().map(|(n, p)| *n as f64 * p).collect();
        let diffs: Vec<f64> = np.windows(2).map(|w| w[1] - w[0]).collect();
        diffs
            .iter()
            .skip(diffs.len().saturating_sub(3))
            .map(|d| (d - self.extrapolated).abs())
            .collect()
    }
}

/// Critical exponent of `phi` as the zero of the extrapolated pressure.
#[derive(Clone, Debug, Serialize)]
pub struct PressureRoot {
    pub phi: Vec<f64>,
    pub root: f64,
    pub n_max: usize,
    pub extrapolation_flag: bool,
}

impl PressureRoot {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Bisection to `BISECTION_WIDTH`, then secant steps kept inside the bracket.
fn solve_decreasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let (mut flo, mut fhi) = (f(lo), f(hi));
    while hi - lo > BISECTION_WIDTH.max(tol) {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm > 0.0 {
            (lo, flo) = (mid, fm);
        } else {
            (hi, fhi) = (mid, fm);
        }
    }
    for _ in 0..100 {
        if hi - lo <= tol {
            break;
        }
        let mut x = lo - flo * (hi - lo) / (fhi - flo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx > 0.0 {
            (lo, flo) = (x, fx);
        } else {
            (hi, fhi) = (x, fx);
        }
        // secant steps can stall on one side; probe just past the iterate
        let probe = if fx > 0.0 { (x + tol).min(hi) } else { (x - tol).max(lo) };
        let fp = f(probe);
        if fp > 0.0 {
            (lo, flo) = (probe, fp);
        } else {
            (hi, fhi) = (probe, fp);
        }
    }
    if flo.abs() < fhi.abs() {
        lo
    } else {
        hi
    }
}

/// Root in `t` of `t -> extrapolated pressure of t phi`.
pub fn pressure_root_from(data: &PeriodData, phi: &Functional, tol: f64) -> Result<PressureRoot> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    check_dual_cone(data, phi)?;
    let ex = Extrapolator::new(data, phi)?;
    let (f0, f1) = (ex.eval(0.0).value, ex.eval(T_MAX).value);
    if !(f0 > 0.0 && f1 < 0.0) {
        return Err(Error::BracketFailure(format!(
            "pressure {f0:e} at t=0 and {f1:e} at t={T_MAX}"
        )));
    }
    let root = solve_decreasing(|t| ex.eval(t).value, 0.0, T_MAX, tol);
    Ok(PressureRoot {
        phi: phi.coeffs().to_vec(),
        root,
        n_max: data.n_max(),
        extrapolation_flag: ex.eval(root).fallback,
    })
}

pub fn pressure_root(rep: &Representation, phi: &Functional, tol: f64, n_max: usize) -> Result<PressureRoot> {
    pressure_root_from(&PeriodData::from_rep(rep, n_max)?, phi, tol)
}

/// Level-`n` Gibbs average of `lambda` per unit symbolic time, class weights
/// `exp(-phi0(lambda))`.
pub fn gibbs_direction_from(data: &PeriodData, phi0: &Functional, n: usize) -> Result<CartanVector> {
    check_phi(data, phi0)?;
    check_level(data, n, 4)?;
    let level = data.level(n);
    let mean = gibbs_mean(level, &LevelWeights::unit_mass(level, phi0));
    Ok(CartanVector::projected(mean.into_iter().map(|x| x / n as f64).collect()))
}

pub fn gibbs_direction(rep: &Representation, phi0: &Functional, n: usize) -> Result<CartanVector> {
    if n < 4 {
        return Err(Error::InvalidParameter("level must be >= 4".into()));
    }
    gibbs_direction_from(&PeriodData::from_rep(rep, n)?, phi0, n)
}

/// Gibbs average matching the extrapolated pressure: `E_N - E_{N-1}` under
/// periodic-point weights, which is minus the gradient of the extrapolated
/// pressure at `phi0` (or `E_N / N` when the scheme falls back).
pub fn extrapolated_gibbs_mean(data: &PeriodData, phi0: &Functional) -> Result<CartanVector> {
    check_phi(data, phi0)?;
    let n = data.n_max();
    if n < 2 {
        return Err(Error::InvalidParameter("needs n_max >= 2".into()));
    }
    let ex = Extrapolator::new(data, phi0)?;
    let top = data.level(n);
    let mean_n = gibbs_mean(top, &LevelWeights::new(top, phi0));
    let coords = if ex.eval(1.0).fallback {
        mean_n.iter().map(|x| x / n as f64).collect()
    } else {
        let prev = data.level(n - 1);
        let mean_p = gibbs_mean(prev, &LevelWeights::new(prev, phi0));
        mean_n.iter().zip(mean_p).map(|(a, b)| a - b).collect()
    };
    Ok(CartanVector::projected(coords))
}

/// `(-phi1(gibbs_direction(phi0, n)), central difference of P_n(phi0 + t phi1) at t = 0)`.
pub fn pressure_derivative_check_from(
    data: &PeriodData,
    phi0: &Functional,
    phi1: &Functional,
    n: usize,
    h_step: f64,
) -> Result<(f64, f64)> {
    if !(1e-6..=1e-2).contains(&h_step) {
        return Err(Error::InvalidParameter(format!("step {h_step} outside [1e-6, 1e-2]")));
    }
    check_phi(data, phi1)?;
    let analytic = -phi1.eval(&gibbs_direction_from(data, phi0, n)?);
    let plus = level_pressure_from(data, &phi0.add_scaled(phi1, h_step), 1.0, n)?;
    let minus = level_pressure_from(data, &phi0.add_scaled(phi1, -h_step), 1.0, n)?;
    Ok((analytic, (plus - minus) / (2.0 * h_step)))
}

pub fn pressure_derivative_check(
    rep: &Representation,
    phi0: &Functional,
    phi1: &Functional,
    n: usize,
    h_step: f64,
) -> Result<(f64, f64)> {
    if n < 4 {
        return Err(Error::InvalidParameter("level must be >= 4".into()));
    }
    pressure_derivative_check_from(&PeriodData::from_rep(rep, n)?, phi0, phi1, n, h_step)
}

/// Second differences of `t -> extrapolated pressure of phi0 + t phi1` on the
/// five points `t = -2 step .. 2 step`.
pub fn pressure_second_differences(
    data: &PeriodData,
    phi0: &Functional,
    phi1: &Functional,
    step: f64,
) -> Result<Vec<f64>> {
    let values = (-2..=2)
        .map(|j| Ok(extrapolated_pressure(data, &phi0.add_scaled(phi1, j as f64 * step), 1.0)?.value))
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect())
}

/// Metric entropy of the equilibrium state of a boundary functional:
/// `phi0` applied to its Gibbs average.
pub fn entropy_of_state_from(data: &PeriodData, phi0: &Functional) -> Result<f64> {
    let root = pressure_root_from(data, phi0, 1e-9)?.root;
    if (root - 1.0).abs() >= BOUNDARY_TOL {
        return Err(Error::NotOnBoundary(format!("critical exponent {root} differs from 1")));
    }
    Ok(phi0.eval(&extrapolated_gibbs_mean(data, phi0)?))
}

pub fn entropy_of_state(rep: &Representation, phi0: &Functional, n_max: usize) -> Result<f64> {
    entropy_of_state_from(&PeriodData::from_rep(rep, n_max)?, phi0)
}
