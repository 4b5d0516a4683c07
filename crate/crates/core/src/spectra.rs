//! Cartan and Jordan projections of matrices in `SL(d, R)`.
//!
//! The Cartan subspace is the space of traceless diagonal matrices, stored as
//! sum-zero coordinate vectors. Projections are mean-subtracted, which makes
//! them invariant under positive scalar multiples (the `PGL(d)` normalization).
//!
//! Long products lose their small singular values to rounding, so spectra of
//! words are computed through exterior powers: the top singular value (or
//! spectral radius) of the `k`-th compound is `exp` of the `k`-th partial sum
//! of the projection, and compounds of a product are products of compounds.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, Schur};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance for spectral comparisons.
pub const SPECTRAL_TOL: f64 = 1e-9;

/// Matrices with a larger singular-value ratio are treated as singular.
pub const MAX_CONDITION: f64 = 1e14;

/// An element of the Cartan subspace: `d` coordinates summing to zero.
///
/// Cartan and Jordan projections land in the closed Weyl chamber
/// (non-increasing coordinates); other vectors of the subspace, such as
/// arguments of the growth indicator or Gibbs means, need not.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CartanVector {
    coords: Vec<f64>,
}

impl CartanVector {
    /// Wraps coordinates, rejecting vectors that do not sum to zero.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let d = coords.len();
        let sum: f64 = coords.iter().sum();
        let scale = coords.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if d < 2 || sum.abs() >= 1e-9 * d as f64 * scale {
            return Err(Error::InvalidInput(format!(
                "Cartan vector must have >= 2 coordinates summing to zero, got sum {sum:e}"
            )));
        }
        Ok(Self { coords })
    }

    /// Projects arbitrary coordinates onto the sum-zero subspace.
    pub fn projected(mut coords: Vec<f64>) -> Self {
        let mean = coords.iter().sum::<f64>() / coords.len() as f64;
        coords.iter_mut().for_each(|x| *x -= mean);
        Self { coords }
    }

    pub fn zero(d: usize) -> Self {
        Self { coords: vec![0.0; d] }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0).then(|| self.scaled(1.0 / n))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            coords: self.coords.iter().map(|x| x * c).collect(),
        }
    }

    pub fn dot(&self, other: &CartanVector) -> f64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a * b).sum()
    }

    /// Non-increasing coordinates up to `tol`.
    pub fn is_dominant(&self, tol: f64) -> bool {
        self.coords.windows(2).all(|p| p[0] >= p[1] - tol)
    }

    /// The opposition involution `v -> (-v_d, ..., -v_1)`.
    pub fn opposition(&self) -> Self {
        Self {
            coords: self.coords.iter().rev().map(|x| -x).collect(),
        }
    }

    /// Angle between two non-zero vectors, in radians.
    pub fn angle_to(&self, other: &CartanVector) -> f64 {
        let c = self.dot(other) / (self.norm() * other.norm());
        c.clamp(-1.0, 1.0).acos()
    }
}

/// A linear form on the Cartan subspace, stored by its sum-zero coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Functional {
    coeffs: Vec<f64>,
}

impl Functional {
    /// Projects the coefficients to sum zero; the form is unchanged on the
    /// Cartan subspace.
    pub fn new(coeffs: Vec<f64>) -> Self {
        let CartanVector { coords } = CartanVector::projected(coeffs);
        Self { coeffs: coords }
    }

    pub fn zero(d: usize) -> Self {
        Self { coeffs: vec![0.0; d] }
    }

    /// The simple root `alpha_i(v) = v_i - v_{i+1}` (1-based `i`).
    pub fn simple_root(d: usize, i: usize) -> Result<Self> {
        if i == 0 || i >= d {
            return Err(Error::InvalidParameter(format!("root index {i} outside 1..{d}")));
        }
        let mut c = vec![0.0; d];
        c[i - 1] = 1.0;
        c[i] = -1.0;
        Ok(Self::new(c))
    }

    /// `v -> v_1`.
    pub fn first_coordinate(d: usize) -> Self {
        let mut c = vec![0.0; d];
        c[0] = 1.0;
        Self::new(c)
    }

    /// `v -> v_1 - v_d`.
    pub fn spread(d: usize) -> Self {
        let mut c = vec![0.0; d];
        c[0] = 1.0;
        c[d - 1] = -1.0;
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, v: &CartanVector) -> f64 {
        self.eval_coords(v.coords())
    }

    pub fn eval_coords(&self, v: &[f64]) -> f64 {
        self.coeffs.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// Dual Euclidean norm `sup_{|v| = 1} phi(v)`.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add_scaled(&self, other: &Functional, t: f64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + t * b)
                .collect(),
        }
    }

    /// The unit vector on which the form attains its dual norm.
    pub fn dual_vector(&self) -> Option<CartanVector> {
        CartanVector::projected(self.coeffs.clone()).normalized()
    }

    pub fn distance(&self, other: &Functional) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Orthonormal chart of the two-dimensional Cartan subspace of `sl(3)`.
///
/// `e1 = (1, 0, -1)/sqrt 2` bisects the Weyl chamber and `e2 = (1, -2, 1)/sqrt 6`;
/// the chamber is the sector of angles `[-pi/6, pi/6]`. Functionals use the
/// same chart through their coefficient vectors.
pub mod plane {
    use super::*;

    const INV_SQRT6: f64 = 0.408_248_290_463_863;

    pub fn to_xy(v: &[f64]) -> (f64, f64) {
        debug_assert_eq!(v.len(), 3);
        let x = (v[0] - v[2]) * FRAC_1_SQRT_2;
        let y = (v[0] - 2.0 * v[1] + v[2]) * INV_SQRT6;
        (x, y)
    }

    pub fn from_xy(x: f64, y: f64) -> [f64; 3] {
        [
            x * FRAC_1_SQRT_2 + y * INV_SQRT6,
            -2.0 * y * INV_SQRT6,
            -x * FRAC_1_SQRT_2 + y * INV_SQRT6,
        ]
    }

    pub fn angle(v: &[f64]) -> f64 {
        let (x, y) = to_xy(v);
        y.atan2(x)
    }

    pub fn unit_vector(theta: f64) -> CartanVector {
        let (s, c) = theta.sin_cos();
        CartanVector {
            coords: from_xy(c, s).to_vec(),
        }
    }

    pub fn unit_functional(theta: f64) -> Functional {
        let (s, c) = theta.sin_cos();
        Functional {
            coeffs: from_xy(c, s).to_vec(),
        }
    }
}

fn sorted_desc_centered(mut logs: Vec<f64>) -> CartanVector {
    logs.sort_by(|a, b| b.total_cmp(a));
    CartanVector::projected(logs)
}

/// Cartan projection: sorted log singular values, mean-subtracted.
pub fn cartan(m: &DMatrix<f64>) -> Result<CartanVector> {
    let svd = m.clone().svd(false, false);
    let sv = svd.singular_values;
    let max = sv.max();
    let min = sv.min();
    if !(min > 0.0) || max / min > MAX_CONDITION {
        return Err(Error::SpectralFailure(format!(
            "numerically singular matrix (condition {:e})",
            max / min
        )));
    }
    Ok(sorted_desc_centered(sv.iter().map(|s| s.ln()).collect()))
}

/// Complex eigenvalues as `(re, im)`, or a spectral failure.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<(f64, f64)>> {
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::SpectralFailure("Schur iteration did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect())
}

/// Jordan projection: sorted log moduli of eigenvalues, mean-subtracted.
pub fn jordan(m: &DMatrix<f64>) -> Result<CartanVector> {
    let logs = eigenvalues(m)?
        .into_iter()
        .map(|(re, im)| re.hypot(im).ln())
        .collect::<Vec<_>>();
    if logs.iter().any(|x| !x.is_finite()) {
        return Err(Error::SpectralFailure("zero eigenvalue".into()));
    }
    Ok(sorted_desc_centered(logs))
}

/// `(lambda_i - lambda_{i+1}) / lambda_1` for a 1-based index `i`.
pub fn gap_ratio(m: &DMatrix<f64>, i: usize) -> Result<f64> {
    gap_ratio_with_tol(m, i, SPECTRAL_TOL)
}

pub fn gap_ratio_with_tol(m: &DMatrix<f64>, i: usize, tol: f64) -> Result<f64> {
    let d = m.nrows();
    if i == 0 || i >= d {
        return Err(Error::InvalidParameter(format!("gap index {i} outside 1..{d}")));
    }
    let l = jordan(m)?;
    let c = l.coords();
    if c[0] <= tol {
        return Err(Error::UndefinedGap(format!("lambda_1 = {:e} is not positive", c[0])));
    }
    Ok(((c[i - 1] - c[i]) / c[0]).max(0.0))
}

/// True when the top eigenvalue is real, simple, and its modulus beats the
/// second one by the relative margin `tol`.
pub fn is_proximal(m: &DMatrix<f64>, tol: f64) -> Result<bool> {
    let mut ev = eigenvalues(m)?;
    ev.sort_by(|a, b| {
        let (ma, mb) = (a.0.hypot(a.1), b.0.hypot(b.1));
        mb.total_cmp(&ma).then(b.0.total_cmp(&a.0))
    });
    let (re, im) = ev[0];
    let top = re.hypot(im);
    let second = ev.get(1).map(|(r, i)| r.hypot(*i)).unwrap_or(0.0);
    Ok(im.abs() <= SPECTRAL_TOL * top.max(1.0) && top > second * (1.0 + tol))
}

fn k_subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            rec(i + 1, d, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, k, &mut Vec::new(), &mut out);
    out
}

/// The `k`-th compound matrix: all `k x k` minors, rows and columns indexed
/// by `k`-subsets in lexicographic order. Multiplicative in `m`.
pub fn compound(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let d = m.nrows();
    assert!(k >= 1 && k <= d);
    if k == 1 {
        return m.clone();
    }
    let subsets = k_subsets(d, k);
    let n = subsets.len();
    let mut out = DMatrix::zeros(n, n);
    for (r, rows) in subsets.iter().enumerate() {
        for (c, cols) in subsets.iter().enumerate() {
            let minor = DMatrix::from_fn(k, k, |i, j| m[(rows[i], cols[j])]);
            out[(r, c)] = minor.determinant();
        }
    }
    out
}

/// Compounds `1..d` of a matrix (the `d`-th is the determinant and omitted).
pub fn compounds(m: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    (1..m.nrows()).map(|k| compound(m, k)).collect()
}

/// Largest singular value.
pub fn top_singular_value(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 1 {
        return m[(0, 0)].abs();
    }
    let gram = m.transpose() * m;
    gram.symmetric_eigenvalues().max().max(0.0).sqrt()
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    if m.nrows() == 1 {
        return Ok(m[(0, 0)].abs());
    }
    Ok(eigenvalues(m)?
        .into_iter()
        .map(|(re, im)| re.hypot(im))
        .fold(0.0, f64::max))
}

fn from_partial_sums(partial: &[f64], log_det: f64) -> Result<CartanVector> {
    let d = partial.len() + 1;
    let mut coords = Vec::with_capacity(d);
    let mut prev = 0.0;
    for &s in partial.iter().chain(std::iter::once(&log_det)) {
        if !s.is_finite() {
            return Err(Error::SpectralFailure("vanishing exterior power".into()));
        }
        coords.push(s - prev);
        prev = s;
    }
    Ok(sorted_desc_centered(coords))
}

/// Cartan projection from the compounds of a matrix with `log |det| = log_det`
/// (zero for products in `SL(d)`).
pub fn cartan_from_compounds(c: &[DMatrix<f64>], log_det: f64) -> Result<CartanVector> {
    let partial: Vec<f64> = c.iter().map(|m| top_singular_value(m).ln()).collect();
    from_partial_sums(&partial, log_det)
}

/// Jordan projection from the compounds of a matrix.
pub fn jordan_from_compounds(c: &[DMatrix<f64>], log_det: f64) -> Result<CartanVector> {
    let partial = c
        .iter()
        .map(|m| spectral_radius(m).map(f64::ln))
        .collect::<Result<Vec<_>>>()?;
    from_partial_sums(&partial, log_det)
}

/// `m^n` kept as a unit-max-entry matrix and a log scale.
fn scaled_power(m: &DMatrix<f64>, n: u64) -> (DMatrix<f64>, f64) {
    let normalize = |x: DMatrix<f64>, log: f64| {
        let s = x.amax();
        if s > 0.0 {
            (x / s, log + s.ln())
        } else {
            (x, log)
        }
    };
    let mut result = (DMatrix::identity(m.nrows(), m.ncols()), 0.0);
    let mut base = normalize(m.clone(), 0.0);
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = normalize(&result.0 * &base.0, result.1 + base.1);
        }
        e >>= 1;
        if e > 0 {
            base = normalize(&base.0 * &base.0, 2.0 * base.1);
        }
    }
    result
}

/// `|| cartan(m^n)/n - jordan(m) ||_inf`, with `m^n` computed in log scale.
pub fn power_consistency(m: &DMatrix<f64>, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("power must be >= 1".into()));
    }
    let log_det = m.determinant().abs().ln();
    let partial: Vec<f64> = compounds(m)
        .iter()
        .map(|c| {
            let (p, log) = scaled_power(c, n);
            top_singular_value(&p).ln() + log
        })
        .collect();
    let a = from_partial_sums(&partial, n as f64 * log_det)?;
    let l = jordan(m)?;
    Ok(a.coords()
        .iter()
        .zip(l.coords())
        .map(|(x, y)| (x / n as f64 - y).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(v))
    }

    fn assert_coords(v: &CartanVector, expected: &[f64], tol: f64) {
        for (a, b) in v.coords().iter().zip(expected) {
            assert!((a - b).abs() < tol, "{:?} vs {:?}", v.coords(), expected);
        }
    }

    /// Cyclic Jacobi eigenvalue iteration for symmetric matrices, test oracle.
    fn jacobi_eigenvalues(mut a: DMatrix<f64>) -> Vec<f64> {
        let n = a.nrows();
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)] * a[(i, j)])
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[(p, q)].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[(i, i)]).collect()
    }

    fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
        DMatrix::from_fn(d, d, |_, _| rng.gen_range(-2.0..2.0))
    }

    #[test]
    fn cartan_examples() {
        assert_coords(&cartan(&DMatrix::identity(4, 4)).unwrap(), &[0.0; 4], 1e-15);
        let l4 = 4f64.ln();
        assert_coords(&cartan(&diag(&[4.0, 1.0, 0.25])).unwrap(), &[l4, 0.0, -l4], 1e-14);
        // scalar invariance
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let a = cartan(&m).unwrap();
        assert_coords(&cartan(&(&m * 7.5)).unwrap(), a.coords(), 1e-13);
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(cartan(&singular), Err(Error::SpectralFailure(_))));
    }

    #[test]
    fn cartan_matches_jacobi_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 2..=5 {
            for _ in 0..20 {
                let m = random_matrix(&mut rng, d);
                let eig = jacobi_eigenvalues(m.transpose() * &m);
                let mut logs: Vec<f64> = eig.iter().map(|e| 0.5 * e.ln()).collect();
                logs.sort_by(|a, b| b.total_cmp(a));
                let mean = logs.iter().sum::<f64>() / d as f64;
                let expected: Vec<f64> = logs.iter().map(|x| x - mean).collect();
                let a = cartan(&m).unwrap();
                assert_coords(&a, &expected, 1e-9);
                assert!(a.is_dominant(1e-12));
                assert!(a.coords().iter().sum::<f64>().abs() < 1e-9 * d as f64);
                // compound route agrees on moderate matrices
                let via = cartan_from_compounds(&compounds(&m), m.determinant().abs().ln()).unwrap();
                assert_coords(&via, &expected, 1e-8);
            }
        }
    }

    #[test]
    fn jordan_examples() {
        let rot = DMatrix::from_row_slice(2, 2, &[0.6, -0.8, 0.8, 0.6]);
        assert_coords(&jordan(&rot).unwrap(), &[0.0, 0.0], 1e-14);
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let t = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert_coords(&jordan(&m).unwrap(), &[t, -t], 1e-13);
        assert!((t - 0.9624).abs() < 1e-4);
        let l4 = 4f64.ln();
        assert_coords(&jordan(&diag(&[4.0, 1.0, 0.25])).unwrap(), &[l4, 0.0, -l4], 1e-14);
    }

    #[test]
    fn gap_ratio_examples() {
        assert!((gap_ratio(&diag(&[4.0, 1.0, 0.25]), 1).unwrap() - 1.0).abs() < 1e-13);
        // diag(2, 2, 1/4) has determinant one already
        assert!(gap_ratio(&diag(&[2.0, 2.0, 0.25]), 1).unwrap().abs() < 1e-13);
        assert!(matches!(gap_ratio(&DMatrix::identity(3, 3), 1), Err(Error::UndefinedGap(_))));
        assert!(matches!(gap_ratio(&diag(&[4.0, 1.0, 0.25]), 3), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn proximality_examples() {
        assert!(is_proximal(&diag(&[4.0, 1.0, 0.25]), 1e-6).unwrap());
        let rot = DMatrix::from_row_slice(2, 2, &[0.6, -0.8, 0.8, 0.6]);
        assert!(!is_proximal(&rot, 1e-6).unwrap());
        assert!(!is_proximal(&diag(&[2.0, 2.0, 0.25]), 1e-6).unwrap());
    }

    #[test]
    fn power_consistency_examples() {
        assert!(power_consistency(&diag(&[4.0, 1.0, 0.25]), 7).unwrap() < 1e-10);
        assert!(power_consistency(&diag(&[3.0, 1.0 / 3.0]), 500).unwrap() < 1e-10);
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let p20 = power_consistency(&m, 20).unwrap();
        let p40 = power_consistency(&m, 40).unwrap();
        assert!(p20 < 0.05);
        assert!(p40 <= p20 + 1e-12);
        // a non-normal matrix converges at rate O(1/n)
        let u = DMatrix::from_row_slice(3, 3, &[2.0, 5.0, 1.0, 0.0, 1.0, 3.0, 0.0, 0.0, 0.5]);
        let q10 = power_consistency(&u, 10).unwrap();
        let q100 = power_consistency(&u, 100).unwrap();
        let q1000 = power_consistency(&u, 1000).unwrap();
        assert!(q100 < q10 && q1000 < q100, "{q10} {q100} {q1000}");
        assert!(power_consistency(&u, 0).is_err());
    }

    #[test]
    fn compound_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in 3..=5 {
            let a = random_matrix(&mut rng, d);
            let b = random_matrix(&mut rng, d);
            for k in 1..d {
                let lhs = compound(&(&a * &b), k);
                let rhs = compound(&a, k) * compound(&b, k);
                assert!((&lhs - &rhs).amax() < 1e-10 * lhs.amax().max(1.0));
            }
            assert!((compound(&a, d)[(0, 0)] - a.determinant()).abs() < 1e-10);
        }
    }

    #[test]
    fn compound_route_survives_long_products() {
        // diag(e^40, 1, e^-40) conjugated: the direct route loses the bottom
        let p = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, -0.2, 0.1, 1.0, 0.4, 0.5, -0.3, 1.0]);
        let pinv = p.clone().try_inverse().unwrap();
        let unit = &p * diag(&[1f64.exp(), 1.0, (-1f64).exp()]) * &pinv;
        let mut c = compounds(&DMatrix::identity(3, 3));
        let uc = compounds(&unit);
        for _ in 0..40 {
            c = c.iter().zip(&uc).map(|(x, y)| x * y).collect();
        }
        let l = jordan_from_compounds(&c, 0.0).unwrap();
        assert_coords(&l, &[40.0, 0.0, -40.0], 1e-9);
    }

    #[test]
    fn functional_basics() {
        let phi = Functional::new(vec![1.0, 0.0, 0.0]);
        assert!(phi.coeffs().iter().sum::<f64>().abs() < 1e-15);
        let v = CartanVector::new(vec![2.0, -0.5, -1.5]).unwrap();
        assert!((phi.eval(&v) - 2.0).abs() < 1e-15);
        let alpha = Functional::simple_root(3, 2).unwrap();
        assert!((alpha.eval(&v) - 1.0).abs() < 1e-15);
        assert!(Functional::simple_root(3, 3).is_err());
        assert!(CartanVector::new(vec![1.0, 1.0]).is_err());
        // chart round trip and chamber angles
        let w = plane::unit_vector(0.3);
        assert!((plane::angle(w.coords()) - 0.3).abs() < 1e-14);
        assert!((w.norm() - 1.0).abs() < 1e-14);
        let wall = CartanVector::new(vec![2.0, -1.0, -1.0]).unwrap();
        assert!((plane::angle(wall.coords()) - std::f64::consts::PI / 6.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn jordan_conjugation_invariant(seed in 0u64..5000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_matrix(&mut rng, 3);
            prop_assume!(m.determinant().abs() > 1e-2);
            let p = DMatrix::identity(3, 3) + random_matrix(&mut rng, 3) * 0.3;
            let pinv = p.clone().try_inverse().unwrap();
            let l1 = jordan(&m).unwrap();
            let l2 = jordan(&(&p * &m * pinv)).unwrap();
            for (a, b) in l1.coords().iter().zip(l2.coords()) {
                prop_assert!((a - b).abs() < 1e-7);
            }
        }

        #[test]
        fn jordan_duality(seed in 0u64..5000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_matrix(&mut rng, 4);
            prop_assume!(m.determinant().abs() > 1e-2);
            let dual = m.clone().try_inverse().unwrap().transpose();
            let l = jordan(&m).unwrap().opposition();
            let ld = jordan(&dual).unwrap();
            for (a, b) in l.coords().iter().zip(ld.coords()) {
                prop_assert!((a - b).abs() < 1e-8);
            }
        }

        #[test]
        fn cartan_subadditive(seed in 0u64..5000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_matrix(&mut rng, 3);
            let n = random_matrix(&mut rng, 3);
            prop_assume!(m.determinant().abs() > 1e-2 && n.determinant().abs() > 1e-2);
            let am = cartan(&m).unwrap();
            let an = cartan(&n).unwrap();
            let amn = cartan(&(&m * &n)).unwrap();
            // top partial sums: sum_{i<=k} a_i(mn) <= sum a_i(m) + sum a_i(n)
            let (mut s, mut t) = (0.0, 0.0);
            for k in 0..3 {
                s += amn.coords()[k];
                t += am.coords()[k] + an.coords()[k];
                prop_assert!(s <= t + 1e-8);
            }
        }

        #[test]
        fn functional_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let phi = Functional::new(vec![a, b, -a - b]);
            let u = CartanVector::projected(vec![x, y, 0.3]);
            let v = CartanVector::projected(vec![y, -x, 1.1]);
            let sum = CartanVector::projected(
                u.coords().iter().zip(v.coords()).map(|(p, q)| 2.0 * p + q).collect());
            prop_assert!((phi.eval(&sum) - 2.0 * phi.eval(&u) - phi.eval(&v)).abs() < 1e-12);
            // evaluation follows stored coordinate order, no re-sorting
            let rev = CartanVector::projected(u.coords().iter().rev().copied().collect());
            let rphi = Functional::new(phi.coeffs().iter().rev().copied().collect());
            prop_assert!((rphi.eval(&rev) - phi.eval(&u)).abs() < 1e-12);
        }
    }
}
