//! Complex-matrix kernel.
//!
//! Hermitian and traceless anti-Hermitian matrices of size `n+1`, the real
//! pairing `(A, B) ↦ 2 tr(AB)` on Hermitian matrices, the dominant-eigenvector
//! retraction onto rank-one projectors and seeded random sampling.
//!
//! Hermiticity is enforced when a value is built: every constructor
//! symmetrizes, so downstream code never re-checks it.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::projective::ProjPoint;

/// Dense complex square matrix, row/column indexed from zero.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Spectral gap below which the dominant eigenvector is considered ambiguous.
pub const EIGEN_GAP_THRESHOLD: f64 = 1e-10;

/// Relative tolerance for the imaginary part of `tr(AB)` with `A`, `B` Hermitian.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-12;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn check_square(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(GeomError::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(())
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(GeomError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `Re tr(AB)` without forming the product.
pub(crate) fn re_trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let d = a.nrows();
    let mut s = 0.0;
    for j in 0..d {
        for k in 0..d {
            let x = a[(j, k)];
            let y = b[(k, j)];
            s += x.re * y.re - x.im * y.im;
        }
    }
    s
}

fn im_trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let d = a.nrows();
    let mut s = 0.0;
    for j in 0..d {
        for k in 0..d {
            let x = a[(j, k)];
            let y = b[(k, j)];
            s += x.re * y.im + x.im * y.re;
        }
    }
    s
}

/// A Hermitian matrix, stored dense and exactly Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian(ComplexMatrix);

impl Hermitian {
    /// Builds `(M + M†)/2`. The result is exactly Hermitian in floating point.
    pub fn symmetrized(m: ComplexMatrix) -> Result<Self> {
        check_square(&m)?;
        Ok(Self::symmetrize_square(m))
    }

    pub(crate) fn symmetrize_square(m: ComplexMatrix) -> Self {
        let d = m.nrows();
        let mut out = ComplexMatrix::zeros(d, d);
        for j in 0..d {
            out[(j, j)] = c(m[(j, j)].re);
            for k in (j + 1)..d {
                let v = (m[(j, k)] + m[(k, j)].conj()) * 0.5;
                out[(j, k)] = v;
                out[(k, j)] = v.conj();
            }
        }
        Hermitian(out)
    }

    /// Accepts `m` only if it is Hermitian to `tol` (max-entry), then symmetrizes.
    pub fn from_matrix(m: ComplexMatrix, tol: f64) -> Result<Self> {
        check_square(&m)?;
        let dev = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > tol {
            return Err(GeomError::InvalidInput(format!("matrix is not Hermitian (deviation {dev:e})")));
        }
        Ok(Self::symmetrize_square(m))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut m = ComplexMatrix::zeros(d, d);
        for (j, &v) in diag.iter().enumerate() {
            m[(j, j)] = c(v);
        }
        Hermitian(m)
    }

    pub fn zeros(dim: usize) -> Self {
        Hermitian(ComplexMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Hermitian(ComplexMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|j| self.0[(j, j)].re).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Hermitian(&self.0 * c(s))
    }
}

impl Add for &Hermitian {
    type Output = Hermitian;
    fn add(self, rhs: &Hermitian) -> Hermitian {
        Hermitian(&self.0 + &rhs.0)
    }
}

impl Sub for &Hermitian {
    type Output = Hermitian;
    fn sub(self, rhs: &Hermitian) -> Hermitian {
        Hermitian(&self.0 - &rhs.0)
    }
}

impl Neg for &Hermitian {
    type Output = Hermitian;
    fn neg(self) -> Hermitian {
        Hermitian(-&self.0)
    }
}

impl Mul<f64> for &Hermitian {
    type Output = Hermitian;
    fn mul(self, rhs: f64) -> Hermitian {
        self.scale(rhs)
    }
}

pub(crate) fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A traceless anti-Hermitian matrix: an element of su(n+1).
#[derive(Clone, Debug, PartialEq)]
pub struct SuElement(ComplexMatrix);

impl SuElement {
    /// Validates `u† = -u` and `tr u = 0` to `tol`, then projects exactly onto su(n+1).
    pub fn new(m: ComplexMatrix, tol: f64) -> Result<Self> {
        check_square(&m)?;
        if m.nrows() < 2 {
            return Err(GeomError::DimensionTooSmall(m.nrows()));
        }
        let dev = max_abs(&(&m + m.adjoint()));
        if dev > tol {
            return Err(GeomError::NotSu(format!("not anti-Hermitian (deviation {dev:e})")));
        }
        let tr = m.trace();
        if tr.norm() > tol {
            return Err(GeomError::NotSu(format!("not traceless (trace {:e})", tr.norm())));
        }
        Ok(Self::project(m))
    }

    /// Exact projection onto su(n+1): anti-symmetrize, then remove the trace so that the
    /// sequential diagonal sum cancels exactly.
    fn project(m: ComplexMatrix) -> Self {
        let d = m.nrows();
        let mut out = ComplexMatrix::zeros(d, d);
        for j in 0..d {
            for k in (j + 1)..d {
                let v = (m[(j, k)] - m[(k, j)].conj()) * 0.5;
                out[(j, k)] = v;
                out[(k, j)] = -v.conj();
            }
        }
        let diag: Vec<f64> = (0..d).map(|j| m[(j, j)].im).collect();
        let mean = diag.iter().sum::<f64>() / d as f64;
        let mut acc = 0.0;
        for (j, v) in diag.iter().enumerate().take(d - 1) {
            let x = v - mean;
            out[(j, j)] = Complex64::new(0.0, x);
            acc += x;
        }
        out[(d - 1, d - 1)] = Complex64::new(0.0, -acc);
        SuElement(out)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    /// `i u`, which is Hermitian.
    pub fn times_i(&self) -> Hermitian {
        Hermitian::symmetrize_square(&self.0 * I)
    }

    pub fn scale(&self, s: f64) -> Self {
        SuElement(&self.0 * c(s))
    }

    /// Real linear combination `Σ c_k u_k` of su elements of equal size.
    pub fn combination(coeffs: &[f64], basis: &[SuElement]) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(GeomError::DimensionMismatch { expected: basis.len(), found: coeffs.len() });
        }
        let d = basis.first().map(|b| b.dim()).ok_or_else(|| GeomError::InvalidInput("empty basis".into()))?;
        let mut m = ComplexMatrix::zeros(d, d);
        for (cf, b) in coeffs.iter().zip(basis) {
            m += &b.0 * c(*cf);
        }
        Ok(Self::project(m))
    }

    /// The unitary `exp(t u)`, via the eigen-decomposition of the Hermitian `i u`.
    pub fn exp(&self, t: f64) -> ComplexMatrix {
        let h = self.times_i();
        let eig = SymmetricEigen::new(h.0.clone());
        let d = self.dim();
        // u = -i (iu), so exp(t u) = V diag(exp(-i t λ)) V†.
        let mut diag = ComplexMatrix::zeros(d, d);
        for k in 0..d {
            diag[(k, k)] = Complex64::from_polar(1.0, -t * eig.eigenvalues[k]);
        }
        &eig.eigenvectors * diag * eig.eigenvectors.adjoint()
    }

    /// Commutator norm `max |[u, v]|`.
    pub fn commutator_norm(&self, other: &SuElement) -> f64 {
        max_abs(&(&self.0 * &other.0 - &other.0 * &self.0))
    }
}

/// The real pairing `2 tr(AB)` on Hermitian matrices.
pub fn ambient_inner(a: &Hermitian, b: &Hermitian) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    let re = re_trace_product(&a.0, &b.0);
    let im = im_trace_product(&a.0, &b.0);
    let scale = (a.frobenius() * b.frobenius()).max(1.0);
    if im.abs() > IMAGINARY_RESIDUE_TOL * scale {
        return Err(GeomError::ImaginaryResidue { residue: im.abs(), tolerance: IMAGINARY_RESIDUE_TOL * scale });
    }
    Ok(2.0 * re)
}

/// Unchecked `2 Re tr(AB)` for same-size matrices known to be Hermitian.
pub(crate) fn inner(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    2.0 * re_trace_product(a, b)
}

/// Generalized Gell-Mann basis of su(n+1), of size `(n+1)² - 1`.
///
/// Order: for each pair `j < k` the symmetric generator `i(E_jk + E_kj)` then the
/// antisymmetric `E_jk - E_kj`; then the diagonal generators
/// `i·diag(1,…,1,-l,0,…)/sqrt(l(l+1)/2)` for `l = 1..n`.
pub fn su_basis(n_plus_1: usize) -> Result<Vec<SuElement>> {
    if n_plus_1 < 2 {
        return Err(GeomError::DimensionTooSmall(n_plus_1));
    }
    let d = n_plus_1;
    let mut out = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in (j + 1)..d {
            let mut s = ComplexMatrix::zeros(d, d);
            s[(j, k)] = I;
            s[(k, j)] = I;
            out.push(SuElement(s));
            let mut a = ComplexMatrix::zeros(d, d);
            a[(j, k)] = c(1.0);
            a[(k, j)] = c(-1.0);
            out.push(SuElement(a));
        }
    }
    for l in 1..d {
        let norm = ((l * (l + 1)) as f64 / 2.0).sqrt();
        let mut m = ComplexMatrix::zeros(d, d);
        for j in 0..l {
            m[(j, j)] = Complex64::new(0.0, 1.0 / norm);
        }
        m[(l, l)] = Complex64::new(0.0, -(l as f64) / norm);
        out.push(SuElement(m));
    }
    Ok(out)
}

/// Eigen-decomposition of a Hermitian matrix with the dominant eigenpair singled out.
#[derive(Clone, Debug)]
pub struct DominantEigen {
    values: Vec<f64>,
    vectors: ComplexMatrix,
    top: usize,
}

impl DominantEigen {
    pub fn new(h: &Hermitian) -> Result<Self> {
        let eig = SymmetricEigen::new(h.0.clone());
        let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GeomError::NonFinite("eigen-decomposition"));
        }
        let top = values.iter().enumerate().fold(0, |best, (k, v)| if *v > values[best] { k } else { best });
        let gap = values
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != top)
            .map(|(_, v)| values[top] - v)
            .fold(f64::INFINITY, f64::min);
        if gap < EIGEN_GAP_THRESHOLD {
            return Err(GeomError::AmbiguousRetraction { gap, threshold: EIGEN_GAP_THRESHOLD });
        }
        Ok(DominantEigen { values, vectors: eig.eigenvectors, top })
    }

    pub fn gap(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != self.top)
            .map(|(_, v)| self.values[self.top] - v)
            .fold(f64::INFINITY, f64::min)
    }

    /// `v v†` for the unit dominant eigenvector `v`.
    pub fn projector(&self) -> Hermitian {
        let v = self.vectors.column(self.top);
        Hermitian::symmetrize_square(v * v.adjoint())
    }

    /// Derivative of the dominant spectral projector in direction `k`:
    /// `Σ_{j≠top} (P_j K P_top + P_top K P_j) / (λ_top - λ_j)`.
    pub fn projector_derivative(&self, k: &Hermitian) -> Hermitian {
        let d = self.values.len();
        let v0 = self.vectors.column(self.top);
        let kv0 = &k.0 * v0;
        let mut out = ComplexMatrix::zeros(d, d);
        for j in 0..d {
            if j == self.top {
                continue;
            }
            let vj = self.vectors.column(j);
            let coeff = (vj.adjoint() * &kv0)[(0, 0)] / (self.values[self.top] - self.values[j]);
            let outer = vj * v0.adjoint() * coeff;
            out += &outer + outer.adjoint();
        }
        Hermitian::symmetrize_square(out)
    }
}

/// Nearest rank-one projector: `v v†` for the dominant unit eigenvector `v` of `H`.
pub fn rank1_project(h: &Hermitian) -> Result<ProjPoint> {
    let eig = DominantEigen::new(h)?;
    Ok(ProjPoint::from_projector_unchecked(eig.projector()))
}

/// Deterministic generator for a 64-bit seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random Hermitian matrix with standard normal real components, drawn from `rng`.
pub fn random_hermitian_from<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Hermitian {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for z in m.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z = Complex64::new(re, im);
    }
    Hermitian::symmetrize_square(m)
}

/// Random traceless anti-Hermitian matrix drawn from `rng`.
pub fn random_su_from<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> SuElement {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for z in m.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z = Complex64::new(re, im);
    }
    SuElement::project(m)
}

pub fn random_hermitian(dim: usize, seed: u64) -> Result<Hermitian> {
    if dim < 2 {
        return Err(GeomError::DimensionTooSmall(dim));
    }
    Ok(random_hermitian_from(dim, &mut seeded_rng(seed)))
}

pub fn random_su(dim: usize, seed: u64) -> Result<SuElement> {
    if dim < 2 {
        return Err(GeomError::DimensionTooSmall(dim));
    }
    Ok(random_su_from(dim, &mut seeded_rng(seed)))
}

/// JSON form of a complex matrix: row-major rows of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<[f64; 2]>>);

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        MatrixJson((0..m.nrows()).map(|j| (0..m.ncols()).map(|k| [m[(j, k)].re, m[(j, k)].im]).collect()).collect())
    }

    /// Parses into a square matrix; `path` prefixes error messages.
    pub fn to_matrix(&self, path: &str) -> Result<ComplexMatrix> {
        let d = self.0.len();
        if d == 0 {
            return Err(GeomError::InvalidInput(format!("{path}: empty matrix")));
        }
        let mut m = ComplexMatrix::zeros(d, d);
        for (j, row) in self.0.iter().enumerate() {
            if row.len() != d {
                return Err(GeomError::InvalidInput(format!(
                    "{path}[{j}]: row has {} entries, expected {d}",
                    row.len()
                )));
            }
            for (k, [re, im]) in row.iter().enumerate() {
                if !re.is_finite() || !im.is_finite() {
                    return Err(GeomError::InvalidInput(format!("{path}[{j}][{k}]: non-finite entry")));
                }
                m[(j, k)] = Complex64::new(*re, *im);
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> Hermitian {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0);
        m[(1, 0)] = c(1.0);
        Hermitian(m)
    }

    #[test]
    fn ambient_inner_examples() {
        let e1 = Hermitian::from_real_diagonal(&[1.0, 0.0]);
        let e2 = Hermitian::from_real_diagonal(&[0.0, 1.0]);
        assert_eq!(ambient_inner(&e1, &e1).unwrap(), 2.0);
        assert_eq!(ambient_inner(&e1, &e2).unwrap(), 0.0);
        assert_eq!(ambient_inner(&pauli_x(), &pauli_x()).unwrap(), 4.0);
    }

    #[test]
    fn ambient_inner_rejects_dimension_mismatch() {
        let a = Hermitian::identity(2);
        let b = Hermitian::identity(3);
        assert!(matches!(ambient_inner(&a, &b), Err(GeomError::DimensionMismatch { .. })));
    }

    #[test]
    fn ambient_inner_flags_imaginary_residue() {
        // Bypass symmetrization to emulate a corrupted value.
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = I;
        m[(1, 0)] = I;
        let bad = Hermitian(m);
        let err = ambient_inner(&bad, &pauli_x()).unwrap_err();
        assert!(matches!(err, GeomError::ImaginaryResidue { .. }));
    }

    #[test]
    fn su_basis_sizes_and_membership() {
        assert_eq!(su_basis(2).unwrap().len(), 3);
        assert_eq!(su_basis(3).unwrap().len(), 8);
        assert_eq!(su_basis(4).unwrap().len(), 15);
        assert!(su_basis(1).is_err());
        for d in 2..=4 {
            for u in su_basis(d).unwrap() {
                let m = u.as_matrix();
                assert_eq!(max_abs(&(m + m.adjoint())), 0.0);
                assert_eq!(m.trace(), Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn su_basis_is_linearly_independent() {
        for d in 2..=4 {
            let b = su_basis(d).unwrap();
            let k = b.len();
            let gram = DMatrix::from_fn(k, k, |p, q| -2.0 * (b[p].as_matrix() * b[q].as_matrix()).trace().re);
            let eig = SymmetricEigen::new(gram);
            let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(min > 1e-6, "d={d} min eigenvalue {min}");
        }
    }

    #[test]
    fn rank1_project_examples() {
        let h = Hermitian::from_real_diagonal(&[1.0, 0.0, 0.0]);
        let a = rank1_project(&h).unwrap();
        assert!((a.matrix() - &h).max_abs() < 1e-15);

        let h = Hermitian::from_real_diagonal(&[2.0, 1.0]);
        let a = rank1_project(&h).unwrap();
        assert!((a.matrix() - &Hermitian::from_real_diagonal(&[1.0, 0.0])).max_abs() < 1e-15);

        let p = rank1_project(&random_hermitian(3, 5).unwrap()).unwrap();
        let again = rank1_project(p.matrix()).unwrap();
        assert!((again.matrix() - p.matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn rank1_project_rejects_degenerate_top() {
        let h = Hermitian::from_real_diagonal(&[1.0, 1.0, 0.0]);
        assert!(matches!(rank1_project(&h), Err(GeomError::AmbiguousRetraction { .. })));
    }

    #[test]
    fn random_sampling_is_deterministic_and_structured() {
        let a = random_hermitian(3, 7).unwrap();
        let b = random_hermitian(3, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(max_abs(&(a.as_matrix() - a.as_matrix().adjoint())), 0.0);
        let u = random_su(3, 7).unwrap();
        assert_eq!(u, random_su(3, 7).unwrap());
        assert_eq!(u.as_matrix().trace(), Complex64::new(0.0, 0.0));
        assert_eq!(max_abs(&(u.as_matrix() + u.as_matrix().adjoint())), 0.0);
    }

    #[test]
    fn exp_of_su_is_unitary() {
        let u = random_su(3, 11).unwrap();
        let g = u.exp(0.7);
        let id = ComplexMatrix::identity(3, 3);
        assert!(max_abs(&(&g * g.adjoint() - id)) < 1e-13);
        // d/dt exp(tu) at 0 is u.
        let h = 1e-6;
        let d = (u.exp(h) - u.exp(-h)) / c(2.0 * h);
        assert!(max_abs(&(d - u.as_matrix())) < 1e-8);
    }

    #[test]
    fn projector_derivative_matches_finite_difference() {
        let h = random_hermitian(3, 3).unwrap();
        let k = random_hermitian(3, 4).unwrap();
        let eig = DominantEigen::new(&h).unwrap();
        let analytic = eig.projector_derivative(&k);
        let s = 1e-5;
        let p = rank1_project(&(&h + &k.scale(s))).unwrap();
        let m = rank1_project(&(&h - &k.scale(s))).unwrap();
        let fd = (p.matrix() - m.matrix()).scale(0.5 / s);
        assert!((&fd - &analytic).max_abs() < 1e-8);
    }

    #[test]
    fn matrix_json_round_trip_and_errors() {
        let u = random_su(2, 1).unwrap();
        let j = MatrixJson::from_matrix(u.as_matrix());
        let text = serde_json::to_string(&j).unwrap();
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        assert_eq!(&back.to_matrix("u").unwrap(), u.as_matrix());
        let ragged = MatrixJson(vec![vec![[0.0, 0.0]], vec![[0.0, 0.0], [1.0, 0.0]]]);
        let err = ragged.to_matrix("spec.u").unwrap_err().to_string();
        assert!(err.contains("spec.u[0]"), "{err}");
    }

    proptest::proptest! {
        #[test]
        fn ambient_inner_is_symmetric_bilinear_positive(seed in 0u64..1000, s in -3.0f64..3.0) {
            let a = random_hermitian(3, seed).unwrap();
            let b = random_hermitian(3, seed + 10_000).unwrap();
            let cc = random_hermitian(3, seed + 20_000).unwrap();
            let ab = ambient_inner(&a, &b).unwrap();
            proptest::prop_assert!((ab - ambient_inner(&b, &a).unwrap()).abs() < 1e-12);
            let lhs = ambient_inner(&(&a.scale(s) + &cc), &b).unwrap();
            let rhs = s * ab + ambient_inner(&cc, &b).unwrap();
            proptest::prop_assert!((lhs - rhs).abs() < 1e-11);
            proptest::prop_assert!(ambient_inner(&a, &a).unwrap() > 0.0);
        }
    }
}
