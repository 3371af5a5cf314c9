//! Complex Hermitian matrices and the structure built on them.
//!
//! A [`HermitianMatrix`] is the carrier of gambles, projectors and density
//! matrices. Hermiticity is enforced at construction, so every value of the
//! type has an exactly real diagonal and conjugate-symmetric off-diagonal
//! entries. [`BlockDiag`] holds the block-diagonal elements of `D^k ⊗ H^n`
//! (prize-indexed families of Hermitian blocks).
//!
//! Eigen-decomposition reduces the matrix to a real symmetric tridiagonal
//! form with complex Householder reflections plus a diagonal phase change,
//! then runs the implicit-shift QL iteration from [`crate::linalg`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Relative tolerance used by the PSD classifier: `tol = 1e-9 * max(1, ‖H‖_F)`.
pub const DEFAULT_PSD_REL_TOL: f64 = 1e-9;

/// Tolerance for the hermiticity check of raw input, relative to its Frobenius norm.
pub const HERMITICITY_REL_TOL: f64 = 1e-9;

#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianMatrix(n={}) [", self.n)?;
        for i in 0..self.n {
            write!(f, "[")?;
            for j in 0..self.n {
                let z = self.get(i, j);
                if j > 0 {
                    write!(f, ", ")?;
                }
                if z.im == 0.0 {
                    write!(f, "{:.6}", z.re)?;
                } else {
                    write!(f, "{:.6}{:+.6}i", z.re, z.im)?;
                }
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, c: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(c, 0.0);
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Build `re + i·im` from row-major parts, averaging away asymmetry below tolerance.
    pub fn from_parts(re: &[Vec<f64>], im: Option<&[Vec<f64>]>) -> Result<Self> {
        let n = re.len();
        for (i, row) in re.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "row {i} of the real part has length {} (expected {n})",
                    row.len()
                )));
            }
        }
        if let Some(im) = im {
            if im.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: im.len() });
            }
            for (i, row) in im.iter().enumerate() {
                if row.len() != n {
                    return Err(Error::InvalidInput(format!(
                        "row {i} of the imaginary part has length {} (expected {n})",
                        row.len()
                    )));
                }
            }
        }
        let imv = |i: usize, j: usize| im.map_or(0.0, |m| m[i][j]);
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let (r, c) = (re[i][j], imv(i, j));
                if !r.is_finite() || !c.is_finite() {
                    return Err(Error::InvalidInput(format!("entry ({i},{j}) is not finite")));
                }
                data.push(Complex64::new(r, c));
            }
        }
        Self::from_complex(n, data)
    }

    /// Build from row-major complex entries, checking hermiticity against
    /// `1e-9 * ‖input‖_F` and symmetrising exactly.
    pub fn from_complex(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: data.len() });
        }
        let norm = data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let tol = HERMITICITY_REL_TOL * norm;
        for i in 0..n {
            for j in i..n {
                let dev = (data[i * n + j] - data[j * n + i].conj()).norm();
                if dev > tol {
                    return Err(Error::NotHermitian { i, j, deviation: dev, tolerance: tol });
                }
            }
        }
        Ok(Self::hermitize(n, data))
    }

    /// Project onto the Hermitian part without any check.
    pub(crate) fn hermitize(n: usize, mut data: Vec<Complex64>) -> Self {
        for i in 0..n {
            data[i * n + i].im = 0.0;
            for j in (i + 1)..n {
                let v = (data[i * n + j] + data[j * n + i].conj()) * 0.5;
                data[i * n + j] = v;
                data[j * n + i] = v.conj();
            }
        }
        Self { n, data }
    }

    /// The rank-one matrix `v v†`.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(v[i] * v[j].conj());
            }
        }
        Self::hermitize(n, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn real_part(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j).re).collect()).collect()
    }

    pub fn imag_part(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j).im).collect()).collect()
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * self.n + i].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }

    /// `Tr(G† R)`, real for Hermitian arguments.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|z| z * c).collect() }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b * c).collect(),
        })
    }

    /// `v† H v`.
    pub fn quadratic_form(&self, v: &[Complex64]) -> Result<f64> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: v.len() });
        }
        let n = self.n;
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..n {
                row += self.data[i * n + j] * v[j];
            }
            s += v[i].conj() * row;
        }
        Ok(s.re)
    }

    /// `A H A` for Hermitian `A`; the result is Hermitian.
    pub fn sandwich(&self, a: &Self) -> Result<Self> {
        self.check_dim(a)?;
        let n = self.n;
        let ah = cmatmul(&a.data, &self.data, n);
        Ok(Self::hermitize(n, cmatmul(&ah, &a.data, n)))
    }

    /// Compression by a rank-one projector: `Π H Π = (π† H π) Π`.
    pub fn compress(&self, p: &Projector) -> Result<Self> {
        let gamma = self.quadratic_form(p.vector())?;
        Ok(p.matrix().scale(gamma))
    }

    /// Real symmetric embedding `[[X, -Y], [Y, X]]` of `H = X + iY`, row-major `2n x 2n`.
    pub fn real_embedding(&self) -> Vec<f64> {
        let n = self.n;
        let m = 2 * n;
        let mut out = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                let z = self.get(i, j);
                out[i * m + j] = z.re;
                out[(i + n) * m + (j + n)] = z.re;
                out[i * m + (j + n)] = -z.im;
                out[(i + n) * m + j] = z.im;
            }
        }
        out
    }

    /// Inverse of [`Self::real_embedding`] composed with the projection onto
    /// embedded matrices: any real symmetric `2n x 2n` matrix is mapped to
    /// `((W11 + W22) + i (W21 - W12)) / 2`.
    pub fn from_real_embedding(w: &[f64], n: usize) -> Self {
        let m = 2 * n;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let re = 0.5 * (w[i * m + j] + w[(i + n) * m + (j + n)]);
                let im = 0.5 * (w[(i + n) * m + j] - w[i * m + (j + n)]);
                data.push(Complex64::new(re, im));
            }
        }
        Self::hermitize(n, data)
    }

    pub fn eig(&self) -> Result<EigenDecomposition> {
        eig_decompose(self)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eig_decompose(self)?.values)
    }

    /// Classification with the default tolerance `1e-9 * max(1, ‖H‖_F)`.
    pub fn psd_class(&self) -> Result<PsdClass> {
        psd_classify(self, default_psd_tol(self.frobenius_norm()))
    }

    /// Inverse principal square root of a positive definite matrix.
    pub(crate) fn inv_sqrt(&self) -> Result<Self> {
        let eig = self.eig()?;
        if eig.values.first().copied().unwrap_or(1.0) <= 0.0 {
            return Err(Error::InvalidInput("matrix is not positive definite".into()));
        }
        let weights: Vec<f64> = eig.values.iter().map(|v| 1.0 / v.sqrt()).collect();
        Ok(eig.recompose_with(&weights))
    }
}

pub(crate) fn default_psd_tol(norm: f64) -> f64 {
    DEFAULT_PSD_REL_TOL * norm.max(1.0)
}

fn cmatmul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: Self) -> HermitianMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in Hermitian addition");
        HermitianMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: Self) -> HermitianMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in Hermitian subtraction");
        HermitianMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        self.scale(-1.0)
    }
}

impl Mul<&HermitianMatrix> for f64 {
    type Output = HermitianMatrix;
    fn mul(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        rhs.scale(self)
    }
}

/// Eigenvalues in ascending order with orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
}

impl EigenDecomposition {
    /// `Σ_k λ_k v_k v_k†`.
    pub fn reconstruct(&self) -> HermitianMatrix {
        self.recompose_with(&self.values)
    }

    /// `Σ_k w_k v_k v_k†` for arbitrary spectral weights.
    pub fn recompose_with(&self, weights: &[f64]) -> HermitianMatrix {
        let n = self.values.len();
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for (w, v) in weights.iter().zip(&self.vectors) {
            for i in 0..n {
                let vi = v[i] * *w;
                for j in 0..n {
                    data[i * n + j] += vi * v[j].conj();
                }
            }
        }
        HermitianMatrix::hermitize(n, data)
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Eigen-decomposition of a Hermitian matrix.
pub fn eig_decompose(h: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = h.n;
    if n == 0 {
        return Ok(EigenDecomposition { values: vec![], vectors: vec![] });
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut a = h.data.clone();
    let mut q = vec![zero; n * n];
    for i in 0..n {
        q[i * n + i] = Complex64::new(1.0, 0.0);
    }

    for k in 0..n.saturating_sub(2) {
        let norm = ((k + 1)..n).map(|i| a[i * n + k].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1) * n + k];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * norm;
        let mut v = vec![zero; n];
        for i in (k + 1)..n {
            v[i] = a[i * n + k];
        }
        v[k + 1] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // p = beta A v,  K = beta (v† p) / 2,  w = p - K v,  A <- A - v w† - w v†
        let p: Vec<Complex64> = (0..n)
            .map(|i| (0..n).map(|j| a[i * n + j] * v[j]).sum::<Complex64>() * beta)
            .collect();
        let vp: Complex64 = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum();
        let kk = 0.5 * beta * vp.re;
        let w: Vec<Complex64> = p.iter().zip(&v).map(|(pi, vi)| pi - vi * kk).collect();
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] -= v[i] * w[j].conj() + w[i] * v[j].conj();
            }
        }
        // Q <- Q (I - beta v v†)
        let qv: Vec<Complex64> = (0..n).map(|i| (0..n).map(|j| q[i * n + j] * v[j]).sum()).collect();
        for i in 0..n {
            for j in 0..n {
                q[i * n + j] -= qv[i] * v[j].conj() * beta;
            }
        }
    }

    // Diagonal phase change making the sub-diagonal real and non-negative.
    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut e = vec![0.0; n];
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    for i in 0..n.saturating_sub(1) {
        let t = a[(i + 1) * n + i];
        let r = t.norm();
        e[i] = r;
        phases[i + 1] = if r > 0.0 { phases[i] * (t / r) } else { phases[i] };
    }
    for i in 0..n {
        for j in 0..n {
            q[i * n + j] *= phases[j];
        }
    }

    let mut z = linalg::identity(n);
    linalg::tridiagonal_ql(&mut d, &mut e, &mut z, n)?;

    let mut vectors = Vec::with_capacity(n);
    for col in 0..n {
        let mut v: Vec<Complex64> = (0..n)
            .map(|i| (0..n).map(|k| q[i * n + k] * z[k * n + col]).sum())
            .collect();
        let nrm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|c| *c /= nrm);
        vectors.push(v);
    }
    Ok(EigenDecomposition { values: d, vectors })
}

/// Definiteness classes under an eigenvalue tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PsdClass {
    PositiveDefinite,
    PsdNonZero,
    Zero,
    NsdNonZero,
    NegativeDefinite,
    Indefinite,
}

impl PsdClass {
    /// `G ⪈ 0`: positive semi-definite and non-zero.
    pub fn is_psdnz(self) -> bool {
        matches!(self, PsdClass::PositiveDefinite | PsdClass::PsdNonZero)
    }

    /// `G ⪇ 0`: negative semi-definite and non-zero.
    pub fn is_nsdnz(self) -> bool {
        matches!(self, PsdClass::NegativeDefinite | PsdClass::NsdNonZero)
    }

    pub fn mirror(self) -> Self {
        match self {
            PsdClass::PositiveDefinite => PsdClass::NegativeDefinite,
            PsdClass::PsdNonZero => PsdClass::NsdNonZero,
            PsdClass::Zero => PsdClass::Zero,
            PsdClass::NsdNonZero => PsdClass::PsdNonZero,
            PsdClass::NegativeDefinite => PsdClass::PositiveDefinite,
            PsdClass::Indefinite => PsdClass::Indefinite,
        }
    }
}

/// Classify from the extreme eigenvalues with tolerance `tol`.
pub fn classify_spectrum(min: f64, max: f64, tol: f64) -> PsdClass {
    if min.abs().max(max.abs()) <= tol {
        PsdClass::Zero
    } else if min > tol {
        PsdClass::PositiveDefinite
    } else if max < -tol {
        PsdClass::NegativeDefinite
    } else if min >= -tol {
        PsdClass::PsdNonZero
    } else if max <= tol {
        PsdClass::NsdNonZero
    } else {
        PsdClass::Indefinite
    }
}

pub fn psd_classify(h: &HermitianMatrix, tol: f64) -> Result<PsdClass> {
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::Range { value: tol, range: "[0, inf)" });
    }
    let eig = h.eig()?;
    Ok(classify_spectrum(eig.min(), eig.max(), tol))
}

/// `Tr(G† R)`.
pub fn frobenius_inner(g: &HermitianMatrix, r: &HermitianMatrix) -> Result<f64> {
    g.inner(r)
}

pub fn build_hermitian(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<HermitianMatrix> {
    HermitianMatrix::from_parts(re, Some(im))
}

/// `Diag(d_1 B, ..., d_m B)`.
pub fn tensor_diag_hermitian(d: &[f64], b: &HermitianMatrix) -> BlockDiag {
    BlockDiag { n: b.n(), blocks: d.iter().map(|&di| b.scale(di)).collect() }
}

/// Block-diagonal matrix with equally sized Hermitian blocks: an element of `D^k ⊗ H^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiag {
    n: usize,
    blocks: Vec<HermitianMatrix>,
}

impl BlockDiag {
    pub fn new(blocks: Vec<HermitianMatrix>) -> Result<Self> {
        let n = blocks
            .first()
            .map(|b| b.n())
            .ok_or_else(|| Error::InvalidInput("block-diagonal matrix needs at least one block".into()))?;
        if let Some(bad) = blocks.iter().find(|b| b.n() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.n() });
        }
        Ok(Self { n, blocks })
    }

    pub fn zeros(count: usize, n: usize) -> Self {
        Self { n, blocks: vec![HermitianMatrix::zeros(n); count] }
    }

    pub fn identity(count: usize, n: usize) -> Self {
        Self { n, blocks: vec![HermitianMatrix::identity(n); count] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn count(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[HermitianMatrix] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> &HermitianMatrix {
        &self.blocks[j]
    }

    pub fn into_blocks(self) -> Vec<HermitianMatrix> {
        self.blocks
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.count() != other.count() {
            return Err(Error::DimensionMismatch { expected: self.count(), found: other.count() });
        }
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }

    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &Self) -> f64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.inner_unchecked(b)).sum()
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(HermitianMatrix::trace).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.frobenius_norm().powi(2)).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { n: self.n, blocks: self.blocks.iter().map(|b| b.scale(c)).collect() }
    }

    pub fn add_scaled(&self, c: f64, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            n: self.n,
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a.add_scaled(c, b))
                .collect::<Result<_>>()?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(-1.0, other)
    }

    /// Smallest and largest eigenvalue over all blocks.
    pub fn spectrum_bounds(&self) -> Result<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for b in &self.blocks {
            let e = b.eig()?;
            lo = lo.min(e.min());
            hi = hi.max(e.max());
        }
        Ok((lo, hi))
    }

    pub fn psd_classify(&self, tol: f64) -> Result<PsdClass> {
        let (lo, hi) = self.spectrum_bounds()?;
        Ok(classify_spectrum(lo, hi, tol))
    }

    /// Classification with the default tolerance `1e-9 * max(1, ‖G‖_F)`.
    pub fn psd_class(&self) -> Result<PsdClass> {
        self.psd_classify(default_psd_tol(self.frobenius_norm()))
    }

    /// Blockwise compression `(I ⊗ Π) G (I ⊗ Π)`.
    pub fn compress(&self, p: &Projector) -> Result<Self> {
        Ok(Self { n: self.n, blocks: self.blocks.iter().map(|b| b.compress(p)).collect::<Result<_>>()? })
    }

    /// The `π† G_j π` coefficient of every block.
    pub fn expectations(&self, v: &[Complex64]) -> Result<Vec<f64>> {
        self.blocks.iter().map(|b| b.quadratic_form(v)).collect()
    }
}

impl From<HermitianMatrix> for BlockDiag {
    fn from(h: HermitianMatrix) -> Self {
        Self { n: h.n(), blocks: vec![h] }
    }
}

const UNIT_NORM_TOL: f64 = 1e-9;

/// Rank-one projector `Π = π π†` stored through its unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    vector: Vec<Complex64>,
}

impl Projector {
    /// Requires `‖π‖ = 1` within `1e-9`; the stored vector is renormalised exactly.
    pub fn new(vector: Vec<Complex64>) -> Result<Self> {
        let norm = vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vector.is_empty() || (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::InvalidInput(format!("projector vector must have unit norm, found {norm}")));
        }
        Ok(Self { vector: vector.into_iter().map(|z| z / norm).collect() })
    }

    pub fn normalized(vector: Vec<Complex64>) -> Result<Self> {
        let norm = vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidInput("projector vector must be non-zero".into()));
        }
        Ok(Self { vector: vector.into_iter().map(|z| z / norm).collect() })
    }

    pub fn from_real(v: &[f64]) -> Result<Self> {
        Self::normalized(v.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Computational basis vector `e_i` in dimension `n`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[i] = Complex64::new(1.0, 0.0);
        Self { vector: v }
    }

    pub fn n(&self) -> usize {
        self.vector.len()
    }

    pub fn vector(&self) -> &[Complex64] {
        &self.vector
    }

    pub fn matrix(&self) -> HermitianMatrix {
        HermitianMatrix::outer(&self.vector)
    }

    /// `|⟨self, other⟩|²`.
    pub fn overlap(&self, other: &Self) -> f64 {
        self.vector.iter().zip(&other.vector).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm_sqr()
    }
}

/// A complete family of `n` mutually orthogonal rank-one projectors in dimension `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalDecomposition {
    projectors: Vec<Projector>,
}

impl OrthogonalDecomposition {
    pub fn new(projectors: Vec<Projector>) -> Result<Self> {
        let n = projectors.len();
        if n == 0 {
            return Err(Error::InvalidInput("orthogonal decomposition needs at least one projector".into()));
        }
        for p in &projectors {
            if p.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.n() });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let ip: Complex64 = projectors[i]
                    .vector
                    .iter()
                    .zip(&projectors[j].vector)
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                if ip.norm() > UNIT_NORM_TOL {
                    return Err(Error::InvalidInput(format!(
                        "projectors {i} and {j} are not orthogonal (overlap {:.3e})",
                        ip.norm()
                    )));
                }
            }
        }
        Ok(Self { projectors })
    }

    pub fn computational(n: usize) -> Self {
        Self { projectors: (0..n).map(|i| Projector::basis(n, i)).collect() }
    }

    /// Eigenbasis of a Hermitian matrix.
    pub fn eigenbasis(h: &HermitianMatrix) -> Result<Self> {
        let e = h.eig()?;
        Ok(Self { projectors: e.vectors.into_iter().map(|vector| Projector { vector }).collect() })
    }

    pub fn n(&self) -> usize {
        self.projectors.len()
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn projector(&self, i: usize) -> &Projector {
        &self.projectors[i]
    }
}

/// JSON encoding: `{"n": int, "re": [[...]], "im": [[...]]}`, `im` optional.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl TryFrom<MatrixJson> for HermitianMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        if j.re.len() != j.n {
            return Err(Error::InvalidInput(format!("\"re\" has {} rows, expected n = {}", j.re.len(), j.n)));
        }
        HermitianMatrix::from_parts(&j.re, j.im.as_deref())
    }
}

impl From<&HermitianMatrix> for MatrixJson {
    fn from(h: &HermitianMatrix) -> Self {
        MatrixJson { n: h.n, re: h.real_part(), im: if h.is_real() { None } else { Some(h.imag_part()) } }
    }
}

impl Serialize for HermitianMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        HermitianMatrix::try_from(raw).map_err(serde::de::Error::custom)
    }
}

/// JSON encoding of a block-diagonal matrix: `{"blocks": [matrix, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockDiagJson {
    pub blocks: Vec<HermitianMatrix>,
}

impl Serialize for BlockDiag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BlockDiagJson { blocks: self.blocks.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BlockDiag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BlockDiagJson::deserialize(d)?;
        BlockDiag::new(raw.blocks).map_err(serde::de::Error::custom)
    }
}
