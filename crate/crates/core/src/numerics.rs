//! Dense complex linear algebra shared by the physics modules.
//!
//! Basis convention: for an `n`-site register, site `j` (1-based) is stored in
//! bit position `n - j`, so site 1 is the most significant bit. Bit value 0 is
//! the `σ^z = +1` state `|0⟩`, bit value 1 is `|1⟩`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest row or column count `kron` will produce.
pub const DEFAULT_MAX_AXIS: usize = 1 << 20;

const HERMITIAN_RTOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-10;
const DENSITY_TOL: f64 = 1e-10;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Bit mask selecting `site` (1-based) in an `n_sites` register.
#[inline]
pub fn site_mask(site: usize, n_sites: usize) -> usize {
    1 << (n_sites - site)
}

/// A finite dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn new(inner: DMatrix<C64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(Error::Argument("matrix dimensions must be positive".into()));
        }
        if inner.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Argument("matrix has non-finite entries".into()));
        }
        Ok(ComplexMatrix(inner))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Argument(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        let z: Vec<C64> = entries.iter().map(|&x| c(x, 0.0)).collect();
        Self::from_row_slice(rows, cols, &z)
    }

    pub fn identity(dim: usize) -> Self {
        ComplexMatrix(DMatrix::identity(dim, dim))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        ComplexMatrix(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c(diag[i], 0.0)
            } else {
                C64::default()
            }
        }))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::Contract(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(ComplexMatrix(&self.0 * &other.0))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape(), "shape mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |A[i][j] - conj(A[j][i])|`; infinite for non-square input.
    pub fn hermiticity_defect(&self) -> f64 {
        if self.rows() != self.cols() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Whether every entry has an exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0)
    }
}

/// A square complex matrix satisfying `A = A†` to relative tolerance 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::Contract(format!(
                "Hermitian operator must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let defect = matrix.hermiticity_defect();
        let scale = matrix.max_abs();
        if defect > HERMITIAN_RTOL * scale {
            return Err(Error::Contract(format!(
                "matrix is not Hermitian (defect {defect:e}, scale {scale:e})"
            )));
        }
        Ok(HermitianOperator { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `⟨ψ|A|ψ⟩`, real part.
    pub fn expectation(&self, psi: &PureState) -> Result<f64> {
        if psi.dim() != self.dim() {
            return Err(Error::Contract(format!(
                "state dimension {} does not match operator dimension {}",
                psi.dim(),
                self.dim()
            )));
        }
        let a = psi.amplitudes();
        Ok(a.dotc(&(self.matrix.as_matrix() * a)).re)
    }

    /// Max-norm of the commutator `[self, other]`.
    pub fn commutator_max(&self, other: &HermitianOperator) -> f64 {
        let a = self.matrix.as_matrix();
        let b = other.matrix.as_matrix();
        if is_diagonal(b) {
            return diagonal_commutator_max(a, b);
        }
        if is_diagonal(a) {
            return diagonal_commutator_max(b, a);
        }
        let comm = a * b - b * a;
        comm.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn is_diagonal(m: &DMatrix<C64>) -> bool {
    m.iter().enumerate().all(|(k, z)| {
        let (i, j) = (k % m.nrows(), k / m.nrows());
        i == j || *z == C64::default()
    })
}

/// `max |[a, d]_ij| = max |a_ij (d_jj - d_ii)|` for diagonal `d`.
fn diagonal_commutator_max(a: &DMatrix<C64>, d: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut max = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            max = max.max((a[(i, j)] * (d[(j, j)] - d[(i, i)])).norm());
        }
    }
    max
}

/// Ascending eigenvalues and the matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Column `k` as a state of `n_sites` sites.
    pub fn eigenstate(&self, k: usize, n_sites: usize) -> Result<PureState> {
        PureState::new(n_sites, self.eigenvectors.as_matrix().column(k).into_owned())
    }

    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = self.eigenvectors.as_matrix();
        let mut scaled = v.clone();
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(k).scale_mut(lam);
        }
        ComplexMatrix(scaled * v.adjoint())
    }
}

/// Normalized state vector over the `2^n_sites` computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_sites: usize,
    amplitudes: DVector<C64>,
}

impl PureState {
    pub fn new(n_sites: usize, amplitudes: DVector<C64>) -> Result<Self> {
        check_register(n_sites, amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Contract(format!("state norm is {norm}, expected 1")));
        }
        Ok(PureState { n_sites, amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(n_sites: usize, amplitudes: DVector<C64>) -> Result<Self> {
        check_register(n_sites, amplitudes.len())?;
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Argument("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(PureState {
            n_sites,
            amplitudes: amplitudes / c(norm, 0.0),
        })
    }

    /// Computational basis state with the given basis index.
    pub fn basis(n_sites: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_sites;
        if index >= dim {
            return Err(Error::Argument(format!(
                "basis index {index} out of range for {n_sites} sites"
            )));
        }
        let mut v = DVector::zeros(dim);
        v[index] = c(1.0, 0.0);
        Ok(PureState { n_sites, amplitudes: v })
    }

    /// Tensor product `self ⊗ other`, with `self` occupying the leading sites.
    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        let n = self.n_sites + other.n_sites;
        let db = other.dim();
        let amps = DVector::from_fn(self.dim() * db, |i, _| {
            self.amplitudes[i / db] * other.amplitudes[i % db]
        });
        PureState::normalized(n, amps)
    }

    pub(crate) fn from_parts_unchecked(n_sites: usize, amplitudes: DVector<C64>) -> Self {
        PureState { n_sites, amplitudes }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap_sq(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Max amplitude distance after removing the global phase of `other` relative to `self`.
    pub fn distance_up_to_phase(&self, other: &PureState) -> f64 {
        let ov = other.inner(self);
        let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { c(1.0, 0.0) };
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| (a - b * phase).norm())
            .fold(0.0, f64::max)
    }

    /// Max amplitude distance, phase-sensitive.
    pub fn distance(&self, other: &PureState) -> f64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn check_register(n_sites: usize, len: usize) -> Result<()> {
    if n_sites == 0 || n_sites >= usize::BITS as usize {
        return Err(Error::Argument(format!("invalid site count {n_sites}")));
    }
    if len != 1usize << n_sites {
        return Err(Error::Contract(format!(
            "amplitude vector has length {len}, expected 2^{n_sites}"
        )));
    }
    Ok(())
}

/// Unit-trace positive semidefinite operator on `n_sites` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_sites: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(n_sites: usize, matrix: ComplexMatrix) -> Result<Self> {
        let dim = 1usize << n_sites;
        if matrix.rows() != dim || matrix.cols() != dim {
            return Err(Error::Contract(format!(
                "density matrix for {n_sites} sites must be {dim}x{dim}"
            )));
        }
        if matrix.hermiticity_defect() > DENSITY_TOL {
            return Err(Error::Contract("density matrix is not Hermitian".into()));
        }
        let tr = matrix.as_matrix().trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::Contract(format!("density matrix trace is {tr}, expected 1")));
        }
        let rho = DensityMatrix { n_sites, matrix };
        let min = rho.min_eigenvalue()?;
        if min < -DENSITY_TOL {
            return Err(Error::Contract(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(rho)
    }

    /// Projector `|ψ⟩⟨ψ|`.
    pub fn from_pure(psi: &PureState) -> Self {
        let a = psi.amplitudes();
        DensityMatrix {
            n_sites: psi.n_sites(),
            matrix: ComplexMatrix(a * a.adjoint()),
        }
    }

    pub(crate) fn from_parts_unchecked(n_sites: usize, matrix: ComplexMatrix) -> Self {
        DensityMatrix { n_sites, matrix }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix.get(row, col)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.as_matrix().trace()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let h = HermitianOperator::new(self.matrix.clone())?;
        Ok(hermitian_eig(&h)?.eigenvalues)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or(0.0))
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, unitary: &ComplexMatrix) -> Result<Self> {
        if unitary.rows() != self.dim() || unitary.cols() != self.dim() {
            return Err(Error::Contract("unitary dimension mismatch".into()));
        }
        let u = unitary.as_matrix();
        Ok(DensityMatrix {
            n_sites: self.n_sites,
            matrix: ComplexMatrix(u * self.matrix.as_matrix() * u.adjoint()),
        })
    }
}

/// Kronecker product with the default axis limit.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_with_limit(a, b, DEFAULT_MAX_AXIS)
}

/// Kronecker product `a ⊗ b`; fails if either result axis exceeds `max_axis`.
pub fn kron_with_limit(a: &ComplexMatrix, b: &ComplexMatrix, max_axis: usize) -> Result<ComplexMatrix> {
    let rows = a
        .rows()
        .checked_mul(b.rows())
        .filter(|&r| r <= max_axis)
        .ok_or(Error::Capacity {
            what: "kron rows",
            requested: a.rows().saturating_mul(b.rows()),
            limit: max_axis,
        })?;
    let cols = a
        .cols()
        .checked_mul(b.cols())
        .filter(|&c| c <= max_axis)
        .ok_or(Error::Capacity {
            what: "kron columns",
            requested: a.cols().saturating_mul(b.cols()),
            limit: max_axis,
        })?;
    let out = a.0.kronecker(&b.0);
    debug_assert_eq!(out.shape(), (rows, cols));
    Ok(ComplexMatrix(out))
}

/// Rotates `col` so its largest-modulus entry is real and positive.
/// Entries within 1e-12 of the maximum count as ties; the lowest index wins.
pub(crate) fn fix_phase(col: &mut [C64]) {
    let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = col
        .iter()
        .position(|z| z.norm() >= max - 1e-12)
        .expect("max is attained");
    let z = col[pivot];
    let rot = z.conj() / z.norm();
    for x in col.iter_mut() {
        *x *= rot;
    }
    col[pivot] = c(col[pivot].norm(), 0.0);
}

/// Real-symmetric counterpart of [`fix_phase`].
pub(crate) fn fix_sign(col: &mut [f64]) {
    let max = col.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = col
        .iter()
        .position(|x| x.abs() >= max - 1e-12)
        .expect("max is attained");
    if col[pivot] < 0.0 {
        for x in col.iter_mut() {
            *x = -*x;
        }
    }
}

fn max_iterations(n: usize) -> usize {
    1000 + 200 * n
}

/// Eigendecomposition of a real symmetric matrix, ascending, with sign-fixed columns.
pub(crate) fn real_symmetric_eig(m: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, max_iterations(n)).ok_or_else(|| {
        Error::Numeric(format!(
            "real symmetric QL on a {n}x{n} matrix exceeded {} iterations",
            max_iterations(n)
        ))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: Vec<f64> = eig.eigenvectors.column(src).iter().copied().collect();
        fix_sign(&mut col);
        vectors.column_mut(dst).copy_from_slice(&col);
    }
    Ok((values, vectors))
}

/// Eigendecomposition of a Hermitian operator.
///
/// Real input takes the real symmetric path. Eigenvalues are ascending; each
/// eigenvector is rotated so its largest-modulus component is real positive.
pub fn hermitian_eig(a: &HermitianOperator) -> Result<Spectrum> {
    let n = a.dim();
    let m = a.matrix().as_matrix();
    if a.matrix().is_real() {
        let real = DMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)].re + m[(j, i)].re));
        let (eigenvalues, vectors) = real_symmetric_eig(real)?;
        let eigenvectors = ComplexMatrix(vectors.map(|x| c(x, 0.0)));
        return Ok(Spectrum {
            eigenvalues,
            eigenvectors,
        });
    }
    let sym = DMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, max_iterations(n)).ok_or_else(|| {
        Error::Numeric(format!(
            "Hermitian QL on a {n}x{n} matrix exceeded {} iterations",
            max_iterations(n)
        ))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: Vec<C64> = eig.eigenvectors.column(src).iter().copied().collect();
        fix_phase(&mut col);
        vectors.column_mut(dst).copy_from_slice(&col);
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: ComplexMatrix(vectors),
    })
}

/// `V e^{-iλt} V† ψ`.
pub fn evolve_spectral(s: &Spectrum, psi: &PureState, t: f64) -> Result<PureState> {
    if s.dim() != psi.dim() {
        return Err(Error::Contract(format!(
            "spectrum dimension {} does not match state dimension {}",
            s.dim(),
            psi.dim()
        )));
    }
    let v = s.eigenvectors.as_matrix();
    let mut coeffs = v.ad_mul(psi.amplitudes());
    for (ck, &lam) in coeffs.iter_mut().zip(&s.eigenvalues) {
        *ck *= C64::from_polar(1.0, -lam * t);
    }
    Ok(PureState::from_parts_unchecked(psi.n_sites(), v * coeffs))
}

/// Reduced density matrix on `keep_sites` (1-based, ascending, distinct).
/// The first kept site becomes the most significant bit of the output.
pub fn partial_trace(psi: &PureState, keep_sites: &[usize]) -> Result<DensityMatrix> {
    let n = psi.n_sites();
    if keep_sites.is_empty() {
        return Err(Error::Argument("partial trace needs at least one kept site".into()));
    }
    if keep_sites.iter().any(|&s| s == 0 || s > n) {
        return Err(Error::Argument(format!(
            "kept sites {keep_sites:?} out of range 1..={n}"
        )));
    }
    if keep_sites.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument(format!(
            "kept sites {keep_sites:?} must be strictly ascending"
        )));
    }
    let k = keep_sites.len();
    let env_sites: Vec<usize> = (1..=n).filter(|s| !keep_sites.contains(s)).collect();
    let keep_dim = 1usize << k;
    let env_dim = 1usize << env_sites.len();

    let mut grouped = DMatrix::<C64>::zeros(keep_dim, env_dim);
    for (index, &amp) in psi.amplitudes().iter().enumerate() {
        let row = gather_bits(index, keep_sites, n);
        let col = gather_bits(index, &env_sites, n);
        grouped[(row, col)] = amp;
    }
    let rho = &grouped * grouped.adjoint();
    Ok(DensityMatrix::from_parts_unchecked(k, ComplexMatrix(rho)))
}

/// Packs the bits of `sites` out of `index`, first site most significant.
pub(crate) fn gather_bits(index: usize, sites: &[usize], n_sites: usize) -> usize {
    sites.iter().fold(0, |acc, &s| {
        (acc << 1) | usize::from(index & site_mask(s, n_sites) != 0)
    })
}

/// Pauli matrices.
pub mod pauli {
    use super::{c, ComplexMatrix};

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        let z = c(0.0, 0.0);
        ComplexMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }
}
