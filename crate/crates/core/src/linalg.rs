//! Dense complex matrices and the quantum-information primitives built on
//! them: Kronecker products, partial traces, Hermitian spectra, von Neumann
//! entropy and trace distance.
//!
//! Matrices are stored row-major. Composite systems follow a single
//! left-to-right tensor-order convention; a [`DimensionList`] names the
//! subsystem dimensions in that order. All logarithms are base 2.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Maximum `|H - H†|` entry accepted before a matrix is rejected as non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as exact zeros in entropies.
pub const EIGEN_CLIP: f64 = 1e-12;
/// Eigenvalues below `-NEGATIVE_EIGEN_TOL` mean the input is not a state.
pub const NEGATIVE_EIGEN_TOL: f64 = 1e-8;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("empty shape {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real entries given in row-major order.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| re(x)).collect())
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = re(d);
        }
        m
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(ket: &[C64], bra: &[C64]) -> Self {
        let mut m = Self::zeros(ket.len(), bra.len());
        for (i, k) in ket.iter().enumerate() {
            for (j, b) in bra.iter().enumerate() {
                m.data[i * bra.len() + j] = k * b.conj();
            }
        }
        m
    }

    /// The rank-one projector `|psi⟩⟨psi|`.
    pub fn projector(psi: &[C64]) -> Self {
        Self::outer(psi, psi)
    }

    /// Computational basis projector `|i⟩⟨i|` on a `dim`-dimensional space.
    pub fn basis_projector(dim: usize, i: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        m[(i, i)] = ONE;
        m
    }

    /// Stacks column vectors into a matrix.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::Dimension("columns of unequal length".into()));
        }
        let mut m = Self::zeros(rows, cols);
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        m
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(Error::Dimension(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self> {
        u.matmul(self)?.matmul(&u.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    /// In-place `self += s * other`.
    pub fn add_scaled(&mut self, other: &Self, s: f64) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
        Ok(())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// `max |H - H†|` over entries; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        dev
    }

    /// `(H + H†) / 2`.
    pub fn symmetrized(&self) -> Self {
        let n = self.rows;
        let mut m = self.clone();
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
            }
        }
        m
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && self.is_isometry(tol)
    }

    /// `M†M = I` within `tol` (entrywise).
    pub fn is_isometry(&self, tol: f64) -> bool {
        match self.adjoint().matmul(self) {
            Ok(g) => g.max_abs_diff(&Self::identity(self.cols)).map_or(false, |d| d <= tol),
            Err(_) => false,
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "shape {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = m[(i, j)];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    /// Panics on shape mismatch; use [`ComplexMatrix::matmul`] for a checked product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out.add_scaled(rhs, 1.0).expect("matrix sum shape mismatch");
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out.add_scaled(rhs, -1.0).expect("matrix difference shape mismatch");
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Subsystem dimensions of a composite space, in tensor order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionList(Vec<usize>);

impl DimensionList {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Dimension(format!("invalid dimension list {dims:?}")));
        }
        Ok(Self(dims))
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Row-major strides: the last subsystem varies fastest.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.0.len()];
        for s in (0..self.0.len().saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * self.0[s + 1];
        }
        strides
    }

    /// Dimensions of the listed subsystems, in their original order.
    pub fn select(&self, keep: &[usize]) -> Vec<usize> {
        keep.iter().map(|&k| self.0[k]).collect()
    }
}

impl Index<usize> for DimensionList {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

/// Kronecker product: `(A⊗B)[i·rB+k, j·cB+l] = A[i,j]·B[k,l]`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a.data[i * a.cols + j];
            if aij == ZERO {
                continue;
            }
            for k in 0..b.rows {
                let row = (i * b.rows + k) * cols + j * b.cols;
                for l in 0..b.cols {
                    out.data[row + l] = aij * b.data[k * b.cols + l];
                }
            }
        }
    }
    out
}

/// Left-to-right Kronecker product of a sequence; `None` when empty.
pub fn tensor_product_all<'a, I>(factors: I) -> Option<ComplexMatrix>
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    factors.into_iter().fold(None, |acc, m| match acc {
        None => Some(m.clone()),
        Some(acc) => Some(tensor_product(&acc, m)),
    })
}

/// Kronecker product of state vectors.
pub fn tensor_vectors(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Splits every composite index into a kept part and a traced part, returning
/// the flat offsets contributed by each.
fn split_offsets(dims: &DimensionList, keep: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let strides = dims.strides();
    let traced: Vec<usize> = (0..dims.len()).filter(|s| !keep.contains(s)).collect();
    let offsets = |subs: &[usize]| -> Vec<usize> {
        let mut out = vec![0usize];
        for &s in subs {
            let mut next = Vec::with_capacity(out.len() * dims[s]);
            for &base in &out {
                for digit in 0..dims[s] {
                    next.push(base + digit * strides[s]);
                }
            }
            out = next;
        }
        out
    };
    (offsets(keep), offsets(&traced))
}

/// Reduced state on the subsystems listed in `keep`, which are returned in
/// their original relative order. An empty `keep` yields the 1x1 scalar trace.
pub fn partial_trace(rho: &ComplexMatrix, dims: &DimensionList, keep: &[usize]) -> Result<ComplexMatrix> {
    if !rho.is_square() || rho.rows != dims.total() {
        return Err(Error::Dimension(format!(
            "{}x{} matrix does not match subsystem dimensions {:?}",
            rho.rows,
            rho.cols,
            dims.as_slice()
        )));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::Dimension(format!("subsystem {bad} out of range for {} subsystems", dims.len())));
    }
    let (kept, traced) = split_offsets(dims, &keep);
    let dk = kept.len();
    let n = rho.rows;
    let mut out = ComplexMatrix::zeros(dk, dk);
    for &t in &traced {
        for (a, &ka) in kept.iter().enumerate() {
            let row = (ka + t) * n + t;
            for (b, &kb) in kept.iter().enumerate() {
                out.data[a * dk + b] += rho.data[row + kb];
            }
        }
    }
    Ok(out)
}

/// Reorders the tensor factors of a state vector: output factor `i` is input
/// factor `perm[i]`.
pub fn permute_vector(v: &[C64], dims: &DimensionList, perm: &[usize]) -> Result<(Vec<C64>, DimensionList)> {
    if v.len() != dims.total() {
        return Err(Error::Dimension(format!("vector of length {} vs dims {:?}", v.len(), dims.as_slice())));
    }
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if sorted != (0..dims.len()).collect::<Vec<_>>() {
        return Err(Error::Dimension(format!("{perm:?} is not a permutation of {} factors", dims.len())));
    }
    let new_dims = DimensionList::new(dims.select(perm))?;
    let in_strides = dims.strides();
    let mut out = vec![ZERO; v.len()];
    let mut digits = vec![0usize; perm.len()];
    for slot in out.iter_mut() {
        let src: usize = digits.iter().zip(perm).map(|(&d, &p)| d * in_strides[p]).sum();
        *slot = v[src];
        for pos in (0..digits.len()).rev() {
            digits[pos] += 1;
            if digits[pos] < new_dims[pos] {
                break;
            }
            digits[pos] = 0;
        }
    }
    Ok((out, new_dims))
}

fn check_hermitian(h: &ComplexMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", h.rows, h.cols)));
    }
    let deviation = h.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation, tolerance: HERMITIAN_TOL });
    }
    Ok(())
}

/// Eigenvalues of a Hermitian matrix in descending order.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(h)?;
    let mut vals: Vec<f64> = h.symmetrized().to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    Ok(vals)
}

/// Eigenvalues (descending) and the matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    check_hermitian(h)?;
    let eig = SymmetricEigen::new(h.symmetrized().to_nalgebra());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_nalgebra(&eig.eigenvectors.select_columns(order.iter()));
    Ok((values, vectors))
}

/// Singular values (descending) with left and right singular vectors as columns.
pub(crate) fn thin_svd(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix, ComplexMatrix) {
    let svd = m.to_nalgebra().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u = ComplexMatrix::from_nalgebra(&u.select_columns(order.iter()));
    let v = ComplexMatrix::from_nalgebra(&v_t.adjoint().select_columns(order.iter()));
    (values, u, v)
}

/// `-Σ λ log₂ λ` with eigenvalues under [`EIGEN_CLIP`] treated as zero.
pub fn spectrum_entropy(eigenvalues: &[f64]) -> f64 {
    let s: f64 = eigenvalues.iter().filter(|&&l| l > EIGEN_CLIP).map(|&l| -l * l.log2()).sum();
    s.max(0.0)
}

/// Von Neumann entropy in bits. Assumes a unit-trace input.
pub fn von_neumann_entropy(rho: &ComplexMatrix) -> Result<f64> {
    let vals = hermitian_eigenvalues(rho)?;
    let min = vals.last().copied().unwrap_or(0.0);
    if min < -NEGATIVE_EIGEN_TOL {
        return Err(Error::NotAState { min_eigenvalue: min });
    }
    Ok(spectrum_entropy(&vals).min((rho.rows as f64).log2()))
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    if rho.rows != sigma.rows || rho.cols != sigma.cols {
        return Err(Error::Dimension(format!(
            "trace distance between {}x{} and {}x{}",
            rho.rows, rho.cols, sigma.rows, sigma.cols
        )));
    }
    check_hermitian(rho)?;
    check_hermitian(sigma)?;
    let vals = hermitian_eigenvalues(&(rho - sigma))?;
    Ok(0.5 * vals.iter().map(|l| l.abs()).sum::<f64>())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityViolation {
    NotHermitian,
    TraceNotOne,
    NotPositive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport {
    pub hermitian_deviation: f64,
    pub trace_deviation: f64,
    pub min_eigenvalue: f64,
    pub violations: Vec<DensityViolation>,
}

impl DensityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "{:?} (hermitian dev {:e}, trace dev {:e}, min eigenvalue {:e})",
                self.violations, self.hermitian_deviation, self.trace_deviation, self.min_eigenvalue
            )))
        }
    }
}

/// Checks Hermiticity, unit trace and positivity, each against `tol`.
pub fn validate_density(rho: &ComplexMatrix, tol: f64) -> Result<DensityReport> {
    if !rho.is_square() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", rho.rows, rho.cols)));
    }
    let hermitian_deviation = rho.hermitian_deviation();
    let trace_deviation = (rho.trace() - ONE).norm();
    let sym = rho.symmetrized();
    let min_eigenvalue = sym.to_nalgebra().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    let mut violations = Vec::new();
    if hermitian_deviation > tol {
        violations.push(DensityViolation::NotHermitian);
    }
    if trace_deviation > tol {
        violations.push(DensityViolation::TraceNotOne);
    }
    if min_eigenvalue < -tol {
        violations.push(DensityViolation::NotPositive);
    }
    Ok(DensityReport { hermitian_deviation, trace_deviation, min_eigenvalue, violations })
}

/// Random test states and unitaries.
pub mod random {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn gaussian(rng: &mut impl Rng) -> C64 {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }

    pub fn pure_state(dim: usize, rng: &mut impl Rng) -> Vec<C64> {
        let v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|z| z / norm).collect()
    }

    /// Haar-distributed unitary via Gram-Schmidt on a complex Gaussian matrix.
    pub fn unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
        while cols.len() < dim {
            let mut v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
            for u in &cols {
                let overlap: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= overlap * y;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-8 {
                cols.push(v.into_iter().map(|z| z / norm).collect());
            }
        }
        ComplexMatrix::from_columns(&cols).expect("square by construction")
    }

    /// Random full-rank density operator `G G† / tr(G G†)`.
    pub fn density(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let g = ComplexMatrix::from_vec(dim, dim, (0..dim * dim).map(|_| gaussian(rng)).collect())
            .expect("shape matches");
        let p = &g * &g.adjoint();
        let t = p.trace().re;
        p.scale(1.0 / t)
    }
}
