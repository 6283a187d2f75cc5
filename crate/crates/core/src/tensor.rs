//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Matrices are square, row-major, and indexed so that subsystem 0 is the
//! most-significant tensor factor: for qubits, bit `n - 1 - t` of a basis
//! index is the state of qubit `t`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Maximum entrywise `|m - m†|` accepted as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Reconstruction bound for eigendecompositions and matrix functions.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;
/// Eigenvalues in `[-EIGEN_CLAMP_TOL, 0)` are treated as zero.
pub const EIGEN_CLAMP_TOL: f64 = 1e-10;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense `dim x dim` complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    /// Zero matrix acting on `num_qubits` qubits.
    pub fn zeros_for_qubits(num_qubits: usize) -> Self {
        Self::zeros(1 << num_qubits)
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} entries cannot form a {dim}x{dim} matrix",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m.data[r * dim + c] = f(r, c);
            }
        }
        m
    }

    /// Builds a matrix from real rows. Panics if the rows are not square.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "rows must be square");
        Self::from_fn(dim, |r, c| Complex64::new(rows[r][c], 0.0))
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn real_diagonal(values: &[f64]) -> Self {
        let vals: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::diagonal(&vals)
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) ket.
    pub fn outer(ket: &[Complex64]) -> Self {
        Self::from_fn(ket.len(), |r, c| ket[r] * ket[c].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)])
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self[(i, i)].re).collect()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            let out_row = &mut out.data[r * n..(r + 1) * n];
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                let other_row = &other.data[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "vector length mismatch");
        (0..self.dim)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `⟨ψ|M|ψ⟩`.
    pub fn expectation(&self, ket: &[Complex64]) -> Complex64 {
        let mv = self.mul_vec(ket);
        ket.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - self†`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(m + m†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |r, c| (self[(r, c)] + self[(c, r)].conj()) * 0.5)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.adjoint()
            .matmul(self)
            .max_abs_diff(&Self::identity(self.dim))
            <= tol
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    fn from_nalgebra(m: &DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), |r, c| m[(r, c)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for c in 0..self.dim {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product with `a` as the most-significant factor.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim, b.dim);
    let n = da * db;
    let mut out = ComplexMatrix::zeros(n);
    for ar in 0..da {
        for ac in 0..da {
            let x = a[(ar, ac)];
            if x == ZERO {
                continue;
            }
            for br in 0..db {
                for bc in 0..db {
                    out.data[(ar * db + br) * n + ac * db + bc] = x * b[(br, bc)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of factors, leftmost most significant.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1), |acc, f| kron(&acc, f))
}

/// Kronecker product of kets.
pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

/// Traces out every subsystem not listed in `keep`.
///
/// `dims` lists subsystem dimensions, most significant first. Kept subsystems
/// appear in the result in their original relative order.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || total != m.dim {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dims {dims:?} do not factor a {}-dimensional matrix",
            m.dim
        )));
    }
    if keep.is_empty() {
        return Err(Error::InvalidArgument("keep set is empty".into()));
    }
    let mut kept = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() {
            return Err(Error::InvalidArgument(format!(
                "subsystem {k} out of range for {} subsystems",
                dims.len()
            )));
        }
        kept[k] = true;
    }

    // Split every full index into (kept index, traced index).
    let mut split = Vec::with_capacity(total);
    for full in 0..total {
        let (mut k_idx, mut t_idx) = (0usize, 0usize);
        let mut rem = full;
        let mut digits = vec![0usize; dims.len()];
        for s in (0..dims.len()).rev() {
            digits[s] = rem % dims[s];
            rem /= dims[s];
        }
        for s in 0..dims.len() {
            if kept[s] {
                k_idx = k_idx * dims[s] + digits[s];
            } else {
                t_idx = t_idx * dims[s] + digits[s];
            }
        }
        split.push((k_idx, t_idx));
    }
    let keep_dim: usize = (0..dims.len()).filter(|&s| kept[s]).map(|s| dims[s]).product();
    let traced_dim = total / keep_dim;

    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(keep_dim); traced_dim];
    for (full, &(k, t)) in split.iter().enumerate() {
        groups[t].push((full, k));
    }

    let mut out = ComplexMatrix::zeros(keep_dim);
    for group in &groups {
        for &(fr, kr) in group {
            for &(fc, kc) in group {
                out[(kr, kc)] += m[(fr, fc)];
            }
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V diag(f(λ)) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.vectors.dim;
        let fv: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, |r, c| {
            (0..n)
                .map(|k| self.vectors[(r, k)] * self.vectors[(c, k)].conj() * fv[k])
                .sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| l)
    }
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigen> {
    let defect = m.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(Error::NotHermitian { defect });
    }
    let n = m.dim;
    if n == 1 {
        return Ok(HermitianEigen {
            values: vec![m[(0, 0)].re],
            vectors: ComplexMatrix::identity(1),
        });
    }
    let eig = SymmetricEigen::new(m.hermitian_part().to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let raw = ComplexMatrix::from_nalgebra(&eig.eigenvectors);
    let vectors = ComplexMatrix::from_fn(n, |r, c| raw[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if m.dim == 2 {
        let defect = m.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(Error::NotHermitian { defect });
        }
        let (a, d) = (m[(0, 0)].re, m[(1, 1)].re);
        let (hi, lo) = eigenvalues_2x2(a, d, m[(0, 1)]);
        return Ok(vec![hi, lo]);
    }
    Ok(hermitian_eig(m)?.values)
}

/// Eigenvalues of `[[a, b], [b*, d]]`, larger first.
pub(crate) fn eigenvalues_2x2(a: f64, d: f64, b: Complex64) -> (f64, f64) {
    let mean = 0.5 * (a + d);
    let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    (mean + half_gap, mean - half_gap)
}

pub(crate) fn clamp_eigenvalue(l: f64) -> Result<f64> {
    if l >= 0.0 {
        Ok(l)
    } else if l >= -EIGEN_CLAMP_TOL {
        Ok(0.0)
    } else {
        Err(Error::NegativeEigenvalue { value: l })
    }
}

/// Principal square root of a Hermitian positive semidefinite matrix.
pub fn matrix_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    for &l in &eig.values {
        clamp_eigenvalue(l)?;
    }
    Ok(eig.reconstruct_with(|l| l.max(0.0).sqrt()))
}

/// Position of the bit encoding qubit `t` in an `n`-qubit basis index.
#[inline]
pub(crate) fn qubit_shift(num_qubits: usize, t: usize) -> usize {
    num_qubits - 1 - t
}

/// Basis indices touched by a local operator: for each assignment of the
/// non-target bits, the `2^k` indices obtained by varying the target bits
/// (operator index bit order: `targets[0]` most significant).
struct LocalLayout {
    offsets: Vec<usize>,
    bases: Vec<usize>,
}

impl LocalLayout {
    fn new(num_qubits: usize, targets: &[usize], op_dim: usize) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidArgument("no target qubits".into()));
        }
        if op_dim != 1 << targets.len() {
            return Err(Error::DimensionMismatch(format!(
                "operator of dimension {op_dim} cannot act on {} qubit(s)",
                targets.len()
            )));
        }
        let mut mask = 0usize;
        for &t in targets {
            if t >= num_qubits {
                return Err(Error::QubitOutOfRange {
                    index: t,
                    num_qubits,
                });
            }
            let bit = 1 << qubit_shift(num_qubits, t);
            if mask & bit != 0 {
                return Err(Error::DuplicateTarget(t));
            }
            mask |= bit;
        }
        let k = targets.len();
        let offsets = (0..1usize << k)
            .map(|s| {
                targets.iter().enumerate().fold(0, |acc, (pos, &t)| {
                    if (s >> (k - 1 - pos)) & 1 == 1 {
                        acc | 1 << qubit_shift(num_qubits, t)
                    } else {
                        acc
                    }
                })
            })
            .collect();
        let bases = (0..1usize << num_qubits)
            .filter(|i| i & mask == 0)
            .collect();
        Ok(Self { offsets, bases })
    }
}

fn num_qubits_of(dim: usize) -> Result<usize> {
    if !dim.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// `m <- O m`, with `O` acting on `targets` and identity elsewhere.
pub fn left_apply_local(m: &mut ComplexMatrix, op: &ComplexMatrix, targets: &[usize]) -> Result<()> {
    let n = num_qubits_of(m.dim)?;
    let layout = LocalLayout::new(n, targets, op.dim)?;
    let d = m.dim;
    let k = op.dim;
    let mut gathered = vec![ZERO; k];
    for &base in &layout.bases {
        for col in 0..d {
            for (s, off) in layout.offsets.iter().enumerate() {
                gathered[s] = m.data[(base | off) * d + col];
            }
            for (s, off) in layout.offsets.iter().enumerate() {
                let row = op.row(s);
                m.data[(base | off) * d + col] =
                    row.iter().zip(&gathered).map(|(a, b)| a * b).sum();
            }
        }
    }
    Ok(())
}

/// `m <- m O†`, with `O` acting on `targets` and identity elsewhere.
pub fn right_apply_local_adjoint(
    m: &mut ComplexMatrix,
    op: &ComplexMatrix,
    targets: &[usize],
) -> Result<()> {
    let n = num_qubits_of(m.dim)?;
    let layout = LocalLayout::new(n, targets, op.dim)?;
    let d = m.dim;
    let k = op.dim;
    let mut gathered = vec![ZERO; k];
    for row in 0..d {
        let row_data = &mut m.data[row * d..(row + 1) * d];
        for &base in &layout.bases {
            for (s, off) in layout.offsets.iter().enumerate() {
                gathered[s] = row_data[base | off];
            }
            for (s, off) in layout.offsets.iter().enumerate() {
                let op_row = op.row(s);
                row_data[base | off] = op_row
                    .iter()
                    .zip(&gathered)
                    .map(|(a, b)| a.conj() * b)
                    .sum();
            }
        }
    }
    Ok(())
}

/// `m <- O m O†` for a local operator.
pub fn conjugate_local(m: &mut ComplexMatrix, op: &ComplexMatrix, targets: &[usize]) -> Result<()> {
    left_apply_local(m, op, targets)?;
    right_apply_local_adjoint(m, op, targets)
}

/// `v <- O v` for a ket over qubits.
pub fn apply_local_to_ket(v: &mut [Complex64], op: &ComplexMatrix, targets: &[usize]) -> Result<()> {
    let n = num_qubits_of(v.len())?;
    let layout = LocalLayout::new(n, targets, op.dim)?;
    let mut gathered = vec![ZERO; op.dim];
    for &base in &layout.bases {
        for (s, off) in layout.offsets.iter().enumerate() {
            gathered[s] = v[base | off];
        }
        for (s, off) in layout.offsets.iter().enumerate() {
            v[base | off] = op.row(s).iter().zip(&gathered).map(|(a, b)| a * b).sum();
        }
    }
    Ok(())
}

/// Full `2^n`-dimensional matrix of a local operator.
pub fn embed(op: &ComplexMatrix, targets: &[usize], num_qubits: usize) -> Result<ComplexMatrix> {
    let mut m = ComplexMatrix::identity(1 << num_qubits);
    left_apply_local(&mut m, op, targets)?;
    Ok(m)
}

/// Returns a copy of `m` with qubits reordered so that new qubit `i` is old
/// qubit `order[i]`.
pub fn permute_qubits(m: &ComplexMatrix, order: &[usize]) -> Result<ComplexMatrix> {
    let n = num_qubits_of(m.dim)?;
    if order.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "permutation of length {} for {n} qubits",
            order.len()
        )));
    }
    let mut seen = vec![false; n];
    for &o in order {
        if o >= n {
            return Err(Error::QubitOutOfRange {
                index: o,
                num_qubits: n,
            });
        }
        if seen[o] {
            return Err(Error::DuplicateTarget(o));
        }
        seen[o] = true;
    }
    let map: Vec<usize> = (0..m.dim)
        .map(|new_idx| {
            (0..n).fold(0, |acc, i| {
                let bit = (new_idx >> qubit_shift(n, i)) & 1;
                acc | bit << qubit_shift(n, order[i])
            })
        })
        .collect();
    Ok(ComplexMatrix::from_fn(m.dim, |r, c| m[(map[r], map[c])]))
}
