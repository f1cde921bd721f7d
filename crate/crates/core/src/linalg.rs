//! Dense complex matrices and vectors, plus the incremental orthonormal
//! basis used for span-membership tests.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("invalid shape for {op}: expected {expected}, found {found}")]
    InvalidShape {
        op: &'static str,
        expected: String,
        found: String,
    },
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
}

fn shape_err(
    op: &'static str,
    expected: impl Into<String>,
    found: impl Into<String>,
) -> LinalgError {
    LinalgError::InvalidShape {
        op,
        expected: expected.into(),
        found: found.into(),
    }
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(shape_err(
                "new",
                "rows >= 1 and cols >= 1",
                format!("{rows}x{cols}"),
            ));
        }
        if data.len() != rows * cols {
            return Err(shape_err(
                "new",
                format!("{} entries", rows * cols),
                format!("{} entries", data.len()),
            ));
        }
        if let Some(i) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(LinalgError::NonFinite(i));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a list of rows. All rows must have the same length.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self, LinalgError> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(shape_err(
                "from_rows",
                format!("rows of length {m}"),
                format!("row of length {}", bad.len()),
            ));
        }
        Self::new(n, m, rows.into_iter().flatten().collect())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self, LinalgError> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    /// Diagonal matrix with the given real entries.
    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = C64::new(d, 0.0);
        }
        m
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: &ComplexVector, v: &ComplexVector) -> Self {
        let mut m = Self::zeros(u.dim(), v.dim());
        for i in 0..u.dim() {
            for j in 0..v.dim() {
                m.data[i * v.dim() + j] = u[i] * v[j].conj();
            }
        }
        m
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

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.data[i * self.cols + j] = z;
    }

    /// Row-major view of the entries.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.cols).map(<[C64]>::to_vec).collect()
    }

    pub fn conj_transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Result<C64, LinalgError> {
        if !self.is_square() {
            return Err(shape_err(
                "trace",
                "square matrix",
                format!("{}x{}", self.rows, self.cols),
            ));
        }
        Ok((0..self.rows).map(|i| self.data[i * self.cols + i]).sum())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(C64::norm_sqr).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.cols != rhs.rows {
            return Err(shape_err(
                "mul",
                format!("{} rows on the right", self.cols),
                format!("{}x{}", rhs.rows, rhs.cols),
            ));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> ComplexVector {
        assert_eq!(self.cols, v.dim(), "mul_vec dimension mismatch");
        let data = self
            .data
            .chunks(self.cols)
            .map(|row| row.iter().zip(v.as_slice()).map(|(a, b)| a * b).sum())
            .collect();
        ComplexVector { data }
    }

    /// `M† X M`, the congruence used by every recurrence in this crate.
    pub fn congruence(&self, inner: &Self) -> Self {
        &(&self.conj_transpose() * inner) * self
    }

    /// `<v| M |v>`.
    pub fn bilinear(&self, v: &ComplexVector) -> C64 {
        v.inner(&self.mul_vec(v))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&self.conj_transpose()) <= tol
    }

    /// `||U†U - I||_F`, or `None` for non-square input.
    pub fn unitarity_defect(&self) -> Option<f64> {
        if !self.is_square() {
            return None;
        }
        let gram = &self.conj_transpose() * self;
        Some((&gram - &Self::identity(self.rows)).frobenius_norm())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect().is_some_and(|d| d <= tol)
    }

    /// Copies the `rows x cols` block whose top-left corner is `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(
            r0 + rows <= self.rows && c0 + cols <= self.cols,
            "block out of range"
        );
        let mut out = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out.data[i * cols + j] = self.get(r0 + i, c0 + j);
            }
        }
        out
    }

    /// `P M P^T` for the permutation sending basis index `i` to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert!(
            self.is_square() && perm.len() == self.rows,
            "permutation size mismatch"
        );
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out.data[perm[i] * n + perm[j]] = self.data[i * n + j];
            }
        }
        out
    }

    /// Hermitian positive-semidefiniteness test: Cholesky of `M + tol*I`
    /// succeeds iff the smallest eigenvalue exceeds roughly `-tol`.
    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol.max(1e-12)) {
            return false;
        }
        let n = self.rows;
        let mut l = vec![ZERO; n * n];
        for j in 0..n {
            let mut d = self.get(j, j).re + tol;
            for k in 0..j {
                d -= l[j * n + k].norm_sqr();
            }
            if d <= 0.0 {
                return false;
            }
            let d = d.sqrt();
            l[j * n + j] = C64::new(d, 0.0);
            for i in j + 1..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s / d;
            }
        }
        true
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for row in self.data.chunks(self.cols) {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix sum shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.shape(),
            rhs.shape(),
            "matrix difference shape mismatch"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale(-ONE)
    }
}

/// Block-diagonal `[[a, 0], [0, b]]`.
pub fn diag_sum(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    for m in [a, b] {
        if !m.is_square() {
            return Err(shape_err(
                "diag_sum",
                "square matrix",
                format!("{}x{}", m.rows, m.cols),
            ));
        }
    }
    let (m, n) = (a.rows, b.rows);
    let mut out = ComplexMatrix::zeros(m + n, m + n);
    for i in 0..m {
        for j in 0..m {
            out.set(i, j, a.get(i, j));
        }
    }
    for i in 0..n {
        for j in 0..n {
            out.set(m + i, m + j, b.get(i, j));
        }
    }
    Ok(out)
}

/// Dense complex column vector.
#[derive(Clone, PartialEq)]
pub struct ComplexVector {
    data: Vec<C64>,
}

impl ComplexVector {
    pub fn new(data: Vec<C64>) -> Result<Self, LinalgError> {
        if data.is_empty() {
            return Err(shape_err("vector", "dim >= 1", "dim 0"));
        }
        if let Some(i) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(LinalgError::NonFinite(i));
        }
        Ok(Self { data })
    }

    pub fn from_real(xs: &[f64]) -> Result<Self, LinalgError> {
        Self::new(xs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "vector dimension must be positive");
        Self {
            data: vec![ZERO; dim],
        }
    }

    /// Standard basis vector `|i>`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[i] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(C64::norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `(self, other)` stacked into one vector.
    pub fn concat(&self, other: &Self) -> Self {
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Self { data }
    }

    /// Moves component `i` to position `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.dim(), "permutation size mismatch");
        let mut data = vec![ZERO; self.dim()];
        for (i, &z) in self.data.iter().enumerate() {
            data[perm[i]] = z;
        }
        Self { data }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for ComplexVector {
    type Output = C64;

    fn index(&self, i: usize) -> &C64 {
        &self.data[i]
    }
}

impl fmt::Debug for ComplexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(
                self.data
                    .iter()
                    .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im)),
            )
            .finish()
    }
}

/// Orthonormal basis over flattened matrices of a fixed shape, grown one
/// candidate at a time by modified Gram-Schmidt with one re-orthogonalization
/// pass. Each member carries a tag (the word that generated it).
#[derive(Debug, Clone)]
pub struct SpanBasis<T> {
    shape: (usize, usize),
    members: Vec<Vec<C64>>,
    tags: Vec<T>,
}

impl<T> SpanBasis<T> {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            shape: (rows, cols),
            members: Vec::new(),
            tags: Vec::new(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.shape.0 * self.shape.1
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn tags(&self) -> &[T] {
        &self.tags
    }

    pub fn members(&self) -> &[Vec<C64>] {
        &self.members
    }

    /// Inserts `m` unless it already lies in the span (relative residual at
    /// most `tol`). Returns `true` when `m` was in the span and the basis is
    /// unchanged.
    pub fn insert(&mut self, m: &ComplexMatrix, tag: T, tol: f64) -> Result<bool, LinalgError> {
        if m.shape() != self.shape {
            return Err(shape_err(
                "span_insert",
                format!("{}x{}", self.shape.0, self.shape.1),
                format!("{}x{}", m.rows, m.cols),
            ));
        }
        let scale = m.frobenius_norm().max(1.0);
        let mut residual = m.as_slice().to_vec();
        for _pass in 0..2 {
            for b in &self.members {
                let coeff: C64 = b.iter().zip(&residual).map(|(x, y)| x.conj() * y).sum();
                for (r, x) in residual.iter_mut().zip(b) {
                    *r -= coeff * x;
                }
            }
        }
        let norm = residual.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
        if norm <= tol * scale || self.members.len() == self.ambient_dim() {
            return Ok(true);
        }
        let inv = 1.0 / norm;
        residual.iter_mut().for_each(|z| *z *= inv);
        self.members.push(residual);
        self.tags.push(tag);
        Ok(false)
    }

    /// Largest `|<b_i, b_j> - delta_ij|` over all member pairs.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.members.iter().enumerate() {
            for (j, b) in self.members.iter().enumerate() {
                let ip: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((ip - target).norm());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn arb_matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
            ComplexMatrix::new(n, n, v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap()
        })
    }

    #[test]
    fn conj_transpose_of_row() {
        let m = ComplexMatrix::from_rows(vec![vec![c(0.0, 0.0), c(0.0, 1.0)]]).unwrap();
        let t = m.conj_transpose();
        assert_eq!(t.shape(), (2, 1));
        assert_eq!(t.get(0, 0), c(0.0, 0.0));
        assert_eq!(t.get(1, 0), c(0.0, -1.0));
        assert_eq!(
            ComplexMatrix::identity(2).conj_transpose(),
            ComplexMatrix::identity(2)
        );
    }

    #[test]
    fn diag_sum_blocks() {
        let a = ComplexMatrix::from_real_rows(&[&[2.0]]).unwrap();
        let b = ComplexMatrix::from_real_rows(&[&[3.0]]).unwrap();
        let s = diag_sum(&a, &b).unwrap();
        assert_eq!(
            s,
            ComplexMatrix::from_real_rows(&[&[2.0, 0.0], &[0.0, 3.0]]).unwrap()
        );
        let i5 = diag_sum(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3)).unwrap();
        assert_eq!(i5, ComplexMatrix::identity(5));
    }

    #[test]
    fn diag_sum_rejects_rectangular() {
        let r = ComplexMatrix::zeros(1, 2);
        assert!(matches!(
            diag_sum(&r, &ComplexMatrix::identity(1)),
            Err(LinalgError::InvalidShape { .. })
        ));
    }

    #[test]
    fn trace_cases() {
        assert_eq!(ComplexMatrix::identity(4).trace().unwrap(), c(4.0, 0.0));
        assert_eq!(ComplexMatrix::zeros(3, 3).trace().unwrap(), ZERO);
        assert!(ComplexMatrix::zeros(2, 3).trace().is_err());
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(ComplexMatrix::new(0, 1, vec![]).is_err());
        assert!(ComplexMatrix::new(1, 2, vec![ONE]).is_err());
        assert_eq!(
            ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]),
            Err(LinalgError::NonFinite(0))
        );
        assert!(ComplexVector::new(vec![]).is_err());
    }

    #[test]
    fn span_insert_examples() {
        let mut basis: SpanBasis<u32> = SpanBasis::new(2, 2);
        assert!(!basis.insert(&ComplexMatrix::identity(2), 0, 1e-9).unwrap());
        assert_eq!(basis.len(), 1);
        assert!(basis
            .insert(&ComplexMatrix::identity(2).scale(c(2.0, 0.0)), 1, 1e-9)
            .unwrap());
        assert!(basis.insert(&ComplexMatrix::zeros(2, 2), 2, 1e-9).unwrap());
        assert_eq!(basis.len(), 1);
        assert!(basis.insert(&ComplexMatrix::zeros(3, 3), 3, 1e-9).is_err());

        let mut empty: SpanBasis<()> = SpanBasis::new(2, 2);
        assert!(empty.insert(&ComplexMatrix::zeros(2, 2), (), 1e-9).unwrap());
        assert!(empty.is_empty());
    }

    #[test]
    fn psd_check() {
        assert!(ComplexMatrix::diagonal(&[0.5, 0.5]).is_positive_semidefinite(1e-10));
        assert!(ComplexMatrix::diagonal(&[1.0, 0.0]).is_positive_semidefinite(1e-10));
        assert!(!ComplexMatrix::diagonal(&[1.5, -0.5]).is_positive_semidefinite(1e-10));
    }

    proptest! {
        #[test]
        fn conj_transpose_is_involution(m in arb_matrix(3)) {
            prop_assert_eq!(m.conj_transpose().conj_transpose(), m);
        }

        #[test]
        fn trace_is_cyclic(a in arb_matrix(3), b in arb_matrix(3)) {
            let ab = (&a * &b).trace().unwrap();
            let ba = (&b * &a).trace().unwrap();
            prop_assert!((ab - ba).norm() < 1e-12);
        }

        #[test]
        fn trace_of_diag_sum(a in arb_matrix(2), b in arb_matrix(3)) {
            let s = diag_sum(&a, &b).unwrap().trace().unwrap();
            prop_assert!((s - a.trace().unwrap() - b.trace().unwrap()).norm() < 1e-12);
        }

        #[test]
        fn span_basis_stays_orthonormal(ms in prop::collection::vec(arb_matrix(2), 1..8)) {
            let mut basis = SpanBasis::new(2, 2);
            for (i, m) in ms.iter().enumerate() {
                basis.insert(m, i, 1e-9).unwrap();
                prop_assert!(basis.orthonormality_defect() <= 1e-9);
                prop_assert!(basis.len() <= basis.ambient_dim());
            }
            // idempotent: re-inserting any member never grows the basis
            let before = basis.len();
            for m in &ms {
                prop_assert!(basis.insert(m, 99, 1e-9).unwrap());
            }
            prop_assert_eq!(basis.len(), before);
        }
    }
}
