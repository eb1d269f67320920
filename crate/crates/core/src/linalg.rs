//! Dense exact linear algebra over F_p.
//!
//! Everything here is exact modular arithmetic. Pivoting always takes the
//! first nonzero entry, and wherever several indices qualify the smallest
//! one is returned, so results are fully deterministic.

use std::fmt;

use thiserror::Error;

use crate::field::Field;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("entry {value} at ({row}, {col}) is not an element of F_{p}")]
    EntryOutOfRange { row: usize, col: usize, value: u32, p: u32 },
    #[error("contract violation: {0}")]
    ContractViolation(String),
}

/// Row-major dense matrix over F_p.
#[derive(Clone, PartialEq, Eq)]
pub struct FMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u32>,
    field: Field,
}

impl fmt::Debug for FMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "FMatrix {}x{} over F_{} [",
            self.rows,
            self.cols,
            self.field.modulus()
        )?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl FMatrix {
    pub fn new(field: Field, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|&v| !field.contains(v)) {
            return Err(LinalgError::EntryOutOfRange {
                row: i / cols.max(1),
                col: i % cols.max(1),
                value: data[i],
                p: field.modulus(),
            });
        }
        Ok(FMatrix {
            rows,
            cols,
            data,
            field,
        })
    }

    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        FMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
            field,
        }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from row slices; values are reduced mod p.
    pub fn from_rows(field: Field, rows: &[Vec<u32>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(LinalgError::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend(r.iter().map(|&v| v % field.modulus()));
        }
        Ok(FMatrix {
            rows: rows.len(),
            cols,
            data,
            field,
        })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    /// Sets an entry, reducing it mod p.
    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.field.modulus();
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> FMatrix {
        let mut t = FMatrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    /// Copy with row `r` and column `c` deleted.
    pub fn minor(&self, r: usize, c: usize) -> FMatrix {
        let mut data = Vec::with_capacity(self.rows.saturating_sub(1) * self.cols.saturating_sub(1));
        for i in (0..self.rows).filter(|&i| i != r) {
            for j in (0..self.cols).filter(|&j| j != c) {
                data.push(self.get(i, j));
            }
        }
        FMatrix {
            rows: self.rows - 1,
            cols: self.cols - 1,
            data,
            field: self.field,
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// `row[dst] -= factor * row[src]`
    fn eliminate(&mut self, dst: usize, src: usize, factor: u32, from_col: usize) {
        if factor == 0 {
            return;
        }
        let f = self.field;
        for c in from_col..self.cols {
            let s = self.data[src * self.cols + c];
            if s != 0 {
                let d = &mut self.data[dst * self.cols + c];
                *d = f.sub(*d, f.mul(factor, s));
            }
        }
    }

    fn scale_row(&mut self, r: usize, factor: u32) {
        let f = self.field;
        for v in &mut self.data[r * self.cols..(r + 1) * self.cols] {
            *v = f.mul(*v, factor);
        }
    }

    /// Reduces in place to reduced row echelon form over the first
    /// `pivot_cols` columns and returns the pivot column of each pivot row.
    fn rref(&mut self, pivot_cols: usize) -> Vec<usize> {
        let f = self.field;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..pivot_cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = f.inv(self.get(r, c));
            self.scale_row(r, inv);
            for i in 0..self.rows {
                if i != r {
                    let factor = self.get(i, c);
                    self.eliminate(i, r, factor, c);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Rank over F_p. Zero for empty matrices.
    pub fn rank(&self) -> usize {
        if self.is_empty() {
            return 0;
        }
        let mut m = self.clone();
        let f = self.field;
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = f.inv(m.get(r, c));
            for i in r + 1..m.rows {
                let factor = f.mul(m.get(i, c), inv);
                m.eliminate(i, r, factor, c);
            }
            r += 1;
        }
        r
    }

    /// Inverse of a square matrix, `None` when singular.
    pub fn inverse(&self) -> Option<FMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = FMatrix::zeros(self.field, n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.data[r * 2 * n + c] = self.get(r, c);
            }
            aug.data[r * 2 * n + n + r] = 1;
        }
        let pivots = aug.rref(n);
        if pivots.len() < n {
            return None;
        }
        let mut inv = FMatrix::zeros(self.field, n, n);
        for r in 0..n {
            for c in 0..n {
                inv.data[r * n + c] = aug.get(r, n + c);
            }
        }
        Some(inv)
    }
}

/// The unique way a row is expressed in terms of a full-row-rank basis:
/// `target = sum_j coeffs[j] * basis_row[lambda[j]]`, every coefficient nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DependencySolution {
    pub lambda: Vec<usize>,
    pub coeffs: Vec<u32>,
}

impl DependencySolution {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn coeff_of(&self, row: usize) -> Option<u32> {
        self.lambda.iter().position(|&r| r == row).map(|i| self.coeffs[i])
    }

    /// Evaluates the combination against `basis`, yielding the represented row.
    pub fn recombine(&self, basis: &FMatrix) -> Vec<u32> {
        let f = basis.field();
        let mut out = vec![0; basis.cols()];
        for (&r, &a) in self.lambda.iter().zip(&self.coeffs) {
            for (o, &b) in out.iter_mut().zip(basis.row(r)) {
                *o = f.add(*o, f.mul(a, b));
            }
        }
        out
    }
}

impl DependencySolution {
    /// Dependency of row `target` after row `source` (the row this solution
    /// expresses) has taken its place in the basis. From
    /// `source = a' target + sum_j a_j x_j` it follows that
    /// `target = (1/a') source - sum_j (a_j/a') x_j`. Runs in `O(len)`; the
    /// result lists rows in ascending order. `None` if `target` is not in
    /// `lambda`.
    pub fn exchange(&self, field: Field, source: usize, target: usize) -> Option<DependencySolution> {
        let inv = field.inv(self.coeff_of(target)?);
        let mut pairs: Vec<(usize, u32)> = self
            .lambda
            .iter()
            .zip(&self.coeffs)
            .filter(|(&r, _)| r != target)
            .map(|(&r, &a)| (r, field.neg(field.mul(a, inv))))
            .collect();
        pairs.push((source, inv));
        pairs.sort_by_key(|&(r, _)| r);
        Some(DependencySolution {
            lambda: pairs.iter().map(|&(r, _)| r).collect(),
            coeffs: pairs.iter().map(|&(_, a)| a).collect(),
        })
    }
}

/// Expresses `target` as a combination of the rows of `basis`.
///
/// `basis` must have full row rank (checked in debug builds). Returns
/// `Ok(None)` when `target` is outside the row space.
pub fn solve_dependency(basis: &FMatrix, target: &[u32]) -> Result<Option<DependencySolution>, LinalgError> {
    if target.len() != basis.cols() {
        return Err(LinalgError::DimensionMismatch {
            expected: basis.cols(),
            found: target.len(),
        });
    }
    debug_assert_eq!(basis.rank(), basis.rows(), "basis must have full row rank");
    let f = basis.field();
    let k = basis.rows();
    let n = basis.cols();

    // Columns of the augmented system [basis^T | target^T].
    let mut aug = FMatrix::zeros(f, n, k + 1);
    for (c, &t) in target.iter().enumerate() {
        for r in 0..k {
            aug.data[c * (k + 1) + r] = basis.get(r, c);
        }
        aug.data[c * (k + 1) + k] = t % f.modulus();
    }
    let pivots = aug.rref(k);
    // Any remaining row with a nonzero right-hand side is an inconsistency.
    if (pivots.len()..n).any(|r| aug.get(r, k) != 0) {
        return Ok(None);
    }
    if pivots.len() < k {
        return Err(LinalgError::ContractViolation(format!(
            "basis has rank {} but {} rows",
            pivots.len(),
            k
        )));
    }
    let mut sol = DependencySolution::empty();
    for (r, &c) in pivots.iter().enumerate() {
        let a = aug.get(r, k);
        if a != 0 {
            sol.lambda.push(c);
            sol.coeffs.push(a);
        }
    }
    Ok(Some(sol))
}

/// Whether adding a row `x` and a column `y` to a full-rank `k x k` system
/// raises its rank to `k + 1`, given the dependency of `x` on the basis.
///
/// `basis_col_at_y[j]` is the entry of the basis row `sol.lambda[j]` in the
/// new column. Runs in `O(|lambda|)`.
pub fn check_forward(field: Field, sol: &DependencySolution, basis_col_at_y: &[u32], t_xy: u32) -> bool {
    debug_assert_eq!(sol.lambda.len(), basis_col_at_y.len());
    let predicted = sol
        .coeffs
        .iter()
        .zip(basis_col_at_y)
        .fold(0, |acc, (&a, &t)| field.add(acc, field.mul(a, t)));
    predicted != t_xy % field.modulus()
}

/// Smallest row `x` of a full-rank square matrix such that deleting row `x`
/// and column `y_col` leaves a full-rank minor.
///
/// Uses the adjugate identity: the `(x, y_col)` minor is nonsingular iff
/// `inverse[y_col][x] != 0`, so one inversion answers every candidate.
pub fn find_removable_input(m: &FMatrix, y_col: usize) -> Result<usize, LinalgError> {
    if m.rows() != m.cols() {
        return Err(LinalgError::DimensionMismatch {
            expected: m.rows(),
            found: m.cols(),
        });
    }
    if y_col >= m.cols() {
        return Err(LinalgError::ContractViolation(format!(
            "column {y_col} out of range for {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let inv = m
        .inverse()
        .ok_or_else(|| LinalgError::ContractViolation("matrix is singular".into()))?;
    (0..m.rows())
        .find(|&x| inv.get(y_col, x) != 0)
        .ok_or_else(|| LinalgError::ContractViolation("no removable row".into()))
}
