use std::fmt;

use super::{ExactDiv, FieldOps, Ring};
use crate::error::{Error, Result};

/// Dense row-major matrix. Arithmetic takes the ring as an explicit argument.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: fmt::Debug> fmt::Debug for Matrix<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<E: Clone + PartialEq> Matrix<E> {
    pub fn filled(rows: usize, cols: usize, value: E) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<E>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn zeros<R: Ring<Elem = E>>(ring: &R, rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, ring.zero())
    }

    pub fn identity<R: Ring<Elem = E>>(ring: &R, n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { ring.one() } else { ring.zero() })
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

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> &E {
        &self.data[r * self.cols + c]
    }

    #[inline]
    pub fn get_mut(&mut self, r: usize, c: usize) -> &mut E {
        &mut self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: E) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[E] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<E> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<E>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), self.cols, |r, c| self.get(idx[r], c).clone())
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |r, c| self.get(r, idx[c]).clone())
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |r, c| self.get(rows[r], cols[c]).clone())
    }

    pub fn map<F, T: Clone>(&self, f: F) -> Matrix<T>
    where
        F: FnMut(&E) -> T,
    {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &E)> {
        let cols = self.cols;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, e)| (i / cols.max(1), i % cols.max(1), e))
    }

    /// Horizontal concatenation.
    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self.get(r, c).clone()
            } else {
                other.get(r, c - self.cols).clone()
            }
        })
    }

    pub fn mul<R: Ring<Elem = E>>(&self, ring: &R, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut out = Self::zeros(ring, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if ring.is_zero(a) {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if ring.is_zero(b) {
                        continue;
                    }
                    let v = ring.add(out.get(i, j), &ring.mul(a, b));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn add<R: Ring<Elem = E>>(&self, ring: &R, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |r, c| ring.add(self.get(r, c), rhs.get(r, c)))
    }

    pub fn sub<R: Ring<Elem = E>>(&self, ring: &R, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |r, c| ring.sub(self.get(r, c), rhs.get(r, c)))
    }

    pub fn scale<R: Ring<Elem = E>>(&self, ring: &R, s: &E) -> Self {
        self.map(|e| ring.mul(s, e))
    }

    /// Row vector times matrix.
    pub fn vec_mul<R: Ring<Elem = E>>(&self, ring: &R, v: &[E]) -> Vec<E> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![ring.zero(); self.cols];
        for (k, vk) in v.iter().enumerate() {
            if ring.is_zero(vk) {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o = ring.add(o, &ring.mul(vk, self.get(k, j)));
            }
        }
        out
    }

    pub fn is_zero<R: Ring<Elem = E>>(&self, ring: &R) -> bool {
        self.data.iter().all(|e| ring.is_zero(e))
    }

    pub fn is_identity<R: Ring<Elem = E>>(&self, ring: &R) -> bool {
        self.is_square()
            && self
                .iter()
                .all(|(r, c, e)| if r == c { *e == ring.one() } else { ring.is_zero(e) })
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref_in_place<F: FieldOps<Elem = E>>(&mut self, field: &F) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !field.is_zero(self.get(r, col))) else {
                continue;
            };
            self.swap_rows(row, p);
            let inv = field.inv(self.get(row, col)).expect("pivot is nonzero");
            for c in col..self.cols {
                let v = field.mul(self.get(row, c), &inv);
                self.set(row, c, v);
            }
            for r in 0..self.rows {
                if r == row || field.is_zero(self.get(r, col)) {
                    continue;
                }
                let factor = self.get(r, col).clone();
                for c in col..self.cols {
                    let v = field.sub(self.get(r, c), &field.mul(&factor, self.get(row, c)));
                    self.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rank<F: FieldOps<Elem = E>>(&self, field: &F) -> usize {
        let mut m = self.clone();
        m.rref_in_place(field).len()
    }

    /// Indices of a maximal set of linearly independent rows, earliest first.
    pub fn independent_rows<F: FieldOps<Elem = E>>(&self, field: &F) -> Vec<usize> {
        let mut t = self.transpose();
        t.rref_in_place(field)
    }

    /// Basis of `{x : self · x = 0}`, one vector per free column.
    pub fn null_space<F: FieldOps<Elem = E>>(&self, field: &F) -> Vec<Vec<E>> {
        let mut m = self.clone();
        let pivots = m.rref_in_place(field);
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![field.zero(); self.cols];
            v[free] = field.one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = field.neg(m.get(r, free));
            }
            basis.push(v);
        }
        basis
    }

    /// Basis of `{y : y · self = 0}`.
    pub fn left_null_space<F: FieldOps<Elem = E>>(&self, field: &F) -> Vec<Vec<E>> {
        self.transpose().null_space(field)
    }

    pub fn inverse<F: FieldOps<Elem = E>>(&self, field: &F) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::usage(format!(
                "cannot invert a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut aug = self.hstack(&Self::identity(field, n));
        let pivots = aug.rref_in_place(field);
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::SingularMatrix);
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        let rows: Vec<usize> = (0..n).collect();
        Ok(aug.submatrix(&rows, &cols))
    }

    /// Determinant by pivoted Gaussian elimination over a field.
    pub fn det<F: FieldOps<Elem = E>>(&self, field: &F) -> E {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut m = self.clone();
        let mut det = field.one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !field.is_zero(m.get(r, col))) else {
                return field.zero();
            };
            if p != col {
                m.swap_rows(p, col);
                det = field.neg(&det);
            }
            let pivot = m.get(col, col).clone();
            det = field.mul(&det, &pivot);
            let inv = field.inv(&pivot).expect("pivot is nonzero");
            for r in col + 1..n {
                if field.is_zero(m.get(r, col)) {
                    continue;
                }
                let factor = field.mul(m.get(r, col), &inv);
                for c in col..n {
                    let v = field.sub(m.get(r, c), &field.mul(&factor, m.get(col, c)));
                    m.set(r, c, v);
                }
            }
        }
        det
    }

    /// Fraction-free (Bareiss) determinant over an integral domain.
    pub fn det_bareiss<R: ExactDiv<Elem = E>>(&self, ring: &R) -> E {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return ring.one();
        }
        let mut m = self.clone();
        let mut sign_flip = false;
        let mut prev = ring.one();
        for k in 0..n - 1 {
            if ring.is_zero(m.get(k, k)) {
                let Some(p) = (k + 1..n).find(|&r| !ring.is_zero(m.get(r, k))) else {
                    return ring.zero();
                };
                m.swap_rows(k, p);
                sign_flip = !sign_flip;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = ring.sub(
                        &ring.mul(m.get(i, j), m.get(k, k)),
                        &ring.mul(m.get(i, k), m.get(k, j)),
                    );
                    m.set(i, j, ring.div_exact(&num, &prev));
                }
            }
            prev = m.get(k, k).clone();
        }
        let d = m.get(n - 1, n - 1).clone();
        if sign_flip {
            ring.neg(&d)
        } else {
            d
        }
    }
}
