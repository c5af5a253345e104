//! Exact integer and rational linear algebra.
//!
//! Everything downstream (fans, cycle classes, the cone of curves) reduces to
//! the operations in this module: fraction-free determinants, saturated
//! integer kernels via Hermite normal form, exact rational solving, and LP
//! feasibility (see [`lp`]).

mod lp;

pub use lp::{lp_feasible, Constraint, Rel};

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

/// Integer vector of fixed dimension.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IntVec(pub Vec<BigInt>);

impl IntVec {
    pub fn zero(dim: usize) -> Self {
        IntVec(vec![BigInt::zero(); dim])
    }

    pub fn from_i64(entries: &[i64]) -> Self {
        IntVec(entries.iter().map(|&e| BigInt::from(e)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|e| e.is_zero())
    }

    pub fn add(&self, other: &IntVec) -> IntVec {
        assert_eq!(self.dim(), other.dim());
        IntVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &IntVec) -> IntVec {
        assert_eq!(self.dim(), other.dim());
        IntVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> IntVec {
        IntVec(self.0.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, s: &BigInt) -> IntVec {
        IntVec(self.0.iter().map(|a| a * s).collect())
    }

    pub fn dot(&self, other: &IntVec) -> BigInt {
        assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// Gcd of the entries; zero for the zero vector.
    pub fn content(&self) -> BigInt {
        self.0
            .iter()
            .fold(BigInt::zero(), |acc, e| acc.gcd(e))
    }

    /// Divides by the content, so the result has coprime entries.
    /// The zero vector is returned unchanged.
    pub fn primitive_part(&self) -> IntVec {
        let c = self.content();
        if c.is_zero() || c.is_one() {
            return self.clone();
        }
        IntVec(self.0.iter().map(|e| e / &c).collect())
    }

    pub fn to_rational(&self) -> RatVec {
        RatVec(
            self.0
                .iter()
                .map(|e| BigRational::from_integer(e.clone()))
                .collect(),
        )
    }
}

impl fmt::Debug for IntVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", e)?;
        }
        write!(f, ")")
    }
}

/// Rational vector of fixed dimension; entries are kept normalized by
/// `BigRational` itself.
#[derive(Clone, PartialEq, Eq)]
pub struct RatVec(pub Vec<BigRational>);

impl RatVec {
    pub fn zero(dim: usize) -> Self {
        RatVec(vec![BigRational::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &RatVec) -> BigRational {
        assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// Exact integer entries, if every entry has denominator one.
    pub fn to_integer(&self) -> Option<IntVec> {
        let mut out = Vec::with_capacity(self.dim());
        for e in &self.0 {
            if !e.is_integer() {
                return None;
            }
            out.push(e.to_integer());
        }
        Some(IntVec(out))
    }

    /// Least common multiple of the denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.0
            .iter()
            .fold(BigInt::one(), |acc, e| acc.lcm(e.denom()))
    }
}

impl fmt::Debug for RatVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", e)?;
        }
        write!(f, ")")
    }
}

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must be rows*cols");
        IntMatrix { rows, cols, data }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix::new(rows, cols, vec![BigInt::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Self {
        IntMatrix::new(rows, cols, entries.iter().map(|&e| BigInt::from(e)).collect())
    }

    /// Stacks the given vectors as rows. `cols` disambiguates the empty case.
    pub fn from_rows(cols: usize, rows: &[IntVec]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.dim(), cols);
            data.extend(r.0.iter().cloned());
        }
        IntMatrix::new(rows.len(), cols, data)
    }

    /// Stacks the given vectors as columns. `rows` disambiguates the empty case.
    pub fn from_columns(rows: usize, cols: &[IntVec]) -> Self {
        let mut m = IntMatrix::zero(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.dim(), rows);
            for i in 0..rows {
                m.set(i, j, c.0[i].clone());
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

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> IntVec {
        IntVec(self.data[r * self.cols..(r + 1) * self.cols].to_vec())
    }

    pub fn column(&self, c: usize) -> IntVec {
        IntVec((0..self.rows).map(|r| self.get(r, c).clone()).collect())
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul_int_vec(&self, v: &IntVec) -> IntVec {
        assert_eq!(v.dim(), self.cols);
        IntVec(
            (0..self.rows)
                .map(|r| (0..self.cols).map(|c| self.get(r, c) * &v.0[c]).sum())
                .collect(),
        )
    }

    pub fn mul_rat_vec(&self, v: &RatVec) -> RatVec {
        assert_eq!(v.dim(), self.cols);
        RatVec(
            (0..self.rows)
                .map(|r| {
                    (0..self.cols)
                        .map(|c| BigRational::from_integer(self.get(r, c).clone()) * &v.0[c])
                        .sum()
                })
                .collect(),
        )
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let v = -self.get(r, c).clone();
            self.set(r, c, v);
        }
    }

    /// row[dst] -= q * row[src]
    fn row_sub_mul(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let v = self.get(dst, c) - q * self.get(src, c);
            self.set(dst, c, v);
        }
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<BigInt, Error> {
        if self.rows != self.cols {
            return Err(Error::NonSquareMatrix {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&r| !a.get(r, k).is_zero()) {
                    Some(r) => {
                        a.swap_rows(k, r);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        Ok(sign * a.get(n - 1, n - 1))
    }

    /// Row Hermite normal form with transformation: returns `(h, u)` with
    /// `u * self == h`, `u` unimodular, pivots positive, entries above each
    /// pivot reduced into `[0, pivot)`.
    pub fn row_hermite(&self) -> (IntMatrix, IntMatrix) {
        let mut h = self.clone();
        let mut u = IntMatrix::identity(self.rows);
        let mut pivot_row = 0usize;
        for col in 0..self.cols {
            if pivot_row == self.rows {
                break;
            }
            // Clear the column below pivot_row by repeated euclidean steps.
            loop {
                let candidate = (pivot_row..self.rows)
                    .filter(|&r| !h.get(r, col).is_zero())
                    .min_by_key(|&r| (h.get(r, col).abs(), r));
                let Some(r0) = candidate else { break };
                h.swap_rows(pivot_row, r0);
                u.swap_rows(pivot_row, r0);
                let mut clean = true;
                let pivot = h.get(pivot_row, col).clone();
                for r in pivot_row + 1..self.rows {
                    if !h.get(r, col).is_zero() {
                        let q = h.get(r, col).div_floor(&pivot);
                        h.row_sub_mul(r, pivot_row, &q);
                        u.row_sub_mul(r, pivot_row, &q);
                        if !h.get(r, col).is_zero() {
                            clean = false;
                        }
                    }
                }
                if clean {
                    if h.get(pivot_row, col).is_negative() {
                        h.negate_row(pivot_row);
                        u.negate_row(pivot_row);
                    }
                    let pivot = h.get(pivot_row, col).clone();
                    for r in 0..pivot_row {
                        let q = h.get(r, col).div_floor(&pivot);
                        h.row_sub_mul(r, pivot_row, &q);
                        u.row_sub_mul(r, pivot_row, &q);
                    }
                    pivot_row += 1;
                    break;
                }
            }
        }
        (h, u)
    }

    pub fn rank(&self) -> usize {
        let (h, _) = self.row_hermite();
        (0..h.rows)
            .filter(|&r| (0..h.cols).any(|c| !h.get(r, c).is_zero()))
            .count()
    }

    /// A basis of the full integer kernel lattice `{x : self * x = 0}`.
    ///
    /// The basis is saturated (it generates the kernel lattice, not a
    /// finite-index sublattice) and canonical: the returned vectors are the
    /// nonzero rows of the Hermite normal form of the kernel.
    pub fn kernel_basis(&self) -> Vec<IntVec> {
        let at = self.transpose();
        let (h, u) = at.row_hermite();
        let mut members = Vec::new();
        for r in 0..h.rows {
            if (0..h.cols).all(|c| h.get(r, c).is_zero()) {
                members.push(u.row(r));
            }
        }
        // Canonical form of the kernel lattice.
        let stacked = IntMatrix::from_rows(self.cols, &members);
        let (hk, _) = stacked.row_hermite();
        (0..hk.rows)
            .map(|r| hk.row(r))
            .filter(|v| !v.is_zero())
            .collect()
    }

    /// Unique exact rational solution of `self * x = b`, if consistent.
    ///
    /// Panics if `self` does not have full column rank; callers are expected
    /// to pass cone bases with independent generators.
    pub fn solve_rational(&self, b: &IntVec) -> Option<RatVec> {
        assert_eq!(b.dim(), self.rows);
        let mut a: Vec<Vec<BigRational>> = (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| BigRational::from_integer(self.get(r, c).clone()))
                    .chain(std::iter::once(BigRational::from_integer(b.0[r].clone())))
                    .collect()
            })
            .collect();
        let width = self.cols + 1;
        let mut pivot_row = 0usize;
        for col in 0..self.cols {
            let Some(r0) = (pivot_row..self.rows).find(|&r| !a[r][col].is_zero()) else {
                panic!("solve_rational: matrix is rank-deficient (caller bug)");
            };
            a.swap(pivot_row, r0);
            let inv = a[pivot_row][col].recip();
            for c in col..width {
                a[pivot_row][c] = &a[pivot_row][c] * &inv;
            }
            for r in 0..self.rows {
                if r != pivot_row && !a[r][col].is_zero() {
                    let factor = a[r][col].clone();
                    for c in col..width {
                        a[r][c] = &a[r][c] - &factor * &a[pivot_row][c];
                    }
                }
            }
            pivot_row += 1;
        }
        // Any leftover rows must be identically zero for consistency.
        for r in pivot_row..self.rows {
            if !a[r][self.cols].is_zero() {
                return None;
            }
        }
        Some(RatVec((0..self.cols).map(|c| a[c][self.cols].clone()).collect()))
    }

    /// Diagonal of the Smith normal form (nonnegative, each dividing the next).
    pub fn snf_diagonal(&self) -> Vec<BigInt> {
        let mut a = self.clone();
        let mut t = 0usize;
        let n = self.rows.min(self.cols);
        while t < n {
            let mut pivot = None;
            let mut best: Option<BigInt> = None;
            for r in t..a.rows {
                for c in t..a.cols {
                    let v = a.get(r, c);
                    if !v.is_zero() && best.as_ref().map_or(true, |b| &v.abs() < b) {
                        best = Some(v.abs());
                        pivot = Some((r, c));
                    }
                }
            }
            let Some((pr, pc)) = pivot else { break };
            a.swap_rows(t, pr);
            a.swap_cols(t, pc);
            let mut dirty = false;
            let p = a.get(t, t).clone();
            for r in t + 1..a.rows {
                if !a.get(r, t).is_zero() {
                    let q = a.get(r, t).div_floor(&p);
                    a.row_sub_mul(r, t, &q);
                    if !a.get(r, t).is_zero() {
                        dirty = true;
                    }
                }
            }
            for c in t + 1..a.cols {
                if !a.get(t, c).is_zero() {
                    let q = a.get(t, c).div_floor(&p);
                    a.col_sub_mul(c, t, &q);
                    if !a.get(t, c).is_zero() {
                        dirty = true;
                    }
                }
            }
            if dirty {
                continue;
            }
            // Enforce divisibility of the remaining block by the pivot.
            let p = a.get(t, t).clone();
            let mut fixed = false;
            'outer: for r in t + 1..a.rows {
                for c in t + 1..a.cols {
                    if !(a.get(r, c) % &p).is_zero() {
                        for cc in 0..a.cols {
                            let v = a.get(t, cc) + a.get(r, cc);
                            a.set(t, cc, v);
                        }
                        fixed = true;
                        break 'outer;
                    }
                }
            }
            if fixed {
                continue;
            }
            if a.get(t, t).is_negative() {
                a.negate_row(t);
            }
            t += 1;
        }
        (0..n).map(|i| a.get(i, i).abs()).collect()
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// col[dst] -= q * col[src]
    fn col_sub_mul(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let v = self.get(r, dst) - q * self.get(r, src);
            self.set(r, dst, v);
        }
    }

    /// Exact integer inverse of a unimodular matrix, via the adjugate.
    /// Returns `None` unless the determinant is +1 or -1.
    pub fn unimodular_inverse(&self) -> Option<IntMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let d = self.det().ok()?;
        let neg = if d == BigInt::one() {
            false
        } else if d == -BigInt::one() {
            true
        } else {
            return None;
        };
        let mut inv = IntMatrix::zero(n, n);
        for i in 0..n {
            for j in 0..n {
                // adj[j][i] = (-1)^{i+j} * minor(i, j)
                let minor = self.minor(i, j);
                let mut v = minor.det().expect("minor is square");
                if (i + j) % 2 == 1 {
                    v = -v;
                }
                if neg {
                    v = -v;
                }
                inv.set(j, i, v);
            }
        }
        Some(inv)
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> IntMatrix {
        let mut data = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for r in 0..self.rows {
            if r == skip_row {
                continue;
            }
            for c in 0..self.cols {
                if c == skip_col {
                    continue;
                }
                data.push(self.get(r, c).clone());
            }
        }
        IntMatrix::new(self.rows - 1, self.cols - 1, data)
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}x{}]", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  [")?;
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(entries: &[i64]) -> IntVec {
        IntVec::from_i64(entries)
    }

    #[test]
    fn det_identity() {
        assert_eq!(IntMatrix::identity(3).det().unwrap(), BigInt::from(1));
    }

    #[test]
    fn det_unimodular_shear() {
        let m = IntMatrix::from_i64(2, 2, &[1, 0, 1, 1]);
        assert_eq!(m.det().unwrap(), BigInt::from(1));
    }

    #[test]
    fn det_diagonal_product() {
        let m = IntMatrix::from_i64(2, 2, &[2, 0, 0, 3]);
        assert_eq!(m.det().unwrap(), BigInt::from(6));
    }

    #[test]
    fn det_rejects_non_square() {
        let m = IntMatrix::from_i64(2, 3, &[1, 0, 0, 0, 1, 0]);
        assert!(matches!(m.det(), Err(Error::NonSquareMatrix { .. })));
    }

    #[test]
    fn kernel_of_p2_ray_matrix() {
        // Rays of P^2 as columns: e1, e2, -e1-e2.
        let m = IntMatrix::from_i64(2, 3, &[1, 0, -1, 0, 1, -1]);
        assert_eq!(m.kernel_basis(), vec![iv(&[1, 1, 1])]);
    }

    #[test]
    fn kernel_of_identity_is_empty() {
        assert!(IntMatrix::identity(4).kernel_basis().is_empty());
    }

    #[test]
    fn solve_identity() {
        let m = IntMatrix::identity(2);
        let x = m.solve_rational(&iv(&[2, 5])).unwrap();
        assert_eq!(x.to_integer().unwrap(), iv(&[2, 5]));
    }

    #[test]
    fn solve_shear_basis() {
        // columns (1,0) and (1,1); b = (3,1) -> (2,1)
        let m = IntMatrix::from_columns(2, &[iv(&[1, 0]), iv(&[1, 1])]);
        let x = m.solve_rational(&iv(&[3, 1])).unwrap();
        assert_eq!(x.to_integer().unwrap(), iv(&[2, 1]));
    }

    #[test]
    fn solve_inconsistent_overdetermined() {
        let m = IntMatrix::from_columns(3, &[iv(&[1, 0, 0]), iv(&[0, 1, 0])]);
        assert!(m.solve_rational(&iv(&[1, 1, 1])).is_none());
    }

    #[test]
    fn snf_of_saturated_basis_is_all_ones() {
        let m = IntMatrix::from_i64(2, 3, &[1, 0, -1, 0, 1, -1]);
        let kernel = m.kernel_basis();
        let stacked = IntMatrix::from_rows(3, &kernel);
        assert_eq!(stacked.snf_diagonal(), vec![BigInt::from(1)]);
    }

    #[test]
    fn unimodular_inverse_roundtrip() {
        let m = IntMatrix::from_i64(3, 3, &[1, 2, 0, 0, 1, 3, 0, 0, 1]);
        let inv = m.unimodular_inverse().unwrap();
        let p = |a: &IntMatrix, b: &IntMatrix| {
            let mut out = IntMatrix::zero(3, 3);
            for r in 0..3 {
                for c in 0..3 {
                    let v = (0..3).map(|k| a.get(r, k) * b.get(k, c)).sum();
                    out.set(r, c, v);
                }
            }
            out
        };
        assert_eq!(p(&m, &inv), IntMatrix::identity(3));
    }

    fn small_matrix() -> impl Strategy<Value = IntMatrix> {
        (1usize..4, 1usize..5).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-6i64..=6, r * c)
                .prop_map(move |data| IntMatrix::from_i64(r, c, &data))
        })
    }

    proptest! {
        #[test]
        fn kernel_vectors_are_exact_and_saturated(m in small_matrix()) {
            let basis = m.kernel_basis();
            for v in &basis {
                prop_assert!(m.mul_int_vec(v).is_zero());
            }
            // Rank bookkeeping: rank(kernel) == cols - rank(m).
            let stacked = IntMatrix::from_rows(m.cols(), &basis);
            prop_assert_eq!(stacked.rank(), m.cols() - m.rank());
            // Saturation: the kernel lattice has all invariant factors 1.
            if !basis.is_empty() {
                let diag = stacked.snf_diagonal();
                for d in diag.iter().take(basis.len()) {
                    prop_assert_eq!(d, &BigInt::from(1));
                }
            }
        }

        #[test]
        fn hermite_transform_is_unimodular(m in small_matrix()) {
            let (h, u) = m.row_hermite();
            // u * m == h
            for r in 0..m.rows() {
                for c in 0..m.cols() {
                    let v: BigInt = (0..m.rows()).map(|k| u.get(r, k) * m.get(k, c)).sum();
                    prop_assert_eq!(&v, h.get(r, c));
                }
            }
            prop_assert_eq!(u.det().unwrap().abs(), BigInt::from(1));
        }
    }
}
