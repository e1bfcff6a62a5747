//! Prime-field arithmetic and exact dense linear algebra over F_q.
//!
//! Matrices carry their modulus; combining matrices over different fields is
//! an error rather than a silent reduction. Every elimination routine uses the
//! same pivot rule (first nonzero entry scanning downward) so that inverses,
//! factorizations and compiled gate programs are reproducible bit for bit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(q: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if q < 2 {
        return false;
    }
    for p in BASES {
        if q.is_multiple_of(p) {
            return q == p;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % q as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    let s = (q - 1).trailing_zeros();
    let d = (q - 1) >> s;
    'witness: for a in BASES {
        let mut x = powmod(a, d);
        if x == 1 || x == q - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == q - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime strictly greater than `x`.
pub fn next_prime_above(x: u64) -> u64 {
    let mut c = x + 1;
    while !is_prime(c) {
        c += 1;
    }
    c
}

/// Arithmetic context for F_q. Values are raw `u64` residues in `[0, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fq {
    q: u64,
}

impl Fq {
    pub fn new(q: u64) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        Ok(Fq { q })
    }

    #[inline]
    pub fn modulus(self) -> u64 {
        self.q
    }

    #[inline]
    pub fn reduce(self, x: u64) -> u64 {
        x % self.q
    }

    /// Reduce a signed integer into `[0, q)`.
    #[inline]
    pub fn from_i64(self, x: i64) -> u64 {
        x.rem_euclid(self.q as i64) as u64
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        (s % self.q as u128) as u64
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.q - (b - a)
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        if self.q <= u32::MAX as u64 {
            a * b % self.q
        } else {
            ((a as u128 * b as u128) % self.q as u128) as u64
        }
    }

    pub fn pow(self, base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.q;
        let mut b = base % self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(self, a: u64) -> Result<u64> {
        let a = a % self.q;
        if a == 0 {
            return Err(Error::ZeroInverse);
        }
        let (mut old_r, mut r) = (a as i128, self.q as i128);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let quot = old_r / r;
            (old_r, r) = (r, old_r - quot * r);
            (old_s, s) = (s, old_s - quot * s);
        }
        debug_assert_eq!(old_r, 1);
        Ok(old_s.rem_euclid(self.q as i128) as u64)
    }
}

/// A single element of F_q that remembers its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    modulus: u64,
}

// Mixed moduli are an error, so these cannot be the `std::ops` traits.
#[allow(clippy::should_implement_trait)]
impl FieldElement {
    pub fn new(value: u64, modulus: u64) -> Result<Self> {
        let f = Fq::new(modulus)?;
        Ok(FieldElement {
            value: f.reduce(value),
            modulus,
        })
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    fn field(self) -> Fq {
        Fq { q: self.modulus }
    }

    fn same_field(self, other: Self) -> Result<Fq> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(self.modulus, other.modulus));
        }
        Ok(self.field())
    }

    pub fn add(self, other: Self) -> Result<Self> {
        let f = self.same_field(other)?;
        Ok(FieldElement {
            value: f.add(self.value, other.value),
            modulus: self.modulus,
        })
    }

    pub fn sub(self, other: Self) -> Result<Self> {
        let f = self.same_field(other)?;
        Ok(FieldElement {
            value: f.sub(self.value, other.value),
            modulus: self.modulus,
        })
    }

    pub fn mul(self, other: Self) -> Result<Self> {
        let f = self.same_field(other)?;
        Ok(FieldElement {
            value: f.mul(self.value, other.value),
            modulus: self.modulus,
        })
    }

    pub fn inverse(self) -> Result<Self> {
        field_inverse(self)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// `x^{-1}` in F_q; fails with [`Error::ZeroInverse`] for `x = 0`.
pub fn field_inverse(x: FieldElement) -> Result<FieldElement> {
    Ok(FieldElement {
        value: x.field().inv(x.value)?,
        modulus: x.modulus,
    })
}

/// Dense row-major matrix over F_q.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FqMatrix {
    q: u64,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

/// `P·A = L·U` with `L` unit lower triangular and `U` upper triangular.
///
/// `perm[i]` is the row of `A` that ends up in row `i` of `P·A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plu {
    pub perm: Vec<usize>,
    pub l: FqMatrix,
    pub u: FqMatrix,
}

impl Plu {
    pub fn p(&self) -> FqMatrix {
        let n = self.perm.len();
        let mut p = FqMatrix::zeros(self.l.q, n, n);
        for (i, &src) in self.perm.iter().enumerate() {
            p.set(i, src, 1);
        }
        p
    }
}

impl FqMatrix {
    /// Build from row-major data; entries are reduced mod q.
    pub fn new(q: u64, rows: usize, cols: usize, data: Vec<u64>) -> Result<Self> {
        let f = Fq::new(q)?;
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        let data = data.into_iter().map(|x| f.reduce(x)).collect();
        Ok(FqMatrix {
            q,
            rows,
            cols,
            data,
        })
    }

    pub fn from_rows(q: u64, rows: &[Vec<u64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        FqMatrix::new(q, r, c, rows.concat())
    }

    /// Unchecked constructor for internal callers that already hold a valid field.
    pub(crate) fn zeros(q: u64, rows: usize, cols: usize) -> Self {
        FqMatrix {
            q,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(q: u64, n: usize) -> Result<Self> {
        Fq::new(q)?;
        if n == 0 {
            return Err(Error::DimensionMismatch("identity of size 0".into()));
        }
        let mut m = FqMatrix::zeros(q, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        Ok(m)
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn field(&self) -> Fq {
        Fq { q: self.q }
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

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub(crate) fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn element(&self, r: usize, c: usize) -> FieldElement {
        FieldElement {
            value: self.get(r, c),
            modulus: self.q,
        }
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|r| (0..self.cols).all(|c| self.get(r, c) == u64::from(r == c)))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> FqMatrix {
        let mut t = FqMatrix::zeros(self.q, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// Submatrix keeping the listed rows and columns (0-based, in the given order).
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Result<FqMatrix> {
        if rows.is_empty() || cols.is_empty() {
            return Err(Error::DimensionMismatch("empty selection".into()));
        }
        if let Some(&r) = rows.iter().find(|&&r| r >= self.rows) {
            return Err(Error::OutOfRange(format!("row {r} of {}", self.rows)));
        }
        if let Some(&c) = cols.iter().find(|&&c| c >= self.cols) {
            return Err(Error::OutOfRange(format!("column {c} of {}", self.cols)));
        }
        let mut out = FqMatrix::zeros(self.q, rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                out.set(i, j, self.get(r, c));
            }
        }
        Ok(out)
    }

    /// Stack `self` on top of `below`.
    pub fn vstack(&self, below: &FqMatrix) -> Result<FqMatrix> {
        self.check_field(below)?;
        if self.cols != below.cols {
            return Err(Error::DimensionMismatch(format!(
                "vstack of {} and {} columns",
                self.cols, below.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&below.data);
        Ok(FqMatrix {
            q: self.q,
            rows: self.rows + below.rows,
            cols: self.cols,
            data,
        })
    }

    fn check_field(&self, other: &FqMatrix) -> Result<()> {
        if self.q != other.q {
            return Err(Error::ModulusMismatch(self.q, other.q));
        }
        Ok(())
    }

    /// Matrix product over F_q.
    pub fn mul(&self, rhs: &FqMatrix) -> Result<FqMatrix> {
        self.check_field(rhs)?;
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let f = self.field();
        let mut out = FqMatrix::zeros(self.q, self.rows, rhs.cols);
        for i in 0..self.rows {
            for t in 0..self.cols {
                let a = self.get(i, t);
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let cur = out.get(i, j);
                    out.set(i, j, f.add(cur, f.mul(a, rhs.get(t, j))));
                }
            }
        }
        Ok(out)
    }

    /// Product with a column vector given as a slice.
    pub fn mul_vec(&self, x: &[u64]) -> Result<Vec<u64>> {
        if x.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        let f = self.field();
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, f.reduce(b))))
            })
            .collect())
    }

    /// Inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<FqMatrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "inverse of non-square {}x{}",
                self.rows, self.cols
            )));
        }
        let id = FqMatrix::identity(self.q, self.rows)?;
        let mut aug = Augmented::new(self, &id);
        let pivots = aug.reduce();
        if pivots.len() < self.rows {
            return Err(Error::Singular(self.q));
        }
        Ok(aug.right())
    }

    pub fn rank(&self) -> usize {
        let mut aug = Augmented::new(self, &FqMatrix::zeros(self.q, self.rows, 1));
        aug.reduce().len()
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// Find `X` with `self · X = rhs`, or `None` when some column of `rhs`
    /// leaves the column space of `self`. Free variables are set to zero.
    pub fn solve_columnspace(&self, rhs: &FqMatrix) -> Result<Option<FqMatrix>> {
        self.check_field(rhs)?;
        if self.rows != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "solve with {} rows against {} rows",
                self.rows, rhs.rows
            )));
        }
        let mut aug = Augmented::new(self, rhs);
        let pivots = aug.reduce();
        // rows below the pivots have a zero left block; their right block must vanish
        for r in pivots.len()..self.rows {
            if aug.row(r)[self.cols..].iter().any(|&v| v != 0) {
                return Ok(None);
            }
        }
        let mut x = FqMatrix::zeros(self.q, self.cols, rhs.cols);
        for (r, &pc) in pivots.iter().enumerate() {
            for j in 0..rhs.cols {
                x.set(pc, j, aug.row(r)[self.cols + j]);
            }
        }
        Ok(Some(x))
    }

    /// PLU factorization of a square matrix with first-nonzero partial pivoting.
    /// Singular inputs still factor; their `U` carries a zero on the diagonal.
    pub fn plu(&self) -> Result<Plu> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("PLU of non-square matrix".into()));
        }
        let n = self.rows;
        let f = self.field();
        let mut u = self.clone();
        let mut l = FqMatrix::zeros(self.q, n, n);
        let mut perm: Vec<usize> = (0..n).collect();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| u.get(r, c) != 0) else {
                continue;
            };
            if p != c {
                u.swap_rows(p, c);
                l.swap_rows(p, c);
                perm.swap(p, c);
            }
            let inv = f.inv(u.get(c, c))?;
            for r in c + 1..n {
                let v = u.get(r, c);
                if v == 0 {
                    continue;
                }
                let factor = f.mul(v, inv);
                l.set(r, c, factor);
                for j in c..n {
                    let cur = u.get(r, j);
                    u.set(r, j, f.sub(cur, f.mul(factor, u.get(c, j))));
                }
            }
        }
        for i in 0..n {
            l.set(i, i, 1);
        }
        Ok(Plu { perm, l, u })
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

impl fmt::Display for FqMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(u64::to_string).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// `[A | B]` reduced in place to reduced row echelon form in the `A` block.
struct Augmented {
    f: Fq,
    left: usize,
    width: usize,
    rows: Vec<Vec<u64>>,
}

impl Augmented {
    fn new(a: &FqMatrix, b: &FqMatrix) -> Self {
        let width = a.cols + b.cols;
        let rows = (0..a.rows)
            .map(|r| {
                let mut row = Vec::with_capacity(width);
                row.extend_from_slice(a.row(r));
                row.extend_from_slice(b.row(r));
                row
            })
            .collect();
        Augmented {
            f: a.field(),
            left: a.cols,
            width,
            rows,
        }
    }

    fn row(&self, r: usize) -> &[u64] {
        &self.rows[r]
    }

    /// Returns the pivot column of each leading row. Rows past the pivots
    /// have an all-zero left block.
    fn reduce(&mut self) -> Vec<usize> {
        let f = self.f;
        let mut pivots = Vec::new();
        let mut next = 0;
        for c in 0..self.left {
            if next == self.rows.len() {
                break;
            }
            let Some(p) = (next..self.rows.len()).find(|&r| self.rows[r][c] != 0) else {
                continue;
            };
            self.rows.swap(p, next);
            let inv = f.inv(self.rows[next][c]).expect("pivot is nonzero");
            if inv != 1 {
                for v in &mut self.rows[next][c..] {
                    *v = f.mul(*v, inv);
                }
            }
            let pivot_row = std::mem::take(&mut self.rows[next]);
            let support: Vec<usize> = (c..self.width).filter(|&j| pivot_row[j] != 0).collect();
            for (r, row) in self.rows.iter_mut().enumerate() {
                if r == next {
                    continue;
                }
                let factor = row[c];
                if factor == 0 {
                    continue;
                }
                for &j in &support {
                    row[j] = f.sub(row[j], f.mul(factor, pivot_row[j]));
                }
            }
            self.rows[next] = pivot_row;
            pivots.push(c);
            next += 1;
        }
        pivots
    }

    fn right(&self) -> FqMatrix {
        let cols = self.width - self.left;
        let mut out = FqMatrix::zeros(self.f.modulus(), self.rows.len(), cols);
        for (r, row) in self.rows.iter().enumerate() {
            for j in 0..cols {
                out.set(r, j, row[self.left + j]);
            }
        }
        out
    }
}

/// Square Vandermonde matrix with entry `(u, j) = points[u]^j` (0-based `j`).
///
/// Points must be distinct and nonzero, so at most `q - 1` of them fit.
pub fn vandermonde(q: u64, points: &[u64]) -> Result<FqMatrix> {
    let f = Fq::new(q)?;
    let n = points.len();
    if n == 0 {
        return Err(Error::DimensionMismatch("vandermonde of zero points".into()));
    }
    if n as u64 > q - 1 {
        return Err(Error::FieldTooSmall { n, q });
    }
    let reduced: Vec<u64> = points.iter().map(|&p| f.reduce(p)).collect();
    if reduced.contains(&0) {
        return Err(Error::ZeroPoint);
    }
    for (i, a) in reduced.iter().enumerate() {
        if reduced[i + 1..].contains(a) {
            return Err(Error::DuplicatePoints);
        }
    }
    let mut v = FqMatrix::zeros(q, n, n);
    for (u, &p) in reduced.iter().enumerate() {
        let mut acc = 1;
        for j in 0..n {
            v.set(u, j, acc);
            acc = f.mul(acc, p);
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fe(v: u64, q: u64) -> FieldElement {
        FieldElement::new(v, q).unwrap()
    }

    // brute-force scan of F_q for the inverse
    fn scan_inverse(x: u64, q: u64) -> u64 {
        (1..q).find(|y| x * y % q == 1).unwrap()
    }

    fn schoolbook(a: &FqMatrix, b: &FqMatrix) -> Vec<u64> {
        let q = a.modulus();
        let mut out = vec![0; a.rows() * b.cols()];
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut s = 0;
                for t in 0..a.cols() {
                    s += a.get(i, t) * b.get(t, j);
                }
                out[i * b.cols() + j] = s % q;
            }
        }
        out
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(field_inverse(fe(1, 7)).unwrap().value(), 1);
        assert_eq!(field_inverse(fe(3, 7)).unwrap().value(), scan_inverse(3, 7));
        assert_eq!(field_inverse(fe(3, 7)).unwrap().value(), 5);
        assert_eq!(field_inverse(fe(4, 5)).unwrap().value(), scan_inverse(4, 5));
        assert_eq!(field_inverse(fe(4, 5)).unwrap().value(), 4);
        assert_eq!(field_inverse(fe(0, 7)), Err(Error::ZeroInverse));
    }

    #[test]
    fn mixed_moduli_rejected() {
        assert_eq!(fe(1, 5).add(fe(1, 7)), Err(Error::ModulusMismatch(5, 7)));
        let a = FqMatrix::identity(5, 2).unwrap();
        let b = FqMatrix::identity(7, 2).unwrap();
        assert!(matches!(a.mul(&b), Err(Error::ModulusMismatch(5, 7))));
        assert!(FieldElement::new(3, 9).is_err());
    }

    #[test]
    fn identity_product() {
        let b = FqMatrix::from_rows(7, &[vec![1, 2, 3], vec![4, 5, 6]]).unwrap();
        let i2 = FqMatrix::identity(7, 2).unwrap();
        assert_eq!(i2.mul(&b).unwrap(), b);
        let a = FqMatrix::identity(7, 3).unwrap();
        assert!(matches!(a.mul(&b), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn product_matches_schoolbook() {
        let a = FqMatrix::new(7, 4, 4, vec![3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7, 9, 3]).unwrap();
        let b = FqMatrix::new(7, 4, 4, vec![2, 7, 1, 8, 2, 8, 1, 8, 2, 8, 4, 5, 9, 0, 4, 5]).unwrap();
        assert_eq!(a.mul(&b).unwrap().data(), schoolbook(&a, &b).as_slice());
    }

    #[test]
    fn k3_vandermonde_over_f7() {
        let v = vandermonde(7, &[1, 2, 3, 4, 5]).unwrap();
        assert_eq!(
            v.to_rows(),
            vec![
                vec![1, 1, 1, 1, 1],
                vec![1, 2, 4, 1, 2],
                vec![1, 3, 2, 6, 4],
                vec![1, 4, 2, 1, 4],
                vec![1, 5, 4, 6, 2],
            ]
        );
        let inv = v.inverse().unwrap();
        assert!(v.mul(&inv).unwrap().is_identity());
        assert!(inv.mul(&v).unwrap().is_identity());
    }

    #[test]
    fn small_vandermonde_cases() {
        assert_eq!(vandermonde(2, &[1]).unwrap().to_rows(), vec![vec![1]]);
        let v = vandermonde(5, &[1, 2, 3]).unwrap();
        assert_eq!(v.to_rows(), vec![vec![1, 1, 1], vec![1, 2, 4], vec![1, 3, 4]]);
        assert!(v.is_invertible());
        assert_eq!(vandermonde(7, &[1, 2, 1]), Err(Error::DuplicatePoints));
        assert_eq!(
            vandermonde(5, &[1, 2, 3, 4, 6]),
            Err(Error::FieldTooSmall { n: 5, q: 5 })
        );
        assert_eq!(vandermonde(7, &[0, 1]), Err(Error::ZeroPoint));
    }

    #[test]
    fn inverse_edge_cases() {
        let i3 = FqMatrix::identity(7, 3).unwrap();
        assert_eq!(i3.inverse().unwrap(), i3);
        let rank1 = FqMatrix::from_rows(7, &[vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(rank1.inverse(), Err(Error::Singular(7)));
        assert_eq!(rank1.rank(), 1);
    }

    #[test]
    fn solve_trivial_cases() {
        let a = FqMatrix::from_rows(7, &[vec![1, 2], vec![3, 4], vec![5, 6]]).unwrap();
        let zero = FqMatrix::zeros(7, 3, 2);
        let x = a.solve_columnspace(&zero).unwrap().unwrap();
        assert!(x.is_zero());
        let id = FqMatrix::identity(7, 3).unwrap();
        let b = FqMatrix::from_rows(7, &[vec![1, 0], vec![2, 5], vec![6, 6]]).unwrap();
        assert_eq!(id.solve_columnspace(&b).unwrap().unwrap(), b);
        // e_1 is outside the span of a single column (1, 1, 1)
        let ones = FqMatrix::from_rows(7, &[vec![1], vec![1], vec![1]]).unwrap();
        let e1 = FqMatrix::from_rows(7, &[vec![1], vec![0], vec![0]]).unwrap();
        assert_eq!(ones.solve_columnspace(&e1).unwrap(), None);
    }

    #[test]
    fn solve_from_known_solution() {
        // 6x4 with full column rank over F_7, B = A X0
        let a = FqMatrix::new(
            7,
            6,
            4,
            vec![1, 0, 2, 3, 0, 1, 4, 4, 2, 2, 1, 0, 3, 5, 6, 1, 1, 1, 1, 1, 0, 6, 2, 5],
        )
        .unwrap();
        assert_eq!(a.rank(), 4);
        let x0 = FqMatrix::new(7, 4, 2, vec![1, 2, 3, 4, 5, 6, 0, 1]).unwrap();
        let b = a.mul(&x0).unwrap();
        let x = a.solve_columnspace(&b).unwrap().unwrap();
        assert_eq!(a.mul(&x).unwrap(), b);
    }

    #[test]
    fn plu_reconstructs() {
        let a = FqMatrix::from_rows(7, &[vec![0, 2, 1], vec![3, 1, 0], vec![6, 2, 5]]).unwrap();
        let plu = a.plu().unwrap();
        assert_eq!(plu.perm, vec![1, 0, 2]);
        let pa = plu.p().mul(&a).unwrap();
        assert_eq!(pa, plu.l.mul(&plu.u).unwrap());
        for r in 0..3 {
            assert_eq!(plu.l.get(r, r), 1);
            for c in r + 1..3 {
                assert_eq!(plu.l.get(r, c), 0);
                assert_eq!(plu.u.get(c, r), 0);
            }
        }
    }

    #[test]
    fn primes() {
        let small: Vec<u64> = (0..30).filter(|&x| is_prime(x)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(next_prime_above(5), 7);
        assert_eq!(next_prime_above(7), 11);
        assert_eq!(next_prime_above(9), 11);
        assert!(is_prime(18446744073709551557));
        let f = Fq::new(18446744073709551557).unwrap();
        let x = 12345678901234567890 % f.modulus();
        assert_eq!(f.mul(x, f.inv(x).unwrap()), 1);
    }
}
