//! Scheme parameters and the layout of the message matrix `M`.
//!
//! For threshold `k` there are `n = 2k - 1` parties. Recovery sets of size
//! `d_i = n - i + 1` download the first `a_i = m / (d_i - k + 1)` qudits of
//! each contacted share, where `m = lcm(m_1, ..., m_k)` is the secret length.
//! Column block `i` of `M` has width `b_i = a_i - a_{i-1}`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{is_prime, next_prime_above, vandermonde, FqMatrix};

/// Reduced fraction used for per-secret-qudit communication costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den);
        Ratio {
            num: num / g,
            den: den / g,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Every derived quantity of a `((k, 2k-1, *))` scheme.
///
/// Lists indexed by `i` are stored 0-based: `d[0]` is `d_1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeParams {
    pub k: usize,
    pub n: usize,
    pub q: u64,
    pub d: Vec<usize>,
    pub m_vec: Vec<usize>,
    pub m: usize,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    /// Evaluation point of party `u` is `points[u - 1]`.
    pub points: Vec<u64>,
    pub v: FqMatrix,
}

/// Derive parameters for threshold `k`. Without an override `q` is the
/// smallest prime above `2k - 1` and parties evaluate at `1, ..., n`.
pub fn derive_params(k: usize, q_override: Option<u64>) -> Result<SchemeParams> {
    if k == 0 {
        return Err(Error::InvalidThreshold);
    }
    let n = 2 * k - 1;
    let q = match q_override {
        Some(q) => q,
        None => next_prime_above(n as u64),
    };
    let points = (1..=n as u64).collect();
    derive_params_with_points(k, q, points)
}

/// As [`derive_params`] with explicit evaluation points.
pub fn derive_params_with_points(k: usize, q: u64, points: Vec<u64>) -> Result<SchemeParams> {
    if k == 0 {
        return Err(Error::InvalidThreshold);
    }
    let n = 2 * k - 1;
    if !is_prime(q) || q <= n as u64 {
        return Err(Error::InvalidPrime { q, bound: n as u64 });
    }
    if points.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: points.len(),
        });
    }
    let d: Vec<usize> = (1..=k).map(|i| n - i + 1).collect();
    let m_vec: Vec<usize> = d.iter().map(|&di| di - k + 1).collect();
    let m = m_vec.iter().fold(1u64, |acc, &x| lcm(acc, x as u64)) as usize;
    let a: Vec<usize> = m_vec.iter().map(|&mi| m / mi).collect();
    let b: Vec<usize> = (0..k)
        .map(|i| if i == 0 { a[0] } else { a[i] - a[i - 1] })
        .collect();
    let v = vandermonde(q, &points)?;
    Ok(SchemeParams {
        k,
        n,
        q,
        d,
        m_vec,
        m,
        a,
        b,
        points,
        v,
    })
}

impl SchemeParams {
    /// Number of randomness variables, `m (k - 1)`.
    pub fn num_r(&self) -> usize {
        self.m * (self.k - 1)
    }

    /// Total variable count; `s` variables come first, then `r`.
    pub fn num_vars(&self) -> usize {
        self.m + self.num_r()
    }

    pub fn num_qudits(&self) -> usize {
        self.n * self.m
    }

    /// Index `i` (1-based) with `d_i = d`, i.e. `2k - d`.
    pub fn block_for_d(&self, d: usize) -> Result<usize> {
        if d < self.k || d > self.n {
            return Err(Error::BadSubsetSize {
                size: d,
                min: self.k,
                max: self.n,
            });
        }
        Ok(2 * self.k - d)
    }

    /// 0-based columns of `M` in column block `i` (1-based).
    pub fn block_columns(&self, i: usize) -> std::ops::Range<usize> {
        let start = if i <= 1 { 0 } else { self.a[i - 2] };
        start..self.a[i - 1]
    }

    /// Column block (1-based) that holds 0-based column `j`.
    pub fn block_of_column(&self, j: usize) -> usize {
        self.a.iter().position(|&ai| j < ai).expect("column in range") + 1
    }

    /// Qudits downloaded when `d` parties are contacted: `a_i d_i`.
    pub fn qudits_downloaded(&self, d: usize) -> Result<usize> {
        let i = self.block_for_d(d)?;
        Ok(self.a[i - 1] * d)
    }

    /// Per-secret-qudit cost `d / (d - k + 1)`.
    pub fn cost_per_secret_qudit(&self, d: usize) -> Result<Ratio> {
        self.block_for_d(d)?;
        Ok(Ratio::new(d as u64, (d - self.k + 1) as u64))
    }
}

/// Contents of one cell of `M`. Indices are 0-based (`Secret(0)` is `s_1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Zero,
    Secret(usize),
    Rand(usize),
}

impl Cell {
    /// Global variable index, with secrets first and randomness after `m`.
    pub fn var(self, m: usize) -> Option<usize> {
        match self {
            Cell::Zero => None,
            Cell::Secret(i) => Some(i),
            Cell::Rand(i) => Some(m + i),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Zero => write!(f, "0"),
            Cell::Secret(i) => write!(f, "s{}", i + 1),
            Cell::Rand(i) => write!(f, "r{}", i + 1),
        }
    }
}

/// Placement of every `s` and `r` variable in `M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MLayout {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    cells: Vec<Cell>,
    /// `d_blocks[i - 1]` lists the `r` indices of `D_i` in column-major order.
    d_blocks: Vec<Vec<usize>>,
}

impl MLayout {
    /// Cell at 0-based `(row, col)`.
    pub fn cell(&self, row: usize, col: usize) -> Cell {
        self.cells[row * self.m + col]
    }

    pub fn column(&self, col: usize) -> Vec<Cell> {
        (0..self.n).map(|r| self.cell(r, col)).collect()
    }

    /// `r` indices of `D_i` (1-based `i`), column-major.
    pub fn d_block(&self, i: usize) -> &[usize] {
        &self.d_blocks[i - 1]
    }
}

impl fmt::Display for MLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.n {
            let row: Vec<String> = (0..self.m)
                .map(|c| format!("{:>4}", self.cell(r, c).to_string()))
                .collect();
            writeln!(f, "{}", row.join(""))?;
        }
        Ok(())
    }
}

/// Lay out `S`, the `R_i` and the `D_i` staircase.
///
/// `D_i` takes row `i` of `[R_1 ... R_i]` read left to right and fills its
/// `(k - i) x b_{i+1}` shape column by column.
pub fn build_m_layout(p: &SchemeParams) -> MLayout {
    let (k, n, m) = (p.k, p.n, p.m);
    let mut cells = vec![Cell::Zero; n * m];
    let put = |cells: &mut Vec<Cell>, r: usize, c: usize, v: Cell| cells[r * m + c] = v;

    for c in 0..p.b[0] {
        for r in 0..k {
            put(&mut cells, r, c, Cell::Secret(c * k + r));
        }
    }
    // R_i fills rows k..n of block i, column-major across the whole r vector
    for i in 1..=k {
        for c in p.block_columns(i) {
            for t in 0..k - 1 {
                put(&mut cells, k + t, c, Cell::Rand(c * (k - 1) + t));
            }
        }
    }
    let mut d_blocks = Vec::with_capacity(k.saturating_sub(1));
    for i in 1..k {
        // row i of [R_1 ... R_i] lives in M row k + i - 1 (0-based), columns 0..a_i
        let source: Vec<usize> = (0..p.a[i - 1])
            .map(|c| c * (k - 1) + (i - 1))
            .collect();
        let height = k - i;
        debug_assert_eq!(source.len(), height * p.b[i]);
        let cols: Vec<usize> = p.block_columns(i + 1).collect();
        for (e, &r) in source.iter().enumerate() {
            put(&mut cells, i + e % height, cols[e / height], Cell::Rand(r));
        }
        d_blocks.push(source);
    }
    MLayout {
        n,
        m,
        k,
        cells,
        d_blocks,
    }
}

/// `r` index (0-based) stored at 1-based cell `(t, c)` of `D_i`.
pub fn index_of_d_entry(layout: &MLayout, i: usize, t: usize, c: usize) -> Result<usize> {
    if i == 0 || i >= layout.k {
        return Err(Error::OutOfRange(format!("D block {i} for k = {}", layout.k)));
    }
    let height = layout.k - i;
    let block = &layout.d_blocks[i - 1];
    let width = block.len() / height;
    if t == 0 || t > height || c == 0 || c > width {
        return Err(Error::OutOfRange(format!(
            "cell ({t}, {c}) of a {height}x{width} D block"
        )));
    }
    Ok(block[(c - 1) * height + (t - 1)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(layout: &MLayout) -> Vec<Vec<String>> {
        (0..layout.n)
            .map(|r| (0..layout.m).map(|c| layout.cell(r, c).to_string()).collect())
            .collect()
    }

    #[test]
    fn k3_parameters() {
        let p = derive_params(3, None).unwrap();
        assert_eq!((p.n, p.q, p.m), (5, 7, 6));
        assert_eq!(p.d, vec![5, 4, 3]);
        assert_eq!(p.m_vec, vec![3, 2, 1]);
        assert_eq!(p.a, vec![2, 3, 6]);
        assert_eq!(p.b, vec![2, 1, 3]);
    }

    #[test]
    fn small_and_large_k() {
        let p = derive_params(1, None).unwrap();
        assert_eq!((p.n, p.q, p.m), (1, 2, 1));
        assert_eq!((p.d.clone(), p.a.clone(), p.b.clone()), (vec![1], vec![1], vec![1]));

        let p = derive_params(2, Some(5)).unwrap();
        assert_eq!((p.n, p.m), (3, 2));
        assert_eq!((p.d.clone(), p.a.clone(), p.b.clone()), (vec![3, 2], vec![1, 2], vec![1, 1]));

        let p = derive_params(4, Some(11)).unwrap();
        assert_eq!(p.m, 12);
        assert_eq!(p.a, vec![3, 4, 6, 12]);
        assert_eq!(p.b, vec![3, 1, 2, 6]);
    }

    #[test]
    fn bad_primes() {
        assert_eq!(
            derive_params(3, Some(5)),
            Err(Error::InvalidPrime { q: 5, bound: 5 })
        );
        assert_eq!(
            derive_params(3, Some(9)),
            Err(Error::InvalidPrime { q: 9, bound: 5 })
        );
        assert_eq!(derive_params(0, None), Err(Error::InvalidThreshold));
    }

    #[test]
    fn k3_layout_matches_worked_example() {
        let p = derive_params(3, None).unwrap();
        let l = build_m_layout(&p);
        let expected = [
            ["s1", "s4", "0", "0", "0", "0"],
            ["s2", "s5", "r1", "0", "0", "0"],
            ["s3", "s6", "r3", "r2", "r4", "r6"],
            ["r1", "r3", "r5", "r7", "r9", "r11"],
            ["r2", "r4", "r6", "r8", "r10", "r12"],
        ];
        assert_eq!(grid(&l), expected.map(|r| r.map(String::from).to_vec()).to_vec());
    }

    #[test]
    fn tiny_layouts() {
        let l = build_m_layout(&derive_params(1, None).unwrap());
        assert_eq!(grid(&l), vec![vec!["s1".to_string()]]);
        let l = build_m_layout(&derive_params(2, None).unwrap());
        let expected = [["s1", "0"], ["s2", "r1"], ["r1", "r2"]];
        assert_eq!(grid(&l), expected.map(|r| r.map(String::from).to_vec()).to_vec());
    }

    #[test]
    fn d_entries() {
        let l = build_m_layout(&derive_params(3, None).unwrap());
        assert_eq!(index_of_d_entry(&l, 1, 1, 1), Ok(0));
        assert_eq!(index_of_d_entry(&l, 2, 1, 2), Ok(3));
        assert!(index_of_d_entry(&l, 3, 1, 1).is_err());
        assert!(index_of_d_entry(&l, 2, 2, 1).is_err());

        let p = derive_params(4, None).unwrap();
        let l = build_m_layout(&p);
        // first entry of row 1 of R_1 sits at M row k + 1 (1-based), column 1
        let first = match l.cell(p.k, 0) {
            Cell::Rand(r) => r,
            other => panic!("unexpected {other}"),
        };
        assert_eq!(index_of_d_entry(&l, 1, 1, 1), Ok(first));
    }

    #[test]
    fn cost_ratio() {
        let p = derive_params(3, None).unwrap();
        assert_eq!(p.cost_per_secret_qudit(5).unwrap(), Ratio::new(5, 3));
        assert_eq!(p.cost_per_secret_qudit(4).unwrap().to_string(), "2");
        assert_eq!(p.qudits_downloaded(3).unwrap(), 18);
        assert!(p.cost_per_secret_qudit(6).is_err());
    }
}
