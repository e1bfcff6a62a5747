//! Symbolic simulation on affine basis labels.
//!
//! A protocol state is a uniform superposition over the randomness `r` of
//! basis states whose qudit values are affine in `(s, r)`. Each qudit carries
//! an [`AffineLabel`]; every gate in this crate maps labels to labels.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::dense::DenseState;
use crate::error::{Error, Result};
use crate::gf::{Fq, FqMatrix};

/// Sparse affine form `sum_v c_v x_v + constant`.
///
/// Variables `0..m` are the secret symbols and `m..m + num_r` the randomness.
/// Terms stay sorted by variable with no zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct AffineLabel {
    terms: Vec<(u32, u64)>,
    constant: u64,
}

impl AffineLabel {
    pub fn zero() -> Self {
        AffineLabel::default()
    }

    pub fn var(v: usize) -> Self {
        AffineLabel {
            terms: vec![(v as u32, 1)],
            constant: 0,
        }
    }

    /// Build from unsorted `(variable, coefficient)` pairs, merging repeats.
    pub fn from_terms(f: Fq, terms: impl IntoIterator<Item = (usize, u64)>, constant: u64) -> Self {
        let mut t: Vec<(u32, u64)> = terms
            .into_iter()
            .map(|(v, c)| (v as u32, f.reduce(c)))
            .collect();
        t.sort_unstable_by_key(|&(v, _)| v);
        AffineLabel {
            terms: merge_sorted(f, t),
            constant: f.reduce(constant),
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.terms.iter().map(|&(v, c)| (v as usize, c))
    }

    pub fn constant(&self) -> u64 {
        self.constant
    }

    pub fn coeff(&self, var: usize) -> u64 {
        self.terms
            .binary_search_by_key(&(var as u32), |&(v, _)| v)
            .map(|i| self.terms[i].1)
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant == 0
    }

    pub fn depends_on_secret(&self, m: usize) -> bool {
        self.terms.first().is_some_and(|&(v, _)| (v as usize) < m)
    }

    /// Dense coefficient vector over the `m` secret symbols.
    pub fn s_coeffs(&self, m: usize) -> Vec<u64> {
        let mut out = vec![0; m];
        for (v, c) in self.terms() {
            if v < m {
                out[v] = c;
            }
        }
        out
    }

    /// Dense coefficient vector over the `num_r` randomness symbols.
    pub fn r_coeffs(&self, m: usize, num_r: usize) -> Vec<u64> {
        let mut out = vec![0; num_r];
        for (v, c) in self.terms() {
            if v >= m && v - m < num_r {
                out[v - m] = c;
            }
        }
        out
    }

    /// `sum_j w_j * labels[j]`.
    pub fn combine(f: Fq, parts: &[(u64, &AffineLabel)]) -> AffineLabel {
        let mut terms = Vec::new();
        let mut constant = 0;
        for &(w, l) in parts {
            if w == 0 {
                continue;
            }
            terms.extend(l.terms.iter().map(|&(v, c)| (v, f.mul(w, c))));
            constant = f.add(constant, f.mul(w, l.constant));
        }
        terms.sort_unstable_by_key(|&(v, _)| v);
        AffineLabel {
            terms: merge_sorted(f, terms),
            constant,
        }
    }

    pub fn evaluate(&self, f: Fq, vars: &[u64]) -> u64 {
        self.terms.iter().fold(self.constant, |acc, &(v, c)| {
            f.add(acc, f.mul(c, vars[v as usize]))
        })
    }

    /// Human-readable form such as `2s1 + r3`.
    pub fn display(&self, m: usize) -> String {
        let mut parts: Vec<String> = self
            .terms()
            .map(|(v, c)| {
                let name = if v < m {
                    format!("s{}", v + 1)
                } else {
                    format!("r{}", v - m + 1)
                };
                if c == 1 {
                    name
                } else {
                    format!("{c}{name}")
                }
            })
            .collect();
        if self.constant != 0 || parts.is_empty() {
            parts.push(self.constant.to_string());
        }
        parts.join(" + ")
    }
}

fn merge_sorted(f: Fq, sorted: Vec<(u32, u64)>) -> Vec<(u32, u64)> {
    let mut out: Vec<(u32, u64)> = Vec::with_capacity(sorted.len());
    for (v, c) in sorted {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 = f.add(last.1, c),
            _ => out.push((v, c)),
        }
        if out.last().is_some_and(|l| l.1 == 0) {
            out.pop();
        }
    }
    out
}

/// Above this many coefficient cells the residual test switches from a
/// dense solve (which also yields a witness) to sparse elimination.
pub const DENSE_CHECK_CELLS: u128 = 1 << 22;

/// Whether `col(A_s)` lies in `col(A_r)` for the stacked `labels`, by
/// sparse row reduction that only ever pivots on randomness variables.
///
/// Each pivot row is keyed by its smallest randomness variable. A row that
/// loses all randomness terms while keeping a secret term raises the rank
/// of `[A_r | A_s]` above that of `A_r`, which is exactly the failure case.
pub fn span_contains_secret_part(f: Fq, m: usize, labels: &[&AffineLabel]) -> bool {
    let mut pivots: HashMap<u32, AffineLabel> = HashMap::new();
    for &label in labels {
        let mut row = label.clone();
        row.constant = 0;
        loop {
            let lead = row.terms.iter().find(|&&(v, _)| v as usize >= m).copied();
            match lead {
                None => {
                    if !row.terms.is_empty() {
                        return false;
                    }
                    break;
                }
                Some((v, c)) => match pivots.get(&v) {
                    Some(piv) => row = AffineLabel::combine(f, &[(1, &row), (f.neg(c), piv)]),
                    None => {
                        let inv = f.inv(c).expect("nonzero coefficient");
                        pivots.insert(v, AffineLabel::combine(f, &[(inv, &row)]));
                        break;
                    }
                },
            }
        }
    }
    true
}

/// Outcome of the disentanglement test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DisentanglementReport {
    pub secret_register: Vec<usize>,
    /// The register labels are exactly `s_1, ..., s_m`.
    pub secret_exact: bool,
    /// The residual labels carry no secret beyond a shift inside the
    /// randomness span, i.e. `col(A_s)` lies in `col(A_r)`.
    pub residual_factorizes: bool,
    /// `X` with `A_r X = A_s`, when one exists and both sides are nonempty.
    #[serde(skip)]
    pub witness: Option<FqMatrix>,
}

impl DisentanglementReport {
    pub fn passed(&self) -> bool {
        self.secret_exact && self.residual_factorizes
    }
}

/// Labels of every qudit in the system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicState {
    field: Fq,
    m: usize,
    num_r: usize,
    labels: Vec<AffineLabel>,
}

impl SymbolicState {
    pub fn new(q: u64, m: usize, num_r: usize, labels: Vec<AffineLabel>) -> Result<Self> {
        let field = Fq::new(q)?;
        let nv = m + num_r;
        for (i, l) in labels.iter().enumerate() {
            if let Some((v, _)) = l.terms().last() {
                if v >= nv {
                    return Err(Error::OutOfRange(format!(
                        "qudit {i} references variable {v} of {nv}"
                    )));
                }
            }
            if l.terms().any(|(_, c)| c >= q) || l.constant >= q {
                return Err(Error::OutOfRange(format!("qudit {i} has an unreduced coefficient")));
            }
        }
        Ok(SymbolicState {
            field,
            m,
            num_r,
            labels,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.field.modulus()
    }

    pub fn field(&self) -> Fq {
        self.field
    }

    pub fn num_secret(&self) -> usize {
        self.m
    }

    pub fn num_r(&self) -> usize {
        self.num_r
    }

    pub fn num_qudits(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[AffineLabel] {
        &self.labels
    }

    pub fn label(&self, qudit: usize) -> &AffineLabel {
        &self.labels[qudit]
    }

    fn check_qudit(&self, qudit: usize) -> Result<()> {
        if qudit >= self.labels.len() {
            return Err(Error::OutOfRange(format!(
                "qudit {qudit} of {}",
                self.labels.len()
            )));
        }
        Ok(())
    }

    /// Elementary gate: `label[target] += alpha * label[control]`.
    pub fn apply_l(&mut self, alpha: u64, control: usize, target: usize) -> Result<()> {
        self.check_qudit(control)?;
        self.check_qudit(target)?;
        if control == target {
            return Err(Error::SameQudit(control));
        }
        let f = self.field;
        let new = AffineLabel::combine(
            f,
            &[(1, &self.labels[target]), (f.reduce(alpha), &self.labels[control])],
        );
        self.labels[target] = new;
        Ok(())
    }

    pub fn apply_scale(&mut self, beta: u64, qudit: usize) -> Result<()> {
        self.check_qudit(qudit)?;
        let beta = self.field.reduce(beta);
        if beta == 0 {
            return Err(Error::Singular(self.modulus()));
        }
        self.labels[qudit] = AffineLabel::combine(self.field, &[(beta, &self.labels[qudit])]);
        Ok(())
    }

    pub fn apply_swap(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_qudit(a)?;
        self.check_qudit(b)?;
        if a == b {
            return Err(Error::SameQudit(a));
        }
        self.labels.swap(a, b);
        Ok(())
    }

    /// `|x> -> |K x>` on `qudits` (in that order): the new label at position
    /// `j` is `sum_t K[j][t] * old label[t]`.
    pub fn apply_uk(&mut self, k: &FqMatrix, qudits: &[usize]) -> Result<()> {
        if k.modulus() != self.modulus() {
            return Err(Error::ModulusMismatch(k.modulus(), self.modulus()));
        }
        if !k.is_square() || k.rows() != qudits.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} block on {} qudits",
                k.rows(),
                k.cols(),
                qudits.len()
            )));
        }
        for (i, &qd) in qudits.iter().enumerate() {
            self.check_qudit(qd)?;
            if qudits[..i].contains(&qd) {
                return Err(Error::DuplicateIndex(qd));
            }
        }
        if !k.is_invertible() {
            return Err(Error::Singular(self.modulus()));
        }
        let old: Vec<AffineLabel> = qudits.iter().map(|&qd| self.labels[qd].clone()).collect();
        for (j, &qd) in qudits.iter().enumerate() {
            let parts: Vec<(u64, &AffineLabel)> =
                k.row(j).iter().copied().zip(old.iter()).collect();
            self.labels[qd] = AffineLabel::combine(self.field, &parts);
        }
        Ok(())
    }

    /// Fails if any label picked up a constant term.
    pub fn assert_linear(&self) -> Result<()> {
        match self.labels.iter().position(|l| l.constant != 0) {
            Some(i) => Err(Error::InvariantViolation(format!(
                "qudit {i} has nonzero constant {}",
                self.labels[i].constant
            ))),
            None => Ok(()),
        }
    }

    /// Number of qudits whose label involves a secret symbol.
    pub fn secret_dependent_count(&self) -> usize {
        self.labels
            .iter()
            .filter(|l| l.depends_on_secret(self.m))
            .count()
    }

    /// Basis values of every qudit for concrete `s` and `r`.
    pub fn evaluate(&self, s: &[u64], r: &[u64]) -> Result<Vec<u64>> {
        if s.len() != self.m {
            return Err(Error::LengthMismatch {
                expected: self.m,
                got: s.len(),
            });
        }
        if r.len() != self.num_r {
            return Err(Error::LengthMismatch {
                expected: self.num_r,
                got: r.len(),
            });
        }
        let f = self.field;
        let vars: Vec<u64> = s.iter().chain(r).map(|&x| f.reduce(x)).collect();
        Ok(self.labels.iter().map(|l| l.evaluate(f, &vars)).collect())
    }

    /// Materialize `q^{-num_r/2} sum_r |labels(s, r)>` for a basis secret.
    pub fn expand_dense(&self, s: &[u64]) -> Result<DenseState> {
        self.expand_superposition(&[(s.to_vec(), Complex64::new(1.0, 0.0))])
    }

    /// Linear extension of [`SymbolicState::expand_dense`] over weighted
    /// basis secrets; the result is renormalized.
    pub fn expand_superposition(&self, secret: &[(Vec<u64>, Complex64)]) -> Result<DenseState> {
        let q = self.modulus();
        let mut out = DenseState::zero(q, self.labels.len())?;
        let reps = (q as u128).pow(self.num_r as u32);
        let w = 1.0 / (reps as f64).sqrt();
        let mut r = vec![0u64; self.num_r];
        for (s, amp) in secret {
            r.iter_mut().for_each(|x| *x = 0);
            loop {
                let digits = self.evaluate(s, &r)?;
                out.add_amplitude(&digits, amp * w);
                if !odometer(&mut r, q) {
                    break;
                }
            }
        }
        out.normalize()?;
        Ok(out)
    }

    /// Test whether `register` holds the secret and the rest carries none.
    pub fn check_disentanglement(&self, register: &[usize]) -> Result<DisentanglementReport> {
        if register.len() != self.m {
            return Err(Error::LengthMismatch {
                expected: self.m,
                got: register.len(),
            });
        }
        for (i, &qd) in register.iter().enumerate() {
            self.check_qudit(qd)?;
            if register[..i].contains(&qd) {
                return Err(Error::DuplicateIndex(qd));
            }
        }
        let secret_exact = register
            .iter()
            .enumerate()
            .all(|(j, &qd)| self.labels[qd] == AffineLabel::var(j));

        let mut in_register = vec![false; self.labels.len()];
        register.iter().for_each(|&qd| in_register[qd] = true);
        let residual: Vec<&AffineLabel> = self
            .labels
            .iter()
            .zip(&in_register)
            .filter(|(_, &reg)| !reg)
            .map(|(l, _)| l)
            .collect();

        let q = self.modulus();
        let s_dependent = residual.iter().any(|l| l.depends_on_secret(self.m));
        let cells = residual.len() as u128 * (self.m + self.num_r) as u128;
        let (residual_factorizes, witness) = if !s_dependent {
            (true, None)
        } else if self.num_r == 0 {
            (false, None)
        } else if cells > DENSE_CHECK_CELLS {
            (span_contains_secret_part(self.field, self.m, &residual), None)
        } else {
            let rows = residual.len();
            let mut a_r = Vec::with_capacity(rows * self.num_r);
            let mut a_s = Vec::with_capacity(rows * self.m);
            for l in &residual {
                a_r.extend(l.r_coeffs(self.m, self.num_r));
                a_s.extend(l.s_coeffs(self.m));
            }
            let a_r = FqMatrix::new(q, rows, self.num_r, a_r)?;
            let a_s = FqMatrix::new(q, rows, self.m, a_s)?;
            let x = a_r.solve_columnspace(&a_s)?;
            (x.is_some(), x)
        };
        Ok(DisentanglementReport {
            secret_register: register.to_vec(),
            secret_exact,
            residual_factorizes,
            witness,
        })
    }

    /// Value table of every label; one line per qudit.
    pub fn label_table(&self) -> Vec<String> {
        self.labels.iter().map(|l| l.display(self.m)).collect()
    }
}

impl fmt::Display for SymbolicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.labels.iter().enumerate() {
            writeln!(f, "{i:>4}: {}", l.display(self.m))?;
        }
        Ok(())
    }
}

/// Advance a little-endian base-`q` counter; false once it wraps to zero.
pub(crate) fn odometer(digits: &mut [u64], q: u64) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < q {
            return true;
        }
        *d = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f7() -> Fq {
        Fq::new(7).unwrap()
    }

    #[test]
    fn label_arithmetic() {
        let f = f7();
        let a = AffineLabel::from_terms(f, [(2, 3), (0, 1), (2, 5)], 0);
        assert_eq!(a.terms().collect::<Vec<_>>(), vec![(0, 1), (2, 1)]);
        let b = AffineLabel::var(2);
        let c = AffineLabel::combine(f, &[(1, &a), (6, &b)]);
        assert_eq!(c, AffineLabel::var(0));
        assert_eq!(c.display(1), "s1");
        assert!(AffineLabel::combine(f, &[(1, &b), (6, &b)]).is_zero());
    }

    #[test]
    fn l_gate_on_labels() {
        let mut st = SymbolicState::new(
            7,
            1,
            1,
            vec![AffineLabel::var(0), AffineLabel::var(1)],
        )
        .unwrap();
        st.apply_l(3, 0, 1).unwrap();
        assert_eq!(st.label(1).s_coeffs(1), vec![3]);
        assert_eq!(st.label(1).r_coeffs(1, 1), vec![1]);
        st.apply_l(4, 0, 1).unwrap();
        assert_eq!(st.label(1), &AffineLabel::var(1));
        assert_eq!(st.apply_l(1, 0, 0), Err(Error::SameQudit(0)));
        assert!(matches!(st.apply_l(1, 0, 5), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn uk_errors() {
        let mut st = SymbolicState::new(7, 1, 1, vec![AffineLabel::var(0), AffineLabel::var(1)]).unwrap();
        let sing = FqMatrix::from_rows(7, &[vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(st.apply_uk(&sing, &[0, 1]), Err(Error::Singular(7)));
        let k = FqMatrix::identity(7, 2).unwrap();
        assert_eq!(st.apply_uk(&k, &[1, 1]), Err(Error::DuplicateIndex(1)));
        assert!(matches!(st.apply_uk(&k, &[0]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn disentanglement_cases() {
        let f = f7();
        // register s1; residual r1 + 2 s1 and r1: s-dependence outside col(A_r)? no,
        // A_r = [1;1], A_s = [2;0] is not in the span
        let labels = vec![
            AffineLabel::var(0),
            AffineLabel::from_terms(f, [(1, 1), (0, 2)], 0),
            AffineLabel::var(1),
        ];
        let st = SymbolicState::new(7, 1, 1, labels).unwrap();
        let rep = st.check_disentanglement(&[0]).unwrap();
        assert!(rep.secret_exact);
        assert!(!rep.residual_factorizes);

        // A_r = [1;1], A_s = [2;2] lies in the span
        let labels = vec![
            AffineLabel::var(0),
            AffineLabel::from_terms(f, [(1, 1), (0, 2)], 0),
            AffineLabel::from_terms(f, [(1, 1), (0, 2)], 0),
        ];
        let st = SymbolicState::new(7, 1, 1, labels).unwrap();
        let rep = st.check_disentanglement(&[0]).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.witness.unwrap().to_rows(), vec![vec![2]]);
    }

    #[test]
    fn evaluate_and_expand() {
        let f = f7();
        let labels = vec![
            AffineLabel::from_terms(f, [(0, 1), (1, 1)], 0),
            AffineLabel::var(1),
        ];
        let st = SymbolicState::new(7, 1, 1, labels).unwrap();
        assert_eq!(st.evaluate(&[3], &[5]).unwrap(), vec![1, 5]);
        let d = st.expand_dense(&[3]).unwrap();
        assert!((d.norm() - 1.0).abs() < 1e-12);
        let nonzero = d.amplitudes().iter().filter(|a| a.norm() > 0.0).count();
        assert_eq!(nonzero, 7);
    }

    #[test]
    fn sparse_and_dense_residual_tests_agree() {
        let f = f7();
        let cases: Vec<Vec<AffineLabel>> = vec![
            vec![AffineLabel::from_terms(f, [(1, 1), (0, 2)], 0), AffineLabel::var(1)],
            vec![
                AffineLabel::from_terms(f, [(1, 1), (0, 2)], 0),
                AffineLabel::from_terms(f, [(1, 3), (0, 6)], 0),
            ],
            vec![AffineLabel::var(0)],
            vec![AffineLabel::from_terms(f, [(2, 1), (1, 1)], 0), AffineLabel::var(2)],
        ];
        for labels in cases {
            let refs: Vec<&AffineLabel> = labels.iter().collect();
            let a_r: Vec<u64> = labels.iter().flat_map(|l| l.r_coeffs(1, 2)).collect();
            let a_s: Vec<u64> = labels.iter().flat_map(|l| l.s_coeffs(1)).collect();
            let a_r = FqMatrix::new(7, labels.len(), 2, a_r).unwrap();
            let a_s = FqMatrix::new(7, labels.len(), 1, a_s).unwrap();
            let dense = a_r.solve_columnspace(&a_s).unwrap().is_some();
            assert_eq!(span_contains_secret_part(f, 1, &refs), dense, "{labels:?}");
        }
    }

    #[test]
    fn constant_is_detected() {
        let f = f7();
        let st = SymbolicState::new(7, 1, 0, vec![AffineLabel::from_terms(f, [(0, 1)], 2)]).unwrap();
        assert!(matches!(st.assert_linear(), Err(Error::InvariantViolation(_))));
    }
}
