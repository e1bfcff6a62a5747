//! Share construction: `C = V M`, one row of `C` per party.
//!
//! Qudits are numbered party-major, so qudit `(u, j)` (both 1-based) has
//! global index `(u - 1) m + (j - 1)`.

use num_complex::Complex64;

use crate::dense::{check_budget, DenseState, NORM_TOL};
use crate::error::{Error, Result};
use crate::params::{build_m_layout, SchemeParams};
use crate::state::{AffineLabel, SymbolicState};

/// Party-major qudit numbering for `n` shares of `m` qudits each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShareLayout {
    pub n: usize,
    pub m: usize,
}

impl ShareLayout {
    pub fn new(p: &SchemeParams) -> Self {
        ShareLayout { n: p.n, m: p.m }
    }

    /// Global index of qudit `j` of party `u` (both 1-based).
    pub fn qudit(&self, u: usize, j: usize) -> usize {
        debug_assert!((1..=self.n).contains(&u) && (1..=self.m).contains(&j));
        (u - 1) * self.m + (j - 1)
    }

    /// Inverse of [`ShareLayout::qudit`].
    pub fn party_pos(&self, qudit: usize) -> (usize, usize) {
        (qudit / self.m + 1, qudit % self.m + 1)
    }

    /// All `m` qudits of party `u`.
    pub fn share(&self, u: usize) -> Vec<usize> {
        (1..=self.m).map(|j| self.qudit(u, j)).collect()
    }
}

/// A secret given either as one basis vector or as amplitudes over all
/// `q^m` basis vectors (big-endian, `s_1` most significant).
#[derive(Debug, Clone, PartialEq)]
pub enum SecretSpec {
    Basis(Vec<u64>),
    Superposition(Vec<Complex64>),
}

impl SecretSpec {
    pub fn validate(&self, p: &SchemeParams) -> Result<()> {
        match self {
            SecretSpec::Basis(s) => {
                if s.len() != p.m {
                    return Err(Error::InvalidSecret(format!(
                        "expected {} symbols, got {}",
                        p.m,
                        s.len()
                    )));
                }
                if let Some(x) = s.iter().find(|&&x| x >= p.q) {
                    return Err(Error::InvalidSecret(format!("symbol {x} not in F_{}", p.q)));
                }
            }
            SecretSpec::Superposition(amps) => {
                let dim = (p.q as u128).checked_pow(p.m as u32);
                if dim != Some(amps.len() as u128) {
                    return Err(Error::InvalidSecret(format!(
                        "expected q^m amplitudes, got {}",
                        amps.len()
                    )));
                }
                let norm: f64 = amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > NORM_TOL {
                    return Err(Error::InvalidSecret(format!("norm {norm} is not 1")));
                }
            }
        }
        Ok(())
    }

    /// Nonzero `(basis secret, amplitude)` pairs.
    pub fn components(&self, p: &SchemeParams) -> Result<Vec<(Vec<u64>, Complex64)>> {
        self.validate(p)?;
        Ok(match self {
            SecretSpec::Basis(s) => vec![(s.clone(), Complex64::new(1.0, 0.0))],
            SecretSpec::Superposition(amps) => amps
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm_sqr() > 0.0)
                .map(|(idx, &a)| (basis_digits(idx, p.q, p.m), a))
                .collect(),
        })
    }

    /// The secret as an `m`-qudit state vector.
    pub fn amplitudes(&self, p: &SchemeParams) -> Result<Vec<Complex64>> {
        self.validate(p)?;
        Ok(match self {
            SecretSpec::Basis(s) => {
                let dim = check_budget(p.q, p.m)?;
                let idx = s.iter().fold(0usize, |acc, &x| acc * p.q as usize + x as usize);
                let mut v = vec![Complex64::new(0.0, 0.0); dim];
                v[idx] = Complex64::new(1.0, 0.0);
                v
            }
            SecretSpec::Superposition(a) => a.clone(),
        })
    }
}

fn basis_digits(mut idx: usize, q: u64, m: usize) -> Vec<u64> {
    let mut out = vec![0; m];
    for slot in out.iter_mut().rev() {
        *slot = idx as u64 % q;
        idx /= q as usize;
    }
    out
}

/// Symbolic encoding: qudit `(u, j)` carries `sum_l V[u][l] M[l][j]`.
pub fn encode_symbolic(p: &SchemeParams) -> SymbolicState {
    let layout = build_m_layout(p);
    let shares = ShareLayout::new(p);
    let f = p.v.field();
    let mut labels = vec![AffineLabel::zero(); p.num_qudits()];
    for u in 1..=p.n {
        for j in 1..=p.m {
            let terms = (0..p.n).filter_map(|l| {
                layout
                    .cell(l, j - 1)
                    .var(p.m)
                    .map(|v| (v, p.v.get(u - 1, l)))
            });
            labels[shares.qudit(u, j)] = AffineLabel::from_terms(f, terms, 0);
        }
    }
    SymbolicState::new(p.q, p.m, p.num_r(), labels).expect("labels are well formed")
}

/// Amplitude-level encoding of `secret`, subject to the dense budget.
pub fn encode_dense(p: &SchemeParams, secret: &SecretSpec) -> Result<DenseState> {
    check_budget(p.q, p.num_qudits())?;
    let comps = secret.components(p)?;
    encode_symbolic(p).expand_superposition(&comps)
}

/// Sorted distinct parties; each must lie in `1..=n`.
pub fn normalize_parties(p: &SchemeParams, parties: &[usize]) -> Result<Vec<usize>> {
    let mut v = parties.to_vec();
    v.sort_unstable();
    for (i, &u) in v.iter().enumerate() {
        if u == 0 || u > p.n || (i > 0 && v[i - 1] == u) {
            return Err(Error::BadParty(u));
        }
    }
    Ok(v)
}

/// Qudits read when recovering from `parties`: the first `a_i` of each
/// contacted share, listed party-major.
pub fn accessed_qudits(p: &SchemeParams, parties: &[usize]) -> Result<Vec<usize>> {
    let parties = normalize_parties(p, parties)?;
    let i = p.block_for_d(parties.len())?;
    let shares = ShareLayout::new(p);
    Ok(parties
        .iter()
        .flat_map(|&u| (1..=p.a[i - 1]).map(move |j| shares.qudit(u, j)))
        .collect())
}
