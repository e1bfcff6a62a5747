//! Secrecy checks.
//!
//! Small instances are checked directly: the reduced state of an
//! unauthorized set must not depend on the secret. At every scale the
//! structural argument is checked instead. Each unauthorized set has an
//! authorized complement, and every `k`-set really recovers, so an
//! unauthorized set learning anything would contradict no-cloning.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dense::{reduced_density, trace_distance, DensityMatrix};
use crate::encoder::{encode_dense, normalize_parties, ShareLayout, SecretSpec};
use crate::error::{Error, Result};
use crate::params::SchemeParams;
use crate::recovery::{combinations, sweep};
use crate::state::odometer;

/// Every basis secret followed by `extra` random superpositions drawn
/// from `seed`.
pub fn default_secret_set(p: &SchemeParams, extra: usize, seed: u64) -> Vec<SecretSpec> {
    let mut out = Vec::new();
    let mut s = vec![0u64; p.m];
    loop {
        // most significant symbol first
        out.push(SecretSpec::Basis(s.iter().rev().copied().collect()));
        if !odometer(&mut s, p.q) {
            break;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..extra {
        out.push(SecretSpec::Superposition(random_amplitudes(
            &mut rng,
            (p.q as usize).pow(p.m as u32),
        )));
    }
    out
}

/// Normalized vector with independent uniform real and imaginary parts.
pub fn random_amplitudes(rng: &mut impl Rng, dim: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

/// Largest pairwise trace distance between the states held by `parties`
/// across `secrets`.
pub fn secrecy_dense(p: &SchemeParams, parties: &[usize], secrets: &[SecretSpec]) -> Result<f64> {
    let parties = normalize_parties(p, parties)?;
    if parties.len() >= p.k {
        return Err(Error::BadSubsetSize {
            size: parties.len(),
            min: 0,
            max: p.k - 1,
        });
    }
    if parties.is_empty() || secrets.len() < 2 {
        return Ok(0.0);
    }
    let shares = ShareLayout::new(p);
    let subset: Vec<usize> = parties.iter().flat_map(|&u| shares.share(u)).collect();
    let rhos = secrets
        .iter()
        .map(|s| reduced_density(&encode_dense(p, s)?, &subset))
        .collect::<Result<Vec<DensityMatrix>>>()?;
    let mut worst: f64 = 0.0;
    for a in 0..rhos.len() {
        for b in a + 1..rhos.len() {
            worst = worst.max(trace_distance(&rhos[a], &rhos[b])?);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructuralReport {
    pub k: usize,
    pub n: usize,
    pub q: u64,
    /// Every set of at most `k - 1` parties leaves at least `k` behind.
    pub complements_authorized: bool,
    pub threshold_sets_checked: usize,
    pub threshold_sets_recovered: usize,
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub parties: Vec<usize>,
    pub reason: String,
}

impl StructuralReport {
    pub fn passed(&self) -> bool {
        self.complements_authorized && self.counterexample.is_none()
    }
}

/// Check the structural secrecy argument for `p`.
pub fn secrecy_structural(p: &SchemeParams) -> StructuralReport {
    let mut counterexample = None;
    let mut complements_authorized = true;
    for size in 0..p.k {
        if p.n - size < p.k {
            complements_authorized = false;
            counterexample.get_or_insert(Counterexample {
                parties: (1..=size).collect(),
                reason: format!("complement has {} < k parties", p.n - size),
            });
        }
    }
    let subsets = combinations(p.n, p.k);
    let outcomes = sweep(p, &subsets);
    let recovered = outcomes.par_iter().filter(|o| o.passed()).count();
    if let Some(bad) = outcomes.iter().find(|o| !o.passed()) {
        let reason = match &bad.outcome {
            Err(e) => e.to_string(),
            Ok(()) => unreachable!(),
        };
        counterexample.get_or_insert(Counterexample {
            parties: bad.parties.clone(),
            reason,
        });
    }
    StructuralReport {
        k: p.k,
        n: p.n,
        q: p.q,
        complements_authorized,
        threshold_sets_checked: subsets.len(),
        threshold_sets_recovered: recovered,
        counterexample,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;

    #[test]
    fn dense_secrecy_k2() {
        let p = derive_params(2, None).unwrap();
        let secrets = default_secret_set(&p, 3, 7);
        assert_eq!(secrets.len(), 28);
        assert_eq!(secrets[1], SecretSpec::Basis(vec![0, 1]));
        let dist = secrecy_dense(&p, &[2], &secrets).unwrap();
        assert!(dist < 1e-9, "distance {dist}");
    }

    #[test]
    fn dense_secrecy_edge_cases() {
        let p = derive_params(2, None).unwrap();
        let secrets = default_secret_set(&p, 0, 0);
        assert_eq!(secrecy_dense(&p, &[], &secrets).unwrap(), 0.0);
        assert!(matches!(
            secrecy_dense(&p, &[1, 2], &secrets),
            Err(Error::BadSubsetSize { .. })
        ));
    }

    #[test]
    fn structural_small_k() {
        for k in 1..=4 {
            let p = derive_params(k, None).unwrap();
            let r = secrecy_structural(&p);
            assert!(r.passed(), "k={k}: {r:?}");
        }
        let r = secrecy_structural(&derive_params(3, None).unwrap());
        assert_eq!(r.threshold_sets_checked, 10);
    }
}
