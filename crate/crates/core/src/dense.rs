//! Brute-force amplitude simulator for small instances.
//!
//! States live on `(F_q)^N` with big-endian indexing: qudit 0 is the most
//! significant digit. Every protocol gate is a basis permutation, so gate
//! application moves amplitudes without arithmetic on them.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gf::{Fq, FqMatrix};

/// Default cap on the number of amplitudes a dense state may hold.
pub const DEFAULT_DENSE_BUDGET: u128 = 1 << 26;

/// Environment variable that overrides [`DEFAULT_DENSE_BUDGET`].
pub const DENSE_BUDGET_ENV: &str = "CEQSS_DENSE_BUDGET";

pub const NORM_TOL: f64 = 1e-9;

pub fn dense_budget() -> u128 {
    std::env::var(DENSE_BUDGET_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_DENSE_BUDGET)
}

/// `q^N` if it fits the current budget.
pub fn check_budget(q: u64, num_qudits: usize) -> Result<usize> {
    let budget = dense_budget();
    let mut needed: u128 = 1;
    for _ in 0..num_qudits {
        needed = needed.saturating_mul(q as u128);
        if needed > budget {
            // report the true size when it is representable
            let full = (q as u128).checked_pow(num_qudits as u32).unwrap_or(u128::MAX);
            return Err(Error::TooLarge {
                needed: full,
                budget,
            });
        }
    }
    Ok(needed as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    q: u64,
    num_qudits: usize,
    amps: Vec<Complex64>,
}

impl DenseState {
    pub fn zero(q: u64, num_qudits: usize) -> Result<Self> {
        Fq::new(q)?;
        let dim = check_budget(q, num_qudits)?;
        Ok(DenseState {
            q,
            num_qudits,
            amps: vec![Complex64::new(0.0, 0.0); dim],
        })
    }

    pub fn basis(q: u64, digits: &[u64]) -> Result<Self> {
        let mut s = DenseState::zero(q, digits.len())?;
        let idx = s.index_of(digits);
        s.amps[idx] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Wrap an amplitude vector; it must have length `q^N` and unit norm.
    pub fn from_amplitudes(q: u64, num_qudits: usize, amps: Vec<Complex64>) -> Result<Self> {
        Fq::new(q)?;
        let dim = check_budget(q, num_qudits)?;
        if amps.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                got: amps.len(),
            });
        }
        let s = DenseState {
            q,
            num_qudits,
            amps,
        };
        if (s.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::InvariantViolation(format!(
                "state norm {} is not 1",
                s.norm()
            )));
        }
        Ok(s)
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn num_qudits(&self) -> usize {
        self.num_qudits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    pub(crate) fn add_amplitude(&mut self, digits: &[u64], amp: Complex64) {
        let idx = self.index_of(digits);
        self.amps[idx] += amp;
    }

    pub(crate) fn normalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::InvariantViolation("zero state".into()));
        }
        for a in &mut self.amps {
            *a /= norm;
        }
        Ok(())
    }

    pub fn index_of(&self, digits: &[u64]) -> usize {
        digits
            .iter()
            .fold(0usize, |acc, &d| acc * self.q as usize + (d % self.q) as usize)
    }

    pub fn digits_of(&self, mut idx: usize) -> Vec<u64> {
        let q = self.q as usize;
        let mut out = vec![0; self.num_qudits];
        for slot in out.iter_mut().rev() {
            *slot = (idx % q) as u64;
            idx /= q;
        }
        out
    }

    fn stride(&self, qudit: usize) -> usize {
        (self.q as usize).pow((self.num_qudits - 1 - qudit) as u32)
    }

    fn check_qudit(&self, qudit: usize) -> Result<()> {
        if qudit >= self.num_qudits {
            return Err(Error::OutOfRange(format!(
                "qudit {qudit} of {}",
                self.num_qudits
            )));
        }
        Ok(())
    }

    /// Apply the basis permutation `idx -> map(idx)`.
    fn permute(&self, map: impl Fn(usize) -> usize) -> DenseState {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (idx, &a) in self.amps.iter().enumerate() {
            if a.re != 0.0 || a.im != 0.0 {
                out[map(idx)] = a;
            }
        }
        DenseState {
            q: self.q,
            num_qudits: self.num_qudits,
            amps: out,
        }
    }

    /// `|i>_c |j>_t -> |i>_c |j + alpha i>_t`.
    pub fn apply_l(&self, alpha: u64, control: usize, target: usize) -> Result<DenseState> {
        self.check_qudit(control)?;
        self.check_qudit(target)?;
        if control == target {
            return Err(Error::SameQudit(control));
        }
        let f = Fq::new(self.q)?;
        let alpha = f.reduce(alpha);
        let q = self.q as usize;
        let (sc, st) = (self.stride(control), self.stride(target));
        Ok(self.permute(|idx| {
            let c = ((idx / sc) % q) as u64;
            let t = ((idx / st) % q) as u64;
            let nt = f.add(t, f.mul(alpha, c));
            idx - t as usize * st + nt as usize * st
        }))
    }

    /// `|x> -> |beta x>` on one qudit; `beta` must be nonzero.
    pub fn apply_scale(&self, beta: u64, qudit: usize) -> Result<DenseState> {
        self.check_qudit(qudit)?;
        let f = Fq::new(self.q)?;
        let beta = f.reduce(beta);
        if beta == 0 {
            return Err(Error::Singular(self.q));
        }
        let q = self.q as usize;
        let s = self.stride(qudit);
        Ok(self.permute(|idx| {
            let x = ((idx / s) % q) as u64;
            idx - x as usize * s + f.mul(beta, x) as usize * s
        }))
    }

    pub fn apply_swap(&self, a: usize, b: usize) -> Result<DenseState> {
        self.check_qudit(a)?;
        self.check_qudit(b)?;
        if a == b {
            return Err(Error::SameQudit(a));
        }
        let q = self.q as usize;
        let (sa, sb) = (self.stride(a), self.stride(b));
        Ok(self.permute(|idx| {
            let xa = (idx / sa) % q;
            let xb = (idx / sb) % q;
            idx - xa * sa - xb * sb + xb * sa + xa * sb
        }))
    }

    /// `|x> -> |K x>` on the listed qudits (in that order).
    pub fn apply_uk(&self, k: &FqMatrix, qudits: &[usize]) -> Result<DenseState> {
        if k.modulus() != self.q {
            return Err(Error::ModulusMismatch(k.modulus(), self.q));
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
            return Err(Error::Singular(self.q));
        }
        let q = self.q as usize;
        let strides: Vec<usize> = qudits.iter().map(|&qd| self.stride(qd)).collect();
        Ok(self.permute(|idx| {
            let x: Vec<u64> = strides.iter().map(|&s| ((idx / s) % q) as u64).collect();
            let y = k.mul_vec(&x).expect("dimensions checked");
            let mut out = idx;
            for ((&s, &xi), &yi) in strides.iter().zip(&x).zip(&y) {
                out = out - xi as usize * s + yi as usize * s;
            }
            out
        }))
    }

    fn check_same_shape(&self, other: &DenseState) -> Result<()> {
        if self.q != other.q || self.amps.len() != other.amps.len() {
            return Err(Error::DimensionMismatch(format!(
                "states of dimension {} and {}",
                self.amps.len(),
                other.amps.len()
            )));
        }
        Ok(())
    }

    pub fn inner(&self, other: &DenseState) -> Result<Complex64> {
        self.check_same_shape(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Largest absolute amplitude difference.
    pub fn max_deviation(&self, other: &DenseState) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Sorted multiset of amplitude magnitudes; invariant under permutation gates.
    pub fn magnitude_profile(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.amps.iter().map(|a| a.norm()).collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// `|<a|b>|^2`.
pub fn fidelity(a: &DenseState, b: &DenseState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// Density matrix of a (sub)system.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_matrix(data: DMatrix<Complex64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch("density matrix must be square".into()));
        }
        Ok(DensityMatrix { data })
    }

    pub fn pure(psi: &[Complex64]) -> Self {
        let v = DMatrix::from_column_slice(psi.len(), 1, psi);
        DensityMatrix {
            data: &v * v.adjoint(),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.data * &self.data).trace().re
    }

    /// `<psi| rho |psi>` for a pure reference state.
    pub fn fidelity_with_pure(&self, psi: &[Complex64]) -> Result<f64> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state of length {} against {}-dimensional density matrix",
                psi.len(),
                self.dim()
            )));
        }
        let v = DMatrix::from_column_slice(psi.len(), 1, psi);
        Ok((v.adjoint() * &self.data * &v)[(0, 0)].re)
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.data - self.data.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.data + self.data.adjoint()).scale(0.5);
        SymmetricEigen::new(herm).eigenvalues.iter().copied().collect()
    }

    /// Hermitian within 1e-9, unit trace within 1e-9, eigenvalues above -1e-7.
    pub fn validate(&self) -> Result<()> {
        if self.hermiticity_error() > 1e-9 {
            return Err(Error::InvariantViolation("density matrix not Hermitian".into()));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(Error::InvariantViolation(format!("trace {tr} is not 1")));
        }
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -1e-7 {
            return Err(Error::InvariantViolation(format!("negative eigenvalue {min}")));
        }
        Ok(())
    }
}

/// Partial trace onto `subset` (kept in the listed order).
pub fn reduced_density(state: &DenseState, subset: &[usize]) -> Result<DensityMatrix> {
    for (i, &qd) in subset.iter().enumerate() {
        state.check_qudit(qd)?;
        if subset[..i].contains(&qd) {
            return Err(Error::DuplicateIndex(qd));
        }
    }
    let q = state.q as usize;
    let env: Vec<usize> = (0..state.num_qudits)
        .filter(|qd| !subset.contains(qd))
        .collect();
    let sub_dim = q.pow(subset.len() as u32);
    let env_dim = q.pow(env.len() as u32);
    let sub_strides: Vec<usize> = subset.iter().map(|&qd| state.stride(qd)).collect();
    let env_strides: Vec<usize> = env.iter().map(|&qd| state.stride(qd)).collect();
    let local = |idx: usize, strides: &[usize]| {
        strides
            .iter()
            .fold(0usize, |acc, &s| acc * q + (idx / s) % q)
    };
    // psi reshaped to (subsystem x environment)
    let mut psi = DMatrix::<Complex64>::zeros(sub_dim, env_dim);
    for (idx, &a) in state.amps.iter().enumerate() {
        if a.re == 0.0 && a.im == 0.0 {
            continue;
        }
        psi[(local(idx, &sub_strides), local(idx, &env_strides))] = a;
    }
    Ok(DensityMatrix {
        data: &psi * psi.adjoint(),
    })
}

/// `1/2 * sum |eig(rho1 - rho2)|`.
pub fn trace_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch(format!(
            "density matrices of dimension {} and {}",
            rho1.dim(),
            rho2.dim()
        )));
    }
    let diff = DensityMatrix {
        data: &rho1.data - &rho2.data,
    };
    Ok(0.5 * diff.eigenvalues().iter().map(|e| e.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn l_gate_index_arithmetic() {
        let s = DenseState::basis(5, &[2, 1]).unwrap();
        let t = s.apply_l(3, 0, 1).unwrap();
        assert_eq!(t, DenseState::basis(5, &[2, 2]).unwrap());
        assert_eq!(s.apply_l(0, 0, 1).unwrap(), s);
        let back = t.apply_l(2, 0, 1).unwrap();
        assert_eq!(back, s);
        assert_eq!(s.apply_l(1, 1, 1), Err(Error::SameQudit(1)));
    }

    #[test]
    fn uk_identity_and_inverse() {
        let amps: Vec<Complex64> = (0..25).map(|i| c((i + 1) as f64)).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let s = DenseState::from_amplitudes(5, 2, amps.iter().map(|a| a / norm).collect()).unwrap();
        let id = FqMatrix::identity(5, 2).unwrap();
        assert_eq!(s.apply_uk(&id, &[0, 1]).unwrap(), s);
        let k = FqMatrix::from_rows(5, &[vec![2, 1], vec![3, 3]]).unwrap();
        let kinv = k.inverse().unwrap();
        let t = s.apply_uk(&k, &[1, 0]).unwrap();
        assert_ne!(t, s);
        assert_eq!(t.apply_uk(&kinv, &[1, 0]).unwrap(), s);
        let sing = FqMatrix::from_rows(5, &[vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(s.apply_uk(&sing, &[0, 1]), Err(Error::Singular(5)));
    }

    #[test]
    fn fidelity_cases() {
        let a = DenseState::basis(3, &[1, 2]).unwrap();
        let b = DenseState::basis(3, &[2, 2]).unwrap();
        assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&a, &b).unwrap().abs() < 1e-12);
        let c3 = DenseState::basis(3, &[1]).unwrap();
        assert!(fidelity(&a, &c3).is_err());
    }

    #[test]
    fn reduced_density_cases() {
        // |0> (x) (|0> + |1>)/sqrt2 over q = 3
        let h = 1.0 / 2f64.sqrt();
        let mut amps = vec![c(0.0); 9];
        amps[0] = c(h);
        amps[1] = c(h);
        let s = DenseState::from_amplitudes(3, 2, amps).unwrap();
        let rho = reduced_density(&s, &[0]).unwrap();
        rho.validate().unwrap();
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(rho.matrix().iter().skip(1).all(|z| z.norm() < 1e-12));

        // maximally entangled pair -> I/q
        let q = 5usize;
        let amp = 1.0 / (q as f64).sqrt();
        let mut amps = vec![c(0.0); q * q];
        for x in 0..q {
            amps[x * q + x] = c(amp);
        }
        let s = DenseState::from_amplitudes(5, 2, amps).unwrap();
        let rho = reduced_density(&s, &[1]).unwrap();
        for i in 0..q {
            for j in 0..q {
                let want = if i == j { 1.0 / q as f64 } else { 0.0 };
                assert!((rho.matrix()[(i, j)] - c(want)).norm() < 1e-12);
            }
        }
        assert!((rho.purity() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_cases() {
        let zero = DensityMatrix::pure(&[c(1.0), c(0.0)]);
        let one = DensityMatrix::pure(&[c(0.0), c(1.0)]);
        assert!(trace_distance(&zero, &zero).unwrap().abs() < 1e-12);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            DenseState::zero(7, 30),
            Err(Error::TooLarge { .. })
        ));
        assert_eq!(check_budget(5, 6).unwrap(), 15_625);
    }

    #[test]
    fn scale_and_swap() {
        let s = DenseState::basis(7, &[3, 4]).unwrap();
        assert_eq!(s.apply_scale(2, 0).unwrap(), DenseState::basis(7, &[6, 4]).unwrap());
        assert_eq!(s.apply_swap(0, 1).unwrap(), DenseState::basis(7, &[4, 3]).unwrap());
        assert!(s.apply_scale(0, 0).is_err());
    }
}
