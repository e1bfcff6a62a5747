//! Cross-checks of symbolic recovery against the dense simulator.

use crate::compiler::compile_plan;
use crate::dense::{reduced_density, DenseState};
use crate::encoder::{encode_dense, encode_symbolic, SecretSpec};
use crate::error::Result;
use crate::params::SchemeParams;
use crate::recovery::{execute, RecoveryPlan};

/// Run every block of `plan` on a dense state with `apply_uk`.
pub fn dense_execute(plan: &RecoveryPlan, state: &DenseState) -> Result<DenseState> {
    let mut cur = state.clone();
    for step in &plan.steps {
        cur = cur.apply_uk(&step.matrix, &step.qudits)?;
    }
    Ok(cur)
}

/// Secret-register statistics after dense recovery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseRecoveryCheck {
    /// `<secret| rho_register |secret>`.
    pub fidelity: f64,
    /// `tr(rho_register^2)`; 1 iff the register is unentangled.
    pub purity: f64,
}

/// Encode `secret` densely, run the compiled netlist of `plan` and inspect
/// the secret register.
pub fn dense_recovery_check(
    p: &SchemeParams,
    plan: &RecoveryPlan,
    secret: &SecretSpec,
) -> Result<DenseRecoveryCheck> {
    let input = encode_dense(p, secret)?;
    let out = compile_plan(plan)?.apply_dense(&input)?;
    let rho = reduced_density(&out, &plan.secret_register)?;
    Ok(DenseRecoveryCheck {
        fidelity: rho.fidelity_with_pure(&secret.amplitudes(p)?)?,
        purity: rho.purity(),
    })
}

/// Largest amplitude gap between the dense expansion of the symbolic
/// final state and block-wise dense execution, for basis secret `s`.
pub fn symbolic_dense_deviation(p: &SchemeParams, plan: &RecoveryPlan, s: &[u64]) -> Result<f64> {
    let symbolic = execute(plan, encode_symbolic(p))?.state.expand_dense(s)?;
    let dense = dense_execute(plan, &encode_dense(p, &SecretSpec::Basis(s.to_vec()))?)?;
    symbolic.max_deviation(&dense)
}
