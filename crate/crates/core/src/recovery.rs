//! Recovery plans: which unitary blocks to run on which downloaded qudits.
//!
//! For `d = 2k - i` contacted parties `D` (complement `E`), the plan
//!
//! 1. inverts `V_D^[i,n]` on every column of block `i`, exposing the `D`
//!    staircase entries and `R_i`;
//! 2. walks blocks `i - 1, ..., 1`, inverting `W_l`, which stacks
//!    `V_D^[l,n]` on unit rows for the `R_l` entries already exposed;
//! 3. runs `G_1, ..., G_i` on blocks `i, ..., 1`, overwriting the first
//!    `i - 1` rows of each `R_j` with what the missing parties would hold.
//!
//! With `i = 1` every share is present and `V^-1` on block 1 suffices.

use std::fmt;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::encoder::{accessed_qudits, encode_symbolic, normalize_parties, ShareLayout};
use crate::error::{Error, Result};
use crate::gf::FqMatrix;
use crate::params::{build_m_layout, MLayout, Ratio, SchemeParams};
use crate::state::{DisentanglementReport, SymbolicState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StepKind {
    /// `V^-1` on a block-1 column, all parties present.
    FullInverse,
    /// `(V_D^[i,n])^-1` on a block-`i` column.
    AccessInverse,
    /// `W_l^-1` on a block-`l` column.
    Extract(usize),
    /// `G_l` on a column of block `i - l + 1`.
    Disentangle(usize),
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepKind::FullInverse => write!(f, "V^-1"),
            StepKind::AccessInverse => write!(f, "V_D^-1"),
            StepKind::Extract(l) => write!(f, "W_{l}^-1"),
            StepKind::Disentangle(l) => write!(f, "G_{l}"),
        }
    }
}

/// One block unitary `U_K` on an ordered group of qudits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub kind: StepKind,
    /// 0-based column of `M` this step works on.
    pub column: usize,
    pub matrix: FqMatrix,
    pub qudits: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveryPlan {
    pub k: usize,
    pub q: u64,
    pub m: usize,
    pub parties: Vec<usize>,
    pub complement: Vec<usize>,
    /// Index `i` with `d_i = |parties|`.
    pub block: usize,
    pub accessed: Vec<usize>,
    pub steps: Vec<Step>,
    /// Qudits holding `s_1, ..., s_m` once all steps have run.
    pub secret_register: Vec<usize>,
}

impl RecoveryPlan {
    pub fn d(&self) -> usize {
        self.parties.len()
    }

    /// Every step touches only downloaded qudits.
    pub fn is_legal(&self) -> bool {
        let mut ok = vec![false; self.accessed.iter().max().map_or(0, |&x| x + 1)];
        self.accessed.iter().for_each(|&x| ok[x] = true);
        self.steps
            .iter()
            .all(|s| s.qudits.iter().all(|&x| ok.get(x).copied().unwrap_or(false)))
    }
}

impl fmt::Display for RecoveryPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "parties {:?} (d = {}, block {}), {} downloaded qudits, {} steps",
            self.parties,
            self.d(),
            self.block,
            self.accessed.len(),
            self.steps.len()
        )?;
        for (n, s) in self.steps.iter().enumerate() {
            writeln!(
                f,
                "{n:>4}  {:<8} col {:>3}  on {:?}",
                s.kind.to_string(),
                s.column + 1,
                s.qudits
            )?;
        }
        write!(f, "secret register {:?}", self.secret_register)
    }
}

/// `V` restricted to rows `parties` and columns `from..=n` (1-based).
fn v_block(p: &SchemeParams, parties: &[usize], from: usize) -> Result<FqMatrix> {
    let rows: Vec<usize> = parties.iter().map(|u| u - 1).collect();
    let cols: Vec<usize> = (from - 1..p.n).collect();
    p.v.select(&rows, &cols)
}

fn unit_rows(len: usize, positions: impl Iterator<Item = usize>) -> Vec<Vec<u64>> {
    positions
        .map(|pos| {
            let mut row = vec![0; len];
            row[pos] = 1;
            row
        })
        .collect()
}

fn invert(m: &FqMatrix, what: impl FnOnce() -> String) -> Result<FqMatrix> {
    m.inverse().map_err(|e| match e {
        Error::Singular(q) => {
            Error::InvariantViolation(format!("{} is singular over F_{q}", what()))
        }
        other => other,
    })
}

/// Variables in rows `from..n` (0-based) of column `c`.
fn column_vars(layout: &MLayout, c: usize, from: usize) -> Result<Vec<usize>> {
    (from..layout.n)
        .map(|r| {
            layout.cell(r, c).var(layout.m).ok_or_else(|| {
                Error::InvariantViolation(format!("unexpected zero cell ({r}, {c}) of M"))
            })
        })
        .collect()
}

/// Tracks which qudit currently holds each bare variable.
struct Homes(Vec<Option<usize>>);

impl Homes {
    fn get(&self, var: usize) -> Result<usize> {
        self.0[var].ok_or_else(|| {
            Error::InvariantViolation(format!("variable {var} is not held by any qudit"))
        })
    }

    fn set(&mut self, vars: &[usize], qudits: &[usize]) {
        for (&v, &qd) in vars.iter().zip(qudits) {
            self.0[v] = Some(qd);
        }
    }
}

/// Build the recovery plan for the contacted `parties` (1-based).
///
/// Fails with `InvariantViolation` when some `W_l` is singular over the
/// chosen field, which happens for unlucky point sets and small `q`.
pub fn plan_recovery(p: &SchemeParams, parties: &[usize]) -> Result<RecoveryPlan> {
    let parties = normalize_parties(p, parties)?;
    let d = parties.len();
    let i = p.block_for_d(d)?;
    let k = p.k;
    let complement: Vec<usize> = (1..=p.n).filter(|u| !parties.contains(u)).collect();
    let accessed = accessed_qudits(p, &parties)?;
    let layout = build_m_layout(p);
    let shares = ShareLayout::new(p);
    let at = |c: usize| -> Vec<usize> { parties.iter().map(|&u| shares.qudit(u, c + 1)).collect() };
    let mut homes = Homes(vec![None; p.num_vars()]);
    let mut steps = Vec::new();

    if i == 1 {
        let vinv = invert(&p.v, || "V".into())?;
        for c in p.block_columns(1) {
            let vars = column_vars(&layout, c, 0)?;
            let group = at(c);
            homes.set(&vars, &group);
            steps.push(Step {
                kind: StepKind::FullInverse,
                column: c,
                matrix: vinv.clone(),
                qudits: group,
            });
        }
    } else {
        let vd_inv = invert(&v_block(p, &parties, i)?, || format!("V_D^[{i},n] for {parties:?}"))?;
        for c in p.block_columns(i) {
            let vars = column_vars(&layout, c, i - 1)?;
            let group = at(c);
            homes.set(&vars, &group);
            steps.push(Step {
                kind: StepKind::AccessInverse,
                column: c,
                matrix: vd_inv.clone(),
                qudits: group,
            });
        }

        for l in (1..i).rev() {
            let len = 2 * k - l;
            let extra = k..k + i - l;
            let units = FqMatrix::from_rows(p.q, &unit_rows(len, extra.clone()))?;
            let w = v_block(p, &parties, l)?.vstack(&units)?;
            let w_inv = invert(&w, || format!("W_{l} for parties {parties:?}"))?;
            for c in p.block_columns(l) {
                let vars = column_vars(&layout, c, l - 1)?;
                let mut group = at(c);
                for pos in extra.clone() {
                    group.push(homes.get(vars[pos])?);
                }
                homes.set(&vars, &group);
                steps.push(Step {
                    kind: StepKind::Extract(l),
                    column: c,
                    matrix: w_inv.clone(),
                    qudits: group,
                });
            }
        }

        for l in 1..=i {
            let j = i - l + 1;
            let len = 2 * k - j;
            let keep_top = k - i + l;
            let keep_bottom = k - i;
            let mut rows = unit_rows(len, 0..keep_top);
            rows.extend(v_block(p, &complement, j)?.to_rows());
            rows.extend(unit_rows(len, len - keep_bottom..len));
            let g = FqMatrix::from_rows(p.q, &rows)?;
            for c in p.block_columns(j) {
                let vars = column_vars(&layout, c, j - 1)?;
                let group = vars
                    .iter()
                    .map(|&v| homes.get(v))
                    .collect::<Result<Vec<_>>>()?;
                // overwritten R_j entries no longer sit bare on any qudit
                for &v in &vars[keep_top..keep_top + i - 1] {
                    homes.0[v] = None;
                }
                steps.push(Step {
                    kind: StepKind::Disentangle(l),
                    column: c,
                    matrix: g.clone(),
                    qudits: group,
                });
            }
        }
    }

    let secret_register = (0..p.m).map(|s| homes.get(s)).collect::<Result<Vec<_>>>()?;
    Ok(RecoveryPlan {
        k,
        q: p.q,
        m: p.m,
        parties,
        complement,
        block: i,
        accessed,
        steps,
        secret_register,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveryResult {
    pub state: SymbolicState,
    pub report: DisentanglementReport,
    pub qudits_downloaded: usize,
    pub cost_per_secret_qudit: Ratio,
}

/// Run `plan` on `state`, checking linearity after every step.
pub fn execute(plan: &RecoveryPlan, state: SymbolicState) -> Result<RecoveryResult> {
    execute_observed(plan, state, |_, _, _| {})
}

/// As [`execute`], calling `observe(step_index, step, state_after)` after
/// each step.
pub fn execute_observed(
    plan: &RecoveryPlan,
    mut state: SymbolicState,
    mut observe: impl FnMut(usize, &Step, &SymbolicState),
) -> Result<RecoveryResult> {
    if !plan.is_legal() {
        return Err(Error::InvariantViolation(
            "plan touches qudits that were not downloaded".into(),
        ));
    }
    for (n, step) in plan.steps.iter().enumerate() {
        state.apply_uk(&step.matrix, &step.qudits)?;
        state.assert_linear()?;
        observe(n, step, &state);
    }
    let report = state.check_disentanglement(&plan.secret_register)?;
    if !report.passed() {
        return Err(Error::VerificationFailed(Box::new(report)));
    }
    let d = plan.d();
    Ok(RecoveryResult {
        state,
        report,
        qudits_downloaded: plan.accessed.len(),
        cost_per_secret_qudit: Ratio::new(d as u64, (d - plan.k + 1) as u64),
    })
}

/// Plan and execute recovery from `parties` on a fresh encoding.
pub fn recover(p: &SchemeParams, parties: &[usize]) -> Result<RecoveryResult> {
    let plan = plan_recovery(p, parties)?;
    execute(&plan, encode_symbolic(p))
}

/// Whether the downloaded labels pin down `s` at all: the map
/// `(s, r) -> accessed labels` must be injective in `s` modulo `r`.
pub fn accessed_determines_secret(p: &SchemeParams, parties: &[usize]) -> Result<bool> {
    let acc = accessed_qudits(p, parties)?;
    let st = encode_symbolic(p);
    let mut full = Vec::with_capacity(acc.len() * p.num_vars());
    let mut rand_part = Vec::with_capacity(acc.len() * p.num_r());
    for &qd in &acc {
        let l = st.label(qd);
        full.extend(l.s_coeffs(p.m));
        full.extend(l.r_coeffs(p.m, p.num_r()));
        rand_part.extend(l.r_coeffs(p.m, p.num_r()));
    }
    let full = FqMatrix::new(p.q, acc.len(), p.num_vars(), full)?;
    let r_rank = if p.num_r() == 0 {
        0
    } else {
        FqMatrix::new(p.q, acc.len(), p.num_r(), rand_part)?.rank()
    };
    Ok(full.rank() == r_rank + p.m)
}

/// Outcome of recovery for one subset in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetOutcome {
    pub parties: Vec<usize>,
    pub qudits_downloaded: usize,
    pub outcome: std::result::Result<(), Error>,
}

impl SubsetOutcome {
    pub fn passed(&self) -> bool {
        self.outcome.is_ok()
    }
}

/// Recover from every subset in parallel.
pub fn sweep(p: &SchemeParams, subsets: &[Vec<usize>]) -> Vec<SubsetOutcome> {
    let encoded = encode_symbolic(p);
    subsets
        .par_iter()
        .map(|parties| {
            let res = plan_recovery(p, parties).and_then(|plan| {
                let downloaded = plan.accessed.len();
                execute(&plan, encoded.clone()).map(|_| downloaded)
            });
            SubsetOutcome {
                parties: parties.clone(),
                qudits_downloaded: res.as_ref().copied().unwrap_or(0),
                outcome: res.map(|_| ()),
            }
        })
        .collect()
}

/// All `d`-subsets of `1..=n`, in lexicographic order.
pub fn combinations(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if d > n {
        return out;
    }
    let mut cur: Vec<usize> = (1..=d).collect();
    loop {
        out.push(cur.clone());
        let Some(pos) = (0..d).rev().find(|&t| cur[t] < n - d + t + 1) else {
            return out;
        };
        cur[pos] += 1;
        for t in pos + 1..d {
            cur[t] = cur[t - 1] + 1;
        }
    }
}

/// `count` distinct random `d`-subsets, or all of them if there are fewer.
pub fn sample_subsets(n: usize, d: usize, count: usize, rng: &mut impl Rng) -> Vec<Vec<usize>> {
    let all = combinations(n, d);
    if count >= all.len() {
        return all;
    }
    let mut picked: Vec<usize> = sample(rng, all.len(), count).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|ix| all[ix].clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostRow {
    pub d: usize,
    pub qudits_downloaded: usize,
    pub per_secret_qudit: Ratio,
    /// Per-secret-qudit cost of downloading `k` whole shares.
    pub baseline: usize,
}

/// Communication cost for each `d` from `n` down to `k`.
pub fn cost_table(p: &SchemeParams) -> Vec<CostRow> {
    (p.k..=p.n)
        .rev()
        .map(|d| CostRow {
            d,
            qudits_downloaded: p.qudits_downloaded(d).expect("d in range"),
            per_secret_qudit: p.cost_per_secret_qudit(d).expect("d in range"),
            baseline: p.k,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;

    #[test]
    fn k3_full_set() {
        let p = derive_params(3, None).unwrap();
        let plan = plan_recovery(&p, &[1, 2, 3, 4, 5]).unwrap();
        assert_eq!(plan.steps.len(), 2);
        assert_eq!(plan.accessed.len(), 10);
        let r = execute(&plan, encode_symbolic(&p)).unwrap();
        assert!(r.report.passed());
        assert_eq!(r.cost_per_secret_qudit, Ratio::new(5, 3));
    }

    #[test]
    fn k3_four_parties() {
        let p = derive_params(3, None).unwrap();
        let plan = plan_recovery(&p, &[1, 2, 3, 4]).unwrap();
        let kinds: Vec<String> = plan.steps.iter().map(|s| s.kind.to_string()).collect();
        assert_eq!(kinds, ["V_D^-1", "W_1^-1", "W_1^-1", "G_1", "G_2", "G_2"]);
        assert!(plan.is_legal());
        let r = execute(&plan, encode_symbolic(&p)).unwrap();
        assert!(r.report.passed());
        assert_eq!(r.qudits_downloaded, 12);
    }

    #[test]
    fn k3_three_parties_matches_single_block() {
        let p = derive_params(3, None).unwrap();
        let plan = plan_recovery(&p, &[1, 3, 5]).unwrap();
        assert_eq!(plan.block, 3);
        assert!(plan.is_legal());
        assert!(execute(&plan, encode_symbolic(&p)).unwrap().report.passed());
    }

    #[test]
    fn singular_w_is_reported() {
        // points 2, 3, 4, 5 sum to 0 mod 7, which kills W_1
        let p = derive_params(3, None).unwrap();
        assert!(!accessed_determines_secret(&p, &[2, 3, 4, 5]).unwrap());
        assert!(matches!(
            plan_recovery(&p, &[2, 3, 4, 5]),
            Err(Error::InvariantViolation(_))
        ));
    }

    #[test]
    fn combinations_enumerate() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(5, 3)[0], vec![1, 2, 3]);
        assert_eq!(combinations(5, 3).last().unwrap(), &vec![3, 4, 5]);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn cost_rows() {
        let p = derive_params(3, None).unwrap();
        let rows = cost_table(&p);
        let got: Vec<(usize, usize, String)> = rows
            .iter()
            .map(|r| (r.d, r.qudits_downloaded, r.per_secret_qudit.to_string()))
            .collect();
        assert_eq!(
            got,
            vec![
                (5, 10, "5/3".into()),
                (4, 12, "2".into()),
                (3, 18, "3".into())
            ]
        );
    }
}
