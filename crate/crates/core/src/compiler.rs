//! Lowering block unitaries `U_K` to elementary gates.
//!
//! `K` is factored as `P^-1 L U`. The `U` factor is applied first, row by
//! row from the top, so each row only reads rows below it that are still
//! untouched. The `L` factor follows from the bottom row up, and the
//! permutation finishes with swaps.

use serde::{Deserialize, Serialize};

use crate::dense::DenseState;
use crate::error::{Error, Result};
use crate::gf::FqMatrix;
use crate::recovery::RecoveryPlan;
use crate::state::SymbolicState;

/// Invertible elementary row operations, acting on basis labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum ElementaryGate {
    /// `x_target += alpha * x_control`.
    AddMul {
        alpha: u64,
        control: usize,
        target: usize,
    },
    /// `x_qudit *= beta`, `beta != 0`.
    Scale { beta: u64, qudit: usize },
    Swap { a: usize, b: usize },
}

impl ElementaryGate {
    pub fn qudits(&self) -> Vec<usize> {
        match *self {
            ElementaryGate::AddMul { control, target, .. } => vec![control, target],
            ElementaryGate::Scale { qudit, .. } => vec![qudit],
            ElementaryGate::Swap { a, b } => vec![a, b],
        }
    }

    pub fn is_two_qudit(&self) -> bool {
        !matches!(self, ElementaryGate::Scale { .. })
    }

    pub fn apply_symbolic(&self, state: &mut SymbolicState) -> Result<()> {
        match *self {
            ElementaryGate::AddMul {
                alpha,
                control,
                target,
            } => state.apply_l(alpha, control, target),
            ElementaryGate::Scale { beta, qudit } => state.apply_scale(beta, qudit),
            ElementaryGate::Swap { a, b } => state.apply_swap(a, b),
        }
    }

    pub fn apply_dense(&self, state: &DenseState) -> Result<DenseState> {
        match *self {
            ElementaryGate::AddMul {
                alpha,
                control,
                target,
            } => state.apply_l(alpha, control, target),
            ElementaryGate::Scale { beta, qudit } => state.apply_scale(beta, qudit),
            ElementaryGate::Swap { a, b } => state.apply_swap(a, b),
        }
    }
}

impl std::fmt::Display for ElementaryGate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ElementaryGate::AddMul {
                alpha,
                control,
                target,
            } => write!(f, "L_{alpha}({control} -> {target})"),
            ElementaryGate::Scale { beta, qudit } => write!(f, "S_{beta}({qudit})"),
            ElementaryGate::Swap { a, b } => write!(f, "SWAP({a}, {b})"),
        }
    }
}

/// Contiguous run of gates realizing one block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub source: String,
    pub start: usize,
    pub len: usize,
    pub qudits: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GateProgram {
    pub gates: Vec<ElementaryGate>,
    pub segments: Vec<Segment>,
}

impl GateProgram {
    pub fn new() -> Self {
        GateProgram::default()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Append `other`, shifting its segment offsets.
    pub fn extend(&mut self, other: GateProgram) {
        let offset = self.gates.len();
        self.gates.extend(other.gates);
        self.segments.extend(other.segments.into_iter().map(|mut s| {
            s.start += offset;
            s
        }));
    }

    pub fn apply_symbolic(&self, state: &mut SymbolicState) -> Result<()> {
        self.gates.iter().try_for_each(|g| g.apply_symbolic(state))
    }

    pub fn apply_dense(&self, state: &DenseState) -> Result<DenseState> {
        let mut cur = state.clone();
        for g in &self.gates {
            cur = g.apply_dense(&cur)?;
        }
        Ok(cur)
    }

    /// Largest qudit index referenced, if any.
    pub fn max_qudit(&self) -> Option<usize> {
        self.gates.iter().flat_map(|g| g.qudits()).max()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProgramCost {
    pub gate_count: usize,
    pub depth: usize,
    pub two_qudit_count: usize,
}

/// Compile `U_K` on `qudits` (position `t` of the block is `qudits[t]`).
pub fn compile_uk(k: &FqMatrix, qudits: &[usize]) -> Result<GateProgram> {
    compile_uk_labeled(k, qudits, format!("U_K on {qudits:?}"))
}

fn compile_uk_labeled(k: &FqMatrix, qudits: &[usize], source: String) -> Result<GateProgram> {
    if !k.is_square() || k.rows() != qudits.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} block on {} qudits",
            k.rows(),
            k.cols(),
            qudits.len()
        )));
    }
    for (i, &qd) in qudits.iter().enumerate() {
        if qudits[..i].contains(&qd) {
            return Err(Error::DuplicateIndex(qd));
        }
    }
    let n = k.rows();
    let plu = k.plu()?;
    if (0..n).any(|r| plu.u.get(r, r) == 0) {
        return Err(Error::Singular(k.modulus()));
    }
    let mut gates = Vec::new();
    for r in 0..n {
        let diag = plu.u.get(r, r);
        if diag != 1 {
            gates.push(ElementaryGate::Scale {
                beta: diag,
                qudit: qudits[r],
            });
        }
        for c in r + 1..n {
            let alpha = plu.u.get(r, c);
            if alpha != 0 {
                gates.push(ElementaryGate::AddMul {
                    alpha,
                    control: qudits[c],
                    target: qudits[r],
                });
            }
        }
    }
    for r in (0..n).rev() {
        for c in 0..r {
            let alpha = plu.l.get(r, c);
            if alpha != 0 {
                gates.push(ElementaryGate::AddMul {
                    alpha,
                    control: qudits[c],
                    target: qudits[r],
                });
            }
        }
    }
    // entry z_i must end at position perm[i]
    let mut holder: Vec<usize> = (0..n).collect();
    let mut pos_of: Vec<usize> = (0..n).collect();
    let mut want = vec![0; n];
    for (i, &dst) in plu.perm.iter().enumerate() {
        want[dst] = i;
    }
    for t in 0..n {
        let from = pos_of[want[t]];
        if from != t {
            gates.push(ElementaryGate::Swap {
                a: qudits[t],
                b: qudits[from],
            });
            let displaced = holder[t];
            holder.swap(t, from);
            pos_of[displaced] = from;
            pos_of[want[t]] = t;
        }
    }
    let len = gates.len();
    Ok(GateProgram {
        gates,
        segments: vec![Segment {
            source,
            start: 0,
            len,
            qudits: qudits.to_vec(),
        }],
    })
}

/// Flatten every step of `plan` into one elementary netlist.
pub fn compile_plan(plan: &RecoveryPlan) -> Result<GateProgram> {
    let mut prog = GateProgram::new();
    for step in &plan.steps {
        let source = format!(
            "{} for D={:?}, column {}",
            step.kind,
            plan.parties,
            step.column + 1
        );
        prog.extend(compile_uk_labeled(&step.matrix, &step.qudits, source)?);
    }
    Ok(prog)
}

/// Gate counts and greedy-layered depth.
pub fn program_cost(prog: &GateProgram) -> ProgramCost {
    let width = prog.max_qudit().map_or(0, |x| x + 1);
    let mut level = vec![0usize; width];
    let mut depth = 0;
    for g in &prog.gates {
        let qs = g.qudits();
        let layer = qs.iter().map(|&x| level[x]).max().unwrap_or(0) + 1;
        qs.iter().for_each(|&x| level[x] = layer);
        depth = depth.max(layer);
    }
    ProgramCost {
        gate_count: prog.gates.len(),
        depth,
        two_qudit_count: prog.gates.iter().filter(|g| g.is_two_qudit()).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::AffineLabel;

    fn identity_labels(q: u64, n: usize) -> SymbolicState {
        SymbolicState::new(q, n, 0, (0..n).map(AffineLabel::var).collect()).unwrap()
    }

    fn label_matrix(st: &SymbolicState) -> Vec<Vec<u64>> {
        st.labels().iter().map(|l| l.s_coeffs(st.num_secret())).collect()
    }

    #[test]
    fn single_gate_cases() {
        let k = FqMatrix::from_rows(7, &[vec![1, 0], vec![3, 1]]).unwrap();
        let prog = compile_uk(&k, &[0, 1]).unwrap();
        assert_eq!(
            prog.gates,
            vec![ElementaryGate::AddMul {
                alpha: 3,
                control: 0,
                target: 1
            }]
        );
        let k = FqMatrix::from_rows(7, &[vec![4, 0], vec![0, 1]]).unwrap();
        let prog = compile_uk(&k, &[0, 1]).unwrap();
        assert_eq!(prog.gates, vec![ElementaryGate::Scale { beta: 4, qudit: 0 }]);
    }

    #[test]
    fn permutation_needs_swaps() {
        let k = FqMatrix::from_rows(5, &[vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]).unwrap();
        let prog = compile_uk(&k, &[4, 2, 7]).unwrap();
        assert!(prog.gates.iter().all(|g| matches!(g, ElementaryGate::Swap { .. })));
        let mut st = identity_labels(5, 8);
        prog.apply_symbolic(&mut st).unwrap();
        let got = label_matrix(&st);
        // position t of the block is K row t applied to (x4, x2, x7)
        assert_eq!(got[4][2], 1);
        assert_eq!(got[2][7], 1);
        assert_eq!(got[7][4], 1);
    }

    #[test]
    fn round_trip_on_labels() {
        let rows = vec![
            vec![0, 3, 1, 4],
            vec![2, 2, 0, 1],
            vec![5, 0, 6, 1],
            vec![1, 1, 1, 0],
        ];
        let k = FqMatrix::from_rows(7, &rows).unwrap();
        assert!(k.is_invertible());
        let prog = compile_uk(&k, &[0, 1, 2, 3]).unwrap();
        let mut st = identity_labels(7, 4);
        prog.apply_symbolic(&mut st).unwrap();
        assert_eq!(label_matrix(&st), rows);
        let inv = compile_uk(&k.inverse().unwrap(), &[0, 1, 2, 3]).unwrap();
        inv.apply_symbolic(&mut st).unwrap();
        assert_eq!(st, identity_labels(7, 4));
        assert!(program_cost(&prog).gate_count <= 16 + 4);
    }

    #[test]
    fn singular_rejected() {
        let k = FqMatrix::from_rows(5, &[vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(compile_uk(&k, &[0, 1]), Err(Error::Singular(5)));
    }

    #[test]
    fn cost_cases() {
        assert_eq!(
            program_cost(&GateProgram::new()),
            ProgramCost {
                gate_count: 0,
                depth: 0,
                two_qudit_count: 0
            }
        );
        let prog = GateProgram {
            gates: vec![
                ElementaryGate::AddMul {
                    alpha: 1,
                    control: 0,
                    target: 1,
                },
                ElementaryGate::Scale { beta: 2, qudit: 2 },
                ElementaryGate::Swap { a: 1, b: 2 },
            ],
            segments: vec![],
        };
        let c = program_cost(&prog);
        assert_eq!((c.gate_count, c.depth, c.two_qudit_count), (3, 2, 2));
    }

    #[test]
    fn netlist_json_shape() {
        let gates = vec![
            ElementaryGate::AddMul {
                alpha: 6,
                control: 9,
                target: 0,
            },
            ElementaryGate::Scale { beta: 3, qudit: 4 },
            ElementaryGate::Swap { a: 1, b: 2 },
        ];
        assert_eq!(
            serde_json::to_string(&gates).unwrap(),
            r#"[{"op":"addmul","alpha":6,"control":9,"target":0},{"op":"scale","beta":3,"qudit":4},{"op":"swap","a":1,"b":2}]"#
        );
    }
}
