//! JSON forms of matrices, symbolic states, netlists and traces.
//!
//! Writers go through `serde_json` with fixed field order. Readers walk a
//! `serde_json::Value` by hand so that every rejection names the offending
//! field, e.g. `qudits[3].s_coeffs[1]`.

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::compiler::{ElementaryGate, GateProgram, Segment};
use crate::error::{Error, Result};
use crate::gf::{is_prime, Fq, FqMatrix};
use crate::state::{AffineLabel, SymbolicState};

fn parse(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::schema("$", e.to_string()))
}

fn to_pretty<T: Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::schema(path, "expected an object"))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::schema(join(path, key), "missing field"))
}

fn join(path: &str, key: &str) -> String {
    if path == "$" {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn idx(path: &str, i: usize) -> String {
    if path == "$" {
        format!("[{i}]")
    } else {
        format!("{path}[{i}]")
    }
}

fn uint(v: &Value, path: &str) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| Error::schema(path, "expected a non-negative integer"))
}

fn uint_field(obj: &Map<String, Value>, key: &str, path: &str) -> Result<u64> {
    uint(field(obj, key, path)?, &join(path, key))
}

fn usize_field(obj: &Map<String, Value>, key: &str, path: &str) -> Result<usize> {
    uint_field(obj, key, path).map(|x| x as usize)
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::schema(path, "expected an array"))
}

fn modulus_field(obj: &Map<String, Value>, path: &str) -> Result<u64> {
    let q = uint_field(obj, "q", path)?;
    if !is_prime(q) {
        return Err(Error::schema(join(path, "q"), format!("{q} is not prime")));
    }
    Ok(q)
}

/// Field elements in `[0, q)`.
fn elements(v: &Value, q: u64, len: usize, path: &str) -> Result<Vec<u64>> {
    let arr = array(v, path)?;
    if arr.len() != len {
        return Err(Error::schema(
            path,
            format!("expected {len} entries, found {}", arr.len()),
        ));
    }
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            let p = idx(path, i);
            let x = uint(x, &p)?;
            if x >= q {
                return Err(Error::schema(p, format!("{x} is not reduced mod {q}")));
            }
            Ok(x)
        })
        .collect()
}

pub fn matrix_to_json(m: &FqMatrix) -> String {
    to_pretty(m)
}

pub fn matrix_from_json(text: &str) -> Result<FqMatrix> {
    matrix_from_value(&parse(text)?, "$")
}

fn matrix_from_value(v: &Value, path: &str) -> Result<FqMatrix> {
    let obj = object(v, path)?;
    let q = modulus_field(obj, path)?;
    let rows = usize_field(obj, "rows", path)?;
    let cols = usize_field(obj, "cols", path)?;
    if rows == 0 || cols == 0 {
        return Err(Error::schema(path, "matrix dimensions must be positive"));
    }
    let data = elements(field(obj, "data", path)?, q, rows * cols, &join(path, "data"))?;
    FqMatrix::new(q, rows, cols, data)
}

#[derive(Serialize)]
struct QuditRecord {
    party: usize,
    pos: usize,
    s_coeffs: Vec<u64>,
    r_coeffs: Vec<u64>,
    #[serde(rename = "const")]
    constant: u64,
}

fn records(st: &SymbolicState) -> Vec<QuditRecord> {
    let (m, nr) = (st.num_secret(), st.num_r());
    st.labels()
        .iter()
        .enumerate()
        .map(|(i, l)| QuditRecord {
            party: i / m.max(1) + 1,
            pos: i % m.max(1) + 1,
            s_coeffs: l.s_coeffs(m),
            r_coeffs: l.r_coeffs(m, nr),
            constant: l.constant(),
        })
        .collect()
}

fn state_value(st: &SymbolicState) -> Value {
    json!({
        "q": st.modulus(),
        "m": st.num_secret(),
        "num_r": st.num_r(),
        "qudits": records(st),
    })
}

/// Qudit records are listed party-major; `party`/`pos` assume shares of
/// `m` qudits each.
pub fn state_to_json(st: &SymbolicState) -> String {
    to_pretty(&state_value(st))
}

pub fn state_from_json(text: &str) -> Result<SymbolicState> {
    state_from_value(&parse(text)?, "$")
}

fn labels_from_value(
    v: &Value,
    f: Fq,
    m: usize,
    num_r: usize,
    path: &str,
) -> Result<Vec<AffineLabel>> {
    let q = f.modulus();
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let p = idx(path, i);
            let obj = object(rec, &p)?;
            let party = usize_field(obj, "party", &p)?;
            let pos = usize_field(obj, "pos", &p)?;
            if m > 0 && (party, pos) != (i / m + 1, i % m + 1) {
                return Err(Error::schema(
                    p,
                    format!("record ({party}, {pos}) out of party-major order"),
                ));
            }
            let s = elements(field(obj, "s_coeffs", &p)?, q, m, &join(&p, "s_coeffs"))?;
            let r = elements(field(obj, "r_coeffs", &p)?, q, num_r, &join(&p, "r_coeffs"))?;
            let constant = match obj.get("const") {
                None => 0,
                Some(c) => {
                    let c = uint(c, &join(&p, "const"))?;
                    if c >= q {
                        return Err(Error::schema(join(&p, "const"), "not reduced"));
                    }
                    c
                }
            };
            let terms = s.into_iter().chain(r).enumerate().filter(|&(_, c)| c != 0);
            Ok(AffineLabel::from_terms(f, terms, constant))
        })
        .collect()
}

fn state_from_value(v: &Value, path: &str) -> Result<SymbolicState> {
    let obj = object(v, path)?;
    let q = modulus_field(obj, path)?;
    let m = usize_field(obj, "m", path)?;
    let num_r = usize_field(obj, "num_r", path)?;
    let f = Fq::new(q)?;
    let labels = labels_from_value(field(obj, "qudits", path)?, f, m, num_r, &join(path, "qudits"))?;
    SymbolicState::new(q, m, num_r, labels)
}

/// Bare gate array, the exchange format for compiled circuits.
pub fn netlist_to_json(prog: &GateProgram) -> String {
    to_pretty(&prog.gates)
}

pub fn netlist_from_json(text: &str) -> Result<GateProgram> {
    Ok(GateProgram {
        gates: gates_from_value(&parse(text)?, "$")?,
        segments: Vec::new(),
    })
}

fn gates_from_value(v: &Value, path: &str) -> Result<Vec<ElementaryGate>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let p = idx(path, i);
            let obj = object(g, &p)?;
            let op = field(obj, "op", &p)?
                .as_str()
                .ok_or_else(|| Error::schema(join(&p, "op"), "expected a string"))?;
            let gate = match op {
                "addmul" => ElementaryGate::AddMul {
                    alpha: uint_field(obj, "alpha", &p)?,
                    control: usize_field(obj, "control", &p)?,
                    target: usize_field(obj, "target", &p)?,
                },
                "scale" => ElementaryGate::Scale {
                    beta: uint_field(obj, "beta", &p)?,
                    qudit: usize_field(obj, "qudit", &p)?,
                },
                "swap" => ElementaryGate::Swap {
                    a: usize_field(obj, "a", &p)?,
                    b: usize_field(obj, "b", &p)?,
                },
                other => {
                    return Err(Error::schema(join(&p, "op"), format!("unknown op {other:?}")))
                }
            };
            let distinct = match gate {
                ElementaryGate::AddMul { control, target, .. } => control != target,
                ElementaryGate::Swap { a, b } => a != b,
                ElementaryGate::Scale { beta, .. } => beta != 0,
            };
            if !distinct {
                return Err(Error::schema(p, "degenerate gate"));
            }
            Ok(gate)
        })
        .collect()
}

/// Gates together with their source segments.
pub fn program_to_json(prog: &GateProgram) -> String {
    to_pretty(prog)
}

pub fn program_from_json(text: &str) -> Result<GateProgram> {
    let v = parse(text)?;
    let obj = object(&v, "$")?;
    let gates = gates_from_value(field(obj, "gates", "$")?, "gates")?;
    let segments = array(field(obj, "segments", "$")?, "segments")?
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let p = format!("segments[{i}]");
            let o = object(s, &p)?;
            let source = field(o, "source", &p)?
                .as_str()
                .ok_or_else(|| Error::schema(join(&p, "source"), "expected a string"))?
                .to_string();
            let qudits = array(field(o, "qudits", &p)?, &join(&p, "qudits"))?
                .iter()
                .enumerate()
                .map(|(j, x)| uint(x, &format!("{p}.qudits[{j}]")).map(|x| x as usize))
                .collect::<Result<Vec<_>>>()?;
            let seg = Segment {
                source,
                start: usize_field(o, "start", &p)?,
                len: usize_field(o, "len", &p)?,
                qudits,
            };
            if seg.start + seg.len > gates.len() {
                return Err(Error::schema(p, "segment runs past the last gate"));
            }
            Ok(seg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GateProgram { gates, segments })
}

/// One snapshot of a recovery trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub step: usize,
    pub gate: String,
    pub state: SymbolicState,
}

pub fn trace_to_json(steps: &[TraceStep]) -> String {
    let arr: Vec<Value> = steps
        .iter()
        .map(|t| {
            json!({
                "step": t.step,
                "gate": t.gate,
                "state": state_value(&t.state),
            })
        })
        .collect();
    to_pretty(&arr)
}

pub fn trace_from_json(text: &str) -> Result<Vec<TraceStep>> {
    let v = parse(text)?;
    array(&v, "$")?
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let p = format!("[{i}]");
            let obj = object(t, &p)?;
            Ok(TraceStep {
                step: usize_field(obj, "step", &p)?,
                gate: field(obj, "gate", &p)?
                    .as_str()
                    .ok_or_else(|| Error::schema(join(&p, "gate"), "expected a string"))?
                    .to_string(),
                state: state_from_value(field(obj, "state", &p)?, &join(&p, "state"))?,
            })
        })
        .collect()
}
