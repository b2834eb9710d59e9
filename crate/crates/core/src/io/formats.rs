use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::analysis::ErrorRecord;
use crate::error::{Error, Result};
use crate::propagator::Trajectory;
use crate::rate::{validate, Edge, KineticNetwork, RateMatrix, Tolerances};
use crate::sparse::SparseMatrix;

/// Unit of the energies in a network file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EnergyUnit {
    #[default]
    #[serde(rename = "J/mol")]
    JPerMol,
    #[serde(rename = "kJ/mol")]
    KjPerMol,
}

impl EnergyUnit {
    fn factor(self) -> f64 {
        match self {
            EnergyUnit::JPerMol => 1.0,
            EnergyUnit::KjPerMol => 1e3,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct StateRec {
    id: String,
    #[serde(rename = "energy_Jmol", alias = "energy")]
    energy: f64,
}

/// Edge endpoints may be given as 0-based indices or as state ids.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum EndRec {
    Index(usize),
    Id(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRec {
    i: EndRec,
    j: EndRec,
    #[serde(rename = "barrier_Jmol", alias = "barrier")]
    barrier: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct NetworkRec {
    states: Vec<StateRec>,
    edges: Vec<EdgeRec>,
    #[serde(rename = "temperature_K")]
    temperature: f64,
    #[serde(default = "unit_gamma")]
    gamma: f64,
    #[serde(default)]
    unit: EnergyUnit,
}

fn unit_gamma() -> f64 {
    1.0
}

/// Reads a network JSON document. Energies are converted to J/mol.
pub fn read_network<R: std::io::Read>(r: R) -> Result<KineticNetwork> {
    let rec: NetworkRec = serde_json::from_reader(r).map_err(|e| Error::Parse(e.to_string()))?;
    let f = rec.unit.factor();
    let ids: Vec<String> = rec.states.iter().map(|s| s.id.clone()).collect();
    let lookup: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    if lookup.len() != ids.len() {
        return Err(Error::InvalidInput("duplicate state id".into()));
    }
    let resolve = |e: &EndRec| -> Result<usize> {
        match e {
            EndRec::Index(i) => Ok(*i),
            EndRec::Id(s) => lookup.get(s.as_str()).copied().ok_or_else(|| Error::InvalidInput(format!("unknown state id {s:?}"))),
        }
    };
    let mut edges = Vec::with_capacity(rec.edges.len());
    for e in &rec.edges {
        edges.push(Edge { i: resolve(&e.i)?, j: resolve(&e.j)?, barrier: e.barrier * f });
    }
    let energies = rec.states.iter().map(|s| s.energy * f).collect();
    KineticNetwork::new(ids, energies, edges, rec.temperature, rec.gamma)
}

/// Writes a network JSON document in J/mol with index endpoints.
pub fn write_network<W: Write>(w: W, net: &KineticNetwork) -> Result<()> {
    let rec = NetworkRec {
        states: net
            .state_ids
            .iter()
            .zip(&net.state_energies)
            .map(|(id, &energy)| StateRec { id: id.clone(), energy })
            .collect(),
        edges: net.edges.iter().map(|e| EdgeRec { i: EndRec::Index(e.i), j: EndRec::Index(e.j), barrier: e.barrier }).collect(),
        temperature: net.temperature,
        gamma: net.transmission,
        unit: EnergyUnit::JPerMol,
    };
    serde_json::to_writer_pretty(w, &rec).map_err(|e| Error::Parse(e.to_string()))
}

/// Coordinate text: `n nnz`, then `nnz` lines `i j value` (1-based), then a
/// line `pi` followed by `n` values. Values carry 17 significant digits.
pub fn write_matrix<W: Write>(mut w: W, k: &RateMatrix<f64>) -> Result<()> {
    writeln!(w, "{} {}", k.n(), k.k().nnz())?;
    for (i, j, v) in k.k().iter() {
        writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
    }
    writeln!(w, "pi")?;
    for v in k.pi() {
        writeln!(w, "{v:.16e}")?;
    }
    Ok(())
}

fn tokens<R: BufRead>(r: R) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (no, line) in r.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("");
        out.extend(body.split_whitespace().map(|t| (no + 1, t.to_string())));
    }
    Ok(out)
}

fn parse<T: std::str::FromStr>(tok: Option<&(usize, String)>, what: &str) -> Result<T> {
    let (line, s) = tok.ok_or_else(|| Error::Parse(format!("unexpected end of input, expected {what}")))?;
    s.parse().map_err(|_| Error::Parse(format!("line {line}: cannot read {what} from {s:?}")))
}

/// Reads the coordinate format of [`write_matrix`] and validates it.
pub fn read_matrix<R: BufRead>(r: R, tol: &Tolerances) -> Result<RateMatrix<f64>> {
    let toks = tokens(r)?;
    let mut it = toks.iter();
    let n: usize = parse(it.next(), "n")?;
    let nnz: usize = parse(it.next(), "nnz")?;
    let mut trip = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let i: usize = parse(it.next(), "row index")?;
        let j: usize = parse(it.next(), "column index")?;
        let v: f64 = parse(it.next(), "value")?;
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::Parse(format!("entry ({i}, {j}) outside 1..={n}")));
        }
        trip.push((i - 1, j - 1, v));
    }
    match it.next() {
        Some((_, s)) if s == "pi" => {}
        other => return Err(Error::Parse(format!("expected `pi`, found {:?}", other.map(|t| &t.1)))),
    }
    let mut pi = Vec::with_capacity(n);
    for _ in 0..n {
        pi.push(parse::<f64>(it.next(), "pi entry")?);
    }
    if let Some((line, s)) = it.next() {
        return Err(Error::Parse(format!("line {line}: trailing token {s:?}")));
    }
    validate(&SparseMatrix::from_triplets(n, n, &trip), &pi, tol)
}

/// Whitespace-separated numbers, `#` starts a comment.
pub fn read_vector<R: BufRead>(r: R) -> Result<Vec<f64>> {
    let toks = tokens(r)?;
    toks.iter().map(|t| parse(Some(t), "number")).collect()
}

pub fn write_vector<W: Write>(mut w: W, v: &[f64]) -> Result<()> {
    for x in v {
        writeln!(w, "{x:.16e}")?;
    }
    Ok(())
}

/// Long-format CSV `k,t_seconds,state_id,q`.
pub fn write_trajectory<W: Write>(mut w: W, traj: &Trajectory<f64>, state_ids: &[String]) -> Result<()> {
    writeln!(w, "k,t_seconds,state_id,q")?;
    for s in &traj.entries {
        for (id, q) in state_ids.iter().zip(&s.q) {
            writeln!(w, "{},{:.16e},{},{:.16e}", s.k, s.t, id, q)?;
        }
    }
    Ok(())
}

/// CSV `k,t,pi_err,linf_err,boundA,boundB,flag`.
pub fn write_error_report<W: Write>(mut w: W, records: &[ErrorRecord]) -> Result<()> {
    writeln!(w, "k,t,pi_err,linf_err,boundA,boundB,flag")?;
    for r in records {
        let flag = if r.precision_limited {
            "precision-limited"
        } else if r.pi_err > r.bound_b {
            "above-boundB"
        } else {
            "ok"
        };
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.k, r.t, r.pi_err, r.linf_err, r.bound_a, r.bound_b, flag
        )?;
    }
    Ok(())
}
