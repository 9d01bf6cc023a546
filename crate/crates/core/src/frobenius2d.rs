//! Two-dimensional reduction and the one-dimensional dg duality toy model.
//!
//! `F'(M) = F(S¹ × M)` is a 2d theory, i.e. a commutative Frobenius ring;
//! for our theories it is the Verlinde ring with the vacuum-coefficient
//! trace. Surfaces are evaluated by composing unit, handle operator and
//! trace, without diagonalizing, so nothing here assumes semisimplicity.
//!
//! The second half checks dualizability of bounded complexes of free
//! abelian groups in exact integer arithmetic, with Koszul signs.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::modular::{ModularData, NamedCheck};
use crate::numeric::{complex_json, real_json, round_if_integral, CMatrix, MATRIX_TOL};
use crate::tqft3::{big_json, TheoryInstance};

pub const REDUCTION_MAX_GENUS: usize = 4;

#[derive(Clone, Debug)]
pub struct FrobeniusRing {
    labels: Vec<String>,
    /// `c_{ij}^k` at `(i * n + j) * n + k`.
    constants: Vec<Complex64>,
    unit: Vec<Complex64>,
    trace: Vec<Complex64>,
    pairing_condition: f64,
}

impl FrobeniusRing {
    /// Validates commutativity, associativity, the unit and nondegeneracy
    /// of the trace pairing, all at absolute tolerance `1e-9`.
    pub fn new(
        labels: Vec<String>,
        constants: Vec<Complex64>,
        unit: Vec<Complex64>,
        trace: Vec<Complex64>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 || constants.len() != n * n * n || unit.len() != n || trace.len() != n {
            return Err(Error::InvalidInput(format!(
                "Frobenius ring of rank {n} needs {} constants and unit/trace of length {n}",
                n * n * n
            )));
        }
        let mut ring = FrobeniusRing { labels, constants, unit, trace, pairing_condition: f64::INFINITY };
        ring.pairing_condition = condition_number(&ring.pairing());
        if let Some(bad) = ring.checks(MATRIX_TOL).into_iter().find(|c| !c.passed) {
            return Err(Error::Invariant(format!(
                "not a commutative Frobenius ring: {} residual {:.3e}",
                bad.name, bad.residual
            )));
        }
        Ok(ring)
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn constant(&self, i: usize, j: usize, k: usize) -> Complex64 {
        let n = self.rank();
        self.constants[(i * n + j) * n + k]
    }

    pub fn unit(&self) -> &[Complex64] {
        &self.unit
    }

    pub fn trace(&self) -> &[Complex64] {
        &self.trace
    }

    /// Ratio of extreme singular values of the trace pairing.
    pub fn pairing_condition(&self) -> f64 {
        self.pairing_condition
    }

    pub fn multiply(&self, x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
        let n = self.rank();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (i, &xi) in x.iter().enumerate().take(n) {
            if xi == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, &yj) in y.iter().enumerate().take(n) {
                let xy = xi * yj;
                if xy == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    *o += xy * self.constant(i, j, k);
                }
            }
        }
        out
    }

    pub fn apply_trace(&self, x: &[Complex64]) -> Complex64 {
        x.iter().zip(&self.trace).map(|(a, b)| a * b).sum()
    }

    /// `P_ij = θ(e_i e_j)`.
    pub fn pairing(&self) -> CMatrix {
        let n = self.rank();
        CMatrix::from_fn(n, n, |i, j| (0..n).map(|k| self.constant(i, j, k) * self.trace[k]).sum())
    }

    /// Matrix of multiplication by `x`, acting on coefficient columns.
    pub fn left_multiplication(&self, x: &[Complex64]) -> CMatrix {
        let n = self.rank();
        CMatrix::from_fn(n, n, |k, j| (0..n).map(|i| x[i] * self.constant(i, j, k)).sum())
    }

    /// Multiplication after comultiplication, applied to the unit:
    /// `Σ_ij (P⁻¹)_ij e_i e_j`.
    pub fn handle_element(&self) -> Vec<Complex64> {
        let n = self.rank();
        let inv = self.pairing().try_inverse().unwrap_or_else(|| CMatrix::zeros(n, n));
        let mut h = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                let w = inv[(i, j)];
                if w == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (k, hk) in h.iter_mut().enumerate() {
                    *hk += w * self.constant(i, j, k);
                }
            }
        }
        h
    }

    pub fn checks(&self, tol: f64) -> Vec<NamedCheck> {
        let n = self.rank();
        let basis = |i: usize| {
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            v[i] = Complex64::new(1.0, 0.0);
            v
        };
        let mut comm = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    comm = comm.max((self.constant(i, j, k) - self.constant(j, i, k)).norm());
                }
            }
        }
        let mut assoc = 0.0f64;
        let mut unit = 0.0f64;
        for i in 0..n {
            let ei = basis(i);
            let ue = self.multiply(&self.unit, &ei);
            unit = unit.max(ue.iter().zip(&ei).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
            for j in 0..n {
                let ij = self.multiply(&ei, &basis(j));
                for k in 0..n {
                    let ek = basis(k);
                    let left = self.multiply(&ij, &ek);
                    let right = self.multiply(&ei, &self.multiply(&basis(j), &ek));
                    assoc = assoc.max(left.iter().zip(&right).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
                }
            }
        }
        // condition numbers beyond ~1e12 leave no digits for the handle operator
        let nondegenerate = self.pairing_condition * 1e-12;
        vec![
            NamedCheck::new("commutativity", comm, tol),
            NamedCheck::new("associativity", assoc, tol),
            NamedCheck::new("unit", unit, tol),
            NamedCheck::new("pairing_nondegenerate", nondegenerate, 1.0),
        ]
    }

    /// `{rank, labels, unit, trace, constants: {"i,j,k": c}}`; zero constants are omitted.
    pub fn to_json(&self) -> Value {
        let n = self.rank();
        let mut constants = Map::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let c = self.constant(i, j, k);
                    if c.norm() > 1e-12 {
                        constants.insert(format!("{i},{j},{k}"), complex_json(c));
                    }
                }
            }
        }
        json!({
            "rank": n,
            "labels": self.labels,
            "unit": self.unit.iter().map(|&z| complex_json(z)).collect::<Vec<_>>(),
            "trace": self.trace.iter().map(|&z| complex_json(z)).collect::<Vec<_>>(),
            "constants": Value::Object(constants),
            "pairing_condition": real_json(self.pairing_condition),
        })
    }

    /// Inverse of [`FrobeniusRing::to_json`]; numbers may be real or `[re, im]`.
    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        let n = v["rank"].as_u64().ok_or_else(|| Error::InvalidInput("missing `rank`".into()))? as usize;
        let labels = match v.get("labels").and_then(Value::as_array) {
            Some(ls) => ls.iter().map(|l| l.as_str().map(str::to_string).unwrap_or_else(|| l.to_string())).collect(),
            None => (0..n).map(|i| format!("e{i}")).collect(),
        };
        let vector = |key: &str| -> Result<Vec<Complex64>> {
            v[key]
                .as_array()
                .ok_or_else(|| Error::InvalidInput(format!("missing `{key}`")))?
                .iter()
                .map(json_complex)
                .collect()
        };
        let (unit, trace) = (vector("unit")?, vector("trace")?);
        let mut constants = vec![Complex64::new(0.0, 0.0); n * n * n];
        let entries = v["constants"].as_object().ok_or_else(|| Error::InvalidInput("missing `constants`".into()))?;
        for (key, c) in entries {
            let idx: Vec<usize> = key
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse(format!("constant key {key:?} is not `i,j,k`")))?;
            if idx.len() != 3 || idx.iter().any(|&x| x >= n) {
                return Err(Error::InvalidInput(format!("constant key {key:?} out of range")));
            }
            constants[(idx[0] * n + idx[1]) * n + idx[2]] = json_complex(c)?;
        }
        Self::new(labels, constants, unit, trace)
    }
}

fn json_complex(v: &Value) -> Result<Complex64> {
    if let Some(x) = v.as_f64() {
        return Ok(Complex64::new(x, 0.0));
    }
    match v.as_array().map(|a| (a.first().and_then(Value::as_f64), a.get(1).and_then(Value::as_f64), a.len())) {
        Some((Some(re), Some(im), 2)) => Ok(Complex64::new(re, im)),
        _ => Err(Error::InvalidInput(format!("{v} is not a number or [re, im] pair"))),
    }
}

fn condition_number(m: &CMatrix) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Fusion ring of the simples with the vacuum-coefficient trace.
pub fn verlinde_ring(data: &ModularData) -> Result<FrobeniusRing> {
    let n = data.rank();
    let mut constants = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                constants.push(Complex64::new(data.fusion.get(i, j, k) as f64, 0.0));
            }
        }
    }
    let delta0 = |i: usize| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0);
    let labels = data.simples.iter().map(|a| a.label()).collect();
    FrobeniusRing::new(labels, constants, (0..n).map(delta0).collect(), (0..n).map(delta0).collect())
}

/// `θ(h^g)`: unit, then `g` applications of the handle operator, then trace.
pub fn surface_value(r: &FrobeniusRing, genus: usize) -> Complex64 {
    let handle = r.left_multiplication(&r.handle_element());
    let mut v = nalgebra::DVector::from_column_slice(r.unit());
    for _ in 0..genus {
        v = &handle * v;
    }
    r.apply_trace(v.as_slice())
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub ring: FrobeniusRing,
    /// `F'(Σ_g)` for `g = 0..=4`.
    pub table: Vec<u128>,
    /// Largest distance from the rounded value, relative to its size.
    pub max_deviation: f64,
}

impl Reduction {
    pub fn to_json(&self) -> Value {
        json!({
            "ring": self.ring.to_json(),
            "table": self.table.iter().map(|&x| big_json(x)).collect::<Vec<_>>(),
            "max_deviation": real_json(self.max_deviation),
        })
    }
}

pub fn reduce_theory(t: &TheoryInstance) -> Result<Reduction> {
    let ring = verlinde_ring(t.modular())?;
    let tol = t.settings().rounding_tol;
    let mut table = Vec::new();
    let mut max_deviation = 0.0f64;
    for g in 0..=REDUCTION_MAX_GENUS {
        let z = surface_value(&ring, g);
        let scale = z.re.abs().max(1.0);
        let deviation = ((z.re - z.re.round()).abs()).max(z.im.abs()) / scale;
        max_deviation = max_deviation.max(deviation);
        match round_if_integral(z.re, tol * scale).filter(|&r| r >= 0 && z.im.abs() <= tol * scale) {
            Some(r) => table.push(r as u128),
            None => return Err(Error::Invariant(format!("F'(Σ_{g}) = {z} is not a nonnegative integer"))),
        }
    }
    Ok(Reduction { ring, table, max_deviation })
}

// ---------------------------------------------------------------------------
// dg duality

/// A bounded complex of free abelian groups. `d_k` maps degree `k` to
/// `k + 1` and is stored as a `rank(k+1) × rank(k)` integer matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DgObject {
    pub degrees: BTreeMap<i32, usize>,
    #[serde(default)]
    pub differentials: BTreeMap<i32, Vec<Vec<i64>>>,
}

impl DgObject {
    pub fn new(degrees: BTreeMap<i32, usize>, differentials: BTreeMap<i32, Vec<Vec<i64>>>) -> Result<Self> {
        let degrees: BTreeMap<i32, usize> = degrees.into_iter().filter(|&(_, r)| r > 0).collect();
        let obj = DgObject { degrees, differentials };
        for (&k, m) in &obj.differentials {
            let (rows, cols) = (obj.rank(k + 1), obj.rank(k));
            let ok = m.len() == rows && m.iter().all(|r| r.len() == cols);
            // an all-empty matrix is fine between zero groups
            if !ok && !(rows == 0 || cols == 0) {
                return Err(Error::InvalidInput(format!(
                    "d_{k} must be {rows}×{cols} (rank {} → rank {})",
                    cols, rows
                )));
            }
        }
        for (&k, d0) in &obj.differentials {
            if let Some(d1) = obj.differentials.get(&(k + 1)) {
                let prod = int_mul(d1, d0, obj.rank(k));
                if let Some((i, j)) = first_nonzero(&prod) {
                    return Err(Error::InvalidInput(format!(
                        "d_{} ∘ d_{k} ≠ 0: entry ({i},{j}) is {}",
                        k + 1,
                        prod[i][j]
                    )));
                }
            }
        }
        Ok(obj)
    }

    /// `Z^rank` concentrated in one degree.
    pub fn free(rank: usize, degree: i32) -> Self {
        DgObject { degrees: [(degree, rank)].into_iter().filter(|&(_, r)| r > 0).collect(), differentials: BTreeMap::new() }
    }

    pub fn rank(&self, degree: i32) -> usize {
        self.degrees.get(&degree).copied().unwrap_or(0)
    }

    pub fn total_rank(&self) -> usize {
        self.degrees.values().sum()
    }

    /// Degree of each basis vector, in ascending degree order.
    pub fn basis_degrees(&self) -> Vec<i32> {
        self.degrees.iter().flat_map(|(&k, &r)| std::iter::repeat_n(k, r)).collect()
    }

    fn offset(&self, degree: i32) -> usize {
        self.degrees.range(..degree).map(|(_, r)| r).sum()
    }

    /// The total differential as a square matrix on the full basis.
    pub fn total_differential(&self) -> Vec<Vec<i64>> {
        let n = self.total_rank();
        let mut m = vec![vec![0i64; n]; n];
        for (&k, d) in &self.differentials {
            let (ro, co) = (self.offset(k + 1), self.offset(k));
            for (i, row) in d.iter().enumerate().take(self.rank(k + 1)) {
                for (j, &v) in row.iter().enumerate().take(self.rank(k)) {
                    m[ro + i][co + j] = v;
                }
            }
        }
        m
    }

    pub fn direct_sum(&self, other: &DgObject) -> DgObject {
        let mut degrees = self.degrees.clone();
        for (&k, &r) in &other.degrees {
            *degrees.entry(k).or_insert(0) += r;
        }
        let keys: std::collections::BTreeSet<i32> =
            self.differentials.keys().chain(other.differentials.keys()).copied().collect();
        let differentials = keys
            .into_iter()
            .map(|k| {
                let block = |o: &DgObject| -> Vec<Vec<i64>> {
                    o.differentials.get(&k).cloned().unwrap_or_else(|| vec![vec![0; o.rank(k)]; o.rank(k + 1)])
                };
                (k, block_diag(&block(self), &block(other), self.rank(k), other.rank(k)))
            })
            .collect();
        DgObject { degrees, differentials }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: DgObject = serde_json::from_str(text)?;
        Self::new(raw.degrees, raw.differentials)
    }
}

/// Pairing `B: A ⊗ A* → Z` and copairing `B∨: Z → A* ⊗ A`. `pairing[i][j]`
/// is `B(e_i, f_j)`; `copairing[j][i]` is the coefficient of `f_j ⊗ e_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualityData {
    pub dual: DgObject,
    pub pairing: Vec<Vec<i64>>,
    pub copairing: Vec<Vec<i64>>,
}

impl DualityData {
    /// Dual basis `f_i` in degree `-|e_i|`, dual differential
    /// `(-1)^{k+1} d_kᵀ`, and the evaluation/coevaluation identity matrices.
    pub fn standard(a: &DgObject) -> DualityData {
        let degrees: BTreeMap<i32, usize> = a.degrees.iter().map(|(&k, &r)| (-k, r)).collect();
        let differentials = a
            .differentials
            .iter()
            .map(|(&k, d)| {
                let sign = if (k + 1) % 2 == 0 { 1 } else { -1 };
                let t: Vec<Vec<i64>> =
                    (0..a.rank(k)).map(|i| (0..a.rank(k + 1)).map(|j| sign * d[j][i]).collect()).collect();
                (-k - 1, t)
            })
            .collect();
        let dual = DgObject { degrees, differentials };
        // e_i ↔ f_{σ(i)}: dual blocks come in reversed degree order
        let n = a.total_rank();
        let mut pairing = vec![vec![0i64; n]; n];
        for (&k, &r) in &a.degrees {
            for t in 0..r {
                pairing[a.offset(k) + t][dual.offset(-k) + t] = 1;
            }
        }
        let copairing = transpose(&pairing);
        DualityData { dual, pairing, copairing }
    }

    pub fn direct_sum(&self, a: &DgObject, other: &DualityData, b: &DgObject) -> DualityData {
        // basis of a ⊕ b interleaves the two by degree; build the permutations
        let sum = a.direct_sum(b);
        let dual = self.dual.direct_sum(&other.dual);
        let place = |x: &DgObject, y: &DgObject, s: &DgObject, first: bool| -> Vec<usize> {
            let mut idx = Vec::new();
            for (&k, &r) in if first { &x.degrees } else { &y.degrees } {
                let base = s.offset(k) + if first { 0 } else { x.rank(k) };
                idx.extend((0..r).map(|t| base + t));
            }
            idx
        };
        let (pa, pb) = (place(a, b, &sum, true), place(a, b, &sum, false));
        let (qa, qb) = (place(&self.dual, &other.dual, &dual, true), place(&self.dual, &other.dual, &dual, false));
        let mut pairing = vec![vec![0i64; dual.total_rank()]; sum.total_rank()];
        let mut copairing = vec![vec![0i64; sum.total_rank()]; dual.total_rank()];
        for (src, p, q) in [(self, &pa, &qa), (other, &pb, &qb)] {
            for (i, row) in src.pairing.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    pairing[p[i]][q[j]] = v;
                }
            }
            for (j, row) in src.copairing.iter().enumerate() {
                for (i, &v) in row.iter().enumerate() {
                    copairing[q[j]][p[i]] = v;
                }
            }
        }
        DualityData { dual, pairing, copairing }
    }
}

/// A dg object with a candidate duality, as read from a file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DgDualityFile {
    pub object: DgObject,
    pub dual: DgObject,
    pub pairing: Vec<Vec<i64>>,
    pub copairing: Vec<Vec<i64>>,
}

impl DgDualityFile {
    /// Parses the file, first replacing the strings `"n"` and `"-n"` by the
    /// integer `n` (so a single file can describe a family of complexes).
    pub fn parse(text: &str, n: Option<i64>) -> Result<(DgObject, DualityData)> {
        let mut v: Value = serde_json::from_str(text)?;
        substitute(&mut v, n)?;
        let f: DgDualityFile = serde_json::from_value(v)?;
        let object = DgObject::new(f.object.degrees, f.object.differentials)?;
        let dual = DgObject::new(f.dual.degrees, f.dual.differentials)?;
        Ok((object, DualityData { dual, pairing: f.pairing, copairing: f.copairing }))
    }
}

fn substitute(v: &mut Value, n: Option<i64>) -> Result<()> {
    match v {
        Value::String(s) if s == "n" || s == "-n" => {
            let n = n.ok_or_else(|| Error::InvalidInput("file uses the parameter `n`; pass --n".into()))?;
            *v = json!(if s == "n" { n } else { -n });
        }
        Value::Array(a) => a.iter_mut().try_for_each(|x| substitute(x, n))?,
        Value::Object(o) => o.values_mut().try_for_each(|x| substitute(x, n))?,
        _ => {}
    }
    Ok(())
}

/// The complex `Z --n--> Z` in degrees `-1, 0` with its dual in degrees `0, 1`:
/// `B(e₀, f₀) = B(e₋₁, f₁) = 1`, `B∨(1) = f₁ ⊗ e₋₁ + f₀ ⊗ e₀`.
pub fn multiplication_complex(n: i64) -> (DgObject, DualityData) {
    let object = DgObject {
        degrees: [(-1, 1), (0, 1)].into_iter().collect(),
        differentials: [(-1, vec![vec![n]])].into_iter().collect(),
    };
    let dual = DgObject {
        degrees: [(0, 1), (1, 1)].into_iter().collect(),
        differentials: [(0, vec![vec![n]])].into_iter().collect(),
    };
    // A basis (e₋₁, e₀); A* basis (f₀, f₁)
    let pairing = vec![vec![0, 1], vec![1, 0]];
    let copairing = vec![vec![0, 1], vec![1, 0]];
    (object, DualityData { dual, pairing, copairing })
}

/// One exact check; on failure, the first offending entry as
/// `(row, column, actual, expected)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DgCheck {
    pub name: &'static str,
    pub first_failure: Option<(usize, usize, i64, i64)>,
}

impl DgCheck {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({ "name": self.name, "passed": self.passed() });
        if let Some((i, j, got, want)) = self.first_failure {
            v["first_failure"] = json!({ "row": i, "col": j, "actual": got, "expected": want });
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DgReport {
    pub checks: Vec<DgCheck>,
}

impl DgReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(DgCheck::passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "passed": self.passed(),
            "checks": self.checks.iter().map(DgCheck::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Snake identities, plus: `B` and `B∨` have degree zero, `B` is a chain
/// map `A ⊗ A* → Z`, and `B∨(1)` is a cycle in `A* ⊗ A`.
pub fn dg_check_duality(a: &DgObject, d: &DualityData) -> Result<DgReport> {
    let (n, m) = (a.total_rank(), d.dual.total_rank());
    let shape = |mat: &Vec<Vec<i64>>, r: usize, c: usize| mat.len() == r && mat.iter().all(|row| row.len() == c);
    if !shape(&d.pairing, n, m) || !shape(&d.copairing, m, n) {
        return Err(Error::InvalidInput(format!(
            "pairing must be {n}×{m} and copairing {m}×{n} for ranks {n} and {m}"
        )));
    }
    let da = a.basis_degrees();
    let df = d.dual.basis_degrees();
    let a_diff = a.total_differential();
    let f_diff = d.dual.total_differential();
    let b = &d.pairing;
    let cp = &d.copairing;
    let sign = |k: i32| if k.rem_euclid(2) == 0 { 1i64 } else { -1 };

    let mut checks = Vec::new();
    let degree_zero = |mat: &Vec<Vec<i64>>, rows: &[i32], cols: &[i32]| {
        first_where(mat.len(), mat.first().map_or(0, Vec::len), |i, j| {
            (mat[i][j] != 0 && rows[i] + cols[j] != 0).then_some((mat[i][j], 0))
        })
    };
    checks.push(DgCheck { name: "pairing_degree", first_failure: degree_zero(b, &da, &df) });
    checks.push(DgCheck { name: "copairing_degree", first_failure: degree_zero(cp, &df, &da) });

    // (B ∘ (d ⊗ 1 + 1 ⊗ d))(e_i ⊗ f_j) = Σ_i' d_{i'i} B[i'][j] + (-1)^{|e_i|} Σ_j' d*_{j'j} B[i][j']
    checks.push(DgCheck {
        name: "pairing_chain_map",
        first_failure: first_where(n, m, |i, j| {
            let v: i64 = (0..n).map(|k| a_diff[k][i] * b[k][j]).sum::<i64>()
                + sign(da[i]) * (0..m).map(|k| f_diff[k][j] * b[i][k]).sum::<i64>();
            (v != 0).then_some((v, 0))
        }),
    });
    // coefficient of f_j ⊗ e_i in d(Σ cp[j'][i'] f_j' ⊗ e_i')
    checks.push(DgCheck {
        name: "copairing_closed",
        first_failure: first_where(m, n, |j, i| {
            let v: i64 = (0..m).map(|k| f_diff[j][k] * cp[k][i]).sum::<i64>()
                + sign(df[j]) * (0..n).map(|k| a_diff[i][k] * cp[j][k]).sum::<i64>();
            (v != 0).then_some((v, 0))
        }),
    });
    // A → A ⊗ A* ⊗ A → A: M1[i'][i] = Σ_j B[i][j] cp[j][i']
    checks.push(DgCheck {
        name: "snake_left",
        first_failure: first_where(n, n, |ip, i| {
            let v: i64 = (0..m).map(|j| b[i][j] * cp[j][ip]).sum();
            let want = i64::from(ip == i);
            (v != want).then_some((v, want))
        }),
    });
    // A* → A* ⊗ A ⊗ A* → A*: M2[j'][j] = Σ_i cp[j'][i] B[i][j]
    checks.push(DgCheck {
        name: "snake_right",
        first_failure: first_where(m, m, |jp, j| {
            let v: i64 = (0..n).map(|i| cp[jp][i] * b[i][j]).sum();
            let want = i64::from(jp == j);
            (v != want).then_some((v, want))
        }),
    });
    Ok(DgReport { checks })
}

/// `B ∘ τ ∘ B∨` with the Koszul-signed swap `τ(f ⊗ e) = (-1)^{|f||e|} e ⊗ f`:
/// the graded trace of the identity, i.e. the Euler characteristic.
pub fn dg_loop_invariant(a: &DgObject, d: &DualityData) -> Result<i64> {
    let report = dg_check_duality(a, d)?;
    if let Some(bad) = report.checks.iter().find(|c| !c.passed()) {
        return Err(Error::Invariant(format!("duality data fails `{}` at {:?}", bad.name, bad.first_failure)));
    }
    let da = a.basis_degrees();
    let df = d.dual.basis_degrees();
    let mut total = 0i64;
    for (j, row) in d.copairing.iter().enumerate() {
        for (i, &c) in row.iter().enumerate() {
            let s = if (df[j] * da[i]).rem_euclid(2) == 0 { 1 } else { -1 };
            total += c * s * d.pairing[i][j];
        }
    }
    Ok(total)
}

fn first_where(
    rows: usize,
    cols: usize,
    f: impl Fn(usize, usize) -> Option<(i64, i64)>,
) -> Option<(usize, usize, i64, i64)> {
    (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).find_map(|(i, j)| f(i, j).map(|(a, b)| (i, j, a, b)))
}

fn int_mul(a: &[Vec<i64>], b: &[Vec<i64>], cols: usize) -> Vec<Vec<i64>> {
    a.iter()
        .map(|row| (0..cols).map(|j| row.iter().zip(b).map(|(x, brow)| x * brow[j]).sum()).collect())
        .collect()
}

fn first_nonzero(m: &[Vec<i64>]) -> Option<(usize, usize)> {
    m.iter().enumerate().find_map(|(i, r)| r.iter().position(|&x| x != 0).map(|j| (i, j)))
}

fn transpose(m: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|j| m.iter().map(|r| r[j]).collect()).collect()
}

fn block_diag(a: &[Vec<i64>], b: &[Vec<i64>], a_cols: usize, b_cols: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    for r in a {
        let mut row = r.clone();
        row.resize(a_cols, 0);
        row.extend(std::iter::repeat_n(0, b_cols));
        out.push(row);
    }
    for r in b {
        let mut row = vec![0; a_cols];
        row.extend(r.iter().copied());
        row.resize(a_cols + b_cols, 0);
        out.push(row);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycles::standard_cyclic_cocycle;
    use crate::numeric::Settings;
    use crate::tqft3::{hilbert_dim, SurfaceSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ring_of(spec: &str) -> (TheoryInstance, FrobeniusRing) {
        let t = TheoryInstance::named(spec, Settings::default()).unwrap();
        let r = verlinde_ring(t.modular()).unwrap();
        (t, r)
    }

    #[test]
    fn toric_code_ring_is_klein_four() {
        let (_, r) = ring_of("C2");
        assert_eq!(r.rank(), 4);
        for i in 0..4 {
            for j in 0..4 {
                let prods: Vec<usize> = (0..4).filter(|&k| r.constant(i, j, k).re > 0.5).collect();
                // labels 0..4 are (class, character) bits; fusion is xor
                assert_eq!(prods, vec![i ^ j]);
            }
        }
        assert!((surface_value(&r, 2) - 16.0).norm() < 1e-9);
    }

    #[test]
    fn rank_one_ring() {
        let one = Complex64::new(1.0, 0.0);
        let r = FrobeniusRing::new(vec!["1".into()], vec![one], vec![one], vec![one]).unwrap();
        for g in 0..6 {
            assert!((surface_value(&r, g) - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn invalid_rings_rejected() {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        // zero trace: degenerate pairing
        assert!(FrobeniusRing::new(vec!["1".into()], vec![one], vec![one], vec![z]).is_err());
        // e1 e1 = e0 but e0 is not a unit
        let c = vec![z, one, one, z, one, z, z, z];
        assert!(FrobeniusRing::new(vec!["a".into(), "b".into()], c, vec![one, z], vec![one, z]).is_err());
    }

    #[test]
    fn genus_one_is_rank_and_matches_hilbert() {
        for spec in ["C2", "C3", "S3", "D4", "Q8"] {
            let (t, r) = ring_of(spec);
            assert!((surface_value(&r, 1) - r.rank() as f64).norm() < 1e-9);
            for g in 0..=4 {
                let h = hilbert_dim(&t, SurfaceSpec::new(g).unwrap()).unwrap() as f64;
                let z = surface_value(&r, g);
                assert!((z - h).norm() / h < 1e-9, "{spec} g={g}: {z} vs {h}");
            }
        }
    }

    #[test]
    fn pairing_is_charge_conjugation() {
        let (t, r) = ring_of("S3");
        let p = r.pairing();
        let c = &t.modular().conjugation;
        for i in 0..r.rank() {
            for j in 0..r.rank() {
                let want = if c[i] == j { 1.0 } else { 0.0 };
                assert!((p[(i, j)] - want).norm() < 1e-12);
            }
        }
        let w = standard_cyclic_cocycle(3, 1).unwrap();
        let t = TheoryInstance::new(w.group().clone(), w, Settings::default()).unwrap();
        let r = verlinde_ring(t.modular()).unwrap();
        let p = r.pairing();
        for (i, &ci) in t.modular().conjugation.iter().enumerate() {
            assert!((p[(i, ci)] - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn reduction_tables() {
        let t = TheoryInstance::named("C2", Settings::default()).unwrap();
        assert_eq!(reduce_theory(&t).unwrap().table, vec![1, 4, 16, 64, 256]);
        let w = standard_cyclic_cocycle(2, 1).unwrap();
        let t = TheoryInstance::new(w.group().clone(), w, Settings::default()).unwrap();
        assert_eq!(reduce_theory(&t).unwrap().table, vec![1, 4, 16, 64, 256]);
        let t = TheoryInstance::named("S3", Settings::default()).unwrap();
        assert_eq!(reduce_theory(&t).unwrap().table[0], 1);
    }

    #[test]
    fn ring_json_round_trip() {
        let (_, r) = ring_of("S3");
        let text = r.to_json().to_string();
        let back = FrobeniusRing::from_json(&text).unwrap();
        assert_eq!(back.rank(), r.rank());
        for g in 0..4 {
            assert!((surface_value(&back, g) - surface_value(&r, g)).norm() < 1e-9);
        }
    }

    #[test]
    fn multiplication_complex_is_self_consistent() {
        for n in [0, 1, 2, 3, 5, -4] {
            let (a, d) = multiplication_complex(n);
            let report = dg_check_duality(&a, &d).unwrap();
            assert!(report.passed(), "n={n}: {report:?}");
            assert_eq!(dg_loop_invariant(&a, &d).unwrap(), 0);
        }
    }

    #[test]
    fn perturbed_copairing_fails() {
        let (a, mut d) = multiplication_complex(5);
        // B∨(1) = f₀ ⊗ e₀ only
        d.copairing = vec![vec![0, 1], vec![0, 0]];
        let report = dg_check_duality(&a, &d).unwrap();
        assert!(!report.passed());
        let bad: Vec<&str> = report.checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
        assert!(bad.contains(&"snake_left"));
        assert!(dg_loop_invariant(&a, &d).is_err());
    }

    #[test]
    fn free_objects_count_signed_rank() {
        for r in 0..5usize {
            for k in -3..=3i32 {
                let a = DgObject::free(r, k);
                let d = DualityData::standard(&a);
                let expect = if k % 2 == 0 { r as i64 } else { -(r as i64) };
                assert_eq!(dg_loop_invariant(&a, &d).unwrap(), expect);
            }
        }
    }

    fn random_complex(rng: &mut ChaCha8Rng) -> DgObject {
        // d = (n) from a shifted two-term complex, plus free summands
        let shift = rng.gen_range(-2..=2);
        let n = rng.gen_range(-6..=6);
        let mut a = DgObject {
            degrees: [(shift, 1), (shift + 1, 1)].into_iter().collect(),
            differentials: [(shift, vec![vec![n]])].into_iter().collect(),
        };
        for _ in 0..rng.gen_range(0..3) {
            a = a.direct_sum(&DgObject::free(rng.gen_range(1..3), rng.gen_range(-2..=2)));
        }
        a
    }

    fn euler(a: &DgObject) -> i64 {
        a.degrees.iter().map(|(&k, &r)| if k % 2 == 0 { r as i64 } else { -(r as i64) }).sum()
    }

    #[test]
    fn standard_duals_pass_and_loop_is_euler_characteristic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let a = random_complex(&mut rng);
            let d = DualityData::standard(&a);
            let report = dg_check_duality(&a, &d).unwrap();
            assert!(report.passed(), "{a:?}: {report:?}");
            assert_eq!(dg_loop_invariant(&a, &d).unwrap(), euler(&a));
        }
    }

    #[test]
    fn loop_invariant_is_additive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2, 3, 5] {
            let (a, d) = multiplication_complex(n);
            for _ in 0..10 {
                let b = random_complex(&mut rng);
                let db = DualityData::standard(&b);
                let sum = a.direct_sum(&b);
                let dsum = d.direct_sum(&a, &db, &b);
                let total = dg_loop_invariant(&sum, &dsum).unwrap();
                assert_eq!(total, dg_loop_invariant(&a, &d).unwrap() + dg_loop_invariant(&b, &db).unwrap());
            }
        }
    }

    #[test]
    fn d_squared_must_vanish() {
        let degrees = [(0, 1), (1, 1), (2, 1)].into_iter().collect();
        let diffs = [(0, vec![vec![1]]), (1, vec![vec![1]])].into_iter().collect();
        assert!(DgObject::new(degrees, diffs).is_err());
    }

    #[test]
    fn file_substitution() {
        let text = include_str!("../data/multiplication_by_n.json");
        let (a, d) = DgDualityFile::parse(text, Some(3)).unwrap();
        assert_eq!((a.clone(), d.clone()), multiplication_complex(3));
        assert!(DgDualityFile::parse(text, None).is_err());
        assert_eq!(dg_loop_invariant(&a, &d).unwrap(), 0);
    }
}
