//! Modular data of the (twisted) Drinfeld double of a finite group.
//!
//! Simple objects are pairs (conjugacy class `[x]`, irreducible
//! `θ_x`-projective representation of the centralizer `C(x)`), where `θ_x`
//! is the transgression of the level. Projective characters come from the
//! ordinary character table of the central extension
//! `1 -> μ_N -> E -> C(x) -> 1` defined by `θ_x`, keeping the irreducibles on
//! which the central `μ_N` acts by the standard primitive character.
//!
//! Supported scope: arbitrary `G` with the unit cocycle, and abelian `G`
//! with any 3-cocycle.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::cocycles::{transgress, Cochain};
use crate::error::{Error, Result};
use crate::groups::lex_cmp;
use crate::groups::{character_table, Element, FiniteGroup, Subgroup, DEFAULT_WORK_BUDGET, MAX_CHARACTER_ORDER};
use crate::numeric::{complex_json, max_abs, real_json, round_if_integral, CMatrix, Settings};

#[derive(Clone, Debug)]
pub struct SimpleObject {
    pub class_index: usize,
    pub class_rep: Element,
    pub class_size: usize,
    /// Position among the simples supported on the same class.
    pub index_in_class: usize,
    pub degree: usize,
    pub quantum_dim: usize,
    /// Projective character on the centralizer of `class_rep`, indexed by
    /// the centralizer's local element indices.
    pub projective_character: Vec<Complex64>,
}

impl SimpleObject {
    pub fn label(&self) -> String {
        format!("[{}]{}", self.class_rep, self.index_in_class)
    }
}

/// `N_{ij}^k`, stored densely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FusionRules {
    rank: usize,
    values: Vec<u32>,
}

impl FusionRules {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> u32 {
        self.values[(i * self.rank + j) * self.rank + k]
    }

    /// Simple objects appearing in `i ⊗ j`, with multiplicity.
    pub fn product(&self, i: usize, j: usize) -> Vec<(usize, u32)> {
        (0..self.rank).filter_map(|k| Some((k, self.get(i, j, k))).filter(|&(_, n)| n > 0)).collect()
    }

    /// The dual of each simple: the unique `j` with `N_{ij}^0 = 1`.
    pub fn duals(&self) -> Vec<usize> {
        (0..self.rank)
            .map(|i| (0..self.rank).find(|&j| self.get(i, j, 0) == 1).unwrap_or(i))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct ModularData {
    pub group: Arc<FiniteGroup>,
    pub simples: Vec<SimpleObject>,
    pub s: CMatrix,
    pub t: Vec<Complex64>,
    pub fusion: FusionRules,
    /// Charge conjugation read off from `S²`.
    pub conjugation: Vec<usize>,
    /// Multiple of every twist's order: `|G|` times the order of the level's values.
    pub twist_order_bound: u64,
}

impl ModularData {
    pub fn compute(group: &Arc<FiniteGroup>, omega: &Cochain, settings: &Settings) -> Result<ModularData> {
        let simples = simple_objects(group, omega, settings.seed)?;
        let t = t_matrix(group, &simples);
        let s = s_matrix(group, &simples);
        let bound = group.order() as u64 * omega.minimal_modulus();
        let dims: Vec<usize> = simples.iter().map(|a| a.quantum_dim).collect();
        let report = axiom_checks(&s, &t, &dims, group.order(), bound, settings.matrix_tol, settings.rounding_tol);
        if let Some(bad) = report.checks.iter().find(|c| !c.passed) {
            return Err(Error::Invariant(format!(
                "modularity violation for {}: {} residual {:.3e} exceeds {:.1e}",
                group.name(),
                bad.name,
                bad.residual,
                bad.tolerance
            )));
        }
        let fusion = fusion_coefficients(&s, settings.rounding_tol)?;
        let conjugation = permutation_of(&(&s * &s), settings.matrix_tol)
            .ok_or_else(|| Error::Invariant("S² is not a permutation matrix".into()))?;
        Ok(ModularData { group: group.clone(), simples, s, t, fusion, conjugation, twist_order_bound: bound })
    }

    pub fn rank(&self) -> usize {
        self.simples.len()
    }

    pub fn global_dim(&self) -> usize {
        self.group.order()
    }

    pub fn t_matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.t.clone()))
    }

    /// `Σ_a S_{0a}^{2-2g}`: the Verlinde dimension of the genus-`g` surface, unrounded.
    pub fn verlinde_sum(&self, genus: usize) -> f64 {
        let e = 2 - 2 * genus as i32;
        (0..self.rank()).map(|a| self.s[(0, a)].re.powi(e)).sum()
    }

    /// `{simples, S, T, fusion}` with canonically ordered keys.
    pub fn to_json(&self) -> Value {
        let simples: Vec<Value> = self
            .simples
            .iter()
            .map(|a| {
                json!({
                    "label": a.label(),
                    "class_rep": a.class_rep,
                    "degree": a.degree,
                    "qdim": a.quantum_dim,
                })
            })
            .collect();
        let s: Vec<Value> = self
            .s
            .row_iter()
            .map(|row| Value::Array(row.iter().map(|&z| complex_json(z)).collect()))
            .collect();
        let t: Vec<Value> = self.t.iter().map(|&z| complex_json(z)).collect();
        let mut fusion = Map::new();
        let n = self.rank();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = self.fusion.get(i, j, k);
                    if v > 0 {
                        fusion.insert(format!("{i},{j},{k}"), json!(v));
                    }
                }
            }
        }
        json!({
            "group": self.group.name(),
            "simples": simples,
            "S": s,
            "T": t,
            "fusion": Value::Object(fusion),
        })
    }
}

/// Simple objects of the double, in canonical order: class representative,
/// then degree, then descending lexicographic character values.
pub fn simple_objects(group: &Arc<FiniteGroup>, omega: &Cochain, seed: u64) -> Result<Vec<SimpleObject>> {
    if omega.degree() != 3 || **omega.group() != **group {
        return Err(Error::InvalidInput("level must be a 3-cochain on the gauge group".into()));
    }
    if !omega.is_unit() && !group.is_abelian() {
        return Err(Error::Scope(format!(
            "twisted doubles of nonabelian groups are not supported ({} is nonabelian)",
            group.name()
        )));
    }
    for class in group.conjugacy_classes() {
        let c = class.centralizer.order();
        if c > MAX_CHARACTER_ORDER {
            return Err(Error::UnsupportedSize(format!(
                "centralizer of {} has order {c}, beyond the character-table limit {MAX_CHARACTER_ORDER}",
                class.representative
            )));
        }
    }
    let work = (group.order() as u128).pow(4);
    if !omega.is_unit() && work > DEFAULT_WORK_BUDGET {
        return Err(Error::Budget(format!("verifying a 3-cocycle on {} needs {work} evaluations", group.name())));
    }
    if let Some(bad) = omega.cocycle_violation() {
        return Err(Error::InvalidInput(format!("level is not a 3-cocycle: fails at {bad:?}")));
    }
    let per_class: Vec<Result<Vec<SimpleObject>>> = group
        .conjugacy_classes()
        .par_iter()
        .enumerate()
        .map(|(ci, class)| {
            let x = class.representative;
            let theta = transgress(omega, x)?;
            let chars = projective_characters(&theta.centralizer, &theta.values, seed)?;
            Ok(chars
                .into_iter()
                .enumerate()
                .map(|(k, (degree, values))| SimpleObject {
                    class_index: ci,
                    class_rep: x,
                    class_size: class.size(),
                    index_in_class: k,
                    degree,
                    quantum_dim: class.size() * degree,
                    projective_character: values,
                })
                .collect())
        })
        .collect();
    let mut simples = Vec::new();
    for r in per_class {
        simples.extend(r?);
    }
    let n = group.order();
    let dim_sum: usize = simples.iter().map(|a| a.quantum_dim * a.quantum_dim).sum();
    if dim_sum != n * n {
        return Err(Error::Invariant(format!("Σ d_a² = {dim_sum}, expected |G|² = {}", n * n)));
    }
    Ok(simples)
}

/// Irreducible `theta`-projective characters of `c`, as (degree, values on
/// local elements), sorted by degree then descending values.
fn projective_characters(c: &Subgroup, theta: &Cochain, seed: u64) -> Result<Vec<(usize, Vec<Complex64>)>> {
    let h = c.group();
    let k = h.order();
    let mut out: Vec<(usize, Vec<Complex64>)> = if theta.is_unit() {
        let table = character_table(h, seed)?;
        table
            .characters
            .iter()
            .zip(&table.degrees)
            .map(|(row, &d)| (d, h.elements().map(|e| row[h.class_of(e)]).collect()))
            .collect()
    } else {
        let theta = theta.reduced();
        let m = theta.modulus() as usize;
        let order = m * k;
        let mut table = Vec::with_capacity(order * order);
        for a in 0..order {
            let (ja, ca) = (a / k, a % k);
            for b in 0..order {
                let (jb, cb) = (b / k, b % k);
                let j = (ja + jb + theta.numerator(&[ca, cb]) as usize) % m;
                table.push(j * k + h.mul(ca, cb));
            }
        }
        let ext = FiniteGroup::from_table(format!("{}~{m}", h.name()), order, &table)
            .map_err(|e| Error::Invariant(format!("central extension is not a group: {e}")))?;
        let chars = character_table(&ext, seed)?;
        let zeta = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / m as f64);
        let central = ext.class_of(k);
        chars
            .characters
            .iter()
            .zip(&chars.degrees)
            .filter(|(row, &d)| (row[central] - zeta * d as f64).norm() < 1e-6)
            .map(|(row, &d)| (d, h.elements().map(|e| row[ext.class_of(e)]).collect()))
            .collect()
    };
    out.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| lex_cmp(&b.1, &a.1)));
    let square_sum: usize = out.iter().map(|(d, _)| d * d).sum();
    if square_sum != k {
        return Err(Error::Invariant(format!(
            "projective degrees of {} square-sum to {square_sum}, expected {k}",
            h.name()
        )));
    }
    Ok(out)
}

/// `T_a = χ_a(x_a) / χ_a(e)`.
pub fn t_matrix(group: &FiniteGroup, simples: &[SimpleObject]) -> Vec<Complex64> {
    simples
        .iter()
        .map(|a| {
            let c = group.conjugacy_classes()[a.class_index].centralizer.local_index(a.class_rep);
            a.projective_character[c.unwrap_or(0)] / a.degree as f64
        })
        .collect()
}

/// `S_ab = 1/(|C(x_a)||C(x_b)|) Σ_{g : [x_a, g x_b g⁻¹] = 1} conj χ_a(g x_b g⁻¹) conj χ_b(g⁻¹ x_a g)`.
pub fn s_matrix(group: &FiniteGroup, simples: &[SimpleObject]) -> CMatrix {
    let n = simples.len();
    let classes = group.conjugacy_classes();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let sa = &simples[a];
            let ca = &classes[sa.class_index].centralizer;
            (0..n)
                .map(|b| {
                    let sb = &simples[b];
                    let cb = &classes[sb.class_index].centralizer;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for g in group.elements() {
                        let y = group.conjugate(g, sb.class_rep);
                        let Some(ly) = ca.local_index(y) else { continue };
                        let z = group.conjugate(group.inv(g), sa.class_rep);
                        let lz = cb.local_index(z).expect("conjugate of a commuting pair commutes");
                        acc += (sa.projective_character[ly] * sb.projective_character[lz]).conj();
                    }
                    acc / (ca.order() * cb.order()) as f64
                })
                .collect()
        })
        .collect();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

/// Verlinde formula `N_{ij}^k = Σ_m S_im S_jm conj(S_km) / S_0m`, rounded.
pub fn fusion_coefficients(s: &CMatrix, tol: f64) -> Result<FusionRules> {
    let n = s.nrows();
    let tensor = verlinde_tensor(s);
    let values: Vec<Result<Vec<u32>>> = tensor
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            let mut row = Vec::with_capacity(n * n);
            for j in 0..n {
                for k in 0..n {
                    let v = m[(j, k)];
                    let r = round_if_integral(v.re, tol).filter(|&r| r >= 0 && v.im.abs() <= tol);
                    match r {
                        Some(r) => row.push(r as u32),
                        None => {
                            return Err(Error::Invariant(format!(
                                "fusion coefficient N_({i},{j})^{k} = {v} is not a nonnegative integer"
                            )))
                        }
                    }
                }
            }
            Ok(row)
        })
        .collect();
    let mut flat = Vec::with_capacity(n * n * n);
    for r in values {
        flat.extend(r?);
    }
    let rules = FusionRules { rank: n, values: flat };
    for i in 0..n {
        for k in 0..n {
            if rules.get(i, 0, k) != u32::from(i == k) {
                return Err(Error::Invariant(format!("unit constraint N_({i},0)^{k} fails")));
            }
        }
    }
    Ok(rules)
}

pub fn quantum_dimensions(data: &ModularData) -> Vec<usize> {
    data.simples.iter().map(|a| a.quantum_dim).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedCheck {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl NamedCheck {
    pub fn new(name: &str, residual: f64, tolerance: f64) -> Self {
        NamedCheck { name: name.to_string(), residual, tolerance, passed: residual <= tolerance }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "residual": real_json(self.residual),
            "tolerance": real_json(self.tolerance),
            "passed": self.passed,
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct AxiomReport {
    pub checks: Vec<NamedCheck>,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.residual)
    }
}

pub fn verify_modular_axioms(data: &ModularData) -> AxiomReport {
    verify_modular_axioms_with(data, &Settings::default())
}

pub fn verify_modular_axioms_with(data: &ModularData, settings: &Settings) -> AxiomReport {
    let dims = quantum_dimensions(data);
    axiom_checks(
        &data.s,
        &data.t,
        &dims,
        data.global_dim(),
        data.twist_order_bound,
        settings.matrix_tol,
        settings.rounding_tol,
    )
}

fn axiom_checks(
    s: &CMatrix,
    t: &[Complex64],
    dims: &[usize],
    order: usize,
    twist_order_bound: u64,
    tol: f64,
    rounding_tol: f64,
) -> AxiomReport {
    let n = s.nrows();
    let id = CMatrix::identity(n, n);
    let tm = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(t.to_vec()));
    let s2 = s * s;
    let st = s * &tm;
    let st3 = &st * &st * &st;

    let mut checks = vec![
        NamedCheck::new("unitarity", max_abs(&(s * s.adjoint() - &id)), tol),
        NamedCheck::new("symmetry", max_abs(&(s - s.transpose())), tol),
        NamedCheck::new("st_cubed", max_abs(&(&st3 - &s2)), tol),
    ];

    let perm_residual = match permutation_of(&s2, tol) {
        Some(p) => {
            let dist = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| (s2[(i, j)] - if p[i] == j { 1.0 } else { 0.0 }).norm())
                .fold(0.0, f64::max);
            let involution = (0..n).all(|i| p[p[i]] == i);
            if involution {
                dist
            } else {
                1.0
            }
        }
        None => 1.0,
    };
    checks.push(NamedCheck::new("s_squared_permutation", perm_residual, tol));

    let twist_residual = t
        .iter()
        .map(|z| {
            // distance to the nearest root of unity of order dividing the bound
            let m = twist_order_bound as f64;
            let k = (z.arg() * m / std::f64::consts::TAU).round();
            (z - Complex64::from_polar(1.0, std::f64::consts::TAU * k / m)).norm()
        })
        .fold(0.0, f64::max);
    checks.push(NamedCheck::new("t_finite_order", twist_residual, tol));
    checks.push(NamedCheck::new("t_vacuum", (t[0] - 1.0).norm(), tol));

    let vacuum_row = (0..n)
        .map(|a| {
            let z = s[(0, a)];
            let expect = dims[a] as f64 / order as f64;
            if z.re <= 0.0 {
                1.0
            } else {
                (z - expect).norm()
            }
        })
        .fold(0.0, f64::max);
    checks.push(NamedCheck::new("vacuum_row", vacuum_row, tol));

    let dim_sum: f64 = dims.iter().map(|&d| (d * d) as f64).sum();
    checks.push(NamedCheck::new("dimension_sum", (dim_sum - (order * order) as f64).abs(), tol));

    let gauss: Complex64 =
        dims.iter().zip(t).map(|(&d, &z)| z * (d * d) as f64).sum::<Complex64>() / order as f64;
    checks.push(NamedCheck::new("gauss_sum", (gauss - 1.0).norm(), tol));

    let mut worst = 0.0f64;
    let mut unit = 0.0f64;
    for (i, m) in verlinde_tensor(s).iter().enumerate() {
        for j in 0..n {
            for k in 0..n {
                let v = m[(j, k)];
                worst = worst.max((v - v.re.round().max(0.0)).norm());
                if j == 0 {
                    unit = unit.max((v - if i == k { 1.0 } else { 0.0 }).norm());
                }
            }
        }
    }
    checks.push(NamedCheck::new("verlinde_integrality", worst, rounding_tol));
    checks.push(NamedCheck::new("fusion_unit", unit, rounding_tol));
    AxiomReport { checks }
}

/// `[N_i]_{jk} = N_{ij}^k = Σ_m S_im S_jm conj(S_km) / S_0m`, i.e. `S D_i S†`
/// with `D_i = diag(S_im / S_0m)`.
fn verlinde_tensor(s: &CMatrix) -> Vec<CMatrix> {
    let n = s.nrows();
    let adj = s.adjoint();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let ratio: Vec<Complex64> = (0..n).map(|m| s[(i, m)] / s[(0, m)]).collect();
            let scaled = CMatrix::from_fn(n, n, |j, m| s[(j, m)] * ratio[m]);
            scaled * &adj
        })
        .collect()
}

/// The permutation `p` with `m[(i, p[i])] ≈ 1` and all other entries ≈ 0.
fn permutation_of(m: &CMatrix, tol: f64) -> Option<Vec<usize>> {
    let n = m.nrows();
    let mut p = Vec::with_capacity(n);
    for i in 0..n {
        let hits: Vec<usize> = (0..n).filter(|&j| (m[(i, j)] - 1.0).norm() <= tol.max(1e-6)).collect();
        if hits.len() != 1 {
            return None;
        }
        p.push(hits[0]);
    }
    let mut seen = vec![false; n];
    for &j in &p {
        if std::mem::replace(&mut seen[j], true) {
            return None;
        }
    }
    Some(p)
}

/// Sorted twist spectrum, for comparing theories up to relabeling.
pub fn twist_spectrum(data: &ModularData) -> Vec<(i64, i64)> {
    let mut v: Vec<(i64, i64)> =
        data.t.iter().map(|z| ((z.re * 1e8).round() as i64, (z.im * 1e8).round() as i64)).collect();
    v.sort_unstable();
    v
}
