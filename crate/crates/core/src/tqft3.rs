//! The finite path integral in three dimensions.
//!
//! Closed 3-manifolds are evaluated either through modular data (Verlinde
//! sums, `SL(2,Z)` words for lens spaces and torus bundles) or directly as
//! groupoid cardinalities `|Hom(π₁X, G)| / |G|` when the level is trivial.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::cocycles::{parse_cocycle_spec, Cochain};
use crate::error::{Error, Result};
use crate::frobenius2d::{surface_value, verlinde_ring};
use crate::groups::{
    build_named_group, count_homomorphisms_within, orbit_count_homomorphisms_within, FiniteGroup,
    GroupPresentation, DEFAULT_WORK_BUDGET,
};
use crate::modular::{ModularData, NamedCheck};
use crate::numeric::{complex_json, real_json, round_if_integral, CMatrix, Settings};

pub const MAX_GENUS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SurfaceSpec {
    genus: usize,
}

impl SurfaceSpec {
    pub fn new(genus: usize) -> Result<Self> {
        Self::with_max(genus, MAX_GENUS)
    }

    pub fn with_max(genus: usize, max: usize) -> Result<Self> {
        if genus > max {
            return Err(Error::InvalidInput(format!("genus {genus} exceeds the maximum {max}")));
        }
        Ok(SurfaceSpec { genus })
    }

    pub fn genus(self) -> usize {
        self.genus
    }
}

/// Generators of the mapping class group of the torus; lower case are inverses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModularLetter {
    S,
    T,
    SInv,
    TInv,
}

/// A word in `S, T, s, t`. The empty word is the identity and is spelled
/// `id` (or `1`) when parsed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModularWord(pub Vec<ModularLetter>);

impl ModularWord {
    pub fn identity() -> Self {
        ModularWord(Vec::new())
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty mapping-class word; write `id` for the identity".into()));
        }
        if s == "id" || s == "1" {
            return Ok(Self::identity());
        }
        s.chars()
            .filter(|c| !c.is_whitespace() && *c != '*' && *c != '.')
            .map(|c| match c {
                'S' => Ok(ModularLetter::S),
                'T' => Ok(ModularLetter::T),
                's' => Ok(ModularLetter::SInv),
                't' => Ok(ModularLetter::TInv),
                other => Err(Error::Parse(format!("letter {other:?} is not one of S, T, s, t"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(ModularWord)
    }

    pub fn inverse(&self) -> Self {
        let inv = |l: &ModularLetter| match l {
            ModularLetter::S => ModularLetter::SInv,
            ModularLetter::T => ModularLetter::TInv,
            ModularLetter::SInv => ModularLetter::S,
            ModularLetter::TInv => ModularLetter::T,
        };
        ModularWord(self.0.iter().rev().map(inv).collect())
    }

    /// `ρ(w) = ρ(w_1) ρ(w_2) ...` with `ρ(S) = S`, `ρ(T) = T`.
    pub fn evaluate(&self, data: &ModularData) -> CMatrix {
        let n = data.rank();
        let s = &data.s;
        let s_inv = s.adjoint();
        let mut m = CMatrix::identity(n, n);
        for letter in &self.0 {
            match letter {
                ModularLetter::S => m = &m * s,
                ModularLetter::SInv => m = &m * &s_inv,
                ModularLetter::T | ModularLetter::TInv => {
                    for (j, t) in data.t.iter().enumerate() {
                        let f = if *letter == ModularLetter::T { *t } else { t.conj() };
                        m.column_mut(j).iter_mut().for_each(|z| *z *= f);
                    }
                }
            }
        }
        m
    }
}

impl fmt::Display for ModularWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("id");
        }
        for l in &self.0 {
            f.write_str(match l {
                ModularLetter::S => "S",
                ModularLetter::T => "T",
                ModularLetter::SInv => "s",
                ModularLetter::TInv => "t",
            })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ThreeManifoldSpec {
    ProductS1 { genus: usize },
    Torus3,
    /// `L(1, 0)` is the 3-sphere.
    Lens { p: u64, q: u64 },
    MappingTorusT2 { word: ModularWord },
    Pi1Presentation { presentation: GroupPresentation },
    DisjointUnion(Vec<ThreeManifoldSpec>),
}

impl ThreeManifoldSpec {
    pub fn lens(p: u64, q: i64) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidInput("lens space L(p,q) needs p ≥ 1".into()));
        }
        let q = q.rem_euclid(p as i64) as u64;
        if gcd(p, q) != 1 {
            return Err(Error::InvalidInput(format!("lens space L({p},{q}) needs gcd(p,q) = 1")));
        }
        Ok(ThreeManifoldSpec::Lens { p, q })
    }

    pub fn sphere() -> Self {
        ThreeManifoldSpec::Lens { p: 1, q: 0 }
    }

    /// `SigmaxS1:<g>`, `T3`, `L(<p>,<q>)`, `MT:<word>`, `S3`, `pi1:<path.json>`;
    /// `+` joins components of a disjoint union.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('+').map(str::trim).collect();
        if parts.len() > 1 {
            return parts.iter().map(|p| Self::parse_one(p)).collect::<Result<_>>().map(Self::DisjointUnion);
        }
        Self::parse_one(s.trim())
    }

    fn parse_one(s: &str) -> Result<Self> {
        if s == "T3" {
            return Ok(ThreeManifoldSpec::Torus3);
        }
        if s == "S3" {
            return Ok(Self::sphere());
        }
        if let Some(g) = s.strip_prefix("SigmaxS1:") {
            let genus = g.trim().parse().map_err(|_| Error::Parse(format!("bad genus in {s:?}")))?;
            SurfaceSpec::new(genus)?;
            return Ok(ThreeManifoldSpec::ProductS1 { genus });
        }
        if let Some(w) = s.strip_prefix("MT:") {
            return Ok(ThreeManifoldSpec::MappingTorusT2 { word: ModularWord::parse(w)? });
        }
        if let Some(path) = s.strip_prefix("pi1:") {
            let text = std::fs::read_to_string(path.trim())?;
            return Ok(ThreeManifoldSpec::Pi1Presentation { presentation: GroupPresentation::from_json(&text)? });
        }
        if let Some(inner) = s.strip_prefix("L(").and_then(|r| r.strip_suffix(')')) {
            let (p, q) = inner.split_once(',').ok_or_else(|| Error::Parse(format!("expected L(p,q), got {s:?}")))?;
            let p = p.trim().parse().map_err(|_| Error::Parse(format!("bad p in {s:?}")))?;
            let q = q.trim().parse().map_err(|_| Error::Parse(format!("bad q in {s:?}")))?;
            return Self::lens(p, q);
        }
        Err(Error::Parse(format!(
            "unknown manifold {s:?}; expected SigmaxS1:<g>, T3, L(p,q), MT:<word>, S3 or pi1:<file>"
        )))
    }
}

impl fmt::Display for ThreeManifoldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThreeManifoldSpec::ProductS1 { genus } => write!(f, "SigmaxS1:{genus}"),
            ThreeManifoldSpec::Torus3 => f.write_str("T3"),
            ThreeManifoldSpec::Lens { p: 1, .. } => f.write_str("S3"),
            ThreeManifoldSpec::Lens { p, q } => write!(f, "L({p},{q})"),
            ThreeManifoldSpec::MappingTorusT2 { word } => write!(f, "MT:{word}"),
            ThreeManifoldSpec::Pi1Presentation { presentation } => {
                write!(f, "pi1:<{} generators, {} relators>", presentation.num_generators, presentation.relators.len())
            }
            ThreeManifoldSpec::DisjointUnion(parts) => {
                let names: Vec<String> = parts.iter().map(ToString::to_string).collect();
                f.write_str(&names.join("+"))
            }
        }
    }
}

/// A gauge group, a level, and the modular data they determine.
#[derive(Clone, Debug)]
pub struct TheoryInstance {
    group: Arc<FiniteGroup>,
    cocycle: Cochain,
    data: ModularData,
    settings: Settings,
    budget: u128,
}

impl TheoryInstance {
    pub fn new(group: Arc<FiniteGroup>, cocycle: Cochain, settings: Settings) -> Result<Self> {
        let data = ModularData::compute(&group, &cocycle, &settings)?;
        Ok(TheoryInstance { group, cocycle, data, settings, budget: DEFAULT_WORK_BUDGET })
    }

    pub fn untwisted(group: Arc<FiniteGroup>, settings: Settings) -> Result<Self> {
        let unit = Cochain::unit(group.clone(), 3);
        Self::new(group, unit, settings)
    }

    /// Group and level given in the command-line spellings.
    pub fn from_specs(group: &str, cocycle: &str, settings: Settings) -> Result<Self> {
        let g = Arc::new(crate::groups::parse_group_spec(group)?);
        let w = parse_cocycle_spec(cocycle, g.clone())?;
        Self::new(g, w, settings)
    }

    pub fn named(group: &str, settings: Settings) -> Result<Self> {
        Self::untwisted(Arc::new(build_named_group(group)?), settings)
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn cocycle(&self) -> &Cochain {
        &self.cocycle
    }

    pub fn modular(&self) -> &ModularData {
        &self.data
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    pub fn budget(&self) -> u128 {
        self.budget
    }

    pub fn is_untwisted(&self) -> bool {
        self.cocycle.is_unit()
    }

    fn require_untwisted(&self, what: &str) -> Result<()> {
        if self.is_untwisted() {
            Ok(())
        } else {
            Err(Error::Scope(format!("{what} is only supported for the trivial level")))
        }
    }
}

/// A partition function value, with its exact rational form when the route
/// computing it is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionValue {
    pub value: Complex64,
    pub exact: Option<(u128, u128)>,
    pub route: String,
}

impl PartitionValue {
    fn exact(num: u128, den: u128, route: &str) -> Self {
        let g = gcd128(num, den);
        let (num, den) = (num / g, den / g);
        PartitionValue { value: Complex64::new(num as f64 / den as f64, 0.0), exact: Some((num, den)), route: route.into() }
    }

    fn approx(value: Complex64, route: &str) -> Self {
        PartitionValue { value, exact: None, route: route.into() }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({ "value": complex_json(self.value), "route": self.route });
        if let Some((n, d)) = self.exact {
            v["exact"] = json!([big_json(n), big_json(d)]);
        }
        v
    }
}

/// Integers beyond `u64` are rendered as decimal strings.
pub fn big_json(x: u128) -> Value {
    u64::try_from(x).map(Value::from).unwrap_or_else(|_| Value::String(x.to_string()))
}

/// `Σ_a S_{0a}^{2-2g}`, computed exactly as `Σ_a (|C(x_a)| / deg_a)^{2g-2}`
/// (integers, since `S_{0a} = |K_a| deg_a / |G|`) and confirmed against the
/// floating-point Verlinde sum from the S-matrix.
pub fn hilbert_dim(t: &TheoryInstance, y: SurfaceSpec) -> Result<u128> {
    let data = t.modular();
    let g = y.genus();
    let floating = data.verlinde_sum(g);
    let exact: u128 = if g == 0 {
        1
    } else {
        let n = data.global_dim() as u128;
        data.simples
            .iter()
            .map(|a| {
                let base = n / a.quantum_dim as u128;
                base.checked_pow(2 * g as u32 - 2)
            })
            .try_fold(0u128, |acc, x| x.and_then(|x| acc.checked_add(x)))
            .ok_or_else(|| Error::UnsupportedSize(format!("dimension at genus {g} overflows 128 bits")))?
    };
    let deviation = (floating - exact as f64).abs() / (exact as f64).max(1.0);
    if deviation > t.settings().rounding_tol {
        return Err(Error::Invariant(format!(
            "Verlinde sum {floating} at genus {g} is not the integer {exact} (relative deviation {deviation:.3e})"
        )));
    }
    Ok(exact)
}

pub fn partition_function(t: &TheoryInstance, x: &ThreeManifoldSpec) -> Result<PartitionValue> {
    let data = t.modular();
    let order = t.group().order() as u128;
    match x {
        ThreeManifoldSpec::ProductS1 { genus } => product_route(t, SurfaceSpec::new(*genus)?),
        ThreeManifoldSpec::Torus3 => {
            let rank = data.rank() as u128;
            if t.is_untwisted() {
                if let Ok(count) = count_homomorphisms_within(&GroupPresentation::torus3(), t.group(), t.budget()) {
                    if count as u128 != rank * order {
                        return Err(Error::Invariant(format!(
                            "|Hom(Z³,G)| / |G| = {count}/{order} disagrees with {rank} simples"
                        )));
                    }
                }
            }
            Ok(PartitionValue::exact(rank, 1, "simples"))
        }
        ThreeManifoldSpec::Lens { p, q } => {
            check_gauss_sum(t)?;
            let word = lens_word(*p, *q);
            let z = word.evaluate(data)[(0, 0)];
            if *p == 1 {
                // S_00 = 1/|G| is enforced by the vacuum-row check
                return Ok(PartitionValue { exact: Some((1, order)), ..PartitionValue::approx(z, "sl2z-word") });
            }
            Ok(PartitionValue::approx(z, "sl2z-word"))
        }
        ThreeManifoldSpec::MappingTorusT2 { word } => {
            Ok(PartitionValue::approx(mapping_torus_partition(t, word), "mapping-class-trace"))
        }
        ThreeManifoldSpec::Pi1Presentation { presentation } => {
            t.require_untwisted("evaluation from a presentation of π₁")?;
            let count = count_homomorphisms_within(presentation, t.group(), t.budget())?;
            Ok(PartitionValue::exact(count as u128, order, "hom-count"))
        }
        ThreeManifoldSpec::DisjointUnion(parts) => {
            let mut value = Complex64::new(1.0, 0.0);
            let mut exact = Some((1u128, 1u128));
            for part in parts {
                let v = partition_function(t, part)?;
                value *= v.value;
                exact = match (exact, v.exact) {
                    (Some((a, b)), Some((c, d))) => a.checked_mul(c).zip(b.checked_mul(d)),
                    _ => None,
                };
            }
            Ok(match exact {
                Some((n, d)) => PartitionValue::exact(n, d, "disjoint-union"),
                None => PartitionValue::approx(value, "disjoint-union"),
            })
        }
    }
}

/// `Σ_g × S¹`: untwisted, the groupoid count of `Hom(π₁(Σ_g × S¹), G)`
/// (enumerated directly when within budget, otherwise split over the
/// holonomy around the circle); twisted, the handle operator of the
/// Verlinde ring.
fn product_route(t: &TheoryInstance, y: SurfaceSpec) -> Result<PartitionValue> {
    let g = y.genus();
    let order = t.group().order() as u128;
    if t.is_untwisted() {
        let direct = count_homomorphisms_within(&GroupPresentation::surface_times_circle(g), t.group(), t.budget());
        return match direct {
            Ok(count) => Ok(PartitionValue::exact(count as u128, order, "hom-count")),
            Err(Error::Budget(_)) => {
                let surface = GroupPresentation::surface(g);
                let mut total = 0u128;
                for class in t.group().conjugacy_classes() {
                    let c = count_homomorphisms_within(&surface, class.centralizer.group(), t.budget())?;
                    total += class.size() as u128 * c as u128;
                }
                Ok(PartitionValue::exact(total, order, "hom-count-by-holonomy"))
            }
            Err(e) => Err(e),
        };
    }
    let ring = verlinde_ring(t.modular())?;
    let z = surface_value(&ring, g);
    let tol = t.settings().rounding_tol * z.re.abs().max(1.0);
    match round_if_integral(z.re, tol).filter(|&r| r >= 0 && z.im.abs() <= tol) {
        Some(r) => Ok(PartitionValue::exact(r as u128, 1, "frobenius-handle")),
        None => Err(Error::Invariant(format!("Z(Σ_{g} × S¹) = {z} is not a nonnegative integer"))),
    }
}

fn check_gauss_sum(t: &TheoryInstance) -> Result<()> {
    let data = t.modular();
    let gauss: Complex64 = data
        .simples
        .iter()
        .zip(&data.t)
        .map(|(a, z)| z * (a.quantum_dim * a.quantum_dim) as f64)
        .sum::<Complex64>()
        / data.global_dim() as f64;
    let residual = (gauss - 1.0).norm();
    if residual > t.settings().matrix_tol {
        return Err(Error::Invariant(format!(
            "Gauss sum residual {residual:.3e}: framing anomaly present, lens values undefined"
        )));
    }
    Ok(())
}

/// Negative continued fraction `p/q = a_1 - 1/(a_2 - ...)`.
pub fn negative_continued_fraction(p: u64, q: u64) -> Vec<u64> {
    let (mut p, mut q) = (p, q);
    let mut out = Vec::new();
    while q != 0 {
        let a = p.div_ceil(q);
        out.push(a);
        (p, q) = (q, a * q - p);
    }
    out
}

/// `S T^{a_1} S T^{a_2} S ... T^{a_n} S`, whose vacuum entry is `Z(L(p,q))`.
pub fn lens_word(p: u64, q: u64) -> ModularWord {
    let mut w = vec![ModularLetter::S];
    if p > 1 {
        for a in negative_continued_fraction(p, q) {
            w.extend(std::iter::repeat_n(ModularLetter::T, a as usize));
            w.push(ModularLetter::S);
        }
    }
    ModularWord(w)
}

/// Trace of the mapping-class action on `V(T²)`.
pub fn mapping_torus_partition(t: &TheoryInstance, word: &ModularWord) -> Complex64 {
    word.evaluate(t.modular()).trace()
}

/// Values of an irreducible character on the group's classes, for use as a
/// Wilson-loop class function.
pub fn character_class_function(t: &TheoryInstance, row: usize) -> Result<Vec<Complex64>> {
    let table = crate::groups::character_table(t.group(), t.settings().seed)?;
    table
        .characters
        .get(row)
        .cloned()
        .ok_or_else(|| Error::InvalidInput(format!("character index {row} out of range 0..{}", table.num_irreps())))
}

/// Loop `{pt} × S¹` in `Σ_g × S¹` labeled by a class function:
/// `(1/|G|) Σ_{φ, h} f(h)` over `φ ∈ Hom(π₁Σ_g, G)` and `h` centralizing `im φ`.
pub fn wilson_expectation(t: &TheoryInstance, genus: usize, class_function: &[Complex64]) -> Result<Complex64> {
    t.require_untwisted("Wilson loop evaluation")?;
    SurfaceSpec::new(genus)?;
    let classes = t.group().conjugacy_classes();
    if class_function.len() != classes.len() {
        return Err(Error::InvalidInput(format!(
            "class function has {} values, the group has {} classes",
            class_function.len(),
            classes.len()
        )));
    }
    let surface = GroupPresentation::surface(genus);
    let mut total = Complex64::new(0.0, 0.0);
    for (class, f) in classes.iter().zip(class_function) {
        let count = count_homomorphisms_within(&surface, class.centralizer.group(), t.budget())?;
        total += f * (class.size() as f64 * count as f64);
    }
    Ok(total / t.group().order() as f64)
}

#[derive(Clone, Debug)]
pub struct GluingReport {
    pub genus: usize,
    /// Route name and value.
    pub routes: Vec<(String, f64)>,
    pub checks: Vec<NamedCheck>,
    /// Routes not attempted because they exceed the work budget, with the reason.
    pub skipped: Vec<(String, String)>,
}

impl GluingReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Value {
        let routes: serde_json::Map<String, Value> =
            self.routes.iter().map(|(k, v)| (k.clone(), real_json(*v))).collect();
        json!({
            "genus": self.genus,
            "routes": routes,
            "checks": self.checks.iter().map(NamedCheck::to_json).collect::<Vec<_>>(),
            "skipped": self.skipped.iter().map(|(k, why)| json!({ "route": k, "reason": why })).collect::<Vec<_>>(),
            "passed": self.passed(),
        })
    }
}

/// Compares `dim V(Σ_g)` from the Verlinde sum, `Z(Σ_g × S¹)`, and (untwisted)
/// the number of isomorphism classes of flat bundles on `Σ_g`.
pub fn gluing_check(t: &TheoryInstance, genus: usize) -> GluingReport {
    let s = t.settings();
    let mut routes = Vec::new();
    let mut checks = Vec::new();
    let mut skipped = Vec::new();
    let verlinde = t.modular().verlinde_sum(genus);
    routes.push(("verlinde_sum".to_string(), verlinde));

    let mut reference = None;
    match SurfaceSpec::new(genus).and_then(|y| hilbert_dim(t, y)) {
        Ok(d) => {
            let d = d as f64;
            routes.push(("hilbert_dim".to_string(), d));
            checks.push(NamedCheck::new("verlinde_rounding", (verlinde - d).abs() / d.max(1.0), s.rounding_tol));
            reference = Some(d);
        }
        Err(_) => checks.push(NamedCheck::new("verlinde_rounding", f64::INFINITY, s.rounding_tol)),
    }

    let product = SurfaceSpec::new(genus).and_then(|y| product_route(t, y));
    match (&product, reference) {
        (Ok(v), Some(d)) => {
            routes.push((format!("product_{}", v.route), v.value.re));
            checks.push(NamedCheck::new("product_vs_verlinde", (v.value - d).norm() / d.max(1.0), s.matrix_tol));
        }
        (Err(Error::Budget(why)), _) => skipped.push(("product".to_string(), why.clone())),
        _ => checks.push(NamedCheck::new("product_vs_verlinde", f64::INFINITY, s.matrix_tol)),
    }

    if t.is_untwisted() {
        let orbits = orbit_count_homomorphisms_within(&GroupPresentation::surface(genus), t.group(), t.budget());
        match (orbits, reference) {
            (Ok(o), Some(d)) => {
                routes.push(("orbit_count".to_string(), o as f64));
                checks.push(NamedCheck::new("orbits_vs_verlinde", (o as f64 - d).abs(), 0.0));
            }
            (Err(Error::Budget(why)), _) => skipped.push(("orbit_count".to_string(), why)),
            _ => checks.push(NamedCheck::new("orbits_vs_verlinde", f64::INFINITY, 0.0)),
        }
    }
    GluingReport { genus, routes, checks, skipped }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn gcd128(a: u128, b: u128) -> u128 {
    if b == 0 {
        a.max(1)
    } else {
        gcd128(b, a % b)
    }
}
