//! Exact root-of-unity valued group cochains.
//!
//! All arithmetic here is integer arithmetic on numerators modulo a common
//! order; no floating point is involved until a [`Phase`] is converted to a
//! complex number for display or for the modular-data engine.

use std::fmt;
use std::ops::{Div, Mul};
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::groups::{Element, FiniteGroup, Subgroup};

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// `exp(2πi · numerator / order)` in lowest terms, `numerator ∈ [0, order)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phase {
    numerator: u64,
    order: u64,
}

impl Phase {
    pub const ONE: Phase = Phase { numerator: 0, order: 1 };

    pub fn new(numerator: i64, order: u64) -> Phase {
        assert!(order > 0, "phase order must be positive");
        let num = numerator.rem_euclid(order as i64) as u64;
        let g = gcd(num, order);
        Phase { numerator: num / g, order: order / g }
    }

    pub fn numerator(self) -> u64 {
        self.numerator
    }

    pub fn order(self) -> u64 {
        self.order
    }

    pub fn is_one(self) -> bool {
        self.numerator == 0
    }

    pub fn conj(self) -> Phase {
        Phase::new(-(self.numerator as i64), self.order)
    }

    pub fn pow(self, k: i64) -> Phase {
        let n = (self.numerator as i128 * k as i128).rem_euclid(self.order as i128);
        Phase::new(n as i64, self.order)
    }

    /// Numerator of this phase written over `modulus`, which must be a
    /// multiple of the phase's order.
    pub fn numerator_over(self, modulus: u64) -> u64 {
        debug_assert_eq!(modulus % self.order, 0);
        self.numerator * (modulus / self.order)
    }

    pub fn to_complex(self) -> num_complex::Complex64 {
        let angle = 2.0 * std::f64::consts::PI * self.numerator as f64 / self.order as f64;
        num_complex::Complex64::from_polar(1.0, angle)
    }
}

// e(a) e(b) = e(a + b): multiplication of phases is addition of fractions
#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        let m = lcm(self.order, rhs.order);
        Phase::new((self.numerator_over(m) + rhs.numerator_over(m)) as i64, m)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for Phase {
    type Output = Phase;
    fn div(self, rhs: Phase) -> Phase {
        self * rhs.conj()
    }
}

impl fmt::Debug for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e({}/{})", self.numerator, self.order)
    }
}

/// A normalized map `G^d -> μ_modulus`, stored as numerators.
#[derive(Clone)]
pub struct Cochain {
    degree: usize,
    group: Arc<FiniteGroup>,
    modulus: u64,
    values: Vec<u64>,
}

impl fmt::Debug for Cochain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Cochain")
            .field("degree", &self.degree)
            .field("group", &self.group.name())
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for Cochain {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree
            && *self.group == *other.group
            && self.len() == other.len()
            && (0..self.len()).all(|i| self.phase_at(i) == other.phase_at(i))
    }
}

pub const MAX_DEGREE: usize = 3;

impl Cochain {
    pub fn unit(group: Arc<FiniteGroup>, degree: usize) -> Cochain {
        let len = group.order().pow(degree as u32);
        Cochain { degree, group, modulus: 1, values: vec![0; len] }
    }

    /// Builds a cochain from numerators over `modulus`. Fails unless the
    /// result is normalized (unit whenever an argument is the identity).
    pub fn from_fn(
        group: Arc<FiniteGroup>,
        degree: usize,
        modulus: u64,
        f: impl Fn(&[Element]) -> i64,
    ) -> Result<Cochain> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(Error::InvalidInput(format!("cochain degree {degree} not in 1..={MAX_DEGREE}")));
        }
        if modulus == 0 {
            return Err(Error::InvalidInput("root-of-unity order must be positive".into()));
        }
        let n = group.order();
        let len = n.pow(degree as u32);
        let mut args = vec![0; degree];
        let mut values = Vec::with_capacity(len);
        for idx in 0..len {
            decode(idx, n, &mut args);
            let v = f(&args).rem_euclid(modulus as i64) as u64;
            if v != 0 && args.contains(&0) {
                return Err(Error::InvalidInput(format!(
                    "cochain is not normalized: value at {args:?} is not the unit phase"
                )));
            }
            values.push(v);
        }
        Ok(Cochain { degree, group, modulus, values })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    /// Common order over which the numerators are stored.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    fn len(&self) -> usize {
        self.values.len()
    }

    fn index(&self, args: &[Element]) -> usize {
        debug_assert_eq!(args.len(), self.degree);
        let n = self.group.order();
        args.iter().fold(0, |acc, &a| acc * n + a)
    }

    fn phase_at(&self, idx: usize) -> Phase {
        Phase::new(self.values[idx] as i64, self.modulus)
    }

    /// Raw numerator over [`Cochain::modulus`].
    #[inline]
    pub fn numerator(&self, args: &[Element]) -> u64 {
        self.values[self.index(args)]
    }

    pub fn value(&self, args: &[Element]) -> Phase {
        self.phase_at(self.index(args))
    }

    pub fn is_unit(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    /// The smallest order containing every value.
    pub fn minimal_modulus(&self) -> u64 {
        self.values.iter().fold(1, |acc, &v| lcm(acc, self.modulus / gcd(v, self.modulus)))
    }

    /// Same cochain stored over its minimal modulus.
    pub fn reduced(&self) -> Cochain {
        let m = self.minimal_modulus();
        let f = self.modulus / m;
        Cochain {
            degree: self.degree,
            group: self.group.clone(),
            modulus: m,
            values: self.values.iter().map(|v| v / f).collect(),
        }
    }

    fn over(&self, modulus: u64) -> Vec<u64> {
        let f = modulus / self.modulus;
        self.values.iter().map(|v| v * f).collect()
    }

    /// Pointwise product.
    pub fn product(&self, other: &Cochain) -> Result<Cochain> {
        if self.degree != other.degree || *self.group != *other.group {
            return Err(Error::InvalidInput("pointwise product of incompatible cochains".into()));
        }
        let m = lcm(self.modulus, other.modulus);
        let values = self.over(m).iter().zip(other.over(m)).map(|(a, b)| (a + b) % m).collect();
        Ok(Cochain { degree: self.degree, group: self.group.clone(), modulus: m, values })
    }

    pub fn inverse(&self) -> Cochain {
        let m = self.modulus;
        Cochain {
            degree: self.degree,
            group: self.group.clone(),
            modulus: m,
            values: self.values.iter().map(|v| (m - v) % m).collect(),
        }
    }

    /// Numerator of `(δc)(args)`, `args.len() == degree + 1`, over the modulus.
    fn differential_at(&self, args: &[Element], scratch: &mut Vec<Element>) -> u64 {
        let g = &*self.group;
        let d = self.degree;
        let m = self.modulus as i64;
        let mut acc: i64 = 0;
        for i in 0..=d + 1 {
            scratch.clear();
            if i == 0 {
                scratch.extend_from_slice(&args[1..]);
            } else if i == d + 1 {
                scratch.extend_from_slice(&args[..d]);
            } else {
                scratch.extend_from_slice(&args[..i - 1]);
                scratch.push(g.mul(args[i - 1], args[i]));
                scratch.extend_from_slice(&args[i + 1..]);
            }
            let v = self.numerator(scratch) as i64;
            acc += if i % 2 == 0 { v } else { -v };
        }
        acc.rem_euclid(m) as u64
    }

    /// First tuple (in lexicographic order) where the cocycle identity fails.
    pub fn cocycle_violation(&self) -> Option<Vec<Element>> {
        if self.is_unit() {
            return None;
        }
        let n = self.group.order();
        let d = self.degree;
        let inner = n.pow(d as u32);
        (0..n).into_par_iter().find_map_first(|first| {
            let mut args = vec![0; d + 1];
            let mut scratch = Vec::with_capacity(d + 1);
            args[0] = first;
            for rest in 0..inner {
                decode(rest, n, &mut args[1..]);
                if self.differential_at(&args, &mut scratch) != 0 {
                    return Some(args.clone());
                }
            }
            None
        })
    }

    pub fn is_cocycle(&self) -> bool {
        self.cocycle_violation().is_none()
    }
}

fn decode(mut idx: usize, n: usize, out: &mut [Element]) {
    for slot in out.iter_mut().rev() {
        *slot = idx % n;
        idx /= n;
    }
}

/// Inhomogeneous bar-complex differential, defined for degrees 1 and 2.
pub fn coboundary(c: &Cochain) -> Result<Cochain> {
    if !(1..=2).contains(&c.degree) {
        return Err(Error::InvalidInput(format!(
            "coboundary is defined for degrees 1 and 2, got {}",
            c.degree
        )));
    }
    let n = c.group.order();
    let d = c.degree + 1;
    let len = n.pow(d as u32);
    let mut args = vec![0; d];
    let mut scratch = Vec::with_capacity(d);
    let values = (0..len)
        .map(|idx| {
            decode(idx, n, &mut args);
            c.differential_at(&args, &mut scratch)
        })
        .collect();
    Ok(Cochain { degree: d, group: c.group.clone(), modulus: c.modulus, values })
}

/// `ω(a, b, c) = exp(2πi · p · a · ⌊(b + c) / n⌋ / n)` on `C_n`.
pub fn standard_cyclic_cocycle(n: usize, p: u64) -> Result<Cochain> {
    let group = Arc::new(crate::groups::cyclic(n)?);
    cyclic_cocycle_on(group, p)
}

/// The standard cyclic cocycle on any cyclic group, written in terms of the
/// discrete logarithm to its smallest-index generator.
pub fn cyclic_cocycle_on(group: Arc<FiniteGroup>, p: u64) -> Result<Cochain> {
    let n = group.order();
    if p >= n as u64 && n > 1 {
        return Err(Error::InvalidInput(format!("cyclic level {p} must be below {n}")));
    }
    let generator = group
        .elements()
        .find(|&x| group.element_order(x) == n)
        .ok_or_else(|| Error::InvalidInput(format!("{} is not cyclic", group.name())))?;
    let mut log = vec![0usize; n];
    let mut x = 0;
    for k in 0..n {
        log[x] = k;
        x = group.mul(x, generator);
    }
    let nn = n as i64;
    Cochain::from_fn(group, 3, n as u64, |args| {
        let (a, b, c) = (log[args[0]] as i64, log[args[1]] as i64, log[args[2]] as i64);
        p as i64 * a * ((b + c) / nn)
    })
}

/// `(h*c)(g_1, ..., g_d) = c(h g_1, ..., h g_d)` along an element map
/// `source -> c.group()`, which must be a homomorphism.
pub fn pullback_cocycle(source: Arc<FiniteGroup>, map: &[Element], c: &Cochain) -> Result<Cochain> {
    let target = c.group();
    if map.len() != source.order() || map.iter().any(|&y| y >= target.order()) {
        return Err(Error::InvalidInput("element map does not match the groups".into()));
    }
    for a in source.elements() {
        for b in source.elements() {
            if map[source.mul(a, b)] != target.mul(map[a], map[b]) {
                return Err(Error::InvalidInput(format!(
                    "element map is not a homomorphism at ({a}, {b})"
                )));
            }
        }
    }
    Cochain::from_fn(source, c.degree(), c.modulus(), |args| {
        let image: Vec<Element> = args.iter().map(|&a| map[a]).collect();
        c.numerator(&image) as i64
    })
}

/// Normalized cochain with values uniform in `μ_order`, deterministic in `seed`.
pub fn random_cochain(group: Arc<FiniteGroup>, degree: usize, order: u64, seed: u64) -> Result<Cochain> {
    if !(1..=2).contains(&degree) {
        return Err(Error::InvalidInput(format!("random cochains have degree 1 or 2, got {degree}")));
    }
    if order == 0 {
        return Err(Error::InvalidInput("root-of-unity order must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = group.order();
    let len = n.pow(degree as u32);
    let mut args = vec![0; degree];
    let values = (0..len)
        .map(|idx| {
            decode(idx, n, &mut args);
            if args.contains(&0) {
                0
            } else {
                rng.gen_range(0..order)
            }
        })
        .collect();
    Ok(Cochain { degree, group, modulus: order, values })
}

/// Transgression phase for the action groupoid of conjugation:
/// `ω(x,g,h) · ω(g, h, (gh)⁻¹x(gh)) / ω(g, g⁻¹xg, h)`.
pub fn groupoid_phase(omega: &Cochain, x: Element, g: Element, h: Element) -> Phase {
    let grp = omega.group();
    let gh = grp.mul(g, h);
    let x_gh = grp.conjugate(grp.inv(gh), x);
    let x_g = grp.conjugate(grp.inv(g), x);
    omega.value(&[x, g, h]) * omega.value(&[g, h, x_gh]) / omega.value(&[g, x_g, h])
}

/// The 2-cocycle `θ_x` on the centralizer of `x`, on the centralizer's local indices.
#[derive(Clone, Debug)]
pub struct TransgressedCocycle {
    pub base: Element,
    pub centralizer: Subgroup,
    pub values: Cochain,
}

pub fn transgress(omega: &Cochain, x: Element) -> Result<TransgressedCocycle> {
    if omega.degree() != 3 {
        return Err(Error::InvalidInput("transgression needs a 3-cochain".into()));
    }
    let grp = omega.group();
    if x >= grp.order() {
        return Err(Error::InvalidInput(format!("element {x} out of range")));
    }
    let centralizer = grp.centralizer(x);
    if omega.is_unit() {
        let values = Cochain::unit(centralizer.group().clone(), 2);
        return Ok(TransgressedCocycle { base: x, centralizer, values });
    }
    let m = omega.modulus();
    let values = Cochain::from_fn(centralizer.group().clone(), 2, m, |args| {
        let (h, k) = (centralizer.global(args[0]), centralizer.global(args[1]));
        groupoid_phase(omega, x, h, k).numerator_over(m) as i64
    })
    .map_err(|e| Error::Invariant(format!("transgression at {x} is not normalized: {e}")))?;
    if let Some(bad) = values.cocycle_violation() {
        return Err(Error::Invariant(format!(
            "transgressed cochain at {x} fails the 2-cocycle identity at local tuple {bad:?}"
        )));
    }
    Ok(TransgressedCocycle { base: x, centralizer, values: values.reduced() })
}

#[derive(Deserialize)]
struct CocycleFile {
    order_of_roots: u64,
    entries: Vec<CocycleEntry>,
}

#[derive(Deserialize)]
struct CocycleEntry {
    args: Vec<Element>,
    num: i64,
}

/// `{order_of_roots: N, entries: [{args: [a, b, c], num: k}]}`; unlisted
/// entries are the unit phase. The result must be a normalized 3-cocycle.
pub fn cocycle_from_json(text: &str, group: Arc<FiniteGroup>) -> Result<Cochain> {
    let file: CocycleFile = serde_json::from_str(text)?;
    let n = group.order();
    let mut table = std::collections::HashMap::new();
    for e in &file.entries {
        if e.args.len() != 3 || e.args.iter().any(|&a| a >= n) {
            return Err(Error::InvalidInput(format!("bad cocycle entry arguments {:?}", e.args)));
        }
        table.insert((e.args[0], e.args[1], e.args[2]), e.num);
    }
    let c = Cochain::from_fn(group, 3, file.order_of_roots, |a| {
        table.get(&(a[0], a[1], a[2])).copied().unwrap_or(0)
    })?;
    if let Some(bad) = c.cocycle_violation() {
        return Err(Error::InvalidInput(format!("cochain is not a 3-cocycle: fails at {bad:?}")));
    }
    Ok(c)
}

/// `trivial`, `cyclic:<p>`, or a path to a JSON cocycle file (optionally
/// prefixed with `file:`).
pub fn parse_cocycle_spec(spec: &str, group: Arc<FiniteGroup>) -> Result<Cochain> {
    let spec = spec.trim();
    if spec == "trivial" {
        return Ok(Cochain::unit(group, 3));
    }
    if let Some(p) = spec.strip_prefix("cyclic:") {
        let p: u64 = p
            .parse()
            .map_err(|_| Error::Parse(format!("malformed cyclic level `{p}`")))?;
        return cyclic_cocycle_on(group, p).map_err(|e| Error::Parse(e.to_string()));
    }
    let path = spec.strip_prefix("file:").unwrap_or(spec);
    if spec.starts_with("file:") || path.ends_with(".json") {
        let text = std::fs::read_to_string(Path::new(path))?;
        return cocycle_from_json(&text, group);
    }
    Err(Error::Parse(format!("unknown cocycle spec `{spec}`")))
}


#[cfg(test)]
mod tests {
    use super::testing::coboundary_witness;
    use super::*;
    use crate::groups::build_named_group;
    use proptest::prelude::*;

    fn group(spec: &str) -> Arc<FiniteGroup> {
        Arc::new(build_named_group(spec).unwrap())
    }

    #[test]
    fn phase_arithmetic() {
        let a = Phase::new(1, 4);
        let b = Phase::new(3, 6);
        assert_eq!(b, Phase::new(1, 2));
        assert_eq!(a * a, Phase::new(1, 2));
        assert_eq!(a * b, Phase::new(3, 4));
        assert_eq!(a.conj(), Phase::new(3, 4));
        assert_eq!(a / a, Phase::ONE);
        assert_eq!(Phase::new(-1, 3), Phase::new(2, 3));
        assert_eq!(a.pow(4), Phase::ONE);
        assert!((Phase::new(1, 2).to_complex().re + 1.0).abs() < 1e-15);
    }

    #[test]
    fn delta_of_unit_is_unit() {
        for d in 1..=2 {
            let c = Cochain::unit(group("S3"), d);
            assert!(coboundary(&c).unwrap().is_unit());
        }
    }

    #[test]
    fn delta_squared_vanishes_exhaustively() {
        for spec in ["C4", "S3", "C2xC2", "C6", "D4", "Q8", "C12", "D6"] {
            let g = group(spec);
            for seed in 0..3 {
                let b1 = random_cochain(g.clone(), 1, 12, seed).unwrap();
                assert!(coboundary(&coboundary(&b1).unwrap()).unwrap().is_unit(), "{spec}");
                let b2 = random_cochain(g.clone(), 2, 12, seed).unwrap();
                assert!(coboundary(&b2).unwrap().is_cocycle(), "{spec}");
                assert!(coboundary(&b1).unwrap().is_cocycle(), "{spec}");
            }
        }
    }

    #[test]
    fn cyclic_cocycles_are_cocycles() {
        for n in 1..=12 {
            for p in 0..n as u64 {
                let w = standard_cyclic_cocycle(n, p).unwrap();
                assert!(w.is_cocycle(), "n={n} p={p}");
                assert_eq!(w.is_unit(), p == 0 || n == 1);
            }
        }
    }

    #[test]
    fn cyclic_two_values() {
        let w = standard_cyclic_cocycle(2, 1).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let expect = if (a, b, c) == (1, 1, 1) { Phase::new(1, 2) } else { Phase::ONE };
                    assert_eq!(w.value(&[a, b, c]), expect);
                }
            }
        }
    }

    #[test]
    fn perturbed_cocycle_reports_violation() {
        let w = standard_cyclic_cocycle(3, 1).unwrap();
        let bad = Cochain::from_fn(w.group().clone(), 3, 3, |a| {
            w.numerator(a) as i64 + i64::from(a == [1, 2, 2])
        })
        .unwrap();
        let witness = bad.cocycle_violation().expect("perturbation must be detected");
        assert_eq!(witness.len(), 4);
        let mut scratch = Vec::new();
        assert_ne!(bad.differential_at(&witness, &mut scratch), 0);
        assert!(Cochain::unit(group("C3"), 3).is_cocycle());
    }

    #[test]
    fn normalization_enforced() {
        assert!(Cochain::from_fn(group("C2"), 2, 2, |_| 1).is_err());
    }

    #[test]
    fn pullbacks() {
        let w = standard_cyclic_cocycle(2, 1).unwrap();
        let same = pullback_cocycle(w.group().clone(), &[0, 1], &w).unwrap();
        assert_eq!(same, w);
        let klein = group("C2xC2");
        // projections onto each factor; index a*2 + b
        for proj in [[0, 0, 1, 1], [0, 1, 0, 1], [0, 1, 1, 0]] {
            let pb = pullback_cocycle(klein.clone(), &proj, &w).unwrap();
            assert!(pb.is_cocycle());
            let unit = pullback_cocycle(klein.clone(), &proj, &Cochain::unit(w.group().clone(), 3)).unwrap();
            assert!(unit.is_unit());
        }
        assert!(pullback_cocycle(klein, &[0, 1, 1, 1], &w).is_err());
    }

    #[test]
    fn random_cochains_are_seeded() {
        let g = group("S3");
        let a = random_cochain(g.clone(), 2, 7, 42).unwrap();
        let b = random_cochain(g.clone(), 2, 7, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_cochain(g.clone(), 2, 7, 43).unwrap());
        assert!((0..36).all(|i| a.values[i] < 7));
        assert!(random_cochain(g, 3, 7, 0).is_err());
    }

    #[test]
    fn transgression_of_unit_is_unit() {
        let g = group("S3");
        let w = Cochain::unit(g.clone(), 3);
        for x in g.elements() {
            assert!(transgress(&w, x).unwrap().values.is_unit());
        }
    }

    #[test]
    fn transgression_c2() {
        let w = standard_cyclic_cocycle(2, 1).unwrap();
        let t = transgress(&w, 1).unwrap();
        assert_eq!(t.values.value(&[1, 1]), Phase::new(1, 2));
        assert!(t.values.is_cocycle());
        assert!(transgress(&w, 0).unwrap().values.is_unit());
    }

    #[test]
    fn transgression_gauge_shift_is_coboundary() {
        let cases = [
            standard_cyclic_cocycle(4, 1).unwrap(),
            standard_cyclic_cocycle(4, 2).unwrap(),
            pullback_cocycle(group("C2xC2"), &[0, 0, 1, 1], &standard_cyclic_cocycle(2, 1).unwrap()).unwrap(),
        ];
        for w in cases {
            let g = w.group().clone();
            for seed in 0..4 {
                let beta = random_cochain(g.clone(), 2, 8, seed).unwrap();
                let w2 = w.product(&coboundary(&beta).unwrap()).unwrap();
                for x in g.elements() {
                    let t1 = transgress(&w, x).unwrap();
                    let t2 = transgress(&w2, x).unwrap();
                    let c = &t1.centralizer;
                    // b_x(h) = β(x,h) / β(h, h⁻¹xh)
                    let b: Vec<Phase> = c
                        .members()
                        .iter()
                        .map(|&h| beta.value(&[x, h]) / beta.value(&[h, g.conjugate(g.inv(h), x)]))
                        .collect();
                    for h in 0..c.order() {
                        for k in 0..c.order() {
                            let hk = c.group().mul(h, k);
                            let db = b[h] * b[k] / b[hk];
                            let ratio = t2.values.value(&[h, k]) / t1.values.value(&[h, k]);
                            assert_eq!(ratio, db.conj(), "x={x} h={h} k={k}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn transgression_natural_under_conjugation() {
        for spec in ["S3", "D4", "Q8", "C2xC2", "C4", "C6", "C8", "C2xC4"] {
            let g = group(spec);
            let mut cocycles = vec![Cochain::unit(g.clone(), 3)];
            if g.is_abelian() {
                let b = random_cochain(g.clone(), 2, 4, 9).unwrap();
                cocycles.push(coboundary(&b).unwrap());
            }
            if let Ok(w) = cyclic_cocycle_on(g.clone(), 1) {
                cocycles.push(w);
            }
            let b = random_cochain(g.clone(), 2, 6, 3).unwrap();
            cocycles.push(coboundary(&b).unwrap());
            for w in &cocycles {
                for x in g.elements() {
                    let tx = transgress(w, x).unwrap();
                    for y in g.elements() {
                        let z = g.conjugate(y, x);
                        let tz = transgress(w, z).unwrap();
                        // ratio of θ_x with θ_z pulled back along h ↦ y h y⁻¹
                        let c = &tx.centralizer;
                        let ratio = Cochain::from_fn(c.group().clone(), 2, w.modulus(), |a| {
                            let (h, k) = (c.global(a[0]), c.global(a[1]));
                            let (h2, k2) = (g.conjugate(y, h), g.conjugate(y, k));
                            let lz = |e| tz.centralizer.local_index(e).unwrap();
                            let v = tx.values.value(&[a[0], a[1]]) / tz.values.value(&[lz(h2), lz(k2)]);
                            v.numerator_over(w.modulus()) as i64
                        })
                        .unwrap();
                        assert!(coboundary_witness(&ratio).is_some(), "{spec} x={x} y={y}");
                    }
                }
            }
        }
    }

    #[test]
    fn witness_rejects_nontrivial_class() {
        // the Klein-four 2-cocycle giving the quaternion-type extension is not a coboundary
        let klein = group("C2xC2");
        let r = Cochain::from_fn(klein, 2, 2, |a| {
            let (x1, y2) = (a[0] / 2, a[1] % 2);
            (x1 * y2) as i64
        })
        .unwrap();
        assert!(r.is_cocycle());
        assert!(coboundary_witness(&r).is_none());
    }

    #[test]
    fn spec_strings() {
        let c4 = group("C4");
        assert!(parse_cocycle_spec("trivial", c4.clone()).unwrap().is_unit());
        assert_eq!(parse_cocycle_spec("cyclic:1", c4.clone()).unwrap(), standard_cyclic_cocycle(4, 1).unwrap());
        assert!(matches!(parse_cocycle_spec("cyclic:x", c4.clone()), Err(Error::Parse(_))));
        assert!(parse_cocycle_spec("cyclic:1", group("C2xC2")).is_err());
        assert!(matches!(parse_cocycle_spec("bogus", c4), Err(Error::Parse(_))));
    }

    #[test]
    fn json_cocycles() {
        let c2 = group("C2");
        let w = cocycle_from_json(r#"{"order_of_roots": 2, "entries": [{"args": [1,1,1], "num": 1}]}"#, c2.clone()).unwrap();
        assert_eq!(w, standard_cyclic_cocycle(2, 1).unwrap());
        // C3 with a single perturbed value is not a cocycle
        let c3 = group("C3");
        assert!(cocycle_from_json(r#"{"order_of_roots": 3, "entries": [{"args": [1,1,1], "num": 1}]}"#, c3).is_err());
        assert!(cocycle_from_json(r#"{"order_of_roots": 2, "entries": [{"args": [0,1,1], "num": 1}]}"#, c2).is_err());
    }

    proptest! {
        #[test]
        fn delta_squared_is_unit_for_random_one_cochains(seed in 0u64..1000, order in 1u64..20) {
            let g = group("D4");
            let b = random_cochain(g, 1, order, seed).unwrap();
            prop_assert!(coboundary(&coboundary(&b).unwrap()).unwrap().is_unit());
        }

        #[test]
        fn phase_multiplication_is_fraction_addition(a in -50i64..50, m in 1u64..30, b in -50i64..50, n in 1u64..30) {
            let lhs = Phase::new(a, m) * Phase::new(b, n);
            let rhs = Phase::new(a * n as i64 + b * m as i64, m * n);
            prop_assert_eq!(lhs, rhs);
            prop_assert!(lhs.numerator() < lhs.order());
        }
    }
}
