//! Finite groups as multiplication tables.
//!
//! Every group is stored as a dense Cayley table over element indices
//! `0..order`, with the identity at index 0. Named families use a fixed,
//! documented element ordering so that everything downstream (class order,
//! character-table row order, simple-object order) is reproducible.
//!
//! | family | order | element ordering |
//! |--------|-------|------------------|
//! | `C<n>` | n | `g^k` has index `k` |
//! | `D<n>` | 2n | `r^i s^j` has index `i + n*j` |
//! | `S<n>` | n! | permutations of `0..n` in lexicographic order, `(στ)(k) = σ(τ(k))` |
//! | `Q8` | 8 | `1, -1, i, -i, j, -j, k, -k` |
//! | `AxB` | \|A\|\|B\| | pair `(a, b)` has index `a*|B| + b` |

mod characters;
mod homomorphisms;

pub(crate) use characters::lex_cmp;
pub use characters::{character_table, character_table_with_limit, CharacterTable, MAX_CHARACTER_ORDER};
pub use homomorphisms::{
    count_homomorphisms, count_homomorphisms_within, orbit_count_homomorphisms,
    orbit_count_homomorphisms_within, GroupPresentation, DEFAULT_WORK_BUDGET,
};

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Deserialize;

use crate::error::{Error, Result};

pub type Element = usize;

/// Groups up to this order get an exhaustive associativity check.
const ASSOCIATIVITY_CHECK_ORDER: usize = 256;

pub const DEFAULT_MAX_ORDER: usize = 10_000;

/// Group-order cap, overridable through `DWTQFT_MAX_ORDER`.
pub fn max_order() -> usize {
    std::env::var("DWTQFT_MAX_ORDER")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or(DEFAULT_MAX_ORDER)
}

pub struct FiniteGroup {
    name: String,
    order: usize,
    mult: Vec<u32>,
    inv: Vec<u32>,
    classes: OnceLock<ClassData>,
}

struct ClassData {
    classes: Vec<ConjugacyClass>,
    class_of: Vec<usize>,
}

impl Clone for FiniteGroup {
    fn clone(&self) -> Self {
        FiniteGroup {
            name: self.name.clone(),
            order: self.order,
            mult: self.mult.clone(),
            inv: self.inv.clone(),
            classes: OnceLock::new(),
        }
    }
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.mult == other.mult
    }
}

impl Eq for FiniteGroup {}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("name", &self.name)
            .field("order", &self.order)
            .finish()
    }
}

impl FiniteGroup {
    /// Builds a group from a row-major Cayley table, validating the group
    /// axioms. Index 0 must be the identity.
    pub fn from_table(name: impl Into<String>, order: usize, table: &[usize]) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput("group order must be positive".into()));
        }
        if order > max_order() {
            return Err(Error::UnsupportedSize(format!(
                "group order {order} exceeds the configured maximum {}",
                max_order()
            )));
        }
        if table.len() != order * order {
            return Err(Error::InvalidInput(format!(
                "multiplication table has {} entries, expected {}",
                table.len(),
                order * order
            )));
        }
        if let Some(&bad) = table.iter().find(|&&v| v >= order) {
            return Err(Error::InvalidInput(format!("table entry {bad} out of range")));
        }
        for x in 0..order {
            if table[x] != x || table[x * order] != x {
                return Err(Error::InvalidInput(format!(
                    "element 0 is not a two-sided identity (fails at {x})"
                )));
            }
        }
        // Latin square: every row and column a permutation.
        let mut seen = vec![false; order];
        for a in 0..order {
            seen.iter_mut().for_each(|s| *s = false);
            for b in 0..order {
                let v = table[a * order + b];
                if seen[v] {
                    return Err(Error::InvalidInput(format!("row {a} is not a permutation")));
                }
                seen[v] = true;
            }
        }
        for b in 0..order {
            seen.iter_mut().for_each(|s| *s = false);
            for a in 0..order {
                let v = table[a * order + b];
                if seen[v] {
                    return Err(Error::InvalidInput(format!("column {b} is not a permutation")));
                }
                seen[v] = true;
            }
        }
        let g = Self::from_table_unchecked(name.into(), order, table);
        for a in 0..order {
            let ai = g.inv(a);
            if g.mul(a, ai) != 0 || g.mul(ai, a) != 0 {
                return Err(Error::InvalidInput(format!("element {a} has no two-sided inverse")));
            }
        }
        if order <= ASSOCIATIVITY_CHECK_ORDER {
            for a in 0..order {
                for b in 0..order {
                    let ab = g.mul(a, b);
                    for c in 0..order {
                        if g.mul(ab, c) != g.mul(a, g.mul(b, c)) {
                            return Err(Error::InvalidInput(format!(
                                "multiplication is not associative at ({a}, {b}, {c})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(g)
    }

    /// Table known to come from a valid group (induced subgroup tables,
    /// named families after their own validation).
    fn from_table_unchecked(name: String, order: usize, table: &[usize]) -> Self {
        let mult: Vec<u32> = table.iter().map(|&v| v as u32).collect();
        let mut inv = vec![0u32; order];
        for a in 0..order {
            for b in 0..order {
                if mult[a * order + b] == 0 {
                    inv[a] = b as u32;
                    break;
                }
            }
        }
        FiniteGroup { name, order, mult, inv, classes: OnceLock::new() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> Element {
        0
    }

    pub fn elements(&self) -> std::ops::Range<Element> {
        0..self.order
    }

    #[inline]
    pub fn mul(&self, a: Element, b: Element) -> Element {
        self.mult[a * self.order + b] as Element
    }

    #[inline]
    pub fn inv(&self, a: Element) -> Element {
        self.inv[a] as Element
    }

    /// `g x g^{-1}`
    #[inline]
    pub fn conjugate(&self, g: Element, x: Element) -> Element {
        self.mul(self.mul(g, x), self.inv(g))
    }

    pub fn pow(&self, x: Element, k: u64) -> Element {
        let mut acc = 0;
        let mut base = x;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    pub fn element_order(&self, x: Element) -> usize {
        let mut y = x;
        let mut n = 1;
        while y != 0 {
            y = self.mul(y, x);
            n += 1;
        }
        n
    }

    pub fn commute(&self, a: Element, b: Element) -> bool {
        self.mul(a, b) == self.mul(b, a)
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (a + 1..self.order).all(|b| self.commute(a, b)))
    }

    /// Row-major Cayley table.
    pub fn table(&self) -> Vec<usize> {
        self.mult.iter().map(|&v| v as usize).collect()
    }

    fn class_data(&self) -> &ClassData {
        self.classes.get_or_init(|| compute_classes(self))
    }

    pub fn conjugacy_classes(&self) -> &[ConjugacyClass] {
        &self.class_data().classes
    }

    /// Index into [`FiniteGroup::conjugacy_classes`] of the class containing `x`.
    pub fn class_of(&self, x: Element) -> usize {
        self.class_data().class_of[x]
    }

    pub fn num_classes(&self) -> usize {
        self.conjugacy_classes().len()
    }

    pub fn centralizer(&self, x: Element) -> Subgroup {
        let members: Vec<Element> = self.elements().filter(|&h| self.commute(h, x)).collect();
        Subgroup::from_sorted_members(self, members, format!("C({x})"))
    }
}

/// Conjugacy classes of `g`, sorted by their minimal-index representative.
pub fn conjugacy_classes(g: &FiniteGroup) -> &[ConjugacyClass] {
    g.conjugacy_classes()
}

pub fn centralizer(g: &FiniteGroup, x: Element) -> Result<Subgroup> {
    if x >= g.order() {
        return Err(Error::InvalidInput(format!("element {x} out of range for {}", g.name())));
    }
    Ok(g.centralizer(x))
}

fn compute_classes(g: &FiniteGroup) -> ClassData {
    let n = g.order();
    let mut class_of = vec![usize::MAX; n];
    let mut classes = Vec::new();
    for x in 0..n {
        if class_of[x] != usize::MAX {
            continue;
        }
        let idx = classes.len();
        let mut members: Vec<Element> = g.elements().map(|h| g.conjugate(h, x)).collect();
        members.sort_unstable();
        members.dedup();
        for &m in &members {
            class_of[m] = idx;
        }
        classes.push(ConjugacyClass { representative: x, members, centralizer: g.centralizer(x) });
    }
    ClassData { classes, class_of }
}

#[derive(Clone, Debug)]
pub struct ConjugacyClass {
    pub representative: Element,
    pub members: Vec<Element>,
    pub centralizer: Subgroup,
}

impl ConjugacyClass {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// A subgroup together with its induced group structure.
///
/// Local indices follow the sorted order of `members`, so the identity is
/// local index 0 as for every [`FiniteGroup`].
#[derive(Clone, Debug)]
pub struct Subgroup {
    members: Vec<Element>,
    local: Vec<u32>,
    group: Arc<FiniteGroup>,
}

impl Subgroup {
    /// Validates closure under products and inverses.
    pub fn new(parent: &FiniteGroup, mut members: Vec<Element>, name: impl Into<String>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if members.first() != Some(&0) {
            return Err(Error::InvalidInput("subgroup must contain the identity".into()));
        }
        if let Some(&bad) = members.iter().find(|&&m| m >= parent.order()) {
            return Err(Error::InvalidInput(format!("element {bad} out of range")));
        }
        let mut member = vec![false; parent.order()];
        members.iter().for_each(|&m| member[m] = true);
        for &a in &members {
            if !member[parent.inv(a)] {
                return Err(Error::InvalidInput(format!("not closed under inverse at {a}")));
            }
            for &b in &members {
                if !member[parent.mul(a, b)] {
                    return Err(Error::InvalidInput(format!("not closed under product at ({a}, {b})")));
                }
            }
        }
        Ok(Self::from_sorted_members(parent, members, name.into()))
    }

    fn from_sorted_members(parent: &FiniteGroup, members: Vec<Element>, name: String) -> Self {
        let mut local = vec![u32::MAX; parent.order()];
        for (i, &m) in members.iter().enumerate() {
            local[m] = i as u32;
        }
        let k = members.len();
        let mut table = Vec::with_capacity(k * k);
        for &a in &members {
            for &b in &members {
                table.push(local[parent.mul(a, b)] as usize);
            }
        }
        let group = Arc::new(FiniteGroup::from_table_unchecked(name, k, &table));
        Subgroup { members, local, group }
    }

    pub fn members(&self) -> &[Element] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, x: Element) -> bool {
        self.local.get(x).is_some_and(|&l| l != u32::MAX)
    }

    pub fn local_index(&self, x: Element) -> Option<usize> {
        self.local.get(x).filter(|&&l| l != u32::MAX).map(|&l| l as usize)
    }

    pub fn global(&self, local: usize) -> Element {
        self.members[local]
    }

    /// The subgroup as a group in its own right, on local indices.
    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }
}

pub fn cyclic(n: usize) -> Result<FiniteGroup> {
    if n == 0 {
        return Err(Error::Parse("cyclic group order must be at least 1".into()));
    }
    check_size(n)?;
    let table: Vec<usize> = (0..n).flat_map(|a| (0..n).map(move |b| (a + b) % n)).collect();
    FiniteGroup::from_table(format!("C{n}"), n, &table)
}

/// Dihedral group of order `2n`.
pub fn dihedral(n: usize) -> Result<FiniteGroup> {
    if n == 0 {
        return Err(Error::Parse("dihedral parameter must be at least 1".into()));
    }
    check_size(2 * n)?;
    let order = 2 * n;
    let mut table = vec![0; order * order];
    for a in 0..order {
        let (i, j) = (a % n, a / n);
        for b in 0..order {
            let (k, l) = (b % n, b / n);
            let rot = if j == 0 { (i + k) % n } else { (i + n - k) % n };
            table[a * order + b] = rot + n * ((j + l) % 2);
        }
    }
    FiniteGroup::from_table(format!("D{n}"), order, &table)
}

pub const MAX_SYMMETRIC_DEGREE: usize = 5;

pub fn symmetric(n: usize) -> Result<FiniteGroup> {
    if n == 0 {
        return Err(Error::Parse("symmetric group degree must be at least 1".into()));
    }
    if n > MAX_SYMMETRIC_DEGREE {
        return Err(Error::UnsupportedSize(format!(
            "S{n} is not supported (maximum degree {MAX_SYMMETRIC_DEGREE})"
        )));
    }
    let mut perms = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        perms.push(p.clone());
        if !next_permutation(&mut p) {
            break;
        }
    }
    let order = perms.len();
    check_size(order)?;
    let index = |q: &[usize]| perms.binary_search_by(|r| r.as_slice().cmp(q)).expect("closed");
    let mut table = vec![0; order * order];
    let mut buf = vec![0; n];
    for (a, sigma) in perms.iter().enumerate() {
        for (b, tau) in perms.iter().enumerate() {
            for k in 0..n {
                buf[k] = sigma[tau[k]];
            }
            table[a * order + b] = index(&buf);
        }
    }
    FiniteGroup::from_table(format!("S{n}"), order, &table)
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

pub fn quaternion() -> Result<FiniteGroup> {
    // Index 2u + s encodes (-1)^s * unit[u], units 1, i, j, k.
    // unit product table: (sign, unit) for unit[a] * unit[b].
    const PROD: [[(usize, usize); 4]; 4] = [
        [(0, 0), (0, 1), (0, 2), (0, 3)],
        [(0, 1), (1, 0), (0, 3), (1, 2)],
        [(0, 2), (1, 3), (1, 0), (0, 1)],
        [(0, 3), (0, 2), (1, 1), (1, 0)],
    ];
    let mut table = vec![0; 64];
    for a in 0..8 {
        for b in 0..8 {
            let (s, u) = PROD[a / 2][b / 2];
            let sign = (a % 2 + b % 2 + s) % 2;
            table[a * 8 + b] = 2 * u + sign;
        }
    }
    FiniteGroup::from_table("Q8", 8, &table)
}

pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup) -> Result<FiniteGroup> {
    direct_product_capped(a, b, max_order())
}

pub fn direct_product_capped(a: &FiniteGroup, b: &FiniteGroup, cap: usize) -> Result<FiniteGroup> {
    let order = a
        .order()
        .checked_mul(b.order())
        .filter(|&o| o <= cap)
        .ok_or_else(|| {
            Error::UnsupportedSize(format!(
                "|{}| * |{}| exceeds the configured maximum {cap}",
                a.name(),
                b.name()
            ))
        })?;
    let nb = b.order();
    let mut table = vec![0; order * order];
    for x in 0..order {
        let (xa, xb) = (x / nb, x % nb);
        for y in 0..order {
            let (ya, yb) = (y / nb, y % nb);
            table[x * order + y] = a.mul(xa, ya) * nb + b.mul(xb, yb);
        }
    }
    let name = format!("{}x{}", a.name(), b.name());
    if order <= ASSOCIATIVITY_CHECK_ORDER {
        FiniteGroup::from_table(name, order, &table)
    } else {
        // componentwise structure is a group whenever the factors are
        Ok(FiniteGroup::from_table_unchecked(name, order, &table))
    }
}

fn check_size(order: usize) -> Result<()> {
    if order > max_order() {
        return Err(Error::UnsupportedSize(format!(
            "group order {order} exceeds the configured maximum {}",
            max_order()
        )));
    }
    Ok(())
}

/// Parses `C<n> | D<n> | S<n> | Q8 | <spec>x<spec>`.
pub fn build_named_group(spec: &str) -> Result<FiniteGroup> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(Error::Parse("empty group spec".into()));
    }
    let mut factors = spec.split('x');
    let first = parse_factor(factors.next().unwrap_or(""))?;
    factors.try_fold(first, |acc, f| direct_product(&acc, &parse_factor(f)?))
}

fn parse_factor(f: &str) -> Result<FiniteGroup> {
    let f = f.trim();
    if f == "Q8" {
        return quaternion();
    }
    let mut chars = f.chars();
    let family = chars.next().ok_or_else(|| Error::Parse("empty factor in group spec".into()))?;
    let digits = chars.as_str();
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("malformed group factor `{f}`")));
    }
    let n: usize = digits
        .parse()
        .map_err(|_| Error::Parse(format!("group parameter out of range in `{f}`")))?;
    match family {
        'C' => cyclic(n),
        'D' => dihedral(n),
        'S' => symmetric(n),
        _ => Err(Error::Parse(format!("unknown group family in `{f}`"))),
    }
}

/// A named group, or a path to a JSON table file (anything ending in `.json`).
pub fn parse_group_spec(spec: &str) -> Result<FiniteGroup> {
    let spec = spec.trim();
    if spec.ends_with(".json") {
        let text = std::fs::read_to_string(spec)?;
        return group_from_json(&text);
    }
    build_named_group(spec)
}

#[derive(Deserialize)]
struct TableFile {
    order: usize,
    mult: serde_json::Value,
    #[serde(default)]
    name: Option<String>,
}

/// Explicit-table input: `{"order": n, "mult": [...]}` where `mult` is either
/// a flat row-major list of `n*n` indices or a list of `n` rows.
pub fn group_from_json(text: &str) -> Result<FiniteGroup> {
    let file: TableFile = serde_json::from_str(text)?;
    let entries: Vec<usize> = match &file.mult {
        serde_json::Value::Array(rows) if rows.iter().all(|r| r.is_array()) => rows
            .iter()
            .flat_map(|r| r.as_array().cloned().unwrap_or_default())
            .map(|v| json_index(&v))
            .collect::<Result<_>>()?,
        serde_json::Value::Array(flat) => flat.iter().map(json_index).collect::<Result<_>>()?,
        _ => return Err(Error::InvalidInput("`mult` must be an array".into())),
    };
    let name = file.name.unwrap_or_else(|| format!("G{}", file.order));
    FiniteGroup::from_table(name, file.order, &entries)
}

fn json_index(v: &serde_json::Value) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::InvalidInput(format!("table entry {v} is not a nonnegative integer")))
}
