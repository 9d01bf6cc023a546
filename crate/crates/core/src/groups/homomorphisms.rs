//! Exact enumeration of homomorphisms from finitely presented groups.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Element, FiniteGroup};
use crate::error::{Error, Result};

/// Default cap on the number of generator tuples enumerated per count.
pub const DEFAULT_WORK_BUDGET: u128 = 500_000_000;

/// Generators are numbered from 1; a relator letter `+i` is generator `i`
/// and `-i` its inverse.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPresentation {
    #[serde(rename = "generators")]
    pub num_generators: usize,
    pub relators: Vec<Vec<i32>>,
}

impl GroupPresentation {
    pub fn new(num_generators: usize, relators: Vec<Vec<i32>>) -> Result<Self> {
        for word in &relators {
            for &letter in word {
                if letter == 0 || letter.unsigned_abs() as usize > num_generators {
                    return Err(Error::InvalidInput(format!(
                        "relator letter {letter} does not name one of {num_generators} generators"
                    )));
                }
            }
        }
        Ok(GroupPresentation { num_generators, relators })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: GroupPresentation = serde_json::from_str(text)?;
        Self::new(p.num_generators, p.relators)
    }

    /// The trivial group: no generators, no relators.
    pub fn trivial() -> Self {
        GroupPresentation { num_generators: 0, relators: Vec::new() }
    }

    pub fn free(k: usize) -> Self {
        GroupPresentation { num_generators: k, relators: Vec::new() }
    }

    /// `<a | a^p>`
    pub fn cyclic(p: usize) -> Self {
        GroupPresentation { num_generators: 1, relators: vec![vec![1; p]] }
    }

    /// `<a, b | [a, b]>`
    pub fn commuting_pair() -> Self {
        Self::surface(1)
    }

    /// `<a_1, b_1, ..., a_g, b_g | Π [a_i, b_i]>`
    pub fn surface(genus: usize) -> Self {
        let mut word = Vec::with_capacity(4 * genus);
        for i in 0..genus as i32 {
            let (a, b) = (2 * i + 1, 2 * i + 2);
            word.extend_from_slice(&[a, b, -a, -b]);
        }
        let relators = if genus == 0 { Vec::new() } else { vec![word] };
        GroupPresentation { num_generators: 2 * genus, relators }
    }

    /// Fundamental group of `Σ_g × S¹`: the surface group times a central `c`.
    pub fn surface_times_circle(genus: usize) -> Self {
        let mut p = Self::surface(genus);
        let c = (2 * genus + 1) as i32;
        for a in 1..c {
            p.relators.push(vec![a, c, -a, -c]);
        }
        p.num_generators += 1;
        p
    }

    /// `Z^3`, the fundamental group of the 3-torus.
    pub fn torus3() -> Self {
        GroupPresentation {
            num_generators: 3,
            relators: vec![vec![1, 2, -1, -2], vec![1, 3, -1, -3], vec![2, 3, -2, -3]],
        }
    }

    fn holds(&self, g: &FiniteGroup, images: &[Element]) -> bool {
        self.relators.iter().all(|w| {
            w.iter().fold(0, |acc, &l| {
                let x = images[l.unsigned_abs() as usize - 1];
                g.mul(acc, if l > 0 { x } else { g.inv(x) })
            }) == 0
        })
    }
}

pub fn count_homomorphisms(p: &GroupPresentation, g: &FiniteGroup) -> Result<u64> {
    count_homomorphisms_within(p, g, DEFAULT_WORK_BUDGET)
}

/// Number of generator tuples in `G^k` satisfying every relator.
///
/// The first generator is split across rayon workers; the total is an exact
/// integer sum, independent of the worker count.
pub fn count_homomorphisms_within(p: &GroupPresentation, g: &FiniteGroup, budget: u128) -> Result<u64> {
    let n = g.order();
    let k = p.num_generators;
    let work = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if work > budget {
        return Err(Error::Budget(format!(
            "enumerating {n}^{k} generator tuples exceeds the work budget {budget}"
        )));
    }
    if k == 0 {
        return Ok(u64::from(p.holds(g, &[])));
    }
    let total = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut images = vec![0; k];
            images[0] = first;
            let mut count = 0u64;
            loop {
                if p.holds(g, &images) {
                    count += 1;
                }
                // odometer over positions 1..k
                let mut pos = k - 1;
                loop {
                    if pos == 0 {
                        return count;
                    }
                    images[pos] += 1;
                    if images[pos] < n {
                        break;
                    }
                    images[pos] = 0;
                    pos -= 1;
                }
            }
        })
        .sum();
    Ok(total)
}

pub fn orbit_count_homomorphisms(p: &GroupPresentation, g: &FiniteGroup) -> Result<u64> {
    orbit_count_homomorphisms_within(p, g, DEFAULT_WORK_BUDGET)
}

/// Number of conjugation orbits on `Hom(p, G)` by Burnside's lemma.
///
/// The homomorphisms fixed by conjugation with `h` are exactly those landing
/// in the centralizer `C(h)`, and that count is constant on classes, so the
/// sum runs over class representatives weighted by class size.
pub fn orbit_count_homomorphisms_within(p: &GroupPresentation, g: &FiniteGroup, budget: u128) -> Result<u64> {
    let mut burnside: u128 = 0;
    let mut total_homs = None;
    for class in g.conjugacy_classes() {
        let fixed = count_homomorphisms_within(p, class.centralizer.group(), budget)?;
        if class.representative == 0 {
            total_homs = Some(fixed);
        }
        burnside += class.size() as u128 * fixed as u128;
    }
    let n = g.order() as u128;
    if !burnside.is_multiple_of(n) {
        return Err(Error::Invariant(format!(
            "Burnside sum {burnside} is not divisible by |G| = {n}"
        )));
    }
    let orbits = burnside / n;
    let homs = total_homs.unwrap_or(0) as u128;
    if orbits * n < homs {
        return Err(Error::Invariant(format!(
            "orbit count {orbits} times |G| is below the homomorphism count {homs}"
        )));
    }
    Ok(orbits as u64)
}
