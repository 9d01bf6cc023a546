//! Ordinary character tables by simultaneous diagonalization of class sums.
//!
//! Multiplication by a class sum `K_i` acts on the centre of the group
//! algebra. In the orthonormal basis `K_j / sqrt(|K_j| / |G|)` these
//! operators are normal and commute, with `A_i^† = A_{i*}`. A random real
//! combination of `A_i + A_i^†` and `i(A_i - A_i^†)` is Hermitian; its
//! eigenvectors are the central primitive idempotents, from which the
//! characters are read off.

use std::cmp::Ordering;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Element, FiniteGroup};
use crate::error::{Error, Result};

pub const MAX_CHARACTER_ORDER: usize = 256;

const MAX_ATTEMPTS: usize = 8;
const ORTHOGONALITY_TOL: f64 = 1e-9;
/// Minimum spacing of eigenvalues of the combined Hermitian operator,
/// relative to its spectral radius.
const SEPARATION_TOL: f64 = 1e-7;

#[derive(Clone, Debug)]
pub struct CharacterTable {
    /// Class representatives, in the group's class order.
    pub class_reps: Vec<Element>,
    pub class_sizes: Vec<usize>,
    /// Row = irreducible character, column = class.
    pub characters: Vec<Vec<Complex64>>,
    pub degrees: Vec<usize>,
}

impl CharacterTable {
    pub fn num_irreps(&self) -> usize {
        self.characters.len()
    }

    /// Value of character `row` on an arbitrary element.
    pub fn value(&self, group: &FiniteGroup, row: usize, x: Element) -> Complex64 {
        self.characters[row][group.class_of(x)]
    }

    /// `max |<χ_i, χ_j> - δ_ij|` over all pairs of rows.
    pub fn row_orthogonality_residual(&self) -> f64 {
        let order: usize = self.class_sizes.iter().sum();
        let mut worst = 0.0f64;
        for (i, a) in self.characters.iter().enumerate() {
            for (j, b) in self.characters.iter().enumerate() {
                let ip: Complex64 = a
                    .iter()
                    .zip(b)
                    .zip(&self.class_sizes)
                    .map(|((x, y), &s)| x * y.conj() * s as f64)
                    .sum::<Complex64>()
                    / order as f64;
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).norm());
            }
        }
        worst
    }

    /// `max |Σ_χ χ(g_a) conj χ(g_b) - δ_ab |C(g_a)||`.
    pub fn column_orthogonality_residual(&self) -> f64 {
        let order: usize = self.class_sizes.iter().sum();
        let r = self.class_reps.len();
        let mut worst = 0.0f64;
        for a in 0..r {
            for b in 0..r {
                let s: Complex64 = self.characters.iter().map(|row| row[a] * row[b].conj()).sum();
                let target = if a == b { (order / self.class_sizes[a]) as f64 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }
}

pub fn character_table(g: &FiniteGroup, seed: u64) -> Result<CharacterTable> {
    character_table_with_limit(g, seed, MAX_CHARACTER_ORDER)
}

pub fn character_table_with_limit(g: &FiniteGroup, seed: u64, max_order: usize) -> Result<CharacterTable> {
    let n = g.order();
    if n > max_order {
        return Err(Error::UnsupportedSize(format!(
            "character table of {} (order {n}) exceeds the maximum order {max_order}",
            g.name()
        )));
    }
    let classes = g.conjugacy_classes();
    let r = classes.len();
    let sizes: Vec<usize> = classes.iter().map(|c| c.size()).collect();
    let reps: Vec<Element> = classes.iter().map(|c| c.representative).collect();

    // coeff[i][j][k] = #{x in K_i : x^{-1} z_k in K_j}, so K_i K_j = Σ_k coeff K_k
    let mut coeff = vec![0u64; r * r * r];
    for (i, ci) in classes.iter().enumerate() {
        for (k, &z) in reps.iter().enumerate() {
            for &x in &ci.members {
                let j = g.class_of(g.mul(g.inv(x), z));
                coeff[(i * r + j) * r + k] += 1;
            }
        }
    }
    let scale: Vec<f64> = sizes.iter().map(|&s| (s as f64 / n as f64).sqrt()).collect();
    let ops: Vec<DMatrix<Complex64>> = (0..r)
        .map(|i| {
            DMatrix::from_fn(r, r, |k, j| {
                Complex64::new(coeff[(i * r + j) * r + k] as f64 * scale[k] / scale[j], 0.0)
            })
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last_gap = 0.0;
    for _ in 0..MAX_ATTEMPTS {
        let mut h = DMatrix::<Complex64>::zeros(r, r);
        for a in &ops {
            let adj = a.adjoint();
            let re: f64 = rng.gen_range(-1.0..1.0);
            let im: f64 = rng.gen_range(-1.0..1.0);
            h += (a + &adj) * Complex64::new(re, 0.0);
            h += (a - &adj) * Complex64::new(0.0, im);
        }
        let eig = SymmetricEigen::new(h);
        let mut evals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let radius = evals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        evals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        let gap = evals.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        last_gap = gap / radius;
        if r > 1 && last_gap < SEPARATION_TOL {
            continue;
        }
        if let Some(table) = read_characters(n, &reps, &sizes, &scale, &eig.eigenvectors) {
            return Ok(table);
        }
    }
    Err(Error::Degenerate(format!(
        "class-sum diagonalization of {} failed to separate characters after {MAX_ATTEMPTS} attempts (relative gap {last_gap:.3e})",
        g.name()
    )))
}

fn read_characters(
    n: usize,
    reps: &[Element],
    sizes: &[usize],
    scale: &[f64],
    vectors: &DMatrix<Complex64>,
) -> Option<CharacterTable> {
    let r = reps.len();
    let mut rows = Vec::with_capacity(r);
    let mut degrees = Vec::with_capacity(r);
    for col in vectors.column_iter() {
        // coefficient of K_j in the idempotent is (χ(1)/|G|) conj χ(g_j)
        let coeffs: Vec<Complex64> = (0..r).map(|j| col[j] / scale[j]).collect();
        if coeffs[0].norm() < 1e-12 {
            return None;
        }
        let ratios: Vec<Complex64> = coeffs.iter().map(|c| (c / coeffs[0]).conj()).collect();
        let norm: f64 = ratios.iter().zip(sizes).map(|(z, &s)| z.norm_sqr() * s as f64).sum();
        let degree = (n as f64 / norm).sqrt();
        let rounded = degree.round();
        if (degree - rounded).abs() > 1e-6 || rounded < 1.0 || !n.is_multiple_of(rounded as usize) {
            return None;
        }
        degrees.push(rounded as usize);
        rows.push(ratios.iter().map(|z| z * rounded).collect::<Vec<_>>());
    }
    let mut order: Vec<usize> = (0..r).collect();
    // descending values put the trivial character first
    order.sort_by(|&a, &b| degrees[a].cmp(&degrees[b]).then_with(|| lex_cmp(&rows[b], &rows[a])));
    let table = CharacterTable {
        class_reps: reps.to_vec(),
        class_sizes: sizes.to_vec(),
        characters: order.iter().map(|&i| rows[i].clone()).collect(),
        degrees: order.iter().map(|&i| degrees[i]).collect(),
    };
    let square_sum: usize = table.degrees.iter().map(|d| d * d).sum();
    if square_sum != n || table.row_orthogonality_residual() > ORTHOGONALITY_TOL {
        return None;
    }
    Some(table)
}

/// Lexicographic order on complex vectors, comparing (re, im) on a 1e-9 grid.
pub(crate) fn lex_cmp(a: &[Complex64], b: &[Complex64]) -> Ordering {
    let key = |z: &Complex64| ((z.re * 1e9).round() as i64, (z.im * 1e9).round() as i64);
    a.iter().map(key).cmp(b.iter().map(key))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::build_named_group;

    /// Characters from the regular representation: the number of irreducible
    /// characters equals the number of classes and the regular character
    /// decomposes as Σ d χ. Independent of the eigen-solver.
    fn regular_character_check(g: &FiniteGroup, t: &CharacterTable) {
        for (c, &rep) in t.class_reps.iter().enumerate() {
            let regular: Complex64 = t.characters.iter().zip(&t.degrees).map(|(row, &d)| row[c] * d as f64).sum();
            let expect = if rep == 0 { g.order() as f64 } else { 0.0 };
            assert!((regular - expect).norm() < 1e-9);
        }
    }

    #[test]
    fn sign_character_of_c2() {
        let g = build_named_group("C2").unwrap();
        let t = character_table(&g, 0).unwrap();
        let vals: Vec<Vec<f64>> = t.characters.iter().map(|r| r.iter().map(|z| z.re).collect()).collect();
        assert!((vals[0][0] - 1.0).abs() < 1e-12 && (vals[0][1] - 1.0).abs() < 1e-12);
        assert!((vals[1][0] - 1.0).abs() < 1e-12 && (vals[1][1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn degrees_of_small_groups() {
        for (spec, degrees) in [
            ("S3", vec![1, 1, 2]),
            ("Q8", vec![1, 1, 1, 1, 2]),
            ("D4", vec![1, 1, 1, 1, 2]),
            ("S4", vec![1, 1, 2, 3, 3]),
            ("C5", vec![1; 5]),
            ("S5", vec![1, 1, 4, 4, 5, 5, 6]),
        ] {
            let g = build_named_group(spec).unwrap();
            let t = character_table(&g, 0).unwrap();
            assert_eq!(t.degrees, degrees, "{spec}");
            assert!(t.row_orthogonality_residual() < 1e-9);
            assert!(t.column_orthogonality_residual() < 1e-9);
            regular_character_check(&g, &t);
        }
    }

    #[test]
    fn seed_does_not_change_table() {
        let g = build_named_group("D5").unwrap();
        let a = character_table(&g, 0).unwrap();
        let b = character_table(&g, 17).unwrap();
        assert_eq!(a.degrees, b.degrees);
        for (x, y) in a.characters.iter().zip(&b.characters) {
            assert_eq!(lex_cmp(x, y), Ordering::Equal);
        }
    }

    #[test]
    fn size_limit() {
        let g = build_named_group("C300").unwrap();
        assert!(matches!(character_table(&g, 0), Err(Error::UnsupportedSize(_))));
    }
}
