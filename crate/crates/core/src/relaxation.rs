//! Linear relaxations of a parity-check matrix.
//!
//! Two formulations are generated:
//!
//! * the odd-subset relaxation, with one inequality
//!   `Σ_{i∈S} f_i − Σ_{i∈N∖S} f_i ≤ |S| − 1` for every odd subset `S` of every
//!   check support `N`;
//! * the degree-3 cascade, where a check of degree `d ≥ 4` is rewritten as a
//!   chain of `d − 2` degree-3 checks linked by `d − 3` auxiliary variables,
//!   each relaxed by its 4 odd-subset rows. Box rows are dropped for every
//!   variable that sits inside a degree-3 block, since the 4 rows already imply
//!   `0 ≤ x ≤ 1` there.
//!
//! Coefficients are exact integers; conversion to `f64` happens in the solver.

use std::fmt::{self, Write as _};

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::{DegreeProfile, ParityCheckMatrix};

/// Largest check degree for which the odd-subset rows are enumerated
/// (`2^19` rows for a single check).
pub const MAX_FELDMAN_DEGREE: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelaxationError {
    #[error("empty check support")]
    EmptySupport,
    #[error("check {check} has degree {degree}; the cascade needs degree >= 3")]
    DegreeBelowThree { check: usize, degree: usize },
    #[error("check {check} has degree {degree}; at most {max} is supported")]
    DegreeTooLarge { check: usize, degree: usize, max: usize },
}

/// One inequality `Σ coeff·x_var ≤ rhs`, with `coeffs` sorted by variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub coeffs: Vec<(usize, i32)>,
    pub rhs: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSystem {
    pub num_vars: usize,
    pub rows: Vec<Row>,
    pub var_names: Vec<String>,
    pub box_rows_included: bool,
}

impl ConstraintSystem {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Dense coefficient matrix and right-hand side.
    pub fn to_dense(&self) -> (Vec<Vec<i32>>, Vec<i64>) {
        let a = self
            .rows
            .iter()
            .map(|row| {
                let mut dense = vec![0; self.num_vars];
                for &(v, c) in &row.coeffs {
                    dense[v] = c;
                }
                dense
            })
            .collect();
        (a, self.rows.iter().map(|r| r.rhs).collect())
    }

    /// True when `x` satisfies every row within `tol`.
    pub fn is_satisfied(&self, x: &[f64], tol: f64) -> bool {
        self.max_violation(x) <= tol
    }

    /// Largest amount by which any row exceeds its right-hand side (0 if none).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.num_vars);
        self.rows
            .iter()
            .map(|row| {
                let lhs: f64 = row.coeffs.iter().map(|&(v, c)| c as f64 * x[v]).sum();
                lhs - row.rhs as f64
            })
            .fold(0.0, f64::max)
    }

    /// Exact integer feasibility test for 0/1 points.
    pub fn admits_binary(&self, x: &[u8]) -> bool {
        assert_eq!(x.len(), self.num_vars);
        self.rows.iter().all(|row| {
            let lhs: i64 = row.coeffs.iter().map(|&(v, c)| c as i64 * x[v] as i64).sum();
            lhs <= row.rhs
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("constraint systems serialize")
    }

    /// Plain-text tableau: one `coeff*var ... <= rhs` line per row.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ConstraintSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            let mut line = String::new();
            for &(v, c) in &row.coeffs {
                write!(line, "{c:+}*{} ", self.var_names[v])?;
            }
            writeln!(f, "{line}<= {}", row.rhs)?;
        }
        Ok(())
    }
}

fn original_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("f_{i}")).collect()
}

/// All odd-cardinality subsets of `support`, by ascending size and then
/// lexicographically. `support` must be sorted.
pub fn odd_subsets(support: &[usize]) -> Result<Vec<Vec<usize>>, RelaxationError> {
    if support.is_empty() {
        return Err(RelaxationError::EmptySupport);
    }
    debug_assert!(support.windows(2).all(|w| w[0] < w[1]), "support must be sorted");
    Ok((1..=support.len())
        .step_by(2)
        .flat_map(|k| support.iter().copied().combinations(k))
        .collect())
}

/// Odd-subset rows of one check, in [`odd_subsets`] order.
pub fn feldman_rows_for_check(support: &[usize]) -> Result<Vec<Row>, RelaxationError> {
    let subsets = odd_subsets(support)?;
    Ok(subsets
        .into_iter()
        .map(|s| {
            let coeffs = support
                .iter()
                .map(|&i| (i, if s.binary_search(&i).is_ok() { 1 } else { -1 }))
                .collect();
            Row { coeffs, rhs: s.len() as i64 - 1 }
        })
        .collect())
}

fn box_rows(v: usize) -> [Row; 2] {
    [Row { coeffs: vec![(v, -1)], rhs: 0 }, Row { coeffs: vec![(v, 1)], rhs: 1 }]
}

/// Odd-subset relaxation of `h`: rows in check order, each check's rows in
/// [`odd_subsets`] order, followed by `−f_i ≤ 0, f_i ≤ 1` for each `i` when
/// `include_boxes` is set.
pub fn feldman_system(
    h: &ParityCheckMatrix,
    include_boxes: bool,
) -> Result<ConstraintSystem, RelaxationError> {
    let mut rows = Vec::new();
    for (j, support) in h.rows().iter().enumerate() {
        if support.len() > MAX_FELDMAN_DEGREE {
            return Err(RelaxationError::DegreeTooLarge {
                check: j,
                degree: support.len(),
                max: MAX_FELDMAN_DEGREE,
            });
        }
        rows.extend(feldman_rows_for_check(support)?);
    }
    if include_boxes {
        rows.extend((0..h.n()).flat_map(box_rows));
    }
    Ok(ConstraintSystem {
        num_vars: h.n(),
        rows,
        var_names: original_names(h.n()),
        box_rows_included: include_boxes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecomposeMode {
    /// Reject checks of degree 1 or 2.
    #[default]
    Strict,
    /// Keep checks of degree 1 or 2 as their raw odd-subset rows.
    Lenient,
}

/// An auxiliary variable of the cascade. Its value on a binary assignment is
/// the XOR of the original bits in `prefix`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuxVar {
    pub check: usize,
    pub position: usize,
    pub prefix: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionResult {
    pub n_original: usize,
    pub extended_num_vars: usize,
    /// Degree-3 checks over extended variables, in chain order.
    pub checks3: Vec<[usize; 3]>,
    /// Source check of each entry of `checks3`.
    pub provenance: Vec<usize>,
    /// `aux[k]` describes extended variable `n_original + k`.
    pub aux: Vec<AuxVar>,
    /// Low-degree checks kept undecomposed in lenient mode.
    pub passthrough: Vec<(usize, Vec<usize>)>,
}

impl DecompositionResult {
    pub fn aux_count(&self) -> usize {
        self.aux.len()
    }

    pub fn var_names(&self) -> Vec<String> {
        let mut names = original_names(self.n_original);
        names.extend(self.aux.iter().map(|a| format!("z_{}_{}", a.check + 1, a.position + 1)));
        names
    }

    /// Extends a binary assignment of the original variables to the
    /// auxiliaries by chain XOR.
    pub fn extend(&self, x: &[u8]) -> Vec<u8> {
        assert_eq!(x.len(), self.n_original);
        let mut out = x.to_vec();
        out.extend(self.aux.iter().map(|a| a.prefix.iter().fold(0, |acc, &i| acc ^ (x[i] & 1))));
        out
    }

    /// Original variables that appear in no degree-3 check.
    pub fn uncovered(&self) -> Vec<usize> {
        let mut covered = vec![false; self.n_original];
        for t in &self.checks3 {
            for &v in t.iter().filter(|&&v| v < self.n_original) {
                covered[v] = true;
            }
        }
        (0..self.n_original).filter(|&v| !covered[v]).collect()
    }
}

/// Rewrites every check of `h` as a chain of degree-3 checks.
///
/// A check with support `(i_1, …, i_d)` yields
/// `(i_1, i_2, z_1), (z_1, i_3, z_2), …, (z_{d−3}, i_{d−1}, i_d)`. Auxiliaries
/// are numbered after all original variables, check by check in chain order.
pub fn decompose(
    h: &ParityCheckMatrix,
    mode: DecomposeMode,
) -> Result<DecompositionResult, RelaxationError> {
    let n = h.n();
    let mut checks3 = Vec::new();
    let mut provenance = Vec::new();
    let mut aux = Vec::new();
    let mut passthrough = Vec::new();

    for (j, support) in h.rows().iter().enumerate() {
        let d = support.len();
        if d < 3 {
            match mode {
                DecomposeMode::Strict => {
                    return Err(RelaxationError::DegreeBelowThree { check: j, degree: d })
                }
                DecomposeMode::Lenient => {
                    passthrough.push((j, support.clone()));
                    continue;
                }
            }
        }
        if d == 3 {
            checks3.push([support[0], support[1], support[2]]);
            provenance.push(j);
            continue;
        }
        let first = n + aux.len();
        for k in 0..d - 3 {
            aux.push(AuxVar { check: j, position: k, prefix: support[..k + 2].to_vec() });
        }
        checks3.push([support[0], support[1], first]);
        provenance.push(j);
        for k in 1..d - 3 {
            checks3.push([first + k - 1, support[k + 1], first + k]);
            provenance.push(j);
        }
        checks3.push([first + d - 4, support[d - 2], support[d - 1]]);
        provenance.push(j);
    }

    Ok(DecompositionResult {
        n_original: n,
        extended_num_vars: n + aux.len(),
        checks3,
        provenance,
        aux,
        passthrough,
    })
}

/// Cascade relaxation: 4 rows per degree-3 check (over its sorted support),
/// then raw rows for passthrough checks, then, if `cover_boxes`, box rows for
/// the original variables that lie in no degree-3 check.
pub fn decomposed_system(d: &DecompositionResult, cover_boxes: bool) -> ConstraintSystem {
    let mut rows = Vec::with_capacity(4 * d.checks3.len());
    for t in &d.checks3 {
        let mut support = *t;
        support.sort_unstable();
        rows.extend(feldman_rows_for_check(&support).expect("triples are non-empty"));
    }
    for (_, support) in &d.passthrough {
        rows.extend(feldman_rows_for_check(support).expect("checks are non-empty"));
    }
    if cover_boxes {
        rows.extend(d.uncovered().into_iter().flat_map(box_rows));
    }
    ConstraintSystem {
        num_vars: d.extended_num_vars,
        rows,
        var_names: d.var_names(),
        box_rows_included: cover_boxes,
    }
}

/// Closed-form sizes of both formulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintCounts {
    pub feldman_parity_rows: u64,
    pub feldman_box_rows: u64,
    pub decomposed_rows: u64,
    pub aux_vars: u64,
    pub degree3_checks: u64,
}

impl ConstraintCounts {
    pub fn feldman_total(&self) -> u64 {
        self.feldman_parity_rows + self.feldman_box_rows
    }
}

/// Counts `Σ 2^(d−1)`, `2n`, `4Σ(d−2)`, `Σ(d−3)` and `Σ(d−2)`. Every check
/// degree must be at least 3.
pub fn count_constraints(
    profile: &DegreeProfile,
    n: usize,
) -> Result<ConstraintCounts, RelaxationError> {
    let mut counts = ConstraintCounts {
        feldman_parity_rows: 0,
        feldman_box_rows: 2 * n as u64,
        decomposed_rows: 0,
        aux_vars: 0,
        degree3_checks: 0,
    };
    for (j, &d) in profile.check_degrees.iter().enumerate() {
        if d < 3 {
            return Err(RelaxationError::DegreeBelowThree { check: j, degree: d });
        }
        if d > 64 {
            return Err(RelaxationError::DegreeTooLarge { check: j, degree: d, max: 64 });
        }
        let d = d as u64;
        counts.feldman_parity_rows += 1u64 << (d - 1);
        counts.decomposed_rows += 4 * (d - 2);
        counts.aux_vars += d - 3;
        counts.degree3_checks += d - 2;
    }
    Ok(counts)
}

/// `Σ_{i=0}^{⌊(d+1)/2⌋−1} C(d, 2i+1)`, the number of odd subsets of a
/// `d`-element set counted term by term.
pub fn odd_subset_count_by_binomials(d: u32) -> u128 {
    let binom = |k: u32| -> u128 {
        (0..k).fold(1u128, |acc, i| acc * (d - i) as u128 / (i + 1) as u128)
    };
    (0..d.div_ceil(2)).map(|i| binom(2 * i + 1)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::builtin_code;

    fn dense_rows(rows: &[Row], vars: usize) -> Vec<(Vec<i32>, i64)> {
        rows.iter()
            .map(|r| {
                let mut d = vec![0; vars];
                for &(v, c) in &r.coeffs {
                    d[v] = c;
                }
                (d, r.rhs)
            })
            .collect()
    }

    #[test]
    fn odd_subset_order() {
        assert_eq!(
            odd_subsets(&[1, 2, 3]).unwrap(),
            vec![vec![1], vec![2], vec![3], vec![1, 2, 3]]
        );
        assert_eq!(odd_subsets(&[5]).unwrap(), vec![vec![5]]);
        assert_eq!(odd_subsets(&[]), Err(RelaxationError::EmptySupport));
    }

    #[test]
    fn odd_subsets_of_four_match_filtered_powerset() {
        let support = [1, 2, 3, 4];
        // every subset as a bitmask, keep odd ones, order by size then lex
        let mut expected: Vec<Vec<usize>> = (1u32..16)
            .filter(|m| m.count_ones() % 2 == 1)
            .map(|m| (0..4).filter(|b| m >> b & 1 == 1).map(|b| support[b]).collect())
            .collect();
        expected.sort_by(|a: &Vec<usize>, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        assert_eq!(odd_subsets(&support).unwrap(), expected);
        assert_eq!(expected.len(), 8);
    }

    #[test]
    fn degree_three_rows() {
        let rows = feldman_rows_for_check(&[0, 1, 2]).unwrap();
        assert_eq!(
            dense_rows(&rows, 3),
            vec![
                (vec![1, -1, -1], 0),
                (vec![-1, 1, -1], 0),
                (vec![-1, -1, 1], 0),
                (vec![1, 1, 1], 2),
            ]
        );
    }

    #[test]
    fn degree_one_and_two_rows() {
        let rows = feldman_rows_for_check(&[0]).unwrap();
        assert_eq!(dense_rows(&rows, 1), vec![(vec![1], 0)]);

        let sys = ConstraintSystem {
            num_vars: 2,
            rows: feldman_rows_for_check(&[0, 1]).unwrap(),
            var_names: original_names(2),
            box_rows_included: false,
        };
        assert_eq!(dense_rows(&sys.rows, 2), vec![(vec![1, -1], 0), (vec![-1, 1], 0)]);
        for x in [[0u8, 0], [1, 1]] {
            assert!(sys.admits_binary(&x));
        }
        for x in [[0u8, 1], [1, 0]] {
            assert!(!sys.admits_binary(&x));
        }
    }

    #[test]
    fn example_system_is_golden() {
        let sys = feldman_system(&builtin_code("paper-example").unwrap(), false).unwrap();
        let (a, b) = sys.to_dense();
        assert_eq!(
            a,
            vec![
                vec![1, -1, -1, 0],
                vec![-1, 1, -1, 0],
                vec![-1, -1, 1, 0],
                vec![1, 1, 1, 0],
                vec![0, 1, -1, -1],
                vec![0, -1, 1, -1],
                vec![0, -1, -1, 1],
                vec![0, 1, 1, 1],
            ]
        );
        assert_eq!(b, vec![0, 0, 0, 2, 0, 0, 0, 2]);
    }

    #[test]
    fn single_entry_system() {
        let h = ParityCheckMatrix::from_dense(&[[1]]).unwrap();
        let sys = feldman_system(&h, false).unwrap();
        assert_eq!(sys.to_dense(), (vec![vec![1]], vec![0]));
        let boxed = feldman_system(&h, true).unwrap();
        assert_eq!(boxed.num_rows(), 3);
        assert!(boxed.box_rows_included);
    }

    #[test]
    fn text_and_json_forms() {
        let sys = feldman_system(&builtin_code("paper-example").unwrap(), false).unwrap();
        let text = sys.to_text();
        assert_eq!(text.lines().next(), Some("+1*f_1 -1*f_2 -1*f_3 <= 0"));
        assert_eq!(text.lines().nth(7), Some("+1*f_2 +1*f_3 +1*f_4 <= 2"));
        let back: ConstraintSystem = serde_json::from_str(&sys.to_json()).unwrap();
        assert_eq!(back, sys);
        assert!(sys.to_json().contains("\"coeffs\""));
    }

    #[test]
    fn decompose_degree_four() {
        let h = ParityCheckMatrix::from_supports(5, vec![vec![1, 2, 3, 4]]).unwrap();
        let d = decompose(&h, DecomposeMode::Strict).unwrap();
        assert_eq!(d.checks3, vec![[1, 2, 5], [5, 3, 4]]);
        assert_eq!(d.aux_count(), 1);
        assert_eq!(d.aux[0].prefix, vec![1, 2]);
        assert_eq!(d.var_names()[5], "z_1_1");
    }

    #[test]
    fn degree_four_projection_truth_table() {
        let h = ParityCheckMatrix::from_supports(4, vec![vec![0, 1, 2, 3]]).unwrap();
        let d = decompose(&h, DecomposeMode::Strict).unwrap();
        let parity_ok = |x: &[u8], t: &[usize; 3]| (x[t[0]] ^ x[t[1]] ^ x[t[2]]) == 0;
        for bits in 0u8..16 {
            let x: Vec<u8> = (0..4).map(|i| (bits >> i) & 1).collect();
            let even = x.iter().fold(0, |a, b| a ^ b) == 0;
            let extensions: Vec<u8> = (0..2u8)
                .filter(|&z| {
                    let mut ext = x.clone();
                    ext.push(z);
                    d.checks3.iter().all(|t| parity_ok(&ext, t))
                })
                .collect();
            assert_eq!(!extensions.is_empty(), even, "x = {x:?}");
            if even {
                assert_eq!(extensions.len(), 1);
                assert_eq!(d.extend(&x)[4], extensions[0]);
            }
        }
    }

    #[test]
    fn decompose_degree_three_is_identity() {
        let h = ParityCheckMatrix::from_supports(4, vec![vec![1, 2, 3]]).unwrap();
        let d = decompose(&h, DecomposeMode::Strict).unwrap();
        assert_eq!(d.checks3, vec![[1, 2, 3]]);
        assert_eq!(d.aux_count(), 0);
    }

    #[test]
    fn decompose_degree_six() {
        let h = ParityCheckMatrix::from_supports(6, vec![(0..6).collect()]).unwrap();
        let d = decompose(&h, DecomposeMode::Strict).unwrap();
        assert_eq!(d.checks3, vec![[0, 1, 6], [6, 2, 7], [7, 3, 8], [8, 4, 5]]);
        assert_eq!(d.aux_count(), 3);
        assert_eq!(d.provenance, vec![0; 4]);
        assert_eq!(d.aux[2].prefix, vec![0, 1, 2, 3]);
    }

    #[test]
    fn strict_and_lenient_low_degree() {
        let h = ParityCheckMatrix::from_supports(4, vec![vec![0, 1, 2], vec![2, 3]]).unwrap();
        assert_eq!(
            decompose(&h, DecomposeMode::Strict),
            Err(RelaxationError::DegreeBelowThree { check: 1, degree: 2 })
        );
        let d = decompose(&h, DecomposeMode::Lenient).unwrap();
        assert_eq!(d.passthrough, vec![(1, vec![2, 3])]);
        let sys = decomposed_system(&d, true);
        // 4 triple rows, equality pair, boxes for the uncovered f_4
        assert_eq!(sys.num_rows(), 4 + 2 + 2);
        assert_eq!(d.uncovered(), vec![3]);
    }

    #[test]
    fn decomposed_system_sizes() {
        let example = builtin_code("paper-example").unwrap();
        let d = decompose(&example, DecomposeMode::Strict).unwrap();
        let sys = decomposed_system(&d, true);
        assert_eq!((sys.num_rows(), sys.num_vars, d.aux_count()), (8, 4, 0));

        let h = ParityCheckMatrix::from_supports(5, vec![(0..5).collect()]).unwrap();
        let d = decompose(&h, DecomposeMode::Strict).unwrap();
        let sys = decomposed_system(&d, true);
        assert_eq!((sys.num_rows(), d.aux_count()), (12, 2));

        let iso = ParityCheckMatrix::from_supports(4, vec![vec![0, 1, 2]]).unwrap();
        let d = decompose(&iso, DecomposeMode::Strict).unwrap();
        let sys = decomposed_system(&d, true);
        assert_eq!(sys.num_rows(), 4 + 2);
        assert_eq!(sys.rows[4].coeffs, vec![(3, -1)]);
        assert_eq!(sys.rows[5].coeffs, vec![(3, 1)]);
        assert_eq!(decomposed_system(&d, false).num_rows(), 4);
    }

    #[test]
    fn count_examples() {
        let example = builtin_code("paper-example").unwrap();
        let c = count_constraints(&example.degree_profile(), example.n()).unwrap();
        assert_eq!(
            c,
            ConstraintCounts {
                feldman_parity_rows: 8,
                feldman_box_rows: 8,
                decomposed_rows: 8,
                aux_vars: 0,
                degree3_checks: 2,
            }
        );

        let single = ParityCheckMatrix::from_supports(3, vec![vec![0, 1, 2]]).unwrap();
        let c = count_constraints(&single.degree_profile(), 3).unwrap();
        assert_eq!((c.feldman_parity_rows, c.feldman_box_rows, c.decomposed_rows), (4, 6, 4));

        let ldpc = builtin_code("ldpc-3-6-n48").unwrap();
        let c = count_constraints(&ldpc.degree_profile(), ldpc.n()).unwrap();
        assert_eq!((c.feldman_parity_rows, c.decomposed_rows, c.aux_vars), (768, 384, 72));
        assert_eq!(feldman_system(&ldpc, false).unwrap().num_rows(), 768);
        let d = decompose(&ldpc, DecomposeMode::Strict).unwrap();
        assert_eq!(decomposed_system(&d, false).num_rows(), 384);
        assert_eq!(d.aux_count(), 72);
    }

    #[test]
    fn count_rejects_low_degree() {
        let h = builtin_code("hamming-7-4").unwrap();
        let mut p = h.degree_profile();
        p.check_degrees[1] = 2;
        assert_eq!(
            count_constraints(&p, 7),
            Err(RelaxationError::DegreeBelowThree { check: 1, degree: 2 })
        );
    }

    #[test]
    fn binomial_sum_small_cases() {
        assert_eq!(odd_subset_count_by_binomials(1), 1);
        assert_eq!(odd_subset_count_by_binomials(3), 4);
        assert_eq!(odd_subset_count_by_binomials(4), 8);
        assert_eq!(odd_subset_count_by_binomials(6), 32);
    }
}
