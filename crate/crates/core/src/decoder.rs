//! LP decoding: minimise `Γ·f` over the relaxed polytope of a code, under
//! either formulation, plus an exhaustive maximum-likelihood oracle.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::channel::{trial_rng, CostVector};
use crate::codes::ParityCheckMatrix;
use crate::gf2;
use crate::lpsolver::{is_integral, Bounds, LpStatus, SolverError, StandardForm};
use crate::relaxation::{
    decompose, decomposed_system, feldman_system, ConstraintSystem, DecomposeMode,
    DecompositionResult, RelaxationError,
};

/// Coordinates within this distance of 0 or 1 count as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// Largest block length [`brute_force_ml`] will enumerate.
pub const ML_ENUMERATION_LIMIT: usize = 28;
/// Default number of random cost vectors tried by [`fractional_witness`].
pub const WITNESS_DRAWS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error(transparent)]
    Relaxation(#[from] RelaxationError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("cost vector has length {found}, code has n = {expected}")]
    GammaLength { expected: usize, found: usize },
    #[error("internal error: solver reported {0:?} on a relaxation containing the zero word")]
    Internal(LpStatus),
    #[error("exhaustive search needs n <= {limit}, got {n}")]
    TooLarge { n: usize, limit: usize },
    #[error("no fractional optimum found in {0} draws")]
    SearchExhausted(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    Feldman,
    Decomposed,
}

impl Formulation {
    pub const ALL: [Formulation; 2] = [Formulation::Feldman, Formulation::Decomposed];

    pub fn as_str(self) -> &'static str {
        match self {
            Formulation::Feldman => "feldman",
            Formulation::Decomposed => "decomposed",
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Formulation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "feldman" => Ok(Formulation::Feldman),
            "decomposed" => Ok(Formulation::Decomposed),
            other => Err(format!("unknown formulation {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodeOutcome {
    pub formulation: Formulation,
    /// LP optimum restricted to the original variables.
    pub point: Vec<f64>,
    pub objective: f64,
    pub integral: bool,
    pub codeword: Option<Vec<u8>>,
    pub ml_certified: bool,
    pub iterations: usize,
    pub wall_clock_ns: u64,
    /// Auxiliary coordinates of the decomposed optimum (empty for Feldman).
    #[serde(skip)]
    pub auxiliary: Vec<f64>,
}

impl DecodeOutcome {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("outcomes serialize")
    }
}

/// A code's relaxation prepared once and solved for many cost vectors.
#[derive(Debug, Clone)]
pub struct LpDecoder {
    code: ParityCheckMatrix,
    formulation: Formulation,
    system: ConstraintSystem,
    decomposition: Option<DecompositionResult>,
    form: StandardForm,
}

impl LpDecoder {
    /// Both formulations get `[0, 1]` solver bounds on every LP variable.
    /// Degree-1 and degree-2 checks are kept undecomposed.
    pub fn new(code: &ParityCheckMatrix, formulation: Formulation) -> Result<Self, DecodeError> {
        let (system, decomposition) = match formulation {
            Formulation::Feldman => (feldman_system(code, false)?, None),
            Formulation::Decomposed => {
                let d = decompose(code, DecomposeMode::Lenient)?;
                (decomposed_system(&d, false), Some(d))
            }
        };
        let bounds = vec![Bounds::UNIT; system.num_vars];
        let form = StandardForm::new(&system, &bounds)?;
        Ok(Self { code: code.clone(), formulation, system, decomposition, form })
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn code(&self) -> &ParityCheckMatrix {
        &self.code
    }

    pub fn system(&self) -> &ConstraintSystem {
        &self.system
    }

    pub fn decomposition(&self) -> Option<&DecompositionResult> {
        self.decomposition.as_ref()
    }

    pub fn decode(&self, gamma: &CostVector) -> Result<DecodeOutcome, DecodeError> {
        let n = self.code.n();
        if gamma.len() != n {
            return Err(DecodeError::GammaLength { expected: n, found: gamma.len() });
        }
        let mut objective = gamma.as_slice().to_vec();
        objective.resize(self.system.num_vars, 0.0);

        let start = Instant::now();
        let sol = self.form.solve(&objective)?;
        let wall_clock_ns = start.elapsed().as_nanos() as u64;
        if sol.status != LpStatus::Optimal {
            return Err(DecodeError::Internal(sol.status));
        }

        let mut point = sol.point;
        let auxiliary = point.split_off(n);
        let codeword = is_integral(&point, INTEGRALITY_TOL);
        let ml_certified = codeword.as_deref().is_some_and(|c| self.code.is_codeword(c));
        Ok(DecodeOutcome {
            formulation: self.formulation,
            objective: gamma.dot(&point),
            integral: codeword.is_some(),
            point,
            codeword,
            ml_certified,
            iterations: sol.iterations,
            wall_clock_ns,
            auxiliary,
        })
    }
}

pub fn decode(
    code: &ParityCheckMatrix,
    gamma: &CostVector,
    formulation: Formulation,
) -> Result<DecodeOutcome, DecodeError> {
    LpDecoder::new(code, formulation)?.decode(gamma)
}

/// Minimum-cost codeword by enumeration of the nullspace of `code`; ties go
/// to the lexicographically smallest codeword.
pub fn brute_force_ml(
    code: &ParityCheckMatrix,
    gamma: &CostVector,
) -> Result<(Vec<u8>, f64), DecodeError> {
    let n = code.n();
    if n > ML_ENUMERATION_LIMIT {
        return Err(DecodeError::TooLarge { n, limit: ML_ENUMERATION_LIMIT });
    }
    if gamma.len() != n {
        return Err(DecodeError::GammaLength { expected: n, found: gamma.len() });
    }
    let g = gamma.as_slice();
    let mut best: Option<(Vec<u8>, f64)> = None;
    gf2::for_each_codeword(code, |w| {
        let cost: f64 = (0..n).filter(|&i| w.get(i)).map(|i| g[i]).sum();
        let better = match &best {
            None => true,
            Some((bw, bc)) => cost < *bc || (cost == *bc && w.to_bytes() < *bw),
        };
        if better {
            best = Some((w.to_bytes(), cost));
        }
    });
    Ok(best.expect("the zero word is always a codeword"))
}

/// A cost vector whose LP optimum is fractional.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub gamma: CostVector,
    pub point: Vec<f64>,
    pub draw: usize,
}

/// Searches random `Γ ∈ {±1}^n` (draw `k` uses stream `k` of `seed`) for one
/// whose odd-subset LP optimum is not integral. Gives
/// `SearchExhausted(draws)` when every draw decodes to a codeword.
pub fn fractional_witness(
    code: &ParityCheckMatrix,
    draws: usize,
    seed: u64,
) -> Result<Witness, DecodeError> {
    let decoder = LpDecoder::new(code, Formulation::Feldman)?;
    for draw in 0..draws {
        let mut rng = trial_rng(seed, draw as u64);
        let gamma: Vec<f64> =
            (0..code.n()).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let gamma = CostVector::new(gamma).expect("unit costs are finite");
        let out = decoder.decode(&gamma)?;
        if !out.integral {
            return Ok(Witness { gamma, point: out.point, draw });
        }
    }
    Err(DecodeError::SearchExhausted(draws))
}

/// Tries every sign pattern `Γ ∈ {±1}^n` in binary counting order (bit `i` of
/// the pattern set means `γ_i = −1`).
pub fn fractional_witness_exhaustive(code: &ParityCheckMatrix) -> Result<Witness, DecodeError> {
    let n = code.n();
    if n > 16 {
        return Err(DecodeError::TooLarge { n, limit: 16 });
    }
    let decoder = LpDecoder::new(code, Formulation::Feldman)?;
    for pattern in 0..1usize << n {
        let gamma: Vec<f64> =
            (0..n).map(|i| if pattern >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
        let gamma = CostVector::new(gamma).expect("unit costs are finite");
        let out = decoder.decode(&gamma)?;
        if !out.integral {
            return Ok(Witness { gamma, point: out.point, draw: pattern });
        }
    }
    Err(DecodeError::SearchExhausted(1 << n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::builtin_code;
    use crate::gf2::codewords;

    fn costs(v: &[f64]) -> CostVector {
        CostVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn positive_costs_give_zero_word() {
        let h = builtin_code("paper-example").unwrap();
        for f in Formulation::ALL {
            let out = decode(&h, &costs(&[1.0; 4]), f).unwrap();
            assert_eq!(out.codeword, Some(vec![0; 4]));
            assert_eq!(out.objective, 0.0);
            assert!(out.integral && out.ml_certified);
        }
    }

    #[test]
    fn negative_costs_pick_heaviest_codeword() {
        let h = builtin_code("paper-example").unwrap();
        let gamma = costs(&[-1.0; 4]);
        // oracle: enumerate the four codewords directly
        let best = codewords(&h)
            .into_iter()
            .map(|c| (c.iter().map(|&b| -(b as f64)).sum::<f64>(), c))
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)))
            .unwrap();
        assert_eq!(best, (-3.0, vec![1, 0, 1, 1]));
        let (word, cost) = brute_force_ml(&h, &gamma).unwrap();
        assert_eq!((cost, word.clone()), best);
        for f in Formulation::ALL {
            let out = decode(&h, &gamma, f).unwrap();
            assert!((out.objective - best.0).abs() < 1e-9);
        }
    }

    #[test]
    fn brute_force_prefers_negative_position() {
        let h = builtin_code("hamming-7-4").unwrap();
        for pos in 0..7 {
            let mut g = vec![1.0; 7];
            g[pos] = -100.0;
            let (word, _) = brute_force_ml(&h, &costs(&g)).unwrap();
            assert_eq!(word[pos], 1);
        }
    }

    #[test]
    fn brute_force_guards() {
        let h = builtin_code("ldpc-3-6-n48").unwrap();
        assert_eq!(
            brute_force_ml(&h, &costs(&[1.0; 48])),
            Err(DecodeError::TooLarge { n: 48, limit: ML_ENUMERATION_LIMIT })
        );
        let h = builtin_code("paper-example").unwrap();
        assert!(matches!(decode(&h, &costs(&[1.0; 3]), Formulation::Feldman),
            Err(DecodeError::GammaLength { expected: 4, found: 3 })));
    }

    #[test]
    fn tree_code_has_no_witness() {
        // single check: Tanner graph is a tree
        let h = ParityCheckMatrix::from_supports(4, vec![vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(fractional_witness(&h, 200, 1), Err(DecodeError::SearchExhausted(200)));
    }

    #[test]
    fn outcome_json_fields() {
        let h = builtin_code("paper-example").unwrap();
        let out = decode(&h, &costs(&[1.0; 4]), Formulation::Decomposed).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.to_json()).unwrap();
        for key in ["formulation", "point", "objective", "integral", "codeword", "ml_certified",
            "iterations", "wall_clock_ns"]
        {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["formulation"], "decomposed");
    }
}
