//! Reports and Monte Carlo simulation behind the command-line front end.
//!
//! Every simulated frame is the all-zero codeword. Both channel models are
//! output-symmetric and both relaxations are codeword-symmetric, so error
//! rates do not depend on the transmitted codeword.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::channel::{trial_rng, ChannelModel, CostVector};
use crate::codes::ParityCheckMatrix;
use crate::decoder::{DecodeError, DecodeOutcome, Formulation, LpDecoder, INTEGRALITY_TOL};
use crate::exec::Execution;
use crate::relaxation::{
    count_constraints, decompose, decomposed_system, feldman_system, ConstraintCounts,
    DecomposeMode, RelaxationError,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Relaxation(#[from] RelaxationError),
    #[error("generated row counts {measured:?} disagree with closed forms {expected:?}")]
    CountMismatch { expected: ConstraintCounts, measured: ConstraintCounts },
    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
}

impl SimError {
    pub fn is_iteration_limit(&self) -> bool {
        matches!(
            self,
            SimError::Decode(DecodeError::Solver(crate::lpsolver::SolverError::IterationLimit(_)))
        )
    }
}

/// Row and variable counts read off generated systems.
fn measured_counts(
    h: &ParityCheckMatrix,
    mode: DecomposeMode,
) -> Result<ConstraintCounts, SimError> {
    let parity = feldman_system(h, false)?.num_rows() as u64;
    let boxed = feldman_system(h, true)?.num_rows() as u64;
    let d = decompose(h, mode)?;
    Ok(ConstraintCounts {
        feldman_parity_rows: parity,
        feldman_box_rows: boxed - parity,
        decomposed_rows: decomposed_system(&d, false).num_rows() as u64,
        aux_vars: d.aux_count() as u64,
        degree3_checks: d.checks3.len() as u64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountsReport {
    pub schema: u32,
    pub code: String,
    pub n: usize,
    pub m: usize,
    pub counts: ConstraintCounts,
    pub measured: ConstraintCounts,
}

/// Closed-form counts checked against generated systems. Needs every check
/// degree to be at least 3.
pub fn counts_report(name: &str, h: &ParityCheckMatrix) -> Result<CountsReport, SimError> {
    let counts = count_constraints(&h.degree_profile(), h.n())?;
    let measured = measured_counts(h, DecomposeMode::Strict)?;
    if counts != measured {
        return Err(SimError::CountMismatch { expected: counts, measured });
    }
    Ok(CountsReport { schema: SCHEMA_VERSION, code: name.to_string(), n: h.n(), m: h.m(), counts, measured })
}

impl CountsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_csv(&self) -> String {
        let c = &self.counts;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "code", "n", "m", "feldman_parity_rows", "feldman_box_rows", "feldman_total",
            "decomposed_rows", "aux_vars", "degree3_checks",
        ])
        .unwrap();
        w.write_record([
            self.code.clone(),
            self.n.to_string(),
            self.m.to_string(),
            c.feldman_parity_rows.to_string(),
            c.feldman_box_rows.to_string(),
            c.feldman_total().to_string(),
            c.decomposed_rows.to_string(),
            c.aux_vars.to_string(),
            c.degree3_checks.to_string(),
        ])
        .unwrap();
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormulationStats {
    pub formulation: Formulation,
    pub lp_rows: usize,
    pub lp_vars: usize,
    pub mean_iterations: f64,
    pub mean_wall_clock_ns: f64,
    pub integral_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub schema: u32,
    pub code: String,
    pub n: usize,
    pub m: usize,
    pub num_gammas: usize,
    pub seed: u64,
    /// Closed-form counts; absent when some check has degree below 3.
    pub counts: Option<ConstraintCounts>,
    pub measured: ConstraintCounts,
    pub feldman: FormulationStats,
    pub decomposed: FormulationStats,
    pub max_objective_gap: f64,
    /// Cost vectors where both optima are integral but the codewords differ.
    pub codeword_disagreements: usize,
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "code", "formulation", "lp_rows", "lp_vars", "mean_iterations", "mean_wall_clock_ns",
            "integral_fraction", "max_objective_gap",
        ])
        .unwrap();
        for s in [&self.feldman, &self.decomposed] {
            w.write_record([
                self.code.clone(),
                s.formulation.to_string(),
                s.lp_rows.to_string(),
                s.lp_vars.to_string(),
                s.mean_iterations.to_string(),
                s.mean_wall_clock_ns.to_string(),
                s.integral_fraction.to_string(),
                self.max_objective_gap.to_string(),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CompareOptions {
    pub num_gammas: usize,
    pub seed: u64,
    /// Draw costs from [0.1, 5] instead of [−5, 5].
    pub positive_only: bool,
    pub execution: Execution,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self { num_gammas: 100, seed: 0, positive_only: false, execution: Execution::default() }
    }
}

/// Cost vector `k` of a comparison run: uniform in [−5, 5] per bit.
pub fn sample_gamma(n: usize, seed: u64, k: u64, positive_only: bool) -> CostVector {
    let mut rng = trial_rng(seed, k);
    let lo = if positive_only { 0.1 } else { -5.0 };
    let g = (0..n).map(|_| rng.random_range(lo..=5.0)).collect();
    CostVector::new(g).expect("sampled costs are finite")
}

/// Solves both formulations for `num_gammas` sampled cost vectors.
pub fn compare(
    name: &str,
    h: &ParityCheckMatrix,
    opts: &CompareOptions,
) -> Result<ComparisonReport, SimError> {
    if opts.num_gammas == 0 {
        return Err(SimError::ZeroCount("num_gammas"));
    }
    let counts = count_constraints(&h.degree_profile(), h.n()).ok();
    let mode = if counts.is_some() { DecomposeMode::Strict } else { DecomposeMode::Lenient };
    let measured = measured_counts(h, mode)?;
    if let Some(expected) = counts.filter(|c| *c != measured) {
        return Err(SimError::CountMismatch { expected, measured });
    }

    let feldman = LpDecoder::new(h, Formulation::Feldman)?;
    let decomposed = LpDecoder::new(h, Formulation::Decomposed)?;
    let pairs = opts.execution.try_map(opts.num_gammas, |k| {
        let gamma = sample_gamma(h.n(), opts.seed, k as u64, opts.positive_only);
        Ok::<_, DecodeError>((feldman.decode(&gamma)?, decomposed.decode(&gamma)?))
    })?;

    let mut max_gap = 0.0f64;
    let mut disagreements = 0;
    for (a, b) in &pairs {
        max_gap = max_gap.max((a.objective - b.objective).abs());
        if let (Some(ca), Some(cb)) = (&a.codeword, &b.codeword) {
            disagreements += (ca != cb) as usize;
        }
    }
    let stats = |dec: &LpDecoder, pick: fn(&(DecodeOutcome, DecodeOutcome)) -> &DecodeOutcome| {
        let k = pairs.len() as f64;
        FormulationStats {
            formulation: dec.formulation(),
            lp_rows: dec.system().num_rows(),
            lp_vars: dec.system().num_vars,
            mean_iterations: pairs.iter().map(|p| pick(p).iterations as f64).sum::<f64>() / k,
            mean_wall_clock_ns: pairs.iter().map(|p| pick(p).wall_clock_ns as f64).sum::<f64>() / k,
            integral_fraction: pairs.iter().filter(|p| pick(p).integral).count() as f64 / k,
        }
    };
    Ok(ComparisonReport {
        schema: SCHEMA_VERSION,
        code: name.to_string(),
        n: h.n(),
        m: h.m(),
        num_gammas: opts.num_gammas,
        seed: opts.seed,
        counts,
        measured,
        feldman: stats(&feldman, |p| &p.0),
        decomposed: stats(&decomposed, |p| &p.1),
        max_objective_gap: max_gap,
        codeword_disagreements: disagreements,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulationChoice {
    Feldman,
    Decomposed,
    Both,
}

impl FormulationChoice {
    pub fn formulations(self) -> &'static [Formulation] {
        match self {
            FormulationChoice::Feldman => &[Formulation::Feldman],
            FormulationChoice::Decomposed => &[Formulation::Decomposed],
            FormulationChoice::Both => &Formulation::ALL,
        }
    }
}

impl std::str::FromStr for FormulationChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "both" => Ok(FormulationChoice::Both),
            other => match other.parse::<Formulation>()? {
                Formulation::Feldman => Ok(FormulationChoice::Feldman),
                Formulation::Decomposed => Ok(FormulationChoice::Decomposed),
            },
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub channel: ChannelModel,
    pub trials: usize,
    pub seed: u64,
    pub formulations: FormulationChoice,
    pub execution: Execution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub channel: String,
    pub sent: &'static str,
    pub formulation: Formulation,
    pub integral: bool,
    pub certified: bool,
    /// Positions whose LP value is not within tolerance of the sent bit.
    pub bit_errors: usize,
    /// Not integral, or integral but not the sent codeword.
    pub frame_error: bool,
    pub iterations: usize,
    pub wall_clock_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub formulation: Formulation,
    pub trials: usize,
    pub frame_errors: usize,
    pub fer: f64,
    /// Wilson score interval for the FER.
    pub fer_ci95: [f64; 2],
    pub bit_errors: usize,
    pub ber: f64,
    pub certified_fraction: f64,
    pub mean_iterations: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub schema: u32,
    pub code: String,
    pub n: usize,
    pub channel: String,
    pub trials: usize,
    pub seed: u64,
    pub summaries: Vec<SimSummary>,
    /// With two formulations: trials whose outcomes differ in integrality or
    /// codeword.
    pub outcome_disagreements: Option<usize>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

pub fn wilson_interval(successes: usize, trials: usize) -> [f64; 2] {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    [(center - half).max(0.0), (center + half).min(1.0)]
}

fn trial_record(
    trial: u64,
    cfg: &SimConfig,
    out: &DecodeOutcome,
) -> TrialRecord {
    let bit_errors = out.point.iter().filter(|&&v| v.abs() > INTEGRALITY_TOL).count();
    let sent_recovered = out.codeword.as_deref().is_some_and(|c| c.iter().all(|&b| b == 0));
    TrialRecord {
        trial,
        seed: cfg.seed,
        channel: cfg.channel.to_string(),
        sent: "all-zero",
        formulation: out.formulation,
        integral: out.integral,
        certified: out.ml_certified,
        bit_errors,
        frame_error: !sent_recovered,
        iterations: out.iterations,
        wall_clock_ns: out.wall_clock_ns,
    }
}

/// Runs `cfg.trials` independent frames. Trial `t` draws its channel noise
/// from stream `t` of `cfg.seed`; every selected formulation decodes the same
/// received word. Records are ordered by trial, then formulation.
pub fn simulate(
    name: &str,
    h: &ParityCheckMatrix,
    cfg: &SimConfig,
) -> Result<SimulationReport, SimError> {
    if cfg.trials == 0 {
        return Err(SimError::ZeroCount("trials"));
    }
    let decoders = cfg
        .formulations
        .formulations()
        .iter()
        .map(|&f| LpDecoder::new(h, f))
        .collect::<Result<Vec<_>, _>>()?;
    let sent = vec![0u8; h.n()];

    let per_trial = cfg.execution.try_map(cfg.trials, |t| {
        let received = cfg.channel.transmit(&sent, &mut trial_rng(cfg.seed, t as u64));
        let gamma = cfg.channel.llr_costs(&received);
        decoders.iter().map(|d| d.decode(&gamma)).collect::<Result<Vec<_>, _>>()
    })?;

    let outcome_disagreements = (decoders.len() == 2).then(|| {
        per_trial
            .iter()
            .filter(|o| o[0].integral != o[1].integral || o[0].codeword != o[1].codeword)
            .count()
    });
    let records: Vec<TrialRecord> = per_trial
        .iter()
        .enumerate()
        .flat_map(|(t, outs)| outs.iter().map(move |o| (t, o)))
        .map(|(t, o)| trial_record(t as u64, cfg, o))
        .collect();

    let summaries = decoders
        .iter()
        .map(|d| {
            let rs: Vec<&TrialRecord> =
                records.iter().filter(|r| r.formulation == d.formulation()).collect();
            let trials = rs.len();
            let frame_errors = rs.iter().filter(|r| r.frame_error).count();
            let bit_errors = rs.iter().map(|r| r.bit_errors).sum();
            SimSummary {
                formulation: d.formulation(),
                trials,
                frame_errors,
                fer: frame_errors as f64 / trials as f64,
                fer_ci95: wilson_interval(frame_errors, trials),
                bit_errors,
                ber: bit_errors as f64 / (trials * h.n()) as f64,
                certified_fraction: rs.iter().filter(|r| r.certified).count() as f64 / trials as f64,
                mean_iterations: rs.iter().map(|r| r.iterations as f64).sum::<f64>() / trials as f64,
            }
        })
        .collect();

    Ok(SimulationReport {
        schema: SCHEMA_VERSION,
        code: name.to_string(),
        n: h.n(),
        channel: cfg.channel.to_string(),
        trials: cfg.trials,
        seed: cfg.seed,
        summaries,
        outcome_disagreements,
        records,
    })
}

impl SimulationReport {
    /// Summary JSON; `with_records` embeds the per-trial records.
    pub fn to_json(&self, with_records: bool) -> String {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        if with_records {
            v["records"] = serde_json::to_value(&self.records).expect("records serialize");
        }
        serde_json::to_string_pretty(&v).expect("reports serialize")
    }

    /// Per-trial CSV. Timing is machine-dependent, so the `wall_clock_ns`
    /// column appears only when `with_timing` is set; without it the output is
    /// a pure function of the inputs.
    pub fn records_csv(&self, with_timing: bool) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![
            "trial", "seed", "channel", "sent", "formulation", "integral", "certified",
            "bit_errors", "frame_error", "iterations",
        ];
        if with_timing {
            header.push("wall_clock_ns");
        }
        w.write_record(&header).unwrap();
        for r in &self.records {
            let mut row = vec![
                r.trial.to_string(),
                r.seed.to_string(),
                r.channel.clone(),
                r.sent.to_string(),
                r.formulation.to_string(),
                r.integral.to_string(),
                r.certified.to_string(),
                r.bit_errors.to_string(),
                r.frame_error.to_string(),
                r.iterations.to_string(),
            ];
            if with_timing {
                row.push(r.wall_clock_ns.to_string());
            }
            w.write_record(&row).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}
