use lpdecode::channel::{trial_rng, ChannelModel};
use lpdecode::decoder::{brute_force_ml, Formulation, LpDecoder};
use lpdecode::codes::builtin_code;
use lpdecode::exec::Execution;
use lpdecode::sim::*;

fn run(code: &str, p: f64, trials: usize, f: FormulationChoice, execution: Execution) -> SimulationReport {
    let h = builtin_code(code).unwrap();
    let cfg = SimConfig { channel: ChannelModel::bsc(p).unwrap(), trials, seed: 7, formulations: f, execution };
    simulate(code, &h, &cfg).unwrap()
}

#[test]
fn paired_seeds_give_monotone_error_counts() {
    let lo = run("paper-example", 0.01, 1000, FormulationChoice::Feldman, Execution::default());
    let hi = run("paper-example", 0.05, 1000, FormulationChoice::Feldman, Execution::default());
    assert!(lo.summaries[0].frame_errors <= hi.summaries[0].frame_errors);
    assert!(hi.summaries[0].frame_errors > 0);
}

#[test]
fn both_formulations_differ_only_at_tied_optima() {
    let r = run("hamming-7-4", 0.05, 300, FormulationChoice::Both, Execution::default());
    assert_eq!(r.summaries.len(), 2);
    let h = builtin_code("hamming-7-4").unwrap();
    let ch = ChannelModel::bsc(0.05).unwrap();
    let decoders = Formulation::ALL.map(|f| LpDecoder::new(&h, f).unwrap());
    let mut disagreements = 0;
    for pair in r.records.chunks(2) {
        assert_eq!(pair[0].trial, pair[1].trial);
        let y = ch.transmit(&[0; 7], &mut trial_rng(7, pair[0].trial));
        let g = ch.llr_costs(&y);
        let [a, b] = decoders.each_ref().map(|d| d.decode(&g).unwrap());
        assert!((a.objective - b.objective).abs() <= 1e-9);
        if (a.integral, &a.codeword) != (b.integral, &b.codeword) {
            disagreements += 1;
            // another vertex attains the same objective, so neither answer is wrong
            let (_, ml) = brute_force_ml(&h, &g).unwrap();
            assert!(a.objective <= ml + 1e-9);
        }
    }
    eprintln!("tied-optimum disagreements: {disagreements} of 300");
    assert_eq!(r.outcome_disagreements, Some(disagreements));
}

#[test]
fn both_formulations_agree_on_continuous_channel() {
    let h = builtin_code("hamming-7-4").unwrap();
    let cfg = SimConfig {
        channel: ChannelModel::awgn(0.8).unwrap(),
        trials: 300,
        seed: 2,
        formulations: FormulationChoice::Both,
        execution: Execution::default(),
    };
    assert_eq!(simulate("hamming-7-4", &h, &cfg).unwrap().outcome_disagreements, Some(0));
}

#[test]
fn reruns_are_byte_identical() {
    let a = run("ldpc-3-6-n12", 0.04, 200, FormulationChoice::Both, Execution::default());
    let b = run("ldpc-3-6-n12", 0.04, 200, FormulationChoice::Both, Execution::default());
    assert_eq!(a.records_csv(false), b.records_csv(false));
    assert!(a.records_csv(true).lines().next().unwrap().ends_with("wall_clock_ns"));
}

#[test]
fn sequential_and_parallel_match() {
    let a = run("hamming-7-4", 0.05, 200, FormulationChoice::Both, Execution::Sequential);
    let b = run("hamming-7-4", 0.05, 200, FormulationChoice::Both, Execution::Parallel);
    assert_eq!(a.records_csv(false), b.records_csv(false));
}

#[test]
fn summary_matches_records() {
    let r = run("hamming-7-4", 0.08, 400, FormulationChoice::Feldman, Execution::default());
    let s = &r.summaries[0];
    assert_eq!(s.trials, 400);
    assert_eq!(s.frame_errors, r.records.iter().filter(|x| x.frame_error).count());
    assert_eq!(s.bit_errors, r.records.iter().map(|x| x.bit_errors).sum::<usize>());
    assert!((s.fer - s.frame_errors as f64 / 400.0).abs() < 1e-15);
    assert!(s.fer_ci95[0] <= s.fer && s.fer <= s.fer_ci95[1]);
    // an integral zero-cost solution is the sent word, so no frame error
    assert!(r.records.iter().all(|x| x.frame_error == (x.bit_errors > 0)));
    assert!(r.records.iter().all(|x| !x.certified || x.integral));
    let csv_rows = r.records_csv(false).lines().count();
    assert_eq!(csv_rows, 401);
}

#[test]
fn wilson_interval_matches_closed_form() {
    // 10 of 100 at z = 1.96: known interval (0.0552, 0.1744)
    let [lo, hi] = wilson_interval(10, 100);
    assert!((lo - 0.05523).abs() < 1e-4 && (hi - 0.17437).abs() < 1e-4, "{lo} {hi}");
    let [lo, hi] = wilson_interval(100, 100);
    assert!(hi > 1.0 - 1e-12 && lo > 0.96);
}

#[test]
fn awgn_simulation_on_long_code() {
    let h = builtin_code("ldpc-3-6-n48").unwrap();
    let cfg = SimConfig {
        channel: ChannelModel::awgn(0.6).unwrap(),
        trials: 40,
        seed: 1,
        formulations: FormulationChoice::Both,
        execution: Execution::default(),
    };
    let r = simulate("ldpc-3-6-n48", &h, &cfg).unwrap();
    assert_eq!(r.outcome_disagreements, Some(0));
    let json: serde_json::Value = serde_json::from_str(&r.to_json(false)).unwrap();
    assert_eq!(json["schema"], SCHEMA_VERSION);
    assert!(json.get("records").is_none());
}

#[test]
fn compare_report_is_consistent() {
    let h = builtin_code("hamming-7-4").unwrap();
    let opts = CompareOptions { num_gammas: 50, seed: 3, ..Default::default() };
    let r = compare("hamming-7-4", &h, &opts).unwrap();
    assert!(r.max_objective_gap <= 1e-7);
    assert_eq!(r.codeword_disagreements, 0);
    assert_eq!(r.feldman.lp_rows as u64, r.measured.feldman_parity_rows);
    assert_eq!(r.decomposed.lp_rows as u64, r.measured.decomposed_rows);
    assert_eq!(r.decomposed.lp_vars, 7 + r.measured.aux_vars as usize);
    let again = compare("hamming-7-4", &h, &opts).unwrap();
    assert_eq!(r.max_objective_gap, again.max_objective_gap);
}
