use distexp::adversaries::{block_coin, materialize};
use distexp::baselines::LefForecaster;
use distexp::{run_batch, run_once, AdversaryKind, ExperimentConfig, AdversarySpec, AlgorithmSpec, JitterConfig, RunOptions};

fn algorithms() -> Vec<AlgorithmSpec> {
    vec![
        AlgorithmSpec::Full,
        AlgorithmSpec::None,
        AlgorithmSpec::MiniBatch { p_sync: 0.05 },
        AlgorithmSpec::Counter { beta: 6.0 },
        AlgorithmSpec::dfpl(0.1),
        AlgorithmSpec::Dfpl { epsilon: 0.1, block_len: Some(8), step_probability: Some(0.5) },
    ]
}

fn adversaries() -> Vec<AdversarySpec> {
    vec![
        AdversarySpec::zigzag(13),
        AdversarySpec::markov(4.0),
        AdversarySpec::block_coin(6),
        AdversarySpec::new(AdversaryKind::CounterPermutation),
        AdversarySpec::new(AdversaryKind::AppendixD { index: 2, lambda: 40 }),
    ]
}

#[test]
fn reruns_are_bit_identical() {
    let opts = RunOptions::new(1200, 6, 2).traced().with_jitter(JitterConfig::with_slack(0.3));
    for algo in algorithms() {
        for adv in adversaries() {
            let a = run_once::<f64>(&algo, &adv, &opts, 17).unwrap();
            let b = run_once::<f64>(&algo, &adv, &opts, 17).unwrap();
            assert_eq!(a, b, "{algo} on {adv}");
        }
    }
}

#[test]
fn oblivious_payoffs_do_not_depend_on_the_algorithm() {
    let opts = RunOptions::new(1200, 6, 2).traced();
    for adv in adversaries() {
        let reference = run_once::<f64>(&AlgorithmSpec::Full, &adv, &opts, 3).unwrap();
        let sites: Vec<usize> = reference.records.as_ref().unwrap().iter().map(|r| r.site).collect();
        for algo in algorithms() {
            let t = run_once::<f64>(&algo, &adv, &opts, 3).unwrap();
            assert_eq!(t.payoffs(), reference.payoffs(), "{algo} on {adv}");
            let s: Vec<usize> = t.records.as_ref().unwrap().iter().map(|r| r.site).collect();
            assert_eq!(s, sites);
        }
    }
}

#[test]
fn replayed_regret_matches_exactly() {
    let opts = RunOptions::new(2500, 5, 2).traced();
    for algo in algorithms() {
        let t = run_once::<f64>(&algo, &AdversarySpec::markov(9.0), &opts, 1).unwrap();
        let s = t.replay_regret().unwrap();
        assert_eq!(s.regret, t.result.regret);
        assert_eq!(s.best_expert_payoff, t.result.best_expert_payoff);
        let msgs: u64 = t.records.as_ref().unwrap().iter().map(|r| r.messages).sum();
        assert_eq!(msgs, t.result.ledger.messages);
    }
}

#[test]
fn silent_algorithm_sees_the_block_coin_sequence() {
    let (t, k) = (1600, 16);
    let adaptive = AdversarySpec::new(AdversaryKind::AdaptiveBlock);
    let trace = run_once::<f64>(&AlgorithmSpec::None, &adaptive, &RunOptions::new(t, k, 2).traced(), 5).unwrap();
    let coins = block_coin::<f64>(k, t, 5).unwrap();
    assert_eq!(trace.payoffs().unwrap(), coins);
    let sites: Vec<usize> = trace.records.unwrap().iter().map(|r| r.site).collect();
    assert_eq!(sites, (0..t).map(|i| i % k).collect::<Vec<_>>());
}

#[test]
fn f32_runs_match_f64_in_distribution() {
    let base = ExperimentConfig::new(AlgorithmSpec::None, AdversarySpec::zigzag(40), 2000, 4, 60);
    for algo in [AlgorithmSpec::None, AlgorithmSpec::dfpl(0.1)] {
        let cfg = ExperimentConfig { algorithm: algo.clone(), ..base.clone() };
        let a = run_batch::<f32>(&cfg).unwrap();
        let b = run_batch::<f64>(&cfg).unwrap();
        let se = ((a.std_regret.powi(2) + b.std_regret.powi(2)) / 60.0).sqrt();
        assert!((a.mean_regret - b.mean_regret).abs() < 4.0 * se + 1e-9, "{algo}");
    }
}

#[test]
fn coordinator_model_runs() {
    let lef = AlgorithmSpec::LabelEfficient { budget: 200, forecaster: LefForecaster::Ewf };
    let t = run_once::<f64>(&lef, &AdversarySpec::markov(3.0), &RunOptions::new(2000, 4, 2), 0).unwrap();
    assert!(t.result.ledger.messages > 100 && t.result.ledger.messages < 300);
    let spec = AdversarySpec::markov(3.0);
    let mut a = spec.build::<f64>(50, 4, 2, 0).unwrap();
    assert_eq!(materialize(a.as_mut(), 50).unwrap().len(), 50);
}
