use distexp::adversaries::{materialize, ReplayAdversary};
use distexp::baselines::{LefForecaster, NoCommunication};
use distexp::domain::PayoffVector;
use distexp::forecasters::{perturbed_choice, EwfState, FplState};
use distexp::simulator::run_with_network;
use distexp::{
    run_batch, run_once, AdversaryKind, AdversarySpec, AlgorithmSpec, ExperimentConfig, ExpertIndex, Protocol,
    RngStream, RunOptions, StarChannel, StreamId,
};

fn actions(trace: &distexp::RunTrace) -> Vec<ExpertIndex> {
    trace.records.as_ref().unwrap().iter().map(|r| r.action).collect()
}

fn payoffs(trace: &distexp::RunTrace) -> Vec<PayoffVector<f64>> {
    trace.payoffs().unwrap()
}

#[test]
fn full_comm_is_centralized_fpl() {
    let t = 3000;
    let opts = RunOptions::new(t, 5, 2).traced();
    let trace = run_once::<f64>(&AlgorithmSpec::Full, &AdversarySpec::markov(7.0), &opts, 21).unwrap();
    assert_eq!(trace.result.ledger.messages, 2 * t as u64);
    let mut fpl = FplState::new(2, (t as f64).sqrt(), RngStream::new(21, StreamId::Learner(0))).unwrap();
    for (p, a) in payoffs(&trace).iter().zip(actions(&trace)) {
        assert_eq!(fpl.choose().unwrap(), a);
        fpl.update(p).unwrap();
    }
}

#[test]
fn full_comm_constant_payoff_regret() {
    // P(wrong) at gap x is (1 - x/eta)^2 / 2, so E[regret] is about sqrt(T)/6
    let t = 10_000;
    let adv = AdversarySpec::new(AdversaryKind::Constant { values: vec![1.0, 0.0] });
    let b = run_batch::<f64>(&ExperimentConfig::new(AlgorithmSpec::Full, adv, t, 3, 50)).unwrap();
    let oracle: f64 = (0..t).map(|x| 0.5 * (1.0 - x as f64 / 100.0).max(0.0).powi(2)).sum();
    assert!((b.mean_regret - oracle).abs() < 3.0, "{} vs {oracle}", b.mean_regret);
    assert!(b.mean_regret <= (t as f64).sqrt());
}

#[test]
fn single_site_no_comm_matches_full_comm() {
    let opts = RunOptions::new(2000, 1, 2).traced();
    let adv = AdversarySpec::markov(3.0);
    let full = run_once::<f64>(&AlgorithmSpec::Full, &adv, &opts, 5).unwrap();
    let none = run_once::<f64>(&AlgorithmSpec::None, &adv, &opts, 5).unwrap();
    assert_eq!(actions(&full), actions(&none));
    assert_eq!(none.result.ledger.messages, 0);
    assert_eq!(full.result.regret, none.result.regret);
}

#[test]
fn no_comm_sites_learn_only_their_own_payoffs() {
    let (t, k) = (400, 4);
    let seq = distexp::adversaries::zigzag::<f64>(7, t).unwrap();
    let mut adv = ReplayAdversary::cyclic(seq.clone(), k);
    let mut proto = NoCommunication::<f64>::new(t, k, 2, 3).unwrap();
    let mut net = StarChannel::new(k, 2);
    let trace = run_with_network(&mut proto, &mut adv, &mut net, &RunOptions::new(t, k, 2).traced(), 3).unwrap();
    let eta = (t as f64).sqrt();
    let mut gaps = vec![0.0; k];
    let mut rngs: Vec<_> = (0..k).map(|i| RngStream::new(3, StreamId::Learner(i as u32))).collect();
    for (i, r) in trace.records.unwrap().iter().enumerate() {
        let site = i % k;
        assert_eq!(perturbed_choice(gaps[site], eta, &mut rngs[site]).unwrap(), r.action);
        gaps[site] += seq[i].gap();
    }
    assert_eq!(proto.local_gaps(), gaps.as_slice());
}

#[test]
fn minibatch_extremes() {
    let (t, k) = (3000, 6);
    let opts = RunOptions::new(t, k, 2).traced();
    let adv = AdversarySpec::markov(10.0);
    let none = run_once::<f64>(&AlgorithmSpec::None, &adv, &opts, 8).unwrap();
    let never = run_once::<f64>(&AlgorithmSpec::MiniBatch { p_sync: 0.0 }, &adv, &opts, 8).unwrap();
    assert_eq!(actions(&none), actions(&never));
    assert_eq!(never.result.ledger.messages, 0);
    let always = run_once::<f64>(&AlgorithmSpec::MiniBatch { p_sync: 1.0 }, &adv, &opts, 8).unwrap();
    assert_eq!(always.result.ledger.messages, (2 * k * t) as u64);
    let opts1 = RunOptions::new(t, 1, 2).traced();
    let full = run_once::<f64>(&AlgorithmSpec::Full, &adv, &opts1, 8).unwrap();
    let always1 = run_once::<f64>(&AlgorithmSpec::MiniBatch { p_sync: 1.0 }, &adv, &opts1, 8).unwrap();
    assert_eq!(actions(&full), actions(&always1));
}

#[test]
fn minibatch_sync_count_is_binomial() {
    let (t, k) = (20_000, 5);
    let cfg = ExperimentConfig::new(AlgorithmSpec::MiniBatch { p_sync: 0.01 }, AdversarySpec::markov(5.0), t, k, 20);
    let b = run_batch::<f64>(&cfg).unwrap();
    for row in &b.rows {
        assert_eq!(row.messages % (2 * k as u64), 0);
        let syncs = row.messages / (2 * k as u64);
        assert!((155..=245).contains(&syncs), "seed {}: {syncs}", row.seed);
    }
}

#[test]
fn minibatch_always_syncing_matches_full_in_distribution() {
    let (t, k) = (2000, 4);
    let adv = AdversarySpec::markov(20.0);
    let full = run_batch::<f64>(&ExperimentConfig::new(AlgorithmSpec::Full, adv.clone(), t, k, 200)).unwrap();
    let mb = run_batch::<f64>(&ExperimentConfig::new(AlgorithmSpec::MiniBatch { p_sync: 1.0 }, adv, t, k, 200)).unwrap();
    let se = ((full.std_regret.powi(2) + mb.std_regret.powi(2)) / 200.0).sqrt();
    assert!((full.mean_regret - mb.mean_regret).abs() < 4.0 * se, "{} vs {}", full.mean_regret, mb.mean_regret);
}

#[test]
fn counter_with_unreachable_threshold_plays_on_zero_totals() {
    let (t, k) = (500, 4);
    let opts = RunOptions::new(t, k, 2).traced();
    let trace = run_once::<f64>(&AlgorithmSpec::Counter { beta: (t * k) as f64 }, &AdversarySpec::markov(5.0), &opts, 2)
        .unwrap();
    assert_eq!(trace.result.ledger.messages, 0);
    let mut rngs: Vec<_> = (0..k).map(|i| RngStream::new(2, StreamId::Learner(i as u32))).collect();
    for r in trace.records.unwrap() {
        assert_eq!(perturbed_choice(0.0, (t as f64).sqrt(), &mut rngs[r.site]).unwrap(), r.action);
    }
}

#[test]
fn counter_rejects_nonpositive_beta() {
    let opts = RunOptions::new(10, 2, 2);
    for beta in [0.0, -3.0, f64::NAN] {
        assert!(run_once::<f64>(&AlgorithmSpec::Counter { beta }, &AdversarySpec::zigzag(2), &opts, 0).is_err());
    }
}

#[test]
fn lef_full_budget_is_plain_ewf() {
    let (t, n) = (1500, 3);
    let spec = AlgorithmSpec::LabelEfficient { budget: t, forecaster: LefForecaster::Ewf };
    let adv = AdversarySpec::new(AdversaryKind::IidUniform);
    let opts = RunOptions::new(t, 2, n).traced();
    let trace = run_once::<f64>(&spec, &adv, &opts, 4).unwrap();
    assert_eq!(trace.result.ledger.messages, t as u64);
    let mut ewf = EwfState::new(n, EwfState::default_learning_rate(n, t, 1.0)).unwrap();
    let mut rng = RngStream::new(4, StreamId::Learner(0));
    for (p, a) in payoffs(&trace).iter().zip(actions(&trace)) {
        assert_eq!(ewf.choose(&mut rng), a);
        ewf.update(p, 1.0).unwrap();
    }
}

#[test]
fn lef_fpl_variant_runs_and_samples() {
    let t = 4000;
    let spec = AlgorithmSpec::LabelEfficient { budget: 400, forecaster: LefForecaster::Fpl };
    let b = run_batch::<f64>(&ExperimentConfig::new(spec, AdversarySpec::new(AdversaryKind::IidBernoulli { gap: 0.2 }), t, 3, 40))
        .unwrap();
    // per-seed sd is sqrt(400 * 0.9) < 20
    assert!((b.mean_messages - 400.0).abs() < 4.0 * 20.0 / 40f64.sqrt());
    assert!(b.mean_regret < 4.0 * t as f64 * (2.0f64 / 400.0).sqrt());
}

#[test]
fn baselines_require_two_experts_except_ewf() {
    let opts = RunOptions::new(50, 2, 3);
    let adv = AdversarySpec::new(AdversaryKind::IidUniform);
    for algo in [AlgorithmSpec::Full, AlgorithmSpec::None, AlgorithmSpec::MiniBatch { p_sync: 0.1 }, AlgorithmSpec::Counter { beta: 1.0 }] {
        assert!(matches!(run_once::<f64>(&algo, &adv, &opts, 0), Err(distexp::Error::UnsupportedArity { .. })));
    }
    let lef = AlgorithmSpec::LabelEfficient { budget: 10, forecaster: LefForecaster::Ewf };
    assert!(run_once::<f64>(&lef, &adv, &opts, 0).is_ok());
}

#[test]
fn protocols_reject_out_of_order_calls() {
    let mut p = distexp::baselines::FullCommunication::<f64>::new(10, 2, 2, 0).unwrap();
    let mut net = StarChannel::new(2, 2);
    let pay = PayoffVector::pair(1.0, 0.0).unwrap();
    assert!(p.observe(1, 0, &pay, &mut net).is_err());
    p.choose(1, 0, &mut net).unwrap();
    assert!(p.choose(2, 0, &mut net).is_err());
    let seq = materialize::<f64>(&mut ReplayAdversary::single_site(vec![pay.clone()]), 1).unwrap();
    assert_eq!(seq[0].payoff, pay);
}
