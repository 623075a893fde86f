use approx::assert_abs_diff_eq;
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use risk_perception::distdp::{Axis, Grid, RiskSurface, RiskTable};
use risk_perception::pendulum::{
    risk_query, solve_pendulum_risk, PendulumParams, PendulumState, RenderConfig, FAILURE_ANGLE,
    OMEGA_RANGE, RISK_SLICE,
};
use risk_perception::perceptnet::*;
use risk_perception::risk::RiskLevel;

/// Random table over `[t, theta, omega]` with a single time slice, used
/// where the real pendulum solve is not needed.
fn random_surface(seed: u64) -> RiskSurface {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = Grid::new(vec![
        Axis::discrete("t", vec![RISK_SLICE as f64]).unwrap(),
        Axis::continuous("theta", vec![-0.8, -0.3, 0.0, 0.3, 0.8]).unwrap(),
        Axis::continuous("omega", vec![-2.0, -0.5, 0.0, 0.5, 2.0]).unwrap(),
    ])
    .unwrap();
    let errors = Grid::new(vec![
        Axis::continuous("e_theta", vec![-0.4, 0.0, 0.4]).unwrap(),
        Axis::continuous("e_omega", vec![-1.0, 0.0, 1.0]).unwrap(),
    ])
    .unwrap();
    let support: Vec<f64> = (0..6).map(|i| FAILURE_ANGLE * i as f64 / 5.0).collect();
    let mut probs = Vec::new();
    for _ in 0..grid.len() * errors.len() {
        let w: Vec<f64> = (0..6).map(|_| rng.random_range(0.01..1.0)).collect();
        let t: f64 = w.iter().sum();
        probs.extend(w.iter().map(|x| x / t));
    }
    RiskTable::new(grid, errors, support, probs)
        .unwrap()
        .surface(RiskLevel::new(0.3).unwrap())
}

fn tiny_dataset(n: usize, seed: u64) -> LabeledDataset {
    let render = RenderConfig {
        resolution: 4,
        noise_sigma: 0.05,
        ..RenderConfig::default()
    };
    generate_dataset(DataKind::Uniform, n, None, &render, &PendulumParams::default(), seed).unwrap()
}

fn perturbed_net(sizes: &[usize], seed: u64) -> PerceptionNet {
    let mut net = PerceptionNet::new(sizes, &[Head::Tanh; 2], seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
    let p: Vec<f64> = net
        .parameters()
        .iter()
        .map(|x| x + rng.random_range(-0.3..0.3))
        .collect();
    net.set_parameters(&p).unwrap();
    net
}

#[test]
fn full_risk_loss_gradient_matches_finite_differences() {
    let data = tiny_dataset(6, 3);
    let penalty = RiskPenalty::new(random_surface(5), vec![RISK_SLICE as f64], 2.0, FAILURE_ANGLE).unwrap();
    let net = perturbed_net(&[data.observations.ncols(), 7, 5, 2], 11);
    let batch: Vec<usize> = (0..data.len()).collect();
    let f = estimator_loss(&data, Some(&penalty));
    let (_, grads) = batch_gradient(&net, data.observations.view(), &batch, &f).unwrap();
    let analytic = grads.flatten();
    let params = net.parameters();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for k in 0..params.len() {
        let eval = |delta: f64| {
            let mut p = params.clone();
            p[k] += delta;
            let mut n = net.clone();
            n.set_parameters(&p).unwrap();
            batch_gradient(&n, data.observations.view(), &batch, &f).unwrap().0
        };
        let fd = (eval(h) - eval(-h)) / (2.0 * h);
        let rel = (fd - analytic[k]).abs() / fd.abs().max(analytic[k].abs()).max(1e-3);
        worst = worst.max(rel);
    }
    assert!(worst < 1e-4, "worst relative gradient error {worst}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn risk_loss_decomposes_into_baseline_plus_weighted_risk(
        theta in -0.7f64..0.7, omega in -1.8f64..1.8,
        e_theta in -0.5f64..0.5, e_omega in -1.2f64..1.2,
        lambda in 0.0f64..10.0,
    ) {
        let p = RiskPenalty::new(random_surface(1), vec![RISK_SLICE as f64], lambda, FAILURE_ANGLE).unwrap();
        let s = [theta, omega];
        let s_hat = [theta + e_theta, omega + e_omega];
        let parts = p.loss(&s, &s_hat);
        prop_assert_eq!(parts.baseline, loss_baseline(&s, &s_hat));
        prop_assert_eq!(parts.total, parts.baseline + lambda * parts.risk);
        prop_assert!(parts.risk >= 0.0);
    }

    #[test]
    fn zero_lambda_reduces_to_baseline(
        theta in -0.7f64..0.7, omega in -1.8f64..1.8,
        e_theta in -0.5f64..0.5, e_omega in -1.2f64..1.2,
    ) {
        let p = RiskPenalty::new(random_surface(2), vec![RISK_SLICE as f64], 0.0, FAILURE_ANGLE).unwrap();
        let s = [theta, omega];
        let s_hat = [theta + e_theta, omega + e_omega];
        prop_assert_eq!(p.loss(&s, &s_hat).total, loss_baseline(&s, &s_hat));
        prop_assert_eq!(p.loss_grad(&s, &s_hat), loss_baseline_grad(&s, &s_hat));
    }
}

#[test]
fn zero_error_costs_only_the_zero_error_risk() {
    let surface = random_surface(4);
    let p = RiskPenalty::new(surface.clone(), vec![RISK_SLICE as f64], 1.5, FAILURE_ANGLE).unwrap();
    let s = [0.1, -0.4];
    let parts = p.loss(&s, &s);
    assert_eq!(parts.baseline, 0.0);
    let q = [RISK_SLICE as f64, s[0], s[1]];
    assert_abs_diff_eq!(parts.total, 1.5 * surface.risk_at(&q, &[0.0, 0.0]) / FAILURE_ANGLE, epsilon = 1e-12);
}

#[test]
fn underestimating_the_angle_costs_more_than_overestimating() {
    let table = solve_pendulum_risk(PendulumParams::default()).unwrap().table;
    let surface = table.surface(RiskLevel::new(0.0).unwrap());
    let p = RiskPenalty::new(surface, vec![RISK_SLICE as f64], 1.0, FAILURE_ANGLE).unwrap();
    let s = [0.2, 0.0];
    let low = p.loss(&s, &[0.0, 0.0]);
    let high = p.loss(&s, &[0.4, 0.0]);
    assert_eq!(low.baseline, high.baseline);
    assert!(low.total > high.total, "{low:?} vs {high:?}");
}

#[test]
fn risk_weighted_samples_have_positive_weight() {
    let table = solve_pendulum_risk(PendulumParams::default()).unwrap().table;
    let surface = table.surface(RiskLevel::new(0.2).unwrap());
    let render = RenderConfig::default();
    let data = generate_dataset(DataKind::RiskWeighted, 50, Some(&surface), &render, &PendulumParams::default(), 9).unwrap();
    for row in data.states.rows() {
        assert!(surface.weight(&risk_query(row[0], row[1])) > 0.0);
    }
}

#[test]
fn uniform_samples_are_centred() {
    let data = generate_dataset(
        DataKind::Uniform,
        10_000,
        None,
        &RenderConfig { resolution: 4, ..RenderConfig::default() },
        &PendulumParams::default(),
        12,
    )
    .unwrap();
    for (j, half) in [(0, FAILURE_ANGLE), (1, OMEGA_RANGE)] {
        let col = data.states.column(j);
        let mean = col.mean().unwrap();
        // Uniform on [-half, half]: sd = half / sqrt(3).
        let se = half / 3f64.sqrt() / (col.len() as f64).sqrt();
        assert!(mean.abs() < 3.0 * se, "axis {j}: mean {mean}, se {se}");
        assert!(col.iter().all(|x| x.abs() <= half));
    }
    for ((i, j), l) in data.labels.indexed_iter() {
        assert_abs_diff_eq!(l * data.scaling.scale[j], data.states[[i, j]], epsilon = 1e-12);
    }
}

#[test]
fn datasets_are_reproducible() {
    let a = tiny_dataset(40, 77);
    let b = tiny_dataset(40, 77);
    assert_eq!(a.observations, b.observations);
    assert_eq!(a.states, b.states);
    assert_ne!(tiny_dataset(40, 78).states, a.states);
}

#[test]
fn single_example_is_memorized() {
    let one = tiny_dataset(1, 5);
    let n = 64;
    let data = LabeledDataset {
        kind: DataKind::Uniform,
        scaling: one.scaling.clone(),
        observations: Array2::from_shape_fn((n, one.observations.ncols()), |(_, j)| one.observations[[0, j]]),
        states: Array2::from_shape_fn((n, 2), |(_, j)| one.states[[0, j]]),
        labels: Array2::from_shape_fn((n, 2), |(_, j)| one.labels[[0, j]]),
    };
    let mut net = PerceptionNet::new(&[data.observations.ncols(), 16, 2], &[Head::Tanh; 2], 1).unwrap();
    let cfg = TrainConfig { epochs: 150, batch_size: 16, lr: 1e-2, seed: 2 };
    let report = train(&mut net, &data, &cfg, None).unwrap();
    assert!(report.final_loss() < 1e-4, "final loss {}", report.final_loss());
}

#[test]
fn seeded_training_is_reproducible() {
    let data = tiny_dataset(50, 8);
    let penalty = RiskPenalty::new(random_surface(3), vec![RISK_SLICE as f64], 1.0, FAILURE_ANGLE).unwrap();
    let run = || {
        let mut net = PerceptionNet::new(&[data.observations.ncols(), 8, 2], &[Head::Tanh; 2], 4).unwrap();
        let cfg = TrainConfig { epochs: 5, batch_size: 8, lr: 1e-3, seed: 6 };
        let r = train(&mut net, &data, &cfg, Some(&penalty)).unwrap();
        (r.final_loss(), net.parameters())
    };
    let (l1, p1) = run();
    let (l2, p2) = run();
    assert!((l1 - l2).abs() <= 1e-9);
    assert_eq!(p1, p2);
}

#[test]
fn non_finite_loss_aborts_training() {
    let data = tiny_dataset(4, 1);
    let mut net = PerceptionNet::new(&[data.observations.ncols(), 4, 2], &[Head::Tanh; 2], 0).unwrap();
    let err = train_with(&mut net, data.observations.view(), &TrainConfig::default(), |_, _| {
        (f64::NAN, vec![0.0, 0.0])
    })
    .unwrap_err();
    assert!(matches!(err, risk_perception::Error::NonFiniteLoss(_)));
}

#[test]
fn large_lambda_pushes_angle_errors_outward() {
    let table = solve_pendulum_risk(PendulumParams::default()).unwrap().table;
    let surface = table.surface(RiskLevel::new(0.0).unwrap());
    let render = RenderConfig::default();
    let params = PendulumParams::default();
    let train_data = generate_dataset(DataKind::Uniform, 3000, None, &render, &params, 21).unwrap();
    // Held-out states near [0.2, 0] and its mirror image.
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let held: Vec<PendulumState> = (0..400)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            PendulumState::new(sign * rng.random_range(0.15..0.25), rng.random_range(-0.1..0.1))
        })
        .collect();
    let prev: Vec<PendulumState> = held.iter().map(|s| previous_state(*s, &params)).collect();
    let obs = observation_batch(&held, &prev, &render, 23);
    let outward_bias = |lambda: f64| {
        let mut net = PerceptionNet::new(&[render.observation_len(), 64, 64, 2], &[Head::Tanh; 2], 24).unwrap();
        let p = RiskPenalty::new(surface.clone(), vec![RISK_SLICE as f64], lambda, FAILURE_ANGLE).unwrap();
        let cfg = TrainConfig { epochs: 30, ..TrainConfig::default() };
        train(&mut net, &train_data, &cfg, (lambda > 0.0).then_some(&p)).unwrap();
        let y = net.forward_batch(obs.view()).unwrap();
        held.iter()
            .enumerate()
            .map(|(i, s)| (y[[i, 0]] * train_data.scaling.scale[0] - s.theta) * s.theta.signum())
            .sum::<f64>()
            / held.len() as f64
    };
    let (base, risky) = (outward_bias(0.0), outward_bias(100.0));
    assert!(risky > base, "outward bias {risky} with lambda 100 vs {base} without");
    assert!(risky > 0.0);
}

#[test]
fn perfect_and_constant_estimators_bracket_mttf() {
    let cfg = MttfConfig { n_traj: 50, n_trials: 2, seed: 3, ..MttfConfig::default() };
    let perfect = evaluate_mttf(&PerfectEstimator, &cfg).unwrap();
    assert_eq!(perfect.mean, 500.0);
    assert_eq!(perfect.std_error, 0.0);
    let upright = evaluate_mttf(&ConstantEstimator(PendulumState::new(0.0, 0.0)), &cfg).unwrap();
    assert!(upright.mean < 500.0);
}
