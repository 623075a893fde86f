use std::sync::OnceLock;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use risk_perception::daa::*;
use risk_perception::distdp::RiskTable;
use risk_perception::encounters::occupancy_weights;
use risk_perception::risk::{cvar, RiskLevel};

struct Solved {
    policy: DaaPolicy,
    full: RiskTable,
    weights: MarginalWeights,
    marginal: RiskTable,
}

fn solved() -> &'static Solved {
    static S: OnceLock<Solved> = OnceLock::new();
    S.get_or_init(|| {
        let params = DaaParams::default();
        let policy = solve_controller(&ControllerCosts::default(), &params).unwrap().policy;
        let full = solve_daa_risk(policy.clone(), DetectionModel::default(), params).unwrap().table;
        let weights = occupancy_weights(&policy, &params, 300, 5).unwrap();
        let marginal = marginalize(&full, &weights).unwrap();
        Solved { policy, full, weights, marginal }
    })
}

fn mirror(a: Advisory) -> Advisory {
    match a {
        Advisory::Coc => Advisory::Coc,
        Advisory::Climb => Advisory::Descend,
        Advisory::Descend => Advisory::Climb,
    }
}

#[test]
fn no_intruder_means_clear_of_conflict() {
    let policy = &solved().policy;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..2000 {
        let a = Advisory::ALL[rng.random_range(0..3)];
        let s = DaaState::new(false, rng.random_range(-300.0..300.0), rng.random_range(-10.0..10.0), a, rng.random_range(0..=TAU_MAX));
        assert_eq!(policy.advise(&s), Advisory::Coc);
    }
}

#[test]
fn action_values_are_mirror_symmetric() {
    let policy = &solved().policy;
    let g = policy.grid();
    let (nh, nr) = (g.axis(1).len(), g.axis(2).len());
    for t in 0..g.axis(0).len() {
        for i in 0..nh {
            for j in 0..nr {
                for a in Advisory::ALL {
                    let q = policy.cell_q(g.flat_index(&[t, i, j, a.index()]));
                    let m = policy.cell_q(g.flat_index(&[t, nh - 1 - i, nr - 1 - j, mirror(a).index()]));
                    for u in Advisory::ALL {
                        assert_abs_diff_eq!(q[u.index()], m[mirror(u).index()], epsilon = 1e-9);
                    }
                }
            }
        }
    }
}

#[test]
fn policy_alerts_only_when_a_conflict_is_near() {
    let slice = solved().policy.slice(0.0, Advisory::Coc);
    let hs = h_axis().points().to_vec();
    let width = |tau: usize| {
        slice[tau]
            .iter()
            .zip(&hs)
            .filter(|(a, _)| **a != Advisory::Coc)
            .map(|(_, h)| h.abs())
            .fold(0.0, f64::max)
    };
    assert!(slice[TAU_MAX as usize].iter().all(|a| *a == Advisory::Coc));
    for tau in 0..=2 {
        for (a, h) in slice[tau].iter().zip(&hs) {
            if h.abs() <= 10.0 {
                assert_eq!(*a, Advisory::Coc, "tau {tau}, h {h}");
            }
        }
    }
    for tau in 7..=22 {
        let k = hs.iter().position(|h| *h == 0.0).unwrap();
        assert_ne!(slice[tau][k], Advisory::Coc, "tau {tau}");
    }
    let peak = (0..=TAU_MAX as usize).max_by(|a, b| width(*a).total_cmp(&width(*b))).unwrap();
    for tau in peak..TAU_MAX as usize {
        assert!(width(tau + 1) <= width(tau), "alert band grows after its peak at tau {tau}");
    }
    // Ownship below the intruder descends away from it.
    let below = solved().policy.advise(&DaaState::new(true, -20.0, 0.0, Advisory::Coc, 15));
    assert_eq!(below, Advisory::Descend);
}

#[test]
fn detection_probability_is_a_probability() {
    let m = DetectionModel::default();
    for tau in 0..=TAU_MAX {
        for h in h_axis().points() {
            let p = m.probability(*h, f64::from(tau));
            assert!((0.0..=1.0).contains(&p));
            if !m.in_view(*h, f64::from(tau)) {
                assert_eq!(p, 0.0);
            }
        }
    }
}

#[test]
fn missing_the_intruder_is_riskier_on_average() {
    let t = &solved().marginal;
    let s = t.surface(RiskLevel::EXPECTATION);
    let n = t.grid().len();
    let q0: f64 = (0..n).map(|c| s.cell_values(c)[0]).sum();
    let q1: f64 = (0..n).map(|c| s.cell_values(c)[1]).sum();
    assert!(q1 > q0);
}

#[test]
fn occupancy_weights_form_a_distribution() {
    let w = &solved().weights.weights;
    assert_eq!(w.len(), hdot_axis().len() * 3);
    assert!(w.iter().all(|x| *x >= 0.0));
    assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
}

#[test]
fn marginal_table_mixes_the_full_table() {
    let Solved { full, weights, marginal, .. } = solved();
    let g = full.grid();
    let mg = marginal.grid();
    assert_eq!(mg.ndim(), 2);
    assert_eq!(mg.len(), g.axis(0).len() * g.axis(1).len());
    let support = full.cost_support();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let (ti, hi) = (rng.random_range(0..g.axis(0).len()), rng.random_range(0..g.axis(1).len()));
        let e = rng.random_range(0..2);
        let slices: Vec<(f64, usize)> = weights
            .weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(m, w)| (*w, g.flat_index(&[ti, hi, m / 3, m % 3])))
            .collect();
        let out = marginal.probs(mg.flat_index(&[ti, hi]), e);
        let mean: f64 = slices.iter().map(|(w, c)| w * cvar(support, full.probs(*c, e), 0.0)).sum();
        assert_abs_diff_eq!(cvar(support, out, 0.0), mean, epsilon = 1e-9);
        // CVaR is concave under mixing.
        let lower: f64 = slices.iter().map(|(w, c)| w * cvar(support, full.probs(*c, e), 0.9)).sum();
        assert!(cvar(support, out, 0.9) >= lower - 1e-9);
    }
}

#[test]
fn point_mass_weights_select_a_slice() {
    let full = &solved().full;
    let g = full.grid();
    let mut w = vec![0.0; g.axis(2).len() * 3];
    let (j, a) = (13, Advisory::Climb.index());
    w[j * 3 + a] = 1.0;
    let m = marginalize(full, &MarginalWeights { weights: w }).unwrap();
    for ti in [0, 10, 41] {
        for hi in [0, 20, 40] {
            for e in 0..2 {
                let src = full.probs(g.flat_index(&[ti, hi, j, a]), e);
                let dst = m.probs(m.grid().flat_index(&[ti, hi]), e);
                for (x, y) in src.iter().zip(dst) {
                    assert_abs_diff_eq!(x, y, epsilon = 1e-12);
                }
            }
        }
    }
    assert!(marginalize(full, &MarginalWeights { weights: vec![1.0] }).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn objectness_risk_is_linear_with_the_table_slope(
        tau in 0.0f64..41.0, h in -300.0f64..300.0, p in 0.0f64..=1.0, alpha in 0.0f64..0.99,
    ) {
        let s = solved().marginal.surface(RiskLevel::new(alpha).unwrap());
        let x = [tau.round(), h];
        let (q0, q1) = (s.risk(&x, 0), s.risk(&x, 1));
        prop_assert_eq!(objectness_risk_slope(&s, &x), q0 - q1);
        let r = objectness_risk(&s, &x, p);
        prop_assert!((r - (q1 + p * (q0 - q1))).abs() <= 1e-9 * (1.0 + q1.abs()));
    }

    #[test]
    fn detector_loss_gradient_matches_finite_differences(
        o in 0.05f64..0.95, y in -0.9f64..0.9, x in -0.9f64..0.9,
        by in -0.9f64..0.9, bx in -0.9f64..0.9,
        tau in 0.0f64..41.0, h in -300.0f64..300.0, lambda in 0.0f64..20.0,
        positive in any::<bool>(),
    ) {
        let s = solved().marginal.surface(RiskLevel::new(0.5).unwrap());
        let label = positive.then_some(BlobLabel { y: by, x: bx, sigma_px: 1.0 });
        let state = positive.then_some([tau.round(), h]);
        let loss = DetectorLoss::Risk { surface: &s, lambda };
        let out = [o, y, x];
        let (_, g) = detector_loss(&out, label.as_ref(), state, loss);
        let step = 1e-6;
        for k in 0..3 {
            let mut a = out;
            let mut b = out;
            a[k] += step;
            b[k] -= step;
            let fd = (detector_loss(&a, label.as_ref(), state, loss).0
                - detector_loss(&b, label.as_ref(), state, loss).0) / (2.0 * step);
            prop_assert!((fd - g[k]).abs() <= 1e-5 * (1.0 + fd.abs()), "k {} fd {} analytic {}", k, fd, g[k]);
        }
    }
}

#[test]
fn detector_datasets_are_labelled_consistently() {
    let sky = SkyConfig::default();
    let surface = solved().marginal.surface(RiskLevel::EXPECTATION);
    for sampling in [StateSampling::Uniform, StateSampling::RiskWeighted] {
        let d = generate_detector_data(sampling, 500, Some(&surface), &sky, 0.7, 3).unwrap();
        assert_eq!(d.len(), 500);
        assert_eq!(d.states.iter().filter(|s| s.is_none()).count(), 350);
        assert_eq!(d.images.ncols(), sky.resolution * sky.resolution);
        for (l, s) in d.labels.iter().zip(&d.states) {
            if s.is_none() {
                assert!(l.is_none());
            }
        }
        if sampling == StateSampling::RiskWeighted {
            for [tau, h] in d.states.iter().flatten() {
                assert!(surface.weight(&[*tau, *h]) > 0.0);
            }
        }
        assert_eq!(d, generate_detector_data(sampling, 500, Some(&surface), &sky, 0.7, 3).unwrap());
    }
    assert!(generate_detector_data(StateSampling::RiskWeighted, 10, None, &sky, 0.5, 0).is_err());
}

#[test]
fn trained_detector_separates_empty_sky_from_intruders() {
    let sky = SkyConfig::default();
    let train = generate_detector_data(StateSampling::Uniform, 20_000, None, &sky, 0.7, 11).unwrap();
    let mut det = Detector::new(sky, &[16], 12).unwrap();
    let cfg = risk_perception::perceptnet::TrainConfig { epochs: 20, batch_size: 32, lr: 1e-3, seed: 13 };
    det.train(&train, &cfg, DetectorLoss::Baseline).unwrap();
    let val = generate_detector_data(StateSampling::Uniform, 2000, None, &sky, 0.5, 14).unwrap();
    let preds = det.predict_batch(val.images.view()).unwrap();
    // Distant intruders are sub-pixel, so hits are scored on close ones.
    let rate = |want: bool| {
        let (hit, n) = preds
            .iter()
            .zip(&val.states)
            .filter(|(_, s)| match s {
                Some([tau, _]) => want && *tau <= 10.0,
                None => !want,
            })
            .fold((0, 0), |(h, n), (p, _)| (h + (p.objectness > DETECTION_THRESHOLD) as usize, n + 1));
        hit as f64 / n as f64
    };
    let (hits, false_alarms) = (rate(true), rate(false));
    assert!(hits > false_alarms + 0.3, "hits {hits}, false alarms {false_alarms}");
}
