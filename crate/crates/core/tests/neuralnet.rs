mod common;

use common::{normals, rng};
use hhofenn::neuralnet::{
    adam_step, class_weights, fenn_sequence_forward, fenn_sequence_forward_with_resets, fenn_step, softmax,
    weighted_cross_entropy, Adam, AdamConfig, AdamMoments, FennParameters, FennState, HeadKind, Network, NetworkSpec,
    TrainingHyperparameters,
};
use hhofenn::Error;
use ndarray::{Array1, Array2, Array3};
use proptest::prelude::*;

fn small_spec(kind: HeadKind) -> NetworkSpec {
    let mut spec = NetworkSpec::desk_default(kind);
    spec.input_length = 120;
    spec
}

#[test]
fn fenn_step_matches_the_recurrence_by_hand() {
    let mut r = rng(1);
    let p = FennParameters::he_init(2, 3, 2, HeadKind::Fenn, &mut r);
    let u1 = Array1::from(vec![0.3, -0.7]);
    let u2 = Array1::from(vec![-1.1, 0.4]);
    let s0 = FennState::for_params(&p);
    let (_, s1) = fenn_step(&p, &s0, u1.view()).unwrap();
    let (out, s2) = fenn_step(&p, &s1, u2.view()).unwrap();

    let xc = p.w4.dot(&s1.x_c) + p.w5.dot(&s1.x_prev);
    let yc1 = p.w6.dot(&s1.y_c1) + p.w7.dot(&s1.y_prev);
    let yc2 = p.w8.dot(&s1.y_c2) + p.w9.dot(&s1.y_prev);
    let x = (&xc + &p.w1.dot(&u2) + &yc1 + &p.b1).mapv(f64::tanh);
    let y = softmax((p.w2.dot(&x) + p.w3.dot(&u2) + &yc2 + &p.b2).view());
    for (a, b) in s2.x_prev.iter().zip(&x) {
        assert!((a - b).abs() < 1e-14);
    }
    for (a, b) in out.iter().zip(&y) {
        assert!((a - b).abs() < 1e-14);
    }
    for (a, b) in s2.y_prev.iter().zip(&y) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn mlp_head_has_no_memory() {
    let mut r = rng(2);
    let p = FennParameters::he_init(3, 4, 2, HeadKind::Mlp, &mut r);
    let u = Array2::from_shape_vec((4, 3), normals(&mut r, 12)).unwrap();
    let full = fenn_sequence_forward(&p, &u).unwrap();
    let last = fenn_sequence_forward(&p, &u.slice(ndarray::s![3.., ..]).to_owned()).unwrap();
    assert_eq!(full.final_output(), last.final_output());

    let enn = FennParameters::he_init(3, 4, 2, HeadKind::Enn, &mut r);
    let full = fenn_sequence_forward(&enn, &u).unwrap();
    let last = fenn_sequence_forward(&enn, &u.slice(ndarray::s![3.., ..]).to_owned()).unwrap();
    assert_ne!(full.final_output(), last.final_output());
}

#[test]
fn resets_make_segments_independent() {
    let mut r = rng(3);
    let p = FennParameters::he_init(2, 3, 2, HeadKind::Fenn, &mut r);
    let u = Array2::from_shape_vec((6, 2), normals(&mut r, 12)).unwrap();
    let joined = fenn_sequence_forward_with_resets(&p, &u, &[3]).unwrap();
    let tail = fenn_sequence_forward(&p, &u.slice(ndarray::s![3.., ..]).to_owned()).unwrap();
    assert_eq!(joined.final_output(), tail.final_output());
}

#[test]
fn adam_first_step_moves_by_the_learning_rate() {
    let cfg = AdamConfig::with_lr(0.01);
    let mut p = vec![1.0, -2.0, 0.5];
    let g = [0.3, -4.0, 1e-3];
    let mut m = AdamMoments::zeros(3);
    adam_step(&mut p, &g, &mut m, 1, &cfg);
    // Bias-corrected first step is lr * g / (|g| + eps).
    for ((after, before), gi) in p.iter().zip([1.0, -2.0, 0.5]).zip(g) {
        let expected = before - 0.01 * gi / (gi.abs() + 1e-8);
        assert!((after - expected).abs() < 1e-12);
    }
    let mut adam = Adam::new(cfg, &[3]);
    let mut q = vec![1.0, -2.0, 0.5];
    adam.step(vec![&mut q[..]], &[g.to_vec()]);
    assert_eq!(adam.steps_taken(), 1);
    assert_eq!(p, q);
}

#[test]
fn network_output_is_a_distribution_per_sample() {
    let mut r = rng(4);
    let net = Network::new(small_spec(HeadKind::Fenn), &mut r).unwrap();
    let x = Array3::from_shape_vec((3, 1, 120), normals(&mut r, 360)).unwrap();
    let probs = net.predict(&x).unwrap();
    assert_eq!(probs.dim(), (3, 2));
    for row in probs.outer_iter() {
        assert!((row.sum() - 1.0).abs() < 1e-12);
        assert!(row.iter().all(|&p| p > 0.0));
    }
}

#[test]
fn too_short_inputs_are_rejected_by_the_spec() {
    let mut spec = NetworkSpec::desk_default(HeadKind::Fenn);
    spec.input_length = 20;
    assert!(spec.shapes().is_err());
    assert!(Network::new(spec, &mut rng(0)).is_err());
}

#[test]
fn save_and_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    let mut r = rng(5);
    let mut net = Network::new(small_spec(HeadKind::Enn), &mut r).unwrap();
    let x = Array3::from_shape_vec((4, 1, 120), normals(&mut r, 480)).unwrap();
    // Train-mode passes move the batchnorm running statistics away from their start.
    net.loss_and_gradients(&x, &[0, 1, 0, 1], &[0.5, 0.5], &mut r).unwrap();
    net.save(&path).unwrap();
    let loaded = Network::load(&path).unwrap();
    assert_eq!(net.predict(&x).unwrap(), loaded.predict(&x).unwrap());
    assert_eq!(loaded.spec(), net.spec());

    let blob = dir.path().join("model.json.bin");
    let mut bytes = std::fs::read(&blob).unwrap();
    bytes[3] ^= 0x40;
    std::fs::write(&blob, bytes).unwrap();
    assert!(matches!(Network::load(&path), Err(Error::Corrupt(_))));
}

#[test]
fn training_reduces_the_loss_on_a_separable_batch() {
    let mut r = rng(6);
    let mut net = Network::new(small_spec(HeadKind::Fenn), &mut r).unwrap();
    let n = 16;
    let mut data = Vec::with_capacity(n * 120);
    let mut targets = Vec::new();
    for i in 0..n {
        let class = i % 2;
        let level = if class == 0 { -1.0 } else { 1.0 };
        data.extend(normals(&mut r, 120).into_iter().map(|v| level + 0.3 * v));
        targets.push(class);
    }
    let x = Array3::from_shape_vec((n, 1, 120), data).unwrap();
    let w = [0.5, 0.5];
    let before = net.evaluate_loss(&x, &targets, &w).unwrap();
    let sizes = net.param_sizes();
    let mut adam = Adam::new(AdamConfig::with_lr(1e-2), &sizes);
    for _ in 0..60 {
        let (_, g) = net.loss_and_gradients(&x, &targets, &w, &mut r).unwrap();
        adam.step(net.params_mut(), &g);
    }
    let after = net.evaluate_loss(&x, &targets, &w).unwrap();
    assert!(after < 0.5 * before, "{before} -> {after}");
}

#[test]
fn learning_rate_drops_in_steps() {
    let h = TrainingHyperparameters {
        ilr: 0.1,
        lrdf: 0.5,
        drop_period: 10,
        ..Default::default()
    };
    assert_eq!(h.learning_rate(0), 0.1);
    assert_eq!(h.learning_rate(9), 0.1);
    assert_eq!(h.learning_rate(10), 0.05);
    assert_eq!(h.learning_rate(25), 0.025);
    assert!(TrainingHyperparameters { dp: 1.0, ..h }.validate().is_err());
    assert!(TrainingHyperparameters { ilr: 0.0, ..h }.validate().is_err());
}

#[test]
fn class_weight_edge_cases() {
    let w = class_weights(&[0, 10]).unwrap();
    assert_eq!(w.empty_classes, vec![0]);
    assert!((w.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    assert!(class_weights(&[5]).is_err());
    assert!(class_weights(&[0, 0]).is_err());
}

proptest! {
    #[test]
    fn softmax_is_a_shift_invariant_distribution(z in prop::collection::vec(-30.0f64..30.0, 2..8), shift in -100.0f64..100.0) {
        let p = softmax(Array1::from(z.clone()).view());
        let q = softmax(Array1::from(z.iter().map(|v| v + shift).collect::<Vec<_>>()).view());
        prop_assert!((p.sum() - 1.0).abs() < 1e-12);
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_loss_is_nonnegative_and_finite(p0 in 0.0f64..=1.0, w0 in 0.0f64..1.0) {
        let p = [p0, 1.0 - p0];
        let l = weighted_cross_entropy(&p, &[1.0, 0.0], &[w0, 1.0 - w0]);
        prop_assert!(l.is_finite() && l >= 0.0);
    }

    #[test]
    fn two_class_weights_sum_to_one(a in 1usize..5000, b in 1usize..5000) {
        let w = class_weights(&[a, b]).unwrap().weights;
        prop_assert!((w[0] + w[1] - 1.0).abs() < 1e-12);
        prop_assert_eq!(w[0] > w[1], a < b);
    }
}
