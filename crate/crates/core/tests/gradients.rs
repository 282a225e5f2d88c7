//! Analytic gradients against central finite differences, plus the dropout
//! expectation check.

use fairrec_core::mln::{backward, Gradients, MlnModel};
use fairrec_core::pmf::{dot, rating_loss};
use fairrec_testkit::gradcheck::{numeric_gradient, relative_error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn factor_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for trial in 0..100 {
        let f = rng.gen_range(1..=6usize);
        let rating = rng.gen_range(1..=5) as f64;
        let lambda = [0.0, 0.05, 0.3][rng.gen_range(0..3)];
        let p: Vec<f64> = (0..f).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let q: Vec<f64> = (0..f).map(|_| rng.gen_range(-1.0..1.0)).collect();

        // analytic, as implied by the update rules: dL/dp_k = -2 e q_k + lambda p_k
        let e = rating - dot(&p, &q);
        let grad_p: Vec<f64> = (0..f).map(|k| -2.0 * e * q[k] + lambda * p[k]).collect();
        let grad_q: Vec<f64> = (0..f).map(|k| -2.0 * e * p[k] + lambda * q[k]).collect();

        let mut packed: Vec<f64> = p.iter().chain(&q).copied().collect();
        let mut loss = |x: &[f64]| rating_loss(rating, &x[..f], &x[f..], lambda);
        let numeric = numeric_gradient(&mut loss, &mut packed, 1e-6);

        for k in 0..f {
            let rel = relative_error(numeric[k], grad_p[k], 1e-6);
            assert!(rel < 1e-5, "trial {trial} p[{k}]: rel err {rel}");
            let rel = relative_error(numeric[f + k], grad_q[k], 1e-6);
            assert!(rel < 1e-5, "trial {trial} q[{k}]: rel err {rel}");
        }
    }
}

/// Sets flattened parameters (all weight layers then all bias layers) on a
/// copy of the network.
fn with_params(model: &MlnModel, flat: &[f64]) -> MlnModel {
    let mut weights: Vec<Vec<f64>> = model.weights().to_vec();
    let mut biases: Vec<Vec<f64>> = model.biases().to_vec();
    let mut pos = 0;
    for w in weights.iter_mut() {
        let len = w.len();
        w.copy_from_slice(&flat[pos..pos + len]);
        pos += len;
    }
    for b in biases.iter_mut() {
        let len = b.len();
        b.copy_from_slice(&flat[pos..pos + len]);
        pos += len;
    }
    MlnModel::from_params(model.sizes().to_vec(), weights, biases, model.dropout()).unwrap()
}

fn flatten(model: &MlnModel) -> Vec<f64> {
    model
        .weights()
        .iter()
        .flatten()
        .chain(model.biases().iter().flatten())
        .copied()
        .collect()
}

#[test]
fn backprop_matches_finite_differences_on_absolute_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let mut checked = 0usize;
    for trial in 0..200 {
        let sizes = [
            vec![3, 4, 2, 1],
            vec![2, 5, 3, 1],
            vec![4, 3, 3, 1],
        ][trial % 3]
            .clone();
        let model = MlnModel::new(&sizes, 0.0, trial as u64).unwrap();
        let x: Vec<f64> = (0..sizes[0]).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: f64 = rng.gen_range(-1.0..1.0);

        let trace = model.trace(&x, None).unwrap();
        let h = trace.output();
        // skip instances where the absolute error or a rectifier sits on its
        // kink; finite differences are meaningless across those
        if (h - y).abs() < 1e-3
            || trace.pre.iter().flatten().any(|z| z.abs() < 1e-3)
        {
            continue;
        }
        let mut grads = Gradients::zeroed(&model);
        let d_out = if h > y { 1.0 } else { -1.0 };
        backward(&model, &trace, d_out, &mut grads);

        let flat = flatten(&model);
        let mut loss = |params: &[f64]| {
            let m = with_params(&model, params);
            (m.forward_infer(&x).unwrap() - y).abs()
        };
        let numeric = numeric_gradient(&mut loss, &flat, 1e-6);

        let mut pos = 0;
        for (l, w) in model.weights().iter().enumerate() {
            for k in 0..w.len() {
                let rel = relative_error(numeric[pos + k], grads.weight(l, k), 1e-4);
                assert!(rel < 1e-4, "trial {trial} layer {l} weight {k}: rel {rel}");
            }
            pos += w.len();
        }
        for (l, b) in model.biases().iter().enumerate() {
            for k in 0..b.len() {
                let rel = relative_error(numeric[pos + k], grads.bias(l, k), 1e-4);
                assert!(rel < 1e-4, "trial {trial} layer {l} bias {k}: rel {rel}");
            }
            pos += b.len();
        }
        checked += 1;
    }
    assert!(checked >= 100, "only {checked} smooth instances checked");
}

#[test]
fn dropout_train_mode_matches_infer_in_expectation() {
    let model = MlnModel::new(&[4, 16, 4, 1], 0.2, 31).unwrap();
    let x = [0.8, -0.4, 0.2, 1.0];
    let infer = model.trace(&x, None).unwrap();
    let reference = &infer.activations[1];

    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let rounds = 40_000;
    let mut sums = vec![0.0; reference.len()];
    for _ in 0..rounds {
        let t = model.trace(&x, Some(&mut rng)).unwrap();
        for (s, a) in sums.iter_mut().zip(&t.activations[1]) {
            *s += a;
        }
    }
    for (k, (&mean_sum, &want)) in sums.iter().zip(reference).enumerate() {
        let mean = mean_sum / rounds as f64;
        assert!(
            (mean - want).abs() < 0.05 * (want.abs() + 0.1),
            "unit {k}: train-mode mean {mean} vs infer {want}"
        );
    }
}
