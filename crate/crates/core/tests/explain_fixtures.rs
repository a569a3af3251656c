use zomirror_core::explain::{pn_loss, pp_loss, sample_input, ExplainKind, ExplainTask, TinyClassifier};

/// Forward pass straight from the documented fixture layout.
fn reference_logits(bytes: &[u8], x: &[f64]) -> Vec<f64> {
    let word = |k: usize| u64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().unwrap());
    let (n, hidden, classes) = (word(0) as usize, word(1) as usize, word(2) as usize);
    let float = |k: usize| f64::from_le_bytes(bytes[32 + 8 * k..40 + 8 * k].try_into().unwrap());
    let b1 = hidden * n;
    let w2 = b1 + hidden;
    let b2 = w2 + classes * hidden;
    let act: Vec<f64> = (0..hidden)
        .map(|h| {
            let mut s = float(b1 + h);
            for i in 0..n {
                s += float(h * n + i) * x[i];
            }
            s.tanh()
        })
        .collect();
    (0..classes)
        .map(|k| {
            let mut s = float(b2 + k);
            for h in 0..hidden {
                s += float(w2 + k * hidden + h) * act[h];
            }
            s
        })
        .collect()
}

#[test]
fn pn_loss_golden_value() {
    let model = TinyClassifier::bundled("tiny-n64").unwrap();
    let x0 = sample_input(64, 3);
    let x: Vec<f64> = x0.iter().enumerate().map(|(i, v)| (1.0 - v) * ((i % 5) as f64) / 8.0).collect();
    let k0 = model.predict(&x0).unwrap();

    let shifted: Vec<f64> = x.iter().zip(x0.iter()).map(|(a, b)| a + b).collect();
    let logits = reference_logits(&model.to_bytes(), &shifted);
    let other = logits
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != k0)
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    let expected = (logits[k0] - other).max(-0.5);

    let got = pn_loss(&model, &x, &x0, k0, 0.5).unwrap();
    assert!((got - expected).abs() < 1e-12);
    assert!((got - PN_GOLDEN).abs() < 1e-12, "{got:.17e}");
}

const PN_GOLDEN: f64 = -3.894_913_320_455_062_3e-1;

#[test]
fn both_losses_query_the_sample_at_zero_perturbation() {
    let model = TinyClassifier::bundled("tiny-n64").unwrap();
    for seed in 0..10 {
        let x0 = sample_input(64, seed);
        let task = ExplainTask::new(&model, x0.clone(), ExplainKind::Pn, 0.0, 0.1, 0.1).unwrap();
        let pn = pn_loss(&model, &[0.0; 64], &x0, task.k0, 1e9).unwrap();
        let pp = pp_loss(&model, &x0, task.k0, 1e9).unwrap();
        // PN margin at x0 and PP margin at x0 are negatives of each other
        assert!((pn + pp).abs() < 1e-12);
        assert!(pn >= 0.0);
    }
}

#[test]
fn bundled_fixtures_match_their_generator() {
    for (name, n, hidden, classes, seed) in zomirror_core::explain::BUNDLED {
        let a = TinyClassifier::bundled(name).unwrap();
        assert_eq!(a, TinyClassifier::generate(n, hidden, classes, seed).unwrap());
        let x = sample_input(n, 1);
        let reference = reference_logits(&a.to_bytes(), &x);
        for (p, q) in a.logits(&x).unwrap().iter().zip(&reference) {
            assert!((p - q).abs() < 1e-12);
        }
    }
}
