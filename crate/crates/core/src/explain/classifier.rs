//! Bundled two-layer perceptron used as the black-box model.
//!
//! Fixture layout (all little-endian): four `u64` header words
//! `n, hidden, classes, seed`, then `f64` values for the layer-1 weights
//! (`hidden x n`, row-major), layer-1 bias (`hidden`), layer-2 weights
//! (`classes x hidden`, row-major) and layer-2 bias (`classes`).

use std::path::Path;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::RngStream;

const HEADER_WORDS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct TinyClassifier {
    pub n: usize,
    pub hidden: usize,
    pub classes: usize,
    pub seed: u64,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
}

/// Fixtures shipped with the crate: `(name, n, hidden, classes, seed)`.
pub const BUNDLED: [(&str, usize, usize, usize, u64); 3] = [
    ("tiny-n16", 16, 16, 2, 1),
    ("tiny-n64", 64, 32, 10, 2),
    ("tiny-n784", 784, 32, 10, 3),
];

static FIXTURE_N16: &[u8] = include_bytes!("../../fixtures/tiny-n16.bin");
static FIXTURE_N64: &[u8] = include_bytes!("../../fixtures/tiny-n64.bin");
static FIXTURE_N784: &[u8] = include_bytes!("../../fixtures/tiny-n784.bin");

impl TinyClassifier {
    /// Seeded weight draw used to create the bundled fixtures.
    pub fn generate(n: usize, hidden: usize, classes: usize, seed: u64) -> Result<Self> {
        if n == 0 || classes < 2 || hidden == 0 || hidden > 32 {
            return Err(Error::Fixture(format!(
                "need n >= 1, 1 <= hidden <= 32, classes >= 2; got n={n}, hidden={hidden}, classes={classes}"
            )));
        }
        let mut rng = RngStream::new(seed, 0).generator();
        let mut draw = |len: usize, scale: f64| -> Vec<f64> {
            (0..len)
                .map(|_| scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                .collect()
        };
        let w1 = draw(hidden * n, 3.0 / (n as f64).sqrt());
        let b1 = draw(hidden, 0.5);
        let w2 = draw(classes * hidden, 2.0 / (hidden as f64).sqrt());
        let b2 = draw(classes, 0.1);
        Ok(Self {
            n,
            hidden,
            classes,
            seed,
            w1,
            b1,
            w2,
            b2,
        })
    }

    pub fn bundled(name: &str) -> Result<Self> {
        let bytes = match name {
            "tiny-n16" => FIXTURE_N16,
            "tiny-n64" => FIXTURE_N64,
            "tiny-n784" => FIXTURE_N784,
            other => return Err(Error::Fixture(format!("no bundled classifier named `{other}`"))),
        };
        Self::from_bytes(bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_WORDS * 8 {
            return Err(Error::Fixture("truncated header".into()));
        }
        let word = |i: usize| u64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().expect("8 bytes"));
        let (n, hidden, classes, seed) = (word(0) as usize, word(1) as usize, word(2) as usize, word(3));
        let expected = hidden * n + hidden + classes * hidden + classes;
        let body = &bytes[HEADER_WORDS * 8..];
        if body.len() != expected * 8 {
            return Err(Error::Fixture(format!(
                "expected {expected} weights for ({n}, {hidden}, {classes}), found {} bytes",
                body.len()
            )));
        }
        let mut values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
        let mut take = |len: usize| -> Vec<f64> { values.by_ref().take(len).collect() };
        let w1 = take(hidden * n);
        let b1 = take(hidden);
        let w2 = take(classes * hidden);
        let b2 = take(classes);
        let model = Self {
            n,
            hidden,
            classes,
            seed,
            w1,
            b1,
            w2,
            b2,
        };
        if model.w1.iter().chain(&model.b1).chain(&model.w2).chain(&model.b2).any(|v| !v.is_finite()) {
            return Err(Error::Fixture("non-finite weight".into()));
        }
        Ok(model)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 * (HEADER_WORDS + self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()));
        for w in [self.n as u64, self.hidden as u64, self.classes as u64, self.seed] {
            out.extend_from_slice(&w.to_le_bytes());
        }
        for v in self.w1.iter().chain(&self.b1).chain(&self.w2).chain(&self.b2) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path.as_ref())
            .map_err(|e| Error::Fixture(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_bytes(&bytes)
    }

    fn hidden_activations(&self, x: &[f64]) -> Vec<f64> {
        (0..self.hidden)
            .map(|h| {
                let row = &self.w1[h * self.n..(h + 1) * self.n];
                (row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b1[h]).tanh()
            })
            .collect()
    }

    /// Class scores `f(x)`.
    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let a = self.hidden_activations(x);
        Ok((0..self.classes)
            .map(|k| {
                let row = &self.w2[k * self.hidden..(k + 1) * self.hidden];
                row.iter().zip(&a).map(|(w, v)| w * v).sum::<f64>() + self.b2[k]
            })
            .collect())
    }

    /// `grad_x (f(x)_plus - f(x)_minus)`.
    pub fn logit_difference_gradient(&self, x: &[f64], plus: usize, minus: usize) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let a = self.hidden_activations(x);
        let mut grad = vec![0.0; self.n];
        for h in 0..self.hidden {
            let dw = self.w2[plus * self.hidden + h] - self.w2[minus * self.hidden + h];
            let coef = dw * (1.0 - a[h] * a[h]);
            if coef == 0.0 {
                continue;
            }
            for (g, w) in grad.iter_mut().zip(&self.w1[h * self.n..(h + 1) * self.n]) {
                *g += coef * w;
            }
        }
        Ok(grad)
    }

    /// `argmax_i f(x)_i`, lowest index on ties.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax_excluding(&self.logits(x)?, None).0)
    }
}

/// Index and value of the largest entry, skipping `exclude`; lowest index
/// wins ties.
pub fn argmax_excluding(values: &[f64], exclude: Option<usize>) -> (usize, f64) {
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if Some(i) == exclude {
            continue;
        }
        if best.0 == usize::MAX || v > best.1 {
            best = (i, v);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_fixtures_match_their_generator() {
        for (name, n, hidden, classes, seed) in BUNDLED {
            let bundled = TinyClassifier::bundled(name).unwrap();
            assert_eq!(bundled, TinyClassifier::generate(n, hidden, classes, seed).unwrap(), "{name}");
        }
        assert!(TinyClassifier::bundled("lenet").is_err());
    }

    #[test]
    fn byte_format_round_trip_and_errors() {
        let m = TinyClassifier::generate(5, 3, 2, 9).unwrap();
        let bytes = m.to_bytes();
        assert_eq!(bytes.len(), 8 * (4 + 15 + 3 + 6 + 2));
        assert_eq!(TinyClassifier::from_bytes(&bytes).unwrap(), m);
        assert!(TinyClassifier::from_bytes(&bytes[..20]).is_err());
        assert!(TinyClassifier::from_bytes(&bytes[..bytes.len() - 8]).is_err());
        assert!(TinyClassifier::generate(5, 33, 2, 0).is_err());
        assert!(TinyClassifier::generate(5, 3, 1, 0).is_err());
    }

    #[test]
    fn logits_are_deterministic_and_finite() {
        let m = TinyClassifier::bundled("tiny-n64").unwrap();
        let x = vec![0.5; 64];
        let a = m.logits(&x).unwrap();
        assert_eq!(a, m.logits(&x).unwrap());
        assert!(a.iter().all(|v| v.is_finite()));
        assert!(m.logits(&[0.0; 3]).is_err());
    }

    #[test]
    fn difference_gradient_matches_central_differences() {
        let m = TinyClassifier::generate(7, 5, 3, 4).unwrap();
        let x: Vec<f64> = (0..7).map(|i| 0.1 * i as f64).collect();
        let g = m.logit_difference_gradient(&x, 2, 0).unwrap();
        let h = 1e-6;
        for i in 0..7 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fp = m.logits(&xp).unwrap();
            let fm = m.logits(&xm).unwrap();
            let fd = ((fp[2] - fp[0]) - (fm[2] - fm[0])) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7, "coordinate {i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn argmax_ties_prefer_lowest_index() {
        assert_eq!(argmax_excluding(&[1.0, 3.0, 3.0], None), (1, 3.0));
        assert_eq!(argmax_excluding(&[5.0, 3.0, 3.0], Some(0)), (1, 3.0));
    }
}
