//! Player 2: row deletion with a feature-linear softmax policy.
//!
//! A correction first draws a set size `k = min(Binomial(eligible, base_rate),
//! floor(max_delete_fraction * m))`, then picks `k` rows one at a time without
//! replacement, each with probability proportional to
//! `exp(w · f_i / temperature)` over the rows still available. The size draw
//! does not depend on `w`, so
//! `∇_w log π(i_1..i_k) = Σ_t (f_{i_t} - E_{p_t}[f]) / temperature`.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::GramState;
use crate::scalar::Scalar;

/// Raw per-row observations.
#[derive(Clone, Debug, PartialEq)]
pub struct RowFeatures {
    /// Entries equal to the state's maximum cosine.
    pub max_degree: usize,
    pub mean_cosine: f64,
    /// Counts per `C₁` value followed by an "other" bin; sums to `m - 1`.
    pub histogram: Vec<usize>,
    /// Round in which the row was added.
    pub age: usize,
    /// Candidate columns this row alone blocked in the last fill phase.
    pub conflict_score: usize,
}

impl RowFeatures {
    /// Feature vector seen by the policy; counts are scaled by `m - 1`.
    pub fn vector(&self) -> Vec<f64> {
        let denom = self.histogram.iter().sum::<usize>().max(1) as f64;
        let mut v = Vec::with_capacity(self.histogram.len() + 4);
        v.push(self.max_degree as f64 / denom);
        v.push(self.mean_cosine);
        v.extend(self.histogram.iter().map(|&c| c as f64 / denom));
        v.push(self.age as f64);
        v.push((self.conflict_score as f64).ln_1p());
        v
    }
}

pub fn feature_len(c1_len: usize) -> usize {
    c1_len + 5
}

/// Features of every row of `state`. `c1` are the histogram bin centres.
pub fn row_features<S: Scalar>(
    state: &GramState<S>,
    c1: &[f64],
    ages: &[usize],
    conflicts: &[usize],
    snap: f64,
) -> Vec<RowFeatures> {
    let m = state.count();
    let max = state.max_cosine().map(|v| v.to_f64());
    (0..m)
        .map(|i| {
            let mut histogram = vec![0usize; c1.len() + 1];
            let mut sum = 0.0;
            let mut max_degree = 0;
            for j in (0..m).filter(|&j| j != i) {
                let v = state.get(i, j).to_f64();
                sum += v;
                if max.is_some_and(|mx| (v - mx).abs() <= 1e-9) {
                    max_degree += 1;
                }
                let bin = c1.iter().position(|c| (c - v).abs() <= snap).unwrap_or(c1.len());
                histogram[bin] += 1;
            }
            RowFeatures {
                max_degree,
                mean_cosine: if m > 1 { sum / (m - 1) as f64 } else { 0.0 },
                histogram,
                age: ages.get(i).copied().unwrap_or(0),
                conflict_score: conflicts.get(i).copied().unwrap_or(0),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectorPolicy {
    pub weights: Vec<f64>,
    pub temperature: f64,
    pub max_delete_fraction: f64,
    pub protected_prefix: usize,
    /// Success probability of the set-size draw.
    pub base_rate: f64,
    pub baseline: f64,
    pub baseline_initialized: bool,
    /// Weight of the old baseline in the moving average.
    pub baseline_decay: f64,
}

impl CorrectorPolicy {
    pub fn new(features: usize, protected_prefix: usize) -> Self {
        Self {
            weights: vec![0.0; features],
            temperature: 1.0,
            max_delete_fraction: 0.2,
            protected_prefix,
            base_rate: 0.1,
            baseline: 0.0,
            baseline_initialized: false,
            baseline_decay: 0.9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.max_delete_fraction > 0.0 && self.max_delete_fraction < 1.0) {
            return Err(Error::InvalidConfig(
                "max_delete_fraction must lie in (0, 1)".into(),
            ));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::InvalidConfig("temperature must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.base_rate) {
            return Err(Error::InvalidConfig("base_rate must lie in [0, 1]".into()));
        }
        if !(0.0..1.0).contains(&self.baseline_decay) {
            return Err(Error::InvalidConfig("baseline_decay must lie in [0, 1)".into()));
        }
        Ok(())
    }

    fn score(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, x)| w * x).sum::<f64>() / self.temperature
    }

    /// Softmax over `rows` (indices into `features`).
    fn probabilities(&self, features: &[Vec<f64>], rows: &[usize]) -> Vec<f64> {
        let scores: Vec<f64> = rows.iter().map(|&i| self.score(&features[i])).collect();
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let total: f64 = exp.iter().sum();
        exp.into_iter().map(|e| e / total).collect()
    }

    /// Largest deletion set allowed for `m` rows.
    pub fn delete_cap(&self, m: usize) -> usize {
        ((self.max_delete_fraction * m as f64).floor() as usize)
            .min(m.saturating_sub(self.protected_prefix))
    }

    /// Ordered deletion sequence; its set is the index set `I` to delete.
    pub fn sample_index_set<R: Rng>(&self, features: &[Vec<f64>], rng: &mut R) -> Vec<usize> {
        let m = features.len();
        let cap = self.delete_cap(m);
        if cap == 0 {
            return Vec::new();
        }
        let eligible = m - self.protected_prefix.min(m);
        let draw = Binomial::new(eligible as u64, self.base_rate)
            .expect("validated base rate")
            .sample(rng) as usize;
        let k = draw.min(cap);
        let mut remaining: Vec<usize> = (self.protected_prefix.min(m)..m).collect();
        let mut chosen = Vec::with_capacity(k);
        for _ in 0..k {
            let p = self.probabilities(features, &remaining);
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = remaining.len() - 1;
            for (idx, pi) in p.iter().enumerate() {
                acc += pi;
                if u < acc {
                    pick = idx;
                    break;
                }
            }
            chosen.push(remaining.remove(pick));
        }
        chosen
    }

    /// `log π(sequence | features)` without the size term.
    pub fn log_prob(&self, features: &[Vec<f64>], sequence: &[usize]) -> f64 {
        let m = features.len();
        let mut remaining: Vec<usize> = (self.protected_prefix.min(m)..m).collect();
        let mut total = 0.0;
        for &i in sequence {
            let p = self.probabilities(features, &remaining);
            let idx = remaining.iter().position(|&r| r == i).expect("eligible row");
            total += p[idx].ln();
            remaining.remove(idx);
        }
        total
    }

    /// `∇_w log π(sequence | features)`.
    pub fn grad_log_prob(&self, features: &[Vec<f64>], sequence: &[usize]) -> Vec<f64> {
        let m = features.len();
        let d = self.weights.len();
        let mut remaining: Vec<usize> = (self.protected_prefix.min(m)..m).collect();
        let mut grad = vec![0.0; d];
        for &i in sequence {
            let p = self.probabilities(features, &remaining);
            for k in 0..d {
                let expected: f64 = remaining
                    .iter()
                    .zip(&p)
                    .map(|(&r, pr)| pr * features[r][k])
                    .sum();
                grad[k] += (features[i][k] - expected) / self.temperature;
            }
            let idx = remaining.iter().position(|&r| r == i).expect("eligible row");
            remaining.remove(idx);
        }
        grad
    }

    /// REINFORCE step with a moving-average baseline. The first call
    /// initializes the baseline to the batch mean.
    pub fn policy_gradient_update(&self, episodes: &[EpisodeRecord], learning_rate: f64) -> Self {
        let mut next = self.clone();
        if episodes.is_empty() {
            return next;
        }
        let mean = episodes.iter().map(|e| e.reward).sum::<f64>() / episodes.len() as f64;
        if !next.baseline_initialized {
            next.baseline = mean;
            next.baseline_initialized = true;
        }
        let mut step = vec![0.0; self.weights.len()];
        for e in episodes {
            let advantage = e.reward - next.baseline;
            if advantage == 0.0 {
                continue;
            }
            for c in &e.corrections {
                let g = self.grad_log_prob(&c.features, &c.sequence);
                for (s, gk) in step.iter_mut().zip(g) {
                    *s += advantage * gk;
                }
            }
        }
        let scale = learning_rate / episodes.len() as f64;
        for (w, s) in next.weights.iter_mut().zip(step) {
            *w += scale * s;
        }
        next.baseline = next.baseline_decay * next.baseline + (1.0 - next.baseline_decay) * mean;
        next
    }
}

/// One correction: the features it saw and the deletion sequence it drew.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrectionRecord {
    pub features: Vec<Vec<f64>>,
    pub sequence: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRecord {
    pub corrections: Vec<CorrectionRecord>,
    pub reward: f64,
}

/// Principal submatrix on the rows not in `delete`.
pub fn apply_correction<S: Scalar>(
    state: &GramState<S>,
    delete: &[usize],
    protected_prefix: usize,
) -> Result<GramState<S>> {
    let m = state.count();
    let mut drop = vec![false; m];
    for &i in delete {
        if i >= m {
            return Err(Error::IndexOutOfRange { index: i, len: m });
        }
        if i < protected_prefix {
            return Err(Error::ProtectedRow { index: i });
        }
        drop[i] = true;
    }
    let keep: Vec<usize> = (0..m).filter(|&i| !drop[i]).collect();
    Ok(state.principal(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refconfigs::{generate, GeneratorId};
    use crate::tolerance::Tolerances;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_features(rng: &mut ChaCha8Rng, m: usize, d: usize) -> Vec<Vec<f64>> {
        (0..m)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn zero_cap_passes() {
        let mut p = CorrectorPolicy::new(3, 0);
        p.max_delete_fraction = 0.1;
        p.base_rate = 1.0;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = random_features(&mut rng, 9, 3);
        assert!(p.sample_index_set(&f, &mut rng).is_empty());
    }

    #[test]
    fn respects_cap_and_prefix() {
        let mut p = CorrectorPolicy::new(2, 3);
        p.base_rate = 1.0;
        p.max_delete_fraction = 0.5;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let f = random_features(&mut rng, 12, 2);
            let s = p.sample_index_set(&f, &mut rng);
            assert_eq!(s.len(), 6);
            assert!(s.iter().all(|&i| (3..12).contains(&i)));
        }
    }

    #[test]
    fn high_temperature_is_uniform() {
        let mut p = CorrectorPolicy::new(1, 0);
        p.weights = vec![5.0];
        p.temperature = 1e12;
        p.base_rate = 1.0;
        p.max_delete_fraction = 0.2;
        let f: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts = [0usize; 5];
        let draws = 10_000;
        for _ in 0..draws {
            let s = p.sample_index_set(&f, &mut rng);
            assert_eq!(s.len(), 1);
            counts[s[0]] += 1;
        }
        let expected = draws as f64 / 5.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 4 degrees of freedom, 0.999 quantile
        assert!(chi2 < 18.47, "chi2 = {chi2}");
    }

    #[test]
    fn dominant_conflict_row_is_chosen() {
        let mut p = CorrectorPolicy::new(1, 0);
        p.weights = vec![1.0];
        p.temperature = 0.1;
        p.base_rate = 1.0;
        p.max_delete_fraction = 0.1;
        let mut f: Vec<Vec<f64>> = (0..10).map(|_| vec![0.0]).collect();
        f[6] = vec![(50f64).ln_1p()];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let hits = (0..1000)
            .filter(|_| p.sample_index_set(&f, &mut rng) == vec![6])
            .count();
        assert!(hits > 950, "{hits}");
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..50 {
            let d = rng.random_range(1..6);
            let m = rng.random_range(3..12);
            let mut p = CorrectorPolicy::new(d, rng.random_range(0..2));
            p.weights = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            p.temperature = rng.random_range(0.5..2.0);
            p.base_rate = 0.5;
            p.max_delete_fraction = 0.5;
            let f = random_features(&mut rng, m, d);
            let mut seq = p.sample_index_set(&f, &mut rng);
            if seq.is_empty() {
                seq.push(m - 1);
            }
            let g = p.grad_log_prob(&f, &seq);
            for k in 0..d {
                let h = 1e-5;
                let mut plus = p.clone();
                plus.weights[k] += h;
                let mut minus = p.clone();
                minus.weights[k] -= h;
                let fd = (plus.log_prob(&f, &seq) - minus.log_prob(&f, &seq)) / (2.0 * h);
                let rel = (fd - g[k]).abs() / g[k].abs().max(fd.abs()).max(1e-8);
                assert!(rel < 1e-5 || (fd - g[k]).abs() < 1e-9, "rel {rel}");
            }
        }
    }

    #[test]
    fn zero_advantage_leaves_weights() {
        let mut p = CorrectorPolicy::new(2, 0);
        p.weights = vec![0.3, -0.2];
        p.baseline = 5.0;
        p.baseline_initialized = true;
        let rec = EpisodeRecord {
            corrections: vec![CorrectionRecord {
                features: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                sequence: vec![1],
            }],
            reward: 5.0,
        };
        let next = p.policy_gradient_update(&[rec.clone(), rec], 0.5);
        assert_eq!(next.weights, p.weights);
    }

    #[test]
    fn correlated_feature_gains_weight() {
        // deleting the row whose first feature is 1 pays 10, any other row pays 0
        let mut p = CorrectorPolicy::new(2, 0);
        p.base_rate = 1.0;
        p.max_delete_fraction = 0.25;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut history = vec![p.weights[0]];
        for _ in 0..100 {
            let mut episodes = Vec::new();
            for _ in 0..8 {
                let good = rng.random_range(0..4);
                let f: Vec<Vec<f64>> = (0..4)
                    .map(|i| vec![f64::from(u8::from(i == good)), rng.random_range(-1.0..1.0)])
                    .collect();
                let seq = p.sample_index_set(&f, &mut rng);
                let reward = if seq == vec![good] { 10.0 } else { 0.0 };
                episodes.push(EpisodeRecord {
                    corrections: vec![CorrectionRecord { features: f, sequence: seq }],
                    reward,
                });
            }
            p = p.policy_gradient_update(&episodes, 0.2);
            history.push(p.weights[0]);
        }
        assert!(history.last().unwrap() > &history[0]);
        assert!(p.weights[0] > 1.0, "{:?}", p.weights);
    }

    #[test]
    fn correction_examples() {
        let hex = generate(&GeneratorId::Hexagon).unwrap().exact_gram.unwrap();
        assert_eq!(apply_correction(&hex, &[], 1).unwrap(), hex);
        let five = apply_correction(&hex, &[3], 1).unwrap();
        assert_eq!(five.count(), 5);
        let t = Tolerances::default();
        assert!(five.psd_report(&t).psd);
        assert_eq!(five.psd_report(&t).rank, 2);
        assert_eq!(apply_correction(&hex, &[0], 1), Err(Error::ProtectedRow { index: 0 }));
        assert!(matches!(
            apply_correction(&hex, &[6], 0),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn histogram_sums_to_degree() {
        let d4 = generate(&GeneratorId::D4Roots).unwrap().float_gram();
        let feats = row_features(&d4, &[-1.0, 0.0, 0.5], &[0; 24], &[0; 24], 1e-7);
        for f in &feats {
            assert_eq!(f.histogram.iter().sum::<usize>(), 23);
            assert_eq!(f.max_degree, 8);
            // -1/2 lands in "other"
            assert_eq!(f.histogram[3], 8);
            assert!(f.vector().iter().all(|x| x.is_finite()));
        }
    }

    proptest! {
        #[test]
        fn deletion_preserves_invariants(seed in 0u64..1000, frac in 0.05f64..0.95) {
            let d4 = generate(&GeneratorId::D4Roots).unwrap().exact_gram.unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let del: Vec<usize> = (2..24).filter(|_| rng.random::<f64>() < frac).collect();
            let out = apply_correction(&d4, &del, 2).unwrap();
            prop_assert_eq!(out.count(), 24 - del.len());
            prop_assert!(out.validate(&Tolerances::default()).is_ok());
            let f = out.to_float();
            prop_assert!(f.validate(&Tolerances::default()).is_ok());
        }
    }
}
