//! Sample quality and diversity measurements: the True/False/error
//! composition of a sample and the normalized token-level Levenshtein
//! diversity, in an exact all-pairs mode and an unbiased pair-subsampling
//! mode.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{classify, Classification, Token, TokenSeq};

/// Per-sample counts of the three classification outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Composition {
    pub n_true: usize,
    pub n_false: usize,
    pub n_error: usize,
}

impl Composition {
    pub fn total(&self) -> usize {
        self.n_true + self.n_false + self.n_error
    }

    pub fn true_fraction(&self) -> f64 {
        self.n_true as f64 / self.total() as f64
    }

    pub fn error_fraction(&self) -> f64 {
        self.n_error as f64 / self.total() as f64
    }
}

/// Classify every sequence in the sample and count the outcomes.
pub fn composition(sample: &[TokenSeq]) -> Composition {
    let mut c = Composition {
        n_true: 0,
        n_false: 0,
        n_error: 0,
    };
    for seq in sample {
        match classify(seq) {
            Classification::TrueExpr => c.n_true += 1,
            Classification::FalseExpr => c.n_false += 1,
            Classification::SyntaxError => c.n_error += 1,
        }
    }
    c
}

/// Token-level edit distance (deletion, insertion, substitution), two-row
/// dynamic program.
pub fn levenshtein(a: &[Token], b: &[Token]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    if b.is_empty() {
        return a.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, &ta) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &tb) in b.iter().enumerate() {
            let tmp = row[j + 1];
            let sub = diag + usize::from(ta != tb);
            row[j + 1] = sub.min(tmp + 1).min(row[j] + 1);
            diag = tmp;
        }
    }
    row[b.len()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiversityMode {
    Exact,
    Sampled,
}

/// Mean normalized pairwise Levenshtein distance of a sample.
///
/// Each pair contributes `levenshtein(a, b) / L`, where `L` is the token
/// count of the longest expression in the sample. Exact mode averages all
/// `n(n-1)/2` unordered pairs; sampled mode averages `pairs_evaluated`
/// pairs drawn uniformly with replacement and reports the standard error
/// of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiversityEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub pairs_evaluated: u64,
    pub mode: DiversityMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DiversityError {
    #[error("diversity needs at least 2 sequences, got {0}")]
    SampleTooSmall(usize),
    #[error("sampled diversity needs a pair budget of at least 1")]
    EmptyPairBudget,
}

/// Samples of this size or smaller use exact mode under [`diversity_auto`].
pub const EXACT_MODE_LIMIT: usize = 2000;

/// Default pair budget for sampled mode under [`diversity_auto`].
pub const DEFAULT_PAIR_BUDGET: u64 = 100_000;

// Pair values are accumulated per fixed work unit and folded in unit
// order, so the result is identical regardless of thread schedule.
const PAIR_CHUNK: usize = 4096;

fn max_len(sample: &[TokenSeq]) -> usize {
    sample.iter().map(|s| s.len()).max().unwrap_or(0)
}

fn normalized(a: &TokenSeq, b: &TokenSeq, denom: f64) -> f64 {
    if denom == 0.0 {
        return 0.0; // every sequence is empty
    }
    levenshtein(a, b) as f64 / denom
}

pub fn diversity<R: Rng + ?Sized>(
    sample: &[TokenSeq],
    mode: DiversityMode,
    pair_budget: u64,
    rng: &mut R,
) -> Result<DiversityEstimate, DiversityError> {
    let n = sample.len();
    if n < 2 {
        return Err(DiversityError::SampleTooSmall(n));
    }
    let denom = max_len(sample) as f64;
    match mode {
        DiversityMode::Exact => {
            let pairs = n as u64 * (n as u64 - 1) / 2;
            // Row i pairs with every j > i; row sums folded in row order.
            let row_sums: Vec<f64> = (0..n - 1)
                .into_par_iter()
                .map(|i| {
                    let a = &sample[i];
                    sample[i + 1..]
                        .iter()
                        .map(|b| normalized(a, b, denom))
                        .sum::<f64>()
                })
                .collect();
            let mean = row_sums.iter().sum::<f64>() / pairs as f64;
            Ok(DiversityEstimate {
                mean,
                stderr: 0.0,
                pairs_evaluated: pairs,
                mode,
            })
        }
        DiversityMode::Sampled => {
            if pair_budget == 0 {
                return Err(DiversityError::EmptyPairBudget);
            }
            // Pre-draw all pairs from the seed, then map.
            let drawn: Vec<(u32, u32)> = (0..pair_budget)
                .map(|_| loop {
                    let i = rng.random_range(0..n);
                    let j = rng.random_range(0..n);
                    if i != j {
                        return (i.min(j) as u32, i.max(j) as u32);
                    }
                })
                .collect();
            let partials: Vec<(f64, f64)> = drawn
                .par_chunks(PAIR_CHUNK)
                .map(|chunk| {
                    let mut sum = 0.0;
                    let mut sumsq = 0.0;
                    for &(i, j) in chunk {
                        let v = normalized(&sample[i as usize], &sample[j as usize], denom);
                        sum += v;
                        sumsq += v * v;
                    }
                    (sum, sumsq)
                })
                .collect();
            let (sum, sumsq) = partials
                .iter()
                .fold((0.0, 0.0), |(s, q), &(ps, pq)| (s + ps, q + pq));
            let nf = pair_budget as f64;
            let mean = sum / nf;
            let var = ((sumsq - sum * sum / nf) / (nf - 1.0).max(1.0)).max(0.0);
            Ok(DiversityEstimate {
                mean,
                stderr: (var / nf).sqrt(),
                pairs_evaluated: pair_budget,
                mode,
            })
        }
    }
}

/// Exact mode for samples up to [`EXACT_MODE_LIMIT`], sampled mode with
/// `pair_budget` pairs beyond that.
pub fn diversity_auto<R: Rng + ?Sized>(
    sample: &[TokenSeq],
    pair_budget: u64,
    rng: &mut R,
) -> Result<DiversityEstimate, DiversityError> {
    if sample.len() <= EXACT_MODE_LIMIT {
        diversity(sample, DiversityMode::Exact, pair_budget, rng)
    } else {
        diversity(sample, DiversityMode::Sampled, pair_budget, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seq(s: &str) -> TokenSeq {
        s.parse().unwrap()
    }

    fn toks(ids: &[u8]) -> Vec<Token> {
        ids.iter().map(|&i| Token::from_id(i).unwrap()).collect()
    }

    /// Naive exponential-recursion edit distance, the independent oracle.
    fn lev_naive(a: &[Token], b: &[Token]) -> usize {
        match (a.split_first(), b.split_first()) {
            (None, _) => b.len(),
            (_, None) => a.len(),
            (Some((ha, ta)), Some((hb, tb))) => {
                let sub = lev_naive(ta, tb) + usize::from(ha != hb);
                let del = lev_naive(ta, b) + 1;
                let ins = lev_naive(a, tb) + 1;
                sub.min(del).min(ins)
            }
        }
    }

    #[test]
    fn levenshtein_basics() {
        let x = seq("not True and False");
        assert_eq!(levenshtein(&x, &x), 0);
        assert_eq!(levenshtein(&[Token::Not, Token::True], &[Token::True]), 1);
        assert_eq!(
            levenshtein(
                &[Token::True, Token::Or, Token::False],
                &[Token::True, Token::And, Token::False]
            ),
            1
        );
        assert_eq!(levenshtein(&[], &[Token::True, Token::Or]), 2);
        assert_eq!(levenshtein(&[], &[]), 0);
    }

    #[test]
    fn levenshtein_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let la = rng.random_range(0..=10);
            let lb = rng.random_range(0..=10);
            let a = toks(&(0..la).map(|_| rng.random_range(0..8)).collect::<Vec<_>>());
            let b = toks(&(0..lb).map(|_| rng.random_range(0..8)).collect::<Vec<_>>());
            assert_eq!(levenshtein(&a, &b), lev_naive(&a, &b));
        }
    }

    #[test]
    fn levenshtein_symmetry_and_triangle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..2000 {
            let mut draw = |rng: &mut ChaCha8Rng| {
                let l = rng.random_range(0..=12);
                toks(&(0..l).map(|_| rng.random_range(0..8)).collect::<Vec<_>>())
            };
            let a = draw(&mut rng);
            let b = draw(&mut rng);
            let c = draw(&mut rng);
            assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
            assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
        }
    }

    #[test]
    fn composition_counts() {
        let sample = [seq("True"), seq("not True"), seq("and and")];
        let c = composition(&sample);
        assert_eq!(
            c,
            Composition {
                n_true: 1,
                n_false: 1,
                n_error: 1
            }
        );
        assert_eq!(c.total(), 3);
    }

    #[test]
    fn identical_sequences_have_zero_diversity_in_both_modes() {
        let sample: Vec<TokenSeq> = (0..12).map(|_| seq("True or False")).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let exact = diversity(&sample, DiversityMode::Exact, 0, &mut rng).unwrap();
        assert_eq!(exact.mean, 0.0);
        assert_eq!(exact.stderr, 0.0);
        assert_eq!(exact.pairs_evaluated, 12 * 11 / 2);
        let sampled = diversity(&sample, DiversityMode::Sampled, 100, &mut rng).unwrap();
        assert_eq!(sampled.mean, 0.0);
        assert_eq!(sampled.pairs_evaluated, 100);
    }

    #[test]
    fn single_distinct_leaf_pair_has_diversity_one() {
        let sample = [seq("True"), seq("False")];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let e = diversity(&sample, DiversityMode::Exact, 0, &mut rng).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.pairs_evaluated, 1);
    }

    #[test]
    fn normalization_uses_longest_sequence_in_sample() {
        // lev(True, not not True) = 2, longest length 3 -> 2/3; the
        // third, longer member stretches the denominator to 5.
        let a = seq("True");
        let b = seq("not not True");
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let two = diversity(&[a.clone(), b.clone()], DiversityMode::Exact, 0, &mut rng).unwrap();
        assert!((two.mean - 2.0 / 3.0).abs() < 1e-12);
        let c = seq("not not not not True");
        let three = diversity(&[a, b, c], DiversityMode::Exact, 0, &mut rng).unwrap();
        let expect = (2.0 / 5.0 + 4.0 / 5.0 + 2.0 / 5.0) / 3.0;
        assert!((three.mean - expect).abs() < 1e-12);
    }

    #[test]
    fn empty_sequences_normalize_without_dividing_by_zero() {
        let sample = [TokenSeq::default(), TokenSeq::default()];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let e = diversity(&sample, DiversityMode::Exact, 0, &mut rng).unwrap();
        assert_eq!(e.mean, 0.0);
        let sample = [TokenSeq::default(), seq("not True")];
        let e = diversity(&sample, DiversityMode::Exact, 0, &mut rng).unwrap();
        assert_eq!(e.mean, 1.0); // distance 2 over longest length 2
    }

    #[test]
    fn diversity_rejects_tiny_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            diversity(&[], DiversityMode::Exact, 0, &mut rng),
            Err(DiversityError::SampleTooSmall(0))
        );
        assert_eq!(
            diversity(&[seq("True")], DiversityMode::Exact, 0, &mut rng),
            Err(DiversityError::SampleTooSmall(1))
        );
    }

    #[test]
    fn sampled_mode_is_deterministic_for_a_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let sample: Vec<TokenSeq> = crate::expr::generate_dataset(64, 1, 4, &mut rng).unwrap();
        let a = diversity(
            &sample,
            DiversityMode::Sampled,
            500,
            &mut ChaCha8Rng::seed_from_u64(1),
        )
        .unwrap();
        let b = diversity(
            &sample,
            DiversityMode::Sampled,
            500,
            &mut ChaCha8Rng::seed_from_u64(1),
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sampled_estimator_tracks_exact_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let sample: Vec<TokenSeq> = crate::expr::generate_dataset(200, 1, 5, &mut rng).unwrap();
        let exact = diversity(&sample, DiversityMode::Exact, 0, &mut rng)
            .unwrap()
            .mean;
        let mut means = Vec::new();
        let mut stderrs = Vec::new();
        for s in 0..50u64 {
            let est = diversity(
                &sample,
                DiversityMode::Sampled,
                2000,
                &mut ChaCha8Rng::seed_from_u64(s),
            )
            .unwrap();
            means.push(est.mean);
            stderrs.push(est.stderr);
        }
        let grand_mean = means.iter().sum::<f64>() / means.len() as f64;
        // stderr of the mean of 50 independent estimates
        let avg_se = stderrs.iter().sum::<f64>() / stderrs.len() as f64;
        let combined = avg_se / (means.len() as f64).sqrt();
        assert!(
            (grand_mean - exact).abs() < 3.0 * combined,
            "grand mean {grand_mean}, exact {exact}, combined se {combined}"
        );
    }

    #[test]
    fn auto_mode_switches_on_sample_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let small: Vec<TokenSeq> = crate::expr::generate_dataset(10, 1, 3, &mut rng).unwrap();
        let est = diversity_auto(&small, 100, &mut rng).unwrap();
        assert_eq!(est.mode, DiversityMode::Exact);
        let large: Vec<TokenSeq> = (0..EXACT_MODE_LIMIT + 1)
            .map(|i| {
                if i % 2 == 0 {
                    seq("True")
                } else {
                    seq("not False")
                }
            })
            .collect();
        let est = diversity_auto(&large, 100, &mut rng).unwrap();
        assert_eq!(est.mode, DiversityMode::Sampled);
        assert_eq!(est.pairs_evaluated, 100);
    }
}
