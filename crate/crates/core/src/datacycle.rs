//! Dataset containers with per-item provenance, train/validation
//! splitting, and the four data-cycle policies that build `D_t` from the
//! real data `D_0` and the sampled generations `S_1..S_t`.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::TokenSeq;

/// Ordered expressions plus a provenance tag per item: 0 for real data,
/// `g` for items sampled at generation `g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    items: Vec<TokenSeq>,
    provenance: Vec<u32>,
}

impl Dataset {
    pub fn new(items: Vec<TokenSeq>, provenance: Vec<u32>) -> Self {
        assert_eq!(items.len(), provenance.len());
        Dataset { items, provenance }
    }

    /// Real data: every item tagged 0.
    pub fn from_real(items: Vec<TokenSeq>) -> Self {
        let provenance = vec![0; items.len()];
        Dataset { items, provenance }
    }

    /// A model sample: every item tagged with its generation index.
    pub fn from_sample(items: Vec<TokenSeq>, generation: u32) -> Self {
        let provenance = vec![generation; items.len()];
        Dataset { items, provenance }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[TokenSeq] {
        &self.items
    }

    pub fn provenance(&self) -> &[u32] {
        &self.provenance
    }

    /// Item count per provenance tag, in tag order.
    pub fn source_histogram(&self) -> BTreeMap<u32, usize> {
        let mut h = BTreeMap::new();
        for &p in &self.provenance {
            *h.entry(p).or_insert(0) += 1;
        }
        h
    }
}

/// The four composition policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CycleKind {
    /// `D_t = S_t`: train only on the newest sample.
    FullSynthetic,
    /// Equal parts of `D_0` and every `S_1..S_t`.
    Balanced,
    /// `(1 - lambda)` of `D_{t-1}` plus `lambda` of `S_t`, size held at `m`.
    Incremental,
    /// All of `D_{t-1}` plus `lambda * m` items of `S_t`; grows every generation.
    Expanding,
}

/// Policy plus its mixing fraction. `lambda` is only read by the
/// incremental and expanding cycles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataCycleSpec {
    pub kind: CycleKind,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

fn default_lambda() -> f64 {
    0.1
}

impl DataCycleSpec {
    /// `lambda * m` must be a positive integer for cycles that use it.
    pub fn validate(&self, m: usize) -> Result<(), CycleError> {
        match self.kind {
            CycleKind::FullSynthetic | CycleKind::Balanced => Ok(()),
            CycleKind::Incremental | CycleKind::Expanding => {
                if !(self.lambda > 0.0 && self.lambda <= 1.0) {
                    return Err(CycleError::LambdaOutOfRange {
                        lambda: self.lambda,
                    });
                }
                let x = self.lambda * m as f64;
                if (x - x.round()).abs() > 1e-9 || x.round() < 1.0 {
                    return Err(CycleError::LambdaNotIntegral {
                        lambda: self.lambda,
                        m,
                    });
                }
                Ok(())
            }
        }
    }

    fn lambda_count(&self, m: usize) -> usize {
        (self.lambda * m as f64).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CycleError {
    #[error("lambda {lambda} is outside (0, 1]")]
    LambdaOutOfRange { lambda: f64 },
    #[error("lambda {lambda} times m = {m} is not a positive integer")]
    LambdaNotIntegral { lambda: f64, m: usize },
    #[error("composition at t >= 1 needs at least one sample in the history")]
    EmptyHistory,
    #[error("sample S_{generation} holds {got} items, expected {want}")]
    WrongSampleSize {
        generation: usize,
        got: usize,
        want: usize,
    },
    #[error("source of size {len} cannot supply {want} items without replacement")]
    SourceTooSmall { len: usize, want: usize },
    #[error("cannot split a dataset of {0} items")]
    SplitTooSmall(usize),
}

/// First `k` steps of a Fisher-Yates shuffle over `0..n`: a uniform draw
/// of `k` distinct indices, stable across platforms.
fn sample_indices<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    debug_assert!(k <= n);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}

fn draw_from<R: Rng + ?Sized>(
    items: &[TokenSeq],
    provenance: &[u32],
    k: usize,
    rng: &mut R,
    out_items: &mut Vec<TokenSeq>,
    out_prov: &mut Vec<u32>,
) -> Result<(), CycleError> {
    if k > items.len() {
        return Err(CycleError::SourceTooSmall {
            len: items.len(),
            want: k,
        });
    }
    for i in sample_indices(rng, items.len(), k) {
        out_items.push(items[i].clone());
        out_prov.push(provenance[i]);
    }
    Ok(())
}

/// Build `D_t` for `t = history.len()` from the policy, the real data,
/// the previous dataset `D_{t-1}`, and the samples `S_1..S_t`
/// (`history[i]` is `S_{i+1}`). Draws are uniform without replacement
/// within a source; items are never deduplicated across sources;
/// provenance tags carry through.
pub fn compose<R: Rng + ?Sized>(
    spec: &DataCycleSpec,
    d0: &Dataset,
    prev: &Dataset,
    history: &[Vec<TokenSeq>],
    m: usize,
    rng: &mut R,
) -> Result<Dataset, CycleError> {
    spec.validate(m)?;
    let t = history.len();
    if t == 0 {
        return Err(CycleError::EmptyHistory);
    }
    for (i, s) in history.iter().enumerate() {
        if s.len() != m {
            return Err(CycleError::WrongSampleSize {
                generation: i + 1,
                got: s.len(),
                want: m,
            });
        }
    }
    let latest = &history[t - 1];
    let latest_gen = t as u32;
    match spec.kind {
        CycleKind::FullSynthetic => Ok(Dataset::from_sample(latest.clone(), latest_gen)),
        CycleKind::Balanced => {
            let sources = t + 1;
            let base = m / sources;
            let remainder = m % sources;
            let mut items = Vec::with_capacity(m);
            let mut prov = Vec::with_capacity(m);
            for s in 0..sources {
                let want = base + usize::from(s < remainder);
                if s == 0 {
                    draw_from(d0.items(), d0.provenance(), want, rng, &mut items, &mut prov)?;
                } else {
                    let sample = &history[s - 1];
                    let tags = vec![s as u32; sample.len()];
                    draw_from(sample, &tags, want, rng, &mut items, &mut prov)?;
                }
            }
            Ok(Dataset::new(items, prov))
        }
        CycleKind::Incremental => {
            let k_new = spec.lambda_count(m);
            let k_old = m - k_new;
            let mut items = Vec::with_capacity(m);
            let mut prov = Vec::with_capacity(m);
            draw_from(
                prev.items(),
                prev.provenance(),
                k_old,
                rng,
                &mut items,
                &mut prov,
            )?;
            let tags = vec![latest_gen; latest.len()];
            draw_from(latest, &tags, k_new, rng, &mut items, &mut prov)?;
            Ok(Dataset::new(items, prov))
        }
        CycleKind::Expanding => {
            let k_new = spec.lambda_count(m);
            let mut items = prev.items().to_vec();
            let mut prov = prev.provenance().to_vec();
            let tags = vec![latest_gen; latest.len()];
            draw_from(latest, &tags, k_new, rng, &mut items, &mut prov)?;
            Ok(Dataset::new(items, prov))
        }
    }
}

/// Uniform random partition without replacement. The training side gets
/// `round(train_fraction * n)` items, clamped so both sides stay
/// nonempty; provenance follows the items.
pub fn split<R: Rng + ?Sized>(
    d: &Dataset,
    train_fraction: f64,
    rng: &mut R,
) -> Result<(Dataset, Dataset), CycleError> {
    let n = d.len();
    if n < 2 {
        return Err(CycleError::SplitTooSmall(n));
    }
    assert!(
        train_fraction > 0.0 && train_fraction < 1.0,
        "train_fraction must be in (0, 1)"
    );
    let n_train = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..n {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    let take = |ix: &[usize]| {
        Dataset::new(
            ix.iter().map(|&i| d.items[i].clone()).collect(),
            ix.iter().map(|&i| d.provenance[i]).collect(),
        )
    };
    Ok((take(&idx[..n_train]), take(&idx[n_train..])))
}
