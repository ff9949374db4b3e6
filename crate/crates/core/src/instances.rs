//! Problem-instance generators: hidden mean-reward vectors and the pre-drawn
//! 0/1 reward tables all experiments on one vector share.
//!
//! A [`MeanRewardVector`] is one draw of per-arm Bernoulli means μ(a). A
//! [`RealizationTable`] fixes every reward up front: entry (r, a) is the
//! reward arm `a` would pay in row `r`. Warm-start round t reads row t and
//! game round t reads row `warm_budget + t` (both zero-based here), so two
//! firms — or two whole experiments — consulting the same table see identical
//! rewards for identical (row, arm). Tables are generated row-major from a
//! single stream, which makes a shorter table a bit-exact prefix of a longer
//! one drawn from the same stream.

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};

/// The three instance families, with their distribution parameters exposed.
/// The associated constructors give the standard parameterizations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MabInstanceKind {
    /// One uniformly placed arm at `needle_mean`, the rest at `hay_mean`.
    NeedleInHaystack { needle_mean: f64, hay_mean: f64 },
    /// Each mean drawn uniformly from [`low`, `high`).
    Uniform { low: f64, high: f64 },
    /// Each mean drawn from Beta(shape_alpha, shape_beta); mass concentrates
    /// near 0 and 1 when the shapes are below 1.
    HeavyTail { shape_alpha: f64, shape_beta: f64 },
}

impl MabInstanceKind {
    pub fn needle_in_haystack() -> Self {
        Self::NeedleInHaystack { needle_mean: 0.7, hay_mean: 0.5 }
    }

    pub fn uniform() -> Self {
        Self::Uniform { low: 0.25, high: 0.75 }
    }

    pub fn heavy_tail() -> Self {
        Self::HeavyTail { shape_alpha: 0.6, shape_beta: 0.6 }
    }

    /// The standard three instances in report order.
    pub fn all_standard() -> Vec<Self> {
        vec![Self::heavy_tail(), Self::needle_in_haystack(), Self::uniform()]
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::NeedleInHaystack { .. } => "NIH",
            Self::Uniform { .. } => "Uniform",
            Self::HeavyTail { .. } => "HeavyTail",
        }
    }

    /// Parses an instance label (standard parameters).
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nih" | "needle" | "needleinhaystack" | "needle_in_haystack" => {
                Ok(Self::needle_in_haystack())
            }
            "uniform" => Ok(Self::uniform()),
            "heavytail" | "heavy_tail" | "ht" => Ok(Self::heavy_tail()),
            other => Err(Error::InvalidArgument(format!(
                "unknown instance '{other}' (expected NIH, Uniform, or HeavyTail)"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::NeedleInHaystack { needle_mean, hay_mean } => {
                (0.0..=1.0).contains(&needle_mean) && (0.0..=1.0).contains(&hay_mean)
            }
            Self::Uniform { low, high } => {
                (0.0..=1.0).contains(&low) && (0.0..=1.0).contains(&high) && low <= high
            }
            Self::HeavyTail { shape_alpha, shape_beta } => {
                shape_alpha > 0.0 && shape_beta > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("bad instance parameters: {self:?}")))
        }
    }

    /// Identifying fields folded into rng stream ids, so instances with
    /// different parameters draw different vectors.
    pub fn seed_parts(&self) -> [u64; 3] {
        match *self {
            Self::NeedleInHaystack { needle_mean, hay_mean } => {
                [0, needle_mean.to_bits(), hay_mean.to_bits()]
            }
            Self::Uniform { low, high } => [1, low.to_bits(), high.to_bits()],
            Self::HeavyTail { shape_alpha, shape_beta } => {
                [2, shape_alpha.to_bits(), shape_beta.to_bits()]
            }
        }
    }
}

/// Hidden per-arm Bernoulli means for one problem draw.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanRewardVector {
    mu: Vec<f64>,
}

impl MeanRewardVector {
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::InvalidConfig("mean vector must not be empty".into()));
        }
        if mu.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(Error::InvalidConfig("means must lie in [0,1]".into()));
        }
        Ok(Self { mu })
    }

    pub fn k(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn best_mean(&self) -> f64 {
        self.mu.iter().copied().fold(f64::MIN, f64::max)
    }
}

/// One mean-reward vector drawn per the instance kind.
pub fn draw_mrv<R: Rng + ?Sized>(
    kind: &MabInstanceKind,
    k: usize,
    rng: &mut R,
) -> Result<MeanRewardVector> {
    kind.validate()?;
    if k == 0 {
        return Err(Error::InvalidConfig("arm count must be at least 1".into()));
    }
    let mu = match *kind {
        MabInstanceKind::NeedleInHaystack { needle_mean, hay_mean } => {
            let mut mu = vec![hay_mean; k];
            mu[rng.random_range(0..k)] = needle_mean;
            mu
        }
        MabInstanceKind::Uniform { low, high } => (0..k)
            .map(|_| low + (high - low) * rng.random::<f64>())
            .collect(),
        MabInstanceKind::HeavyTail { shape_alpha, shape_beta } => {
            let dist = Beta::new(shape_alpha, shape_beta)
                .expect("validated positive shapes");
            (0..k).map(|_| dist.sample(rng).clamp(0.0, 1.0)).collect()
        }
    };
    MeanRewardVector::new(mu)
}

/// Pre-drawn 0/1 rewards, bit-packed row-major: `rows` rows by `k` arms.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizationTable {
    k: usize,
    rows: usize,
    bits: Vec<u64>,
}

/// Draws entry (r, a) ~ Bernoulli(μ(a)) independently, row-major, consuming
/// exactly one stream value per entry. Deterministic given the rng state.
pub fn build_realization_table<R: Rng + ?Sized>(
    mrv: &MeanRewardVector,
    rows: usize,
    rng: &mut R,
) -> Result<RealizationTable> {
    if rows == 0 {
        return Err(Error::InvalidArgument("table must have at least one row".into()));
    }
    let k = mrv.k();
    let total = rows * k;
    let mut bits = vec![0u64; total.div_ceil(64)];
    let mut index = 0usize;
    for _row in 0..rows {
        for &mean in mrv.mu() {
            if rng.random::<f64>() < mean {
                bits[index / 64] |= 1u64 << (index % 64);
            }
            index += 1;
        }
    }
    Ok(RealizationTable { k, rows, bits })
}

impl RealizationTable {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Checked lookup of the pre-drawn reward at (row, arm), zero-based.
    pub fn reward_at(&self, row: usize, arm: usize) -> Result<u8> {
        if row >= self.rows || arm >= self.k {
            return Err(Error::InvalidArgument(format!(
                "lookup ({row},{arm}) outside a {}x{} table",
                self.rows, self.k
            )));
        }
        Ok(self.get(row, arm))
    }

    /// Unchecked hot-path lookup; callers validate row budgets up front.
    #[inline]
    pub(crate) fn get(&self, row: usize, arm: usize) -> u8 {
        debug_assert!(row < self.rows && arm < self.k);
        let index = row * self.k + arm;
        ((self.bits[index / 64] >> (index % 64)) & 1) as u8
    }
}
