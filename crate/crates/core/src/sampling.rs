use rand::Rng;

/// Inverse-CDF sampler over indices `0..len` of a probability vector.
#[derive(Debug, Clone)]
pub(crate) struct CumulativeSampler {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl CumulativeSampler {
    /// `weights` must be non-negative with at least one positive entry.
    pub(crate) fn new(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        let last_positive = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
        Self {
            cumulative,
            last_positive,
        }
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        // zero-weight indices never satisfy the strict comparison first
        match self.cumulative.iter().position(|&c| u < c) {
            Some(i) if i <= self.last_positive => i,
            _ => self.last_positive,
        }
    }
}
