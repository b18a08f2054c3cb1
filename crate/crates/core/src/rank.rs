//! Fractional ranks and Spearman's rank correlation.

use crate::error::{Error, Result};

/// Ascending ranks starting at 1; tied values share the mean of the ranks they span.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector(Vec<f64>);

impl RankVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

pub fn rank_vector(values: &[f64]) -> Result<RankVector> {
    if values.is_empty() {
        return Err(Error::InvalidInput("cannot rank an empty sample".into()));
    }
    if let Some(i) = values.iter().position(|v| v.is_nan()) {
        return Err(Error::InvalidInput(format!("NaN at position {i}")));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        // == rather than total_cmp so that -0.0 and 0.0 tie
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    Ok(RankVector(ranks))
}

/// Spearman's rho: Pearson correlation of the two rank vectors.
///
/// A constant sample has zero rank variance, for which rho is undefined;
/// that case is reported as [`Error::Degenerate`] rather than as zero.
pub fn spearman_rho(u: &[f64], e: &[f64]) -> Result<f64> {
    if u.len() != e.len() {
        return Err(Error::ShapeMismatch(format!(
            "samples of length {} and {}",
            u.len(),
            e.len()
        )));
    }
    if u.len() < 2 {
        return Err(Error::Degenerate(format!(
            "rank correlation needs at least 2 pairs, got {}",
            u.len()
        )));
    }
    if let Some(v) = [u, e].iter().flat_map(|s| s.iter()).find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite sample value {v}")));
    }
    let ru = rank_vector(u)?;
    let re = rank_vector(e)?;
    pearson_of_ranks(ru.as_slice(), re.as_slice())
}

fn pearson_of_ranks(a: &[f64], b: &[f64]) -> Result<f64> {
    let m = a.len() as f64;
    // ranks always average to (M+1)/2; deviations are exact half-integers
    let mean = (m + 1.0) / 2.0;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - mean, y - mean);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::Degenerate("constant sample has no rank variance".into()));
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}
