use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Histogram on uniform bins with additive smoothing.
///
/// Values outside the edges are counted in (and looked up from) the nearest
/// edge bin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    bin_edges: Vec<f64>,
    counts: Vec<u64>,
    pseudo_count: f64,
    total: u64,
}

/// `n_bins + 1` uniform edges from `lo` to `hi`.
pub fn uniform_edges(lo: f64, hi: f64, n_bins: usize) -> Result<Vec<f64>> {
    if n_bins == 0 {
        return Err(Error::invalid("n_bins must be >= 1"));
    }
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::invalid(format!("bin range must satisfy lo < hi, got [{lo}, {hi}]")));
    }
    let width = (hi - lo) / n_bins as f64;
    let mut edges: Vec<f64> = (0..n_bins).map(|i| lo + width * i as f64).collect();
    edges.push(hi);
    Ok(edges)
}

/// Bin of `value` among uniform `edges`; see [`EmpiricalDistribution::bin_index`].
pub(crate) fn bin_of(edges: &[f64], value: f64) -> usize {
    let n = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[n]);
    if !(value > lo) {
        return 0;
    }
    if value >= hi {
        return n - 1;
    }
    let mut b = ((((value - lo) / (hi - lo)) * n as f64) as usize).min(n - 1);
    // Settle rounding at interior edges against the stored edges.
    while b > 0 && value < edges[b] {
        b -= 1;
    }
    while b + 1 < n && value >= edges[b + 1] {
        b += 1;
    }
    b
}

impl EmpiricalDistribution {
    /// Distribution on uniform edges over `[lo, hi]` from explicit bin counts.
    pub fn from_counts(lo: f64, hi: f64, counts: Vec<u64>, pseudo_count: f64) -> Result<Self> {
        let edges = uniform_edges(lo, hi, counts.len())?;
        let d = Self::with_edges(edges, counts, pseudo_count)?;
        d.check_mass()?;
        Ok(d)
    }

    /// Histogram of `values` over `edges`.
    pub fn from_values(edges: Vec<f64>, values: &[f64], pseudo_count: f64) -> Result<Self> {
        let n = edges.len().saturating_sub(1);
        let mut d = Self::with_edges(edges, vec![0; n], pseudo_count)?;
        for &v in values {
            let b = d.bin_index(v);
            d.counts[b] += 1;
        }
        d.total = values.len() as u64;
        d.check_mass()?;
        Ok(d)
    }

    fn with_edges(bin_edges: Vec<f64>, counts: Vec<u64>, pseudo_count: f64) -> Result<Self> {
        let d = EmpiricalDistribution {
            total: counts.iter().sum(),
            bin_edges,
            counts,
            pseudo_count,
        };
        d.validate_structure()?;
        Ok(d)
    }

    fn check_mass(&self) -> Result<()> {
        if self.total == 0 && self.pseudo_count == 0.0 {
            return Err(Error::EmptyInput("histogram has no counts and no smoothing"));
        }
        Ok(())
    }

    /// Checks shape, edges and mass, e.g. after deserializing.
    pub fn validate(&self) -> Result<()> {
        self.validate_structure()?;
        self.check_mass()
    }

    fn validate_structure(&self) -> Result<()> {
        let n = self.counts.len();
        if n == 0 || self.bin_edges.len() != n + 1 {
            return Err(Error::invalid(format!(
                "{} edges do not bound {} bins",
                self.bin_edges.len(),
                n
            )));
        }
        if self.bin_edges.windows(2).any(|w| !(w[1] > w[0])) || self.bin_edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("bin edges must be finite and strictly increasing"));
        }
        if !(self.pseudo_count >= 0.0 && self.pseudo_count.is_finite()) {
            return Err(Error::invalid("pseudo_count must be finite and >= 0"));
        }
        if self.total != self.counts.iter().sum::<u64>() {
            return Err(Error::invalid("total does not match the bin counts"));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_edges(&self) -> &[f64] {
        &self.bin_edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn pseudo_count(&self) -> f64 {
        self.pseudo_count
    }

    pub fn same_edges(&self, other: &EmpiricalDistribution) -> bool {
        self.bin_edges == other.bin_edges
    }

    /// Bin holding `value`; bins are half-open except the last, and
    /// out-of-range values go to the nearest edge bin.
    pub fn bin_index(&self, value: f64) -> usize {
        bin_of(&self.bin_edges, value)
    }

    /// `(count + pseudo) / (total + n_bins * pseudo)`.
    pub fn probability(&self, bin: usize) -> f64 {
        let denom = self.total as f64 + self.n_bins() as f64 * self.pseudo_count;
        (self.counts[bin] as f64 + self.pseudo_count) / denom
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.n_bins()).map(|b| self.probability(b)).collect()
    }
}
