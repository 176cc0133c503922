//! Translation-invariant valuations on the line: `φ = c0·χ + c1·vol`.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Valuation1 {
    pub c0: f64,
    pub c1: f64,
}

impl Valuation1 {
    pub fn new(c0: f64, c1: f64) -> Self {
        Self { c0, c1 }
    }

    pub fn chi() -> Self {
        Self::new(1.0, 0.0)
    }

    pub fn vol() -> Self {
        Self::new(0.0, 1.0)
    }

    /// `K ↦ |K + A|` for an interval `A` of length `len`.
    pub fn from_interval(len: f64) -> Self {
        Self::new(len, 1.0)
    }

    /// Value on a (nonempty) interval of length `len`.
    pub fn eval(&self, len: f64) -> f64 {
        self.c0 + self.c1 * len
    }

    /// Product with unit `χ` and `vol·vol = 0`.
    pub fn product(&self, o: &Self) -> Self {
        Self::new(self.c0 * o.c0, self.c0 * o.c1 + self.c1 * o.c0)
    }

    /// Convolution with unit `vol` and `χ∗χ = 0`.
    pub fn convolve(&self, o: &Self) -> Self {
        Self::new(self.c0 * o.c1 + self.c1 * o.c0, self.c1 * o.c1)
    }

    /// Swaps `χ` and `vol`.
    pub fn fourier(&self) -> Self {
        Self::new(self.c1, self.c0)
    }

    pub fn max_diff(&self, o: &Self) -> f64 {
        (self.c0 - o.c0).abs().max((self.c1 - o.c1).abs())
    }
}
