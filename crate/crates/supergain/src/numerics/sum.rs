//! Compensated (Kahan–Neumaier) accumulation.
//!
//! Spectra evaluated near deep nulls cancel almost completely; a naive sum
//! loses most of the mantissa there. Every summation in this crate that can
//! exceed a few dozen terms goes through [`NeumaierSum`].

/// Running Kahan–Neumaier accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Compensated sum of an iterator of f64 terms.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut acc = NeumaierSum::new();
    for t in terms {
        acc.add(t);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancellation() {
        // 1 + 1e-16 repeated: naive summation drops every small term.
        let n = 10_000;
        let mut naive = 1.0f64;
        let mut acc = NeumaierSum::new();
        acc.add(1.0);
        for _ in 0..n {
            naive += 1e-16;
            acc.add(1e-16);
        }
        let exact = 1.0 + n as f64 * 1e-16;
        assert_eq!(naive, 1.0);
        assert!((acc.value() - exact).abs() < 1e-18);
    }

    #[test]
    fn alternating_series() {
        // sum of +x, -x pairs in the worst interleaving comes back to zero
        let xs: Vec<f64> = (0..1000).map(|i| 10f64.powi((i % 30) as i32 - 15)).collect();
        let mut terms = Vec::new();
        for &x in &xs {
            terms.push(x);
        }
        for &x in &xs {
            terms.push(-x);
        }
        assert_eq!(neumaier_sum(terms), 0.0);
    }
}
