//! Compensated summation.
//!
//! Quadrature sums run over hundreds of thousands of weighted samples whose
//! magnitudes span many orders; naive accumulation loses digits that the
//! acceptance tolerances cannot spare. [`Accumulator`] implements Neumaier's
//! variant of Kahan summation, and [`Accumulator::merge`] combines partial
//! sums so a chunked (possibly parallel) reduction stays within one ulp of
//! the sequential result provided chunks are merged in a fixed order.

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Accumulator::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another accumulator in, carrying both compensation terms.
    #[inline]
    pub fn merge(&mut self, other: Accumulator) {
        self.add(other.sum);
        self.comp += other.comp;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sums a slice by pairwise splitting; error grows like `log2(len)` ulps.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BASE: usize = 32;
    if xs.len() <= BASE {
        let mut acc = Accumulator::new();
        for &x in xs {
            acc.add(x);
        }
        acc.value()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Compensated dot product `sum_i a_i * b_i`.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Accumulator::new();
    for (x, y) in a.iter().zip(b) {
        acc.add(x * y);
    }
    acc.value()
}
