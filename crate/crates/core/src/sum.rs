//! Compensated accumulation and order-fixed parallel reductions.
//!
//! Every long sum in the crate goes through [`CompensatedSum`]. Parallel sums
//! split their index range into chunks whose boundaries depend only on the
//! range and the chunk length, never on the number of worker threads, and the
//! per-chunk partials are combined sequentially in chunk order. The result is
//! therefore bit-identical for any thread count.

use num_complex::Complex64;
use rayon::prelude::*;

/// Neumaier's variant of Kahan summation for a single `f64` lane.
#[derive(Debug, Clone, Copy, Default)]
struct Lane {
    sum: f64,
    comp: f64,
}

impl Lane {
    #[inline(always)]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline(always)]
    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated accumulator for complex values.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    re: Lane,
    im: Lane,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline(always)]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline(always)]
    pub fn add_real(&mut self, x: f64) {
        self.re.add(x);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl FromIterator<Complex64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for z in iter {
            acc.add(z);
        }
        acc
    }
}

/// Compensated sum of an iterator of complex values.
pub fn csum<I: IntoIterator<Item = Complex64>>(iter: I) -> Complex64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Compensated sum of an iterator of reals.
pub fn rsum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut lane = Lane::default();
    for x in iter {
        lane.add(x);
    }
    lane.value()
}

/// Sums `chunk(lo, hi)` over fixed chunks `[lo, hi)` covering `start..end`.
///
/// `chunk` must itself be deterministic; the reduction order of the partial
/// results is the ascending chunk order.
pub fn chunked_sum<F>(start: u64, end: u64, chunk_len: u64, chunk: F) -> Complex64
where
    F: Fn(u64, u64) -> Complex64 + Sync,
{
    assert!(chunk_len > 0);
    if end <= start {
        return Complex64::new(0.0, 0.0);
    }
    let n_chunks = (end - start).div_ceil(chunk_len);
    let partials: Vec<Complex64> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = start + c * chunk_len;
            let hi = (lo + chunk_len).min(end);
            chunk(lo, hi)
        })
        .collect();
    csum(partials)
}

/// Maps `f` over `items` in parallel, preserving order.
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_recovers_small_terms() {
        let mut acc = CompensatedSum::new();
        acc.add(Complex64::new(1.0, 0.0));
        for _ in 0..1_000_000 {
            acc.add(Complex64::new(1e-16, 1e-16));
        }
        let v = acc.value();
        assert!((v.re - (1.0 + 1e-10)).abs() < 1e-15);
        assert!((v.im - 1e-10).abs() < 1e-20);
    }

    #[test]
    fn chunked_sum_is_independent_of_pool_size() {
        let f = |lo: u64, hi: u64| csum((lo..hi).map(|n| Complex64::new(1.0 / n as f64, (n as f64).sin())));
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| chunked_sum(1, 200_001, 4096, f))
        };
        let a = run(1);
        let b = run(3);
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }

    #[test]
    fn empty_range_sums_to_zero() {
        assert_eq!(chunked_sum(5, 5, 10, |_, _| Complex64::new(1.0, 0.0)), Complex64::new(0.0, 0.0));
    }
}
