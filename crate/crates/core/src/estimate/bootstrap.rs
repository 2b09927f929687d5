//! Moving-block bootstrap for serially dependent series.
//!
//! A resample is a list of blocks borrowed from the original series. Blocks
//! are kept as separate segments so that statistics built from transitions
//! never count the artificial jump between two concatenated blocks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapOptions {
    pub resamples: usize,
    /// Defaults to ⌈n^{1/3}⌉.
    pub block_length: Option<usize>,
    pub seed: u64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self {
            resamples: 500,
            block_length: None,
            seed: 0,
        }
    }
}

pub fn default_block_length(n: usize) -> usize {
    // Integer ⌈n^{1/3}⌉, immune to cbrt rounding at perfect cubes.
    let mut b = (n as f64).cbrt().round() as usize;
    while b * b * b < n {
        b += 1;
    }
    while b > 1 && (b - 1) * (b - 1) * (b - 1) >= n {
        b -= 1;
    }
    b.max(1)
}

/// Block start positions for resample `index`; reproducible from
/// `(seed, index)` alone.
pub fn block_starts(n: usize, block: usize, seed: u64, index: u64) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let block = block.clamp(1, n.max(1));
    let count = n.div_ceil(block);
    let last = n - block;
    (0..count).map(|_| rng.gen_range(0..=last)).collect()
}

/// Segments of one resample of total length `values.len()`.
pub fn resample<'a>(values: &'a [f64], block: usize, starts: &[usize]) -> Vec<&'a [f64]> {
    let n = values.len();
    let mut left = n;
    let mut out = Vec::with_capacity(starts.len());
    for &s in starts {
        if left == 0 {
            break;
        }
        let len = block.min(left);
        out.push(&values[s..s + len]);
        left -= len;
    }
    out
}

/// Evaluates `stat` on every resample, in parallel; the output order
/// follows the resample index.
pub fn run<T, F>(values: &[f64], opts: &BootstrapOptions, stat: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[&[f64]]) -> T + Sync,
{
    let n = values.len();
    let block = opts.block_length.unwrap_or_else(|| default_block_length(n));
    (0..opts.resamples as u64)
        .into_par_iter()
        .map(|i| {
            let starts = block_starts(n, block, opts.seed, i);
            let segments = resample(values, block, &starts);
            stat(&segments)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_length_rule() {
        assert_eq!(default_block_length(3888), 16);
        assert_eq!(default_block_length(1000), 10);
        assert_eq!(default_block_length(1), 1);
    }

    #[test]
    fn resample_has_original_length() {
        let values: Vec<f64> = (0..103).map(|i| i as f64).collect();
        let starts = block_starts(103, 10, 5, 0);
        assert_eq!(starts.len(), 11);
        let segs = resample(&values, 10, &starts);
        assert_eq!(segs.iter().map(|s| s.len()).sum::<usize>(), 103);
        for s in &segs {
            for w in s.windows(2) {
                assert_eq!(w[1] - w[0], 1.0);
            }
        }
    }

    #[test]
    fn resamples_are_reproducible_and_distinct() {
        assert_eq!(block_starts(500, 8, 1, 3), block_starts(500, 8, 1, 3));
        assert_ne!(block_starts(500, 8, 1, 3), block_starts(500, 8, 1, 4));
        assert_ne!(block_starts(500, 8, 1, 3), block_starts(500, 8, 2, 3));
    }

    #[test]
    fn mean_standard_error_of_iid_data() {
        use rand::distributions::Standard;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let values: Vec<f64> = (&mut rng).sample_iter(Standard).take(4000).collect();
        let opts = BootstrapOptions {
            resamples: 400,
            block_length: None,
            seed: 2,
        };
        let means = run(&values, &opts, |segs| {
            let n: usize = segs.iter().map(|s| s.len()).sum();
            segs.iter().flat_map(|s| s.iter()).sum::<f64>() / n as f64
        });
        let se = crate::summary::std_dev(&means);
        // Uniform(0,1): sd / √n = 0.2887 / 63.2
        assert!(
            (se / (0.288_675 / 4000f64.sqrt()) - 1.0).abs() < 0.15,
            "{se}"
        );
    }
}
