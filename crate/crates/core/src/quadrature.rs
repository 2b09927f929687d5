//! Adaptive Gauss–Kronrod (10/21 point) quadrature.
//!
//! Global subdivision: the interval with the largest local error estimate is
//! bisected until the summed error meets `max(abs_tol, rel_tol * |I|)`.
//! Nodes are interior only, so integrands may be singular at the endpoints as
//! long as the singularity is integrable.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_980_221,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

impl QuadOptions {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half.abs();
    let value = kronrod * half;
    res_abs *= scale;
    res_asc *= scale;

    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment { a, b, value, error }
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integration bounds must be finite"));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let first = kronrod21(&f, a, b);
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::Quadrature {
                estimate: total,
                error: total_err,
            });
        }
        if total_err <= target {
            return Ok(QuadResult {
                value: total,
                error: total_err,
                intervals: heap.len(),
            });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature {
                estimate: total,
                error: total_err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split in floating point.
            return Err(Error::Quadrature {
                estimate: total,
                error: total_err,
            });
        }
        let left = kronrod21(&f, worst.a, mid);
        let right = kronrod21(&f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if heap.len() % 64 == 0 {
            // Resum to stop drift from the incremental updates.
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
}

/// Integrates `f` over `[a, ∞)` through the map `v = a + scale * t / (1 - t)`.
///
/// `scale` should be of the order of the integrand's decay length; it only
/// affects efficiency.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    scale: f64,
    opts: QuadOptions,
) -> Result<QuadResult> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::domain(
            "scale of the semi-infinite map must be positive",
        ));
    }
    let g = |t: f64| {
        let one_minus = 1.0 - t;
        let v = a + scale * t / one_minus;
        let jac = scale / (one_minus * one_minus);
        let y = f(v);
        if y == 0.0 {
            0.0
        } else {
            y * jac
        }
    };
    integrate(g, 0.0, 1.0, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        // Kronrod 21 integrates degree 31 exactly.
        for k in [0_i32, 1, 5, 12, 20, 31] {
            let r = integrate(|x| x.powi(k), 0.0, 1.0, QuadOptions::default()).unwrap();
            assert!((r.value - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let r = integrate(|x| x.powf(-0.5), 0.0, 1.0, QuadOptions::with_abs_tol(1e-10)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9, "{r:?}");
        // ∫_0^1 ln x dx = -1
        let r = integrate(|x| x.ln(), 0.0, 1.0, QuadOptions::with_abs_tol(1e-11)).unwrap();
        assert!((r.value + 1.0).abs() < 1e-10);
    }

    #[test]
    fn semi_infinite() {
        let r = integrate_to_infinity(|v| (-v).exp(), 0.0, 1.0, QuadOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        // Slow decay e^{-0.1 v}
        let r =
            integrate_to_infinity(|v| (-0.1 * v).exp(), 0.0, 10.0, QuadOptions::default()).unwrap();
        assert!((r.value - 10.0).abs() < 1e-9);
    }

    #[test]
    fn reversed_and_empty_bounds() {
        let r = integrate(|x| x, 1.0, 0.0, QuadOptions::default()).unwrap();
        assert!((r.value + 0.5).abs() < 1e-15);
        assert_eq!(
            integrate(|x| x, 2.0, 2.0, QuadOptions::default())
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn nonintegrable_reports_failure() {
        let err = integrate(|x| 1.0 / x, 0.0, 1.0, QuadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
