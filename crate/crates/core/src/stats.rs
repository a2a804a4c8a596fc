//! Bernoulli reliability estimates, confidence intervals and nines.

use alloc::format;
use alloc::string::String;
use core::fmt;

use crate::error::{Error, Result};
use crate::sim::SpareCount;

/// Two-sided 97.5 % standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// `-log10(1 - reliability)`.
pub fn nines(reliability: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&reliability) {
        return Err(Error::ReliabilityOutOfRange(reliability));
    }
    Ok(-libm::log10(1.0 - reliability))
}

/// Like [`nines`] but maps perfect reliability to infinity.
pub fn nines_or_infinite(reliability: f64) -> f64 {
    if reliability >= 1.0 {
        f64::INFINITY
    } else {
        nines(reliability.max(0.0)).unwrap_or(0.0)
    }
}

/// Standard normal quantile (Acklam's rational approximation, polished with
/// one Halley step against `erfc`).
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let low = 0.024_25;
    let x = if p < low {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = libm::sqrt(-2.0 * libm::log1p(-p));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = 0.5 * libm::erfc(-x / core::f64::consts::SQRT_2) - p;
    let u = e * libm::sqrt(2.0 * core::f64::consts::PI) * libm::exp(x * x / 2.0);
    x - u / (1.0 + x * u / 2.0)
}

/// Two-sided critical value for a confidence `level` in (0, 1).
pub fn critical_value(level: f64) -> f64 {
    if (level - 0.95).abs() < 1e-15 {
        Z_95
    } else {
        normal_quantile(0.5 + level / 2.0)
    }
}

/// Wilson score interval for a binomial proportion `successes / trials`.
pub fn wilson_interval(successes: u64, trials: u64, level: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = critical_value(level);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = p + z2 / (2.0 * n);
    let half = z * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    let low = ((centre - half) / denom).max(0.0);
    let high = ((centre + half) / denom).min(1.0);
    // the interval must keep the point estimate despite rounding
    (low.min(p), high.max(p))
}

/// Wald (normal approximation) interval, clamped to [0, 1].
pub fn normal_interval(successes: u64, trials: u64, level: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let half = critical_value(level) * libm::sqrt(p * (1.0 - p) / n);
    ((p - half).max(0.0), (p + half).min(1.0))
}

/// Confidence interval on reliability from `losses` out of `runs`, via the
/// Wilson interval on the loss probability.
pub fn confidence_interval(losses: u64, runs: u64, level: f64) -> Result<(f64, f64)> {
    if runs == 0 {
        return Err(Error::InvalidCount("runs must be at least 1".into()));
    }
    if losses > runs {
        return Err(Error::InvalidCount(format!("{losses} losses exceed {runs} runs")));
    }
    let (p_low, p_high) = wilson_interval(losses, runs, level);
    Ok((1.0 - p_high, 1.0 - p_low))
}

/// Aggregated outcome of a campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityEstimate {
    pub runs: u64,
    pub losses: u64,
    pub exhaustions: u64,
    /// Point estimate `1 - losses / runs`.
    pub reliability: f64,
    /// 95 % Wilson interval on reliability.
    pub ci: (f64, f64),
    /// `ci` in nines; the upper end is infinite when no loss was observed.
    pub nines_ci: (f64, f64),
    /// Normal-approximation interval on reliability, for comparison.
    pub normal_ci: (f64, f64),
    pub mean_peak_concurrency: f64,
}

impl ReliabilityEstimate {
    pub fn from_counts(runs: u64, losses: u64, exhaustions: u64, peak_sum: u64) -> Result<Self> {
        let ci = confidence_interval(losses, runs, 0.95)?;
        let (n_low, n_high) = normal_interval(losses, runs, 0.95);
        Ok(ReliabilityEstimate {
            runs,
            losses,
            exhaustions,
            reliability: 1.0 - losses as f64 / runs as f64,
            ci,
            nines_ci: (nines_or_infinite(ci.0), nines_or_infinite(ci.1)),
            normal_ci: (1.0 - n_high, 1.0 - n_low),
            mean_peak_concurrency: peak_sum as f64 / runs as f64,
        })
    }

    pub fn loss_probability(&self) -> f64 {
        self.losses as f64 / self.runs as f64
    }

    /// Binomial standard error of the loss probability.
    pub fn std_error(&self) -> f64 {
        let p = self.loss_probability();
        libm::sqrt(p * (1.0 - p) / self.runs as f64)
    }

    /// Point estimate in nines (infinite with no losses).
    pub fn nines(&self) -> f64 {
        nines_or_infinite(self.reliability)
    }

    /// Whether the nines interval intersects `[low, high]`.
    pub fn nines_overlap(&self, low: f64, high: f64) -> bool {
        self.nines_ci.0 <= high && self.nines_ci.1 >= low
    }
}

/// Capacity share not holding user data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Overhead {
    Fraction(f64),
    /// Unlimited spares.
    Unbounded,
}

impl fmt::Display for Overhead {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Overhead::Fraction(x) => write!(f, "{:.2}%", 100.0 * x),
            Overhead::Unbounded => f.write_str("∞"),
        }
    }
}

/// `(parity + spares) / (data + parity + spares)`.
pub fn space_overhead(data: u64, parity: u64, spares: SpareCount) -> Result<Overhead> {
    if data == 0 {
        return Err(Error::InvalidCount("an array needs at least one data disk".into()));
    }
    Ok(match spares {
        SpareCount::Unlimited => Overhead::Unbounded,
        SpareCount::Finite(s) => Overhead::Fraction((parity + s) as f64 / (data + parity + s) as f64),
    })
}

/// Two-decimal rendering used in tables; infinity prints as "inf".
pub fn format_nines(x: f64) -> String {
    if x.is_infinite() {
        String::from("inf")
    } else {
        format!("{x:.2}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn nines_values() {
        assert!((nines(0.999).unwrap() - 3.0).abs() < 1e-12);
        assert!((nines(0.99999).unwrap() - 5.0).abs() < 1e-9);
        assert_eq!(nines(0.0).unwrap(), 0.0);
        assert!(nines(1.0).is_err());
        assert!(nines(-0.1).is_err());
        assert_eq!(nines_or_infinite(1.0), f64::INFINITY);
    }

    #[test]
    fn quantile_matches_table_values() {
        assert!((normal_quantile(0.975) - Z_95).abs() < 1e-12);
        assert!((normal_quantile(0.5)).abs() < 1e-15);
        assert!((normal_quantile(0.995) - 2.575_829_303_548_901).abs() < 1e-12);
        assert!((normal_quantile(1e-6) + 4.753_424_308_822_899).abs() < 1e-9);
    }

    #[test]
    fn zero_losses() {
        let (low, high) = confidence_interval(0, 1_000_000, 0.95).unwrap();
        assert_eq!(high, 1.0);
        let z2 = Z_95 * Z_95;
        assert!((1.0 - low - z2 / (1e6 + z2)).abs() < 1e-15);
    }

    #[test]
    fn all_losses() {
        let (low, high) = confidence_interval(500, 500, 0.95).unwrap();
        assert_eq!(low, 0.0);
        assert!(high < 0.01);
    }

    #[test]
    fn count_validation() {
        assert!(confidence_interval(1, 0, 0.95).is_err());
        assert!(confidence_interval(5, 4, 0.95).is_err());
    }

    #[test]
    fn overhead_cells() {
        let o = space_overhead(45, 10, SpareCount::Finite(33)).unwrap();
        assert_eq!(o.to_string(), "48.86%");
        let o = space_overhead(21, 7, SpareCount::Finite(19)).unwrap();
        assert_eq!(o.to_string(), "55.32%");
        assert_eq!(space_overhead(9, 0, SpareCount::Finite(0)).unwrap(), Overhead::Fraction(0.0));
        assert_eq!(space_overhead(66, 12, SpareCount::Unlimited).unwrap().to_string(), "∞");
        assert!(space_overhead(0, 1, SpareCount::Finite(1)).is_err());
    }

    #[test]
    fn estimate_fields() {
        let e = ReliabilityEstimate::from_counts(1000, 10, 2, 1500).unwrap();
        assert!((e.reliability - 0.99).abs() < 1e-15);
        assert!(e.ci.0 <= e.reliability && e.reliability <= e.ci.1);
        assert!(e.nines_ci.0 <= e.nines_ci.1);
        assert_eq!(e.mean_peak_concurrency, 1.5);
        let none = ReliabilityEstimate::from_counts(10, 0, 0, 0).unwrap();
        assert_eq!(none.nines_ci.1, f64::INFINITY);
        assert_eq!(format_nines(none.nines()), "inf");
    }
}
