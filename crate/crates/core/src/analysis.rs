//! Estimators, entropy and a small randomness battery.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::protocols::RoundRecord;

/// Significance level of every battery test.
pub const BATTERY_ALPHA: f64 = 0.01;
pub const BATTERY_MIN_BITS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("no records satisfy the conditioning predicate")]
    EmptyCondition,
    #[error("cell {0} has no records")]
    MissingCell(String),
    #[error("record {0} is not a check-round record")]
    BadRecord(u64),
    #[error("need at least {needed} bits, got {got}")]
    TooFewBits { needed: usize, got: usize },
    #[error("confidence must lie in (0, 1), got {0}")]
    BadConfidence(f64),
}

pub type AnalysisResult<T> = Result<T, AnalysisError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub point: f64,
    pub count: u64,
    pub trials: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
}

impl Estimate {
    pub fn contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

fn check_confidence(confidence: f64) -> AnalysisResult<()> {
    if confidence > 0.0 && confidence < 1.0 {
        Ok(())
    } else {
        Err(AnalysisError::BadConfidence(confidence))
    }
}

/// Hoeffding half-width `sqrt(ln(2/delta) / (2n))` for `n` samples in [0, 1].
pub fn hoeffding_radius(n: u64, delta: f64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}

/// Wilson score interval for `count` successes out of `trials`.
pub fn wilson(count: u64, trials: u64, confidence: f64) -> AnalysisResult<Estimate> {
    check_confidence(confidence)?;
    if trials == 0 {
        return Err(AnalysisError::EmptyCondition);
    }
    let z = Normal::standard().inverse_cdf(0.5 + confidence / 2.0);
    let n = trials as f64;
    let p = count as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Ok(Estimate {
        point: p,
        count,
        trials,
        // the clamp keeps point inside the interval against rounding at p = 0 or 1
        ci_low: (centre - half).max(0.0).min(p),
        ci_high: (centre + half).min(1.0).max(p),
        confidence,
    })
}

/// `#(event and condition) / #(condition)` with a Wilson interval.
pub fn estimate_conditional(
    records: &[RoundRecord],
    event: impl Fn(&RoundRecord) -> bool,
    condition: impl Fn(&RoundRecord) -> bool,
    confidence: f64,
) -> AnalysisResult<Estimate> {
    check_confidence(confidence)?;
    let (mut count, mut trials) = (0, 0);
    for r in records.iter().filter(|r| condition(r)) {
        trials += 1;
        if event(r) {
            count += 1;
        }
    }
    wilson(count, trials, confidence)
}

/// The cell-averaged self-test statistic over check records
/// `(x0, x1, y)` with `y` in {0, 1}: the mean over the eight cells of the
/// empirical `Pr[b = x_y]`. The interval combines per-cell Hoeffding bounds at
/// failure probability `delta`; `count` and `trials` are pooled.
pub fn statistic_a(records: &[RoundRecord], delta: f64) -> AnalysisResult<Estimate> {
    check_confidence(1.0 - delta)?;
    let mut wins = [0u64; 8];
    let mut totals = [0u64; 8];
    for r in records {
        let [x0, x1, y] = r.inputs;
        if y > 1 || x0 > 1 || x1 > 1 {
            return Err(AnalysisError::BadRecord(r.round_index));
        }
        let cell = (4 * x0 + 2 * x1 + y) as usize;
        totals[cell] += 1;
        if r.b == r.inputs[y as usize] {
            wins[cell] += 1;
        }
    }
    if let Some(c) = totals.iter().position(|&n| n == 0) {
        return Err(AnalysisError::MissingCell(format!("x0x1y={:03b}", c)));
    }
    let point = wins.iter().zip(&totals).map(|(&w, &n)| w as f64 / n as f64).sum::<f64>() / 8.0;
    let spread: f64 = totals.iter().map(|&n| 1.0 / (64.0 * n as f64)).sum();
    let eps = ((2.0 / delta).ln() / 2.0 * spread).sqrt();
    Ok(Estimate {
        point,
        count: wins.iter().sum(),
        trials: totals.iter().sum(),
        ci_low: (point - eps).max(0.0),
        ci_high: (point + eps).min(1.0),
        confidence: 1.0 - delta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    /// Bits of entropy per output bit, from the empirical frequencies.
    pub shannon: f64,
    pub min_entropy: f64,
    pub n_bits: usize,
    pub zero_fraction: f64,
}

pub fn entropy_report(bits: &[u8]) -> AnalysisResult<EntropyReport> {
    if bits.is_empty() {
        return Err(AnalysisError::TooFewBits { needed: 1, got: 0 });
    }
    let zeros = bits.iter().filter(|&&b| b == 0).count();
    let p0 = zeros as f64 / bits.len() as f64;
    let p1 = 1.0 - p0;
    let h = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    let shannon = h(p0) + h(p1);
    let min_entropy = -p0.max(p1).log2();
    Ok(EntropyReport {
        shannon,
        // -log2(max) never exceeds the Shannon value, but a rounding
        // difference near p = 1/2 must not let it
        min_entropy: min_entropy.min(shannon).max(0.0),
        n_bits: bits.len(),
        zero_fraction: p0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryTest {
    pub name: &'static str,
    pub statistic: f64,
    pub p_value: f64,
    pub passed: bool,
}

fn battery_test(name: &'static str, statistic: f64, p_value: f64) -> BatteryTest {
    BatteryTest {
        name,
        statistic,
        p_value,
        passed: p_value >= BATTERY_ALPHA,
    }
}

fn monobit(bits: &[u8]) -> BatteryTest {
    let n = bits.len() as f64;
    let s: f64 = bits.iter().map(|&b| if b == 1 { 1.0 } else { -1.0 }).sum();
    let stat = s.abs() / n.sqrt();
    battery_test("monobit", stat, erfc(stat / std::f64::consts::SQRT_2))
}

fn runs(bits: &[u8]) -> BatteryTest {
    let n = bits.len() as f64;
    let pi = bits.iter().filter(|&&b| b == 1).count() as f64 / n;
    // the test is not applicable to a badly biased string and counts as a failure
    if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
        return battery_test("runs", f64::NAN, 0.0);
    }
    let v = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
    let v = v as f64;
    let stat = (v - 2.0 * n * pi * (1.0 - pi)).abs() / (2.0 * (2.0 * n).sqrt() * pi * (1.0 - pi));
    battery_test("runs", v, erfc(stat))
}

/// Lag-1 test: agreement count between neighbours, normalized.
fn serial(bits: &[u8]) -> BatteryTest {
    let m = (bits.len() - 1) as f64;
    let diffs = bits.windows(2).filter(|w| w[0] != w[1]).count() as f64;
    let stat = 2.0 * (diffs - m / 2.0) / m.sqrt();
    battery_test("serial", stat, erfc(stat.abs() / std::f64::consts::SQRT_2))
}

/// Monobit, runs and lag-1 serial tests at significance 0.01.
pub fn randomness_battery(bits: &[u8]) -> AnalysisResult<Vec<BatteryTest>> {
    if bits.len() < BATTERY_MIN_BITS {
        return Err(AnalysisError::TooFewBits {
            needed: BATTERY_MIN_BITS,
            got: bits.len(),
        });
    }
    Ok(vec![monobit(bits), runs(bits), serial(bits)])
}
