use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DichotomyTag {
    UltimatelyConstant,
    ExponentialDecay,
    IoExponentialGrowth,
    Inconclusive,
}

impl DichotomyTag {
    pub fn as_str(self) -> &'static str {
        match self {
            DichotomyTag::UltimatelyConstant => "ultimately-constant",
            DichotomyTag::ExponentialDecay => "exponential-decay",
            DichotomyTag::IoExponentialGrowth => "io-exponential-growth",
            DichotomyTag::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for DichotomyTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DichotomyThresholds {
    /// Slopes (nats/step) below this in absolute value count as flat.
    pub slope: f64,
    /// Largest trailing-half range (nats) of an ultimately constant series.
    pub range: f64,
    /// Minimum `max / n` at a late running-max record for growth.
    pub growth_ratio: f64,
    pub min_len: u64,
}

impl Default for DichotomyThresholds {
    fn default() -> Self {
        DichotomyThresholds {
            slope: 1e-4,
            range: 1.0,
            growth_ratio: 1e-4,
            min_len: 10_000,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    pub horizon: u64,
    pub trailing_slope: f64,
    /// OLS slopes of four consecutive windows covering the trailing half.
    pub window_slopes: Vec<f64>,
    pub trailing_range: f64,
    pub max_log_capital: f64,
    /// Step of the last strict running-max record (0 if the start was never beaten).
    pub last_record: u64,
    /// Largest `value / n` over the trailing half.
    pub best_trailing_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DichotomyVerdict {
    pub tag: DichotomyTag,
    /// Nats per step: OLS slope for constant/decay, best trailing ratio for growth.
    pub rate: f64,
    pub diagnostics: Diagnostics,
}

fn ols(points: &[(u64, f64)]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(x, y) in points {
        let dx = x as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Classifies a trajectory given as `(n, log capital after n symbols)` points
/// with increasing `n`; the last point fixes the horizon.
pub fn classify_sampled(samples: &[(u64, f64)], th: DichotomyThresholds) -> DichotomyVerdict {
    let horizon = samples.last().map_or(0, |p| p.0);
    let mut diag = Diagnostics {
        horizon,
        ..Diagnostics::default()
    };
    let verdict = |tag, rate, diagnostics| DichotomyVerdict {
        tag,
        rate,
        diagnostics,
    };
    if horizon < th.min_len {
        return verdict(DichotomyTag::Inconclusive, 0.0, diag);
    }
    if samples.iter().any(|p| p.1 == f64::NEG_INFINITY) {
        diag.trailing_slope = f64::NEG_INFINITY;
        diag.max_log_capital = samples.iter().map(|p| p.1).fold(0.0, f64::max);
        return verdict(DichotomyTag::ExponentialDecay, f64::NEG_INFINITY, diag);
    }
    let mut max = 0.0;
    for &(n, v) in samples {
        if v > max {
            max = v;
            diag.last_record = n;
        }
    }
    diag.max_log_capital = max;
    let tail_start = samples.partition_point(|p| p.0 < horizon / 2);
    let tail = &samples[tail_start..];
    diag.trailing_slope = ols(tail);
    let lo = tail.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = tail.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    diag.trailing_range = hi - lo;
    diag.best_trailing_ratio = tail
        .iter()
        .filter(|p| p.0 > 0)
        .map(|p| p.1 / p.0 as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    let w = tail.len() / 4;
    if w >= 2 {
        diag.window_slopes = (0..4).map(|i| ols(&tail[i * w..(i + 1) * w])).collect();
    }

    let late = diag.last_record > horizon - horizon / 4;
    if late && diag.last_record > 0 && max / diag.last_record as f64 > th.growth_ratio {
        let rate = diag.best_trailing_ratio;
        return verdict(DichotomyTag::IoExponentialGrowth, rate, diag);
    }
    let slope = diag.trailing_slope;
    if slope < -th.slope {
        return verdict(DichotomyTag::ExponentialDecay, slope, diag);
    }
    if slope.abs() < th.slope && diag.trailing_range < th.range {
        return verdict(DichotomyTag::UltimatelyConstant, slope, diag);
    }
    verdict(DichotomyTag::Inconclusive, slope, diag)
}

/// Classifies a full trajectory where `values[i]` is the log capital after `i + 1` symbols.
pub fn classify_trajectory(values: &[f64], th: DichotomyThresholds) -> DichotomyVerdict {
    let samples: Vec<(u64, f64)> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| (i as u64 + 1, v))
        .collect();
    classify_sampled(&samples, th)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomSource;

    fn th() -> DichotomyThresholds {
        DichotomyThresholds::default()
    }

    #[test]
    fn zero_series_is_constant() {
        let v = classify_trajectory(&vec![0.0; 20_000], th());
        assert_eq!(v.tag, DichotomyTag::UltimatelyConstant);
        assert_eq!(v.rate, 0.0);
    }

    #[test]
    fn noisy_linear_decay() {
        let mut rng = RandomSource::new(3);
        let v: Vec<f64> = (1..=100_000)
            .map(|n| -0.1 * n as f64 + (rng.next_f64() - 0.5) * 4.0)
            .collect();
        let verdict = classify_trajectory(&v, th());
        assert_eq!(verdict.tag, DichotomyTag::ExponentialDecay);
        assert!((verdict.rate + 0.1).abs() < 0.005);
    }

    #[test]
    fn growth_and_minus_infinity() {
        let v: Vec<f64> = (1..=50_000).map(|n| 0.03 * n as f64).collect();
        let verdict = classify_trajectory(&v, th());
        assert_eq!(verdict.tag, DichotomyTag::IoExponentialGrowth);
        assert!((verdict.rate - 0.03).abs() < 1e-12);

        let mut dead = vec![0.0; 20_000];
        dead[100..].iter_mut().for_each(|x| *x = f64::NEG_INFINITY);
        let verdict = classify_trajectory(&dead, th());
        assert_eq!(verdict.tag, DichotomyTag::ExponentialDecay);
        assert_eq!(verdict.rate, f64::NEG_INFINITY);
    }

    #[test]
    fn short_or_wandering_is_inconclusive() {
        assert_eq!(classify_trajectory(&[0.0; 100], th()).tag, DichotomyTag::Inconclusive);
        // Flat slope but wide swings in the tail.
        let v: Vec<f64> = (1..=40_000)
            .map(|n| 5.0 * (std::f64::consts::TAU * n as f64 / 1000.0).sin() - 10.0)
            .collect();
        assert_eq!(classify_trajectory(&v, th()).tag, DichotomyTag::Inconclusive);
    }

    #[test]
    fn tags_serialize_kebab() {
        let s = serde_json::to_string(&DichotomyTag::IoExponentialGrowth).unwrap();
        assert_eq!(s, "\"io-exponential-growth\"");
    }
}
