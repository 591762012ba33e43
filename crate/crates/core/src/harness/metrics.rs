use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::train::EpisodeMetrics;
use crate::error::{Error, Result};

/// Outcome of a correlation analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Correlation {
    Computed {
        r: f64,
        p_value: f64,
        n: usize,
    },
    /// Fewer than three pairs or a constant series.
    NotComputable {
        n: usize,
    },
}

impl Correlation {
    pub fn r(&self) -> Option<f64> {
        match *self {
            Correlation::Computed { r, .. } => Some(r),
            Correlation::NotComputable { .. } => None,
        }
    }

    pub fn p_value(&self) -> Option<f64> {
        match *self {
            Correlation::Computed { p_value, .. } => Some(p_value),
            Correlation::NotComputable { .. } => None,
        }
    }
}

/// Pearson r with a two-sided p-value from the t distribution on n - 2 degrees
/// of freedom.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<Correlation> {
    if xs.len() != ys.len() {
        return Err(Error::ShapeMismatch {
            expected: (xs.len(), 1),
            actual: (ys.len(), 1),
        });
    }
    let n = xs.len();
    if n < 3 {
        return Ok(Correlation::NotComputable { n });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 || !(sxx.is_finite() && syy.is_finite()) {
        return Ok(Correlation::NotComputable { n });
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = nf - 2.0;
    let p_value = if r.abs() == 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::param("degrees_of_freedom", e.to_string()))?;
        (2.0 * dist.sf(t.abs())).min(1.0)
    };
    Ok(Correlation::Computed { r, p_value, n })
}

/// Share of the intrinsic reward in the total reward: `da / (da + r_self)`.
pub fn altruistic_preference(da: f64, r_self: f64) -> Result<f64> {
    let denom = da + r_self;
    if denom == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(da / denom)
}

/// Adjacent pairs where the series decreases.
pub fn count_inversions(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[1] < w[0]).count()
}

/// Adjacent pairs where the series increases.
pub fn count_increases(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[1] > w[0]).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub band_lo: f64,
    pub band_hi: f64,
    /// BFS distance from A to H when distress began.
    pub distance: usize,
    pub distressed: usize,
    pub altruistic: usize,
    /// Altruistic episodes per 10 distressed episodes at this distance.
    pub count: f64,
}

/// Index of the band holding `f_e`. Bands are half-open `[lo, hi)` except the
/// last, which also takes its upper edge.
pub fn band_of(bands: &[(f64, f64)], f_e: f64) -> Option<usize> {
    let last = bands.len().checked_sub(1)?;
    bands
        .iter()
        .enumerate()
        .position(|(i, &(lo, hi))| f_e >= lo && (f_e < hi || (i == last && f_e <= hi)))
}

/// Altruism against onset distance, pooled per `F_e` band. `runs` pairs each
/// run's `F_e` with the episodes to analyse; distances seen fewer than
/// `min_support` times in a band are dropped.
pub fn distance_analysis(
    runs: &[(f64, &[EpisodeMetrics])],
    bands: &[(f64, f64)],
    min_support: usize,
) -> Vec<DistanceRow> {
    let mut tally: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for &(f_e, metrics) in runs {
        let Some(b) = band_of(bands, f_e) else { continue };
        for m in metrics {
            if let (true, Some(d)) = (m.distressed, m.distance_to_h_at_onset) {
                let e = tally.entry((b, d)).or_default();
                e.0 += 1;
                e.1 += usize::from(m.altruistic);
            }
        }
    }
    tally
        .into_iter()
        .filter(|(_, (n, _))| *n >= min_support.max(1))
        .map(|((b, distance), (distressed, altruistic))| DistanceRow {
            band_lo: bands[b].0,
            band_hi: bands[b].1,
            distance,
            distressed,
            altruistic,
            count: 10.0 * altruistic as f64 / distressed as f64,
        })
        .collect()
}

/// Adjacent rows (one band, ordered by distance) whose altruism share rises by
/// more than `z` binomial standard errors of the difference.
pub fn significant_increases(rows: &[DistanceRow], z: f64) -> usize {
    rows.windows(2)
        .filter(|w| {
            let share = |r: &DistanceRow| r.altruistic as f64 / r.distressed.max(1) as f64;
            let var = |r: &DistanceRow| {
                let q = share(r);
                q * (1.0 - q) / r.distressed.max(1) as f64
            };
            let diff = share(&w[1]) - share(&w[0]);
            diff > 0.0 && diff > z * (var(&w[0]) + var(&w[1])).sqrt()
        })
        .count()
}

pub fn distance_csv(rows: &[DistanceRow]) -> String {
    let mut out = String::from("band_lo,band_hi,distance,distressed,altruistic,count\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.band_lo, r.band_hi, r.distance, r.distressed, r.altruistic, r.count
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ep(distance: Option<usize>, altruistic: bool) -> EpisodeMetrics {
        EpisodeMetrics {
            episode: 0,
            altruistic,
            distressed: distance.is_some(),
            reached_t: true,
            cost: -5.0,
            task_return: 10.0,
            moral_return: 0.0,
            da_relief: 0.0,
            steps: 5,
            distance_to_h_at_onset: distance,
        }
    }

    #[test]
    fn pearson_identity_and_negation() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson(&xs, &xs).unwrap().r().unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&xs, &neg).unwrap().r().unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_matches_high_precision_reference() {
        // Reference values computed with 50-digit arithmetic.
        let xs = [5.0, 10.0, 15.0, 25.0, 35.0, 45.0, 60.0, 70.0, 85.0, 100.0];
        let ys = [0.0, 0.2, 0.0, 3.1, 4.4, 5.9, 6.2, 8.8, 9.5, 10.0];
        let c = pearson(&xs, &ys).unwrap();
        assert!((c.r().unwrap() - 0.974_604_014_161_458_8).abs() < 1e-9, "{c:?}");
        assert!(
            (c.p_value().unwrap() - 1.764_985_725_084_059_4e-6).abs() < 1e-9,
            "{c:?}"
        );
    }

    #[test]
    fn pearson_degenerate_inputs() {
        assert_eq!(
            pearson(&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0]).unwrap(),
            Correlation::NotComputable { n: 3 }
        );
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0, 2.0]).unwrap(),
            Correlation::NotComputable { n: 2 }
        );
        assert!(matches!(pearson(&[1.0], &[1.0, 2.0]), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn preference_values() {
        assert_eq!(altruistic_preference(0.0, 10.0).unwrap(), 0.0);
        assert_eq!(altruistic_preference(10.0, 10.0).unwrap(), 0.5);
        // da solving da / (da + 10) = 0.473
        let da = 8.975_332_068_311_195;
        assert!((altruistic_preference(da, 10.0).unwrap() - 0.473).abs() < 1e-12);
        assert!(matches!(
            altruistic_preference(-10.0, 10.0),
            Err(Error::ZeroDenominator)
        ));
    }

    #[test]
    fn increases_are_judged_against_sampling_error() {
        let row = |distance, distressed, altruistic| DistanceRow {
            band_lo: 0.0,
            band_hi: 100.0,
            distance,
            distressed,
            altruistic,
            count: 10.0 * altruistic as f64 / distressed as f64,
        };
        // 60% -> 70% on 20 episodes each is noise; on 2000 each it is not.
        assert_eq!(significant_increases(&[row(1, 20, 12), row(2, 20, 14)], 2.0), 0);
        assert_eq!(significant_increases(&[row(1, 2000, 1200), row(2, 2000, 1400)], 2.0), 1);
        assert_eq!(significant_increases(&[row(1, 50, 50), row(2, 50, 40)], 2.0), 0);
        assert_eq!(significant_increases(&[row(1, 50, 0), row(2, 50, 1)], 0.0), 1);
    }

    #[test]
    fn bands_are_half_open_except_last() {
        let bands = [(5.0, 25.0), (25.0, 50.0), (50.0, 100.0)];
        assert_eq!(band_of(&bands, 25.0), Some(1));
        assert_eq!(band_of(&bands, 100.0), Some(2));
        assert_eq!(band_of(&bands, 4.9), None);
        assert_eq!(band_of(&[], 10.0), None);
    }

    #[test]
    fn distance_table_pools_by_band() {
        let a = vec![
            ep(Some(1), true),
            ep(Some(1), false),
            ep(Some(3), false),
            ep(None, false),
        ];
        let b = vec![ep(Some(1), true)];
        let rows = distance_analysis(&[(90.0, &a), (95.0, &b)], &[(5.0, 50.0), (50.0, 100.0)], 1);
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].distance, rows[0].distressed, rows[0].altruistic), (1, 3, 2));
        assert!((rows[0].count - 20.0 / 3.0).abs() < 1e-12);
        assert_eq!((rows[1].distance, rows[1].count), (3, 0.0));
        assert!(distance_analysis(&[], &[(5.0, 50.0)], 1).is_empty());
        assert!(distance_analysis(&[(90.0, &a)], &[(50.0, 100.0)], 3).is_empty());
    }
}
