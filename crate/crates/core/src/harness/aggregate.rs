//! Nearest-rank quantiles across trials.

use super::{HarnessError, Metric, TrialTrace};

/// The `p`-quantile of sorted values by the nearest-rank rule: the value of
/// rank `ceil(p N)` (1-based, at least 1).
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of no values");
    let n = sorted.len();
    let r = ((p * n as f64).ceil() as usize).clamp(1, n);
    sorted[r - 1]
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub policy: String,
    pub beta: String,
    pub t: u64,
    pub metric: Metric,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

/// One row per (policy, checkpoint, metric), in that nesting order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AggregateStats {
    pub rows: Vec<AggregateRow>,
}

impl AggregateStats {
    pub fn get(&self, policy: &str, t: u64, metric: Metric) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.policy == policy && r.t == t && r.metric == metric)
    }

    /// Policies in row order.
    pub fn policies(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rows {
            if out.last() != Some(&r.policy.as_str()) && !out.contains(&r.policy.as_str()) {
                out.push(&r.policy);
            }
        }
        out
    }
}

/// Quantiles of every metric at every checkpoint, per policy.
///
/// Policies appear in order of their first trace; the result does not depend
/// on the order of trials within a policy.
pub fn aggregate(traces: &[TrialTrace], metrics: &[Metric]) -> Result<AggregateStats, HarnessError> {
    let Some(first) = traces.first() else {
        return Ok(AggregateStats::default());
    };
    let grid: Vec<u64> = first.points.iter().map(|p| p.t).collect();
    for tr in traces {
        if tr.points.len() != grid.len() || tr.points.iter().zip(&grid).any(|(p, &t)| p.t != t) {
            return Err(HarnessError::GridMismatch(format!("policy {:?} trial {}", tr.policy, tr.trial)));
        }
    }
    let mut groups: Vec<(&str, &str, Vec<&TrialTrace>)> = Vec::new();
    for tr in traces {
        match groups.iter_mut().find(|(p, _, _)| *p == tr.policy) {
            Some((_, _, v)) => v.push(tr),
            None => groups.push((&tr.policy, &tr.beta, vec![tr])),
        }
    }
    let mut rows = Vec::with_capacity(groups.len() * grid.len() * metrics.len());
    let mut values = Vec::new();
    for (policy, beta, members) in &groups {
        for (k, &t) in grid.iter().enumerate() {
            for &m in metrics {
                values.clear();
                for tr in members {
                    let v = tr.points[k].metric(m).ok_or_else(|| {
                        HarnessError::Config(format!("metric {} is not recorded for policy {policy:?}", m.name()))
                    })?;
                    values.push(v);
                }
                values.sort_by(f64::total_cmp);
                rows.push(AggregateRow {
                    policy: policy.to_string(),
                    beta: beta.to_string(),
                    t,
                    metric: m,
                    median: nearest_rank(&values, 0.5),
                    q25: nearest_rank(&values, 0.25),
                    q75: nearest_rank(&values, 0.75),
                });
            }
        }
    }
    Ok(AggregateStats { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::TracePoint;
    use crate::rng::{unit_closed_open, Seed};
    use proptest::prelude::*;

    fn trace(policy: &str, trial: u32, vals: &[(u64, f64)]) -> TrialTrace {
        TrialTrace {
            policy: policy.into(),
            beta: "1".into(),
            trial,
            points: vals
                .iter()
                .map(|&(t, v)| TracePoint {
                    t,
                    rec_rank: v,
                    rec_mean: 1.0 - v,
                    simple_regret: Some(v),
                    cum_regret: Some(v * t as f64),
                    cum_reward: 0.0,
                    elapsed_ns: 0,
                })
                .collect(),
        }
    }

    #[test]
    fn three_point_quantiles() {
        assert_eq!(nearest_rank(&[1.0, 2.0, 3.0], 0.5), 2.0);
        assert_eq!(nearest_rank(&[1.0, 2.0, 3.0], 0.25), 1.0);
        assert_eq!(nearest_rank(&[1.0, 2.0, 3.0], 0.75), 3.0);
        assert_eq!(nearest_rank(&[7.0], 0.0), 7.0);
        assert_eq!(nearest_rank(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.0);
    }

    #[test]
    fn uniform_sample_quantiles() {
        let mut rng = Seed(11).rng();
        let mut v: Vec<f64> = (0..2000).map(|_| unit_closed_open(&mut rng)).collect();
        v.sort_by(f64::total_cmp);
        for p in [0.25, 0.5, 0.75] {
            assert!((nearest_rank(&v, p) - p).abs() < 0.02);
        }
    }

    #[test]
    fn single_trace_and_identical_traces() {
        let one = trace("a", 0, &[(1, 0.5), (2, 0.25)]);
        let agg = aggregate(std::slice::from_ref(&one), &[Metric::RecRank]).unwrap();
        assert_eq!(agg.rows.len(), 2);
        for (r, p) in agg.rows.iter().zip(&one.points) {
            assert_eq!((r.median, r.q25, r.q75), (p.rec_rank, p.rec_rank, p.rec_rank));
        }
        let many: Vec<_> = (0..5).map(|i| trace("a", i, &[(1, 0.5)])).collect();
        let agg = aggregate(&many, &[Metric::SimpleRegret]).unwrap();
        assert_eq!(agg.rows[0].q75 - agg.rows[0].q25, 0.0);
    }

    #[test]
    fn mismatched_grids_fail() {
        let a = trace("a", 0, &[(1, 0.5), (2, 0.5)]);
        let b = trace("a", 1, &[(1, 0.5), (3, 0.5)]);
        assert!(matches!(aggregate(&[a, b], &[Metric::RecRank]), Err(HarnessError::GridMismatch(_))));
    }

    #[test]
    fn row_count_and_order() {
        let mut ts = Vec::new();
        for p in ["x", "y"] {
            for i in 0..3 {
                ts.push(trace(p, i, &[(1, 0.1 * f64::from(i)), (5, 0.2), (9, 0.3)]));
            }
        }
        let metrics = [Metric::RecRank, Metric::CumRegret];
        let agg = aggregate(&ts, &metrics).unwrap();
        assert_eq!(agg.rows.len(), 2 * 3 * 2);
        assert_eq!(agg.policies(), vec!["x", "y"]);
        assert_eq!(agg.get("x", 1, Metric::RecRank).unwrap().median, 0.1);
    }

    proptest! {
        #[test]
        fn quantiles_are_ordered_and_trial_order_is_irrelevant(
            vals in proptest::collection::vec(-1e3f64..1e3, 1..40),
            shift in 0usize..40,
        ) {
            let ts: Vec<_> = vals.iter().enumerate().map(|(i, &v)| trace("a", i as u32, &[(1, v)])).collect();
            let mut rotated = ts.clone();
            let k = shift % rotated.len();
            rotated.rotate_left(k);
            let a = aggregate(&ts, &Metric::ALL[..4]).unwrap();
            let b = aggregate(&rotated, &Metric::ALL[..4]).unwrap();
            prop_assert_eq!(&a, &b);
            for r in &a.rows {
                prop_assert!(r.q25 <= r.median && r.median <= r.q75);
            }
        }
    }
}
