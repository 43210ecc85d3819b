//! Execution accuracy, injection offsets and per-second batch tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ConfusionCounts, Outcome, Window};
use crate::simulator::{Classified, SimTrace};

/// Tallies the outcomes of a classified list.
pub fn confusion_counts(classified: &[Classified]) -> ConfusionCounts {
    classified.iter().map(|c| c.outcome).collect()
}

/// `(TP + TN) / n`.
pub fn accuracy_of_counts(counts: &ConfusionCounts) -> Result<f64> {
    match counts.n() {
        0 => Err(Error::UndefinedMetric("execution accuracy")),
        n => Ok(counts.correct() as f64 / n as f64),
    }
}

/// Share of calls for which world time and injected time take the same branch.
pub fn execution_accuracy(classified: &[Classified]) -> Result<f64> {
    accuracy_of_counts(&confusion_counts(classified))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetStats {
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    pub p50: f64,
    pub p95: f64,
    pub n: u64,
}

impl OffsetStats {
    /// Summary of raw offsets (injected minus world time, in seconds).
    pub fn from_offsets(offsets: &[f64]) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::UndefinedMetric("injection offsets"));
        }
        let mut sorted = offsets.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let nearest_rank = |pct: f64| {
            let rank = ((pct / 100.0) * n as f64).ceil() as usize;
            sorted[rank.clamp(1, n) - 1]
        };
        Ok(OffsetStats {
            mean: sorted.iter().sum::<f64>() / n as f64,
            max: sorted[n - 1],
            min: sorted[0],
            p50: nearest_rank(50.0),
            p95: nearest_rank(95.0),
            n: n as u64,
        })
    }
}

pub fn injection_offsets(trace: &SimTrace) -> Result<OffsetStats> {
    let offsets: Vec<f64> = trace.records.iter().map(|r| r.offset()).collect();
    OffsetStats::from_offsets(&offsets)
}

/// Relative outcome frequencies of one batch.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Frequencies {
    pub tp: f64,
    pub fp: f64,
    pub tn: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
}

impl Frequencies {
    pub fn from_counts(counts: &ConfusionCounts) -> Option<Self> {
        let n = counts.n();
        if n == 0 {
            return None;
        }
        let n = n as f64;
        Some(Frequencies {
            tp: counts.tp as f64 / n,
            fp: counts.fp as f64 / n,
            tn: counts.tn as f64 / n,
            fn_: counts.fn_ as f64 / n,
        })
    }

    pub fn get(&self, outcome: Outcome) -> f64 {
        match outcome {
            Outcome::TruePositive => self.tp,
            Outcome::FalsePositive => self.fp,
            Outcome::TrueNegative => self.tn,
            Outcome::FalseNegative => self.fn_,
        }
    }

    pub fn accuracy(&self) -> f64 {
        self.tp + self.tn
    }

    pub fn sum(&self) -> f64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Calls sent during one full second of the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Batch {
    pub batch_start: i64,
    pub count: u64,
    /// `None` for a batch without samples.
    pub freqs: Option<Frequencies>,
}

impl Batch {
    pub fn accuracy(&self) -> Option<f64> {
        self.freqs.map(|f| f.accuracy())
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchTable {
    pub window: Window,
    pub batches: Vec<Batch>,
}

impl BatchTable {
    /// Number of one-second batches; a trailing partial second joins the last batch.
    pub fn batch_count(window: &Window) -> usize {
        let len = window.length();
        if len <= 0.0 {
            0
        } else {
            len.floor().max(1.0) as usize
        }
    }

    pub fn batch(&self, batch_start: i64) -> Option<&Batch> {
        let first = self.batches.first()?.batch_start;
        let idx = usize::try_from(batch_start - first).ok()?;
        self.batches.get(idx)
    }

    /// Count-weighted mean of the per-batch accuracies.
    pub fn weighted_accuracy(&self) -> Result<f64> {
        let (mut num, mut den) = (0.0, 0u64);
        for b in &self.batches {
            if let Some(acc) = b.accuracy() {
                num += acc * b.count as f64;
                den += b.count;
            }
        }
        if den == 0 {
            Err(Error::UndefinedMetric("batch accuracy"))
        } else {
            Ok(num / den as f64)
        }
    }
}

/// Splits classified calls into batches of full seconds by send time.
pub fn batch_frequencies(classified: &[Classified], window: Window) -> Result<BatchTable> {
    window.validate()?;
    let nb = BatchTable::batch_count(&window);
    let mut counts = vec![ConfusionCounts::default(); nb];
    for c in classified {
        let sent = c.record.sent_at.seconds();
        if !window.contains(sent) || nb == 0 {
            return Err(Error::OutOfWindow {
                sent_at: sent,
                start: window.start,
                end: window.end,
            });
        }
        let idx = ((sent - window.start).floor() as usize).min(nb - 1);
        counts[idx].record(c.outcome);
    }
    let first = window.start.floor() as i64;
    let batches = counts
        .iter()
        .enumerate()
        .map(|(i, c)| Batch {
            batch_start: first + i as i64,
            count: c.n(),
            freqs: Frequencies::from_counts(c),
        })
        .collect();
    Ok(BatchTable { window, batches })
}

/// Per-batch mean over rounds, skipping rounds in which a batch is empty.
pub fn average_batch_tables(tables: &[BatchTable]) -> Result<BatchTable> {
    let first = tables
        .first()
        .ok_or_else(|| Error::Shape("no tables to average".into()))?;
    for (k, t) in tables.iter().enumerate().skip(1) {
        let same_starts = t.batches.len() == first.batches.len()
            && t.batches
                .iter()
                .zip(&first.batches)
                .all(|(x, y)| x.batch_start == y.batch_start);
        if t.window != first.window || !same_starts {
            return Err(Error::Shape(format!(
                "table {k} does not match the batch layout of table 0"
            )));
        }
    }

    let batches = (0..first.batches.len())
        .map(|i| {
            let column = tables.iter().map(|t| &t.batches[i]);
            let count = column.clone().map(|b| b.count).sum();
            let filled: Vec<Frequencies> = column.filter_map(|b| b.freqs).collect();
            let freqs = if filled.is_empty() {
                None
            } else {
                let k = filled.len() as f64;
                let mean = |pick: fn(&Frequencies) -> f64| filled.iter().map(pick).sum::<f64>() / k;
                Some(Frequencies {
                    tp: mean(|f| f.tp),
                    fp: mean(|f| f.fp),
                    tn: mean(|f| f.tn),
                    fn_: mean(|f| f.fn_),
                })
            };
            Batch {
                batch_start: first.batches[i].batch_start,
                count,
                freqs,
            }
        })
        .collect();
    Ok(BatchTable {
        window: first.window,
        batches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BlockTimestamp, ConstraintInterval, TransactionRecord, WorldTime};
    use proptest::prelude::*;

    fn classified(sent: f64, injected: f64, outcome: Outcome) -> Classified {
        let interval = ConstraintInterval::new(15, 30).unwrap();
        let record = TransactionRecord {
            id: 0,
            sent_at: WorldTime::new(sent).unwrap(),
            block_timestamp: BlockTimestamp(injected.ceil() as u64),
            injected_at: injected,
            block_height: 1,
        };
        Classified {
            record,
            state: record.state(&interval),
            outcome,
        }
    }

    fn with_outcomes(outcomes: &[(f64, Outcome)]) -> Vec<Classified> {
        outcomes
            .iter()
            .map(|(t, o)| classified(*t, *t, *o))
            .collect()
    }

    #[test]
    fn accuracy_from_counts() {
        let counts = ConfusionCounts {
            tp: 3,
            tn: 4,
            fp: 2,
            fn_: 1,
        };
        assert!((accuracy_of_counts(&counts).unwrap() - 0.7).abs() < 1e-15);
        assert!(matches!(
            accuracy_of_counts(&ConfusionCounts::default()),
            Err(Error::UndefinedMetric(_))
        ));
        assert!(execution_accuracy(&[]).is_err());
    }

    #[test]
    fn offset_summary() {
        let s = OffsetStats::from_offsets(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(
            (s.mean, s.max, s.min, s.p50, s.p95, s.n),
            (2.0, 3.0, 1.0, 2.0, 3.0, 3)
        );
        let s = OffsetStats::from_offsets(&[3.5]).unwrap();
        assert_eq!((s.mean, s.max), (3.5, 3.5));
        assert!(OffsetStats::from_offsets(&[]).is_err());

        // nearest rank over 1..=20: p50 is the 10th value, p95 the 19th
        let xs: Vec<f64> = (1..=20).map(f64::from).collect();
        let s = OffsetStats::from_offsets(&xs).unwrap();
        assert_eq!((s.p50, s.p95), (10.0, 19.0));
    }

    #[test]
    fn batches_by_full_second() {
        use Outcome::*;
        let w = Window::new(0.0, 45.0).unwrap();
        let t = batch_frequencies(
            &with_outcomes(&[
                (14.2, FalsePositive),
                (14.8, FalsePositive),
                (16.3, TruePositive),
            ]),
            w,
        )
        .unwrap();
        assert_eq!(t.batches.len(), 45);
        let b14 = t.batch(14).unwrap();
        assert_eq!(b14.count, 2);
        assert_eq!(b14.freqs.unwrap().fp, 1.0);
        let b16 = t.batch(16).unwrap();
        assert_eq!((b16.count, b16.freqs.unwrap().tp), (1, 1.0));
        assert!(t.batch(15).unwrap().is_empty());
    }

    #[test]
    fn last_batch_is_closed() {
        use Outcome::*;
        let w = Window::new(0.0, 3.0).unwrap();
        let t = batch_frequencies(
            &with_outcomes(&[
                (0.1, TrueNegative),
                (1.1, TrueNegative),
                (2.9, TrueNegative),
            ]),
            w,
        )
        .unwrap();
        assert_eq!(
            t.batches.iter().map(|b| b.count).collect::<Vec<_>>(),
            vec![1, 1, 1]
        );
        let t = batch_frequencies(&with_outcomes(&[(3.0, TrueNegative)]), w).unwrap();
        assert_eq!(t.batches[2].count, 1);
        assert!(matches!(
            batch_frequencies(&with_outcomes(&[(3.5, TrueNegative)]), w),
            Err(Error::OutOfWindow { .. })
        ));
    }

    #[test]
    fn empty_input_gives_empty_batches() {
        let t = batch_frequencies(&[], Window::new(0.0, 45.0).unwrap()).unwrap();
        assert!(t.batches.iter().all(|b| b.count == 0 && b.freqs.is_none()));
        assert!(t.weighted_accuracy().is_err());
    }

    #[test]
    fn averaging_rounds() {
        use Outcome::*;
        let w = Window::new(0.0, 45.0).unwrap();
        let r1 = batch_frequencies(&with_outcomes(&[(14.5, FalsePositive)]), w).unwrap();
        let r2 = batch_frequencies(&with_outcomes(&[(14.5, TrueNegative)]), w).unwrap();
        let avg = average_batch_tables(&[r1.clone(), r2]).unwrap();
        let f = avg.batch(14).unwrap().freqs.unwrap();
        assert_eq!((f.fp, f.tn, f.tp, f.fn_), (0.5, 0.5, 0.0, 0.0));
        assert_eq!(avg.batch(14).unwrap().count, 2);

        assert_eq!(average_batch_tables(std::slice::from_ref(&r1)).unwrap(), r1);

        let tripled = average_batch_tables(&[r1.clone(), r1.clone(), r1.clone()]).unwrap();
        for (a, b) in tripled.batches.iter().zip(&r1.batches) {
            assert_eq!(a.freqs, b.freqs);
            assert_eq!(a.count, 3 * b.count);
        }
    }

    #[test]
    fn averaging_skips_empty_rounds() {
        use Outcome::*;
        let w = Window::new(0.0, 3.0).unwrap();
        let r1 = batch_frequencies(&with_outcomes(&[(1.5, FalsePositive)]), w).unwrap();
        let r2 = batch_frequencies(&[], w).unwrap();
        let avg = average_batch_tables(&[r1, r2]).unwrap();
        assert_eq!(avg.batches[1].freqs.unwrap().fp, 1.0);
    }

    #[test]
    fn averaging_rejects_mismatched_shapes() {
        let a = batch_frequencies(&[], Window::new(0.0, 45.0).unwrap()).unwrap();
        let b = batch_frequencies(&[], Window::new(0.0, 135.0).unwrap()).unwrap();
        assert!(matches!(
            average_batch_tables(&[a, b]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(average_batch_tables(&[]), Err(Error::Shape(_))));
    }

    fn arb_classified() -> impl Strategy<Value = Vec<Classified>> {
        proptest::collection::vec((0.0f64..45.0, 0usize..4), 1..300).prop_map(|xs| {
            xs.into_iter()
                .map(|(t, o)| classified(t, t, Outcome::ALL[o]))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn frequencies_form_a_simplex(rounds in proptest::collection::vec(arb_classified(), 1..6)) {
            let w = Window::new(0.0, 45.0).unwrap();
            let tables: Vec<BatchTable> = rounds.iter().map(|r| batch_frequencies(r, w).unwrap()).collect();
            let avg = average_batch_tables(&tables).unwrap();
            for t in tables.iter().chain(std::iter::once(&avg)) {
                for b in &t.batches {
                    if let Some(f) = b.freqs {
                        prop_assert!((f.sum() - 1.0).abs() <= 1e-12);
                        prop_assert_eq!(b.accuracy().unwrap(), f.tp + f.tn);
                    }
                }
            }
        }

        #[test]
        fn overall_is_weighted_batch_mean(xs in arb_classified()) {
            let w = Window::new(0.0, 45.0).unwrap();
            let overall = execution_accuracy(&xs).unwrap();
            let table = batch_frequencies(&xs, w).unwrap();
            prop_assert!((table.weighted_accuracy().unwrap() - overall).abs() <= 1e-12);
            let c = confusion_counts(&xs);
            prop_assert!((overall - (1.0 - (c.fp + c.fn_) as f64 / c.n() as f64)).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&overall));
        }
    }
}
