use std::fmt::Write as _;

use super::dataset::DatasetRow;
use super::mlp::MlpModel;
use super::train::argmax;
use crate::error::{Error, Result};

pub const BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    /// Fraction of correct top-1 predictions; 0 for an empty bin.
    pub accuracy: f64,
    /// Mean top-class confidence; 0 for an empty bin.
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub bins: Vec<CalibrationBin>,
    pub ece: f64,
    pub accuracy: f64,
    pub total: usize,
}

/// Bin `m` (1-based) covers ((m-1)/10, m/10].
pub fn bin_of(confidence: f64) -> usize {
    ((confidence * BINS as f64).ceil() as usize).clamp(1, BINS)
}

/// Builds the report from (top-class confidence, correct) pairs.
pub fn calibration_from_outcomes(outcomes: &[(f64, bool)]) -> Result<CalibrationReport> {
    if outcomes.is_empty() {
        return Err(Error::contract("calibration needs at least one prediction"));
    }
    let mut count = [0usize; BINS];
    let mut hits = [0usize; BINS];
    let mut conf = [0.0f64; BINS];
    for &(p, correct) in outcomes {
        let b = bin_of(p) - 1;
        count[b] += 1;
        hits[b] += correct as usize;
        conf[b] += p;
    }
    let total = outcomes.len();
    let bins: Vec<CalibrationBin> = (0..BINS)
        .map(|b| {
            let n = count[b];
            let mean = |s: f64| if n == 0 { 0.0 } else { s / n as f64 };
            CalibrationBin {
                lower: b as f64 / BINS as f64,
                upper: (b + 1) as f64 / BINS as f64,
                count: n,
                accuracy: mean(hits[b] as f64),
                confidence: mean(conf[b]),
            }
        })
        .collect();
    let ece = bins
        .iter()
        .map(|b| b.count as f64 / total as f64 * (b.accuracy - b.confidence).abs())
        .sum();
    Ok(CalibrationReport {
        bins,
        ece,
        accuracy: hits.iter().sum::<usize>() as f64 / total as f64,
        total,
    })
}

pub fn reliability_report(model: &MlpModel, rows: &[DatasetRow]) -> Result<CalibrationReport> {
    if rows.is_empty() {
        return Err(Error::contract("calibration needs at least one row"));
    }
    let width = model.output_width();
    let mut outcomes = Vec::with_capacity(rows.len());
    for chunk in rows.chunks(1024) {
        let x: Vec<f64> = chunk.iter().flat_map(|r| r.features).collect();
        let probs = model.forward(&x)?;
        for (p, row) in probs.chunks_exact(width).zip(chunk) {
            let top = argmax(p);
            outcomes.push((p[top], top == row.label.get()));
        }
    }
    calibration_from_outcomes(&outcomes)
}

impl CalibrationReport {
    /// Comma-separated bin table followed by a summary line.
    pub fn to_table(&self) -> String {
        let mut out = String::from("bin,lower,upper,count,accuracy,confidence\n");
        for (i, b) in self.bins.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{:.1},{:.1},{},{:.6},{:.6}",
                i + 1,
                b.lower,
                b.upper,
                b.count,
                b.accuracy,
                b.confidence
            );
        }
        let _ = writeln!(
            out,
            "# ece={:.6} accuracy={:.6} total={}",
            self.ece, self.accuracy, self.total
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn binning_rule() {
        assert_eq!(bin_of(0.05), 1);
        assert_eq!(bin_of(0.1), 1);
        assert_eq!(bin_of(0.1000001), 2);
        assert_eq!(bin_of(0.7), 7);
        assert_eq!(bin_of(1.0), 10);
    }

    #[test]
    fn perfect_confident_classifier() {
        let r = calibration_from_outcomes(&vec![(1.0, true); 50]).unwrap();
        assert_eq!(r.bins[9].count, 50);
        assert_eq!((r.bins[9].accuracy, r.bins[9].confidence), (1.0, 1.0));
        assert_eq!(r.ece, 0.0);
        assert_eq!(r.bins.iter().map(|b| b.count).sum::<usize>(), 50);
    }

    #[test]
    fn low_confidence_lands_in_first_bin() {
        let r = calibration_from_outcomes(&[(0.08, false), (0.1, true), (0.067, false)]).unwrap();
        assert_eq!(r.bins[0].count, 3);
        assert!(r.bins[1..].iter().all(|b| b.count == 0));
    }

    #[test]
    fn calibrated_sampler() {
        // label agrees with the prediction with probability 0.7
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let outcomes: Vec<(f64, bool)> =
            (0..10_000).map(|_| (0.7, rng.random::<f64>() < 0.7)).collect();
        let r = calibration_from_outcomes(&outcomes).unwrap();
        assert_eq!(r.bins[6].count, 10_000);
        assert!((r.bins[6].accuracy - 0.7).abs() <= 0.03);
        assert!(r.ece <= 0.03);
    }

    #[test]
    fn table_has_ten_rows() {
        let r = calibration_from_outcomes(&[(0.55, true)]).unwrap();
        let t = r.to_table();
        assert_eq!(t.lines().count(), 12);
        assert!(t.contains("6,0.5,0.6,1,1.000000,0.550000"));
    }
}
