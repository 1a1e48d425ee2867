//! Cell-averaging CFAR along each azimuth line.
//!
//! The detector works in linear power even though scans are stored in dB:
//! averaging dB values would implement a geometric-mean detector, which is a
//! different statistic. Each cell under test is compared against
//! `alpha * mean(training cells)`, where the training window sits beyond the
//! guard cells on both sides and shrinks one-sidedly at the line edges.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GridPoint, PolarImage};

/// How the `rate` parameter maps to the threshold factor alpha.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CfarMode {
    /// `rate` is a design false-alarm probability;
    /// `alpha = N * (rate^(-1/N) - 1)` with `N = train_cells`.
    Pfa,
    /// `rate` is used as the threshold ratio directly.
    Scale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfarParams {
    /// Total number of training cells (split across the two sides).
    pub train_cells: usize,
    /// Guard cells per side, excluded from the training mean.
    pub guard_cells: usize,
    /// Threshold parameter, interpreted per `mode`.
    pub rate: f64,
    pub mode: CfarMode,
}

impl CfarParams {
    /// The empirically chosen reference settings: 500 training cells,
    /// 30 guard cells and 0.22 as a direct threshold ratio.
    pub fn reference_defaults() -> Self {
        CfarParams {
            train_cells: 500,
            guard_cells: 30,
            rate: 0.22,
            mode: CfarMode::Scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.train_cells < 2 {
            return Err(Error::invalid("train_cells must be >= 2"));
        }
        if !crate::geometry::positive(self.rate) {
            return Err(Error::domain("rate must be positive and finite"));
        }
        Ok(())
    }

    /// Training cells per side.
    pub fn per_side(&self) -> usize {
        self.train_cells.div_ceil(2)
    }

    /// Threshold factor applied to the training mean.
    pub fn threshold_factor(&self) -> f64 {
        match self.mode {
            CfarMode::Pfa => {
                let n = self.train_cells as f64;
                n * (self.rate.powf(-1.0 / n) - 1.0)
            }
            CfarMode::Scale => self.rate,
        }
    }
}

/// Binary detection grid congruent with the polar scan it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionMask {
    data: Vec<bool>,
    azimuth_bins: usize,
    range_bins: usize,
}

impl DetectionMask {
    pub fn azimuth_bins(&self) -> usize {
        self.azimuth_bins
    }

    pub fn range_bins(&self) -> usize {
        self.range_bins
    }

    pub fn get(&self, azimuth: usize, bin: usize) -> bool {
        self.data[azimuth * self.range_bins + bin]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|b| **b).count()
    }

    /// Flagged cells as (azimuth, range bin) pairs in scan order.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..self.azimuth_bins {
            for k in 0..self.range_bins {
                if self.get(j, k) {
                    out.push((j, k));
                }
            }
        }
        out
    }

    /// Flagged cells converted to metric points in the sensor frame.
    pub fn points(&self, polar: &PolarImage) -> Vec<GridPoint> {
        self.cells()
            .into_iter()
            .map(|(j, k)| polar.cell_position(j, k))
            .collect()
    }
}

/// Run CA-CFAR on every azimuth line of the scan.
pub fn ca_cfar(polar: &PolarImage, params: &CfarParams) -> Result<DetectionMask> {
    params.validate()?;
    let n = polar.range_bins();
    let per_side = params.per_side();
    if params.guard_cells + per_side >= n {
        return Err(Error::invalid(format!(
            "training window (guard {} + train/side {}) does not fit in {} range bins",
            params.guard_cells, per_side, n
        )));
    }
    let alpha = params.threshold_factor();
    let guard = params.guard_cells;

    let mut data = vec![false; polar.azimuth_bins() * n];
    data.par_chunks_mut(n)
        .enumerate()
        .for_each(|(j, mask_line)| {
            let line = polar.line(j);
            // Prefix sums of linear power for O(1) window means.
            let mut linear = Vec::with_capacity(n);
            let mut prefix = Vec::with_capacity(n + 1);
            prefix.push(0.0);
            for v in line {
                let p = 10f64.powf(v / 10.0);
                linear.push(p);
                prefix.push(prefix.last().unwrap() + p);
            }
            let window_sum = |lo: usize, hi: usize| prefix[hi] - prefix[lo]; // [lo, hi)

            for i in 0..n {
                let left_hi = i.saturating_sub(guard);
                let left_lo = left_hi.saturating_sub(per_side);
                let right_lo = (i + guard + 1).min(n);
                let right_hi = (i + guard + 1 + per_side).min(n);
                let count = (left_hi - left_lo) + (right_hi - right_lo);
                if count == 0 {
                    continue;
                }
                let mean =
                    (window_sum(left_lo, left_hi) + window_sum(right_lo, right_hi)) / count as f64;
                mask_line[i] = linear[i] > alpha * mean;
            }
        });

    Ok(DetectionMask {
        data,
        azimuth_bins: polar.azimuth_bins(),
        range_bins: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polar_from_lines(lines: &[Vec<f64>]) -> PolarImage {
        let n = lines[0].len();
        let data: Vec<f64> = lines.iter().flatten().copied().collect();
        PolarImage::new(data, lines.len(), n, 0.05, 0.0, 1.0).unwrap()
    }

    #[test]
    fn flat_line_yields_no_detections() {
        let polar = polar_from_lines(&[vec![-20.0; 200]]);
        let params = CfarParams {
            train_cells: 32,
            guard_cells: 4,
            rate: 1.5,
            mode: CfarMode::Scale,
        };
        assert_eq!(ca_cfar(&polar, &params).unwrap().count(), 0);
    }

    #[test]
    fn lone_spike_is_the_only_detection() {
        let mut line = vec![-20.0; 200];
        line[100] = 10.0; // 30 dB above the floor
        let polar = polar_from_lines(&[line]);
        let params = CfarParams {
            train_cells: 32,
            guard_cells: 4,
            rate: 5.0,
            mode: CfarMode::Scale,
        };
        let mask = ca_cfar(&polar, &params).unwrap();
        assert_eq!(mask.cells(), vec![(0, 100)]);
    }

    #[test]
    fn scale_invariance_in_linear_power() {
        use rand::Rng;
        let mut rng = crate::rng::seeded_rng(3);
        let line: Vec<f64> = (0..500).map(|_| rng.random_range(-40.0..0.0)).collect();
        let polar = polar_from_lines(std::slice::from_ref(&line));
        // x7.3 in linear power is +10*log10(7.3) dB on every cell.
        let scaled: Vec<f64> = line.iter().map(|v| v + 10.0 * 7.3f64.log10()).collect();
        let polar_scaled = polar_from_lines(&[scaled]);
        for mode in [CfarMode::Scale, CfarMode::Pfa] {
            let params = CfarParams {
                train_cells: 32,
                guard_cells: 4,
                rate: if mode == CfarMode::Scale { 3.0 } else { 1e-2 },
                mode,
            };
            let a = ca_cfar(&polar, &params).unwrap();
            let b = ca_cfar(&polar_scaled, &params).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn pfa_mode_hits_the_design_false_alarm_rate() {
        use rand::Rng;
        // i.i.d. exponential linear power; the analytic alpha should give an
        // empirical false-alarm fraction within a factor of two.
        let mut rng = crate::rng::seeded_rng(7);
        let cells = 1_000_000usize;
        let lines = 100;
        let per_line = cells / lines;
        let data: Vec<f64> = (0..cells)
            .map(|_| {
                let u: f64 = rng.random_range(0.0f64..1.0).max(1e-300);
                let x = -u.ln(); // Exp(1)
                10.0 * x.log10()
            })
            .collect();
        let polar = PolarImage::new(data, lines, per_line, 0.05, 0.0, 1.0).unwrap();
        for pfa in [1e-2, 1e-3] {
            let params = CfarParams {
                train_cells: 32,
                guard_cells: 4,
                rate: pfa,
                mode: CfarMode::Pfa,
            };
            let frac = ca_cfar(&polar, &params).unwrap().count() as f64 / cells as f64;
            assert!(
                frac > pfa / 2.0 && frac < pfa * 2.0,
                "pfa {pfa}: empirical {frac}"
            );
        }
    }

    #[test]
    fn oversized_window_is_rejected() {
        let polar = polar_from_lines(&[vec![0.0; 64]]);
        let params = CfarParams {
            train_cells: 500,
            guard_cells: 30,
            rate: 0.22,
            mode: CfarMode::Scale,
        };
        assert!(ca_cfar(&polar, &params).is_err());
    }

    #[test]
    fn reference_defaults_match_published_settings() {
        let params = CfarParams::reference_defaults();
        assert_eq!(params.train_cells, 500);
        assert_eq!(params.guard_cells, 30);
        assert_eq!(params.rate, 0.22);
        assert_eq!(params.threshold_factor(), 0.22);
    }

    #[test]
    fn pfa_alpha_formula() {
        let params = CfarParams {
            train_cells: 32,
            guard_cells: 0,
            rate: 1e-2,
            mode: CfarMode::Pfa,
        };
        let expect = 32.0 * ((1e-2f64).powf(-1.0 / 32.0) - 1.0);
        assert!((params.threshold_factor() - expect).abs() < 1e-12);
    }
}
