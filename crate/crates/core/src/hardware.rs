//! Target-processor description: clock speed, core/thread topology, the
//! CPI penalty schedule, and per-architecture memory-contention curves.
//!
//! Contention is measured at a handful of thread counts. Queries at
//! other thread counts interpolate linearly between samples; beyond the
//! last sample the curve is extended along the slope of an ordinary
//! least-squares line fitted to the measured samples, anchored at the
//! last sample so the curve stays continuous and non-decreasing.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// A processor model: clock speed in cycles per second, scheduling
/// topology, and the CPI multiplier per hardware-thread occupancy level.
///
/// `cpi_schedule[k - 1]` is the CPI multiplier when `k` threads share a
/// core; it must be defined for every `k` in `1..=max_threads_per_core`,
/// start at >= 1 and be non-decreasing.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct HardwareProfile {
    pub name: String,
    pub clock_speed_hz: f64,
    pub cores: u32,
    pub max_threads_per_core: u32,
    pub cpi_schedule: Vec<f64>,
}

impl HardwareProfile {
    pub fn validate(&self) -> Result<(), HardwareError> {
        if !crate::num::positive(self.clock_speed_hz) {
            return Err(HardwareError::NonPositiveClock);
        }
        if self.cores == 0 || self.max_threads_per_core == 0 {
            return Err(HardwareError::EmptyTopology);
        }
        if self.cpi_schedule.len() != self.max_threads_per_core as usize {
            return Err(HardwareError::CpiScheduleLength {
                expected: self.max_threads_per_core,
                got: self.cpi_schedule.len(),
            });
        }
        let mut prev = 1.0;
        for (i, &cpi) in self.cpi_schedule.iter().enumerate() {
            if !(cpi.is_finite() && cpi >= prev) {
                return Err(HardwareError::CpiScheduleNotMonotone { index: i });
            }
            prev = cpi;
        }
        Ok(())
    }

    /// CPI multiplier when `threads` threads run on this processor.
    ///
    /// Threads are spread across cores, so the occupancy per core is
    /// `ceil(threads / cores)`, capped at the hardware limit; thread
    /// counts beyond `cores * max_threads_per_core` keep the densest
    /// schedule entry.
    pub fn cpi_for(&self, threads: u32) -> f64 {
        let occupancy = (threads.max(1) as u64).div_ceil(self.cores as u64);
        let occupancy = occupancy.min(self.max_threads_per_core as u64) as usize;
        self.cpi_schedule[occupancy - 1]
    }
}

/// One point of a contention curve: the per-image, per-epoch time
/// penalty observed (or predicted) when `threads` threads compete for
/// memory.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ContentionSample {
    pub threads: u32,
    pub seconds: f64,
    /// `true` for samples measured on the device; `false` for values
    /// that are themselves predictions. Only measured samples enter
    /// least-squares fits.
    #[cfg_attr(feature = "serde", serde(default = "default_measured"))]
    pub measured: bool,
}

#[cfg(feature = "serde")]
fn default_measured() -> bool {
    true
}

impl ContentionSample {
    pub fn measured(threads: u32, seconds: f64) -> Self {
        ContentionSample {
            threads,
            seconds,
            measured: true,
        }
    }

    pub fn predicted(threads: u32, seconds: f64) -> Self {
        ContentionSample {
            threads,
            seconds,
            measured: false,
        }
    }
}

/// The memory-contention curve of one CNN architecture.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ContentionProfile {
    pub architecture: String,
    pub samples: Vec<ContentionSample>,
}

/// An ordinary least-squares line over (threads, seconds) samples.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct LinearFit {
    /// Seconds of contention per additional thread.
    pub slope: f64,
    /// Seconds at zero threads.
    pub intercept: f64,
}

impl LinearFit {
    pub fn eval(&self, threads: u32) -> f64 {
        self.slope * threads as f64 + self.intercept
    }
}

impl ContentionProfile {
    pub fn new(
        architecture: impl Into<String>,
        samples: Vec<ContentionSample>,
    ) -> Result<Self, HardwareError> {
        let profile = ContentionProfile {
            architecture: architecture.into(),
            samples,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<(), HardwareError> {
        for (i, sample) in self.samples.iter().enumerate() {
            if !crate::num::non_negative(sample.seconds) {
                return Err(HardwareError::NegativeContention { index: i });
            }
            if i > 0 && sample.threads <= self.samples[i - 1].threads {
                return Err(HardwareError::SamplesNotIncreasing { index: i });
            }
        }
        Ok(())
    }

    /// The measured subset of the curve, e.g. for refitting or for
    /// reporting which rows a fit was built from.
    pub fn measured_only(&self) -> ContentionProfile {
        ContentionProfile {
            architecture: self.architecture.clone(),
            samples: self
                .samples
                .iter()
                .filter(|s| s.measured)
                .copied()
                .collect(),
        }
    }

    /// Ordinary least squares (with intercept) over the measured samples
    /// with `threads <= fit_range`; the default bound takes all measured
    /// samples. At least two in-range samples are required.
    pub fn fit(&self, fit_range: Option<u32>) -> Result<LinearFit, HardwareError> {
        self.validate()?;
        let bound = fit_range.unwrap_or(u32::MAX);
        let mut n = 0u32;
        let (mut sum_x, mut sum_y, mut sum_xx, mut sum_xy) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for sample in self
            .samples
            .iter()
            .filter(|s| s.measured && s.threads <= bound)
        {
            let x = sample.threads as f64;
            n += 1;
            sum_x += x;
            sum_y += sample.seconds;
            sum_xx += x * x;
            sum_xy += x * sample.seconds;
        }
        if n < 2 {
            return Err(HardwareError::NotEnoughSamples {
                available: n as usize,
            });
        }
        let n = n as f64;
        let denom = n * sum_xx - sum_x * sum_x;
        if denom == 0.0 {
            return Err(HardwareError::DegenerateFit);
        }
        let slope = (n * sum_xy - sum_x * sum_y) / denom;
        let intercept = (sum_y - slope * sum_x) / n;
        Ok(LinearFit { slope, intercept })
    }

    /// Contention at an arbitrary thread count.
    ///
    /// Sample points return their stored value exactly. Thread counts
    /// between two samples interpolate linearly. Beyond the last sample
    /// the curve follows the measured-sample OLS slope anchored at the
    /// last sample; below the first sample it follows the OLS line
    /// itself. Results are clamped at zero.
    pub fn contention_at(&self, threads: u32) -> Result<f64, HardwareError> {
        self.validate()?;
        let samples = &self.samples;
        if samples.is_empty() {
            return Err(HardwareError::EmptyProfile {
                architecture: self.architecture.clone(),
            });
        }
        if let Some(s) = samples.iter().find(|s| s.threads == threads) {
            return Ok(s.seconds);
        }
        let first = samples[0];
        let last = samples[samples.len() - 1];
        if threads > last.threads {
            let fit = self.fit(None)?;
            let extended = last.seconds + fit.slope * (threads - last.threads) as f64;
            return Ok(extended.max(0.0));
        }
        if threads < first.threads {
            let fit = self.fit(None)?;
            return Ok(fit.eval(threads).max(0.0));
        }
        let upper = samples
            .iter()
            .position(|s| s.threads > threads)
            .expect("bracketed");
        let lo = samples[upper - 1];
        let hi = samples[upper];
        let fraction = (threads - lo.threads) as f64 / (hi.threads - lo.threads) as f64;
        Ok((lo.seconds + fraction * (hi.seconds - lo.seconds)).max(0.0))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HardwareError {
    NonPositiveClock,
    EmptyTopology,
    CpiScheduleLength { expected: u32, got: usize },
    CpiScheduleNotMonotone { index: usize },
    NegativeContention { index: usize },
    SamplesNotIncreasing { index: usize },
    EmptyProfile { architecture: String },
    NotEnoughSamples { available: usize },
    DegenerateFit,
}

impl fmt::Display for HardwareError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HardwareError::NonPositiveClock => write!(f, "clock speed must be positive"),
            HardwareError::EmptyTopology => {
                write!(f, "cores and max_threads_per_core must be at least 1")
            }
            HardwareError::CpiScheduleLength { expected, got } => {
                write!(f, "cpi_schedule must have {expected} entries (one per threads-per-core level), got {got}")
            }
            HardwareError::CpiScheduleNotMonotone { index } => {
                write!(
                    f,
                    "cpi_schedule entry {index} breaks the >= 1, non-decreasing requirement"
                )
            }
            HardwareError::NegativeContention { index } => {
                write!(f, "contention sample {index} is negative")
            }
            HardwareError::SamplesNotIncreasing { index } => {
                write!(
                    f,
                    "contention samples must be strictly increasing in threads (sample {index})"
                )
            }
            HardwareError::EmptyProfile { architecture } => {
                write!(f, "contention profile for '{architecture}' has no samples")
            }
            HardwareError::NotEnoughSamples { available } => {
                write!(
                    f,
                    "need at least 2 in-range measured samples to fit, got {available}"
                )
            }
            HardwareError::DegenerateFit => write!(f, "samples do not span distinct thread counts"),
        }
    }
}

impl core::error::Error for HardwareError {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use alloc::vec;
    use approx::assert_relative_eq;

    fn phi() -> HardwareProfile {
        Dataset::reference().hardware
    }

    #[test]
    fn cpi_breakpoints() {
        let hw = phi();
        assert_eq!(hw.cpi_for(1), 1.0);
        assert_eq!(hw.cpi_for(60), 1.0);
        assert_eq!(hw.cpi_for(120), 1.0);
        assert_eq!(hw.cpi_for(121), 1.5);
        assert_eq!(hw.cpi_for(180), 1.5);
        assert_eq!(hw.cpi_for(181), 2.0);
        assert_eq!(hw.cpi_for(240), 2.0);
        // beyond the hardware thread count the densest level applies
        assert_eq!(hw.cpi_for(3840), 2.0);
    }

    #[test]
    fn exact_line_through_two_points() {
        let profile = ContentionProfile::new(
            "toy",
            vec![
                ContentionSample::measured(1, 1.0),
                ContentionSample::measured(2, 2.0),
            ],
        )
        .unwrap();
        let fit = profile.fit(None).unwrap();
        assert_relative_eq!(fit.slope, 1.0, max_relative = 1e-12);
        assert_relative_eq!(fit.intercept, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn medium_fit_matches_closed_form() {
        // independent oracle: centered-form least squares over the measured rows
        let data = Dataset::reference();
        let profile = &data.entry("medium").unwrap().model.contention;
        let measured: Vec<(f64, f64)> = profile
            .samples
            .iter()
            .filter(|s| s.measured)
            .map(|s| (s.threads as f64, s.seconds))
            .collect();
        let n = measured.len() as f64;
        let mx = measured.iter().map(|(x, _)| x).sum::<f64>() / n;
        let my = measured.iter().map(|(_, y)| y).sum::<f64>() / n;
        let sxy: f64 = measured.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = measured.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        let oracle_slope = sxy / sxx;
        let oracle_intercept = my - oracle_slope * mx;

        let fit = profile.fit(None).unwrap();
        assert_relative_eq!(fit.slope, oracle_slope, max_relative = 1e-9);
        assert_relative_eq!(fit.intercept, oracle_intercept, max_relative = 1e-9);

        // frozen values from the oracle
        assert_relative_eq!(fit.slope, 1.5415769579e-4, max_relative = 1e-6);
        assert_relative_eq!(fit.intercept, -8.0426735456e-4, max_relative = 1e-6);
        assert_relative_eq!(fit.eval(480), 7.3191426626e-2, max_relative = 1e-6);
    }

    #[test]
    fn fits_reproduce_published_predicted_rows() {
        let data = Dataset::reference();
        let small = data
            .entry("small")
            .unwrap()
            .model
            .contention
            .fit(None)
            .unwrap();
        // published predicted value for 960 threads is 5.60e-2
        assert_relative_eq!(small.eval(960), 5.5836352856e-2, max_relative = 1e-6);
        assert!((small.eval(960) - 5.60e-2).abs() / 5.60e-2 < 0.02);

        let large = data
            .entry("large")
            .unwrap()
            .model
            .contention
            .fit(None)
            .unwrap();
        assert_relative_eq!(large.eval(3840), 2.1856851698, max_relative = 1e-6);
        assert!((large.eval(3840) - 2.19).abs() / 2.19 < 0.02);
    }

    #[test]
    fn contention_at_returns_samples_exactly() {
        let data = Dataset::reference();
        let small = &data.entry("small").unwrap().model.contention;
        assert_eq!(small.contention_at(1).unwrap(), 7.10e-6);
        assert_eq!(small.contention_at(240).unwrap(), 1.40e-2);
        // bundled predicted rows are sample points too
        assert_eq!(small.contention_at(480).unwrap(), 2.78e-2);
    }

    #[test]
    fn contention_at_interpolates_between_samples() {
        let data = Dataset::reference();
        let small = &data.entry("small").unwrap().model.contention;
        // halfway between the 240 and 480 samples (frozen from the oracle)
        assert_relative_eq!(
            small.contention_at(300).unwrap(),
            1.745e-2,
            max_relative = 1e-9
        );
    }

    #[test]
    fn contention_at_extends_continuously_beyond_last_sample() {
        let data = Dataset::reference();
        let small = &data.entry("small").unwrap().model.contention;
        let at_last = small.contention_at(3840).unwrap();
        let beyond = small.contention_at(3841).unwrap();
        assert!(beyond >= at_last);
        assert!(beyond - at_last < 1e-3);
        assert_relative_eq!(
            small.contention_at(4000).unwrap(),
            0.2343531082,
            max_relative = 1e-6
        );
    }

    #[test]
    fn extrapolation_clamps_at_zero() {
        let profile = ContentionProfile::new(
            "steep",
            vec![
                ContentionSample::measured(100, 1.0),
                ContentionSample::measured(200, 3.0),
            ],
        )
        .unwrap();
        // fitted line is 0.02 * p - 1.0, negative below p = 50
        assert_eq!(profile.contention_at(1).unwrap(), 0.0);
    }

    #[test]
    fn fit_requires_two_in_range_samples() {
        let profile = ContentionProfile::new(
            "sparse",
            vec![
                ContentionSample::measured(100, 1.0),
                ContentionSample::measured(200, 3.0),
            ],
        )
        .unwrap();
        assert_eq!(
            profile.fit(Some(150)).unwrap_err(),
            HardwareError::NotEnoughSamples { available: 1 }
        );
    }

    #[test]
    fn empty_profile_is_an_error() {
        let profile = ContentionProfile::new("empty", vec![]).unwrap();
        assert!(matches!(
            profile.contention_at(10).unwrap_err(),
            HardwareError::EmptyProfile { .. }
        ));
    }

    #[test]
    fn unsorted_samples_are_rejected() {
        let err = ContentionProfile::new(
            "unsorted",
            vec![
                ContentionSample::measured(10, 1.0),
                ContentionSample::measured(10, 2.0),
            ],
        )
        .unwrap_err();
        assert_eq!(err, HardwareError::SamplesNotIncreasing { index: 1 });
    }
}
