//! Real trigonometric interpolation of uniformly sampled periodic data.
//!
//! Used for tabulated drive profiles and for the memoized photon-number
//! table. Coefficients come from an FFT of the samples; harmonics whose
//! magnitude falls below a relative cutoff are dropped so evaluation cost
//! tracks the smoothness of the data rather than the sample count.

use std::f64::consts::TAU;

use rustfft::{num_complex::Complex, FftPlanner};

const RELATIVE_CUTOFF: f64 = 5e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct TrigInterpolant {
    period: f64,
    mean: f64,
    /// `(a_k, b_k)` for harmonics `k = 1..=len`.
    harmonics: Vec<(f64, f64)>,
}

impl TrigInterpolant {
    /// Builds the interpolant through `samples[j] = y(j * period / N)`.
    pub fn from_samples(samples: &[f64], period: f64) -> Self {
        let n = samples.len();
        assert!(n >= 1, "at least one sample required");
        assert!(
            period > 0.0 && period.is_finite(),
            "period must be positive"
        );

        let mut buf: Vec<Complex<f64>> = samples.iter().map(|&y| Complex::new(y, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        let mean = buf[0].re * scale;

        let half = n / 2;
        let mut harmonics = Vec::with_capacity(half);
        for (k, raw) in buf.iter().enumerate().take(half + 1).skip(1) {
            let c = *raw * scale;
            if 2 * k == n {
                harmonics.push((c.re, 0.0));
            } else {
                harmonics.push((2.0 * c.re, -2.0 * c.im));
            }
        }

        let peak = harmonics
            .iter()
            .map(|(a, b)| a.hypot(*b))
            .fold(mean.abs(), f64::max);
        let cutoff = peak * RELATIVE_CUTOFF;
        while let Some(&(a, b)) = harmonics.last() {
            if a.hypot(b) > cutoff {
                break;
            }
            harmonics.pop();
        }

        Self {
            period,
            mean,
            harmonics,
        }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn harmonic_count(&self) -> usize {
        self.harmonics.len()
    }

    fn angle(&self, t: f64) -> f64 {
        TAU * t.rem_euclid(self.period) / self.period
    }

    /// Sums `a_k * cos(k θ) + b_k * sin(k θ)` (and the integrated series when
    /// `integrated` is set) with a rotation recurrence.
    fn series(&self, t: f64, integrated: bool) -> f64 {
        let theta = self.angle(t);
        let (s1, c1) = theta.sin_cos();
        let omega = TAU / self.period;
        let (mut c, mut s) = (c1, s1);
        let mut acc = 0.0;
        for (i, &(a, b)) in self.harmonics.iter().enumerate() {
            let k = (i + 1) as f64;
            if integrated {
                acc += (a * s - b * c) / (k * omega);
            } else {
                acc += a * c + b * s;
            }
            let next_c = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = next_c;
        }
        acc
    }

    pub fn value(&self, t: f64) -> f64 {
        self.mean + self.series(t, false)
    }

    /// Periodic antiderivative of `value(t) - mean()`.
    pub fn oscillation_integral(&self, t: f64) -> f64 {
        self.series(t, true)
    }

    /// Upper bound on `|oscillation_integral|`.
    pub fn oscillation_bound(&self) -> f64 {
        let omega = TAU / self.period;
        self.harmonics
            .iter()
            .enumerate()
            .map(|(i, (a, b))| a.hypot(*b) / ((i + 1) as f64 * omega))
            .sum()
    }

    /// Upper bound on `|value - mean|`.
    pub fn deviation_bound(&self) -> f64 {
        self.harmonics.iter().map(|(a, b)| a.hypot(*b)).sum()
    }
}
