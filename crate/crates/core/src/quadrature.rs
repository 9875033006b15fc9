//! Semi-infinite integrals `∫_{-∞}^0 w(τ) dτ` of exponentially damped,
//! possibly oscillating integrands.
//!
//! The infinite range is truncated at a point `τ_min` where the envelope bound
//! guarantees the discarded tail is below a tenth of the requested tolerance.
//! `[τ_min, 0]` is covered by Gauss-Kronrod 7/15 panels no wider than the decay
//! length or an eighth of the oscillation period, then refined by global
//! adaptive bisection of the worst panel.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

pub const DEFAULT_REL_TOL: f64 = 1e-9;
pub const MIN_REL_TOL: f64 = 1e-14;
pub const MAX_REL_TOL: f64 = 1e-3;
/// Integrand evaluations allowed before giving up.
pub const EVALUATION_BUDGET: usize = 1_000_000;
/// Absolute error floor added to the relative target.
pub const ABS_FLOOR: f64 = 1e-30;

const TAIL_SHARE: f64 = 0.1;

// Gauss-Kronrod 15-point abscissae and weights (QUADPACK qk15).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("envelope decay rate must be positive and finite, got {rate}")]
    InvalidEnvelope { rate: f64 },
    #[error("relative tolerance {0} outside [1e-14, 1e-3]")]
    InvalidTolerance(f64),
    #[error("no convergence after {evaluations} evaluations (value {value:e}, error estimate {error:e})")]
    NonConvergent {
        evaluations: usize,
        value: f64,
        error: f64,
    },
    #[error("integrand is not finite at tau = {tau}")]
    NonFiniteIntegrand { tau: f64 },
}

/// Bound `|w(τ)| ≤ amplitude_bound · exp(rate · τ)` for `τ ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEnvelope {
    pub rate: f64,
    pub amplitude_bound: f64,
    /// Period of the oscillating factor, if any; bounds the initial panel width.
    pub oscillation_period: Option<f64>,
}

impl DecayEnvelope {
    pub fn new(rate: f64, amplitude_bound: f64) -> Self {
        Self {
            rate,
            amplitude_bound,
            oscillation_period: None,
        }
    }

    pub fn with_oscillation(mut self, period: Option<f64>) -> Self {
        self.oscillation_period = period;
        self
    }

    /// `C e^{r τ} / r`, the tail mass left of `tau`.
    fn tail(&self, tau: f64) -> f64 {
        self.amplitude_bound * (self.rate * tau).exp() / self.rate
    }

    /// Most negative point needed so that the tail stays below `budget`.
    fn cut_for(&self, budget: f64) -> f64 {
        ((budget * self.rate / self.amplitude_bound).ln() / self.rate).min(0.0)
    }

    fn panel_width(&self) -> f64 {
        let decay = 1.0 / self.rate;
        match self.oscillation_period {
            Some(t) if t.is_finite() && t > 0.0 => decay.min(t / 8.0),
            _ => decay,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub truncation_point: f64,
    pub panel_count: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

struct Integrator<'f, F> {
    integrand: &'f F,
    evaluations: usize,
}

impl<F: Fn(f64) -> f64> Integrator<'_, F> {
    fn eval(&mut self, tau: f64) -> Result<f64, QuadratureError> {
        self.evaluations += 1;
        let w = (self.integrand)(tau);
        if w.is_finite() {
            Ok(w)
        } else {
            Err(QuadratureError::NonFiniteIntegrand { tau })
        }
    }

    fn gauss_kronrod(&mut self, a: f64, b: f64) -> Result<Panel, QuadratureError> {
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let fc = self.eval(center)?;
        let mut kronrod = fc * WGK[7];
        let mut gauss = fc * WG[3];
        for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
            let dx = half * x;
            let pair = self.eval(center - dx)? + self.eval(center + dx)?;
            kronrod += wk * pair;
            if j % 2 == 1 {
                gauss += WG[j / 2] * pair;
            }
        }
        Ok(Panel {
            a,
            b,
            value: kronrod * half,
            error: ((kronrod - gauss) * half).abs(),
        })
    }

    fn cover(
        &mut self,
        from: f64,
        to: f64,
        width: f64,
        heap: &mut BinaryHeap<Panel>,
    ) -> Result<(), QuadratureError> {
        let count = ((to - from) / width).ceil().max(1.0) as usize;
        let h = (to - from) / count as f64;
        for i in 0..count {
            let a = from + i as f64 * h;
            let b = if i + 1 == count { to } else { a + h };
            heap.push(self.gauss_kronrod(a, b)?);
            self.check_budget(heap)?;
        }
        Ok(())
    }

    fn check_budget(&self, heap: &BinaryHeap<Panel>) -> Result<(), QuadratureError> {
        if self.evaluations > EVALUATION_BUDGET {
            let (value, error) = totals(heap);
            return Err(QuadratureError::NonConvergent {
                evaluations: self.evaluations,
                value,
                error,
            });
        }
        Ok(())
    }
}

fn totals(heap: &BinaryHeap<Panel>) -> (f64, f64) {
    // Left-to-right summation keeps the result independent of heap layout.
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    panels
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
}

/// Integrates `integrand` over `(-∞, 0]` to relative accuracy `rel_tol`.
pub fn integrate_semi_infinite<F>(
    integrand: F,
    envelope: DecayEnvelope,
    rel_tol: f64,
) -> Result<QuadratureResult, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    if !(envelope.rate > 0.0 && envelope.rate.is_finite()) {
        return Err(QuadratureError::InvalidEnvelope {
            rate: envelope.rate,
        });
    }
    if !(MIN_REL_TOL..=MAX_REL_TOL).contains(&rel_tol) {
        return Err(QuadratureError::InvalidTolerance(rel_tol));
    }
    let envelope = DecayEnvelope {
        amplitude_bound: envelope.amplitude_bound.abs().max(f64::MIN_POSITIVE),
        ..envelope
    };

    let mut runner = Integrator {
        integrand: &integrand,
        evaluations: 0,
    };
    let width = envelope.panel_width();
    let mut heap = BinaryHeap::new();

    // A first window a few decay lengths deep gives the magnitude estimate the
    // truncation rule needs.
    let mut left = -(4.0 / envelope.rate).max(width);
    runner.cover(left, 0.0, width, &mut heap)?;

    loop {
        let (value, _) = totals(&heap);
        let tail_budget = TAIL_SHARE * rel_tol * value.abs().max(ABS_FLOOR);
        let cut = envelope.cut_for(tail_budget);
        if cut < left {
            runner.cover(cut, left, width, &mut heap)?;
            left = cut;
            continue;
        }

        let target = (1.0 - TAIL_SHARE) * rel_tol * value.abs() + ABS_FLOOR;
        let (_, error) = totals(&heap);
        if error <= target {
            let tail = envelope.tail(left);
            return Ok(QuadratureResult {
                value,
                abs_error_estimate: error + tail,
                truncation_point: left,
                panel_count: heap.len(),
                evaluations: runner.evaluations,
            });
        }

        // Refine until the panel error target is met, then re-check truncation.
        let mut error = error;
        while error > target {
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            let lo = runner.gauss_kronrod(worst.a, mid)?;
            let hi = runner.gauss_kronrod(mid, worst.b)?;
            error += lo.error + hi.error - worst.error;
            heap.push(lo);
            heap.push(hi);
            runner.check_budget(&heap)?;
            if error <= target {
                // Running sums drift; confirm with a clean total.
                error = totals(&heap).1;
            }
        }
    }
}
